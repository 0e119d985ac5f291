//! Measurement suite for persistent-agent workspaces.
//!
//! `parem` turns a workspace of line-oriented session logs, dated memory
//! files and project artifacts into a set of descriptive metrics:
//!
//! | Metric | Meaning |
//! |--------|---------|
//! | ADF | active days / calendar days in the observation window |
//! | DRC | de-duplicated record count |
//! | ATE | capped-gap active-time estimate, in hours |
//! | CDR | cache-read tokens / all recorded tokens |
//! | OPR | output-proxy events per active day |
//! | GER | governance events per active day |
//! | ASB | distinct artifact surfaces with at least one file |
//!
//! Every metric is reported with its numerator, denominator, window and
//! computation rule. The pipeline is split into modules that can be used on
//! their own:
//!
//! * [`ingest`] discovers files and parses records tolerantly into [`Event`]s.
//! * [`dedup`] assigns stable identity keys and removes repeated records.
//! * [`activetime`] sums capped inter-event gaps.
//! * [`extraction`] finds output-proxy and governance events in memory notes.
//! * [`classify`] maps files to artifact surfaces.
//! * [`tokens`] aggregates token telemetry per route and per day.
//! * [`metrics`] assembles the metric suite.
//! * [`report`] renders reports and CSV exports.
//! * [`synth`] generates synthetic workspaces with known ground truth.
//! * [`pipeline`] runs everything end to end.
//!
//! The accompanying guide in `book/` walks through each measure; its code
//! snippets are compiled and run as doc-tests of this crate.

pub mod activetime;
pub mod classify;
pub mod config;
pub mod dedup;
mod error;
pub mod extraction;
pub mod ingest;
pub mod metrics;
pub mod pipeline;
pub mod report;
pub mod synth;
pub mod tokens;

pub use error::{Error, Result};
pub use ingest::{Event, Role, TokenUsage};

/// Version stamped into every report's provenance block.
pub const TOOL_VERSION: &str = env!("CARGO_PKG_VERSION");

/// Name of the measurement framework version implemented here.
pub const FRAMEWORK: &str = "PARE-M v0.1";

// The guide's chapters are compiled as doc-tests so their snippets can't rot.
#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/introduction.md")]
    mod introduction {}
    #[doc = include_str!("../../../book/src/ingest.md")]
    mod ingest {}
    #[doc = include_str!("../../../book/src/dedup.md")]
    mod dedup {}
    #[doc = include_str!("../../../book/src/active-time.md")]
    mod active_time {}
    #[doc = include_str!("../../../book/src/extraction.md")]
    mod extraction {}
    #[doc = include_str!("../../../book/src/surfaces.md")]
    mod surfaces {}
    #[doc = include_str!("../../../book/src/tokens.md")]
    mod tokens {}
    #[doc = include_str!("../../../book/src/metrics.md")]
    mod metrics {}
    #[doc = include_str!("../../../book/src/synthetic.md")]
    mod synthetic {}
    #[doc = include_str!("../../../book/src/cli.md")]
    mod cli {}
}
