//! The metric suite. Each [`MetricValue`] carries its numerator,
//! denominator, window and rule identifier alongside the value, and a
//! metric whose denominator is zero is reported as undefined with a reason
//! rather than as zero or infinity.

use std::collections::BTreeSet;

use chrono::NaiveDate;
use serde::{Deserialize, Serialize};

use crate::activetime::{self, MS_PER_HOUR};
use crate::classify::SurfaceCounts;
use crate::config::ObservationWindow;
use crate::ingest::{Event, Role};
use crate::tokens::TokenTotals;
use crate::Result;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Metric {
    #[serde(rename = "ADF")]
    Adf,
    #[serde(rename = "DRC")]
    Drc,
    #[serde(rename = "ATE")]
    Ate,
    #[serde(rename = "CDR")]
    Cdr,
    #[serde(rename = "OPR")]
    Opr,
    #[serde(rename = "GER")]
    Ger,
    #[serde(rename = "ASB")]
    Asb,
}

impl Metric {
    pub const ALL: [Metric; 7] = [
        Metric::Adf,
        Metric::Drc,
        Metric::Ate,
        Metric::Cdr,
        Metric::Opr,
        Metric::Ger,
        Metric::Asb,
    ];

    pub fn code(self) -> &'static str {
        match self {
            Metric::Adf => "ADF",
            Metric::Drc => "DRC",
            Metric::Ate => "ATE",
            Metric::Cdr => "CDR",
            Metric::Opr => "OPR",
            Metric::Ger => "GER",
            Metric::Asb => "ASB",
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Metric::Adf => "Active-day fraction",
            Metric::Drc => "De-duplicated record count",
            Metric::Ate => "Active-time estimate",
            Metric::Cdr => "Cache-dominance ratio",
            Metric::Opr => "Output-proxy rate",
            Metric::Ger => "Governance-event rate",
            Metric::Asb => "Artifact-surface breadth",
        }
    }

    /// Identifier of the computation rule behind the metric.
    pub fn rule_id(self) -> &'static str {
        match self {
            Metric::Adf => "pare-m/0.1/adf:active-days-over-calendar-days",
            Metric::Drc => "pare-m/0.1/drc:id-then-content-then-trajectory-key",
            Metric::Ate => "pare-m/0.1/ate:capped-gap-seconds-over-3600",
            Metric::Cdr => "pare-m/0.1/cdr:cache-read-over-all-tokens",
            Metric::Opr => "pare-m/0.1/opr:output-proxies-over-active-days",
            Metric::Ger => "pare-m/0.1/ger:governance-events-over-active-days",
            Metric::Asb => "pare-m/0.1/asb:surfaces-with-files",
        }
    }

    pub fn unit(self) -> &'static str {
        match self {
            Metric::Adf | Metric::Cdr => "proportion",
            Metric::Drc | Metric::Asb => "count",
            Metric::Ate => "hours",
            Metric::Opr | Metric::Ger => "events per active day",
        }
    }

    /// Value formatted at reporting precision.
    pub fn format(self, value: f64) -> String {
        match self {
            Metric::Adf | Metric::Cdr => format!("{value:.3}"),
            Metric::Opr | Metric::Ger => format!("{value:.2}"),
            Metric::Ate => format!("{value:.1}"),
            Metric::Drc | Metric::Asb => format!("{value:.0}"),
        }
    }
}

impl std::fmt::Display for Metric {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.code())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricValue {
    pub metric: Metric,
    pub numerator: f64,
    pub denominator: f64,
    pub window: ObservationWindow,
    pub rule_id: String,
    /// `numerator / denominator`, or `None` when the denominator is zero.
    pub value: Option<f64>,
    pub undefined_reason: Option<String>,
}

impl MetricValue {
    pub fn new(metric: Metric, numerator: f64, denominator: f64, window: ObservationWindow, reason_if_zero: &str) -> Self {
        let defined = denominator > 0.0;
        MetricValue {
            metric,
            numerator,
            denominator,
            window,
            rule_id: metric.rule_id().to_string(),
            value: defined.then(|| numerator / denominator),
            undefined_reason: (!defined).then(|| reason_if_zero.to_string()),
        }
    }

    /// Value at reporting precision, or `undefined (<reason>)`.
    pub fn display(&self) -> String {
        match (self.value, &self.undefined_reason) {
            (Some(v), _) => self.metric.format(v),
            (None, Some(reason)) => format!("undefined ({reason})"),
            (None, None) => "undefined".to_string(),
        }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct RoleCounts {
    pub user: u64,
    pub assistant: u64,
    pub tool_result: u64,
    pub tool_call: u64,
    pub model_completed: u64,
    pub other: u64,
}

impl RoleCounts {
    pub fn get(&self, role: Role) -> u64 {
        match role {
            Role::User => self.user,
            Role::Assistant => self.assistant,
            Role::ToolResult => self.tool_result,
            Role::ToolCall => self.tool_call,
            Role::ModelCompleted => self.model_completed,
            Role::Other => self.other,
        }
    }

    fn bump(&mut self, role: Role) {
        let slot = match role {
            Role::User => &mut self.user,
            Role::Assistant => &mut self.assistant,
            Role::ToolResult => &mut self.tool_result,
            Role::ToolCall => &mut self.tool_call,
            Role::ModelCompleted => &mut self.model_completed,
            Role::Other => &mut self.other,
        };
        *slot += 1;
    }

    pub fn total(&self) -> u64 {
        Role::ALL.iter().map(|&r| self.get(r)).sum()
    }
}

pub fn role_counts<'a, I>(events: I) -> RoleCounts
where
    I: IntoIterator<Item = &'a Event>,
{
    let mut counts = RoleCounts::default();
    for e in events {
        counts.bump(e.role);
    }
    counts
}

/// UTC dates with at least one timed event, restricted to `window`.
pub fn active_days<'a, I>(events: I, window: &ObservationWindow) -> BTreeSet<NaiveDate>
where
    I: IntoIterator<Item = &'a Event>,
{
    events
        .into_iter()
        .filter_map(Event::date)
        .filter(|d| window.contains(*d))
        .collect()
}

pub fn calendar_days(window: &ObservationWindow) -> u32 {
    window.calendar_days()
}

/// Raw counts behind the metric suite. Every metric is a ratio of two of
/// these, so injecting known counts reproduces known rates exactly.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct MetricCounts {
    pub active_days: u64,
    pub records: u64,
    pub primary_capped_ms: i64,
    pub sensitivity_capped_ms: i64,
    pub cache_read_tokens: u64,
    pub total_tokens: u64,
    pub output_proxies: u64,
    pub governance_events: u64,
    pub surfaces: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricReport {
    pub framework: String,
    pub window: ObservationWindow,
    pub calendar_days: u32,
    pub primary_cap_minutes: u32,
    pub sensitivity_cap_minutes: u32,
    /// Metrics in fixed order: ADF, DRC, ATE, CDR, OPR, GER, ASB.
    pub values: Vec<MetricValue>,
    /// ATE recomputed at the sensitivity cap.
    pub ate_sensitivity: MetricValue,
    pub counts: MetricCounts,
    pub role_counts: RoleCounts,
    pub active_days: Vec<NaiveDate>,
    pub annotations: Vec<String>,
}

impl MetricReport {
    pub fn get(&self, metric: Metric) -> &MetricValue {
        self.values
            .iter()
            .find(|v| v.metric == metric)
            .expect("every metric is present")
    }
}

const NO_ACTIVE_DAYS: &str = "no_active_days";
const NO_TOKENS: &str = "no_recorded_tokens";

/// Builds the metric suite from raw counts.
pub fn metrics_from_counts(counts: MetricCounts, window: ObservationWindow, primary_cap: u32, sensitivity_cap: u32) -> MetricReport {
    let days = f64::from(window.calendar_days());
    let ms_per_s = 1000.0;
    let ate = |ms: i64| MetricValue::new(Metric::Ate, ms as f64 / ms_per_s, (MS_PER_HOUR / 1000) as f64, window, "");
    let values = vec![
        MetricValue::new(Metric::Adf, counts.active_days as f64, days, window, "empty_window"),
        MetricValue::new(Metric::Drc, counts.records as f64, 1.0, window, ""),
        ate(counts.primary_capped_ms),
        MetricValue::new(Metric::Cdr, counts.cache_read_tokens as f64, counts.total_tokens as f64, window, NO_TOKENS),
        MetricValue::new(Metric::Opr, counts.output_proxies as f64, counts.active_days as f64, window, NO_ACTIVE_DAYS),
        MetricValue::new(Metric::Ger, counts.governance_events as f64, counts.active_days as f64, window, NO_ACTIVE_DAYS),
        MetricValue::new(Metric::Asb, counts.surfaces as f64, 1.0, window, ""),
    ];
    MetricReport {
        framework: crate::FRAMEWORK.to_string(),
        window,
        calendar_days: window.calendar_days(),
        primary_cap_minutes: primary_cap,
        sensitivity_cap_minutes: sensitivity_cap,
        values,
        ate_sensitivity: ate(counts.sensitivity_capped_ms),
        counts,
        role_counts: RoleCounts::default(),
        active_days: Vec::new(),
        annotations: Vec::new(),
    }
}

/// Inputs to [`compute_pare_m`], all computed upstream.
#[derive(Debug, Clone, Copy)]
pub struct MetricInputs<'a> {
    /// De-duplicated events in the analysis scope.
    pub events: &'a [Event],
    pub output_proxies: u64,
    pub governance_events: u64,
    pub surfaces: &'a SurfaceCounts,
    pub window: ObservationWindow,
    pub tokens: &'a TokenTotals,
    pub primary_cap: u32,
    pub sensitivity_cap: u32,
}

pub fn compute_pare_m(inputs: MetricInputs<'_>) -> Result<MetricReport> {
    let window = inputs.window;
    let days = active_days(inputs.events, &window);
    let timestamps = windowed_timestamps(inputs.events, &window);
    let primary = activetime::active_time(&timestamps, inputs.primary_cap)?;
    let sensitivity = activetime::active_time(&timestamps, inputs.sensitivity_cap)?;
    let counts = MetricCounts {
        active_days: days.len() as u64,
        records: inputs.events.len() as u64,
        primary_capped_ms: primary.capped_ms,
        sensitivity_capped_ms: sensitivity.capped_ms,
        cache_read_tokens: inputs.tokens.cache_read,
        total_tokens: inputs.tokens.total(),
        output_proxies: inputs.output_proxies,
        governance_events: inputs.governance_events,
        surfaces: inputs.surfaces.asb(),
    };
    let mut report = metrics_from_counts(counts, window, inputs.primary_cap, inputs.sensitivity_cap);
    report.role_counts = role_counts(inputs.events);
    if let Some(first) = inputs.events.iter().filter_map(Event::date).filter(|d| window.contains(*d)).min() {
        if first > window.start_date {
            report.annotations.push(format!(
                "ADF is a lower bound: the denominator spans the whole window from {} but the first recoverable event is on {first}",
                window.start_date
            ));
        }
    }
    report.active_days = days.into_iter().collect();
    Ok(report)
}

/// Timestamps of events dated inside the window.
pub fn windowed_timestamps(events: &[Event], window: &ObservationWindow) -> Vec<i64> {
    events
        .iter()
        .filter(|e| e.date().is_some_and(|d| window.contains(d)))
        .filter_map(|e| e.timestamp_ms)
        .collect()
}
