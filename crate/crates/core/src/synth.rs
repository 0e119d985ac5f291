//! Seeded synthetic workspaces with exact ground truth.
//!
//! [`generate_corpus`] writes a workspace laid out like the shipped config
//! expects and returns a [`GroundTruth`] tallied while writing. The truth is
//! bookkept by the generator itself, never by running the analysis code,
//! so the two can be compared.
//!
//! The corpus contains:
//!
//! - main-agent session files mixing id-bearing, nested and epoch-timestamp
//!   records, untimed records and malformed lines;
//! - trajectory files with model completions, some without a wall-clock
//!   timestamp;
//! - backup copies and repeated lines that de-duplication must remove;
//! - other-agent sessions that only count under the `all` scope;
//! - daily memory files with planted output and governance sentences,
//!   separated by neutral filler, plus exclusion traps;
//! - files under configured surface prefixes, and skill files.

use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use chrono::{DateTime, Duration, FixedOffset, NaiveDate, Utc};
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::config::ObservationWindow;
use crate::{Error, Result};

/// SplitMix64; small, fast and stable across platforms.
#[derive(Debug, Clone)]
pub struct SplitMix64(u64);

impl SplitMix64 {
    pub fn new(seed: u64) -> Self {
        SplitMix64(seed)
    }

    pub fn next_u64(&mut self) -> u64 {
        self.0 = self.0.wrapping_add(0x9E37_79B9_7F4A_7C15);
        let mut z = self.0;
        z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
        z ^ (z >> 31)
    }

    /// Uniform in `[0, 1)`.
    pub fn next_f64(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 / (1u64 << 53) as f64
    }

    /// Uniform in `lo..=hi`.
    pub fn range(&mut self, lo: u64, hi: u64) -> u64 {
        if hi <= lo {
            return lo;
        }
        lo + self.next_u64() % (hi - lo + 1)
    }

    pub fn chance(&mut self, p: f64) -> bool {
        self.next_f64() < p
    }

    pub fn pick<'a, T>(&mut self, items: &'a [T]) -> &'a T {
        &items[self.range(0, items.len() as u64 - 1) as usize]
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RouteSpec {
    pub name: String,
    pub model: String,
    pub weight: u32,
    /// Multiplier on the cache-write draw.
    pub cache_write_scale: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CorpusSpec {
    pub seed: u64,
    pub start_date: NaiveDate,
    pub days: u32,
    pub active_day_probability: f64,
    pub events_per_active_day: (u32, u32),
    pub session_files_per_day: u32,
    pub short_gap_seconds: (u32, u32),
    pub long_gap_minutes: (u32, u32),
    pub long_gap_rate: f64,
    pub completion_rate: f64,
    pub id_rate: f64,
    pub untimed_rate: f64,
    pub untimed_completion_rate: f64,
    pub backup_rate: f64,
    pub repeat_line_rate: f64,
    /// Chance of a malformed line ahead of each record line.
    pub junk_rate: f64,
    pub routes: Vec<RouteSpec>,
    pub input_tokens: (u64, u64),
    pub output_tokens: (u64, u64),
    pub cache_read_tokens: (u64, u64),
    pub cache_write_tokens: (u64, u64),
    pub zero_output_rate: f64,
    pub memory_day_rate: f64,
    pub output_proxies_per_day: (u32, u32),
    pub governance_per_day: (u32, u32),
    pub exclusion_traps_per_day: (u32, u32),
    pub surfaces_used: u32,
    pub files_per_surface: u32,
    pub unclassified_files: u32,
    pub other_agents: u32,
    pub other_agent_events: u32,
    pub skills: u32,
}

impl Default for CorpusSpec {
    fn default() -> Self {
        CorpusSpec {
            seed: 1,
            start_date: NaiveDate::from_ymd_opt(2026, 1, 31).unwrap(),
            days: 21,
            active_day_probability: 0.75,
            events_per_active_day: (5, 60),
            session_files_per_day: 1,
            short_gap_seconds: (5, 1200),
            long_gap_minutes: (20, 240),
            long_gap_rate: 0.1,
            completion_rate: 0.35,
            id_rate: 0.5,
            untimed_rate: 0.05,
            untimed_completion_rate: 0.05,
            backup_rate: 0.2,
            repeat_line_rate: 0.03,
            junk_rate: 0.05,
            routes: vec![
                RouteSpec {
                    name: "openai-codex".into(),
                    model: "gpt-5.3-codex".into(),
                    weight: 3,
                    cache_write_scale: 0.0,
                },
                RouteSpec {
                    name: "anthropic".into(),
                    model: "claude-opus".into(),
                    weight: 1,
                    cache_write_scale: 1.0,
                },
            ],
            input_tokens: (200, 20_000),
            output_tokens: (20, 4_000),
            cache_read_tokens: (0, 400_000),
            cache_write_tokens: (0, 30_000),
            zero_output_rate: 0.03,
            memory_day_rate: 0.8,
            output_proxies_per_day: (0, 4),
            governance_per_day: (0, 3),
            exclusion_traps_per_day: (0, 2),
            surfaces_used: 7,
            files_per_surface: 3,
            unclassified_files: 4,
            other_agents: 2,
            other_agent_events: 12,
            skills: 3,
        }
    }
}

impl CorpusSpec {
    pub fn with_seed(seed: u64) -> Self {
        CorpusSpec {
            seed,
            ..Self::default()
        }
    }

    /// Roughly `events` session events spread over `files` session files.
    pub fn large(seed: u64, events: u32, files: u32) -> Self {
        let days = (files / 10).max(1);
        let per_day = events / days;
        CorpusSpec {
            seed,
            days,
            active_day_probability: 1.0,
            events_per_active_day: (per_day, per_day),
            session_files_per_day: 10,
            short_gap_seconds: (1, 40),
            long_gap_rate: 0.0,
            ..Self::default()
        }
    }

    pub fn window(&self) -> ObservationWindow {
        ObservationWindow {
            start_date: self.start_date,
            end_date: self.start_date + Duration::days(i64::from(self.days.max(1)) - 1),
        }
    }

    fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::InvalidArgument(m.to_string()));
        if self.days == 0 {
            return bad("days must be positive");
        }
        if self.session_files_per_day == 0 {
            return bad("session_files_per_day must be positive");
        }
        if self.routes.is_empty() || self.routes.iter().all(|r| r.weight == 0) {
            return bad("at least one route with positive weight is required");
        }
        if self.surfaces_used as usize > SURFACES.len() {
            return bad("surfaces_used exceeds the number of configured surfaces");
        }
        if self.short_gap_seconds.0 == 0 {
            return bad("short gaps must be at least one second");
        }
        Ok(())
    }
}

/// Token sums for one group of completions.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct TokenTruth {
    pub input: u64,
    pub output: u64,
    pub cache_read: u64,
    pub cache_write: u64,
    pub completions: u64,
}

/// Duplicate records planted, by the key tier that identifies them.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct DuplicateTruth {
    pub explicit_id: u64,
    pub content_hash: u64,
    pub trajectory_hash: u64,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct InventoryTruth {
    pub total_files: u64,
    pub memory_files: u64,
    pub daily_memory_files: u64,
    pub agent_dirs: u64,
    pub skill_files: u64,
    pub main_session_files: u64,
    pub all_session_files: u64,
    pub trajectory_files: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroundTruth {
    pub seed: u64,
    pub window: ObservationWindow,
    pub calendar_days: u64,
    pub active_days: Vec<NaiveDate>,
    /// Unique main-scope records, timed or not.
    pub records_main: u64,
    /// Unique records across every agent.
    pub records_all: u64,
    /// Main-scope record lines before de-duplication.
    pub parsed_main: u64,
    pub duplicates_main: DuplicateTruth,
    pub untimed_main: u64,
    pub role_counts: BTreeMap<String, u64>,
    /// Capped-gap milliseconds over unique timed main records, by cap in minutes.
    pub capped_ms: BTreeMap<u32, i64>,
    pub tokens: TokenTruth,
    pub routes: BTreeMap<String, TokenTruth>,
    pub dated_sections: u64,
    pub output_proxies: u64,
    pub governance_events: u64,
    /// Governance events per class; `untagged` for the classless family.
    pub governance_by_class: BTreeMap<String, u64>,
    /// Files per surface, nonzero surfaces only, fallback included.
    pub surfaces: BTreeMap<String, u64>,
    pub asb: u64,
    pub inventory: InventoryTruth,
}

impl GroundTruth {
    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)? + "\n")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }
}

const SURFACES: [(&str, &str); 10] = [
    ("manuscripts/", "manuscripts"),
    ("scripts/", "scripts"),
    ("content/", "content"),
    ("ops/", "ops"),
    ("revenue-tools/", "revenue-tools"),
    ("teaching-artifacts/", "teaching-artifacts"),
    ("aqrab-website/src/", "aqrab-website-src"),
    ("aqrab-calibration-study/research/", "calibration-research"),
    ("aqrab-calibration-study/panel-app/", "panel-app"),
    ("target-trial-emulation-benchmark/", "target-trial-benchmark"),
];
const FALLBACK_SURFACE: &str = "unclassified";

const FILLERS: [&str; 8] = [
    "Reviewed the inbox in the morning.",
    "Coffee with the team after lunch.",
    "Read two papers on causal inference.",
    "Quiet afternoon with few messages.",
    "Walked to the library before dinner.",
    "Sorted the reading list by topic.",
    "Spent an hour on email triage.",
    "Talked through the survey sample with a colleague.",
];

const OUTPUT_PLANTS: [&str; 8] = [
    "Drafted the introduction for the methods chapter.",
    "Wrote the cover letter for the grant.",
    "Deployed the website changes to production.",
    "Merged the branch with the survey changes.",
    "Submitted the abstract to the conference.",
    "Posted the weekly summary to the channel.",
    "Rendered the poster for the symposium.",
    "Pushed the analysis notebook to the shared drive.",
];

const GOVERNANCE_PLANTS: [(&str, &[&str]); 6] = [
    (
        "verification",
        &["Confirmed the totals against the source table.", "Double-checked the citation list before sharing."],
    ),
    (
        "correction",
        &["Corrected the date range in the summary table.", "Traced a bug in the date parser."],
    ),
    (
        "protocol",
        &["Adopted a checklist for release days.", "Added a policy for weekend messages."],
    ),
    (
        "safety",
        &["Redacted a credential from the notes.", "Rotated the api key after the review."],
    ),
    (
        "failure",
        &["The nightly sync failed twice.", "The mail relay had an outage overnight."],
    ),
    (
        "untagged",
        &["Recorded a postmortem for the week.", "Noted one lesson about batching messages."],
    ),
];

const EXCLUSION_TRAPS: [&str; 3] = [
    "We might write a guide later.",
    "Brainstormed ideas for a dashboard.",
    "Created the lockfile during install.",
];

const JUNK: [&str; 6] = [
    "not json at all",
    "{\"truncated\": ",
    "[1, 2, 3]",
    "42",
    "{\"note\": \"no recognized fields\"}",
    "{broken json",
];

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Tier {
    Id,
    Content,
    Trajectory,
}

struct Line {
    text: String,
    /// `None` for junk.
    tier: Option<Tier>,
}

#[derive(Default)]
struct Files {
    files: BTreeMap<String, String>,
}

impl Files {
    fn add(&mut self, rel: String, text: String) {
        self.files.insert(rel, text);
    }
}

fn render_lines(lines: &[Line]) -> String {
    let mut out = String::new();
    for l in lines {
        out.push_str(&l.text);
        out.push('\n');
    }
    out
}

fn day_start_ms(date: NaiveDate) -> i64 {
    date.and_hms_opt(0, 0, 0).unwrap().and_utc().timestamp_millis()
}

fn iso_z(ms: i64) -> String {
    DateTime::<Utc>::from_timestamp_millis(ms)
        .unwrap()
        .format("%Y-%m-%dT%H:%M:%S%.3fZ")
        .to_string()
}

fn iso_offset(ms: i64) -> String {
    let offset = FixedOffset::east_opt(2 * 3600).unwrap();
    DateTime::<Utc>::from_timestamp_millis(ms)
        .unwrap()
        .with_timezone(&offset)
        .format("%Y-%m-%dT%H:%M:%S%.3f%:z")
        .to_string()
}

fn timestamp_value(rng: &mut SplitMix64, ms: i64) -> Value {
    match rng.range(0, 2) {
        0 => json!(iso_z(ms)),
        1 => json!(iso_offset(ms)),
        _ => json!(ms),
    }
}

/// Capped-gap total computed with a plain loop, independent of the library.
fn capped_total(sorted_unique: &[i64], cap_minutes: u32) -> i64 {
    let cap = i64::from(cap_minutes) * 60_000;
    let mut total = 0;
    for i in 1..sorted_unique.len() {
        let gap = sorted_unique[i] - sorted_unique[i - 1];
        total += if gap > cap { cap } else { gap };
    }
    total
}

struct Gen<'a> {
    spec: &'a CorpusSpec,
    rng: SplitMix64,
    files: Files,
    counter: u64,
    timestamps: Vec<i64>,
    truth: GroundTruth,
    route_weights: u64,
}

impl<'a> Gen<'a> {
    fn next_id(&mut self) -> u64 {
        self.counter += 1;
        self.counter
    }

    fn role_tally(&mut self, role: &str) {
        *self.truth.role_counts.entry(role.to_string()).or_insert(0) += 1;
    }

    fn pick_route(&mut self) -> &'a RouteSpec {
        let mut r = self.rng.range(0, self.route_weights - 1);
        for route in &self.spec.routes {
            let w = u64::from(route.weight);
            if r < w {
                return route;
            }
            r -= w;
        }
        unreachable!("weights sum checked in validate")
    }

    fn message(&mut self, ms: Option<i64>, untimed_label: bool) -> Line {
        let n = self.next_id();
        let (label, canonical, tool) = *self.rng.pick(&[
            ("user", "user", None),
            ("assistant", "assistant", None),
            ("toolResult", "tool_result", Some("read")),
            ("tool_call", "tool_call", Some("exec")),
        ]);
        self.role_tally(canonical);
        let text = format!(
            "{} message {n:08} seed {} about the weekly plan",
            if untimed_label { "untimed" } else { "timed" },
            self.spec.seed
        );
        let with_id = self.rng.chance(self.spec.id_rate);
        let style = self.rng.range(0, 2);
        let mut record = match (style, ms) {
            (1, Some(ms)) => json!({
                "type": "message",
                "message": {
                    "role": label,
                    "timestamp": iso_z(ms),
                    "content": [{"type": "text", "text": text}],
                },
            }),
            (2, Some(ms)) => json!({"ts": ms, "role": label, "text": text}),
            (_, Some(ms)) => {
                let ts = timestamp_value(&mut self.rng, ms);
                json!({"timestamp": ts, "role": label, "content": text})
            }
            (_, None) => json!({"role": label, "content": text}),
        };
        if let Some(tool) = tool {
            record["tool_name"] = json!(tool);
        }
        if with_id {
            record["id"] = json!(format!("evt-{}-{n}", self.spec.seed));
        }
        Line {
            text: record.to_string(),
            tier: Some(if with_id { Tier::Id } else { Tier::Content }),
        }
    }

    fn usage(&mut self, route: &RouteSpec) -> (Value, TokenTruth) {
        let s = self.spec;
        let input = self.rng.range(s.input_tokens.0, s.input_tokens.1);
        let output = if self.rng.chance(s.zero_output_rate) {
            0
        } else {
            self.rng.range(s.output_tokens.0, s.output_tokens.1)
        };
        let cache_read = self.rng.range(s.cache_read_tokens.0, s.cache_read_tokens.1);
        let cache_write =
            (self.rng.range(s.cache_write_tokens.0, s.cache_write_tokens.1) as f64 * route.cache_write_scale) as u64;
        let value = if self.rng.chance(0.5) {
            json!({"input": input, "output": output, "cacheRead": cache_read, "cacheWrite": cache_write})
        } else {
            json!({
                "input_tokens": input,
                "output_tokens": output,
                "cache_read_input_tokens": cache_read,
                "cache_creation_input_tokens": cache_write,
            })
        };
        let truth = TokenTruth {
            input,
            output,
            cache_read,
            cache_write,
            completions: 1,
        };
        (value, truth)
    }

    fn completion(&mut self, ms: i64) -> Line {
        let n = self.next_id();
        let route = self.pick_route();
        let (usage, t) = self.usage(route);
        let total = &mut self.truth.tokens;
        total.input += t.input;
        total.output += t.output;
        total.cache_read += t.cache_read;
        total.cache_write += t.cache_write;
        total.completions += 1;
        let r = self.truth.routes.entry(route.name.clone()).or_default();
        r.input += t.input;
        r.output += t.output;
        r.cache_read += t.cache_read;
        r.cache_write += t.cache_write;
        r.completions += 1;
        self.role_tally("model_completed");
        let ts = timestamp_value(&mut self.rng, ms);
        let mut record = json!({
            "type": "model_completed",
            "timestamp": ts,
            "provider": route.name,
            "model": route.model,
            "usage": usage,
        });
        let with_id = self.rng.chance(self.spec.id_rate);
        if with_id {
            record["id"] = json!(format!("mc-{}-{n}", self.spec.seed));
        }
        Line {
            text: record.to_string(),
            tier: Some(if with_id { Tier::Id } else { Tier::Content }),
        }
    }

    /// A completion recorded only with a trajectory timestamp. It counts as a
    /// record but never enters token sums or time analyses.
    fn untimed_completion(&mut self, anchor_ms: i64) -> Line {
        let n = self.next_id();
        let route = self.pick_route();
        let (usage, _) = self.usage(route);
        self.role_tally("model_completed");
        let record = json!({
            "type": "model_completed",
            "trajectory_ts": anchor_ms + n as i64,
            "provider": route.name,
            "model": route.model,
            "usage": usage,
        });
        Line {
            text: record.to_string(),
            tier: Some(Tier::Trajectory),
        }
    }

    fn count_duplicate(&mut self, tier: Tier) {
        let d = &mut self.truth.duplicates_main;
        match tier {
            Tier::Id => d.explicit_id += 1,
            Tier::Content => d.content_hash += 1,
            Tier::Trajectory => d.trajectory_hash += 1,
        }
    }

    /// Repeats, junk, then writes the file and maybe a backup copy.
    fn finish_main_file(&mut self, rel: String, mut lines: Vec<Line>) {
        let originals = lines.len();
        for i in 0..originals {
            if self.rng.chance(self.spec.repeat_line_rate) {
                let tier = lines[i].tier;
                let text = lines[i].text.clone();
                if let Some(t) = tier {
                    self.count_duplicate(t);
                }
                lines.push(Line { text, tier });
            }
        }
        let mut mixed = Vec::with_capacity(lines.len());
        for line in lines {
            if self.rng.chance(self.spec.junk_rate) {
                mixed.push(Line {
                    text: self.rng.pick(&JUNK).to_string(),
                    tier: None,
                });
            }
            mixed.push(line);
        }
        let lines = mixed;
        self.truth.parsed_main += lines.iter().filter(|l| l.tier.is_some()).count() as u64;
        let text = render_lines(&lines);
        if self.rng.chance(self.spec.backup_rate) {
            let name = rel.rsplit('/').next().unwrap().to_string();
            for tier in lines.iter().filter_map(|l| l.tier).collect::<Vec<_>>() {
                self.count_duplicate(tier);
                self.truth.parsed_main += 1;
            }
            self.note_session_file(&name, true);
            self.files.add(format!("agents/main/sessions/backup/{name}"), text.clone());
        }
        self.note_session_file(&rel, true);
        self.files.add(rel, text);
    }

    fn note_session_file(&mut self, rel: &str, main: bool) {
        let inv = &mut self.truth.inventory;
        inv.all_session_files += 1;
        if main {
            inv.main_session_files += 1;
        }
        if rel.rsplit('/').next().unwrap_or("").contains("trajectory") {
            inv.trajectory_files += 1;
        }
    }

    fn session_day(&mut self, date: NaiveDate) {
        let s = self.spec;
        let start = day_start_ms(date);
        let end = start + 86_400_000;
        let n = self.rng.range(u64::from(s.events_per_active_day.0), u64::from(s.events_per_active_day.1));
        let files = s.session_files_per_day as usize;
        let mut session: Vec<Vec<Line>> = (0..files).map(|_| Vec::new()).collect();
        let mut trajectory: Vec<Line> = Vec::new();
        let mut t = start + self.rng.range(5 * 3_600_000, 9 * 3_600_000) as i64 + self.rng.range(0, 999) as i64;
        for i in 0..n {
            if i > 0 {
                let gap = if self.rng.chance(s.long_gap_rate) {
                    self.rng.range(u64::from(s.long_gap_minutes.0), u64::from(s.long_gap_minutes.1)) * 60_000
                        + self.rng.range(0, 59_999)
                } else {
                    self.rng.range(u64::from(s.short_gap_seconds.0), u64::from(s.short_gap_seconds.1)) * 1000
                        + self.rng.range(0, 999)
                };
                t += gap as i64;
            }
            if t >= end {
                break;
            }
            self.timestamps.push(t);
            self.truth.records_main += 1;
            if self.rng.chance(s.completion_rate) {
                let line = self.completion(t);
                trajectory.push(line);
            } else {
                let line = self.message(Some(t), false);
                session[i as usize % files].push(line);
            }
            if self.rng.chance(s.untimed_rate) {
                let line = self.message(None, true);
                self.truth.records_main += 1;
                self.truth.untimed_main += 1;
                let at = self.rng.range(0, files as u64 - 1) as usize;
                session[at].push(line);
            }
            if self.rng.chance(s.untimed_completion_rate) {
                let line = self.untimed_completion(start);
                self.truth.records_main += 1;
                self.truth.untimed_main += 1;
                trajectory.push(line);
            }
        }
        for (k, lines) in session.into_iter().enumerate() {
            if !lines.is_empty() {
                self.finish_main_file(format!("agents/main/sessions/{date}-{k}.jsonl"), lines);
            }
        }
        if !trajectory.is_empty() {
            self.finish_main_file(format!("agents/main/sessions/{date}.trajectory.jsonl"), trajectory);
        }
    }

    fn memory_day(&mut self, date: NaiveDate) {
        let s = self.spec;
        let mut plants: Vec<String> = Vec::new();
        for _ in 0..self.rng.range(u64::from(s.output_proxies_per_day.0), u64::from(s.output_proxies_per_day.1)) {
            plants.push(self.rng.pick(&OUTPUT_PLANTS).to_string());
            self.truth.output_proxies += 1;
        }
        for _ in 0..self.rng.range(u64::from(s.governance_per_day.0), u64::from(s.governance_per_day.1)) {
            let (class, sentences) = *self.rng.pick(&GOVERNANCE_PLANTS);
            plants.push(self.rng.pick(sentences).to_string());
            self.truth.governance_events += 1;
            *self.truth.governance_by_class.entry(class.to_string()).or_insert(0) += 1;
        }
        for _ in 0..self.rng.range(u64::from(s.exclusion_traps_per_day.0), u64::from(s.exclusion_traps_per_day.1)) {
            plants.push(self.rng.pick(&EXCLUSION_TRAPS).to_string());
        }
        // Fisher-Yates
        for i in (1..plants.len()).rev() {
            let j = self.rng.range(0, i as u64) as usize;
            plants.swap(i, j);
        }
        let mut text = format!("# Daily notes\n\n## {date} log\n\n");
        text.push_str(&format!("- {}\n", self.rng.pick(&FILLERS)));
        for p in plants {
            text.push_str(&format!("- {p}\n- {}\n", self.rng.pick(&FILLERS)));
        }
        self.truth.dated_sections += 1;
        self.truth.inventory.memory_files += 1;
        self.truth.inventory.daily_memory_files += 1;
        self.files.add(format!("memory/{date}.md"), text);
    }

    fn other_agents(&mut self, active: &[NaiveDate]) {
        for a in 0..self.spec.other_agents {
            let mut lines = Vec::new();
            for _ in 0..self.spec.other_agent_events {
                let date = *self.rng.pick(active);
                let ms = day_start_ms(date) + self.rng.range(0, 86_399_999) as i64;
                let n = self.next_id();
                lines.push(
                    json!({
                        "id": format!("other-{}-{n}", self.spec.seed),
                        "timestamp": iso_z(ms),
                        "role": "assistant",
                        "content": format!("agent {a} note {n}"),
                    })
                    .to_string(),
                );
                self.truth.records_all += 1;
            }
            let rel = format!("agents/agent-{a}/sessions/log.jsonl");
            self.note_session_file(&rel, false);
            self.files.add(rel, lines.join("\n") + "\n");
        }
        self.truth.inventory.agent_dirs = 1 + u64::from(self.spec.other_agents);
    }

    fn static_files(&mut self) {
        let s = self.spec;
        let before = self.spec.start_date - Duration::days(30);
        self.files.add(
            "MEMORY.md".to_string(),
            format!(
                "# Memory\n\nCreated the onboarding guide.\nConfirmed the backup settings.\n\n## {before} archive\n\n- Deployed the old site.\n- The old relay failed often.\n"
            ),
        );
        self.truth.inventory.memory_files += 1;
        for (i, (prefix, surface)) in SURFACES.iter().take(s.surfaces_used as usize).enumerate() {
            for j in 0..s.files_per_surface {
                self.files.add(format!("{prefix}item-{i}-{j}.md"), format!("surface {surface} file {j}\n"));
            }
            if s.files_per_surface > 0 {
                self.truth.surfaces.insert(surface.to_string(), u64::from(s.files_per_surface));
            }
        }
        for k in 0..s.unclassified_files {
            self.files.add(format!("misc/notes-{k}.txt"), "misc\n".to_string());
        }
        for k in 0..s.skills {
            self.files.add(format!("skills/skill-{k}/SKILL.md"), format!("# Skill {k}\n"));
            self.truth.inventory.skill_files += 1;
        }
    }
}

/// Writes a corpus under `root`, which must be missing or empty.
pub fn generate_corpus(spec: &CorpusSpec, root: &Path) -> Result<GroundTruth> {
    spec.validate()?;
    if root.exists() {
        let mut entries = fs::read_dir(root).map_err(|e| Error::io(root, e))?;
        if entries.next().is_some() {
            return Err(Error::InvalidArgument(format!(
                "{} is not empty; refusing to write a corpus there",
                root.display()
            )));
        }
    }
    let window = spec.window();
    let mut gen = Gen {
        spec,
        rng: SplitMix64::new(spec.seed),
        files: Files::default(),
        counter: 0,
        timestamps: Vec::new(),
        route_weights: spec.routes.iter().map(|r| u64::from(r.weight)).sum(),
        truth: GroundTruth {
            seed: spec.seed,
            window,
            calendar_days: u64::from(spec.days),
            active_days: Vec::new(),
            records_main: 0,
            records_all: 0,
            parsed_main: 0,
            duplicates_main: DuplicateTruth::default(),
            untimed_main: 0,
            role_counts: BTreeMap::new(),
            capped_ms: BTreeMap::new(),
            tokens: TokenTruth::default(),
            routes: BTreeMap::new(),
            dated_sections: 0,
            output_proxies: 0,
            governance_events: 0,
            governance_by_class: BTreeMap::new(),
            surfaces: BTreeMap::new(),
            asb: 0,
            inventory: InventoryTruth::default(),
        },
    };

    let mut active: Vec<NaiveDate> = window.days().filter(|_| gen.rng.chance(spec.active_day_probability)).collect();
    if active.is_empty() {
        active.push(window.start_date);
    }
    for &date in &active {
        gen.session_day(date);
        if gen.rng.chance(spec.memory_day_rate) {
            gen.memory_day(date);
        }
    }
    let mut days: Vec<NaiveDate> = gen
        .timestamps
        .iter()
        .map(|&t| DateTime::<Utc>::from_timestamp_millis(t).unwrap().date_naive())
        .collect();
    days.dedup();
    gen.truth.active_days = days;
    gen.other_agents(&active);
    gen.static_files();

    let mut ts = gen.timestamps.clone();
    ts.sort_unstable();
    for cap in [15, 30, 45, 60, 90] {
        gen.truth.capped_ms.insert(cap, capped_total(&ts, cap));
    }
    gen.truth.records_all += gen.truth.records_main;

    let total_files = gen.files.files.len() as u64;
    let classified: u64 = gen.truth.surfaces.values().sum();
    if total_files > classified {
        gen.truth.surfaces.insert(FALLBACK_SURFACE.to_string(), total_files - classified);
    }
    gen.truth.asb = gen.truth.surfaces.keys().filter(|s| *s != FALLBACK_SURFACE).count() as u64;
    gen.truth.inventory.total_files = total_files;

    for (rel, text) in &gen.files.files {
        let path = root.join(rel);
        if let Some(parent) = path.parent() {
            fs::create_dir_all(parent).map_err(|e| Error::io(parent, e))?;
        }
        fs::write(&path, text).map_err(|e| Error::io(&path, e))?;
    }
    Ok(gen.truth)
}
