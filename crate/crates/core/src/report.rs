//! Report bundles, rendering and CSV exports.
//!
//! A [`ReportBundle`] holds every number a report shows; rendering only
//! formats. Bundles are assembled with [`BundleBuilder`], which refuses to
//! build while any section is missing.
//!
//! Output layout under the output directory:
//!
//! ```text
//! reports/pare-m-report.txt
//! reports/pare-m-report.json
//! reports/pare-m-metrics.csv
//! reports/proxy-ledger.csv
//! reports/surface-counts.csv
//! reports/token-routes.csv
//! reports/role-counts.csv
//! reports/dedup-ledger.csv          (when a ledger is supplied)
//! reports/manifest.json
//! figures/figure-1-token-telemetry-daily.csv
//! figures/figure-1-token-telemetry-events.csv
//! figures/supplementary-figure-s2-active-time-sensitivity.csv
//! figures/supplementary-figure-s2-gap-histogram.csv
//! ```
//!
//! CSV numbers use `.` as the decimal point, no digit grouping, and the
//! shortest representation that parses back to the same `f64`.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use serde::{de::DeserializeOwned, Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::activetime::{ActiveTimeEstimate, GapHistogram};
use crate::config::{ObservationWindow, RunConfig};
use crate::dedup::{DedupStats, LedgerEntry};
use crate::extraction::{ProxyEvent, ProxyKind};
use crate::ingest::WorkspaceInventory;
use crate::metrics::{Metric, MetricReport, MetricValue};
use crate::tokens::{AssociationStats, CompletionRow, DailyTokens, RouteTotals, TokenTotals};
use crate::{Error, Result};

pub const DAILY_CSV: &str = "figures/figure-1-token-telemetry-daily.csv";
pub const EVENTS_CSV: &str = "figures/figure-1-token-telemetry-events.csv";
pub const SENSITIVITY_CSV: &str = "figures/supplementary-figure-s2-active-time-sensitivity.csv";
pub const HISTOGRAM_CSV: &str = "figures/supplementary-figure-s2-gap-histogram.csv";
pub const METRICS_CSV: &str = "reports/pare-m-metrics.csv";
pub const PROXY_LEDGER_CSV: &str = "reports/proxy-ledger.csv";
pub const SURFACES_CSV: &str = "reports/surface-counts.csv";
pub const ROUTES_CSV: &str = "reports/token-routes.csv";
pub const ROLES_CSV: &str = "reports/role-counts.csv";
pub const DEDUP_LEDGER_CSV: &str = "reports/dedup-ledger.csv";
pub const REPORT_TXT: &str = "reports/pare-m-report.txt";
pub const REPORT_JSON: &str = "reports/pare-m-report.json";
pub const MANIFEST_JSON: &str = "reports/manifest.json";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Provenance {
    pub tool: String,
    pub tool_version: String,
    pub framework: String,
    pub classification_rules: String,
    pub extraction_rules: String,
    pub window: ObservationWindow,
    pub token_window: ObservationWindow,
    pub run: RunConfig,
}

/// One row in the utilization table.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct UtilizationRow {
    pub metric: String,
    pub value: String,
    pub window: String,
    pub interpretation: String,
    pub caveat: String,
}

/// Output and governance ledger totals.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LedgerSummary {
    pub dated_sections: u64,
    pub output_proxies: u64,
    pub governance_events: u64,
    /// Governance count per class name; `untagged` collects events without a class.
    pub governance_by_class: BTreeMap<String, u64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TokenTables {
    pub window: ObservationWindow,
    pub totals: TokenTotals,
    pub cdr: Option<f64>,
    pub routes: Vec<RouteTotals>,
    pub daily: Vec<DailyTokens>,
    pub completions: Vec<CompletionRow>,
    pub association: AssociationStats,
    /// Model-completed records at session level, outside the strict subset
    /// too. Never mixed into token sums.
    pub session_model_completed: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SensitivityTable {
    pub rows: Vec<ActiveTimeEstimate>,
    pub histogram: GapHistogram,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportBundle {
    pub provenance: Provenance,
    pub metrics: MetricReport,
    pub utilization: Vec<UtilizationRow>,
    pub inventory: WorkspaceInventory,
    pub dedup: DedupStats,
    pub ledger: LedgerSummary,
    pub proxies: Vec<ProxyEvent>,
    pub tokens: TokenTables,
    pub sensitivity: SensitivityTable,
    pub warnings: Vec<String>,
}

impl ReportBundle {
    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }
}

#[derive(Debug, Clone, Default)]
pub struct BundleBuilder {
    pub provenance: Option<Provenance>,
    pub metrics: Option<MetricReport>,
    pub utilization: Option<Vec<UtilizationRow>>,
    pub inventory: Option<WorkspaceInventory>,
    pub dedup: Option<DedupStats>,
    pub ledger: Option<LedgerSummary>,
    pub proxies: Option<Vec<ProxyEvent>>,
    pub tokens: Option<TokenTables>,
    pub sensitivity: Option<SensitivityTable>,
    pub warnings: Vec<String>,
}

impl BundleBuilder {
    pub fn new() -> Self {
        Self::default()
    }

    /// Fails with the names of every missing section.
    pub fn build(self) -> Result<ReportBundle> {
        let mut missing = Vec::new();
        macro_rules! need {
            ($field:ident) => {
                if self.$field.is_none() {
                    missing.push(stringify!($field).to_string());
                }
            };
        }
        need!(provenance);
        need!(metrics);
        need!(utilization);
        need!(inventory);
        need!(dedup);
        need!(ledger);
        need!(proxies);
        need!(tokens);
        need!(sensitivity);
        if !missing.is_empty() {
            return Err(Error::IncompleteBundle(missing));
        }
        Ok(ReportBundle {
            provenance: self.provenance.unwrap(),
            metrics: self.metrics.unwrap(),
            utilization: self.utilization.unwrap(),
            inventory: self.inventory.unwrap(),
            dedup: self.dedup.unwrap(),
            ledger: self.ledger.unwrap(),
            proxies: self.proxies.unwrap(),
            tokens: self.tokens.unwrap(),
            sensitivity: self.sensitivity.unwrap(),
            warnings: self.warnings,
        })
    }
}

/// Rows for the utilization table, formatted at reporting precision.
pub fn utilization_rows(metrics: &MetricReport, dedup: &DedupStats) -> Vec<UtilizationRow> {
    let window = metrics.window.to_string();
    let row = |metric: &str, value: String, interpretation: &str, caveat: &str| UtilizationRow {
        metric: metric.to_string(),
        value,
        window: window.clone(),
        interpretation: interpretation.to_string(),
        caveat: caveat.to_string(),
    };
    let roles = &metrics.role_counts;
    let adf = metrics.get(Metric::Adf);
    vec![
        row(
            "Active days",
            format!("{} of {}", metrics.counts.active_days, metrics.calendar_days),
            "Calendar days with at least one recoverable event",
            "Lower bound when telemetry starts after the window opens",
        ),
        row("Active-day fraction", adf.display(), "Share of calendar days active", "Window-dependent"),
        row(
            "De-duplicated records",
            metrics.get(Metric::Drc).display(),
            "Unique records after identity-key de-duplication",
            &format!("{} duplicates removed from {} parsed", dedup.removed.total(), dedup.input),
        ),
        row("User-role messages", roles.user.to_string(), "Human-side turns", "Includes automated prompts"),
        row("Assistant-role messages", roles.assistant.to_string(), "Agent-side turns", "Not a quality measure"),
        row("Tool-result messages", roles.tool_result.to_string(), "Tool outputs returned", ""),
        row("Tool-call events", roles.tool_call.to_string(), "Tool invocations", ""),
        row("Model-completed events", roles.model_completed.to_string(), "Session-level completions", "Not the strict token subset"),
        row("Other records", roles.other.to_string(), "Records with unlisted roles", ""),
        row(
            &format!("Active-time estimate ({}-min cap)", metrics.primary_cap_minutes),
            format!("{} h", metrics.get(Metric::Ate).display()),
            "Capped-gap system activity",
            "System activity, not labor time",
        ),
        row(
            &format!("Active-time sensitivity ({}-min cap)", metrics.sensitivity_cap_minutes),
            format!("{} h", metrics.ate_sensitivity.display()),
            "Capped-gap system activity",
            "Cap choice changes the estimate",
        ),
    ]
}

pub fn ledger_summary(sections: usize, proxies: &[ProxyEvent]) -> LedgerSummary {
    let mut by_class = BTreeMap::new();
    let mut output = 0;
    let mut governance = 0;
    for p in proxies {
        match p.kind {
            ProxyKind::Output => output += 1,
            ProxyKind::Governance => {
                governance += 1;
                let name = p.governance_class.map_or("untagged", |c| c.as_str());
                *by_class.entry(name.to_string()).or_insert(0) += 1;
            }
        }
    }
    LedgerSummary {
        dated_sections: sections as u64,
        output_proxies: output,
        governance_events: governance,
        governance_by_class: by_class,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Text,
    Structured,
}

pub fn render_report(bundle: &ReportBundle, format: Format) -> Result<String> {
    match format {
        Format::Structured => Ok(serde_json::to_string_pretty(bundle)? + "\n"),
        Format::Text => Ok(render_text(bundle)),
    }
}

fn pct(v: Option<f64>) -> String {
    v.map_or_else(|| "undefined".to_string(), |v| format!("{:.1}%", v * 100.0))
}

fn table(out: &mut String, header: &[&str], rows: &[Vec<String>]) {
    let mut widths: Vec<usize> = header.iter().map(|h| h.chars().count()).collect();
    for row in rows {
        for (w, cell) in widths.iter_mut().zip(row) {
            *w = (*w).max(cell.chars().count());
        }
    }
    let line = |out: &mut String, cells: Vec<&str>| {
        let padded: Vec<String> = cells
            .iter()
            .zip(&widths)
            .map(|(c, w)| format!("{c:<w$}"))
            .collect();
        let _ = writeln!(out, "  {}", padded.join("  ").trim_end());
    };
    line(out, header.to_vec());
    line(out, widths.iter().map(|w| "-".repeat(*w)).collect::<Vec<_>>().iter().map(String::as_str).collect());
    for row in rows {
        line(out, row.iter().map(String::as_str).collect());
    }
    out.push('\n');
}

fn render_text(b: &ReportBundle) -> String {
    let mut out = String::new();
    let p = &b.provenance;
    let m = &b.metrics;
    let _ = writeln!(out, "{} report", p.framework);
    let _ = writeln!(out, "{}", "=".repeat(p.framework.len() + 7));
    let _ = writeln!(out);
    let _ = writeln!(out, "Observation window: {} ({} calendar days)", m.window, m.calendar_days);
    let _ = writeln!(out, "Token window:       {}", p.token_window);
    let _ = writeln!(out, "Scope:              {}", p.run.scope);
    let _ = writeln!(
        out,
        "Tool:               {} {} (classification {}, extraction {})",
        p.tool, p.tool_version, p.classification_rules, p.extraction_rules
    );
    let _ = writeln!(out);

    let _ = writeln!(out, "Metrics");
    let _ = writeln!(out, "-------");
    let mut rows: Vec<Vec<String>> = m
        .values
        .iter()
        .map(|v| metric_row(v, v.metric.code().to_string()))
        .collect();
    rows.push(metric_row(&m.ate_sensitivity, format!("ATE@{}", m.sensitivity_cap_minutes)));
    table(&mut out, &["Metric", "Value", "Numerator", "Denominator", "Rule"], &rows);
    for note in &m.annotations {
        let _ = writeln!(out, "  note: {note}");
    }
    if !m.annotations.is_empty() {
        out.push('\n');
    }

    let _ = writeln!(out, "Utilization");
    let _ = writeln!(out, "-----------");
    let rows: Vec<Vec<String>> = b
        .utilization
        .iter()
        .map(|r| vec![r.metric.clone(), r.value.clone(), r.interpretation.clone(), r.caveat.clone()])
        .collect();
    table(&mut out, &["Metric", "Value", "Interpretation", "Caveat"], &rows);

    let inv = &b.inventory;
    let _ = writeln!(out, "Inventory");
    let _ = writeln!(out, "---------");
    let rows = vec![
        vec!["Files".to_string(), inv.total_files.to_string()],
        vec!["Memory-related files".into(), inv.memory_files.to_string()],
        vec!["Daily memory files".into(), inv.daily_memory_files.to_string()],
        vec!["Configured agent directories".into(), inv.agent_dirs.to_string()],
        vec!["Skill files".into(), inv.skill_files.to_string()],
        vec!["Main session files".into(), inv.main_session_files.to_string()],
        vec!["Recoverable main JSONL-like files".into(), inv.main_recoverable_files.to_string()],
        vec!["All-agent session files".into(), inv.all_session_files.to_string()],
        vec!["Recoverable all-agent JSONL-like files".into(), inv.all_recoverable_files.to_string()],
        vec!["Trajectory files".into(), inv.trajectory_files.to_string()],
    ];
    table(&mut out, &["Source", "Count"], &rows);
    let rows: Vec<Vec<String>> = inv
        .surfaces
        .counts
        .iter()
        .map(|(s, n)| vec![s.clone(), n.to_string()])
        .collect();
    table(&mut out, &["Surface", "Files"], &rows);

    let d = &b.dedup;
    let _ = writeln!(out, "De-duplication");
    let _ = writeln!(out, "--------------");
    let _ = writeln!(
        out,
        "  {} parsed, {} retained; removed by explicit id {}, content hash {}, trajectory hash {}\n",
        d.input, d.retained, d.removed.explicit_id, d.removed.content_hash, d.removed.trajectory_hash
    );

    let l = &b.ledger;
    let _ = writeln!(out, "Outputs and governance");
    let _ = writeln!(out, "----------------------");
    let mut rows = vec![
        vec!["Dated memory sections".to_string(), l.dated_sections.to_string()],
        vec!["Output-proxy events".into(), l.output_proxies.to_string()],
        vec!["Governance events".into(), l.governance_events.to_string()],
    ];
    for (class, n) in &l.governance_by_class {
        rows.push(vec![format!("  {class}"), n.to_string()]);
    }
    table(&mut out, &["Ledger", "Count"], &rows);

    let t = &b.tokens;
    let _ = writeln!(out, "Token telemetry ({})", t.window);
    let _ = writeln!(out, "---------------");
    let rows = vec![
        vec!["Strict model-completed events".to_string(), t.totals.completions.to_string()],
        vec!["Total recorded tokens".into(), t.totals.total().to_string()],
        vec!["Input tokens".into(), t.totals.input.to_string()],
        vec!["Output tokens".into(), t.totals.output.to_string()],
        vec!["Cache-read tokens".into(), t.totals.cache_read.to_string()],
        vec!["Cache-write tokens".into(), t.totals.cache_write.to_string()],
        vec!["Cache-dominance ratio".into(), pct(t.cdr)],
        vec!["Session-level model-completed records".into(), t.session_model_completed.to_string()],
    ];
    table(&mut out, &["Measure", "Value"], &rows);
    let rows: Vec<Vec<String>> = t
        .routes
        .iter()
        .map(|r| {
            vec![
                r.provider_route.clone(),
                r.totals.completions.to_string(),
                r.totals.total().to_string(),
                pct(r.totals.cdr()),
            ]
        })
        .collect();
    table(&mut out, &["Route", "Completions", "Tokens", "CDR"], &rows);
    let a = &t.association;
    let fmt = |v: Option<f64>| v.map_or("undefined".to_string(), |v| format!("{v:.2}"));
    let _ = writeln!(
        out,
        "  cache-read vs output: Pearson r (log) = {}, Spearman rho = {}, n = {}, zero-excluded = {}{}\n",
        fmt(a.pearson_r_log),
        fmt(a.spearman_rho),
        a.n_events,
        a.excluded_zero_events,
        a.undefined_reason
            .map(|r| format!(" ({})", serde_json::to_value(r).unwrap().as_str().unwrap_or("")))
            .unwrap_or_default()
    );

    let _ = writeln!(out, "Active-time sensitivity");
    let _ = writeln!(out, "-----------------------");
    let rows: Vec<Vec<String>> = b
        .sensitivity
        .rows
        .iter()
        .map(|e| vec![e.cap_minutes.to_string(), format!("{:.1}", e.hours), e.cluster_count.to_string()])
        .collect();
    table(&mut out, &["Cap (min)", "Hours", "Clusters"], &rows);

    if !b.warnings.is_empty() {
        let _ = writeln!(out, "Warnings");
        let _ = writeln!(out, "--------");
        for w in &b.warnings {
            let _ = writeln!(out, "  - {w}");
        }
    }
    out
}

fn metric_row(v: &MetricValue, label: String) -> Vec<String> {
    vec![label, v.display(), v.numerator.to_string(), v.denominator.to_string(), v.rule_id.clone()]
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricCsvRow {
    pub metric: Metric,
    pub numerator: f64,
    pub denominator: f64,
    pub window_start: chrono::NaiveDate,
    pub window_end: chrono::NaiveDate,
    pub rule_id: String,
    pub value: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SensitivityCsvRow {
    pub cap_minutes: u32,
    pub hours: f64,
    pub cluster_count: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct HistogramCsvRow {
    pub bin_start_minutes: u32,
    /// Empty for the overflow bin.
    pub bin_end_minutes: Option<u32>,
    pub count: u64,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ProxyCsvRow {
    pub date: chrono::NaiveDate,
    pub kind: ProxyKind,
    pub class: String,
    pub terms: String,
    pub source: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SurfaceCsvRow {
    pub surface: String,
    pub file_count: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RouteCsvRow {
    pub provider_route: String,
    pub input_tokens: u64,
    pub output_tokens: u64,
    pub cache_read_tokens: u64,
    pub cache_write_tokens: u64,
    pub total_tokens: u64,
    pub completions: u64,
    pub cdr: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RoleCsvRow {
    pub role: String,
    pub count: u64,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DedupCsvRow {
    pub tier: String,
    pub key: String,
    pub source_path: String,
    pub line: u64,
    pub retained: bool,
}

pub fn metric_rows(m: &MetricReport) -> Vec<MetricCsvRow> {
    m.values
        .iter()
        .map(|v| MetricCsvRow {
            metric: v.metric,
            numerator: v.numerator,
            denominator: v.denominator,
            window_start: v.window.start_date,
            window_end: v.window.end_date,
            rule_id: v.rule_id.clone(),
            value: v.value,
        })
        .collect()
}

pub fn sensitivity_rows(s: &SensitivityTable) -> Vec<SensitivityCsvRow> {
    s.rows
        .iter()
        .map(|e| SensitivityCsvRow {
            cap_minutes: e.cap_minutes,
            hours: e.hours,
            cluster_count: e.cluster_count,
        })
        .collect()
}

pub fn histogram_rows(h: &GapHistogram) -> Vec<HistogramCsvRow> {
    let regular = h.bin_edges.len().saturating_sub(1);
    let mut rows: Vec<HistogramCsvRow> = (0..regular)
        .map(|i| HistogramCsvRow {
            bin_start_minutes: h.bin_edges[i],
            bin_end_minutes: Some(h.bin_edges[i + 1]),
            count: h.counts[i],
        })
        .collect();
    rows.push(HistogramCsvRow {
        bin_start_minutes: h.clip_minutes,
        bin_end_minutes: None,
        count: h.overflow(),
    });
    rows
}

pub fn proxy_rows(proxies: &[ProxyEvent]) -> Vec<ProxyCsvRow> {
    proxies
        .iter()
        .map(|p| ProxyCsvRow {
            date: p.date,
            kind: p.kind,
            class: p.governance_class.map(|c| c.as_str().to_string()).unwrap_or_default(),
            terms: p.matched_terms.join(";"),
            source: format!("{}#{}", p.source_path, p.heading),
        })
        .collect()
}

fn route_rows(routes: &[RouteTotals]) -> Vec<RouteCsvRow> {
    routes
        .iter()
        .map(|r| RouteCsvRow {
            provider_route: r.provider_route.clone(),
            input_tokens: r.totals.input,
            output_tokens: r.totals.output,
            cache_read_tokens: r.totals.cache_read,
            cache_write_tokens: r.totals.cache_write,
            total_tokens: r.totals.total(),
            completions: r.totals.completions,
            cdr: r.totals.cdr(),
        })
        .collect()
}

fn csv_bytes<T: Serialize>(rows: &[T], header: &[&str]) -> Result<Vec<u8>> {
    let mut writer = csv::WriterBuilder::new().has_headers(false).from_writer(Vec::new());
    let bad = |e: csv::Error| Error::Csv {
        path: PathBuf::from("<memory>"),
        source: e,
    };
    writer.write_record(header).map_err(bad)?;
    for row in rows {
        writer.serialize(row).map_err(bad)?;
    }
    writer
        .into_inner()
        .map_err(|e| Error::Config(format!("csv buffer: {e}")))
}

/// Reads a CSV written by [`export_csvs`] back into typed rows.
pub fn read_csv<T: DeserializeOwned>(path: &Path) -> Result<Vec<T>> {
    let mut reader = csv::Reader::from_path(path).map_err(|e| Error::Csv {
        path: path.to_path_buf(),
        source: e,
    })?;
    reader
        .deserialize()
        .collect::<std::result::Result<Vec<T>, _>>()
        .map_err(|e| Error::Csv {
            path: path.to_path_buf(),
            source: e,
        })
}

/// Files staged in memory, written together so a failure can remove
/// everything already on disk.
struct Staged {
    files: Vec<(&'static str, Vec<u8>)>,
}

impl Staged {
    fn write(self, out_dir: &Path) -> Result<Vec<PathBuf>> {
        let mut written: Vec<PathBuf> = Vec::new();
        let result = (|| {
            for (rel, bytes) in &self.files {
                let path = out_dir.join(rel);
                if let Some(parent) = path.parent() {
                    fs::create_dir_all(parent).map_err(|e| Error::io(parent, e))?;
                }
                let tmp = path.with_extension("partial");
                fs::write(&tmp, bytes).map_err(|e| {
                    let _ = fs::remove_file(&tmp);
                    Error::io(&tmp, e)
                })?;
                fs::rename(&tmp, &path).map_err(|e| {
                    let _ = fs::remove_file(&tmp);
                    Error::io(&path, e)
                })?;
                written.push(path);
            }
            Ok(())
        })();
        match result {
            Ok(()) => Ok(written),
            Err(e) => {
                for path in &written {
                    let _ = fs::remove_file(path);
                }
                Err(e)
            }
        }
    }
}

fn csv_files(bundle: &ReportBundle, ledger: Option<&[LedgerEntry]>) -> Result<Vec<(&'static str, Vec<u8>)>> {
    let t = &bundle.tokens;
    let mut files = vec![
        (
            DAILY_CSV,
            csv_bytes(
                &t.daily,
                &["date", "input_tokens", "output_tokens", "cache_read_tokens", "cache_write_tokens", "completions"],
            )?,
        ),
        (
            EVENTS_CSV,
            csv_bytes(
                &t.completions,
                &["timestamp", "provider_route", "model", "input", "output", "cache_read", "cache_write"],
            )?,
        ),
        (
            SENSITIVITY_CSV,
            csv_bytes(&sensitivity_rows(&bundle.sensitivity), &["cap_minutes", "hours", "cluster_count"])?,
        ),
        (
            HISTOGRAM_CSV,
            csv_bytes(
                &histogram_rows(&bundle.sensitivity.histogram),
                &["bin_start_minutes", "bin_end_minutes", "count"],
            )?,
        ),
        (
            METRICS_CSV,
            csv_bytes(
                &metric_rows(&bundle.metrics),
                &["metric", "numerator", "denominator", "window_start", "window_end", "rule_id", "value"],
            )?,
        ),
        (
            PROXY_LEDGER_CSV,
            csv_bytes(&proxy_rows(&bundle.proxies), &["date", "kind", "class", "terms", "source"])?,
        ),
        (
            SURFACES_CSV,
            csv_bytes(
                &bundle
                    .inventory
                    .surfaces
                    .counts
                    .iter()
                    .map(|(s, n)| SurfaceCsvRow {
                        surface: s.clone(),
                        file_count: *n,
                    })
                    .collect::<Vec<_>>(),
                &["surface", "file_count"],
            )?,
        ),
        (
            ROUTES_CSV,
            csv_bytes(
                &route_rows(&t.routes),
                &[
                    "provider_route",
                    "input_tokens",
                    "output_tokens",
                    "cache_read_tokens",
                    "cache_write_tokens",
                    "total_tokens",
                    "completions",
                    "cdr",
                ],
            )?,
        ),
        (
            ROLES_CSV,
            csv_bytes(
                &crate::ingest::Role::ALL
                    .iter()
                    .map(|&r| RoleCsvRow {
                        role: r.as_str().to_string(),
                        count: bundle.metrics.role_counts.get(r),
                    })
                    .collect::<Vec<_>>(),
                &["role", "count"],
            )?,
        ),
    ];
    if let Some(ledger) = ledger {
        files.push((DEDUP_LEDGER_CSV, dedup_ledger_csv(ledger)?));
    }
    Ok(files)
}

/// The de-duplication ledger as CSV bytes.
pub fn dedup_ledger_csv(ledger: &[LedgerEntry]) -> Result<Vec<u8>> {
    let rows: Vec<DedupCsvRow> = ledger
        .iter()
        .map(|e| DedupCsvRow {
            tier: e.tier.as_str().to_string(),
            key: e.key.clone(),
            source_path: e.source_path.clone(),
            line: e.line_number,
            retained: e.retained,
        })
        .collect();
    csv_bytes(&rows, &["tier", "key", "source_path", "line", "retained"])
}

/// Writes the CSV exports only.
pub fn export_csvs(bundle: &ReportBundle, out_dir: &Path) -> Result<Vec<PathBuf>> {
    Staged {
        files: csv_files(bundle, None)?,
    }
    .write(out_dir)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ManifestEntry {
    pub path: String,
    pub bytes: u64,
    pub sha256: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub provenance: Provenance,
    pub files: Vec<ManifestEntry>,
}

/// Writes the text and structured reports, every CSV, the optional dedup
/// ledger and a manifest with per-file digests. On failure nothing that
/// was written is left behind.
pub fn write_bundle(bundle: &ReportBundle, ledger: Option<&[LedgerEntry]>, out_dir: &Path) -> Result<Vec<PathBuf>> {
    let mut files = vec![
        (REPORT_TXT, render_report(bundle, Format::Text)?.into_bytes()),
        (REPORT_JSON, render_report(bundle, Format::Structured)?.into_bytes()),
    ];
    files.extend(csv_files(bundle, ledger)?);
    let manifest = Manifest {
        provenance: bundle.provenance.clone(),
        files: files
            .iter()
            .map(|(rel, bytes)| ManifestEntry {
                path: rel.to_string(),
                bytes: bytes.len() as u64,
                sha256: hex::encode(Sha256::digest(bytes)),
            })
            .collect(),
    };
    files.push((MANIFEST_JSON, (serde_json::to_string_pretty(&manifest)? + "\n").into_bytes()));
    Staged { files }.write(out_dir)
}
