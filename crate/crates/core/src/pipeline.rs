//! End-to-end analysis: workspace in, [`ReportBundle`] out.

use std::path::Path;

use crate::activetime::{cap_sensitivity, gap_histogram};
use crate::classify::ClassificationRules;
use crate::config::{Config, ObservationWindow, RunConfig};
use crate::dedup::{deduplicate_with_ledger, DedupStats, LedgerEntry};
use crate::extraction::{
    extract_governance_events, extract_output_proxies, parse_memory_sections, HeadingPattern, KeywordRuleSet,
    ProxyEvent,
};
use crate::ingest::{load_workspace, Event, Workspace};
use crate::metrics::{compute_pare_m, windowed_timestamps, MetricInputs};
use crate::report::{
    ledger_summary, utilization_rows, write_bundle, BundleBuilder, Provenance, ReportBundle, SensitivityTable,
    TokenTables,
};
use crate::tokens::{
    aggregate_tokens, cache_output_association, completion_rows, daily_composition, per_route, strict_subset,
    ZeroHandling,
};
use crate::{Result, FRAMEWORK, TOOL_VERSION};

/// Result of [`analyze`].
#[derive(Debug, Clone)]
pub struct Analysis {
    pub bundle: ReportBundle,
    pub dedup_ledger: Vec<LedgerEntry>,
    /// De-duplicated in-scope events, canonical order.
    pub events: Vec<Event>,
}

/// Classification rules for a run, honoring the generated-file override.
pub fn rules_for(run: &RunConfig, config: &Config) -> ClassificationRules {
    ClassificationRules::from_config(&config.classification)
        .with_generated(config.classification.generated.clone(), run.exclude_generated)
}

/// Loads the workspace, keeps in-scope events and de-duplicates them.
pub fn load_and_dedup(run: &RunConfig, config: &Config) -> Result<(Workspace, Vec<Event>, DedupStats, Vec<LedgerEntry>)> {
    let rules = rules_for(run, config);
    let workspace = load_workspace(&run.root, config, &rules)?;
    let scoped: Vec<Event> = workspace
        .events()
        .filter(|e| e.agent_scope.in_scope(run.scope))
        .cloned()
        .collect();
    let (events, stats, ledger) = deduplicate_with_ledger(scoped);
    Ok((workspace, events, stats, ledger))
}

/// The explicit window, or the span of dated events. With no dated events
/// at all, a single-day window at the epoch is used and a warning recorded.
pub fn resolve_window(explicit: Option<ObservationWindow>, events: &[Event], warnings: &mut Vec<String>) -> ObservationWindow {
    if let Some(w) = explicit {
        return w;
    }
    let dates = events.iter().filter_map(Event::date);
    match dates.clone().min().zip(dates.max()) {
        Some((start, end)) => {
            warnings.push(format!(
                "window derived from event dates ({start}..{end}); configure a fixed window for comparable rates"
            ));
            ObservationWindow { start_date: start, end_date: end }
        }
        None => {
            warnings.push("no timestamped events and no window given; using 1970-01-01".to_string());
            ObservationWindow::day(chrono::NaiveDate::default())
        }
    }
}

/// Runs every stage and assembles the report bundle. Nothing is written.
pub fn analyze(run: &RunConfig, config: &Config) -> Result<Analysis> {
    config.validate()?;
    let (workspace, events, dedup, dedup_ledger) = load_and_dedup(run, config)?;
    let mut warnings = workspace.inventory.warnings.clone();
    let window = resolve_window(run.window, &events, &mut warnings);
    let token_window = run.token_window.unwrap_or(window);

    let pattern = HeadingPattern::new(&config.extraction.heading_pattern)?;
    let memory = parse_memory_sections(&workspace.memory_paths(&config.layout), &pattern, Some(&run.root));
    warnings.extend(memory.warnings.iter().cloned());
    let sections: Vec<_> = memory.sections.into_iter().filter(|s| window.contains(s.date)).collect();
    let keyword_rules = KeywordRuleSet::from_config(&config.extraction)?.with_granularity(run.granularity);
    let mut proxies: Vec<ProxyEvent> = extract_output_proxies(&sections, &keyword_rules);
    let governance = extract_governance_events(&sections, &keyword_rules);
    let output_count = proxies.len() as u64;
    let governance_count = governance.len() as u64;
    proxies.extend(governance);

    let strict = strict_subset(&events, &token_window);
    let totals = aggregate_tokens(strict.iter().copied());
    let zero = if run.log1p { ZeroHandling::Log1p } else { ZeroHandling::Exclude };
    let mut metrics = compute_pare_m(MetricInputs {
        events: &events,
        output_proxies: output_count,
        governance_events: governance_count,
        surfaces: &workspace.inventory.surfaces,
        window,
        tokens: &totals,
        primary_cap: run.primary_cap,
        sensitivity_cap: run.sensitivity_cap,
    })?;
    if token_window != window {
        metrics
            .annotations
            .push(format!("CDR uses the token window {token_window}, not the observation window"));
    }

    let tokens = TokenTables {
        window: token_window,
        totals,
        cdr: totals.cdr(),
        routes: per_route(strict.iter().copied()),
        daily: daily_composition(strict.iter().copied(), &token_window),
        completions: completion_rows(strict.iter().copied()),
        association: cache_output_association(strict.iter().copied(), zero),
        session_model_completed: metrics.role_counts.model_completed,
    };

    let timestamps = windowed_timestamps(&events, &window);
    let sensitivity = SensitivityTable {
        rows: cap_sensitivity(&timestamps, &run.caps)?,
        histogram: gap_histogram(&timestamps, run.histogram_bin_minutes, run.histogram_clip_minutes)?,
    };

    let provenance = Provenance {
        tool: "parem".to_string(),
        tool_version: TOOL_VERSION.to_string(),
        framework: FRAMEWORK.to_string(),
        classification_rules: config.classification.version.clone(),
        extraction_rules: config.extraction.version.clone(),
        window,
        token_window,
        run: run.clone(),
    };

    let bundle = BundleBuilder {
        provenance: Some(provenance),
        utilization: Some(utilization_rows(&metrics, &dedup)),
        ledger: Some(ledger_summary(sections.len(), &proxies)),
        metrics: Some(metrics),
        inventory: Some(workspace.inventory),
        dedup: Some(dedup),
        proxies: Some(proxies),
        tokens: Some(tokens),
        sensitivity: Some(sensitivity),
        warnings,
    }
    .build()?;
    Ok(Analysis {
        bundle,
        dedup_ledger,
        events,
    })
}

/// [`analyze`] followed by writing every output under `out_dir`.
pub fn analyze_to(run: &RunConfig, config: &Config, out_dir: &Path) -> Result<Analysis> {
    let analysis = analyze(run, config)?;
    write_bundle(&analysis.bundle, Some(&analysis.dedup_ledger), out_dir)?;
    Ok(analysis)
}
