use parem::config::{Config, RunConfig, Scope};
use parem::metrics::Metric;
use parem::pipeline::analyze;
use parem::synth::{generate_corpus, CorpusSpec, GroundTruth};

fn run(spec: &CorpusSpec) -> (GroundTruth, parem::pipeline::Analysis, tempfile::TempDir) {
    let dir = tempfile::tempdir().unwrap();
    let truth = generate_corpus(spec, dir.path()).unwrap();
    let config = Config::default();
    let mut rc = RunConfig::from_config(dir.path(), &config).unwrap();
    rc.window = Some(truth.window);
    let analysis = analyze(&rc, &config).unwrap();
    (truth, analysis, dir)
}

#[test]
fn default_corpus_matches_truth() {
    let (truth, analysis, _dir) = run(&CorpusSpec::with_seed(11));
    let b = &analysis.bundle;
    let m = &b.metrics;
    assert_eq!(m.counts.records, truth.records_main, "records");
    assert_eq!(b.dedup.input, truth.parsed_main, "parsed");
    assert_eq!(b.dedup.removed.explicit_id, truth.duplicates_main.explicit_id);
    assert_eq!(b.dedup.removed.content_hash, truth.duplicates_main.content_hash);
    assert_eq!(b.dedup.removed.trajectory_hash, truth.duplicates_main.trajectory_hash);
    assert_eq!(m.active_days, truth.active_days);
    assert_eq!(m.counts.primary_capped_ms, truth.capped_ms[&30]);
    assert_eq!(m.counts.sensitivity_capped_ms, truth.capped_ms[&60]);
    assert_eq!(b.tokens.totals.input, truth.tokens.input);
    assert_eq!(b.tokens.totals.output, truth.tokens.output);
    assert_eq!(b.tokens.totals.cache_read, truth.tokens.cache_read);
    assert_eq!(b.tokens.totals.cache_write, truth.tokens.cache_write);
    assert_eq!(b.tokens.totals.completions, truth.tokens.completions);
    assert_eq!(b.tokens.routes.len(), truth.routes.len());
    for r in &b.tokens.routes {
        let t = truth.routes[&r.provider_route];
        assert_eq!((r.totals.input, r.totals.cache_read, r.totals.completions), (t.input, t.cache_read, t.completions));
    }
    assert_eq!(b.ledger.dated_sections, truth.dated_sections);
    assert_eq!(b.ledger.output_proxies, truth.output_proxies);
    assert_eq!(b.ledger.governance_events, truth.governance_events);
    assert_eq!(b.ledger.governance_by_class, truth.governance_by_class);
    assert_eq!(m.get(Metric::Asb).numerator as u64, truth.asb);
    for (surface, n) in &truth.surfaces {
        assert_eq!(b.inventory.surfaces.get(surface), *n, "surface {surface}");
    }
    let inv = &b.inventory;
    assert_eq!(inv.total_files, truth.inventory.total_files);
    assert_eq!(inv.memory_files, truth.inventory.memory_files);
    assert_eq!(inv.daily_memory_files, truth.inventory.daily_memory_files);
    assert_eq!(inv.agent_dirs, truth.inventory.agent_dirs);
    assert_eq!(inv.skill_files, truth.inventory.skill_files);
    assert_eq!(inv.main_session_files, truth.inventory.main_session_files);
    assert_eq!(inv.all_session_files, truth.inventory.all_session_files);
    assert_eq!(inv.trajectory_files, truth.inventory.trajectory_files);
    for role in parem::Role::ALL {
        assert_eq!(
            m.role_counts.get(role),
            truth.role_counts.get(role.as_str()).copied().unwrap_or(0),
            "role {}",
            role.as_str()
        );
    }
}

#[test]
fn all_scope_adds_other_agents() {
    let dir = tempfile::tempdir().unwrap();
    let truth = generate_corpus(&CorpusSpec::with_seed(5), dir.path()).unwrap();
    let config = Config::default();
    let mut rc = RunConfig::from_config(dir.path(), &config).unwrap();
    rc.window = Some(truth.window);
    rc.scope = Scope::All;
    let analysis = analyze(&rc, &config).unwrap();
    assert_eq!(analysis.bundle.metrics.counts.records, truth.records_all);
}

#[test]
fn truth_json_round_trips() {
    let dir = tempfile::tempdir().unwrap();
    let truth = generate_corpus(&CorpusSpec::with_seed(3), dir.path()).unwrap();
    let again = GroundTruth::from_json(&truth.to_json().unwrap()).unwrap();
    assert_eq!(truth, again);
}
