use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use chrono::NaiveDate;
use clap::{Args, Parser, Subcommand, ValueEnum};

use parem::config::{Config, Granularity, ObservationWindow, RunConfig, Scope, CONFIG_ENV};
use parem::pipeline::{analyze, Analysis};
use parem::report::{self, render_report, write_bundle, Format};
use parem::synth::{generate_corpus, CorpusSpec};

#[derive(Parser)]
#[command(name = "parem", version, about = "PARE-M measurement suite for persistent-agent workspaces")]
struct Cli {
    /// Config file layered over the shipped defaults.
    #[arg(long, global = true, env = CONFIG_ENV)]
    config: Option<PathBuf>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Count files, memory files, agent directories, sessions and surfaces.
    Scan {
        root: PathBuf,
        #[arg(long)]
        json: bool,
    },
    /// Run every stage and write reports and CSV exports.
    Analyze {
        #[command(flatten)]
        run: RunArgs,
        /// Output directory; defaults to <root>/../parem-out.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Print the report instead of writing files.
        #[arg(long)]
        stdout: bool,
        #[arg(long, value_enum, default_value_t = OutFormat::Text)]
        format: OutFormat,
    },
    /// De-duplication statistics, optionally with the full key ledger.
    Dedup {
        #[command(flatten)]
        run: RunArgs,
        /// Write the per-record ledger as CSV.
        #[arg(long)]
        ledger: Option<PathBuf>,
    },
    /// Capped-gap active time under each cap.
    Activetime {
        #[command(flatten)]
        run: RunArgs,
    },
    /// Strict-subset token totals, per-route breakdown and association.
    Tokens {
        #[command(flatten)]
        run: RunArgs,
    },
    /// Output-proxy and governance events from dated memory sections.
    Extract {
        #[command(flatten)]
        run: RunArgs,
        /// Print every event rather than totals.
        #[arg(long)]
        list: bool,
    },
    /// Write a seeded synthetic workspace and its ground truth.
    Synth {
        /// Directory to create; must be missing or empty.
        out: PathBuf,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        /// JSON corpus spec; fields left out take their defaults.
        #[arg(long)]
        spec: Option<PathBuf>,
        /// Where to write ground truth JSON; defaults to <out>.truth.json.
        #[arg(long)]
        truth: Option<PathBuf>,
    },
    /// Print the effective configuration as TOML.
    Config,
}

#[derive(Clone, Copy, ValueEnum)]
enum OutFormat {
    Text,
    Json,
}

#[derive(Clone, Copy, ValueEnum)]
enum ScopeArg {
    Main,
    All,
}

#[derive(Clone, Copy, ValueEnum)]
enum GranularityArg {
    Section,
    Sentence,
}

#[derive(Args)]
struct RunArgs {
    /// Workspace root.
    root: PathBuf,
    #[arg(long, requires = "window_end")]
    window_start: Option<NaiveDate>,
    #[arg(long, requires = "window_start")]
    window_end: Option<NaiveDate>,
    #[arg(long, requires = "token_window_end")]
    token_window_start: Option<NaiveDate>,
    #[arg(long, requires = "token_window_start")]
    token_window_end: Option<NaiveDate>,
    /// Comma-separated cap list in minutes.
    #[arg(long, value_delimiter = ',')]
    caps: Option<Vec<u32>>,
    #[arg(long)]
    primary_cap: Option<u32>,
    #[arg(long)]
    sensitivity_cap: Option<u32>,
    #[arg(long, value_enum)]
    scope: Option<ScopeArg>,
    #[arg(long)]
    exclude_generated: bool,
    #[arg(long, value_enum)]
    granularity: Option<GranularityArg>,
    /// Use log1p instead of excluding zero-count completions.
    #[arg(long)]
    log1p: bool,
    #[arg(long)]
    histogram_bin_minutes: Option<u32>,
    #[arg(long)]
    histogram_clip_minutes: Option<u32>,
}

fn load_config(path: Option<&Path>) -> Result<Config> {
    match path {
        Some(p) => Config::load(p).with_context(|| format!("loading config {}", p.display())),
        None => Ok(Config::default()),
    }
}

impl RunArgs {
    fn resolve(&self, config: &Config, config_path: Option<&Path>) -> Result<RunConfig> {
        let mut run = RunConfig::from_config(&self.root, config)?;
        run.config_path = config_path.map(Path::to_path_buf);
        let mut note = |name: &str| run.overrides.push(name.to_string());
        if let (Some(s), Some(e)) = (self.window_start, self.window_end) {
            note("window");
            run.window = Some(ObservationWindow::new(s, e)?);
        }
        if let (Some(s), Some(e)) = (self.token_window_start, self.token_window_end) {
            note("token_window");
            run.token_window = Some(ObservationWindow::new(s, e)?);
        }
        if let Some(caps) = &self.caps {
            note("caps");
            run.caps = caps.clone();
        }
        if let Some(c) = self.primary_cap {
            note("primary_cap");
            run.primary_cap = c;
        }
        if let Some(c) = self.sensitivity_cap {
            note("sensitivity_cap");
            run.sensitivity_cap = c;
        }
        if let Some(s) = self.scope {
            note("scope");
            run.scope = match s {
                ScopeArg::Main => Scope::Main,
                ScopeArg::All => Scope::All,
            };
        }
        if self.exclude_generated {
            note("exclude_generated");
            run.exclude_generated = true;
        }
        if let Some(g) = self.granularity {
            note("granularity");
            run.granularity = match g {
                GranularityArg::Section => Granularity::Section,
                GranularityArg::Sentence => Granularity::Sentence,
            };
        }
        if self.log1p {
            note("log1p");
            run.log1p = true;
        }
        if let Some(b) = self.histogram_bin_minutes {
            note("histogram_bin_minutes");
            run.histogram_bin_minutes = b;
        }
        if let Some(c) = self.histogram_clip_minutes {
            note("histogram_clip_minutes");
            run.histogram_clip_minutes = c;
        }
        if run.caps.contains(&0) || run.primary_cap == 0 || run.sensitivity_cap == 0 {
            bail!("caps must be positive minutes");
        }
        Ok(run)
    }

    fn analyze(&self, config: &Config, config_path: Option<&Path>) -> Result<(RunConfig, Analysis)> {
        let run = self.resolve(config, config_path)?;
        let analysis = analyze(&run, config)?;
        Ok((run, analysis))
    }
}

fn opt(v: Option<f64>, digits: usize) -> String {
    v.map_or_else(|| "undefined".to_string(), |v| format!("{v:.digits$}"))
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}

fn run(cli: Cli) -> Result<()> {
    let config_path = cli.config.as_deref();
    let config = load_config(config_path)?;
    match cli.command {
        Command::Config => print!("{}", config.to_toml_string()),
        Command::Scan { root, json } => {
            let rules = parem::classify::ClassificationRules::from_config(&config.classification)
                .with_generated(config.classification.generated.clone(), config.classification.exclude_generated);
            let inv = parem::ingest::scan_workspace(&root, &config, &rules)?;
            if json {
                println!("{}", serde_json::to_string_pretty(&inv)?);
            } else {
                println!("files                     {}", inv.total_files);
                println!("memory files              {}", inv.memory_files);
                println!("daily memory files        {}", inv.daily_memory_files);
                println!("agent directories         {}", inv.agent_dirs);
                println!("skill files               {}", inv.skill_files);
                println!("main session files        {} ({} recoverable)", inv.main_session_files, inv.main_recoverable_files);
                println!("all session files         {} ({} recoverable)", inv.all_session_files, inv.all_recoverable_files);
                println!("trajectory files          {}", inv.trajectory_files);
                println!("surfaces (ASB)            {}", inv.surfaces.asb());
                for (surface, n) in &inv.surfaces.counts {
                    println!("  {surface:<24}{n}");
                }
                for w in &inv.warnings {
                    eprintln!("warning: {w}");
                }
            }
        }
        Command::Analyze {
            run: args,
            out,
            stdout,
            format,
        } => {
            let mut run = args.resolve(&config, config_path)?;
            let format = match format {
                OutFormat::Text => Format::Text,
                OutFormat::Json => Format::Structured,
            };
            if stdout {
                let analysis = analyze(&run, &config)?;
                print!("{}", render_report(&analysis.bundle, format)?);
                return Ok(());
            }
            let out = match out {
                Some(o) => o,
                None => args
                    .root
                    .parent()
                    .map_or_else(|| PathBuf::from("parem-out"), |p| p.join("parem-out")),
            };
            run.out_dir = Some(out.clone());
            let analysis = analyze(&run, &config)?;
            let written = write_bundle(&analysis.bundle, Some(&analysis.dedup_ledger), &out)
                .with_context(|| format!("writing outputs to {}", out.display()))?;
            let m = &analysis.bundle.metrics;
            for v in &m.values {
                println!("{:<4} {}", v.metric.code(), v.display());
            }
            println!("wrote {} files under {}", written.len(), out.display());
            for w in &analysis.bundle.warnings {
                eprintln!("warning: {w}");
            }
        }
        Command::Dedup { run: args, ledger } => {
            let (_, analysis) = args.analyze(&config, config_path)?;
            let d = &analysis.bundle.dedup;
            println!("parsed            {}", d.input);
            println!("retained          {}", d.retained);
            println!("removed           {}", d.removed.total());
            println!("  explicit id     {}", d.removed.explicit_id);
            println!("  content hash    {}", d.removed.content_hash);
            println!("  trajectory hash {}", d.removed.trajectory_hash);
            if let Some(path) = ledger {
                let bytes = report::dedup_ledger_csv(&analysis.dedup_ledger)?;
                std::fs::write(&path, bytes).with_context(|| format!("writing {}", path.display()))?;
            }
        }
        Command::Activetime { run: args } => {
            let (_, analysis) = args.analyze(&config, config_path)?;
            let s = &analysis.bundle.sensitivity;
            println!("window {}", analysis.bundle.metrics.window);
            println!("{:>9}  {:>10}  {:>8}", "cap_min", "hours", "clusters");
            for e in &s.rows {
                println!("{:>9}  {:>10.1}  {:>8}", e.cap_minutes, e.hours, e.cluster_count);
            }
            println!("gap histogram ({}-min bins, clip {}):", s.histogram.bin_edges.get(1).copied().unwrap_or(0), s.histogram.clip_minutes);
            for row in report::histogram_rows(&s.histogram) {
                let end = row.bin_end_minutes.map_or("inf".to_string(), |e| e.to_string());
                println!("  [{}, {}) {}", row.bin_start_minutes, end, row.count);
            }
        }
        Command::Tokens { run: args } => {
            let (_, analysis) = args.analyze(&config, config_path)?;
            let t = &analysis.bundle.tokens;
            println!("token window      {}", t.window);
            println!("completions       {}", t.totals.completions);
            println!("input             {}", t.totals.input);
            println!("output            {}", t.totals.output);
            println!("cache read        {}", t.totals.cache_read);
            println!("cache write       {}", t.totals.cache_write);
            println!("total             {}", t.totals.total());
            println!("CDR               {}", opt(t.cdr, 3));
            for r in &t.routes {
                println!(
                    "  {:<20} completions {:>6}  tokens {:>12}  CDR {}",
                    r.provider_route,
                    r.totals.completions,
                    r.totals.total(),
                    opt(r.totals.cdr(), 3)
                );
            }
            let a = &t.association;
            println!(
                "pearson r (log)   {}\nspearman rho      {}\nn                 {} ({} zero excluded)",
                opt(a.pearson_r_log, 3),
                opt(a.spearman_rho, 3),
                a.n_events,
                a.excluded_zero_events
            );
        }
        Command::Extract { run: args, list } => {
            let (_, analysis) = args.analyze(&config, config_path)?;
            let b = &analysis.bundle;
            if list {
                for row in report::proxy_rows(&b.proxies) {
                    println!("{}\t{:?}\t{}\t{}\t{}", row.date, row.kind, row.class, row.terms, row.source);
                }
            }
            println!("dated sections    {}", b.ledger.dated_sections);
            println!("output proxies    {}", b.ledger.output_proxies);
            println!("governance events {}", b.ledger.governance_events);
            for (class, n) in &b.ledger.governance_by_class {
                println!("  {class:<16}{n}");
            }
            let m = &b.metrics;
            println!("OPR               {}", m.get(parem::metrics::Metric::Opr).display());
            println!("GER               {}", m.get(parem::metrics::Metric::Ger).display());
        }
        Command::Synth { out, seed, spec, truth } => {
            let mut corpus = match spec {
                Some(p) => {
                    let text = std::fs::read_to_string(&p).with_context(|| format!("reading {}", p.display()))?;
                    serde_json::from_str::<CorpusSpec>(&text).with_context(|| format!("parsing {}", p.display()))?
                }
                None => CorpusSpec::default(),
            };
            corpus.seed = seed;
            let gt = generate_corpus(&corpus, &out)?;
            let truth_path = truth.unwrap_or_else(|| {
                let mut name = out.file_name().map(|n| n.to_os_string()).unwrap_or_default();
                name.push(".truth.json");
                out.with_file_name(name)
            });
            std::fs::write(&truth_path, gt.to_json()?).with_context(|| format!("writing {}", truth_path.display()))?;
            println!(
                "wrote {} files to {} ({} records, {} active days); truth in {}",
                gt.inventory.total_files,
                out.display(),
                gt.records_main,
                gt.active_days.len(),
                truth_path.display()
            );
        }
    }
    Ok(())
}
