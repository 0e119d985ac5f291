//! Declarative configuration: workspace layout, field aliases, surface
//! classification rules, extraction rule sets and run defaults.
//!
//! The defaults ship as `config/default.toml`. A user file is merged over
//! them table by table, so a config that only sets `[run] scope = "all"`
//! keeps every default rule.

use std::path::{Path, PathBuf};

use chrono::NaiveDate;
use serde::{Deserialize, Serialize};

use crate::extraction::GovernanceClass;
use crate::{Error, Result};

/// The shipped default configuration, verbatim.
pub const DEFAULT_CONFIG_TOML: &str = include_str!("../config/default.toml");

/// Environment variable naming a default config file for the CLI.
pub const CONFIG_ENV: &str = "PAREM_CONFIG";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Config {
    pub layout: Layout,
    pub aliases: AliasMap,
    pub classification: ClassificationConfig,
    pub extraction: ExtractionConfig,
    pub run: RunDefaults,
}

/// Where things live inside a workspace.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Layout {
    /// Top-level directories whose files are memory-related.
    pub memory_dirs: Vec<String>,
    /// File names that are memory-related wherever they appear.
    pub memory_file_names: Vec<String>,
    /// Extensions of memory files that are parsed for dated sections.
    pub memory_extensions: Vec<String>,
    /// Directory holding one subdirectory per configured agent.
    pub agents_dir: String,
    /// Name of the main agent's directory under `agents_dir`.
    pub main_agent: String,
    /// Session directory name inside each agent directory.
    pub sessions_dir: String,
    pub session_extensions: Vec<String>,
    /// Session files whose name contains this marker are trajectory files.
    pub trajectory_marker: String,
    pub skill_file_names: Vec<String>,
}

/// Field-name aliases for record parsing. Each list is tried in order and
/// the first present field wins.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AliasMap {
    pub id: Vec<String>,
    pub timestamp: Vec<String>,
    pub trajectory_ts: Vec<String>,
    pub role: Vec<String>,
    pub event_type: Vec<String>,
    pub tool_name: Vec<String>,
    pub provider_route: Vec<String>,
    pub model: Vec<String>,
    pub content: Vec<String>,
    pub usage: Vec<String>,
    pub input_tokens: Vec<String>,
    pub output_tokens: Vec<String>,
    pub cache_read_tokens: Vec<String>,
    pub cache_write_tokens: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ClassificationConfig {
    pub version: String,
    pub fallback: String,
    /// Drop generated files (build output, lock files) before counting.
    pub exclude_generated: bool,
    /// Path components or file names treated as generated.
    pub generated: Vec<String>,
    pub rules: Vec<SurfaceRule>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SurfaceRule {
    pub prefix: String,
    pub surface: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Granularity {
    /// Consecutive matching sentences in a section collapse to one event.
    Section,
    /// Every matching sentence is its own event.
    Sentence,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExtractionConfig {
    pub version: String,
    /// Regex applied to markdown heading text; capture group 1 is an ISO date.
    pub heading_pattern: String,
    pub granularity: Granularity,
    pub case_sensitive: bool,
    /// Same-artifact repeats within this many days are dropped.
    pub repeat_horizon_days: u32,
    /// Phrases marking a materially new version, which lifts the repeat filter.
    pub new_version_cues: Vec<String>,
    pub class_priority: Vec<GovernanceClass>,
    pub output_families: Vec<FamilyConfig>,
    pub output_exclusions: Vec<ExclusionConfig>,
    pub governance_families: Vec<FamilyConfig>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FamilyConfig {
    pub name: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub class: Option<GovernanceClass>,
    pub terms: Vec<String>,
}

/// A sentence containing any cue is excluded, unless it also matches one of
/// `unless_families`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExclusionConfig {
    pub name: String,
    pub cues: Vec<String>,
    #[serde(default)]
    pub unless_families: Vec<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Scope {
    /// Only the main agent's sessions.
    Main,
    /// Every configured agent.
    All,
}

impl std::fmt::Display for Scope {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Scope::Main => "main",
            Scope::All => "all",
        })
    }
}

/// Run-level defaults that the CLI flags can override.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunDefaults {
    pub caps: Vec<u32>,
    pub primary_cap: u32,
    pub sensitivity_cap: u32,
    pub scope: Scope,
    pub log1p: bool,
    pub histogram_bin_minutes: u32,
    pub histogram_clip_minutes: u32,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub window_start: Option<NaiveDate>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub window_end: Option<NaiveDate>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub token_window_start: Option<NaiveDate>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub token_window_end: Option<NaiveDate>,
}

impl Default for Config {
    fn default() -> Self {
        Config::from_toml_str("").expect("shipped default config is valid")
    }
}

impl Config {
    /// Parses `text` as a partial config merged over the shipped defaults.
    pub fn from_toml_str(text: &str) -> Result<Self> {
        let mut base = DEFAULT_CONFIG_TOML
            .parse::<toml::Table>()
            .map_err(|e| Error::Config(format!("default config: {e}")))?;
        let overlay = text
            .parse::<toml::Table>()
            .map_err(|e| Error::Config(e.to_string()))?;
        merge_tables(&mut base, overlay);
        let config: Config = toml::Value::Table(base)
            .try_into()
            .map_err(|e: toml::de::Error| Error::Config(e.to_string()))?;
        config.validate()?;
        Ok(config)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_toml_str(&text)
            .map_err(|e| Error::Config(format!("{}: {e}", path.display())))
    }

    pub fn to_toml_string(&self) -> String {
        toml::to_string_pretty(self).expect("config serializes")
    }

    pub fn validate(&self) -> Result<()> {
        if self.layout.agents_dir.is_empty() || self.layout.main_agent.is_empty() {
            return Err(Error::Config("layout.agents_dir and layout.main_agent must be set".into()));
        }
        regex::Regex::new(&self.extraction.heading_pattern)
            .map_err(|e| Error::Config(format!("extraction.heading_pattern: {e}")))?;
        for family in self
            .extraction
            .output_families
            .iter()
            .chain(&self.extraction.governance_families)
        {
            if family.terms.iter().all(|t| t.trim().is_empty()) {
                return Err(Error::Config(format!("keyword family `{}` is empty", family.name)));
            }
        }
        for exclusion in &self.extraction.output_exclusions {
            for name in &exclusion.unless_families {
                if !self.extraction.output_families.iter().any(|f| &f.name == name) {
                    return Err(Error::Config(format!(
                        "exclusion `{}` names unknown family `{name}`",
                        exclusion.name
                    )));
                }
            }
        }
        if self.run.caps.is_empty() || self.run.caps.contains(&0) {
            return Err(Error::Config("run.caps must be a non-empty list of positive minutes".into()));
        }
        if self.run.primary_cap == 0 || self.run.sensitivity_cap == 0 {
            return Err(Error::Config("run caps must be positive".into()));
        }
        if self.run.histogram_bin_minutes == 0 {
            return Err(Error::Config("run.histogram_bin_minutes must be positive".into()));
        }
        Ok(())
    }
}

fn merge_tables(base: &mut toml::Table, overlay: toml::Table) {
    for (key, value) in overlay {
        match (base.get_mut(&key), value) {
            (Some(toml::Value::Table(b)), toml::Value::Table(o)) => merge_tables(b, o),
            (_, value) => {
                base.insert(key, value);
            }
        }
    }
}

/// An inclusive range of UTC calendar dates.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct ObservationWindow {
    pub start_date: NaiveDate,
    pub end_date: NaiveDate,
}

impl ObservationWindow {
    pub fn new(start_date: NaiveDate, end_date: NaiveDate) -> Result<Self> {
        if end_date < start_date {
            return Err(Error::InvalidArgument(format!(
                "window end {end_date} precedes start {start_date}"
            )));
        }
        Ok(ObservationWindow {
            start_date,
            end_date,
        })
    }

    /// Single-day window.
    pub fn day(date: NaiveDate) -> Self {
        ObservationWindow {
            start_date: date,
            end_date: date,
        }
    }

    /// Inclusive number of calendar days.
    pub fn calendar_days(&self) -> u32 {
        ((self.end_date - self.start_date).num_days() + 1) as u32
    }

    pub fn contains(&self, date: NaiveDate) -> bool {
        self.start_date <= date && date <= self.end_date
    }

    pub fn days(&self) -> impl Iterator<Item = NaiveDate> {
        let end = self.end_date;
        self.start_date.iter_days().take_while(move |d| *d <= end)
    }
}

impl std::fmt::Display for ObservationWindow {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}..{}", self.start_date, self.end_date)
    }
}

/// Everything needed to reproduce one run, given the workspace bytes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub root: PathBuf,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub config_path: Option<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub window: Option<ObservationWindow>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub token_window: Option<ObservationWindow>,
    pub caps: Vec<u32>,
    pub primary_cap: u32,
    pub sensitivity_cap: u32,
    pub scope: Scope,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub out_dir: Option<PathBuf>,
    pub exclude_generated: bool,
    pub granularity: Granularity,
    pub log1p: bool,
    pub histogram_bin_minutes: u32,
    pub histogram_clip_minutes: u32,
    /// Command-line overrides applied on top of the config file, by name.
    #[serde(default)]
    pub overrides: Vec<String>,
}

impl RunConfig {
    /// Run settings taken from a loaded config, before any flag overrides.
    pub fn from_config(root: impl Into<PathBuf>, config: &Config) -> Result<Self> {
        let run = &config.run;
        let window = match (run.window_start, run.window_end) {
            (Some(s), Some(e)) => Some(ObservationWindow::new(s, e)?),
            (None, None) => None,
            _ => return Err(Error::Config("run.window_start and run.window_end go together".into())),
        };
        let token_window = match (run.token_window_start, run.token_window_end) {
            (Some(s), Some(e)) => Some(ObservationWindow::new(s, e)?),
            (None, None) => None,
            _ => {
                return Err(Error::Config(
                    "run.token_window_start and run.token_window_end go together".into(),
                ))
            }
        };
        Ok(RunConfig {
            root: root.into(),
            config_path: None,
            window,
            token_window,
            caps: run.caps.clone(),
            primary_cap: run.primary_cap,
            sensitivity_cap: run.sensitivity_cap,
            scope: run.scope,
            out_dir: None,
            exclude_generated: config.classification.exclude_generated,
            granularity: config.extraction.granularity,
            log1p: run.log1p,
            histogram_bin_minutes: run.histogram_bin_minutes,
            histogram_clip_minutes: run.histogram_clip_minutes,
            overrides: Vec::new(),
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn shipped_defaults_parse_and_validate() {
        let config = Config::default();
        assert_eq!(config.layout.main_agent, "main");
        assert_eq!(config.run.caps, vec![15, 30, 45, 60, 90]);
        assert_eq!(config.classification.rules.len(), 11);
        assert_eq!(config.extraction.output_families.len(), 5);
    }

    #[test]
    fn overlay_replaces_only_named_keys() {
        let config = Config::from_toml_str("[run]\nscope = \"all\"\ncaps = [30]\n").unwrap();
        assert_eq!(config.run.scope, Scope::All);
        assert_eq!(config.run.caps, vec![30]);
        assert_eq!(config.run.primary_cap, 30);
        assert_eq!(config.classification, Config::default().classification);
    }

    #[test]
    fn serialized_config_reloads_identically() {
        let config = Config::default();
        let again = Config::from_toml_str(&config.to_toml_string()).unwrap();
        assert_eq!(config, again);
    }

    #[test]
    fn bad_config_is_rejected() {
        assert!(Config::from_toml_str("[run]\ncaps = []\n").is_err());
        assert!(Config::from_toml_str("[extraction]\nheading_pattern = \"(\"\n").is_err());
        assert!(Config::from_toml_str("[layout]\nbogus = 1\n").is_err());
        assert!(Config::from_toml_str("not toml =").is_err());
    }

    #[test]
    fn window_days() {
        let d = |s: &str| s.parse::<NaiveDate>().unwrap();
        let w = ObservationWindow::new(d("2026-01-31"), d("2026-05-25")).unwrap();
        assert_eq!(w.calendar_days(), 115);
        assert_eq!(w.days().count(), 115);
        assert!(ObservationWindow::new(d("2026-02-02"), d("2026-02-01")).is_err());
    }
}
