//! Artifact-surface classification by workspace path prefix.
//!
//! Rules are ordered longest-prefix-first when loaded, so a nested root such
//! as `aqrab-calibration-study/panel-app/` wins over a shorter parent rule.
//! Among equally long prefixes the declaration order decides. Paths matching
//! no rule fall into the fallback surface, which never counts toward breadth.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::config::{ClassificationConfig, SurfaceRule};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ClassificationRules {
    pub version: String,
    rules: Vec<SurfaceRule>,
    pub fallback: String,
    pub exclude_generated: bool,
    generated: Vec<String>,
}

impl ClassificationRules {
    pub fn new(rules: Vec<SurfaceRule>, fallback: impl Into<String>) -> Self {
        let mut rules: Vec<SurfaceRule> = rules
            .into_iter()
            .map(|r| SurfaceRule {
                prefix: normalize_path(&r.prefix),
                surface: r.surface,
            })
            .collect();
        // stable sort keeps declaration order among equal lengths
        rules.sort_by_key(|r| std::cmp::Reverse(r.prefix.len()));
        ClassificationRules {
            version: "custom".into(),
            rules,
            fallback: fallback.into(),
            exclude_generated: false,
            generated: Vec::new(),
        }
    }

    pub fn from_config(config: &ClassificationConfig) -> Self {
        let mut rules = Self::new(config.rules.clone(), config.fallback.clone());
        rules.version = config.version.clone();
        rules.exclude_generated = config.exclude_generated;
        rules.generated = config.generated.clone();
        rules
    }

    pub fn with_generated(mut self, generated: Vec<String>, exclude: bool) -> Self {
        self.generated = generated;
        self.exclude_generated = exclude;
        self
    }

    /// Rules in evaluation order.
    pub fn rules(&self) -> &[SurfaceRule] {
        &self.rules
    }

    /// Distinct configured surface names, sorted.
    pub fn surfaces(&self) -> Vec<String> {
        let mut names: Vec<String> = self.rules.iter().map(|r| r.surface.clone()).collect();
        names.sort();
        names.dedup();
        names
    }

    pub fn classify<'a>(&'a self, path: &str) -> &'a str {
        let path = normalize_path(path);
        self.rules
            .iter()
            .find(|r| prefix_matches(&r.prefix, &path))
            .map(|r| r.surface.as_str())
            .unwrap_or(&self.fallback)
    }

    /// True if any path component is on the generated-artifact list.
    pub fn is_generated(&self, path: &str) -> bool {
        let path = normalize_path(path);
        path.split('/')
            .any(|component| self.generated.iter().any(|g| g == component))
    }
}

impl Default for ClassificationRules {
    fn default() -> Self {
        Self::from_config(&crate::config::Config::default().classification)
    }
}

fn prefix_matches(prefix: &str, path: &str) -> bool {
    if prefix.is_empty() {
        return true;
    }
    let bare = prefix.trim_end_matches('/');
    path == bare || (path.starts_with(bare) && path[bare.len()..].starts_with('/'))
}

/// Forward slashes, no leading `./` or `/`.
pub(crate) fn normalize_path(path: &str) -> String {
    let mut p = path.replace('\\', "/");
    while let Some(rest) = p.strip_prefix("./") {
        p = rest.to_string();
    }
    p.trim_start_matches('/').to_string()
}

/// First-match classification of one path.
pub fn classify_file(path: &str, rules: &ClassificationRules) -> String {
    rules.classify(path).to_string()
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct SurfaceCounts {
    /// File count per surface. Every configured surface and the fallback
    /// are present, zero or not.
    pub counts: BTreeMap<String, u64>,
    pub fallback: String,
    /// Files dropped by the generated-artifact filter.
    pub excluded_generated: u64,
}

impl SurfaceCounts {
    pub fn total(&self) -> u64 {
        self.counts.values().sum()
    }

    /// Artifact-surface breadth: surfaces with at least one file, fallback excluded.
    pub fn asb(&self) -> u64 {
        self.counts
            .iter()
            .filter(|(name, &n)| n > 0 && **name != self.fallback)
            .count() as u64
    }

    pub fn get(&self, surface: &str) -> u64 {
        self.counts.get(surface).copied().unwrap_or(0)
    }
}

pub fn surface_counts<'a, I>(paths: I, rules: &ClassificationRules) -> SurfaceCounts
where
    I: IntoIterator<Item = &'a str>,
{
    let mut counts: BTreeMap<String, u64> =
        rules.surfaces().into_iter().map(|s| (s, 0)).collect();
    counts.insert(rules.fallback.clone(), 0);
    let mut excluded_generated = 0;
    for path in paths {
        if rules.exclude_generated && rules.is_generated(path) {
            excluded_generated += 1;
            continue;
        }
        *counts.entry(rules.classify(path).to_string()).or_insert(0) += 1;
    }
    SurfaceCounts {
        counts,
        fallback: rules.fallback.clone(),
        excluded_generated,
    }
}

/// Files that look like versions of one logical artifact.
///
/// This is only a candidate listing for manual audit: files in the same
/// surface whose names agree after stripping the extension and common
/// version suffixes.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CandidateGroup {
    pub surface: String,
    pub stem: String,
    pub paths: Vec<String>,
}

pub fn logical_artifact_candidates<'a, I>(paths: I, rules: &ClassificationRules) -> Vec<CandidateGroup>
where
    I: IntoIterator<Item = &'a str>,
{
    let version_suffix =
        regex::Regex::new(r"(?i)([-_ .](v\d+|final|draft|rev\d*|copy)|\s*\(\d+\))+$").expect("valid regex");
    let mut groups: BTreeMap<(String, String), Vec<String>> = BTreeMap::new();
    for path in paths {
        let surface = rules.classify(path);
        if surface == rules.fallback {
            continue;
        }
        let name = path.rsplit('/').next().unwrap_or(path);
        let base = name.rsplit_once('.').map_or(name, |(stem, _)| stem);
        let stem = version_suffix.replace(base, "").to_lowercase();
        groups
            .entry((surface.to_string(), stem))
            .or_default()
            .push(normalize_path(path));
    }
    groups
        .into_iter()
        .filter(|(_, paths)| paths.len() > 1)
        .map(|((surface, stem), mut paths)| {
            paths.sort();
            CandidateGroup { surface, stem, paths }
        })
        .collect()
}
