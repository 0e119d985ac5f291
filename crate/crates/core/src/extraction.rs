//! Output-proxy and governance events from dated memory notes.
//!
//! Memory files are markdown. A heading whose text contains a date (by
//! default `YYYY-MM-DD`) opens a [`DatedSection`]; everything up to the next
//! dated heading belongs to it, undated sub-headings included. Text before
//! the first dated heading is ignored.
//!
//! Each section body is split into sentences and every sentence is matched
//! against keyword families, case-insensitively and on word boundaries.
//! Matched sentences are grouped into events according to [`Granularity`]:
//! with `section`, a run of consecutive matched sentences is one event; with
//! `sentence`, each matched sentence is.
//!
//! Output proxies pass three filters. Exclusion cues (discussion words,
//! generated-artifact words) drop a sentence unless it also carries a
//! completion verb from a named family. Finally, a cluster whose artifact
//! file names were all already logged within the repeat horizon is dropped
//! unless it mentions a new version.
//!
//! Governance events use their own families, each optionally tied to a
//! [`GovernanceClass`]. When several classes match one event the configured
//! priority decides.

use std::collections::{BTreeMap, BTreeSet};
use std::path::{Path, PathBuf};

use chrono::NaiveDate;
use rayon::prelude::*;
use regex::{Regex, RegexBuilder};
use serde::{Deserialize, Serialize};

use crate::config::{ExtractionConfig, Granularity};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum GovernanceClass {
    Verification,
    Correction,
    Protocol,
    Safety,
    Failure,
}

impl GovernanceClass {
    pub const ALL: [GovernanceClass; 5] = [
        GovernanceClass::Verification,
        GovernanceClass::Correction,
        GovernanceClass::Protocol,
        GovernanceClass::Safety,
        GovernanceClass::Failure,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            GovernanceClass::Verification => "verification",
            GovernanceClass::Correction => "correction",
            GovernanceClass::Protocol => "protocol",
            GovernanceClass::Safety => "safety",
            GovernanceClass::Failure => "failure",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DatedSection {
    pub date: NaiveDate,
    pub heading: String,
    pub body: String,
    pub source_path: String,
    /// Position of the section within its file.
    pub ordinal: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ProxyKind {
    Output,
    Governance,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ProxyEvent {
    pub date: NaiveDate,
    pub kind: ProxyKind,
    pub governance_class: Option<GovernanceClass>,
    /// Distinct matched terms, in order of first appearance.
    pub matched_terms: Vec<String>,
    pub families: Vec<String>,
    pub source_path: String,
    pub heading: String,
}

/// Compiled heading-date pattern.
#[derive(Debug, Clone)]
pub struct HeadingPattern(Regex);

impl HeadingPattern {
    pub fn new(pattern: &str) -> Result<Self> {
        Regex::new(pattern)
            .map(HeadingPattern)
            .map_err(|e| Error::Config(format!("heading pattern: {e}")))
    }

    pub fn date_of(&self, heading: &str) -> Option<NaiveDate> {
        let caps = self.0.captures(heading)?;
        let text = caps.get(1).or_else(|| caps.get(0))?.as_str();
        NaiveDate::parse_from_str(text, "%Y-%m-%d").ok()
    }
}

impl Default for HeadingPattern {
    fn default() -> Self {
        HeadingPattern::new(r"(\d{4}-\d{2}-\d{2})").expect("valid default pattern")
    }
}

fn heading_text(line: &str) -> Option<&str> {
    let trimmed = line.trim_start();
    let rest = trimmed.trim_start_matches('#');
    let level = trimmed.len() - rest.len();
    ((1..=6).contains(&level) && (rest.is_empty() || rest.starts_with([' ', '\t']))).then(|| rest.trim())
}

/// Splits one markdown document into dated sections.
pub fn parse_sections_str(text: &str, source_path: &str, pattern: &HeadingPattern) -> Vec<DatedSection> {
    let mut sections: Vec<DatedSection> = Vec::new();
    for line in text.lines() {
        if let Some(heading) = heading_text(line) {
            if let Some(date) = pattern.date_of(heading) {
                sections.push(DatedSection {
                    date,
                    heading: heading.to_string(),
                    body: String::new(),
                    source_path: source_path.to_string(),
                    ordinal: sections.len(),
                });
                continue;
            }
        }
        if let Some(current) = sections.last_mut() {
            current.body.push_str(line);
            current.body.push('\n');
        }
    }
    sections
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct MemoryParse {
    pub sections: Vec<DatedSection>,
    pub warnings: Vec<String>,
}

/// Reads memory files into dated sections. `source_path` on each section is
/// the file path relative to `base` when given. Unreadable files produce a
/// warning and are skipped.
pub fn parse_memory_sections(files: &[PathBuf], pattern: &HeadingPattern, base: Option<&Path>) -> MemoryParse {
    let per_file: Vec<std::result::Result<Vec<DatedSection>, String>> = files
        .par_iter()
        .map(|path| {
            let shown = base
                .and_then(|b| path.strip_prefix(b).ok())
                .unwrap_or(path)
                .to_string_lossy()
                .replace('\\', "/");
            match std::fs::read(path) {
                Ok(bytes) => Ok(parse_sections_str(&String::from_utf8_lossy(&bytes), &shown, pattern)),
                Err(e) => Err(format!("{shown}: unreadable memory file ({e})")),
            }
        })
        .collect();
    let mut parse = MemoryParse::default();
    for result in per_file {
        match result {
            Ok(sections) => parse.sections.extend(sections),
            Err(warning) => parse.warnings.push(warning),
        }
    }
    sort_sections(&mut parse.sections);
    parse
}

fn sort_sections(sections: &mut [DatedSection]) {
    sections.sort_by(|a, b| (a.date, &a.source_path, a.ordinal).cmp(&(b.date, &b.source_path, b.ordinal)));
}

/// Splits text into sentences at line breaks and at `.`, `!` or `?`
/// followed by whitespace. List markers and heading hashes are stripped.
pub fn split_sentences(text: &str) -> Vec<String> {
    let mut out = Vec::new();
    for line in text.lines() {
        let mut line = line.trim();
        line = line.trim_start_matches('#').trim_start();
        for marker in ["- [x] ", "- [ ] ", "- ", "* ", "+ "] {
            if let Some(rest) = line.strip_prefix(marker) {
                line = rest;
                break;
            }
        }
        let chars: Vec<char> = line.chars().collect();
        let mut start = 0;
        for i in 0..chars.len() {
            let end_here = matches!(chars[i], '.' | '!' | '?')
                && chars.get(i + 1).map_or(true, |c| c.is_whitespace());
            if end_here {
                push_sentence(&mut out, &chars[start..=i]);
                start = i + 1;
            }
        }
        if start < chars.len() {
            push_sentence(&mut out, &chars[start..]);
        }
    }
    out
}

fn push_sentence(out: &mut Vec<String>, chars: &[char]) {
    let s: String = chars.iter().collect();
    let s = s.trim();
    if !s.is_empty() {
        out.push(s.to_string());
    }
}

#[derive(Debug, Clone)]
struct Term {
    text: String,
    regex: Regex,
}

#[derive(Debug, Clone)]
struct Family {
    name: String,
    class: Option<GovernanceClass>,
    terms: Vec<Term>,
}

impl Family {
    fn matches(&self, sentence: &str) -> Vec<&str> {
        self.terms
            .iter()
            .filter(|t| t.regex.is_match(sentence))
            .map(|t| t.text.as_str())
            .collect()
    }
}

#[derive(Debug, Clone)]
struct Exclusion {
    name: String,
    cues: Vec<Term>,
    unless_families: Vec<String>,
}

fn compile_term(term: &str, case_sensitive: bool) -> Result<Term> {
    let words: Vec<&str> = term.split_whitespace().collect();
    if words.is_empty() {
        return Err(Error::Config("empty keyword".into()));
    }
    let body = words.iter().map(|w| regex::escape(w)).collect::<Vec<_>>().join(r"\s+");
    // \b only makes sense next to word characters
    let first = words[0].chars().next().unwrap();
    let last = words[words.len() - 1].chars().last().unwrap();
    let lead = if first.is_alphanumeric() || first == '_' { r"\b" } else { "" };
    let tail = if last.is_alphanumeric() || last == '_' { r"\b" } else { "" };
    let regex = RegexBuilder::new(&format!("{lead}{body}{tail}"))
        .case_insensitive(!case_sensitive)
        .build()
        .map_err(|e| Error::Config(format!("keyword `{term}`: {e}")))?;
    Ok(Term {
        text: words.join(" "),
        regex,
    })
}

/// Compiled, validated extraction rules.
#[derive(Debug, Clone)]
pub struct KeywordRuleSet {
    pub version: String,
    pub granularity: Granularity,
    pub case_sensitive: bool,
    pub repeat_horizon_days: u32,
    output: Vec<Family>,
    exclusions: Vec<Exclusion>,
    governance: Vec<Family>,
    class_priority: Vec<GovernanceClass>,
    new_version_cues: Vec<Term>,
    artifact_name: Regex,
}

impl KeywordRuleSet {
    pub fn from_config(config: &ExtractionConfig) -> Result<Self> {
        let cs = config.case_sensitive;
        let family = |f: &crate::config::FamilyConfig| -> Result<Family> {
            let terms = f
                .terms
                .iter()
                .filter(|t| !t.trim().is_empty())
                .map(|t| compile_term(t, cs))
                .collect::<Result<Vec<_>>>()?;
            if terms.is_empty() {
                return Err(Error::Config(format!("keyword family `{}` is empty", f.name)));
            }
            Ok(Family {
                name: f.name.clone(),
                class: f.class,
                terms,
            })
        };
        let output = config.output_families.iter().map(family).collect::<Result<Vec<_>>>()?;
        let governance = config.governance_families.iter().map(family).collect::<Result<Vec<_>>>()?;
        let exclusions = config
            .output_exclusions
            .iter()
            .map(|x| {
                for name in &x.unless_families {
                    if !output.iter().any(|f| &f.name == name) {
                        return Err(Error::Config(format!(
                            "exclusion `{}` names unknown family `{name}`",
                            x.name
                        )));
                    }
                }
                Ok(Exclusion {
                    name: x.name.clone(),
                    cues: x.cues.iter().map(|c| compile_term(c, cs)).collect::<Result<Vec<_>>>()?,
                    unless_families: x.unless_families.clone(),
                })
            })
            .collect::<Result<Vec<_>>>()?;
        let mut class_priority = config.class_priority.clone();
        for class in GovernanceClass::ALL {
            if !class_priority.contains(&class) {
                class_priority.push(class);
            }
        }
        Ok(KeywordRuleSet {
            version: config.version.clone(),
            granularity: config.granularity,
            case_sensitive: cs,
            repeat_horizon_days: config.repeat_horizon_days,
            output,
            exclusions,
            governance,
            class_priority,
            new_version_cues: config
                .new_version_cues
                .iter()
                .map(|c| compile_term(c, false))
                .collect::<Result<Vec<_>>>()?,
            artifact_name: Regex::new(r"`([^`]+)`|\b([A-Za-z0-9][A-Za-z0-9_-]*\.[A-Za-z][A-Za-z0-9]{0,4})\b")
                .expect("valid regex"),
        })
    }

    pub fn with_granularity(mut self, granularity: Granularity) -> Self {
        self.granularity = granularity;
        self
    }

    fn class_rank(&self, class: GovernanceClass) -> usize {
        self.class_priority.iter().position(|c| *c == class).unwrap_or(usize::MAX)
    }

    fn excluded(&self, sentence: &str, matched_families: &BTreeSet<&str>) -> Option<&str> {
        self.exclusions
            .iter()
            .find(|x| {
                x.cues.iter().any(|c| c.regex.is_match(sentence))
                    && !x.unless_families.iter().any(|f| matched_families.contains(f.as_str()))
            })
            .map(|x| x.name.as_str())
    }

    fn artifact_names(&self, text: &str) -> BTreeSet<String> {
        self.artifact_name
            .captures_iter(text)
            .filter_map(|c| c.get(1).or_else(|| c.get(2)))
            .map(|m| m.as_str().to_lowercase())
            .collect()
    }
}

impl Default for KeywordRuleSet {
    fn default() -> Self {
        Self::from_config(&crate::config::Config::default().extraction).expect("shipped rules are valid")
    }
}

#[derive(Debug, Default)]
struct SentenceMatch<'a> {
    terms: Vec<&'a str>,
    families: Vec<&'a str>,
    classes: Vec<GovernanceClass>,
}

impl SentenceMatch<'_> {
    fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }
}

fn match_families<'a>(families: &'a [Family], sentence: &str) -> SentenceMatch<'a> {
    let mut m = SentenceMatch::default();
    for family in families {
        let mut hit = false;
        for term in family.matches(sentence) {
            hit = true;
            if !m.terms.contains(&term) {
                m.terms.push(term);
            }
        }
        if hit {
            m.families.push(&family.name);
            if let Some(class) = family.class {
                m.classes.push(class);
            }
        }
    }
    m
}

/// A run of matched sentences that becomes one event.
struct Cluster<'a> {
    text: String,
    matched: SentenceMatch<'a>,
}

fn clusters<'a>(sentences: Vec<(String, SentenceMatch<'a>)>, granularity: Granularity) -> Vec<Cluster<'a>> {
    let mut out: Vec<Cluster<'a>> = Vec::new();
    let mut open = false;
    for (sentence, m) in sentences {
        if m.is_empty() {
            open = false;
            continue;
        }
        match out.last_mut() {
            Some(cluster) if open && granularity == Granularity::Section => {
                for t in m.terms {
                    if !cluster.matched.terms.contains(&t) {
                        cluster.matched.terms.push(t);
                    }
                }
                for f in m.families {
                    if !cluster.matched.families.contains(&f) {
                        cluster.matched.families.push(f);
                    }
                }
                cluster.matched.classes.extend(m.classes);
                cluster.text.push(' ');
                cluster.text.push_str(&sentence);
            }
            _ => out.push(Cluster {
                text: sentence,
                matched: m,
            }),
        }
        open = true;
    }
    out
}

fn proxy(section: &DatedSection, kind: ProxyKind, class: Option<GovernanceClass>, m: &SentenceMatch) -> ProxyEvent {
    ProxyEvent {
        date: section.date,
        kind,
        governance_class: class,
        matched_terms: m.terms.iter().map(|t| t.to_string()).collect(),
        families: m.families.iter().map(|f| f.to_string()).collect(),
        source_path: section.source_path.clone(),
        heading: section.heading.clone(),
    }
}

fn ordered(sections: &[DatedSection]) -> Vec<&DatedSection> {
    let mut refs: Vec<&DatedSection> = sections.iter().collect();
    refs.sort_by(|a, b| (a.date, &a.source_path, a.ordinal).cmp(&(b.date, &b.source_path, b.ordinal)));
    refs
}

/// Output-proxy events, ordered by (date, source, position in file).
pub fn extract_output_proxies(sections: &[DatedSection], rules: &KeywordRuleSet) -> Vec<ProxyEvent> {
    let mut last_seen: BTreeMap<String, NaiveDate> = BTreeMap::new();
    let horizon = i64::from(rules.repeat_horizon_days);
    let mut events = Vec::new();
    for section in ordered(sections) {
        let matched: Vec<(String, SentenceMatch)> = split_sentences(&section.body)
            .into_iter()
            .map(|s| {
                let m = match_families(&rules.output, &s);
                let families: BTreeSet<&str> = m.families.iter().copied().collect();
                let m = if !m.is_empty() && rules.excluded(&s, &families).is_some() {
                    SentenceMatch::default()
                } else {
                    m
                };
                (s, m)
            })
            .collect();
        for cluster in clusters(matched, rules.granularity) {
            let names = rules.artifact_names(&cluster.text);
            let repeat = !names.is_empty()
                && names.iter().all(|n| {
                    last_seen
                        .get(n)
                        .is_some_and(|&seen| (section.date - seen).num_days() <= horizon)
                })
                && !rules.new_version_cues.iter().any(|c| c.regex.is_match(&cluster.text));
            for n in names {
                last_seen.insert(n, section.date);
            }
            if !repeat {
                events.push(proxy(section, ProxyKind::Output, None, &cluster.matched));
            }
        }
    }
    events
}

/// Governance events, ordered like [`extract_output_proxies`].
pub fn extract_governance_events(sections: &[DatedSection], rules: &KeywordRuleSet) -> Vec<ProxyEvent> {
    let mut events = Vec::new();
    for section in ordered(sections) {
        let matched: Vec<(String, SentenceMatch)> = split_sentences(&section.body)
            .into_iter()
            .map(|s| {
                let m = match_families(&rules.governance, &s);
                (s, m)
            })
            .collect();
        for cluster in clusters(matched, rules.granularity) {
            let class = cluster
                .matched
                .classes
                .iter()
                .copied()
                .min_by_key(|c| rules.class_rank(*c));
            events.push(proxy(section, ProxyKind::Governance, class, &cluster.matched));
        }
    }
    events
}

/// Per-class governance counts; `None` collects untagged events.
pub fn governance_counts(events: &[ProxyEvent]) -> BTreeMap<Option<GovernanceClass>, u64> {
    let mut counts = BTreeMap::new();
    for e in events.iter().filter(|e| e.kind == ProxyKind::Governance) {
        *counts.entry(e.governance_class).or_insert(0) += 1;
    }
    counts
}

/// Output-proxy and governance rates per active day; `None` with zero days.
pub fn proxy_rates(output_events: u64, governance_events: u64, active_day_count: u64) -> (Option<f64>, Option<f64>) {
    if active_day_count == 0 {
        return (None, None);
    }
    let days = active_day_count as f64;
    (Some(output_events as f64 / days), Some(governance_events as f64 / days))
}
