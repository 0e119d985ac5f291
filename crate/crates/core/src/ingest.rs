//! Workspace discovery and tolerant parsing of line-oriented session logs.
//!
//! A session file is read line by line. Each non-empty line becomes a
//! [`RawRecord`]; lines that decode to a JSON object carrying at least one
//! recognized field become [`Event`]s and everything else is counted as junk.
//! A file with at least one parsed line is *recoverable*.
//!
//! Field names vary between runtimes, so every field is looked up through an
//! [`AliasMap`]. Timestamps are normalized to UTC milliseconds by
//! [`normalize_timestamp`].

use std::collections::BTreeSet;
use std::fs::File;
use std::io::{BufRead, BufReader, Read};
use std::path::{Path, PathBuf};

use chrono::{DateTime, NaiveDate, NaiveDateTime, Utc};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};

use crate::classify::{normalize_path, surface_counts, ClassificationRules, SurfaceCounts};
use crate::config::{AliasMap, Config, Layout, Scope};
use crate::{Error, Result};

/// Longest content prefix kept on an event, in characters.
pub const CONTENT_PREFIX_CHARS: usize = 64;

/// Epoch values at or above this magnitude are milliseconds, below it seconds.
pub const EPOCH_MS_THRESHOLD: f64 = 1e11;

/// 2101-01-01T00:00:00Z; timestamps must fall before it.
const MAX_TIMESTAMP_MS: i64 = 4_133_980_800_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Role {
    User,
    Assistant,
    ToolResult,
    ToolCall,
    ModelCompleted,
    Other,
}

impl Role {
    pub const ALL: [Role; 6] = [
        Role::User,
        Role::Assistant,
        Role::ToolResult,
        Role::ToolCall,
        Role::ModelCompleted,
        Role::Other,
    ];

    /// Maps a runtime's role or event-type label onto the role enum.
    pub fn from_label(label: &str) -> Role {
        let norm: String = label
            .trim()
            .chars()
            .map(|c| match c {
                '-' | '.' | ' ' => '_',
                c => c.to_ascii_lowercase(),
            })
            .collect();
        match norm.as_str() {
            "user" | "human" => Role::User,
            "assistant" | "ai" => Role::Assistant,
            "tool_result" | "toolresult" | "tool" | "function_result" | "function_call_output" => {
                Role::ToolResult
            }
            "tool_call" | "toolcall" | "tool_use" | "function_call" => Role::ToolCall,
            "model_completed" | "modelcompleted" | "completion" => Role::ModelCompleted,
            _ => Role::Other,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Role::User => "user",
            Role::Assistant => "assistant",
            Role::ToolResult => "tool_result",
            Role::ToolCall => "tool_call",
            Role::ModelCompleted => "model_completed",
            Role::Other => "other",
        }
    }
}

/// Token counts reported by one model completion.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct TokenUsage {
    pub input: u64,
    pub output: u64,
    pub cache_read: u64,
    pub cache_write: u64,
}

impl TokenUsage {
    pub fn total(&self) -> u64 {
        self.input + self.output + self.cache_read + self.cache_write
    }
}

impl std::ops::AddAssign for TokenUsage {
    fn add_assign(&mut self, rhs: Self) {
        self.input += rhs.input;
        self.output += rhs.output;
        self.cache_read += rhs.cache_read;
        self.cache_write += rhs.cache_write;
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AgentScope {
    Main,
    OtherAgent,
}

impl AgentScope {
    pub fn in_scope(self, scope: Scope) -> bool {
        scope == Scope::All || self == AgentScope::Main
    }
}

/// One normalized telemetry record.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Event {
    pub event_id: Option<String>,
    pub timestamp_ms: Option<i64>,
    /// Timestamp of the enclosing trajectory, when the record carries one.
    pub trajectory_ts_ms: Option<i64>,
    pub role: Role,
    /// Raw event-type label as written by the runtime.
    pub event_type: Option<String>,
    pub tool_name: Option<String>,
    pub provider_route: Option<String>,
    pub model: Option<String>,
    pub tokens: Option<TokenUsage>,
    pub content_prefix: String,
    pub source_path: String,
    pub line_number: u64,
    pub agent_scope: AgentScope,
    /// The record came from a trajectory file.
    pub from_trajectory: bool,
}

impl Event {
    /// A bare event with only a role, for tests and examples.
    pub fn new(role: Role) -> Self {
        Event {
            event_id: None,
            timestamp_ms: None,
            trajectory_ts_ms: None,
            role,
            event_type: None,
            tool_name: None,
            provider_route: None,
            model: None,
            tokens: if role == Role::ModelCompleted {
                Some(TokenUsage::default())
            } else {
                None
            },
            content_prefix: String::new(),
            source_path: String::new(),
            line_number: 1,
            agent_scope: AgentScope::Main,
            from_trajectory: false,
        }
    }

    /// UTC calendar date of the event, if timed.
    pub fn date(&self) -> Option<NaiveDate> {
        self.timestamp_ms.and_then(date_of_ms)
    }
}

pub fn date_of_ms(ms: i64) -> Option<NaiveDate> {
    DateTime::<Utc>::from_timestamp_millis(ms).map(|dt| dt.date_naive())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum Payload {
    Record(Map<String, Value>),
    Opaque(String),
}

/// One non-empty line of a scanned file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RawRecord {
    pub source_path: String,
    pub line_number: u64,
    pub payload: Payload,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct FileParseStats {
    /// Non-empty lines seen.
    pub total_lines: u64,
    pub parsed_lines: u64,
    pub recoverable: bool,
    /// Reading stopped early on an I/O error.
    pub truncated: bool,
}

/// Normalizes a timestamp given as epoch seconds, epoch milliseconds
/// (numeric or numeric string) or ISO-8601 text. Zoneless text is UTC.
/// Anything unparseable or outside 1970..2100 yields `None`.
pub fn normalize_timestamp(raw: &Value) -> Option<i64> {
    match raw {
        Value::Number(n) => n.as_f64().and_then(epoch_to_ms),
        Value::String(s) => normalize_timestamp_str(s),
        _ => None,
    }
}

pub fn normalize_timestamp_str(raw: &str) -> Option<i64> {
    let s = raw.trim();
    if s.is_empty() {
        return None;
    }
    if let Ok(v) = s.parse::<f64>() {
        return epoch_to_ms(v);
    }
    let ms = if let Ok(dt) = DateTime::parse_from_rfc3339(s) {
        dt.timestamp_millis()
    } else if let Some(naive) = parse_naive(s) {
        naive.and_utc().timestamp_millis()
    } else if let Ok(date) = NaiveDate::parse_from_str(s, "%Y-%m-%d") {
        date.and_hms_opt(0, 0, 0)?.and_utc().timestamp_millis()
    } else {
        return None;
    };
    in_range(ms)
}

fn parse_naive(s: &str) -> Option<NaiveDateTime> {
    const FORMATS: [&str; 4] = [
        "%Y-%m-%dT%H:%M:%S%.f",
        "%Y-%m-%d %H:%M:%S%.f",
        "%Y-%m-%dT%H:%M",
        "%Y-%m-%d %H:%M",
    ];
    FORMATS
        .iter()
        .find_map(|f| NaiveDateTime::parse_from_str(s, f).ok())
}

fn epoch_to_ms(v: f64) -> Option<i64> {
    if !v.is_finite() || v < 0.0 {
        return None;
    }
    let ms = if v >= EPOCH_MS_THRESHOLD { v } else { v * 1000.0 };
    if ms >= MAX_TIMESTAMP_MS as f64 {
        return None;
    }
    in_range(ms.round() as i64)
}

fn in_range(ms: i64) -> Option<i64> {
    (0..MAX_TIMESTAMP_MS).contains(&ms).then_some(ms)
}

/// Collapses whitespace runs to single spaces and keeps the first 64 chars.
pub fn content_prefix(text: &str) -> String {
    let mut out = String::new();
    let mut chars = 0;
    for word in text.split_whitespace() {
        for c in (!out.is_empty()).then_some(' ').into_iter().chain(word.chars()) {
            if chars == CONTENT_PREFIX_CHARS {
                return out;
            }
            out.push(c);
            chars += 1;
        }
    }
    out
}

fn lookup<'a>(record: &'a Map<String, Value>, aliases: &[String]) -> Option<&'a Value> {
    aliases.iter().find_map(|alias| {
        let mut parts = alias.split('.');
        let mut value = record.get(parts.next()?)?;
        for part in parts {
            value = value.as_object()?.get(part)?;
        }
        (!value.is_null()).then_some(value)
    })
}

fn scalar_string(value: &Value) -> Option<String> {
    match value {
        Value::String(s) if !s.trim().is_empty() => Some(s.trim().to_string()),
        Value::Number(n) => Some(n.to_string()),
        Value::Bool(b) => Some(b.to_string()),
        _ => None,
    }
}

fn text_of(value: &Value) -> String {
    match value {
        Value::String(s) => s.clone(),
        Value::Array(items) => items
            .iter()
            .map(text_of)
            .filter(|s| !s.is_empty())
            .collect::<Vec<_>>()
            .join(" "),
        Value::Object(obj) => obj
            .get("text")
            .or_else(|| obj.get("content"))
            .map(text_of)
            .unwrap_or_default(),
        _ => String::new(),
    }
}

fn count_of(value: &Value) -> Option<u64> {
    match value {
        Value::Number(n) => n.as_u64(),
        Value::String(s) => s.trim().parse().ok(),
        _ => None,
    }
}

fn parse_usage(value: &Value, aliases: &AliasMap) -> Option<TokenUsage> {
    let obj = value.as_object()?;
    let field = |names: &[String]| lookup(obj, names).and_then(count_of);
    let counts = [
        field(&aliases.input_tokens),
        field(&aliases.output_tokens),
        field(&aliases.cache_read_tokens),
        field(&aliases.cache_write_tokens),
    ];
    if counts.iter().all(Option::is_none) {
        return None;
    }
    Some(TokenUsage {
        input: counts[0].unwrap_or(0),
        output: counts[1].unwrap_or(0),
        cache_read: counts[2].unwrap_or(0),
        cache_write: counts[3].unwrap_or(0),
    })
}

/// Where a session file sits in the workspace.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SourceMeta {
    pub source_path: String,
    pub agent_scope: AgentScope,
    pub from_trajectory: bool,
}

impl SourceMeta {
    pub fn main(source_path: impl Into<String>) -> Self {
        SourceMeta {
            source_path: source_path.into(),
            agent_scope: AgentScope::Main,
            from_trajectory: false,
        }
    }
}

/// Turns one record into an event, or `None` if no recognized field is present.
pub fn event_from_record(
    record: &Map<String, Value>,
    aliases: &AliasMap,
    meta: &SourceMeta,
    line_number: u64,
) -> Option<Event> {
    let id = lookup(record, &aliases.id).and_then(scalar_string);
    let ts = lookup(record, &aliases.timestamp);
    let traj_ts = lookup(record, &aliases.trajectory_ts);
    let role_label = lookup(record, &aliases.role).and_then(scalar_string);
    let event_type = lookup(record, &aliases.event_type).and_then(scalar_string);
    let tool_name = lookup(record, &aliases.tool_name).and_then(scalar_string);
    let route = lookup(record, &aliases.provider_route).and_then(scalar_string);
    let model = lookup(record, &aliases.model).and_then(scalar_string);
    let content = lookup(record, &aliases.content);
    let usage = lookup(record, &aliases.usage).and_then(|v| parse_usage(v, aliases));

    let recognized = id.is_some()
        || ts.is_some()
        || traj_ts.is_some()
        || role_label.is_some()
        || event_type.is_some()
        || tool_name.is_some()
        || route.is_some()
        || model.is_some()
        || content.is_some()
        || usage.is_some();
    if !recognized {
        return None;
    }

    let role = role_label
        .as_deref()
        .or(event_type.as_deref())
        .map(Role::from_label)
        .unwrap_or(Role::Other);
    let tokens = match (role, usage) {
        (Role::ModelCompleted, None) => Some(TokenUsage::default()),
        (_, usage) => usage,
    };

    Some(Event {
        event_id: id,
        timestamp_ms: ts.and_then(normalize_timestamp),
        trajectory_ts_ms: traj_ts.and_then(normalize_timestamp),
        role,
        event_type,
        tool_name,
        provider_route: route,
        model,
        tokens,
        content_prefix: content.map(|c| content_prefix(&text_of(c))).unwrap_or_default(),
        source_path: meta.source_path.clone(),
        line_number,
        agent_scope: meta.agent_scope,
        from_trajectory: meta.from_trajectory,
    })
}

/// Reads every non-empty line as a [`RawRecord`]. The flag is set when an
/// I/O error cut the read short.
pub fn read_raw_records<R: Read>(reader: R, source_path: &str) -> (Vec<RawRecord>, bool) {
    let mut records = Vec::new();
    let truncated = for_each_line(reader, |line_number, line| {
        let payload = match serde_json::from_str::<Value>(line) {
            Ok(Value::Object(map)) => Payload::Record(map),
            _ => Payload::Opaque(line.to_string()),
        };
        records.push(RawRecord {
            source_path: source_path.to_string(),
            line_number,
            payload,
        });
    });
    (records, truncated)
}

fn for_each_line<R: Read>(reader: R, mut f: impl FnMut(u64, &str)) -> bool {
    let mut reader = BufReader::new(reader);
    let mut buf = Vec::new();
    let mut line_number = 0u64;
    loop {
        buf.clear();
        match reader.read_until(b'\n', &mut buf) {
            Ok(0) => return false,
            Ok(_) => {
                line_number += 1;
                let text = String::from_utf8_lossy(&buf);
                let line = text.trim();
                if !line.is_empty() {
                    f(line_number, line);
                }
            }
            Err(e) if e.kind() == std::io::ErrorKind::Interrupted => continue,
            Err(_) => return true,
        }
    }
}

/// Parses a session stream. Events keep file order; line numbers are
/// physical, 1-based.
pub fn parse_session_reader<R: Read>(
    reader: R,
    aliases: &AliasMap,
    meta: &SourceMeta,
) -> (Vec<Event>, FileParseStats) {
    let mut events = Vec::new();
    let mut stats = FileParseStats::default();
    stats.truncated = for_each_line(reader, |line_number, line| {
        stats.total_lines += 1;
        if !line.starts_with('{') {
            return;
        }
        if let Ok(Value::Object(record)) = serde_json::from_str::<Value>(line) {
            if let Some(event) = event_from_record(&record, aliases, meta, line_number) {
                events.push(event);
                stats.parsed_lines += 1;
            }
        }
    });
    stats.recoverable = stats.parsed_lines >= 1;
    (events, stats)
}

/// Parses one session file with the default alias map.
pub fn parse_session_file(path: &Path) -> Result<(Vec<Event>, FileParseStats)> {
    parse_session_file_with(path, &Config::default().aliases, &SourceMeta::main(path.display().to_string()))
}

pub fn parse_session_file_with(
    path: &Path,
    aliases: &AliasMap,
    meta: &SourceMeta,
) -> Result<(Vec<Event>, FileParseStats)> {
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    Ok(parse_session_reader(file, aliases, meta))
}

/// Role a discovered file plays in the workspace.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DiscoveredFile {
    /// Path relative to the root, forward slashes.
    pub rel_path: String,
    pub memory: bool,
    pub skill: bool,
    /// Owning agent for session files.
    pub session_agent: Option<String>,
    pub trajectory: bool,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Discovery {
    /// Every regular file, sorted by relative path.
    pub files: Vec<DiscoveredFile>,
    /// Configured agent directories, sorted.
    pub agent_dirs: Vec<String>,
    pub warnings: Vec<String>,
}

/// Walks the tree under `root` without following symlinks.
pub fn discover(root: &Path, layout: &Layout) -> Result<Discovery> {
    let meta = std::fs::metadata(root).map_err(|_| Error::BadRoot(root.to_path_buf()))?;
    if !meta.is_dir() {
        return Err(Error::BadRoot(root.to_path_buf()));
    }
    std::fs::read_dir(root).map_err(|_| Error::BadRoot(root.to_path_buf()))?;

    let mut rel_paths = Vec::new();
    let mut warnings = Vec::new();
    walk(root, String::new(), &mut rel_paths, &mut warnings);
    rel_paths.sort();

    let agent_dirs = list_agent_dirs(root, layout, &mut warnings);
    let files = rel_paths.into_iter().map(|p| describe(p, layout)).collect();
    warnings.sort();
    Ok(Discovery {
        files,
        agent_dirs,
        warnings,
    })
}

fn walk(dir: &Path, prefix: String, out: &mut Vec<String>, warnings: &mut Vec<String>) {
    let entries = match std::fs::read_dir(dir) {
        Ok(entries) => entries,
        Err(e) => {
            warnings.push(format!("{}: unreadable directory ({e})", display_rel(&prefix)));
            return;
        }
    };
    for entry in entries.flatten() {
        let name = entry.file_name().to_string_lossy().into_owned();
        let rel = if prefix.is_empty() {
            name
        } else {
            format!("{prefix}/{name}")
        };
        match entry.file_type() {
            Ok(t) if t.is_dir() => walk(&entry.path(), rel, out, warnings),
            Ok(t) if t.is_file() => out.push(rel),
            _ => {}
        }
    }
}

fn display_rel(rel: &str) -> &str {
    if rel.is_empty() {
        "."
    } else {
        rel
    }
}

fn list_agent_dirs(root: &Path, layout: &Layout, warnings: &mut Vec<String>) -> Vec<String> {
    let agents = root.join(&layout.agents_dir);
    let Ok(entries) = std::fs::read_dir(&agents) else {
        if agents.exists() {
            warnings.push(format!("{}: unreadable agents directory", layout.agents_dir));
        }
        return Vec::new();
    };
    let mut dirs: Vec<String> = entries
        .flatten()
        .filter(|e| e.file_type().map(|t| t.is_dir()).unwrap_or(false))
        .map(|e| e.file_name().to_string_lossy().into_owned())
        .collect();
    dirs.sort();
    dirs
}

fn has_extension(name: &str, extensions: &[String]) -> bool {
    name.rsplit_once('.')
        .is_some_and(|(_, ext)| extensions.iter().any(|e| e.eq_ignore_ascii_case(ext)))
}

fn describe(rel_path: String, layout: &Layout) -> DiscoveredFile {
    let parts: Vec<&str> = rel_path.split('/').collect();
    let name = *parts.last().unwrap_or(&"");
    let memory = (parts.len() > 1 && layout.memory_dirs.iter().any(|d| d == parts[0]))
        || layout.memory_file_names.iter().any(|n| n == name);
    let skill = layout.skill_file_names.iter().any(|n| n == name);
    let session_agent = (parts.len() >= 4
        && parts[0] == layout.agents_dir
        && parts[2] == layout.sessions_dir
        && has_extension(name, &layout.session_extensions))
    .then(|| parts[1].to_string());
    let trajectory = session_agent.is_some() && name.contains(&layout.trajectory_marker);
    DiscoveredFile {
        rel_path,
        memory,
        skill,
        session_agent,
        trajectory,
    }
}

/// Parsed contents of one session file.
#[derive(Debug, Clone, PartialEq)]
pub struct ParsedSession {
    pub rel_path: String,
    pub agent_scope: AgentScope,
    pub trajectory: bool,
    pub events: Vec<Event>,
    pub stats: FileParseStats,
    pub unreadable: bool,
}

/// Counts describing what a workspace contains.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct WorkspaceInventory {
    pub total_files: u64,
    pub memory_files: u64,
    /// Memory files whose name is an ISO date.
    pub daily_memory_files: u64,
    pub agent_dirs: u64,
    pub skill_files: u64,
    pub main_session_files: u64,
    pub main_recoverable_files: u64,
    pub all_session_files: u64,
    pub all_recoverable_files: u64,
    pub trajectory_files: u64,
    pub surfaces: SurfaceCounts,
    pub warnings: Vec<String>,
}

/// Everything read from a workspace, before any analysis.
#[derive(Debug, Clone)]
pub struct Workspace {
    pub root: PathBuf,
    pub inventory: WorkspaceInventory,
    pub discovery: Discovery,
    /// Session files sorted by path.
    pub sessions: Vec<ParsedSession>,
}

impl Workspace {
    /// All parsed events, in canonical (path, line) order.
    pub fn events(&self) -> impl Iterator<Item = &Event> {
        self.sessions.iter().flat_map(|s| s.events.iter())
    }

    /// Absolute paths of memory files eligible for section parsing.
    pub fn memory_paths(&self, layout: &Layout) -> Vec<PathBuf> {
        self.discovery
            .files
            .iter()
            .filter(|f| f.memory && has_extension(&f.rel_path, &layout.memory_extensions))
            .map(|f| self.root.join(&f.rel_path))
            .collect()
    }
}

/// Discovers, parses and counts a workspace. Session files are parsed in
/// parallel; results are merged in path order.
pub fn load_workspace(root: &Path, config: &Config, rules: &ClassificationRules) -> Result<Workspace> {
    let discovery = discover(root, &config.layout)?;
    let main = &config.layout.main_agent;

    let sessions: Vec<ParsedSession> = discovery
        .files
        .par_iter()
        .filter_map(|f| f.session_agent.as_ref().map(|agent| (f, agent)))
        .map(|(f, agent)| {
            let meta = SourceMeta {
                source_path: f.rel_path.clone(),
                agent_scope: if agent == main {
                    AgentScope::Main
                } else {
                    AgentScope::OtherAgent
                },
                from_trajectory: f.trajectory,
            };
            match File::open(root.join(&f.rel_path)) {
                Ok(file) => {
                    let (events, stats) = parse_session_reader(file, &config.aliases, &meta);
                    ParsedSession {
                        rel_path: f.rel_path.clone(),
                        agent_scope: meta.agent_scope,
                        trajectory: f.trajectory,
                        events,
                        stats,
                        unreadable: false,
                    }
                }
                Err(_) => ParsedSession {
                    rel_path: f.rel_path.clone(),
                    agent_scope: meta.agent_scope,
                    trajectory: f.trajectory,
                    events: Vec::new(),
                    stats: FileParseStats::default(),
                    unreadable: true,
                },
            }
        })
        .collect();

    let mut warnings = discovery.warnings.clone();
    let mut inventory = WorkspaceInventory {
        total_files: discovery.files.len() as u64,
        agent_dirs: discovery.agent_dirs.len() as u64,
        ..Default::default()
    };
    for f in &discovery.files {
        if f.memory {
            inventory.memory_files += 1;
            let stem = f.rel_path.rsplit('/').next().unwrap_or("");
            let stem = stem.rsplit_once('.').map_or(stem, |(s, _)| s);
            if NaiveDate::parse_from_str(stem, "%Y-%m-%d").is_ok() {
                inventory.daily_memory_files += 1;
            }
        }
        if f.skill {
            inventory.skill_files += 1;
        }
    }
    for s in &sessions {
        if s.unreadable {
            warnings.push(format!("{}: unreadable session file", s.rel_path));
        }
        if s.stats.truncated {
            warnings.push(format!("{}: read error, file truncated", s.rel_path));
        }
        inventory.all_session_files += 1;
        inventory.all_recoverable_files += u64::from(s.stats.recoverable);
        inventory.trajectory_files += u64::from(s.trajectory);
        if s.agent_scope == AgentScope::Main {
            inventory.main_session_files += 1;
            inventory.main_recoverable_files += u64::from(s.stats.recoverable);
        }
    }
    inventory.surfaces = surface_counts(discovery.files.iter().map(|f| f.rel_path.as_str()), rules);
    inventory.warnings = warnings;

    Ok(Workspace {
        root: root.to_path_buf(),
        inventory,
        discovery,
        sessions,
    })
}

/// Inventory of a workspace under `root`.
pub fn scan_workspace(root: &Path, config: &Config, rules: &ClassificationRules) -> Result<WorkspaceInventory> {
    load_workspace(root, config, rules).map(|w| w.inventory)
}

/// Relative paths of every discovered file, for surface classification.
pub fn relative_paths(discovery: &Discovery) -> BTreeSet<String> {
    discovery.files.iter().map(|f| normalize_path(&f.rel_path)).collect()
}
