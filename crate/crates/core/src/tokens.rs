//! Token telemetry: totals, cache dominance, per-route and per-day
//! breakdowns, and the cache-read/output association statistics.
//!
//! Only the strict subset counts: model-completed records read from
//! trajectory files and dated inside the token window. Counts are summed as
//! `u64`, so every partition (routes, days) adds back to the grand total
//! exactly.

use std::collections::BTreeMap;

use chrono::NaiveDate;
use serde::{Deserialize, Serialize};

use crate::config::ObservationWindow;
use crate::ingest::{Event, Role, TokenUsage};

/// Route label for completions that don't name one.
pub const UNKNOWN_ROUTE: &str = "unknown";

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct TokenTotals {
    pub input: u64,
    pub output: u64,
    pub cache_read: u64,
    pub cache_write: u64,
    pub completions: u64,
}

impl TokenTotals {
    pub fn total(&self) -> u64 {
        self.input + self.output + self.cache_read + self.cache_write
    }

    /// Cache-read share of all recorded tokens; `None` when nothing was recorded.
    pub fn cdr(&self) -> Option<f64> {
        let total = self.total();
        (total > 0).then(|| self.cache_read as f64 / total as f64)
    }

    pub fn add(&mut self, usage: &TokenUsage) {
        self.input += usage.input;
        self.output += usage.output;
        self.cache_read += usage.cache_read;
        self.cache_write += usage.cache_write;
        self.completions += 1;
    }

    pub fn from_components(input: u64, output: u64, cache_read: u64, cache_write: u64) -> Self {
        TokenTotals {
            input,
            output,
            cache_read,
            cache_write,
            completions: 0,
        }
    }
}

impl std::ops::Add for TokenTotals {
    type Output = TokenTotals;

    fn add(self, rhs: Self) -> Self {
        TokenTotals {
            input: self.input + rhs.input,
            output: self.output + rhs.output,
            cache_read: self.cache_read + rhs.cache_read,
            cache_write: self.cache_write + rhs.cache_write,
            completions: self.completions + rhs.completions,
        }
    }
}

/// Membership test for the strict trajectory subset, ignoring the window.
pub fn is_strict_completion(event: &Event) -> bool {
    event.role == Role::ModelCompleted && event.from_trajectory && event.tokens.is_some()
}

fn in_window(event: &Event, window: &ObservationWindow) -> bool {
    event.date().is_some_and(|d| window.contains(d))
}

/// Strict-subset completions dated inside `window`, in input order.
pub fn strict_subset<'a>(events: &'a [Event], window: &ObservationWindow) -> Vec<&'a Event> {
    events
        .iter()
        .filter(|e| is_strict_completion(e) && in_window(e, window))
        .collect()
}

pub fn aggregate_tokens<'a, I>(events: I) -> TokenTotals
where
    I: IntoIterator<Item = &'a Event>,
{
    let mut totals = TokenTotals::default();
    for e in events {
        if let Some(usage) = &e.tokens {
            totals.add(usage);
        }
    }
    totals
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RouteTotals {
    pub provider_route: String,
    pub totals: TokenTotals,
}

/// Totals grouped by provider route, sorted by route name.
pub fn per_route<'a, I>(events: I) -> Vec<RouteTotals>
where
    I: IntoIterator<Item = &'a Event>,
{
    let mut routes: BTreeMap<String, TokenTotals> = BTreeMap::new();
    for e in events {
        if let Some(usage) = &e.tokens {
            let route = e.provider_route.clone().unwrap_or_else(|| UNKNOWN_ROUTE.to_string());
            routes.entry(route).or_default().add(usage);
        }
    }
    routes
        .into_iter()
        .map(|(provider_route, totals)| RouteTotals {
            provider_route,
            totals,
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct DailyTokens {
    pub date: NaiveDate,
    pub input_tokens: u64,
    pub output_tokens: u64,
    pub cache_read_tokens: u64,
    pub cache_write_tokens: u64,
    pub completions: u64,
}

/// One row per date in `window`, zero-filled. Events outside the window or
/// without a timestamp are ignored.
pub fn daily_composition<'a, I>(events: I, window: &ObservationWindow) -> Vec<DailyTokens>
where
    I: IntoIterator<Item = &'a Event>,
{
    let mut by_day: BTreeMap<NaiveDate, TokenTotals> = window.days().map(|d| (d, TokenTotals::default())).collect();
    for e in events {
        if let (Some(date), Some(usage)) = (e.date(), &e.tokens) {
            if let Some(t) = by_day.get_mut(&date) {
                t.add(usage);
            }
        }
    }
    by_day
        .into_iter()
        .map(|(date, t)| DailyTokens {
            date,
            input_tokens: t.input,
            output_tokens: t.output,
            cache_read_tokens: t.cache_read,
            cache_write_tokens: t.cache_write,
            completions: t.completions,
        })
        .collect()
}

/// Per-completion row for the event-level export.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CompletionRow {
    pub timestamp: String,
    pub provider_route: String,
    pub model: String,
    pub input: u64,
    pub output: u64,
    pub cache_read: u64,
    pub cache_write: u64,
}

pub fn completion_rows<'a, I>(events: I) -> Vec<CompletionRow>
where
    I: IntoIterator<Item = &'a Event>,
{
    let mut rows: Vec<(Option<i64>, CompletionRow)> = events
        .into_iter()
        .filter_map(|e| {
            let usage = e.tokens?;
            let timestamp = e
                .timestamp_ms
                .and_then(chrono::DateTime::<chrono::Utc>::from_timestamp_millis)
                .map(|dt| dt.format("%Y-%m-%dT%H:%M:%S%.3fZ").to_string())
                .unwrap_or_default();
            Some((
                e.timestamp_ms,
                CompletionRow {
                    timestamp,
                    provider_route: e.provider_route.clone().unwrap_or_else(|| UNKNOWN_ROUTE.into()),
                    model: e.model.clone().unwrap_or_default(),
                    input: usage.input,
                    output: usage.output,
                    cache_read: usage.cache_read,
                    cache_write: usage.cache_write,
                },
            ))
        })
        .collect();
    // stable: equal timestamps keep canonical input order
    rows.sort_by_key(|(ts, _)| *ts);
    rows.into_iter().map(|(_, r)| r).collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ZeroHandling {
    /// Drop completions with zero cache-read or zero output, and count them.
    Exclude,
    /// Keep everything and correlate `ln(1 + x)`.
    Log1p,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum UndefinedReason {
    TooFewEvents,
    ZeroVariance,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AssociationStats {
    pub pearson_r_log: Option<f64>,
    pub spearman_rho: Option<f64>,
    pub n_events: u64,
    pub excluded_zero_events: u64,
    pub zero_handling: ZeroHandling,
    pub undefined_reason: Option<UndefinedReason>,
}

/// Minimum completions needed for the association statistics.
pub const MIN_ASSOCIATION_EVENTS: usize = 3;

pub fn cache_output_association<'a, I>(events: I, zero_handling: ZeroHandling) -> AssociationStats
where
    I: IntoIterator<Item = &'a Event>,
{
    let pairs: Vec<(u64, u64)> = events
        .into_iter()
        .filter_map(|e| e.tokens.map(|t| (t.cache_read, t.output)))
        .collect();
    association_from_pairs(&pairs, zero_handling)
}

/// Association between cache-read (x) and output (y) token counts.
pub fn association_from_pairs(pairs: &[(u64, u64)], zero_handling: ZeroHandling) -> AssociationStats {
    let considered = pairs.len() as u64;
    let included: Vec<(u64, u64)> = match zero_handling {
        ZeroHandling::Exclude => pairs.iter().copied().filter(|&(x, y)| x > 0 && y > 0).collect(),
        ZeroHandling::Log1p => pairs.to_vec(),
    };
    let mut stats = AssociationStats {
        pearson_r_log: None,
        spearman_rho: None,
        n_events: included.len() as u64,
        excluded_zero_events: considered - included.len() as u64,
        zero_handling,
        undefined_reason: None,
    };
    if included.len() < MIN_ASSOCIATION_EVENTS {
        stats.undefined_reason = Some(UndefinedReason::TooFewEvents);
        return stats;
    }
    let transform = |v: u64| match zero_handling {
        ZeroHandling::Exclude => (v as f64).ln(),
        ZeroHandling::Log1p => (v as f64).ln_1p(),
    };
    let xs: Vec<f64> = included.iter().map(|p| transform(p.0)).collect();
    let ys: Vec<f64> = included.iter().map(|p| transform(p.1)).collect();
    stats.pearson_r_log = pearson(&xs, &ys);

    let rx = average_ranks(&included.iter().map(|p| p.0 as f64).collect::<Vec<_>>());
    let ry = average_ranks(&included.iter().map(|p| p.1 as f64).collect::<Vec<_>>());
    stats.spearman_rho = pearson(&rx, &ry);

    if stats.pearson_r_log.is_none() || stats.spearman_rho.is_none() {
        stats.undefined_reason = Some(UndefinedReason::ZeroVariance);
    }
    stats
}

/// Pearson correlation, clamped to [-1, 1]; `None` if either side is constant.
pub fn pearson(xs: &[f64], ys: &[f64]) -> Option<f64> {
    assert_eq!(xs.len(), ys.len(), "paired samples");
    let n = xs.len() as f64;
    if xs.is_empty() {
        return None;
    }
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (x, y) in xs.iter().zip(ys) {
        let (dx, dy) = (x - mx, y - my);
        sxy += dx * dy;
        sxx += dx * dx;
        syy += dy * dy;
    }
    if sxx == 0.0 || syy == 0.0 {
        return None;
    }
    Some((sxy / (sxx.sqrt() * syy.sqrt())).clamp(-1.0, 1.0))
}

/// 1-based ranks; tied values share the mean of their positions.
pub fn average_ranks(values: &[f64]) -> Vec<f64> {
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
    let mut ranks = vec![0.0; values.len()];
    let mut i = 0;
    while i < order.len() {
        let mut j = i + 1;
        while j < order.len() && values[order[j]] == values[order[i]] {
            j += 1;
        }
        // positions i..j hold 1-based ranks i+1..=j
        let rank = (i + 1 + j) as f64 / 2.0;
        for &k in &order[i..j] {
            ranks[k] = rank;
        }
        i = j;
    }
    ranks
}
