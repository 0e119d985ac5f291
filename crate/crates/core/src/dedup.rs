//! Stable event identity and de-duplication.
//!
//! Each event gets the first available key from a three-step cascade:
//!
//! 1. its explicit event or message identifier;
//! 2. otherwise a SHA-256 over timestamp, role, event type, content prefix
//!    and tool name;
//! 3. for model-completed records with neither an identifier nor a
//!    timestamp, a SHA-256 over trajectory timestamp, provider route, model
//!    and the four token counts.
//!
//! Hash input is the named fields in fixed order, UTF-8 encoded and
//! separated by a NUL byte. Absent fields are written as the single byte
//! `0xFF`, which never occurs in UTF-8, so "absent" and "empty" differ.

use std::collections::HashSet;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::ingest::{Event, Role};

const ABSENT: &[u8] = &[0xFF];
const SEPARATOR: u8 = 0x00;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum KeyTier {
    ExplicitId,
    ContentHash,
    TrajectoryHash,
}

impl KeyTier {
    pub fn as_str(self) -> &'static str {
        match self {
            KeyTier::ExplicitId => "explicit_id",
            KeyTier::ContentHash => "content_hash",
            KeyTier::TrajectoryHash => "trajectory_hash",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct DedupKey {
    pub tier: KeyTier,
    /// The identifier verbatim, or a lowercase hex digest.
    pub value: String,
}

struct Canonical {
    bytes: Vec<u8>,
}

impl Canonical {
    fn new(tag: &str) -> Self {
        Canonical {
            bytes: tag.as_bytes().to_vec(),
        }
    }

    fn field(mut self, value: Option<&str>) -> Self {
        self.bytes.push(SEPARATOR);
        match value {
            Some(v) => self.bytes.extend_from_slice(v.as_bytes()),
            None => self.bytes.extend_from_slice(ABSENT),
        }
        self
    }

    fn digest(self) -> String {
        hex::encode(Sha256::digest(&self.bytes))
    }
}

pub fn dedup_key(event: &Event) -> DedupKey {
    if let Some(id) = event.event_id.as_deref().filter(|id| !id.is_empty()) {
        return DedupKey {
            tier: KeyTier::ExplicitId,
            value: id.to_string(),
        };
    }
    if event.timestamp_ms.is_some() || event.role != Role::ModelCompleted {
        let value = Canonical::new("content.v1")
            .field(event.timestamp_ms.map(|t| t.to_string()).as_deref())
            .field(Some(event.role.as_str()))
            .field(event.event_type.as_deref())
            .field(Some(&event.content_prefix))
            .field(event.tool_name.as_deref())
            .digest();
        return DedupKey {
            tier: KeyTier::ContentHash,
            value,
        };
    }
    let tokens = event.tokens.unwrap_or_default();
    let value = Canonical::new("trajectory.v1")
        .field(event.trajectory_ts_ms.map(|t| t.to_string()).as_deref())
        .field(event.provider_route.as_deref())
        .field(event.model.as_deref())
        .field(Some(&tokens.input.to_string()))
        .field(Some(&tokens.output.to_string()))
        .field(Some(&tokens.cache_read.to_string()))
        .field(Some(&tokens.cache_write.to_string()))
        .digest();
    DedupKey {
        tier: KeyTier::TrajectoryHash,
        value,
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct TierCounts {
    pub explicit_id: u64,
    pub content_hash: u64,
    pub trajectory_hash: u64,
}

impl TierCounts {
    fn bump(&mut self, tier: KeyTier) {
        match tier {
            KeyTier::ExplicitId => self.explicit_id += 1,
            KeyTier::ContentHash => self.content_hash += 1,
            KeyTier::TrajectoryHash => self.trajectory_hash += 1,
        }
    }

    pub fn total(&self) -> u64 {
        self.explicit_id + self.content_hash + self.trajectory_hash
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct DedupStats {
    pub input: u64,
    pub retained: u64,
    /// Duplicates removed, by the tier of their key.
    pub removed: TierCounts,
}

/// One input event's fate, for the audit ledger.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LedgerEntry {
    pub tier: KeyTier,
    pub key: String,
    pub source_path: String,
    pub line_number: u64,
    pub retained: bool,
}

/// Keeps one event per key. Events are first put in canonical
/// (source path, line) order, so the retained copy is the canonically first
/// one whatever order the input arrived in.
pub fn deduplicate(events: Vec<Event>) -> (Vec<Event>, DedupStats) {
    let (kept, stats, _) = deduplicate_inner(events, false);
    (kept, stats)
}

/// Same as [`deduplicate`], also returning the per-event ledger.
pub fn deduplicate_with_ledger(events: Vec<Event>) -> (Vec<Event>, DedupStats, Vec<LedgerEntry>) {
    deduplicate_inner(events, true)
}

fn deduplicate_inner(mut events: Vec<Event>, ledger: bool) -> (Vec<Event>, DedupStats, Vec<LedgerEntry>) {
    events.sort_by(canonical_order);
    let mut stats = DedupStats {
        input: events.len() as u64,
        ..Default::default()
    };
    let mut seen: HashSet<DedupKey> = HashSet::with_capacity(events.len());
    let mut kept = Vec::with_capacity(events.len());
    let mut entries = Vec::new();
    for event in events {
        let key = dedup_key(&event);
        let fresh = !seen.contains(&key);
        if ledger {
            entries.push(LedgerEntry {
                tier: key.tier,
                key: key.value.clone(),
                source_path: event.source_path.clone(),
                line_number: event.line_number,
                retained: fresh,
            });
        }
        if fresh {
            seen.insert(key);
            kept.push(event);
        } else {
            stats.removed.bump(key.tier);
        }
    }
    stats.retained = kept.len() as u64;
    (kept, stats, entries)
}

/// Ordering by source path, then line; remaining fields break ties so the
/// order is total even for synthetic events sharing a location.
fn canonical_order(a: &Event, b: &Event) -> std::cmp::Ordering {
    (&a.source_path, a.line_number)
        .cmp(&(&b.source_path, b.line_number))
        .then_with(|| {
            let ka = dedup_key(a);
            let kb = dedup_key(b);
            ka.cmp(&kb)
        })
}

/// Splits events by timestamp presence. Untimed events still count toward
/// record totals but not toward time analysis.
pub fn exclude_untimed_for_time_analysis(events: &[Event]) -> (Vec<&Event>, Vec<&Event>) {
    events.iter().partition(|e| e.timestamp_ms.is_some())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ingest::TokenUsage;

    fn msg(ts: i64, text: &str, path: &str, line: u64) -> Event {
        let mut e = Event::new(Role::User);
        e.timestamp_ms = Some(ts);
        e.content_prefix = text.into();
        e.source_path = path.into();
        e.line_number = line;
        e
    }

    fn completion(traj: i64, input: u64) -> Event {
        let mut e = Event::new(Role::ModelCompleted);
        e.trajectory_ts_ms = Some(traj);
        e.provider_route = Some("openai".into());
        e.model = Some("m".into());
        e.tokens = Some(TokenUsage {
            input,
            output: 2,
            cache_read: 3,
            cache_write: 4,
        });
        e
    }

    #[test]
    fn explicit_id_is_verbatim() {
        let mut e = msg(1, "x", "a", 1);
        e.event_id = Some("abc".into());
        assert_eq!(
            dedup_key(&e),
            DedupKey {
                tier: KeyTier::ExplicitId,
                value: "abc".into()
            }
        );
    }

    #[test]
    fn source_location_is_not_part_of_the_key() {
        let a = msg(5, "same", "a.jsonl", 1);
        let b = msg(5, "same", "b.jsonl", 9);
        assert_eq!(dedup_key(&a), dedup_key(&b));
        assert_eq!(dedup_key(&a).tier, KeyTier::ContentHash);
    }

    #[test]
    fn digest_is_pinned() {
        // sha256 of "content.v1\0" "1000\0" "user\0" 0xFF "\0" "hi\0" 0xFF
        let e = msg(1000, "hi", "a", 1);
        let mut bytes = b"content.v1\x001000\x00user\x00".to_vec();
        bytes.push(0xFF);
        bytes.extend_from_slice(b"\x00hi\x00");
        bytes.push(0xFF);
        assert_eq!(dedup_key(&e).value, hex::encode(Sha256::digest(&bytes)));
        // frozen from an independent SHA-256 (Python hashlib)
        assert_eq!(
            dedup_key(&e).value,
            "54628086be6d71d5a4d42e4490667e544e3bd928471cc701fccf4d7ed8e2effa"
        );
    }

    #[test]
    fn absent_and_empty_differ() {
        let mut a = msg(1, "x", "a", 1);
        let mut b = a.clone();
        a.tool_name = None;
        b.tool_name = Some(String::new());
        assert_ne!(dedup_key(&a), dedup_key(&b));
    }

    #[test]
    fn trajectory_tier_only_without_timestamp_and_id() {
        let e = completion(10, 1);
        assert_eq!(dedup_key(&e).tier, KeyTier::TrajectoryHash);
        let mut timed = e.clone();
        timed.timestamp_ms = Some(10);
        assert_eq!(dedup_key(&timed).tier, KeyTier::ContentHash);
        let mut untimed_user = Event::new(Role::User);
        untimed_user.content_prefix = "x".into();
        assert_eq!(dedup_key(&untimed_user).tier, KeyTier::ContentHash);
    }

    #[test]
    fn token_counts_distinguish_completions() {
        assert_ne!(dedup_key(&completion(10, 100)), dedup_key(&completion(10, 101)));
        assert_eq!(dedup_key(&completion(10, 100)), dedup_key(&completion(10, 100)));
    }

    #[test]
    fn keeps_canonically_first_copy() {
        let late = msg(5, "dup", "z.jsonl", 1);
        let early = msg(5, "dup", "a.jsonl", 3);
        let (kept, stats) = deduplicate(vec![late, early]);
        assert_eq!(kept.len(), 1);
        assert_eq!(kept[0].source_path, "a.jsonl");
        assert_eq!(stats.removed.content_hash, 1);
        assert_eq!(stats.input, 2);
    }

    #[test]
    fn doubled_list_dedups_to_original() {
        let events: Vec<Event> = (0..5).map(|i| msg(i, "m", "f", i as u64 + 1)).collect();
        let mut doubled = events.clone();
        doubled.extend(events.clone());
        let (kept, stats) = deduplicate(doubled);
        assert_eq!(kept, events);
        assert_eq!(stats.retained, 5);
        assert_eq!(stats.removed.total(), 5);
    }

    #[test]
    fn partition_by_timestamp() {
        let mut events: Vec<Event> = (0..7).map(|i| msg(i, "t", "f", i as u64 + 1)).collect();
        for i in 0..3 {
            let mut e = Event::new(Role::Assistant);
            e.content_prefix = format!("u{i}");
            events.push(e);
        }
        let (timed, untimed) = exclude_untimed_for_time_analysis(&events);
        assert_eq!((timed.len(), untimed.len()), (7, 3));
    }

    #[test]
    fn ledger_marks_duplicates() {
        let a = msg(1, "d", "a", 1);
        let b = msg(1, "d", "b", 1);
        let (_, _, ledger) = deduplicate_with_ledger(vec![b, a]);
        assert_eq!(ledger.len(), 2);
        assert!(ledger[0].retained && ledger[0].source_path == "a");
        assert!(!ledger[1].retained);
    }
}
