//! Capped-gap active-time estimation.
//!
//! Timestamps are reduced to a sorted set of unique values. Each gap between
//! neighbours contributes `min(gap, cap)`, and the sum is reported in hours.
//! A gap strictly longer than the cap starts a new cluster; a gap exactly
//! equal to the cap stays inside the current one.
//!
//! All arithmetic is on integer milliseconds; hours are produced by a single
//! division at the end, so results do not depend on summation order.

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

pub const MS_PER_MINUTE: i64 = 60_000;
pub const MS_PER_HOUR: i64 = 3_600_000;

/// Primary cap and the sensitivity list used by default.
pub const PRIMARY_CAP_MINUTES: u32 = 30;
pub const SENSITIVITY_CAP_MINUTES: u32 = 60;
pub const DEFAULT_CAPS: [u32; 5] = [15, 30, 45, 60, 90];
pub const DEFAULT_CLIP_MINUTES: u32 = 180;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ActiveTimeEstimate {
    pub cap_minutes: u32,
    /// Sum of capped gaps in milliseconds, exact.
    pub capped_ms: i64,
    pub hours: f64,
    pub cluster_count: u64,
    /// Number of unique timestamps.
    pub event_count: u64,
}

/// Sorted, de-duplicated copy of `timestamps`.
pub fn unique_sorted(timestamps: &[i64]) -> Vec<i64> {
    let mut ts = timestamps.to_vec();
    ts.sort_unstable();
    ts.dedup();
    ts
}

fn estimate_sorted(unique: &[i64], cap_minutes: u32) -> ActiveTimeEstimate {
    let cap_ms = i64::from(cap_minutes) * MS_PER_MINUTE;
    let mut capped_ms = 0i64;
    let mut breaks = 0u64;
    for pair in unique.windows(2) {
        let gap = pair[1] - pair[0];
        capped_ms += gap.min(cap_ms);
        if gap > cap_ms {
            breaks += 1;
        }
    }
    ActiveTimeEstimate {
        cap_minutes,
        capped_ms,
        hours: capped_ms as f64 / MS_PER_HOUR as f64,
        cluster_count: if unique.is_empty() { 0 } else { breaks + 1 },
        event_count: unique.len() as u64,
    }
}

/// Capped-gap estimate for one cap. Duplicate timestamps collapse first.
pub fn active_time(timestamps: &[i64], cap_minutes: u32) -> Result<ActiveTimeEstimate> {
    if cap_minutes == 0 {
        return Err(Error::InvalidArgument("cap must be a positive number of minutes".into()));
    }
    Ok(estimate_sorted(&unique_sorted(timestamps), cap_minutes))
}

/// One estimate per cap, in the order given.
pub fn cap_sensitivity(timestamps: &[i64], caps: &[u32]) -> Result<Vec<ActiveTimeEstimate>> {
    if caps.is_empty() {
        return Err(Error::InvalidArgument("cap list is empty".into()));
    }
    if caps.contains(&0) {
        return Err(Error::InvalidArgument("cap must be a positive number of minutes".into()));
    }
    let unique = unique_sorted(timestamps);
    Ok(caps.iter().map(|&cap| estimate_sorted(&unique, cap)).collect())
}

/// Distribution of raw inter-event gaps.
///
/// Bins are left-closed: `[edge[i], edge[i+1])`. `counts` has one entry per
/// regular bin plus a final overflow entry for gaps at or above the clip.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GapHistogram {
    /// Bin edges in minutes, ascending, ending at the clip.
    pub bin_edges: Vec<u32>,
    pub counts: Vec<u64>,
    pub clip_minutes: u32,
}

impl GapHistogram {
    pub fn overflow(&self) -> u64 {
        *self.counts.last().unwrap_or(&0)
    }

    pub fn total(&self) -> u64 {
        self.counts.iter().sum()
    }
}

pub fn gap_histogram(timestamps: &[i64], bin_width_minutes: u32, clip_minutes: u32) -> Result<GapHistogram> {
    if bin_width_minutes == 0 {
        return Err(Error::InvalidArgument("bin width must be positive".into()));
    }
    let mut bin_edges: Vec<u32> = (0..clip_minutes).step_by(bin_width_minutes as usize).collect();
    bin_edges.push(clip_minutes);
    let regular = bin_edges.len() - 1;
    let mut counts = vec![0u64; regular + 1];
    let width_ms = i64::from(bin_width_minutes) * MS_PER_MINUTE;
    let clip_ms = i64::from(clip_minutes) * MS_PER_MINUTE;
    for pair in unique_sorted(timestamps).windows(2) {
        let gap = pair[1] - pair[0];
        let bin = if gap >= clip_ms {
            regular
        } else {
            (gap / width_ms) as usize
        };
        counts[bin] += 1;
    }
    Ok(GapHistogram {
        bin_edges,
        counts,
        clip_minutes,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    const MIN: i64 = MS_PER_MINUTE;

    #[test]
    fn single_and_empty() {
        let e = active_time(&[42], 30).unwrap();
        assert_eq!((e.hours, e.cluster_count, e.event_count), (0.0, 1, 1));
        let e = active_time(&[], 30).unwrap();
        assert_eq!((e.hours, e.cluster_count, e.event_count), (0.0, 0, 0));
    }

    #[test]
    fn short_and_long_gaps() {
        let e = active_time(&[0, 10 * MIN], 30).unwrap();
        assert_eq!(e.hours, 10.0 / 60.0);
        assert_eq!(e.cluster_count, 1);
        let e = active_time(&[0, 120 * MIN], 30).unwrap();
        assert_eq!(e.hours, 0.5);
        assert_eq!(e.cluster_count, 2);
    }

    #[test]
    fn gap_equal_to_cap_stays_in_cluster() {
        let e = active_time(&[0, 30 * MIN], 30).unwrap();
        assert_eq!(e.cluster_count, 1);
        assert_eq!(e.hours, 0.5);
    }

    #[test]
    fn duplicates_collapse() {
        let e = active_time(&[5, 5, 5, 5 + 10 * MIN, 5], 30).unwrap();
        assert_eq!(e.event_count, 2);
        assert_eq!(e.capped_ms, 10 * MIN);
    }

    #[test]
    fn fifty_minute_gap_separates_45_and_60() {
        let ts = [0, 5 * MIN, 55 * MIN, 60 * MIN];
        let est = cap_sensitivity(&ts, &DEFAULT_CAPS).unwrap();
        let by_cap = |c: u32| est.iter().find(|e| e.cap_minutes == c).unwrap();
        assert_eq!(by_cap(60).capped_ms - by_cap(45).capped_ms, 5 * MIN);
        assert_eq!(by_cap(45).capped_ms, 55 * MIN);
        assert_eq!(by_cap(60).capped_ms, 60 * MIN);
    }

    #[test]
    fn all_gaps_short_means_caps_agree() {
        let ts: Vec<i64> = (0..20).map(|i| i * 7 * MIN).collect();
        let est = cap_sensitivity(&ts, &DEFAULT_CAPS).unwrap();
        assert!(est.windows(2).all(|w| w[0].hours == w[1].hours));
    }

    #[test]
    fn bad_caps() {
        assert!(cap_sensitivity(&[1, 2], &[]).is_err());
        assert!(cap_sensitivity(&[1, 2], &[30, 0]).is_err());
        assert!(active_time(&[1], 0).is_err());
    }

    #[test]
    fn histogram_bins() {
        let ts = [0, 5 * MIN, 30 * MIN, 230 * MIN];
        let h = gap_histogram(&ts, 30, 180).unwrap();
        assert_eq!(h.bin_edges, vec![0, 30, 60, 90, 120, 150, 180]);
        assert_eq!(h.counts, vec![2, 0, 0, 0, 0, 0, 1]);
        assert_eq!(h.overflow(), 1);
    }

    #[test]
    fn histogram_edges_are_left_closed() {
        let h = gap_histogram(&[0, 30 * MIN, 210 * MIN], 30, 180).unwrap();
        // 30 lands in [30,60), 180 in overflow
        assert_eq!(h.counts[1], 1);
        assert_eq!(h.overflow(), 1);
    }

    #[test]
    fn histogram_with_uneven_clip() {
        let h = gap_histogram(&[0, 95 * MIN], 40, 100).unwrap();
        assert_eq!(h.bin_edges, vec![0, 40, 80, 100]);
        assert_eq!(h.counts, vec![0, 0, 1, 0]);
    }

    #[test]
    fn empty_histogram_and_bad_width() {
        let h = gap_histogram(&[], 10, 180).unwrap();
        assert_eq!(h.total(), 0);
        assert_eq!(h.counts.len(), 19);
        assert!(gap_histogram(&[], 0, 180).is_err());
    }
}
