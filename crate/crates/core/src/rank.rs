//! Mid-rank percentiles within cohorts.

use std::cmp::Ordering;
use std::collections::BTreeMap;

/// Percentile of each item within its cohort:
/// `(count strictly below + 0.5 * count equal) / cohort size`.
///
/// Ties share a percentile and every cohort averages exactly 0.5.
pub fn mid_rank_percentiles<K, C, V, F>(items: Vec<(K, C, V)>, mut cmp: F) -> BTreeMap<K, f64>
where
    K: Ord,
    C: Ord,
    F: FnMut(&V, &V) -> Ordering,
{
    let mut cohorts: BTreeMap<C, Vec<(K, V)>> = BTreeMap::new();
    for (k, c, v) in items {
        cohorts.entry(c).or_default().push((k, v));
    }
    let mut out = BTreeMap::new();
    for (_, mut members) in cohorts {
        members.sort_by(|a, b| cmp(&a.1, &b.1));
        let n = members.len();
        let mut pcts = vec![0.0; n];
        let mut start = 0;
        while start < n {
            let mut end = start + 1;
            while end < n && cmp(&members[start].1, &members[end].1) == Ordering::Equal {
                end += 1;
            }
            let pct = (start as f64 + 0.5 * (end - start) as f64) / n as f64;
            pcts[start..end].fill(pct);
            start = end;
        }
        for ((k, _), p) in members.into_iter().zip(pcts) {
            out.insert(k, p);
        }
    }
    out
}
