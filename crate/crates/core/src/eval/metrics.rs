use std::collections::{BTreeMap, HashSet};
use std::hash::Hash;

use serde::Serialize;

use crate::error::{Error, Result};

/// Cutoffs reported by default.
pub const DEFAULT_CUTOFFS: [usize; 3] = [10, 20, 50];

/// Average precision over the first `k` entries of `ranked`.
///
/// Seeds are dropped from both the ranking and the ground truth before
/// scoring, and the sum of precisions is normalized by
/// `min(|relevant|, k)` so that a perfect top-`k` scores 1.
pub fn average_precision_at_k<T: Eq + Hash>(
    ranked: &[T],
    ground_truth: &HashSet<T>,
    seeds: &HashSet<T>,
    k: usize,
) -> Result<f64> {
    if k == 0 {
        return Err(Error::InvalidArgument("cutoff must be positive".into()));
    }
    let relevant = ground_truth.iter().filter(|e| !seeds.contains(e)).count();
    if relevant == 0 {
        return Err(Error::EmptyGroundTruth);
    }
    let mut hits = 0usize;
    let mut total = 0.0;
    for (i, item) in ranked
        .iter()
        .filter(|e| !seeds.contains(e))
        .take(k)
        .enumerate()
    {
        if ground_truth.contains(item) {
            hits += 1;
            total += hits as f64 / (i + 1) as f64;
        }
    }
    Ok(total / relevant.min(k) as f64)
}

/// Mean of per-query values; `None` for no queries.
pub fn mean(values: impl IntoIterator<Item = f64>) -> Option<f64> {
    let (sum, n) = values
        .into_iter()
        .fold((0.0, 0usize), |(s, n), v| (s + v, n + 1));
    (n > 0).then(|| sum / n as f64)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct QueryResult {
    pub class: String,
    pub average_precision: BTreeMap<usize, f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EvalReport {
    pub queries: Vec<QueryResult>,
    pub map: BTreeMap<usize, f64>,
}

impl EvalReport {
    pub fn from_queries(queries: Vec<QueryResult>, cutoffs: &[usize]) -> Self {
        let map = cutoffs
            .iter()
            .filter_map(|&k| {
                mean(
                    queries
                        .iter()
                        .filter_map(|q| q.average_precision.get(&k).copied()),
                )
                .map(|m| (k, m))
            })
            .collect();
        Self { queries, map }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn set(items: &[u32]) -> HashSet<u32> {
        items.iter().copied().collect()
    }

    #[test]
    fn relevant_at_one_and_three() {
        let ranked = [1, 9, 2, 8, 7];
        let ap = average_precision_at_k(&ranked, &set(&[1, 2]), &set(&[]), 5).unwrap();
        assert!((ap - 5.0 / 6.0).abs() < 1e-12);
    }

    #[test]
    fn seeds_are_excluded() {
        let ranked = [100, 1, 101, 2];
        let ap = average_precision_at_k(&ranked, &set(&[1, 2, 100, 101]), &set(&[100, 101]), 10)
            .unwrap();
        assert_eq!(ap, 1.0);
    }

    #[test]
    fn normalized_by_cutoff_when_truth_is_large() {
        let ranked: Vec<u32> = (0..10).collect();
        let truth: HashSet<u32> = (0..40).collect();
        assert_eq!(
            average_precision_at_k(&ranked, &truth, &set(&[]), 5).unwrap(),
            1.0
        );
        assert_eq!(
            average_precision_at_k(&[50, 51], &truth, &set(&[]), 5).unwrap(),
            0.0
        );
    }

    #[test]
    fn empty_truth_errors() {
        assert!(matches!(
            average_precision_at_k(&[1], &set(&[1]), &set(&[1]), 5),
            Err(Error::EmptyGroundTruth)
        ));
        assert!(average_precision_at_k(&[1], &set(&[1]), &set(&[]), 0).is_err());
    }

    #[test]
    fn report_means_each_cutoff() {
        let q = |c: &str, a: f64, b: f64| QueryResult {
            class: c.into(),
            average_precision: [(10, a), (20, b)].into(),
        };
        let report =
            EvalReport::from_queries(vec![q("x", 1.0, 0.5), q("y", 0.5, 0.5)], &[10, 20, 50]);
        assert_eq!(report.map[&10], 0.75);
        assert_eq!(report.map[&20], 0.5);
        assert!(!report.map.contains_key(&50));
    }
}
