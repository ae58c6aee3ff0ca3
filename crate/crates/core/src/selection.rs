//! Per-iteration entity scoring and rank ensembling.
//!
//! Each candidate gets a local score (its similarity to the positive class)
//! and, for each sampled subset of the current set, a global score (mean
//! cosine of context-free vectors). Their geometric mean ranks all
//! candidates once per subset; the rankings are then fused, with a bonus
//! for current members and a hard gate that zeroes any entity closer to a
//! negative class than to the positive one.

use std::collections::{BTreeMap, BTreeSet, HashSet};
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::corpus::{EmbeddingStore, EntityId, Vocabulary};
use crate::error::{Error, Result};
use crate::probing::ClassName;
use crate::ranking::RankedList;
use crate::similarity::cosine;

/// Floor applied to both factors before the geometric mean, so negative
/// cosines cannot make the square root undefined.
pub const SCORE_FLOOR: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScoredCandidate {
    pub entity: EntityId,
    pub local: f64,
    pub global: f64,
    pub combined: f64,
}

impl ScoredCandidate {
    pub fn new(entity: EntityId, local: f64, global: f64) -> Self {
        Self {
            entity,
            local,
            global,
            combined: combine_scores(local, global),
        }
    }
}

pub fn combine_scores(local: f64, global: f64) -> f64 {
    (local.max(SCORE_FLOOR) * global.max(SCORE_FLOOR)).sqrt()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum AggregationMode {
    /// Reciprocal rank per list.
    #[default]
    Mrr,
    /// Min-max scaled score per list.
    CombSum,
}

impl fmt::Display for AggregationMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            AggregationMode::Mrr => "mrr",
            AggregationMode::CombSum => "combsum",
        })
    }
}

impl FromStr for AggregationMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "mrr" => Ok(AggregationMode::Mrr),
            "combsum" => Ok(AggregationMode::CombSum),
            other => Err(Error::InvalidArgument(format!(
                "unknown aggregation mode {other:?} (expected mrr or combsum)"
            ))),
        }
    }
}

/// Mean cosine between `entity`'s context-free vector and each sampled member's.
pub fn global_score(entity: EntityId, sample: &[EntityId], store: &EmbeddingStore) -> Result<f64> {
    if sample.is_empty() {
        return Err(Error::InvalidArgument(
            "global score needs a non-empty sample".into(),
        ));
    }
    let v = store.context_free(entity)?;
    let mut total = 0.0;
    for &other in sample {
        total += cosine(v, store.context_free(other)?);
    }
    Ok(total / sample.len() as f64)
}

/// Ranks every candidate by the geometric mean of its local score and its
/// global score against `sample`. Ties go to the lexicographically smaller
/// surface.
pub fn rank_candidates_once(
    sample: &[EntityId],
    local_scores: &BTreeMap<EntityId, f64>,
    store: &EmbeddingStore,
    vocab: &Vocabulary,
) -> Result<RankedList<ScoredCandidate>> {
    let scored = local_scores
        .iter()
        .map(|(&entity, &local)| {
            let global = global_score(entity, sample, store)?;
            let c = ScoredCandidate::new(entity, local, global);
            Ok((c, c.combined))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(RankedList::from_scores(scored, |c: &ScoredCandidate| {
        vocab.get(c.entity).unwrap_or("").to_string()
    }))
}

/// True iff the positive class ranks strictly first among `{positive} ∪
/// negatives` by similarity (ties broken by surface, as everywhere).
/// Vacuously true with no negatives.
pub fn class_gate(
    positive: &ClassName,
    positive_similarity: f64,
    negatives: impl IntoIterator<Item = (ClassName, f64)>,
) -> bool {
    negatives.into_iter().all(|(neg, sim)| {
        positive_similarity > sim
            || (positive_similarity == sim && positive.surface() < neg.surface())
    })
}

/// Per-list contribution `s^t` for every entity of one ranking.
fn list_contributions(
    list: &RankedList<ScoredCandidate>,
    mode: AggregationMode,
) -> Vec<(EntityId, f64)> {
    match mode {
        AggregationMode::Mrr => list
            .items()
            .enumerate()
            .map(|(i, c)| (c.entity, 1.0 / (i + 1) as f64))
            .collect(),
        AggregationMode::CombSum => {
            let (lo, hi) = list
                .items()
                .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), c| {
                    (lo.min(c.combined), hi.max(c.combined))
                });
            let range = hi - lo;
            list.items()
                .map(|c| {
                    let s = if range > 0.0 {
                        (c.combined - lo) / range
                    } else {
                        0.0
                    };
                    (c.entity, s)
                })
                .collect()
        }
    }
}

/// Fused score `S(e) = gate(e) * sum_t (1[e in E] + s^t(e))`.
///
/// Every list must rank the same universe of entities.
pub fn aggregate_entity_ranks(
    lists: &[RankedList<ScoredCandidate>],
    current: &BTreeSet<EntityId>,
    gate: impl Fn(EntityId) -> bool,
    mode: AggregationMode,
) -> Result<BTreeMap<EntityId, f64>> {
    let Some(first) = lists.first() else {
        return Err(Error::InvalidArgument(
            "need at least one candidate ranking".into(),
        ));
    };
    let universe: HashSet<EntityId> = first.items().map(|c| c.entity).collect();
    let mut totals: BTreeMap<EntityId, f64> = universe.iter().map(|&e| (e, 0.0)).collect();
    for list in lists {
        if list.len() != universe.len() {
            let seen: HashSet<EntityId> = list.items().map(|c| c.entity).collect();
            let missing = universe
                .iter()
                .find(|e| !seen.contains(e))
                .or_else(|| seen.iter().find(|e| !universe.contains(e)))
                .copied()
                .unwrap_or(EntityId(u32::MAX));
            return Err(Error::MissingFromRanking(missing.0));
        }
        for (entity, s) in list_contributions(list, mode) {
            let total = totals
                .get_mut(&entity)
                .ok_or(Error::MissingFromRanking(entity.0))?;
            *total += f64::from(u8::from(current.contains(&entity))) + s;
        }
    }
    for (entity, total) in totals.iter_mut() {
        if !gate(*entity) {
            *total = 0.0;
        }
    }
    Ok(totals)
}
