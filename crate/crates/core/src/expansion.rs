//! The iterative expansion loop.
//!
//! Each iteration regenerates candidate class names from the current set,
//! picks a positive class and negative classes, scores every entity in the
//! store, and rebuilds the set from scratch as the seeds plus the best
//! gate-passing entities. Membership is not sticky: an entity admitted
//! earlier drops out as soon as it fails the gate.

use std::collections::{BTreeMap, BTreeSet, HashMap};

use rand::seq::index::sample;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::class_ranking::{
    aggregate_class_ranks, rank_classes_for_entity, select_classes, ClassQueryEmbeddings,
    OccurrenceView, SimilarityConfig,
};
use crate::corpus::{EmbeddingStore, EntityId, Vocabulary};
use crate::error::{Error, Result};
use crate::lm::LmClient;
use crate::probing::{generate_class_names, ClassName, GenerationConfig};
use crate::ranking::RankedList;
use crate::selection::{aggregate_entity_ranks, class_gate, rank_candidates_once, AggregationMode};

/// Size of each sampled subset used for global scores.
pub const ENTITY_SUBSET_SIZE: usize = 3;

/// Iterations without growth before the loop gives up.
pub const MAX_STAGNATION: usize = 3;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExpansionConfig {
    pub target_size: usize,
    /// Occurrences averaged in the entity/class similarity.
    pub k: usize,
    pub beam_width: usize,
    pub max_class_len: usize,
    /// (triple, pattern) draws per iteration for class-name generation.
    pub class_samples: usize,
    /// Sampled subsets (and hence candidate rankings) per iteration.
    pub entity_samples: usize,
    /// Maximum growth of the set per iteration.
    pub batch_size: usize,
    pub agg_mode: AggregationMode,
    pub rng_seed: u64,
    pub max_occurrences: usize,
    /// Disable to rank without negative class names (ablation).
    pub negative_gate: bool,
}

impl Default for ExpansionConfig {
    fn default() -> Self {
        Self {
            target_size: 50,
            k: 5,
            beam_width: 3,
            max_class_len: 3,
            class_samples: 30,
            entity_samples: 18,
            batch_size: 10,
            agg_mode: AggregationMode::Mrr,
            rng_seed: 0,
            max_occurrences: 256,
            negative_gate: true,
        }
    }
}

impl ExpansionConfig {
    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("target size", self.target_size),
            ("k", self.k),
            ("entity samples", self.entity_samples),
            ("batch size", self.batch_size),
            ("max occurrences", self.max_occurrences),
        ];
        if let Some((name, _)) = positive.iter().find(|(_, v)| *v == 0) {
            return Err(Error::InvalidArgument(format!("{name} must be positive")));
        }
        self.generation().validate()
    }

    pub fn generation(&self) -> GenerationConfig {
        GenerationConfig {
            beam_width: self.beam_width,
            max_len: self.max_class_len,
            num_samples: self.class_samples,
        }
    }

    pub fn similarity(&self) -> SimilarityConfig {
        SimilarityConfig {
            k: self.k,
            max_occurrences: self.max_occurrences,
            subsample_seed: self.rng_seed,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ExpansionState {
    pub seeds: Vec<EntityId>,
    pub current: BTreeSet<EntityId>,
    pub positive: Option<ClassName>,
    pub negatives: BTreeSet<ClassName>,
    pub iteration: usize,
    /// Consecutive iterations in which the set did not grow.
    pub stagnation: usize,
}

/// Audit record of one iteration; serialized as one JSON line of the trace.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct IterationRecord {
    pub iteration: usize,
    pub positive: String,
    pub negatives: Vec<String>,
    pub added: Vec<String>,
    pub removed: Vec<String>,
    pub set_size: usize,
}

impl IterationRecord {
    pub fn to_json_line(&self) -> String {
        serde_json::to_string(self).expect("record serializes")
    }

    pub fn from_json_line(line: &str) -> Result<Self> {
        Ok(serde_json::from_str(line)?)
    }
}

/// Builds the trace record for the transition `previous -> state.current`.
pub fn snapshot(
    state: &ExpansionState,
    previous: &BTreeSet<EntityId>,
    admitted_order: &[EntityId],
    vocab: &Vocabulary,
) -> IterationRecord {
    let added = admitted_order
        .iter()
        .filter(|e| !previous.contains(e))
        .map(|&e| vocab.surface(e).to_string())
        .collect();
    let mut removed: Vec<String> = previous
        .difference(&state.current)
        .map(|&e| vocab.surface(e).to_string())
        .collect();
    removed.sort();
    IterationRecord {
        iteration: state.iteration,
        positive: state
            .positive
            .as_ref()
            .map(|c| c.surface().to_string())
            .unwrap_or_default(),
        negatives: state
            .negatives
            .iter()
            .map(|c| c.surface().to_string())
            .collect(),
        added,
        removed,
        set_size: state.current.len(),
    }
}

#[derive(Debug, Clone)]
pub struct ExpansionOutcome {
    /// Every scored entity by final-iteration score; gate failures sink
    /// below gate passes at equal score.
    pub ranking: RankedList<EntityId>,
    /// Entities that failed the final iteration's class gate.
    pub gated_out: BTreeSet<EntityId>,
    pub trace: Vec<IterationRecord>,
    pub state: ExpansionState,
}

impl ExpansionOutcome {
    pub fn ranked_entities(&self) -> impl Iterator<Item = EntityId> + '_ {
        self.ranking.items().copied()
    }
}

/// One iteration's entity scores, before the set is rebuilt.
struct IterationScores {
    scores: BTreeMap<EntityId, f64>,
    gates: BTreeMap<EntityId, bool>,
}

struct Expander<'a> {
    cfg: &'a ExpansionConfig,
    vocab: &'a Vocabulary,
    store: &'a EmbeddingStore,
    lm: &'a dyn LmClient,
    rng: ChaCha8Rng,
    class_cache: HashMap<ClassName, ClassQueryEmbeddings>,
}

impl<'a> Expander<'a> {
    fn class_embeddings(&mut self, classes: Vec<ClassName>) -> Result<Vec<ClassQueryEmbeddings>> {
        let missing: Vec<ClassName> = classes
            .iter()
            .filter(|c| !self.class_cache.contains_key(*c))
            .cloned()
            .collect();
        let lm = self.lm;
        let fresh = missing
            .into_par_iter()
            .map(|c| ClassQueryEmbeddings::compute(c, lm))
            .collect::<Result<Vec<_>>>()?;
        for emb in fresh {
            if emb.dim() != self.store.dim() {
                return Err(Error::DimensionMismatch {
                    expected: self.store.dim(),
                    found: emb.dim(),
                });
            }
            self.class_cache.insert(emb.class().clone(), emb);
        }
        Ok(classes
            .iter()
            .map(|c| self.class_cache[c].clone())
            .collect())
    }

    fn iterate(&mut self, state: &mut ExpansionState) -> Result<IterationScores> {
        let sim_cfg = self.cfg.similarity();
        let members: Vec<EntityId> = state.current.iter().copied().collect();
        let surfaces: Vec<&str> = members.iter().map(|&e| self.vocab.surface(e)).collect();

        // Class names for the current set.
        let pool = generate_class_names(&surfaces, self.lm, &mut self.rng, &self.cfg.generation())?;
        if pool.is_empty() {
            return Err(Error::EmptyPool);
        }
        let classes = self.class_embeddings(pool.classes().cloned().collect())?;

        let store = self.store;
        let lists: BTreeMap<EntityId, RankedList<ClassName>> = members
            .par_iter()
            .map(|&e| Ok((e, rank_classes_for_entity(e, store, &classes, &sim_cfg)?)))
            .collect::<Result<_>>()?;
        let all_lists: Vec<RankedList<ClassName>> = lists.values().cloned().collect();
        let aggregated = aggregate_class_ranks(&all_lists)?;
        let seed_lists: Vec<RankedList<ClassName>> =
            state.seeds.iter().map(|s| lists[s].clone()).collect();
        let selection = select_classes(&aggregated, &seed_lists)?;

        let positive = classes
            .iter()
            .find(|c| *c.class() == selection.positive)
            .expect("positive comes from the pool");
        let negatives: Vec<&ClassQueryEmbeddings> = classes
            .iter()
            .filter(|c| selection.negatives.contains(c.class()))
            .collect();

        // Local scores and gates for every entity in the store.
        let seeds: BTreeSet<EntityId> = state.seeds.iter().copied().collect();
        let candidates: Vec<EntityId> = store.entities().collect();
        let use_gate = self.cfg.negative_gate;
        let per_entity: Vec<(EntityId, f64, bool)> = candidates
            .par_iter()
            .map(|&e| {
                let view = OccurrenceView::new(e, store, &sim_cfg)?;
                let local = view.similarity(positive, sim_cfg.k);
                let gate = !use_gate
                    || seeds.contains(&e)
                    || class_gate(
                        positive.class(),
                        local,
                        negatives
                            .iter()
                            .map(|n| (n.class().clone(), view.similarity(n, sim_cfg.k))),
                    );
                Ok((e, local, gate))
            })
            .collect::<Result<_>>()?;
        let local_scores: BTreeMap<EntityId, f64> =
            per_entity.iter().map(|&(e, l, _)| (e, l)).collect();
        let gates: BTreeMap<EntityId, bool> = per_entity.iter().map(|&(e, _, g)| (e, g)).collect();

        // T sampled subsets, one candidate ranking each.
        let subset = ENTITY_SUBSET_SIZE.min(members.len());
        let samples: Vec<Vec<EntityId>> = (0..self.cfg.entity_samples)
            .map(|_| {
                sample(&mut self.rng, members.len(), subset)
                    .iter()
                    .map(|i| members[i])
                    .collect()
            })
            .collect();
        let vocab = self.vocab;
        let rankings = samples
            .par_iter()
            .map(|s| rank_candidates_once(s, &local_scores, store, vocab))
            .collect::<Result<Vec<_>>>()?;
        let scores = aggregate_entity_ranks(
            &rankings,
            &state.current,
            |e| gates.get(&e).copied().unwrap_or(false),
            self.cfg.agg_mode,
        )?;

        state.positive = Some(selection.positive);
        state.negatives = selection.negatives;
        Ok(IterationScores { scores, gates })
    }

    fn final_ranking(&self, scores: &IterationScores) -> RankedList<EntityId> {
        RankedList::from_scores(
            scores.scores.iter().map(|(&e, &s)| (e, s)),
            |e: &EntityId| {
                let gate = scores.gates.get(e).copied().unwrap_or(false);
                (u8::from(!gate), self.vocab.surface(*e).to_string())
            },
        )
    }
}

/// Expands `seeds` until the set reaches `cfg.target_size` or stops growing
/// for [`MAX_STAGNATION`] consecutive iterations.
pub fn expand(
    seeds: &[EntityId],
    cfg: &ExpansionConfig,
    vocab: &Vocabulary,
    store: &EmbeddingStore,
    lm: &dyn LmClient,
) -> Result<ExpansionOutcome> {
    cfg.validate()?;
    let unique: BTreeSet<EntityId> = seeds.iter().copied().collect();
    if unique.len() != seeds.len() || seeds.len() < ENTITY_SUBSET_SIZE {
        return Err(Error::InvalidArgument(format!(
            "need at least {ENTITY_SUBSET_SIZE} distinct seeds, got {}",
            unique.len()
        )));
    }
    for &s in seeds {
        if vocab.get(s).is_none() {
            return Err(Error::UnknownEntity(s.to_string()));
        }
        if !store.contains(s) {
            return Err(Error::EntityAbsent(s.0));
        }
    }
    if cfg.target_size < seeds.len() {
        return Err(Error::InvalidArgument(format!(
            "target size {} is smaller than the seed set",
            cfg.target_size
        )));
    }

    let mut expander = Expander {
        cfg,
        vocab,
        store,
        lm,
        rng: ChaCha8Rng::seed_from_u64(cfg.rng_seed),
        class_cache: HashMap::new(),
    };
    let mut state = ExpansionState {
        seeds: seeds.to_vec(),
        current: unique.clone(),
        positive: None,
        negatives: BTreeSet::new(),
        iteration: 0,
        stagnation: 0,
    };
    let mut trace = Vec::new();
    let mut last: Option<IterationScores> = None;

    while state.current.len() < cfg.target_size && state.stagnation < MAX_STAGNATION {
        state.iteration += 1;
        let scores = expander.iterate(&mut state)?;

        let limit = cfg.target_size.min(state.current.len() + cfg.batch_size);
        let mut next = unique.clone();
        let mut admitted = Vec::new();
        for entry in expander.final_ranking(&scores).entries() {
            if next.len() >= limit {
                break;
            }
            let gate = scores.gates.get(&entry.item).copied().unwrap_or(false);
            if gate && entry.score > 0.0 && next.insert(entry.item) {
                admitted.push(entry.item);
            }
        }

        let previous = std::mem::replace(&mut state.current, next);
        state.stagnation = if state.current.len() > previous.len() {
            0
        } else {
            state.stagnation + 1
        };
        let record = snapshot(&state, &previous, &admitted, vocab);
        log::info!(
            "iteration {}: positive {:?}, {} negatives, +{} -{} -> {} entities",
            record.iteration,
            record.positive,
            record.negatives.len(),
            record.added.len(),
            record.removed.len(),
            record.set_size
        );
        trace.push(record);
        last = Some(scores);
    }

    let (ranking, gated_out) = match &last {
        Some(scores) => (
            expander.final_ranking(scores),
            scores
                .gates
                .iter()
                .filter(|(_, &g)| !g)
                .map(|(&e, _)| e)
                .collect(),
        ),
        None => (
            RankedList::from_sorted(
                seeds
                    .iter()
                    .map(|&e| crate::ranking::Scored {
                        item: e,
                        score: 0.0,
                    })
                    .collect(),
            ),
            BTreeSet::new(),
        ),
    };
    Ok(ExpansionOutcome {
        ranking,
        gated_out,
        trace,
        state,
    })
}

/// Resolves seed surfaces against the vocabulary, naming the first unknown one.
pub fn resolve_seeds<S: AsRef<str>>(seeds: &[S], vocab: &Vocabulary) -> Result<Vec<EntityId>> {
    seeds
        .iter()
        .map(|s| {
            vocab
                .lookup(s.as_ref())
                .ok_or_else(|| Error::UnknownEntity(s.as_ref().to_string()))
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn record_round_trips() {
        let r = IterationRecord {
            iteration: 1,
            positive: "countries".into(),
            negatives: vec!["islands".into(), "states".into()],
            added: vec!["Japan".into()],
            removed: vec![],
            set_size: 4,
        };
        let line = r.to_json_line();
        assert!(!line.contains('\n'));
        assert_eq!(IterationRecord::from_json_line(&line).unwrap(), r);
    }

    #[test]
    fn config_defaults_and_validation() {
        let cfg = ExpansionConfig::default();
        assert_eq!(
            (
                cfg.k,
                cfg.beam_width,
                cfg.max_class_len,
                cfg.class_samples,
                cfg.entity_samples
            ),
            (5, 3, 3, 30, 18)
        );
        assert_eq!((cfg.target_size, cfg.batch_size), (50, 10));
        assert!(cfg.validate().is_ok());
        let bad = ExpansionConfig {
            k: 0,
            ..cfg.clone()
        };
        assert!(bad.validate().is_err());
        let bad = ExpansionConfig {
            max_class_len: 4,
            ..cfg
        };
        assert!(bad.validate().is_err());
    }
}
