//! Entity/class similarity and positive/negative class selection.
//!
//! The similarity between an entity `e` and a class name `c` looks at the
//! `k` occurrences of `e` that best match any of `c`'s six entity-probe
//! embeddings and averages those best-match cosines. Per-entity rankings of
//! the candidate pool are fused with reciprocal-rank summation; the winner
//! is the positive class, and every name that every seed ranks below it
//! becomes a negative class.

use std::collections::{BTreeSet, HashMap};

use rand::seq::index::sample;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::corpus::{EmbeddingStore, EntityId};
use crate::error::{Error, Result};
use crate::lm::LmClient;
use crate::probing::{render_entity_probes, ClassName, HearstPattern};
use crate::ranking::RankedList;
use crate::similarity::UnitVectors;

/// Mask embeddings of a class name's six entity probes.
#[derive(Debug, Clone)]
pub struct ClassQueryEmbeddings {
    class: ClassName,
    vectors: Vec<Vec<f32>>,
    unit: UnitVectors,
}

impl ClassQueryEmbeddings {
    pub fn from_vectors(class: ClassName, vectors: Vec<Vec<f32>>) -> Result<Self> {
        if vectors.len() != HearstPattern::ALL.len() {
            return Err(Error::InvalidArgument(format!(
                "class {class} needs {} probe embeddings, got {}",
                HearstPattern::ALL.len(),
                vectors.len()
            )));
        }
        let dim = vectors[0].len();
        if let Some(bad) = vectors.iter().find(|v| v.len() != dim) {
            return Err(Error::DimensionMismatch {
                expected: dim,
                found: bad.len(),
            });
        }
        let unit = UnitVectors::new(vectors.iter().map(Vec::as_slice));
        Ok(Self {
            class,
            vectors,
            unit,
        })
    }

    /// Queries the LM for the mask embedding of each entity probe.
    pub fn compute(class: ClassName, lm: &dyn LmClient) -> Result<Self> {
        let vectors = render_entity_probes(&class)
            .iter()
            .map(|q| lm.embed_mask(q))
            .collect::<Result<Vec<_>>>()?;
        Self::from_vectors(class, vectors)
    }

    pub fn class(&self) -> &ClassName {
        &self.class
    }

    pub fn vectors(&self) -> &[Vec<f32>] {
        &self.vectors
    }

    pub fn dim(&self) -> usize {
        self.vectors[0].len()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SimilarityConfig {
    /// Number of best-matching occurrences averaged.
    pub k: usize,
    /// Entities with more occurrences are subsampled to this many.
    pub max_occurrences: usize,
    pub subsample_seed: u64,
}

impl Default for SimilarityConfig {
    fn default() -> Self {
        Self {
            k: 5,
            max_occurrences: 256,
            subsample_seed: 0,
        }
    }
}

impl SimilarityConfig {
    pub fn with_k(k: usize) -> Self {
        Self {
            k,
            ..Self::default()
        }
    }
}

/// Mean of the `k` largest values; all of them when fewer than `k`.
pub fn top_k_mean(mut values: Vec<f64>, k: usize) -> f64 {
    let take = k.min(values.len());
    if take == 0 {
        return 0.0;
    }
    if take < values.len() {
        values.select_nth_unstable_by(take - 1, |a, b| b.total_cmp(a));
    }
    values[..take].iter().sum::<f64>() / take as f64
}

fn subsample_seed(base: u64, entity: EntityId) -> u64 {
    // splitmix64 finalizer over the entity id
    let mut z = base ^ u64::from(entity.0).wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// An entity's occurrence vectors, unit-scaled and capped at
/// `max_occurrences` by a seeded subsample.
#[derive(Debug, Clone)]
pub struct OccurrenceView {
    unit: UnitVectors,
}

impl OccurrenceView {
    pub fn new(entity: EntityId, store: &EmbeddingStore, cfg: &SimilarityConfig) -> Result<Self> {
        let occ = store.occurrences(entity)?;
        let unit = if cfg.max_occurrences > 0 && occ.len() > cfg.max_occurrences {
            let mut rng = ChaCha8Rng::seed_from_u64(subsample_seed(cfg.subsample_seed, entity));
            let mut picked = sample(&mut rng, occ.len(), cfg.max_occurrences).into_vec();
            picked.sort_unstable();
            UnitVectors::new(picked.into_iter().map(|i| occ[i].as_slice()))
        } else {
            UnitVectors::new(occ.iter().map(Vec::as_slice))
        };
        Ok(Self { unit })
    }

    pub fn len(&self) -> usize {
        self.unit.len()
    }

    pub fn is_empty(&self) -> bool {
        self.unit.is_empty()
    }

    /// Best-match cosine of each occurrence against the class probes.
    pub fn best_matches(&self, class: &ClassQueryEmbeddings) -> Vec<f64> {
        self.unit
            .rows()
            .iter()
            .map(|x| class.unit.max_cosine(x))
            .collect()
    }

    pub fn similarity(&self, class: &ClassQueryEmbeddings, k: usize) -> f64 {
        top_k_mean(self.best_matches(class), k)
    }
}

/// Top-k soft-match similarity between an entity and a class name.
pub fn entity_class_similarity(
    entity: EntityId,
    store: &EmbeddingStore,
    class: &ClassQueryEmbeddings,
    cfg: &SimilarityConfig,
) -> Result<f64> {
    check_k(cfg.k)?;
    Ok(OccurrenceView::new(entity, store, cfg)?.similarity(class, cfg.k))
}

/// Similarities of one entity against many classes, normalizing its
/// occurrences once.
pub fn entity_class_similarities<'a>(
    entity: EntityId,
    store: &EmbeddingStore,
    classes: impl IntoIterator<Item = &'a ClassQueryEmbeddings>,
    cfg: &SimilarityConfig,
) -> Result<Vec<f64>> {
    check_k(cfg.k)?;
    let view = OccurrenceView::new(entity, store, cfg)?;
    Ok(classes
        .into_iter()
        .map(|c| view.similarity(c, cfg.k))
        .collect())
}

fn check_k(k: usize) -> Result<()> {
    if k == 0 {
        return Err(Error::InvalidArgument("k must be at least 1".into()));
    }
    Ok(())
}

/// Descending by score, ties by class surface.
pub fn rank_by_similarity(
    scores: impl IntoIterator<Item = (ClassName, f64)>,
) -> RankedList<ClassName> {
    RankedList::from_scores(scores, |c: &ClassName| c.surface().to_string())
}

/// One entity's ranking of the candidate pool.
pub fn rank_classes_for_entity(
    entity: EntityId,
    store: &EmbeddingStore,
    classes: &[ClassQueryEmbeddings],
    cfg: &SimilarityConfig,
) -> Result<RankedList<ClassName>> {
    if classes.is_empty() {
        return Err(Error::EmptyPool);
    }
    let sims = entity_class_similarities(entity, store, classes, cfg)?;
    Ok(rank_by_similarity(
        classes.iter().map(|c| c.class().clone()).zip(sims),
    ))
}

/// Fuses per-entity class rankings with `s(c) = sum_i 1 / rank_i(c)`.
pub fn aggregate_class_ranks(lists: &[RankedList<ClassName>]) -> Result<RankedList<ClassName>> {
    let Some(first) = lists.first() else {
        return Err(Error::InvalidArgument(
            "no class rankings to aggregate".into(),
        ));
    };
    let universe: BTreeSet<&ClassName> = first.items().collect();
    let mut scores: HashMap<&ClassName, f64> = HashMap::with_capacity(universe.len());
    for list in lists {
        let items: BTreeSet<&ClassName> = list.items().collect();
        if items != universe || list.len() != universe.len() {
            return Err(Error::PoolMismatch);
        }
        for (i, class) in list.items().enumerate() {
            *scores.entry(class).or_default() += 1.0 / (i + 1) as f64;
        }
    }
    Ok(rank_by_similarity(
        scores.into_iter().map(|(c, s)| (c.clone(), s)),
    ))
}

/// The positive class and the names every seed ranks below it.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ClassSelection {
    pub positive: ClassName,
    pub negatives: BTreeSet<ClassName>,
}

pub fn select_classes(
    aggregated: &RankedList<ClassName>,
    seed_lists: &[RankedList<ClassName>],
) -> Result<ClassSelection> {
    let positive = aggregated.first().ok_or(Error::EmptyPool)?.item.clone();
    if seed_lists.is_empty() {
        return Err(Error::InvalidArgument(
            "class selection needs seed rankings".into(),
        ));
    }
    let rank_maps: Vec<HashMap<ClassName, usize>> =
        seed_lists.iter().map(RankedList::rank_map).collect();
    let negatives = aggregated
        .items()
        .filter(|c| **c != positive)
        .filter(|c| {
            rank_maps
                .iter()
                .all(|ranks| match (ranks.get(*c), ranks.get(&positive)) {
                    (Some(rc), Some(rp)) => rc > rp,
                    _ => false,
                })
        })
        .cloned()
        .collect();
    Ok(ClassSelection {
        positive,
        negatives,
    })
}
