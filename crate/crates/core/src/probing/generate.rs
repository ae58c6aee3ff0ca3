//! Candidate class-name generation by beam search over LM mask predictions.

use std::collections::BTreeMap;

use rand::seq::index::sample;
use rand::Rng;
use rayon::prelude::*;

use super::class_name::{ClassName, MAX_CLASS_TOKENS};
use super::patterns::{format_entity_list, render_extended_class_probe, HearstPattern};
use crate::error::{Error, Result};
use crate::lm::LmClient;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct GenerationConfig {
    /// Predictions kept per tree node.
    pub beam_width: usize,
    /// Longest class name, in words.
    pub max_len: usize,
    /// Number of (entity triple, pattern) draws.
    pub num_samples: usize,
}

impl Default for GenerationConfig {
    fn default() -> Self {
        Self {
            beam_width: 3,
            max_len: 3,
            num_samples: 30,
        }
    }
}

impl GenerationConfig {
    pub fn validate(&self) -> Result<()> {
        if self.beam_width == 0 || self.num_samples == 0 {
            return Err(Error::InvalidArgument(
                "beam width and sample count must be positive".into(),
            ));
        }
        if self.max_len == 0 || self.max_len > MAX_CLASS_TOKENS {
            return Err(Error::InvalidArgument(format!(
                "max class length must be in 1..={MAX_CLASS_TOKENS}"
            )));
        }
        Ok(())
    }

    /// Upper bound on the pool size: `num_samples * sum_d beam_width^d`.
    pub fn pool_bound(&self) -> usize {
        let per_tree: usize = (1..=self.max_len as u32)
            .map(|d| self.beam_width.saturating_pow(d))
            .fold(0usize, usize::saturating_add);
        self.num_samples.saturating_mul(per_tree)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PoolEntry {
    pub class: ClassName,
    /// Times the name was generated; diagnostic only.
    pub count: usize,
}

/// Deduplicated candidate class names keyed by surface.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct CandidateClassPool {
    entries: BTreeMap<String, PoolEntry>,
}

impl CandidateClassPool {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn insert(&mut self, class: ClassName) {
        self.entries
            .entry(class.surface().to_string())
            .and_modify(|e| e.count += 1)
            .or_insert(PoolEntry { class, count: 1 });
    }

    /// Union with counts summed; associative and commutative.
    pub fn merge(&mut self, other: CandidateClassPool) {
        for (surface, entry) in other.entries {
            self.entries
                .entry(surface)
                .and_modify(|e| e.count += entry.count)
                .or_insert(entry);
        }
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn contains(&self, surface: &str) -> bool {
        self.entries.contains_key(surface)
    }

    pub fn count(&self, surface: &str) -> Option<usize> {
        self.entries.get(surface).map(|e| e.count)
    }

    /// Class names in surface order.
    pub fn classes(&self) -> impl Iterator<Item = &ClassName> + '_ {
        self.entries.values().map(|e| &e.class)
    }

    pub fn entries(&self) -> impl Iterator<Item = &PoolEntry> + '_ {
        self.entries.values()
    }
}

impl FromIterator<ClassName> for CandidateClassPool {
    fn from_iter<I: IntoIterator<Item = ClassName>>(iter: I) -> Self {
        let mut pool = Self::new();
        for c in iter {
            pool.insert(c);
        }
        pool
    }
}

/// One draw: the entity triple (in draw order) and a pattern.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ProbeDraw {
    pub entities: Vec<String>,
    pub pattern: HearstPattern,
}

/// Draws `num_samples` (triple, pattern) pairs; triples are without replacement.
pub fn draw_probes<R: Rng + ?Sized, S: AsRef<str>>(
    entities: &[S],
    num_samples: usize,
    rng: &mut R,
) -> Result<Vec<ProbeDraw>> {
    if entities.len() < 3 {
        return Err(Error::InvalidArgument(format!(
            "class generation needs at least 3 entities, got {}",
            entities.len()
        )));
    }
    Ok((0..num_samples)
        .map(|_| {
            let picked = sample(rng, entities.len(), 3);
            let pattern = HearstPattern::ALL[rng.random_range(0..HearstPattern::ALL.len())];
            ProbeDraw {
                entities: picked
                    .iter()
                    .map(|i| entities[i].as_ref().to_string())
                    .collect(),
                pattern,
            }
        })
        .collect())
}

/// Grows the class-name tree for one draw.
///
/// Level 1 queries the class probe itself; each kept word `w` spawns the
/// query with the hypernym slot rewritten as `[MASK] w ...`, prepending
/// modifiers until `max_len` words. Only noun phrases are kept, and only
/// kept names are extended further.
pub fn beam_class_names(
    draw: &ProbeDraw,
    lm: &dyn LmClient,
    cfg: &GenerationConfig,
) -> Result<CandidateClassPool> {
    let entity_list = format_entity_list(&draw.entities);
    let mut pool = CandidateClassPool::new();
    let mut frontier: Vec<Vec<String>> = vec![Vec::new()];
    for _depth in 1..=cfg.max_len {
        let mut next = Vec::new();
        for suffix in &frontier {
            let query = render_extended_class_probe(draw.pattern, suffix, &entity_list)?;
            let predictions = lm.predict_masked(&query, cfg.beam_width)?;
            for p in predictions.iter().take(cfg.beam_width) {
                let mut words: Vec<String> =
                    p.token.split_whitespace().map(str::to_lowercase).collect();
                if words.is_empty() {
                    continue;
                }
                words.extend(suffix.iter().cloned());
                if words.len() > cfg.max_len {
                    continue;
                }
                if let Ok(class) = ClassName::new(&words) {
                    pool.insert(class);
                    next.push(words);
                }
            }
        }
        if next.is_empty() {
            break;
        }
        frontier = next;
    }
    Ok(pool)
}

/// Candidate pool for the current entity set: the union of beam trees over
/// `num_samples` random (triple, pattern) draws.
pub fn generate_class_names<R: Rng + ?Sized, S: AsRef<str>>(
    entities: &[S],
    lm: &dyn LmClient,
    rng: &mut R,
    cfg: &GenerationConfig,
) -> Result<CandidateClassPool> {
    cfg.validate()?;
    let draws = draw_probes(entities, cfg.num_samples, rng)?;
    let trees: Vec<CandidateClassPool> = draws
        .par_iter()
        .map(|d| beam_class_names(d, lm, cfg))
        .collect::<Result<_>>()?;
    let mut pool = CandidateClassPool::new();
    for tree in trees {
        pool.merge(tree);
    }
    Ok(pool)
}
