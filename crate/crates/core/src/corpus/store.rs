use std::collections::BTreeMap;

use super::vocab::EntityId;
use crate::error::{Error, Result};

/// Contextualized occurrence vectors per entity plus their per-entity means.
///
/// Immutable once built; share it by reference across threads.
#[derive(Debug, Clone, PartialEq)]
pub struct EmbeddingStore {
    dim: usize,
    occurrences: BTreeMap<EntityId, Vec<Vec<f32>>>,
    context_free: BTreeMap<EntityId, Vec<f32>>,
}

impl EmbeddingStore {
    /// Builds a store from occurrence vectors. Entities mapped to an empty
    /// list are dropped.
    pub fn from_occurrences(
        dim: usize,
        occurrences: impl IntoIterator<Item = (EntityId, Vec<Vec<f32>>)>,
    ) -> Result<Self> {
        if dim == 0 {
            return Err(Error::InvalidArgument(
                "embedding dim must be positive".into(),
            ));
        }
        let mut occ: BTreeMap<EntityId, Vec<Vec<f32>>> = BTreeMap::new();
        for (entity, vectors) in occurrences {
            for v in &vectors {
                if v.len() != dim {
                    return Err(Error::DimensionMismatch {
                        expected: dim,
                        found: v.len(),
                    });
                }
            }
            if !vectors.is_empty() {
                occ.entry(entity).or_default().extend(vectors);
            }
        }
        let context_free = occ
            .iter()
            .map(|(&e, vs)| (e, mean_vector(vs, dim)))
            .collect();
        Ok(Self {
            dim,
            occurrences: occ,
            context_free,
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.occurrences.len()
    }

    pub fn is_empty(&self) -> bool {
        self.occurrences.is_empty()
    }

    pub fn contains(&self, entity: EntityId) -> bool {
        self.occurrences.contains_key(&entity)
    }

    /// Entities with at least one occurrence, ascending by id.
    pub fn entities(&self) -> impl Iterator<Item = EntityId> + '_ {
        self.occurrences.keys().copied()
    }

    pub fn occurrences(&self, entity: EntityId) -> Result<&[Vec<f32>]> {
        self.occurrences
            .get(&entity)
            .map(Vec::as_slice)
            .ok_or(Error::EntityAbsent(entity.0))
    }

    pub fn context_free(&self, entity: EntityId) -> Result<&[f32]> {
        self.context_free
            .get(&entity)
            .map(Vec::as_slice)
            .ok_or(Error::EntityAbsent(entity.0))
    }

    pub fn total_occurrences(&self) -> usize {
        self.occurrences.values().map(Vec::len).sum()
    }
}

fn mean_vector(vectors: &[Vec<f32>], dim: usize) -> Vec<f32> {
    let mut acc = vec![0.0f64; dim];
    for v in vectors {
        for (a, &x) in acc.iter_mut().zip(v) {
            *a += f64::from(x);
        }
    }
    let n = vectors.len() as f64;
    acc.into_iter().map(|a| (a / n) as f32).collect()
}
