//! Planted-cluster benchmarks with a matching fixture LM.
//!
//! Cluster `c` owns the unit direction `e_c`; its entities' occurrences are
//! `e_c` plus isotropic Gaussian noise. The fixture LM names each cluster by
//! a plural label (`alphas`, `betas`, ...) and also offers the generic
//! `things` and a neighbouring label, so the class pool always contains
//! plausible negatives. Every label accepts the modifier `big`, whose class
//! vector leans on a shared spare direction.
//!
//! With decoys enabled, cluster 0 gets look-alike entities: most of their
//! occurrences sit almost exactly on `e_0`, the rest exactly on `e_1`, so
//! their centroid lies between the two clusters. Cluster-0 entities always
//! list cluster 1 as their neighbour, which makes its label a negative
//! class. Without the class gate the decoys outscore the noisier true
//! members.

use std::collections::BTreeMap;

use rand::seq::index::sample;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use super::queries::Query;
use crate::corpus::{EmbeddingStore, EntityId, Vocabulary};
use crate::error::{Error, Result};
use crate::lm::{FixtureTables, MaskPrediction};

const LABEL_STEMS: [&str; 12] = [
    "alpha", "beta", "gamma", "delta", "epsilon", "eta", "theta", "iota", "kappa", "lambda",
    "omicron", "sigma",
];
const GENERIC_LABEL: &str = "things";
const MODIFIER: &str = "big";
const MODIFIER_WEIGHT: f32 = 2.0;
const DECOY_CORE_OCCURRENCES: usize = 15;
const DECOY_OFF_OCCURRENCES: usize = 5;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlantedClusters {
    pub clusters: usize,
    pub per_cluster: usize,
    pub dim: usize,
    pub occurrences: usize,
    /// Per-component standard deviation of occurrence noise.
    pub noise: f32,
    pub queries_per_cluster: usize,
    /// Look-alike entities planted next to cluster 0.
    pub decoys: usize,
    pub decoy_noise: f32,
    pub seed: u64,
}

impl Default for PlantedClusters {
    fn default() -> Self {
        Self {
            clusters: 3,
            per_cluster: 20,
            dim: 8,
            occurrences: 8,
            noise: 0.05,
            queries_per_cluster: 3,
            decoys: 0,
            decoy_noise: 0.02,
            seed: 7,
        }
    }
}

impl PlantedClusters {
    /// Noisy clusters plus six decoys for cluster 0.
    pub fn adversarial() -> Self {
        Self {
            dim: 16,
            noise: 0.15,
            decoys: 6,
            ..Self::default()
        }
    }

    pub fn label(&self, cluster: usize) -> String {
        format!("{}s", LABEL_STEMS[cluster])
    }

    fn spare_direction(&self) -> usize {
        self.clusters
    }

    fn validate(&self) -> Result<()> {
        if self.clusters == 0 || self.clusters > LABEL_STEMS.len() {
            return Err(Error::InvalidArgument(format!(
                "clusters must be in 1..={}",
                LABEL_STEMS.len()
            )));
        }
        if self.decoys > 0 && self.clusters < 2 {
            return Err(Error::InvalidArgument(
                "decoys need at least two clusters".into(),
            ));
        }
        let needed = self.clusters + 1;
        if self.dim < needed {
            return Err(Error::InvalidArgument(format!(
                "dim {} is too small for {} clusters (need {needed})",
                self.dim, self.clusters
            )));
        }
        if self.per_cluster < 4 || self.occurrences == 0 {
            return Err(Error::InvalidArgument(
                "need at least 4 entities per cluster and one occurrence each".into(),
            ));
        }
        if !(self.noise >= 0.0 && self.decoy_noise >= 0.0) {
            return Err(Error::InvalidArgument("noise must be non-negative".into()));
        }
        Ok(())
    }

    pub fn generate(&self) -> Result<SyntheticBenchmark> {
        self.validate()?;
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        let noise = Normal::new(0.0f32, self.noise).expect("valid sigma");
        let decoy_noise = Normal::new(0.0f32, self.decoy_noise).expect("valid sigma");
        let axis = |i: usize| {
            let mut v = vec![0.0f32; self.dim];
            v[i] = 1.0;
            v
        };
        let jitter = |base: &[f32], dist: &Normal<f32>, rng: &mut ChaCha8Rng| -> Vec<f32> {
            base.iter().map(|x| x + dist.sample(rng)).collect()
        };

        let labels: Vec<String> = (0..self.clusters).map(|c| self.label(c)).collect();
        let mut surfaces = Vec::new();
        let mut occurrences = Vec::new();
        let mut entity_labels = BTreeMap::new();
        let mut members: Vec<Vec<String>> = vec![Vec::new(); self.clusters];

        for (c, label) in labels.iter().enumerate() {
            for j in 0..self.per_cluster {
                let surface = format!("{}-{:02}", LABEL_STEMS[c], j + 1);
                let id = EntityId(surfaces.len() as u32);
                let occ = (0..self.occurrences)
                    .map(|_| jitter(&axis(c), &noise, &mut rng))
                    .collect();
                occurrences.push((id, occ));
                let mut evoked = vec![
                    MaskPrediction::new(label.clone(), -0.5),
                    MaskPrediction::new(GENERIC_LABEL, -1.5),
                ];
                let neighbour = if c == 0 && self.decoys > 0 {
                    Some(labels[1].clone())
                } else if self.clusters > 1 {
                    Some(labels[(c + 1 + j % (self.clusters - 1).min(2)) % self.clusters].clone())
                } else {
                    None
                };
                if let Some(n) = neighbour {
                    evoked.push(MaskPrediction::new(n, -2.5));
                }
                entity_labels.insert(surface.clone(), evoked);
                members[c].push(surface.clone());
                surfaces.push(surface);
            }
        }

        for j in 0..self.decoys {
            let surface = format!("decoy-{:02}", j + 1);
            let id = EntityId(surfaces.len() as u32);
            let mut occ: Vec<Vec<f32>> = (0..DECOY_CORE_OCCURRENCES)
                .map(|_| jitter(&axis(0), &decoy_noise, &mut rng))
                .collect();
            occ.extend((0..DECOY_OFF_OCCURRENCES).map(|_| axis(1)));
            occurrences.push((id, occ));
            entity_labels.insert(
                surface.clone(),
                vec![
                    MaskPrediction::new(labels[0].clone(), -0.5),
                    MaskPrediction::new(labels[1].clone(), -1.5),
                    MaskPrediction::new(GENERIC_LABEL, -2.5),
                ],
            );
            surfaces.push(surface);
        }

        let mut bases: Vec<(String, Vec<f32>)> = labels
            .iter()
            .enumerate()
            .map(|(c, l)| (l.clone(), axis(c)))
            .collect();
        let mut generic = vec![0.0f32; self.dim];
        generic[..self.clusters].fill(1.0);
        bases.push((GENERIC_LABEL.to_string(), unit(generic)));

        let spare = axis(self.spare_direction());
        let mut modifiers = BTreeMap::new();
        let mut class_vectors = BTreeMap::new();
        for (name, v) in bases {
            let modified_name = format!("{MODIFIER} {name}");
            let modified: Vec<f32> = v
                .iter()
                .zip(&spare)
                .map(|(a, b)| a + MODIFIER_WEIGHT * b)
                .collect();
            modifiers.insert(
                name.clone(),
                vec![
                    MaskPrediction::new(MODIFIER, -0.5),
                    MaskPrediction::new("and", -1.0),
                    MaskPrediction::new(",", -1.5),
                ],
            );
            modifiers.insert(
                modified_name.clone(),
                vec![
                    MaskPrediction::new("the", -0.5),
                    MaskPrediction::new("and", -1.0),
                    MaskPrediction::new(",", -1.5),
                ],
            );
            class_vectors.insert(modified_name, unit(modified));
            class_vectors.insert(name, v);
        }

        let mut queries = Vec::new();
        for (c, names) in members.iter().enumerate() {
            for _ in 0..self.queries_per_cluster {
                let seeds = sample(&mut rng, names.len(), 3)
                    .iter()
                    .map(|i| names[i].clone())
                    .collect();
                queries.push(Query {
                    class: labels[c].clone(),
                    seeds,
                    gt: names.clone(),
                });
            }
        }

        Ok(SyntheticBenchmark {
            vocab: Vocabulary::from_surfaces(&surfaces)?,
            store: EmbeddingStore::from_occurrences(self.dim, occurrences)?,
            tables: FixtureTables {
                dim: self.dim,
                entity_labels,
                modifiers,
                class_vectors,
                ..Default::default()
            },
            queries,
        })
    }
}

fn unit(v: Vec<f32>) -> Vec<f32> {
    let n = v.iter().map(|x| f64::from(*x).powi(2)).sum::<f64>().sqrt() as f32;
    v.into_iter().map(|x| x / n).collect()
}

#[derive(Debug, Clone)]
pub struct SyntheticBenchmark {
    pub vocab: Vocabulary,
    pub store: EmbeddingStore,
    pub tables: FixtureTables,
    pub queries: Vec<Query>,
}
