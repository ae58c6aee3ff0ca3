//! The language-model contract.
//!
//! Every piece of LM knowledge (mask predictions, mask-position embeddings)
//! enters the engine through [`LmClient`]. Two backends implement it: a
//! deterministic [`FixtureLm`] for tests and offline runs, and a
//! [`RemoteLm`] speaking the JSON-over-HTTP protocol of the inference
//! service. [`CachedLm`] memoizes either one for the duration of a run.

mod cached;
mod fixture;
mod remote;

use std::collections::HashSet;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::probing::ProbeQuery;

pub use cached::CachedLm;
pub use fixture::{FixtureLm, FixtureTables};
pub use remote::{RemoteConfig, RemoteLm};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MaskPrediction {
    pub token: String,
    pub logprob: f64,
}

impl MaskPrediction {
    pub fn new(token: impl Into<String>, logprob: f64) -> Self {
        Self {
            token: token.into(),
            logprob,
        }
    }
}

pub trait LmClient: Send + Sync {
    /// Width of the vectors returned by [`LmClient::embed_mask`].
    fn dim(&self) -> Result<usize>;

    /// At most `top_k` predictions for the mask slot, best first.
    fn predict_masked(&self, query: &ProbeQuery, top_k: usize) -> Result<Vec<MaskPrediction>>;

    /// Contextual representation at the mask position.
    fn embed_mask(&self, query: &ProbeQuery) -> Result<Vec<f32>>;
}

impl<T: LmClient + ?Sized> LmClient for &T {
    fn dim(&self) -> Result<usize> {
        (**self).dim()
    }
    fn predict_masked(&self, query: &ProbeQuery, top_k: usize) -> Result<Vec<MaskPrediction>> {
        (**self).predict_masked(query, top_k)
    }
    fn embed_mask(&self, query: &ProbeQuery) -> Result<Vec<f32>> {
        (**self).embed_mask(query)
    }
}

impl<T: LmClient + ?Sized> LmClient for Box<T> {
    fn dim(&self) -> Result<usize> {
        (**self).dim()
    }
    fn predict_masked(&self, query: &ProbeQuery, top_k: usize) -> Result<Vec<MaskPrediction>> {
        (**self).predict_masked(query, top_k)
    }
    fn embed_mask(&self, query: &ProbeQuery) -> Result<Vec<f32>> {
        (**self).embed_mask(query)
    }
}

impl<T: LmClient + ?Sized> LmClient for Arc<T> {
    fn dim(&self) -> Result<usize> {
        (**self).dim()
    }
    fn predict_masked(&self, query: &ProbeQuery, top_k: usize) -> Result<Vec<MaskPrediction>> {
        (**self).predict_masked(query, top_k)
    }
    fn embed_mask(&self, query: &ProbeQuery) -> Result<Vec<f32>> {
        (**self).embed_mask(query)
    }
}

pub(crate) fn check_top_k(top_k: usize) -> Result<()> {
    if top_k == 0 {
        return Err(Error::InvalidArgument("top_k must be at least 1".into()));
    }
    Ok(())
}

/// Enforces the response invariants: unique tokens, non-increasing
/// logprobs (ties by token), at most `top_k` entries.
pub(crate) fn canonicalize(
    mut predictions: Vec<MaskPrediction>,
    top_k: usize,
) -> Vec<MaskPrediction> {
    predictions.sort_by(|a, b| {
        b.logprob
            .total_cmp(&a.logprob)
            .then_with(|| a.token.cmp(&b.token))
    });
    let mut seen = HashSet::new();
    predictions.retain(|p| seen.insert(p.token.clone()));
    predictions.truncate(top_k);
    predictions
}
