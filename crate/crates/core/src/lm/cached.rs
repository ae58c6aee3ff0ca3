use std::collections::HashMap;
use std::sync::RwLock;

use super::{LmClient, MaskPrediction};
use crate::error::Result;
use crate::probing::ProbeQuery;

/// Memoizes responses by `(query text, top_k)` and query text.
///
/// Responses are deterministic, so concurrent fills of the same key are
/// harmless; the last writer wins.
pub struct CachedLm<L> {
    inner: L,
    predictions: RwLock<HashMap<(String, usize), Vec<MaskPrediction>>>,
    embeddings: RwLock<HashMap<String, Vec<f32>>>,
}

impl<L: LmClient> CachedLm<L> {
    pub fn new(inner: L) -> Self {
        Self {
            inner,
            predictions: RwLock::new(HashMap::new()),
            embeddings: RwLock::new(HashMap::new()),
        }
    }

    pub fn inner(&self) -> &L {
        &self.inner
    }

    /// Number of cached (prediction, embedding) responses.
    pub fn cached(&self) -> (usize, usize) {
        (
            self.predictions.read().expect("poisoned").len(),
            self.embeddings.read().expect("poisoned").len(),
        )
    }
}

impl<L: LmClient> LmClient for CachedLm<L> {
    fn dim(&self) -> Result<usize> {
        self.inner.dim()
    }

    fn predict_masked(&self, query: &ProbeQuery, top_k: usize) -> Result<Vec<MaskPrediction>> {
        let key = (query.text().to_string(), top_k);
        if let Some(hit) = self.predictions.read().expect("poisoned").get(&key) {
            return Ok(hit.clone());
        }
        let fresh = self.inner.predict_masked(query, top_k)?;
        self.predictions
            .write()
            .expect("poisoned")
            .insert(key, fresh.clone());
        Ok(fresh)
    }

    fn embed_mask(&self, query: &ProbeQuery) -> Result<Vec<f32>> {
        if let Some(hit) = self.embeddings.read().expect("poisoned").get(query.text()) {
            return Ok(hit.clone());
        }
        let fresh = self.inner.embed_mask(query)?;
        self.embeddings
            .write()
            .expect("poisoned")
            .insert(query.text().to_string(), fresh.clone());
        Ok(fresh)
    }
}

#[cfg(test)]
mod tests {
    use std::sync::atomic::{AtomicUsize, Ordering};

    use super::*;

    struct Counting(AtomicUsize);

    impl LmClient for Counting {
        fn dim(&self) -> Result<usize> {
            Ok(1)
        }
        fn predict_masked(&self, _q: &ProbeQuery, top_k: usize) -> Result<Vec<MaskPrediction>> {
            self.0.fetch_add(1, Ordering::SeqCst);
            Ok(vec![MaskPrediction::new("x", 0.0); top_k.min(1)])
        }
        fn embed_mask(&self, _q: &ProbeQuery) -> Result<Vec<f32>> {
            self.0.fetch_add(1, Ordering::SeqCst);
            Ok(vec![1.0])
        }
    }

    #[test]
    fn repeats_hit_the_cache() {
        let lm = CachedLm::new(Counting(AtomicUsize::new(0)));
        let q = ProbeQuery::new("a [MASK]").unwrap();
        lm.predict_masked(&q, 3).unwrap();
        lm.predict_masked(&q, 3).unwrap();
        lm.predict_masked(&q, 2).unwrap();
        lm.embed_mask(&q).unwrap();
        lm.embed_mask(&q).unwrap();
        assert_eq!(lm.inner().0.load(Ordering::SeqCst), 3);
        assert_eq!(lm.cached(), (2, 1));
    }
}
