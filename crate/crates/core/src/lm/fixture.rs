//! Deterministic table-driven LM backend.
//!
//! Lookups go to the exact-text tables first. Probes that miss there are
//! parsed back into (pattern, hypernym, hyponym) and answered from the
//! structural tables:
//!
//! * class probes (`[MASK] such as A, B, and C`) average the probability
//!   mass of each listed entity's `entity_labels`;
//! * extended class probes (`[MASK] countries such as ...`) read
//!   `modifiers["countries"]`;
//! * entity probes (`countries such as [MASK]`) read
//!   `class_vectors["countries"]`.
//!
//! Anything else is a [`Error::FixtureMiss`]; there is no fallback.

use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Deserializer, Serialize};

use super::{canonicalize, check_top_k, LmClient, MaskPrediction};
use crate::corpus::normalize_surface;
use crate::error::{Error, Result};
use crate::probing::{parse_entity_list, parse_probe, ProbeQuery, MASK};

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct FixtureTables {
    pub dim: usize,
    /// Exact probe text to predictions.
    #[serde(default, deserialize_with = "prediction_map")]
    pub predictions: BTreeMap<String, Vec<MaskPrediction>>,
    /// Exact probe text to mask embedding.
    #[serde(default)]
    pub embeddings: BTreeMap<String, Vec<f32>>,
    /// Entity surface to the class words it evokes.
    #[serde(default, deserialize_with = "prediction_map")]
    pub entity_labels: BTreeMap<String, Vec<MaskPrediction>>,
    /// Class phrase to the modifier words that may precede it.
    #[serde(default, deserialize_with = "prediction_map")]
    pub modifiers: BTreeMap<String, Vec<MaskPrediction>>,
    /// Class surface to the mask embedding of its entity probes.
    #[serde(default)]
    pub class_vectors: BTreeMap<String, Vec<f32>>,
}

/// Predictions may be written as bare tokens (best first) or as full
/// `{"token", "logprob"}` objects.
#[derive(Deserialize)]
#[serde(untagged)]
enum PredictionSpec {
    Token(String),
    Full(MaskPrediction),
}

fn prediction_map<'de, D>(
    de: D,
) -> std::result::Result<BTreeMap<String, Vec<MaskPrediction>>, D::Error>
where
    D: Deserializer<'de>,
{
    let raw: BTreeMap<String, Vec<PredictionSpec>> = BTreeMap::deserialize(de)?;
    Ok(raw
        .into_iter()
        .map(|(k, specs)| (k, ranked_predictions(specs)))
        .collect())
}

fn ranked_predictions(specs: Vec<PredictionSpec>) -> Vec<MaskPrediction> {
    specs
        .into_iter()
        .enumerate()
        .map(|(i, s)| match s {
            PredictionSpec::Token(token) => MaskPrediction::new(token, -(i as f64)),
            PredictionSpec::Full(p) => p,
        })
        .collect()
}

/// Tokens listed best-first, with logprobs `0, -1, -2, ...`.
pub fn token_predictions<S: AsRef<str>>(tokens: &[S]) -> Vec<MaskPrediction> {
    ranked_predictions(
        tokens
            .iter()
            .map(|t| PredictionSpec::Token(t.as_ref().to_string()))
            .collect(),
    )
}

#[derive(Debug, Clone, PartialEq)]
pub struct FixtureLm {
    tables: FixtureTables,
}

impl FixtureLm {
    pub fn new(mut tables: FixtureTables) -> Result<Self> {
        if tables.dim == 0 {
            return Err(Error::InvalidArgument(
                "fixture dim must be positive".into(),
            ));
        }
        for v in tables
            .embeddings
            .values()
            .chain(tables.class_vectors.values())
        {
            if v.len() != tables.dim {
                return Err(Error::DimensionMismatch {
                    expected: tables.dim,
                    found: v.len(),
                });
            }
        }
        tables.entity_labels = normalize_keys(std::mem::take(&mut tables.entity_labels));
        tables.modifiers = normalize_keys(std::mem::take(&mut tables.modifiers));
        tables.class_vectors = normalize_keys(std::mem::take(&mut tables.class_vectors));
        Ok(Self { tables })
    }

    pub fn from_json_file(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::new(serde_json::from_str(&text)?)
    }

    pub fn tables(&self) -> &FixtureTables {
        &self.tables
    }

    /// Exact-text prediction entry, tokens best first.
    pub fn with_predictions<S: AsRef<str>>(mut self, text: &str, tokens: &[S]) -> Self {
        self.tables
            .predictions
            .insert(text.to_string(), token_predictions(tokens));
        self
    }

    /// Exact-text embedding entry. Panics on a dimension mismatch.
    pub fn with_embedding(mut self, text: &str, vector: Vec<f32>) -> Self {
        assert_eq!(vector.len(), self.tables.dim, "fixture vector width");
        self.tables.embeddings.insert(text.to_string(), vector);
        self
    }

    fn miss(kind: &'static str, query: &ProbeQuery) -> Error {
        Error::FixtureMiss {
            kind,
            query: query.text().to_string(),
        }
    }

    fn vote_labels(&self, hyponym: &str, query: &ProbeQuery) -> Result<Vec<MaskPrediction>> {
        let entities = parse_entity_list(hyponym);
        let mut mass: BTreeMap<&str, f64> = BTreeMap::new();
        for entity in &entities {
            let labels = self
                .tables
                .entity_labels
                .get(&normalize_surface(entity))
                .ok_or_else(|| Self::miss("prediction", query))?;
            for p in labels {
                *mass.entry(p.token.as_str()).or_default() += p.logprob.exp();
            }
        }
        let n = entities.len() as f64;
        Ok(mass
            .into_iter()
            .map(|(token, m)| MaskPrediction::new(token, (m / n).ln()))
            .collect())
    }
}

fn normalize_keys<V>(map: BTreeMap<String, V>) -> BTreeMap<String, V> {
    map.into_iter()
        .map(|(k, v)| (normalize_surface(&k), v))
        .collect()
}

impl LmClient for FixtureLm {
    fn dim(&self) -> Result<usize> {
        Ok(self.tables.dim)
    }

    fn predict_masked(&self, query: &ProbeQuery, top_k: usize) -> Result<Vec<MaskPrediction>> {
        check_top_k(top_k)?;
        if let Some(p) = self.tables.predictions.get(query.text()) {
            return Ok(canonicalize(p.clone(), top_k));
        }
        let parsed = parse_probe(query.text()).ok_or_else(|| Self::miss("prediction", query))?;
        let Some(rest) = parsed.hypernym.strip_prefix(MASK) else {
            return Err(Self::miss("prediction", query));
        };
        let rest = rest.trim();
        let predictions = if rest.is_empty() {
            self.vote_labels(parsed.hyponym, query)?
        } else {
            self.tables
                .modifiers
                .get(&normalize_surface(rest))
                .cloned()
                .ok_or_else(|| Self::miss("prediction", query))?
        };
        Ok(canonicalize(predictions, top_k))
    }

    fn embed_mask(&self, query: &ProbeQuery) -> Result<Vec<f32>> {
        if let Some(v) = self.tables.embeddings.get(query.text()) {
            return Ok(v.clone());
        }
        parse_probe(query.text())
            .filter(|p| p.hyponym == MASK)
            .and_then(|p| {
                self.tables
                    .class_vectors
                    .get(&normalize_surface(p.hypernym))
            })
            .cloned()
            .ok_or_else(|| Self::miss("embedding", query))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q(text: &str) -> ProbeQuery {
        ProbeQuery::new(text).unwrap()
    }

    fn base() -> FixtureLm {
        FixtureLm::new(FixtureTables {
            dim: 2,
            ..Default::default()
        })
        .unwrap()
    }

    #[test]
    fn exact_table_truncates() {
        let lm = base().with_predictions("[MASK] such as A", &["countries", "nations", "states"]);
        let out = lm.predict_masked(&q("[MASK] such as A"), 2).unwrap();
        let tokens: Vec<_> = out.iter().map(|p| p.token.as_str()).collect();
        assert_eq!(tokens, vec!["countries", "nations"]);
    }

    #[test]
    fn zero_top_k_rejected() {
        let lm = base().with_predictions("[MASK] such as A", &["x"]);
        assert!(matches!(
            lm.predict_masked(&q("[MASK] such as A"), 0),
            Err(Error::InvalidArgument(_))
        ));
    }

    #[test]
    fn embedding_echo_and_determinism() {
        let lm = base().with_embedding("countries such as [MASK]", vec![0.25, -1.0]);
        let a = lm.embed_mask(&q("countries such as [MASK]")).unwrap();
        let b = lm.embed_mask(&q("countries such as [MASK]")).unwrap();
        assert_eq!(a, vec![0.25, -1.0]);
        assert_eq!(a, b);
    }

    #[test]
    fn unconfigured_queries_fail_loudly() {
        let lm = base();
        assert!(matches!(
            lm.predict_masked(&q("[MASK] such as A, B, and C"), 3),
            Err(Error::FixtureMiss { .. })
        ));
        assert!(matches!(
            lm.embed_mask(&q("He visited [MASK] .")),
            Err(Error::FixtureMiss { .. })
        ));
    }

    #[test]
    fn structural_tables_answer_rendered_probes() {
        let json = r#"{
            "dim": 2,
            "entity_labels": {
                "China": ["countries", "nations"],
                "India": ["countries", "states"],
                "Japan": ["countries", "islands"]
            },
            "modifiers": {"countries": ["asian", "and"]},
            "class_vectors": {"countries": [1.0, 0.0]}
        }"#;
        let lm = FixtureLm::new(serde_json::from_str(json).unwrap()).unwrap();
        let preds = lm
            .predict_masked(&q("China, India, and Japan or other [MASK]"), 3)
            .unwrap();
        assert_eq!(preds[0].token, "countries");
        assert!((preds[0].logprob - 0.0).abs() < 1e-12);
        assert_eq!(preds.len(), 3);

        let mods = lm
            .predict_masked(&q("such [MASK] countries as China, India, and Japan"), 3)
            .unwrap();
        assert_eq!(mods[0].token, "asian");

        assert_eq!(
            lm.embed_mask(&q("[MASK] and other countries")).unwrap(),
            vec![1.0, 0.0]
        );
        assert!(lm.embed_mask(&q("states such as [MASK]")).is_err());
        assert!(lm
            .predict_masked(&q("[MASK] such as China, India, and Korea"), 3)
            .is_err());
    }

    #[test]
    fn rejects_wrong_width_vectors() {
        let tables = FixtureTables {
            dim: 3,
            class_vectors: [("x".to_string(), vec![1.0])].into(),
            ..Default::default()
        };
        assert!(FixtureLm::new(tables).is_err());
    }
}
