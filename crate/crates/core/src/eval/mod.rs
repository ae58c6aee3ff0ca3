//! MAP@K evaluation and synthetic benchmarks.

mod metrics;
mod queries;
mod synthetic;

use std::collections::{BTreeMap, HashSet};

pub use metrics::{average_precision_at_k, mean, EvalReport, QueryResult, DEFAULT_CUTOFFS};
pub use queries::{load_queries, parse_queries, write_queries, Query};
pub use synthetic::{PlantedClusters, SyntheticBenchmark};

use crate::corpus::{EmbeddingStore, EntityId, Vocabulary};
use crate::error::Result;
use crate::expansion::{expand, resolve_seeds, ExpansionConfig};
use crate::lm::LmClient;

/// Runs one expansion per query and scores its ranking at each cutoff.
pub fn evaluate(
    queries: &[Query],
    cfg: &ExpansionConfig,
    vocab: &Vocabulary,
    store: &EmbeddingStore,
    lm: &dyn LmClient,
    cutoffs: &[usize],
) -> Result<EvalReport> {
    let mut results = Vec::with_capacity(queries.len());
    for query in queries {
        let seeds = resolve_seeds(&query.seeds, vocab)?;
        let truth: HashSet<EntityId> = resolve_seeds(&query.gt, vocab)?.into_iter().collect();
        let outcome = expand(&seeds, cfg, vocab, store, lm)?;
        let ranked: Vec<EntityId> = outcome.ranked_entities().collect();
        let seed_set: HashSet<EntityId> = seeds.into_iter().collect();
        let average_precision = cutoffs
            .iter()
            .map(|&k| Ok((k, average_precision_at_k(&ranked, &truth, &seed_set, k)?)))
            .collect::<Result<BTreeMap<_, _>>>()?;
        log::info!("{}: {:?}", query.class, average_precision);
        results.push(QueryResult {
            class: query.class.clone(),
            average_precision,
        });
    }
    Ok(EvalReport::from_queries(results, cutoffs))
}
