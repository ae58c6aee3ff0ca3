//! Cache construction from a raw corpus.

use std::collections::BTreeSet;
use std::path::Path;

use rayon::prelude::*;

use super::cache::{CacheHeader, CacheWriter, OccurrenceRecord};
use super::matcher::{mask_span, EntityMatcher};
use super::vocab::{EntityId, Vocabulary};
use crate::error::{Error, Result};
use crate::lm::LmClient;
use crate::probing::ProbeQuery;

/// Number of occurrences embedded concurrently before flushing to disk.
const EMBED_CHUNK: usize = 256;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BuildSummary {
    pub dim: usize,
    pub sentences: usize,
    pub occurrences: usize,
    pub entities_found: usize,
    /// Vocabulary entities that never occur in the corpus.
    pub absent: Vec<EntityId>,
}

struct PendingOccurrence {
    entity: EntityId,
    sentence_id: u32,
    span_start: u16,
    span_len: u16,
    masked: String,
}

/// Finds every vocabulary mention in `corpus` (one sentence per line) and
/// records the mask-position embedding of the sentence with the mention
/// replaced by `[MASK]`. Records are written in corpus order.
pub fn build_cache(
    corpus: impl AsRef<Path>,
    vocab: &Vocabulary,
    lm: &dyn LmClient,
    out: impl AsRef<Path>,
) -> Result<BuildSummary> {
    let corpus = corpus.as_ref();
    let text = std::fs::read_to_string(corpus).map_err(|e| Error::io(corpus, e))?;
    let matcher = EntityMatcher::new(vocab);

    let mut pending = Vec::new();
    let mut sentences = 0usize;
    for (line_no, line) in text.lines().enumerate() {
        sentences += 1;
        let sentence_id = u32::try_from(line_no)
            .map_err(|_| Error::InvalidArgument("corpus exceeds u32 sentences".into()))?;
        let tokens: Vec<&str> = line.split_whitespace().collect();
        for m in matcher.find(&tokens) {
            let span_start = u16::try_from(m.start).map_err(|_| {
                Error::InvalidArgument(format!("sentence {sentence_id} exceeds u16 tokens"))
            })?;
            pending.push(PendingOccurrence {
                entity: m.entity,
                sentence_id,
                span_start,
                span_len: m.len as u16,
                masked: mask_span(&tokens, m.start, m.len),
            });
        }
    }

    let dim = lm.dim()?;
    let header = CacheHeader {
        dim,
        vocab_hash: vocab.content_hash(),
        count: pending.len() as u64,
    };
    let mut writer = CacheWriter::create(out, header)?;

    for chunk in pending.chunks(EMBED_CHUNK) {
        let vectors: Vec<Result<Vec<f32>>> = chunk
            .par_iter()
            .map(|p| {
                ProbeQuery::new(p.masked.as_str())
                    .and_then(|q| lm.embed_mask(&q))
                    .map_err(|e| Error::LmAtSentence {
                        sentence_id: p.sentence_id,
                        source: Box::new(e),
                    })
            })
            .collect();
        for (p, vector) in chunk.iter().zip(vectors) {
            writer.write(&OccurrenceRecord {
                entity: p.entity,
                sentence_id: p.sentence_id,
                span_start: p.span_start,
                span_len: p.span_len,
                vector: vector?,
            })?;
        }
    }
    writer.finish()?;

    let found: BTreeSet<EntityId> = pending.iter().map(|p| p.entity).collect();
    let absent: Vec<EntityId> = vocab
        .iter()
        .map(|(id, _)| id)
        .filter(|id| !found.contains(id))
        .collect();
    for &id in &absent {
        log::warn!(
            "entity {:?} has no occurrences in the corpus",
            vocab.surface(id)
        );
    }
    Ok(BuildSummary {
        dim,
        sentences,
        occurrences: pending.len(),
        entities_found: found.len(),
        absent,
    })
}
