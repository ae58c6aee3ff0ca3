//! Binary occurrence cache.
//!
//! Layout: one JSON header line `{"dim": D, "vocab_hash": hex, "count": N}`
//! terminated by `\n`, followed by `N` fixed-size little-endian records:
//!
//! | field        | type       |
//! |--------------|------------|
//! | entity_id    | u32        |
//! | sentence_id  | u32        |
//! | span_start   | u16        |
//! | span_len     | u16        |
//! | vector       | D x f32    |

use std::collections::BTreeMap;
use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::store::EmbeddingStore;
use super::vocab::{EntityId, Vocabulary};
use crate::error::{Error, Result};

const RECORD_PREFIX_BYTES: usize = 12;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CacheHeader {
    pub dim: usize,
    pub vocab_hash: String,
    pub count: u64,
}

impl CacheHeader {
    pub fn record_bytes(&self) -> usize {
        RECORD_PREFIX_BYTES + 4 * self.dim
    }

    /// Fails unless the cache was built against `vocab`.
    pub fn check_vocabulary(&self, vocab: &Vocabulary) -> Result<()> {
        let hash = vocab.content_hash();
        if hash != self.vocab_hash {
            return Err(Error::VocabularyMismatch {
                cache: self.vocab_hash.clone(),
                vocab: hash,
            });
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct OccurrenceRecord {
    pub entity: EntityId,
    pub sentence_id: u32,
    pub span_start: u16,
    pub span_len: u16,
    pub vector: Vec<f32>,
}

impl OccurrenceRecord {
    fn encode(&self, out: &mut Vec<u8>) {
        out.extend_from_slice(&self.entity.0.to_le_bytes());
        out.extend_from_slice(&self.sentence_id.to_le_bytes());
        out.extend_from_slice(&self.span_start.to_le_bytes());
        out.extend_from_slice(&self.span_len.to_le_bytes());
        for x in &self.vector {
            out.extend_from_slice(&x.to_le_bytes());
        }
    }

    fn decode(buf: &[u8], dim: usize) -> Self {
        let u32_at = |i: usize| u32::from_le_bytes(buf[i..i + 4].try_into().unwrap());
        let u16_at = |i: usize| u16::from_le_bytes(buf[i..i + 2].try_into().unwrap());
        let vector = (0..dim)
            .map(|d| {
                let i = RECORD_PREFIX_BYTES + 4 * d;
                f32::from_le_bytes(buf[i..i + 4].try_into().unwrap())
            })
            .collect();
        Self {
            entity: EntityId(u32_at(0)),
            sentence_id: u32_at(4),
            span_start: u16_at(8),
            span_len: u16_at(10),
            vector,
        }
    }
}

/// Streams records to disk. The header count is fixed up front and
/// [`CacheWriter::finish`] fails if a different number was written.
pub struct CacheWriter {
    path: PathBuf,
    out: BufWriter<File>,
    header: CacheHeader,
    written: u64,
    scratch: Vec<u8>,
}

impl CacheWriter {
    pub fn create(path: impl AsRef<Path>, header: CacheHeader) -> Result<Self> {
        let path = path.as_ref().to_path_buf();
        let file = File::create(&path).map_err(|e| Error::io(&path, e))?;
        let mut out = BufWriter::new(file);
        let mut line = serde_json::to_vec(&header)?;
        line.push(b'\n');
        out.write_all(&line).map_err(|e| Error::io(&path, e))?;
        Ok(Self {
            path,
            out,
            scratch: Vec::with_capacity(header.record_bytes()),
            header,
            written: 0,
        })
    }

    pub fn write(&mut self, record: &OccurrenceRecord) -> Result<()> {
        if record.vector.len() != self.header.dim {
            return Err(Error::DimensionMismatch {
                expected: self.header.dim,
                found: record.vector.len(),
            });
        }
        if record.span_len == 0 {
            return Err(Error::InvalidArgument(
                "occurrence span must be non-empty".into(),
            ));
        }
        if self.written == self.header.count {
            return Err(Error::MalformedCache(format!(
                "more records than the declared count {}",
                self.header.count
            )));
        }
        self.scratch.clear();
        record.encode(&mut self.scratch);
        self.out
            .write_all(&self.scratch)
            .map_err(|e| Error::io(&self.path, e))?;
        self.written += 1;
        Ok(())
    }

    pub fn finish(mut self) -> Result<()> {
        if self.written != self.header.count {
            return Err(Error::MalformedCache(format!(
                "declared {} records but wrote {}",
                self.header.count, self.written
            )));
        }
        self.out.flush().map_err(|e| Error::io(&self.path, e))
    }
}

/// Reads the header and every record, validating lengths as it goes.
pub fn read_cache(path: impl AsRef<Path>) -> Result<(CacheHeader, Vec<OccurrenceRecord>)> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let mut reader = BufReader::new(file);
    let mut bytes = Vec::new();
    reader
        .read_to_end(&mut bytes)
        .map_err(|e| Error::io(path, e))?;

    let newline = bytes
        .iter()
        .position(|&b| b == b'\n')
        .ok_or(Error::TruncatedCache {
            offset: bytes.len() as u64,
        })?;
    let header: CacheHeader = serde_json::from_slice(&bytes[..newline])
        .map_err(|e| Error::MalformedCache(format!("header: {e}")))?;
    if header.dim == 0 {
        return Err(Error::MalformedCache("header dim must be positive".into()));
    }

    let record_bytes = header.record_bytes();
    let mut offset = newline + 1;
    let mut records = Vec::with_capacity(header.count.min(1 << 20) as usize);
    for _ in 0..header.count {
        if offset + record_bytes > bytes.len() {
            return Err(Error::TruncatedCache {
                offset: offset as u64,
            });
        }
        records.push(OccurrenceRecord::decode(
            &bytes[offset..offset + record_bytes],
            header.dim,
        ));
        offset += record_bytes;
    }
    if offset != bytes.len() {
        return Err(Error::MalformedCache(format!(
            "{} trailing bytes after {} records",
            bytes.len() - offset,
            header.count
        )));
    }
    Ok((header, records))
}

#[derive(Debug, Clone)]
pub struct LoadedCache {
    pub header: CacheHeader,
    pub store: EmbeddingStore,
}

/// Loads a cache into an [`EmbeddingStore`], checking the dimension when
/// `expected_dim` is given.
pub fn load_cache(path: impl AsRef<Path>, expected_dim: Option<usize>) -> Result<LoadedCache> {
    let (header, records) = read_cache(path)?;
    if let Some(expected) = expected_dim {
        if expected != header.dim {
            return Err(Error::DimensionMismatch {
                expected,
                found: header.dim,
            });
        }
    }
    let mut grouped: BTreeMap<EntityId, Vec<Vec<f32>>> = BTreeMap::new();
    for r in records {
        grouped.entry(r.entity).or_default().push(r.vector);
    }
    let store = EmbeddingStore::from_occurrences(header.dim, grouped)?;
    Ok(LoadedCache { header, store })
}

/// Writes an in-memory store as a cache, one pseudo-sentence per occurrence.
pub fn write_store(
    store: &EmbeddingStore,
    vocab: &Vocabulary,
    path: impl AsRef<Path>,
) -> Result<()> {
    let header = CacheHeader {
        dim: store.dim(),
        vocab_hash: vocab.content_hash(),
        count: store.total_occurrences() as u64,
    };
    let mut writer = CacheWriter::create(path, header)?;
    let mut sentence_id = 0u32;
    for entity in store.entities() {
        for v in store.occurrences(entity)? {
            writer.write(&OccurrenceRecord {
                entity,
                sentence_id,
                span_start: 0,
                span_len: 1,
                vector: v.clone(),
            })?;
            sentence_id += 1;
        }
    }
    writer.finish()
}
