//! Vocabulary, occurrence embeddings, and the on-disk cache.

mod build;
mod cache;
mod matcher;
mod store;
mod vocab;

pub use build::{build_cache, BuildSummary};
pub use cache::{
    load_cache, read_cache, write_store, CacheHeader, CacheWriter, LoadedCache, OccurrenceRecord,
};
pub use matcher::{mask_span, EntityMatcher, Mention};
pub use store::EmbeddingStore;
pub use vocab::{normalize_surface, EntityId, Vocabulary};
