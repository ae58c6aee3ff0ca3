//! Class-guided entity set expansion.
//!
//! Given a handful of seed entities and a corpus of contextualized entity
//! embeddings, the engine repeatedly asks a masked language model what the
//! current set *is* (candidate class names), ranks those names against the
//! corpus, and admits new entities only when they match the best class name
//! better than every negative one.
//!
//! Modules, bottom up:
//!
//! * [`corpus`]: vocabulary, occurrence embeddings, binary cache
//! * [`lm`]: the masked-LM contract with fixture and HTTP backends
//! * [`probing`]: pattern probes and beam-search class-name generation
//! * [`class_ranking`]: entity/class similarity and class selection
//! * [`selection`]: per-iteration entity scoring and rank ensembling
//! * [`expansion`]: the iterative controller
//! * [`eval`]: MAP@K and synthetic benchmarks

pub mod class_ranking;
pub mod corpus;
pub mod error;
pub mod eval;
pub mod expansion;
pub mod lm;
pub mod probing;
pub mod ranking;
pub mod selection;
pub mod similarity;

pub use error::{Error, Result};
