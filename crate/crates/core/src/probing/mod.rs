//! Probe rendering and candidate class-name generation.

mod class_name;
mod generate;
mod patterns;
mod query;

pub use class_name::{is_noun_phrase, ClassName, MAX_CLASS_TOKENS};
pub use generate::{
    beam_class_names, draw_probes, generate_class_names, CandidateClassPool, GenerationConfig,
    PoolEntry, ProbeDraw,
};
pub use patterns::{
    format_entity_list, parse_entity_list, parse_probe, render_class_probe, render_entity_probes,
    HearstPattern, ParsedProbe,
};
pub use query::{ProbeQuery, MASK};
