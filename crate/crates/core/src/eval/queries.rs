use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// One evaluation query: a class, its seeds, and its full membership.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Query {
    pub class: String,
    pub seeds: Vec<String>,
    pub gt: Vec<String>,
}

pub fn parse_queries(text: &str) -> Result<Vec<Query>> {
    serde_json::from_str(text).map_err(|e| {
        Error::InvalidArgument(format!(
            "query file line {} column {}: {e}",
            e.line(),
            e.column()
        ))
    })
}

pub fn load_queries(path: impl AsRef<Path>) -> Result<Vec<Query>> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_queries(&text).map_err(|e| match e {
        Error::InvalidArgument(m) => Error::InvalidArgument(format!("{}: {m}", path.display())),
        other => other,
    })
}

pub fn write_queries(queries: &[Query], path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let text = serde_json::to_string_pretty(queries)?;
    std::fs::write(path, text + "\n").map_err(|e| Error::io(path, e))
}
