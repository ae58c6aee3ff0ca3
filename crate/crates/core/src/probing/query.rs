use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// The literal mask marker used in every probe and on the wire.
pub const MASK: &str = "[MASK]";

/// Text with exactly one `[MASK]` marker.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub struct ProbeQuery {
    text: String,
    mask_index: usize,
}

impl ProbeQuery {
    pub fn new(text: impl Into<String>) -> Result<Self> {
        let text = text.into();
        let found = text.matches(MASK).count();
        if found != 1 {
            return Err(Error::MaskCount { text, found });
        }
        let mask_index = text
            .split_whitespace()
            .position(|t| t.contains(MASK))
            .expect("mask present");
        Ok(Self { text, mask_index })
    }

    pub fn text(&self) -> &str {
        &self.text
    }

    /// Whitespace-token position of the mask.
    pub fn mask_index(&self) -> usize {
        self.mask_index
    }
}

impl fmt::Display for ProbeQuery {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.text)
    }
}

impl TryFrom<String> for ProbeQuery {
    type Error = Error;

    fn try_from(text: String) -> Result<Self> {
        Self::new(text)
    }
}

impl From<ProbeQuery> for String {
    fn from(q: ProbeQuery) -> String {
        q.text
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exactly_one_mask() {
        let q = ProbeQuery::new("countries such as [MASK]").unwrap();
        assert_eq!(q.mask_index(), 3);
        assert!(matches!(
            ProbeQuery::new("countries such as Japan"),
            Err(Error::MaskCount { found: 0, .. })
        ));
        assert!(matches!(
            ProbeQuery::new("[MASK] such as [MASK]"),
            Err(Error::MaskCount { found: 2, .. })
        ));
    }
}
