use std::collections::HashMap;
use std::fmt;
use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};

/// Dense entity identifier, assigned in vocabulary file order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct EntityId(pub u32);

impl EntityId {
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

impl fmt::Display for EntityId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "#{}", self.0)
    }
}

/// Case-folds and collapses runs of whitespace.
pub fn normalize_surface(surface: &str) -> String {
    surface
        .split_whitespace()
        .map(str::to_lowercase)
        .collect::<Vec<_>>()
        .join(" ")
}

#[derive(Debug, Clone)]
pub struct Vocabulary {
    surfaces: Vec<String>,
    index: HashMap<String, EntityId>,
}

impl Vocabulary {
    /// Builds a vocabulary from surfaces in order. Blank entries are skipped
    /// but still count toward the reported line number.
    pub fn from_surfaces<I, S>(surfaces: I) -> Result<Self>
    where
        I: IntoIterator<Item = S>,
        S: AsRef<str>,
    {
        let mut out = Self {
            surfaces: Vec::new(),
            index: HashMap::new(),
        };
        for (lineno, raw) in surfaces.into_iter().enumerate() {
            let surface = raw.as_ref().trim();
            if surface.is_empty() {
                continue;
            }
            let key = normalize_surface(surface);
            if out.index.contains_key(&key) {
                return Err(Error::DuplicateSurface {
                    line: lineno + 1,
                    surface: surface.to_string(),
                });
            }
            let id = EntityId(out.surfaces.len() as u32);
            out.index.insert(key, id);
            out.surfaces.push(surface.to_string());
        }
        if out.surfaces.is_empty() {
            return Err(Error::EmptyVocabulary);
        }
        Ok(out)
    }

    /// Reads a UTF-8 file with one entity surface per line.
    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_surfaces(text.lines())
    }

    pub fn len(&self) -> usize {
        self.surfaces.len()
    }

    pub fn is_empty(&self) -> bool {
        self.surfaces.is_empty()
    }

    /// Panics if `id` was not issued by this vocabulary.
    pub fn surface(&self, id: EntityId) -> &str {
        &self.surfaces[id.index()]
    }

    pub fn get(&self, id: EntityId) -> Option<&str> {
        self.surfaces.get(id.index()).map(String::as_str)
    }

    pub fn lookup(&self, surface: &str) -> Option<EntityId> {
        self.index.get(&normalize_surface(surface)).copied()
    }

    pub fn iter(&self) -> impl Iterator<Item = (EntityId, &str)> + '_ {
        self.surfaces
            .iter()
            .enumerate()
            .map(|(i, s)| (EntityId(i as u32), s.as_str()))
    }

    /// SHA-256 over the normalized surfaces, newline-joined, as lowercase hex.
    pub fn content_hash(&self) -> String {
        let mut hasher = Sha256::new();
        for (i, s) in self.surfaces.iter().enumerate() {
            if i > 0 {
                hasher.update(b"\n");
            }
            hasher.update(normalize_surface(s).as_bytes());
        }
        hex::encode(hasher.finalize())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn assigns_ids_in_file_order() {
        let v = Vocabulary::from_surfaces(["USA", "China"]).unwrap();
        assert_eq!(v.surface(EntityId(0)), "USA");
        assert_eq!(v.surface(EntityId(1)), "China");
        assert_eq!(v.lookup("china"), Some(EntityId(1)));
        assert_eq!(v.lookup("  United   States "), None);
    }

    #[test]
    fn case_folded_duplicate_reports_line() {
        let err = Vocabulary::from_surfaces(["china", "China"]).unwrap_err();
        match err {
            Error::DuplicateSurface { line, .. } => assert_eq!(line, 2),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn whitespace_variants_collide() {
        assert!(Vocabulary::from_surfaces(["United States", "united  states"]).is_err());
    }

    #[test]
    fn empty_file_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("vocab.txt");
        std::fs::write(&path, "").unwrap();
        let err = Vocabulary::load(&path).unwrap_err();
        assert_eq!(err.to_string(), "empty vocabulary");
        std::fs::write(&path, "\n  \n").unwrap();
        assert!(matches!(
            Vocabulary::load(&path),
            Err(Error::EmptyVocabulary)
        ));
    }

    #[test]
    fn hash_ignores_case_but_not_order() {
        let a = Vocabulary::from_surfaces(["A", "b"]).unwrap();
        let b = Vocabulary::from_surfaces(["a", "B"]).unwrap();
        let c = Vocabulary::from_surfaces(["b", "a"]).unwrap();
        assert_eq!(a.content_hash(), b.content_hash());
        assert_ne!(a.content_hash(), c.content_hash());
        assert_eq!(a.content_hash().len(), 64);
    }
}
