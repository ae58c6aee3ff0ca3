use std::cmp::Ordering;
use std::fmt;
use std::hash::{Hash, Hasher};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const MAX_CLASS_TOKENS: usize = 3;

/// Words that cannot open a noun phrase: conjunctions, prepositions,
/// determiners, and pronouns.
const LEADING_STOPLIST: &[&str] = &[
    // conjunctions
    "and",
    "or",
    "but",
    "nor",
    "yet",
    "so",
    "if",
    "because",
    "while",
    "whereas",
    "although",
    // prepositions
    "of",
    "in",
    "on",
    "at",
    "by",
    "for",
    "with",
    "from",
    "to",
    "into",
    "onto",
    "as",
    "about",
    "among",
    "between",
    "like",
    "than",
    "through",
    "over",
    "under",
    "including",
    "especially",
    "within",
    "without",
    "across",
    "after",
    "before",
    "during",
    "upon",
    "via",
    // determiners and quantifiers
    "the",
    "a",
    "an",
    "this",
    "that",
    "these",
    "those",
    "some",
    "any",
    "each",
    "every",
    "all",
    "both",
    "other",
    "another",
    "such",
    "no",
    "either",
    "neither",
    "many",
    "several",
    "most",
    "more",
    "few",
    "much",
    // pronouns
    "i",
    "me",
    "you",
    "he",
    "him",
    "she",
    "her",
    "it",
    "we",
    "us",
    "they",
    "them",
    "his",
    "its",
    "our",
    "their",
    "my",
    "your",
    "who",
    "whom",
    "whose",
    "which",
    "what",
];

/// Heuristic noun-phrase test for generated class names.
///
/// Rejects a phrase whose first word is a stoplisted function word, whose
/// last word is not purely alphabetic, or that contains a token with no
/// letters (punctuation, subword markers).
pub fn is_noun_phrase<S: AsRef<str>>(tokens: &[S]) -> bool {
    let Some(first) = tokens.first() else {
        return false;
    };
    let last = tokens.last().expect("non-empty").as_ref();
    if LEADING_STOPLIST.contains(&first.as_ref().to_lowercase().as_str()) {
        return false;
    }
    if last.is_empty() || !last.chars().all(char::is_alphabetic) {
        return false;
    }
    tokens.iter().all(|t| {
        let t = t.as_ref();
        t.chars().any(char::is_alphabetic) && !t.contains('#') && !t.contains('[')
    })
}

/// A case-folded class name of one to three words.
///
/// Equality, ordering, and hashing use the surface form only.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub struct ClassName {
    tokens: Vec<String>,
    surface: String,
}

impl ClassName {
    pub fn new<S: AsRef<str>>(tokens: &[S]) -> Result<Self> {
        let tokens: Vec<String> = tokens
            .iter()
            .map(|t| t.as_ref().trim().to_lowercase())
            .collect();
        if tokens.is_empty() || tokens.len() > MAX_CLASS_TOKENS {
            return Err(Error::InvalidArgument(format!(
                "class names have 1..={MAX_CLASS_TOKENS} words, got {}",
                tokens.len()
            )));
        }
        if !is_noun_phrase(&tokens) {
            return Err(Error::InvalidArgument(format!(
                "{:?} is not a noun phrase",
                tokens.join(" ")
            )));
        }
        let surface = tokens.join(" ");
        Ok(Self { tokens, surface })
    }

    pub fn parse(surface: &str) -> Result<Self> {
        let tokens: Vec<&str> = surface.split_whitespace().collect();
        Self::new(&tokens)
    }

    pub fn tokens(&self) -> &[String] {
        &self.tokens
    }

    pub fn surface(&self) -> &str {
        &self.surface
    }

    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tokens.is_empty()
    }
}

impl PartialEq for ClassName {
    fn eq(&self, other: &Self) -> bool {
        self.surface == other.surface
    }
}

impl Eq for ClassName {}

impl Hash for ClassName {
    fn hash<H: Hasher>(&self, state: &mut H) {
        self.surface.hash(state);
    }
}

impl PartialOrd for ClassName {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for ClassName {
    fn cmp(&self, other: &Self) -> Ordering {
        self.surface.cmp(&other.surface)
    }
}

impl fmt::Display for ClassName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.surface)
    }
}

impl TryFrom<String> for ClassName {
    type Error = Error;

    fn try_from(s: String) -> Result<Self> {
        Self::parse(&s)
    }
}

impl From<ClassName> for String {
    fn from(c: ClassName) -> String {
        c.surface
    }
}
