//! Entity mention detection in whitespace-tokenized sentences.

use std::collections::HashMap;

use super::vocab::{normalize_surface, EntityId, Vocabulary};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Mention {
    pub entity: EntityId,
    /// Token offset of the first matched token.
    pub start: usize,
    pub len: usize,
}

/// Case-insensitive, longest-match, non-overlapping, left-to-right matcher.
#[derive(Debug, Clone)]
pub struct EntityMatcher {
    phrases: HashMap<Vec<String>, EntityId>,
    max_tokens: usize,
}

impl EntityMatcher {
    pub fn new(vocab: &Vocabulary) -> Self {
        let mut phrases = HashMap::new();
        let mut max_tokens = 0;
        for (id, surface) in vocab.iter() {
            let tokens: Vec<String> = normalize_surface(surface)
                .split(' ')
                .map(str::to_string)
                .collect();
            max_tokens = max_tokens.max(tokens.len());
            phrases.insert(tokens, id);
        }
        Self {
            phrases,
            max_tokens,
        }
    }

    pub fn find(&self, tokens: &[&str]) -> Vec<Mention> {
        let lowered: Vec<String> = tokens.iter().map(|t| t.to_lowercase()).collect();
        let mut mentions = Vec::new();
        let mut i = 0;
        while i < lowered.len() {
            let longest = self.max_tokens.min(lowered.len() - i);
            let hit = (1..=longest).rev().find_map(|len| {
                self.phrases
                    .get(&lowered[i..i + len])
                    .map(|&entity| Mention {
                        entity,
                        start: i,
                        len,
                    })
            });
            match hit {
                Some(m) => {
                    i += m.len;
                    mentions.push(m);
                }
                None => i += 1,
            }
        }
        mentions
    }
}

/// Replaces the mention span with a single `[MASK]` token.
pub fn mask_span(tokens: &[&str], start: usize, len: usize) -> String {
    let mut out: Vec<&str> = Vec::with_capacity(tokens.len() - len + 1);
    out.extend_from_slice(&tokens[..start]);
    out.push(crate::probing::MASK);
    out.extend_from_slice(&tokens[start + len..]);
    out.join(" ")
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tokens(s: &str) -> Vec<&str> {
        s.split_whitespace().collect()
    }

    #[test]
    fn longest_match_wins() {
        let vocab = Vocabulary::from_surfaces(["States", "United States", "China"]).unwrap();
        let m = EntityMatcher::new(&vocab);
        let found = m.find(&tokens("the united states and China"));
        assert_eq!(
            found,
            vec![
                Mention {
                    entity: EntityId(1),
                    start: 1,
                    len: 2
                },
                Mention {
                    entity: EntityId(2),
                    start: 4,
                    len: 1
                },
            ]
        );
    }

    #[test]
    fn masks_whole_span_with_one_token() {
        let t = tokens("He visited United States .");
        assert_eq!(mask_span(&t, 2, 2), "He visited [MASK] .");
        let t = tokens("He visited China .");
        assert_eq!(mask_span(&t, 2, 1), "He visited [MASK] .");
    }
}
