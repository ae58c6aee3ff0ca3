//! Ordered, scored lists: the unit every ensemble step consumes.

use std::collections::HashMap;
use std::hash::Hash;

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Scored<T> {
    pub item: T,
    pub score: f64,
}

/// Items sorted by descending score. Rank positions are 1-based.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RankedList<T> {
    entries: Vec<Scored<T>>,
}

impl<T> RankedList<T> {
    /// Sorts by descending score, breaking ties by ascending `tie_key`.
    pub fn from_scores<K, F>(scores: impl IntoIterator<Item = (T, f64)>, tie_key: F) -> Self
    where
        K: Ord,
        F: Fn(&T) -> K,
    {
        let mut entries: Vec<Scored<T>> = scores
            .into_iter()
            .map(|(item, score)| Scored { item, score })
            .collect();
        entries.sort_by(|a, b| {
            b.score
                .total_cmp(&a.score)
                .then_with(|| tie_key(&a.item).cmp(&tie_key(&b.item)))
        });
        Self { entries }
    }

    /// Wraps entries that are already in rank order.
    pub fn from_sorted(entries: Vec<Scored<T>>) -> Self {
        Self { entries }
    }

    pub fn entries(&self) -> &[Scored<T>] {
        &self.entries
    }

    pub fn into_entries(self) -> Vec<Scored<T>> {
        self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn items(&self) -> impl Iterator<Item = &T> + '_ {
        self.entries.iter().map(|s| &s.item)
    }

    pub fn first(&self) -> Option<&Scored<T>> {
        self.entries.first()
    }

    pub fn truncate(&mut self, len: usize) {
        self.entries.truncate(len);
    }
}

impl<T: Eq + Hash + Clone> RankedList<T> {
    /// Map from item to its 1-based rank.
    pub fn rank_map(&self) -> HashMap<T, usize> {
        self.entries
            .iter()
            .enumerate()
            .map(|(i, s)| (s.item.clone(), i + 1))
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sorts_descending_with_lexicographic_ties() {
        let list = RankedList::from_scores(
            vec![("state", 0.5), ("b", 0.3), ("city", 0.5), ("a", 0.9)],
            |s| *s,
        );
        let order: Vec<_> = list.items().copied().collect();
        assert_eq!(order, vec!["a", "city", "state", "b"]);
        assert_eq!(list.rank_map()["state"], 3);
    }
}
