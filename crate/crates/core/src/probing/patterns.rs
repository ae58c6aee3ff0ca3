//! The six hypernym patterns used for both class and entity probes.

use serde::{Deserialize, Serialize};

use super::class_name::ClassName;
use super::query::{ProbeQuery, MASK};
use crate::error::{Error, Result};

/// A lexico-syntactic pattern relating a hypernym (`y`) to a hyponym (`a`).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum HearstPattern {
    /// `y such as a`
    SuchAs,
    /// `such y as a`
    SuchYAs,
    /// `a or other y`
    OrOther,
    /// `a and other y`
    AndOther,
    /// `y, including a`
    Including,
    /// `y, especially a`
    Especially,
}

impl HearstPattern {
    pub const ALL: [HearstPattern; 6] = [
        HearstPattern::SuchAs,
        HearstPattern::SuchYAs,
        HearstPattern::OrOther,
        HearstPattern::AndOther,
        HearstPattern::Including,
        HearstPattern::Especially,
    ];

    /// 1-based pattern number.
    pub fn id(self) -> u8 {
        match self {
            HearstPattern::SuchAs => 1,
            HearstPattern::SuchYAs => 2,
            HearstPattern::OrOther => 3,
            HearstPattern::AndOther => 4,
            HearstPattern::Including => 5,
            HearstPattern::Especially => 6,
        }
    }

    pub fn from_id(id: u8) -> Option<Self> {
        Self::ALL.get(usize::from(id).checked_sub(1)?).copied()
    }

    pub fn render(self, hypernym: &str, hyponym: &str) -> String {
        match self {
            HearstPattern::SuchAs => format!("{hypernym} such as {hyponym}"),
            HearstPattern::SuchYAs => format!("such {hypernym} as {hyponym}"),
            HearstPattern::OrOther => format!("{hyponym} or other {hypernym}"),
            HearstPattern::AndOther => format!("{hyponym} and other {hypernym}"),
            HearstPattern::Including => format!("{hypernym}, including {hyponym}"),
            HearstPattern::Especially => format!("{hypernym}, especially {hyponym}"),
        }
    }

    /// Splits `text` back into `(hypernym, hyponym)` if it has this shape.
    fn split(self, text: &str) -> Option<(&str, &str)> {
        let (y, a) = match self {
            HearstPattern::SuchAs => text.split_once(" such as ")?,
            HearstPattern::SuchYAs => text.strip_prefix("such ")?.split_once(" as ")?,
            HearstPattern::OrOther => {
                let (a, y) = text.rsplit_once(" or other ")?;
                (y, a)
            }
            HearstPattern::AndOther => {
                let (a, y) = text.rsplit_once(" and other ")?;
                (y, a)
            }
            HearstPattern::Including => text.split_once(", including ")?,
            HearstPattern::Especially => text.split_once(", especially ")?,
        };
        let (y, a) = (y.trim(), a.trim());
        (!y.is_empty() && !a.is_empty()).then_some((y, a))
    }
}

/// A probe text decomposed into its pattern and slot fillers.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ParsedProbe<'a> {
    pub pattern: HearstPattern,
    pub hypernym: &'a str,
    pub hyponym: &'a str,
}

/// Recovers pattern and slot fillers from rendered probe text.
pub fn parse_probe(text: &str) -> Option<ParsedProbe<'_>> {
    const ORDER: [HearstPattern; 6] = [
        HearstPattern::SuchYAs,
        HearstPattern::SuchAs,
        HearstPattern::Including,
        HearstPattern::Especially,
        HearstPattern::OrOther,
        HearstPattern::AndOther,
    ];
    ORDER.into_iter().find_map(|pattern| {
        let (hypernym, hyponym) = pattern.split(text)?;
        Some(ParsedProbe {
            pattern,
            hypernym,
            hyponym,
        })
    })
}

/// Serializes hyponyms as `A`, `A and B`, or `A, B, and C`.
pub fn format_entity_list<S: AsRef<str>>(entities: &[S]) -> String {
    match entities {
        [] => String::new(),
        [a] => a.as_ref().to_string(),
        [a, b] => format!("{} and {}", a.as_ref(), b.as_ref()),
        [init @ .., last] => {
            let head: Vec<&str> = init.iter().map(AsRef::as_ref).collect();
            format!("{}, and {}", head.join(", "), last.as_ref())
        }
    }
}

/// Inverse of [`format_entity_list`].
pub fn parse_entity_list(list: &str) -> Vec<&str> {
    if let Some((head, last)) = list.rsplit_once(", and ") {
        let mut out: Vec<&str> = head.split(", ").map(str::trim).collect();
        out.push(last.trim());
        out
    } else if let Some((a, b)) = list.split_once(" and ") {
        vec![a.trim(), b.trim()]
    } else {
        vec![list.trim()]
    }
}

/// Class probe: hypernym slot masked, hyponym slot holds three entities.
pub fn render_class_probe<S: AsRef<str>>(
    pattern: HearstPattern,
    entities: &[S],
) -> Result<ProbeQuery> {
    if entities.len() != 3 {
        return Err(Error::InvalidArgument(format!(
            "class probes need exactly 3 entities, got {}",
            entities.len()
        )));
    }
    let lowered: Vec<String> = entities.iter().map(|e| e.as_ref().to_lowercase()).collect();
    if lowered[0] == lowered[1] || lowered[0] == lowered[2] || lowered[1] == lowered[2] {
        return Err(Error::InvalidArgument(
            "class probe entities must be distinct".into(),
        ));
    }
    ProbeQuery::new(pattern.render(MASK, &format_entity_list(entities)))
}

/// The class probe with the hypernym slot extended to `[MASK] <suffix>`.
pub(crate) fn render_extended_class_probe(
    pattern: HearstPattern,
    suffix: &[String],
    entity_list: &str,
) -> Result<ProbeQuery> {
    let hypernym = if suffix.is_empty() {
        MASK.to_string()
    } else {
        format!("{MASK} {}", suffix.join(" "))
    };
    ProbeQuery::new(pattern.render(&hypernym, entity_list))
}

/// One entity probe per pattern: hyponym slot masked, hypernym slot holds the class.
pub fn render_entity_probes(class: &ClassName) -> Vec<ProbeQuery> {
    HearstPattern::ALL
        .iter()
        .map(|p| {
            ProbeQuery::new(p.render(class.surface(), MASK))
                .expect("class names never contain the mask token")
        })
        .collect()
}
