use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::matcher::MatchSpan;
use crate::error::{Error, Result};
use crate::retrieval::CorpusSentence;

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Tag {
    O,
    B(String),
    I(String),
}

impl Tag {
    pub fn entity_type(&self) -> Option<&str> {
        match self {
            Tag::O => None,
            Tag::B(t) | Tag::I(t) => Some(t),
        }
    }

    /// Whether `self` may follow `prev` (None = sentence start).
    pub fn may_follow(&self, prev: Option<&Tag>) -> bool {
        match self {
            Tag::I(t) => matches!(prev, Some(Tag::B(p) | Tag::I(p)) if p == t),
            _ => true,
        }
    }
}

impl fmt::Display for Tag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Tag::O => f.write_str("O"),
            Tag::B(t) => write!(f, "B-{t}"),
            Tag::I(t) => write!(f, "I-{t}"),
        }
    }
}

impl FromStr for Tag {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "O" => Ok(Tag::O),
            _ => match s.split_once('-') {
                Some(("B", t)) if !t.is_empty() => Ok(Tag::B(t.to_string())),
                Some(("I", t)) if !t.is_empty() => Ok(Tag::I(t.to_string())),
                _ => Err(Error::data(format!("not a BIO tag: {s:?}"))),
            },
        }
    }
}

impl Serialize for Tag {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for Tag {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct LabeledSentence {
    pub sentence_id: String,
    pub tokens: Vec<String>,
    pub tags: Vec<Tag>,
}

impl LabeledSentence {
    pub fn is_well_formed(&self) -> bool {
        self.tokens.len() == self.tags.len() && is_well_formed(&self.tags)
    }
}

/// No `I-t` after `O`, at sentence start, or after a tag of another type.
pub fn is_well_formed(tags: &[Tag]) -> bool {
    let mut prev = None;
    for t in tags {
        if !t.may_follow(prev) {
            return false;
        }
        prev = Some(t);
    }
    true
}

/// Tag every sentence; spans must carry an assigned type and must not
/// overlap. Sentences without spans come out all-O.
pub fn emit_bio(sentences: &[CorpusSentence], spans: &[MatchSpan]) -> Result<Vec<LabeledSentence>> {
    let mut by_sentence: std::collections::HashMap<&str, Vec<&MatchSpan>> = Default::default();
    for s in spans {
        by_sentence
            .entry(s.sentence_id.as_str())
            .or_default()
            .push(s);
    }
    let mut out = Vec::with_capacity(sentences.len());
    for sentence in sentences {
        let n = sentence.tokens.len();
        let mut tags = vec![Tag::O; n];
        let mut taken = vec![false; n];
        for span in by_sentence
            .remove(sentence.sentence_id.as_str())
            .unwrap_or_default()
        {
            let ty = span
                .assigned_type
                .as_ref()
                .ok_or_else(|| Error::Invariant(format!("span {span:?} has no assigned type")))?;
            if span.token_start >= span.token_end || span.token_end > n {
                return Err(Error::Invariant(format!(
                    "span {span:?} outside sentence of {n} tokens"
                )));
            }
            for i in span.token_start..span.token_end {
                if taken[i] {
                    return Err(Error::Invariant(format!(
                        "overlapping spans in sentence {:?} at token {i}",
                        sentence.sentence_id
                    )));
                }
                taken[i] = true;
                tags[i] = if i == span.token_start {
                    Tag::B(ty.clone())
                } else {
                    Tag::I(ty.clone())
                };
            }
        }
        out.push(LabeledSentence {
            sentence_id: sentence.sentence_id.clone(),
            tokens: sentence.surfaces(),
            tags,
        });
    }
    if let Some(id) = by_sentence.keys().next() {
        return Err(Error::Invariant(format!(
            "span references unknown sentence {id:?}"
        )));
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn span(sid: &str, a: usize, b: usize, ty: &str) -> MatchSpan {
        MatchSpan {
            sentence_id: sid.into(),
            token_start: a,
            token_end: b,
            phrase_key: "k".into(),
            assigned_type: Some(ty.into()),
            via_abbreviation: false,
        }
    }

    fn tags(s: &LabeledSentence) -> Vec<String> {
        s.tags.iter().map(Tag::to_string).collect()
    }

    #[test]
    fn heart_disease() {
        let s = CorpusSentence::tokenize("s", "Heart disease is");
        let out = emit_bio(&[s], &[span("s", 0, 2, "disease")]).unwrap();
        assert_eq!(tags(&out[0]), vec!["B-disease", "I-disease", "O"]);
    }

    #[test]
    fn empty_and_disjoint() {
        let s = CorpusSentence::tokenize("s", "Paris and Lyon and Nice");
        let out = emit_bio(std::slice::from_ref(&s), &[]).unwrap();
        assert!(out[0].tags.iter().all(|t| *t == Tag::O));
        let out = emit_bio(&[s], &[span("s", 0, 1, "LOC"), span("s", 2, 3, "LOC")]).unwrap();
        assert_eq!(tags(&out[0]), vec!["B-LOC", "O", "B-LOC", "O", "O"]);
    }

    #[test]
    fn overlap_is_an_invariant_violation() {
        let s = CorpusSentence::tokenize("s", "New York City");
        let err = emit_bio(&[s], &[span("s", 0, 2, "LOC"), span("s", 1, 3, "LOC")]).unwrap_err();
        assert_eq!(err.exit_code(), 3);
    }

    #[test]
    fn tag_parsing_and_well_formedness() {
        assert_eq!("B-PER".parse::<Tag>().unwrap(), Tag::B("PER".into()));
        assert_eq!(
            "I-geo-loc".parse::<Tag>().unwrap(),
            Tag::I("geo-loc".into())
        );
        assert!("X-PER".parse::<Tag>().is_err());
        assert!("B-".parse::<Tag>().is_err());
        let t = |v: &[&str]| v.iter().map(|s| s.parse().unwrap()).collect::<Vec<Tag>>();
        assert!(is_well_formed(&t(&["B-A", "I-A", "O", "B-B"])));
        assert!(!is_well_formed(&t(&["O", "I-A"])));
        assert!(!is_well_formed(&t(&["I-A"])));
        assert!(!is_well_formed(&t(&["B-A", "I-B"])));
    }
}
