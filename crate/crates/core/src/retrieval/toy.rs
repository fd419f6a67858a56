//! Desk-scale lexical stand-in for a dense phrase retriever.
//!
//! This is NOT dense retrieval: candidates are scored by how many of the
//! question's content tokens (the type label's tokens) occur in the
//! candidate's sentence. It exists so the pipeline runs without a service.

use std::collections::HashSet;

use super::corpus::Corpus;
use super::results::RetrievedPhrase;
use crate::error::{Error, Result};
use crate::querygen::SubQuestion;
use crate::text::fold_case;

/// Content tokens of a question: the type label's whitespace tokens, folded,
/// with edge punctuation removed.
pub fn content_tokens(question: &SubQuestion) -> Vec<String> {
    question
        .type_label
        .split_whitespace()
        .map(|t| fold_case(t.trim_matches(|c: char| !c.is_alphanumeric())))
        .filter(|t| !t.is_empty())
        .collect()
}

pub fn toy_retrieve(
    question: &SubQuestion,
    corpus: &Corpus,
    top_n: usize,
) -> Result<Vec<RetrievedPhrase>> {
    if !corpus.sentences().iter().any(|s| s.candidates.is_some()) {
        return Err(Error::UnsupportedCorpus(
            "toy retrieval needs sentences with pre-marked candidate spans".into(),
        ));
    }
    let wanted = content_tokens(question);
    let mut scored = Vec::new();
    for sentence in corpus.sentences() {
        let Some(cands) = &sentence.candidates else {
            continue;
        };
        let present: HashSet<String> = sentence
            .tokens
            .iter()
            .map(|t| fold_case(&t.surface))
            .collect();
        let score = wanted.iter().filter(|t| present.contains(*t)).count();
        for &(start, end) in cands {
            let surface = sentence
                .slice(start, end)
                .ok_or_else(|| Error::data(format!("candidate [{start}, {end}) out of bounds")))?;
            scored.push((score, sentence.sentence_id.as_str(), start, end, surface));
        }
    }
    scored.sort_by(|a, b| b.0.cmp(&a.0).then(a.1.cmp(b.1)).then(a.2.cmp(&b.2)));
    Ok(scored
        .into_iter()
        .take(top_n)
        .enumerate()
        .map(|(i, (score, sid, start, end, surface))| RetrievedPhrase {
            question_id: question.question_id.clone(),
            rank: i as u32 + 1,
            surface: surface.to_string(),
            score: score as f64,
            sentence_id: sid.to_string(),
            char_start: start,
            char_end: end,
        })
        .collect())
}
