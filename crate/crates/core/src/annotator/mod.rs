//! Pseudo-dictionary construction, dictionary matching (rules 9 and 10),
//! type apportionment and BIO emission.

mod apportion;
mod bio;
mod conll;
mod dictionary;
mod matcher;

use std::collections::{BTreeMap, HashMap};

pub use apportion::{apportion_counts, apportion_types, Allocation};
pub use bio::{emit_bio, is_well_formed, LabeledSentence, Tag};
pub use conll::{parse_conll, read_conll, write_conll};
pub use dictionary::{build_dictionary, load_quality_phrases, DictEntry, PseudoDictionary};
pub use matcher::{
    is_lowercase_token, match_sentences, refine_boundaries, resolve_leftmost_longest, Candidate,
    DictionaryMatcher, MatchSpan, TokenMatcher,
};

use crate::error::{Error, Result};
use crate::normalizer::RuleToggles;
use crate::retrieval::CorpusSentence;

/// Match, then apportion every entry's occurrences. Output follows sentence
/// order, then token order.
pub fn annotate(
    dict: &PseudoDictionary,
    sentences: &[CorpusSentence],
    rules: &RuleToggles,
) -> Result<Vec<MatchSpan>> {
    let spans = match_sentences(dict, sentences, rules);
    let mut by_entry: BTreeMap<String, Vec<MatchSpan>> = BTreeMap::new();
    for s in spans {
        by_entry.entry(s.phrase_key.clone()).or_default().push(s);
    }
    let mut assigned = Vec::new();
    for (key, occ) in by_entry {
        let entry = dict
            .get(&key)
            .ok_or_else(|| Error::Invariant(format!("match for unknown entry {key:?}")))?;
        assigned.extend(apportion_types(entry, occ)?);
    }
    let position: HashMap<&str, usize> = sentences
        .iter()
        .enumerate()
        .map(|(i, s)| (s.sentence_id.as_str(), i))
        .collect();
    assigned.sort_by_key(|s| (position[s.sentence_id.as_str()], s.token_start));
    Ok(assigned)
}
