use std::collections::BTreeMap;
use std::path::Path;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::normalizer::NormalizedPhrase;
use crate::text::match_key;

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct DictEntry {
    /// First-seen casing.
    pub display: String,
    /// Retrieval count per output type.
    pub counts: BTreeMap<String, u64>,
}

impl DictEntry {
    pub fn total(&self) -> u64 {
        self.counts.values().sum()
    }
}

/// The pseudo-dictionary: normalized phrases keyed by folded surface.
///
/// Abbreviations are kept on the side as match-time aliases of their long
/// form; they are never entries themselves.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct PseudoDictionary {
    entries: BTreeMap<String, DictEntry>,
    abbreviations: BTreeMap<String, String>,
    quality_phrases: Option<Vec<String>>,
}

impl PseudoDictionary {
    pub fn insert(&mut self, surface: &str, output_type: &str, count: u64) {
        let key = match_key(surface);
        if key.is_empty() || count == 0 {
            return;
        }
        let entry = self.entries.entry(key).or_insert_with(|| DictEntry {
            display: surface.trim().to_string(),
            counts: BTreeMap::new(),
        });
        *entry.counts.entry(output_type.to_string()).or_default() += count;
    }

    /// Record `short` as an alias of `long_surface`. First alias wins.
    pub fn add_abbreviation(&mut self, short: &str, long_surface: &str) {
        let short_key = match_key(short);
        let long_key = match_key(long_surface);
        if short_key.is_empty() || short_key == long_key {
            return;
        }
        self.abbreviations.entry(short_key).or_insert(long_key);
    }

    pub fn set_quality_phrases(&mut self, phrases: Vec<String>) {
        self.quality_phrases = Some(phrases);
    }

    pub fn quality_phrases(&self) -> Option<&[String]> {
        self.quality_phrases.as_deref()
    }

    pub fn get(&self, key: &str) -> Option<&DictEntry> {
        self.entries.get(key)
    }

    pub fn entries(&self) -> impl Iterator<Item = (&String, &DictEntry)> {
        self.entries.iter()
    }

    /// Alias key → long-form entry key.
    pub fn abbreviations(&self) -> impl Iterator<Item = (&String, &String)> {
        self.abbreviations.iter()
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// `phrase<TAB>type<TAB>count` lines sorted by phrase, then type.
    pub fn dump_tsv(&self) -> String {
        let mut rows: Vec<(&str, &str, u64)> = self
            .entries
            .values()
            .flat_map(|e| {
                e.counts
                    .iter()
                    .map(move |(t, c)| (e.display.as_str(), t.as_str(), *c))
            })
            .collect();
        rows.sort();
        let mut out = String::new();
        for (phrase, ty, count) in rows {
            out.push_str(&format!("{phrase}\t{ty}\t{count}\n"));
        }
        out
    }
}

pub fn build_dictionary(normalized: &[NormalizedPhrase]) -> PseudoDictionary {
    let mut dict = PseudoDictionary::default();
    for p in normalized {
        dict.insert(&p.surface, &p.output_type, 1);
    }
    for p in normalized {
        if let Some(short) = &p.abbreviation {
            dict.add_abbreviation(short, &p.surface);
        }
    }
    dict
}

/// Quality-phrase list: one phrase per line, blank lines ignored.
pub fn load_quality_phrases(path: &Path) -> Result<Vec<String>> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    Ok(text
        .lines()
        .map(str::trim)
        .filter(|l| !l.is_empty())
        .map(str::to_string)
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::retrieval::RetrievedPhrase;

    fn np(surface: &str, ty: &str, abbr: Option<&str>) -> NormalizedPhrase {
        NormalizedPhrase {
            surface: surface.into(),
            origin: RetrievedPhrase {
                question_id: "q".into(),
                rank: 1,
                surface: surface.into(),
                score: 0.0,
                sentence_id: "s".into(),
                char_start: 0,
                char_end: 1,
            },
            type_label: ty.to_lowercase(),
            output_type: ty.into(),
            abbreviation: abbr.map(str::to_string),
        }
    }

    #[test]
    fn washington_counts() {
        let mut v = vec![np("Washington", "location", None); 3];
        v.extend(vec![np("Washington", "person", None); 7]);
        let d = build_dictionary(&v);
        let e = d.get("washington").unwrap();
        assert_eq!(e.counts["location"], 3);
        assert_eq!(e.counts["person"], 7);
        assert_eq!(e.total(), 10);
    }

    #[test]
    fn empty_and_case_folding() {
        assert!(build_dictionary(&[]).is_empty());
        let d = build_dictionary(&[
            np("Heart Disease", "D", None),
            np("heart disease", "D", None),
        ]);
        assert_eq!(d.len(), 1);
        let e = d.get("heart disease").unwrap();
        assert_eq!(e.display, "Heart Disease");
        assert_eq!(e.counts["D"], 2);
    }

    #[test]
    fn abbreviations_are_not_entries() {
        let d = build_dictionary(&[np("Crohn's disease", "Disease", Some("CD"))]);
        assert_eq!(d.len(), 1);
        assert!(d.get("cd").is_none());
        assert_eq!(
            d.abbreviations().collect::<Vec<_>>(),
            vec![(&"cd".to_string(), &"crohn's disease".to_string())]
        );
        assert_eq!(d.dump_tsv(), "Crohn's disease\tDisease\t1\n");
    }

    #[test]
    fn tsv_sorted_by_phrase_then_type() {
        let d = build_dictionary(&[
            np("Washington", "person", None),
            np("Berlin", "location", None),
            np("Washington", "location", None),
        ]);
        assert_eq!(
            d.dump_tsv(),
            "Berlin\tlocation\t1\nWashington\tlocation\t1\nWashington\tperson\t1\n"
        );
    }
}
