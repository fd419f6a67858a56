use std::collections::{BTreeMap, HashSet};
use std::io::BufRead;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::corpus::Corpus;
use crate::error::{Error, Result};

/// One ranked retrieval hit: a phrase and the evidence sentence it came from.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RetrievedPhrase {
    pub question_id: String,
    pub rank: u32,
    #[serde(rename = "phrase")]
    pub surface: String,
    pub score: f64,
    pub sentence_id: String,
    pub char_start: usize,
    pub char_end: usize,
}

/// Ranked lists keyed by question id; each list is sorted by rank.
pub type ResultSet = BTreeMap<String, Vec<RetrievedPhrase>>;

/// Check one record against its evidence sentence.
pub fn validate_against(phrase: &RetrievedPhrase, corpus: &Corpus) -> Result<()> {
    let sentence = corpus
        .get(&phrase.sentence_id)
        .ok_or_else(|| Error::data(format!("unknown sentence id {:?}", phrase.sentence_id)))?;
    match sentence.slice(phrase.char_start, phrase.char_end) {
        Some(s) if s == phrase.surface => Ok(()),
        Some(s) => Err(Error::data(format!(
            "span mismatch: phrase {:?} but sentence {:?} has {:?} at [{}, {})",
            phrase.surface, phrase.sentence_id, s, phrase.char_start, phrase.char_end
        ))),
        None => Err(Error::data(format!(
            "span [{}, {}) is outside sentence {:?}",
            phrase.char_start, phrase.char_end, phrase.sentence_id
        ))),
    }
}

/// Group records by question, validating spans (when a corpus is given),
/// rank uniqueness and score monotonicity. Errors carry 1-based line numbers.
pub fn ingest_records(
    records: impl IntoIterator<Item = (usize, RetrievedPhrase)>,
    corpus: Option<&Corpus>,
) -> Result<ResultSet> {
    let mut grouped: ResultSet = BTreeMap::new();
    let mut ranks: HashSet<(String, u32)> = HashSet::new();
    let mut lines: BTreeMap<(String, u32), usize> = BTreeMap::new();
    for (line, rec) in records {
        if rec.rank == 0 {
            return Err(Error::data_at(line, "rank must be positive"));
        }
        if !rec.score.is_finite() {
            return Err(Error::data_at(line, "score is not finite"));
        }
        if let Some(c) = corpus {
            validate_against(&rec, c).map_err(|e| match e {
                Error::Data { message, .. } => Error::data_at(line, message),
                other => other,
            })?;
        }
        let key = (rec.question_id.clone(), rec.rank);
        if !ranks.insert(key.clone()) {
            return Err(Error::data_at(
                line,
                format!(
                    "duplicate rank {} for question {:?}",
                    rec.rank, rec.question_id
                ),
            ));
        }
        lines.insert(key, line);
        grouped
            .entry(rec.question_id.clone())
            .or_default()
            .push(rec);
    }
    for (qid, list) in grouped.iter_mut() {
        list.sort_by_key(|r| r.rank);
        for pair in list.windows(2) {
            if pair[1].score > pair[0].score {
                let line = lines[&(qid.clone(), pair[1].rank)];
                return Err(Error::data_at(
                    line,
                    format!(
                        "question {qid:?}: score rises from rank {} to rank {}",
                        pair[0].rank, pair[1].rank
                    ),
                ));
            }
        }
    }
    Ok(grouped)
}

/// Parse a line-delimited retrieval-results stream.
pub fn ingest_results(reader: impl BufRead, corpus: Option<&Corpus>) -> Result<ResultSet> {
    let mut records = Vec::new();
    for (i, line) in reader.lines().enumerate() {
        let line = line.map_err(|e| Error::data_at(i + 1, e.to_string()))?;
        if line.trim().is_empty() {
            continue;
        }
        let rec: RetrievedPhrase = serde_json::from_str(&line)
            .map_err(|e| Error::data_at(i + 1, format!("malformed result record: {e}")))?;
        records.push((i + 1, rec));
    }
    ingest_records(records, corpus)
}

pub fn load_results(path: &Path, corpus: Option<&Corpus>) -> Result<ResultSet> {
    let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
    ingest_results(std::io::BufReader::new(file), corpus).map_err(|e| e.in_file(path))
}

/// Serialize in question-id then rank order, one record per line.
pub fn serialize_results(results: &ResultSet) -> String {
    let mut out = String::new();
    for list in results.values() {
        for rec in list {
            out.push_str(&serde_json::to_string(rec).expect("result records serialize"));
            out.push('\n');
        }
    }
    out
}
