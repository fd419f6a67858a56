//! Entity-level precision/recall/F1 with conlleval semantics, plus the
//! retrieval measures P@k and Diversity.

use std::collections::{BTreeMap, BTreeSet, HashMap, HashSet};
use std::io::BufRead;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::annotator::{LabeledSentence, Tag};
use crate::error::{Error, Result};
use crate::retrieval::RetrievedPhrase;
use crate::text::fold_case;

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub struct Entity {
    pub sentence: String,
    pub start: usize,
    pub end: usize,
    pub entity_type: String,
}

pub type EntitySet = BTreeSet<Entity>;

/// `(start, end, type)` runs. `B` always opens; an `I-t` that does not
/// continue an entity of type t opens a new one.
pub fn extract_entities(tags: &[Tag]) -> Vec<(usize, usize, String)> {
    let mut out = Vec::new();
    let mut open: Option<(usize, String)> = None;
    for (i, tag) in tags.iter().enumerate() {
        match tag {
            Tag::O => {
                if let Some((s, t)) = open.take() {
                    out.push((s, i, t));
                }
            }
            Tag::B(t) => {
                if let Some((s, prev)) = open.take() {
                    out.push((s, i, prev));
                }
                open = Some((i, t.clone()));
            }
            Tag::I(t) => match &open {
                Some((_, prev)) if prev == t => {}
                _ => {
                    if let Some((s, prev)) = open.take() {
                        out.push((s, i, prev));
                    }
                    open = Some((i, t.clone()));
                }
            },
        }
    }
    if let Some((s, t)) = open {
        out.push((s, tags.len(), t));
    }
    out
}

pub fn entity_set(sentences: &[LabeledSentence]) -> EntitySet {
    sentences
        .iter()
        .flat_map(|s| {
            extract_entities(&s.tags)
                .into_iter()
                .map(move |(start, end, entity_type)| Entity {
                    sentence: s.sentence_id.clone(),
                    start,
                    end,
                    entity_type,
                })
        })
        .collect()
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Prf {
    #[serde(rename = "P")]
    pub precision: f64,
    #[serde(rename = "R")]
    pub recall: f64,
    #[serde(rename = "F1")]
    pub f1: f64,
}

impl Prf {
    pub fn from_counts(correct: usize, predicted: usize, gold: usize) -> Self {
        let precision = if predicted == 0 {
            0.0
        } else {
            correct as f64 / predicted as f64
        };
        let recall = if gold == 0 {
            0.0
        } else {
            correct as f64 / gold as f64
        };
        let f1 = if precision + recall == 0.0 {
            0.0
        } else {
            2.0 * precision * recall / (precision + recall)
        };
        Prf {
            precision,
            recall,
            f1,
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct TypeScore {
    pub correct: usize,
    pub predicted: usize,
    pub gold: usize,
    #[serde(flatten)]
    pub scores: Prf,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct EntityReport {
    pub overall: Prf,
    pub correct: usize,
    pub predicted: usize,
    pub gold: usize,
    pub per_type: BTreeMap<String, TypeScore>,
}

/// Micro-averaged exact-match scores plus per-type counts.
pub fn entity_f1(gold: &EntitySet, pred: &EntitySet) -> EntityReport {
    let correct = gold.intersection(pred).count();
    let mut per: BTreeMap<String, TypeScore> = BTreeMap::new();
    for e in gold {
        per.entry(e.entity_type.clone()).or_default().gold += 1;
    }
    for e in pred {
        let row = per.entry(e.entity_type.clone()).or_default();
        row.predicted += 1;
        if gold.contains(e) {
            row.correct += 1;
        }
    }
    for row in per.values_mut() {
        row.scores = Prf::from_counts(row.correct, row.predicted, row.gold);
    }
    EntityReport {
        overall: Prf::from_counts(correct, pred.len(), gold.len()),
        correct,
        predicted: pred.len(),
        gold: gold.len(),
        per_type: per,
    }
}

/// Score predicted sentences against gold sentences paired by position.
pub fn evaluate_sentences(
    gold: &[LabeledSentence],
    pred: &[LabeledSentence],
) -> Result<EntityReport> {
    if gold.len() != pred.len() {
        return Err(Error::data(format!(
            "gold has {} sentences, prediction has {}",
            gold.len(),
            pred.len()
        )));
    }
    let mut g = EntitySet::new();
    let mut p = EntitySet::new();
    for (i, (gs, ps)) in gold.iter().zip(pred).enumerate() {
        if gs.tokens.len() != ps.tags.len() {
            return Err(Error::data(format!(
                "sentence {i}: gold has {} tokens, prediction has {} tags",
                gs.tokens.len(),
                ps.tags.len()
            )));
        }
        let id = i.to_string();
        for (start, end, entity_type) in extract_entities(&gs.tags) {
            g.insert(Entity {
                sentence: id.clone(),
                start,
                end,
                entity_type,
            });
        }
        for (start, end, entity_type) in extract_entities(&ps.tags) {
            p.insert(Entity {
                sentence: id.clone(),
                start,
                end,
                entity_type,
            });
        }
    }
    Ok(entity_f1(&g, &p))
}

/// Human-readable report in the usual conlleval layout.
pub fn render_report(r: &EntityReport) -> String {
    let mut out = format!(
        "found: {} phrases; correct: {}; gold: {}.\nprecision: {:6.2}%; recall: {:6.2}%; FB1: {:6.2}\n",
        r.predicted,
        r.correct,
        r.gold,
        100.0 * r.overall.precision,
        100.0 * r.overall.recall,
        100.0 * r.overall.f1
    );
    for (t, s) in &r.per_type {
        out.push_str(&format!(
            "{:>17}: precision: {:6.2}%; recall: {:6.2}%; FB1: {:6.2}  {}\n",
            t,
            100.0 * s.scores.precision,
            100.0 * s.scores.recall,
            100.0 * s.scores.f1,
            s.predicted
        ));
    }
    out
}

/// `(question_id, rank) → correct` judgments.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct RetrievalJudgments(pub HashMap<(String, u32), bool>);

#[derive(Deserialize)]
struct JudgmentRecord {
    question_id: String,
    rank: u32,
    correct: bool,
}

impl RetrievalJudgments {
    pub fn read(reader: impl BufRead) -> Result<Self> {
        let mut map = HashMap::new();
        for (i, line) in reader.lines().enumerate() {
            let line = line.map_err(|e| Error::data_at(i + 1, e.to_string()))?;
            if line.trim().is_empty() {
                continue;
            }
            let r: JudgmentRecord = serde_json::from_str(&line)
                .map_err(|e| Error::data_at(i + 1, format!("malformed judgment: {e}")))?;
            if map
                .insert((r.question_id.clone(), r.rank), r.correct)
                .is_some()
            {
                return Err(Error::data_at(
                    i + 1,
                    format!("duplicate judgment for {:?} rank {}", r.question_id, r.rank),
                ));
            }
        }
        Ok(RetrievalJudgments(map))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
        Self::read(std::io::BufReader::new(file)).map_err(|e| e.in_file(path))
    }

    pub fn get(&self, question_id: &str, rank: u32) -> Option<bool> {
        self.0.get(&(question_id.to_string(), rank)).copied()
    }
}

/// Fraction judged correct among the first `min(k, |results|)` results.
/// An empty prefix scores 0.
pub fn precision_at_k(
    results: &[RetrievedPhrase],
    judgments: &RetrievalJudgments,
    k: usize,
) -> Result<f64> {
    let top = &results[..k.min(results.len())];
    if top.is_empty() {
        return Ok(0.0);
    }
    let mut hits = 0usize;
    for r in top {
        match judgments.get(&r.question_id, r.rank) {
            Some(true) => hits += 1,
            Some(false) => {}
            None => {
                return Err(Error::IncompleteJudgments {
                    question_id: r.question_id.clone(),
                    rank: r.rank,
                })
            }
        }
    }
    Ok(hits as f64 / top.len() as f64)
}

/// Distinct case-folded surfaces among the first `min(k, |results|)`.
pub fn diversity(results: &[RetrievedPhrase], k: usize) -> usize {
    results
        .iter()
        .take(k)
        .map(|r| fold_case(&r.surface))
        .collect::<HashSet<_>>()
        .len()
}
