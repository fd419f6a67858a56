//! Averaged structured perceptron with greedy left-to-right decoding.

use std::collections::{BTreeMap, HashMap};

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::Tagger;
use crate::annotator::{LabeledSentence, Tag};
use crate::error::{Error, Result};
use crate::text::fold_case;

/// Raw weight plus the running sum used for lazy averaging.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
struct Weight {
    w: i64,
    /// Sum of `update_time * delta`.
    u: i64,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
struct State {
    /// Label inventory; index 0 is always `O`, which makes it win exact ties.
    labels: Vec<Tag>,
    /// Number of updates (sentence steps) taken so far.
    updates: i64,
    weights: HashMap<String, Vec<Weight>>,
}

#[derive(Serialize)]
struct SortedState<'a> {
    labels: &'a [Tag],
    updates: i64,
    weights: BTreeMap<&'a String, &'a Vec<Weight>>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Perceptron {
    state: State,
}

impl Default for Perceptron {
    fn default() -> Self {
        Self::new()
    }
}

impl Perceptron {
    pub fn new() -> Self {
        Perceptron {
            state: State {
                labels: vec![Tag::O],
                updates: 0,
                weights: HashMap::new(),
            },
        }
    }

    pub fn labels(&self) -> &[Tag] {
        &self.state.labels
    }

    fn label_index(&mut self, tag: &Tag) -> usize {
        if let Some(i) = self.state.labels.iter().position(|l| l == tag) {
            return i;
        }
        // Register both halves of a type so the decoder can always continue
        // an entity it opened.
        let t = tag.entity_type().expect("O is always present").to_string();
        for l in [Tag::B(t.clone()), Tag::I(t)] {
            if !self.state.labels.contains(&l) {
                self.state.labels.push(l);
            }
        }
        self.state.labels.iter().position(|l| l == tag).unwrap()
    }

    fn scores(&self, feats: &[String], averaged: bool) -> Vec<f64> {
        let n = self.state.labels.len();
        let mut out = vec![0.0; n];
        let c = self.state.updates;
        for f in feats {
            if let Some(ws) = self.state.weights.get(f) {
                for (i, w) in ws.iter().enumerate().take(n) {
                    out[i] += if averaged && c > 0 {
                        w.w as f64 - w.u as f64 / c as f64
                    } else {
                        w.w as f64
                    };
                }
            }
        }
        out
    }

    /// With `gold` given (training), exact ties go against the gold label so
    /// updates continue until it wins by a margin.
    fn decode(&self, words: &[String], averaged: bool, gold: Option<&[usize]>) -> Vec<usize> {
        let mut out: Vec<usize> = Vec::with_capacity(words.len());
        for i in 0..words.len() {
            let prev = out.last().map(|&p| &self.state.labels[p]);
            let feats = features(words, i, prev);
            let scores = self.scores(&feats, averaged);
            let mut best: Option<(usize, f64)> = None;
            for (j, label) in self.state.labels.iter().enumerate() {
                if !label.may_follow(prev) {
                    continue;
                }
                let against_gold = |b: usize| gold.is_some_and(|g| g[i] == b);
                if best.is_none_or(|(b, s)| scores[j] > s || (scores[j] == s && against_gold(b))) {
                    best = Some((j, scores[j]));
                }
            }
            out.push(best.map_or(0, |(j, _)| j));
        }
        out
    }

    fn update(&mut self, words: &[String], gold: &[usize], guess: &[usize]) {
        let time = self.state.updates;
        let n = self.state.labels.len();
        for i in 0..words.len() {
            let gold_prev = i.checked_sub(1).map(|p| self.state.labels[gold[p]].clone());
            let guess_prev = i
                .checked_sub(1)
                .map(|p| self.state.labels[guess[p]].clone());
            if gold[i] == guess[i] && gold_prev == guess_prev {
                continue;
            }
            for (label, prev, delta) in [(gold[i], gold_prev, 1i64), (guess[i], guess_prev, -1i64)]
            {
                for f in features(words, i, prev.as_ref()) {
                    let ws = self.state.weights.entry(f).or_default();
                    if ws.len() < n {
                        ws.resize(n, Weight::default());
                    }
                    ws[label].w += delta;
                    ws[label].u += time * delta;
                }
            }
        }
    }
}

fn shape(word: &str) -> String {
    let mut out = String::new();
    for c in word.chars() {
        let s = if c.is_uppercase() {
            'X'
        } else if c.is_lowercase() {
            'x'
        } else if c.is_numeric() {
            'd'
        } else {
            c
        };
        if !out.ends_with(s) {
            out.push(s);
        }
    }
    out
}

fn affix(word: &str, prefix: bool) -> String {
    let chars: Vec<char> = word.chars().collect();
    let k = chars.len().min(3);
    if prefix {
        chars[..k].iter().collect()
    } else {
        chars[chars.len() - k..].iter().collect()
    }
}

fn features(words: &[String], i: usize, prev: Option<&Tag>) -> Vec<String> {
    let w = &words[i];
    let lw = fold_case(w);
    let pw = i
        .checked_sub(1)
        .map_or("<s>".to_string(), |p| fold_case(&words[p]));
    let nw = words
        .get(i + 1)
        .map_or("</s>".to_string(), |n| fold_case(n));
    let pt = prev.map_or("<s>".to_string(), |t| t.to_string());
    vec![
        "bias".to_string(),
        format!("w={lw}"),
        format!("shape={}", shape(w)),
        format!("p3={}", affix(&lw, true)),
        format!("s3={}", affix(&lw, false)),
        format!("pw={pw}"),
        format!("nw={nw}"),
        format!("pt={pt}"),
    ]
}

impl Tagger for Perceptron {
    fn train(&mut self, data: &[LabeledSentence], steps: usize, seed: u64) -> Result<()> {
        if steps == 0 {
            return Ok(());
        }
        if data.is_empty() {
            return Err(Error::InvalidArgument("training data is empty".into()));
        }
        let mut gold = Vec::with_capacity(data.len());
        for s in data {
            if s.tokens.len() != s.tags.len() || !s.is_well_formed() {
                return Err(Error::data(format!(
                    "sentence {:?} is not a well-formed BIO sequence",
                    s.sentence_id
                )));
            }
            gold.push(
                s.tags
                    .iter()
                    .map(|t| self.label_index(t))
                    .collect::<Vec<_>>(),
            );
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut order: Vec<usize> = Vec::new();
        for _ in 0..steps {
            if order.is_empty() {
                order = (0..data.len()).collect();
                order.shuffle(&mut rng);
                order.reverse();
            }
            let k = order.pop().unwrap();
            let guess = self.decode(&data[k].tokens, false, Some(&gold[k]));
            if guess != gold[k] {
                self.update(&data[k].tokens, &gold[k], &guess);
            }
            self.state.updates += 1;
        }
        Ok(())
    }

    fn predict(&self, sentences: &[Vec<String>]) -> Vec<Vec<Tag>> {
        sentences
            .iter()
            .map(|words| {
                self.decode(words, true, None)
                    .into_iter()
                    .map(|j| self.state.labels[j].clone())
                    .collect()
            })
            .collect()
    }

    fn snapshot(&self) -> Vec<u8> {
        let sorted = SortedState {
            labels: &self.state.labels,
            updates: self.state.updates,
            weights: self.state.weights.iter().collect(),
        };
        serde_json::to_vec(&sorted).expect("perceptron state serializes")
    }

    fn restore(&mut self, state: &[u8]) -> Result<()> {
        let s: State = serde_json::from_slice(state)
            .map_err(|e| Error::data(format!("unreadable tagger state: {e}")))?;
        if s.labels.first() != Some(&Tag::O) {
            return Err(Error::data("tagger state must list O first"));
        }
        self.state = s;
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::annotator::is_well_formed;
    use proptest::prelude::*;

    fn sentence(pairs: &[(&str, &str)]) -> LabeledSentence {
        LabeledSentence {
            sentence_id: "0".into(),
            tokens: pairs.iter().map(|(w, _)| w.to_string()).collect(),
            tags: pairs.iter().map(|(_, t)| t.parse().unwrap()).collect(),
        }
    }

    #[test]
    fn fits_a_single_sentence() {
        let s = sentence(&[
            ("Yesterday", "O"),
            ("Angela", "B-person"),
            ("Merkel", "I-person"),
            ("visited", "O"),
            ("New", "B-location"),
            ("York", "I-location"),
            (".", "O"),
        ]);
        let mut p = Perceptron::new();
        p.train(std::slice::from_ref(&s), 20, 7).unwrap();
        assert_eq!(
            p.predict(std::slice::from_ref(&s.tokens)),
            vec![s.tags.clone()]
        );
    }

    #[test]
    fn untrained_predicts_all_o() {
        let p = Perceptron::new();
        let words: Vec<String> = ["a", "B", "c"].iter().map(|s| s.to_string()).collect();
        assert_eq!(p.predict(&[words]), vec![vec![Tag::O; 3]]);
    }

    #[test]
    fn snapshot_restore_is_exact() {
        let s = sentence(&[("Paris", "B-location"), ("is", "O"), ("big", "O")]);
        let mut p = Perceptron::new();
        p.train(std::slice::from_ref(&s), 5, 1).unwrap();
        let snap = p.snapshot();
        let mut q = Perceptron::new();
        q.restore(&snap).unwrap();
        assert_eq!(q.snapshot(), snap);
        assert_eq!(
            q.predict(std::slice::from_ref(&s.tokens)),
            p.predict(std::slice::from_ref(&s.tokens))
        );
        assert!(q.restore(b"nope").is_err());
    }

    #[test]
    fn shapes() {
        assert_eq!(shape("Paris"), "Xx");
        assert_eq!(shape("NASA"), "X");
        assert_eq!(shape("1984"), "d");
        assert_eq!(shape("A-1"), "X-d");
    }

    #[test]
    fn rejects_ill_formed_training_data() {
        let s = sentence(&[("x", "O"), ("y", "I-a")]);
        assert!(Perceptron::new().train(&[s], 1, 0).is_err());
    }

    proptest! {
        // Arbitrary (even adversarial) weights never yield I-t after O or
        // after a different type.
        #[test]
        fn decoder_respects_transitions(
            entries in proptest::collection::vec(("[a-c]", 0usize..5, -5i64..5), 0..40),
            words in proptest::collection::vec("[a-c]", 1..12),
        ) {
            let mut p = Perceptron::new();
            for t in ["x", "y"] {
                p.label_index(&Tag::B(t.into()));
            }
            for (w, label, value) in entries {
                let ws = p.state.weights.entry(format!("w={w}")).or_insert_with(|| vec![Weight::default(); 5]);
                ws[label].w = value;
            }
            p.state.weights.insert("bias".into(), vec![
                Weight { w: -9, u: 0 },
                Weight { w: 0, u: 0 },
                Weight { w: 9, u: 0 },
                Weight { w: 0, u: 0 },
                Weight { w: 9, u: 0 },
            ]);
            let words: Vec<String> = words;
            let tags = p.predict(std::slice::from_ref(&words)).remove(0);
            prop_assert_eq!(tags.len(), words.len());
            prop_assert!(is_well_formed(&tags));
        }
    }
}
