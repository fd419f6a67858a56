//! Teacher/student self-training over a pluggable sequence tagger.

mod perceptron;

use std::path::Path;

use serde::{Deserialize, Serialize};

pub use perceptron::Perceptron;

use crate::annotator::{is_well_formed, LabeledSentence, Tag};
use crate::error::{Error, Result};
use crate::fsutil::write_atomic;
use crate::metrics::{evaluate_sentences, Prf};

/// A trainable BIO tagger. `predict` must return one well-formed tag
/// sequence per input, of the same length.
pub trait Tagger {
    /// Apply `steps` training updates. What a step is belongs to the tagger;
    /// the baseline counts single-sentence updates.
    fn train(&mut self, data: &[LabeledSentence], steps: usize, seed: u64) -> Result<()>;
    fn predict(&self, sentences: &[Vec<String>]) -> Vec<Vec<Tag>>;
    /// Opaque parameter state. Equal states must produce equal bytes.
    fn snapshot(&self) -> Vec<u8>;
    fn restore(&mut self, state: &[u8]) -> Result<()>;
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SelfTrainConfig {
    pub t_begin: usize,
    pub t_update: usize,
    /// Bound on total student steps across all rounds.
    pub max_iterations: usize,
    pub seed: u64,
}

impl SelfTrainConfig {
    /// Schedule with the default bound of five replacement periods.
    pub fn new(t_begin: usize, t_update: usize, seed: u64) -> Self {
        SelfTrainConfig {
            t_begin,
            t_update,
            max_iterations: 5 * t_update,
            seed,
        }
    }

    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("t_begin", self.t_begin),
            ("t_update", self.t_update),
            ("max_iterations", self.max_iterations),
        ] {
            if v == 0 {
                return Err(Error::Config(format!("{name} must be at least 1")));
            }
        }
        Ok(())
    }

    /// Per-round student step counts: full periods, then one truncated round.
    pub fn round_steps(&self) -> Vec<usize> {
        let mut out = Vec::new();
        let mut done = 0;
        while done < self.max_iterations {
            let s = self.t_update.min(self.max_iterations - done);
            out.push(s);
            done += s;
        }
        out
    }
}

/// Warm-up and replacement period for the bundled benchmark presets.
pub fn schedule_preset(name: &str) -> Option<(usize, usize)> {
    Some(match name {
        "conll2003" => (900, 300),
        "wikigold" => (500, 300),
        "wnut16" => (900, 450),
        "ncbi-disease" => (900, 300),
        "bc5cdr" => (500, 200),
        "chemdner" => (900, 300),
        "crossner-enzyme" => (350, 700),
        "crossner-astronomical-object" => (500, 300),
        "crossner-award" => (350, 400),
        "crossner-conference" => (200, 100),
        _ => return None,
    })
}

pub const SCHEDULE_PRESETS: [&str; 10] = [
    "conll2003",
    "wikigold",
    "wnut16",
    "ncbi-disease",
    "bc5cdr",
    "chemdner",
    "crossner-enzyme",
    "crossner-astronomical-object",
    "crossner-award",
    "crossner-conference",
];

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RoundLog {
    pub round: usize,
    /// Steps embodied in the teacher that produced this round's pseudo-labels.
    pub teacher_steps: usize,
    /// Steps the student trained this round.
    pub student_steps: usize,
    /// Student steps so far, this round included.
    pub total_student_steps: usize,
    pub validation_f1: f64,
    pub validation_precision: f64,
    pub validation_recall: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Checkpoint {
    pub state: Vec<u8>,
    pub round: usize,
    /// Cumulative student steps at the time of the snapshot.
    pub step: usize,
    pub validation: Prf,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CheckpointMeta {
    pub step: usize,
    pub round: usize,
    pub f1: f64,
    pub seed: u64,
    pub config_hash: String,
}

impl Checkpoint {
    /// Write `<stem>.bin` and `<stem>.json` side by side.
    pub fn save(&self, dir: &Path, stem: &str, seed: u64, config_hash: &str) -> Result<()> {
        let blob = dir.join(format!("{stem}.bin"));
        write_atomic(&blob, &self.state)?;
        let meta = CheckpointMeta {
            step: self.step,
            round: self.round,
            f1: self.validation.f1,
            seed,
            config_hash: config_hash.to_string(),
        };
        let mut json = serde_json::to_vec_pretty(&meta).expect("metadata serializes");
        json.push(b'\n');
        write_atomic(&dir.join(format!("{stem}.json")), &json)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SelfTrainOutcome {
    /// The teacher after warm-up, before any replacement.
    pub warmup: Prf,
    pub rounds: Vec<RoundLog>,
    pub best: Checkpoint,
}

impl SelfTrainOutcome {
    pub fn log_jsonl(&self) -> String {
        let mut out = String::new();
        for r in &self.rounds {
            out.push_str(&serde_json::to_string(r).expect("log records serialize"));
            out.push('\n');
        }
        out
    }
}

/// Called after every teacher replacement with (round, teacher, student)
/// snapshots.
pub type ReplacementHook<'a> = dyn FnMut(usize, &[u8], &[u8]) + 'a;

fn round_seed(seed: u64, round: usize) -> u64 {
    seed.wrapping_add((round as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15))
}

fn evaluate<T: Tagger>(tagger: &T, validation: &[LabeledSentence]) -> Result<Prf> {
    let tokens: Vec<Vec<String>> = validation.iter().map(|s| s.tokens.clone()).collect();
    let pred = label(tagger, validation, &tokens)?;
    Ok(evaluate_sentences(validation, &pred)?.overall)
}

fn label<T: Tagger>(
    tagger: &T,
    like: &[LabeledSentence],
    tokens: &[Vec<String>],
) -> Result<Vec<LabeledSentence>> {
    let tags = tagger.predict(tokens);
    if tags.len() != tokens.len() {
        return Err(Error::Invariant(
            "tagger returned wrong number of sequences".into(),
        ));
    }
    like.iter()
        .zip(tokens)
        .zip(tags)
        .map(|((s, toks), tags)| {
            if tags.len() != toks.len() || !is_well_formed(&tags) {
                return Err(Error::Invariant(format!(
                    "tagger produced an ill-formed sequence for sentence {:?}",
                    s.sentence_id
                )));
            }
            Ok(LabeledSentence {
                sentence_id: s.sentence_id.clone(),
                tokens: toks.clone(),
                tags,
            })
        })
        .collect()
}

pub fn run_self_training<T, F>(
    generated: &[LabeledSentence],
    validation: &[LabeledSentence],
    factory: F,
    config: &SelfTrainConfig,
) -> Result<SelfTrainOutcome>
where
    T: Tagger,
    F: Fn() -> T,
{
    run_self_training_with_hook(generated, validation, factory, config, &mut |_, _, _| {})
}

/// The unlabeled side is the generated sentences themselves, relabeled by
/// the teacher every round.
pub fn run_self_training_with_hook<T, F>(
    generated: &[LabeledSentence],
    validation: &[LabeledSentence],
    factory: F,
    config: &SelfTrainConfig,
    hook: &mut ReplacementHook<'_>,
) -> Result<SelfTrainOutcome>
where
    T: Tagger,
    F: Fn() -> T,
{
    config.validate()?;
    if generated.is_empty() {
        return Err(Error::InvalidArgument("generated dataset is empty".into()));
    }
    if validation.is_empty() {
        return Err(Error::InvalidArgument("validation set is empty".into()));
    }
    let unlabeled: Vec<Vec<String>> = generated.iter().map(|s| s.tokens.clone()).collect();

    let mut teacher = factory();
    teacher
        .train(generated, config.t_begin, config.seed)
        .map_err(|e| Error::Tagger {
            round: 0,
            message: e.to_string(),
        })?;
    let warmup = evaluate(&teacher, validation)?;

    let mut rounds = Vec::new();
    let mut best: Option<Checkpoint> = None;
    let mut teacher_steps = config.t_begin;
    let mut total = 0;
    for (i, steps) in config.round_steps().into_iter().enumerate() {
        let round = i + 1;
        let pseudo = label(&teacher, generated, &unlabeled)?;
        let mut student = factory();
        student.restore(&teacher.snapshot())?;
        student
            .train(&pseudo, steps, round_seed(config.seed, round))
            .map_err(|e| Error::Tagger {
                round,
                message: e.to_string(),
            })?;
        total += steps;
        let scores = evaluate(&student, validation)?;
        let state = student.snapshot();
        rounds.push(RoundLog {
            round,
            teacher_steps,
            student_steps: steps,
            total_student_steps: total,
            validation_f1: scores.f1,
            validation_precision: scores.precision,
            validation_recall: scores.recall,
        });
        if best.as_ref().is_none_or(|b| scores.f1 > b.validation.f1) {
            best = Some(Checkpoint {
                state: state.clone(),
                round,
                step: total,
                validation: scores,
            });
        }
        teacher.restore(&state)?;
        hook(round, &teacher.snapshot(), &state);
        teacher_steps += steps;
    }
    let best = best.ok_or_else(|| Error::Invariant("no self-training round ran".into()))?;
    Ok(SelfTrainOutcome {
        warmup,
        rounds,
        best,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn schedule_arithmetic() {
        let c = SelfTrainConfig {
            t_begin: 4,
            t_update: 2,
            max_iterations: 6,
            seed: 0,
        };
        assert_eq!(c.round_steps(), vec![2, 2, 2]);
        let c = SelfTrainConfig {
            t_begin: 4,
            t_update: 5,
            max_iterations: 3,
            seed: 0,
        };
        assert_eq!(c.round_steps(), vec![3]);
        let c = SelfTrainConfig {
            t_begin: 1,
            t_update: 4,
            max_iterations: 4,
            seed: 0,
        };
        assert_eq!(c.round_steps(), vec![4]);
        let c = SelfTrainConfig {
            t_begin: 1,
            t_update: 4,
            max_iterations: 9,
            seed: 0,
        };
        assert_eq!(c.round_steps(), vec![4, 4, 1]);
        assert!(SelfTrainConfig {
            t_begin: 0,
            t_update: 1,
            max_iterations: 1,
            seed: 0
        }
        .validate()
        .is_err());
    }

    #[test]
    fn presets() {
        assert_eq!(schedule_preset("conll2003"), Some((900, 300)));
        assert_eq!(schedule_preset("bc5cdr"), Some((500, 200)));
        assert_eq!(schedule_preset("nope"), None);
        for p in SCHEDULE_PRESETS {
            assert!(schedule_preset(p).is_some());
        }
    }

    /// Counts steps; its "validation F1" is read back from the state.
    #[derive(Default)]
    struct Counter {
        steps: usize,
    }

    impl Tagger for Counter {
        fn train(&mut self, _: &[LabeledSentence], steps: usize, _: u64) -> Result<()> {
            self.steps += steps;
            Ok(())
        }
        fn predict(&self, s: &[Vec<String>]) -> Vec<Vec<Tag>> {
            s.iter().map(|t| vec![Tag::O; t.len()]).collect()
        }
        fn snapshot(&self) -> Vec<u8> {
            self.steps.to_le_bytes().to_vec()
        }
        fn restore(&mut self, b: &[u8]) -> Result<()> {
            self.steps = usize::from_le_bytes(b.try_into().unwrap());
            Ok(())
        }
    }

    fn data() -> Vec<LabeledSentence> {
        vec![LabeledSentence {
            sentence_id: "0".into(),
            tokens: vec!["Paris".into()],
            tags: vec![Tag::B("loc".into())],
        }]
    }

    #[test]
    fn steps_accumulate_through_replacements() {
        let c = SelfTrainConfig {
            t_begin: 4,
            t_update: 2,
            max_iterations: 6,
            seed: 0,
        };
        let mut seen = Vec::new();
        let out =
            run_self_training_with_hook(&data(), &data(), Counter::default, &c, &mut |r, t, s| {
                assert_eq!(t, s);
                seen.push((r, usize::from_le_bytes(t.try_into().unwrap())));
            })
            .unwrap();
        assert_eq!(seen, vec![(1, 6), (2, 8), (3, 10)]);
        let teacher: Vec<_> = out.rounds.iter().map(|r| r.teacher_steps).collect();
        assert_eq!(teacher, vec![4, 6, 8]);
        // All-zero F1: earliest round wins.
        assert_eq!(out.best.round, 1);
        assert_eq!(out.best.step, 2);
    }

    #[test]
    fn empty_inputs_rejected() {
        let c = SelfTrainConfig::new(1, 1, 0);
        assert!(run_self_training(&[], &data(), Counter::default, &c).is_err());
        assert!(run_self_training(&data(), &[], Counter::default, &c).is_err());
    }
}
