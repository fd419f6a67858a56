use std::collections::{BTreeMap, HashSet};
use std::path::{Path, PathBuf};
use std::time::{Duration, Instant};

use serde::Serialize;

use super::config::{PipelineConfig, DEFAULT_TOP_N};
use crate::annotator::{
    annotate, build_dictionary, emit_bio, load_quality_phrases, read_conll, write_conll, Tag,
};
use crate::error::{Error, Result};
use crate::fsutil::{file_digest, sha256_hex, write_atomic};
use crate::metrics::{
    diversity, evaluate_sentences, precision_at_k, render_report, EntityReport, Prf,
    RetrievalJudgments,
};
use crate::normalizer::normalize;
use crate::querygen::{build_question_set, SubQuestion};
use crate::retrieval::{
    collect_training_sentences, fetch_to_replay, load_results, serialize_results, toy_retrieve,
    Corpus, CorpusSentence, RemoteOptions, ResultSet, RetrievedPhrase,
};
use crate::selftrain::{run_self_training, Perceptron, RoundLog, Tagger};

pub const DATASET_FILE: &str = "dataset.conll";
pub const DICTIONARY_FILE: &str = "dictionary.tsv";
pub const MANIFEST_FILE: &str = "manifest.json";
pub const REPLAY_FILE: &str = "results.jsonl";

fn stage<T>(name: &'static str, r: Result<T>) -> Result<T> {
    r.map_err(|e| e.in_stage(name))
}

/// Per-stage record counts of a generate run.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct StageCounts {
    pub questions: usize,
    pub phrases_retrieved: usize,
    pub phrases_in_budget: usize,
    pub training_sentences: usize,
    pub phrases_normalized: usize,
    pub dictionary_size: usize,
    pub matches: usize,
    pub labeled_entities: usize,
    pub labeled_sentences: usize,
}

#[derive(Clone, Debug, Serialize)]
pub struct RunManifest {
    pub command: String,
    pub config_hash: String,
    pub seed: u64,
    pub inputs: BTreeMap<String, String>,
    pub counts: StageCounts,
    pub timings_ms: BTreeMap<String, u128>,
    pub outputs: BTreeMap<String, String>,
}

#[derive(Clone, Debug)]
pub struct GenerateOutput {
    pub dataset: PathBuf,
    pub dictionary: PathBuf,
    pub manifest: PathBuf,
    pub counts: StageCounts,
    /// Resolved spans, for callers that check conservation.
    pub spans: usize,
}

struct Timer(BTreeMap<String, u128>, Instant);

impl Timer {
    fn new() -> Self {
        Timer(BTreeMap::new(), Instant::now())
    }
    fn lap(&mut self, name: &str) {
        self.0
            .insert(name.to_string(), self.1.elapsed().as_millis());
        self.1 = Instant::now();
    }
}

fn log_stage(stage: &str, count: usize) {
    log::info!("{}", serde_json::json!({ "stage": stage, "count": count }));
}

fn remote_options(config: &PipelineConfig) -> RemoteOptions {
    let mut o = RemoteOptions::default();
    if let Some(t) = config.retrieval.timeout_secs {
        o.timeout = Duration::from_secs(t);
    }
    if let Some(a) = config.retrieval.attempts {
        o.attempts = a;
    }
    o
}

/// Results per question from the configured source: a replay file, then a
/// remote endpoint, then the toy retriever.
fn retrieve(
    config: &PipelineConfig,
    questions: &[SubQuestion],
    corpus: &Corpus,
    inputs: &mut BTreeMap<String, String>,
) -> Result<ResultSet> {
    let top_n = config.retrieval.top_n.unwrap_or(DEFAULT_TOP_N);
    if let Some(path) = config.results_path()? {
        inputs.insert("results".into(), file_digest(&path)?);
        let mut set = load_results(&path, Some(corpus))?;
        let known: HashSet<&str> = questions.iter().map(|q| q.question_id.as_str()).collect();
        set.retain(|qid, _| {
            let keep = known.contains(qid.as_str());
            if !keep {
                log::warn!("results for undeclared question {qid:?} ignored");
            }
            keep
        });
        return Ok(set);
    }
    let mut set = ResultSet::new();
    if let Some(endpoint) = &config.retrieval.endpoint {
        // Remote answers always go through a replay file first.
        let out_dir = config.output_dir();
        std::fs::create_dir_all(&out_dir).map_err(|e| Error::io(&out_dir, e))?;
        let replay = out_dir.join(REPLAY_FILE);
        let options = remote_options(config);
        let set = fetch_to_replay(questions, endpoint, top_n, corpus, &options, &replay)?;
        inputs.insert("results".into(), file_digest(&replay)?);
        return Ok(set);
    }
    if config.retrieval.toy {
        for q in questions {
            set.insert(q.question_id.clone(), toy_retrieve(q, corpus, top_n)?);
        }
        return Ok(set);
    }
    Err(Error::Config(
        "no retrieval source: set [retrieval] results, endpoint or toy".into(),
    ))
}

pub fn cmd_generate(config: &PipelineConfig) -> Result<GenerateOutput> {
    let out_dir = config.output_dir();
    let dataset = out_dir.join(DATASET_FILE);
    let dictionary = out_dir.join(DICTIONARY_FILE);
    let manifest = out_dir.join(MANIFEST_FILE);
    let result = generate_into(config, &dataset, &dictionary, &manifest);
    if result.is_err() {
        for p in [&dataset, &dictionary, &manifest] {
            let _ = std::fs::remove_file(p);
        }
    }
    result
}

fn generate_into(
    config: &PipelineConfig,
    dataset_path: &Path,
    dictionary_path: &Path,
    manifest_path: &Path,
) -> Result<GenerateOutput> {
    let mut timer = Timer::new();
    let mut counts = StageCounts::default();
    let mut inputs = BTreeMap::new();

    // Pre-flight: everything referenced must exist before any work starts.
    let corpus_path = stage("config", config.corpus_path())?;
    let quality_path = stage("config", config.quality_phrases_path())?;
    stage("config", config.results_path())?;
    let base_rules = stage("config", config.rule_set())?;
    let questions = stage(
        "querygen",
        config
            .question_config()
            .and_then(|q| build_question_set(&q)),
    )?;
    counts.questions = questions.len();
    log_stage("questions", counts.questions);
    timer.lap("querygen");

    inputs.insert("corpus".into(), file_digest(&corpus_path)?);
    let corpus = stage("retrieval", Corpus::load(&corpus_path))?;
    let results = stage(
        "retrieval",
        retrieve(config, &questions, &corpus, &mut inputs),
    )?;
    counts.phrases_retrieved = results.values().map(Vec::len).sum();
    log_stage("phrases_retrieved", counts.phrases_retrieved);
    timer.lap("retrieval");

    let mut training: Vec<&CorpusSentence> = Vec::new();
    let mut seen: HashSet<&str> = HashSet::new();
    let mut normalized = Vec::new();
    for q in &questions {
        let list: &[RetrievedPhrase] = results.get(&q.question_id).map_or(&[], Vec::as_slice);
        let budget = collect_training_sentences(list, q.k_l);
        if budget.exhausted {
            log::warn!(
                "question {:?}: only {} of {} sentences available",
                q.question_id,
                budget.kept_sentences.len(),
                q.k_l
            );
        }
        counts.phrases_in_budget += budget.kept_phrases.len();
        for id in &budget.kept_sentences {
            let s = corpus
                .get(id)
                .ok_or_else(|| Error::Invariant(format!("kept unknown sentence {id:?}")))?;
            if seen.insert(s.sentence_id.as_str()) {
                training.push(s);
            }
        }
        let rules = base_rules.with_toggles(q.rule_toggles);
        for p in &budget.kept_phrases {
            let evidence = corpus.get(&p.sentence_id).expect("validated on ingest");
            normalized.extend(normalize(
                p,
                evidence,
                &rules,
                &q.type_label,
                &q.output_type,
            ));
        }
    }
    // Corpus order keeps the dataset independent of question order.
    let position: std::collections::HashMap<&str, usize> = corpus
        .sentences()
        .iter()
        .enumerate()
        .map(|(i, s)| (s.sentence_id.as_str(), i))
        .collect();
    training.sort_by_key(|s| position[s.sentence_id.as_str()]);
    counts.training_sentences = training.len();
    counts.phrases_normalized = normalized.len();
    log_stage("phrases_in_budget", counts.phrases_in_budget);
    log_stage("training_sentences", counts.training_sentences);
    log_stage("phrases_normalized", counts.phrases_normalized);
    timer.lap("normalize");

    let mut dict = build_dictionary(&normalized);
    if let Some(path) = &quality_path {
        inputs.insert("quality_phrases".into(), file_digest(path)?);
        dict.set_quality_phrases(stage("annotate", load_quality_phrases(path))?);
    }
    counts.dictionary_size = dict.len();
    log_stage("dictionary_size", counts.dictionary_size);

    let sentences: Vec<CorpusSentence> = training.into_iter().cloned().collect();
    let global = config.global_rules()?;
    let spans = stage("annotate", annotate(&dict, &sentences, &global))?;
    counts.matches = spans.len();
    let labeled = stage("annotate", emit_bio(&sentences, &spans))?;
    counts.labeled_entities = labeled
        .iter()
        .flat_map(|s| &s.tags)
        .filter(|t| matches!(t, Tag::B(_)))
        .count();
    if counts.labeled_entities != counts.matches {
        return Err(Error::Invariant(format!(
            "{} B tags for {} resolved matches",
            counts.labeled_entities, counts.matches
        )));
    }
    counts.labeled_sentences = labeled.len();
    log_stage("matches", counts.matches);
    log_stage("labeled_sentences", counts.labeled_sentences);
    timer.lap("annotate");

    let conll = stage("write", write_conll(&labeled))?;
    let tsv = dict.dump_tsv();
    if let Some(dir) = dataset_path.parent() {
        std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    }
    write_atomic(dataset_path, conll.as_bytes())?;
    write_atomic(dictionary_path, tsv.as_bytes())?;
    timer.lap("write");

    let manifest = RunManifest {
        command: "generate".into(),
        config_hash: config.hash(),
        seed: config.seed,
        inputs,
        counts: counts.clone(),
        timings_ms: timer.0,
        outputs: BTreeMap::from([
            (DATASET_FILE.to_string(), sha256_hex(conll.as_bytes())),
            (DICTIONARY_FILE.to_string(), sha256_hex(tsv.as_bytes())),
        ]),
    };
    write_json(manifest_path, &manifest)?;
    Ok(GenerateOutput {
        dataset: dataset_path.to_path_buf(),
        dictionary: dictionary_path.to_path_buf(),
        manifest: manifest_path.to_path_buf(),
        counts,
        spans: spans.len(),
    })
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut bytes = serde_json::to_vec_pretty(value).expect("reports serialize");
    bytes.push(b'\n');
    write_atomic(path, &bytes)
}

/// Fetch (or toy-retrieve) every question and write a replay file.
pub fn cmd_retrieve(config: &PipelineConfig) -> Result<PathBuf> {
    let questions = stage(
        "querygen",
        config
            .question_config()
            .and_then(|q| build_question_set(&q)),
    )?;
    let corpus = stage("retrieval", Corpus::load(&config.corpus_path()?))?;
    let mut inputs = BTreeMap::new();
    let mut no_replay = config.clone();
    no_replay.retrieval.results = None;
    let set = stage(
        "retrieval",
        retrieve(&no_replay, &questions, &corpus, &mut inputs),
    )?;
    let out_dir = config.output_dir();
    std::fs::create_dir_all(&out_dir).map_err(|e| Error::io(&out_dir, e))?;
    let path = out_dir.join(REPLAY_FILE);
    write_atomic(&path, serialize_results(&set).as_bytes())?;
    // Whatever was written must read back cleanly.
    stage("retrieval", load_results(&path, Some(&corpus)))?;
    log_stage("phrases_retrieved", set.values().map(Vec::len).sum());
    Ok(path)
}

#[derive(Clone, Debug, Serialize)]
pub struct SelfTrainReport {
    pub config_hash: String,
    pub seed: u64,
    pub t_begin: usize,
    pub t_update: usize,
    pub max_iterations: usize,
    pub inputs: BTreeMap<String, String>,
    /// The warmed-up teacher before any replacement.
    pub teacher: Prf,
    pub best_round: usize,
    pub best_step: usize,
    pub best: EntityReport,
    pub rounds: Vec<RoundLog>,
}

pub fn cmd_selftrain(config: &PipelineConfig) -> Result<SelfTrainReport> {
    let schedule = stage("config", config.selftrain_config())?;
    let dataset_path = match &config.selftrain.dataset {
        Some(p) => config.resolve(p),
        None => config.output_dir().join(DATASET_FILE),
    };
    let validation_path = stage("config", config.validation_path())?;
    let generated = stage("selftrain", read_conll(&dataset_path))?;
    let validation = stage("selftrain", read_conll(&validation_path))?;
    if validation.is_empty() {
        return Err(Error::InvalidArgument(format!(
            "validation file {} has no sentences",
            validation_path.display()
        )));
    }
    let outcome = stage(
        "selftrain",
        run_self_training(&generated, &validation, Perceptron::new, &schedule),
    )?;
    for r in &outcome.rounds {
        log::info!(
            "{}",
            serde_json::to_string(r).expect("log records serialize")
        );
    }

    let mut best = Perceptron::new();
    best.restore(&outcome.best.state)?;
    let tokens: Vec<Vec<String>> = validation.iter().map(|s| s.tokens.clone()).collect();
    let predicted: Vec<_> = validation
        .iter()
        .zip(best.predict(&tokens))
        .map(|(s, tags)| crate::annotator::LabeledSentence {
            sentence_id: s.sentence_id.clone(),
            tokens: s.tokens.clone(),
            tags,
        })
        .collect();
    let best_report = evaluate_sentences(&validation, &predicted)?;

    let dir = config.output_dir().join("selftrain");
    std::fs::create_dir_all(&dir).map_err(|e| Error::io(&dir, e))?;
    let hash = config.hash();
    outcome.best.save(&dir, "best", schedule.seed, &hash)?;
    write_atomic(&dir.join("log.jsonl"), outcome.log_jsonl().as_bytes())?;
    let report = SelfTrainReport {
        config_hash: hash,
        seed: schedule.seed,
        t_begin: schedule.t_begin,
        t_update: schedule.t_update,
        max_iterations: schedule.max_iterations,
        inputs: BTreeMap::from([
            ("dataset".to_string(), file_digest(&dataset_path)?),
            ("validation".to_string(), file_digest(&validation_path)?),
        ]),
        teacher: outcome.warmup,
        best_round: outcome.best.round,
        best_step: outcome.best.step,
        best: best_report,
        rounds: outcome.rounds,
    };
    write_json(&dir.join("report.json"), &report)?;
    Ok(report)
}

#[derive(Clone, Debug, Serialize)]
pub struct EvalReport {
    pub inputs: BTreeMap<String, String>,
    #[serde(flatten)]
    pub report: EntityReport,
}

impl EvalReport {
    pub fn text(&self) -> String {
        render_report(&self.report)
    }
}

pub fn cmd_eval(gold: &Path, pred: &Path) -> Result<EvalReport> {
    let g = read_conll(gold)?;
    let p = read_conll(pred)?;
    let report = evaluate_sentences(&g, &p)?;
    Ok(EvalReport {
        inputs: BTreeMap::from([
            ("gold".to_string(), file_digest(gold)?),
            ("pred".to_string(), file_digest(pred)?),
        ]),
        report,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct QuestionStats {
    pub results: usize,
    pub precision_at_k: f64,
    pub diversity: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct JudgeStats {
    pub k: usize,
    pub inputs: BTreeMap<String, String>,
    pub per_question: BTreeMap<String, QuestionStats>,
    /// Unweighted mean over questions.
    pub macro_precision_at_k: f64,
    pub macro_diversity: f64,
}

pub fn cmd_judge_stats(results: &Path, judgments: &Path, k: usize) -> Result<JudgeStats> {
    let set = load_results(results, None)?;
    let judged = RetrievalJudgments::load(judgments)?;
    let mut per_question = BTreeMap::new();
    for (qid, list) in &set {
        per_question.insert(
            qid.clone(),
            QuestionStats {
                results: list.len(),
                precision_at_k: precision_at_k(list, &judged, k)?,
                diversity: diversity(list, k),
            },
        );
    }
    let n = per_question.len().max(1) as f64;
    Ok(JudgeStats {
        k,
        inputs: BTreeMap::from([
            ("results".to_string(), file_digest(results)?),
            ("judgments".to_string(), file_digest(judgments)?),
        ]),
        macro_precision_at_k: per_question.values().map(|q| q.precision_at_k).sum::<f64>() / n,
        macro_diversity: per_question
            .values()
            .map(|q| q.diversity as f64)
            .sum::<f64>()
            / n,
        per_question,
    })
}
