//! Client for an HTTP phrase-retrieval service.
//!
//! `GET <endpoint>?question=<text>&top_n=<n>` must answer with a JSON array
//! of result records. `question_id` may be omitted by the service; the
//! requesting question's id is used.

use std::path::Path;
use std::time::Duration;

use serde::Deserialize;

use super::corpus::Corpus;
use super::results::{ingest_records, load_results, serialize_results, ResultSet, RetrievedPhrase};
use crate::error::{Error, Result};
use crate::fsutil::write_atomic;
use crate::querygen::SubQuestion;

#[derive(Clone, Debug)]
pub struct RemoteOptions {
    pub timeout: Duration,
    pub attempts: u32,
    pub backoff: Duration,
}

impl Default for RemoteOptions {
    fn default() -> Self {
        RemoteOptions {
            timeout: Duration::from_secs(30),
            attempts: 3,
            backoff: Duration::from_millis(200),
        }
    }
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RemoteRecord {
    #[serde(default)]
    question_id: Option<String>,
    rank: u32,
    phrase: String,
    score: f64,
    sentence_id: String,
    char_start: usize,
    char_end: usize,
}

enum Attempt {
    Retry(String),
    Fatal(Error),
}

fn get_once(
    agent: &ureq::Agent,
    endpoint: &str,
    question: &str,
    top_n: usize,
) -> std::result::Result<String, Attempt> {
    let response = agent
        .get(endpoint)
        .query("question", question)
        .query("top_n", top_n.to_string())
        .call();
    match response {
        Ok(mut resp) => resp
            .body_mut()
            .read_to_string()
            .map_err(|e| Attempt::Retry(format!("reading body: {e}"))),
        Err(ureq::Error::StatusCode(code)) if code >= 500 => {
            Err(Attempt::Retry(format!("HTTP {code}")))
        }
        Err(ureq::Error::StatusCode(code)) => Err(Attempt::Fatal(Error::data(format!(
            "{endpoint} answered HTTP {code}"
        )))),
        Err(e) => Err(Attempt::Retry(e.to_string())),
    }
}

/// Fetch the ranked list for one question, validating every record against
/// the local corpus.
pub fn fetch_remote(
    question: &SubQuestion,
    endpoint: &str,
    top_n: usize,
    corpus: &Corpus,
    options: &RemoteOptions,
) -> Result<Vec<RetrievedPhrase>> {
    let agent: ureq::Agent = ureq::Agent::config_builder()
        .timeout_global(Some(options.timeout))
        .build()
        .into();
    let attempts = options.attempts.max(1);
    let mut last = String::new();
    let mut body = None;
    for attempt in 1..=attempts {
        match get_once(&agent, endpoint, &question.question_text, top_n) {
            Ok(b) => {
                body = Some(b);
                break;
            }
            Err(Attempt::Fatal(e)) => return Err(e),
            Err(Attempt::Retry(msg)) => {
                log::warn!("{endpoint}: attempt {attempt}/{attempts} failed: {msg}");
                last = msg;
                if attempt < attempts {
                    std::thread::sleep(options.backoff * attempt);
                }
            }
        }
    }
    let body = body.ok_or_else(|| Error::Retryable {
        endpoint: endpoint.to_string(),
        attempts,
        message: last,
    })?;
    let records: Vec<RemoteRecord> = serde_json::from_str(&body).map_err(|e| {
        Error::data(format!(
            "{endpoint}: response violates the record schema: {e}"
        ))
    })?;
    let mut converted = Vec::with_capacity(records.len());
    for (i, r) in records.into_iter().enumerate() {
        if let Some(qid) = &r.question_id {
            if qid != &question.question_id {
                return Err(Error::data_at(
                    i + 1,
                    format!(
                        "record for question {qid:?} in response to {:?}",
                        question.question_id
                    ),
                ));
            }
        }
        converted.push((
            i + 1,
            RetrievedPhrase {
                question_id: question.question_id.clone(),
                rank: r.rank,
                surface: r.phrase,
                score: r.score,
                sentence_id: r.sentence_id,
                char_start: r.char_start,
                char_end: r.char_end,
            },
        ));
    }
    let mut grouped = ingest_records(converted, Some(corpus))?;
    Ok(grouped.remove(&question.question_id).unwrap_or_default())
}

/// Fetch every question, write the replay file atomically, and return what
/// reading the replay file back yields.
pub fn fetch_to_replay(
    questions: &[SubQuestion],
    endpoint: &str,
    top_n: usize,
    corpus: &Corpus,
    options: &RemoteOptions,
    replay: &Path,
) -> Result<ResultSet> {
    let mut set = ResultSet::new();
    for q in questions {
        let list = fetch_remote(q, endpoint, top_n, corpus, options)?;
        set.insert(q.question_id.clone(), list);
    }
    write_atomic(replay, serialize_results(&set).as_bytes())?;
    load_results(replay, Some(corpus))
}
