use std::io::{BufRead, BufReader, Write};
use std::net::{TcpListener, TcpStream};
use std::path::Path;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Arc;
use std::time::Duration;

use askner::cli::{self, Overrides, PipelineConfig};
use askner::normalizer::RuleToggles;
use askner::querygen::SubQuestion;
use askner::retrieval::{fetch_remote, load_results, Corpus, CorpusSentence, RemoteOptions};
use askner::Error;

/// Minimal HTTP/1.1 server: `reply(request_target, hit_number)` gives the
/// status code and body for each request.
fn serve<F>(reply: F) -> (String, Arc<AtomicUsize>)
where
    F: Fn(&str, usize) -> (u16, String) + Send + 'static,
{
    let listener = TcpListener::bind("127.0.0.1:0").unwrap();
    let url = format!("http://{}/search", listener.local_addr().unwrap());
    let hits = Arc::new(AtomicUsize::new(0));
    let counter = hits.clone();
    std::thread::spawn(move || {
        for stream in listener.incoming() {
            let Ok(stream) = stream else { continue };
            let n = counter.fetch_add(1, Ordering::SeqCst) + 1;
            handle(stream, n, &reply);
        }
    });
    (url, hits)
}

fn handle<F: Fn(&str, usize) -> (u16, String)>(mut stream: TcpStream, n: usize, reply: &F) {
    let mut reader = BufReader::new(stream.try_clone().unwrap());
    let mut first = String::new();
    reader.read_line(&mut first).unwrap();
    loop {
        let mut line = String::new();
        if reader.read_line(&mut line).unwrap() == 0 || line == "\r\n" {
            break;
        }
    }
    let target = first.split_whitespace().nth(1).unwrap_or("").to_string();
    let (code, body) = reply(&target, n);
    let _ = write!(
        stream,
        "HTTP/1.1 {code} X\r\nContent-Type: application/json\r\nContent-Length: {}\r\nConnection: close\r\n\r\n{body}",
        body.len()
    );
}

fn corpus() -> Corpus {
    Corpus::new(vec![
        CorpusSentence::tokenize("s1", "Fans in Lyon cheered ."),
        CorpusSentence::tokenize("s2", "Talks in Kenya resumed ."),
    ])
    .unwrap()
}

fn question(id: &str, text: &str) -> SubQuestion {
    SubQuestion {
        question_id: id.to_string(),
        type_label: "city".to_string(),
        output_type: "location".to_string(),
        question_text: text.to_string(),
        k_l: 10,
        rule_toggles: RuleToggles::common(),
    }
}

fn quick() -> RemoteOptions {
    RemoteOptions {
        timeout: Duration::from_secs(5),
        attempts: 2,
        backoff: Duration::from_millis(10),
    }
}

const LYON: &str =
    r#"[{"rank":1,"phrase":"Lyon","score":3.5,"sentence_id":"s1","char_start":8,"char_end":12}]"#;

#[test]
fn records_are_fetched_and_validated() {
    let (url, _) = serve(|target, _| {
        assert!(
            target.contains("question=") && target.contains("top_n=5"),
            "{target}"
        );
        (200, LYON.to_string())
    });
    let got = fetch_remote(
        &question("location/city", "Which city?"),
        &url,
        5,
        &corpus(),
        &quick(),
    )
    .unwrap();
    assert_eq!(got.len(), 1);
    assert_eq!(got[0].question_id, "location/city");
    assert_eq!(got[0].surface, "Lyon");
}

#[test]
fn malformed_response_is_a_data_error() {
    let (url, _) = serve(|_, _| (200, r#"[{"rank":1,"phrase":"Lyon"}]"#.to_string()));
    let err =
        fetch_remote(&question("q", "Which city?"), &url, 5, &corpus(), &quick()).unwrap_err();
    assert!(matches!(err, Error::Data { .. }), "{err}");
    assert_eq!(err.exit_code(), 2);
}

#[test]
fn span_mismatch_is_rejected() {
    let body = r#"[{"rank":1,"phrase":"Paris","score":1.0,"sentence_id":"s1","char_start":8,"char_end":12}]"#;
    let (url, _) = serve(move |_, _| (200, body.to_string()));
    let err =
        fetch_remote(&question("q", "Which city?"), &url, 5, &corpus(), &quick()).unwrap_err();
    assert!(err.to_string().contains("span mismatch"), "{err}");
}

#[test]
fn foreign_question_id_is_rejected() {
    let body = r#"[{"question_id":"other","rank":1,"phrase":"Lyon","score":1.0,"sentence_id":"s1","char_start":8,"char_end":12}]"#;
    let (url, _) = serve(move |_, _| (200, body.to_string()));
    assert!(fetch_remote(&question("q", "Which city?"), &url, 5, &corpus(), &quick()).is_err());
}

#[test]
fn server_errors_are_retried() {
    let (url, hits) = serve(|_, n| {
        if n == 1 {
            (503, String::new())
        } else {
            (200, LYON.to_string())
        }
    });
    let got = fetch_remote(&question("q", "Which city?"), &url, 5, &corpus(), &quick()).unwrap();
    assert_eq!(got.len(), 1);
    assert_eq!(hits.load(Ordering::SeqCst), 2);
}

#[test]
fn client_errors_are_not_retried() {
    let (url, hits) = serve(|_, _| (404, String::new()));
    let err =
        fetch_remote(&question("q", "Which city?"), &url, 5, &corpus(), &quick()).unwrap_err();
    assert!(matches!(err, Error::Data { .. }), "{err}");
    assert_eq!(hits.load(Ordering::SeqCst), 1);
}

#[test]
fn unreachable_endpoint_gives_up_after_all_attempts() {
    let port = TcpListener::bind("127.0.0.1:0")
        .unwrap()
        .local_addr()
        .unwrap()
        .port();
    let url = format!("http://127.0.0.1:{port}/search");
    let err =
        fetch_remote(&question("q", "Which city?"), &url, 5, &corpus(), &quick()).unwrap_err();
    match err {
        Error::Retryable { attempts, .. } => assert_eq!(attempts, 2),
        other => panic!("unexpected {other}"),
    }
}

fn write_project(dir: &Path) -> PipelineConfig {
    std::fs::write(dir.join("corpus.jsonl"), corpus().to_jsonl()).unwrap();
    std::fs::write(
        dir.join("config.toml"),
        r#"
seed = 1
corpus = "corpus.jsonl"
output_dir = "out"
[retrieval]
attempts = 1
[[types]]
output = "location"
labels = ["city", "country"]
k_l = 10
"#,
    )
    .unwrap();
    PipelineConfig::load(&dir.join("config.toml")).unwrap()
}

#[test]
fn retrieve_writes_a_replay_file_that_generate_accepts() {
    let (url, _) = serve(|target, _| {
        let body = if target.contains("city") {
            LYON.to_string()
        } else {
            r#"[{"rank":1,"phrase":"Kenya","score":2.0,"sentence_id":"s2","char_start":9,"char_end":14}]"#.to_string()
        };
        (200, body)
    });
    let dir = tempfile::tempdir().unwrap();
    let mut config = write_project(dir.path());
    Overrides {
        endpoint: Some(url),
        ..Overrides::default()
    }
    .apply(&mut config)
    .unwrap();

    let replay = cli::cmd_retrieve(&config).unwrap();
    let set = load_results(&replay, Some(&corpus())).unwrap();
    assert_eq!(set["location/city"][0].surface, "Lyon");
    assert_eq!(set["location/country"][0].surface, "Kenya");

    let live = cli::cmd_generate(&config).unwrap();
    let live_bytes = std::fs::read(&live.dataset).unwrap();
    // Live runs cache what they fetched next to the dataset.
    assert_eq!(
        std::fs::read(dir.path().join("out").join(cli::REPLAY_FILE)).unwrap(),
        std::fs::read(&replay).unwrap()
    );

    let mut offline = write_project(dir.path());
    offline.output_dir = Some(dir.path().join("offline"));
    offline.retrieval.results = Some(replay);
    let replayed = cli::cmd_generate(&offline).unwrap();
    assert_eq!(std::fs::read(replayed.dataset).unwrap(), live_bytes);
    assert_eq!(replayed.counts.matches, 2);
}
