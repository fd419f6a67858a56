use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::Context;
use clap::{Args, Parser, Subcommand};

use askner::cli::{self, Overrides, PipelineConfig};
use askner::Error;

#[derive(Parser)]
#[command(
    name = "askner",
    version,
    about = "Generate weakly-labeled NER datasets from phrase retrieval"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Common {
    /// Pipeline configuration (TOML).
    #[arg(long)]
    config: PathBuf,
    #[arg(long)]
    seed: Option<u64>,
    /// Output directory.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    corpus: Option<PathBuf>,
    /// Replay file of ranked results.
    #[arg(long)]
    results: Option<PathBuf>,
    /// Phrase-retrieval service URL.
    #[arg(long)]
    endpoint: Option<String>,
    #[arg(long)]
    top_n: Option<usize>,
}

#[derive(Subcommand)]
enum Command {
    /// Build the labeled dataset, dictionary dump and run manifest.
    Generate(Common),
    /// Query the configured retriever and write a replay file.
    Retrieve(Common),
    /// Self-train the baseline tagger on a generated dataset.
    Selftrain(Common),
    /// Entity-level P/R/F1 of a prediction file against gold.
    Eval {
        gold: PathBuf,
        pred: PathBuf,
        /// Also write the JSON report here.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// P@k and diversity of a results file under manual judgments.
    JudgeStats {
        #[arg(long)]
        results: PathBuf,
        #[arg(long)]
        judgments: PathBuf,
        #[arg(long, default_value_t = 100)]
        k: usize,
    },
}

fn load(common: &Common) -> anyhow::Result<PipelineConfig> {
    let mut config = PipelineConfig::load(&common.config)?;
    Overrides {
        seed: common.seed,
        out: common.out.clone(),
        corpus: common.corpus.clone(),
        results: common.results.clone(),
        endpoint: common.endpoint.clone(),
        top_n: common.top_n,
    }
    .apply(&mut config)
    .context("resolving command-line paths")?;
    Ok(config)
}

fn print_json<T: serde::Serialize>(value: &T) -> anyhow::Result<()> {
    println!("{}", serde_json::to_string_pretty(value)?);
    Ok(())
}

fn run(cli: Cli) -> anyhow::Result<()> {
    match cli.command {
        Command::Generate(c) => {
            let out = cli::cmd_generate(&load(&c)?)?;
            print_json(&out.counts)?;
            eprintln!("wrote {}", out.dataset.display());
        }
        Command::Retrieve(c) => {
            let path = cli::cmd_retrieve(&load(&c)?)?;
            eprintln!("wrote {}", path.display());
        }
        Command::Selftrain(c) => {
            let report = cli::cmd_selftrain(&load(&c)?)?;
            print_json(&report)?;
        }
        Command::Eval { gold, pred, out } => {
            let report = cli::cmd_eval(&gold, &pred)?;
            print!("{}", report.text());
            if let Some(path) = out {
                cli::write_json(Path::new(&path), &report)?;
            }
        }
        Command::JudgeStats {
            results,
            judgments,
            k,
        } => {
            print_json(&cli::cmd_judge_stats(&results, &judgments, k)?)?;
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => match e.downcast_ref::<Error>() {
            // Library errors already spell out their causes.
            Some(err) => {
                eprintln!("error: {err}");
                ExitCode::from(err.exit_code() as u8)
            }
            None => {
                eprintln!("error: {e:#}");
                ExitCode::from(2)
            }
        },
    }
}
