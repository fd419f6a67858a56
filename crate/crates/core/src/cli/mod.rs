//! Pipeline orchestration behind the `askner` binary: configuration,
//! benchmark presets and the five commands.

mod commands;
mod config;
mod presets;

use std::path::PathBuf;

pub use commands::{
    cmd_eval, cmd_generate, cmd_judge_stats, cmd_retrieve, cmd_selftrain, write_json, EvalReport,
    GenerateOutput, JudgeStats, QuestionStats, RunManifest, SelfTrainReport, StageCounts,
    DATASET_FILE, DICTIONARY_FILE, MANIFEST_FILE, REPLAY_FILE,
};
pub use config::{PipelineConfig, RetrievalSection, RulesSection, SelfTrainSection, DEFAULT_TOP_N};
pub use presets::{dataset_preset, DATASET_PRESETS};

/// Command-line values that take precedence over the configuration file.
#[derive(Clone, Debug, Default)]
pub struct Overrides {
    pub seed: Option<u64>,
    pub out: Option<PathBuf>,
    pub corpus: Option<PathBuf>,
    pub results: Option<PathBuf>,
    pub endpoint: Option<String>,
    pub top_n: Option<usize>,
}

impl Overrides {
    /// Paths given on the command line are taken relative to the working
    /// directory, so they are made absolute here.
    pub fn apply(&self, config: &mut PipelineConfig) -> std::io::Result<()> {
        let abs = |p: &PathBuf| std::path::absolute(p);
        if let Some(s) = self.seed {
            config.seed = s;
        }
        if let Some(p) = &self.out {
            config.output_dir = Some(abs(p)?);
        }
        if let Some(p) = &self.corpus {
            config.corpus = Some(abs(p)?);
        }
        if let Some(p) = &self.results {
            config.retrieval.results = Some(abs(p)?);
        }
        if let Some(e) = &self.endpoint {
            config.retrieval.endpoint = Some(e.clone());
            config.retrieval.results = None;
        }
        if let Some(n) = self.top_n {
            config.retrieval.top_n = Some(n);
        }
        Ok(())
    }
}
