use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::presets::dataset_preset;
use crate::error::{Error, Result};
use crate::fsutil::sha256_hex;
use crate::normalizer::{bundled_stopwords, load_stopwords, RuleSet, RuleToggles};
use crate::querygen::{QuestionConfig, QuestionTemplate, TypeGroup};
use crate::selftrain::{schedule_preset, SelfTrainConfig};

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RulesSection {
    #[serde(default)]
    pub enable: Vec<u8>,
    #[serde(default)]
    pub disable: Vec<u8>,
    pub min_length: Option<usize>,
    pub stopwords: Option<PathBuf>,
    pub quality_phrases: Option<PathBuf>,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RetrievalSection {
    /// Replay file of ranked results.
    pub results: Option<PathBuf>,
    pub endpoint: Option<String>,
    /// Use the toy retriever over pre-marked candidates.
    #[serde(default)]
    pub toy: bool,
    pub top_n: Option<usize>,
    pub timeout_secs: Option<u64>,
    pub attempts: Option<u32>,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SelfTrainSection {
    pub preset: Option<String>,
    pub t_begin: Option<usize>,
    pub t_update: Option<usize>,
    pub max_iterations: Option<usize>,
    /// Generated dataset to train on; defaults to the output directory's.
    pub dataset: Option<PathBuf>,
    pub validation: Option<PathBuf>,
}

/// The declarative pipeline file. Relative paths resolve against the
/// file's own directory.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PipelineConfig {
    #[serde(default)]
    pub seed: u64,
    pub output_dir: Option<PathBuf>,
    pub preset: Option<String>,
    pub template: Option<String>,
    pub corpus: Option<PathBuf>,
    pub default_k_l: Option<i64>,
    #[serde(default)]
    pub rules: RulesSection,
    #[serde(default)]
    pub retrieval: RetrievalSection,
    #[serde(default)]
    pub types: Vec<TypeGroup>,
    #[serde(default)]
    pub selftrain: SelfTrainSection,
    #[serde(skip)]
    pub base_dir: PathBuf,
}

pub const DEFAULT_TOP_N: usize = 100;

impl PipelineConfig {
    pub fn parse(text: &str, base_dir: &Path) -> Result<Self> {
        let mut c: PipelineConfig =
            toml::from_str(text).map_err(|e| Error::Config(format!("invalid config: {e}")))?;
        c.base_dir = base_dir.to_path_buf();
        Ok(c)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let base = path.parent().map(Path::to_path_buf).unwrap_or_default();
        Self::parse(&text, &base).map_err(|e| match e {
            Error::Config(m) => Error::Config(format!("{}: {m}", path.display())),
            other => other,
        })
    }

    pub fn resolve(&self, p: &Path) -> PathBuf {
        if p.is_absolute() {
            p.to_path_buf()
        } else {
            self.base_dir.join(p)
        }
    }

    /// Canonical serialized form; its digest identifies the configuration.
    pub fn hash(&self) -> String {
        sha256_hex(&serde_json::to_vec(self).expect("config serializes"))
    }

    pub fn output_dir(&self) -> PathBuf {
        self.resolve(self.output_dir.as_deref().unwrap_or(Path::new("out")))
    }

    pub fn corpus_path(&self) -> Result<PathBuf> {
        let p = self
            .corpus
            .as_deref()
            .ok_or_else(|| Error::Config("no corpus file configured".into()))?;
        self.existing(p, "corpus")
    }

    fn existing(&self, p: &Path, what: &str) -> Result<PathBuf> {
        let full = self.resolve(p);
        if !full.is_file() {
            return Err(Error::Config(format!(
                "{what} file {} does not exist",
                full.display()
            )));
        }
        Ok(full)
    }

    pub fn global_rules(&self) -> Result<RuleToggles> {
        RuleToggles::common()
            .with(&self.rules.enable, &self.rules.disable)
            .map_err(|e| Error::Config(e.to_string()))
    }

    /// Type groups from `[[types]]`, or from the preset when none are given.
    pub fn groups(&self) -> Result<Vec<TypeGroup>> {
        if !self.types.is_empty() {
            return Ok(self.types.clone());
        }
        match &self.preset {
            Some(name) => dataset_preset(name)
                .ok_or_else(|| Error::Config(format!("unknown preset {name:?}"))),
            None => Err(Error::Config("no [[types]] and no preset".into())),
        }
    }

    pub fn question_config(&self) -> Result<QuestionConfig> {
        let template = match &self.template {
            Some(t) => QuestionTemplate::from_name_or_pattern(t)?,
            None => QuestionTemplate::default(),
        };
        Ok(QuestionConfig {
            template,
            groups: self.groups()?,
            default_k_l: self.default_k_l,
            global_rules: self.global_rules()?,
        })
    }

    pub fn rule_set(&self) -> Result<RuleSet> {
        let stopwords = match &self.rules.stopwords {
            Some(p) => load_stopwords(&self.existing(p, "stopword")?)?,
            None => bundled_stopwords(),
        };
        Ok(RuleSet {
            enabled: self.global_rules()?,
            stopwords,
            min_length: self
                .rules
                .min_length
                .unwrap_or(RuleSet::default().min_length),
        })
    }

    pub fn quality_phrases_path(&self) -> Result<Option<PathBuf>> {
        self.rules
            .quality_phrases
            .as_deref()
            .map(|p| self.existing(p, "quality-phrase"))
            .transpose()
    }

    pub fn results_path(&self) -> Result<Option<PathBuf>> {
        self.retrieval
            .results
            .as_deref()
            .map(|p| self.existing(p, "results"))
            .transpose()
    }

    pub fn validation_path(&self) -> Result<PathBuf> {
        let p = self
            .selftrain
            .validation
            .as_deref()
            .ok_or_else(|| Error::Config("no [selftrain] validation file configured".into()))?;
        self.existing(p, "validation")
    }

    /// Explicit values override the named preset (the section's own, then
    /// the top-level one).
    pub fn selftrain_config(&self) -> Result<SelfTrainConfig> {
        let s = &self.selftrain;
        let preset =
            match s.preset.as_ref().or(self.preset.as_ref()) {
                Some(name) => Some(schedule_preset(name).ok_or_else(|| {
                    Error::Config(format!("unknown self-training preset {name:?}"))
                })?),
                None => None,
            };
        let t_begin = s.t_begin.or(preset.map(|p| p.0));
        let t_update = s.t_update.or(preset.map(|p| p.1));
        let (Some(t_begin), Some(t_update)) = (t_begin, t_update) else {
            return Err(Error::Config(
                "self-training needs t_begin and t_update, or a preset".into(),
            ));
        };
        let mut c = SelfTrainConfig::new(t_begin, t_update, self.seed);
        if let Some(m) = s.max_iterations {
            c.max_iterations = m;
        }
        c.validate()?;
        Ok(c)
    }
}
