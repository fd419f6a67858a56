//! Type questions: template instantiation and the ordered sub-question set.

use std::collections::HashSet;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::normalizer::RuleToggles;

pub const PLACEHOLDER: &str = "[TYPE]";

/// A question pattern with exactly one `[TYPE]` placeholder.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub struct QuestionTemplate {
    pattern: String,
}

impl QuestionTemplate {
    pub fn new(pattern: impl Into<String>) -> Result<Self> {
        let pattern = pattern.into();
        match pattern.matches(PLACEHOLDER).count() {
            1 => Ok(QuestionTemplate { pattern }),
            0 => Err(Error::InvalidTemplate {
                pattern,
                reason: format!("missing {PLACEHOLDER} placeholder"),
            }),
            n => Err(Error::InvalidTemplate {
                pattern,
                reason: format!("{PLACEHOLDER} appears {n} times"),
            }),
        }
    }

    /// Named presets: `which` (default), `list-of`, `example-of`, `what`, `bare`.
    pub fn preset(name: &str) -> Option<Self> {
        let pattern = match name {
            "which" => "Which [TYPE]?",
            "list-of" => "list of [TYPE]",
            "example-of" => "example of [TYPE]",
            "what" => "What [TYPE]?",
            "bare" => "[TYPE]",
            _ => return None,
        };
        Some(QuestionTemplate {
            pattern: pattern.to_string(),
        })
    }

    pub const PRESET_NAMES: [&'static str; 5] = ["which", "list-of", "example-of", "what", "bare"];

    /// Resolve a preset name, or treat the string as a literal pattern.
    pub fn from_name_or_pattern(s: &str) -> Result<Self> {
        match Self::preset(s) {
            Some(t) => Ok(t),
            None => Self::new(s),
        }
    }

    pub fn pattern(&self) -> &str {
        &self.pattern
    }

    /// Text before and after the placeholder.
    pub fn affixes(&self) -> (&str, &str) {
        let at = self
            .pattern
            .find(PLACEHOLDER)
            .expect("validated on construction");
        (&self.pattern[..at], &self.pattern[at + PLACEHOLDER.len()..])
    }
}

impl Default for QuestionTemplate {
    fn default() -> Self {
        Self::preset("which").unwrap()
    }
}

impl TryFrom<String> for QuestionTemplate {
    type Error = Error;

    fn try_from(s: String) -> Result<Self> {
        Self::from_name_or_pattern(&s)
    }
}

impl From<QuestionTemplate> for String {
    fn from(t: QuestionTemplate) -> Self {
        t.pattern
    }
}

impl fmt::Display for QuestionTemplate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.pattern)
    }
}

/// Instantiate `template` with `type_label`, inserted verbatim.
pub fn formulate(type_label: &str, template: &QuestionTemplate) -> Result<String> {
    if type_label.trim().is_empty() {
        return Err(Error::InvalidArgument("type label is empty".into()));
    }
    let (prefix, suffix) = template.affixes();
    Ok(format!("{prefix}{type_label}{suffix}"))
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SubQuestion {
    pub question_id: String,
    pub type_label: String,
    pub output_type: String,
    pub question_text: String,
    pub k_l: usize,
    pub rule_toggles: RuleToggles,
}

/// One declared output type (or one group of labels for it) in a pipeline
/// configuration. Several groups may share an `output` tag.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TypeGroup {
    pub output: String,
    pub labels: Vec<String>,
    /// Explicit question ids, parallel to `labels`. Defaults to `output/label`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ids: Option<Vec<String>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub k_l: Option<i64>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub enable: Vec<u8>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub disable: Vec<u8>,
}

/// What `build_question_set` needs from a pipeline configuration.
#[derive(Clone, Debug, Default)]
pub struct QuestionConfig {
    pub template: QuestionTemplate,
    pub groups: Vec<TypeGroup>,
    pub default_k_l: Option<i64>,
    pub global_rules: RuleToggles,
}

pub fn build_question_set(config: &QuestionConfig) -> Result<Vec<SubQuestion>> {
    if config.groups.is_empty() {
        return Err(Error::Config("no output types declared".into()));
    }
    let mut seen = HashSet::new();
    let mut questions = Vec::new();
    for group in &config.groups {
        if group.output.trim().is_empty() {
            return Err(Error::Config("output type with empty name".into()));
        }
        if group.labels.is_empty() {
            return Err(Error::Config(format!(
                "output type {:?} declares no type labels",
                group.output
            )));
        }
        if let Some(ids) = &group.ids {
            if ids.len() != group.labels.len() {
                return Err(Error::Config(format!(
                    "output type {:?}: {} ids for {} labels",
                    group.output,
                    ids.len(),
                    group.labels.len()
                )));
            }
        }
        let k_l = group
            .k_l
            .or(config.default_k_l)
            .ok_or_else(|| Error::Config(format!("output type {:?} has no k_l", group.output)))?;
        if k_l <= 0 {
            return Err(Error::Config(format!(
                "output type {:?}: k_l must be positive, got {k_l}",
                group.output
            )));
        }
        let toggles = config.global_rules.with(&group.enable, &group.disable)?;

        for (i, label) in group.labels.iter().enumerate() {
            let question_text = formulate(label, &config.template)
                .map_err(|e| Error::Config(format!("output type {:?}: {e}", group.output)))?;
            let question_id = match &group.ids {
                Some(ids) => ids[i].clone(),
                None => format!("{}/{}", group.output, label),
            };
            if !seen.insert(question_id.clone()) {
                return Err(Error::Config(format!(
                    "duplicate question id {question_id:?}"
                )));
            }
            questions.push(SubQuestion {
                question_id,
                type_label: label.clone(),
                output_type: group.output.clone(),
                question_text,
                k_l: k_l as usize,
                rule_toggles: toggles,
            });
        }
    }
    Ok(questions)
}
