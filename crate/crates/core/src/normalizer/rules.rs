use std::collections::HashSet;
use std::sync::LazyLock;

use regex::Regex;
use serde::Serialize;

use super::abbreviation::detect_abbreviation;
use super::stopwords::bundled_stopwords;
use super::toggles::RuleToggles;
use crate::error::{Error, Result};
use crate::retrieval::{CorpusSentence, RetrievedPhrase};
use crate::text::{char_len, fold_case};

static EDGE_PUNCT: LazyLock<Regex> =
    LazyLock::new(|| Regex::new(r"^[\p{P}\s]+|[\p{P}\s]+$").expect("valid regex"));
static LEADING_THE: LazyLock<Regex> =
    LazyLock::new(|| Regex::new(r"^(?i:the)\s+").expect("valid regex"));

#[derive(Clone, Debug)]
pub struct RuleSet {
    pub enabled: RuleToggles,
    pub stopwords: HashSet<String>,
    pub min_length: usize,
}

impl Default for RuleSet {
    fn default() -> Self {
        RuleSet {
            enabled: RuleToggles::common(),
            stopwords: bundled_stopwords(),
            min_length: 3,
        }
    }
}

impl RuleSet {
    pub fn with_toggles(&self, enabled: RuleToggles) -> RuleSet {
        RuleSet {
            enabled,
            ..self.clone()
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct NormalizedPhrase {
    pub surface: String,
    pub origin: RetrievedPhrase,
    pub type_label: String,
    pub output_type: String,
    pub abbreviation: Option<String>,
}

#[derive(Clone, Copy, Debug)]
pub struct RuleContext<'a> {
    pub type_label: &'a str,
    pub rules: &'a RuleSet,
}

fn strip_edges(s: &str) -> String {
    EDGE_PUNCT.replace_all(s, "").into_owned()
}

fn strip_articles(s: &str, restrip_punct: bool) -> String {
    let mut cur = s.to_string();
    loop {
        let mut next = LEADING_THE.replace(&cur, "").into_owned();
        if restrip_punct {
            next = strip_edges(&next);
        }
        if next == cur {
            return cur;
        }
        cur = next;
    }
}

fn split_on_and(s: &str) -> Vec<String> {
    let mut out = Vec::new();
    let mut words: Vec<&str> = Vec::new();
    for w in s.split_whitespace() {
        if w == "and" {
            if !words.is_empty() {
                out.push(words.join(" "));
            }
            words.clear();
        } else {
            words.push(w);
        }
    }
    if !words.is_empty() {
        out.push(words.join(" "));
    }
    out
}

/// Apply one of rules 1..=8 to a single fragment.
///
/// Rule 8 leaves the surface untouched; abbreviation attachment needs the
/// evidence sentence and happens in [`normalize`]. When rule 2 is enabled,
/// rule 4 re-strips edge punctuation exposed by removing the article.
pub fn apply_rule(rule_id: u8, fragment: &str, ctx: &RuleContext<'_>) -> Result<Vec<String>> {
    let keep = |s: String| if s.is_empty() { vec![] } else { vec![s] };
    let out = match rule_id {
        1 => split_on_and(fragment),
        2 => keep(strip_edges(fragment)),
        3 => {
            let has_alpha = fragment.chars().any(char::is_alphabetic);
            let has_upper = fragment.chars().any(char::is_uppercase);
            if has_alpha && !has_upper {
                vec![]
            } else {
                keep(fragment.to_string())
            }
        }
        4 => keep(strip_articles(fragment, ctx.rules.enabled.is_enabled(2))),
        5 => {
            if char_len(fragment) < ctx.rules.min_length {
                vec![]
            } else {
                keep(fragment.to_string())
            }
        }
        6 => {
            if ctx.rules.stopwords.contains(&fold_case(fragment)) {
                vec![]
            } else {
                keep(fragment.to_string())
            }
        }
        7 => {
            if fold_case(fragment.trim()) == fold_case(ctx.type_label.trim()) {
                vec![]
            } else {
                keep(fragment.to_string())
            }
        }
        8 => keep(fragment.to_string()),
        9 | 10 => return Err(Error::OutOfModuleRule(rule_id)),
        other => {
            return Err(Error::InvalidArgument(format!(
                "rule id {other} is outside 1..=10"
            )))
        }
    };
    Ok(out)
}

/// Surface-only pipeline: fold the enabled rules 1..=7 over the phrase.
pub fn normalize_surface(surface: &str, rules: &RuleSet, type_label: &str) -> Vec<String> {
    let ctx = RuleContext { type_label, rules };
    let mut fragments = vec![surface.to_string()];
    for rule in 1..=7u8 {
        if !rules.enabled.is_enabled(rule) {
            continue;
        }
        fragments = fragments
            .iter()
            .flat_map(|f| apply_rule(rule, f, &ctx).expect("rules 1..=7 are in-module"))
            .collect();
    }
    fragments.retain(|f| !f.trim().is_empty());
    fragments
}

/// Normalize one retrieved phrase into zero or more dictionary candidates.
pub fn normalize(
    phrase: &RetrievedPhrase,
    evidence: &CorpusSentence,
    rules: &RuleSet,
    type_label: &str,
    output_type: &str,
) -> Vec<NormalizedPhrase> {
    normalize_surface(&phrase.surface, rules, type_label)
        .into_iter()
        .map(|surface| {
            let abbreviation = if rules.enabled.is_enabled(8) {
                detect_abbreviation(&surface, &evidence.text)
            } else {
                None
            };
            NormalizedPhrase {
                surface,
                origin: phrase.clone(),
                type_label: type_label.to_string(),
                output_type: output_type.to_string(),
                abbreviation,
            }
        })
        .collect()
}
