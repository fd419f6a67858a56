//! Token-level Aho–Corasick matching of dictionary phrases.
//!
//! Patterns and sentences are compared word by word after simple case
//! folding and whitespace squashing, so a phrase only ever matches a run of
//! whole tokens ("art" never matches inside "heart").

use std::collections::HashMap;

use serde::Serialize;

use super::dictionary::PseudoDictionary;
use crate::normalizer::RuleToggles;
use crate::retrieval::CorpusSentence;
use crate::text::match_key;

const ROOT: usize = 0;

#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize)]
pub struct MatchSpan {
    pub sentence_id: String,
    pub token_start: usize,
    pub token_end: usize,
    /// Dictionary entry this span annotates.
    pub phrase_key: String,
    pub assigned_type: Option<String>,
    /// Matched through an abbreviation alias of `phrase_key`.
    pub via_abbreviation: bool,
}

impl MatchSpan {
    pub fn len(&self) -> usize {
        self.token_end - self.token_start
    }

    pub fn is_empty(&self) -> bool {
        self.token_end <= self.token_start
    }

    pub fn overlaps(&self, other: &MatchSpan) -> bool {
        self.token_start < other.token_end && other.token_start < self.token_end
    }
}

/// A raw match: token range plus the pattern index that produced it.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Candidate {
    pub token_start: usize,
    pub token_end: usize,
    pub pattern: usize,
}

#[derive(Default, Clone, Debug)]
struct Node {
    next: HashMap<u32, usize>,
    fail: usize,
    /// Pattern ending exactly here.
    output: Option<usize>,
    /// Nearest node on the failure chain that has an output.
    dict_link: Option<usize>,
}

#[derive(Clone, Debug)]
pub struct TokenMatcher {
    vocab: HashMap<String, u32>,
    nodes: Vec<Node>,
    pattern_words: Vec<usize>,
    patterns: Vec<String>,
}

impl TokenMatcher {
    /// Build from pattern keys. Duplicate keys keep the first index; empty
    /// keys never match.
    pub fn new<I, S>(patterns: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: AsRef<str>,
    {
        let mut m = TokenMatcher {
            vocab: HashMap::new(),
            nodes: vec![Node::default()],
            pattern_words: Vec::new(),
            patterns: Vec::new(),
        };
        for p in patterns {
            let key = match_key(p.as_ref());
            let idx = m.patterns.len();
            m.patterns.push(key.clone());
            let words: Vec<&str> = key.split(' ').filter(|w| !w.is_empty()).collect();
            m.pattern_words.push(words.len());
            if words.is_empty() {
                continue;
            }
            let mut node = ROOT;
            for w in words {
                let next_id = m.vocab.len() as u32;
                let id = *m.vocab.entry(w.to_string()).or_insert(next_id);
                node = match m.nodes[node].next.get(&id) {
                    Some(&n) => n,
                    None => {
                        m.nodes.push(Node::default());
                        let n = m.nodes.len() - 1;
                        m.nodes[node].next.insert(id, n);
                        n
                    }
                };
            }
            m.nodes[node].output.get_or_insert(idx);
        }
        m.link();
        m
    }

    fn link(&mut self) {
        let mut queue = std::collections::VecDeque::new();
        let root_children: Vec<usize> = self.nodes[ROOT].next.values().copied().collect();
        for c in root_children {
            self.nodes[c].fail = ROOT;
            queue.push_back(c);
        }
        while let Some(u) = queue.pop_front() {
            let mut edges: Vec<(u32, usize)> =
                self.nodes[u].next.iter().map(|(&k, &v)| (k, v)).collect();
            edges.sort_unstable();
            for (word, v) in edges {
                let mut f = self.nodes[u].fail;
                let fail = loop {
                    if let Some(&t) = self.nodes[f].next.get(&word) {
                        break t;
                    }
                    if f == ROOT {
                        break ROOT;
                    }
                    f = self.nodes[f].fail;
                };
                self.nodes[v].fail = fail;
                self.nodes[v].dict_link = if self.nodes[fail].output.is_some() {
                    Some(fail)
                } else {
                    self.nodes[fail].dict_link
                };
                queue.push_back(v);
            }
        }
    }

    pub fn pattern(&self, idx: usize) -> &str {
        &self.patterns[idx]
    }

    pub fn pattern_count(&self) -> usize {
        self.patterns.len()
    }

    fn step(&self, mut state: usize, word: Option<u32>) -> usize {
        let Some(word) = word else {
            return ROOT;
        };
        loop {
            if let Some(&n) = self.nodes[state].next.get(&word) {
                return n;
            }
            if state == ROOT {
                return ROOT;
            }
            state = self.nodes[state].fail;
        }
    }

    /// Every token-aligned occurrence of every pattern, sorted by
    /// (start, end, pattern).
    pub fn find_all(&self, tokens: &[String]) -> Vec<Candidate> {
        // Word stream: a token whose folded form has inner spaces spans
        // several words. Matches must start and end on token edges.
        let mut word_token = Vec::new();
        let mut word_is_first = Vec::new();
        let mut word_is_last = Vec::new();
        let mut ids = Vec::new();
        for (ti, tok) in tokens.iter().enumerate() {
            let key = match_key(tok);
            let words: Vec<&str> = key.split(' ').filter(|w| !w.is_empty()).collect();
            let n = words.len();
            for (wi, w) in words.into_iter().enumerate() {
                ids.push(self.vocab.get(w).copied());
                word_token.push(ti);
                word_is_first.push(wi == 0);
                word_is_last.push(wi + 1 == n);
            }
        }
        let mut out = Vec::new();
        let mut state = ROOT;
        for (j, &id) in ids.iter().enumerate() {
            state = self.step(state, id);
            let mut node = if self.nodes[state].output.is_some() {
                Some(state)
            } else {
                self.nodes[state].dict_link
            };
            while let Some(n) = node {
                let p = self.nodes[n].output.expect("dict links point at outputs");
                let start_word = j + 1 - self.pattern_words[p];
                if word_is_first[start_word] && word_is_last[j] {
                    out.push(Candidate {
                        token_start: word_token[start_word],
                        token_end: word_token[j] + 1,
                        pattern: p,
                    });
                }
                node = self.nodes[n].dict_link;
            }
        }
        out.sort_unstable();
        out
    }
}

/// Surface is a single all-lowercase token: has a letter, no uppercase.
pub fn is_lowercase_token(s: &str) -> bool {
    s.chars().any(char::is_alphabetic) && !s.chars().any(char::is_uppercase)
}

/// Leftmost-longest: scan by start, longer first at equal start, and drop
/// anything overlapping an already accepted span.
pub fn resolve_leftmost_longest(mut candidates: Vec<Candidate>) -> Vec<Candidate> {
    candidates.sort_by(|a, b| {
        a.token_start
            .cmp(&b.token_start)
            .then(b.token_end.cmp(&a.token_end))
            .then(a.pattern.cmp(&b.pattern))
    });
    let mut out: Vec<Candidate> = Vec::new();
    let mut last_end = 0;
    for c in candidates {
        if out.is_empty() || c.token_start >= last_end {
            last_end = c.token_end;
            out.push(c);
        }
    }
    out
}

/// What a matcher pattern stands for.
#[derive(Clone, Debug)]
struct Target {
    entry_key: String,
    via_abbreviation: bool,
}

/// Matcher over dictionary entries plus abbreviation aliases, with the
/// optional quality-phrase matcher used for boundary refinement.
#[derive(Clone, Debug)]
pub struct DictionaryMatcher {
    matcher: TokenMatcher,
    targets: Vec<Target>,
    quality: Option<TokenMatcher>,
}

impl DictionaryMatcher {
    pub fn new(dict: &PseudoDictionary) -> Self {
        let mut keys = Vec::new();
        let mut targets = Vec::new();
        for (key, _) in dict.entries() {
            keys.push(key.clone());
            targets.push(Target {
                entry_key: key.clone(),
                via_abbreviation: false,
            });
        }
        for (short, long) in dict.abbreviations() {
            if dict.get(short).is_some() || dict.get(long).is_none() {
                continue;
            }
            keys.push(short.clone());
            targets.push(Target {
                entry_key: long.clone(),
                via_abbreviation: true,
            });
        }
        DictionaryMatcher {
            matcher: TokenMatcher::new(&keys),
            targets,
            quality: dict.quality_phrases().map(TokenMatcher::new),
        }
    }

    /// Raw token-aligned matches before Rule 9 or overlap resolution.
    pub fn candidates(&self, sentence: &CorpusSentence) -> Vec<Candidate> {
        self.matcher.find_all(&sentence.surfaces())
    }

    pub fn match_sentence(&self, sentence: &CorpusSentence, rules: &RuleToggles) -> Vec<MatchSpan> {
        let mut cands = self.candidates(sentence);
        if rules.is_enabled(9) {
            cands.retain(|c| {
                c.token_end - c.token_start > 1
                    || !is_lowercase_token(&sentence.tokens[c.token_start].surface)
            });
        }
        let mut spans: Vec<MatchSpan> = resolve_leftmost_longest(cands)
            .into_iter()
            .map(|c| {
                let t = &self.targets[c.pattern];
                MatchSpan {
                    sentence_id: sentence.sentence_id.clone(),
                    token_start: c.token_start,
                    token_end: c.token_end,
                    phrase_key: t.entry_key.clone(),
                    assigned_type: None,
                    via_abbreviation: t.via_abbreviation,
                }
            })
            .collect();
        if rules.is_enabled(10) {
            if let Some(quality) = &self.quality {
                let occurrences = quality_spans(quality, sentence);
                for i in 0..spans.len() {
                    let refined = refine_with(&spans[i], &occurrences);
                    let clear = spans
                        .iter()
                        .enumerate()
                        .all(|(j, other)| j == i || !refined.overlaps(other));
                    if clear {
                        spans[i] = refined;
                    }
                }
            }
        }
        spans
    }
}

fn quality_spans(quality: &TokenMatcher, sentence: &CorpusSentence) -> Vec<(usize, usize)> {
    quality
        .find_all(&sentence.surfaces())
        .into_iter()
        .map(|c| (c.token_start, c.token_end))
        .collect()
}

fn refine_with(span: &MatchSpan, occurrences: &[(usize, usize)]) -> MatchSpan {
    let best = occurrences
        .iter()
        .filter(|&&(s, e)| {
            s <= span.token_start
                && span.token_end <= e
                && (s, e) != (span.token_start, span.token_end)
        })
        .min_by_key(|&&(s, e)| (e - s, s));
    match best {
        Some(&(s, e)) => MatchSpan {
            token_start: s,
            token_end: e,
            ..span.clone()
        },
        None => span.clone(),
    }
}

/// Expand `span` to the smallest quality-phrase occurrence in `sentence`
/// that strictly contains it; otherwise return it unchanged.
pub fn refine_boundaries(
    span: &MatchSpan,
    sentence: &CorpusSentence,
    quality_phrases: &[String],
) -> MatchSpan {
    let quality = TokenMatcher::new(quality_phrases);
    refine_with(span, &quality_spans(&quality, sentence))
}

/// Match every sentence. Types are left unassigned.
pub fn match_sentences(
    dict: &PseudoDictionary,
    sentences: &[CorpusSentence],
    rules: &RuleToggles,
) -> Vec<MatchSpan> {
    let matcher = DictionaryMatcher::new(dict);
    sentences
        .iter()
        .flat_map(|s| matcher.match_sentence(s, rules))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn dict(keys: &[&str]) -> PseudoDictionary {
        let mut d = PseudoDictionary::default();
        for k in keys {
            d.insert(k, "T", 1);
        }
        d
    }

    fn ranges(spans: &[MatchSpan]) -> Vec<(usize, usize)> {
        spans.iter().map(|s| (s.token_start, s.token_end)).collect()
    }

    #[test]
    fn heart_disease_sentence() {
        let s =
            CorpusSentence::tokenize("s", "Heart disease is one of the leading causes of death.");
        let spans = match_sentences(&dict(&["heart disease"]), &[s], &RuleToggles::common());
        assert_eq!(ranges(&spans), vec![(0, 2)]);
        assert_eq!(spans[0].phrase_key, "heart disease");
    }

    #[test]
    fn rule_nine_rejects_lowercase_single_tokens() {
        let s = CorpusSentence::tokenize("s", "It was WAS that was found");
        let d = dict(&["was"]);
        let on = RuleToggles::common().with(&[9], &[]).unwrap();
        assert_eq!(
            ranges(&match_sentences(&d, std::slice::from_ref(&s), &on)),
            vec![(2, 3)]
        );
        let off = RuleToggles::common();
        assert_eq!(
            ranges(&match_sentences(&d, &[s], &off)),
            vec![(1, 2), (2, 3), (4, 5)]
        );
    }

    #[test]
    fn rule_nine_spares_multi_token() {
        let s = CorpusSentence::tokenize("s", "a heart attack here");
        let on = RuleToggles::common().with(&[9], &[]).unwrap();
        assert_eq!(
            ranges(&match_sentences(&dict(&["heart attack"]), &[s], &on)),
            vec![(1, 3)]
        );
    }

    #[test]
    fn leftmost_longest() {
        let s = CorpusSentence::tokenize("s", "New York City");
        let spans = match_sentences(&dict(&["New York", "York"]), &[s], &RuleToggles::common());
        assert_eq!(ranges(&spans), vec![(0, 2)]);
    }

    #[test]
    fn token_boundaries_only() {
        let s = CorpusSentence::tokenize("s", "heart art artery");
        let spans = match_sentences(&dict(&["art"]), &[s], &RuleToggles::common());
        assert_eq!(ranges(&spans), vec![(1, 2)]);
    }

    #[test]
    fn abbreviation_alias_maps_to_long_form() {
        let mut d = dict(&["Crohn's disease"]);
        d.add_abbreviation("CD", "Crohn's disease");
        let s = CorpusSentence::tokenize("s", "Patients with CD were seen.");
        let spans = match_sentences(&d, &[s], &RuleToggles::common());
        assert_eq!(ranges(&spans), vec![(2, 3)]);
        assert_eq!(spans[0].phrase_key, "crohn's disease");
        assert!(spans[0].via_abbreviation);
    }

    #[test]
    fn failure_links_find_suffix_patterns() {
        let m = TokenMatcher::new(["a b c", "b c d", "c", "b"]);
        let toks: Vec<String> = "a b c d".split(' ').map(str::to_string).collect();
        let got: Vec<(usize, usize, usize)> = m
            .find_all(&toks)
            .into_iter()
            .map(|c| (c.token_start, c.token_end, c.pattern))
            .collect();
        assert_eq!(got, vec![(0, 3, 0), (1, 2, 3), (1, 4, 1), (2, 3, 2)]);
    }

    #[test]
    fn multiword_tokens_align_to_edges() {
        let m = TokenMatcher::new(["new york", "york city"]);
        let toks = vec!["New  York".to_string(), "City".to_string()];
        let got: Vec<(usize, usize)> = m
            .find_all(&toks)
            .iter()
            .map(|c| (c.token_start, c.token_end))
            .collect();
        assert_eq!(got, vec![(0, 1)]);
    }

    fn span(a: usize, b: usize) -> MatchSpan {
        MatchSpan {
            sentence_id: "s".into(),
            token_start: a,
            token_end: b,
            phrase_key: "red sox".into(),
            assigned_type: None,
            via_abbreviation: false,
        }
    }

    #[test]
    fn refine_expands_to_strict_container() {
        // Tokens: The(0) Boston(1) Red(2) Sox(3) won(4) .(5)
        let s = CorpusSentence::tokenize("s", "The Boston Red Sox won.");
        let q = vec!["Boston Red Sox".to_string(), "Red Sox won".to_string()];
        let r = refine_boundaries(&span(2, 4), &s, &q);
        assert_eq!((r.token_start, r.token_end), (1, 4));
        let none = refine_boundaries(&span(2, 4), &s, &["Chicago Cubs".to_string()]);
        assert_eq!((none.token_start, none.token_end), (2, 4));
        let equal = refine_boundaries(&span(2, 4), &s, &["Red Sox".to_string()]);
        assert_eq!((equal.token_start, equal.token_end), (2, 4));
    }

    #[test]
    fn rule_ten_keeps_overlap_free() {
        let mut d = dict(&["Red Sox", "Boston"]);
        d.set_quality_phrases(vec!["Boston Red Sox".into()]);
        let s = CorpusSentence::tokenize("s", "The Boston Red Sox won.");
        let on = RuleToggles::common();
        // "Boston" blocks the expansion of "Red Sox".
        assert_eq!(
            ranges(&match_sentences(&d, std::slice::from_ref(&s), &on)),
            vec![(1, 2), (2, 4)]
        );
        let mut d2 = dict(&["Red Sox"]);
        d2.set_quality_phrases(vec!["Boston Red Sox".into()]);
        assert_eq!(
            ranges(&match_sentences(&d2, std::slice::from_ref(&s), &on)),
            vec![(1, 4)]
        );
        let off = RuleToggles::common().with(&[], &[10]).unwrap();
        assert_eq!(ranges(&match_sentences(&d2, &[s], &off)), vec![(2, 4)]);
    }
}
