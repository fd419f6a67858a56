use std::collections::HashMap;
use std::io::BufRead;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::text::{char_len, char_slice};

/// A token with its char span `[start, end)` in the sentence text.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(from = "(String, usize, usize)", into = "(String, usize, usize)")]
pub struct Token {
    pub surface: String,
    pub start: usize,
    pub end: usize,
}

impl From<(String, usize, usize)> for Token {
    fn from((surface, start, end): (String, usize, usize)) -> Self {
        Token {
            surface,
            start,
            end,
        }
    }
}

impl From<Token> for (String, usize, usize) {
    fn from(t: Token) -> Self {
        (t.surface, t.start, t.end)
    }
}

/// One pre-segmented corpus sentence. Offsets are in chars, not bytes.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CorpusSentence {
    pub sentence_id: String,
    pub text: String,
    pub tokens: Vec<Token>,
    /// Pre-marked candidate phrase spans, used only by the toy retriever.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub candidates: Option<Vec<(usize, usize)>>,
}

impl CorpusSentence {
    /// Build a sentence by splitting `text` on whitespace and peeling
    /// leading/trailing ASCII punctuation into their own tokens.
    pub fn tokenize(sentence_id: impl Into<String>, text: impl Into<String>) -> Self {
        let text = text.into();
        let chars: Vec<char> = text.chars().collect();
        let mut tokens = Vec::new();
        let mut i = 0;
        while i < chars.len() {
            if chars[i].is_whitespace() {
                i += 1;
                continue;
            }
            let mut j = i;
            while j < chars.len() && !chars[j].is_whitespace() {
                j += 1;
            }
            let (mut a, mut b) = (i, j);
            let mut pieces = Vec::new();
            while a < b && is_split_punct(chars[a]) {
                pieces.push((a, a + 1));
                a += 1;
            }
            let mut tail = Vec::new();
            while b > a && is_split_punct(chars[b - 1]) {
                tail.push((b - 1, b));
                b -= 1;
            }
            if a < b {
                pieces.push((a, b));
            }
            pieces.extend(tail.into_iter().rev());
            for (s, e) in pieces {
                tokens.push(Token {
                    surface: chars[s..e].iter().collect(),
                    start: s,
                    end: e,
                });
            }
            i = j;
        }
        CorpusSentence {
            sentence_id: sentence_id.into(),
            text,
            tokens,
            candidates: None,
        }
    }

    pub fn surfaces(&self) -> Vec<String> {
        self.tokens.iter().map(|t| t.surface.clone()).collect()
    }

    pub fn slice(&self, start: usize, end: usize) -> Option<&str> {
        char_slice(&self.text, start, end)
    }

    pub fn validate(&self) -> Result<()> {
        let n = char_len(&self.text);
        let mut prev_end = 0;
        for (i, t) in self.tokens.iter().enumerate() {
            if t.surface.trim().is_empty() {
                return Err(Error::data(format!(
                    "sentence {:?}: token {i} is blank",
                    self.sentence_id
                )));
            }
            if t.start >= t.end || t.end > n || t.start < prev_end {
                return Err(Error::data(format!(
                    "sentence {:?}: token {i} span [{}, {}) is empty, out of bounds or overlapping",
                    self.sentence_id, t.start, t.end
                )));
            }
            if self.slice(t.start, t.end) != Some(t.surface.as_str()) {
                return Err(Error::data(format!(
                    "sentence {:?}: token {i} surface {:?} does not match text",
                    self.sentence_id, t.surface
                )));
            }
            prev_end = t.end;
        }
        if let Some(cands) = &self.candidates {
            for &(s, e) in cands {
                if s >= e || e > n {
                    return Err(Error::data(format!(
                        "sentence {:?}: candidate span [{s}, {e}) out of bounds",
                        self.sentence_id
                    )));
                }
            }
        }
        Ok(())
    }

    /// Token index range exactly covering the char span, if it aligns.
    pub fn token_range(&self, start: usize, end: usize) -> Option<(usize, usize)> {
        let first = self.tokens.iter().position(|t| t.start == start)?;
        let last = self.tokens.iter().position(|t| t.end == end)?;
        (first <= last).then_some((first, last + 1))
    }
}

fn is_split_punct(c: char) -> bool {
    matches!(
        c,
        ',' | '.' | ';' | ':' | '!' | '?' | '(' | ')' | '[' | ']' | '"' | '{' | '}'
    )
}

/// Sentences in file order, indexed by id.
#[derive(Clone, Debug, Default)]
pub struct Corpus {
    sentences: Vec<CorpusSentence>,
    index: HashMap<String, usize>,
}

impl Corpus {
    pub fn new(sentences: Vec<CorpusSentence>) -> Result<Self> {
        let mut index = HashMap::with_capacity(sentences.len());
        for (i, s) in sentences.iter().enumerate() {
            s.validate().map_err(|e| relocate(e, i + 1))?;
            if index.insert(s.sentence_id.clone(), i).is_some() {
                return Err(Error::data_at(
                    i + 1,
                    format!("duplicate sentence id {:?}", s.sentence_id),
                ));
            }
        }
        Ok(Corpus { sentences, index })
    }

    pub fn read(reader: impl BufRead) -> Result<Self> {
        let mut sentences = Vec::new();
        for (i, line) in reader.lines().enumerate() {
            let line = line.map_err(|e| Error::data_at(i + 1, e.to_string()))?;
            if line.trim().is_empty() {
                continue;
            }
            let s: CorpusSentence = serde_json::from_str(&line)
                .map_err(|e| Error::data_at(i + 1, format!("malformed corpus record: {e}")))?;
            s.validate().map_err(|e| relocate(e, i + 1))?;
            sentences.push(s);
        }
        Self::new(sentences)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
        Self::read(std::io::BufReader::new(file)).map_err(|e| e.in_file(path))
    }

    pub fn to_jsonl(&self) -> String {
        let mut out = String::new();
        for s in &self.sentences {
            out.push_str(&serde_json::to_string(s).expect("corpus records serialize"));
            out.push('\n');
        }
        out
    }

    pub fn get(&self, id: &str) -> Option<&CorpusSentence> {
        self.index.get(id).map(|&i| &self.sentences[i])
    }

    pub fn sentences(&self) -> &[CorpusSentence] {
        &self.sentences
    }

    pub fn len(&self) -> usize {
        self.sentences.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sentences.is_empty()
    }
}

fn relocate(e: Error, line: usize) -> Error {
    match e {
        Error::Data {
            path,
            line: None,
            message,
        } => Error::Data {
            path,
            line: Some(line),
            message,
        },
        other => other,
    }
}
