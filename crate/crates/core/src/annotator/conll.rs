//! CoNLL two-column files: `token<TAB>tag`, blank line between sentences.

use std::path::Path;

use super::bio::{LabeledSentence, Tag};
use crate::error::{Error, Result};

/// Serialize sentences. Zero-token sentences are skipped; they have no
/// CoNLL representation.
pub fn write_conll(sentences: &[LabeledSentence]) -> Result<String> {
    let mut out = String::new();
    let mut first = true;
    for s in sentences {
        if s.tokens.len() != s.tags.len() {
            return Err(Error::Invariant(format!(
                "sentence {:?}: {} tokens but {} tags",
                s.sentence_id,
                s.tokens.len(),
                s.tags.len()
            )));
        }
        if s.tokens.is_empty() {
            continue;
        }
        if !first {
            out.push('\n');
        }
        first = false;
        for (tok, tag) in s.tokens.iter().zip(&s.tags) {
            if tok.contains(['\t', '\n', '\r']) || tok.trim().is_empty() {
                return Err(Error::data(format!(
                    "sentence {:?}: token {tok:?} cannot be written as CoNLL",
                    s.sentence_id
                )));
            }
            out.push_str(tok);
            out.push('\t');
            out.push_str(&tag.to_string());
            out.push('\n');
        }
    }
    Ok(out)
}

/// Parse CoNLL text. Sentences get ids "0", "1", ... in file order.
/// `-DOCSTART-` lines are skipped; the tag is the last tab-separated column.
pub fn parse_conll(text: &str) -> Result<Vec<LabeledSentence>> {
    let mut out = Vec::new();
    let mut tokens = Vec::new();
    let mut tags = Vec::new();
    let flush = |tokens: &mut Vec<String>, tags: &mut Vec<Tag>, out: &mut Vec<LabeledSentence>| {
        if !tokens.is_empty() {
            out.push(LabeledSentence {
                sentence_id: out.len().to_string(),
                tokens: std::mem::take(tokens),
                tags: std::mem::take(tags),
            });
        }
    };
    for (i, line) in text.lines().enumerate() {
        let line = line.strip_suffix('\r').unwrap_or(line);
        if line.trim().is_empty() {
            flush(&mut tokens, &mut tags, &mut out);
            continue;
        }
        if line.starts_with("-DOCSTART-") {
            continue;
        }
        let (tok, tag) = line.rsplit_once('\t').ok_or_else(|| {
            Error::data_at(i + 1, format!("expected token<TAB>tag, got {line:?}"))
        })?;
        let tok = tok.split('\t').next().unwrap_or(tok);
        if tok.trim().is_empty() {
            return Err(Error::data_at(i + 1, "empty token"));
        }
        let tag: Tag = tag.trim().parse().map_err(|e: Error| match e {
            Error::Data { message, .. } => Error::data_at(i + 1, message),
            other => other,
        })?;
        tokens.push(tok.to_string());
        tags.push(tag);
    }
    flush(&mut tokens, &mut tags, &mut out);
    Ok(out)
}

pub fn read_conll(path: &Path) -> Result<Vec<LabeledSentence>> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_conll(&text).map_err(|e| e.in_file(path))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn format_is_exact() {
        let s = vec![
            LabeledSentence {
                sentence_id: "0".into(),
                tokens: vec!["Heart".into(), "disease".into()],
                tags: vec![Tag::B("D".into()), Tag::I("D".into())],
            },
            LabeledSentence {
                sentence_id: "1".into(),
                tokens: vec!["ok".into()],
                tags: vec![Tag::O],
            },
        ];
        let text = write_conll(&s).unwrap();
        assert_eq!(text, "Heart\tB-D\ndisease\tI-D\n\nok\tO\n");
        assert_eq!(parse_conll(&text).unwrap(), s);
    }

    #[test]
    fn parse_errors_carry_lines() {
        match parse_conll("a\tO\nb\tX-Y\n") {
            Err(Error::Data { line: Some(2), .. }) => {}
            other => panic!("{other:?}"),
        }
        match parse_conll("a\tO\n\nnotab\n") {
            Err(Error::Data { line: Some(3), .. }) => {}
            other => panic!("{other:?}"),
        }
        let multi = parse_conll("-DOCSTART-\tO\n\nEU\tNNP\tB-ORG\n").unwrap();
        assert_eq!(multi[0].tokens, vec!["EU"]);
        assert_eq!(multi[0].tags, vec![Tag::B("ORG".into())]);
    }

    fn tag_strategy() -> impl Strategy<Value = Tag> {
        prop_oneof![
            Just(Tag::O),
            "[A-Za-z]{1,4}".prop_map(Tag::B),
            "[A-Za-z]{1,4}".prop_map(Tag::I),
        ]
    }

    proptest! {
        #[test]
        fn write_then_parse_is_identity(
            sents in proptest::collection::vec(
                proptest::collection::vec(("[A-Za-z0-9'.,\u{e9}-]{1,6}", tag_strategy()), 1..8),
                0..6,
            )
        ) {
            let sentences: Vec<LabeledSentence> = sents.into_iter().enumerate().map(|(i, toks)| {
                let (tokens, tags) = toks.into_iter().unzip();
                LabeledSentence { sentence_id: i.to_string(), tokens, tags }
            }).collect();
            let text = write_conll(&sentences).unwrap();
            prop_assert_eq!(parse_conll(&text).unwrap(), sentences);
        }
    }
}
