use std::collections::HashSet;
use std::path::Path;

use crate::error::{Error, Result};
use crate::text::fold_case;

const BUNDLED: &str = include_str!("../../data/stopwords.txt");

/// Parse a stopword list: one word per line, `#` starts a comment.
pub fn parse_stopwords(text: &str) -> HashSet<String> {
    text.lines()
        .map(|l| l.split('#').next().unwrap_or("").trim())
        .filter(|l| !l.is_empty())
        .map(fold_case)
        .collect()
}

pub fn bundled_stopwords() -> HashSet<String> {
    parse_stopwords(BUNDLED)
}

pub fn load_stopwords(path: &Path) -> Result<HashSet<String>> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    Ok(parse_stopwords(&text))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bundled_list_has_noise_words() {
        let s = bundled_stopwords();
        assert!(s.len() > 300);
        for w in ["us", "was", "the", "and"] {
            assert!(s.contains(w), "{w}");
        }
    }

    #[test]
    fn comments_and_case() {
        let s = parse_stopwords("# header\nFoo  # trailing\n\n bar\n");
        assert_eq!(s.len(), 2);
        assert!(s.contains("foo") && s.contains("bar"));
    }
}
