//! Small text helpers shared by every stage.

/// Unicode simple lowercase: every char maps to exactly one char.
pub fn fold_char(c: char) -> char {
    let mut lower = c.to_lowercase();
    match (lower.next(), lower.next()) {
        (Some(l), None) => l,
        // Multi-char full mappings (e.g. U+0130) keep their first scalar,
        // which is the simple mapping for every such case in Unicode.
        (Some(l), Some(_)) => l,
        (None, _) => c,
    }
}

pub fn fold_case(s: &str) -> String {
    s.chars().map(fold_char).collect()
}

/// Collapse runs of whitespace to a single ASCII space and trim the ends.
pub fn squash_whitespace(s: &str) -> String {
    s.split_whitespace().collect::<Vec<_>>().join(" ")
}

/// Dictionary / matcher key: simple-lowercased, whitespace squashed.
pub fn match_key(s: &str) -> String {
    fold_case(&squash_whitespace(s))
}

/// Byte offset of the `idx`-th char of `s` (or `s.len()` at the end).
pub fn char_to_byte(s: &str, idx: usize) -> Option<usize> {
    if idx == 0 {
        return Some(0);
    }
    let mut count = 0;
    for (b, _) in s.char_indices() {
        if count == idx {
            return Some(b);
        }
        count += 1;
    }
    (count == idx).then_some(s.len())
}

/// Slice `s` by char offsets `[start, end)`.
pub fn char_slice(s: &str, start: usize, end: usize) -> Option<&str> {
    if start > end {
        return None;
    }
    let b0 = char_to_byte(s, start)?;
    let b1 = char_to_byte(s, end)?;
    Some(&s[b0..b1])
}

pub fn char_len(s: &str) -> usize {
    s.chars().count()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn simple_fold() {
        assert_eq!(fold_case("Crohn's DISEASE"), "crohn's disease");
        assert_eq!(fold_case("\u{130}stanbul"), "istanbul");
        assert_eq!(char_len(&fold_case("\u{130}")), 1);
    }

    #[test]
    fn char_slicing() {
        let s = "Café (CD) ok";
        assert_eq!(char_slice(s, 0, 4), Some("Café"));
        assert_eq!(char_slice(s, 6, 8), Some("CD"));
        assert_eq!(char_slice(s, 10, 12), Some("ok"));
        assert_eq!(char_slice(s, 10, 13), None);
        assert_eq!(char_slice(s, 3, 2), None);
    }

    #[test]
    fn keys() {
        assert_eq!(match_key("  New\t York "), "new york");
    }
}
