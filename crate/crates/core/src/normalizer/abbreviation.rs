//! Schwartz–Hearst short-form detection for a known long form.

use crate::text::{char_len, fold_char};

/// Short form found in parentheses right after `long_form` in `sentence`.
///
/// The candidate is cut at the first `,` or `;`, must be 2..=10 chars with
/// at most two tokens, start with an alphanumeric char, contain a letter,
/// and its alphanumerics must match right to left inside the long form with
/// the first one landing at a word start. The long form may have at most
/// `min(|short| + 5, |short| * 2)` tokens.
pub fn detect_abbreviation(long_form: &str, sentence: &str) -> Option<String> {
    if long_form.is_empty() || !sentence.contains('(') {
        return None;
    }
    let mut from = 0;
    while let Some(pos) = sentence[from..].find(long_form) {
        let at = from + pos;
        let after = &sentence[at + long_form.len()..];
        if let Some(candidate) = parenthesized(after) {
            if is_valid_pair(long_form, candidate) {
                return Some(candidate.to_string());
            }
        }
        from = at + long_form.chars().next().map_or(1, char::len_utf8);
    }
    None
}

fn parenthesized(after: &str) -> Option<&str> {
    let rest = after.trim_start_matches([' ', '\t']);
    let inner = rest.strip_prefix('(')?;
    let close = inner.find(')')?;
    let mut candidate = &inner[..close];
    if let Some(cut) = candidate.find([',', ';']) {
        candidate = &candidate[..cut];
    }
    Some(candidate.trim())
}

fn is_valid_pair(long_form: &str, short: &str) -> bool {
    let len = char_len(short);
    if !(2..=10).contains(&len) || short.split_whitespace().count() > 2 {
        return false;
    }
    let Some(first) = short.chars().next() else {
        return false;
    };
    if !first.is_alphanumeric() || !short.chars().any(char::is_alphabetic) {
        return false;
    }
    let long_tokens = long_form.split_whitespace().count();
    if long_tokens > (len + 5).min(len * 2) {
        return false;
    }
    matches_right_to_left(short, long_form)
}

fn matches_right_to_left(short: &str, long: &str) -> bool {
    let s: Vec<char> = short.chars().map(fold_char).collect();
    let l: Vec<char> = long.chars().map(fold_char).collect();
    let mut li = l.len();
    for si in (0..s.len()).rev() {
        let c = s[si];
        if !c.is_alphanumeric() {
            continue;
        }
        loop {
            if li == 0 {
                return false;
            }
            li -= 1;
            let word_start = li == 0 || !l[li - 1].is_alphanumeric();
            if l[li] == c && (si > 0 || word_start) {
                break;
            }
        }
    }
    true
}
