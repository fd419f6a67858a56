use std::collections::HashSet;

use serde::Serialize;

use super::results::RetrievedPhrase;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SentenceBudgetResult {
    pub question_id: Option<String>,
    pub kept_sentences: Vec<String>,
    pub kept_phrases: Vec<RetrievedPhrase>,
    /// Fewer than `k_l` distinct sentences were available.
    pub exhausted: bool,
}

/// Walk `results` in rank order, keeping the first `k_l` distinct evidence
/// sentences. Every phrase whose sentence is kept survives, including
/// phrases seen after the budget filled.
pub fn collect_training_sentences(results: &[RetrievedPhrase], k_l: usize) -> SentenceBudgetResult {
    let mut kept: HashSet<&str> = HashSet::new();
    let mut kept_sentences = Vec::new();
    let mut kept_phrases = Vec::new();
    for r in results {
        let id = r.sentence_id.as_str();
        if !kept.contains(id) {
            if kept_sentences.len() >= k_l {
                continue;
            }
            kept.insert(id);
            kept_sentences.push(r.sentence_id.clone());
        }
        kept_phrases.push(r.clone());
    }
    SentenceBudgetResult {
        question_id: results.first().map(|r| r.question_id.clone()),
        exhausted: kept_sentences.len() < k_l,
        kept_sentences,
        kept_phrases,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn phrases(sids: &[&str]) -> Vec<RetrievedPhrase> {
        sids.iter()
            .enumerate()
            .map(|(i, s)| RetrievedPhrase {
                question_id: "q".into(),
                rank: i as u32 + 1,
                surface: format!("p{i}"),
                score: -(i as f64),
                sentence_id: s.to_string(),
                char_start: 0,
                char_end: 1,
            })
            .collect()
    }

    /// Independent walk: sentence ids first-seen in rank order, cut at k.
    fn oracle(sids: &[String], k: usize) -> (Vec<String>, Vec<u32>) {
        let mut order: Vec<String> = Vec::new();
        for s in sids {
            if !order.contains(s) {
                order.push(s.clone());
            }
        }
        order.truncate(k);
        let ranks = sids
            .iter()
            .enumerate()
            .filter(|(_, s)| order.contains(s))
            .map(|(i, _)| i as u32 + 1)
            .collect();
        (order, ranks)
    }

    #[test]
    fn budget_of_two_over_five() {
        let r = collect_training_sentences(&phrases(&["A", "B", "A", "C", "B"]), 2);
        assert_eq!(r.kept_sentences, vec!["A", "B"]);
        let ranks: Vec<u32> = r.kept_phrases.iter().map(|p| p.rank).collect();
        assert_eq!(ranks, vec![1, 2, 3, 5]);
        assert!(!r.exhausted);
    }

    #[test]
    fn budget_not_binding_and_empty() {
        let r = collect_training_sentences(&phrases(&["A", "B", "A"]), 10);
        assert_eq!(r.kept_phrases.len(), 3);
        assert!(r.exhausted);
        let e = collect_training_sentences(&[], 3);
        assert!(e.kept_sentences.is_empty() && e.kept_phrases.is_empty() && e.exhausted);
    }

    proptest! {
        #[test]
        fn matches_brute_force_walk(ids in proptest::collection::vec(0u8..6, 0..30), k in 1usize..8) {
            let sids: Vec<String> = ids.iter().map(|i| format!("s{i}")).collect();
            let refs: Vec<&str> = sids.iter().map(String::as_str).collect();
            let r = collect_training_sentences(&phrases(&refs), k);
            let (sents, ranks) = oracle(&sids, k);
            prop_assert!(r.kept_sentences.len() <= k);
            prop_assert_eq!(r.kept_sentences, sents);
            prop_assert_eq!(r.kept_phrases.iter().map(|p| p.rank).collect::<Vec<_>>(), ranks);
        }

        #[test]
        fn re_appended_kept_pairs_change_nothing(ids in proptest::collection::vec(0u8..6, 1..20), k in 1usize..5, extra in 0usize..10) {
            let sids: Vec<String> = ids.iter().map(|i| format!("s{i}")).collect();
            let refs: Vec<&str> = sids.iter().map(String::as_str).collect();
            let base = phrases(&refs);
            let r = collect_training_sentences(&base, k);
            let mut extended = base.clone();
            for (n, p) in r.kept_phrases.iter().cycle().take(extra).enumerate() {
                let mut dup = p.clone();
                dup.rank = base.len() as u32 + n as u32 + 1;
                extended.push(dup);
            }
            let r2 = collect_training_sentences(&extended, k);
            prop_assert_eq!(&r2.kept_sentences, &r.kept_sentences);
            let pairs = |x: &SentenceBudgetResult| x.kept_phrases.iter()
                .map(|p| (p.surface.clone(), p.sentence_id.clone()))
                .collect::<std::collections::BTreeSet<_>>();
            prop_assert_eq!(pairs(&r2), pairs(&r));
        }
    }
}
