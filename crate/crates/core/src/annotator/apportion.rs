//! Splitting an ambiguous phrase's occurrences across its types in
//! proportion to retrieval counts (largest-remainder method).

use std::cmp::Ordering;
use std::collections::BTreeMap;

use super::dictionary::DictEntry;
use super::matcher::MatchSpan;
use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Allocation {
    pub type_label: String,
    pub count: u64,
    pub seats: usize,
}

/// Allocate `n` occurrences. Returned in block order: most seats first,
/// ties by larger retrieval count, then type name.
///
/// Quota of type t is `n * count_t / total`; floors first, then the
/// leftover seats go to the largest remainders (ties by larger count, then
/// name). Remainders are compared exactly as integers `n * count_t mod total`.
pub fn apportion_counts(counts: &BTreeMap<String, u64>, n: usize) -> Result<Vec<Allocation>> {
    let total: u128 = counts.values().map(|&c| c as u128).sum();
    if total == 0 {
        return Err(Error::Invariant(
            "apportioning an entry with no positive counts".into(),
        ));
    }
    let n128 = n as u128;
    let mut rows: Vec<(Allocation, u128)> = counts
        .iter()
        .filter(|(_, &c)| c > 0)
        .map(|(t, &c)| {
            let scaled = n128 * c as u128;
            (
                Allocation {
                    type_label: t.clone(),
                    count: c,
                    seats: (scaled / total) as usize,
                },
                scaled % total,
            )
        })
        .collect();
    let assigned: usize = rows.iter().map(|(a, _)| a.seats).sum();
    let mut leftover = n - assigned;
    let mut order: Vec<usize> = (0..rows.len()).collect();
    order.sort_by(|&i, &j| {
        let (a, ra) = &rows[i];
        let (b, rb) = &rows[j];
        rb.cmp(ra)
            .then(b.count.cmp(&a.count))
            .then(a.type_label.cmp(&b.type_label))
    });
    for i in order {
        if leftover == 0 {
            break;
        }
        rows[i].0.seats += 1;
        leftover -= 1;
    }
    let mut out: Vec<Allocation> = rows.into_iter().map(|(a, _)| a).collect();
    out.sort_by(block_order);
    Ok(out)
}

fn block_order(a: &Allocation, b: &Allocation) -> Ordering {
    b.seats
        .cmp(&a.seats)
        .then(b.count.cmp(&a.count))
        .then(a.type_label.cmp(&b.type_label))
}

/// Assign types to all occurrences of one entry. Occurrences are ordered by
/// (sentence id, token start) and dealt out in contiguous blocks.
pub fn apportion_types(
    entry: &DictEntry,
    mut occurrences: Vec<MatchSpan>,
) -> Result<Vec<MatchSpan>> {
    occurrences.sort_by(|a, b| {
        a.sentence_id
            .cmp(&b.sentence_id)
            .then(a.token_start.cmp(&b.token_start))
    });
    let allocation = apportion_counts(&entry.counts, occurrences.len())?;
    let mut it = occurrences.iter_mut();
    for a in &allocation {
        for span in it.by_ref().take(a.seats) {
            span.assigned_type = Some(a.type_label.clone());
        }
    }
    Ok(occurrences)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn counts(pairs: &[(&str, u64)]) -> BTreeMap<String, u64> {
        pairs.iter().map(|(t, c)| (t.to_string(), *c)).collect()
    }

    fn seats(alloc: &[Allocation]) -> Vec<(&str, usize)> {
        alloc
            .iter()
            .map(|a| (a.type_label.as_str(), a.seats))
            .collect()
    }

    #[test]
    fn thirty_seventy() {
        let a = apportion_counts(&counts(&[("location", 3), ("person", 7)]), 10).unwrap();
        assert_eq!(seats(&a), vec![("person", 7), ("location", 3)]);
    }

    #[test]
    fn half_remainder_tie_goes_to_larger_count() {
        // Quotas 1.5 / 3.5, floors 1 / 3, one seat left, equal remainders.
        let a = apportion_counts(&counts(&[("location", 3), ("person", 7)]), 5).unwrap();
        assert_eq!(seats(&a), vec![("person", 4), ("location", 1)]);
    }

    #[test]
    fn single_type_and_zero() {
        let a = apportion_counts(&counts(&[("chemical", 4)]), 13).unwrap();
        assert_eq!(seats(&a), vec![("chemical", 13)]);
        let a = apportion_counts(&counts(&[("a", 1), ("b", 2)]), 0).unwrap();
        assert!(a.iter().all(|x| x.seats == 0));
        assert!(apportion_counts(&counts(&[("a", 0)]), 3).is_err());
    }

    #[test]
    fn block_assignment_is_ordered() {
        let entry = DictEntry {
            display: "Washington".into(),
            counts: counts(&[("location", 3), ("person", 7)]),
        };
        let occ: Vec<MatchSpan> = (0..10)
            .rev()
            .map(|i| MatchSpan {
                sentence_id: format!("s{i}"),
                token_start: 0,
                token_end: 1,
                phrase_key: "washington".into(),
                assigned_type: None,
                via_abbreviation: false,
            })
            .collect();
        let out = apportion_types(&entry, occ).unwrap();
        let types: Vec<&str> = out
            .iter()
            .map(|s| s.assigned_type.as_deref().unwrap())
            .collect();
        assert_eq!(&types[..7], &["person"; 7]);
        assert_eq!(&types[7..], &["location"; 3]);
        assert_eq!(out[0].sentence_id, "s0");
    }

    proptest! {
        #[test]
        fn conservation_and_proportionality(
            raw in proptest::collection::btree_map("[a-e]", 0u64..50, 1..5),
            n in 0usize..200,
        ) {
            prop_assume!(raw.values().any(|&c| c > 0));
            let alloc = apportion_counts(&raw, n).unwrap();
            prop_assert_eq!(alloc.iter().map(|a| a.seats).sum::<usize>(), n);
            let total: u64 = raw.values().sum();
            for a in &alloc {
                let quota = n as f64 * a.count as f64 / total as f64;
                prop_assert!((a.seats as f64 - quota).abs() < 1.0);
            }
        }
    }
}
