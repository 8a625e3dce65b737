mod common;

use std::collections::BTreeSet;

use common::oracle_entropy;
use lpmforge::log::EventLog;
use lpmforge::miner::{mine, MinerConfig};
use lpmforge::projections::*;
use lpmforge::tree::ProcessTree;
use proptest::prelude::*;

fn set(s: &str) -> BTreeSet<String> {
    s.chars().map(|c| c.to_string()).collect()
}

fn sets(ss: &[&str]) -> Vec<BTreeSet<String>> {
    let mut v: Vec<_> = ss.iter().map(|s| set(s)).collect();
    v.sort();
    v
}

fn repeat(parts: &[(&str, usize)]) -> EventLog {
    let v: Vec<&str> = parts.iter().flat_map(|(s, n)| std::iter::repeat(*s).take(*n)).collect();
    EventLog::from_strings(&v)
}

#[test]
fn markov_separates_blocks() {
    let log = repeat(&[("abab", 5), ("cdcd", 5)]);
    assert_eq!(markov_projections(&log, DEFAULT_INFLATION).unwrap().sets, sets(&["ab", "cd"]));
}

#[test]
fn markov_trivial_cases() {
    assert_eq!(markov_projections(&repeat(&[("aaa", 2)]), 1.5).unwrap().sets, sets(&["a"]));
    assert!(markov_projections(&EventLog::new(vec![]).unwrap(), 1.5).unwrap().sets.is_empty());
    assert!(markov_projections(&repeat(&[("ab", 1)]), 1.0).is_err());
}

#[test]
fn markov_uniform_connectivity_is_one_cluster() {
    let log = EventLog::from_strings(&["abc", "acb", "bac", "bca", "cab", "cba"]);
    assert_eq!(markov_projections(&log, DEFAULT_INFLATION).unwrap().sets, sets(&["abc"]));
}

#[test]
fn connectedness_rows_are_stochastic() {
    let (_, m) = connectedness(&repeat(&[("abcab", 3), ("ca", 2)])).unwrap();
    for row in m {
        assert!((row.iter().sum::<f64>() - 1.0).abs() < 1e-12);
    }
}

fn oracle_log_entropy(log: &EventLog, s: &BTreeSet<String>) -> f64 {
    let p = log.project(s);
    s.iter().filter(|a| p.alphabet().contains(*a)).map(|a| oracle_entropy(&p, a, None)).sum()
}

#[test]
fn entropy_threshold_extremes() {
    let log = repeat(&[("abc", 3), ("bca", 2), ("cab", 1)]);
    assert_eq!(entropy_projections(&log, f64::INFINITY).unwrap().sets, sets(&["abc"]));
    let acts: Vec<String> = log.alphabet().iter().cloned().collect();
    let mut lowest = f64::INFINITY;
    for i in 0..acts.len() {
        for j in i + 1..acts.len() {
            let pair: BTreeSet<String> = [acts[i].clone(), acts[j].clone()].into();
            lowest = lowest.min(oracle_log_entropy(&log, &pair));
        }
    }
    assert!(lowest > 0.1);
    assert_eq!(entropy_projections(&log, lowest - 0.05).unwrap().sets, sets(&["a", "b", "c"]));
    assert!(entropy_projections(&log, -1.0).is_err());
}

#[test]
fn entropy_keeps_deterministic_pair() {
    let log = repeat(&[("ab", 4)]);
    assert_eq!(oracle_log_entropy(&log, &set("ab")), 0.0);
    assert_eq!(entropy_projections(&log, 0.0).unwrap().sets, sets(&["ab"]));
}

#[test]
fn entropy_frontier_cap() {
    let log = EventLog::from_strings(&["abcdef", "fedcba"]);
    let p = entropy_projections_capped(&log, f64::INFINITY, 3).unwrap();
    assert!(p.truncated);
    assert!(p.is_containment_free());
}

#[test]
fn mrig_deterministic_row() {
    // projected on {a}: a is followed by the end 2/3 of the time, by a 1/3;
    // with b every a is followed by b
    let log = repeat(&[("ab", 3), ("abab", 3)]);
    let before = oracle_entropy(&log.project(&set("a")), "a", None);
    assert!(before > 0.0);
    assert!((mrig(&log, &set("ab"), &set("a")).unwrap() - 1.0).abs() < 1e-12);
    assert!(mrig_projections(&log, 0.99).unwrap().sets.contains(&set("ab")));
}

#[test]
fn mrig_threshold_one_keeps_singletons() {
    let log = repeat(&[("ab", 3), ("abab", 3), ("cab", 2)]);
    assert_eq!(mrig_projections(&log, 1.0).unwrap().sets, sets(&["a", "b", "c"]));
    assert!(mrig_projections(&log, 1.5).is_err());
}

fn cfg() -> MinerConfig {
    MinerConfig { min_support: 2, max_iterations: 2, top_k: usize::MAX, ..MinerConfig::default() }
}

#[test]
fn projected_on_everything_is_plain_mining() {
    let log = repeat(&[("abcab", 3), ("cab", 2)]);
    let all = ProjectionSet { sets: vec![log.alphabet().clone()], truncated: false };
    let p = mine_projected(&log, &all, &cfg()).unwrap();
    assert_eq!(p, mine(&log, &cfg()).unwrap().ranking);
}

#[test]
fn disjoint_sets_union_two_runs() {
    let log = repeat(&[("abcd", 3), ("badc", 2)]);
    let two = ProjectionSet { sets: sets(&["ab", "cd"]), truncated: false };
    let got: BTreeSet<ProcessTree> = mine_projected(&log, &two, &cfg()).unwrap().into_iter().map(|e| e.tree).collect();
    let mut want = BTreeSet::new();
    for q in &two.sets {
        want.extend(mine(&log.project(q), &cfg()).unwrap().ranking.into_iter().map(|e| e.tree));
    }
    assert_eq!(got, want);
}

#[test]
fn overlapping_sets_deduplicate() {
    let log = repeat(&[("abc", 3)]);
    let two = ProjectionSet { sets: sets(&["ab", "bc"]), truncated: false };
    let got = mine_projected(&log, &two, &cfg()).unwrap();
    let b = ProcessTree::activity("b");
    assert_eq!(got.iter().filter(|e| e.tree == b).count(), 1);
    let trees: BTreeSet<_> = got.iter().map(|e| &e.tree).collect();
    assert_eq!(trees.len(), got.len());
}

#[test]
fn ndcg_of_full_ranking_is_one() {
    let log = repeat(&[("abcab", 3), ("cab", 2)]);
    let full = mine(&log, &cfg()).unwrap().ranking;
    for k in [1, 5, 20] {
        assert_eq!(ranking_ndcg(&full, &full, k).unwrap(), 1.0);
    }
}

fn arb_log(acts: u8, max_events: usize) -> impl Strategy<Value = EventLog> {
    prop::collection::vec(prop::collection::vec(0..acts, 1..8), 1..6).prop_map(move |ts| {
        let mut left = max_events;
        let owned: Vec<String> = ts
            .iter()
            .map(|t| {
                let take = t.len().min(left);
                left -= take;
                t[..take].iter().map(|&c| (b'a' + c) as char).collect()
            })
            .filter(|s: &String| !s.is_empty())
            .collect();
        EventLog::from_strings(&owned.iter().map(|s| s.as_str()).collect::<Vec<_>>())
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn projection_sets_are_containment_free(log in arb_log(6, 30), r in 1.1f64..3.0, th in 0.0f64..6.0, tm in 0.0f64..1.0) {
        for p in [
            markov_projections(&log, r).unwrap(),
            entropy_projections(&log, th).unwrap(),
            mrig_projections(&log, tm).unwrap(),
        ] {
            prop_assert!(p.is_containment_free());
            let covered: BTreeSet<String> = p.sets.iter().flatten().cloned().collect();
            prop_assert_eq!(&covered, log.alphabet());
        }
    }

    #[test]
    fn projected_patterns_are_found_by_full_mining(log in arb_log(8, 20), method in 0..3usize) {
        let p = match method {
            0 => markov_projections(&log, DEFAULT_INFLATION),
            1 => entropy_projections(&log, default_entropy_threshold(log.alphabet().len())),
            _ => mrig_projections(&log, DEFAULT_MRIG_THRESHOLD),
        }.unwrap();
        let projected = mine_projected(&log, &p, &cfg()).unwrap();
        let full = mine(&log, &cfg()).unwrap().ranking;
        let trees: BTreeSet<_> = full.iter().map(|e| &e.tree).collect();
        for e in &projected {
            prop_assert!(trees.contains(&e.tree), "{} missing from full mining", e.tree);
        }
        for k in [5, 10, 20] {
            let v = ranking_ndcg(&projected, &full, k).unwrap();
            prop_assert!((0.0..=1.0 + 1e-12).contains(&v));
        }
    }
}
