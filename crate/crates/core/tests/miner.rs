mod common;

use std::collections::{BTreeMap, BTreeSet};

use common::*;
use lpmforge::log::EventLog;
use lpmforge::miner::{expand, mine, min_word_length, MinerConfig, Pruning};
use lpmforge::quality::{evaluate, RankingWeights};
use lpmforge::tree::{Operator, ProcessTree};
use lpmforge::Error;
use proptest::prelude::*;

fn alpha(xs: &str) -> BTreeSet<String> {
    xs.chars().map(|c| c.to_string()).collect()
}

fn texts(ts: &BTreeSet<ProcessTree>) -> BTreeSet<String> {
    ts.iter().map(|t| t.to_string()).collect()
}

#[test]
fn expand_single_leaf() {
    let got = texts(&expand(&tree("a"), &alpha("ab")));
    let want: BTreeSet<String> =
        ["seq(a,a)", "seq(a,b)", "and(a,b)", "xor(a,b)", "loop(a)"].iter().map(|s| s.to_string()).collect();
    assert_eq!(got, want);
    // the last activity has no commutative expansions
    let got = texts(&expand(&tree("b"), &alpha("ab")));
    assert_eq!(got, ["seq(b,a)", "seq(b,b)", "loop(b)"].iter().map(|s| s.to_string()).collect());
}

#[test]
fn no_nested_loops() {
    let got = expand(&tree("loop(a)"), &alpha("ab"));
    assert!(!got.contains(&tree("loop(loop(a))")));
    assert!(got.contains(&tree("loop(seq(a,b))")));
    assert!(got.iter().all(|t| !t.to_string().contains("loop(loop(")));
}

#[test]
fn commutative_expansions_only_on_second_child() {
    let got = expand(&tree("xor(a,b)"), &alpha("abc"));
    assert!(!got.contains(&tree("xor(xor(a,c),b)")));
    assert!(got.contains(&tree("xor(a,xor(b,c))")));
    // a different commutative operator may still expand the first child
    assert!(got.contains(&tree("xor(and(a,c),b)")));
    assert!(got.contains(&tree("xor(seq(a,c),b)")));
    let got = expand(&tree("and(a,b)"), &alpha("abc"));
    assert!(!got.contains(&tree("and(and(a,b),b)")));
    assert!(got.contains(&tree("and(a,and(b,c))")));
}

/// Independent count of expansions following the rules leaf by leaf.
fn expected_count(t: &ProcessTree, alphabet: &[&str]) -> usize {
    fn go(t: &ProcessTree, parent: Option<&str>, first: bool, alphabet: &[&str], out: &mut usize) {
        match t {
            ProcessTree::Activity(a) => {
                let ia = alphabet.iter().position(|x| x == a).unwrap();
                let later = alphabet.len() - ia - 1;
                *out += alphabet.len();
                for op in ["and", "xor"] {
                    if !(parent == Some(op) && first) {
                        *out += later;
                    }
                }
                if parent != Some("loop") {
                    *out += 1;
                }
            }
            ProcessTree::Loop(c) => go(c, Some("loop"), true, alphabet, out),
            ProcessTree::Seq(l, r) => {
                go(l, Some("seq"), true, alphabet, out);
                go(r, Some("seq"), false, alphabet, out)
            }
            ProcessTree::Xor(l, r) => {
                go(l, Some("xor"), true, alphabet, out);
                go(r, Some("xor"), false, alphabet, out)
            }
            ProcessTree::And(l, r) => {
                go(l, Some("and"), true, alphabet, out);
                go(r, Some("and"), false, alphabet, out)
            }
        }
    }
    let mut n = 0;
    go(t, None, false, alphabet, &mut n);
    n
}

/// Collapses every binary node whose right child is a leaf onto its left
/// child, and every loop onto its child, one node at a time.
fn collapses(t: &ProcessTree) -> Vec<ProcessTree> {
    let mut out = Vec::new();
    match t {
        ProcessTree::Activity(_) => {}
        ProcessTree::Loop(c) => {
            if matches!(**c, ProcessTree::Activity(_)) {
                out.push((**c).clone());
            }
            out.extend(collapses(c).into_iter().map(ProcessTree::looped));
        }
        ProcessTree::Seq(l, r) | ProcessTree::Xor(l, r) | ProcessTree::And(l, r) => {
            let op = t.operator().unwrap();
            if matches!(**l, ProcessTree::Activity(_)) && matches!(**r, ProcessTree::Activity(_)) {
                out.push((**l).clone());
            }
            out.extend(collapses(l).into_iter().map(|x| ProcessTree::binary(op, x, (**r).clone())));
            out.extend(collapses(r).into_iter().map(|x| ProcessTree::binary(op, (**l).clone(), x)));
        }
    }
    out
}

/// Every tree over `alphabet` with at most `leaves` leaves and no nested loops.
fn all_trees(leaves: usize, alphabet: &[&str]) -> Vec<ProcessTree> {
    let mut by_size: Vec<Vec<ProcessTree>> = vec![vec![]; leaves + 1];
    for k in 1..=leaves {
        let mut v = Vec::new();
        if k == 1 {
            v.extend(alphabet.iter().map(|a| ProcessTree::activity(*a)));
        }
        for i in 1..k {
            for l in by_size[i].clone() {
                for r in by_size[k - i].clone() {
                    v.push(ProcessTree::seq(l.clone(), r.clone()));
                    v.push(ProcessTree::xor(l.clone(), r.clone()));
                    v.push(ProcessTree::and(l.clone(), r.clone()));
                }
            }
        }
        let loops: Vec<ProcessTree> =
            v.iter().filter(|t| !matches!(t, ProcessTree::Loop(_))).cloned().map(ProcessTree::looped).collect();
        v.extend(loops);
        by_size[k] = v;
    }
    by_size.into_iter().flatten().collect()
}

/// Trees reachable from single leaves by `rounds` unpruned expansion rounds.
fn reachable(alphabet: &BTreeSet<String>, rounds: usize) -> BTreeSet<ProcessTree> {
    let mut all: BTreeSet<ProcessTree> = alphabet.iter().map(|a| ProcessTree::activity(a.clone())).collect();
    let mut frontier = all.clone();
    for _ in 0..rounds {
        let next: BTreeSet<ProcessTree> = frontier.iter().flat_map(|t| expand(t, alphabet)).collect();
        all.extend(next.iter().cloned());
        frontier = next;
    }
    all
}

/// Trees reachable by any number of expansions without exceeding `leaves` leaves.
fn reachable_within(alphabet: &BTreeSet<String>, leaves: usize) -> BTreeSet<ProcessTree> {
    let mut all: BTreeSet<ProcessTree> = alphabet.iter().map(|a| ProcessTree::activity(a.clone())).collect();
    let mut frontier = all.clone();
    while !frontier.is_empty() {
        let next: BTreeSet<ProcessTree> = frontier
            .iter()
            .flat_map(|t| expand(t, alphabet))
            .filter(|t| t.leaf_count() <= leaves && !all.contains(t))
            .collect();
        all.extend(next.iter().cloned());
        frontier = next;
    }
    all
}

/// Labels a tree can start with once commutative children may be swapped.
fn heads(t: &ProcessTree) -> BTreeSet<&str> {
    match (t, t.operator()) {
        (ProcessTree::Activity(a), _) => BTreeSet::from([a.as_str()]),
        (_, Some(Operator::Xor | Operator::And)) => t.children().into_iter().flat_map(heads).collect(),
        _ => heads(t.children()[0]),
    }
}

/// A commutative node whose two branches can begin with the same label. New
/// leaves only ever become second children and commutative expansions need a
/// strictly larger label, so no such tree is generated.
fn commutative_over_equal_heads(t: &ProcessTree) -> bool {
    let here = matches!(t.operator(), Some(Operator::Xor | Operator::And)) && {
        let c = t.children();
        !heads(c[0]).is_disjoint(&heads(c[1]))
    };
    here || t.children().into_iter().any(commutative_over_equal_heads)
}

#[test]
fn language_completeness_two_activities() {
    let reach = reachable_within(&alpha("ab"), 4);
    let langs: BTreeSet<BTreeSet<Vec<String>>> = reach.iter().map(|t| t.bounded_language(6).unwrap()).collect();
    let mut missing = 0;
    for t in all_trees(3, &["a", "b"]) {
        if langs.contains(&t.bounded_language(6).unwrap()) {
            continue;
        }
        assert!(commutative_over_equal_heads(&t), "no reachable tree with the language of {t}");
        missing += 1;
    }
    assert!(missing > 0);
}

#[test]
fn distinct_roots_give_disjoint_trees() {
    let a = alpha("abc");
    let mut seen: BTreeMap<ProcessTree, String> = BTreeMap::new();
    for root in &a {
        let mut frontier: BTreeSet<ProcessTree> = [ProcessTree::activity(root.clone())].into();
        for _ in 0..2 {
            frontier = frontier.iter().flat_map(|t| expand(t, &a)).collect();
            for t in &frontier {
                if let Some(other) = seen.insert(t.clone(), root.clone()) {
                    assert_eq!(&other, root, "{t} reached from {other} and {root}");
                }
            }
        }
    }
}

#[test]
fn mine_finds_sequence() {
    let log = EventLog::from_variants(&[(labels("ab").as_slice(), 5)]);
    let cfg = MinerConfig { min_support: 5, max_iterations: 1, ..MinerConfig::default() };
    let out = mine(&log, &cfg).unwrap();
    let e = out.ranking.iter().find(|e| e.tree == tree("seq(a,b)")).expect("seq(a,b) mined");
    assert_eq!(e.quality.support, 5);
    assert_eq!(e.quality.determinism, 1.0);
    assert!(out.ranking.iter().all(|e| e.tree.leaf_count() <= 2 && e.quality.support >= 5));
}

#[test]
fn mine_loop_on_single_events() {
    let log = EventLog::from_variants(&[(labels("a").as_slice(), 3)]);
    let cfg = MinerConfig { min_support: 2, max_iterations: 1, ..MinerConfig::default() };
    let out = mine(&log, &cfg).unwrap();
    let lp = out.ranking.iter().find(|e| e.tree == tree("loop(a)")).expect("loop(a) mined");
    assert_eq!(lp.quality.support, 3);
    assert_eq!(evaluate(&tree("seq(a,a)"), &log, &RankingWeights::default()).unwrap().support, 0);
    assert!(out.ranking.iter().all(|e| e.tree != tree("seq(a,a)")));
}

#[test]
fn mine_degenerate_inputs() {
    let log = EventLog::from_strings(&["abc", "ab"]);
    let cfg = MinerConfig { min_support: 6, ..MinerConfig::default() };
    let out = mine(&log, &cfg).unwrap();
    assert!(out.ranking.is_empty());
    assert_eq!(out.rounds.len(), 1);
    let empty = EventLog::from_strings(&[]);
    assert!(mine(&empty, &MinerConfig::default()).unwrap().ranking.is_empty());
    let wide = EventLog::from_strings(&["abcdefghijklmnop"]);
    assert!(matches!(mine(&wide, &MinerConfig::default()), Err(Error::Config(_))));
    assert!(mine(&log, &MinerConfig { min_support: 0, ..MinerConfig::default() }).is_err());
    assert!(mine(&log, &MinerConfig { top_k: 0, ..MinerConfig::default() }).is_err());
}

#[test]
fn mine_is_deterministic_and_ranked() {
    let log = EventLog::from_strings(&["abcabd", "acbd", "abdd", "cab"]);
    let cfg = MinerConfig { min_support: 2, max_iterations: 2, top_k: 15, ..MinerConfig::default() };
    let a = mine(&log, &cfg).unwrap();
    let b = mine(&log, &cfg).unwrap();
    assert_eq!(a, b);
    assert!(a.ranking.len() <= 15);
    for w in a.ranking.windows(2) {
        assert!(w[0].quality.aggregate >= w[1].quality.aggregate);
    }
}

#[test]
fn operator_subset_restricts_search() {
    let log = EventLog::from_strings(&["abab", "abba"]);
    let cfg = MinerConfig {
        operators: [lpmforge::tree::Operator::Seq].into(),
        max_iterations: 2,
        ..MinerConfig::default()
    };
    let out = mine(&log, &cfg).unwrap();
    assert!(out.ranking.iter().all(|e| !e.tree.to_string().contains("xor") && !e.tree.to_string().contains("loop")));
}

#[test]
fn monotone_pruning_can_miss_patterns() {
    // seq(a,b) has one instance, its choice expansion seq(xor(a,b),b) has two
    let log = EventLog::from_strings(&["abbb"]);
    let base = MinerConfig { min_support: 2, max_iterations: 2, top_k: usize::MAX, ..MinerConfig::default() };
    let found = |p: Pruning| -> BTreeSet<ProcessTree> {
        mine(&log, &MinerConfig { pruning: p, ..base.clone() }).unwrap().ranking.into_iter().map(|e| e.tree).collect()
    };
    let target = tree("seq(xor(a,b),b)");
    assert_eq!(evaluate(&target, &log, &RankingWeights::default()).unwrap().support, 2);
    assert_eq!(evaluate(&tree("seq(a,b)"), &log, &RankingWeights::default()).unwrap().support, 1);
    assert!(found(Pruning::Bound).contains(&target));
    assert!(!found(Pruning::Monotone).contains(&target));
    assert!(found(Pruning::Monotone).is_subset(&found(Pruning::Bound)));
}

#[test]
fn bound_pruning_skips_rare_subtrees() {
    let log = EventLog::from_strings(&["abababab", "ababx", "abab"]);
    let cfg = MinerConfig { min_support: 4, max_iterations: 2, ..MinerConfig::default() };
    let out = mine(&log, &cfg).unwrap();
    assert!(out.rounds.iter().map(|r| r.bounded_out).sum::<usize>() > 0);
}

#[test]
fn shortest_word_lengths() {
    for (t, n) in [("a", 1), ("seq(a,and(b,c))", 3), ("xor(a,seq(b,c))", 1), ("loop(seq(a,b))", 2)] {
        assert_eq!(min_word_length(&tree(t)), n, "{t}");
        let shortest = tree(t).bounded_language(6).unwrap().iter().map(|w| w.len()).min().unwrap();
        assert_eq!(shortest, n);
    }
}

fn arb_small_log() -> impl Strategy<Value = EventLog> {
    (2usize..=6).prop_flat_map(|k| {
        let acts: Vec<String> = (0..k).map(|i| ((b'a' + i as u8) as char).to_string()).collect();
        prop::collection::vec(prop::collection::vec(prop::sample::select(acts), 1..=7), 1..=4).prop_map(|ts| {
            // at most 20 events overall
            let mut left = 20usize;
            let mut kept: Vec<Vec<String>> = Vec::new();
            for t in ts {
                let t: Vec<String> = t.into_iter().take(left).collect();
                left -= t.len();
                if !t.is_empty() {
                    kept.push(t);
                }
            }
            let refs: Vec<(&[String], usize)> = kept.iter().map(|t| (t.as_slice(), 1)).collect();
            EventLog::from_variants(&refs)
        })
    })
}

/// Unpruned search: evaluate every tree reachable within the leaf cap and
/// keep those meeting both thresholds.
fn exhaustive(log: &EventLog, cfg: &MinerConfig) -> BTreeSet<ProcessTree> {
    reachable(log.alphabet(), cfg.max_iterations)
        .into_iter()
        .filter(|t| {
            let q = evaluate(t, log, &cfg.weights).unwrap();
            q.support >= cfg.min_support && q.determinism >= cfg.min_determinism
        })
        .collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn expansions_follow_the_rules(t in arb_tree(3, &["a", "b", "c"])) {
        prop_assume!(!t.to_string().contains("loop(loop("));
        let got = expand(&t, &alpha("abc"));
        prop_assert_eq!(got.len(), expected_count(&t, &["a", "b", "c"]));
        for e in &got {
            prop_assert!(e.leaf_count() == t.leaf_count() || e.leaf_count() == t.leaf_count() + 1);
            prop_assert!(collapses(e).contains(&t), "{} does not collapse to {}", e, t);
        }
    }

    #[test]
    fn pruning_is_sound(log in arb_small_log(), min_support in 1usize..4, min_det in prop::sample::select(vec![0.0, 0.3, 0.5, 0.7])) {
        let cfg = MinerConfig {
            min_support,
            min_determinism: min_det,
            max_iterations: 2,
            top_k: usize::MAX,
            weights: RankingWeights { budget: 2_000, ..RankingWeights::default() },
            ..MinerConfig::default()
        };
        let mined: BTreeSet<ProcessTree> = mine(&log, &cfg).unwrap().ranking.into_iter().map(|e| e.tree).collect();
        let want = exhaustive(&log, &cfg);
        let missing: Vec<String> = want.difference(&mined).map(|t| t.to_string()).collect();
        let extra: Vec<String> = mined.difference(&want).map(|t| t.to_string()).collect();
        prop_assert!(missing.is_empty() && extra.is_empty(), "missing {:?} extra {:?}", missing, extra);
    }
}
