#![allow(dead_code)]

use std::collections::{BTreeMap, BTreeSet};

use lpmforge::log::EventLog;
use lpmforge::petri::{AcceptingPetriNet, NetBuilder};
use lpmforge::tree::ProcessTree;
use proptest::prelude::*;

pub fn tree(s: &str) -> ProcessTree {
    ProcessTree::parse(s).unwrap()
}

pub fn words(ws: &[&str]) -> BTreeSet<Vec<String>> {
    ws.iter().map(|w| w.chars().map(|c| c.to_string()).collect()).collect()
}

pub fn labels(w: &str) -> Vec<String> {
    w.chars().map(|c| c.to_string()).collect()
}

/// Running example net: a, silent split, (b|c) in parallel with d, e, then g|h to end or f back.
pub fn fig_2_1() -> AcceptingPetriNet {
    let mut b = NetBuilder::new();
    let p: Vec<usize> = (1..=8).map(|i| b.place(format!("p{i}"))).collect();
    b.transition(Some("a"), &[p[0]], &[p[1]]);
    b.transition(None, &[p[1]], &[p[2], p[3]]);
    b.transition(Some("b"), &[p[2]], &[p[4]]);
    b.transition(Some("c"), &[p[2]], &[p[4]]);
    b.transition(Some("d"), &[p[3]], &[p[5]]);
    b.transition(Some("e"), &[p[4], p[5]], &[p[6]]);
    b.transition(Some("g"), &[p[6]], &[p[7]]);
    b.transition(Some("h"), &[p[6]], &[p[7]]);
    b.transition(Some("f"), &[p[6]], &[p[1]]);
    b.initial(&[p[0]]).final_marking(&[p[7]]);
    b.build().unwrap()
}

/// a opens two branches, b and c, joined by a silent transition.
pub fn fig_3_1() -> AcceptingPetriNet {
    let mut b = NetBuilder::new();
    let p: Vec<usize> = (1..=6).map(|i| b.place(format!("p{i}"))).collect();
    b.transition(Some("a"), &[p[0]], &[p[1], p[2]]);
    b.transition(Some("b"), &[p[2]], &[p[4]]);
    b.transition(Some("c"), &[p[1]], &[p[3]]);
    b.transition(None, &[p[3], p[4]], &[p[5]]);
    b.initial(&[p[0]]).final_marking(&[p[5]]);
    b.build().unwrap()
}

/// a, then any number of (b, a), then c or d.
pub fn fig_3_7a() -> AcceptingPetriNet {
    let mut b = NetBuilder::new();
    let p: Vec<usize> = (1..=3).map(|i| b.place(format!("p{i}"))).collect();
    b.transition(Some("a"), &[p[0]], &[p[1]]);
    b.transition(Some("b"), &[p[1]], &[p[0]]);
    b.transition(Some("c"), &[p[1]], &[p[2]]);
    b.transition(Some("d"), &[p[1]], &[p[2]]);
    b.initial(&[p[0]]).final_marking(&[p[2]]);
    b.build().unwrap()
}

/// Four-trace log with 39 events used for pattern-set coverage.
pub fn table_12_1a() -> EventLog {
    let t = |s: &str| s.split(',').map(str::to_string).collect::<Vec<_>>();
    let v = [
        t("E,B,A,B,A,F,A,C,B,D"),
        t("E,B,A,F,E,B,A,B,A,F"),
        t("A,B,C,D,A,C,D,B,E,F"),
        t("A,C,D,B,E,E,B,A,F"),
    ];
    let variants: Vec<(&[String], usize)> = v.iter().map(|x| (x.as_slice(), 1)).collect();
    EventLog::from_variants(&variants)
}

/// Pattern (a): A followed by B in parallel with C then D.
pub fn lpm_a() -> ProcessTree {
    tree("seq(A,and(B,seq(C,D)))")
}

/// Pattern (b): E, zero or more (B, A), then F.
pub fn lpm_b() -> AcceptingPetriNet {
    let mut b = NetBuilder::new();
    let (i, p, q, o) = (b.place("i"), b.place("p"), b.place("q"), b.place("o"));
    b.transition(Some("E"), &[i], &[p]);
    b.transition(Some("B"), &[p], &[q]);
    b.transition(Some("A"), &[q], &[p]);
    b.transition(Some("F"), &[p], &[o]);
    b.initial(&[i]).final_marking(&[o]);
    b.build().unwrap()
}

/// Pattern (c): D followed by A or B.
pub fn lpm_c() -> ProcessTree {
    tree("seq(D,xor(A,B))")
}

/// Membership in the language of a tree, straight from the operator semantics.
pub fn accepts(t: &ProcessTree, w: &[String]) -> bool {
    match t {
        ProcessTree::Activity(a) => w.len() == 1 && &w[0] == a,
        ProcessTree::Seq(l, r) => (0..=w.len()).any(|k| accepts(l, &w[..k]) && accepts(r, &w[k..])),
        ProcessTree::Xor(l, r) => accepts(l, w) || accepts(r, w),
        ProcessTree::And(l, r) => {
            let n = w.len();
            if n > 20 {
                return false;
            }
            (0u32..(1 << n)).any(|mask| {
                let (a, b): (Vec<_>, Vec<_>) = (0..n).partition(|&i| mask & (1 << i) != 0);
                let wa: Vec<String> = a.iter().map(|&i| w[i].clone()).collect();
                let wb: Vec<String> = b.iter().map(|&i| w[i].clone()).collect();
                accepts(l, &wa) && accepts(r, &wb)
            })
        }
        ProcessTree::Loop(c) => {
            if w.is_empty() {
                return false;
            }
            (1..=w.len()).any(|k| accepts(c, &w[..k]) && (k == w.len() || accepts(t, &w[k..])))
        }
    }
}

/// Brute-force Γ statistics for one trace: (events covered, instance count),
/// maximizing coverage first and then minimizing the count, over sets of
/// instances with pairwise disjoint index intervals.
pub fn brute_gamma(t: &ProcessTree, trace: &[String]) -> (usize, usize) {
    brute_gamma_with(t, trace, &|_| true)
}

/// [`brute_gamma`] restricted to instances whose 0-based positions satisfy `ok`.
pub fn brute_gamma_with(t: &ProcessTree, trace: &[String], ok: &dyn Fn(&[usize]) -> bool) -> (usize, usize) {
    let n = trace.len();
    // best[i] = best (covered, -count) using positions i..n
    let mut best: Vec<(usize, i64)> = vec![(0, 0); n + 1];
    for i in (0..n).rev() {
        let mut b = best[i + 1];
        for j in i..n {
            let inner = j - i;
            for mask in 0u32..(1 << inner.saturating_sub(1).max(0)) {
                // positions i and j always included, interior chosen by mask
                let mut pos = vec![i];
                if j > i {
                    for k in 0..inner - 1 {
                        if mask & (1 << k) != 0 {
                            pos.push(i + 1 + k);
                        }
                    }
                    pos.push(j);
                } else if mask > 0 {
                    continue;
                }
                let w: Vec<String> = pos.iter().map(|&p| trace[p].clone()).collect();
                if accepts(t, &w) && ok(&pos) {
                    let cand = (best[j + 1].0 + pos.len(), best[j + 1].1 - 1);
                    if cand > b {
                        b = cand;
                    }
                }
            }
        }
        best[i] = b;
    }
    (best[0].0, (-best[0].1) as usize)
}

/// Random trees with at most `max_leaves` activity leaves over `alphabet`.
pub fn arb_tree(max_leaves: usize, alphabet: &[&'static str]) -> BoxedStrategy<ProcessTree> {
    let leaf = prop::sample::select(alphabet.to_vec()).prop_map(ProcessTree::activity).boxed();
    if max_leaves <= 1 {
        return prop_oneof![3 => leaf.clone(), 1 => leaf.prop_map(ProcessTree::looped)].boxed();
    }
    let alpha = alphabet.to_vec();
    let splits = (1..max_leaves, 0u8..3).prop_flat_map(move |(k, op)| {
        let l = arb_tree(k, &alpha);
        let r = arb_tree(max_leaves - k, &alpha);
        (l, r).prop_map(move |(l, r)| match op {
            0 => ProcessTree::seq(l, r),
            1 => ProcessTree::xor(l, r),
            _ => ProcessTree::and(l, r),
        })
    });
    let inner = arb_tree(max_leaves - 1, alphabet);
    prop_oneof![
        2 => leaf,
        1 => inner.prop_map(ProcessTree::looped),
        5 => splits,
    ]
    .boxed()
}

/// Entropy straight from neighbour counts: `^` marks start, `$` marks end.
pub fn oracle_entropy(log: &EventLog, a: &str, alpha: Option<f64>) -> f64 {
    let mut next: BTreeMap<String, f64> = BTreeMap::new();
    let mut prev: BTreeMap<String, f64> = BTreeMap::new();
    let mut n = 0.0;
    for t in log.traces() {
        let l = t.labels();
        for i in 0..l.len() {
            if l[i] != a {
                continue;
            }
            n += 1.0;
            *next.entry(l.get(i + 1).cloned().unwrap_or("$".into())).or_default() += 1.0;
            *prev.entry(if i == 0 { "^".into() } else { l[i - 1].clone() }).or_default() += 1.0;
        }
    }
    let k = log.alphabet().len() as f64 + 1.0;
    let h = |m: &BTreeMap<String, f64>| -> f64 {
        let al = alpha.unwrap_or(0.0);
        let mut p: Vec<f64> = m.values().map(|c| (c + al) / (al * k + n)).collect();
        // unseen neighbours each carry alpha
        let unseen = k as usize - m.len();
        p.extend(std::iter::repeat(al / (al * k + n)).take(unseen));
        p.iter().filter(|&&x| x > 0.0).map(|x| -x * x.log2()).sum()
    };
    h(&next) + h(&prev)
}


/// Patterns (a), (b), (c) as nets.
pub fn fig_12_4() -> Vec<AcceptingPetriNet> {
    vec![lpm_a().to_petri_net(), lpm_b(), lpm_c().to_petri_net()]
}
