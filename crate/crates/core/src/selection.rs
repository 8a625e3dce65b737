//! Scoring and selection of non-redundant pattern sets.

use std::collections::{BTreeSet, HashMap};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::alignment::{align, instance_runs, match_segments, CostPolicy, Instance, InstanceRun, Segment};
use crate::error::{Error, Result};
use crate::log::EventLog;
use crate::petri::AcceptingPetriNet;
use crate::quality::{etc_from_runs, EtcKeys};
use crate::tree::ProcessTree;

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct LpmSetScore {
    pub coverage: f64,
    pub non_redundancy: f64,
    pub fscore: f64,
    pub explained_events: usize,
    pub total_events: usize,
    /// Instances attributed to each pattern, in input order.
    pub instances: Vec<Vec<Instance>>,
}

impl LpmSetScore {
    pub fn instance_counts(&self) -> Vec<usize> {
        self.instances.iter().map(Vec::len).collect()
    }
}

fn harmonic(a: f64, b: f64) -> f64 {
    if a > 0.0 && b > 0.0 {
        2.0 * a * b / (a + b)
    } else {
        0.0
    }
}

pub fn nets_of(trees: &[ProcessTree]) -> Vec<AcceptingPetriNet> {
    trees.iter().map(ProcessTree::to_petri_net).collect()
}

/// Aligns the log on the merged model of `patterns` and scores the event partition.
pub fn score_set(log: &EventLog, patterns: &[AcceptingPetriNet]) -> Result<LpmSetScore> {
    let total = log.event_count();
    if patterns.is_empty() {
        return Ok(LpmSetScore { total_events: total, ..LpmSetScore::default() });
    }
    let merged = AcceptingPetriNet::merge_global(patterns)?;
    let variants: Vec<(Vec<String>, usize)> = log.label_view().into_iter().collect();
    let aligned = variants
        .par_iter()
        .map(|(w, _)| align(&merged, w, CostPolicy::instance_counting()))
        .collect::<Result<Vec<_>>>()?;
    let by_variant: HashMap<&[String], (Vec<InstanceRun>, usize)> = variants
        .iter()
        .zip(&aligned)
        .enumerate()
        .map(|(i, ((w, _), al))| (w.as_slice(), (instance_runs(&merged, al), i)))
        .collect();
    let mut instances = vec![Vec::new(); patterns.len()];
    let mut explained = 0;
    for (ti, t) in log.traces().iter().enumerate() {
        let (runs, _) = &by_variant[t.labels().as_slice()];
        for r in runs.iter().filter(|r| !r.positions.is_empty()) {
            let k = r.pattern.expect("synchronous moves come from a pattern");
            explained += r.positions.len();
            instances[k].push(Instance {
                trace: ti,
                trace_id: t.id.clone(),
                landmark: r.positions.iter().map(|p| p + 1).collect(),
            });
        }
    }
    let runs: Vec<(Vec<usize>, usize)> = variants.iter().zip(&aligned).map(|((_, k), al)| (al.firings(), *k)).collect();
    let non_redundancy = etc_from_runs(&merged, &runs, EtcKeys::Transitions)?;
    let coverage = if total == 0 { 0.0 } else { explained as f64 / total as f64 };
    Ok(LpmSetScore {
        coverage,
        non_redundancy,
        fscore: harmonic(coverage, non_redundancy),
        explained_events: explained,
        total_events: total,
        instances,
    })
}

/// Indices of the patterns that keep at least one instance on the merged model.
pub fn select_alignment(log: &EventLog, patterns: &[AcceptingPetriNet]) -> Result<Vec<usize>> {
    let s = score_set(log, patterns)?;
    Ok((0..patterns.len()).filter(|&i| !s.instances[i].is_empty()).collect())
}

/// Events of `log` that are not masked, restricted to `alphabet`, per trace.
fn residual_segments(log: &EventLog, mask: &[Vec<bool>], alphabet: &BTreeSet<String>) -> Vec<Segment> {
    log.traces()
        .iter()
        .enumerate()
        .map(|(ti, t)| {
            let (positions, labels) = t
                .events
                .iter()
                .enumerate()
                .filter(|(i, e)| !mask[ti][*i] && alphabet.contains(&e.activity))
                .map(|(i, e)| (i, e.activity.clone()))
                .unzip();
            Segment { trace: ti, positions, labels }
        })
        .collect()
}

/// Repeatedly picks the pattern explaining the most still-unexplained events.
pub fn select_greedy(log: &EventLog, patterns: &[AcceptingPetriNet]) -> Result<Vec<usize>> {
    let prepared: Vec<(AcceptingPetriNet, BTreeSet<String>)> = patterns
        .iter()
        .map(|n| Ok((n.to_instance_counter()?, n.labels().into_iter().map(str::to_string).collect())))
        .collect::<Result<_>>()?;
    let mut mask: Vec<Vec<bool>> = log.traces().iter().map(|t| vec![false; t.len()]).collect();
    let mut chosen = Vec::new();
    let mut left: Vec<usize> = (0..patterns.len()).collect();
    while !left.is_empty() {
        let found: Vec<Vec<(usize, Vec<usize>)>> = left
            .par_iter()
            .map(|&i| {
                let (net, alphabet) = &prepared[i];
                let segs = residual_segments(log, &mask, alphabet);
                let runs = match_segments(net, &segs)?;
                Ok(segs
                    .iter()
                    .zip(runs)
                    .flat_map(|(s, rs)| rs.into_iter().map(move |r| (s.trace, r.positions)))
                    .filter(|(_, p)| !p.is_empty())
                    .collect())
            })
            .collect::<Result<_>>()?;
        let mut best: Option<(usize, usize)> = None;
        for (slot, events) in found.iter().enumerate() {
            let n: usize = events.iter().map(|(_, p)| p.len()).sum();
            if n > best.map_or(0, |(_, b)| b) {
                best = Some((slot, n));
            }
        }
        let Some((slot, _)) = best else { break };
        for (t, ps) in &found[slot] {
            for &p in ps {
                mask[*t][p] = true;
            }
        }
        chosen.push(left.remove(slot));
    }
    Ok(chosen)
}

/// Repeatedly adds the pattern that most improves the set F-score.
pub fn select_greedy_fscore(log: &EventLog, patterns: &[AcceptingPetriNet]) -> Result<Vec<usize>> {
    let mut chosen: Vec<usize> = Vec::new();
    let mut best_f = 0.0;
    loop {
        let left: Vec<usize> = (0..patterns.len()).filter(|i| !chosen.contains(i)).collect();
        let scores: Vec<f64> = left
            .par_iter()
            .map(|&i| {
                let set: Vec<AcceptingPetriNet> = chosen.iter().chain([&i]).map(|&j| patterns[j].clone()).collect();
                Ok(score_set(log, &set)?.fscore)
            })
            .collect::<Result<_>>()?;
        let mut pick = None;
        for (slot, &f) in scores.iter().enumerate() {
            if f > pick.map_or(best_f, |(_, b)| b) {
                pick = Some((slot, f));
            }
        }
        match pick {
            Some((slot, f)) => {
                chosen.push(left[slot]);
                best_f = f;
            }
            None => return Ok(chosen),
        }
    }
}

/// Jaccard distance between two activity sets.
pub fn jaccard_distance(a: &BTreeSet<String>, b: &BTreeSet<String>) -> f64 {
    let union = a.union(b).count();
    if union == 0 {
        return 0.0;
    }
    1.0 - a.intersection(b).count() as f64 / union as f64
}

/// Keeps the head, then every pattern at least `t` away from all kept ones.
pub fn diversity_filter(alphabets: &[BTreeSet<String>], t: f64) -> Result<Vec<usize>> {
    if !(0.0..=1.0).contains(&t) {
        return Err(Error::InvalidArgument(format!("diversity threshold must be in [0, 1], got {t}")));
    }
    let mut kept: Vec<usize> = Vec::new();
    for (i, a) in alphabets.iter().enumerate() {
        if kept.iter().all(|&k| jaccard_distance(a, &alphabets[k]) >= t) {
            kept.push(i);
        }
    }
    Ok(kept)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SelectionStrategy {
    Alignment,
    Greedy,
    GreedyFscore,
    Diversity,
}

/// Runs one selection strategy over trees; `threshold` is used by the diversity filter.
pub fn select(log: &EventLog, trees: &[ProcessTree], strategy: SelectionStrategy, threshold: f64) -> Result<Vec<usize>> {
    match strategy {
        SelectionStrategy::Alignment => select_alignment(log, &nets_of(trees)),
        SelectionStrategy::Greedy => select_greedy(log, &nets_of(trees)),
        SelectionStrategy::GreedyFscore => select_greedy_fscore(log, &nets_of(trees)),
        SelectionStrategy::Diversity => {
            diversity_filter(&trees.iter().map(ProcessTree::activities).collect::<Vec<_>>(), threshold)
        }
    }
}
