//! Entropy-based detection and removal of chaotic activities.

use std::collections::BTreeSet;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::log::{EventLog, FollowsStats};

/// Shannon entropy in bits, with 0·log 0 = 0.
pub fn shannon(p: &[f64]) -> f64 {
    p.iter().filter(|&&x| x > 0.0).map(|&x| -x * x.log2()).sum()
}

fn entropy_in(stats: &FollowsStats, a: &str) -> Result<f64> {
    Ok(shannon(&stats.dfr_row(a)?) + shannon(&stats.dpr_row(a)?))
}

/// Entropy of the successor and predecessor distributions of `a`, optionally Laplace-smoothed with `alpha`.
pub fn activity_entropy(log: &EventLog, a: &str, alpha: Option<f64>) -> Result<f64> {
    if !log.alphabet().contains(a) {
        return Err(Error::InvalidArgument(format!("activity {a:?} does not occur in the log")));
    }
    entropy_in(&FollowsStats::compute(log, alpha)?, a)
}

/// Entropy of every activity, in activity order.
pub fn activity_entropies(log: &EventLog, alpha: Option<f64>) -> Result<Vec<(String, f64)>> {
    let stats = FollowsStats::compute(log, alpha)?;
    stats.activities().iter().map(|a| Ok((a.clone(), entropy_in(&stats, a)?))).collect()
}

/// Sum of the activity entropies.
pub fn log_entropy(log: &EventLog, alpha: Option<f64>) -> Result<f64> {
    Ok(activity_entropies(log, alpha)?.iter().map(|(_, h)| h).sum())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind", content = "seed")]
pub enum FilterVariant {
    /// Removes the activity with the highest entropy.
    Direct,
    /// Removes the activity whose removal leaves the lowest log entropy.
    Indirect,
    LeastFrequentFirst,
    MostFrequentFirst,
    Random(u64),
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind", content = "alpha")]
pub enum Smoothing {
    #[default]
    Off,
    /// alpha = 1 / number of activities in the current log.
    Auto,
    Fixed(f64),
}

impl Smoothing {
    fn alpha(self, activities: usize) -> Option<f64> {
        match self {
            Smoothing::Off => None,
            Smoothing::Auto => Some(1.0 / activities.max(1) as f64),
            Smoothing::Fixed(a) => Some(a),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Removal {
    pub activity: String,
    /// Entropy of the activity (direct), log entropy after removal (indirect),
    /// or frequency (frequency baselines); 0 for random order.
    pub score: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct FilterReport {
    pub variant: FilterVariant,
    pub smoothing: Smoothing,
    pub removals: Vec<Removal>,
    /// Log after each removal.
    #[serde(skip)]
    pub logs: Vec<EventLog>,
}

impl FilterReport {
    pub fn remaining(&self) -> Option<&BTreeSet<String>> {
        self.logs.last().map(|l| l.alphabet())
    }
}

/// Removes one activity per step until `keep` activities remain (never fewer than two).
/// Ties go to the activity that sorts first.
pub fn filter_chaotic(log: &EventLog, variant: FilterVariant, smoothing: Smoothing, keep: usize) -> Result<FilterReport> {
    if let Smoothing::Fixed(a) = smoothing {
        if !(a >= 0.0) {
            return Err(Error::InvalidArgument(format!("smoothing must be >= 0, got {a}")));
        }
    }
    let keep = keep.max(2);
    let mut report = FilterReport { variant, smoothing, removals: vec![], logs: vec![] };
    let random_order: Vec<String> = match variant {
        FilterVariant::Random(seed) => {
            let mut acts: Vec<String> = log.alphabet().iter().cloned().collect();
            acts.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
            acts
        }
        _ => vec![],
    };
    let mut current = log.clone();
    while current.alphabet().len() > keep {
        let acts: Vec<String> = current.alphabet().iter().cloned().collect();
        let alpha = smoothing.alpha(acts.len());
        let (activity, score) = match variant {
            FilterVariant::Direct => pick(activity_entropies(&current, alpha)?, |h| -h),
            FilterVariant::Indirect => {
                let scored: Result<Vec<(String, f64)>> = acts
                    .par_iter()
                    .map(|a| {
                        let rest: BTreeSet<String> = acts.iter().filter(|b| *b != a).cloned().collect();
                        Ok((a.clone(), log_entropy(&current.project(&rest), alpha)?))
                    })
                    .collect();
                pick(scored?, |h| h)
            }
            FilterVariant::LeastFrequentFirst | FilterVariant::MostFrequentFirst => {
                let counts = acts.iter().map(|a| (a.clone(), current.activity_count(a) as f64)).collect();
                let sign = if variant == FilterVariant::LeastFrequentFirst { 1.0 } else { -1.0 };
                pick(counts, |c| sign * c)
            }
            FilterVariant::Random(_) => {
                let a = random_order.iter().find(|a| current.alphabet().contains(*a)).expect("activity left").clone();
                (a, 0.0)
            }
        };
        let rest: BTreeSet<String> = acts.into_iter().filter(|b| *b != activity).collect();
        current = current.project(&rest);
        report.removals.push(Removal { activity, score });
        report.logs.push(current.clone());
    }
    Ok(report)
}

/// Entry with the smallest key; the first one on ties.
fn pick(scored: Vec<(String, f64)>, key: impl Fn(f64) -> f64) -> (String, f64) {
    let mut best: Option<(String, f64)> = None;
    for (a, s) in scored {
        if best.as_ref().map_or(true, |(_, b)| key(s) < key(*b) - 1e-12) {
            best = Some((a, s));
        }
    }
    best.expect("at least one activity")
}
