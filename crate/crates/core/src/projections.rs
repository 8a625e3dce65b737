//! Activity projection sets and projected mining.

use std::collections::{BTreeMap, BTreeSet};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::chaotic::{log_entropy, shannon};
use crate::error::{Error, Result};
use crate::log::{EventLog, FollowsStats, Neighbor};
use crate::miner::{mine, Evaluator, MinerConfig};
use crate::quality::{ndcg_at_k, sort_ranking, Evaluation};

pub const DEFAULT_INFLATION: f64 = 1.5;
pub const DEFAULT_MRIG_THRESHOLD: f64 = 0.1;
pub const DEFAULT_FRONTIER_CAP: usize = 10_000;

const MCL_PRUNE: f64 = 1e-8;
const MCL_EPSILON: f64 = 1e-6;
const MCL_ROUNDS: usize = 100;

/// Default entropy threshold for an alphabet of `n` activities.
pub fn default_entropy_threshold(n: usize) -> f64 {
    2.0 * ((n + 1) as f64).log2()
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct ProjectionSet {
    pub sets: Vec<BTreeSet<String>>,
    /// Set when a growth frontier hit the size cap and was cut.
    #[serde(default)]
    pub truncated: bool,
}

impl ProjectionSet {
    /// Keeps maximal sets only, sorted and without duplicates.
    pub fn from_sets(sets: impl IntoIterator<Item = BTreeSet<String>>, truncated: bool) -> Self {
        let all: BTreeSet<BTreeSet<String>> = sets.into_iter().filter(|s| !s.is_empty()).collect();
        let sets = all.iter().filter(|s| !all.iter().any(|o| o != *s && s.is_subset(o))).cloned().collect();
        ProjectionSet { sets, truncated }
    }

    pub fn is_containment_free(&self) -> bool {
        self.sets.iter().enumerate().all(|(i, a)| self.sets.iter().enumerate().all(|(j, b)| i == j || !a.is_subset(b)))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind", content = "threshold")]
pub enum ProjectionMethod {
    Markov(f64),
    Entropy(Option<f64>),
    Mrig(f64),
}

pub fn discover(log: &EventLog, method: ProjectionMethod) -> Result<ProjectionSet> {
    match method {
        ProjectionMethod::Markov(r) => markov_projections(log, r),
        ProjectionMethod::Entropy(t) => {
            entropy_projections(log, t.unwrap_or_else(|| default_entropy_threshold(log.alphabet().len())))
        }
        ProjectionMethod::Mrig(t) => mrig_projections(log, t),
    }
}

type Matrix = Vec<Vec<f64>>;

fn normalize_rows(m: &mut Matrix) {
    for row in m.iter_mut() {
        let s: f64 = row.iter().sum();
        if s > 0.0 {
            row.iter_mut().for_each(|x| *x /= s);
        }
    }
}

fn square(m: &Matrix) -> Matrix {
    let n = m.len();
    let mut out = vec![vec![0.0; n]; n];
    for i in 0..n {
        for k in 0..n {
            let a = m[i][k];
            if a == 0.0 {
                continue;
            }
            for j in 0..n {
                out[i][j] += a * m[k][j];
            }
        }
    }
    out
}

/// Connectedness of every activity pair, row-normalized with self-loops.
pub fn connectedness(log: &EventLog) -> Result<(Vec<String>, Matrix)> {
    let stats = FollowsStats::compute(log, None)?;
    let acts = stats.activities().to_vec();
    let n = acts.len();
    let mut m = vec![vec![0.0; n]; n];
    for i in 0..n {
        for j in 0..n {
            let p = stats.dpr(&acts[i], Neighbor::Activity(&acts[j]))?;
            let f = stats.dfr(&acts[j], Neighbor::Activity(&acts[i]))?;
            m[i][j] = (p * p + f * f).sqrt();
        }
        let max = m[i].iter().cloned().fold(0.0, f64::max);
        m[i][i] = if max > 0.0 { max } else { 1.0 };
    }
    normalize_rows(&mut m);
    Ok((acts, m))
}

/// Runs Markov clustering to convergence and returns the limit matrix.
pub fn mcl(mut m: Matrix, inflation: f64) -> Matrix {
    for _ in 0..MCL_ROUNDS {
        let mut next = square(&m);
        for row in next.iter_mut() {
            row.iter_mut().for_each(|x| *x = x.powf(inflation));
        }
        normalize_rows(&mut next);
        for row in next.iter_mut() {
            row.iter_mut().filter(|x| **x < MCL_PRUNE).for_each(|x| *x = 0.0);
        }
        normalize_rows(&mut next);
        let delta = m.iter().flatten().zip(next.iter().flatten()).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        m = next;
        if delta < MCL_EPSILON {
            break;
        }
    }
    m
}

/// Clusters of activities from Markov clustering of the connectedness matrix.
/// Attractors (activities that still receive flow in the limit) that flow
/// into each other form one cluster, together with every activity that sends
/// flow to one of them; clusters may overlap.
pub fn markov_projections(log: &EventLog, inflation: f64) -> Result<ProjectionSet> {
    if !(inflation > 1.0) {
        return Err(Error::InvalidArgument(format!("inflation must be > 1, got {inflation}")));
    }
    if log.event_count() == 0 {
        return Ok(ProjectionSet::default());
    }
    let (acts, m) = connectedness(log)?;
    let limit = mcl(m, inflation);
    let n = acts.len();
    let attractors: Vec<usize> = (0..n).filter(|&j| (0..n).any(|i| limit[i][j] > MCL_EPSILON)).collect();
    let mut group: Vec<usize> = (0..n).collect();
    fn find(g: &mut [usize], i: usize) -> usize {
        if g[i] != i {
            let r = find(g, g[i]);
            g[i] = r;
        }
        g[i]
    }
    for &a in &attractors {
        for &b in &attractors {
            if limit[a][b] > MCL_EPSILON || limit[b][a] > MCL_EPSILON {
                let (ra, rb) = (find(&mut group, a), find(&mut group, b));
                group[ra] = rb;
            }
        }
    }
    let mut clusters: BTreeMap<usize, BTreeSet<String>> = BTreeMap::new();
    for &a in &attractors {
        let root = find(&mut group, a);
        let c = clusters.entry(root).or_default();
        c.insert(acts[a].clone());
        for i in 0..n {
            if limit[i][a] > MCL_EPSILON {
                c.insert(acts[i].clone());
            }
        }
    }
    Ok(ProjectionSet::from_sets(clusters.into_values(), false))
}

/// Bottom-up growth from singletons: a set grows by one activity when `admit` accepts the union.
fn grow(
    log: &EventLog,
    cap: usize,
    admit: impl Fn(&BTreeSet<String>, &BTreeSet<String>) -> Result<bool> + Sync,
) -> Result<ProjectionSet> {
    let alphabet = log.alphabet();
    let mut level: BTreeSet<BTreeSet<String>> = alphabet.iter().map(|a| BTreeSet::from([a.clone()])).collect();
    let mut all = level.clone();
    let mut truncated = false;
    while !level.is_empty() && !level.contains(alphabet) {
        let candidates: BTreeSet<(BTreeSet<String>, BTreeSet<String>)> = level
            .iter()
            .flat_map(|s| {
                alphabet.iter().filter(|a| !s.contains(*a)).map(move |a| {
                    let mut u = s.clone();
                    u.insert(a.clone());
                    (u, s.clone())
                })
            })
            .collect();
        let mut by_union: BTreeMap<BTreeSet<String>, Vec<BTreeSet<String>>> = BTreeMap::new();
        for (u, s) in candidates {
            by_union.entry(u).or_default().push(s);
        }
        let checked: Vec<Option<BTreeSet<String>>> = by_union
            .into_par_iter()
            .map(|(u, parents)| {
                for s in &parents {
                    if admit(&u, s)? {
                        return Ok(Some(u));
                    }
                }
                Ok(None)
            })
            .collect::<Result<_>>()?;
        let mut next: BTreeSet<BTreeSet<String>> = checked.into_iter().flatten().collect();
        if next.len() > cap {
            truncated = true;
            next = next.into_iter().take(cap).collect();
        }
        all.extend(next.iter().cloned());
        level = next;
    }
    Ok(ProjectionSet::from_sets(all, truncated))
}

/// Maximal activity sets whose projected log entropy stays within `t_h`.
pub fn entropy_projections(log: &EventLog, t_h: f64) -> Result<ProjectionSet> {
    entropy_projections_capped(log, t_h, DEFAULT_FRONTIER_CAP)
}

pub fn entropy_projections_capped(log: &EventLog, t_h: f64, cap: usize) -> Result<ProjectionSet> {
    if !(t_h >= 0.0) {
        return Err(Error::InvalidArgument(format!("entropy threshold must be >= 0, got {t_h}")));
    }
    grow(log, cap, |u, _| Ok(log_entropy(&log.project(u), None)? <= t_h))
}

fn row_entropies(log: &EventLog, set: &BTreeSet<String>) -> Result<BTreeMap<String, (f64, f64)>> {
    let stats = FollowsStats::compute(&log.project(set), None)?;
    stats
        .activities()
        .iter()
        .map(|a| Ok((a.clone(), (shannon(&stats.dfr_row(a)?), shannon(&stats.dpr_row(a)?)))))
        .collect()
}

/// Largest relative drop in a follows or precedes row entropy of an activity
/// of `smaller` when the projection grows to `larger`.
pub fn mrig(log: &EventLog, larger: &BTreeSet<String>, smaller: &BTreeSet<String>) -> Result<f64> {
    let before = row_entropies(log, smaller)?;
    let after = row_entropies(log, larger)?;
    let gain = |b: f64, a: f64| if b > 0.0 { (b - a) / b } else { 0.0 };
    Ok(before
        .iter()
        .filter_map(|(act, &(bf, bp))| after.get(act).map(|&(af, ap)| gain(bf, af).max(gain(bp, ap))))
        .fold(0.0, f64::max))
}

/// Maximal activity sets grown while each step gains more than `t_m`.
pub fn mrig_projections(log: &EventLog, t_m: f64) -> Result<ProjectionSet> {
    mrig_projections_capped(log, t_m, DEFAULT_FRONTIER_CAP)
}

pub fn mrig_projections_capped(log: &EventLog, t_m: f64, cap: usize) -> Result<ProjectionSet> {
    if !(0.0..=1.0).contains(&t_m) {
        return Err(Error::InvalidArgument(format!("gain threshold must be in [0, 1], got {t_m}")));
    }
    grow(log, cap, |u, s| Ok(mrig(log, u, s)? > t_m))
}

/// Mines every projection and merges the results, re-evaluated on the full log.
pub fn mine_projected(log: &EventLog, sets: &ProjectionSet, config: &MinerConfig) -> Result<Vec<Evaluation>> {
    config.validate()?;
    let per_set = MinerConfig { top_k: usize::MAX, ..config.clone() };
    let found: Vec<Vec<Evaluation>> =
        sets.sets.par_iter().map(|q| Ok(mine(&log.project(q), &per_set)?.ranking)).collect::<Result<_>>()?;
    let trees: BTreeSet<_> = found.into_iter().flatten().map(|e| e.tree).collect();
    let eval = Evaluator::new(log, config);
    let mut out: Vec<Evaluation> = trees
        .par_iter()
        .map(|t| eval.evaluate(t))
        .collect::<Result<Vec<_>>>()?
        .into_iter()
        .filter(|e| e.quality.support >= config.min_support && e.quality.determinism >= config.min_determinism)
        .collect();
    sort_ranking(&mut out);
    out.truncate(config.top_k);
    Ok(out)
}

/// NDCG@k of a ranking against a reference ranking, with aggregate scores as relevance.
pub fn ranking_ndcg(ranking: &[Evaluation], reference: &[Evaluation], k: usize) -> Result<f64> {
    let rel = |r: &[Evaluation]| r.iter().map(|e| e.quality.aggregate).collect::<Vec<_>>();
    ndcg_at_k(&rel(ranking), &rel(reference), k)
}
