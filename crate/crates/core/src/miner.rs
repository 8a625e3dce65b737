//! Local process model search: expansion, evaluation, selection and pruning.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::sync::Mutex;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::alignment::match_pattern;
use crate::error::{Error, Result};
use crate::gap::{constrained_match, ExtractionCache, ExtractionStrategy, GapConstraint};
use crate::log::EventLog;
use crate::quality::{quality_from_match, sort_ranking, Evaluation, RankingWeights};
use crate::tree::{Operator, ProcessTree};

pub const DEFAULT_MAX_ACTIVITIES: usize = 14;

/// How the search space is pruned.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Pruning {
    /// Drop a subtree only when an upper bound on the support of every tree
    /// it can still grow into is below `min_support`. Never loses a pattern.
    #[default]
    Bound,
    /// Monotonicity rules: below `min_support` only choice expansions, below
    /// `min_determinism` only sequence and loop expansions, below both none.
    /// Faster, but may miss qualifying patterns.
    Monotone,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct MinerConfig {
    pub min_support: usize,
    pub min_determinism: f64,
    /// Expansion rounds; trees grow to at most `max_iterations + 1` leaves.
    pub max_iterations: usize,
    pub top_k: usize,
    pub weights: RankingWeights,
    pub operators: BTreeSet<Operator>,
    pub gap: Option<GapConstraint>,
    pub gap_strategy: ExtractionStrategy,
    /// Refuse logs with more activities than this.
    pub max_activities: usize,
    pub pruning: Pruning,
}

impl Default for MinerConfig {
    fn default() -> Self {
        MinerConfig {
            min_support: 1,
            min_determinism: 0.0,
            max_iterations: 3,
            top_k: 100,
            weights: RankingWeights::default(),
            operators: [Operator::Seq, Operator::Xor, Operator::And, Operator::Loop].into(),
            gap: None,
            gap_strategy: ExtractionStrategy::CachedDynamic,
            max_activities: DEFAULT_MAX_ACTIVITIES,
            pruning: Pruning::Bound,
        }
    }
}

impl MinerConfig {
    pub fn validate(&self) -> Result<()> {
        if self.min_support < 1 {
            return Err(Error::Config("min_support must be at least 1".into()));
        }
        if !(0.0..=1.0).contains(&self.min_determinism) {
            return Err(Error::Config("min_determinism must lie in [0, 1]".into()));
        }
        if self.max_iterations < 1 {
            return Err(Error::Config("max_iterations must be at least 1".into()));
        }
        if self.top_k < 1 {
            return Err(Error::Config("top_k must be at least 1".into()));
        }
        self.weights.validate()
    }
}

fn expand_into(
    t: &ProcessTree,
    parent: Option<Operator>,
    first: bool,
    alphabet: &[String],
    ops: &BTreeSet<Operator>,
    wrap: &dyn Fn(ProcessTree) -> ProcessTree,
    out: &mut BTreeSet<ProcessTree>,
) {
    match t {
        ProcessTree::Activity(a) => {
            let leaf = || t.clone();
            let ia = alphabet.iter().position(|x| x == a);
            for (ib, b) in alphabet.iter().enumerate() {
                let nb = || ProcessTree::activity(b.clone());
                if ops.contains(&Operator::Seq) {
                    out.insert(wrap(ProcessTree::seq(leaf(), nb())));
                }
                if ia.is_some_and(|ia| ia < ib) {
                    for op in [Operator::And, Operator::Xor] {
                        if ops.contains(&op) && !(parent == Some(op) && first) {
                            out.insert(wrap(ProcessTree::binary(op, leaf(), nb())));
                        }
                    }
                }
            }
            if ops.contains(&Operator::Loop) && parent != Some(Operator::Loop) {
                out.insert(wrap(ProcessTree::looped(leaf())));
            }
        }
        ProcessTree::Loop(c) => {
            expand_into(c, Some(Operator::Loop), true, alphabet, ops, &|x| wrap(ProcessTree::looped(x)), out);
        }
        ProcessTree::Seq(l, r) | ProcessTree::Xor(l, r) | ProcessTree::And(l, r) => {
            let op = t.operator().expect("binary node");
            let (l, r) = (&**l, &**r);
            expand_into(l, Some(op), true, alphabet, ops, &|x| wrap(ProcessTree::binary(op, x, r.clone())), out);
            expand_into(r, Some(op), false, alphabet, ops, &|x| wrap(ProcessTree::binary(op, l.clone(), x)), out);
        }
    }
}

/// All single-step expansions of `tree` using the operators in `ops`.
/// `alphabet` fixes the activity order used by the commutative-operator rule.
pub fn expand_with(tree: &ProcessTree, alphabet: &[String], ops: &BTreeSet<Operator>) -> BTreeSet<ProcessTree> {
    let mut out = BTreeSet::new();
    expand_into(tree, None, false, alphabet, ops, &|x| x, &mut out);
    out
}

/// All single-step expansions of `tree` over a sorted alphabet.
pub fn expand(tree: &ProcessTree, alphabet: &BTreeSet<String>) -> BTreeSet<ProcessTree> {
    let alpha: Vec<String> = alphabet.iter().cloned().collect();
    expand_with(tree, &alpha, &[Operator::Seq, Operator::Xor, Operator::And, Operator::Loop].into())
}

/// Per-round counters for the run manifest.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct RoundStats {
    pub round: usize,
    pub candidates: usize,
    pub selected: usize,
    pub failed_support: usize,
    pub failed_determinism: usize,
    pub failed_both: usize,
    pub expansions: usize,
    /// Expansions dropped by the support bound before evaluation.
    pub bounded_out: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MiningOutcome {
    pub ranking: Vec<Evaluation>,
    pub rounds: Vec<RoundStats>,
    /// Patterns meeting both thresholds before truncation to `top_k`.
    pub qualifying: usize,
}

/// Length of the shortest word in the language of `t`.
pub fn min_word_length(t: &ProcessTree) -> usize {
    match t {
        ProcessTree::Activity(_) => 1,
        ProcessTree::Seq(l, r) | ProcessTree::And(l, r) => min_word_length(l) + min_word_length(r),
        ProcessTree::Xor(l, r) => min_word_length(l).min(min_word_length(r)),
        ProcessTree::Loop(c) => min_word_length(c),
    }
}

/// Per-trace activity counts used by the support bound.
struct TraceCounts {
    counts: Vec<HashMap<String, usize>>,
}

impl TraceCounts {
    fn new(log: &EventLog) -> Self {
        let counts = log
            .traces()
            .iter()
            .map(|t| {
                let mut m = HashMap::new();
                for e in &t.events {
                    *m.entry(e.activity.clone()).or_insert(0) += 1;
                }
                m
            })
            .collect();
        TraceCounts { counts }
    }

    /// Upper bound on the support of any tree obtained from `t` by at most
    /// `rounds` further expansions. Expansions never shorten the shortest
    /// word and add at most one activity each, and instances are disjoint.
    fn support_bound(&self, t: &ProcessTree, rounds: usize) -> usize {
        let acts = t.activities();
        let len = min_word_length(t);
        self.counts
            .iter()
            .map(|m| {
                let base: usize = acts.iter().filter_map(|a| m.get(a)).sum();
                let mut others: Vec<usize> = m.iter().filter(|(a, _)| !acts.contains(*a)).map(|(_, &c)| c).collect();
                others.sort_unstable_by(|a, b| b.cmp(a));
                (base + others.iter().take(rounds).sum::<usize>()) / len
            })
            .sum()
    }
}

/// Evaluates trees against one log, memoized by tree.
pub struct Evaluator<'a> {
    log: &'a EventLog,
    weights: RankingWeights,
    gap: Option<(GapConstraint, ExtractionStrategy)>,
    extractions: ExtractionCache,
    memo: Mutex<HashMap<ProcessTree, Evaluation>>,
}

impl<'a> Evaluator<'a> {
    pub fn new(log: &'a EventLog, config: &MinerConfig) -> Self {
        Evaluator {
            log,
            weights: config.weights.clone(),
            gap: config.gap.map(|g| (g, config.gap_strategy)),
            extractions: ExtractionCache::new(),
            memo: Mutex::new(HashMap::new()),
        }
    }

    pub fn evaluate(&self, tree: &ProcessTree) -> Result<Evaluation> {
        if let Some(e) = self.memo.lock().expect("memo lock").get(tree) {
            return Ok(e.clone());
        }
        let m = match self.gap {
            None => match_pattern(tree, self.log)?,
            Some((c, s)) => constrained_match(self.log, tree, c, s, Some(&self.extractions))?,
        };
        let quality = quality_from_match(tree, self.log, &m, &self.weights);
        let e = Evaluation { tree: tree.clone(), quality, instances: m.instances };
        self.memo.lock().expect("memo lock").insert(tree.clone(), e.clone());
        Ok(e)
    }
}

/// Mines local process models.
///
/// Every round evaluates the frontier, keeps candidates meeting both
/// thresholds and expands them according to the pruning mode.
pub fn mine(log: &EventLog, config: &MinerConfig) -> Result<MiningOutcome> {
    config.validate()?;
    let empty = MiningOutcome { ranking: vec![], rounds: vec![], qualifying: 0 };
    if log.event_count() == 0 {
        return Ok(empty);
    }
    if log.alphabet().len() > config.max_activities {
        return Err(Error::Config(format!(
            "log has {} activities, more than the limit of {}; mine projections instead",
            log.alphabet().len(),
            config.max_activities
        )));
    }
    let alphabet: Vec<String> = log.alphabet().iter().cloned().collect();
    let eval = Evaluator::new(log, config);
    let counts = TraceCounts::new(log);
    let mut frontier: Vec<ProcessTree> = alphabet.iter().map(|a| ProcessTree::activity(a.clone())).collect();
    let mut results: BTreeMap<ProcessTree, Evaluation> = BTreeMap::new();
    let mut rounds = Vec::new();
    for round in 0..=config.max_iterations {
        if frontier.is_empty() {
            break;
        }
        let evals: Vec<Evaluation> = frontier.par_iter().map(|t| eval.evaluate(t)).collect::<Result<_>>()?;
        let mut stats = RoundStats { round, candidates: evals.len(), ..RoundStats::default() };
        let mut next = BTreeSet::new();
        for e in evals {
            let sup = e.quality.support >= config.min_support;
            let det = e.quality.determinism >= config.min_determinism;
            let ops: BTreeSet<Operator> = match (config.pruning, sup, det) {
                (Pruning::Bound, ..) | (Pruning::Monotone, true, true) => config.operators.clone(),
                (Pruning::Monotone, false, true) => [Operator::Xor].into(),
                (Pruning::Monotone, true, false) => [Operator::Seq, Operator::Loop].into(),
                (Pruning::Monotone, false, false) => BTreeSet::new(),
            };
            match (sup, det) {
                (true, true) => stats.selected += 1,
                (false, true) => stats.failed_support += 1,
                (true, false) => stats.failed_determinism += 1,
                (false, false) => stats.failed_both += 1,
            }
            // no tree can have more instances than the log has events
            if round < config.max_iterations && config.min_support <= log.event_count() {
                let ops: BTreeSet<Operator> = ops.intersection(&config.operators).copied().collect();
                let left = config.max_iterations - round - 1;
                for x in expand_with(&e.tree, &alphabet, &ops) {
                    if config.pruning == Pruning::Bound && counts.support_bound(&x, left) < config.min_support {
                        stats.bounded_out += 1;
                    } else {
                        next.insert(x);
                    }
                }
            }
            if sup && det {
                results.insert(e.tree.clone(), e);
            }
        }
        stats.expansions = next.len();
        rounds.push(stats);
        frontier = next.into_iter().collect();
    }
    let mut ranking: Vec<Evaluation> = results.into_values().collect();
    let qualifying = ranking.len();
    sort_ranking(&mut ranking);
    ranking.truncate(config.top_k);
    Ok(MiningOutcome { ranking, rounds, qualifying })
}
