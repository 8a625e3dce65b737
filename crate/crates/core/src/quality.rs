//! Pattern quality measures, ranking, conformance measures and ranking metrics.

use std::cmp::Ordering;
use std::collections::{BTreeMap, BTreeSet, HashMap};

use serde::{Deserialize, Serialize};

use crate::alignment::{align, CostPolicy, InstanceMultiset, PatternMatch};
use crate::error::{Error, Result};
use crate::log::EventLog;
use crate::petri::{AcceptingPetriNet, Marking};
use crate::tree::{ProcessTree, DEFAULT_BUDGET};

/// Weights of the five measures plus the support squash constant and the
/// language-fit bound.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct RankingWeights {
    pub support: f64,
    pub confidence: f64,
    pub language_fit: f64,
    pub determinism: f64,
    pub coverage: f64,
    /// Squash constant; the number of traces when unset.
    pub c: Option<f64>,
    /// Language-fit bound; the longest trace length when unset.
    pub n: Option<usize>,
    /// Enumeration budget for the bounded language.
    pub budget: usize,
}

impl Default for RankingWeights {
    fn default() -> Self {
        RankingWeights {
            support: 0.2,
            confidence: 0.2,
            language_fit: 0.2,
            determinism: 0.2,
            coverage: 0.2,
            c: None,
            n: None,
            budget: DEFAULT_BUDGET,
        }
    }
}

impl RankingWeights {
    pub fn validate(&self) -> Result<()> {
        let w = [self.support, self.confidence, self.language_fit, self.determinism, self.coverage];
        if w.iter().any(|x| !x.is_finite() || *x < 0.0) {
            return Err(Error::InvalidArgument("weights must be finite and non-negative".into()));
        }
        if w.iter().all(|&x| x == 0.0) {
            return Err(Error::InvalidArgument("weights must not all be zero".into()));
        }
        if let Some(c) = self.c {
            if !(c > 0.0 && c.is_finite()) {
                return Err(Error::InvalidArgument("squash constant must be positive".into()));
            }
        }
        if self.n == Some(0) {
            return Err(Error::InvalidArgument("language bound must be at least 1".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ActivityCount {
    pub fitting: usize,
    pub total: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QualityVector {
    pub support: usize,
    pub confidence: f64,
    /// `None` when the bounded language exceeded the enumeration budget.
    pub language_fit: Option<f64>,
    pub determinism: f64,
    pub coverage: f64,
    pub normalized_support: f64,
    pub aggregate: f64,
    pub activities: BTreeMap<String, ActivityCount>,
    pub covered_events: usize,
    pub total_events: usize,
    pub traces: usize,
}

impl QualityVector {
    /// Recomputes the squashed support and the aggregate under new weights.
    pub fn reweight(&self, w: &RankingWeights) -> QualityVector {
        let mut q = self.clone();
        let c = w.c.unwrap_or(self.traces.max(1) as f64);
        q.normalized_support = q.support as f64 / (q.support as f64 + c);
        let mut parts = vec![
            (w.support, q.normalized_support),
            (w.confidence, q.confidence),
            (w.determinism, q.determinism),
            (w.coverage, q.coverage),
        ];
        if let Some(lf) = q.language_fit {
            parts.push((w.language_fit, lf));
        }
        let mass: f64 = parts.iter().map(|p| p.0).sum();
        q.aggregate = if mass > 0.0 { parts.iter().map(|(a, b)| a * b).sum::<f64>() / mass } else { 0.0 };
        q
    }
}

/// Quality of a pattern from its instances and replay profile.
pub fn quality_from_match(pattern: &ProcessTree, log: &EventLog, m: &PatternMatch, w: &RankingWeights) -> QualityVector {
    let lang = pattern.bounded_language_with_budget(language_bound(log, w), w.budget).ok();
    quality_core(&pattern.activities(), lang.as_ref(), log, m, w)
}

fn language_bound(log: &EventLog, w: &RankingWeights) -> usize {
    w.n.unwrap_or_else(|| log.longest_trace()).max(1)
}

/// Quality of a hand-built net pattern.
pub fn evaluate_net(net: &AcceptingPetriNet, log: &EventLog, w: &RankingWeights) -> Result<QualityVector> {
    let m = crate::alignment::match_net(net, log)?;
    let lang = net.bounded_language(language_bound(log, w), w.budget).ok();
    let alphabet: BTreeSet<String> = net.labels().into_iter().map(str::to_string).collect();
    Ok(quality_core(&alphabet, lang.as_ref(), log, &m, w))
}

fn quality_core(
    alphabet: &BTreeSet<String>,
    lang: Option<&BTreeSet<Vec<String>>>,
    log: &EventLog,
    m: &PatternMatch,
    w: &RankingWeights,
) -> QualityVector {
    let mut activities: BTreeMap<String, ActivityCount> =
        alphabet.iter().map(|a| (a.clone(), ActivityCount { fitting: 0, total: log.activity_count(a) })).collect();
    let mut words = BTreeSet::new();
    let mut covered = 0;
    for inst in &m.instances.instances {
        let events = &log.traces()[inst.trace].events;
        let word: Vec<String> = inst.landmark.iter().map(|&p| events[p - 1].activity.clone()).collect();
        for a in &word {
            activities.get_mut(a).expect("instance labels are pattern labels").fitting += 1;
        }
        covered += word.len();
        words.insert(word);
    }
    let confidence = if activities.values().any(|c| c.fitting == 0) {
        0.0
    } else {
        let k = activities.len() as f64;
        k / activities.values().map(|c| c.total as f64 / c.fitting as f64).sum::<f64>()
    };
    let language_fit = lang.map(|lang| {
        if lang.is_empty() {
            0.0
        } else {
            words.iter().filter(|x| lang.contains(*x)).count() as f64 / lang.len() as f64
        }
    });
    let total_events = log.event_count();
    let q = QualityVector {
        support: m.instances.len(),
        confidence,
        language_fit,
        determinism: m.profile.determinism,
        coverage: if total_events == 0 { 0.0 } else { covered as f64 / total_events as f64 },
        normalized_support: 0.0,
        aggregate: 0.0,
        activities,
        covered_events: covered,
        total_events,
        traces: log.len(),
    };
    q.reweight(w)
}

/// A pattern with its instances and quality.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Evaluation {
    pub tree: ProcessTree,
    pub quality: QualityVector,
    pub instances: InstanceMultiset,
}

pub fn evaluate_full(pattern: &ProcessTree, log: &EventLog, w: &RankingWeights) -> Result<Evaluation> {
    let m = crate::alignment::match_pattern(pattern, log)?;
    let quality = quality_from_match(pattern, log, &m, w);
    Ok(Evaluation { tree: pattern.clone(), quality, instances: m.instances })
}

pub fn evaluate(pattern: &ProcessTree, log: &EventLog, w: &RankingWeights) -> Result<QualityVector> {
    Ok(evaluate_full(pattern, log, w)?.quality)
}

/// Ranking order: aggregate desc, support desc, tree text asc.
pub fn rank_order(a: &Evaluation, b: &Evaluation) -> Ordering {
    b.quality
        .aggregate
        .partial_cmp(&a.quality.aggregate)
        .unwrap_or(Ordering::Equal)
        .then(b.quality.support.cmp(&a.quality.support))
        .then_with(|| a.tree.to_string().cmp(&b.tree.to_string()))
}

pub fn sort_ranking(evals: &mut [Evaluation]) {
    evals.sort_by(rank_order);
}

pub fn rank(patterns: &[ProcessTree], log: &EventLog, w: &RankingWeights) -> Result<Vec<Evaluation>> {
    w.validate()?;
    let mut evals = patterns.iter().map(|p| evaluate_full(p, log, w)).collect::<Result<Vec<_>>>()?;
    sort_ranking(&mut evals);
    Ok(evals)
}

/// Standard alignments of every distinct trace, with multiplicities.
fn variant_alignments(log: &EventLog, net: &AcceptingPetriNet) -> Result<Vec<(Vec<String>, usize, crate::alignment::Alignment)>> {
    log.label_view()
        .into_iter()
        .map(|(w, k)| {
            let al = align(net, &w, CostPolicy::standard())?;
            Ok((w, k, al))
        })
        .collect()
}

/// Share of traces that fit the model perfectly.
pub fn rft_fitness(log: &EventLog, net: &AcceptingPetriNet) -> Result<f64> {
    if log.is_empty() {
        return Ok(1.0);
    }
    let fitting: usize =
        variant_alignments(log, net)?.iter().filter(|(_, _, al)| al.cost.deviations == 0).map(|(_, k, _)| k).sum();
    Ok(fitting as f64 / log.len() as f64)
}

/// Alignment-based fitness: one minus optimal cost over worst-case cost, the
/// worst case being all log moves plus the shortest visible model run.
pub fn abf_fitness(log: &EventLog, net: &AcceptingPetriNet) -> Result<f64> {
    let shortest = net.shortest_visible_path(DEFAULT_BUDGET)?.ok_or(Error::NoPath)?;
    let mut cost = 0usize;
    let mut worst = 0usize;
    for (w, k, al) in variant_alignments(log, net)? {
        cost += k * al.cost.deviations;
        worst += k * (w.len() + shortest);
    }
    Ok(if worst == 0 { 1.0 } else { 1.0 - cost as f64 / worst as f64 })
}

#[derive(Default)]
struct EtcState {
    visits: usize,
    enabled: BTreeSet<usize>,
    observed: BTreeSet<usize>,
}

/// How escaping-edges precision identifies visible steps.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EtcKeys {
    /// Steps are activity labels; duplicate transitions collapse.
    Labels,
    /// Steps are transitions; duplicate transitions stay distinct.
    Transitions,
}

/// Escaping-edges precision over the prefix automaton of aligned model runs.
/// States are keyed by the prefix of visible labels fired; a state's
/// enabled set is the labels enabled in the silent closure of the marking
/// reached, and only visits that continue carry weight.
pub fn etc_precision(log: &EventLog, net: &AcceptingPetriNet) -> Result<f64> {
    let aligned = variant_alignments(log, net)?;
    let runs: Vec<(Vec<usize>, usize)> = aligned.into_iter().map(|(_, k, al)| (al.firings(), k)).collect();
    etc_from_runs(net, &runs, EtcKeys::Labels)
}

/// Escaping-edges precision from model-side firing sequences with multiplicities.
pub fn etc_from_runs(net: &AcceptingPetriNet, runs: &[(Vec<usize>, usize)], keys: EtcKeys) -> Result<f64> {
    let labels: Vec<&str> = net.labels().into_iter().collect();
    let key = |t: usize| match keys {
        EtcKeys::Transitions => t,
        EtcKeys::Labels => {
            let l = net.transition(t).label.as_deref().unwrap_or_default();
            labels.iter().position(|x| *x == l).unwrap_or(usize::MAX)
        }
    };
    let mut states: HashMap<Vec<usize>, EtcState> = HashMap::new();
    let mut closures: HashMap<Marking, BTreeSet<usize>> = HashMap::new();
    let mut visible_enabled = |m: &Marking| -> Result<BTreeSet<usize>> {
        if let Some(e) = closures.get(m) {
            return Ok(e.clone());
        }
        let mut e = BTreeSet::new();
        for c in net.silent_closure(m, DEFAULT_BUDGET)? {
            e.extend(net.enabled(&c).into_iter().filter(|&t| !net.transition(t).is_silent()).map(key));
        }
        closures.insert(m.clone(), e.clone());
        Ok(e)
    };
    for (firings, k) in runs {
        let mut m = net.initial().clone();
        let mut prefix = Vec::new();
        let mut at_state = m.clone();
        for &t in firings {
            if !net.transition(t).is_silent() {
                let en = visible_enabled(&at_state)?;
                let st = states.entry(prefix.clone()).or_default();
                st.visits += k;
                st.enabled.extend(en);
                st.observed.insert(key(t));
                prefix.push(key(t));
                m = net.fire(&m, t)?;
                at_state = m.clone();
            } else {
                m = net.fire(&m, t)?;
            }
        }
    }
    let (mut num, mut den) = (0usize, 0usize);
    for st in states.values() {
        num += st.visits * st.observed.len();
        den += st.visits * st.enabled.len();
    }
    Ok(if den == 0 { 1.0 } else { num as f64 / den as f64 })
}

/// DCG over the first `k` relevances.
pub fn dcg_at_k(relevances: &[f64], k: usize) -> f64 {
    relevances.iter().take(k).enumerate().map(|(i, r)| r / ((i + 2) as f64).log2()).sum()
}

/// NDCG of a ranking's relevances against the ideal ranking's relevances.
pub fn ndcg_at_k(ranking: &[f64], ideal: &[f64], k: usize) -> Result<f64> {
    if k == 0 {
        return Err(Error::InvalidArgument("k must be at least 1".into()));
    }
    let dcg = dcg_at_k(ranking, k);
    let idcg = dcg_at_k(ideal, k);
    if idcg == 0.0 {
        return if dcg == 0.0 { Ok(1.0) } else { Err(Error::InvalidArgument("ideal DCG is zero".into())) };
    }
    Ok(dcg / idcg)
}

/// Share of the ideal top k found in the ranking's top k; the denominator
/// is capped by the ideal list length.
pub fn recall_at_k<T: PartialEq>(ranking: &[T], ideal: &[T], k: usize) -> Result<f64> {
    if k == 0 {
        return Err(Error::InvalidArgument("k must be at least 1".into()));
    }
    let top: Vec<&T> = ideal.iter().take(k).collect();
    if top.is_empty() {
        return Ok(1.0);
    }
    let hits = ranking.iter().take(k).filter(|x| top.contains(x)).count();
    Ok(hits as f64 / top.len() as f64)
}
