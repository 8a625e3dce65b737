//! Optimal trace-to-net alignments, instance extraction and replay profiles.
//!
//! Costs are compared lexicographically as (deviations, backloop firings,
//! other silent firings). In instance-counting mode labeled model moves are
//! not allowed, so every deviation is a log move; the second tier then
//! selects the fewest instances among alignments that explain the most events.

use std::cmp::Reverse;
use std::collections::{BTreeSet, BinaryHeap, HashMap};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::log::EventLog;
use crate::petri::{AcceptingPetriNet, Marking};
use crate::tree::ProcessTree;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CostMode {
    Standard,
    InstanceCounting,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CostPolicy {
    pub mode: CostMode,
    /// Use the admissible unmatched-label lower bound; uniform-cost search otherwise.
    pub heuristic: bool,
    /// Search states explored before giving up.
    pub max_states: usize,
}

impl CostPolicy {
    pub fn standard() -> Self {
        CostPolicy { mode: CostMode::Standard, heuristic: true, max_states: 5_000_000 }
    }

    pub fn instance_counting() -> Self {
        CostPolicy { mode: CostMode::InstanceCounting, heuristic: true, max_states: 5_000_000 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Default, Serialize, Deserialize)]
pub struct Cost {
    /// Log moves plus labeled model moves.
    pub deviations: usize,
    pub backloops: usize,
    pub silent: usize,
}

/// One alignment step. `event` indexes the aligned sequence (0-based).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Move {
    pub event: Option<usize>,
    pub transition: Option<usize>,
}

impl Move {
    pub fn is_sync(&self) -> bool {
        self.event.is_some() && self.transition.is_some()
    }

    pub fn is_log(&self) -> bool {
        self.transition.is_none()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Alignment {
    pub moves: Vec<Move>,
    pub cost: Cost,
}

impl Alignment {
    pub fn sync_moves(&self) -> usize {
        self.moves.iter().filter(|m| m.is_sync()).count()
    }

    pub fn log_moves(&self) -> usize {
        self.moves.iter().filter(|m| m.is_log()).count()
    }

    pub fn labeled_model_moves(&self, net: &AcceptingPetriNet) -> usize {
        self.model_only().filter(|&t| !net.transition(t).is_silent()).count()
    }

    pub fn silent_moves(&self, net: &AcceptingPetriNet) -> usize {
        self.model_only().filter(|&t| net.transition(t).is_silent()).count()
    }

    fn model_only(&self) -> impl Iterator<Item = usize> + '_ {
        self.moves.iter().filter(|m| m.event.is_none()).filter_map(|m| m.transition)
    }

    /// Model-side firing sequence.
    pub fn firings(&self) -> Vec<usize> {
        self.moves.iter().filter_map(|m| m.transition).collect()
    }
}

struct Node {
    pos: usize,
    marking: Marking,
    flag: bool,
    last: Option<usize>,
    cost: Cost,
    pred: Option<(usize, Move)>,
    closed: bool,
}

/// Computes a cost-minimal alignment. Ties are broken deterministically:
/// successors are generated by ascending transition id with the log move
/// last, and among equal-cost paths the first one found is kept.
/// A backloop may not fire twice without a synchronous move in between.
pub fn align<S: AsRef<str>>(net: &AcceptingPetriNet, trace: &[S], policy: CostPolicy) -> Result<Alignment> {
    align_with(net, trace, policy, None)
}

/// Like [`align`], but a synchronous move on event `j` is only allowed when
/// `admissible(i, j)` holds for the previous synchronous event `i` of the same
/// instance. Instances are delimited by backloop firings.
pub fn align_gapped<S: AsRef<str>>(
    net: &AcceptingPetriNet,
    trace: &[S],
    policy: CostPolicy,
    admissible: &dyn Fn(usize, usize) -> bool,
) -> Result<Alignment> {
    align_with(net, trace, policy, Some(admissible))
}

fn align_with<S: AsRef<str>>(
    net: &AcceptingPetriNet,
    trace: &[S],
    policy: CostPolicy,
    admissible: Option<&dyn Fn(usize, usize) -> bool>,
) -> Result<Alignment> {
    let trace: Vec<&str> = trace.iter().map(|s| s.as_ref()).collect();
    let n = trace.len();
    let labels = net.labels();
    let mut h = vec![0usize; n + 1];
    if policy.heuristic {
        for i in (0..n).rev() {
            h[i] = h[i + 1] + usize::from(!labels.contains(trace[i]));
        }
    }
    let standard = policy.mode == CostMode::Standard;

    let mut nodes: Vec<Node> = Vec::new();
    let mut index: HashMap<(usize, Marking, bool, Option<usize>), usize> = HashMap::new();
    let mut heap: BinaryHeap<Reverse<(usize, usize, usize, u64, usize)>> = BinaryHeap::new();
    let mut seq = 0u64;

    let start =
        Node { pos: 0, marking: net.initial().clone(), flag: false, last: None, cost: Cost::default(), pred: None, closed: false };
    index.insert((0, start.marking.clone(), false, None), 0);
    nodes.push(start);
    heap.push(Reverse((h[0], 0, 0, seq, 0)));

    let mut relax = |nodes: &mut Vec<Node>,
                     heap: &mut BinaryHeap<Reverse<(usize, usize, usize, u64, usize)>>,
                     from: usize,
                     pos: usize,
                     marking: Marking,
                     flag: bool,
                     last: Option<usize>,
                     cost: Cost,
                     mv: Move| {
        let key = (pos, marking, flag, last);
        let id = match index.get(&key) {
            Some(&id) => {
                if nodes[id].closed || nodes[id].cost <= cost {
                    return;
                }
                nodes[id].cost = cost;
                nodes[id].pred = Some((from, mv));
                id
            }
            None => {
                let id = nodes.len();
                nodes.push(Node { pos, marking: key.1.clone(), flag, last, cost, pred: Some((from, mv)), closed: false });
                index.insert(key, id);
                id
            }
        };
        seq += 1;
        heap.push(Reverse((cost.deviations + h[pos], cost.backloops, cost.silent, seq, id)));
    };

    while let Some(Reverse((_, _, _, _, id))) = heap.pop() {
        if nodes[id].closed {
            continue;
        }
        nodes[id].closed = true;
        let (pos, flag, last, cost) = (nodes[id].pos, nodes[id].flag, nodes[id].last, nodes[id].cost);
        let marking = nodes[id].marking.clone();
        if pos == n && net.is_final(&marking) {
            return Ok(reconstruct(&nodes, id));
        }
        if nodes.len() > policy.max_states {
            return Err(Error::InfeasibleAlignment);
        }
        for t in net.enabled(&marking) {
            let tr = net.transition(t);
            let next = net.fire_unchecked(&marking, t);
            match tr.label.as_deref() {
                None if net.is_backloop(t) => {
                    if !flag {
                        let c = Cost { backloops: cost.backloops + 1, ..cost };
                        relax(&mut nodes, &mut heap, id, pos, next, true, None, c, Move { event: None, transition: Some(t) });
                    }
                }
                None => {
                    let c = Cost { silent: cost.silent + 1, ..cost };
                    relax(&mut nodes, &mut heap, id, pos, next, flag, last, c, Move { event: None, transition: Some(t) });
                }
                Some(l) => {
                    let allowed = || match (admissible, last) {
                        (Some(f), Some(i)) => f(i, pos),
                        _ => true,
                    };
                    if pos < n && trace[pos] == l && allowed() {
                        let last = admissible.map(|_| pos);
                        relax(&mut nodes, &mut heap, id, pos + 1, next.clone(), false, last, cost, Move {
                            event: Some(pos),
                            transition: Some(t),
                        });
                    }
                    if standard {
                        let c = Cost { deviations: cost.deviations + 1, ..cost };
                        relax(&mut nodes, &mut heap, id, pos, next, flag, last, c, Move { event: None, transition: Some(t) });
                    }
                }
            }
        }
        if pos < n {
            let c = Cost { deviations: cost.deviations + 1, ..cost };
            relax(&mut nodes, &mut heap, id, pos + 1, marking, flag, last, c, Move { event: Some(pos), transition: None });
        }
    }
    Err(Error::InfeasibleAlignment)
}

fn reconstruct(nodes: &[Node], mut id: usize) -> Alignment {
    let cost = nodes[id].cost;
    let mut moves = Vec::new();
    while let Some((prev, mv)) = nodes[id].pred {
        moves.push(mv);
        id = prev;
    }
    moves.reverse();
    Alignment { moves, cost }
}

/// One pattern instance found in an aligned sequence, with the number of
/// enabled transitions before each model-side firing attributed to it.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct InstanceRun {
    /// 0-based positions in the aligned sequence.
    pub positions: Vec<usize>,
    pub enabled: Vec<usize>,
    /// Source pattern of the synchronous moves (merged models only).
    pub pattern: Option<usize>,
}

/// Splits an alignment on a net with backloops into instances; every firing
/// up to and including a backloop belongs to the instance it closes.
pub fn instance_runs(net: &AcceptingPetriNet, alignment: &Alignment) -> Vec<InstanceRun> {
    let mut m = net.initial().clone();
    let mut runs = Vec::new();
    let mut cur = InstanceRun::default();
    for mv in &alignment.moves {
        let Some(t) = mv.transition else { continue };
        cur.enabled.push(net.enabled(&m).len());
        m = net.fire_unchecked(&m, t);
        if let Some(e) = mv.event {
            cur.positions.push(e);
            if cur.pattern.is_none() {
                cur.pattern = net.transition(t).pattern;
            }
        }
        if net.is_backloop(t) {
            runs.push(std::mem::take(&mut cur));
        }
    }
    if !cur.positions.is_empty() || !cur.enabled.is_empty() {
        runs.push(cur);
    }
    runs
}

/// A contiguous or projected piece of an original trace.
#[derive(Debug, Clone, PartialEq)]
pub struct Segment {
    pub trace: usize,
    /// 0-based positions in the original trace.
    pub positions: Vec<usize>,
    pub labels: Vec<String>,
}

/// Every trace projected onto `alphabet`, keeping original positions.
pub fn project_segments(log: &EventLog, alphabet: &BTreeSet<String>) -> Vec<Segment> {
    log.traces()
        .iter()
        .enumerate()
        .map(|(ti, t)| {
            let (positions, labels) = t
                .events
                .iter()
                .enumerate()
                .filter(|(_, e)| alphabet.contains(&e.activity))
                .map(|(i, e)| (i, e.activity.clone()))
                .unzip();
            Segment { trace: ti, positions, labels }
        })
        .collect()
}

/// Aligns each distinct label sequence once (instance-counting policy) and
/// returns, per segment, its instances with positions mapped to the original trace.
pub fn match_segments(net_ic: &AcceptingPetriNet, segments: &[Segment]) -> Result<Vec<Vec<InstanceRun>>> {
    let mut cache: HashMap<&[String], Vec<InstanceRun>> = HashMap::new();
    let mut out = Vec::with_capacity(segments.len());
    for s in segments {
        if !cache.contains_key(s.labels.as_slice()) {
            let al = align(net_ic, &s.labels, CostPolicy::instance_counting())?;
            cache.insert(&s.labels, instance_runs(net_ic, &al));
        }
        let runs = cache[s.labels.as_slice()]
            .iter()
            .map(|r| InstanceRun {
                positions: r.positions.iter().map(|&p| s.positions[p]).collect(),
                enabled: r.enabled.clone(),
                pattern: r.pattern,
            })
            .collect();
        out.push(runs);
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Instance {
    pub trace: usize,
    pub trace_id: String,
    /// 1-based positions into the unprojected trace.
    pub landmark: Vec<usize>,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct InstanceMultiset {
    pub instances: Vec<Instance>,
}

impl InstanceMultiset {
    pub fn len(&self) -> usize {
        self.instances.len()
    }

    pub fn is_empty(&self) -> bool {
        self.instances.is_empty()
    }

    /// Landmarks grouped by trace index.
    pub fn landmarks_of(&self, trace: usize) -> Vec<&[usize]> {
        self.instances.iter().filter(|i| i.trace == trace).map(|i| i.landmark.as_slice()).collect()
    }
}

/// The instance-counting net of a pattern.
pub fn instance_net(pattern: &ProcessTree) -> AcceptingPetriNet {
    pattern.to_petri_net().to_instance_counter().expect("tree nets have one final place")
}

fn runs_for(net: &AcceptingPetriNet, log: &EventLog) -> Result<(Vec<Segment>, Vec<Vec<InstanceRun>>)> {
    let net_ic = net.to_instance_counter()?;
    let alphabet: BTreeSet<String> = net.labels().into_iter().map(str::to_string).collect();
    let segments = project_segments(log, &alphabet);
    let runs = match_segments(&net_ic, &segments)?;
    Ok((segments, runs))
}

/// Instances and replay profile of one pattern, from a single alignment pass.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PatternMatch {
    pub instances: InstanceMultiset,
    pub profile: ReplayProfile,
}

/// Builds Γ and the replay profile from matched segments, keeping the runs
/// accepted by `keep` (called with the trace index and original positions).
pub fn assemble<F>(log: &EventLog, segments: &[Segment], runs: &[Vec<InstanceRun>], mut keep: F) -> PatternMatch
where
    F: FnMut(usize, &InstanceRun) -> bool,
{
    let mut instances = Vec::new();
    let mut enabled = Vec::new();
    for (seg, seg_runs) in segments.iter().zip(runs) {
        for r in seg_runs.iter().filter(|r| !r.positions.is_empty()) {
            if !keep(seg.trace, r) {
                continue;
            }
            enabled.extend_from_slice(&r.enabled);
            instances.push(Instance {
                trace: seg.trace,
                trace_id: log.traces()[seg.trace].id.clone(),
                landmark: r.positions.iter().map(|p| p + 1).collect(),
            });
        }
    }
    instances.sort_by(|a, b| (a.trace, &a.landmark).cmp(&(b.trace, &b.landmark)));
    PatternMatch { instances: InstanceMultiset { instances }, profile: ReplayProfile::from_counts(enabled) }
}

pub fn match_pattern(pattern: &ProcessTree, log: &EventLog) -> Result<PatternMatch> {
    match_net(&pattern.to_petri_net(), log)
}

/// Instances of an accepting net (before the instance-counting transformation).
pub fn match_net(net: &AcceptingPetriNet, log: &EventLog) -> Result<PatternMatch> {
    let (segments, runs) = runs_for(net, log)?;
    Ok(assemble(log, &segments, &runs, |_, _| true))
}

/// Γ: the multiset of maximal non-overlapping instances with the fewest
/// instances among those, one alignment per distinct projected trace.
pub fn extract_instances(pattern: &ProcessTree, log: &EventLog) -> Result<InstanceMultiset> {
    Ok(match_pattern(pattern, log)?.instances)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReplayProfile {
    /// Enabled-transition count before each model-side firing, in log order.
    pub enabled: Vec<usize>,
    pub firings: usize,
    pub enabled_total: usize,
    pub determinism: f64,
}

impl ReplayProfile {
    pub fn from_counts(enabled: Vec<usize>) -> Self {
        let firings = enabled.len();
        let enabled_total: usize = enabled.iter().sum();
        let determinism = if enabled_total == 0 { 1.0 } else { firings as f64 / enabled_total as f64 };
        ReplayProfile { enabled, firings, enabled_total, determinism }
    }
}

/// Replays the instance-counting alignments; determinism = firings / Σ enabled.
/// A log without instances has no firings and determinism 1.
pub fn replay_profile(pattern: &ProcessTree, log: &EventLog) -> Result<ReplayProfile> {
    Ok(match_pattern(pattern, log)?.profile)
}
