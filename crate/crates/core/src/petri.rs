//! Accepting Petri nets: markings, firing, the instance-counting transform
//! and the merged global model over a list of patterns.

use std::collections::{BTreeMap, BTreeSet, BinaryHeap, HashMap, VecDeque};
use std::cmp::Reverse;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::tree::ProcessTree;

/// A multiset of places, kept sorted so equal markings hash equally.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize, Default)]
pub struct Marking(Vec<usize>);

impl Marking {
    pub fn new(mut places: Vec<usize>) -> Self {
        places.sort_unstable();
        Marking(places)
    }

    pub fn places(&self) -> &[usize] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn count(&self, p: usize) -> usize {
        self.0.iter().filter(|&&q| q == p).count()
    }

    /// Multiset inclusion of a sorted slice.
    fn covers(&self, sub: &[usize]) -> bool {
        let mut i = 0;
        for &p in sub {
            while i < self.0.len() && self.0[i] < p {
                i += 1;
            }
            if i == self.0.len() || self.0[i] != p {
                return false;
            }
            i += 1;
        }
        true
    }

    fn missing(&self, sub: &[usize]) -> Vec<usize> {
        let mut have = self.0.clone();
        let mut out = Vec::new();
        for &p in sub {
            match have.iter().position(|&q| q == p) {
                Some(i) => {
                    have.remove(i);
                }
                None => out.push(p),
            }
        }
        out
    }

    fn apply(&self, minus: &[usize], plus: &[usize]) -> Marking {
        let mut v = Vec::with_capacity(self.0.len() + plus.len());
        let mut j = 0;
        for &p in &self.0 {
            if j < minus.len() && minus[j] == p {
                j += 1;
            } else {
                v.push(p);
            }
        }
        v.extend_from_slice(plus);
        v.sort_unstable();
        Marking(v)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Transition {
    pub label: Option<String>,
    /// Sorted input places.
    pub inputs: Vec<usize>,
    /// Sorted output places.
    pub outputs: Vec<usize>,
    /// Index of the source pattern in a merged model.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub pattern: Option<usize>,
}

impl Transition {
    pub fn is_silent(&self) -> bool {
        self.label.is_none()
    }
}

/// A labeled Petri net with an initial marking and a set of final markings.
#[derive(Debug, Clone, PartialEq)]
pub struct AcceptingPetriNet {
    places: Vec<String>,
    transitions: Vec<Transition>,
    initial: Marking,
    finals: Vec<Marking>,
    backloops: Vec<usize>,
}

/// Incremental construction of hand-made nets.
#[derive(Debug, Default)]
pub struct NetBuilder {
    places: Vec<String>,
    transitions: Vec<Transition>,
    initial: Marking,
    finals: Vec<Marking>,
}

impl NetBuilder {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn place(&mut self, name: impl Into<String>) -> usize {
        self.places.push(name.into());
        self.places.len() - 1
    }

    pub fn transition(&mut self, label: Option<&str>, inputs: &[usize], outputs: &[usize]) -> usize {
        let mut i = inputs.to_vec();
        let mut o = outputs.to_vec();
        i.sort_unstable();
        o.sort_unstable();
        self.transitions.push(Transition { label: label.map(str::to_string), inputs: i, outputs: o, pattern: None });
        self.transitions.len() - 1
    }

    pub fn initial(&mut self, places: &[usize]) -> &mut Self {
        self.initial = Marking::new(places.to_vec());
        self
    }

    pub fn final_marking(&mut self, places: &[usize]) -> &mut Self {
        self.finals.push(Marking::new(places.to_vec()));
        self
    }

    pub fn build(self) -> Result<AcceptingPetriNet> {
        let np = self.places.len();
        let bad = self
            .transitions
            .iter()
            .flat_map(|t| t.inputs.iter().chain(&t.outputs))
            .chain(self.initial.places())
            .chain(self.finals.iter().flat_map(|m| m.places()))
            .any(|&p| p >= np);
        if bad {
            return Err(Error::UnsupportedNet("arc or marking references an unknown place".into()));
        }
        Ok(AcceptingPetriNet {
            places: self.places,
            transitions: self.transitions,
            initial: self.initial,
            finals: self.finals,
            backloops: vec![],
        })
    }
}

impl AcceptingPetriNet {
    pub fn places(&self) -> &[String] {
        &self.places
    }

    pub fn transitions(&self) -> &[Transition] {
        &self.transitions
    }

    pub fn transition(&self, t: usize) -> &Transition {
        &self.transitions[t]
    }

    pub fn initial(&self) -> &Marking {
        &self.initial
    }

    pub fn finals(&self) -> &[Marking] {
        &self.finals
    }

    pub fn backloops(&self) -> &[usize] {
        &self.backloops
    }

    pub fn is_backloop(&self, t: usize) -> bool {
        self.backloops.contains(&t)
    }

    pub fn is_final(&self, m: &Marking) -> bool {
        self.finals.contains(m)
    }

    pub fn place_index(&self, name: &str) -> Option<usize> {
        self.places.iter().position(|p| p == name)
    }

    /// Distinct visible labels.
    pub fn labels(&self) -> BTreeSet<&str> {
        self.transitions.iter().filter_map(|t| t.label.as_deref()).collect()
    }

    pub fn is_enabled(&self, m: &Marking, t: usize) -> bool {
        m.covers(&self.transitions[t].inputs)
    }

    /// Transitions enabled at `m`, ascending by id.
    pub fn enabled(&self, m: &Marking) -> Vec<usize> {
        (0..self.transitions.len()).filter(|&t| self.is_enabled(m, t)).collect()
    }

    pub fn fire(&self, m: &Marking, t: usize) -> Result<Marking> {
        let tr = self.transitions.get(t).ok_or_else(|| Error::InvalidArgument(format!("no transition {t}")))?;
        if !m.covers(&tr.inputs) {
            return Err(Error::NotEnabled { transition: t, missing: m.missing(&tr.inputs) });
        }
        Ok(m.apply(&tr.inputs, &tr.outputs))
    }

    pub(crate) fn fire_unchecked(&self, m: &Marking, t: usize) -> Marking {
        let tr = &self.transitions[t];
        m.apply(&tr.inputs, &tr.outputs)
    }

    /// Adds one silent backloop per final marking, from that marking back to the
    /// initial marking; the initial marking becomes the only final marking.
    /// Final markings equal to the initial marking get no backloop.
    pub fn to_instance_counter(&self) -> Result<AcceptingPetriNet> {
        if self.finals.is_empty() || self.finals.iter().any(|m| m.is_empty()) {
            return Err(Error::UnsupportedNet("need non-empty final markings".into()));
        }
        for (i, a) in self.finals.iter().enumerate() {
            for b in &self.finals[i + 1..] {
                if a.places().iter().any(|p| b.places().contains(p)) {
                    return Err(Error::UnsupportedNet("overlapping final markings".into()));
                }
            }
        }
        let mut net = self.clone();
        // a backloop from the initial marking to itself would be a silent self-loop
        for m in self.finals.iter().filter(|m| **m != self.initial) {
            net.transitions.push(Transition {
                label: None,
                inputs: m.places().to_vec(),
                outputs: self.initial.places().to_vec(),
                pattern: None,
            });
            net.backloops.push(net.transitions.len() - 1);
        }
        net.finals = vec![self.initial.clone()];
        Ok(net)
    }

    /// Merges single-source/single-sink nets into one model with a shared
    /// initial place `mi`, a shared final place `mf` and a backloop `mf -> mi`.
    /// Every copied transition is tagged with the index of its source net.
    pub fn merge_global(nets: &[AcceptingPetriNet]) -> Result<AcceptingPetriNet> {
        if nets.is_empty() {
            return Err(Error::EmptyPatternList);
        }
        let mut places = vec!["mi".to_string(), "mf".to_string()];
        let mut transitions = Vec::new();
        for (k, n) in nets.iter().enumerate() {
            let (i, o) = match (n.initial.places(), n.finals.as_slice()) {
                (&[i], [f]) if f.len() == 1 => (i, f.places()[0]),
                _ => return Err(Error::UnsupportedNet(format!("pattern {k} is not single-source/single-sink"))),
            };
            let mut map = vec![0; n.places.len()];
            for (p, name) in n.places.iter().enumerate() {
                map[p] = if p == i {
                    0
                } else if p == o {
                    1
                } else {
                    places.push(format!("{k}:{name}"));
                    places.len() - 1
                };
            }
            for t in &n.transitions {
                let remap = |v: &[usize]| {
                    let mut r: Vec<usize> = v.iter().map(|&p| map[p]).collect();
                    r.sort_unstable();
                    r
                };
                transitions.push(Transition {
                    label: t.label.clone(),
                    inputs: remap(&t.inputs),
                    outputs: remap(&t.outputs),
                    pattern: Some(k),
                });
            }
        }
        transitions.push(Transition { label: None, inputs: vec![1], outputs: vec![0], pattern: None });
        let bl = transitions.len() - 1;
        Ok(AcceptingPetriNet {
            places,
            transitions,
            initial: Marking::new(vec![0]),
            finals: vec![Marking::new(vec![0])],
            backloops: vec![bl],
        })
    }

    /// Markings reachable from `m` through silent transitions (including `m`).
    pub fn silent_closure(&self, m: &Marking, budget: usize) -> Result<Vec<Marking>> {
        let mut seen: BTreeSet<Marking> = [m.clone()].into();
        let mut queue: VecDeque<Marking> = [m.clone()].into();
        while let Some(cur) = queue.pop_front() {
            for t in self.enabled(&cur) {
                if self.transitions[t].is_silent() {
                    let next = self.fire_unchecked(&cur, t);
                    if seen.insert(next.clone()) {
                        if seen.len() > budget {
                            return Err(Error::BudgetExceeded { partial: seen.len() - 1 });
                        }
                        queue.push_back(next);
                    }
                }
            }
        }
        Ok(seen.into_iter().collect())
    }

    /// All label sequences of length at most `n` leading from the initial
    /// marking to a final marking. Words are grown depth-first over sets of
    /// silently closed markings; `budget` caps the number of visited prefixes.
    pub fn bounded_language(&self, n: usize, budget: usize) -> Result<BTreeSet<Vec<String>>> {
        let labels: Vec<&str> = self.labels().into_iter().collect();
        let start: BTreeSet<Marking> = self.silent_closure(&self.initial, budget)?.into_iter().collect();
        let mut steps: HashMap<(BTreeSet<Marking>, usize), BTreeSet<Marking>> = HashMap::new();
        let mut out = BTreeSet::new();
        let mut visited = 0usize;
        let mut stack: Vec<(BTreeSet<Marking>, Vec<usize>)> = vec![(start, Vec::new())];
        while let Some((set, word)) = stack.pop() {
            visited += 1;
            if visited > budget {
                return Err(Error::BudgetExceeded { partial: out.len() });
            }
            if set.iter().any(|m| self.is_final(m)) {
                out.insert(word.iter().map(|&l| labels[l].to_string()).collect::<Vec<_>>());
            }
            if word.len() == n {
                continue;
            }
            for l in (0..labels.len()).rev() {
                let key = (set.clone(), l);
                let next = match steps.get(&key) {
                    Some(next) => next.clone(),
                    None => {
                        let next = self.step(&set, labels[l], budget)?;
                        steps.insert(key, next.clone());
                        next
                    }
                };
                if !next.is_empty() {
                    let mut w = word.clone();
                    w.push(l);
                    stack.push((next, w));
                }
            }
        }
        Ok(out)
    }

    fn step(&self, set: &BTreeSet<Marking>, label: &str, budget: usize) -> Result<BTreeSet<Marking>> {
        let mut next = BTreeSet::new();
        for m in set {
            for t in self.enabled(m) {
                if self.transitions[t].label.as_deref() == Some(label) {
                    next.extend(self.silent_closure(&self.fire_unchecked(m, t), budget)?);
                }
            }
        }
        Ok(next)
    }

    /// Markings reachable from the initial marking.
    pub fn reachable_markings(&self, budget: usize) -> Result<Vec<Marking>> {
        let mut seen: BTreeSet<Marking> = [self.initial.clone()].into();
        let mut queue: VecDeque<Marking> = [self.initial.clone()].into();
        while let Some(m) = queue.pop_front() {
            for t in self.enabled(&m) {
                let next = self.fire_unchecked(&m, t);
                if seen.insert(next.clone()) {
                    if seen.len() > budget {
                        return Err(Error::BudgetExceeded { partial: seen.len() - 1 });
                    }
                    queue.push_back(next);
                }
            }
        }
        Ok(seen.into_iter().collect())
    }

    /// Whether some final marking is reachable from `m`.
    pub fn can_complete(&self, m: &Marking, budget: usize) -> Result<bool> {
        let mut seen: BTreeSet<Marking> = [m.clone()].into();
        let mut queue: VecDeque<Marking> = [m.clone()].into();
        while let Some(cur) = queue.pop_front() {
            if self.is_final(&cur) {
                return Ok(true);
            }
            for t in self.enabled(&cur) {
                let next = self.fire_unchecked(&cur, t);
                if seen.insert(next.clone()) {
                    if seen.len() > budget {
                        return Err(Error::BudgetExceeded { partial: seen.len() - 1 });
                    }
                    queue.push_back(next);
                }
            }
        }
        Ok(false)
    }

    /// Minimum number of visible firings from the initial to a final marking.
    pub fn shortest_visible_path(&self, budget: usize) -> Result<Option<usize>> {
        let mut dist: BTreeMap<Marking, usize> = [(self.initial.clone(), 0)].into();
        let mut heap = BinaryHeap::new();
        heap.push(Reverse((0usize, self.initial.clone())));
        while let Some(Reverse((d, m))) = heap.pop() {
            if dist.get(&m).is_some_and(|&best| best < d) {
                continue;
            }
            if self.is_final(&m) {
                return Ok(Some(d));
            }
            for t in self.enabled(&m) {
                let next = self.fire_unchecked(&m, t);
                let nd = d + usize::from(self.transitions[t].label.is_some());
                if dist.get(&next).is_none_or(|&old| nd < old) {
                    if dist.len() > budget {
                        return Err(Error::BudgetExceeded { partial: dist.len() });
                    }
                    dist.insert(next.clone(), nd);
                    heap.push(Reverse((nd, next)));
                }
            }
        }
        Ok(None)
    }

    pub fn to_json(&self) -> serde_json::Value {
        serde_json::to_value(NetJson::from(self)).expect("net serializes")
    }

    pub fn from_json(v: &serde_json::Value) -> Result<AcceptingPetriNet> {
        let j: NetJson = serde_json::from_value(v.clone())?;
        j.try_into()
    }

    /// PNML (write-only) with silent transitions marked as invisible tool-specific elements.
    pub fn to_pnml(&self) -> String {
        let esc = |s: &str| {
            s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;").replace('"', "&quot;")
        };
        let mut s = String::new();
        s.push_str("<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n<pnml>\n");
        s.push_str("  <net id=\"net\" type=\"http://www.pnml.org/version-2009/grammar/pnmlcoremodel\">\n    <page id=\"page\">\n");
        for (p, name) in self.places.iter().enumerate() {
            let tokens = self.initial.count(p);
            let _ = write!(s, "      <place id=\"p{p}\"><name><text>{}</text></name>", esc(name));
            if tokens > 0 {
                let _ = write!(s, "<initialMarking><text>{tokens}</text></initialMarking>");
            }
            s.push_str("</place>\n");
        }
        for (t, tr) in self.transitions.iter().enumerate() {
            let name = tr.label.clone().unwrap_or_else(|| format!("tau{t}"));
            let _ = write!(s, "      <transition id=\"t{t}\"><name><text>{}</text></name>", esc(&name));
            if tr.is_silent() {
                s.push_str("<toolspecific tool=\"ProM\" version=\"6.4\" activity=\"$invisible$\"/>");
            }
            s.push_str("</transition>\n");
        }
        let mut a = 0;
        for (t, tr) in self.transitions.iter().enumerate() {
            for p in &tr.inputs {
                let _ = writeln!(s, "      <arc id=\"a{a}\" source=\"p{p}\" target=\"t{t}\"/>");
                a += 1;
            }
            for p in &tr.outputs {
                let _ = writeln!(s, "      <arc id=\"a{a}\" source=\"t{t}\" target=\"p{p}\"/>");
                a += 1;
            }
        }
        s.push_str("    </page>\n    <finalmarkings>\n");
        for m in &self.finals {
            s.push_str("      <marking>\n");
            for p in 0..self.places.len() {
                let c = m.count(p);
                if c > 0 {
                    let _ = writeln!(s, "        <place idref=\"p{p}\"><text>{c}</text></place>");
                }
            }
            s.push_str("      </marking>\n");
        }
        s.push_str("    </finalmarkings>\n  </net>\n</pnml>\n");
        s
    }
}

#[derive(Serialize, Deserialize)]
struct TransitionJson {
    id: usize,
    label: Option<String>,
    #[serde(default, rename = "src-pattern", skip_serializing_if = "Option::is_none")]
    pattern: Option<usize>,
    #[serde(default, skip_serializing_if = "std::ops::Not::not")]
    backloop: bool,
}

#[derive(Serialize, Deserialize)]
struct ArcJson {
    source: String,
    target: String,
}

#[derive(Serialize, Deserialize)]
struct NetJson {
    places: Vec<String>,
    transitions: Vec<TransitionJson>,
    arcs: Vec<ArcJson>,
    initial: Vec<usize>,
    finals: Vec<Vec<usize>>,
}

impl From<&AcceptingPetriNet> for NetJson {
    fn from(n: &AcceptingPetriNet) -> Self {
        let mut arcs = Vec::new();
        for (t, tr) in n.transitions.iter().enumerate() {
            arcs.extend(tr.inputs.iter().map(|p| ArcJson { source: format!("p{p}"), target: format!("t{t}") }));
            arcs.extend(tr.outputs.iter().map(|p| ArcJson { source: format!("t{t}"), target: format!("p{p}") }));
        }
        NetJson {
            places: n.places.clone(),
            transitions: n
                .transitions
                .iter()
                .enumerate()
                .map(|(id, t)| TransitionJson {
                    id,
                    label: t.label.clone(),
                    pattern: t.pattern,
                    backloop: n.is_backloop(id),
                })
                .collect(),
            arcs,
            initial: n.initial.places().to_vec(),
            finals: n.finals.iter().map(|m| m.places().to_vec()).collect(),
        }
    }
}

impl TryFrom<NetJson> for AcceptingPetriNet {
    type Error = Error;
    fn try_from(j: NetJson) -> Result<Self> {
        let node = |s: &str, kind: char| -> Result<usize> {
            s.strip_prefix(kind)
                .and_then(|x| x.parse().ok())
                .ok_or_else(|| Error::UnsupportedNet(format!("bad arc endpoint '{s}'")))
        };
        let mut b = NetBuilder::new();
        for p in &j.places {
            b.place(p.clone());
        }
        let mut ins = vec![vec![]; j.transitions.len()];
        let mut outs = vec![vec![]; j.transitions.len()];
        for a in &j.arcs {
            if a.source.starts_with('p') {
                let (p, t) = (node(&a.source, 'p')?, node(&a.target, 't')?);
                ins.get_mut(t).ok_or_else(|| Error::UnsupportedNet("unknown transition".into()))?.push(p);
            } else {
                let (t, p) = (node(&a.source, 't')?, node(&a.target, 'p')?);
                outs.get_mut(t).ok_or_else(|| Error::UnsupportedNet("unknown transition".into()))?.push(p);
            }
        }
        let mut backloops = vec![];
        for (i, t) in j.transitions.iter().enumerate() {
            let id = b.transition(t.label.as_deref(), &ins[i], &outs[i]);
            b.transitions[id].pattern = t.pattern;
            if t.backloop {
                backloops.push(id);
            }
        }
        b.initial(&j.initial);
        for f in &j.finals {
            b.final_marking(f);
        }
        let mut net = b.build()?;
        net.backloops = backloops;
        Ok(net)
    }
}

impl Serialize for AcceptingPetriNet {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        NetJson::from(self).serialize(s)
    }
}

impl<'de> Deserialize<'de> for AcceptingPetriNet {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        NetJson::deserialize(d)?.try_into().map_err(serde::de::Error::custom)
    }
}

struct TreeBuild {
    places: Vec<String>,
    trans: Vec<Transition>,
}

impl TreeBuild {
    fn place(&mut self) -> usize {
        self.places.push(format!("p{}", self.places.len()));
        self.places.len() - 1
    }

    fn trans(&mut self, label: Option<&str>, mut i: Vec<usize>, mut o: Vec<usize>) {
        i.sort_unstable();
        o.sort_unstable();
        self.trans.push(Transition { label: label.map(str::to_string), inputs: i, outputs: o, pattern: None });
    }

    fn node(&mut self, t: &ProcessTree, i: usize, o: usize) {
        match t {
            ProcessTree::Activity(a) => self.trans(Some(a), vec![i], vec![o]),
            ProcessTree::Seq(l, r) => {
                let m = self.place();
                self.node(l, i, m);
                self.node(r, m, o);
            }
            ProcessTree::Xor(l, r) => {
                self.node(l, i, o);
                self.node(r, i, o);
            }
            ProcessTree::And(l, r) => {
                let (p1, p2, q1, q2) = (self.place(), self.place(), self.place(), self.place());
                self.trans(None, vec![i], vec![p1, p2]);
                self.node(l, p1, q1);
                self.node(r, p2, q2);
                self.trans(None, vec![q1, q2], vec![o]);
            }
            ProcessTree::Loop(c) => {
                let (p1, p2) = (self.place(), self.place());
                self.trans(None, vec![i], vec![p1]);
                self.node(c, p1, p2);
                self.trans(None, vec![p2], vec![p1]);
                self.trans(None, vec![p2], vec![o]);
            }
        }
    }

    /// Series fusion: a silent transition whose only input place has a single
    /// producer and no other consumer is merged into that producer.
    fn fuse(&mut self, keep: &[usize]) {
        loop {
            let found = (0..self.trans.len()).find_map(|t| {
                let tr = &self.trans[t];
                if !tr.is_silent() || tr.inputs.len() != 1 {
                    return None;
                }
                let p = tr.inputs[0];
                if keep.contains(&p) {
                    return None;
                }
                let consumers = self.trans.iter().filter(|x| x.inputs.contains(&p)).count();
                let producers: Vec<usize> =
                    (0..self.trans.len()).filter(|&u| self.trans[u].outputs.contains(&p)).collect();
                match producers.as_slice() {
                    &[u] if consumers == 1 && u != t && self.trans[u].outputs.iter().filter(|&&q| q == p).count() == 1 => {
                        Some((t, u, p))
                    }
                    _ => None,
                }
            });
            let Some((t, u, p)) = found else { break };
            let extra = self.trans[t].outputs.clone();
            let outs = &mut self.trans[u].outputs;
            outs.retain(|&q| q != p);
            outs.extend(extra);
            outs.sort_unstable();
            self.trans.remove(t);
            self.places[p].clear();
        }
    }
}

impl ProcessTree {
    /// Workflow net with one labeled transition per leaf. Choice shares
    /// places, concurrency uses silent split/join, loops use silent
    /// enter/redo/exit; afterwards silent transitions in pure series are
    /// fused into their predecessor. Transition ids follow tree pre-order.
    pub fn to_petri_net(&self) -> AcceptingPetriNet {
        let mut b = TreeBuild { places: vec!["i".into(), "o".into()], trans: vec![] };
        b.node(self, 0, 1);
        b.fuse(&[0, 1]);
        let mut map = vec![usize::MAX; b.places.len()];
        let mut places = Vec::new();
        for (p, name) in b.places.iter().enumerate() {
            if !name.is_empty() {
                map[p] = places.len();
                places.push(if p < 2 { name.clone() } else { format!("p{}", places.len() - 1) });
            }
        }
        let transitions = b
            .trans
            .into_iter()
            .map(|mut t| {
                t.inputs = t.inputs.iter().map(|&p| map[p]).collect();
                t.outputs = t.outputs.iter().map(|&p| map[p]).collect();
                t.inputs.sort_unstable();
                t.outputs.sort_unstable();
                t
            })
            .collect();
        AcceptingPetriNet {
            places,
            transitions,
            initial: Marking::new(vec![0]),
            finals: vec![Marking::new(vec![1])],
            backloops: vec![],
        }
    }
}
