//! Event-gap and time-gap constrained support via extracted sub-logs.

use std::collections::{BTreeSet, HashMap};
use std::sync::{Arc, RwLock};
use std::time::Duration;

use serde::{Deserialize, Serialize};

use crate::alignment::{align_gapped, assemble, instance_runs, CostPolicy, InstanceRun, PatternMatch, Segment};
use crate::error::{Error, Result};
use crate::log::{Event, EventLog, Trace};
use crate::tree::ProcessTree;

/// Maximum distance between consecutive events of an instance.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(tag = "kind", content = "max_gap", rename_all = "snake_case")]
pub enum GapConstraint {
    /// Number of events strictly between two consecutive instance events.
    Event(usize),
    /// Milliseconds between two consecutive instance events.
    Time(i64),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExtractionStrategy {
    Dynamic,
    Static,
    CachedDynamic,
}

/// Parses durations such as `2m`, `120s`, `1h 30m` into milliseconds.
pub fn parse_duration(text: &str) -> Result<i64> {
    let d: Duration = humantime::parse_duration(text.trim())
        .map_err(|e| Error::InvalidArgument(format!("duration {text:?}: {e}")))?;
    let ms = i64::try_from(d.as_millis()).map_err(|_| Error::InvalidArgument(format!("duration {text:?} too large")))?;
    if ms == 0 {
        return Err(Error::InvalidArgument("time gap must be positive".into()));
    }
    Ok(ms)
}

fn timestamp(trace: &Trace, pos: usize) -> Result<i64> {
    trace.events[pos].timestamp.ok_or_else(|| Error::MissingTimestamp { trace: trace.id.clone(), index: pos + 1 })
}

/// Whether two events at 0-based positions `i < j` of `trace` may be consecutive in an instance.
fn within(trace: &Trace, i: usize, j: usize, c: GapConstraint) -> Result<bool> {
    Ok(match c {
        GapConstraint::Event(g) => j - i - 1 <= g,
        GapConstraint::Time(g) => timestamp(trace, j)? - timestamp(trace, i)? <= g,
    })
}

/// Checks a 1-based landmark against the constraint.
pub fn instance_satisfies(trace: &Trace, landmark: &[usize], c: GapConstraint) -> Result<bool> {
    if landmark.iter().any(|&p| p == 0 || p > trace.len()) {
        return Err(Error::InvalidArgument(format!("landmark {landmark:?} out of range for trace {}", trace.id)));
    }
    for w in landmark.windows(2) {
        if !within(trace, w[0] - 1, w[1] - 1, c)? {
            return Ok(false);
        }
    }
    Ok(true)
}

fn check_timestamps(log: &EventLog, c: GapConstraint) -> Result<()> {
    if let GapConstraint::Time(_) = c {
        for t in log.traces() {
            for i in 0..t.len() {
                timestamp(t, i)?;
            }
        }
    }
    Ok(())
}

/// Dynamic extraction: one segment per start event not already consumed,
/// grown over pattern events while each stays within the gap of the previous one.
pub fn dynamic_segments(
    log: &EventLog,
    alphabet: &BTreeSet<String>,
    starts: &BTreeSet<String>,
    c: GapConstraint,
) -> Result<Vec<Segment>> {
    check_timestamps(log, c)?;
    let mut out = Vec::new();
    for (ti, t) in log.traces().iter().enumerate() {
        let mut skip = vec![false; t.len()];
        for s in 0..t.len() {
            if skip[s] || !starts.contains(&t.events[s].activity) {
                continue;
            }
            let mut seg = Segment { trace: ti, positions: vec![s], labels: vec![t.events[s].activity.clone()] };
            let mut last = s;
            for j in s + 1..t.len() {
                let a = &t.events[j].activity;
                if !alphabet.contains(a) {
                    continue;
                }
                if !within(t, last, j, c)? {
                    break;
                }
                if starts.contains(a) {
                    skip[j] = true;
                }
                seg.positions.push(j);
                seg.labels.push(a.clone());
                last = j;
            }
            out.push(seg);
        }
    }
    Ok(out)
}

/// Static extraction: every trace split wherever consecutive events are more
/// than `max_gap` milliseconds apart.
pub fn static_segments(log: &EventLog, max_gap: i64) -> Result<Vec<Segment>> {
    let mut out = Vec::new();
    for (ti, t) in log.traces().iter().enumerate() {
        let mut cur: Option<Segment> = None;
        for i in 0..t.len() {
            let ts = timestamp(t, i)?;
            if let Some(seg) = cur.as_mut() {
                let prev = timestamp(t, *seg.positions.last().expect("segments are non-empty"))?;
                if ts - prev > max_gap {
                    out.extend(cur.take());
                }
            }
            let seg = cur.get_or_insert_with(|| Segment { trace: ti, positions: vec![], labels: vec![] });
            seg.positions.push(i);
            seg.labels.push(t.events[i].activity.clone());
        }
        out.extend(cur);
    }
    Ok(out)
}

fn segments_to_log(log: &EventLog, segments: &[Segment]) -> EventLog {
    let mut counts: HashMap<usize, usize> = HashMap::new();
    let traces = segments
        .iter()
        .map(|s| {
            let k = counts.entry(s.trace).or_insert(0);
            *k += 1;
            let src = &log.traces()[s.trace];
            let events: Vec<Event> = s.positions.iter().map(|&p| src.events[p].clone()).collect();
            Trace::new(format!("{}#{}", src.id, k), events)
        })
        .collect();
    EventLog::new(traces).expect("segments keep event order")
}

/// Algorithm-5 style extraction for one pattern, as a log of partial traces.
pub fn extract_dynamic(log: &EventLog, pattern: &ProcessTree, c: GapConstraint) -> Result<EventLog> {
    let segs = dynamic_segments(log, &pattern.activities(), &pattern.start_activities(), c)?;
    Ok(segments_to_log(log, &segs))
}

/// Algorithm-6 style extraction, independent of any pattern.
pub fn extract_static(log: &EventLog, max_gap: i64) -> Result<EventLog> {
    Ok(segments_to_log(log, &static_segments(log, max_gap)?))
}

type CacheKey = (BTreeSet<String>, BTreeSet<String>, GapConstraint);

/// Dynamic extractions keyed by (pattern alphabet, start activities, constraint).
/// One cache belongs to one log.
#[derive(Debug, Default)]
pub struct ExtractionCache {
    map: RwLock<HashMap<CacheKey, Arc<Vec<Segment>>>>,
    static_map: RwLock<HashMap<i64, Arc<Vec<Segment>>>>,
}

impl ExtractionCache {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn len(&self) -> usize {
        self.map.read().expect("cache lock").len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    fn dynamic(&self, log: &EventLog, key: CacheKey) -> Result<Arc<Vec<Segment>>> {
        if let Some(s) = self.map.read().expect("cache lock").get(&key) {
            return Ok(s.clone());
        }
        let segs = Arc::new(dynamic_segments(log, &key.0, &key.1, key.2)?);
        Ok(self.map.write().expect("cache lock").entry(key).or_insert(segs).clone())
    }

    fn fixed(&self, log: &EventLog, max_gap: i64) -> Result<Arc<Vec<Segment>>> {
        if let Some(s) = self.static_map.read().expect("cache lock").get(&max_gap) {
            return Ok(s.clone());
        }
        let segs = Arc::new(static_segments(log, max_gap)?);
        Ok(self.static_map.write().expect("cache lock").entry(max_gap).or_insert(segs).clone())
    }
}

/// Constrained instances and replay profile of a pattern.
///
/// Each extracted segment is aligned so that a synchronous move is only
/// taken when it keeps the current instance within the gap; instances are
/// then checked against the constraint once more on the original trace.
pub fn constrained_match(
    log: &EventLog,
    pattern: &ProcessTree,
    c: GapConstraint,
    strategy: ExtractionStrategy,
    cache: Option<&ExtractionCache>,
) -> Result<PatternMatch> {
    let alphabet = pattern.activities();
    let starts = pattern.start_activities();
    let segments: Arc<Vec<Segment>> = match (strategy, c) {
        (ExtractionStrategy::Dynamic, _) => Arc::new(dynamic_segments(log, &alphabet, &starts, c)?),
        (ExtractionStrategy::CachedDynamic, _) => match cache {
            Some(cache) => cache.dynamic(log, (alphabet.clone(), starts, c))?,
            None => Arc::new(dynamic_segments(log, &alphabet, &starts, c)?),
        },
        (ExtractionStrategy::Static, GapConstraint::Time(g)) => {
            let whole = match cache {
                Some(cache) => cache.fixed(log, g)?,
                None => Arc::new(static_segments(log, g)?),
            };
            Arc::new(
                whole
                    .iter()
                    .map(|s| {
                        let (positions, labels) = s
                            .positions
                            .iter()
                            .zip(&s.labels)
                            .filter(|(_, l)| alphabet.contains(*l))
                            .map(|(p, l)| (*p, l.clone()))
                            .unzip();
                        Segment { trace: s.trace, positions, labels }
                    })
                    .filter(|s: &Segment| !s.positions.is_empty())
                    .collect(),
            )
        }
        (ExtractionStrategy::Static, GapConstraint::Event(_)) => {
            return Err(Error::Config("static extraction requires a time-gap constraint".into()))
        }
    };
    let net = pattern.to_petri_net().to_instance_counter()?;
    let mut runs: Vec<Vec<InstanceRun>> = Vec::with_capacity(segments.len());
    for s in segments.iter() {
        let trace = &log.traces()[s.trace];
        let ok = |i: usize, j: usize| within(trace, s.positions[i], s.positions[j], c).unwrap_or(false);
        let al = align_gapped(&net, &s.labels, CostPolicy::instance_counting(), &ok)?;
        runs.push(
            instance_runs(&net, &al)
                .into_iter()
                .map(|r| InstanceRun { positions: r.positions.iter().map(|&p| s.positions[p]).collect(), ..r })
                .collect(),
        );
    }
    let mut failure = None;
    let m = assemble(log, &segments, &runs, |ti, r| {
        let lm: Vec<usize> = r.positions.iter().map(|p| p + 1).collect();
        match instance_satisfies(&log.traces()[ti], &lm, c) {
            Ok(b) => b,
            Err(e) => {
                failure.get_or_insert(e);
                false
            }
        }
    });
    match failure {
        Some(e) => Err(e),
        None => Ok(m),
    }
}

/// Number of instances satisfying the constraint.
pub fn constrained_support(
    log: &EventLog,
    pattern: &ProcessTree,
    c: GapConstraint,
    strategy: ExtractionStrategy,
    cache: Option<&ExtractionCache>,
) -> Result<usize> {
    Ok(constrained_match(log, pattern, c, strategy, cache)?.instances.len())
}
