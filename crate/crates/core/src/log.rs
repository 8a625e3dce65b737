//! Event log data model, XES/CSV ingestion, projection and
//! directly-follows / directly-precedes statistics.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;

use chrono::{DateTime, NaiveDate, NaiveDateTime, SecondsFormat, Utc};
use quick_xml::events::{BytesStart, Event as XmlEvent};
use quick_xml::Reader;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Scalar attribute value attached to an event.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum AttrValue {
    Text(String),
    Number(f64),
    /// Milliseconds since the Unix epoch, UTC.
    Instant(i64),
    Bool(bool),
}

impl fmt::Display for AttrValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            AttrValue::Text(s) => write!(f, "{s}"),
            AttrValue::Number(x) => write!(f, "{x}"),
            AttrValue::Instant(ms) => write!(f, "{}", format_timestamp(*ms)),
            AttrValue::Bool(b) => write!(f, "{b}"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Event {
    pub activity: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub timestamp: Option<i64>,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub attributes: BTreeMap<String, AttrValue>,
}

impl Event {
    pub fn new(activity: impl Into<String>) -> Self {
        Event { activity: activity.into(), timestamp: None, attributes: BTreeMap::new() }
    }

    pub fn at(activity: impl Into<String>, timestamp: i64) -> Self {
        Event { activity: activity.into(), timestamp: Some(timestamp), attributes: BTreeMap::new() }
    }

    pub fn with_attr(mut self, key: impl Into<String>, value: AttrValue) -> Self {
        self.attributes.insert(key.into(), value);
        self
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Trace {
    pub id: String,
    pub events: Vec<Event>,
}

impl Trace {
    pub fn new(id: impl Into<String>, events: Vec<Event>) -> Self {
        Trace { id: id.into(), events }
    }

    pub fn labels(&self) -> Vec<String> {
        self.events.iter().map(|e| e.activity.clone()).collect()
    }

    pub fn len(&self) -> usize {
        self.events.len()
    }

    pub fn is_empty(&self) -> bool {
        self.events.is_empty()
    }

    pub fn fully_timestamped(&self) -> bool {
        self.events.iter().all(|e| e.timestamp.is_some())
    }
}

/// A log of traces. The alphabet is derived from the traces and kept sorted.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EventLog {
    traces: Vec<Trace>,
    #[serde(skip)]
    alphabet: BTreeSet<String>,
}

impl<'de> Deserialize<'de> for EventLog {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        struct Raw {
            traces: Vec<Trace>,
        }
        let raw = Raw::deserialize(d)?;
        EventLog::new(raw.traces).map_err(serde::de::Error::custom)
    }
}

impl EventLog {
    pub fn new(traces: Vec<Trace>) -> Result<Self> {
        for t in &traces {
            if let Some(i) = t.events.iter().position(|e| e.activity.is_empty()) {
                return Err(Error::MissingActivity { trace: t.id.clone(), index: i + 1 });
            }
            if t.fully_timestamped() {
                let ts: Vec<i64> = t.events.iter().filter_map(|e| e.timestamp).collect();
                if ts.windows(2).any(|w| w[1] < w[0]) {
                    return Err(Error::Config(format!("trace {}: timestamps decrease", t.id)));
                }
            }
        }
        let alphabet = traces
            .iter()
            .flat_map(|t| t.events.iter().map(|e| e.activity.clone()))
            .collect();
        Ok(EventLog { traces, alphabet })
    }

    /// Builds a label-only log from `(variant, multiplicity)` pairs.
    pub fn from_variants<S: AsRef<str>>(variants: &[(&[S], usize)]) -> Self {
        let mut traces = Vec::new();
        for (labels, n) in variants {
            for _ in 0..*n {
                let id = format!("t{}", traces.len() + 1);
                let events = labels.iter().map(|l| Event::new(l.as_ref())).collect();
                traces.push(Trace::new(id, events));
            }
        }
        EventLog::new(traces).expect("labels must be non-empty")
    }

    /// Builds a label-only log from whitespace- or comma-free traces of one-char labels, e.g. `["abc", "acb"]`.
    pub fn from_strings(traces: &[&str]) -> Self {
        let owned: Vec<Vec<String>> =
            traces.iter().map(|s| s.chars().map(|c| c.to_string()).collect()).collect();
        let variants: Vec<(&[String], usize)> = owned.iter().map(|v| (v.as_slice(), 1)).collect();
        Self::from_variants(&variants)
    }

    pub fn traces(&self) -> &[Trace] {
        &self.traces
    }

    pub fn alphabet(&self) -> &BTreeSet<String> {
        &self.alphabet
    }

    pub fn len(&self) -> usize {
        self.traces.len()
    }

    pub fn is_empty(&self) -> bool {
        self.traces.is_empty()
    }

    pub fn event_count(&self) -> usize {
        self.traces.iter().map(|t| t.len()).sum()
    }

    pub fn longest_trace(&self) -> usize {
        self.traces.iter().map(|t| t.len()).max().unwrap_or(0)
    }

    /// Number of events with activity `a`.
    pub fn activity_count(&self, a: &str) -> usize {
        self.traces.iter().flat_map(|t| &t.events).filter(|e| e.activity == a).count()
    }

    pub fn fully_timestamped(&self) -> bool {
        self.traces.iter().all(|t| t.fully_timestamped())
    }

    /// Multiset view keyed by label sequence.
    pub fn label_view(&self) -> BTreeMap<Vec<String>, usize> {
        let mut m = BTreeMap::new();
        for t in &self.traces {
            *m.entry(t.labels()).or_insert(0) += 1;
        }
        m
    }

    /// Keeps only events whose activity is in `keep`. Empty traces are retained.
    pub fn project(&self, keep: &BTreeSet<String>) -> EventLog {
        let traces = self
            .traces
            .iter()
            .map(|t| Trace {
                id: t.id.clone(),
                events: t.events.iter().filter(|e| keep.contains(&e.activity)).cloned().collect(),
            })
            .collect();
        EventLog::new(traces).expect("projection preserves validity")
    }
}

/// Column mapping for CSV ingestion.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CsvMapping {
    pub case: String,
    pub activity: String,
    pub timestamp: Option<String>,
}

impl Default for CsvMapping {
    fn default() -> Self {
        CsvMapping { case: "case".into(), activity: "activity".into(), timestamp: Some("timestamp".into()) }
    }
}

/// Parses a timestamp given as epoch milliseconds, RFC 3339, or a naive
/// `YYYY-MM-DD[ T]HH:MM:SS[.fff]` / `YYYY-MM-DD` value taken as UTC.
pub fn parse_timestamp(s: &str) -> Option<i64> {
    let s = s.trim();
    if let Ok(ms) = s.parse::<i64>() {
        return Some(ms);
    }
    if let Ok(dt) = DateTime::parse_from_rfc3339(s) {
        return Some(dt.timestamp_millis());
    }
    for fmt in ["%Y-%m-%d %H:%M:%S%.f", "%Y-%m-%dT%H:%M:%S%.f", "%Y-%m-%d %H:%M", "%Y-%m-%dT%H:%M"] {
        if let Ok(dt) = NaiveDateTime::parse_from_str(s, fmt) {
            return Some(dt.and_utc().timestamp_millis());
        }
    }
    if let Ok(d) = NaiveDate::parse_from_str(s, "%Y-%m-%d") {
        return Some(d.and_hms_opt(0, 0, 0)?.and_utc().timestamp_millis());
    }
    None
}

pub fn format_timestamp(ms: i64) -> String {
    match DateTime::<Utc>::from_timestamp_millis(ms) {
        Some(dt) => dt.to_rfc3339_opts(SecondsFormat::Millis, true),
        None => ms.to_string(),
    }
}

fn scalar(raw: &str) -> AttrValue {
    match raw.trim().parse::<f64>() {
        Ok(x) if x.is_finite() => AttrValue::Number(x),
        _ => AttrValue::Text(raw.to_string()),
    }
}

pub fn parse_csv(document: &[u8], mapping: &CsvMapping) -> Result<EventLog> {
    let mut reader = csv::ReaderBuilder::new().has_headers(true).from_reader(document);
    let headers = reader
        .headers()
        .map_err(|e| Error::Parse { line: 1, message: e.to_string() })?
        .clone();
    let col = |name: &str| {
        headers
            .iter()
            .position(|h| h == name)
            .ok_or_else(|| Error::Config(format!("missing column '{name}'")))
    };
    let case_col = col(&mapping.case)?;
    let act_col = col(&mapping.activity)?;
    let ts_col = mapping.timestamp.as_deref().map(col).transpose()?;

    let mut order: Vec<String> = Vec::new();
    let mut cases: HashMap<String, Vec<Event>> = HashMap::new();
    for (i, rec) in reader.records().enumerate() {
        let row = i + 2;
        let rec = rec.map_err(|e| Error::Row { row, message: e.to_string() })?;
        let field = |c: usize| rec.get(c).unwrap_or("");
        let case = field(case_col).to_string();
        let activity = field(act_col).to_string();
        if activity.is_empty() {
            return Err(Error::Row { row, message: "empty activity".into() });
        }
        let timestamp = match ts_col {
            Some(c) => Some(parse_timestamp(field(c)).ok_or_else(|| Error::Row {
                row,
                message: format!("unparseable timestamp '{}'", field(c)),
            })?),
            None => None,
        };
        let mut attributes = BTreeMap::new();
        for (c, name) in headers.iter().enumerate() {
            if c == case_col || c == act_col || Some(c) == ts_col {
                continue;
            }
            if let Some(v) = rec.get(c) {
                if !v.is_empty() {
                    attributes.insert(name.to_string(), scalar(v));
                }
            }
        }
        if !cases.contains_key(&case) {
            order.push(case.clone());
        }
        cases.entry(case).or_default().push(Event { activity, timestamp, attributes });
    }
    let traces = order
        .into_iter()
        .map(|id| {
            let mut events = cases.remove(&id).unwrap_or_default();
            // stable: equal timestamps keep row order
            events.sort_by_key(|e| e.timestamp);
            Trace { id, events }
        })
        .collect();
    EventLog::new(traces)
}

/// Writes case, activity and (when present) timestamp columns.
pub fn write_csv(log: &EventLog) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["case", "activity", "timestamp"]).expect("in-memory write");
    for t in log.traces() {
        for e in &t.events {
            let ts = e.timestamp.map(format_timestamp).unwrap_or_default();
            w.write_record([t.id.as_str(), e.activity.as_str(), ts.as_str()]).expect("in-memory write");
        }
    }
    String::from_utf8(w.into_inner().expect("flush")).expect("utf8")
}

fn line_of(doc: &[u8], pos: usize) -> usize {
    doc[..pos.min(doc.len())].iter().filter(|&&b| b == b'\n').count() + 1
}

fn xes_attr(e: &BytesStart<'_>) -> Option<(String, AttrValue)> {
    let mut key = None;
    let mut value = None;
    for a in e.attributes().flatten() {
        let v = a.unescape_value().ok()?.into_owned();
        match a.key.as_ref() {
            b"key" => key = Some(v),
            b"value" => value = Some(v),
            _ => {}
        }
    }
    let (key, value) = (key?, value?);
    let v = match e.name().as_ref() {
        b"date" => AttrValue::Instant(parse_timestamp(&value)?),
        b"int" | b"float" => match value.parse::<f64>() {
            Ok(x) => AttrValue::Number(x),
            Err(_) => AttrValue::Text(value),
        },
        b"boolean" => AttrValue::Bool(value.eq_ignore_ascii_case("true")),
        b"string" | b"id" => AttrValue::Text(value),
        _ => return None,
    };
    Some((key, v))
}

pub fn parse_xes(document: &[u8]) -> Result<EventLog> {
    let mut reader = Reader::from_reader(document);
    reader.config_mut().trim_text(true);
    let mut buf = Vec::new();
    let mut stack: Vec<Vec<u8>> = Vec::new();
    let mut traces: Vec<Trace> = Vec::new();
    let mut trace_attrs: BTreeMap<String, AttrValue> = BTreeMap::new();
    let mut trace_events: Vec<BTreeMap<String, AttrValue>> = Vec::new();
    let mut event_attrs: BTreeMap<String, AttrValue> = BTreeMap::new();
    let mut seen_log = false;

    let err = |pos: usize, message: String| Error::Parse { line: line_of(document, pos), message };

    loop {
        let pos = reader.buffer_position() as usize;
        let ev = reader.read_event_into(&mut buf).map_err(|e| err(pos, e.to_string()))?;
        match ev {
            XmlEvent::Start(ref e) | XmlEvent::Empty(ref e) => {
                let name = e.name().as_ref().to_vec();
                let parent = stack.last().map(|v| v.as_slice());
                match name.as_slice() {
                    b"log" => seen_log = true,
                    b"trace" => {
                        trace_attrs.clear();
                        trace_events.clear();
                    }
                    b"event" => event_attrs.clear(),
                    _ => {
                        if let Some((k, v)) = xes_attr(e) {
                            match parent {
                                Some(b"event") => {
                                    event_attrs.insert(k, v);
                                }
                                Some(b"trace") => {
                                    trace_attrs.insert(k, v);
                                }
                                _ => {}
                            }
                        }
                    }
                }
                stack.push(name);
                if matches!(ev, XmlEvent::Empty(_)) {
                    close_element(&mut stack, &mut traces, &mut trace_attrs, &mut trace_events, &mut event_attrs)?;
                }
            }
            XmlEvent::End(_) => {
                if stack.is_empty() {
                    return Err(err(pos, "unexpected closing tag".into()));
                }
                close_element(&mut stack, &mut traces, &mut trace_attrs, &mut trace_events, &mut event_attrs)?;
            }
            XmlEvent::Eof => {
                if !stack.is_empty() {
                    let open = String::from_utf8_lossy(stack.last().unwrap()).into_owned();
                    return Err(err(pos, format!("unclosed element <{open}>")));
                }
                break;
            }
            _ => {}
        }
        buf.clear();
    }
    if !seen_log {
        return Err(Error::Parse { line: 1, message: "no <log> element".into() });
    }
    EventLog::new(traces)
}

fn close_element(
    stack: &mut Vec<Vec<u8>>,
    traces: &mut Vec<Trace>,
    trace_attrs: &mut BTreeMap<String, AttrValue>,
    trace_events: &mut Vec<BTreeMap<String, AttrValue>>,
    event_attrs: &mut BTreeMap<String, AttrValue>,
) -> Result<()> {
    let name = stack.pop().unwrap_or_default();
    match name.as_slice() {
        b"event" if stack.last().map(|v| v.as_slice()) == Some(b"trace") => {
            trace_events.push(std::mem::take(event_attrs));
        }
        b"trace" => {
            let id = match trace_attrs.get("concept:name") {
                Some(v) => v.to_string(),
                None => format!("trace-{}", traces.len() + 1),
            };
            let mut events = Vec::with_capacity(trace_events.len());
            for (i, mut attrs) in trace_events.drain(..).enumerate() {
                let activity = match attrs.remove("concept:name") {
                    Some(AttrValue::Text(s)) if !s.is_empty() => s,
                    _ => return Err(Error::MissingActivity { trace: id, index: i + 1 }),
                };
                let timestamp = match attrs.remove("time:timestamp") {
                    Some(AttrValue::Instant(ms)) => Some(ms),
                    Some(AttrValue::Text(s)) => parse_timestamp(&s),
                    _ => None,
                };
                events.push(Event { activity, timestamp, attributes: attrs });
            }
            traces.push(Trace { id, events });
        }
        _ => {}
    }
    Ok(())
}

/// Successor or predecessor symbol in the follows statistics.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Neighbor<'a> {
    Activity(&'a str),
    /// Artificial end (for dfr) or start (for dpr) symbol.
    Boundary,
}

/// Directly-follows and directly-precedes statistics over a fixed activity order.
#[derive(Debug, Clone)]
pub struct FollowsStats {
    activities: Vec<String>,
    index: HashMap<String, usize>,
    counts: Vec<usize>,
    // follows[a][b]: b directly after a; column n is the end symbol
    follows: Vec<Vec<usize>>,
    // precedes[a][b]: b directly before a; column n is the start symbol
    precedes: Vec<Vec<usize>>,
    smoothing: Option<f64>,
}

impl FollowsStats {
    pub fn compute(log: &EventLog, smoothing: Option<f64>) -> Result<Self> {
        let acts: Vec<String> = log.alphabet().iter().cloned().collect();
        Self::compute_over(log, acts, smoothing)
    }

    /// Statistics over an explicit alphabet; activities absent from the log get zero rows.
    pub fn compute_over(log: &EventLog, mut activities: Vec<String>, smoothing: Option<f64>) -> Result<Self> {
        if let Some(a) = smoothing {
            if !(a >= 0.0) {
                return Err(Error::InvalidArgument(format!("smoothing must be >= 0, got {a}")));
            }
        }
        activities.sort();
        activities.dedup();
        let index: HashMap<String, usize> =
            activities.iter().enumerate().map(|(i, a)| (a.clone(), i)).collect();
        let seqs: Vec<Vec<usize>> = log
            .traces()
            .iter()
            .map(|t| t.events.iter().filter_map(|e| index.get(&e.activity).copied()).collect())
            .collect();
        let n = activities.len();
        let mut s = FollowsStats {
            activities,
            index,
            counts: vec![0; n],
            follows: vec![vec![0; n + 1]; n],
            precedes: vec![vec![0; n + 1]; n],
            smoothing,
        };
        for seq in &seqs {
            for (i, &a) in seq.iter().enumerate() {
                s.counts[a] += 1;
                let next = seq.get(i + 1).copied().unwrap_or(n);
                s.follows[a][next] += 1;
                let prev = if i == 0 { n } else { seq[i - 1] };
                s.precedes[a][prev] += 1;
            }
        }
        Ok(s)
    }

    pub fn activities(&self) -> &[String] {
        &self.activities
    }

    /// 1-based position of `a` in the lexicographic activity order.
    pub fn index_of(&self, a: &str) -> Option<usize> {
        self.index.get(a).map(|i| i + 1)
    }

    pub fn count(&self, a: &str) -> usize {
        self.index.get(a).map(|&i| self.counts[i]).unwrap_or(0)
    }

    pub fn pair_count(&self, a: &str, b: &str) -> usize {
        match (self.index.get(a), self.index.get(b)) {
            (Some(&i), Some(&j)) => self.follows[i][j],
            _ => 0,
        }
    }

    fn col(&self, b: Neighbor<'_>) -> Option<usize> {
        match b {
            Neighbor::Activity(x) => self.index.get(x).copied(),
            Neighbor::Boundary => Some(self.activities.len()),
        }
    }

    fn ratio(&self, table: &[Vec<usize>], a: &str, b: Neighbor<'_>) -> Result<f64> {
        let i = *self.index.get(a).ok_or_else(|| Error::UndefinedDistribution(a.to_string()))?;
        let j = match self.col(b) {
            Some(j) => j,
            None => return Ok(0.0),
        };
        self.row_entry(table, i, j)
    }

    fn row_entry(&self, table: &[Vec<usize>], i: usize, j: usize) -> Result<f64> {
        let n = self.activities.len() as f64;
        let c = self.counts[i] as f64;
        match self.smoothing {
            Some(alpha) if alpha > 0.0 || c > 0.0 => {
                Ok((alpha + table[i][j] as f64) / (alpha * (n + 1.0) + c))
            }
            _ if c > 0.0 => Ok(table[i][j] as f64 / c),
            _ => Err(Error::UndefinedDistribution(self.activities[i].clone())),
        }
    }

    /// dfr(a, b): share of `a` events directly followed by `b` (or by the end of the trace).
    pub fn dfr(&self, a: &str, b: Neighbor<'_>) -> Result<f64> {
        self.ratio(&self.follows, a, b)
    }

    /// dpr(a, b): share of `a` events directly preceded by `b` (or by the start of the trace).
    pub fn dpr(&self, a: &str, b: Neighbor<'_>) -> Result<f64> {
        self.ratio(&self.precedes, a, b)
    }

    fn row(&self, table: &[Vec<usize>], a: &str) -> Result<Vec<f64>> {
        let i = *self.index.get(a).ok_or_else(|| Error::UndefinedDistribution(a.to_string()))?;
        (0..=self.activities.len()).map(|j| self.row_entry(table, i, j)).collect()
    }

    /// Full dfr row in activity order, the end symbol last.
    pub fn dfr_row(&self, a: &str) -> Result<Vec<f64>> {
        self.row(&self.follows, a)
    }

    /// Full dpr row in activity order, the start symbol last.
    pub fn dpr_row(&self, a: &str) -> Result<Vec<f64>> {
        self.row(&self.precedes, a)
    }
}
