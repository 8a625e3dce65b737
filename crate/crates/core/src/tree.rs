//! Process trees: the pattern language of local process models.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Default cap on enumerated words / visited states for bounded-language computations.
pub const DEFAULT_BUDGET: usize = 200_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Operator {
    Seq,
    Xor,
    And,
    Loop,
}

impl Operator {
    pub fn name(self) -> &'static str {
        match self {
            Operator::Seq => "seq",
            Operator::Xor => "xor",
            Operator::And => "and",
            Operator::Loop => "loop",
        }
    }

    fn arity(self) -> usize {
        if self == Operator::Loop {
            1
        } else {
            2
        }
    }
}

/// A process tree. Binary operators have exactly two children; loop has one
/// and means one-or-more executions of its child.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum ProcessTree {
    Activity(String),
    Seq(Box<ProcessTree>, Box<ProcessTree>),
    Xor(Box<ProcessTree>, Box<ProcessTree>),
    And(Box<ProcessTree>, Box<ProcessTree>),
    Loop(Box<ProcessTree>),
}

use ProcessTree::*;

impl ProcessTree {
    pub fn activity(a: impl Into<String>) -> Self {
        Activity(a.into())
    }

    pub fn seq(l: ProcessTree, r: ProcessTree) -> Self {
        Seq(Box::new(l), Box::new(r))
    }

    pub fn xor(l: ProcessTree, r: ProcessTree) -> Self {
        Xor(Box::new(l), Box::new(r))
    }

    pub fn and(l: ProcessTree, r: ProcessTree) -> Self {
        And(Box::new(l), Box::new(r))
    }

    pub fn looped(c: ProcessTree) -> Self {
        Loop(Box::new(c))
    }

    pub fn binary(op: Operator, l: ProcessTree, r: ProcessTree) -> Self {
        match op {
            Operator::Seq => Self::seq(l, r),
            Operator::Xor => Self::xor(l, r),
            Operator::And => Self::and(l, r),
            Operator::Loop => panic!("loop is unary"),
        }
    }

    pub fn operator(&self) -> Option<Operator> {
        match self {
            Activity(_) => None,
            Seq(..) => Some(Operator::Seq),
            Xor(..) => Some(Operator::Xor),
            And(..) => Some(Operator::And),
            Loop(_) => Some(Operator::Loop),
        }
    }

    pub fn children(&self) -> Vec<&ProcessTree> {
        match self {
            Activity(_) => vec![],
            Seq(l, r) | Xor(l, r) | And(l, r) => vec![l, r],
            Loop(c) => vec![c],
        }
    }

    /// The set of activities appearing at the leaves.
    pub fn activities(&self) -> BTreeSet<String> {
        let mut s = BTreeSet::new();
        self.collect_activities(&mut s);
        s
    }

    fn collect_activities(&self, s: &mut BTreeSet<String>) {
        match self {
            Activity(a) => {
                s.insert(a.clone());
            }
            _ => self.children().into_iter().for_each(|c| c.collect_activities(s)),
        }
    }

    /// Number of activity leaves.
    pub fn leaf_count(&self) -> usize {
        match self {
            Activity(_) => 1,
            _ => self.children().into_iter().map(|c| c.leaf_count()).sum(),
        }
    }

    pub fn start_activities(&self) -> BTreeSet<String> {
        match self {
            Activity(a) => [a.clone()].into(),
            Seq(l, _) => l.start_activities(),
            Xor(l, r) | And(l, r) => {
                let mut s = l.start_activities();
                s.extend(r.start_activities());
                s
            }
            Loop(c) => c.start_activities(),
        }
    }

    pub fn parse(text: &str) -> Result<ProcessTree> {
        let mut p = Parser { src: text.as_bytes(), pos: 0 };
        let t = p.tree()?;
        p.skip_ws();
        if p.pos != p.src.len() {
            return Err(p.error("trailing input"));
        }
        Ok(t)
    }

    /// All words of the tree's language with length at most `n`.
    pub fn bounded_language(&self, n: usize) -> Result<BTreeSet<Vec<String>>> {
        self.bounded_language_with_budget(n, DEFAULT_BUDGET)
    }

    pub fn bounded_language_with_budget(&self, n: usize, budget: usize) -> Result<BTreeSet<Vec<String>>> {
        let acts: Vec<String> = self.activities().into_iter().collect();
        let index: BTreeMap<&str, u16> =
            acts.iter().enumerate().map(|(i, a)| (a.as_str(), i as u16)).collect();
        let mut counter = Budget { used: 0, limit: budget };
        let words = lang(self, n, &index, &mut counter)?;
        Ok(words
            .into_iter()
            .map(|w| w.into_iter().map(|i| acts[i as usize].clone()).collect())
            .collect())
    }

    /// Number of words of length at most `n`, or `None` when the budget is exceeded.
    pub fn bounded_language_size(&self, n: usize, budget: usize) -> Option<usize> {
        self.bounded_language_with_budget(n, budget).ok().map(|l| l.len())
    }
}

struct Budget {
    used: usize,
    limit: usize,
}

impl Budget {
    fn charge(&mut self, k: usize) -> Result<()> {
        self.used += k;
        if self.used > self.limit {
            Err(Error::BudgetExceeded { partial: self.used - k })
        } else {
            Ok(())
        }
    }
}

type Words = BTreeSet<Vec<u16>>;

fn lang(t: &ProcessTree, n: usize, ix: &BTreeMap<&str, u16>, b: &mut Budget) -> Result<Words> {
    let out: Words = match t {
        Activity(a) => {
            if n >= 1 {
                [vec![ix[a.as_str()]]].into()
            } else {
                Words::new()
            }
        }
        Seq(l, r) => {
            let (lw, rw) = (lang(l, n, ix, b)?, lang(r, n, ix, b)?);
            let mut out = Words::new();
            for u in &lw {
                for v in rw.iter().filter(|v| u.len() + v.len() <= n) {
                    out.insert([u.as_slice(), v.as_slice()].concat());
                }
            }
            out
        }
        Xor(l, r) => {
            let mut out = lang(l, n, ix, b)?;
            out.extend(lang(r, n, ix, b)?);
            out
        }
        And(l, r) => {
            let (lw, rw) = (lang(l, n, ix, b)?, lang(r, n, ix, b)?);
            let mut out = Words::new();
            for u in &lw {
                for v in rw.iter().filter(|v| u.len() + v.len() <= n) {
                    let before = out.len();
                    shuffle(u, v, &mut Vec::new(), &mut out);
                    b.charge(out.len() - before)?;
                }
            }
            out
        }
        Loop(c) => {
            let body = lang(c, n, ix, b)?;
            let mut out = body.clone();
            let mut frontier = body.clone();
            while !frontier.is_empty() {
                let mut next = Words::new();
                for u in &frontier {
                    for v in body.iter().filter(|v| u.len() + v.len() <= n) {
                        let w = [u.as_slice(), v.as_slice()].concat();
                        if !out.contains(&w) {
                            next.insert(w);
                        }
                    }
                }
                b.charge(next.len())?;
                out.extend(next.iter().cloned());
                frontier = next;
            }
            out
        }
    };
    b.charge(out.len())?;
    Ok(out)
}

fn shuffle(u: &[u16], v: &[u16], prefix: &mut Vec<u16>, out: &mut Words) {
    if u.is_empty() || v.is_empty() {
        let mut w = prefix.clone();
        w.extend_from_slice(u);
        w.extend_from_slice(v);
        out.insert(w);
        return;
    }
    prefix.push(u[0]);
    shuffle(&u[1..], v, prefix, out);
    prefix.pop();
    prefix.push(v[0]);
    shuffle(u, &v[1..], prefix, out);
    prefix.pop();
}

fn needs_quotes(name: &str) -> bool {
    name.is_empty()
        || name.chars().any(|c| c.is_whitespace() || matches!(c, '(' | ')' | ',' | '"' | '\\'))
}

fn write_name(f: &mut fmt::Formatter<'_>, name: &str) -> fmt::Result {
    if needs_quotes(name) {
        write!(f, "\"")?;
        for c in name.chars() {
            if c == '"' || c == '\\' {
                write!(f, "\\")?;
            }
            write!(f, "{c}")?;
        }
        write!(f, "\"")
    } else {
        write!(f, "{name}")
    }
}

impl fmt::Display for ProcessTree {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Activity(a) => write_name(f, a),
            Loop(c) => write!(f, "loop({c})"),
            Seq(l, r) | Xor(l, r) | And(l, r) => {
                write!(f, "{}({l},{r})", self.operator().unwrap().name())
            }
        }
    }
}

impl std::str::FromStr for ProcessTree {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        ProcessTree::parse(s)
    }
}

struct Parser<'a> {
    src: &'a [u8],
    pos: usize,
}

impl Parser<'_> {
    fn error(&self, msg: &str) -> Error {
        Error::Syntax { position: self.pos, message: msg.to_string() }
    }

    fn skip_ws(&mut self) {
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
    }

    fn peek(&mut self) -> Option<u8> {
        self.skip_ws();
        self.src.get(self.pos).copied()
    }

    fn expect(&mut self, c: u8) -> Result<()> {
        if self.peek() == Some(c) {
            self.pos += 1;
            Ok(())
        } else {
            Err(self.error(&format!("expected '{}'", c as char)))
        }
    }

    fn name(&mut self) -> Result<String> {
        self.skip_ws();
        if self.peek() == Some(b'"') {
            self.pos += 1;
            let mut out = Vec::new();
            loop {
                match self.src.get(self.pos) {
                    None => return Err(self.error("unterminated quoted name")),
                    Some(b'"') => {
                        self.pos += 1;
                        break;
                    }
                    Some(b'\\') => {
                        let c = *self.src.get(self.pos + 1).ok_or_else(|| self.error("dangling escape"))?;
                        out.push(c);
                        self.pos += 2;
                    }
                    Some(&c) => {
                        out.push(c);
                        self.pos += 1;
                    }
                }
            }
            if out.is_empty() {
                return Err(self.error("empty activity name"));
            }
            return String::from_utf8(out).map_err(|_| self.error("invalid utf-8"));
        }
        let start = self.pos;
        while let Some(&c) = self.src.get(self.pos) {
            if c.is_ascii_whitespace() || matches!(c, b'(' | b')' | b',' | b'"') {
                break;
            }
            self.pos += 1;
        }
        if start == self.pos {
            return Err(self.error("expected activity name or operator"));
        }
        String::from_utf8(self.src[start..self.pos].to_vec()).map_err(|_| self.error("invalid utf-8"))
    }

    fn tree(&mut self) -> Result<ProcessTree> {
        let quoted = self.peek() == Some(b'"');
        let word_pos = self.pos;
        let word = self.name()?;
        let op = match (quoted, word.as_str()) {
            (false, "seq") => Some(Operator::Seq),
            (false, "xor") => Some(Operator::Xor),
            (false, "and") => Some(Operator::And),
            (false, "loop") => Some(Operator::Loop),
            _ => None,
        };
        let op = match op {
            Some(op) if self.peek() == Some(b'(') => op,
            _ => return Ok(Activity(word)),
        };
        self.expect(b'(')?;
        let mut children = vec![self.tree()?];
        while self.peek() == Some(b',') {
            self.pos += 1;
            children.push(self.tree()?);
        }
        if children.len() != op.arity() {
            return Err(Error::Syntax {
                position: word_pos,
                message: format!("{} takes {} argument(s), got {}", op.name(), op.arity(), children.len()),
            });
        }
        self.expect(b')')?;
        let mut it = children.into_iter();
        let first = it.next().unwrap();
        Ok(match op {
            Operator::Loop => ProcessTree::looped(first),
            _ => ProcessTree::binary(op, first, it.next().unwrap()),
        })
    }
}

#[derive(Serialize, Deserialize)]
struct TreeJson {
    op: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    name: Option<String>,
    #[serde(default)]
    children: Vec<TreeJson>,
}

impl From<&ProcessTree> for TreeJson {
    fn from(t: &ProcessTree) -> Self {
        match t {
            Activity(a) => TreeJson { op: "activity".into(), name: Some(a.clone()), children: vec![] },
            _ => TreeJson {
                op: t.operator().unwrap().name().into(),
                name: None,
                children: t.children().into_iter().map(TreeJson::from).collect(),
            },
        }
    }
}

impl TryFrom<TreeJson> for ProcessTree {
    type Error = String;
    fn try_from(j: TreeJson) -> std::result::Result<Self, String> {
        let mut kids = j
            .children
            .into_iter()
            .map(ProcessTree::try_from)
            .collect::<std::result::Result<Vec<_>, _>>()?;
        let n = kids.len();
        let bad = |op: &str| format!("{op} with {n} children");
        Ok(match j.op.as_str() {
            "activity" => match (j.name, n) {
                (Some(a), 0) if !a.is_empty() => Activity(a),
                _ => return Err("activity needs a name and no children".into()),
            },
            "loop" if n == 1 => ProcessTree::looped(kids.pop().unwrap()),
            "seq" | "xor" | "and" if n == 2 => {
                let r = kids.pop().unwrap();
                let l = kids.pop().unwrap();
                match j.op.as_str() {
                    "seq" => ProcessTree::seq(l, r),
                    "xor" => ProcessTree::xor(l, r),
                    _ => ProcessTree::and(l, r),
                }
            }
            op => return Err(bad(op)),
        })
    }
}

impl Serialize for ProcessTree {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        TreeJson::from(self).serialize(s)
    }
}

impl<'de> Deserialize<'de> for ProcessTree {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        ProcessTree::try_from(TreeJson::deserialize(d)?).map_err(serde::de::Error::custom)
    }
}
