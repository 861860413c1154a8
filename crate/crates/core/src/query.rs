//! Conjunctive queries and their compilation into operator plans.
//!
//! A query is an ordered list of edge predicates `src_var label dst_var`.
//! Compilation walks the predicates in order, tracking which variables are
//! bound, and picks one operator per predicate:
//!
//! | src bound | dst bound | operator         | addressing                      |
//! |-----------|-----------|------------------|---------------------------------|
//! | no        | no        | `Unbound`        | broadcast (first predicate only) |
//! | yes       | no        | `VertexBoundSrc` | unicast by src                  |
//! | no        | yes       | `VertexBoundDst` | broadcast, or unicast by dst with redundancy |
//! | yes       | yes       | `EdgeBound`      | unicast by src                  |

use std::fmt;
use std::io::BufRead;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::graph::{Dictionary, Graph, LabelFilter, WILDCARD};

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum LabelSpec {
    Any,
    Named(String),
}

impl fmt::Display for LabelSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            LabelSpec::Any => f.write_str(WILDCARD),
            LabelSpec::Named(s) => f.write_str(s),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Predicate {
    pub src: usize,
    pub label: LabelSpec,
    pub dst: usize,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConjunctiveQuery {
    variables: Dictionary,
    predicates: Vec<Predicate>,
}

impl ConjunctiveQuery {
    pub fn variable_count(&self) -> usize {
        self.variables.len()
    }

    pub fn variables(&self) -> &[String] {
        self.variables.tokens()
    }

    pub fn variable_index(&self, name: &str) -> Option<usize> {
        self.variables.id(name).map(|i| i as usize)
    }

    pub fn predicates(&self) -> &[Predicate] {
        &self.predicates
    }

    /// Resolves predicate labels against a graph's label dictionary.
    pub fn label_filters(&self, graph: &Graph) -> Vec<LabelFilter> {
        self.predicates
            .iter()
            .map(|p| match &p.label {
                LabelSpec::Any => LabelFilter::Any,
                LabelSpec::Named(tok) => graph.label_filter(tok),
            })
            .collect()
    }

    /// The first `len` predicates as a query of their own, variables
    /// renumbered by first appearance within them.
    pub fn prefix(&self, len: usize) -> Result<Self> {
        if len == 0 || len > self.predicates.len() {
            return Err(Error::config(format!("prefix length {len} outside 1..={}", self.predicates.len())));
        }
        let mut variables = Dictionary::new();
        let tokens = self.variables.tokens();
        let predicates = self.predicates[..len]
            .iter()
            .map(|p| Predicate {
                src: variables.intern(&tokens[p.src]) as usize,
                label: p.label.clone(),
                dst: variables.intern(&tokens[p.dst]) as usize,
            })
            .collect();
        Ok(ConjunctiveQuery { variables, predicates })
    }

    /// Same query with predicates in a different order (variable numbering unchanged).
    pub fn with_predicate_order(&self, order: &[usize]) -> Result<Self> {
        let mut seen = vec![false; self.predicates.len()];
        if order.len() != self.predicates.len() || order.iter().any(|&i| i >= seen.len() || std::mem::replace(&mut seen[i], true)) {
            return Err(Error::config("predicate order must be a permutation"));
        }
        Ok(ConjunctiveQuery {
            variables: self.variables.clone(),
            predicates: order.iter().map(|&i| self.predicates[i].clone()).collect(),
        })
    }
}

/// Parses `src_var label dst_var` lines; `*` is the wildcard label.
pub fn parse_query<R: BufRead>(reader: R) -> Result<ConjunctiveQuery> {
    let mut variables = Dictionary::new();
    let mut predicates = Vec::new();
    for (i, line) in reader.lines().enumerate() {
        let line = line?;
        let trimmed = line.trim();
        if trimmed.is_empty() || trimmed.starts_with('#') {
            continue;
        }
        let tokens: Vec<&str> = trimmed.split_whitespace().collect();
        let [src, label, dst] = tokens[..] else {
            return Err(Error::Parse {
                line: i + 1,
                message: format!("expected `src_var label dst_var`, found {} tokens", tokens.len()),
            });
        };
        let src = variables.intern(src) as usize;
        let dst = variables.intern(dst) as usize;
        let label = if label == WILDCARD { LabelSpec::Any } else { LabelSpec::Named(label.to_owned()) };
        predicates.push(Predicate { src, label, dst });
    }
    if predicates.is_empty() {
        return Err(Error::EmptyQuery);
    }
    Ok(ConjunctiveQuery { variables, predicates })
}

pub fn parse_query_str(text: &str) -> Result<ConjunctiveQuery> {
    parse_query(text.as_bytes())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum OpKind {
    Unbound,
    VertexBoundSrc,
    VertexBoundDst,
    EdgeBound,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Addressing {
    Broadcast,
    /// One partition: owner of the bound source vertex.
    UnicastForward,
    /// One partition: reverse-store owner of the bound target vertex.
    UnicastReverse,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PlanOp {
    pub kind: OpKind,
    pub predicate: usize,
    pub addressing: Addressing,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub enum Semantics {
    /// Distinct variables may bind the same vertex.
    #[default]
    Homomorphism,
    /// Distinct variables bind distinct vertices.
    Injective,
}

impl FromStr for Semantics {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "homomorphism" => Ok(Semantics::Homomorphism),
            "injective" => Ok(Semantics::Injective),
            other => Err(Error::config(format!("unknown semantics `{other}` (expected homomorphism|injective)"))),
        }
    }
}

impl fmt::Display for Semantics {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Semantics::Homomorphism => "homomorphism",
            Semantics::Injective => "injective",
        })
    }
}

/// Query execution plan: one operator per predicate, in predicate order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Qep {
    pub query: ConjunctiveQuery,
    pub ops: Vec<PlanOp>,
    pub semantics: Semantics,
    pub redundancy: bool,
}

impl Qep {
    pub fn needs_reverse(&self) -> bool {
        self.ops.iter().any(|op| op.addressing == Addressing::UnicastReverse)
    }

    pub fn broadcast_ops(&self) -> usize {
        self.ops.iter().filter(|op| op.addressing == Addressing::Broadcast).count()
    }

    /// Variables the operator at `index` binds (none for edge-bound operators).
    pub fn binds(&self, index: usize) -> Vec<usize> {
        let pred = &self.query.predicates[self.ops[index].predicate];
        match self.ops[index].kind {
            OpKind::Unbound if pred.src == pred.dst => vec![pred.src],
            OpKind::Unbound => vec![pred.src, pred.dst],
            OpKind::VertexBoundSrc => vec![pred.dst],
            OpKind::VertexBoundDst => vec![pred.src],
            OpKind::EdgeBound => Vec::new(),
        }
    }
}

pub fn compile(query: &ConjunctiveQuery, redundancy: bool, semantics: Semantics) -> Result<Qep> {
    let mut bound = vec![false; query.variable_count()];
    let mut ops = Vec::with_capacity(query.predicates.len());
    for (i, pred) in query.predicates.iter().enumerate() {
        let kind = match (bound[pred.src], bound[pred.dst]) {
            (false, false) if i == 0 => OpKind::Unbound,
            (false, false) => return Err(Error::UnsupportedQuery { index: i }),
            (true, false) => OpKind::VertexBoundSrc,
            (false, true) => OpKind::VertexBoundDst,
            (true, true) => OpKind::EdgeBound,
        };
        let addressing = match kind {
            OpKind::Unbound => Addressing::Broadcast,
            OpKind::VertexBoundSrc | OpKind::EdgeBound => Addressing::UnicastForward,
            OpKind::VertexBoundDst if redundancy => Addressing::UnicastReverse,
            OpKind::VertexBoundDst => Addressing::Broadcast,
        };
        ops.push(PlanOp { kind, predicate: i, addressing });
        bound[pred.src] = true;
        bound[pred.dst] = true;
    }
    Ok(Qep { query: query.clone(), ops, semantics, redundancy })
}
