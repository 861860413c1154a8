//! Brute-force conjunctive query evaluation over the flat edge list.
//!
//! Deliberately shares nothing with the partitioned stores or the engine: it
//! backtracks over predicates in order and, for each one, tries every graph
//! edge consistent with the current bindings.

use std::collections::BTreeSet;

use crate::graph::{Graph, LabelFilter, VertexId, WILDCARD};
use crate::query::{ConjunctiveQuery, LabelSpec, Semantics};

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct OracleResult {
    pub tuples: BTreeSet<Vec<VertexId>>,
}

impl OracleResult {
    pub fn count(&self) -> usize {
        self.tuples.len()
    }
}

pub fn brute_force(graph: &Graph, query: &ConjunctiveQuery, semantics: Semantics) -> OracleResult {
    let labels: Vec<LabelFilter> = query
        .predicates()
        .iter()
        .map(|p| match &p.label {
            LabelSpec::Any => LabelFilter::Any,
            LabelSpec::Named(tok) if tok == WILDCARD => LabelFilter::Any,
            LabelSpec::Named(tok) => graph.label_id(tok).map_or(LabelFilter::Nothing, LabelFilter::Is),
        })
        .collect();
    let mut bindings: Vec<Option<VertexId>> = vec![None; query.variable_count()];
    let mut out = OracleResult::default();
    extend(graph, query, &labels, semantics, 0, &mut bindings, &mut out);
    out
}

fn extend(
    graph: &Graph,
    query: &ConjunctiveQuery,
    labels: &[LabelFilter],
    semantics: Semantics,
    depth: usize,
    bindings: &mut Vec<Option<VertexId>>,
    out: &mut OracleResult,
) {
    let Some(pred) = query.predicates().get(depth) else {
        let tuple: Vec<VertexId> = bindings.iter().map(|b| b.expect("every variable occurs in a predicate")).collect();
        if semantics == Semantics::Homomorphism || all_distinct(&tuple) {
            out.tuples.insert(tuple);
        }
        return;
    };
    for e in graph.edges() {
        if !labels[depth].matches(e.label) {
            continue;
        }
        let (old_src, old_dst) = (bindings[pred.src], bindings[pred.dst]);
        if old_src.is_some_and(|v| v != e.src) || old_dst.is_some_and(|v| v != e.dst) {
            continue;
        }
        if pred.src == pred.dst && e.src != e.dst {
            continue;
        }
        bindings[pred.src] = Some(e.src);
        bindings[pred.dst] = Some(e.dst);
        extend(graph, query, labels, semantics, depth + 1, bindings, out);
        bindings[pred.src] = old_src;
        bindings[pred.dst] = old_dst;
    }
}

fn all_distinct(tuple: &[VertexId]) -> bool {
    let set: BTreeSet<_> = tuple.iter().collect();
    set.len() == tuple.len()
}
