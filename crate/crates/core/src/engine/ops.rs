//! Operators: what a worker does with one message on one partition.

use log::warn;

use crate::clock::Clock;
use crate::error::{Error, Result};
use crate::graph::{Graph, LabelFilter, VertexId};
use crate::partition::PartitionId;
use crate::query::{Addressing, OpKind, Qep, Semantics};
use crate::routing::{timed_route, Direction, RouteTimer, RoutingPair};
use crate::store::PartitionStore;

pub const UNBOUND: VertexId = VertexId::MAX;

/// Partial variable bindings carried between partitions.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct MatchState(Box<[VertexId]>);

impl MatchState {
    pub fn unbound(variables: usize) -> Self {
        MatchState(vec![UNBOUND; variables].into_boxed_slice())
    }

    pub fn from_bindings(bindings: &[Option<VertexId>]) -> Self {
        MatchState(bindings.iter().map(|b| b.unwrap_or(UNBOUND)).collect())
    }

    #[inline]
    pub fn get(&self, var: usize) -> Option<VertexId> {
        let v = self.0[var];
        (v != UNBOUND).then_some(v)
    }

    pub fn as_slice(&self) -> &[VertexId] {
        &self.0
    }

    pub fn into_vec(self) -> Vec<VertexId> {
        self.0.into_vec()
    }

    pub fn bound_count(&self) -> usize {
        self.0.iter().filter(|&&v| v != UNBOUND).count()
    }

    /// Copy of `self` with new bindings, or `None` if injective semantics rule it out.
    fn extend(&self, binds: &[(usize, VertexId)], semantics: Semantics) -> Result<Option<MatchState>> {
        let mut next = self.0.clone();
        for &(var, v) in binds {
            if next[var] != UNBOUND {
                return Err(Error::Internal(format!("variable {var} is already bound")));
            }
            if semantics == Semantics::Injective && next.contains(&v) {
                return Ok(None);
            }
            next[var] = v;
        }
        Ok(Some(MatchState(next)))
    }
}

/// A plan with its labels resolved against one graph's dictionary.
#[derive(Debug, Clone)]
pub struct BoundPlan {
    pub qep: Qep,
    pub labels: Vec<LabelFilter>,
}

impl BoundPlan {
    pub fn new(qep: &Qep, graph: &Graph) -> Self {
        let labels = qep.query.label_filters(graph);
        for (pred, filter) in qep.query.predicates().iter().zip(&labels) {
            if *filter == LabelFilter::Nothing {
                warn!("label `{}` does not occur in the graph; its predicate matches nothing", pred.label);
            }
        }
        BoundPlan { qep: qep.clone(), labels }
    }

    pub fn op_count(&self) -> usize {
        self.qep.ops.len()
    }

    pub fn variable_count(&self) -> usize {
        self.qep.query.variable_count()
    }

    pub fn is_last(&self, op_index: usize) -> bool {
        op_index + 1 == self.qep.ops.len()
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct OpOutput {
    /// States for the next operator.
    pub successors: Vec<MatchState>,
    /// Complete matches (only from the last operator).
    pub results: Vec<MatchState>,
}

pub fn apply_op(plan: &BoundPlan, op_index: usize, store: &PartitionStore, state: &MatchState) -> Result<OpOutput> {
    let mut produced = Vec::new();
    apply_op_into(plan, op_index, store, state, &mut produced)?;
    Ok(if plan.is_last(op_index) {
        OpOutput { successors: Vec::new(), results: produced }
    } else {
        OpOutput { successors: produced, results: Vec::new() }
    })
}

/// Appends every state produced by operator `op_index` to `out`.
pub(crate) fn apply_op_into(
    plan: &BoundPlan,
    op_index: usize,
    store: &PartitionStore,
    state: &MatchState,
    out: &mut Vec<MatchState>,
) -> Result<()> {
    let op = plan.qep.ops[op_index];
    let pred = &plan.qep.query.predicates()[op.predicate];
    let label = plan.labels[op.predicate];
    let semantics = plan.qep.semantics;
    let mut push = |next: Option<MatchState>| {
        if let Some(s) = next {
            out.push(s);
        }
    };

    match op.kind {
        OpKind::Unbound => {
            for e in store.forward_edges().filter(|e| label.matches(e.label)) {
                if pred.src == pred.dst {
                    if e.src == e.dst {
                        push(state.extend(&[(pred.src, e.src)], semantics)?);
                    }
                } else {
                    push(state.extend(&[(pred.src, e.src), (pred.dst, e.dst)], semantics)?);
                }
            }
        }
        OpKind::VertexBoundSrc => {
            let src = bound(state, pred.src)?;
            for &(_, dst) in store.out_edges(src, label)? {
                push(state.extend(&[(pred.dst, dst)], semantics)?);
            }
        }
        OpKind::VertexBoundDst => {
            let dst = bound(state, pred.dst)?;
            let sources = match op.addressing {
                Addressing::UnicastReverse => store.in_edges(dst, label)?,
                _ => store.scan_by_target(dst, label),
            };
            for &(_, src) in sources {
                push(state.extend(&[(pred.src, src)], semantics)?);
            }
        }
        OpKind::EdgeBound => {
            let src = bound(state, pred.src)?;
            let dst = bound(state, pred.dst)?;
            if store.has_edge(src, label, dst)? {
                out.push(state.clone());
            }
        }
    }
    Ok(())
}

fn bound(state: &MatchState, var: usize) -> Result<VertexId> {
    state.get(var).ok_or_else(|| Error::Internal(format!("variable {var} expected to be bound")))
}

/// Where a state headed for operator `op_index` must be delivered.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Targets {
    One(PartitionId),
    /// Every partition `0..n`.
    All(usize),
}

impl Targets {
    pub fn len(self) -> usize {
        match self {
            Targets::One(_) => 1,
            Targets::All(n) => n,
        }
    }

    pub fn is_empty(self) -> bool {
        self.len() == 0
    }
}

pub fn dispatch<C: Clock + ?Sized>(
    plan: &BoundPlan,
    op_index: usize,
    state: &MatchState,
    routing: &RoutingPair,
    clock: &C,
    timer: &mut RouteTimer,
) -> Result<Targets> {
    let op = plan.qep.ops[op_index];
    let pred = &plan.qep.query.predicates()[op.predicate];
    match op.addressing {
        Addressing::Broadcast => Ok(Targets::All(routing.num_parts())),
        Addressing::UnicastForward => {
            let src = bound(state, pred.src)?;
            timed_route(routing, src, Direction::Forward, clock, timer).map(|(p, _)| Targets::One(p))
        }
        Addressing::UnicastReverse => {
            let dst = bound(state, pred.dst)?;
            timed_route(routing, dst, Direction::Reverse, clock, timer).map(|(p, _)| Targets::One(p))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::clock::StepClock;
    use crate::fixtures::{EXAMPLE_GRAPH, QUAD_QUERY};
    use crate::graph::parse_graph_str;
    use crate::partition::hash_assign;
    use crate::query::{compile, parse_query_str};
    use crate::routing::RoutingTable;
    use crate::store::build_partitions;

    const A: u32 = 0;
    const B: u32 = 1;
    const C: u32 = 2;
    const D: u32 = 3;
    const E: u32 = 4;
    const G: u32 = 6;

    fn setup(query: &str, redundancy: bool, semantics: Semantics) -> (BoundPlan, PartitionStore) {
        let g = parse_graph_str(EXAMPLE_GRAPH).unwrap();
        let a = hash_assign(g.vertex_count(), 1).unwrap();
        let set = build_partitions(&g, a.clone(), redundancy.then_some(a), vec![0]).unwrap();
        let qep = compile(&parse_query_str(query).unwrap(), redundancy, semantics).unwrap();
        (BoundPlan::new(&qep, &g), set.partition(0).clone())
    }

    fn state(b: &[Option<u32>]) -> MatchState {
        MatchState::from_bindings(b)
    }

    #[test]
    fn unbound_wildcard_yields_one_state_per_edge() {
        let (plan, store) = setup(QUAD_QUERY, false, Semantics::Homomorphism);
        let out = apply_op(&plan, 0, &store, &MatchState::unbound(4)).unwrap();
        assert_eq!(out.successors.len(), 7);
        assert!(out.results.is_empty());
        assert!(out.successors.iter().all(|s| s.bound_count() == 2));
    }

    #[test]
    fn edge_bound_rejects_missing_edge() {
        // Quad op 3 checks V4 -> V2.
        let (plan, store) = setup(QUAD_QUERY, false, Semantics::Homomorphism);
        let s = state(&[Some(A), Some(C), Some(B), Some(D)]);
        let out = apply_op(&plan, 3, &store, &s).unwrap();
        assert!(out.results.is_empty() && out.successors.is_empty());
        let s = state(&[Some(A), Some(B), Some(C), Some(A)]);
        assert_eq!(apply_op(&plan, 3, &store, &s).unwrap().results, vec![s]);
    }

    #[test]
    fn vertex_bound_dst_without_redundancy_scans() {
        // Quad op 2: V4 -> V3 with V3 = B.
        let (plan, store) = setup(QUAD_QUERY, false, Semantics::Homomorphism);
        let s = state(&[Some(A), Some(C), Some(B), None]);
        let out = apply_op(&plan, 2, &store, &s).unwrap();
        let v4: Vec<u32> = out.successors.iter().map(|s| s.get(3).unwrap()).collect();
        assert_eq!(v4, vec![A, D, E, G]);
    }

    #[test]
    fn vertex_bound_dst_with_redundancy_uses_reverse_store() {
        let (plan, store) = setup(QUAD_QUERY, true, Semantics::Homomorphism);
        let s = state(&[Some(A), Some(C), Some(B), None]);
        let out = apply_op(&plan, 2, &store, &s).unwrap();
        assert_eq!(out.successors.len(), 4);
    }

    #[test]
    fn injective_discards_reused_vertices() {
        let (plan, store) = setup(QUAD_QUERY, false, Semantics::Injective);
        let s = state(&[Some(A), Some(C), Some(B), None]);
        let out = apply_op(&plan, 2, &store, &s).unwrap();
        let v4: Vec<u32> = out.successors.iter().map(|s| s.get(3).unwrap()).collect();
        assert_eq!(v4, vec![D, E, G]);
    }

    #[test]
    fn rebinding_is_an_internal_error() {
        let (plan, store) = setup(QUAD_QUERY, false, Semantics::Homomorphism);
        let s = state(&[Some(A), Some(B), None, None]);
        assert!(matches!(apply_op(&plan, 0, &store, &s), Err(Error::Internal(_))));
        let s = state(&[None, None, None, None]);
        assert!(matches!(apply_op(&plan, 1, &store, &s), Err(Error::Internal(_))));
    }

    #[test]
    fn self_loop_unbound_requires_equal_endpoints() {
        let g = parse_graph_str("A l A\nA l B").unwrap();
        let a = hash_assign(2, 1).unwrap();
        let set = build_partitions(&g, a, None, vec![0]).unwrap();
        let qep = compile(&parse_query_str("X * X").unwrap(), false, Semantics::Injective).unwrap();
        let plan = BoundPlan::new(&qep, &g);
        let out = apply_op(&plan, 0, set.partition(0), &MatchState::unbound(1)).unwrap();
        assert_eq!(out.results, vec![state(&[Some(0)])]);
    }

    #[test]
    fn dispatch_fan_out() {
        let (plan, _) = setup(QUAD_QUERY, false, Semantics::Homomorphism);
        let routing = RoutingPair { forward: RoutingTable::compute(4).unwrap(), reverse: None, dictionary: None };
        let clock = StepClock::new(1);
        let mut timer = RouteTimer::default();
        let s = state(&[Some(E), Some(B), None, None]);
        assert_eq!(dispatch(&plan, 0, &MatchState::unbound(4), &routing, &clock, &mut timer).unwrap(), Targets::All(4));
        assert_eq!(dispatch(&plan, 2, &s, &routing, &clock, &mut timer).unwrap().len(), 4);
        let t = dispatch(&plan, 1, &s, &routing, &clock, &mut timer).unwrap();
        assert_eq!(t, Targets::One(E as usize % 4));
        assert_eq!(timer.calls, 1);
    }

    #[test]
    fn dispatch_reverse_routes_by_target() {
        let (plan, _) = setup(QUAD_QUERY, true, Semantics::Homomorphism);
        let table = RoutingTable::compute(3).unwrap();
        let routing = RoutingPair { forward: table.clone(), reverse: Some(table), dictionary: None };
        let clock = StepClock::new(1);
        let mut timer = RouteTimer::default();
        let s = state(&[Some(A), Some(C), Some(E), None]);
        assert_eq!(dispatch(&plan, 2, &s, &routing, &clock, &mut timer).unwrap(), Targets::One(E as usize % 3));
    }
}
