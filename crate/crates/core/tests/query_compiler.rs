use partmatch_core::prelude::*;
use partmatch_core::query::{Addressing, OpKind};
use proptest::prelude::*;

/// Text of a connected query: every predicate after the first reuses a variable
/// bound by an earlier one.
fn connected_query() -> impl Strategy<Value = String> {
    proptest::collection::vec((any::<prop::sample::Index>(), any::<bool>(), 0usize..3, any::<bool>()), 1..7).prop_map(
        |steps| {
            let mut vars = 0usize;
            let mut lines = Vec::new();
            for (i, (pick, fresh_dst, label, outward)) in steps.into_iter().enumerate() {
                let (a, b) = if i == 0 {
                    vars = 2;
                    (0, 1)
                } else {
                    let old = pick.index(vars);
                    let other = if fresh_dst {
                        vars += 1;
                        vars - 1
                    } else {
                        pick.index(vars.max(1))
                    };
                    (old, other)
                };
                let (s, d) = if outward { (a, b) } else { (b, a) };
                let label = if label == 0 { "*".to_string() } else { format!("l{label}") };
                lines.push(format!("V{s} {label} V{d}"));
            }
            lines.join("\n")
        },
    )
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn plans_follow_bound_state(text in connected_query(), red in any::<bool>()) {
        let q = parse_query_str(&text).unwrap();
        let qep = compile(&q, red, Semantics::Homomorphism).unwrap();
        prop_assert_eq!(qep.ops.len(), q.predicates().len());
        prop_assert_eq!(qep.ops[0].kind, OpKind::Unbound);

        let mut bound = vec![false; q.variable_count()];
        for (i, op) in qep.ops.iter().enumerate() {
            let p = &q.predicates()[op.predicate];
            prop_assert_eq!(op.predicate, i);
            let expected = match (i, bound[p.src], bound[p.dst]) {
                (0, _, _) => OpKind::Unbound,
                (_, true, false) => OpKind::VertexBoundSrc,
                (_, false, true) => OpKind::VertexBoundDst,
                _ => OpKind::EdgeBound,
            };
            prop_assert_eq!(op.kind, expected);
            let reverse = op.kind == OpKind::VertexBoundDst;
            prop_assert_eq!(op.addressing == Addressing::Broadcast, i == 0 || (reverse && !red));
            prop_assert_eq!(op.addressing == Addressing::UnicastReverse, reverse && red);
            bound[p.src] = true;
            bound[p.dst] = true;
        }
        prop_assert!(bound.iter().all(|&b| b));
        prop_assert_eq!(qep.needs_reverse(), red && qep.ops.iter().any(|op| op.kind == OpKind::VertexBoundDst));
        if red {
            prop_assert_eq!(qep.broadcast_ops(), 1);
        }
    }
}

#[test]
fn disconnected_predicate_is_rejected() {
    let q = parse_query_str("A * B\nC * D").unwrap();
    assert!(compile(&q, true, Semantics::Homomorphism).is_err());
}

#[test]
fn bundled_queries_compile() {
    for text in [partmatch_core::fixtures::QUAD_QUERY, partmatch_core::fixtures::V_QUERY] {
        let q = parse_query_str(text).unwrap();
        let on = compile(&q, true, Semantics::Injective).unwrap();
        let off = compile(&q, false, Semantics::Injective).unwrap();
        assert_eq!(on.broadcast_ops(), 1);
        assert!(off.broadcast_ops() > 1);
    }
}
