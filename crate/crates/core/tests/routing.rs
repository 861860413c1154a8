mod common;

use std::collections::BTreeSet;

use common::random_graph;
use partmatch_core::prelude::*;
use partmatch_core::routing::Direction;
use proptest::prelude::*;

fn designs() -> impl Strategy<Value = Design> {
    prop::sample::select(Design::ALL.to_vec())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn stores_hold_exactly_the_edges_their_table_routes(seed in any::<u64>(), design in designs(), p in 1usize..5, red in any::<bool>()) {
        let g = random_graph(seed, 40, 150, 3);
        prop_assume!(p <= g.vertex_count());
        let built = build_pair(&g, &DesignConfig::new(design, p).redundancy(red).seed(seed)).unwrap();
        let eff = &built.graph;
        let all: BTreeSet<_> = eff.edges().iter().copied().collect();

        let mut fwd = BTreeSet::new();
        let mut rev = BTreeSet::new();
        for (i, store) in built.partitions.partitions().iter().enumerate() {
            for e in store.forward_edges() {
                prop_assert_eq!(built.routing.table(Direction::Forward).unwrap().route(e.src).unwrap() as usize, i);
                prop_assert!(fwd.insert(e), "edge stored twice");
            }
            if red {
                for e in store.reverse_edges() {
                    prop_assert_eq!(built.routing.table(Direction::Reverse).unwrap().route(e.dst).unwrap() as usize, i);
                    prop_assert!(rev.insert(e), "edge stored twice in reverse");
                }
            }
        }
        prop_assert_eq!(&fwd, &all);
        if red {
            prop_assert_eq!(&rev, &all);
        } else {
            prop_assert!(built.routing.table(Direction::Reverse).is_err());
        }
    }

    #[test]
    fn entry_counts_per_design(seed in any::<u64>(), design in designs(), p in 1usize..5) {
        let g = random_graph(seed, 40, 100, 2);
        prop_assume!(p <= g.vertex_count());
        let built = build_pair(&g, &DesignConfig::new(design, p)).unwrap();
        let expected = match design {
            Design::Compute => 0,
            Design::LookupHash | Design::LookupKway => g.vertex_count(),
            Design::Hybrid => p,
        };
        prop_assert_eq!(built.routing.table(Direction::Forward).unwrap().entry_count(), expected);
    }

    #[test]
    fn hybrid_and_lookup_kway_agree(seed in any::<u64>(), p in 1usize..6) {
        let g = random_graph(seed, 60, 200, 2);
        prop_assume!(p <= g.vertex_count());
        let lookup = build_pair(&g, &DesignConfig::new(Design::LookupKway, p).seed(seed)).unwrap();
        let hybrid = build_pair(&g, &DesignConfig::new(Design::Hybrid, p).seed(seed)).unwrap();
        let dict = hybrid.routing.dictionary.as_ref().unwrap();
        for (virt, &orig) in dict.iter().enumerate() {
            prop_assert_eq!(
                lookup.routing.forward.route(orig).unwrap(),
                hybrid.routing.forward.route(virt as u32).unwrap()
            );
        }
    }
}

#[test]
fn out_of_range_vertices_are_errors() {
    let g = random_graph(3, 10, 20, 1);
    let n = g.vertex_count() as u32;
    for design in [Design::LookupHash, Design::Hybrid] {
        let built = build_pair(&g, &DesignConfig::new(design, 1)).unwrap();
        assert!(built.routing.forward.route(n).is_err(), "{design}");
    }
}
