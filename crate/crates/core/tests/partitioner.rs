mod common;

use std::collections::BTreeSet;

use common::random_graph;
use partmatch_core::prelude::*;
use proptest::prelude::*;

fn crossing(g: &Graph, parts: &[u32]) -> usize {
    g.edges().iter().filter(|e| parts[e.src as usize] != parts[e.dst as usize]).count()
}

fn cap(n: usize, p: usize, eps: f64) -> usize {
    n.div_ceil(p).max(((1.0 + eps) * n as f64 / p as f64).floor() as usize)
}

#[test]
fn hash_is_modulo() {
    let a = hash_assign(10, 4).unwrap();
    assert!((0..10).all(|v| a.part_of(v) == v as usize % 4));
    assert!(hash_assign(3, 0).is_err());
}

#[test]
fn kway_rejects_bad_parameters() {
    let g = random_graph(1, 10, 20, 1);
    assert!(kway_assign(&g, 0, 0.05, 0).is_err());
    assert!(kway_assign(&g, 1, 1.5, 0).is_err());
    assert!(kway_assign(&g, g.vertex_count() + 1, 0.05, 0).is_err());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn kway_is_balanced_and_deterministic(seed in any::<u64>(), p in 1usize..6, eps in 0.0f64..0.3) {
        let g = random_graph(seed, 80, 300, 2);
        prop_assume!(p <= g.vertex_count());
        let a = kway_assign(&g, p, eps, seed).unwrap();
        prop_assert_eq!(a.vertex_count(), g.vertex_count());
        prop_assert!(a.parts().iter().all(|&x| (x as usize) < p));
        let limit = cap(g.vertex_count(), p, eps);
        prop_assert!(a.part_sizes().iter().all(|&s| s <= limit), "{:?} > {}", a.part_sizes(), limit);
        prop_assert_eq!(edge_cut(&g, &a), crossing(&g, a.parts()));
        prop_assert_eq!(kway_assign(&g, p, eps, seed).unwrap(), a);
    }

    #[test]
    fn relabel_keeps_membership_and_edges(seed in any::<u64>(), p in 1usize..6) {
        let g = random_graph(seed, 60, 200, 3);
        prop_assume!(p <= g.vertex_count());
        let a = kway_assign(&g, p, 0.05, seed).unwrap();
        let r = relabel_virtual(&g, &a).unwrap();

        let mut seen = r.dictionary.clone();
        seen.sort_unstable();
        prop_assert_eq!(seen, (0..g.vertex_count() as u32).collect::<Vec<_>>());
        prop_assert_eq!(r.bounds.len(), p);
        prop_assert_eq!(*r.bounds.last().unwrap() as usize, g.vertex_count());

        for (virt, &orig) in r.dictionary.iter().enumerate() {
            let owner = r.bounds.iter().position(|&b| (virt as u32) < b).unwrap();
            prop_assert_eq!(owner, a.part_of(orig));
        }
        let original: BTreeSet<_> = g.edges().iter().map(|e| (e.src, e.label, e.dst)).collect();
        let mapped: BTreeSet<_> = r
            .virtual_graph
            .edges()
            .iter()
            .map(|e| (r.dictionary[e.src as usize], e.label, r.dictionary[e.dst as usize]))
            .collect();
        prop_assert_eq!(mapped, original);
    }

    #[test]
    fn balance_is_max_over_mean(sizes in proptest::collection::vec(1usize..20, 1..8)) {
        let p = sizes.len();
        let parts: Vec<u32> = sizes.iter().enumerate().flat_map(|(i, &s)| std::iter::repeat(i as u32).take(s)).collect();
        let n = parts.len();
        let a = Assignment::new(parts, p).unwrap();
        let expected = *sizes.iter().max().unwrap() as f64 * p as f64 / n as f64;
        prop_assert!((balance(&a) - expected).abs() < 1e-9);
    }
}
