#![allow(dead_code, unused_imports)]

use partmatch_core::engine::Execution;
use partmatch_core::graph::Edge;
use partmatch_core::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub const SINGLE_EDGE: &str = "X l0 Y\n";
pub const TRIANGLE: &str = "X * Y\nY * Z\nZ * X\n";
pub use partmatch_core::fixtures::{EXAMPLE_GRAPH, QUAD_QUERY, V_QUERY};

pub fn suite_queries() -> Vec<(&'static str, ConjunctiveQuery)> {
    [("single-edge", SINGLE_EDGE), ("triangle", TRIANGLE), ("v", V_QUERY), ("quad", QUAD_QUERY)]
        .into_iter()
        .map(|(name, text)| (name, parse_query_str(text).unwrap()))
        .collect()
}

/// Random multigraph with 1..=`max_v` vertices, 0..=`max_e` edge draws and
/// 1..=`max_labels` labels. Self-loops and repeated draws are kept.
pub fn random_graph(seed: u64, max_v: usize, max_e: usize, max_labels: usize) -> Graph {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = rng.gen_range(1..=max_v);
    let labels = rng.gen_range(1..=max_labels);
    let m = rng.gen_range(0..=max_e);
    let edges = (0..m)
        .map(|_| {
            Edge::new(rng.gen_range(0..n) as u32, rng.gen_range(0..labels) as u32, rng.gen_range(0..n) as u32)
        })
        .collect();
    Graph::with_numbered_tokens(n, labels, edges).unwrap()
}

pub fn run(built: &BuiltDesign, query: &ConjunctiveQuery, redundancy: bool, semantics: Semantics, workers: usize) -> Execution {
    let qep = compile(query, redundancy, semantics).unwrap();
    execute(&qep, built, &EngineConfig::with_workers(workers), &MonotonicClock::new()).unwrap()
}

/// Checks the message accounting every finished execution must satisfy.
pub fn conserved(m: &Metrics) -> Result<(), String> {
    if m.completion_signals != 1 {
        return Err(format!("{} completion signals", m.completion_signals));
    }
    if m.outstanding_at_end != 0 {
        return Err(format!("outstanding counter ended at {}", m.outstanding_at_end));
    }
    if m.msgs_sent != m.msgs_processed {
        return Err(format!("sent {:?} but processed {:?}", m.msgs_sent, m.msgs_processed));
    }
    if !m.queues_empty {
        return Err("queues not empty".into());
    }
    if m.exclusivity_violations != 0 {
        return Err(format!("{} partitions served concurrently", m.exclusivity_violations));
    }
    Ok(())
}

pub fn tokens(graph: &Graph, tuples: &ResultSet) -> Vec<Vec<String>> {
    tuples
        .tuples
        .iter()
        .map(|t| t.iter().map(|&v| graph.vertex_token(v).unwrap().to_owned()).collect())
        .collect()
}
