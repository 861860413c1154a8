//! Workloads shared by the criterion benches.

use partmatch_core::graph::{Edge, Graph};
use partmatch_core::synth::{synth_graph, SynthModel, SynthParams};

pub fn clustered(vertices: usize, edges: usize, seed: u64) -> Graph {
    synth_graph(SynthParams { vertices, edges, labels: 1, model: SynthModel::Clustered, seed })
        .expect("feasible parameters")
}

/// `side` x `side` grid with right and down edges.
pub fn grid(side: usize) -> Graph {
    let id = |r: usize, c: usize| (r * side + c) as u32;
    let mut edges = Vec::with_capacity(2 * side * side);
    for r in 0..side {
        for c in 0..side {
            if c + 1 < side {
                edges.push(Edge::new(id(r, c), 0, id(r, c + 1)));
            }
            if r + 1 < side {
                edges.push(Edge::new(id(r, c), 0, id(r + 1, c)));
            }
        }
    }
    Graph::with_numbered_tokens(side * side, 1, edges).expect("valid grid")
}

