//! Seeded synthetic graph generator.
//!
//! The clustered model splits vertices into consecutive groups of
//! `ceil(sqrt(n))` ids and draws 80% of edges inside the source's group,
//! which gives locality-aware partitioners something to find.

use std::collections::HashSet;
use std::str::FromStr;

use rand::seq::index;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::graph::{Edge, Graph, VertexId};

const INTRA_GROUP_PROBABILITY: f64 = 0.8;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SynthModel {
    Uniform,
    Clustered,
}

impl FromStr for SynthModel {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "uniform" => Ok(SynthModel::Uniform),
            "clustered" => Ok(SynthModel::Clustered),
            other => Err(Error::config(format!(
                "unknown graph model `{other}` (expected uniform|clustered)"
            ))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SynthParams {
    pub vertices: usize,
    pub edges: usize,
    pub labels: usize,
    pub model: SynthModel,
    pub seed: u64,
}

/// Size of the locality groups used by the clustered model.
pub fn group_size(n: usize) -> usize {
    ((n as f64).sqrt().ceil() as usize).max(1)
}

pub fn synth_graph(params: SynthParams) -> Result<Graph> {
    let SynthParams { vertices: n, edges: m, labels, model, seed } = params;
    let capacity = (n as u128) * (n as u128) * (labels as u128);
    if (m as u128) > capacity {
        return Err(Error::config(format!(
            "cannot place {m} distinct edges on {n} vertices with {labels} labels"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    if m == 0 {
        return Graph::with_numbered_tokens(n, labels, Vec::new());
    }

    let edges = if (m as u128) * 2 > capacity {
        // Dense request: sample distinct triple indices directly.
        let total = capacity as usize;
        index::sample(&mut rng, total, m)
            .into_iter()
            .map(|k| {
                let src = k / (n * labels);
                let rest = k % (n * labels);
                Edge::new(src as VertexId, (rest / n) as u32, (rest % n) as VertexId)
            })
            .collect()
    } else {
        sparse_edges(&mut rng, n, m, labels, model)
    };
    Graph::with_numbered_tokens(n, labels, edges)
}

fn sparse_edges(rng: &mut ChaCha8Rng, n: usize, m: usize, labels: usize, model: SynthModel) -> Vec<Edge> {
    let g = group_size(n);
    let mut seen = HashSet::with_capacity(m);
    let mut edges = Vec::with_capacity(m);
    let mut misses = 0usize;
    while edges.len() < m {
        let src = rng.gen_range(0..n);
        let label = rng.gen_range(0..labels) as u32;
        let dst = match model {
            SynthModel::Uniform => rng.gen_range(0..n),
            SynthModel::Clustered => {
                let lo = (src / g) * g;
                let hi = (lo + g).min(n);
                let outside = n - (hi - lo);
                // Fall back to uniform draws if the intra-group space is saturated.
                if misses > 256 || outside == 0 {
                    rng.gen_range(0..n)
                } else if rng.gen_bool(INTRA_GROUP_PROBABILITY) {
                    rng.gen_range(lo..hi)
                } else {
                    let k = rng.gen_range(0..outside);
                    if k < lo { k } else { k + (hi - lo) }
                }
            }
        };
        let e = Edge::new(src as VertexId, label, dst as VertexId);
        if seen.insert(e) {
            edges.push(e);
            misses = 0;
        } else {
            misses += 1;
        }
    }
    edges
}
