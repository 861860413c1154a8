//! Vertex-to-partition assignments and their quality metrics.

mod kway;

pub use kway::{kway_assign, DEFAULT_EPSILON};

use crate::error::{Error, Result};
use crate::graph::{Dictionary, Edge, Graph, VertexId};

pub type PartitionId = usize;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Assignment {
    parts: Vec<u32>,
    num_parts: usize,
}

impl Assignment {
    pub fn new(parts: Vec<u32>, num_parts: usize) -> Result<Self> {
        if num_parts == 0 {
            return Err(Error::config("partition count must be at least 1"));
        }
        if let Some((v, &p)) = parts.iter().enumerate().find(|(_, &p)| p as usize >= num_parts) {
            return Err(Error::config(format!(
                "vertex {v} assigned to partition {p}, but only {num_parts} partitions exist"
            )));
        }
        Ok(Assignment { parts, num_parts })
    }

    #[inline]
    pub fn part_of(&self, v: VertexId) -> PartitionId {
        self.parts[v as usize] as PartitionId
    }

    pub fn parts(&self) -> &[u32] {
        &self.parts
    }

    pub fn num_parts(&self) -> usize {
        self.num_parts
    }

    pub fn vertex_count(&self) -> usize {
        self.parts.len()
    }

    pub fn part_sizes(&self) -> Vec<usize> {
        let mut sizes = vec![0usize; self.num_parts];
        for &p in &self.parts {
            sizes[p as usize] += 1;
        }
        sizes
    }
}

/// Locality-agnostic assignment: vertex `v` goes to partition `v mod P`.
pub fn hash_assign(vertex_count: usize, num_parts: usize) -> Result<Assignment> {
    if num_parts == 0 {
        return Err(Error::config("partition count must be at least 1"));
    }
    let parts = (0..vertex_count).map(|v| (v % num_parts) as u32).collect();
    Assignment::new(parts, num_parts)
}

/// Number of edges whose endpoints sit in different partitions.
pub fn edge_cut(graph: &Graph, assignment: &Assignment) -> usize {
    graph
        .edges()
        .iter()
        .filter(|e| assignment.part_of(e.src) != assignment.part_of(e.dst))
        .count()
}

/// Largest partition size relative to a perfect split: `max_p |p| * P / |V|`.
pub fn balance(assignment: &Assignment) -> f64 {
    let n = assignment.vertex_count();
    if n == 0 {
        return 1.0;
    }
    let max = assignment.part_sizes().into_iter().max().unwrap_or(0);
    max as f64 * assignment.num_parts() as f64 / n as f64
}

/// Graph re-expressed over virtual ids that are dense per partition.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RelabelResult {
    pub virtual_graph: Graph,
    /// `dictionary[virtual] = original`.
    pub dictionary: Vec<VertexId>,
    /// Exclusive upper virtual id of each partition.
    pub bounds: Vec<VertexId>,
}

impl RelabelResult {
    /// Inverse of `dictionary`: `virtual_ids()[original] = virtual`.
    pub fn virtual_ids(&self) -> Vec<VertexId> {
        let mut virt = vec![0; self.dictionary.len()];
        for (vid, &orig) in self.dictionary.iter().enumerate() {
            virt[orig as usize] = vid as VertexId;
        }
        virt
    }
}

/// Renumbers vertices by `(partition, original id)` so each partition owns a
/// contiguous id range.
pub fn relabel_virtual(graph: &Graph, assignment: &Assignment) -> Result<RelabelResult> {
    let n = graph.vertex_count();
    if assignment.vertex_count() != n {
        return Err(Error::config(format!(
            "assignment covers {} vertices, graph has {n}",
            assignment.vertex_count()
        )));
    }
    let sizes = assignment.part_sizes();
    let mut bounds = Vec::with_capacity(sizes.len());
    let mut next = Vec::with_capacity(sizes.len());
    let mut acc = 0u32;
    for s in sizes {
        next.push(acc);
        acc += s as u32;
        bounds.push(acc);
    }

    let mut dictionary = vec![0 as VertexId; n];
    let mut virt = vec![0 as VertexId; n];
    for (v, (&p, slot)) in assignment.parts().iter().zip(virt.iter_mut()).enumerate() {
        let id = next[p as usize];
        next[p as usize] += 1;
        dictionary[id as usize] = v as VertexId;
        *slot = id;
    }

    let tokens = dictionary
        .iter()
        .map(|&orig| graph.vertex_token(orig).expect("dictionary covers all vertices").to_owned())
        .collect();
    let edges = graph
        .edges()
        .iter()
        .map(|e| Edge::new(virt[e.src as usize], e.label, virt[e.dst as usize]))
        .collect();
    let virtual_graph =
        Graph::from_parts(Dictionary::from_tokens(tokens)?, graph.label_dict().clone(), edges)?;
    Ok(RelabelResult { virtual_graph, dictionary, bounds })
}
