//! Per-partition adjacency stores.
//!
//! Forward stores group a partition's edges by source, each source's run sorted
//! by `(label, dst)`. With redundancy, reverse stores group the edges whose
//! target the partition owns by target, sorted by `(label, src)`.

use std::sync::Arc;

use crate::error::{Error, Result};
use crate::graph::{Edge, Graph, LabelFilter, LabelId, VertexId};
use crate::partition::{Assignment, PartitionId};

/// Compressed adjacency keyed by a sorted list of local anchor vertices.
#[derive(Debug, Clone, Default)]
struct Adjacency {
    keys: Vec<VertexId>,
    offsets: Vec<usize>,
    entries: Vec<(LabelId, VertexId)>,
}

impl Adjacency {
    /// `triples` are `(anchor, label, other)`.
    fn build(mut triples: Vec<(VertexId, LabelId, VertexId)>) -> Self {
        triples.sort_unstable();
        let mut adj = Adjacency {
            keys: Vec::new(),
            offsets: vec![0],
            entries: Vec::with_capacity(triples.len()),
        };
        for (anchor, label, other) in triples {
            if adj.keys.last() != Some(&anchor) {
                if !adj.keys.is_empty() {
                    adj.offsets.push(adj.entries.len());
                }
                adj.keys.push(anchor);
            }
            adj.entries.push((label, other));
        }
        if !adj.keys.is_empty() {
            adj.offsets.push(adj.entries.len());
        }
        adj
    }

    fn run(&self, anchor: VertexId) -> &[(LabelId, VertexId)] {
        match self.keys.binary_search(&anchor) {
            Ok(i) => &self.entries[self.offsets[i]..self.offsets[i + 1]],
            Err(_) => &[],
        }
    }

    fn filtered(&self, anchor: VertexId, label: LabelFilter) -> &[(LabelId, VertexId)] {
        let run = self.run(anchor);
        match label {
            LabelFilter::Any => run,
            LabelFilter::Nothing => &[],
            LabelFilter::Is(l) => {
                let lo = run.partition_point(|&(x, _)| x < l);
                let hi = run.partition_point(|&(x, _)| x <= l);
                &run[lo..hi]
            }
        }
    }

    fn contains(&self, anchor: VertexId, label: LabelFilter, other: VertexId) -> bool {
        match label {
            LabelFilter::Nothing => false,
            LabelFilter::Is(l) => self.run(anchor).binary_search(&(l, other)).is_ok(),
            LabelFilter::Any => self.run(anchor).iter().any(|&(_, o)| o == other),
        }
    }

    fn len(&self) -> usize {
        self.entries.len()
    }

    fn iter(&self) -> impl Iterator<Item = (VertexId, LabelId, VertexId)> + '_ {
        self.keys.iter().enumerate().flat_map(move |(i, &k)| {
            self.entries[self.offsets[i]..self.offsets[i + 1]].iter().map(move |&(l, o)| (k, l, o))
        })
    }
}

#[derive(Debug, Clone)]
pub struct PartitionStore {
    id: PartitionId,
    forward: Adjacency,
    /// The forward edges again, keyed by target, for target scans of this store.
    forward_by_target: Adjacency,
    reverse: Option<Adjacency>,
    forward_owner: Arc<Assignment>,
    reverse_owner: Option<Arc<Assignment>>,
}

impl PartitionStore {
    pub fn id(&self) -> PartitionId {
        self.id
    }

    pub fn local_edge_count(&self) -> usize {
        self.forward.len()
    }

    pub fn reverse_edge_count(&self) -> Option<usize> {
        self.reverse.as_ref().map(Adjacency::len)
    }

    pub fn has_reverse(&self) -> bool {
        self.reverse.is_some()
    }

    fn check_forward_owner(&self, v: VertexId) -> Result<()> {
        if (v as usize) < self.forward_owner.vertex_count() && self.forward_owner.part_of(v) == self.id {
            Ok(())
        } else {
            Err(Error::Ownership { partition: self.id, vertex: v })
        }
    }

    /// Local edges leaving `src`, sorted by `(label, dst)`.
    pub fn out_edges(&self, src: VertexId, label: LabelFilter) -> Result<&[(LabelId, VertexId)]> {
        self.check_forward_owner(src)?;
        Ok(self.forward.filtered(src, label))
    }

    /// Edges entering `dst` from the reverse store, sorted by `(label, src)`.
    pub fn in_edges(&self, dst: VertexId, label: LabelFilter) -> Result<&[(LabelId, VertexId)]> {
        let (reverse, owner) = match (&self.reverse, &self.reverse_owner) {
            (Some(r), Some(o)) => (r, o),
            _ => return Err(Error::RedundancyRequired),
        };
        if (dst as usize) >= owner.vertex_count() || owner.part_of(dst) != self.id {
            return Err(Error::Ownership { partition: self.id, vertex: dst });
        }
        Ok(reverse.filtered(dst, label))
    }

    /// All local forward edges ending at `dst`, as `(label, src)` sorted by `(label, src)`.
    /// Any partition may be asked; vertices outside the graph yield nothing.
    pub fn scan_by_target(&self, dst: VertexId, label: LabelFilter) -> &[(LabelId, VertexId)] {
        self.forward_by_target.filtered(dst, label)
    }

    pub fn has_edge(&self, src: VertexId, label: LabelFilter, dst: VertexId) -> Result<bool> {
        self.check_forward_owner(src)?;
        Ok(self.forward.contains(src, label, dst))
    }

    /// Every local forward edge, grouped by source.
    pub fn forward_edges(&self) -> impl Iterator<Item = Edge> + '_ {
        self.forward.iter().map(|(s, l, d)| Edge::new(s, l, d))
    }

    pub fn reverse_edges(&self) -> impl Iterator<Item = Edge> + '_ {
        self.reverse.iter().flat_map(|r| r.iter().map(|(d, l, s)| Edge::new(s, l, d)))
    }
}

#[derive(Debug, Clone)]
pub struct PartitionSet {
    partitions: Vec<PartitionStore>,
    forward_assignment: Arc<Assignment>,
    reverse_assignment: Option<Arc<Assignment>>,
    placement: Vec<usize>,
}

impl PartitionSet {
    pub fn partitions(&self) -> &[PartitionStore] {
        &self.partitions
    }

    pub fn partition(&self, p: PartitionId) -> &PartitionStore {
        &self.partitions[p]
    }

    pub fn len(&self) -> usize {
        self.partitions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.partitions.is_empty()
    }

    pub fn forward_assignment(&self) -> &Assignment {
        &self.forward_assignment
    }

    pub fn reverse_assignment(&self) -> Option<&Assignment> {
        self.reverse_assignment.as_deref()
    }

    pub fn has_redundancy(&self) -> bool {
        self.reverse_assignment.is_some()
    }

    /// NUMA node hosting partition `p`.
    pub fn node_of(&self, p: PartitionId) -> usize {
        self.placement[p]
    }

    pub fn placement(&self) -> &[usize] {
        &self.placement
    }
}

/// Round-robin placement of `parts` partitions onto `nodes` nodes.
pub fn round_robin_placement(parts: usize, nodes: usize) -> Vec<usize> {
    (0..parts).map(|p| p % nodes.max(1)).collect()
}

pub fn build_partitions(
    graph: &Graph,
    forward: Assignment,
    reverse: Option<Assignment>,
    placement: Vec<usize>,
) -> Result<PartitionSet> {
    let p = forward.num_parts();
    let n = graph.vertex_count();
    if forward.vertex_count() != n {
        return Err(Error::config(format!(
            "forward assignment covers {} vertices, graph has {n}",
            forward.vertex_count()
        )));
    }
    if let Some(rev) = &reverse {
        if rev.vertex_count() != n || rev.num_parts() != p {
            return Err(Error::config("reverse assignment does not match the forward assignment shape"));
        }
    }
    if placement.len() != p {
        return Err(Error::config(format!("placement lists {} partitions, expected {p}", placement.len())));
    }

    let mut fwd_triples: Vec<Vec<(VertexId, LabelId, VertexId)>> = vec![Vec::new(); p];
    let mut rev_triples: Vec<Vec<(VertexId, LabelId, VertexId)>> = vec![Vec::new(); p];
    for e in graph.edges() {
        fwd_triples[forward.part_of(e.src)].push((e.src, e.label, e.dst));
        if let Some(rev) = &reverse {
            rev_triples[rev.part_of(e.dst)].push((e.dst, e.label, e.src));
        }
    }

    let forward = Arc::new(forward);
    let reverse = reverse.map(Arc::new);
    let partitions = fwd_triples
        .into_iter()
        .zip(rev_triples)
        .enumerate()
        .map(|(id, (fwd, rev))| {
            let by_target = fwd.iter().map(|&(s, l, d)| (d, l, s)).collect();
            PartitionStore {
                id,
                forward: Adjacency::build(fwd),
                forward_by_target: Adjacency::build(by_target),
                reverse: reverse.as_ref().map(|_| Adjacency::build(rev)),
                forward_owner: Arc::clone(&forward),
                reverse_owner: reverse.clone(),
            }
        })
        .collect();
    Ok(PartitionSet { partitions, forward_assignment: forward, reverse_assignment: reverse, placement })
}
