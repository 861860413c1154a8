//! Multilevel k-way partitioning.
//!
//! Three phases, all driven by a single seed:
//! - coarsening by randomized heavy-edge matching,
//! - initial partitioning by growing `P` regions at once from spread-out seeds,
//! - uncoarsening with boundary Fiduccia-Mattheyses refinement at every level.
//!
//! Edges are treated as undirected; parallel edges and both directions of a
//! vertex pair collapse into one weighted edge. Self-loops are ignored.

use std::collections::{BTreeMap, BTreeSet, BinaryHeap, VecDeque};
use std::cmp::Reverse;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::Assignment;
use crate::error::{Error, Result};
use crate::graph::Graph;

pub const DEFAULT_EPSILON: f64 = 0.05;

const MAX_PASSES_PER_LEVEL: usize = 10;
const INITIAL_TRIES: usize = 4;
const EXTRA_CYCLES: usize = 3;
const RECENTER_ROUNDS: usize = 4;
const BISECTION_TRIES: usize = 8;
const BISECTION_TOLERANCE: f64 = 0.01;
const UNASSIGNED: u32 = u32::MAX;

/// Balanced, cut-minimizing assignment of the graph's vertices to `parts` partitions.
///
/// Every partition ends with at most `max(ceil(|V|/P), floor((1+epsilon)|V|/P))`
/// vertices, which never exceeds `ceil((1+epsilon)|V|/P)`.
pub fn kway_assign(graph: &Graph, parts: usize, epsilon: f64, seed: u64) -> Result<Assignment> {
    let n = graph.vertex_count();
    if parts == 0 {
        return Err(Error::config("partition count must be at least 1"));
    }
    if !(0.0..1.0).contains(&epsilon) {
        return Err(Error::config(format!("epsilon {epsilon} outside [0, 1)")));
    }
    if parts > n {
        return Err(Error::config(format!("cannot split {n} vertices into {parts} partitions")));
    }
    if parts == 1 {
        return Assignment::new(vec![0; n], 1);
    }

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let finest = WeightedGraph::from_graph(graph);
    let max_weight = max_part_weight(n as u64, parts, epsilon);
    let limits = vec![max_weight; parts];

    let mut part = v_cycle(&finest, &limits, None, &mut rng);
    let mut key = quality(&finest, &part, &limits);
    // Further cycles coarsen within the current partitions, so the projected
    // start is exactly the current solution and only refinement can change it.
    for _ in 0..EXTRA_CYCLES {
        let candidate = v_cycle(&finest, &limits, Some(&part), &mut rng);
        let candidate_key = quality(&finest, &candidate, &limits);
        if candidate_key < key {
            part = candidate;
            key = candidate_key;
        }
    }
    Assignment::new(part, parts)
}

/// (weight above the limits, cut); lower is better.
fn quality(g: &WeightedGraph, part: &[u32], limits: &[u64]) -> (u64, u64) {
    let excess = part_weights(g, part, limits.len())
        .iter()
        .zip(limits)
        .map(|(&w, &l)| w.saturating_sub(l))
        .sum();
    (excess, g.cut(part))
}

fn v_cycle(finest: &WeightedGraph, limits: &[u64], start: Option<&[u32]>, rng: &mut ChaCha8Rng) -> Vec<u32> {
    let parts = limits.len();
    let total: u64 = finest.vw.iter().sum();

    // Coarsening.
    let threshold = (20 * parts).max(200);
    let max_vertex_weight = ((1.5 * total as f64) / threshold as f64).ceil().max(1.0) as u64;
    let mut levels: Vec<(WeightedGraph, Vec<u32>)> = Vec::new();
    let mut restrict: Option<Vec<u32>> = start.map(<[u32]>::to_vec);
    loop {
        let current = levels.last().map(|(g, _)| g).unwrap_or(finest);
        if current.len() <= threshold {
            break;
        }
        let (coarse, cmap) = coarsen(current, rng, max_vertex_weight, restrict.as_deref());
        let before = current.len();
        if coarse.len() == before {
            break;
        }
        if let Some(r) = restrict.as_mut() {
            let mut next = vec![0u32; coarse.len()];
            for (v, &c) in cmap.iter().enumerate() {
                next[c as usize] = r[v];
            }
            *r = next;
        }
        let stalled = coarse.len() as f64 > 0.95 * before as f64;
        levels.push((coarse, cmap));
        if stalled {
            break;
        }
    }

    let coarsest = levels.last().map(|(g, _)| g).unwrap_or(finest);

    let mut part = match restrict {
        Some(mut part) => {
            refine(coarsest, &mut part, limits);
            part
        }
        None => initial_partition(coarsest, limits, rng),
    };

    // Uncoarsening.
    for i in (0..levels.len()).rev() {
        let cmap = &levels[i].1;
        let finer = if i == 0 { finest } else { &levels[i - 1].0 };
        part = cmap.iter().map(|&c| part[c as usize]).collect();
        refine(finer, &mut part, limits);
    }
    part
}

/// Best of several seeded candidates from simultaneous region growing and
/// recursive bisection.
fn initial_partition(g: &WeightedGraph, limits: &[u64], rng: &mut ChaCha8Rng) -> Vec<u32> {
    let parts = limits.len();
    let mut best: Option<((u64, u64), Vec<u32>)> = None;
    for attempt in 0..2 * INITIAL_TRIES {
        let mut part = if attempt % 2 == 0 {
            grow_regions(g, parts, rng)
        } else {
            recursive_bisection(g, parts, limits[0], rng)
        };
        refine(g, &mut part, limits);
        let key = quality(g, &part, limits);
        if best.as_ref().is_none_or(|(k, _)| key < *k) {
            best = Some((key, part));
        }
    }
    best.expect("at least one initial try").1
}

fn max_part_weight(total: u64, parts: usize, epsilon: f64) -> u64 {
    let p = parts as u64;
    let even = total.div_ceil(p);
    let slack = ((1.0 + epsilon) * total as f64 / parts as f64).floor() as u64;
    even.max(slack)
}

/// Undirected CSR with vertex and edge weights.
#[derive(Debug, Clone)]
struct WeightedGraph {
    xadj: Vec<usize>,
    adj: Vec<u32>,
    ew: Vec<u64>,
    vw: Vec<u64>,
}

impl WeightedGraph {
    fn from_graph(graph: &Graph) -> Self {
        let n = graph.vertex_count();
        let mut pairs: Vec<(u32, u32)> = graph
            .edges()
            .iter()
            .filter(|e| e.src != e.dst)
            .flat_map(|e| [(e.src, e.dst), (e.dst, e.src)])
            .collect();
        pairs.sort_unstable();
        let mut xadj = vec![0usize; n + 1];
        let mut adj = Vec::new();
        let mut ew: Vec<u64> = Vec::new();
        let mut last: Option<(u32, u32)> = None;
        for (s, d) in pairs {
            if last == Some((s, d)) {
                *ew.last_mut().expect("previous entry") += 1;
                continue;
            }
            last = Some((s, d));
            adj.push(d);
            ew.push(1);
            xadj[s as usize + 1] += 1;
        }
        for i in 0..n {
            xadj[i + 1] += xadj[i];
        }
        WeightedGraph { xadj, adj, ew, vw: vec![1; n] }
    }

    fn len(&self) -> usize {
        self.vw.len()
    }

    fn neighbors(&self, v: usize) -> impl Iterator<Item = (usize, u64)> + '_ {
        let r = self.xadj[v]..self.xadj[v + 1];
        self.adj[r.clone()].iter().zip(&self.ew[r]).map(|(&u, &w)| (u as usize, w))
    }

    /// Subgraph on `verts`; local vertex i is `verts[i]`.
    fn induced(&self, verts: &[usize]) -> WeightedGraph {
        let mut local = vec![UNASSIGNED; self.len()];
        for (i, &v) in verts.iter().enumerate() {
            local[v] = i as u32;
        }
        let mut xadj = Vec::with_capacity(verts.len() + 1);
        xadj.push(0);
        let mut adj = Vec::new();
        let mut ew = Vec::new();
        for &v in verts {
            for (u, w) in self.neighbors(v) {
                if local[u] != UNASSIGNED {
                    adj.push(local[u]);
                    ew.push(w);
                }
            }
            xadj.push(adj.len());
        }
        WeightedGraph { xadj, adj, ew, vw: verts.iter().map(|&v| self.vw[v]).collect() }
    }

    /// Weighted cut; every undirected edge is stored twice.
    fn cut(&self, part: &[u32]) -> u64 {
        let mut total = 0;
        for v in 0..self.len() {
            for (u, w) in self.neighbors(v) {
                if part[u] != part[v] {
                    total += w;
                }
            }
        }
        total / 2
    }
}

fn part_weights(g: &WeightedGraph, part: &[u32], parts: usize) -> Vec<u64> {
    let mut pw = vec![0u64; parts];
    for (v, &p) in part.iter().enumerate() {
        pw[p as usize] += g.vw[v];
    }
    pw
}

/// One level of heavy-edge matching. Returns the coarse graph and the
/// fine-to-coarse vertex map.
/// With `restrict`, only vertices in the same partition are matched.
fn coarsen(
    g: &WeightedGraph,
    rng: &mut ChaCha8Rng,
    max_vertex_weight: u64,
    restrict: Option<&[u32]>,
) -> (WeightedGraph, Vec<u32>) {
    let n = g.len();
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(rng);

    let mut mate = vec![UNASSIGNED; n];
    for &v in &order {
        if mate[v] != UNASSIGNED {
            continue;
        }
        let mut best: Option<(u64, usize)> = None;
        for (u, w) in g.neighbors(v) {
            if u == v || mate[u] != UNASSIGNED || g.vw[u] + g.vw[v] > max_vertex_weight {
                continue;
            }
            if restrict.is_some_and(|r| r[u] != r[v]) {
                continue;
            }
            // heavier edge wins, lower id on ties
            if best.is_none_or(|(bw, bu)| w > bw || (w == bw && u < bu)) {
                best = Some((w, u));
            }
        }
        match best {
            Some((_, u)) => {
                mate[v] = u as u32;
                mate[u] = v as u32;
            }
            None => mate[v] = v as u32,
        }
    }

    let mut cmap = vec![UNASSIGNED; n];
    let mut cn = 0u32;
    for &v in &order {
        if cmap[v] == UNASSIGNED {
            cmap[v] = cn;
            cmap[mate[v] as usize] = cn;
            cn += 1;
        }
    }

    let cn = cn as usize;
    let mut members: Vec<Vec<usize>> = vec![Vec::with_capacity(2); cn];
    for v in 0..n {
        members[cmap[v] as usize].push(v);
    }
    let mut vw = vec![0u64; cn];
    let mut xadj = Vec::with_capacity(cn + 1);
    xadj.push(0);
    let mut adj = Vec::new();
    let mut ew = Vec::new();
    let mut slot = vec![usize::MAX; cn];
    for (c, group) in members.iter().enumerate() {
        let start = adj.len();
        for &v in group {
            vw[c] += g.vw[v];
            for (u, w) in g.neighbors(v) {
                let cu = cmap[u] as usize;
                if cu == c {
                    continue;
                }
                if slot[cu] == usize::MAX || slot[cu] < start {
                    slot[cu] = adj.len();
                    adj.push(cu as u32);
                    ew.push(w);
                } else {
                    ew[slot[cu]] += w;
                }
            }
        }
        xadj.push(adj.len());
    }
    (WeightedGraph { xadj, adj, ew, vw }, cmap)
}

/// Grows all partitions simultaneously; the lightest partition with a frontier
/// takes its most strongly connected frontier vertex next.
///
/// Seeds start spread out and are then re-centered a few times: each region's
/// deepest vertex (farthest from the region boundary) seeds the next round.
fn grow_regions(g: &WeightedGraph, parts: usize, rng: &mut ChaCha8Rng) -> Vec<u32> {
    let mut seeds = spread_seeds(g, parts, rng);
    let mut part = grow_from(g, parts, &seeds);
    for _ in 0..RECENTER_ROUNDS {
        let next = region_centers(g, &part, parts, &seeds);
        if next == seeds {
            break;
        }
        seeds = next;
        part = grow_from(g, parts, &seeds);
    }
    part
}

/// Deepest vertex of each region by multi-source BFS from its boundary.
fn region_centers(g: &WeightedGraph, part: &[u32], parts: usize, old: &[usize]) -> Vec<usize> {
    let n = g.len();
    let mut depth = vec![usize::MAX; n];
    let mut queue = VecDeque::new();
    for v in 0..n {
        if g.neighbors(v).any(|(u, _)| part[u] != part[v]) {
            depth[v] = 0;
            queue.push_back(v);
        }
    }
    while let Some(v) = queue.pop_front() {
        for (u, _) in g.neighbors(v) {
            if part[u] == part[v] && depth[u] == usize::MAX {
                depth[u] = depth[v] + 1;
                queue.push_back(u);
            }
        }
    }
    let mut centers: Vec<Option<(usize, usize)>> = vec![None; parts];
    for v in 0..n {
        // regions without boundary (whole components) keep depth MAX; treat as 0
        let d = if depth[v] == usize::MAX { 0 } else { depth[v] };
        let p = part[v] as usize;
        if centers[p].is_none_or(|(bd, _)| d > bd) {
            centers[p] = Some((d, v));
        }
    }
    centers.iter().zip(old).map(|(c, &o)| c.map_or(o, |(_, v)| v)).collect()
}

fn grow_from(g: &WeightedGraph, parts: usize, seeds: &[usize]) -> Vec<u32> {
    let n = g.len();
    let mut part = vec![UNASSIGNED; n];
    let mut pw = vec![0u64; parts];

    // conn[v] holds (partition, weight) pairs for unassigned v.
    let mut conn: Vec<Vec<(u32, u64)>> = vec![Vec::new(); n];
    let mut heaps: Vec<BinaryHeap<(u64, Reverse<usize>)>> = vec![BinaryHeap::new(); parts];
    let mut assigned = 0usize;
    let mut cursor = 0usize;

    let assign = |v: usize,
                      p: usize,
                      part: &mut Vec<u32>,
                      pw: &mut Vec<u64>,
                      conn: &mut Vec<Vec<(u32, u64)>>,
                      heaps: &mut Vec<BinaryHeap<(u64, Reverse<usize>)>>| {
        part[v] = p as u32;
        pw[p] += g.vw[v];
        conn[v] = Vec::new();
        for (u, w) in g.neighbors(v) {
            if part[u] != UNASSIGNED {
                continue;
            }
            let entry = match conn[u].iter_mut().find(|(q, _)| *q as usize == p) {
                Some(e) => {
                    e.1 += w;
                    e.1
                }
                None => {
                    conn[u].push((p as u32, w));
                    w
                }
            };
            heaps[p].push((entry, Reverse(u)));
        }
    };

    for (p, &s) in seeds.iter().enumerate() {
        assign(s, p, &mut part, &mut pw, &mut conn, &mut heaps);
        assigned += 1;
    }

    while assigned < n {
        // Drop stale heap tops.
        for (p, heap) in heaps.iter_mut().enumerate() {
            while let Some(&(w, Reverse(v))) = heap.peek() {
                let live = part[v] == UNASSIGNED
                    && conn[v].iter().any(|&(q, cw)| q as usize == p && cw == w);
                if live {
                    break;
                }
                heap.pop();
            }
        }
        let grower = (0..parts)
            .filter(|&p| !heaps[p].is_empty())
            .min_by_key(|&p| (pw[p], p));
        let (v, p) = match grower {
            Some(p) => {
                let (_, Reverse(v)) = heaps[p].pop().expect("non-empty heap");
                (v, p)
            }
            None => {
                // Disconnected remainder: lightest partition takes the lowest unassigned id.
                while part[cursor] != UNASSIGNED {
                    cursor += 1;
                }
                let p = (0..parts).min_by_key(|&p| (pw[p], p)).expect("parts >= 1");
                (cursor, p)
            }
        };
        assign(v, p, &mut part, &mut pw, &mut conn, &mut heaps);
        assigned += 1;
    }
    part
}

/// Splits `parts` ways by repeated bisection. A side destined for `k` parts
/// may weigh up to `k * max_weight`.
fn recursive_bisection(g: &WeightedGraph, parts: usize, max_weight: u64, rng: &mut ChaCha8Rng) -> Vec<u32> {
    let mut part = vec![0u32; g.len()];
    let all: Vec<usize> = (0..g.len()).collect();
    split(g, &all, 0, parts, max_weight, rng, &mut part);
    part
}

fn split(
    g: &WeightedGraph,
    verts: &[usize],
    first: u32,
    k: usize,
    max_weight: u64,
    rng: &mut ChaCha8Rng,
    out: &mut [u32],
) {
    if k == 1 || verts.is_empty() {
        for &v in verts {
            out[v] = first;
        }
        return;
    }
    let k1 = k / 2;
    let sub = g.induced(verts);
    let side = bisect(&sub, k1, k - k1, max_weight, rng);
    let (left, right): (Vec<usize>, Vec<usize>) = (0..verts.len()).partition(|&i| side[i] == 0);
    let left: Vec<usize> = left.into_iter().map(|i| verts[i]).collect();
    let right: Vec<usize> = right.into_iter().map(|i| verts[i]).collect();
    split(g, &left, first, k1, max_weight, rng, out);
    split(g, &right, first + k1 as u32, k - k1, max_weight, rng, out);
}

/// Greedy graph growing bisection: side 0 absorbs the frontier vertex with
/// the best cut gain until it reaches its share of the weight, then FM.
fn bisect(g: &WeightedGraph, k1: usize, k2: usize, max_weight: u64, rng: &mut ChaCha8Rng) -> Vec<u32> {
    let n = g.len();
    let total: u64 = g.vw.iter().sum();
    let target = (total * k1 as u64).div_ceil((k1 + k2) as u64);
    let share = |k: usize| (total * k as u64).div_ceil((k1 + k2) as u64);
    let tolerance = |k: usize| (share(k) as f64 * BISECTION_TOLERANCE).ceil() as u64;
    let limits = [
        (share(k1) + tolerance(k1)).min(k1 as u64 * max_weight),
        (share(k2) + tolerance(k2)).min(k2 as u64 * max_weight),
    ];
    let degree: Vec<i64> = (0..n).map(|v| g.neighbors(v).map(|(_, w)| w as i64).sum()).collect();

    let mut best: Option<(u64, Vec<u32>)> = None;
    for _ in 0..BISECTION_TRIES {
        let mut side = vec![1u32; n];
        let mut gain = vec![0i64; n];
        let mut buckets = GainBuckets::new(n);
        let mut grown = 0u64;
        while grown < target {
            let v = match buckets.pop() {
                Some((v, _)) => v,
                None => {
                    let rest: Vec<usize> = (0..n).filter(|&v| side[v] == 1).collect();
                    match rest.choose(rng) {
                        Some(&v) => v,
                        None => break,
                    }
                }
            };
            side[v] = 0;
            grown += g.vw[v];
            for (u, w) in g.neighbors(v) {
                if side[u] == 1 {
                    if buckets.key[u].is_none() {
                        gain[u] = -degree[u];
                    }
                    gain[u] += 2 * w as i64;
                    buckets.set(u, Some(gain[u]));
                }
            }
        }
        let cut = g.cut(&side);
        if best.as_ref().is_none_or(|(c, _)| cut < *c) {
            best = Some((cut, side));
        }
    }
    let mut side = best.expect("at least one try").1;
    refine(g, &mut side, &limits);
    side
}

/// First seed uniformly at random, each further seed as far (in hops) from the
/// chosen ones as possible; unreachable vertices count as farthest.
fn spread_seeds(g: &WeightedGraph, parts: usize, rng: &mut ChaCha8Rng) -> Vec<usize> {
    let n = g.len();
    let mut seeds = vec![rng.gen_range(0..n)];
    let mut dist = vec![usize::MAX; n];
    let mut queue = VecDeque::new();
    while seeds.len() < parts {
        let last = *seeds.last().expect("non-empty");
        dist[last] = 0;
        queue.push_back(last);
        while let Some(v) = queue.pop_front() {
            for (u, _) in g.neighbors(v) {
                if dist[u] > dist[v] + 1 {
                    dist[u] = dist[v] + 1;
                    queue.push_back(u);
                }
            }
        }
        let next = (0..n)
            .filter(|v| !seeds.contains(v))
            .max_by_key(|&v| (dist[v], Reverse(v)))
            .expect("parts <= n");
        seeds.push(next);
    }
    seeds
}

/// Rebalance, then boundary FM passes until a pass gains nothing or the cap is hit.
fn refine(g: &WeightedGraph, part: &mut [u32], limits: &[u64]) {
    let mut pw = part_weights(g, part, limits.len());
    rebalance(g, part, &mut pw, limits);
    for _ in 0..MAX_PASSES_PER_LEVEL {
        if fm_pass(g, part, &mut pw, limits) <= 0 {
            break;
        }
    }
}

/// Per-partition connectivity of `v`: (weight inside its own partition, external weights).
fn connectivity(g: &WeightedGraph, part: &[u32], v: usize, ext: &mut Vec<(u32, u64)>) -> u64 {
    ext.clear();
    let own = part[v];
    let mut internal = 0;
    for (u, w) in g.neighbors(v) {
        let q = part[u];
        if q == own {
            internal += w;
        } else if let Some(e) = ext.iter_mut().find(|(p, _)| *p == q) {
            e.1 += w;
        } else {
            ext.push((q, w));
        }
    }
    internal
}

/// Moves vertices out of overweight partitions, choosing the move that hurts the cut least.
fn rebalance(g: &WeightedGraph, part: &mut [u32], pw: &mut [u64], limits: &[u64]) {
    let parts = pw.len();
    let mut ext = Vec::new();
    loop {
        let heavy = (0..parts)
            .max_by_key(|&p| (pw[p] as i64 - limits[p] as i64, Reverse(p)))
            .expect("parts >= 1");
        if pw[heavy] <= limits[heavy] {
            return;
        }
        let mut best: Option<(i64, usize, usize)> = None;
        for v in (0..g.len()).filter(|&v| part[v] as usize == heavy) {
            let internal = connectivity(g, part, v, &mut ext) as i64;
            for to in 0..parts {
                if to == heavy || pw[to] + g.vw[v] > limits[to] {
                    continue;
                }
                let gain = ext.iter().find(|(p, _)| *p as usize == to).map_or(0, |e| e.1 as i64) - internal;
                if best.is_none_or(|(bg, bv, bt)| (gain, Reverse(v), Reverse(to)) > (bg, Reverse(bv), Reverse(bt))) {
                    best = Some((gain, v, to));
                }
            }
        }
        let Some((_, v, to)) = best else {
            // Coarse vertices too heavy to move anywhere; finer levels retry.
            return;
        };
        pw[heavy] -= g.vw[v];
        pw[to] += g.vw[v];
        part[v] = to as u32;
    }
}

struct GainBuckets {
    buckets: BTreeMap<i64, BTreeSet<usize>>,
    key: Vec<Option<i64>>,
}

impl GainBuckets {
    fn new(n: usize) -> Self {
        GainBuckets { buckets: BTreeMap::new(), key: vec![None; n] }
    }

    fn set(&mut self, v: usize, gain: Option<i64>) {
        if self.key[v] == gain {
            return;
        }
        if let Some(old) = self.key[v] {
            let bucket = self.buckets.get_mut(&old).expect("bucket exists");
            bucket.remove(&v);
            if bucket.is_empty() {
                self.buckets.remove(&old);
            }
        }
        if let Some(new) = gain {
            self.buckets.entry(new).or_default().insert(v);
        }
        self.key[v] = gain;
    }

    /// Highest gain, lowest vertex id.
    fn pop(&mut self) -> Option<(usize, i64)> {
        let (&gain, bucket) = self.buckets.iter_mut().next_back()?;
        let v = *bucket.iter().next().expect("buckets are never empty");
        self.set(v, None);
        Some((v, gain))
    }
}

/// One boundary FM pass with best-prefix rollback. Returns the cut reduction kept.
///
/// Moves may overfill a target partition by at most one maximum vertex weight;
/// only prefixes where every partition stays within its limit (or no heavier
/// than at the start of the pass) are eligible to be kept.
fn fm_pass(g: &WeightedGraph, part: &mut [u32], pw: &mut [u64], limits: &[u64]) -> i64 {
    let n = g.len();
    let parts = pw.len();
    let slack = g.vw.iter().copied().max().unwrap_or(1);
    let feasible: Vec<u64> = limits.iter().zip(pw.iter()).map(|(&l, &w)| l.max(w)).collect();
    let stall_limit = (n / 100).max(400);

    let mut ext = Vec::new();
    let best_move = |v: usize, part: &[u32], pw: &[u64], ext: &mut Vec<(u32, u64)>| -> Option<(i64, usize)> {
        let internal = connectivity(g, part, v, ext) as i64;
        let mut best: Option<(i64, usize)> = None;
        for &(to, w) in ext.iter() {
            let to = to as usize;
            if pw[to] + g.vw[v] > limits[to] + slack {
                continue;
            }
            let gain = w as i64 - internal;
            if best.is_none_or(|(bg, bt)| gain > bg || (gain == bg && to < bt)) {
                best = Some((gain, to));
            }
        }
        best
    };

    let mut buckets = GainBuckets::new(n);
    for v in 0..n {
        buckets.set(v, best_move(v, part, pw, &mut ext).map(|(gain, _)| gain));
    }

    let mut locked = vec![false; n];
    let mut moves: Vec<(usize, u32)> = Vec::new();
    let mut cumulative = 0i64;
    let mut best_gain = 0i64;
    let mut best_len = 0usize;

    while let Some((v, gain)) = buckets.pop() {
        let Some((actual, to)) = best_move(v, part, pw, &mut ext) else {
            continue;
        };
        if actual != gain {
            buckets.set(v, Some(actual));
            continue;
        }
        let from = part[v];
        pw[from as usize] -= g.vw[v];
        pw[to] += g.vw[v];
        part[v] = to as u32;
        locked[v] = true;
        moves.push((v, from));
        cumulative += gain;

        if cumulative > best_gain && pw.iter().zip(&feasible).all(|(w, f)| w <= f) {
            best_gain = cumulative;
            best_len = moves.len();
        }
        if moves.len() - best_len > stall_limit {
            break;
        }
        for (u, _) in g.neighbors(v) {
            if !locked[u] {
                buckets.set(u, best_move(u, part, pw, &mut ext).map(|(gain, _)| gain));
            }
        }
    }

    for &(v, from) in moves[best_len..].iter().rev() {
        let cur = part[v] as usize;
        pw[cur] -= g.vw[v];
        pw[from as usize] += g.vw[v];
        part[v] = from;
    }
    debug_assert!(parts == pw.len());
    best_gain
}
