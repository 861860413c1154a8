//! Asynchronous, partition-exclusive execution of query plans.
//!
//! Each partition owns an inbound queue. Workers are attached to nodes and
//! only serve partitions placed on their node: a worker claims a partition
//! with pending messages, drains up to `batch_size` of them, runs the
//! operator each message names, and routes the successor states. The query
//! completes when the outstanding-message counter drops to zero.

mod metrics;
mod ops;
mod results;
mod termination;

pub use metrics::Metrics;
pub use ops::{apply_op, dispatch, BoundPlan, MatchState, OpOutput, Targets, UNBOUND};
pub use results::{translate_results, ResultSet};
pub use termination::Termination;

use std::sync::atomic::{AtomicBool, AtomicU64, AtomicUsize, Ordering};
use std::sync::Mutex;
use std::thread;

use crossbeam::queue::SegQueue;
use crossbeam::utils::Backoff;

use crate::clock::Clock;
use crate::error::{Error, Result};
use crate::graph::VertexId;
use crate::partition::PartitionId;
use crate::query::{Addressing, Qep};
use crate::routing::{BuiltDesign, RouteTimer, RoutingPair};
use crate::store::PartitionSet;
use metrics::WorkerMetrics;

pub const DEFAULT_BATCH_SIZE: usize = 64;
pub const DEFAULT_BUCKET_WIDTH_NS: u64 = 1_000_000;

static NEXT_QUERY_ID: AtomicU64 = AtomicU64::new(1);

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct EngineConfig {
    pub workers_per_node: usize,
    pub nodes: usize,
    /// Messages drained per partition claim.
    pub batch_size: usize,
    pub bucket_width_ns: u64,
}

impl Default for EngineConfig {
    fn default() -> Self {
        EngineConfig {
            workers_per_node: 1,
            nodes: 1,
            batch_size: DEFAULT_BATCH_SIZE,
            bucket_width_ns: DEFAULT_BUCKET_WIDTH_NS,
        }
    }
}

impl EngineConfig {
    pub fn with_workers(workers_per_node: usize) -> Self {
        EngineConfig { workers_per_node, ..Default::default() }
    }

    pub fn total_workers(&self) -> usize {
        self.workers_per_node * self.nodes
    }

    fn validate(&self) -> Result<()> {
        if self.workers_per_node == 0 || self.nodes == 0 {
            return Err(Error::config("workers and nodes must be at least 1"));
        }
        if self.batch_size == 0 {
            return Err(Error::config("batch size must be at least 1"));
        }
        if self.bucket_width_ns == 0 {
            return Err(Error::config("histogram bucket width must be positive"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone)]
pub struct Message {
    pub query_id: u64,
    /// Operator to run on arrival.
    pub op_index: usize,
    pub state: MatchState,
    pub target: PartitionId,
}

#[derive(Debug, Clone)]
pub struct Execution {
    /// Matches in original vertex ids.
    pub results: ResultSet,
    pub metrics: Metrics,
}

/// Runs `qep` over a built design and translates results to original ids.
pub fn execute(qep: &Qep, built: &BuiltDesign, config: &EngineConfig, clock: &dyn Clock) -> Result<Execution> {
    let plan = BoundPlan::new(qep, &built.graph);
    let (raw, mut metrics) = run_plan(&plan, &built.partitions, &built.routing, config, clock)?;
    let results = results::collect_results(raw, built.routing.dictionary.as_deref())?;
    metrics.results_distinct = results.len() as u64;
    Ok(Execution { results, metrics })
}

/// Runs a bound plan; results stay in the store's id space.
pub fn execute_plan(
    plan: &BoundPlan,
    partitions: &PartitionSet,
    routing: &RoutingPair,
    config: &EngineConfig,
    clock: &dyn Clock,
) -> Result<(ResultSet, Metrics)> {
    let (raw, mut metrics) = run_plan(plan, partitions, routing, config, clock)?;
    let results = results::collect_results(raw, None)?;
    metrics.results_distinct = results.len() as u64;
    Ok((results, metrics))
}

fn run_plan(
    plan: &BoundPlan,
    partitions: &PartitionSet,
    routing: &RoutingPair,
    config: &EngineConfig,
    clock: &dyn Clock,
) -> Result<(Vec<Vec<VertexId>>, Metrics)> {
    config.validate()?;
    let qep = &plan.qep;
    if qep.needs_reverse() && (!partitions.has_redundancy() || !routing.has_redundancy()) {
        return Err(Error::config("plan routes by target but the design was built without redundancy"));
    }
    if routing.num_parts() != partitions.len() {
        return Err(Error::config(format!(
            "routing table covers {} partitions, store has {}",
            routing.num_parts(),
            partitions.len()
        )));
    }
    if let Some(p) = (0..partitions.len()).find(|&p| partitions.node_of(p) >= config.nodes) {
        return Err(Error::config(format!(
            "partition {p} is placed on node {}, but only {} nodes run workers",
            partitions.node_of(p),
            config.nodes
        )));
    }

    let p = partitions.len();
    let shared = Shared {
        plan,
        partitions,
        routing,
        clock,
        config,
        query_id: NEXT_QUERY_ID.fetch_add(1, Ordering::Relaxed),
        queues: (0..p).map(|_| SegQueue::new()).collect(),
        claims: (0..p).map(|_| AtomicBool::new(false)).collect(),
        occupancy: (0..p).map(|_| AtomicUsize::new(0)).collect(),
        termination: Termination::new(),
        abort: AtomicBool::new(false),
        failure: Mutex::new(None),
        start_ns: clock.now_ns(),
    };

    let workers = config.total_workers();
    let outputs: Vec<(WorkerMetrics, Vec<MatchState>)> = thread::scope(|scope| {
        let handles: Vec<_> = (0..workers)
            .map(|w| {
                let shared = &shared;
                scope.spawn(move || shared.run_worker(w))
            })
            .collect();
        shared.seed();
        handles.into_iter().map(|h| h.join().expect("worker panicked")).collect()
    });

    if let Some(err) = shared.failure.lock().expect("failure lock").take() {
        return Err(err);
    }

    let runtime_ns = clock.now_ns().saturating_sub(shared.start_ns);
    let mut worker_metrics = Vec::with_capacity(workers);
    let mut tuples = Vec::new();
    for (m, results) in outputs {
        worker_metrics.push(m);
        tuples.extend(results.into_iter().map(MatchState::into_vec));
    }
    let mut metrics = Metrics::merge(qep.ops.len(), worker_metrics);
    // Seeding is the initial broadcast: one state fanned out to every partition.
    metrics.msgs_sent[0] += p as u64;
    metrics.broadcast_fanout += p as u64;
    metrics.broadcast_states += 1;
    metrics.runtime_ns = runtime_ns;
    metrics.bucket_width_ns = config.bucket_width_ns;
    metrics.completion_signals = shared.termination.signals();
    metrics.outstanding_at_end = shared.termination.outstanding();
    metrics.queues_empty = shared.queues.iter().all(SegQueue::is_empty);
    Ok((tuples, metrics))
}

struct Shared<'a> {
    plan: &'a BoundPlan,
    partitions: &'a PartitionSet,
    routing: &'a RoutingPair,
    clock: &'a dyn Clock,
    config: &'a EngineConfig,
    query_id: u64,
    queues: Vec<SegQueue<Message>>,
    claims: Vec<AtomicBool>,
    /// Workers currently inside each partition; must never exceed one.
    occupancy: Vec<AtomicUsize>,
    termination: Termination,
    abort: AtomicBool,
    failure: Mutex<Option<Error>>,
    start_ns: u64,
}

impl Shared<'_> {
    fn seed(&self) {
        let p = self.partitions.len();
        self.termination.add(p);
        let state = MatchState::unbound(self.plan.variable_count());
        for target in 0..p {
            self.queues[target].push(Message { query_id: self.query_id, op_index: 0, state: state.clone(), target });
        }
        if let Err(e) = self.termination.seeding_complete() {
            self.fail(e);
        }
    }

    fn fail(&self, err: Error) {
        let mut slot = self.failure.lock().expect("failure lock");
        slot.get_or_insert(err);
        self.abort.store(true, Ordering::Release);
    }

    fn run_worker(&self, worker: usize) -> (WorkerMetrics, Vec<MatchState>) {
        let node = worker / self.config.workers_per_node;
        let local_rank = worker % self.config.workers_per_node;
        let mut local: Vec<PartitionId> = (0..self.partitions.len()).filter(|&p| self.partitions.node_of(p) == node).collect();
        if !local.is_empty() {
            let shift = local_rank % local.len();
            local.rotate_left(shift);
        }

        let mut ctx = WorkerContext {
            node,
            metrics: WorkerMetrics::new(self.plan.op_count()),
            timer: RouteTimer::default(),
            results: Vec::new(),
            batch: Vec::with_capacity(self.config.batch_size),
            outgoing: Vec::new(),
            produced: Vec::new(),
        };
        let backoff = Backoff::new();
        while !self.termination.is_complete() && !self.abort.load(Ordering::Acquire) {
            let mut worked = false;
            for &p in &local {
                if self.queues[p].is_empty() {
                    continue;
                }
                if self.claims[p].compare_exchange(false, true, Ordering::Acquire, Ordering::Relaxed).is_err() {
                    continue;
                }
                worked = true;
                if let Err(e) = self.serve(p, &mut ctx) {
                    self.fail(e);
                    break;
                }
            }
            if worked {
                backoff.reset();
            } else if backoff.is_completed() {
                thread::yield_now();
            } else {
                backoff.snooze();
            }
        }
        ctx.metrics.routing_ns = ctx.timer.total_ns;
        ctx.metrics.route_calls = ctx.timer.calls;
        (ctx.metrics, ctx.results)
    }

    /// Processes one batch from a claimed partition and releases the claim.
    fn serve(&self, p: PartitionId, ctx: &mut WorkerContext) -> Result<()> {
        if self.occupancy[p].fetch_add(1, Ordering::AcqRel) != 0 {
            ctx.metrics.exclusivity_violations += 1;
        }
        ctx.batch.clear();
        while ctx.batch.len() < self.config.batch_size {
            match self.queues[p].pop() {
                Some(m) => ctx.batch.push(m),
                None => break,
            }
        }
        let store = self.partitions.partition(p);
        let mut outcome = Ok(());
        let batch = std::mem::take(&mut ctx.batch);
        for msg in &batch {
            if let Err(e) = self.process(msg, store, ctx) {
                outcome = Err(e);
                break;
            }
        }
        self.occupancy[p].fetch_sub(1, Ordering::AcqRel);
        self.claims[p].store(false, Ordering::Release);
        outcome?;

        let bucket = (self.clock.now_ns().saturating_sub(self.start_ns) / self.config.bucket_width_ns) as usize;
        if !ctx.outgoing.is_empty() {
            ctx.metrics.record_generated(bucket, ctx.outgoing.len() as u64);
        }
        self.termination.add(ctx.outgoing.len());
        for m in ctx.outgoing.drain(..) {
            self.queues[m.target].push(m);
        }
        let done = batch.len();
        ctx.batch = batch;
        self.termination.finish(done)
    }

    fn process(&self, msg: &Message, store: &crate::store::PartitionStore, ctx: &mut WorkerContext) -> Result<()> {
        debug_assert_eq!(msg.query_id, self.query_id);
        debug_assert_eq!(msg.target, store.id());
        let op_index = msg.op_index;
        ctx.metrics.processed[op_index] += 1;
        ctx.produced.clear();
        ops::apply_op_into(self.plan, op_index, store, &msg.state, &mut ctx.produced)?;

        if self.plan.is_last(op_index) {
            ctx.metrics.results += ctx.produced.len() as u64;
            ctx.results.append(&mut ctx.produced);
            return Ok(());
        }

        let next = op_index + 1;
        let broadcast = self.plan.qep.ops[next].addressing == Addressing::Broadcast;
        for state in ctx.produced.drain(..) {
            let targets = if broadcast {
                Targets::All(self.partitions.len())
            } else {
                dispatch(self.plan, next, &state, self.routing, self.clock, &mut ctx.timer)?
            };
            match targets {
                Targets::One(target) => {
                    ctx.metrics.unicasts += 1;
                    ctx.metrics.sent[next] += 1;
                    if self.partitions.node_of(target) == ctx.node {
                        ctx.metrics.local_sends += 1;
                    } else {
                        ctx.metrics.remote_sends += 1;
                    }
                    ctx.outgoing.push(Message { query_id: self.query_id, op_index: next, state, target });
                }
                Targets::All(n) => {
                    ctx.metrics.broadcast_states += 1;
                    ctx.metrics.broadcast_fanout += n as u64;
                    ctx.metrics.sent[next] += n as u64;
                    for target in 0..n {
                        if self.partitions.node_of(target) == ctx.node {
                            ctx.metrics.local_sends += 1;
                        } else {
                            ctx.metrics.remote_sends += 1;
                        }
                        ctx.outgoing.push(Message { query_id: self.query_id, op_index: next, state: state.clone(), target });
                    }
                }
            }
        }
        Ok(())
    }
}

struct WorkerContext {
    node: usize,
    metrics: WorkerMetrics,
    timer: RouteTimer,
    results: Vec<MatchState>,
    batch: Vec<Message>,
    outgoing: Vec<Message>,
    produced: Vec<MatchState>,
}
