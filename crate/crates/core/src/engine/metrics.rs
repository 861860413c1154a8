use std::io::Write;

/// Counters a single worker owns during execution.
#[derive(Debug, Clone, Default)]
pub(crate) struct WorkerMetrics {
    pub routing_ns: u64,
    pub route_calls: u64,
    pub sent: Vec<u64>,
    pub processed: Vec<u64>,
    pub broadcast_fanout: u64,
    pub broadcast_states: u64,
    pub unicasts: u64,
    pub local_sends: u64,
    pub remote_sends: u64,
    pub results: u64,
    pub histogram: Vec<u64>,
    pub exclusivity_violations: u64,
}

impl WorkerMetrics {
    pub fn new(ops: usize) -> Self {
        WorkerMetrics { sent: vec![0; ops], processed: vec![0; ops], ..Default::default() }
    }

    #[inline]
    pub fn record_generated(&mut self, bucket: usize, count: u64) {
        if self.histogram.len() <= bucket {
            self.histogram.resize(bucket + 1, 0);
        }
        self.histogram[bucket] += count;
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct Metrics {
    pub runtime_ns: u64,
    /// Time spent in routing tables, per worker.
    pub routing_ns: Vec<u64>,
    pub route_calls: Vec<u64>,
    /// Messages enqueued for each operator index (broadcast copies counted individually).
    pub msgs_sent: Vec<u64>,
    pub msgs_processed: Vec<u64>,
    /// Messages produced by broadcasts, including the initial seeding.
    pub broadcast_fanout: u64,
    /// States that were broadcast (each fans out to every partition).
    pub broadcast_states: u64,
    pub unicasts: u64,
    pub local_sends: u64,
    pub remote_sends: u64,
    /// Complete matches emitted, duplicates included.
    pub results_emitted: u64,
    pub results_distinct: u64,
    /// Messages generated per time bucket since query start.
    pub histogram: Vec<u64>,
    pub bucket_width_ns: u64,
    pub completion_signals: usize,
    pub outstanding_at_end: i64,
    pub queues_empty: bool,
    pub exclusivity_violations: u64,
}

impl Metrics {
    pub(crate) fn merge(ops: usize, workers: Vec<WorkerMetrics>) -> Self {
        let mut m = Metrics { msgs_sent: vec![0; ops], msgs_processed: vec![0; ops], ..Default::default() };
        for w in workers {
            m.routing_ns.push(w.routing_ns);
            m.route_calls.push(w.route_calls);
            for (acc, x) in m.msgs_sent.iter_mut().zip(&w.sent) {
                *acc += x;
            }
            for (acc, x) in m.msgs_processed.iter_mut().zip(&w.processed) {
                *acc += x;
            }
            m.broadcast_fanout += w.broadcast_fanout;
            m.broadcast_states += w.broadcast_states;
            m.unicasts += w.unicasts;
            m.local_sends += w.local_sends;
            m.remote_sends += w.remote_sends;
            m.results_emitted += w.results;
            m.exclusivity_violations += w.exclusivity_violations;
            if m.histogram.len() < w.histogram.len() {
                m.histogram.resize(w.histogram.len(), 0);
            }
            for (acc, x) in m.histogram.iter_mut().zip(&w.histogram) {
                *acc += x;
            }
        }
        m
    }

    pub fn total_sent(&self) -> u64 {
        self.msgs_sent.iter().sum()
    }

    pub fn total_processed(&self) -> u64 {
        self.msgs_processed.iter().sum()
    }

    pub fn total_routing_ns(&self) -> u64 {
        self.routing_ns.iter().sum()
    }

    /// Mean routing time per worker.
    pub fn mean_routing_ns(&self) -> f64 {
        if self.routing_ns.is_empty() {
            0.0
        } else {
            self.total_routing_ns() as f64 / self.routing_ns.len() as f64
        }
    }

    pub const CSV_HEADER: &'static str = "metric,op_index,worker,value";

    /// Rows of the `metric,op_index,worker,value` table; empty fields where a
    /// column does not apply.
    pub fn csv_rows(&self) -> Vec<String> {
        let mut rows = vec![format!("runtime_ns,,,{}", self.runtime_ns)];
        for (w, ns) in self.routing_ns.iter().enumerate() {
            rows.push(format!("routing_ns,,{w},{ns}"));
        }
        for (i, n) in self.msgs_sent.iter().enumerate() {
            rows.push(format!("msgs_sent,{i},,{n}"));
        }
        for (i, n) in self.msgs_processed.iter().enumerate() {
            rows.push(format!("msgs_processed,{i},,{n}"));
        }
        rows.push(format!("broadcast_fanout,,,{}", self.broadcast_fanout));
        rows.push(format!("unicasts,,,{}", self.unicasts));
        rows.push(format!("local_sends,,,{}", self.local_sends));
        rows.push(format!("remote_sends,,,{}", self.remote_sends));
        rows.push(format!("results,,,{}", self.results_emitted));
        rows.push(format!("results_distinct,,,{}", self.results_distinct));
        for (i, n) in self.histogram.iter().enumerate() {
            rows.push(format!("bucket_{i},,,{n}"));
        }
        rows
    }

    pub fn write_csv<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        writeln!(out, "{}", Self::CSV_HEADER)?;
        for row in self.csv_rows() {
            writeln!(out, "{row}")?;
        }
        Ok(())
    }
}
