//! Partition-parallel conjunctive query matching on edge-labeled multigraphs.
//!
//! The graph is split into disjoint partitions, each served exclusively by one
//! worker at a time. A query compiles to a pipeline of operators; partial
//! matches travel between partitions as messages, addressed to one partition
//! (unicast) or all of them (broadcast) through a routing table.
//!
//! ```
//! use partmatch_core::prelude::*;
//!
//! let graph = parse_graph_str("A l B\nA l C\nD l B\nD l C").unwrap();
//! let query = parse_query_str("V1 * V2\nV1 * V3\nV4 * V3\nV4 * V2").unwrap();
//! let built = build_pair(&graph, &DesignConfig::new(Design::Hybrid, 2).redundancy(true)).unwrap();
//! let qep = compile(&query, true, Semantics::Injective).unwrap();
//! let run = execute(&qep, &built, &EngineConfig::with_workers(2), &MonotonicClock::new()).unwrap();
//! assert_eq!(run.results.len(), 4);
//! assert_eq!(run.metrics.broadcast_fanout, 2);
//! ```

pub mod clock;
pub mod engine;
pub mod error;
pub mod fixtures;
pub mod graph;
pub mod oracle;
pub mod partition;
pub mod query;
pub mod routing;
pub mod store;
pub mod synth;

pub use error::{Error, Result};

pub mod prelude {
    pub use crate::clock::{Clock, MonotonicClock};
    pub use crate::engine::{execute, EngineConfig, Execution, Metrics, ResultSet};
    pub use crate::error::{Error, Result};
    pub use crate::graph::{parse_graph, parse_graph_str, Edge, Graph, LabelFilter, VertexId};
    pub use crate::oracle::brute_force;
    pub use crate::partition::{balance, edge_cut, hash_assign, kway_assign, relabel_virtual, Assignment};
    pub use crate::query::{compile, parse_query, parse_query_str, ConjunctiveQuery, Qep, Semantics};
    pub use crate::routing::{build_pair, BuiltDesign, Design, DesignConfig, RoutingTable};
    pub use crate::synth::{synth_graph, SynthModel, SynthParams};
}
