//! Bundled example graph and the two reference queries.

/// Seven vertices A..G, one label: A->B, A->C, D->B, E->F, E->B, G->B, G->F.
pub const EXAMPLE_GRAPH: &str = include_str!("../../../data/example.graph");

/// Rectangle: two sources sharing two targets.
pub const QUAD_QUERY: &str = include_str!("../../../queries/quad.cq");

/// Five vertices, four edges: a two-hop path whose end is reached again by a second two-hop path.
pub const V_QUERY: &str = include_str!("../../../queries/v.cq");
