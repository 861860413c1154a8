//! Edge-labeled multigraph with interned vertex and label tokens.
//!
//! Vertices and labels get dense ids in order of first appearance. Edges are
//! kept in insertion order with exact duplicate triples collapsed, so a parsed
//! graph serializes back to text that re-parses to the identical graph.

use std::collections::{HashMap, HashSet};
use std::fmt;
use std::io::{BufRead, Write};

use crate::error::{Error, Result};

pub type VertexId = u32;
pub type LabelId = u32;

/// Token reserved for the wildcard label in queries. Never stored in a graph.
pub const WILDCARD: &str = "*";

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Edge {
    pub src: VertexId,
    pub label: LabelId,
    pub dst: VertexId,
}

impl Edge {
    pub const fn new(src: VertexId, label: LabelId, dst: VertexId) -> Self {
        Edge { src, label, dst }
    }
}

/// Label selector used by every adjacency access.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum LabelFilter {
    Any,
    Is(LabelId),
    /// A query label absent from the graph's dictionary: matches nothing.
    Nothing,
}

impl LabelFilter {
    #[inline]
    pub fn matches(self, label: LabelId) -> bool {
        match self {
            LabelFilter::Any => true,
            LabelFilter::Is(l) => l == label,
            LabelFilter::Nothing => false,
        }
    }
}

/// Bijection between string tokens and dense ids.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Dictionary {
    tokens: Vec<String>,
    index: HashMap<String, u32>,
}

impl Dictionary {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn from_tokens(tokens: Vec<String>) -> Result<Self> {
        let mut index = HashMap::with_capacity(tokens.len());
        for (i, tok) in tokens.iter().enumerate() {
            if index.insert(tok.clone(), i as u32).is_some() {
                return Err(Error::config(format!("duplicate token `{tok}`")));
            }
        }
        Ok(Dictionary { tokens, index })
    }

    pub fn intern(&mut self, token: &str) -> u32 {
        if let Some(&id) = self.index.get(token) {
            return id;
        }
        let id = self.tokens.len() as u32;
        self.tokens.push(token.to_owned());
        self.index.insert(token.to_owned(), id);
        id
    }

    pub fn id(&self, token: &str) -> Option<u32> {
        self.index.get(token).copied()
    }

    pub fn token(&self, id: u32) -> Option<&str> {
        self.tokens.get(id as usize).map(String::as_str)
    }

    pub fn tokens(&self) -> &[String] {
        &self.tokens
    }

    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tokens.is_empty()
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Graph {
    vertices: Dictionary,
    labels: Dictionary,
    edges: Vec<Edge>,
}

impl Graph {
    /// Builds a graph from already-interned parts.
    ///
    /// Duplicate triples are collapsed, keeping the first occurrence.
    pub fn from_parts(vertices: Dictionary, labels: Dictionary, edges: Vec<Edge>) -> Result<Self> {
        let n = vertices.len();
        let nl = labels.len();
        let mut seen = HashSet::with_capacity(edges.len());
        let mut kept = Vec::with_capacity(edges.len());
        for e in edges {
            if e.src as usize >= n || e.dst as usize >= n {
                return Err(Error::config(format!(
                    "edge ({}, {}, {}) references a vertex outside 0..{n}",
                    e.src, e.label, e.dst
                )));
            }
            if e.label as usize >= nl {
                return Err(Error::config(format!("edge label {} outside 0..{nl}", e.label)));
            }
            if seen.insert(e) {
                kept.push(e);
            }
        }
        Ok(Graph { vertices, labels, edges: kept })
    }

    /// Graph over `n` vertices named `v0..` and `labels` labels named `l0..`.
    pub fn with_numbered_tokens(n: usize, labels: usize, edges: Vec<Edge>) -> Result<Self> {
        let vertices = Dictionary::from_tokens((0..n).map(|i| format!("v{i}")).collect())?;
        let labels = Dictionary::from_tokens((0..labels).map(|i| format!("l{i}")).collect())?;
        Graph::from_parts(vertices, labels, edges)
    }

    pub fn vertex_count(&self) -> usize {
        self.vertices.len()
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn label_count(&self) -> usize {
        self.labels.len()
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn vertex_dict(&self) -> &Dictionary {
        &self.vertices
    }

    pub fn label_dict(&self) -> &Dictionary {
        &self.labels
    }

    pub fn vertex_id(&self, token: &str) -> Option<VertexId> {
        self.vertices.id(token)
    }

    pub fn vertex_token(&self, v: VertexId) -> Option<&str> {
        self.vertices.token(v)
    }

    pub fn label_id(&self, token: &str) -> Option<LabelId> {
        self.labels.id(token)
    }

    /// Resolves a query label token; `*` is the wildcard.
    pub fn label_filter(&self, token: &str) -> LabelFilter {
        if token == WILDCARD {
            return LabelFilter::Any;
        }
        match self.labels.id(token) {
            Some(l) => LabelFilter::Is(l),
            None => LabelFilter::Nothing,
        }
    }

    /// Writes the canonical text form: one `src label dst` line per edge, in edge order.
    pub fn write_text<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        for e in &self.edges {
            writeln!(
                out,
                "{} {} {}",
                self.vertices.tokens[e.src as usize],
                self.labels.tokens[e.label as usize],
                self.vertices.tokens[e.dst as usize]
            )?;
        }
        Ok(())
    }

    pub fn to_text(&self) -> String {
        let mut buf = Vec::new();
        self.write_text(&mut buf).expect("writing to a Vec cannot fail");
        String::from_utf8(buf).expect("tokens are UTF-8")
    }
}

impl fmt::Display for Graph {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_text())
    }
}

/// Parses `src label dst` lines. Blank lines and lines starting with `#` are skipped.
pub fn parse_graph<R: BufRead>(reader: R) -> Result<Graph> {
    let mut vertices = Dictionary::new();
    let mut labels = Dictionary::new();
    let mut edges = Vec::new();
    for (i, line) in reader.lines().enumerate() {
        let line = line?;
        let lineno = i + 1;
        let trimmed = line.trim();
        if trimmed.is_empty() || trimmed.starts_with('#') {
            continue;
        }
        let tokens: Vec<&str> = trimmed.split_whitespace().collect();
        let [src, label, dst] = tokens[..] else {
            return Err(Error::Parse {
                line: lineno,
                message: format!("expected `src label dst`, found {} tokens", tokens.len()),
            });
        };
        if label == WILDCARD {
            return Err(Error::ReservedToken { line: lineno });
        }
        let s = vertices.intern(src);
        let l = labels.intern(label);
        let d = vertices.intern(dst);
        edges.push(Edge::new(s, l, d));
    }
    Graph::from_parts(vertices, labels, edges)
}

pub fn parse_graph_str(text: &str) -> Result<Graph> {
    parse_graph(text.as_bytes())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures::EXAMPLE_GRAPH;

    #[test]
    fn interning_follows_first_appearance() {
        let g = parse_graph_str("A l B\nA l C").unwrap();
        assert_eq!(g.vertex_count(), 3);
        assert_eq!(g.edge_count(), 2);
        assert_eq!(g.label_count(), 1);
        assert_eq!(g.vertex_id("A"), Some(0));
        assert_eq!(g.vertex_id("B"), Some(1));
        assert_eq!(g.vertex_id("C"), Some(2));
    }

    #[test]
    fn duplicate_triples_collapse() {
        let g = parse_graph_str("A l B\nA l B").unwrap();
        assert_eq!(g.vertex_count(), 2);
        assert_eq!(g.edge_count(), 1);
    }

    #[test]
    fn parallel_edges_with_distinct_labels_are_kept() {
        let g = parse_graph_str("A x B\nA y B").unwrap();
        assert_eq!(g.edge_count(), 2);
        assert_eq!(g.label_count(), 2);
    }

    #[test]
    fn example_graph_shape() {
        let g = parse_graph_str(EXAMPLE_GRAPH).unwrap();
        assert_eq!(g.vertex_count(), 7);
        assert_eq!(g.edge_count(), 7);
        let ids: Vec<_> = ["A", "B", "C", "D", "E", "F", "G"]
            .iter()
            .map(|t| g.vertex_id(t).unwrap())
            .collect();
        assert_eq!(ids, vec![0, 1, 2, 3, 4, 5, 6]);
    }

    #[test]
    fn comments_and_blank_lines_are_ignored() {
        let g = parse_graph_str("# header\n\n  \nA l B\n   # indented\n").unwrap();
        assert_eq!(g.edge_count(), 1);
    }

    #[test]
    fn malformed_line_reports_line_number() {
        let err = parse_graph_str("A l B\nA l\n").unwrap_err();
        assert!(matches!(err, Error::Parse { line: 2, .. }), "{err:?}");
        let err = parse_graph_str("A l B C").unwrap_err();
        assert!(matches!(err, Error::Parse { line: 1, .. }));
    }

    #[test]
    fn wildcard_label_is_reserved() {
        let err = parse_graph_str("A l B\nA * B").unwrap_err();
        assert_eq!(err, Error::ReservedToken { line: 2 });
    }

    #[test]
    fn canonical_text_is_stable() {
        let text = "A x B\nA y C\nA x D\nD y A\n";
        let g = parse_graph_str(text).unwrap();
        assert_eq!(g.to_text(), text);
        assert_eq!(parse_graph_str(&g.to_text()).unwrap(), g);
    }

    #[test]
    fn from_parts_rejects_out_of_range_ids() {
        let err = Graph::with_numbered_tokens(2, 1, vec![Edge::new(0, 0, 2)]).unwrap_err();
        assert!(matches!(err, Error::Config(_)));
        let err = Graph::with_numbered_tokens(2, 1, vec![Edge::new(0, 1, 1)]).unwrap_err();
        assert!(matches!(err, Error::Config(_)));
    }

    #[test]
    fn label_filter_resolution() {
        let g = parse_graph_str("A l B").unwrap();
        assert_eq!(g.label_filter("*"), LabelFilter::Any);
        assert_eq!(g.label_filter("l"), LabelFilter::Is(0));
        assert_eq!(g.label_filter("zzz"), LabelFilter::Nothing);
        assert!(!LabelFilter::Nothing.matches(0));
    }
}
