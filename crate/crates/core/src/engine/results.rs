use std::collections::BTreeSet;

use std::io::Write;

use crate::error::{Error, Result};
use crate::graph::{Graph, VertexId};

/// Distinct complete bindings, one vertex per query variable in declaration order.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ResultSet {
    pub tuples: BTreeSet<Vec<VertexId>>,
}

impl ResultSet {
    pub fn len(&self) -> usize {
        self.tuples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tuples.is_empty()
    }

    pub fn contains(&self, tuple: &[VertexId]) -> bool {
        self.tuples.contains(tuple)
    }

    /// One tab-separated line per match, vertex tokens from `graph`.
    pub fn write_tsv<W: Write>(&self, graph: &Graph, mut out: W) -> Result<()> {
        for tuple in &self.tuples {
            let mut line = String::new();
            for (i, &v) in tuple.iter().enumerate() {
                if i > 0 {
                    line.push('\t');
                }
                line.push_str(
                    graph
                        .vertex_token(v)
                        .ok_or_else(|| Error::Internal(format!("result vertex {v} not in graph")))?,
                );
            }
            writeln!(out, "{line}")?;
        }
        Ok(())
    }

    pub fn to_tsv(&self, graph: &Graph) -> Result<String> {
        let mut buf = Vec::new();
        self.write_tsv(graph, &mut buf)?;
        Ok(String::from_utf8(buf).expect("tokens are UTF-8"))
    }
}

impl FromIterator<Vec<VertexId>> for ResultSet {
    fn from_iter<I: IntoIterator<Item = Vec<VertexId>>>(iter: I) -> Self {
        ResultSet { tuples: iter.into_iter().collect() }
    }
}

/// Maps virtual ids back to original ids; passes through without a dictionary.
pub fn translate_results(raw: ResultSet, dictionary: Option<&[VertexId]>) -> Result<ResultSet> {
    if dictionary.is_none() {
        return Ok(raw);
    }
    collect_results(raw.tuples.into_iter().collect(), dictionary)
}

/// Translates (if a dictionary is given), sorts and deduplicates raw tuples.
pub(crate) fn collect_results(mut tuples: Vec<Vec<VertexId>>, dictionary: Option<&[VertexId]>) -> Result<ResultSet> {
    if let Some(dict) = dictionary {
        for v in tuples.iter_mut().flat_map(|t| t.iter_mut()) {
            *v = *dict
                .get(*v as usize)
                .ok_or_else(|| Error::Internal(format!("virtual id {v} outside dictionary of {}", dict.len())))?;
        }
    }
    // Sorted input lets the set be bulk-built instead of inserted one by one.
    tuples.sort_unstable();
    tuples.dedup();
    Ok(ResultSet { tuples: tuples.into_iter().collect() })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::parse_graph_str;

    #[test]
    fn translate_through_dictionary() {
        let raw: ResultSet = [vec![1, 3]].into_iter().collect();
        let out = translate_results(raw.clone(), Some(&[0, 2, 1, 3])).unwrap();
        assert!(out.contains(&[2, 3]));
        assert_eq!(translate_results(raw.clone(), None).unwrap(), raw);
        assert!(translate_results([vec![7]].into_iter().collect(), Some(&[0, 1])).is_err());
    }

    #[test]
    fn tsv_uses_tokens() {
        let g = parse_graph_str("x l y").unwrap();
        let rs: ResultSet = [vec![1, 0], vec![0, 1]].into_iter().collect();
        assert_eq!(rs.to_tsv(&g).unwrap(), "x\ty\ny\tx\n");
    }
}
