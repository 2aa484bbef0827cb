use serde::Serialize;

use super::generate::EdgeList;
use crate::error::{Error, Result};

/// Exact degree statistics of an edge list.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct GraphStats {
    pub node_count: u64,
    pub edge_count: u64,
    pub directed: bool,
    pub self_loops: u64,
    /// `degree_histogram[d]` nodes have total degree `d` (in + out for
    /// directed graphs; a self-loop adds two).
    pub degree_histogram: Vec<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub in_degree_histogram: Option<Vec<u64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub out_degree_histogram: Option<Vec<u64>>,
}

fn histogram(degrees: &[u64]) -> Vec<u64> {
    let max = degrees.iter().copied().max().unwrap_or(0) as usize;
    let mut h = vec![0u64; max + 1];
    for &d in degrees {
        h[d as usize] += 1;
    }
    h
}

pub fn graph_stats(graph: &EdgeList) -> Result<GraphStats> {
    let n = usize::try_from(graph.node_count)
        .map_err(|_| Error::param("node count does not fit in memory"))?;
    let mut out_deg = vec![0u64; n];
    let mut in_deg = vec![0u64; n];
    let mut self_loops = 0;
    for (i, &(s, d)) in graph.edges.iter().enumerate() {
        if s >= graph.node_count || d >= graph.node_count {
            return Err(Error::Format(format!(
                "edge {i} ({s}, {d}) references a node >= node count {}",
                graph.node_count
            )));
        }
        out_deg[s as usize] += 1;
        in_deg[d as usize] += 1;
        if s == d {
            self_loops += 1;
        }
    }
    let total: Vec<u64> = out_deg.iter().zip(&in_deg).map(|(o, i)| o + i).collect();
    let (in_h, out_h) = if graph.directed {
        (Some(histogram(&in_deg)), Some(histogram(&out_deg)))
    } else {
        (None, None)
    };
    Ok(GraphStats {
        node_count: graph.node_count,
        edge_count: graph.edge_count(),
        directed: graph.directed,
        self_loops,
        degree_histogram: histogram(&total),
        in_degree_histogram: in_h,
        out_degree_histogram: out_h,
    })
}

impl GraphStats {
    pub fn max_degree(&self) -> u64 {
        self.degree_histogram.len().saturating_sub(1) as u64
    }

    /// Median degree over nodes with at least one edge.
    pub fn median_nonzero_degree(&self) -> Option<u64> {
        let nonzero: u64 = self.degree_histogram.iter().skip(1).sum();
        if nonzero == 0 {
            return None;
        }
        let mid = nonzero.div_ceil(2);
        let mut seen = 0;
        for (d, &c) in self.degree_histogram.iter().enumerate().skip(1) {
            seen += c;
            if seen >= mid {
                return Some(d as u64);
            }
        }
        None
    }

    pub fn degree_sum(&self) -> u64 {
        self.degree_histogram
            .iter()
            .enumerate()
            .map(|(d, &c)| d as u64 * c)
            .sum()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn path_graph() {
        let g = EdgeList::new(3, false, vec![(0, 1), (1, 2)]).unwrap();
        let s = graph_stats(&g).unwrap();
        assert_eq!(s.edge_count, 2);
        assert_eq!(s.degree_histogram, vec![0, 2, 1]);
        assert_eq!(s.degree_sum(), 4);
        assert_eq!(s.median_nonzero_degree(), Some(1));
        assert_eq!(s.max_degree(), 2);
    }

    #[test]
    fn isolated_nodes_counted() {
        let s = graph_stats(&EdgeList::new(5, false, vec![]).unwrap()).unwrap();
        assert_eq!(s.degree_histogram, vec![5]);
        assert_eq!(s.median_nonzero_degree(), None);
    }

    #[test]
    fn directed_totals_and_loops() {
        let g = EdgeList::new(3, true, vec![(0, 1), (0, 2), (2, 2)]).unwrap();
        let s = graph_stats(&g).unwrap();
        assert_eq!(s.self_loops, 1);
        let ins: u64 = s.in_degree_histogram.as_ref().unwrap().iter().enumerate().map(|(d, c)| d as u64 * c).sum();
        let outs: u64 = s.out_degree_histogram.as_ref().unwrap().iter().enumerate().map(|(d, c)| d as u64 * c).sum();
        assert_eq!((ins, outs), (3, 3));
    }

    #[test]
    fn out_of_range_ids() {
        let g = EdgeList {
            node_count: 2,
            directed: true,
            edges: vec![(0, 2)],
        };
        assert!(matches!(graph_stats(&g), Err(Error::Format(_))));
    }
}
