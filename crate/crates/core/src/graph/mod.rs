//! Connectivity snapshots and the centrality machinery built on them.

mod centrality;
mod path;

use std::fmt::Write as _;

use thiserror::Error;

use crate::geom::Vec3;
use crate::mobility::{NodeState, Role};

pub use centrality::{betweenness, shortest_path_counts, CentralityScores, PathCounts};
pub use path::{least_cost_path, shortest_path_within, Route};

/// Floor applied to `C_B(u) + C_B(v)` before inverting it into an edge weight.
pub const WEIGHT_EPSILON: f64 = 1e-6;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GraphError {
    #[error("betweenness normalisation needs at least 3 nodes, graph has {0}")]
    TooFewNodes(usize),
    #[error("node {node} listed at index {index}; node ids must be dense and ordered")]
    SparseIds { node: u32, index: usize },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct NodeInfo {
    pub group: u32,
    pub role: Role,
}

/// Undirected unit-disk graph of one instant.
#[derive(Debug, Clone, PartialEq)]
pub struct ConnectivityGraph {
    nodes: Vec<NodeInfo>,
    adjacency: Vec<Vec<usize>>,
    snapshot_time: f64,
    comm_range: f64,
}

impl ConnectivityGraph {
    /// Graph from an explicit edge list; every node in group 0 as ordinary.
    pub fn from_edges(n: usize, edges: &[(usize, usize)]) -> Self {
        let nodes = vec![NodeInfo { group: 0, role: Role::Ordinary }; n];
        Self::with_nodes(nodes, edges)
    }

    pub fn with_nodes(nodes: Vec<NodeInfo>, edges: &[(usize, usize)]) -> Self {
        let n = nodes.len();
        let mut adjacency = vec![Vec::new(); n];
        for &(u, v) in edges {
            assert!(u < n && v < n, "edge ({u}, {v}) out of range");
            if u == v || adjacency[u].contains(&v) {
                continue;
            }
            adjacency[u].push(v);
            adjacency[v].push(u);
        }
        for list in &mut adjacency {
            list.sort_unstable();
        }
        ConnectivityGraph {
            nodes,
            adjacency,
            snapshot_time: 0.0,
            comm_range: f64::INFINITY,
        }
    }

    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    pub fn edge_count(&self) -> usize {
        self.adjacency.iter().map(Vec::len).sum::<usize>() / 2
    }

    pub fn neighbors(&self, node: usize) -> &[usize] {
        &self.adjacency[node]
    }

    pub fn has_edge(&self, u: usize, v: usize) -> bool {
        self.adjacency[u].binary_search(&v).is_ok()
    }

    pub fn degree(&self, node: usize) -> usize {
        self.adjacency[node].len()
    }

    pub fn info(&self, node: usize) -> NodeInfo {
        self.nodes[node]
    }

    pub fn group(&self, node: usize) -> u32 {
        self.nodes[node].group
    }

    pub fn snapshot_time(&self) -> f64 {
        self.snapshot_time
    }

    pub fn comm_range(&self) -> f64 {
        self.comm_range
    }

    /// Edges as `(u, v)` with `u < v`, in ascending order.
    pub fn edges(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.adjacency
            .iter()
            .enumerate()
            .flat_map(|(u, list)| list.iter().filter(move |&&v| v > u).map(move |&v| (u, v)))
    }

    /// Leader of `group`, if the snapshot has one.
    pub fn leader_of(&self, group: u32) -> Option<usize> {
        self.nodes
            .iter()
            .position(|info| info.group == group && info.role == Role::Leader)
    }
}

/// Builds the snapshot graph: an edge joins every pair of nodes at most
/// `comm_range` apart (boundary inclusive).
pub fn build_connectivity(
    states: &[NodeState],
    comm_range: f64,
    snapshot_time: f64,
) -> Result<ConnectivityGraph, GraphError> {
    for (index, s) in states.iter().enumerate() {
        if s.node_id as usize != index {
            return Err(GraphError::SparseIds { node: s.node_id, index });
        }
    }
    let positions: Vec<Vec3> = states.iter().map(|s| s.position).collect();
    let nodes = states
        .iter()
        .map(|s| NodeInfo { group: s.group_id, role: s.role })
        .collect();
    let mut g = ConnectivityGraph::with_nodes(nodes, &[]);
    g.comm_range = comm_range;
    g.snapshot_time = snapshot_time;
    for u in 0..positions.len() {
        for v in (u + 1)..positions.len() {
            if positions[u].distance(positions[v]) <= comm_range {
                g.adjacency[u].push(v);
                g.adjacency[v].push(u);
            }
        }
    }
    for list in &mut g.adjacency {
        list.sort_unstable();
    }
    Ok(g)
}

/// Snapshot graph with a positive weight on every edge.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightedGraph {
    graph: ConnectivityGraph,
    /// Parallel to `graph.adjacency`.
    weights: Vec<Vec<f64>>,
}

impl WeightedGraph {
    /// Every edge weighs 1 (hop count).
    pub fn unit(graph: &ConnectivityGraph) -> Self {
        let weights = graph.adjacency.iter().map(|l| vec![1.0; l.len()]).collect();
        WeightedGraph { graph: graph.clone(), weights }
    }

    /// Every edge weighs its Euclidean length.
    pub fn euclidean(graph: &ConnectivityGraph, positions: &[Vec3]) -> Self {
        let weights = graph
            .adjacency
            .iter()
            .enumerate()
            .map(|(u, l)| l.iter().map(|&v| positions[u].distance(positions[v]).max(f64::MIN_POSITIVE)).collect())
            .collect();
        WeightedGraph { graph: graph.clone(), weights }
    }

    pub fn graph(&self) -> &ConnectivityGraph {
        &self.graph
    }

    pub fn weight(&self, u: usize, v: usize) -> Option<f64> {
        let i = self.graph.adjacency[u].binary_search(&v).ok()?;
        Some(self.weights[u][i])
    }

    /// `(neighbor, weight)` pairs of `node`.
    pub fn weighted_neighbors(&self, node: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        self.graph.adjacency[node]
            .iter()
            .copied()
            .zip(self.weights[node].iter().copied())
    }

    /// Tab-free text dump for fixtures: snapshot time, per-node centrality
    /// and per-edge weight.
    pub fn dump(&self, scores: &CentralityScores) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "snapshot_time,{}", self.graph.snapshot_time);
        let _ = writeln!(out, "kind,a,b,value");
        for (n, cb) in scores.values().iter().enumerate() {
            let _ = writeln!(out, "node,{n},,{cb}");
        }
        for (u, v) in self.graph.edges() {
            let _ = writeln!(out, "edge,{u},{v},{}", self.weight(u, v).unwrap_or(f64::NAN));
        }
        out
    }
}

/// Weights each edge by the inverse of its endpoints' summed centrality,
/// with the sum floored at `epsilon`.
pub fn weight_edges(graph: &ConnectivityGraph, scores: &CentralityScores, epsilon: f64) -> WeightedGraph {
    let cb = scores.values();
    let weights = graph
        .adjacency
        .iter()
        .enumerate()
        .map(|(u, list)| list.iter().map(|&v| 1.0 / (cb[u] + cb[v]).max(epsilon)).collect())
        .collect();
    WeightedGraph { graph: graph.clone(), weights }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn states(points: &[Vec3]) -> Vec<NodeState> {
        points
            .iter()
            .enumerate()
            .map(|(i, &position)| NodeState { node_id: i as u32, group_id: 0, role: Role::Ordinary, position })
            .collect()
    }

    #[test]
    fn boundary_distance_is_connected() {
        let g = build_connectivity(&states(&[Vec3::ZERO, Vec3::new(250.0, 0.0, 0.0)]), 250.0, 0.0).unwrap();
        assert!(g.has_edge(0, 1));
        let g = build_connectivity(&states(&[Vec3::ZERO, Vec3::new(251.0, 0.0, 0.0)]), 250.0, 0.0).unwrap();
        assert_eq!(g.edge_count(), 0);
    }

    #[test]
    fn collinear_chain_is_a_path() {
        let pts = [Vec3::ZERO, Vec3::new(100.0, 0.0, 0.0), Vec3::new(200.0, 0.0, 0.0)];
        let g = build_connectivity(&states(&pts), 100.0, 0.0).unwrap();
        assert_eq!(g.edges().collect::<Vec<_>>(), vec![(0, 1), (1, 2)]);
        assert!(!g.has_edge(0, 0));
    }

    #[test]
    fn sparse_ids_rejected() {
        let mut s = states(&[Vec3::ZERO, Vec3::ZERO]);
        s[1].node_id = 5;
        assert!(matches!(build_connectivity(&s, 1.0, 0.0), Err(GraphError::SparseIds { .. })));
    }

    #[test]
    fn weight_arithmetic() {
        let g = ConnectivityGraph::from_edges(3, &[(0, 1), (1, 2)]);
        let s = CentralityScores::from_values(vec![0.5, 0.5, 0.0]);
        let w = weight_edges(&g, &s, WEIGHT_EPSILON);
        assert_eq!(w.weight(0, 1), Some(1.0));
        assert_eq!(w.weight(1, 2), Some(2.0));
        let s = CentralityScores::from_values(vec![1.0, 0.0, 0.0]);
        assert_eq!(weight_edges(&g, &s, WEIGHT_EPSILON).weight(0, 1), Some(1.0));
    }

    #[test]
    fn zero_centrality_edge_gets_capped_weight() {
        let g = ConnectivityGraph::from_edges(2, &[(0, 1)]);
        let s = CentralityScores::from_values(vec![0.0, 0.0]);
        let w = weight_edges(&g, &s, WEIGHT_EPSILON).weight(0, 1).unwrap();
        assert!(w.is_finite());
        assert_eq!(w, 1.0 / WEIGHT_EPSILON);
    }

    #[test]
    fn dump_lists_nodes_and_edges() {
        let g = ConnectivityGraph::from_edges(3, &[(0, 1), (1, 2)]);
        let s = betweenness(&g).unwrap();
        let text = weight_edges(&g, &s, WEIGHT_EPSILON).dump(&s);
        assert!(text.contains("node,1,,1\n"));
        assert!(text.contains("edge,0,1,1\n"));
    }
}
