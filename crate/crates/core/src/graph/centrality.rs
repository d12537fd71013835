use std::collections::VecDeque;

use super::{ConnectivityGraph, GraphError};

/// Single-source shortest-path bookkeeping under hop-count distances.
#[derive(Debug, Clone, PartialEq)]
pub struct PathCounts {
    pub source: usize,
    /// Hop distance from `source`; `None` when unreachable.
    pub dist: Vec<Option<u32>>,
    /// Number of distinct shortest paths from `source`.
    pub sigma: Vec<u128>,
    /// Neighbours of each node that precede it on some shortest path.
    pub precursors: Vec<Vec<usize>>,
    /// Reached nodes in the order they left the queue.
    pub order: Vec<usize>,
}

impl PathCounts {
    /// True when every reachable `j != source` satisfies
    /// `sigma[j] == sum of sigma over its precursors`.
    pub fn counts_are_consistent(&self) -> bool {
        (0..self.sigma.len()).all(|j| {
            if j == self.source {
                return self.sigma[j] == 1 && self.dist[j] == Some(0);
            }
            let summed: u128 = self.precursors[j].iter().map(|&m| self.sigma[m]).sum();
            summed == self.sigma[j]
        })
    }
}

/// Breadth-first search from `source` accumulating path counts and
/// precursor sets. Nodes leave the queue in non-decreasing distance, so a
/// node's precursors are settled before it is.
pub fn shortest_path_counts(graph: &ConnectivityGraph, source: usize) -> PathCounts {
    let n = graph.node_count();
    let mut dist = vec![None; n];
    let mut sigma = vec![0u128; n];
    let mut precursors = vec![Vec::new(); n];
    dist[source] = Some(0);
    sigma[source] = 1;

    let mut order = Vec::with_capacity(n);
    let mut queue = VecDeque::from([source]);
    while let Some(m) = queue.pop_front() {
        order.push(m);
        let dm = dist[m].expect("queued nodes are reached");
        for &j in graph.neighbors(m) {
            match dist[j] {
                None => {
                    dist[j] = Some(dm + 1);
                    queue.push_back(j);
                    sigma[j] = sigma[m];
                    precursors[j].push(m);
                }
                Some(dj) if dj == dm + 1 => {
                    sigma[j] += sigma[m];
                    precursors[j].push(m);
                }
                Some(_) => {}
            }
        }
    }
    PathCounts { source, dist, sigma, precursors, order }
}

/// Normalised betweenness centrality of every node.
#[derive(Debug, Clone, PartialEq)]
pub struct CentralityScores {
    values: Vec<f64>,
}

impl CentralityScores {
    pub fn from_values(values: Vec<f64>) -> Self {
        CentralityScores { values }
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn graph_size(&self) -> usize {
        self.values.len()
    }

    pub fn get(&self, node: usize) -> f64 {
        self.values[node]
    }
}

/// Share of shortest paths between ordered pairs `(i, j)` avoiding `n`
/// that pass through `n`, divided by `(N - 1)(N - 2)`.
///
/// Accumulated per source: walking nodes away from `i` in reverse BFS
/// order, `delta(m) = sum over successors w of sigma_im / sigma_iw * (1 + delta(w))`
/// is the total share of `i -> j` paths through `m` over all `j`.
pub fn betweenness(graph: &ConnectivityGraph) -> Result<CentralityScores, GraphError> {
    let n = graph.node_count();
    if n < 3 {
        return Err(GraphError::TooFewNodes(n));
    }
    let norm = ((n - 1) * (n - 2)) as f64;
    let mut values = vec![0.0; n];
    let mut delta = vec![0.0f64; n];
    for source in 0..n {
        let t = shortest_path_counts(graph, source);
        for &w in &t.order {
            delta[w] = 0.0;
        }
        for &w in t.order.iter().rev() {
            let share = (1.0 + delta[w]) / t.sigma[w] as f64;
            for &m in &t.precursors[w] {
                delta[m] += t.sigma[m] as f64 * share;
            }
            if w != source {
                values[w] += delta[w];
            }
        }
    }
    for (mid, value) in values.iter_mut().enumerate() {
        *value /= norm;
        assert!(
            (0.0..=1.0 + 1e-12).contains(value),
            "centrality {value} of node {mid} escaped [0, 1]"
        );
    }
    Ok(CentralityScores { values })
}
