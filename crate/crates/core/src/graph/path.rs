use std::cmp::Ordering;
use std::collections::BinaryHeap;

use super::WeightedGraph;

/// A node path and its summed edge weight.
#[derive(Debug, Clone, PartialEq)]
pub struct Route {
    pub nodes: Vec<usize>,
    pub cost: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
struct Frontier {
    cost: f64,
    node: usize,
}

impl Eq for Frontier {}

impl Ord for Frontier {
    fn cmp(&self, other: &Self) -> Ordering {
        // Min-heap on cost, then on node index for a deterministic tie order.
        other
            .cost
            .total_cmp(&self.cost)
            .then_with(|| other.node.cmp(&self.node))
    }
}

impl PartialOrd for Frontier {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Dijkstra from `src` to `dst` visiting only nodes for which `allowed`
/// holds (`src` and `dst` are always allowed).
pub fn shortest_path_within<F>(graph: &WeightedGraph, src: usize, dst: usize, allowed: F) -> Option<Route>
where
    F: Fn(usize) -> bool,
{
    if src == dst {
        return Some(Route { nodes: vec![src], cost: 0.0 });
    }
    let n = graph.graph().node_count();
    let mut best = vec![f64::INFINITY; n];
    let mut parent = vec![usize::MAX; n];
    let mut settled = vec![false; n];
    let mut heap = BinaryHeap::new();
    best[src] = 0.0;
    heap.push(Frontier { cost: 0.0, node: src });

    while let Some(Frontier { cost, node }) = heap.pop() {
        if settled[node] {
            continue;
        }
        settled[node] = true;
        if node == dst {
            break;
        }
        for (next, w) in graph.weighted_neighbors(node) {
            if settled[next] || (next != dst && !allowed(next)) {
                continue;
            }
            let c = cost + w;
            if c < best[next] {
                best[next] = c;
                parent[next] = node;
                heap.push(Frontier { cost: c, node: next });
            }
        }
    }
    if !settled[dst] {
        return None;
    }
    let mut nodes = vec![dst];
    let mut at = dst;
    while at != src {
        at = parent[at];
        nodes.push(at);
    }
    nodes.reverse();
    Some(Route { nodes, cost: best[dst] })
}

/// Minimum-weight route `src -> w1 -> ... -> wk -> dst`, built segment by
/// segment. `None` when any segment is disconnected.
pub fn least_cost_path(graph: &WeightedGraph, src: usize, dst: usize, waypoints: &[usize]) -> Option<Route> {
    let mut route = Route { nodes: vec![src], cost: 0.0 };
    let mut at = src;
    for &next in waypoints.iter().chain(std::iter::once(&dst)) {
        let segment = shortest_path_within(graph, at, next, |_| true)?;
        route.nodes.extend_from_slice(&segment.nodes[1..]);
        route.cost += segment.cost;
        at = next;
    }
    Some(route)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::ConnectivityGraph;

    #[test]
    fn identity_route() {
        let g = WeightedGraph::unit(&ConnectivityGraph::from_edges(2, &[(0, 1)]));
        let r = least_cost_path(&g, 1, 1, &[]).unwrap();
        assert_eq!(r.nodes, vec![1]);
        assert_eq!(r.cost, 0.0);
    }

    #[test]
    fn unit_weights_give_hop_count() {
        let g = WeightedGraph::unit(&ConnectivityGraph::from_edges(4, &[(0, 1), (1, 2), (2, 3), (0, 3)]));
        let r = least_cost_path(&g, 0, 2, &[]).unwrap();
        assert_eq!(r.cost, 2.0);
        assert_eq!(r.nodes, vec![0, 1, 2]);
    }

    #[test]
    fn waypoints_are_visited_in_order() {
        let g = WeightedGraph::unit(&ConnectivityGraph::from_edges(4, &[(0, 1), (1, 2), (2, 3), (0, 3)]));
        let r = least_cost_path(&g, 0, 2, &[3]).unwrap();
        assert_eq!(r.nodes, vec![0, 3, 2]);
        assert_eq!(r.cost, 2.0);
    }

    #[test]
    fn disconnected_segment_is_none() {
        let g = WeightedGraph::unit(&ConnectivityGraph::from_edges(3, &[(0, 1)]));
        assert!(least_cost_path(&g, 0, 2, &[]).is_none());
        assert!(least_cost_path(&g, 0, 1, &[2]).is_none());
    }

    #[test]
    fn filter_excludes_nodes() {
        let g = WeightedGraph::unit(&ConnectivityGraph::from_edges(4, &[(0, 1), (1, 2), (0, 3), (3, 2)]));
        let r = shortest_path_within(&g, 0, 2, |n| n != 1).unwrap();
        assert_eq!(r.nodes, vec![0, 3, 2]);
        assert!(shortest_path_within(&g, 0, 2, |n| n == 0).is_none());
    }
}
