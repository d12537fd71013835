//! Route computation for BC-DSR.
//!
//! Same group: least-cost path over the predefined intra-group weights.
//! Different groups: walk a chain of groups from source to destination,
//! forcing each group's leader onto the route. Segments are searched on the
//! centrality-weighted graph and confined to the two groups they join, so a
//! route never enters a group without passing its leader. The chain is the
//! fewest-group walk over groups whose leaders can reach each other inside
//! the pair, lower group indices first among equals.

use std::collections::{BTreeMap, BTreeSet, VecDeque};

use thiserror::Error;

use super::TopologySnapshot;
use crate::graph::{shortest_path_within, ConnectivityGraph, WeightedGraph};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum RouteFailure {
    #[error("group {0} has no leader in the snapshot")]
    NoLeader(u32),
    #[error("no path from {from} to {to}")]
    Unreachable { from: usize, to: usize },
    #[error("no chain of linked groups from group {0} to group {1}")]
    NoChain(u32, u32),
    #[error("snapshot too small for centrality weights")]
    TooSmall,
}

fn reaches_within(graph: &ConnectivityGraph, from: usize, to: usize, groups: [u32; 2]) -> bool {
    let mut seen = vec![false; graph.node_count()];
    let mut stack = vec![from];
    seen[from] = true;
    while let Some(u) = stack.pop() {
        if u == to {
            return true;
        }
        for &v in graph.neighbors(u) {
            if !seen[v] && groups.contains(&graph.group(v)) {
                seen[v] = true;
                stack.push(v);
            }
        }
    }
    false
}

/// Groups from `from` to `to`, inclusive, where each consecutive pair of
/// leaders is connected through members of those two groups.
pub fn group_chain(graph: &ConnectivityGraph, from: u32, to: u32) -> Option<Vec<u32>> {
    let groups: BTreeSet<u32> = (0..graph.node_count()).map(|n| graph.group(n)).collect();
    let mut parent: BTreeMap<u32, u32> = BTreeMap::from([(from, from)]);
    let mut queue = VecDeque::from([from]);
    while let Some(g) = queue.pop_front() {
        if g == to {
            let mut chain = vec![to];
            while *chain.last().unwrap() != from {
                chain.push(parent[chain.last().unwrap()]);
            }
            chain.reverse();
            return Some(chain);
        }
        let Some(lg) = graph.leader_of(g) else { continue };
        for &h in &groups {
            if parent.contains_key(&h) {
                continue;
            }
            let Some(lh) = graph.leader_of(h) else { continue };
            if reaches_within(graph, lg, lh, [g, h]) {
                parent.insert(h, g);
                queue.push_back(h);
            }
        }
    }
    None
}

fn segment(
    weights: &WeightedGraph,
    from: usize,
    to: usize,
    groups: &[u32],
    route: &mut Vec<usize>,
) -> Result<(), RouteFailure> {
    let graph = weights.graph();
    let seg = shortest_path_within(weights, from, to, |n| groups.contains(&graph.group(n)))
        .ok_or(RouteFailure::Unreachable { from, to })?;
    route.extend_from_slice(&seg.nodes[1..]);
    Ok(())
}

pub fn establish_route(src: usize, dst: usize, snapshot: &TopologySnapshot) -> Result<Vec<usize>, RouteFailure> {
    let graph = snapshot.graph();
    if src == dst {
        return Ok(vec![src]);
    }
    let (gs, gd) = (graph.group(src), graph.group(dst));
    let mut route = vec![src];

    if gs == gd {
        segment(snapshot.intra_weights(), src, dst, &[gs], &mut route)?;
        return Ok(route);
    }

    let weights = snapshot.centrality_weights().ok_or(RouteFailure::TooSmall)?;
    for g in [gs, gd] {
        graph.leader_of(g).ok_or(RouteFailure::NoLeader(g))?;
    }
    let chain = group_chain(graph, gs, gd).ok_or(RouteFailure::NoChain(gs, gd))?;
    let mut at = src;
    let mut prev_group = gs;
    for &g in &chain {
        let leader = graph.leader_of(g).expect("chained groups have leaders");
        if leader != at {
            segment(weights, at, leader, &[prev_group, g], &mut route)?;
            at = leader;
        }
        prev_group = g;
    }
    if at != dst {
        segment(snapshot.intra_weights(), at, dst, &[gd], &mut route)?;
    }
    Ok(route)
}
