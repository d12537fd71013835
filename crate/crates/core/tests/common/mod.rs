#![allow(dead_code)]

use std::collections::{BTreeMap, BTreeSet};

use bcdsr::engine::PacketRow;
use bcdsr::geom::Vec3;
use bcdsr::graph::ConnectivityGraph;
use bcdsr::metrics::Fate;
use bcdsr::mobility::{parse_trace, Role};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Connected graph on `n` nodes: a random spanning tree plus each other
/// pair with probability `extra`.
pub fn random_connected(n: usize, extra: f64, rng: &mut ChaCha8Rng) -> ConnectivityGraph {
    let mut edges = BTreeSet::new();
    for v in 1..n {
        let u = rng.random_range(0..v);
        edges.insert((u, v));
    }
    for a in 0..n {
        for b in a + 1..n {
            if rng.random_bool(extra) {
                edges.insert((a, b));
            }
        }
    }
    ConnectivityGraph::from_edges(n, &edges.into_iter().collect::<Vec<_>>())
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn simple_paths(g: &ConnectivityGraph, at: usize, to: usize, path: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
    if at == to {
        out.push(path.clone());
        return;
    }
    for &v in g.neighbors(at) {
        if !path.contains(&v) {
            path.push(v);
            simple_paths(g, v, to, path, out);
            path.pop();
        }
    }
}

/// Every shortest path from `i` to `j`, found by listing all simple paths.
pub fn all_shortest_paths(g: &ConnectivityGraph, i: usize, j: usize) -> Vec<Vec<usize>> {
    let mut all = Vec::new();
    simple_paths(g, i, j, &mut vec![i], &mut all);
    let Some(best) = all.iter().map(Vec::len).min() else {
        return all;
    };
    all.retain(|p| p.len() == best);
    all
}

/// Betweenness by enumeration: for every ordered pair `(i, j)` avoiding
/// `n`, the fraction of shortest paths with `n` in their interior.
pub fn brute_betweenness(g: &ConnectivityGraph) -> Vec<f64> {
    let n = g.node_count();
    let norm = ((n - 1) * (n - 2)) as f64;
    let mut out = vec![0.0; n];
    for i in 0..n {
        for j in 0..n {
            if i == j {
                continue;
            }
            let paths = all_shortest_paths(g, i, j);
            if paths.is_empty() {
                continue;
            }
            for (mid, value) in out.iter_mut().enumerate() {
                if mid == i || mid == j {
                    continue;
                }
                let through = paths.iter().filter(|p| p[1..p.len() - 1].contains(&mid)).count();
                *value += through as f64 / paths.len() as f64;
            }
        }
    }
    out.iter_mut().for_each(|v| *v /= norm);
    out
}

/// Positions by (tick, node) and each node's group and role, read back
/// from a mobility trace.
pub struct MobilityTrace {
    pub positions: BTreeMap<(u64, usize), Vec3>,
    pub group: BTreeMap<usize, u32>,
    pub leader: BTreeMap<u32, usize>,
}

impl MobilityTrace {
    pub fn parse(text: &str) -> Self {
        let mut t = MobilityTrace { positions: BTreeMap::new(), group: BTreeMap::new(), leader: BTreeMap::new() };
        for row in parse_trace(text).expect("mobility trace parses") {
            let node = row.node.node_id as usize;
            t.positions.insert((row.tick, node), row.node.position);
            t.group.insert(node, row.node.group_id);
            if row.node.role == Role::Leader {
                t.leader.insert(row.node.group_id, node);
            }
        }
        t
    }
}

/// Delivered packets with a hop longer than `range` at its relay tick.
pub fn route_violations(packets: &[PacketRow], mob: &MobilityTrace, range: f64) -> Vec<String> {
    let mut bad = Vec::new();
    for p in packets.iter().filter(|p| p.fate == Fate::Delivered) {
        if p.ticks.len() + 1 != p.path.len() {
            bad.push(format!("packet {}: {} ticks for {} nodes", p.uid, p.ticks.len(), p.path.len()));
            continue;
        }
        for (k, w) in p.path.windows(2).enumerate() {
            let tick = p.ticks[k];
            let (a, b) = (mob.positions.get(&(tick, w[0])), mob.positions.get(&(tick, w[1])));
            match (a, b) {
                (Some(a), Some(b)) if a.distance(*b) <= range => {}
                (Some(a), Some(b)) => {
                    bad.push(format!("packet {}: hop {}-{} spans {:.1} m at tick {tick}", p.uid, w[0], w[1], a.distance(*b)))
                }
                _ => bad.push(format!("packet {}: no position for hop {}-{} at tick {tick}", p.uid, w[0], w[1])),
            }
        }
    }
    bad
}

/// Delivered cross-group packets missing the leader of a group their path
/// touches.
pub fn leader_violations(packets: &[PacketRow], mob: &MobilityTrace) -> (usize, Vec<String>) {
    let mut checked = 0;
    let mut bad = Vec::new();
    for p in packets.iter().filter(|p| p.fate == Fate::Delivered) {
        if mob.group[&p.src] == mob.group[&p.dst] {
            continue;
        }
        checked += 1;
        let groups: BTreeSet<u32> = p.path.iter().map(|n| mob.group[n]).collect();
        for g in groups {
            if !p.path.contains(&mob.leader[&g]) {
                bad.push(format!("packet {} path {:?} misses leader of group {g}", p.uid, p.path));
            }
        }
    }
    (checked, bad)
}
