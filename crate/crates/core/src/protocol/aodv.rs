//! AODV-lite: flooded route requests with duplicate suppression, unicast
//! replies along the reverse path, one next hop per destination.

use std::collections::{BTreeMap, VecDeque};

use rand::Rng;

use super::cache::RouteStore;
use super::forward::{police, send_rerr};
use super::header::seq_newer;
use super::message::{DataMsg, Message, RrepMsg, RreqMsg};
use super::rerr::{handle_rerr, RerrAction, RerrMessage};
use super::{Ctx, NextHop, PacketType, ProtocolKind, Router, Timer};
use crate::metrics::DiscardReason;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct AodvRoute {
    pub next: usize,
    pub hops: usize,
}

/// Routing table of one node: a single next hop per destination.
#[derive(Debug, Clone)]
pub struct AodvTable {
    owner: usize,
    routes: BTreeMap<usize, AodvRoute>,
}

impl AodvTable {
    pub fn new(owner: usize) -> Self {
        AodvTable { owner, routes: BTreeMap::new() }
    }

    /// Installs a route, replacing any previous one for `dst`.
    pub fn install(&mut self, dst: usize, next: usize, hops: usize) {
        self.routes.insert(dst, AodvRoute { next, hops });
    }

    pub fn get(&self, dst: usize) -> Option<AodvRoute> {
        self.routes.get(&dst).copied()
    }

    pub fn remove(&mut self, dst: usize) {
        self.routes.remove(&dst);
    }

    pub fn len(&self) -> usize {
        self.routes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.routes.is_empty()
    }
}

impl RouteStore for AodvTable {
    fn invalidate_link(&mut self, u: usize, v: usize) -> usize {
        let before = self.routes.len();
        if self.owner == u {
            self.routes.retain(|_, r| r.next != v);
        } else if self.owner == v {
            self.routes.retain(|_, r| r.next != u);
        }
        before - self.routes.len()
    }

    fn invalidate(&mut self, src: usize, dst: usize) -> usize {
        if src == self.owner && self.routes.remove(&dst).is_some() {
            1
        } else {
            0
        }
    }
}

#[derive(Debug)]
pub(crate) struct Discovery {
    pub packets: VecDeque<DataMsg>,
    pub id: u8,
    pub attempts: u32,
}

/// Duplicate filter keyed by request originator.
#[derive(Debug, Clone, Default)]
pub(crate) struct SeenRequests(BTreeMap<usize, u8>);

impl SeenRequests {
    /// Records `(origin, id)`; false when it is not newer than the last one.
    pub fn admit(&mut self, origin: usize, id: u8) -> bool {
        match self.0.get(&origin) {
            Some(&last) if !seq_newer(id, last) => false,
            _ => {
                self.0.insert(origin, id);
                true
            }
        }
    }
}

pub(crate) fn jitter(ctx: &mut Ctx) -> u64 {
    let max = ctx.secs(ctx.config.broadcast_jitter);
    if max == 0 {
        0
    } else {
        ctx.rng.random_range(0..max)
    }
}

#[derive(Debug)]
pub struct AodvLite {
    tables: Vec<AodvTable>,
    seen: Vec<SeenRequests>,
    next_id: Vec<u8>,
    pending: BTreeMap<(usize, usize), Discovery>,
}

impl AodvLite {
    pub fn new(nodes: usize) -> Self {
        AodvLite {
            tables: (0..nodes).map(AodvTable::new).collect(),
            seen: vec![SeenRequests::default(); nodes],
            next_id: vec![0; nodes],
            pending: BTreeMap::new(),
        }
    }

    pub fn table(&self, node: usize) -> &AodvTable {
        &self.tables[node]
    }

    fn flood(&mut self, ctx: &mut Ctx, node: usize, dst: usize) -> u8 {
        self.next_id[node] = self.next_id[node].wrapping_add(1);
        let id = self.next_id[node];
        self.seen[node].admit(node, id);
        ctx.log(node, "rreq", id);
        let rreq = RreqMsg { origin: node, target: dst, id, route: vec![node], accumulate: false };
        ctx.send(node, NextHop::Broadcast, Message::Rreq(rreq));
        ctx.timer(node, ctx.secs(ctx.config.discovery_timeout), Timer::DiscoveryTimeout { dst, id });
        id
    }

    fn start_discovery(&mut self, ctx: &mut Ctx, node: usize, dst: usize, first: Option<DataMsg>) {
        if let Some(d) = self.pending.get_mut(&(node, dst)) {
            if let Some(data) = first {
                if d.packets.len() >= ctx.config.buffer_capacity {
                    ctx.discard(node, data, DiscardReason::NoRoute);
                } else {
                    d.packets.push_back(data);
                }
            }
            return;
        }
        let id = self.flood(ctx, node, dst);
        self.pending.insert(
            (node, dst),
            Discovery { packets: first.into_iter().collect(), id, attempts: 0 },
        );
    }

    /// Sends `data` one hop toward its destination from `node`, reporting a
    /// break upstream when no usable next hop exists.
    fn send_data(&mut self, ctx: &mut Ctx, node: usize, data: DataMsg) {
        if let Some(reason) = police(&data, ctx.tick(), ctx.config) {
            ctx.discard(node, data, reason);
            return;
        }
        if node == data.dst {
            ctx.deliver(node, data);
            return;
        }
        let route = self.tables[node].get(data.dst).filter(|r| ctx.snapshot.linked(node, r.next));
        match route {
            Some(r) if data.hops + 1 > ctx.config.max_hops => {
                let _ = r;
                ctx.discard(node, data, DiscardReason::HopLimit);
            }
            Some(r) => ctx.send(node, NextHop::Unicast(r.next), Message::Data(data)),
            None if node == data.src => {
                self.tables[node].remove(data.dst);
                let dst = data.dst;
                self.start_discovery(ctx, node, dst, Some(data));
            }
            None => {
                let next = self.tables[node].get(data.dst).map_or(data.dst, |r| r.next);
                self.tables[node].remove(data.dst);
                let rerr = RerrMessage::for_failure(&data.visited(node), next, data.dst);
                ctx.discard(node, data, DiscardReason::LinkBreak);
                send_rerr(ctx, node, rerr);
            }
        }
    }
}

impl Router for AodvLite {
    fn kind(&self) -> ProtocolKind {
        ProtocolKind::AodvLite
    }

    fn originate(&mut self, ctx: &mut Ctx, node: usize, data: DataMsg) {
        ctx.log(node, "originate", data.seq);
        if self.pending.contains_key(&(node, data.dst)) {
            let dst = data.dst;
            self.start_discovery(ctx, node, dst, Some(data));
            return;
        }
        self.send_data(ctx, node, data);
    }

    fn receive(&mut self, ctx: &mut Ctx, node: usize, from: usize, msg: Message) {
        match msg {
            Message::Rreq(mut rreq) => {
                if rreq.origin == node || !self.seen[node].admit(rreq.origin, rreq.id) {
                    return;
                }
                rreq.route.push(node);
                self.tables[node].install(rreq.origin, from, rreq.hops());
                if node == rreq.target {
                    ctx.log(node, "rrep", rreq.id);
                    let rrep = RrepMsg {
                        origin: rreq.origin,
                        target: node,
                        route: vec![node],
                        source_routed: false,
                        cursor: 0,
                    };
                    ctx.send(node, NextHop::Unicast(from), Message::Rrep(rrep));
                } else if (rreq.hops() as u32) < ctx.config.max_hops {
                    let delay = jitter(ctx);
                    ctx.send_after(node, NextHop::Broadcast, Message::Rreq(rreq), delay);
                }
            }
            Message::Rrep(mut rrep) => {
                rrep.route.push(node);
                self.tables[node].install(rrep.target, from, rrep.route.len() - 1);
                if node == rrep.origin {
                    ctx.log(node, "route_ready", 0);
                    if let Some(d) = self.pending.remove(&(node, rrep.target)) {
                        for data in d.packets {
                            self.send_data(ctx, node, data);
                        }
                    }
                    return;
                }
                match self.tables[node].get(rrep.origin) {
                    Some(r) if ctx.snapshot.linked(node, r.next) => {
                        ctx.send(node, NextHop::Unicast(r.next), Message::Rrep(rrep))
                    }
                    _ => ctx.drop_control(node, PacketType::Rrep),
                }
            }
            Message::Data(mut data) => {
                data.hops += 1;
                self.send_data(ctx, node, data);
            }
            Message::Rerr(mut e) => {
                e.cursor += 1;
                self.tables[node].remove(e.rerr.destination);
                match handle_rerr(&e.rerr, e.cursor, node, &mut self.tables[node], ctx.snapshot) {
                    RerrAction::Forward { next } => ctx.send(node, NextHop::Unicast(next), Message::Rerr(e)),
                    RerrAction::Reestablish => {
                        let dst = e.rerr.destination;
                        self.start_discovery(ctx, node, dst, None);
                    }
                    RerrAction::Drop => ctx.drop_control(node, PacketType::Rerr),
                }
            }
        }
    }

    fn link_failed(&mut self, ctx: &mut Ctx, node: usize, next: usize, msg: &Message) {
        self.tables[node].invalidate_link(node, next);
        if let Message::Data(data) = msg {
            self.tables[node].remove(data.dst);
            if node != data.src {
                send_rerr(ctx, node, RerrMessage::for_failure(&data.visited(node), next, data.dst));
            }
        }
    }

    fn timer(&mut self, ctx: &mut Ctx, node: usize, timer: Timer) {
        let Timer::DiscoveryTimeout { dst, id } = timer else { return };
        let Some(d) = self.pending.get(&(node, dst)) else { return };
        if d.id != id {
            return;
        }
        if d.attempts >= ctx.config.discovery_retries {
            let d = self.pending.remove(&(node, dst)).expect("present");
            for data in d.packets {
                ctx.discard(node, data, DiscardReason::NoRoute);
            }
            return;
        }
        let id = self.flood(ctx, node, dst);
        let d = self.pending.get_mut(&(node, dst)).expect("present");
        d.id = id;
        d.attempts += 1;
    }

    fn buffered(&self) -> Vec<&DataMsg> {
        self.pending.values().flat_map(|d| d.packets.iter()).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::ConnectivityGraph;
    use crate::protocol::{IntraWeight, Output, ProtocolConfig, TopologySnapshot};
    use crate::rng::SimRng;
    use crate::time::SimTime;
    use rand::SeedableRng;

    fn snap(n: usize, edges: &[(usize, usize)]) -> TopologySnapshot {
        TopologySnapshot::new(0, ConnectivityGraph::from_edges(n, edges), vec![Default::default(); n], IntraWeight::Hop)
    }

    fn run<F: FnOnce(&mut Ctx)>(snap: &TopologySnapshot, f: F) -> Vec<Output> {
        let cfg = ProtocolConfig::default();
        let mut rng = SimRng::seed_from_u64(0);
        let mut ctx = Ctx { now: SimTime::ZERO, tick_ns: 100_000_000, snapshot: snap, config: &cfg, rng: &mut rng, outputs: vec![] };
        f(&mut ctx);
        ctx.outputs
    }

    #[test]
    fn table_keeps_one_route_per_destination() {
        let mut t = AodvTable::new(0);
        t.install(5, 1, 3);
        t.install(5, 2, 4);
        assert_eq!(t.len(), 1);
        assert_eq!(t.get(5), Some(AodvRoute { next: 2, hops: 4 }));
        assert_eq!(t.invalidate_link(0, 2), 1);
        assert!(t.is_empty());
    }

    #[test]
    fn seen_filter_uses_half_window() {
        let mut s = SeenRequests::default();
        assert!(s.admit(1, 255));
        assert!(!s.admit(1, 255));
        assert!(s.admit(1, 0));
        assert!(!s.admit(1, 200));
        assert!(s.admit(2, 200));
    }

    #[test]
    fn two_node_discovery() {
        let s = snap(2, &[(0, 1)]);
        let mut r = AodvLite::new(2);
        let d = DataMsg::new(1, 0, 0, 1, 0, 100, SimTime::ZERO, 0);
        let out = run(&s, |ctx| r.originate(ctx, 0, d));
        let rreq = out
            .iter()
            .find_map(|o| match o {
                Output::Send { to: NextHop::Broadcast, msg, .. } => Some(msg.clone()),
                _ => None,
            })
            .unwrap();
        let out = run(&s, |ctx| r.receive(ctx, 1, 0, rreq.clone()));
        let rrep = out
            .iter()
            .find_map(|o| match o {
                Output::Send { to: NextHop::Unicast(0), msg: m @ Message::Rrep(_), .. } => Some(m.clone()),
                _ => None,
            })
            .unwrap();
        // A second copy of the same request is ignored.
        assert!(run(&s, |ctx| r.receive(ctx, 1, 0, rreq)).is_empty());
        let out = run(&s, |ctx| r.receive(ctx, 0, 1, rrep));
        assert!(out.iter().any(|o| matches!(o, Output::Send { to: NextHop::Unicast(1), msg: Message::Data(_), .. })));
        assert_eq!(r.table(0).get(1), Some(AodvRoute { next: 1, hops: 1 }));
        assert!(r.buffered().is_empty());
    }

    #[test]
    fn discovery_gives_up_after_retries() {
        let s = snap(3, &[(0, 1)]);
        let mut r = AodvLite::new(3);
        let d = DataMsg::new(1, 0, 0, 2, 0, 100, SimTime::ZERO, 0);
        run(&s, |ctx| r.originate(ctx, 0, d));
        for _ in 0..ProtocolConfig::default().discovery_retries {
            let id = r.pending[&(0, 2)].id;
            let out = run(&s, |ctx| r.timer(ctx, 0, Timer::DiscoveryTimeout { dst: 2, id }));
            assert!(out.iter().any(|o| matches!(o, Output::Send { to: NextHop::Broadcast, .. })));
        }
        let id = r.pending[&(0, 2)].id;
        let out = run(&s, |ctx| r.timer(ctx, 0, Timer::DiscoveryTimeout { dst: 2, id }));
        assert!(out.iter().any(|o| matches!(o, Output::Discard { reason: DiscardReason::NoRoute, .. })));
    }

    #[test]
    fn missing_next_hop_reports_upstream() {
        let s = snap(3, &[(0, 1)]);
        let mut r = AodvLite::new(3);
        r.tables[1].install(2, 2, 1);
        let mut d = DataMsg::new(1, 0, 0, 2, 0, 100, SimTime::ZERO, 0);
        d.trail.push((0, 0));
        let out = run(&s, |ctx| r.receive(ctx, 1, 0, Message::Data(d)));
        assert!(out.iter().any(|o| matches!(o, Output::Send { to: NextHop::Unicast(0), msg: Message::Rerr(_), .. })));
        assert!(r.table(1).get(2).is_none());
    }
}
