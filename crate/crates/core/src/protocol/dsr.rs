//! DSR-lite: flooded requests accumulate the path, the target answers a few
//! copies, and sources keep several routes so one break does not force a
//! new flood.

use std::collections::{BTreeMap, VecDeque};

use super::aodv::{jitter, Discovery, SeenRequests};
use super::cache::{RouteCache, RouteStore};
use super::forward::{relay_source_routed, send_rerr};
use super::message::{DataMsg, Message, RrepMsg, RreqMsg};
use super::rerr::{handle_rerr, RerrAction, RerrMessage};
use super::{Ctx, NextHop, PacketType, ProtocolKind, Router, Timer};
use crate::metrics::DiscardReason;

/// Replies the target sends for one request.
pub const MAX_REPLIES: u32 = 3;

#[derive(Debug)]
pub struct DsrLite {
    caches: Vec<RouteCache>,
    seen: Vec<SeenRequests>,
    /// Per target: `(origin, id) -> replies sent`.
    replied: Vec<BTreeMap<(usize, u8), u32>>,
    next_id: Vec<u8>,
    pending: BTreeMap<(usize, usize), Discovery>,
}

impl DsrLite {
    pub fn new(nodes: usize, cache_size: usize) -> Self {
        DsrLite {
            caches: vec![RouteCache::new(cache_size); nodes],
            seen: vec![SeenRequests::default(); nodes],
            replied: vec![BTreeMap::new(); nodes],
            next_id: vec![0; nodes],
            pending: BTreeMap::new(),
        }
    }

    pub fn cache(&self, node: usize) -> &RouteCache {
        &self.caches[node]
    }

    /// First cached route whose first hop is up; stale ones are dropped.
    fn usable_route(&mut self, ctx: &Ctx, src: usize, dst: usize) -> Option<Vec<usize>> {
        loop {
            let r = self.caches[src].get(src, dst)?;
            if ctx.snapshot.linked(src, r.path[1]) {
                return Some(r.path.clone());
            }
            let next = r.path[1];
            self.caches[src].invalidate_link(src, next);
        }
    }

    fn flood(&mut self, ctx: &mut Ctx, node: usize, dst: usize) -> u8 {
        self.next_id[node] = self.next_id[node].wrapping_add(1);
        let id = self.next_id[node];
        self.seen[node].admit(node, id);
        ctx.log(node, "rreq", id);
        let rreq = RreqMsg { origin: node, target: dst, id, route: vec![node], accumulate: true };
        ctx.send(node, NextHop::Broadcast, Message::Rreq(rreq));
        ctx.timer(node, ctx.secs(ctx.config.discovery_timeout), Timer::DiscoveryTimeout { dst, id });
        id
    }

    fn enqueue(&mut self, ctx: &mut Ctx, node: usize, dst: usize, data: Option<DataMsg>) {
        if let Some(d) = self.pending.get_mut(&(node, dst)) {
            if let Some(data) = data {
                if d.packets.len() >= ctx.config.buffer_capacity {
                    ctx.discard(node, data, DiscardReason::NoRoute);
                } else {
                    d.packets.push_back(data);
                }
            }
            return;
        }
        let id = self.flood(ctx, node, dst);
        self.pending.insert((node, dst), Discovery { packets: data.into_iter().collect::<VecDeque<_>>(), id, attempts: 0 });
    }

    fn flush(&mut self, ctx: &mut Ctx, node: usize, dst: usize) {
        let Some(route) = self.usable_route(ctx, node, dst) else { return };
        if let Some(d) = self.pending.remove(&(node, dst)) {
            for data in d.packets {
                relay_source_routed(ctx, node, data.with_route(route.clone()));
            }
        }
    }
}

impl Router for DsrLite {
    fn kind(&self) -> ProtocolKind {
        ProtocolKind::DsrLite
    }

    fn originate(&mut self, ctx: &mut Ctx, node: usize, data: DataMsg) {
        ctx.log(node, "originate", data.seq);
        let dst = data.dst;
        if !self.pending.contains_key(&(node, dst)) {
            if let Some(route) = self.usable_route(ctx, node, dst) {
                relay_source_routed(ctx, node, data.with_route(route));
                return;
            }
        }
        self.enqueue(ctx, node, dst, Some(data));
    }

    fn receive(&mut self, ctx: &mut Ctx, node: usize, from: usize, msg: Message) {
        match msg {
            Message::Rreq(mut rreq) => {
                if rreq.origin == node || rreq.route.contains(&node) {
                    return;
                }
                if node == rreq.target {
                    let n = self.replied[node].entry((rreq.origin, rreq.id)).or_insert(0);
                    if *n >= MAX_REPLIES {
                        return;
                    }
                    *n += 1;
                    rreq.route.push(node);
                    ctx.log(node, "rrep", rreq.id);
                    let cursor = rreq.route.len() - 1;
                    let rrep = RrepMsg { origin: rreq.origin, target: node, route: rreq.route, source_routed: true, cursor };
                    ctx.send(node, NextHop::Unicast(from), Message::Rrep(rrep));
                    return;
                }
                if !self.seen[node].admit(rreq.origin, rreq.id) {
                    return;
                }
                rreq.route.push(node);
                if (rreq.hops() as u32) < ctx.config.max_hops {
                    let delay = jitter(ctx);
                    ctx.send_after(node, NextHop::Broadcast, Message::Rreq(rreq), delay);
                }
            }
            Message::Rrep(mut rrep) => {
                rrep.cursor = rrep.cursor.saturating_sub(1);
                if rrep.route.get(rrep.cursor) != Some(&node) {
                    ctx.drop_control(node, PacketType::Rrep);
                    return;
                }
                if rrep.cursor == 0 {
                    ctx.log(node, "route_ready", 0);
                    self.caches[node].insert(rrep.route.clone(), ctx.tick());
                    self.flush(ctx, node, rrep.target);
                    return;
                }
                let next = rrep.route[rrep.cursor - 1];
                if ctx.snapshot.linked(node, next) {
                    ctx.send(node, NextHop::Unicast(next), Message::Rrep(rrep));
                } else {
                    ctx.drop_control(node, PacketType::Rrep);
                }
            }
            Message::Data(mut data) => {
                data.cursor += 1;
                data.hops += 1;
                relay_source_routed(ctx, node, data);
            }
            Message::Rerr(mut e) => {
                e.cursor += 1;
                match handle_rerr(&e.rerr, e.cursor, node, &mut self.caches[node], ctx.snapshot) {
                    RerrAction::Forward { next } => ctx.send(node, NextHop::Unicast(next), Message::Rerr(e)),
                    RerrAction::Reestablish => {
                        let dst = e.rerr.destination;
                        if self.usable_route(ctx, node, dst).is_some() {
                            ctx.log(node, "failover", 0);
                            self.flush(ctx, node, dst);
                        } else {
                            self.enqueue(ctx, node, dst, None);
                        }
                    }
                    RerrAction::Drop => ctx.drop_control(node, PacketType::Rerr),
                }
            }
        }
    }

    fn link_failed(&mut self, ctx: &mut Ctx, node: usize, next: usize, msg: &Message) {
        self.caches[node].invalidate_link(node, next);
        if let Message::Data(data) = msg {
            if node != data.src {
                send_rerr(ctx, node, RerrMessage::for_failure(&data.route[..=data.cursor], next, data.dst));
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
