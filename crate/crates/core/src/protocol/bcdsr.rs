//! BC-DSR router: routes are computed at the source from the current
//! snapshot, cached, and carried in full in every data packet. Route errors
//! walk back along the reverse route; the source then recomputes.

use std::collections::{BTreeMap, VecDeque};

use super::cache::{RouteCache, RouteStore};
use super::forward::{relay_source_routed, send_rerr};
use super::message::{DataMsg, Message};
use super::rerr::{handle_rerr, RerrAction, RerrMessage};
use super::route::establish_route;
use super::{Ctx, NextHop, PacketType, ProtocolKind, Router, Timer};
use crate::metrics::DiscardReason;

#[derive(Debug, Default)]
struct Pending {
    packets: VecDeque<DataMsg>,
    retries: u32,
}

#[derive(Debug)]
pub struct BcDsr {
    caches: Vec<RouteCache>,
    pending: BTreeMap<(usize, usize), Pending>,
}

impl BcDsr {
    pub fn new(nodes: usize) -> Self {
        BcDsr {
            caches: vec![RouteCache::new(1); nodes],
            pending: BTreeMap::new(),
        }
    }

    pub fn cache(&self, node: usize) -> &RouteCache {
        &self.caches[node]
    }

    /// Cached route from `src` to `dst` that is young enough and whose first
    /// hop is still up, or a freshly computed one.
    fn route_for(&mut self, ctx: &mut Ctx, src: usize, dst: usize) -> Option<Vec<usize>> {
        if let Some(r) = self.caches[src].get(src, dst) {
            let fresh = r.created_tick + ctx.config.route_max_age >= ctx.tick();
            if fresh && (r.path.len() < 2 || ctx.snapshot.linked(src, r.path[1])) {
                return Some(r.path.clone());
            }
            self.caches[src].invalidate(src, dst);
        }
        ctx.log(src, "establish", 0);
        match establish_route(src, dst, ctx.snapshot) {
            Ok(path) => {
                self.caches[src].insert(path.clone(), ctx.tick());
                Some(path)
            }
            Err(_) => {
                ctx.log(src, "route_failure", 0);
                None
            }
        }
    }

    fn launch(ctx: &mut Ctx, node: usize, data: DataMsg, route: Vec<usize>) {
        relay_source_routed(ctx, node, data.with_route(route));
    }

    fn buffer(&mut self, ctx: &mut Ctx, node: usize, data: DataMsg) {
        let key = (node, data.dst);
        let fresh = !self.pending.contains_key(&key);
        let entry = self.pending.entry(key).or_default();
        if entry.packets.len() >= ctx.config.buffer_capacity {
            ctx.discard(node, data, DiscardReason::NoRoute);
            return;
        }
        if fresh {
            let dst = data.dst;
            ctx.timer(node, ctx.until_next_tick(), Timer::RouteRetry { dst });
        }
        entry.packets.push_back(data);
    }

    fn flush(&mut self, ctx: &mut Ctx, node: usize, dst: usize, route: &[usize]) {
        if let Some(p) = self.pending.remove(&(node, dst)) {
            for data in p.packets {
                Self::launch(ctx, node, data, route.to_vec());
            }
        }
    }
}

impl Router for BcDsr {
    fn kind(&self) -> ProtocolKind {
        ProtocolKind::BcDsr
    }

    fn originate(&mut self, ctx: &mut Ctx, node: usize, data: DataMsg) {
        ctx.log(node, "originate", data.seq);
        if self.pending.contains_key(&(node, data.dst)) {
            self.buffer(ctx, node, data);
            return;
        }
        match self.route_for(ctx, node, data.dst) {
            Some(route) => Self::launch(ctx, node, data, route),
            None => self.buffer(ctx, node, data),
        }
    }

    fn receive(&mut self, ctx: &mut Ctx, node: usize, _from: usize, msg: Message) {
        match msg {
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
                        if let Some(route) = self.route_for(ctx, node, dst) {
                            self.flush(ctx, node, dst, &route);
                        }
                    }
                    RerrAction::Drop => ctx.drop_control(node, PacketType::Rerr),
                }
            }
            // No discovery traffic in BC-DSR.
            Message::Rreq(_) | Message::Rrep(_) => {}
        }
    }

    fn link_failed(&mut self, ctx: &mut Ctx, node: usize, next: usize, msg: &Message) {
        let Message::Data(data) = msg else { return };
        self.caches[node].invalidate_link(node, next);
        if node != data.src {
            send_rerr(ctx, node, RerrMessage::for_failure(&data.route[..=data.cursor], next, data.dst));
        }
    }

    fn timer(&mut self, ctx: &mut Ctx, node: usize, timer: Timer) {
        let Timer::RouteRetry { dst } = timer else { return };
        if !self.pending.contains_key(&(node, dst)) {
            return;
        }
        if let Some(route) = self.route_for(ctx, node, dst) {
            self.flush(ctx, node, dst, &route);
            return;
        }
        let entry = self.pending.get_mut(&(node, dst)).expect("checked above");
        entry.retries += 1;
        if entry.retries > ctx.config.route_retry_budget {
            let p = self.pending.remove(&(node, dst)).expect("checked above");
            for data in p.packets {
                ctx.discard(node, data, DiscardReason::NoRoute);
            }
        } else {
            ctx.timer(node, ctx.until_next_tick(), Timer::RouteRetry { dst });
        }
    }

    fn buffered(&self) -> Vec<&DataMsg> {
        self.pending.values().flat_map(|p| p.packets.iter()).collect()
    }
}
