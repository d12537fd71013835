use super::message::{DataMsg, Message, RerrMsg};
use super::rerr::RerrMessage;
use super::{Ctx, NextHop, ProtocolConfig, TopologySnapshot};
use crate::metrics::DiscardReason;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ForwardDecision {
    Deliver,
    Relay { next: usize },
    Discard(DiscardReason),
    /// The next address is out of reach: report upstream.
    LinkBroken { next: usize },
}

/// Lifetime and hop policing shared by every forwarding path.
pub fn police(data: &DataMsg, tick: u64, config: &ProtocolConfig) -> Option<DiscardReason> {
    if data.is_expired(tick, config.initial_exp) {
        return Some(DiscardReason::Expired);
    }
    if data.hops > config.max_hops {
        return Some(DiscardReason::HopLimit);
    }
    None
}

/// Source-route forwarding at `node`, which must be `route[cursor]`.
pub fn forward(data: &DataMsg, node: usize, snapshot: &TopologySnapshot, config: &ProtocolConfig) -> ForwardDecision {
    if data.route.get(data.cursor) != Some(&node) {
        return ForwardDecision::Discard(DiscardReason::Protocol);
    }
    if let Some(reason) = police(data, snapshot.tick(), config) {
        return ForwardDecision::Discard(reason);
    }
    if data.cursor + 1 == data.route.len() {
        return ForwardDecision::Deliver;
    }
    if data.hops + 1 > config.max_hops {
        return ForwardDecision::Discard(DiscardReason::HopLimit);
    }
    let next = data.route[data.cursor + 1];
    if snapshot.linked(node, next) {
        ForwardDecision::Relay { next }
    } else {
        ForwardDecision::LinkBroken { next }
    }
}

/// Applies [`forward`] at `node` and emits the matching outputs; a broken
/// next hop drops the packet and sends an error back along the route.
pub(crate) fn relay_source_routed(ctx: &mut Ctx, node: usize, data: DataMsg) {
    match forward(&data, node, ctx.snapshot, ctx.config) {
        ForwardDecision::Deliver => ctx.deliver(node, data),
        ForwardDecision::Relay { next } => ctx.send(node, NextHop::Unicast(next), Message::Data(data)),
        ForwardDecision::Discard(reason) => ctx.discard(node, data, reason),
        ForwardDecision::LinkBroken { next } => {
            let rerr = RerrMessage::for_failure(&data.route[..=data.cursor], next, data.dst);
            ctx.discard(node, data, DiscardReason::LinkBreak);
            send_rerr(ctx, node, rerr);
        }
    }
}

/// Starts an error report at the node that detected the failure.
pub(crate) fn send_rerr(ctx: &mut Ctx, node: usize, rerr: RerrMessage) {
    ctx.log(node, "rerr", 0);
    let Some(&next) = rerr.reverse_route.get(1) else {
        return;
    };
    if ctx.snapshot.linked(node, next) {
        ctx.send(node, NextHop::Unicast(next), Message::Rerr(RerrMsg { rerr, cursor: 0 }));
    } else {
        ctx.drop_control(node, super::PacketType::Rerr);
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::ConnectivityGraph;
    use crate::protocol::IntraWeight;
    use crate::time::SimTime;

    fn snap(tick: u64, edges: &[(usize, usize)]) -> TopologySnapshot {
        TopologySnapshot::new(tick, ConnectivityGraph::from_edges(4, edges), vec![Default::default(); 4], IntraWeight::Hop)
    }

    fn packet(route: Vec<usize>) -> DataMsg {
        let (src, dst) = (route[0], *route.last().unwrap());
        DataMsg::new(0, 0, src, dst, 0, 100, SimTime::ZERO, 0).with_route(route)
    }

    #[test]
    fn relays_then_delivers() {
        let cfg = ProtocolConfig::default();
        let s = snap(0, &[(0, 1), (1, 2)]);
        let mut d = packet(vec![0, 1, 2]);
        assert_eq!(forward(&d, 0, &s, &cfg), ForwardDecision::Relay { next: 1 });
        d.cursor = 2;
        d.hops = 2;
        assert_eq!(forward(&d, 2, &s, &cfg), ForwardDecision::Deliver);
    }

    #[test]
    fn expired_packet_is_never_delivered() {
        let cfg = ProtocolConfig { initial_exp: 2, ..Default::default() };
        let mut d = packet(vec![0, 1]);
        d.cursor = 1;
        assert_eq!(forward(&d, 1, &snap(1, &[(0, 1)]), &cfg), ForwardDecision::Deliver);
        assert_eq!(forward(&d, 1, &snap(2, &[(0, 1)]), &cfg), ForwardDecision::Discard(DiscardReason::Expired));
    }

    #[test]
    fn hop_limit() {
        let cfg = ProtocolConfig { max_hops: 1, ..Default::default() };
        let s = snap(0, &[(0, 1), (1, 2)]);
        let mut d = packet(vec![0, 1, 2]);
        d.cursor = 1;
        d.hops = 1;
        assert_eq!(forward(&d, 1, &s, &cfg), ForwardDecision::Discard(DiscardReason::HopLimit));
        d.hops = 2;
        d.cursor = 2;
        assert_eq!(forward(&d, 2, &s, &cfg), ForwardDecision::Discard(DiscardReason::HopLimit));
    }

    #[test]
    fn missing_link_reports_break() {
        let cfg = ProtocolConfig::default();
        let d = packet(vec![0, 1, 2]);
        assert_eq!(forward(&d, 0, &snap(0, &[(1, 2)]), &cfg), ForwardDecision::LinkBroken { next: 1 });
    }

    #[test]
    fn off_route_node_is_a_violation() {
        let cfg = ProtocolConfig::default();
        let d = packet(vec![0, 1, 2]);
        assert_eq!(forward(&d, 3, &snap(0, &[(0, 1)]), &cfg), ForwardDecision::Discard(DiscardReason::Protocol));
    }
}
