use super::header::{PacketHeader, PacketType};
use super::rerr::RerrMessage;
use crate::time::SimTime;

/// Control body bytes carried after the header, per message family.
pub const AODV_RREQ_BODY: u32 = 4;
pub const AODV_RREP_BODY: u32 = 4;
/// Broken link endpoints.
pub const RERR_BODY: u32 = 8;

#[derive(Debug, Clone, PartialEq)]
pub struct DataMsg {
    /// Simulation-wide packet id.
    pub uid: u64,
    pub flow: usize,
    pub src: usize,
    pub dst: usize,
    pub seq: u8,
    pub payload_bytes: u32,
    pub created: SimTime,
    pub created_tick: u64,
    /// Full source route, or `[src, dst]` for hop-by-hop forwarding.
    pub route: Vec<usize>,
    pub source_routed: bool,
    /// Index in `route` of the node currently holding the packet.
    pub cursor: usize,
    /// Hops traversed so far.
    pub hops: u32,
    /// `(sender, tick)` of every transmission that carried this packet.
    pub trail: Vec<(usize, u64)>,
}

impl DataMsg {
    pub fn new(uid: u64, flow: usize, src: usize, dst: usize, seq: u8, payload_bytes: u32, created: SimTime, created_tick: u64) -> Self {
        DataMsg {
            uid,
            flow,
            src,
            dst,
            seq,
            payload_bytes,
            created,
            created_tick,
            route: vec![src, dst],
            source_routed: false,
            cursor: 0,
            hops: 0,
            trail: Vec::new(),
        }
    }

    pub fn with_route(mut self, route: Vec<usize>) -> Self {
        debug_assert_eq!(route.first(), Some(&self.src));
        debug_assert_eq!(route.last(), Some(&self.dst));
        self.route = route;
        self.source_routed = true;
        self.cursor = 0;
        self
    }

    pub fn elapsed_ticks(&self, tick: u64) -> u64 {
        tick.saturating_sub(self.created_tick)
    }

    pub fn is_expired(&self, tick: u64, initial_exp: u8) -> bool {
        self.elapsed_ticks(tick) >= initial_exp as u64
    }

    pub fn exp_remaining(&self, tick: u64, initial_exp: u8) -> u8 {
        (initial_exp as u64).saturating_sub(self.elapsed_ticks(tick)) as u8
    }

    /// Nodes visited so far, in order, ending with the current holder.
    pub fn visited(&self, holder: usize) -> Vec<usize> {
        let mut v: Vec<usize> = self.trail.iter().map(|&(n, _)| n).collect();
        v.push(holder);
        v
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RreqMsg {
    pub origin: usize,
    pub target: usize,
    pub id: u8,
    /// Nodes the request traversed, starting at `origin`.
    pub route: Vec<usize>,
    /// Whether the route is carried on the wire (DSR) or only the count (AODV).
    pub accumulate: bool,
}

impl RreqMsg {
    pub fn hops(&self) -> usize {
        self.route.len() - 1
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RrepMsg {
    pub origin: usize,
    pub target: usize,
    /// DSR: full discovered route `origin .. target`. AODV: nodes the reply
    /// traversed, starting at `target`.
    pub route: Vec<usize>,
    pub source_routed: bool,
    /// DSR: index in `route` of the holder.
    pub cursor: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RerrMsg {
    pub rerr: RerrMessage,
    /// Index in the reverse route of the holder.
    pub cursor: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Message {
    Data(DataMsg),
    Rreq(RreqMsg),
    Rrep(RrepMsg),
    Rerr(RerrMsg),
}

fn addrs(nodes: &[usize]) -> Vec<u32> {
    nodes.iter().map(|&n| n as u32).collect()
}

impl Message {
    pub fn kind(&self) -> PacketType {
        match self {
            Message::Data(_) => PacketType::Data,
            Message::Rreq(_) => PacketType::Rreq,
            Message::Rrep(_) => PacketType::Rrep,
            Message::Rerr(_) => PacketType::Rerr,
        }
    }

    pub fn is_control(&self) -> bool {
        self.kind().is_control()
    }

    pub fn as_data(&self) -> Option<&DataMsg> {
        match self {
            Message::Data(d) => Some(d),
            _ => None,
        }
    }

    pub fn seq(&self) -> u8 {
        match self {
            Message::Data(d) => d.seq,
            Message::Rreq(r) => r.id,
            _ => 0,
        }
    }

    /// Wire header of this message at mobility tick `tick`.
    pub fn header(&self, tick: u64, initial_exp: u8) -> PacketHeader {
        let cap = |n: usize| n.min(u8::MAX as usize) as u8;
        match self {
            Message::Data(d) => {
                let addresses = addrs(&d.route);
                PacketHeader {
                    kind: PacketType::Data,
                    hop: cap(addresses.len() - 1),
                    seq: d.seq,
                    exp: d.exp_remaining(tick, initial_exp),
                    addresses,
                }
            }
            Message::Rreq(r) => {
                let addresses = if r.accumulate {
                    let mut a = addrs(&r.route);
                    a.push(r.target as u32);
                    a
                } else {
                    addrs(&[r.origin, r.target])
                };
                PacketHeader {
                    kind: PacketType::Rreq,
                    hop: cap(addresses.len() - 1),
                    seq: r.id,
                    exp: initial_exp,
                    addresses,
                }
            }
            Message::Rrep(r) => {
                let addresses = if r.source_routed { addrs(&r.route) } else { addrs(&[r.origin, r.target]) };
                PacketHeader {
                    kind: PacketType::Rrep,
                    hop: cap(addresses.len() - 1),
                    seq: 0,
                    exp: initial_exp,
                    addresses,
                }
            }
            Message::Rerr(e) => {
                let addresses = addrs(&e.rerr.reverse_route);
                PacketHeader {
                    kind: PacketType::Rerr,
                    hop: cap(addresses.len() - 1),
                    seq: 0,
                    exp: initial_exp,
                    addresses,
                }
            }
        }
    }

    /// Bytes after the header.
    pub fn body_bytes(&self) -> u32 {
        match self {
            Message::Data(d) => d.payload_bytes,
            Message::Rreq(r) if !r.accumulate => AODV_RREQ_BODY,
            Message::Rreq(_) => 0,
            Message::Rrep(r) if !r.source_routed => AODV_RREP_BODY,
            Message::Rrep(_) => 0,
            Message::Rerr(_) => RERR_BODY,
        }
    }

    pub fn size_bytes(&self, tick: u64, initial_exp: u8) -> u32 {
        self.header(tick, initial_exp).encoded_len() as u32 + self.body_bytes()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn data_sizes_follow_route_length() {
        let d = DataMsg::new(1, 0, 3, 7, 9, 1000, SimTime::ZERO, 0).with_route(vec![3, 5, 7]);
        let m = Message::Data(d);
        assert_eq!(m.size_bytes(0, 50), 4 + 12 + 1000);
        let h = m.header(4, 50);
        assert_eq!(h.exp, 46);
        assert_eq!(h.hop, 2);
        assert!(h.encode().is_ok());
    }

    #[test]
    fn expiry_counts_ticks() {
        let d = DataMsg::new(1, 0, 0, 1, 0, 10, SimTime::ZERO, 10);
        assert!(!d.is_expired(11, 2));
        assert!(d.is_expired(12, 2));
        assert_eq!(d.exp_remaining(30, 2), 0);
    }

    #[test]
    fn control_headers_are_valid() {
        let rreq = Message::Rreq(RreqMsg { origin: 1, target: 9, id: 3, route: vec![1, 4, 6], accumulate: true });
        let h = rreq.header(0, 50);
        assert_eq!(h.addresses, vec![1, 4, 6, 9]);
        assert!(h.encode().is_ok());
        let aodv = Message::Rreq(RreqMsg { origin: 1, target: 9, id: 3, route: vec![1, 4, 6], accumulate: false });
        assert_eq!(aodv.size_bytes(0, 50), 4 + 8 + AODV_RREQ_BODY);
        assert!(aodv.header(0, 50).encode().is_ok());
    }
}
