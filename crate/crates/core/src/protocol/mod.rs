//! Routing protocols: BC-DSR and the AODV/DSR baselines.
//!
//! Routers are per-network state machines driven by the event engine. Every
//! handler receives a [`Ctx`] holding the current topology snapshot and
//! collects [`Output`]s (transmissions, deliveries, discards, timers) that
//! the engine then executes.

pub mod aodv;
pub mod bcdsr;
pub mod cache;
pub mod dsr;
pub mod forward;
pub mod header;
pub mod message;
pub mod rerr;
pub mod route;

use std::cell::OnceCell;

use serde::{Deserialize, Serialize};

use crate::geom::Vec3;
use crate::graph::{betweenness, weight_edges, ConnectivityGraph, WeightedGraph, WEIGHT_EPSILON};
use crate::metrics::DiscardReason;
use crate::rng::SimRng;
use crate::time::{nanos, SimTime};

pub use forward::{forward, ForwardDecision};
pub use header::{PacketHeader, PacketType};
pub use message::{DataMsg, Message, RerrMsg, RrepMsg, RreqMsg};
pub use rerr::{handle_rerr, RerrAction, RerrMessage};
pub use route::{establish_route, RouteFailure};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum ProtocolKind {
    #[serde(rename = "bc-dsr")]
    BcDsr,
    #[serde(rename = "aodv-lite")]
    AodvLite,
    #[serde(rename = "dsr-lite")]
    DsrLite,
}

impl ProtocolKind {
    pub const ALL: [ProtocolKind; 3] = [ProtocolKind::BcDsr, ProtocolKind::AodvLite, ProtocolKind::DsrLite];

    pub fn as_str(self) -> &'static str {
        match self {
            ProtocolKind::BcDsr => "bc-dsr",
            ProtocolKind::AodvLite => "aodv-lite",
            ProtocolKind::DsrLite => "dsr-lite",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|p| p.as_str() == s)
    }
}

/// Edge weights for routing inside one group.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum IntraWeight {
    #[default]
    Hop,
    Distance,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ProtocolConfig {
    pub max_hops: u32,
    /// Initial Exp value, in mobility ticks.
    pub initial_exp: u8,
    /// BC-DSR: extra attempts after a failed route computation, one per tick.
    pub route_retry_budget: u32,
    pub intra_weight: IntraWeight,
    /// BC-DSR: ticks a computed route stays usable at the source; 0 means
    /// only within the tick it was computed.
    pub route_max_age: u64,
    /// BC-DSR position beacon period in seconds; 0 disables beacons.
    pub beacon_interval: f64,
    pub beacon_bytes: u32,
    /// Baselines: seconds to wait for a route reply.
    pub discovery_timeout: f64,
    /// Baselines: re-floods after the first request before giving up.
    pub discovery_retries: u32,
    /// DSR-lite: routes kept per destination.
    pub dsr_cache_size: usize,
    /// Upper bound of the random delay before re-broadcasting a request, seconds.
    pub broadcast_jitter: f64,
    /// Packets buffered per source while waiting for a route.
    pub buffer_capacity: usize,
}

impl Default for ProtocolConfig {
    fn default() -> Self {
        ProtocolConfig {
            max_hops: 32,
            initial_exp: 50,
            route_retry_budget: 3,
            intra_weight: IntraWeight::Hop,
            route_max_age: 0,
            beacon_interval: 1.0,
            beacon_bytes: 20,
            discovery_timeout: 0.5,
            discovery_retries: 2,
            dsr_cache_size: 3,
            broadcast_jitter: 0.01,
            buffer_capacity: 64,
        }
    }
}

/// Connectivity of one mobility tick plus lazily computed centrality weights.
#[derive(Debug)]
pub struct TopologySnapshot {
    tick: u64,
    graph: ConnectivityGraph,
    positions: Vec<Vec3>,
    centrality: OnceCell<Option<WeightedGraph>>,
    intra: OnceCell<WeightedGraph>,
    intra_weight: IntraWeight,
}

impl TopologySnapshot {
    pub fn new(tick: u64, graph: ConnectivityGraph, positions: Vec<Vec3>, intra_weight: IntraWeight) -> Self {
        TopologySnapshot {
            tick,
            graph,
            positions,
            centrality: OnceCell::new(),
            intra: OnceCell::new(),
            intra_weight,
        }
    }

    pub fn tick(&self) -> u64 {
        self.tick
    }

    pub fn graph(&self) -> &ConnectivityGraph {
        &self.graph
    }

    pub fn positions(&self) -> &[Vec3] {
        &self.positions
    }

    pub fn linked(&self, u: usize, v: usize) -> bool {
        self.graph.has_edge(u, v)
    }

    /// Graph weighted by `1 / (C_B(u) + C_B(v))`, computed on first use.
    /// `None` when the snapshot is too small for normalised centrality.
    pub fn centrality_weights(&self) -> Option<&WeightedGraph> {
        self.centrality
            .get_or_init(|| {
                let scores = betweenness(&self.graph).ok()?;
                Some(weight_edges(&self.graph, &scores, WEIGHT_EPSILON))
            })
            .as_ref()
    }

    /// Predefined intra-group weights.
    pub fn intra_weights(&self) -> &WeightedGraph {
        self.intra.get_or_init(|| match self.intra_weight {
            IntraWeight::Hop => WeightedGraph::unit(&self.graph),
            IntraWeight::Distance => WeightedGraph::euclidean(&self.graph, &self.positions),
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NextHop {
    Unicast(usize),
    Broadcast,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Timer {
    /// BC-DSR: try computing a route to `dst` again.
    RouteRetry { dst: usize },
    /// Baselines: no reply to request `id` for `dst` yet.
    DiscoveryTimeout { dst: usize, id: u8 },
}

#[derive(Debug, Clone, PartialEq)]
pub enum Output {
    Send { from: usize, to: NextHop, msg: Message, delay_ns: u64 },
    Deliver { node: usize, data: DataMsg },
    Discard { node: usize, data: DataMsg, reason: DiscardReason },
    /// A control message that could not continue.
    ControlDropped { node: usize, kind: PacketType },
    Timer { node: usize, delay_ns: u64, timer: Timer },
    Log { node: usize, event: &'static str, seq: u8 },
}

/// What a router handler can see and produce.
pub struct Ctx<'a> {
    pub now: SimTime,
    pub tick_ns: u64,
    pub snapshot: &'a TopologySnapshot,
    pub config: &'a ProtocolConfig,
    pub rng: &'a mut SimRng,
    pub outputs: Vec<Output>,
}

impl<'a> Ctx<'a> {
    pub fn tick(&self) -> u64 {
        self.snapshot.tick()
    }

    pub fn send(&mut self, from: usize, to: NextHop, msg: Message) {
        self.outputs.push(Output::Send { from, to, msg, delay_ns: 0 });
    }

    pub fn send_after(&mut self, from: usize, to: NextHop, msg: Message, delay_ns: u64) {
        self.outputs.push(Output::Send { from, to, msg, delay_ns });
    }

    pub fn deliver(&mut self, node: usize, data: DataMsg) {
        self.outputs.push(Output::Deliver { node, data });
    }

    pub fn discard(&mut self, node: usize, data: DataMsg, reason: DiscardReason) {
        self.outputs.push(Output::Discard { node, data, reason });
    }

    pub fn drop_control(&mut self, node: usize, kind: PacketType) {
        self.outputs.push(Output::ControlDropped { node, kind });
    }

    pub fn timer(&mut self, node: usize, delay_ns: u64, timer: Timer) {
        self.outputs.push(Output::Timer { node, delay_ns, timer });
    }

    pub fn log(&mut self, node: usize, event: &'static str, seq: u8) {
        self.outputs.push(Output::Log { node, event, seq });
    }

    /// Nanoseconds until the next mobility tick boundary.
    pub fn until_next_tick(&self) -> u64 {
        self.tick_ns - self.now.nanos() % self.tick_ns
    }

    pub fn secs(&self, secs: f64) -> u64 {
        nanos(secs)
    }
}

/// A routing protocol instance covering every node of the network.
pub trait Router {
    fn kind(&self) -> ProtocolKind;

    /// A flow source hands over a freshly generated data packet.
    fn originate(&mut self, ctx: &mut Ctx, node: usize, data: DataMsg);

    /// `node` received `msg` from neighbour `from`.
    fn receive(&mut self, ctx: &mut Ctx, node: usize, from: usize, msg: Message);

    /// The link layer could not reach `next` (out of range at send time).
    fn link_failed(&mut self, ctx: &mut Ctx, node: usize, next: usize, msg: &Message);

    fn timer(&mut self, ctx: &mut Ctx, node: usize, timer: Timer);

    /// Data packets held while waiting for routes.
    fn buffered(&self) -> Vec<&DataMsg>;
}

pub fn make_router(kind: ProtocolKind, nodes: usize, config: &ProtocolConfig) -> Box<dyn Router> {
    match kind {
        ProtocolKind::BcDsr => Box::new(bcdsr::BcDsr::new(nodes)),
        ProtocolKind::AodvLite => Box::new(aodv::AodvLite::new(nodes)),
        ProtocolKind::DsrLite => Box::new(dsr::DsrLite::new(nodes, config.dsr_cache_size)),
    }
}
