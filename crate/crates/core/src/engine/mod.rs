//! Discrete-event core: clock, event list, radio medium with per-node
//! transmit queues, traffic sources, and the glue between mobility, the
//! connectivity snapshot and the routing protocol.
//!
//! Time is kept in integer nanoseconds. Mobility advances lazily: before an
//! event at time `t` runs, the formation is stepped to tick `floor(t / tick)`
//! and the snapshot rebuilt, so every handler sees the positions of the
//! current tick.
//!
//! The medium is CSMA-like. A node with a frame and an idle medium sends at
//! once; otherwise it backs off a random number of slots and senses again.
//! A unicast receiver must be in range when the transmission starts, or the
//! frame fails with `range` and the protocol is told. Under receiver
//! overlap, any two transmissions heard at once by a node spoil each other
//! there; a spoiled unicast is retried, then counted as a collision loss.

pub mod channel;
pub mod queue;
pub mod trace;
pub mod traffic;

use std::collections::VecDeque;

use rand::Rng;
use thiserror::Error;

use crate::geom::Vec3;
use crate::graph::build_connectivity;
use crate::metrics::{Fate, FlowTally, LossReason, MetricsRecord};
use crate::mobility::{write_state_rows, Formation, FormationLayout, MobilityError, NodeState, Role, TRACE_HEADER};
use crate::protocol::{make_router, Ctx, DataMsg, Message, NextHop, Output, ProtocolKind, Router, Timer, TopologySnapshot};
use crate::rng::{SeedTree, SimRng, Stream};
use crate::scenario::{ConfigError, FlowSpec, Propagation, ScenarioConfig};
use crate::time::{nanos, SimTime};

use channel::Channel;
use queue::EventQueue;
use trace::{event_row, EVENTS_HEADER, PACKETS_HEADER};

pub use trace::{metrics_from_traces, parse_events, parse_packets, EventRow, PacketRow, Traces};
pub use traffic::{emission, emission_times, resolve_flows};

const LIGHT_SPEED: f64 = 299_792_458.0;

#[derive(Debug, Error)]
pub enum EngineError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error(transparent)]
    Mobility(#[from] MobilityError),
    #[error("{0}")]
    Positions(String),
}

#[derive(Debug, Clone)]
pub struct RunOutput {
    pub metrics: MetricsRecord,
    pub traces: Option<Traces>,
    pub flows: Vec<FlowSpec>,
    /// Control frames that were dropped (queue overflow, failed hops).
    pub control_dropped: u64,
    /// Data packets found in queues, on the air and in protocol buffers at
    /// the end; must equal the in-flight total of the per-flow tallies.
    pub in_flight_observed: u64,
    pub events_processed: u64,
}

/// Runs one scenario under one seed.
pub fn run(config: &ScenarioConfig, seed: u64) -> Result<RunOutput, EngineError> {
    config.validate()?;
    let seeds = SeedTree::new(seed);
    let formation = Formation::new(config.mobility_model, config.mobility, layout(config), seeds)?;
    Ok(Sim::new(config, seeds, Motion::Moving(formation)).run())
}

/// Runs a scenario on fixed node positions instead of a mobility model.
pub fn run_with_positions(config: &ScenarioConfig, seed: u64, positions: Vec<Vec3>) -> Result<RunOutput, EngineError> {
    config.validate()?;
    let n = config.network.node_count();
    if positions.len() != n {
        return Err(EngineError::Positions(format!("{} positions for {n} nodes", positions.len())));
    }
    if let Some(i) = positions.iter().position(|p| !p.is_finite()) {
        return Err(EngineError::Positions(format!("position {i} is not finite")));
    }
    let motion = Motion::Fixed { layout: layout(config), positions, tick: 0 };
    Ok(Sim::new(config, SeedTree::new(seed), motion).run())
}

fn layout(config: &ScenarioConfig) -> FormationLayout {
    FormationLayout {
        groups: config.network.groups,
        nodes_per_group: config.network.nodes_per_group,
        group_spacing: config.network.group_spacing,
    }
}

enum Motion {
    Moving(Formation),
    Fixed { layout: FormationLayout, positions: Vec<Vec3>, tick: u64 },
}

impl Motion {
    fn tick(&self) -> u64 {
        match self {
            Motion::Moving(f) => f.tick(),
            Motion::Fixed { tick, .. } => *tick,
        }
    }

    fn advance(&mut self) {
        match self {
            Motion::Moving(f) => f.advance(),
            Motion::Fixed { tick, .. } => *tick += 1,
        }
    }

    fn states(&self) -> Vec<NodeState> {
        match self {
            Motion::Moving(f) => f.node_states(),
            Motion::Fixed { layout, positions, .. } => positions
                .iter()
                .enumerate()
                .map(|(i, &position)| NodeState {
                    node_id: i as u32,
                    group_id: layout.group_of(i) as u32,
                    role: if layout.is_leader(i) { Role::Leader } else { Role::Ordinary },
                    position,
                })
                .collect(),
        }
    }
}

#[derive(Debug, Clone)]
struct Frame {
    to: NextHop,
    msg: Message,
    attempts: u32,
}

enum Ev {
    Traffic { flow: usize, k: u64 },
    Beacon { k: u64 },
    Access { node: usize },
    TxEnd { id: u64 },
    Rx { node: usize, from: usize, msg: Message },
    Enqueue { node: usize, frame: Frame },
    Timer { node: usize, timer: Timer },
}

#[derive(Default)]
struct Mac {
    queue: VecDeque<Frame>,
    access_pending: bool,
}

struct PacketInfo {
    flow: usize,
    fate: Option<Fate>,
}

struct Sim<'c> {
    cfg: &'c ScenarioConfig,
    tick_ns: u64,
    end: SimTime,
    now: SimTime,
    motion: Motion,
    snapshot: TopologySnapshot,
    router: Box<dyn Router>,
    events: EventQueue<Ev>,
    macs: Vec<Mac>,
    channel: Channel,
    in_air: std::collections::BTreeMap<u64, Frame>,
    mac_rng: SimRng,
    proto_rng: SimRng,
    flows: Vec<FlowSpec>,
    flow_seq: Vec<u8>,
    packets: Vec<PacketInfo>,
    record: MetricsRecord,
    control_dropped: u64,
    trace: Option<Traces>,
    processed: u64,
}

impl<'c> Sim<'c> {
    fn new(cfg: &'c ScenarioConfig, seeds: SeedTree, motion: Motion) -> Self {
        let n = cfg.network.node_count();
        let flows = resolve_flows(cfg, &seeds);
        let trace = cfg.trace.then(|| Traces {
            mobility: format!("{TRACE_HEADER}\n"),
            events: format!("{EVENTS_HEADER}\n"),
            packets: format!("{PACKETS_HEADER}\n"),
        });
        let snapshot = Self::snapshot_of(cfg, &motion);
        let mut sim = Sim {
            cfg,
            tick_ns: nanos(cfg.mobility.tick),
            end: SimTime::from_secs(cfg.sim_time),
            now: SimTime::ZERO,
            snapshot,
            motion,
            router: make_router(cfg.protocol, n, &cfg.routing),
            events: EventQueue::new(),
            macs: (0..n).map(|_| Mac::default()).collect(),
            channel: Channel::new(n, cfg.link.collision),
            in_air: Default::default(),
            mac_rng: seeds.stream(Stream::Mac, 0, 0),
            proto_rng: seeds.stream(Stream::Protocol, 0, 0),
            flow_seq: vec![0; flows.len()],
            record: MetricsRecord { flows: vec![FlowTally::default(); flows.len()], ..Default::default() },
            flows,
            packets: Vec::new(),
            control_dropped: 0,
            trace,
            processed: 0,
        };
        sim.trace_positions();
        sim
    }

    fn snapshot_of(cfg: &ScenarioConfig, motion: &Motion) -> TopologySnapshot {
        let states = motion.states();
        let time = motion.tick() as f64 * cfg.mobility.tick;
        let graph = build_connectivity(&states, cfg.link.comm_range, time).expect("dense node ids");
        let positions = states.iter().map(|s| s.position).collect();
        TopologySnapshot::new(motion.tick(), graph, positions, cfg.routing.intra_weight)
    }

    fn trace_positions(&mut self) {
        if let Some(t) = &mut self.trace {
            write_state_rows(&mut t.mobility, self.motion.tick(), &self.motion.states());
        }
    }

    fn tick(&self) -> u64 {
        self.snapshot.tick()
    }

    fn sync_mobility(&mut self, time: SimTime) {
        let target = time.nanos() / self.tick_ns;
        while self.motion.tick() < target {
            self.motion.advance();
            self.snapshot = Self::snapshot_of(self.cfg, &self.motion);
            self.trace_positions();
        }
    }

    fn log(&mut self, node: usize, event: &str, seq: u8, bytes: u32) {
        let (now, tick) = (self.now.nanos(), self.tick());
        if let Some(t) = &mut self.trace {
            event_row(&mut t.events, now, tick, node, event, seq, bytes);
        }
    }

    fn run(mut self) -> RunOutput {
        for (f, flow) in self.flows.iter().enumerate() {
            if let Some(t) = emission(flow, 0, self.cfg.sim_time) {
                self.events.push(t, Ev::Traffic { flow: f, k: 0 });
            }
        }
        if self.cfg.protocol == ProtocolKind::BcDsr && self.cfg.routing.beacon_interval > 0.0 {
            self.events.push(SimTime::ZERO, Ev::Beacon { k: 0 });
        }
        while let Some(t) = self.events.peek_time() {
            if t >= self.end {
                break;
            }
            let (t, _, ev) = self.events.pop().expect("peeked");
            debug_assert!(t >= self.now, "event scheduled in the past");
            self.now = t;
            self.sync_mobility(t);
            self.processed += 1;
            self.dispatch(ev);
        }
        if self.end.nanos() > 0 {
            self.sync_mobility(SimTime(self.end.nanos() - 1));
        }
        self.finish()
    }

    fn dispatch(&mut self, ev: Ev) {
        match ev {
            Ev::Traffic { flow, k } => self.emit(flow, k),
            Ev::Beacon { k } => {
                let n = self.macs.len();
                let bytes = self.cfg.routing.beacon_bytes;
                self.record.control_bytes += n as u64 * bytes as u64;
                self.record.control_packets += n as u64;
                for node in 0..n {
                    self.log(node, "beacon", 0, bytes);
                }
                let next = SimTime(nanos((k + 1) as f64 * self.cfg.routing.beacon_interval));
                self.events.push(next, Ev::Beacon { k: k + 1 });
            }
            Ev::Access { node } => {
                self.macs[node].access_pending = false;
                if self.macs[node].queue.is_empty() || self.channel.is_sending(node) {
                    return;
                }
                if self.channel.busy_at(node) {
                    self.backoff(node);
                } else {
                    self.start_tx(node);
                }
            }
            Ev::TxEnd { id } => self.end_tx(id),
            Ev::Rx { node, from, msg } => self.with_router(|r, ctx| r.receive(ctx, node, from, msg)),
            Ev::Enqueue { node, frame } => self.enqueue(node, frame),
            Ev::Timer { node, timer } => self.with_router(|r, ctx| r.timer(ctx, node, timer)),
        }
    }

    fn emit(&mut self, f: usize, k: u64) {
        let flow = self.flows[f];
        let uid = self.packets.len() as u64;
        let seq = self.flow_seq[f];
        self.flow_seq[f] = seq.wrapping_add(1);
        self.packets.push(PacketInfo { flow: f, fate: None });
        self.record.sent += 1;
        self.record.flows[f].sent += 1;
        let data = DataMsg::new(uid, f, flow.src, flow.dst, seq, flow.payload_bytes, self.now, self.tick());
        self.with_router(|r, ctx| r.originate(ctx, flow.src, data));
        if let Some(t) = emission(&flow, k + 1, self.cfg.sim_time) {
            self.events.push(t, Ev::Traffic { flow: f, k: k + 1 });
        }
    }

    fn with_router<F: FnOnce(&mut dyn Router, &mut Ctx)>(&mut self, f: F) {
        let outputs = {
            let mut ctx = Ctx {
                now: self.now,
                tick_ns: self.tick_ns,
                snapshot: &self.snapshot,
                config: &self.cfg.routing,
                rng: &mut self.proto_rng,
                outputs: Vec::new(),
            };
            f(self.router.as_mut(), &mut ctx);
            ctx.outputs
        };
        for out in outputs {
            self.apply(out);
        }
    }

    fn apply(&mut self, out: Output) {
        match out {
            Output::Send { from, to, msg, delay_ns } => {
                let frame = Frame { to, msg, attempts: 0 };
                if delay_ns == 0 {
                    self.enqueue(from, frame);
                } else {
                    self.events.push(self.now.after(delay_ns), Ev::Enqueue { node: from, frame });
                }
            }
            Output::Deliver { node, data } => {
                debug_assert_eq!(node, data.dst);
                self.resolve(node, &data, Fate::Delivered);
            }
            Output::Discard { node, data, reason } => self.resolve(node, &data, Fate::Discarded(reason)),
            Output::ControlDropped { node, kind } => {
                self.control_dropped += 1;
                self.log(node, &format!("drop-{}", kind.as_str()), 0, 0);
            }
            Output::Timer { node, delay_ns, timer } => {
                self.events.push(self.now.after(delay_ns), Ev::Timer { node, timer });
            }
            Output::Log { node, event, seq } => self.log(node, event, seq, 0),
        }
    }

    /// Records the final fate of a data packet held by `node`.
    fn resolve(&mut self, node: usize, data: &DataMsg, fate: Fate) {
        let info = &mut self.packets[data.uid as usize];
        assert!(info.fate.is_none(), "packet {} resolved twice", data.uid);
        info.fate = Some(fate);
        self.record.flows[data.flow].record(fate);
        if fate == Fate::Delivered {
            self.record.delivered += 1;
            self.record.latencies.push(self.now.since(data.created) as f64 / 1e9);
        }
        let row = packet_row(data, node, fate, Some(self.now.nanos()));
        let (now, tick) = (self.now.nanos(), self.tick());
        if let Some(t) = &mut self.trace {
            event_row(&mut t.events, now, tick, node, &fate.label(), data.seq, 0);
            row.write(&mut t.packets);
        }
    }

    fn drop_frame(&mut self, node: usize, frame: &Frame, loss: LossReason) {
        match &frame.msg {
            Message::Data(d) => self.resolve(node, d, Fate::Lost(loss)),
            m => {
                self.control_dropped += 1;
                self.log(node, &format!("drop-{}", m.kind().as_str()), 0, 0);
            }
        }
    }

    fn enqueue(&mut self, node: usize, frame: Frame) {
        if self.macs[node].queue.len() >= self.cfg.link.queue_capacity {
            self.drop_frame(node, &frame, LossReason::Congestion);
            return;
        }
        self.macs[node].queue.push_back(frame);
        self.kick(node);
    }

    fn kick(&mut self, node: usize) {
        let mac = &self.macs[node];
        if mac.access_pending || mac.queue.is_empty() || self.channel.is_sending(node) {
            return;
        }
        if self.channel.busy_at(node) {
            self.backoff(node);
        } else {
            self.start_tx(node);
        }
    }

    fn backoff(&mut self, node: usize) {
        let attempts = self.macs[node].queue.front().map_or(0, |f| f.attempts);
        let cw = (self.cfg.link.contention_window as u64) << attempts.min(5);
        let slots = 1 + self.mac_rng.random_range(0..cw);
        let delay = nanos(slots as f64 * self.cfg.link.backoff_slot).max(1);
        self.macs[node].access_pending = true;
        self.events.push(self.now.after(delay), Ev::Access { node });
    }

    fn start_tx(&mut self, node: usize) {
        let mut failed = Vec::new();
        let mut chosen = None;
        while let Some(frame) = self.macs[node].queue.pop_front() {
            match frame.to {
                NextHop::Unicast(r) if !self.snapshot.linked(node, r) => failed.push((r, frame)),
                _ => {
                    chosen = Some(frame);
                    break;
                }
            }
        }
        if let Some(mut frame) = chosen {
            let tick = self.tick();
            let bytes = frame.msg.size_bytes(tick, self.cfg.routing.initial_exp);
            let event = match &mut frame.msg {
                Message::Data(d) => {
                    let first = d.trail.is_empty() && node == d.src && frame.attempts == 0;
                    d.trail.push((node, tick));
                    if first {
                        self.record.data_bytes += bytes as u64;
                        "tx-data"
                    } else {
                        "tx-relay"
                    }
                }
                m => {
                    self.record.control_bytes += bytes as u64;
                    self.record.control_packets += 1;
                    match m {
                        Message::Rreq(_) => "tx-rreq",
                        Message::Rrep(_) => "tx-rrep",
                        _ => "tx-rerr",
                    }
                }
            };
            self.log(node, event, frame.msg.seq(), bytes);
            let hearers = self.snapshot.graph().neighbors(node).to_vec();
            let id = self.channel.start(node, hearers);
            let duration = nanos(bytes as f64 * 8.0 / self.cfg.link.data_rate).max(1);
            self.in_air.insert(id, frame);
            self.events.push(self.now.after(duration), Ev::TxEnd { id });
        }
        for (next, frame) in failed {
            self.drop_frame(node, &frame, LossReason::Range);
            self.with_router(|r, ctx| r.link_failed(ctx, node, next, &frame.msg));
        }
        if !self.channel.is_sending(node) {
            self.kick(node);
        }
    }

    fn propagation(&self, from: usize, to: usize) -> u64 {
        match self.cfg.link.propagation {
            Propagation::Ideal => 0,
            Propagation::Distance => {
                let p = self.snapshot.positions();
                nanos(p[from].distance(p[to]) / LIGHT_SPEED)
            }
        }
    }

    fn end_tx(&mut self, id: u64) {
        let airing = self.channel.finish(id);
        let mut frame = self.in_air.remove(&id).expect("frame on the air");
        let sender = airing.sender;
        match frame.to {
            NextHop::Unicast(r) => {
                if airing.clean(r) {
                    let at = self.now.after(self.propagation(sender, r));
                    self.events.push(at, Ev::Rx { node: r, from: sender, msg: frame.msg });
                } else {
                    frame.attempts += 1;
                    if frame.attempts <= self.cfg.link.mac_retries {
                        if let Message::Data(d) = &mut frame.msg {
                            // The retry is a new transmission with its own trail entry.
                            d.trail.pop();
                        }
                        self.macs[sender].queue.push_front(frame);
                    } else {
                        self.drop_frame(sender, &frame, LossReason::Collision);
                    }
                }
            }
            NextHop::Broadcast => {
                for &h in &airing.hearers {
                    if airing.clean(h) {
                        let at = self.now.after(self.propagation(sender, h));
                        self.events.push(at, Ev::Rx { node: h, from: sender, msg: frame.msg.clone() });
                    }
                }
            }
        }
        if !self.macs[sender].queue.is_empty() && !self.macs[sender].access_pending {
            self.backoff(sender);
        }
    }

    fn finish(mut self) -> RunOutput {
        let mut held: Vec<(&DataMsg, usize)> = Vec::new();
        for (node, mac) in self.macs.iter().enumerate() {
            held.extend(mac.queue.iter().filter_map(|f| f.msg.as_data()).map(|d| (d, node)));
        }
        for (id, airing) in self.channel.active() {
            if let Some(d) = self.in_air[&id].msg.as_data() {
                held.push((d, airing.sender));
            }
        }
        for ev in self.events.iter() {
            match ev {
                Ev::Rx { node, msg: Message::Data(d), .. } => held.push((d, *node)),
                Ev::Enqueue { node, frame } => {
                    if let Some(d) = frame.msg.as_data() {
                        held.push((d, *node));
                    }
                }
                _ => {}
            }
        }
        held.extend(self.router.buffered().into_iter().map(|d| (d, d.src)));
        held.sort_by_key(|(d, _)| d.uid);
        let in_flight_observed = held.len() as u64;

        let mut rows = String::new();
        for &(d, node) in &held {
            packet_row(d, node, Fate::InFlight, None).write(&mut rows);
        }
        for info in &self.packets {
            if info.fate.is_none() {
                self.record.flows[info.flow].record(Fate::InFlight);
            }
        }
        if let Some(t) = &mut self.trace {
            t.packets.push_str(&rows);
        }
        RunOutput {
            metrics: self.record,
            traces: self.trace,
            flows: self.flows,
            control_dropped: self.control_dropped,
            in_flight_observed,
            events_processed: self.processed,
        }
    }
}

fn packet_row(d: &DataMsg, holder: usize, fate: Fate, end_ns: Option<u64>) -> PacketRow {
    let mut path: Vec<usize> = d.trail.iter().map(|&(n, _)| n).collect();
    if fate == Fate::Delivered || path.last() != Some(&holder) {
        path.push(holder);
    }
    PacketRow {
        uid: d.uid,
        flow: d.flow,
        src: d.src,
        dst: d.dst,
        seq: d.seq,
        created_ns: d.created.nanos(),
        fate,
        end_ns,
        path,
        ticks: d.trail.iter().map(|&(_, t)| t).collect(),
    }
}
