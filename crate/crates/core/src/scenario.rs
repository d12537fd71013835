//! Scenario configuration: TOML in, validated config out, and a complete
//! echo with every default spelled out.

use std::fmt;
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::metrics::JitterMode;
use crate::mobility::{MobilityModel, MobilityParams};
use crate::protocol::{ProtocolConfig, ProtocolKind};

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("cannot read {path}: {source}")]
    Io { path: String, source: std::io::Error },
    #[error("cannot parse config: {0}")]
    Parse(#[from] toml::de::Error),
    #[error("invalid config:\n{}", .0.iter().map(|p| format!("  - {p}")).collect::<Vec<_>>().join("\n"))]
    Invalid(Vec<String>),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct NetworkConfig {
    /// Number of groups (N1).
    pub groups: usize,
    /// Nodes per group (N2), leader included.
    pub nodes_per_group: usize,
    /// Initial distance between neighbouring group centres, meters.
    pub group_spacing: f64,
}

impl Default for NetworkConfig {
    fn default() -> Self {
        NetworkConfig { groups: 6, nodes_per_group: 6, group_spacing: 150.0 }
    }
}

impl NetworkConfig {
    pub fn node_count(&self) -> usize {
        self.groups * self.nodes_per_group
    }

    pub fn label(&self) -> String {
        format!("{}x{}", self.groups, self.nodes_per_group)
    }
}

/// A flow with fixed endpoints.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FlowSpec {
    pub src: usize,
    pub dst: usize,
    /// bits/s
    pub rate: f64,
    pub payload_bytes: u32,
    /// seconds
    pub start: f64,
    pub stop: f64,
}

impl FlowSpec {
    /// Seconds between two packets; `None` for a silent flow.
    pub fn interval(&self) -> Option<f64> {
        (self.rate > 0.0 && self.payload_bytes > 0).then(|| self.payload_bytes as f64 * 8.0 / self.rate)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct TrafficConfig {
    /// Flows with random cross-group endpoints; ignored when `pinned` is set.
    pub flows: usize,
    /// bits/s per flow
    pub data_rate: f64,
    pub payload_bytes: u32,
    pub start: f64,
    pub stop: f64,
    pub pinned: Vec<FlowSpec>,
}

impl Default for TrafficConfig {
    fn default() -> Self {
        TrafficConfig {
            flows: 4,
            data_rate: 100_000.0,
            payload_bytes: 1000,
            start: 0.0,
            stop: f64::INFINITY,
            pinned: Vec::new(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Propagation {
    #[default]
    Ideal,
    /// distance / speed of light
    Distance,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CollisionMode {
    Ideal,
    #[default]
    ReceiverOverlap,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct LinkModel {
    /// meters
    pub comm_range: f64,
    /// bits/s
    pub data_rate: f64,
    pub propagation: Propagation,
    pub collision: CollisionMode,
    /// Frames per node transmit queue.
    pub queue_capacity: usize,
    /// Extra attempts of a unicast frame lost to a collision.
    pub mac_retries: u32,
    /// Backoff slot, seconds.
    pub backoff_slot: f64,
    /// Initial contention window, slots.
    pub contention_window: u32,
}

impl Default for LinkModel {
    fn default() -> Self {
        LinkModel {
            comm_range: 250.0,
            data_rate: 2_000_000.0,
            propagation: Propagation::Ideal,
            collision: CollisionMode::ReceiverOverlap,
            queue_capacity: 64,
            mac_retries: 3,
            backoff_slot: 20e-6,
            contention_window: 32,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct MetricFlags {
    pub jitter: JitterMode,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ScenarioConfig {
    pub protocol: ProtocolKind,
    /// seconds
    pub sim_time: f64,
    pub seeds: Vec<u64>,
    /// Export mobility, event and packet traces.
    pub trace: bool,
    pub mobility_model: MobilityModel,
    pub network: NetworkConfig,
    pub mobility: MobilityParams,
    pub traffic: TrafficConfig,
    pub link: LinkModel,
    pub routing: ProtocolConfig,
    pub metrics: MetricFlags,
}

impl Default for ScenarioConfig {
    fn default() -> Self {
        ScenarioConfig {
            protocol: ProtocolKind::BcDsr,
            sim_time: 100.0,
            seeds: (1..=10).collect(),
            trace: false,
            mobility_model: MobilityModel::Gmg,
            network: NetworkConfig::default(),
            mobility: MobilityParams::marching(),
            traffic: TrafficConfig::default(),
            link: LinkModel::default(),
            routing: ProtocolConfig::default(),
            metrics: MetricFlags::default(),
        }
    }
}

fn check(issues: &mut Vec<String>, ok: bool, msg: impl fmt::Display) {
    if !ok {
        issues.push(msg.to_string());
    }
}

impl ScenarioConfig {
    /// The marching-formation reference scenario: 6x6 GMG formation, 100 s.
    pub fn table1() -> Self {
        ScenarioConfig::default()
    }

    pub fn parse(text: &str) -> Result<Self, ConfigError> {
        let cfg: ScenarioConfig = toml::from_str(text)?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Io {
            path: path.display().to_string(),
            source,
        })?;
        Self::parse(&text)
    }

    /// Full TOML rendering, defaults included; parses back to `self`.
    pub fn echo(&self) -> String {
        toml::to_string(self).expect("config is serialisable")
    }

    /// Every violated constraint, not just the first.
    pub fn issues(&self) -> Vec<String> {
        let mut v = Vec::new();
        let n = self.network.node_count();
        check(&mut v, n >= 3, format_args!("network: N1*N2 = {n}, need at least 3 nodes"));
        check(&mut v, self.network.groups >= 1, "network.groups: must be >= 1");
        check(&mut v, self.network.nodes_per_group >= 1, "network.nodes_per_group: must be >= 1");
        check(
            &mut v,
            self.network.group_spacing.is_finite() && self.network.group_spacing >= 0.0,
            "network.group_spacing: must be finite and >= 0",
        );
        check(&mut v, n <= u32::MAX as usize, "network: too many nodes for 32-bit addresses");
        if let Err(e) = self.mobility.validate() {
            v.push(format!("mobility: {e}"));
        }
        check(&mut v, self.sim_time.is_finite() && self.sim_time > 0.0, "sim_time: must be finite and > 0");
        check(&mut v, !self.seeds.is_empty(), "seeds: need at least one seed");

        let t = &self.traffic;
        check(&mut v, t.data_rate.is_finite() && t.data_rate >= 0.0, "traffic.data_rate: must be finite and >= 0");
        check(&mut v, t.start.is_finite() && t.start >= 0.0, "traffic.start: must be finite and >= 0");
        check(&mut v, !t.stop.is_nan(), "traffic.stop: must be a number");
        for (i, f) in t.pinned.iter().enumerate() {
            check(&mut v, f.src < n && f.dst < n, format_args!("traffic.pinned[{i}]: endpoint outside 0..{n}"));
            check(&mut v, f.src != f.dst, format_args!("traffic.pinned[{i}]: src equals dst"));
            check(&mut v, f.rate.is_finite() && f.rate >= 0.0, format_args!("traffic.pinned[{i}]: bad rate"));
            check(&mut v, f.start.is_finite() && f.start >= 0.0, format_args!("traffic.pinned[{i}]: bad start"));
            check(&mut v, !f.stop.is_nan(), format_args!("traffic.pinned[{i}]: bad stop"));
        }
        if t.pinned.is_empty() && t.flows > 0 {
            check(&mut v, n >= 2, "traffic.flows: need two nodes for a flow");
        }

        let l = &self.link;
        check(&mut v, l.comm_range.is_finite() && l.comm_range > 0.0, "link.comm_range: must be finite and > 0");
        check(&mut v, l.data_rate.is_finite() && l.data_rate > 0.0, "link.data_rate: must be finite and > 0");
        check(&mut v, l.queue_capacity >= 1, "link.queue_capacity: must be >= 1");
        check(&mut v, l.backoff_slot.is_finite() && l.backoff_slot >= 0.0, "link.backoff_slot: must be >= 0");
        check(&mut v, l.contention_window >= 1, "link.contention_window: must be >= 1");

        let r = &self.routing;
        check(&mut v, (1..=254).contains(&r.max_hops), "routing.max_hops: must lie in 1..=254");
        check(&mut v, r.initial_exp >= 1, "routing.initial_exp: must be >= 1");
        check(
            &mut v,
            r.beacon_interval.is_finite() && r.beacon_interval >= 0.0,
            "routing.beacon_interval: must be finite and >= 0",
        );
        check(
            &mut v,
            r.discovery_timeout.is_finite() && r.discovery_timeout > 0.0,
            "routing.discovery_timeout: must be > 0",
        );
        check(&mut v, r.dsr_cache_size >= 1, "routing.dsr_cache_size: must be >= 1");
        check(
            &mut v,
            r.broadcast_jitter.is_finite() && r.broadcast_jitter >= 0.0,
            "routing.broadcast_jitter: must be >= 0",
        );
        check(&mut v, r.buffer_capacity >= 1, "routing.buffer_capacity: must be >= 1");
        v
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        let issues = self.issues();
        if issues.is_empty() {
            Ok(())
        } else {
            Err(ConfigError::Invalid(issues))
        }
    }
}
