//! Sweeps: many runs over one axis, written as a results table into a
//! directory named after its inputs.
//!
//! `results.csv` has one `run` row per (mobility model, axis value,
//! protocol, seed) and, after the runs of each cell, one `mean` row with
//! the mean over seeds of every column (metrics over the seeds where they
//! are defined).

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::engine::{run, EngineError};
use crate::metrics::{fmt_metric, mean_defined, parse_metric, DiscardReason, LossReason, Summary};
use crate::mobility::MobilityModel;
use crate::protocol::ProtocolKind;
use crate::scenario::ScenarioConfig;

/// Network sizes of the size axis, as (groups, nodes per group).
pub const NETWORK_SIZES: [(usize, usize); 4] = [(6, 6), (6, 12), (10, 10), (12, 12)];
/// Data rates of the rate axis, bit/s.
pub const DATA_RATES: [f64; 6] = [100e3, 200e3, 300e3, 400e3, 500e3, 600e3];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Axis {
    NetworkSize,
    DataRate,
}

impl Axis {
    pub fn as_str(self) -> &'static str {
        match self {
            Axis::NetworkSize => "network_size",
            Axis::DataRate => "data_rate",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        [Axis::NetworkSize, Axis::DataRate].into_iter().find(|a| a.as_str() == s)
    }

    /// Number of points along the axis.
    pub fn point_count(self) -> usize {
        match self {
            Axis::NetworkSize => NETWORK_SIZES.len(),
            Axis::DataRate => DATA_RATES.len(),
        }
    }

    /// Applies point `i` to `config`.
    fn apply(self, i: usize, config: &mut ScenarioConfig) {
        match self {
            Axis::NetworkSize => {
                let (g, n) = NETWORK_SIZES[i];
                config.network.groups = g;
                config.network.nodes_per_group = n;
            }
            Axis::DataRate => config.traffic.data_rate = DATA_RATES[i],
        }
    }

    /// The x coordinate of a configured cell: node count or kbit/s.
    pub fn x_of(self, config: &ScenarioConfig) -> f64 {
        match self {
            Axis::NetworkSize => config.network.node_count() as f64,
            Axis::DataRate => config.traffic.data_rate / 1e3,
        }
    }
}

/// Everything a sweep depends on; its serialized form names the output.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepPlan {
    pub axis: Axis,
    pub seeds: Vec<u64>,
    pub protocols: Vec<ProtocolKind>,
    pub models: Vec<MobilityModel>,
    pub base: ScenarioConfig,
}

impl SweepPlan {
    /// All protocols under the base config's mobility model, seeds `1..=k`.
    pub fn new(base: ScenarioConfig, axis: Axis, seeds: u64) -> Self {
        SweepPlan {
            axis,
            seeds: (1..=seeds).collect(),
            protocols: ProtocolKind::ALL.to_vec(),
            models: vec![base.mobility_model],
            base,
        }
    }

    /// Cell configs in output order: model, then axis point, then protocol.
    pub fn cells(&self) -> Vec<ScenarioConfig> {
        let mut out = Vec::new();
        for &model in &self.models {
            for i in 0..self.axis.point_count() {
                for &protocol in &self.protocols {
                    let mut c = self.base.clone();
                    c.mobility_model = model;
                    c.protocol = protocol;
                    c.trace = false;
                    self.axis.apply(i, &mut c);
                    out.push(c);
                }
            }
        }
        out
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("sweep plans serialize")
    }

    /// `<axis>-<first 16 hex digits of the SHA-256 of the plan>`.
    pub fn dir_name(&self) -> String {
        let digest = Sha256::digest(self.to_toml().as_bytes());
        let hex: String = digest.iter().take(8).map(|b| format!("{b:02x}")).collect();
        format!("{}-{hex}", self.axis.as_str())
    }
}

#[derive(Debug, Error)]
pub enum SweepError {
    #[error("sweep has no {0}")]
    Empty(&'static str),
    #[error("cell {cell} seed {seed} failed: {source}")]
    Cell {
        cell: String,
        seed: u64,
        #[source]
        source: EngineError,
    },
    #[error("writing {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RowKind {
    Run,
    Mean,
}

/// Count columns, in table order.
pub const COUNT_COLUMNS: [&str; 13] = [
    "sent",
    "delivered",
    "in_flight",
    "lost_range",
    "lost_collision",
    "lost_congestion",
    "discard_expired",
    "discard_hop_limit",
    "discard_protocol",
    "discard_no_route",
    "discard_link_break",
    "control_bytes",
    "data_bytes",
];

pub const RESULTS_HEADER: &str = "kind,axis,x,network,data_rate,mobility,protocol,seed,avg_e2e_s,pdr,jitter_s,ror,sent,delivered,in_flight,lost_range,lost_collision,lost_congestion,discard_expired,discard_hop_limit,discard_protocol,discard_no_route,discard_link_break,control_bytes,data_bytes";

#[derive(Debug, Clone, PartialEq)]
pub struct ResultRow {
    pub kind: RowKind,
    pub axis: Axis,
    pub x: f64,
    /// `<groups>x<nodes per group>`.
    pub network: String,
    /// bit/s
    pub data_rate: f64,
    pub mobility: MobilityModel,
    pub protocol: ProtocolKind,
    /// `None` on mean rows.
    pub seed: Option<u64>,
    pub summary: Summary,
    pub counts: [f64; 13],
}

impl ResultRow {
    fn of_run(axis: Axis, config: &ScenarioConfig, seed: u64, out: &crate::RunOutput) -> Self {
        let m = &out.metrics;
        let t = m.totals();
        let mut counts = [0.0; 13];
        counts[0] = t.sent as f64;
        counts[1] = t.delivered as f64;
        counts[2] = t.in_flight as f64;
        for (i, r) in LossReason::ALL.into_iter().enumerate() {
            counts[3 + i] = t.lost(r) as f64;
        }
        for (i, r) in DiscardReason::ALL.into_iter().enumerate() {
            counts[6 + i] = t.discarded(r) as f64;
        }
        counts[11] = m.control_bytes as f64;
        counts[12] = m.data_bytes as f64;
        ResultRow {
            kind: RowKind::Run,
            axis,
            x: axis.x_of(config),
            network: config.network.label(),
            data_rate: config.traffic.data_rate,
            mobility: config.mobility_model,
            protocol: config.protocol,
            seed: Some(seed),
            summary: Summary::of(m, config.metrics.jitter),
            counts,
        }
    }

    fn mean_of(runs: &[ResultRow]) -> Self {
        let first = &runs[0];
        let k = runs.len() as f64;
        let mut counts = [0.0; 13];
        for r in runs {
            for (c, v) in counts.iter_mut().zip(r.counts) {
                *c += v;
            }
        }
        counts.iter_mut().for_each(|c| *c /= k);
        let mean = |f: fn(&Summary) -> Option<f64>| mean_defined(runs.iter().map(|r| f(&r.summary)));
        ResultRow {
            kind: RowKind::Mean,
            seed: None,
            summary: Summary {
                avg_e2e: mean(|s| s.avg_e2e),
                pdr: mean(|s| s.pdr),
                jitter: mean(|s| s.jitter),
                ror: mean(|s| s.ror),
            },
            counts,
            ..first.clone()
        }
    }

    /// Same cell as `other`, ignoring seed and kind.
    pub fn same_cell(&self, other: &ResultRow) -> bool {
        self.axis == other.axis && self.x == other.x && self.mobility == other.mobility && self.protocol == other.protocol
    }

    fn write(&self, out: &mut String) {
        let kind = match self.kind {
            RowKind::Run => "run",
            RowKind::Mean => "mean",
        };
        let seed = self.seed.map(|s| s.to_string()).unwrap_or_default();
        let s = &self.summary;
        let _ = write!(
            out,
            "{kind},{},{},{},{},{},{},{seed},{},{},{},{}",
            self.axis.as_str(),
            self.x,
            self.network,
            self.data_rate,
            self.mobility.as_str(),
            self.protocol.as_str(),
            fmt_metric(s.avg_e2e),
            fmt_metric(s.pdr),
            fmt_metric(s.jitter),
            fmt_metric(s.ror),
        );
        for c in self.counts {
            let _ = write!(out, ",{c}");
        }
        out.push('\n');
    }
}

/// The rows of a sweep, runs of each cell followed by its mean row.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct SweepResults {
    pub rows: Vec<ResultRow>,
}

impl SweepResults {
    pub fn runs(&self) -> impl Iterator<Item = &ResultRow> {
        self.rows.iter().filter(|r| r.kind == RowKind::Run)
    }

    pub fn means(&self) -> impl Iterator<Item = &ResultRow> {
        self.rows.iter().filter(|r| r.kind == RowKind::Mean)
    }

    /// Mean row of a cell.
    pub fn mean(&self, mobility: MobilityModel, protocol: ProtocolKind, x: f64) -> Option<&ResultRow> {
        self.means().find(|r| r.mobility == mobility && r.protocol == protocol && r.x == x)
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from(RESULTS_HEADER);
        out.push('\n');
        for r in &self.rows {
            r.write(&mut out);
        }
        out
    }

    pub fn parse(text: &str) -> Result<Self, String> {
        let mut lines = text.lines().enumerate();
        match lines.next() {
            Some((_, h)) if h == RESULTS_HEADER => {}
            _ => return Err("missing results header".into()),
        }
        let mut rows = Vec::new();
        for (i, line) in lines {
            let n = i + 1;
            let f: Vec<&str> = line.split(',').collect();
            if f.len() != 25 {
                return Err(format!("line {n}: expected 25 fields, found {}", f.len()));
            }
            let bad = |what: &str, v: &str| format!("line {n}: bad {what} `{v}`");
            let num = |v: &str, what: &str| v.parse::<f64>().map_err(|_| bad(what, v));
            let metric = |v: &str| parse_metric(v).map_err(|_| bad("metric", v));
            let mut counts = [0.0; 13];
            for (j, c) in counts.iter_mut().enumerate() {
                *c = num(f[12 + j], COUNT_COLUMNS[j])?;
            }
            rows.push(ResultRow {
                kind: match f[0] {
                    "run" => RowKind::Run,
                    "mean" => RowKind::Mean,
                    v => return Err(bad("kind", v)),
                },
                axis: Axis::parse(f[1]).ok_or_else(|| bad("axis", f[1]))?,
                x: num(f[2], "x")?,
                network: f[3].to_string(),
                data_rate: num(f[4], "data_rate")?,
                mobility: MobilityModel::parse(f[5]).ok_or_else(|| bad("mobility", f[5]))?,
                protocol: ProtocolKind::parse(f[6]).ok_or_else(|| bad("protocol", f[6]))?,
                seed: if f[7].is_empty() { None } else { Some(f[7].parse().map_err(|_| bad("seed", f[7]))?) },
                summary: Summary { avg_e2e: metric(f[8])?, pdr: metric(f[9])?, jitter: metric(f[10])?, ror: metric(f[11])? },
                counts,
            });
        }
        Ok(SweepResults { rows })
    }
}

pub const RUN_HEADER: &str = "protocol,network,data_rate,mobility,seed,avg_e2e_s,pdr,jitter_s,ror,sent,delivered,in_flight,lost_range,lost_collision,lost_congestion,discard_expired,discard_hop_limit,discard_protocol,discard_no_route,discard_link_break,control_bytes,data_bytes";

/// Per-run metrics table of single runs of `config`.
pub fn run_table(config: &ScenarioConfig, runs: &[(u64, crate::RunOutput)]) -> String {
    let mut out = String::from(RUN_HEADER);
    out.push('\n');
    for (seed, output) in runs {
        let row = ResultRow::of_run(Axis::NetworkSize, config, *seed, output);
        let s = &row.summary;
        let _ = write!(
            out,
            "{},{},{},{},{seed},{},{},{},{}",
            row.protocol.as_str(),
            row.network,
            row.data_rate,
            row.mobility.as_str(),
            fmt_metric(s.avg_e2e),
            fmt_metric(s.pdr),
            fmt_metric(s.jitter),
            fmt_metric(s.ror),
        );
        for c in row.counts {
            let _ = write!(out, ",{c}");
        }
        out.push('\n');
    }
    out
}

/// Runs every (cell, seed) of the plan in parallel and assembles the rows
/// in plan order. The first failing job in that order is reported.
pub fn sweep(plan: &SweepPlan) -> Result<SweepResults, SweepError> {
    for (empty, what) in [
        (plan.seeds.is_empty(), "seeds"),
        (plan.protocols.is_empty(), "protocols"),
        (plan.models.is_empty(), "mobility models"),
    ] {
        if empty {
            return Err(SweepError::Empty(what));
        }
    }
    let cells = plan.cells();
    let jobs: Vec<(usize, u64)> = (0..cells.len()).flat_map(|c| plan.seeds.iter().map(move |&s| (c, s))).collect();
    let outcomes: Vec<Result<ResultRow, EngineError>> = jobs
        .par_iter()
        .map(|&(c, seed)| run(&cells[c], seed).map(|out| ResultRow::of_run(plan.axis, &cells[c], seed, &out)))
        .collect();

    let mut rows = Vec::with_capacity(jobs.len() + cells.len());
    let mut cell_runs = Vec::new();
    for (&(c, seed), outcome) in jobs.iter().zip(outcomes) {
        let row = outcome.map_err(|source| SweepError::Cell { cell: cell_name(plan.axis, &cells[c]), seed, source })?;
        cell_runs.push(row);
        if cell_runs.len() == plan.seeds.len() {
            let mean = ResultRow::mean_of(&cell_runs);
            rows.append(&mut cell_runs);
            rows.push(mean);
        }
    }
    Ok(SweepResults { rows })
}

pub fn cell_name(axis: Axis, config: &ScenarioConfig) -> String {
    format!(
        "{}/{}/{}={}",
        config.protocol.as_str(),
        config.mobility_model.as_str(),
        axis.as_str(),
        axis.x_of(config)
    )
}

/// Writes `sweep.toml` and `results.csv` into `<root>/<plan dir name>` and
/// returns that directory.
pub fn write_sweep(root: &Path, plan: &SweepPlan, results: &SweepResults) -> Result<PathBuf, SweepError> {
    let dir = root.join(plan.dir_name());
    let io = |path: &Path| {
        let path = path.to_path_buf();
        move |source| SweepError::Io { path, source }
    };
    std::fs::create_dir_all(&dir).map_err(io(&dir))?;
    let plan_path = dir.join("sweep.toml");
    std::fs::write(&plan_path, plan.to_toml()).map_err(io(&plan_path))?;
    let results_path = dir.join("results.csv");
    std::fs::write(&results_path, results.to_csv()).map_err(io(&results_path))?;
    Ok(dir)
}
