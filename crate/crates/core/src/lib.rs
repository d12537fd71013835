//! Simulator for betweenness-centrality source routing in flying ad hoc
//! networks that march in formation.
//!
//! Layers, bottom up: [`mobility`] moves the nodes, [`graph`] turns a
//! snapshot of positions into a connectivity graph with centrality-derived
//! weights, [`protocol`] holds the routers, [`engine`] runs them against a
//! shared radio medium, and [`metrics`] reduces what happened to four
//! numbers. [`scenario`], [`experiment`] and [`plot`] wrap runs into sweeps
//! and figure series.

pub mod engine;
pub mod experiment;
pub mod geom;
pub mod graph;
pub mod metrics;
pub mod mobility;
pub mod plot;
pub mod protocol;
pub mod rng;
pub mod scenario;
pub mod time;

pub use engine::{run, run_with_positions, EngineError, RunOutput};
pub use scenario::{ConfigError, ScenarioConfig};
