//! Constant-bit-rate flows.

use rand::Rng;

use crate::rng::{SeedTree, Stream};
use crate::scenario::{FlowSpec, ScenarioConfig};
use crate::time::{nanos, SimTime};

/// Emission times of `flow` strictly before `horizon` seconds: packet `k`
/// leaves at `start + k * interval` while that is before `stop`.
pub fn emission_times(flow: &FlowSpec, horizon: f64) -> impl Iterator<Item = SimTime> + '_ {
    let end = flow.stop.min(horizon);
    let interval = flow.interval();
    (0u64..)
        .map_while(move |k| {
            let t = flow.start + k as f64 * interval?;
            (t < end).then(|| SimTime(nanos(t)))
        })
}

/// The `k`th emission of `flow`, if it falls before `horizon` seconds.
pub fn emission(flow: &FlowSpec, k: u64, horizon: f64) -> Option<SimTime> {
    let t = flow.start + k as f64 * flow.interval()?;
    (t < flow.stop.min(horizon)).then(|| SimTime(nanos(t)))
}

/// Flows of a scenario. Pinned flows are used verbatim; otherwise every
/// flow draws a source uniformly and a destination uniformly among the
/// nodes of other groups, and starts at a random phase of its period.
pub fn resolve_flows(config: &ScenarioConfig, seeds: &SeedTree) -> Vec<FlowSpec> {
    let t = &config.traffic;
    if !t.pinned.is_empty() {
        return t.pinned.clone();
    }
    let n = config.network.node_count();
    let per = config.network.nodes_per_group;
    (0..t.flows)
        .map(|f| {
            let mut rng = seeds.stream(Stream::Endpoints, f as u64, 0);
            let src = rng.random_range(0..n);
            let candidates: Vec<usize> = if config.network.groups > 1 {
                (0..n).filter(|&v| v / per != src / per).collect()
            } else {
                (0..n).filter(|&v| v != src).collect()
            };
            let dst = candidates[rng.random_range(0..candidates.len())];
            let mut phase = seeds.stream(Stream::Traffic, f as u64, 0);
            let mut flow = FlowSpec {
                src,
                dst,
                rate: t.data_rate,
                payload_bytes: t.payload_bytes,
                start: t.start,
                stop: t.stop,
            };
            if let Some(iv) = flow.interval() {
                flow.start += phase.random::<f64>() * iv;
            }
            flow
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn flow(rate: f64, start: f64, stop: f64) -> FlowSpec {
        FlowSpec { src: 0, dst: 1, rate, payload_bytes: 1000, start, stop }
    }

    #[test]
    fn cbr_spacing() {
        let times: Vec<SimTime> = emission_times(&flow(100_000.0, 0.0, 1.0), 100.0).collect();
        assert_eq!(times.len(), 13);
        assert_eq!(times[1], SimTime(80_000_000));
        assert_eq!(emission(&flow(100_000.0, 0.0, 1.0), 12, 100.0), Some(SimTime(960_000_000)));
    }

    #[test]
    fn silent_flows() {
        assert_eq!(emission_times(&flow(0.0, 0.0, 10.0), 100.0).count(), 0);
        assert_eq!(emission_times(&flow(1e5, 5.0, 1.0), 100.0).count(), 0);
        assert_eq!(emission_times(&flow(1e5, 0.0, 10.0), 0.0).count(), 0);
    }

    #[test]
    fn random_flows_cross_groups() {
        let cfg = ScenarioConfig { traffic: crate::scenario::TrafficConfig { flows: 50, ..Default::default() }, ..Default::default() };
        let flows = resolve_flows(&cfg, &SeedTree::new(9));
        assert_eq!(flows.len(), 50);
        for f in &flows {
            assert_ne!(f.src / 6, f.dst / 6);
            assert!(f.start >= 0.0 && f.start < 0.08);
        }
        assert_eq!(flows, resolve_flows(&cfg, &SeedTree::new(9)));
    }
}
