//! Figure series from sweep results.
//!
//! Output is `figure,metric,series,x,y`, one line per (metric, series,
//! x point), with `y = null` where the results lack the cell. The points
//! of each series are the full axis, so gaps stay visible.

use std::fmt::Write as _;

use thiserror::Error;

use crate::experiment::{Axis, SweepResults, DATA_RATES, NETWORK_SIZES};
use crate::metrics::{fmt_metric, Summary};
use crate::mobility::MobilityModel;
use crate::protocol::ProtocolKind;

pub const SERIES_HEADER: &str = "figure,metric,series,x,y";

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Metric {
    AvgE2e,
    Pdr,
    Jitter,
    Ror,
}

impl Metric {
    pub fn as_str(self) -> &'static str {
        match self {
            Metric::AvgE2e => "avg_e2e_s",
            Metric::Pdr => "pdr",
            Metric::Jitter => "jitter_s",
            Metric::Ror => "ror",
        }
    }

    fn of(self, s: &Summary) -> Option<f64> {
        match self {
            Metric::AvgE2e => s.avg_e2e,
            Metric::Pdr => s.pdr,
            Metric::Jitter => s.jitter,
            Metric::Ror => s.ror,
        }
    }
}

/// `fig5`: mobility models under aodv-lite against network size.
/// `fig6a..d` and `fig7a..d`: protocols under GMG against network size and
/// data rate, panels a-d being latency, PDR, jitter and ROR.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Figure {
    Fig5,
    Fig6(Metric),
    Fig7(Metric),
}

impl Figure {
    pub fn parse(id: &str) -> Option<Self> {
        if id == "fig5" {
            return Some(Figure::Fig5);
        }
        let (base, panel) = id.split_at(id.len().checked_sub(1)?);
        let metric = match panel {
            "a" => Metric::AvgE2e,
            "b" => Metric::Pdr,
            "c" => Metric::Jitter,
            "d" => Metric::Ror,
            _ => return None,
        };
        match base {
            "fig6" => Some(Figure::Fig6(metric)),
            "fig7" => Some(Figure::Fig7(metric)),
            _ => None,
        }
    }

    pub fn id(self) -> String {
        let panel = |m: Metric| match m {
            Metric::AvgE2e => 'a',
            Metric::Pdr => 'b',
            Metric::Jitter => 'c',
            Metric::Ror => 'd',
        };
        match self {
            Figure::Fig5 => "fig5".into(),
            Figure::Fig6(m) => format!("fig6{}", panel(m)),
            Figure::Fig7(m) => format!("fig7{}", panel(m)),
        }
    }

    fn axis(self) -> Axis {
        match self {
            Figure::Fig7(_) => Axis::DataRate,
            _ => Axis::NetworkSize,
        }
    }

    fn metrics(self) -> Vec<Metric> {
        match self {
            Figure::Fig5 => vec![Metric::Pdr, Metric::AvgE2e],
            Figure::Fig6(m) | Figure::Fig7(m) => vec![m],
        }
    }
}

fn axis_points(axis: Axis) -> Vec<f64> {
    match axis {
        Axis::NetworkSize => NETWORK_SIZES.iter().map(|&(g, n)| (g * n) as f64).collect(),
        Axis::DataRate => DATA_RATES.iter().map(|r| r / 1e3).collect(),
    }
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum PlotError {
    #[error("results are empty")]
    Empty,
    #[error("results hold no cells for {0}")]
    NoCells(String),
}

/// Series of one figure from the mean rows of `results`.
pub fn emit_plot_data(results: &SweepResults, figure: Figure) -> Result<String, PlotError> {
    if results.rows.is_empty() {
        return Err(PlotError::Empty);
    }
    let axis = figure.axis();
    let series: Vec<(String, MobilityModel, ProtocolKind)> = match figure {
        Figure::Fig5 => MobilityModel::ALL
            .into_iter()
            .map(|m| (m.as_str().to_string(), m, ProtocolKind::AodvLite))
            .collect(),
        _ => ProtocolKind::ALL
            .into_iter()
            .map(|p| (p.as_str().to_string(), MobilityModel::Gmg, p))
            .collect(),
    };
    let relevant = results
        .means()
        .any(|r| r.axis == axis && series.iter().any(|&(_, m, p)| r.mobility == m && r.protocol == p));
    if !relevant {
        return Err(PlotError::NoCells(figure.id()));
    }
    let id = figure.id();
    let mut out = String::from(SERIES_HEADER);
    out.push('\n');
    for metric in figure.metrics() {
        for (name, model, protocol) in &series {
            for x in axis_points(axis) {
                let y = results
                    .means()
                    .find(|r| r.axis == axis && r.mobility == *model && r.protocol == *protocol && r.x == x)
                    .and_then(|r| metric.of(&r.summary));
                let _ = writeln!(out, "{id},{},{name},{x},{}", metric.as_str(), fmt_metric(y));
            }
        }
    }
    Ok(out)
}

pub const ALL_FIGURES: [&str; 9] = ["fig5", "fig6a", "fig6b", "fig6c", "fig6d", "fig7a", "fig7b", "fig7c", "fig7d"];

#[cfg(test)]
mod tests {
    use super::*;
    use crate::experiment::{ResultRow, RowKind};

    fn mean(axis: Axis, x: f64, mobility: MobilityModel, protocol: ProtocolKind, pdr: f64) -> ResultRow {
        ResultRow {
            kind: RowKind::Mean,
            axis,
            x,
            network: "6x6".into(),
            data_rate: 1e5,
            mobility,
            protocol,
            seed: None,
            summary: Summary { avg_e2e: Some(0.01), pdr: Some(pdr), jitter: None, ror: Some(0.1) },
            counts: [0.0; 13],
        }
    }

    #[test]
    fn ids_round_trip() {
        for id in ALL_FIGURES {
            assert_eq!(Figure::parse(id).unwrap().id(), id);
        }
        for bad in ["fig6", "fig6e", "fig8a", "", "a"] {
            assert_eq!(Figure::parse(bad), None, "{bad}");
        }
    }

    #[test]
    fn gaps_are_null() {
        let res = SweepResults {
            rows: vec![mean(Axis::NetworkSize, 36.0, MobilityModel::Gmg, ProtocolKind::BcDsr, 0.9)],
        };
        let text = emit_plot_data(&res, Figure::parse("fig6b").unwrap()).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines.len(), 1 + 3 * 4);
        assert_eq!(lines[1], "fig6b,pdr,bc-dsr,36,0.9");
        assert_eq!(lines[2], "fig6b,pdr,bc-dsr,72,null");
        assert!(lines[5].starts_with("fig6b,pdr,aodv-lite,36,null"));
        // Jitter undefined in the cell: still a gap.
        let text = emit_plot_data(&res, Figure::parse("fig6c").unwrap()).unwrap();
        assert_eq!(text.lines().nth(1), Some("fig6c,jitter_s,bc-dsr,36,null"));
    }

    #[test]
    fn fig5_uses_models_under_aodv() {
        let res = SweepResults {
            rows: vec![
                mean(Axis::NetworkSize, 36.0, MobilityModel::Rpg, ProtocolKind::AodvLite, 0.5),
                mean(Axis::NetworkSize, 36.0, MobilityModel::Rpg, ProtocolKind::BcDsr, 0.7),
            ],
        };
        let text = emit_plot_data(&res, Figure::Fig5).unwrap();
        assert_eq!(text.lines().count(), 1 + 2 * 3 * 4);
        assert!(text.contains("fig5,pdr,rpg,36,0.5\n"));
        assert!(text.contains("fig5,avg_e2e_s,gmg,36,null\n"));
    }

    #[test]
    fn empty_or_unrelated_results_fail() {
        assert_eq!(emit_plot_data(&SweepResults::default(), Figure::Fig5), Err(PlotError::Empty));
        let res = SweepResults {
            rows: vec![mean(Axis::DataRate, 100.0, MobilityModel::Gmg, ProtocolKind::BcDsr, 0.9)],
        };
        assert_eq!(emit_plot_data(&res, Figure::Fig5), Err(PlotError::NoCells("fig5".into())));
        assert!(emit_plot_data(&res, Figure::Fig7(Metric::Pdr)).is_ok());
    }
}
