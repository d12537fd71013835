//! Delivery metrics: average end-to-end latency, delivery ratio, jitter and
//! routing overhead ratio.
//!
//! Every metric is `None` when its denominator is empty; callers print that
//! as `null`, never as zero.

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum LossReason {
    /// Receiver out of range when the transmission started.
    Range,
    /// Overlapping receptions, after link-layer retries.
    Collision,
    /// Transmit queue full.
    Congestion,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum DiscardReason {
    Expired,
    HopLimit,
    /// Packet reached a node that is not on its route.
    Protocol,
    /// Source gave up establishing a route.
    NoRoute,
    /// Next hop unreachable at relay time; an error report went upstream.
    LinkBreak,
}

impl LossReason {
    pub const ALL: [LossReason; 3] = [LossReason::Range, LossReason::Collision, LossReason::Congestion];

    pub fn as_str(self) -> &'static str {
        match self {
            LossReason::Range => "range",
            LossReason::Collision => "collision",
            LossReason::Congestion => "congestion",
        }
    }
}

impl DiscardReason {
    pub const ALL: [DiscardReason; 5] = [
        DiscardReason::Expired,
        DiscardReason::HopLimit,
        DiscardReason::Protocol,
        DiscardReason::NoRoute,
        DiscardReason::LinkBreak,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            DiscardReason::Expired => "expired",
            DiscardReason::HopLimit => "hop_limit",
            DiscardReason::Protocol => "protocol",
            DiscardReason::NoRoute => "no_route",
            DiscardReason::LinkBreak => "link_break",
        }
    }
}

/// What finally happened to one data packet.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Fate {
    Delivered,
    Lost(LossReason),
    Discarded(DiscardReason),
    InFlight,
}

impl Fate {
    pub fn label(self) -> String {
        match self {
            Fate::Delivered => "delivered".into(),
            Fate::Lost(r) => format!("lost:{}", r.as_str()),
            Fate::Discarded(r) => format!("discard:{}", r.as_str()),
            Fate::InFlight => "in_flight".into(),
        }
    }

    pub fn parse(label: &str) -> Option<Fate> {
        if label == "delivered" {
            return Some(Fate::Delivered);
        }
        if label == "in_flight" {
            return Some(Fate::InFlight);
        }
        if let Some(r) = label.strip_prefix("lost:") {
            return LossReason::ALL.into_iter().find(|x| x.as_str() == r).map(Fate::Lost);
        }
        let r = label.strip_prefix("discard:")?;
        DiscardReason::ALL.into_iter().find(|x| x.as_str() == r).map(Fate::Discarded)
    }
}

/// Per-flow packet accounting.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct FlowTally {
    pub sent: u64,
    pub delivered: u64,
    pub lost: [u64; 3],
    pub discarded: [u64; 5],
    pub in_flight: u64,
}

impl FlowTally {
    pub fn record(&mut self, fate: Fate) {
        match fate {
            Fate::Delivered => self.delivered += 1,
            Fate::Lost(r) => self.lost[r as usize] += 1,
            Fate::Discarded(r) => self.discarded[r as usize] += 1,
            Fate::InFlight => self.in_flight += 1,
        }
    }

    pub fn lost(&self, r: LossReason) -> u64 {
        self.lost[r as usize]
    }

    pub fn discarded(&self, r: DiscardReason) -> u64 {
        self.discarded[r as usize]
    }

    /// delivered + losses + discards + in flight.
    pub fn accounted(&self) -> u64 {
        self.delivered + self.lost.iter().sum::<u64>() + self.discarded.iter().sum::<u64>() + self.in_flight
    }

    pub fn is_conserved(&self) -> bool {
        self.accounted() == self.sent
    }

    pub fn merge(&mut self, other: &FlowTally) {
        self.sent += other.sent;
        self.delivered += other.delivered;
        for (a, b) in self.lost.iter_mut().zip(other.lost) {
            *a += b;
        }
        for (a, b) in self.discarded.iter_mut().zip(other.discarded) {
            *a += b;
        }
        self.in_flight += other.in_flight;
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct MetricsRecord {
    /// Receive time minus emission time of every delivered packet, seconds.
    pub latencies: Vec<f64>,
    pub sent: u64,
    pub delivered: u64,
    pub control_bytes: u64,
    pub control_packets: u64,
    pub data_bytes: u64,
    pub flows: Vec<FlowTally>,
}

impl MetricsRecord {
    pub fn totals(&self) -> FlowTally {
        let mut t = FlowTally::default();
        for f in &self.flows {
            t.merge(f);
        }
        t
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum JitterMode {
    /// `sqrt(sum (D_i - mean)^2) / (N_R - 1)`, the divisor outside the root.
    #[default]
    Literal,
    /// Conventional sample standard deviation.
    Sample,
}

pub fn avg_e2e(record: &MetricsRecord) -> Option<f64> {
    if record.latencies.is_empty() {
        return None;
    }
    Some(record.latencies.iter().sum::<f64>() / record.latencies.len() as f64)
}

pub fn pdr(record: &MetricsRecord) -> Option<f64> {
    if record.sent == 0 {
        return None;
    }
    Some(record.delivered as f64 / record.sent as f64)
}

pub fn jitter(record: &MetricsRecord, mode: JitterMode) -> Option<f64> {
    let n = record.latencies.len();
    if n < 2 {
        return None;
    }
    let mean = avg_e2e(record)?;
    let ss: f64 = record.latencies.iter().map(|d| (d - mean) * (d - mean)).sum();
    let m = (n - 1) as f64;
    Some(match mode {
        JitterMode::Literal => ss.sqrt() / m,
        JitterMode::Sample => (ss / m).sqrt(),
    })
}

pub fn ror(record: &MetricsRecord) -> Option<f64> {
    if record.data_bytes == 0 {
        return None;
    }
    Some(record.control_bytes as f64 / record.data_bytes as f64)
}

/// The four headline metrics of one run.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub avg_e2e: Option<f64>,
    pub pdr: Option<f64>,
    pub jitter: Option<f64>,
    pub ror: Option<f64>,
}

impl Summary {
    pub fn of(record: &MetricsRecord, mode: JitterMode) -> Self {
        Summary {
            avg_e2e: avg_e2e(record),
            pdr: pdr(record),
            jitter: jitter(record, mode),
            ror: ror(record),
        }
    }
}

/// Text form of a metric: shortest round-trip float, or `null`.
pub fn fmt_metric(value: Option<f64>) -> String {
    match value {
        Some(v) => format!("{v}"),
        None => "null".to_string(),
    }
}

pub fn parse_metric(text: &str) -> Result<Option<f64>, std::num::ParseFloatError> {
    if text == "null" {
        return Ok(None);
    }
    text.parse().map(Some)
}

/// Mean of the defined values; `None` when none is defined.
pub fn mean_defined(values: impl IntoIterator<Item = Option<f64>>) -> Option<f64> {
    let (sum, n) = values
        .into_iter()
        .flatten()
        .fold((0.0, 0usize), |(s, n), v| (s + v, n + 1));
    (n > 0).then(|| sum / n as f64)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn with_latencies(l: &[f64]) -> MetricsRecord {
        MetricsRecord {
            latencies: l.to_vec(),
            sent: l.len() as u64,
            delivered: l.len() as u64,
            ..Default::default()
        }
    }

    #[test]
    fn average_latency() {
        assert!((avg_e2e(&with_latencies(&[0.02, 0.04])).unwrap() - 0.03).abs() < 1e-15);
        assert_eq!(avg_e2e(&with_latencies(&[0.125])), Some(0.125));
        assert_eq!(avg_e2e(&with_latencies(&[])), None);
    }

    #[test]
    fn delivery_ratio() {
        let mut r = MetricsRecord { sent: 100, delivered: 100, ..Default::default() };
        assert_eq!(pdr(&r), Some(1.0));
        r.delivered = 0;
        assert_eq!(pdr(&r), Some(0.0));
        r.sent = 0;
        assert_eq!(pdr(&r), None);
    }

    #[test]
    fn jitter_modes() {
        let r = with_latencies(&[1.0, 3.0]);
        assert_eq!(jitter(&r, JitterMode::Literal), Some(2f64.sqrt()));
        assert_eq!(jitter(&r, JitterMode::Sample), Some(2f64.sqrt()));
        // N = 3, deviations (-1, 0, 1): literal sqrt(2)/2, sample sqrt(2/2) = 1.
        let r = with_latencies(&[1.0, 2.0, 3.0]);
        assert_eq!(jitter(&r, JitterMode::Literal), Some(2f64.sqrt() / 2.0));
        assert_eq!(jitter(&r, JitterMode::Sample), Some(1.0));
        assert_eq!(jitter(&with_latencies(&[4.0, 4.0, 4.0]), JitterMode::Literal), Some(0.0));
        assert_eq!(jitter(&with_latencies(&[4.0]), JitterMode::Literal), None);
    }

    #[test]
    fn overhead_ratio() {
        let mut r = MetricsRecord { control_bytes: 500, data_bytes: 10_000, ..Default::default() };
        assert_eq!(ror(&r), Some(0.05));
        r.control_bytes = 0;
        assert_eq!(ror(&r), Some(0.0));
        r.data_bytes = 0;
        assert_eq!(ror(&r), None);
    }

    #[test]
    fn fate_labels_round_trip() {
        let mut fates = vec![Fate::Delivered, Fate::InFlight];
        fates.extend(LossReason::ALL.map(Fate::Lost));
        fates.extend(DiscardReason::ALL.map(Fate::Discarded));
        for f in fates {
            assert_eq!(Fate::parse(&f.label()), Some(f));
        }
        assert_eq!(Fate::parse("lost:gremlins"), None);
    }

    #[test]
    fn tally_conservation() {
        let mut t = FlowTally { sent: 4, ..Default::default() };
        t.record(Fate::Delivered);
        t.record(Fate::Lost(LossReason::Collision));
        t.record(Fate::Discarded(DiscardReason::Expired));
        assert!(!t.is_conserved());
        t.record(Fate::InFlight);
        assert!(t.is_conserved());
    }

    #[test]
    fn null_markers() {
        assert_eq!(fmt_metric(None), "null");
        assert_eq!(parse_metric("null").unwrap(), None);
        assert_eq!(parse_metric(&fmt_metric(Some(0.1))).unwrap(), Some(0.1));
        assert_eq!(mean_defined([None, Some(1.0), Some(3.0)]), Some(2.0));
        assert_eq!(mean_defined([None, None]), None);
    }

    proptest! {
        #[test]
        fn jitter_is_nonnegative_and_zero_iff_constant(xs in prop::collection::vec(0.001f64..10.0, 2..40)) {
            let r = with_latencies(&xs);
            let j = jitter(&r, JitterMode::Literal).unwrap();
            prop_assert!(j >= 0.0);
            let constant = xs.iter().all(|&x| x == xs[0]);
            prop_assert_eq!(j == 0.0, constant);
        }

        #[test]
        fn dropping_deliveries_never_raises_pdr(sent in 1u64..1000, delivered_frac in 0.0f64..=1.0, removed in 0u64..1000) {
            let delivered = (sent as f64 * delivered_frac) as u64;
            let before = pdr(&MetricsRecord { sent, delivered, ..Default::default() }).unwrap();
            let after = pdr(&MetricsRecord { sent, delivered: delivered.saturating_sub(removed), ..Default::default() }).unwrap();
            prop_assert!(after <= before);
            prop_assert!((0.0..=1.0).contains(&after));
        }
    }
}
