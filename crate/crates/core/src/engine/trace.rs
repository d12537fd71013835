//! Delimited-text traces of one run and the metrics recomputed from them.
//!
//! `events.csv`: `time_ns,tick,node,event,seq,bytes`. Transmissions are
//! `tx-data` (first transmission by the source; its bytes are the data
//! bytes), `tx-relay`, `tx-rreq`, `tx-rrep`, `tx-rerr`; `beacon` rows carry
//! one node's beacon bytes. Other events are protocol and fate markers with
//! zero bytes.
//!
//! `packets.csv`: `uid,flow,src,dst,seq,created_ns,fate,end_ns,path,ticks`,
//! one row per data packet in the order fates were decided, packets still
//! in flight last with an empty `end_ns`. `path` lists the transmitting
//! nodes and then the final holder, space separated; `ticks` gives the
//! mobility tick of each transmission.

use std::fmt::Write as _;

use crate::metrics::{Fate, FlowTally, MetricsRecord};

pub const EVENTS_HEADER: &str = "time_ns,tick,node,event,seq,bytes";
pub const PACKETS_HEADER: &str = "uid,flow,src,dst,seq,created_ns,fate,end_ns,path,ticks";

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Traces {
    pub mobility: String,
    pub events: String,
    pub packets: String,
}

impl Traces {
    pub fn write_to(&self, dir: &std::path::Path) -> std::io::Result<()> {
        std::fs::create_dir_all(dir)?;
        std::fs::write(dir.join("mobility.csv"), &self.mobility)?;
        std::fs::write(dir.join("events.csv"), &self.events)?;
        std::fs::write(dir.join("packets.csv"), &self.packets)
    }
}

pub(crate) fn event_row(out: &mut String, time_ns: u64, tick: u64, node: usize, event: &str, seq: u8, bytes: u32) {
    let _ = writeln!(out, "{time_ns},{tick},{node},{event},{seq},{bytes}");
}

#[derive(Debug, Clone, PartialEq)]
pub struct PacketRow {
    pub uid: u64,
    pub flow: usize,
    pub src: usize,
    pub dst: usize,
    pub seq: u8,
    pub created_ns: u64,
    pub fate: Fate,
    pub end_ns: Option<u64>,
    pub path: Vec<usize>,
    pub ticks: Vec<u64>,
}

fn join<T: ToString>(items: &[T]) -> String {
    items.iter().map(T::to_string).collect::<Vec<_>>().join(" ")
}

impl PacketRow {
    pub(crate) fn write(&self, out: &mut String) {
        let end = self.end_ns.map(|t| t.to_string()).unwrap_or_default();
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{},{},{},{}",
            self.uid,
            self.flow,
            self.src,
            self.dst,
            self.seq,
            self.created_ns,
            self.fate.label(),
            end,
            join(&self.path),
            join(&self.ticks)
        );
    }

    /// Seconds from emission to delivery.
    pub fn latency(&self) -> Option<f64> {
        match (self.fate, self.end_ns) {
            (Fate::Delivered, Some(end)) => Some((end - self.created_ns) as f64 / 1e9),
            _ => None,
        }
    }
}

fn bad(line: usize, what: impl std::fmt::Display) -> String {
    format!("line {line}: {what}")
}

fn list<T: std::str::FromStr>(s: &str, line: usize) -> Result<Vec<T>, String> {
    s.split_whitespace().map(|x| x.parse().map_err(|_| bad(line, format!("bad list item `{x}`")))).collect()
}

pub fn parse_packets(text: &str) -> Result<Vec<PacketRow>, String> {
    let mut lines = text.lines().enumerate();
    match lines.next() {
        Some((_, h)) if h == PACKETS_HEADER => {}
        _ => return Err("missing packets header".into()),
    }
    let mut rows = Vec::new();
    for (i, line) in lines {
        let n = i + 1;
        let f: Vec<&str> = line.split(',').collect();
        if f.len() != 10 {
            return Err(bad(n, "expected 10 fields"));
        }
        let int = |s: &str| s.parse::<u64>().map_err(|e| bad(n, e));
        rows.push(PacketRow {
            uid: int(f[0])?,
            flow: int(f[1])? as usize,
            src: int(f[2])? as usize,
            dst: int(f[3])? as usize,
            seq: int(f[4])? as u8,
            created_ns: int(f[5])?,
            fate: Fate::parse(f[6]).ok_or_else(|| bad(n, format!("bad fate `{}`", f[6])))?,
            end_ns: if f[7].is_empty() { None } else { Some(int(f[7])?) },
            path: list(f[8], n)?,
            ticks: list(f[9], n)?,
        });
    }
    Ok(rows)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EventRow {
    pub time_ns: u64,
    pub tick: u64,
    pub node: usize,
    pub event: String,
    pub seq: u8,
    pub bytes: u32,
}

pub fn parse_events(text: &str) -> Result<Vec<EventRow>, String> {
    let mut lines = text.lines().enumerate();
    match lines.next() {
        Some((_, h)) if h == EVENTS_HEADER => {}
        _ => return Err("missing events header".into()),
    }
    let mut rows = Vec::new();
    for (i, line) in lines {
        let n = i + 1;
        let f: Vec<&str> = line.split(',').collect();
        if f.len() != 6 {
            return Err(bad(n, "expected 6 fields"));
        }
        let int = |s: &str| s.parse::<u64>().map_err(|e| bad(n, e));
        rows.push(EventRow {
            time_ns: int(f[0])?,
            tick: int(f[1])?,
            node: int(f[2])? as usize,
            event: f[3].to_string(),
            seq: int(f[4])? as u8,
            bytes: int(f[5])? as u32,
        });
    }
    Ok(rows)
}

/// Rebuilds the run's metrics record from its exported traces.
pub fn metrics_from_traces(packets: &[PacketRow], events: &[EventRow], flows: usize) -> MetricsRecord {
    let mut rec = MetricsRecord { flows: vec![FlowTally::default(); flows], ..Default::default() };
    for p in packets {
        rec.sent += 1;
        rec.flows[p.flow].sent += 1;
        rec.flows[p.flow].record(p.fate);
        if let Some(l) = p.latency() {
            rec.delivered += 1;
            rec.latencies.push(l);
        }
    }
    for e in events {
        match e.event.as_str() {
            "tx-data" => rec.data_bytes += e.bytes as u64,
            "tx-rreq" | "tx-rrep" | "tx-rerr" | "beacon" => {
                rec.control_bytes += e.bytes as u64;
                rec.control_packets += 1;
            }
            _ => {}
        }
    }
    rec
}
