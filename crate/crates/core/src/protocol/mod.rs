//! Discrete-event simulation of one multicast packet epoch under three
//! schemes: cluster-based recovery with CSMA/CA storm avoidance, BS
//! retransmission driven by per-UAV ACKs, and random network coding.

mod benchmark;
mod clustering;
pub mod engine;
mod rnc;

use std::fmt;
use std::io::Write;
use std::str::FromStr;

use crate::channel::{reception_success, LinkKind, RadioParams};
use crate::error::{ensure_positive, Error, Result};
use crate::geometry::{Position3, Topology, UavRef};
use crate::rng::SimRng;

pub use benchmark::run_ack_benchmark_with;
pub use clustering::run_clustering_scheme_with;
pub use engine::{EventQueue, SimTime};
pub use rnc::run_rnc_scheme_with;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Scheme {
    Clustering,
    Benchmark,
    Rnc,
}

impl Scheme {
    pub const ALL: [Scheme; 3] = [Scheme::Clustering, Scheme::Benchmark, Scheme::Rnc];

    pub fn as_str(self) -> &'static str {
        match self {
            Scheme::Clustering => "clustering",
            Scheme::Benchmark => "benchmark",
            Scheme::Rnc => "rnc",
        }
    }
}

impl fmt::Display for Scheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Scheme {
    type Err = String;
    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "clustering" => Ok(Scheme::Clustering),
            "benchmark" => Ok(Scheme::Benchmark),
            "rnc" => Ok(Scheme::Rnc),
            other => Err(format!("expected clustering|benchmark|rnc, got {other:?}")),
        }
    }
}

/// How the BS collects ACKs after a downlink transmission.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum AckSlots {
    /// One `t_ack` slot per outstanding receiver, in UAV-id order.
    #[default]
    Sequential,
    /// All outstanding receivers answer within a single `t_ack` slot.
    Shared,
}

impl AckSlots {
    pub fn as_str(self) -> &'static str {
        match self {
            AckSlots::Sequential => "sequential",
            AckSlots::Shared => "shared",
        }
    }
}

impl FromStr for AckSlots {
    type Err = String;
    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "sequential" => Ok(AckSlots::Sequential),
            "shared" => Ok(AckSlots::Shared),
            other => Err(format!("expected sequential|shared, got {other:?}")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SimParams {
    pub packet_len_ms: f64,
    pub t_req_ms: f64,
    pub t_ack_ms: f64,
    pub slot_us: f64,
    pub cw_min: u32,
    pub cw_max: u32,
    pub max_time_ms: f64,
    /// Coded packets needed to decode under network coding.
    pub generation_size: u32,
    /// Missing UAVs that suppressed their own request also take the reply.
    pub opportunistic_caching: bool,
    pub ack_slots: AckSlots,
    /// Keep an event log in the outcome.
    pub record_log: bool,
}

impl Default for SimParams {
    fn default() -> Self {
        SimParams {
            packet_len_ms: 10.0,
            t_req_ms: 1.0,
            t_ack_ms: 1.0,
            slot_us: 9.0,
            cw_min: 16,
            cw_max: 64,
            max_time_ms: 1000.0,
            generation_size: 8,
            opportunistic_caching: true,
            ack_slots: AckSlots::Sequential,
            record_log: false,
        }
    }
}

impl SimParams {
    pub fn validate(&self) -> Result<()> {
        ensure_positive("packet_len_ms", self.packet_len_ms)?;
        ensure_positive("sim.slot_us", self.slot_us)?;
        ensure_positive("sim.max_time_ms", self.max_time_ms)?;
        for (field, v) in [("t_req_ms", self.t_req_ms), ("t_ack_ms", self.t_ack_ms)] {
            if !(v.is_finite() && v >= 0.0) {
                return Err(Error::config(field, format!("must be finite and >= 0, got {v}")));
            }
        }
        if self.cw_min == 0 {
            return Err(Error::config("sim.cw_min", "must be >= 1"));
        }
        if self.cw_max < self.cw_min {
            return Err(Error::config("sim.cw_max", "must be >= sim.cw_min"));
        }
        if self.generation_size == 0 {
            return Err(Error::config("sim.generation_size", "must be >= 1"));
        }
        if self.max_time_ms < self.packet_len_ms {
            return Err(Error::config("sim.max_time_ms", "must be >= packet_len_ms"));
        }
        Ok(())
    }

    pub(crate) fn packet_len(&self) -> SimTime {
        SimTime::from_ms(self.packet_len_ms)
    }
    pub(crate) fn t_req(&self) -> SimTime {
        SimTime::from_ms(self.t_req_ms)
    }
    pub(crate) fn t_ack(&self) -> SimTime {
        SimTime::from_ms(self.t_ack_ms)
    }
    pub(crate) fn slot(&self) -> SimTime {
        SimTime::from_us(self.slot_us)
    }
    pub(crate) fn max_time(&self) -> SimTime {
        SimTime::from_ms(self.max_time_ms)
    }
}

/// Decides whether individual transmissions are received.
pub trait LinkModel {
    fn bs_to_uav(&mut self, uav: usize, rng: &mut SimRng) -> bool;
    fn uav_to_uav(&mut self, tx: usize, rx: usize, rng: &mut SimRng) -> bool;
    /// Links evaluated below the path-loss reference distance so far.
    fn clamped_links(&self) -> u64 {
        0
    }
}

/// Path loss plus a fresh Rayleigh draw per attempt.
#[derive(Debug, Clone)]
pub struct FadingLinks {
    positions: Vec<Position3>,
    bs: Position3,
    radio: RadioParams,
    clamped: u64,
}

impl FadingLinks {
    pub fn new(topology: &Topology, radio: &RadioParams) -> Self {
        FadingLinks {
            positions: topology.uavs().iter().map(|u| u.position).collect(),
            bs: topology.bs_position,
            radio: *radio,
            clamped: 0,
        }
    }

    fn attempt(&mut self, distance: f64, kind: LinkKind, rng: &mut SimRng) -> bool {
        if distance < crate::channel::REFERENCE_DISTANCE_M {
            self.clamped += 1;
        }
        reception_success(self.radio.tx_power(kind), distance, kind, &self.radio, rng)
    }
}

impl LinkModel for FadingLinks {
    fn bs_to_uav(&mut self, uav: usize, rng: &mut SimRng) -> bool {
        let d = self.bs.distance(&self.positions[uav]);
        self.attempt(d, LinkKind::BsToUav, rng)
    }

    fn uav_to_uav(&mut self, tx: usize, rx: usize, rng: &mut SimRng) -> bool {
        let d = self.positions[tx].distance(&self.positions[rx]);
        self.attempt(d, LinkKind::UavToUav, rng)
    }

    fn clamped_links(&self) -> u64 {
        self.clamped
    }
}

/// Position-free links with fixed success probabilities.
#[derive(Debug, Clone, Copy)]
pub struct BernoulliLinks {
    pub p_bs: f64,
    pub p_peer: f64,
}

impl LinkModel for BernoulliLinks {
    fn bs_to_uav(&mut self, _uav: usize, rng: &mut SimRng) -> bool {
        rand::Rng::random_bool(rng, self.p_bs)
    }
    fn uav_to_uav(&mut self, _tx: usize, _rx: usize, rng: &mut SimRng) -> bool {
        rand::Rng::random_bool(rng, self.p_peer)
    }
}

/// Fixed first-broadcast outcome per UAV (repeated for later BS
/// transmissions) and a fixed peer-link outcome.
#[derive(Debug, Clone)]
pub struct ScriptedLinks {
    pub bs: Vec<bool>,
    pub peer: bool,
}

impl LinkModel for ScriptedLinks {
    fn bs_to_uav(&mut self, uav: usize, _rng: &mut SimRng) -> bool {
        self.bs[uav]
    }
    fn uav_to_uav(&mut self, _tx: usize, _rx: usize, _rng: &mut SimRng) -> bool {
        self.peer
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Actor {
    Bs,
    Uav(usize),
}

impl fmt::Display for Actor {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Actor::Bs => f.write_str("bs"),
            Actor::Uav(id) => write!(f, "uav{id}"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EventKind {
    BsBroadcastEnd,
    RequestTxEnd,
    ReplyTxEnd,
    BackoffExpiry,
    AckRxEnd,
}

impl EventKind {
    pub fn as_str(self) -> &'static str {
        match self {
            EventKind::BsBroadcastEnd => "bs_broadcast_end",
            EventKind::RequestTxEnd => "request_tx_end",
            EventKind::ReplyTxEnd => "reply_tx_end",
            EventKind::BackoffExpiry => "backoff_expiry",
            EventKind::AckRxEnd => "ack_rx_end",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct LogEntry {
    pub time: SimTime,
    pub actor: Actor,
    pub kind: EventKind,
    pub packet_id: u32,
    /// Coded-packet index under network coding, request id for
    /// request/reply frames.
    pub seq: Option<u32>,
    pub cluster: Option<usize>,
    pub collided: bool,
}

/// Per-UAV delivery record and transmission counts of one epoch.
#[derive(Debug, Clone, PartialEq)]
pub struct SchemeOutcome {
    pub scheme: Scheme,
    /// `None` for UAVs that never obtained the packet.
    pub delivery_time_ms: Vec<Option<f64>>,
    pub cluster_of: Vec<usize>,
    pub bs_transmissions: u64,
    pub uav_transmissions: u64,
    /// ACKs for the BS-driven schemes, requests for clustering.
    pub control_messages: u64,
    /// UAVs that decoded the first BS transmission.
    pub broadcast_received: usize,
    /// Reply receptions attempted / succeeded at missing UAVs.
    pub peer_attempts: u64,
    pub peer_successes: u64,
    pub requests_sent: u64,
    pub replies_sent: u64,
    pub collisions: u64,
    /// Successful replies to a request that was already answered.
    pub duplicate_replies: u64,
    pub clamped_links: u64,
    pub end_time_ms: f64,
    pub log: Vec<LogEntry>,
}

impl SchemeOutcome {
    pub(crate) fn new(scheme: Scheme, uavs: &[UavRef]) -> Self {
        SchemeOutcome {
            scheme,
            delivery_time_ms: vec![None; uavs.len()],
            cluster_of: uavs.iter().map(|u| u.cluster).collect(),
            bs_transmissions: 0,
            uav_transmissions: 0,
            control_messages: 0,
            broadcast_received: 0,
            peer_attempts: 0,
            peer_successes: 0,
            requests_sent: 0,
            replies_sent: 0,
            collisions: 0,
            duplicate_replies: 0,
            clamped_links: 0,
            end_time_ms: 0.0,
            log: Vec::new(),
        }
    }

    pub fn uav_count(&self) -> usize {
        self.delivery_time_ms.len()
    }

    pub fn delivered(&self) -> usize {
        self.delivery_time_ms.iter().filter(|d| d.is_some()).count()
    }

    pub fn undelivered(&self) -> usize {
        self.uav_count() - self.delivered()
    }

    pub fn delivery_ratio(&self) -> f64 {
        if self.uav_count() == 0 {
            return 0.0;
        }
        self.delivered() as f64 / self.uav_count() as f64
    }

    /// Mean delay over delivered UAVs.
    pub fn mean_delay_ms(&self) -> Option<f64> {
        let delivered: Vec<f64> = self.delivery_time_ms.iter().flatten().copied().collect();
        if delivered.is_empty() {
            None
        } else {
            Some(delivered.iter().sum::<f64>() / delivered.len() as f64)
        }
    }

    /// Fraction of UAVs covered by the first BS transmission.
    pub fn broadcast_coverage(&self) -> f64 {
        if self.uav_count() == 0 {
            return 0.0;
        }
        self.broadcast_received as f64 / self.uav_count() as f64
    }

    /// Empirical success rate of reply receptions; 0 when none happened.
    pub fn peer_success_rate(&self) -> f64 {
        if self.peer_attempts == 0 {
            0.0
        } else {
            self.peer_successes as f64 / self.peer_attempts as f64
        }
    }

    pub(crate) fn record(&mut self, enabled: bool, entry: LogEntry) {
        if enabled {
            self.log.push(entry);
        }
    }
}

pub fn write_event_log<W: Write>(out: W, log: &[LogEntry]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["time_ms", "actor", "event_kind", "packet_id", "seq", "cluster_id", "collided"])?;
    for e in log {
        w.write_record([
            e.time.as_ms().to_string(),
            e.actor.to_string(),
            e.kind.as_str().to_string(),
            e.packet_id.to_string(),
            e.seq.map(|s| s.to_string()).unwrap_or_default(),
            e.cluster.map(|c| c.to_string()).unwrap_or_default(),
            e.collided.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

/// One row per UAV per outcome.
pub fn write_outcomes<W: Write>(out: W, outcomes: &[(usize, &SchemeOutcome)]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["scheme", "epoch", "uav_id", "cluster_id", "delivered", "delivery_time_ms"])?;
    for (epoch, o) in outcomes {
        for (id, d) in o.delivery_time_ms.iter().enumerate() {
            w.write_record([
                o.scheme.as_str().to_string(),
                epoch.to_string(),
                id.to_string(),
                o.cluster_of[id].to_string(),
                d.is_some().to_string(),
                d.map(|t| t.to_string()).unwrap_or_default(),
            ])?;
        }
    }
    w.flush()?;
    Ok(())
}

/// One summary row per outcome.
pub fn write_outcome_summary<W: Write>(out: W, outcomes: &[(usize, &SchemeOutcome)]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record([
        "scheme",
        "epoch",
        "uavs",
        "delivered",
        "mean_delay_ms",
        "bs_transmissions",
        "uav_transmissions",
        "control_messages",
        "collisions",
        "end_time_ms",
    ])?;
    for (epoch, o) in outcomes {
        w.write_record([
            o.scheme.as_str().to_string(),
            epoch.to_string(),
            o.uav_count().to_string(),
            o.delivered().to_string(),
            o.mean_delay_ms().map(|d| d.to_string()).unwrap_or_default(),
            o.bs_transmissions.to_string(),
            o.uav_transmissions.to_string(),
            o.control_messages.to_string(),
            o.collisions.to_string(),
            o.end_time_ms.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

fn check_inputs(topology: &Topology, sim: &SimParams) -> Result<()> {
    sim.validate()?;
    if topology.is_empty() {
        return Err(Error::config("topology", "no UAVs to serve"));
    }
    Ok(())
}

pub fn run_clustering_scheme(
    topology: &Topology,
    radio: &RadioParams,
    sim: &SimParams,
    rng: &mut SimRng,
) -> Result<SchemeOutcome> {
    check_inputs(topology, sim)?;
    let mut links = FadingLinks::new(topology, radio);
    run_clustering_scheme_with(topology, &mut links, sim, rng)
}

pub fn run_ack_benchmark(
    topology: &Topology,
    radio: &RadioParams,
    sim: &SimParams,
    rng: &mut SimRng,
) -> Result<SchemeOutcome> {
    check_inputs(topology, sim)?;
    let mut links = FadingLinks::new(topology, radio);
    run_ack_benchmark_with(topology, &mut links, sim, rng)
}

pub fn run_rnc_scheme(
    topology: &Topology,
    radio: &RadioParams,
    sim: &SimParams,
    rng: &mut SimRng,
) -> Result<SchemeOutcome> {
    check_inputs(topology, sim)?;
    let mut links = FadingLinks::new(topology, radio);
    run_rnc_scheme_with(topology, &mut links, sim, rng)
}

pub fn run_scheme(
    scheme: Scheme,
    topology: &Topology,
    radio: &RadioParams,
    sim: &SimParams,
    rng: &mut SimRng,
) -> Result<SchemeOutcome> {
    match scheme {
        Scheme::Clustering => run_clustering_scheme(topology, radio, sim, rng),
        Scheme::Benchmark => run_ack_benchmark(topology, radio, sim, rng),
        Scheme::Rnc => run_rnc_scheme(topology, radio, sim, rng),
    }
}
