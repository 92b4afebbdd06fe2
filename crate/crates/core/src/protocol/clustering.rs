//! Cluster-based recovery: one BS broadcast, then per-cluster CSMA/CA
//! request/reply exchanges among UAVs with storm avoidance.
//!
//! Every cluster owns its own medium. Contenders draw a uniform backoff in
//! `[0, CW)` slots; when the medium goes idle, the smallest counter fires
//! after one CCA slot plus that many slots, and the remaining contenders
//! keep their residual counts. Equal minima collide: the frames are lost,
//! and each colliding sender doubles its window (capped) and redraws.
//!
//! Frame headers are decodable by every peer in the cluster, so a
//! successful request silences all other pending requests and a
//! successful reply silences all other replies to the same request.

use std::collections::{BTreeMap, BTreeSet};

use rand::Rng;

use super::engine::{EventQueue, SimTime};
use super::{check_inputs, Actor, EventKind, LinkModel, LogEntry, Scheme, SchemeOutcome, SimParams};
use crate::error::Result;
use crate::geometry::Topology;
use crate::rng::SimRng;

const PACKET: u32 = 0;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Intent {
    Request,
    Reply(u32),
}

#[derive(Debug, Clone, Copy)]
enum Event {
    BsBroadcastEnd,
    BackoffExpiry { cluster: usize, token: u64 },
    RequestTxEnd { uav: usize, collided: bool },
    ReplyTxEnd { uav: usize, request: u32, collided: bool },
}

#[derive(Debug, Clone)]
struct UavState {
    cluster: usize,
    holds: bool,
    intent: Option<Intent>,
    transmitting: bool,
    backoff: u32,
    cw: u32,
    /// Request id this UAV is waiting to see answered.
    pending_request: Option<u32>,
    suppressed_requests: BTreeSet<u32>,
    suppressed_replies: BTreeSet<u32>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Frame {
    Request,
    Reply,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum MediumState {
    Idle,
    Busy { until: SimTime, transmitter: usize, frame: Frame },
}

#[derive(Debug, Clone)]
struct ClusterState {
    members: Vec<usize>,
    medium: MediumState,
    active_tx: usize,
    /// Bumped whenever a pending backoff expiry becomes stale.
    token: u64,
    /// Start of the current countdown, if one is scheduled.
    countdown_from: Option<SimTime>,
    /// No member decoded the broadcast; nothing to recover from.
    orphaned: bool,
}

struct Sim<'a, L: LinkModel> {
    sim: &'a SimParams,
    links: &'a mut L,
    rng: &'a mut SimRng,
    queue: EventQueue<Event>,
    uavs: Vec<UavState>,
    clusters: Vec<ClusterState>,
    requesters: BTreeMap<u32, usize>,
    answered: BTreeSet<u32>,
    next_request: u32,
    out: SchemeOutcome,
}

impl<L: LinkModel> Sim<'_, L> {
    fn log(
        &mut self,
        time: SimTime,
        actor: Actor,
        kind: EventKind,
        seq: Option<u32>,
        cluster: Option<usize>,
        collided: bool,
    ) {
        self.out.record(self.sim.record_log, LogEntry { time, actor, kind, packet_id: PACKET, seq, cluster, collided });
    }

    fn draw_backoff(&mut self, uav: usize) {
        let cw = self.uavs[uav].cw;
        self.uavs[uav].backoff = self.rng.random_range(0..cw);
    }

    fn contend(&mut self, uav: usize, intent: Intent) {
        debug_assert!(intent != Intent::Request || !self.uavs[uav].holds, "holder requesting");
        let u = &mut self.uavs[uav];
        u.intent = Some(intent);
        u.cw = self.sim.cw_min;
        self.draw_backoff(uav);
    }

    fn contenders(&self, cluster: usize) -> impl Iterator<Item = usize> + '_ {
        self.clusters[cluster]
            .members
            .iter()
            .copied()
            .filter(|&m| self.uavs[m].intent.is_some() && !self.uavs[m].transmitting)
    }

    /// (Re)arms the cluster's backoff countdown from `now`.
    fn schedule_contention(&mut self, cluster: usize, now: SimTime) {
        let slot = self.sim.slot();
        if let Some(start) = self.clusters[cluster].countdown_from.take() {
            // Slots already counted down since the last arming (after CCA).
            let elapsed = ((now - start).0 / slot.0).saturating_sub(1);
            let members = self.clusters[cluster].members.clone();
            for m in members {
                let u = &mut self.uavs[m];
                if u.intent.is_some() && !u.transmitting {
                    u.backoff = u.backoff.saturating_sub(elapsed.min(u32::MAX as u64) as u32);
                }
            }
        }
        let c = &mut self.clusters[cluster];
        c.token += 1;
        if c.active_tx > 0 {
            return;
        }
        let token = c.token;
        let Some(min) = self.contenders(cluster).map(|m| self.uavs[m].backoff).min() else {
            return;
        };
        self.clusters[cluster].countdown_from = Some(now);
        self.queue.push(now + slot * (1 + min as u64), Event::BackoffExpiry { cluster, token });
    }

    fn on_broadcast_end(&mut self, now: SimTime) {
        self.out.bs_transmissions += 1;
        self.log(now, Actor::Bs, EventKind::BsBroadcastEnd, None, None, false);
        for id in 0..self.uavs.len() {
            if self.links.bs_to_uav(id, self.rng) {
                self.uavs[id].holds = true;
                self.out.delivery_time_ms[id] = Some(now.as_ms());
                self.out.broadcast_received += 1;
            }
        }
        for c in 0..self.clusters.len() {
            let members = self.clusters[c].members.clone();
            if members.iter().all(|&m| !self.uavs[m].holds) {
                self.clusters[c].orphaned = true;
                continue;
            }
            for &m in &members {
                if !self.uavs[m].holds {
                    self.contend(m, Intent::Request);
                }
            }
            self.schedule_contention(c, now);
        }
    }

    fn on_backoff_expiry(&mut self, now: SimTime, cluster: usize, token: u64) {
        if token != self.clusters[cluster].token {
            return;
        }
        self.clusters[cluster].countdown_from = None;
        let contenders: Vec<usize> = self.contenders(cluster).collect();
        let Some(min) = contenders.iter().map(|&m| self.uavs[m].backoff).min() else {
            return;
        };
        let winners: Vec<usize> = contenders.iter().copied().filter(|&m| self.uavs[m].backoff == min).collect();
        for &m in &contenders {
            self.uavs[m].backoff -= min;
        }
        let collided = winners.len() > 1;
        let mut until = now;
        for &w in &winners {
            let intent = self.uavs[w].intent.expect("contender has an intent");
            self.uavs[w].transmitting = true;
            self.out.uav_transmissions += 1;
            let (end, event, seq) = match intent {
                Intent::Request => {
                    debug_assert!(!self.uavs[w].holds);
                    self.out.requests_sent += 1;
                    self.out.control_messages += 1;
                    (now + self.sim.t_req(), Event::RequestTxEnd { uav: w, collided }, None)
                }
                Intent::Reply(request) => {
                    self.out.replies_sent += 1;
                    (now + self.sim.packet_len(), Event::ReplyTxEnd { uav: w, request, collided }, Some(request))
                }
            };
            self.log(now, Actor::Uav(w), EventKind::BackoffExpiry, seq, Some(cluster), collided);
            until = until.max(end);
            self.queue.push(end, event);
        }
        if collided {
            self.out.collisions += 1;
        }
        let c = &mut self.clusters[cluster];
        c.active_tx = winners.len();
        let frame = match self.uavs[winners[0]].intent {
            Some(Intent::Reply(_)) => Frame::Reply,
            _ => Frame::Request,
        };
        c.medium = MediumState::Busy { until, transmitter: winners[0], frame };
    }

    fn back_off_after_collision(&mut self, uav: usize) {
        let u = &mut self.uavs[uav];
        u.cw = (u.cw * 2).min(self.sim.cw_max);
        self.draw_backoff(uav);
    }

    fn end_transmission(&mut self, now: SimTime, uav: usize) {
        self.uavs[uav].transmitting = false;
        let cluster = self.uavs[uav].cluster;
        let c = &mut self.clusters[cluster];
        debug_assert!(matches!(c.medium, MediumState::Busy { until, .. } if until >= now));
        c.active_tx -= 1;
        if c.active_tx == 0 {
            c.medium = MediumState::Idle;
        }
    }

    fn on_request_end(&mut self, now: SimTime, uav: usize, collided: bool) {
        let cluster = self.uavs[uav].cluster;
        self.end_transmission(now, uav);
        if collided {
            self.log(now, Actor::Uav(uav), EventKind::RequestTxEnd, None, Some(cluster), true);
            self.back_off_after_collision(uav);
        } else {
            let request = self.next_request;
            self.next_request += 1;
            self.requesters.insert(request, uav);
            self.log(now, Actor::Uav(uav), EventKind::RequestTxEnd, Some(request), Some(cluster), false);
            let members = self.clusters[cluster].members.clone();
            for m in members {
                let holds = self.uavs[m].holds;
                if m == uav {
                    let u = &mut self.uavs[m];
                    u.intent = None;
                    u.cw = self.sim.cw_min;
                    u.pending_request = Some(request);
                } else if !holds {
                    // Someone already asked for our packet: wait for that reply.
                    let u = &mut self.uavs[m];
                    if u.intent == Some(Intent::Request) {
                        u.suppressed_requests.insert(PACKET);
                    }
                    if !u.transmitting {
                        u.intent = None;
                    }
                    u.pending_request = Some(request);
                } else if self.uavs[m].intent.is_none() && !self.uavs[m].suppressed_replies.contains(&request) {
                    self.contend(m, Intent::Reply(request));
                }
            }
        }
        if self.clusters[cluster].active_tx == 0 {
            self.schedule_contention(cluster, now);
        }
    }

    fn on_reply_end(&mut self, now: SimTime, uav: usize, request: u32, collided: bool) {
        let cluster = self.uavs[uav].cluster;
        self.end_transmission(now, uav);
        self.log(now, Actor::Uav(uav), EventKind::ReplyTxEnd, Some(request), Some(cluster), collided);
        if collided {
            self.back_off_after_collision(uav);
        } else {
            if !self.answered.insert(request) {
                self.out.duplicate_replies += 1;
            }
            let requester = self.requesters[&request];
            let members = self.clusters[cluster].members.clone();
            for m in members {
                if m == uav {
                    let u = &mut self.uavs[m];
                    u.intent = None;
                    u.cw = self.sim.cw_min;
                    continue;
                }
                if self.uavs[m].holds {
                    // Someone already answered this request.
                    let u = &mut self.uavs[m];
                    if u.intent == Some(Intent::Reply(request)) {
                        u.suppressed_replies.insert(request);
                        if !u.transmitting {
                            u.intent = None;
                        }
                    }
                    continue;
                }
                if self.uavs[m].pending_request != Some(request) {
                    continue;
                }
                self.uavs[m].pending_request = None;
                let listens = m == requester || self.sim.opportunistic_caching;
                if listens {
                    self.out.peer_attempts += 1;
                    if self.links.uav_to_uav(uav, m, self.rng) {
                        self.out.peer_successes += 1;
                        let u = &mut self.uavs[m];
                        u.holds = true;
                        u.intent = None;
                        self.out.delivery_time_ms[m] = Some(now.as_ms());
                        continue;
                    }
                }
                // Reply missed (or not ours to take): ask again.
                self.contend(m, Intent::Request);
            }
        }
        if self.clusters[cluster].active_tx == 0 {
            self.schedule_contention(cluster, now);
        }
    }

    fn run(mut self) -> SchemeOutcome {
        let max_time = self.sim.max_time();
        self.queue.push(self.sim.packet_len(), Event::BsBroadcastEnd);
        let mut now = SimTime::ZERO;
        while let Some(t) = self.queue.peek_time() {
            if t > max_time {
                break;
            }
            let (t, event) = self.queue.pop().expect("peeked");
            now = t;
            match event {
                Event::BsBroadcastEnd => self.on_broadcast_end(t),
                Event::BackoffExpiry { cluster, token } => self.on_backoff_expiry(t, cluster, token),
                Event::RequestTxEnd { uav, collided } => self.on_request_end(t, uav, collided),
                Event::ReplyTxEnd { uav, request, collided } => self.on_reply_end(t, uav, request, collided),
            }
            if self.uavs.iter().all(|u| u.holds) {
                break;
            }
        }
        debug_assert!(self.clusters.iter().all(|c| !c.orphaned || c.members.iter().all(|&m| !self.uavs[m].holds)));
        self.out.end_time_ms = now.as_ms();
        self.out.clamped_links = self.links.clamped_links();
        self.out
    }
}

/// Runs one packet epoch of the cluster-based scheme with an arbitrary
/// link model.
pub fn run_clustering_scheme_with<L: LinkModel>(
    topology: &Topology,
    links: &mut L,
    sim: &SimParams,
    rng: &mut SimRng,
) -> Result<SchemeOutcome> {
    check_inputs(topology, sim)?;
    let uav_refs = topology.uavs();
    let uavs = uav_refs
        .iter()
        .map(|u| UavState {
            cluster: u.cluster,
            holds: false,
            intent: None,
            transmitting: false,
            backoff: 0,
            cw: sim.cw_min,
            pending_request: None,
            suppressed_requests: BTreeSet::new(),
            suppressed_replies: BTreeSet::new(),
        })
        .collect();
    let mut clusters: Vec<ClusterState> = (0..topology.clusters.len())
        .map(|_| ClusterState {
            members: Vec::new(),
            medium: MediumState::Idle,
            active_tx: 0,
            token: 0,
            countdown_from: None,
            orphaned: false,
        })
        .collect();
    for u in &uav_refs {
        clusters[u.cluster].members.push(u.id);
    }
    let state = Sim {
        sim,
        links,
        rng,
        queue: EventQueue::new(),
        uavs,
        clusters,
        requesters: BTreeMap::new(),
        answered: BTreeSet::new(),
        next_request: 0,
        out: SchemeOutcome::new(Scheme::Clustering, &uav_refs),
    };
    Ok(state.run())
}
