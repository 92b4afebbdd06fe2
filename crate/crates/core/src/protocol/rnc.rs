//! Random network coding: the BS streams coded packets of one generation
//! until every UAV has collected `generation_size` of them. Any
//! `generation_size` coded packets are assumed to be linearly independent
//! (large-field limit), so decoding is a counting problem.
//!
//! A UAV's per-packet delay is the time of its decoding reception minus
//! the airtime of the other `generation_size - 1` packets of the
//! generation. One terminal ACK round is charged to the control-message
//! count once everyone has decoded; it does not enter any UAV's delay.

use super::benchmark::ack_schedule;
use super::engine::{EventQueue, SimTime};
use super::{check_inputs, Actor, EventKind, LinkModel, LogEntry, Scheme, SchemeOutcome, SimParams};
use crate::error::Result;
use crate::geometry::Topology;
use crate::rng::SimRng;

#[derive(Debug, Clone, Copy)]
enum Event {
    BsBroadcastEnd { coded: u32 },
    AckRxEnd { uav: usize },
}

pub fn run_rnc_scheme_with<L: LinkModel>(
    topology: &Topology,
    links: &mut L,
    sim: &SimParams,
    rng: &mut SimRng,
) -> Result<SchemeOutcome> {
    check_inputs(topology, sim)?;
    let uavs = topology.uavs();
    let mut out = SchemeOutcome::new(Scheme::Rnc, &uavs);
    let mut rank = vec![0u32; uavs.len()];
    let g = sim.generation_size;
    let amortized = sim.packet_len() * (g as u64 - 1);
    let mut queue = EventQueue::new();
    let max_time = sim.max_time();
    let log = |out: &mut SchemeOutcome, time, actor, kind, seq| {
        out.record(sim.record_log, LogEntry { time, actor, kind, packet_id: 0, seq, cluster: None, collided: false })
    };

    queue.push(sim.packet_len(), Event::BsBroadcastEnd { coded: 0 });
    let mut now = SimTime::ZERO;
    while let Some((t, event)) = queue.pop() {
        if t > max_time {
            break;
        }
        now = t;
        match event {
            Event::BsBroadcastEnd { coded } => {
                out.bs_transmissions += 1;
                log(&mut out, t, Actor::Bs, EventKind::BsBroadcastEnd, Some(coded));
                for (uav, rank) in rank.iter_mut().enumerate() {
                    if *rank >= g {
                        continue;
                    }
                    if links.bs_to_uav(uav, rng) {
                        if coded == 0 {
                            out.broadcast_received += 1;
                        }
                        *rank += 1;
                        if *rank == g {
                            out.delivery_time_ms[uav] = Some((t - amortized).as_ms());
                        }
                    }
                }
                if rank.iter().all(|&r| r >= g) {
                    let (slot_ends, _) = ack_schedule(uavs.len(), sim);
                    for (uav, &end) in slot_ends.iter().enumerate() {
                        queue.push(t + end, Event::AckRxEnd { uav });
                    }
                } else {
                    queue.push(t + sim.packet_len(), Event::BsBroadcastEnd { coded: coded + 1 });
                }
            }
            Event::AckRxEnd { uav } => {
                out.control_messages += 1;
                log(&mut out, t, Actor::Uav(uav), EventKind::AckRxEnd, None);
            }
        }
    }
    out.end_time_ms = now.as_ms();
    out.clamped_links = links.clamped_links();
    Ok(out)
}
