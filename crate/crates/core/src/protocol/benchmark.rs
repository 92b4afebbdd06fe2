//! ACK-driven BS retransmission: the BS rebroadcasts until every UAV has
//! acknowledged the packet.

use super::engine::{EventQueue, SimTime};
use super::{check_inputs, AckSlots, Actor, EventKind, LinkModel, LogEntry, Scheme, SchemeOutcome, SimParams};
use crate::error::Result;
use crate::geometry::Topology;
use crate::rng::SimRng;

#[derive(Debug, Clone, Copy)]
enum Event {
    BsBroadcastEnd { round: u32 },
    AckRxEnd { uav: usize },
}

/// Offset of each outstanding receiver's ACK slot end from the end of the
/// broadcast, plus the total ACK phase length.
pub(super) fn ack_schedule(outstanding: usize, sim: &SimParams) -> (Vec<SimTime>, SimTime) {
    let t_ack = sim.t_ack();
    match sim.ack_slots {
        AckSlots::Sequential => {
            let ends = (1..=outstanding as u64).map(|i| t_ack * i).collect();
            (ends, t_ack * outstanding as u64)
        }
        AckSlots::Shared => (vec![t_ack; outstanding], t_ack),
    }
}

/// Runs one packet epoch of the ACK benchmark. A UAV's delivery time is
/// the end of its ACK slot; each round polls only UAVs still unserved.
pub fn run_ack_benchmark_with<L: LinkModel>(
    topology: &Topology,
    links: &mut L,
    sim: &SimParams,
    rng: &mut SimRng,
) -> Result<SchemeOutcome> {
    check_inputs(topology, sim)?;
    let uavs = topology.uavs();
    let mut out = SchemeOutcome::new(Scheme::Benchmark, &uavs);
    let mut served = vec![false; uavs.len()];
    let mut queue = EventQueue::new();
    let max_time = sim.max_time();
    let log = |out: &mut SchemeOutcome, time, actor, kind, seq| {
        out.record(sim.record_log, LogEntry { time, actor, kind, packet_id: 0, seq, cluster: None, collided: false })
    };

    queue.push(sim.packet_len(), Event::BsBroadcastEnd { round: 0 });
    let mut now = SimTime::ZERO;
    while let Some((t, event)) = queue.pop() {
        if t > max_time {
            break;
        }
        now = t;
        match event {
            Event::BsBroadcastEnd { round } => {
                out.bs_transmissions += 1;
                log(&mut out, t, Actor::Bs, EventKind::BsBroadcastEnd, Some(round));
                let outstanding: Vec<usize> = (0..uavs.len()).filter(|&i| !served[i]).collect();
                let (slot_ends, ack_phase) = ack_schedule(outstanding.len(), sim);
                let mut received = 0;
                for (&uav, &slot_end) in outstanding.iter().zip(&slot_ends) {
                    if links.bs_to_uav(uav, rng) {
                        if round == 0 {
                            out.broadcast_received += 1;
                        }
                        received += 1;
                        queue.push(t + slot_end, Event::AckRxEnd { uav });
                    }
                }
                let round_end = t + ack_phase;
                if received < outstanding.len() {
                    queue.push(round_end + sim.packet_len(), Event::BsBroadcastEnd { round: round + 1 });
                }
            }
            Event::AckRxEnd { uav } => {
                served[uav] = true;
                out.control_messages += 1;
                out.delivery_time_ms[uav] = Some(t.as_ms());
                log(&mut out, t, Actor::Uav(uav), EventKind::AckRxEnd, None);
            }
        }
    }
    out.end_time_ms = now.as_ms();
    out.clamped_links = links.clamped_links();
    Ok(out)
}
