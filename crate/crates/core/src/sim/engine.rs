use alloc::collections::{BTreeMap, BinaryHeap, VecDeque};
use alloc::vec::Vec;
use core::cmp::Reverse;

use crate::error::ConfigError;
use crate::scheduler::SchedulerState;
use crate::time::Time;
use crate::topology::{GroupId, OnuId};
use crate::traffic::{OnuBuffer, Packet, ParetoOnOffSource};

use super::collision::{detect_collisions, Loss, Transmission};
use super::metrics::{AuditReport, HopStats, Metrics, Volumes};
use super::{Architecture, Observer, SimConfig, TraceEvent, TraceKind};

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
enum Event {
    /// Grant reaches the ONU, which sends its burst.
    Transmit(u64),
    /// Last bit of a burst (and its request) reaches the OLT.
    BurstEnd(u64),
}

struct Onu {
    buffer: OnuBuffer,
    source: ParetoOnOffSource,
    next: Option<Packet>,
}

struct InFlight {
    tx: Transmission,
    /// Backlog reported with the burst, known once the ONU has sent it.
    report: Option<u64>,
    loss: Loss,
}

/// Batch collision check over finished transmissions, run in chunks so
/// memory stays bounded on long runs.
struct Auditor {
    architecture: Architecture,
    /// Batch verdict so far and, once the burst has finished, the online one.
    pending: BTreeMap<u64, (Transmission, Loss, Option<bool>)>,
    report: AuditReport,
}

const AUDIT_CHUNK: usize = 1 << 16;

impl Auditor {
    fn push(&mut self, id: u64, tx: Transmission) {
        self.pending.insert(id, (tx, Loss::default(), None));
    }

    fn settle(&mut self, id: u64, online_lost: bool) {
        if let Some(entry) = self.pending.get_mut(&id) {
            entry.2 = Some(online_lost);
        }
    }

    /// Finished transmissions can no longer be hit by anything scheduled
    /// later, so their verdict is final once the batch check has seen them
    /// together with everything still pending.
    fn flush(&mut self) {
        let txs: Vec<_> = self.pending.values().map(|e| e.0).collect();
        for (e, l) in self.pending.values_mut().zip(detect_collisions(&txs, self.architecture)) {
            e.1.receiver |= l.receiver;
            e.1.group |= l.group;
        }
        let report = &mut self.report;
        self.pending.retain(|_, (tx, loss, online)| {
            let Some(online) = *online else { return true };
            report.transmissions += 1;
            if loss.is_lost() {
                report.lost_frames += 1;
                report.lost_bits += tx.bytes * 8;
            }
            if loss.is_lost() != online {
                report.mismatches += 1;
            }
            false
        });
    }
}

/// Bursts in flight keyed by their sequential id. Ids are issued in order
/// and each ONU has at most one burst outstanding, so a ring indexed from
/// the oldest live id stays short.
#[derive(Default)]
struct InFlightTable {
    base: u64,
    slots: VecDeque<Option<InFlight>>,
}

impl InFlightTable {
    fn insert(&mut self, id: u64, f: InFlight) {
        debug_assert_eq!(id, self.base + self.slots.len() as u64, "ids are issued in order");
        self.slots.push_back(Some(f));
    }

    fn get_mut(&mut self, id: u64) -> Option<&mut InFlight> {
        let i = id.checked_sub(self.base)?;
        self.slots.get_mut(i as usize)?.as_mut()
    }

    fn remove(&mut self, id: u64) -> Option<InFlight> {
        let i = id.checked_sub(self.base)?;
        let f = self.slots.get_mut(i as usize)?.take();
        while let Some(None) = self.slots.front() {
            self.slots.pop_front();
            self.base += 1;
        }
        f
    }

    fn iter(&self) -> impl Iterator<Item = &InFlight> {
        self.slots.iter().flatten()
    }
}

pub(super) struct Engine<'a, O> {
    cfg: &'a SimConfig,
    observer: &'a mut O,
    sched: SchedulerState,
    onus: Vec<Onu>,
    queue: BinaryHeap<Reverse<(Time, u64, Event)>>,
    seq: u64,
    next_id: u64,
    in_flight: InFlightTable,
    /// Unfinished bursts per receiver and per group, as `(id, end)`.
    rx_active: Vec<Vec<(u64, Time)>>,
    group_active: Vec<Vec<(u64, Time)>>,
    measured: Volumes,
    total: Volumes,
    hops: HopStats,
    auditor: Option<Auditor>,
}

impl<'a, O: Observer> Engine<'a, O> {
    pub(super) fn new(cfg: &'a SimConfig, observer: &'a mut O) -> Result<Self, ConfigError> {
        let topo = &cfg.topology;
        let onus = (0..topo.onus())
            .map(|u| {
                let mut source = ParetoOnOffSource::new(topo.onu_rate_bps, cfg.load, cfg.seed, u as u64)?;
                let next = source.next_packet();
                Ok(Onu { buffer: OnuBuffer::new(topo.buffer_bits / 8), source, next })
            })
            .collect::<Result<Vec<_>, ConfigError>>()?;
        let bound = (topo.group_size + topo.onus() + topo.receivers) as u32;
        Ok(Engine {
            cfg,
            observer,
            sched: SchedulerState::new(topo.clone(), Time::ZERO),
            onus,
            queue: BinaryHeap::new(),
            seq: 0,
            next_id: 0,
            in_flight: InFlightTable::default(),
            rx_active: alloc::vec![Vec::new(); topo.receivers],
            group_active: alloc::vec![Vec::new(); topo.groups],
            measured: Volumes::default(),
            total: Volumes::default(),
            hops: HopStats::with_bound(bound),
            auditor: cfg.audit.then(|| Auditor {
                architecture: cfg.architecture,
                pending: BTreeMap::new(),
                report: AuditReport::default(),
            }),
        })
    }

    pub(super) fn run(mut self) -> Metrics {
        let end = self.cfg.duration;
        for u in 0..self.onus.len() {
            self.request(Time::ZERO, OnuId(u as u32), 0);
        }
        while let Some(Reverse((t, _, ev))) = self.queue.pop() {
            if t > end {
                break;
            }
            match ev {
                Event::Transmit(id) => self.transmit(t, id),
                Event::BurstEnd(id) => self.burst_end(t, id),
            }
        }
        for u in 0..self.onus.len() {
            self.absorb(OnuId(u as u32), end);
        }
        if let Some(a) = &mut self.auditor {
            a.flush();
        }
        let residual_bits = self.onus.iter().map(|o| o.buffer.occupancy() * 8).sum();
        // Bursts already dequeued at the ONU but not finished at the OLT.
        let in_flight_bits = self.in_flight.iter().filter(|f| f.report.is_some()).map(|f| f.tx.bytes * 8).sum();
        let topo = &self.cfg.topology;
        Metrics {
            load: self.cfg.load,
            window: end - self.cfg.warmup,
            measured: self.measured,
            total: self.total,
            residual_bits,
            in_flight_bits,
            capacity_bps: topo.onu_rate_bps * topo.onus() as u64,
            hops: self.hops,
            inserts: self.sched.insert_stats(),
            audit: self.auditor.map(|a| a.report),
        }
    }

    fn push(&mut self, t: Time, ev: Event) {
        self.queue.push(Reverse((t, self.seq, ev)));
        self.seq += 1;
    }

    /// Moves every packet that has arrived by `t` into the ONU buffer.
    fn absorb(&mut self, onu: OnuId, t: Time) {
        let warmup = self.cfg.warmup;
        let o = &mut self.onus[onu.index()];
        while let Some(p) = o.next.filter(|p| p.arrival <= t) {
            let bits = p.bytes * 8;
            let accepted = o.buffer.enqueue(p.bytes);
            self.total.offered_bits += bits;
            if !accepted {
                self.total.buffer_dropped_bits += bits;
            }
            if p.arrival >= warmup {
                self.measured.offered_bits += bits;
                if !accepted {
                    self.measured.buffer_dropped_bits += bits;
                }
            }
            self.observer.packet(onu, &p);
            o.next = o.source.next_packet();
        }
    }

    /// Schedules the request piggybacked on a burst that just finished.
    fn request(&mut self, now: Time, onu: OnuId, reported: u64) {
        self.sched.advance_to(now);
        let topo = &self.cfg.topology;
        let group = topo.group_of(onu);
        let bytes = topo.grant_for(reported);
        let rtt = topo.rtt(onu);
        let scheduled = self.sched.schedule(self.cfg.scheduler, onu, bytes).expect("ONU ids come from the topology");
        if let Some(h) = scheduled.hops {
            self.hops.record(h);
        }
        let d = scheduled.decision;
        self.sched.commit(&d).expect("a fresh decision always commits");
        if let Some(a) = &mut self.auditor {
            if self.sched.check_invariants().is_err() {
                a.report.invariant_failures += 1;
            }
        }

        let tx = Transmission { onu, group, receiver: d.receiver, start: d.start, end: d.end(), bytes };
        let id = self.next_id;
        self.next_id += 1;
        let loss = self.register(id, &tx, now, group);
        if let Some(a) = &mut self.auditor {
            a.push(id, tx);
            if a.pending.len() >= AUDIT_CHUNK {
                a.flush();
            }
        }
        self.in_flight.insert(id, InFlight { tx, report: None, loss });
        self.observer.event(&TraceEvent { time: now, kind: TraceKind::Grant, onu, receiver: d.receiver, bytes });
        let half = Time::from_nanos(rtt.as_nanos() / 2);
        self.push(d.grant_at + half, Event::Transmit(id));
        self.push(d.end(), Event::BurstEnd(id));
    }

    /// Online collision tracking: compares a new burst with the unfinished
    /// bursts of its receiver and, on flexible-secure networks, its group.
    fn register(&mut self, id: u64, tx: &Transmission, now: Time, group: GroupId) -> Loss {
        let mut loss = Loss::default();
        let in_flight = &mut self.in_flight;
        let mut scan = |active: &mut Vec<(u64, Time)>, group_domain: bool| {
            active.retain(|&(_, end)| end > now);
            for &(other, _) in active.iter() {
                let f = in_flight.get_mut(other).expect("active bursts are in flight");
                if f.tx.overlaps(tx) {
                    if group_domain {
                        f.loss.group = true;
                        loss.group = true;
                    } else {
                        f.loss.receiver = true;
                        loss.receiver = true;
                    }
                }
            }
            active.push((id, tx.end));
        };
        scan(&mut self.rx_active[tx.receiver.index()], false);
        if self.cfg.architecture == Architecture::FlexibleSecure {
            scan(&mut self.group_active[group.index()], true);
        }
        loss
    }

    fn transmit(&mut self, now: Time, id: u64) {
        let onu = self.in_flight.get_mut(id).expect("burst is in flight").tx.onu;
        self.absorb(onu, now);
        let f = self.in_flight.get_mut(id).expect("burst is in flight");
        let buffer = &mut self.onus[onu.index()].buffer;
        let sent = buffer.dequeue(f.tx.bytes);
        debug_assert_eq!(sent, f.tx.bytes, "grant exceeds the reported backlog");
        let report = buffer.occupancy();
        f.report = Some(report);
        let receiver = f.tx.receiver;
        self.observer.event(&TraceEvent { time: now, kind: TraceKind::Transmit, onu, receiver, bytes: report });
    }

    fn burst_end(&mut self, now: Time, id: u64) {
        let f = self.in_flight.remove(id).expect("burst is in flight");
        let lost = f.loss.is_lost();
        let bits = f.tx.bytes * 8;
        let in_window = now >= self.cfg.warmup;
        for v in core::iter::once(&mut self.total).chain(in_window.then_some(&mut self.measured)) {
            if lost {
                v.collision_lost_bits += bits;
                v.lost_frames += 1;
                v.receiver_collisions += u64::from(f.loss.receiver);
                v.group_collisions += u64::from(f.loss.group);
            } else {
                v.delivered_bits += bits;
                v.delivered_frames += 1;
            }
        }
        if let Some(a) = &mut self.auditor {
            a.settle(id, lost);
        }
        let kind = if lost { TraceKind::Collided } else { TraceKind::Delivered };
        self.observer.event(&TraceEvent { time: now, kind, onu: f.tx.onu, receiver: f.tx.receiver, bytes: f.tx.bytes });
        self.request(now, f.tx.onu, f.report.expect("the ONU sends before its burst ends"));
    }
}
