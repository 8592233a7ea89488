//! Grant placement over receiver and group void timelines.
//!
//! [`SchedulerState`] owns one timeline per OLT receiver and one per group,
//! plus a start-ordered index over the voids of all receivers that the fast
//! CEVF search walks as a single sequence. The `schedule_*` methods are pure
//! reads; [`SchedulerState::commit`] carves the chosen burst out of its
//! source voids.

mod cevf;
mod eftvf;

use alloc::vec::Vec;

pub use cevf::{burst_duration, earliest_start, fits, grant_instant, intersect, CandidateVoid};

use crate::error::{InvariantViolation, ScheduleError};
use crate::message::ScheduleDecision;
use crate::time::Time;
use crate::topology::{GroupId, OnuId, ReceiverId, Topology};
use crate::void::{insertion_bound, lower_bound, TimelineKind, Void, VoidTimeline};

/// Which placement rule the OLT runs.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum SchedulerKind {
    /// Constrained earliest void filling, ordered-void hopping.
    CevfFast,
    /// Constrained earliest void filling, full grid search.
    CevfNaive,
    /// Earliest finish time with void filling over receivers only.
    EftVf,
}

impl SchedulerKind {
    pub fn name(self) -> &'static str {
        match self {
            SchedulerKind::CevfFast => "cevf",
            SchedulerKind::CevfNaive => "cevf-naive",
            SchedulerKind::EftVf => "eftvf",
        }
    }

    pub fn respects_groups(self) -> bool {
        !matches!(self, SchedulerKind::EftVf)
    }
}

/// A receiver void tagged with its receiver, as stored in the merged index.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct TaggedVoid {
    pub receiver: ReceiverId,
    pub void: Void,
}

impl TaggedVoid {
    fn key(&self) -> (Time, ReceiverId) {
        (self.void.start, self.receiver)
    }
}

/// Binary-search instrumentation for void insertion.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct InsertStats {
    pub inserts: u64,
    pub comparisons: u64,
    pub max_comparisons: u32,
    /// Insertions that needed more than `ceil(log2(len + 1))` comparisons.
    pub violations: u64,
}

impl InsertStats {
    fn record(&mut self, len_before: usize, comparisons: u32) {
        self.inserts += 1;
        self.comparisons += u64::from(comparisons);
        self.max_comparisons = self.max_comparisons.max(comparisons);
        if comparisons > insertion_bound(len_before) {
            self.violations += 1;
        }
    }
}

/// Outcome of a schedule call.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Scheduled {
    pub decision: ScheduleDecision,
    /// Void hops taken by the fast CEVF search; `None` for the other rules.
    pub hops: Option<u32>,
}

#[derive(Clone, Debug)]
pub struct SchedulerState {
    topology: Topology,
    receivers: Vec<VoidTimeline>,
    groups: Vec<VoidTimeline>,
    merged: Vec<TaggedVoid>,
    now: Time,
    inserts: InsertStats,
}

impl SchedulerState {
    /// All receivers and groups idle from `now` on.
    pub fn new(topology: Topology, now: Time) -> Self {
        let receivers: Vec<_> = (0..topology.receivers)
            .map(|r| VoidTimeline::new(TimelineKind::Receiver(ReceiverId(r as u32)), now))
            .collect();
        let groups =
            (0..topology.groups).map(|x| VoidTimeline::new(TimelineKind::Group(GroupId(x as u32)), now)).collect();
        let merged = (0..topology.receivers)
            .map(|r| TaggedVoid { receiver: ReceiverId(r as u32), void: Void::horizon(now) })
            .collect();
        SchedulerState { topology, receivers, groups, merged, now, inserts: InsertStats::default() }
    }

    /// Builds a state from explicit void lists, one per receiver and one per
    /// group, each ending with a horizon void.
    pub fn from_voids(
        topology: Topology,
        now: Time,
        receivers: Vec<Vec<Void>>,
        groups: Vec<Vec<Void>>,
    ) -> Result<Self, InvariantViolation> {
        assert_eq!(receivers.len(), topology.receivers, "one void list per receiver");
        assert_eq!(groups.len(), topology.groups, "one void list per group");
        let build = |kind, voids: Vec<Void>| {
            let mut tl = VoidTimeline::new(kind, now);
            tl.replace(voids);
            tl
        };
        let receivers: Vec<_> = receivers
            .into_iter()
            .enumerate()
            .map(|(r, v)| build(TimelineKind::Receiver(ReceiverId(r as u32)), v))
            .collect();
        let groups =
            groups.into_iter().enumerate().map(|(x, v)| build(TimelineKind::Group(GroupId(x as u32)), v)).collect();
        let mut merged: Vec<TaggedVoid> = receivers
            .iter()
            .enumerate()
            .flat_map(|(r, tl)| tl.voids().iter().map(move |v| TaggedVoid { receiver: ReceiverId(r as u32), void: *v }))
            .collect();
        merged.sort_by_key(TaggedVoid::key);
        let state = SchedulerState { topology, receivers, groups, merged, now, inserts: InsertStats::default() };
        state.check_invariants()?;
        Ok(state)
    }

    pub fn topology(&self) -> &Topology {
        &self.topology
    }

    pub fn now(&self) -> Time {
        self.now
    }

    pub fn receiver_timeline(&self, r: ReceiverId) -> &VoidTimeline {
        &self.receivers[r.index()]
    }

    pub fn group_timeline(&self, x: GroupId) -> &VoidTimeline {
        &self.groups[x.index()]
    }

    /// Voids of all receivers ordered by `(start, receiver)`.
    pub fn merged_receiver_voids(&self) -> &[TaggedVoid] {
        &self.merged
    }

    pub fn insert_stats(&self) -> InsertStats {
        self.inserts
    }

    /// Moves the clock forward and forgets voids that have already ended.
    pub fn advance_to(&mut self, now: Time) {
        assert!(now >= self.now, "scheduler clock cannot run backwards");
        self.now = now;
        for tl in self.receivers.iter_mut().chain(self.groups.iter_mut()) {
            tl.prune_before(now);
        }
        // Only voids starting before `now` can have finished.
        let started = self.merged.partition_point(|tv| tv.void.start < now);
        let dead = |tv: &TaggedVoid| !tv.void.is_horizon() && tv.void.finish <= now;
        if self.merged[..started].iter().any(dead) {
            self.merged.retain(|tv| !dead(tv));
        }
    }

    /// Places `bytes` for `onu` with the given rule without touching the state.
    pub fn schedule(&self, kind: SchedulerKind, onu: OnuId, bytes: u64) -> Result<Scheduled, ScheduleError> {
        Ok(match kind {
            SchedulerKind::CevfFast => {
                let (decision, hops) = self.schedule_cevf_fast(onu, bytes)?;
                Scheduled { decision, hops: Some(hops) }
            }
            SchedulerKind::CevfNaive => Scheduled { decision: self.schedule_cevf_naive(onu, bytes)?, hops: None },
            SchedulerKind::EftVf => Scheduled { decision: self.schedule_eftvf(onu, bytes)?, hops: None },
        })
    }

    /// Removes `[start, start + duration)` from the decision's source voids.
    ///
    /// Fragments shorter than two guard times are dropped. Decisions without
    /// a group void only touch the receiver timeline.
    pub fn commit(&mut self, d: &ScheduleDecision) -> Result<(), ScheduleError> {
        if !self.topology.contains(d.onu) || d.receiver.index() >= self.receivers.len() {
            return Err(ScheduleError::UnknownOnu(d.onu));
        }
        if d.grant_at < self.now {
            return Err(ScheduleError::InfeasibleGrant { grant_at: d.grant_at, now: self.now });
        }
        let end = d.end();
        let stale = ScheduleError::StaleDecision { onu: d.onu, start: d.start, end };
        let rx_idx = find_source(&self.receivers[d.receiver.index()], &d.rx_void, d.start, end).ok_or(stale.clone())?;
        let group = self.topology.group_of(d.onu);
        let group_idx = match &d.group_void {
            Some(gv) => Some(find_source(&self.groups[group.index()], gv, d.start, end).ok_or(stale)?),
            None => None,
        };

        let keep = self.keep_threshold();

        let tl = &mut self.receivers[d.receiver.index()];
        let old = tl.remove_at(rx_idx);
        let pos = merged_position(&self.merged, d.receiver, old.start).expect("merged index out of sync");
        self.merged.remove(pos);
        for frag in fragments(old, d.start, end, keep).into_iter().flatten() {
            let len = tl.len();
            let c = tl.insert_ordered(frag)?;
            self.inserts.record(len, c);
            let tagged = TaggedVoid { receiver: d.receiver, void: frag };
            let len = self.merged.len();
            let (at, c) = lower_bound(len, |i| self.merged[i].key() < tagged.key());
            self.merged.insert(at, tagged);
            self.inserts.record(len, c);
        }

        if let Some(idx) = group_idx {
            let tl = &mut self.groups[group.index()];
            let old = tl.remove_at(idx);
            for frag in fragments(old, d.start, end, keep).into_iter().flatten() {
                let len = tl.len();
                let c = tl.insert_ordered(frag)?;
                self.inserts.record(len, c);
            }
        }
        Ok(())
    }

    /// Every timeline invariant plus agreement of the merged index with
    /// the per-receiver timelines.
    pub fn check_invariants(&self) -> Result<(), InvariantViolation> {
        let keep = self.keep_threshold();
        for tl in self.receivers.iter().chain(self.groups.iter()) {
            tl.check_invariants(keep)?;
        }
        let total: usize = self.receivers.iter().map(VoidTimeline::len).sum();
        if total != self.merged.len() || self.merged.windows(2).any(|w| w[0].key() >= w[1].key()) {
            return Err(InvariantViolation::MergedIndex);
        }
        for tv in &self.merged {
            let tl = &self.receivers[tv.receiver.index()];
            match tl.position_of(tv.void.start) {
                Some(i) if tl.voids()[i] == tv.void => {}
                _ => return Err(InvariantViolation::MergedIndex),
            }
        }
        Ok(())
    }

    fn keep_threshold(&self) -> Time {
        self.topology.t_grd + self.topology.t_grd
    }

    fn check_onu(&self, onu: OnuId) -> Result<(), ScheduleError> {
        if self.topology.contains(onu) {
            Ok(())
        } else {
            Err(ScheduleError::UnknownOnu(onu))
        }
    }
}

fn merged_position(merged: &[TaggedVoid], receiver: ReceiverId, start: Time) -> Option<usize> {
    merged.binary_search_by(|tv| tv.key().cmp(&(start, receiver))).ok()
}

fn find_source(tl: &VoidTimeline, expected: &Void, start: Time, end: Time) -> Option<usize> {
    let idx = tl.position_of(expected.start)?;
    let v = tl.voids()[idx];
    (v == *expected && v.covers(start, end)).then_some(idx)
}

/// Pieces of `v` left after removing `[start, end)`. A piece survives if it
/// is non-empty and at least `keep` long; the trailing piece of a horizon
/// void is always kept.
fn fragments(v: Void, start: Time, end: Time, keep: Time) -> [Option<Void>; 2] {
    let head = (start > v.start && start - v.start >= keep).then(|| Void::new(v.start, start));
    let tail = if v.is_horizon() {
        Some(Void::horizon(end))
    } else {
        (v.finish > end && v.finish - end >= keep).then(|| Void::new(end, v.finish))
    };
    [head, tail]
}
