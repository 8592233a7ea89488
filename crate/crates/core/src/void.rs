//! Voids (idle intervals) and the ordered timelines that hold them.

use alloc::vec::Vec;
use core::fmt;

use crate::error::{InvariantViolation, TimelineError};
use crate::time::Time;
use crate::topology::{GroupId, ReceiverId};

/// Half-open idle interval `[start, finish)`. A horizon void has
/// `finish == Time::INFINITY`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Void {
    pub start: Time,
    pub finish: Time,
}

impl Void {
    pub fn new(start: Time, finish: Time) -> Self {
        assert!(finish >= start, "void finishes before it starts");
        Void { start, finish }
    }

    pub fn horizon(start: Time) -> Self {
        Void { start, finish: Time::INFINITY }
    }

    pub fn is_horizon(&self) -> bool {
        self.finish.is_infinite()
    }

    /// `F - S`, or the infinity sentinel for a horizon void.
    pub fn length(&self) -> Time {
        self.finish - self.start
    }

    /// Whether `[start, end)` lies inside this void.
    pub fn covers(&self, start: Time, end: Time) -> bool {
        self.start <= start && end <= self.finish
    }
}

impl fmt::Display for Void {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{}, {})", self.start, self.finish)
    }
}

pub fn void_length(v: &Void) -> Time {
    v.length()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum TimelineKind {
    Receiver(ReceiverId),
    Group(GroupId),
}

/// Start-ordered, non-overlapping voids of one receiver or one group,
/// terminated by a horizon void.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct VoidTimeline {
    kind: TimelineKind,
    voids: Vec<Void>,
}

impl VoidTimeline {
    /// A timeline that is idle from `from` onwards.
    pub fn new(kind: TimelineKind, from: Time) -> Self {
        VoidTimeline { kind, voids: alloc::vec![Void::horizon(from)] }
    }

    pub fn kind(&self) -> TimelineKind {
        self.kind
    }

    pub fn voids(&self) -> &[Void] {
        &self.voids
    }

    pub fn len(&self) -> usize {
        self.voids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.voids.is_empty()
    }

    pub fn horizon(&self) -> &Void {
        self.voids.last().expect("timeline always holds its horizon")
    }

    /// Index of the void starting exactly at `start`.
    pub fn position_of(&self, start: Time) -> Option<usize> {
        self.voids.binary_search_by(|v| v.start.cmp(&start)).ok()
    }

    /// The void containing instant `t`, if any.
    pub fn void_at(&self, t: Time) -> Option<&Void> {
        let idx = self.voids.partition_point(|v| v.start <= t);
        if idx == 0 {
            return None;
        }
        let v = &self.voids[idx - 1];
        (t < v.finish).then_some(v)
    }

    pub(crate) fn replace(&mut self, voids: Vec<Void>) {
        self.voids = voids;
    }

    pub(crate) fn remove_at(&mut self, idx: usize) -> Void {
        self.voids.remove(idx)
    }

    /// Binary-search insertion keeping strict start order.
    ///
    /// Returns the number of element comparisons made by the search, which is
    /// at most `ceil(log2(len + 1))`.
    pub fn insert_ordered(&mut self, v: Void) -> Result<u32, TimelineError> {
        let (idx, comparisons) = lower_bound_by_start(&self.voids, v.start);
        if let Some(next) = self.voids.get(idx) {
            if next.start < v.finish || next.start == v.start {
                return Err(TimelineError::Overlap { new: v, existing: *next });
            }
        }
        if idx > 0 {
            let prev = self.voids[idx - 1];
            if prev.finish > v.start {
                return Err(TimelineError::Overlap { new: v, existing: prev });
            }
        }
        if v.is_horizon() && idx != self.voids.len() {
            return Err(TimelineError::MisplacedHorizon { new: v });
        }
        self.voids.insert(idx, v);
        Ok(comparisons)
    }

    /// Drops non-horizon voids that end at or before `now`.
    pub fn prune_before(&mut self, now: Time) -> usize {
        let dead = self.voids.partition_point(|v| !v.is_horizon() && v.finish <= now);
        // Voids are disjoint and start-ordered, so finish order equals start order.
        self.voids.drain(..dead);
        dead
    }

    /// Checks ordering, disjointness, the horizon rule and the minimum
    /// length of non-horizon voids.
    pub fn check_invariants(&self, min_len: Time) -> Result<(), InvariantViolation> {
        let Some(last) = self.voids.last() else {
            return Err(InvariantViolation::MissingHorizon { kind: self.kind });
        };
        if !last.is_horizon() {
            return Err(InvariantViolation::MissingHorizon { kind: self.kind });
        }
        for (i, v) in self.voids.iter().enumerate() {
            if i + 1 < self.voids.len() {
                if v.is_horizon() {
                    return Err(InvariantViolation::ExtraHorizon { kind: self.kind, index: i });
                }
                let next = &self.voids[i + 1];
                if next.start <= v.start {
                    return Err(InvariantViolation::Unordered { kind: self.kind, index: i });
                }
                if v.finish > next.start {
                    return Err(InvariantViolation::Overlap { kind: self.kind, index: i });
                }
                if v.length() < min_len {
                    return Err(InvariantViolation::ShortVoid { kind: self.kind, index: i });
                }
            }
        }
        Ok(())
    }
}

/// First index whose start is `>= start`, with the comparison count.
pub(crate) fn lower_bound_by_start(voids: &[Void], start: Time) -> (usize, u32) {
    lower_bound(voids.len(), |i| voids[i].start < start)
}

/// Classic halving search over `0..len` for the first index where `less`
/// turns false. Makes at most `ceil(log2(len + 1))` calls to `less`.
pub(crate) fn lower_bound(len: usize, mut less: impl FnMut(usize) -> bool) -> (usize, u32) {
    let (mut lo, mut hi) = (0usize, len);
    let mut comparisons = 0u32;
    while lo < hi {
        let mid = lo + (hi - lo) / 2;
        comparisons += 1;
        if less(mid) {
            lo = mid + 1;
        } else {
            hi = mid;
        }
    }
    (lo, comparisons)
}

/// `ceil(log2(len + 1))`, the comparison budget of an insertion into a
/// sequence of `len` elements.
pub fn insertion_bound(len: usize) -> u32 {
    let n = len as u64 + 1;
    64 - (n - 1).leading_zeros()
}
