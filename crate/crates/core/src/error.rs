use thiserror::Error;

use crate::time::Time;
use crate::topology::OnuId;
use crate::void::{TimelineKind, Void};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum TimelineError {
    #[error("void {new} overlaps existing void {existing}")]
    Overlap { new: Void, existing: Void },
    #[error("horizon void {new} must be the last void of its timeline")]
    MisplacedHorizon { new: Void },
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum InvariantViolation {
    #[error("{kind:?}: timeline does not end with a horizon void")]
    MissingHorizon { kind: TimelineKind },
    #[error("{kind:?}: horizon void at position {index} is not last")]
    ExtraHorizon { kind: TimelineKind, index: usize },
    #[error("{kind:?}: voids {index} and {} are not in strict start order", index + 1)]
    Unordered { kind: TimelineKind, index: usize },
    #[error("{kind:?}: voids {index} and {} overlap", index + 1)]
    Overlap { kind: TimelineKind, index: usize },
    #[error("{kind:?}: void {index} is shorter than two guard times")]
    ShortVoid { kind: TimelineKind, index: usize },
    #[error("merged receiver index is out of sync with the receiver timelines")]
    MergedIndex,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ScheduleError {
    #[error("{0} is not part of the topology")]
    UnknownOnu(OnuId),
    #[error("decision for {onu} is stale: [{start}, {end}) is not inside the named source voids")]
    StaleDecision { onu: OnuId, start: Time, end: Time },
    #[error("grant would have to leave at {grant_at}, before the current instant {now}")]
    InfeasibleGrant { grant_at: Time, now: Time },
    #[error(transparent)]
    Timeline(#[from] TimelineError),
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ConfigError {
    #[error("{0} must be positive")]
    NotPositive(&'static str),
    #[error("{receivers} receivers exceed the {onus} ONUs of the topology")]
    TooManyReceivers { receivers: usize, onus: usize },
    #[error("expected {expected} round-trip times, got {got}")]
    RttCount { expected: usize, got: usize },
    #[error("round-trip time of ONU {0} is negative")]
    NegativeRtt(usize),
    #[error("load must be a finite value in [0, 1], got {0}")]
    Load(f64),
    #[error("warm-up must be shorter than the simulated duration")]
    Warmup,
    #[error("invalid traffic parameter: {0}")]
    Traffic(&'static str),
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum MarkovError {
    #[error("buffer capacity ({capacity}) must be at least the grant cap ({lim}) and the cap must be positive")]
    Capacity { capacity: usize, lim: usize },
    #[error("mean arrivals per cycle must be finite and non-negative, got {0}")]
    Arrivals(f64),
    #[error("power iteration did not converge in {iterations} iterations (last L1 step {delta:e}); the chain may be reducible, periodic or nearly critical")]
    NoConvergence { iterations: usize, delta: f64 },
    #[error("steady state residual {0:e} exceeds tolerance")]
    Residual(f64),
    #[error("row {row} sums to {sum} instead of 1")]
    NotStochastic { row: usize, sum: f64 },
    #[error("state reduction hit a state with no way back to lower states (row {0}); the chain is reducible")]
    Reducible(usize),
}
