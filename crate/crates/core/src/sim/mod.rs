//! Discrete-event simulation of the upstream request/grant loop.
//!
//! Every ONU is polled at time zero. When a burst finishes arriving at the
//! OLT, the request piggybacked on it is scheduled at once with
//! `g = min(b, lim)`; the grant reaches the ONU half a round trip later and
//! the ONU sends `g` bytes straight away, reporting what is left in its
//! buffer. Idle ONUs keep receiving zero-byte grants, so each ONU always has
//! exactly one grant outstanding. Requests are never lost; collided data
//! is not retransmitted.

pub mod collision;
mod engine;
pub mod metrics;

pub use collision::{detect_collisions, Loss, Transmission};
pub use metrics::{AuditReport, HopStats, Metrics, Volumes};

use crate::error::ConfigError;
use crate::scheduler::SchedulerKind;
use crate::time::Time;
use crate::topology::{OnuId, ReceiverId, Topology};
use crate::traffic::Packet;

/// Collision domains present in the optical distribution network.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Architecture {
    /// Switch ports per group in front of the receivers: group and receiver
    /// collisions.
    FlexibleSecure,
    /// Power splitters only: receiver collisions.
    Splitter,
}

impl Architecture {
    pub fn name(self) -> &'static str {
        match self {
            Architecture::FlexibleSecure => "flexible",
            Architecture::Splitter => "splitter",
        }
    }
}

pub const DEFAULT_DURATION: Time = Time::from_secs(20);

#[derive(Clone, Debug, PartialEq)]
pub struct SimConfig {
    pub topology: Topology,
    pub architecture: Architecture,
    pub scheduler: SchedulerKind,
    /// Offered load per ONU as a fraction of its line rate.
    pub load: f64,
    pub duration: Time,
    pub warmup: Time,
    pub seed: u64,
    /// Re-check collisions with the batch detector and scan scheduler
    /// invariants after every commit.
    pub audit: bool,
}

impl SimConfig {
    /// 20 s run with a 10% warm-up.
    pub fn new(topology: Topology, architecture: Architecture, scheduler: SchedulerKind, load: f64, seed: u64) -> Self {
        SimConfig {
            topology,
            architecture,
            scheduler,
            load,
            duration: DEFAULT_DURATION,
            warmup: Time::from_nanos(DEFAULT_DURATION.as_nanos() / 10),
            seed,
            audit: false,
        }
    }

    /// Sets the run length and a warm-up of a tenth of it.
    pub fn with_duration(mut self, duration: Time) -> Self {
        self.duration = duration;
        self.warmup = Time::from_nanos(duration.as_nanos() / 10);
        self
    }

    pub fn with_warmup(mut self, warmup: Time) -> Self {
        self.warmup = warmup;
        self
    }

    pub fn with_audit(mut self, audit: bool) -> Self {
        self.audit = audit;
        self
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        self.topology.validate()?;
        if !self.load.is_finite() || !(0.0..=1.0).contains(&self.load) {
            return Err(ConfigError::Load(self.load));
        }
        if self.duration <= Time::ZERO || self.duration.is_infinite() {
            return Err(ConfigError::NotPositive("simulated duration"));
        }
        if self.warmup < Time::ZERO || self.warmup >= self.duration {
            return Err(ConfigError::Warmup);
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum TraceKind {
    /// Request scheduled at the OLT; `bytes` is the granted amount.
    Grant,
    /// ONU starts sending; `bytes` is what it reports back.
    Transmit,
    Delivered,
    Collided,
}

impl TraceKind {
    pub fn name(self) -> &'static str {
        match self {
            TraceKind::Grant => "grant",
            TraceKind::Transmit => "transmit",
            TraceKind::Delivered => "delivered",
            TraceKind::Collided => "collided",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct TraceEvent {
    pub time: Time,
    pub kind: TraceKind,
    pub onu: OnuId,
    pub receiver: ReceiverId,
    pub bytes: u64,
}

/// Hooks for traces. Both default to doing nothing.
pub trait Observer {
    fn packet(&mut self, _onu: OnuId, _packet: &Packet) {}
    fn event(&mut self, _event: &TraceEvent) {}
}

pub struct NoObserver;

impl Observer for NoObserver {}

pub fn run(config: &SimConfig) -> Result<Metrics, ConfigError> {
    run_with(config, &mut NoObserver)
}

pub fn run_with<O: Observer>(config: &SimConfig, observer: &mut O) -> Result<Metrics, ConfigError> {
    config.validate()?;
    Ok(engine::Engine::new(config, observer)?.run())
}
