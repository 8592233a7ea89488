//! Upstream scheduling for flexible TWDM passive optical networks.
//!
//! The crate holds the scheduling core (void timelines, constrained earliest
//! void filling and a receiver-only baseline), a discrete-event simulator of
//! the request/grant loop with collision auditing, a Pareto on-off traffic
//! model, and the Markov-chain throughput bound for limited granting. It is
//! `no_std` and only needs `alloc`.

#![cfg_attr(not(test), no_std)]

extern crate alloc;

pub mod error;
pub mod markov;
pub mod message;
pub mod scheduler;
pub mod sim;
pub mod time;
pub mod topology;
pub mod traffic;
pub mod void;

pub use error::{ConfigError, InvariantViolation, MarkovError, ScheduleError, TimelineError};
pub use message::{GrantMsg, RequestMsg, ScheduleDecision};
pub use scheduler::{SchedulerKind, SchedulerState};
pub use time::Time;
pub use topology::{GroupId, OnuId, ReceiverId, Topology};
pub use void::{Void, VoidTimeline};
