//! Request/grant control messages and the scheduler's placement decision.

use crate::time::Time;
use crate::topology::{OnuId, ReceiverId, Topology};
use crate::void::Void;

/// Piggybacked report: `bytes` queued at the ONU.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct RequestMsg {
    pub onu: OnuId,
    pub bytes: u64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct GrantMsg {
    pub onu: OnuId,
    pub bytes: u64,
    pub send_at: Time,
}

impl RequestMsg {
    /// Bytes the OLT grants for this request (`min(b, lim)`).
    pub fn granted(&self, topology: &Topology) -> u64 {
        topology.grant_for(self.bytes)
    }
}

/// Where and when an ONU's next upstream burst goes.
///
/// `start` is the arrival of the burst at the OLT, `grant_at = start - rtt`
/// is when the grant leaves the OLT. `duration` includes the guard time at
/// the head of the burst.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct ScheduleDecision {
    pub onu: OnuId,
    pub receiver: ReceiverId,
    pub start: Time,
    pub grant_at: Time,
    pub duration: Time,
    pub bytes: u64,
    /// Receiver void the burst is carved from.
    pub rx_void: Void,
    /// Group void the burst is carved from; `None` for receiver-only
    /// scheduling, which never looks at group timelines.
    pub group_void: Option<Void>,
}

impl ScheduleDecision {
    pub fn end(&self) -> Time {
        self.start + self.duration
    }

    pub fn grant(&self) -> GrantMsg {
        GrantMsg { onu: self.onu, bytes: self.bytes, send_at: self.grant_at }
    }

    /// The tuple that must agree between equivalent schedulers.
    pub fn placement(&self) -> (Time, ReceiverId, Time) {
        (self.start, self.receiver, self.duration)
    }
}
