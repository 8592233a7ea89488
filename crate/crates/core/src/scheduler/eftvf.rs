use crate::error::ScheduleError;
use crate::message::ScheduleDecision;
use crate::topology::OnuId;

use super::cevf::{burst_duration, earliest_start, CandidateVoid};
use super::SchedulerState;

impl SchedulerState {
    /// Earliest start over receiver voids alone. Group timelines are not
    /// consulted, so two ONUs of one group may overlap on different receivers.
    pub fn schedule_eftvf(&self, onu: OnuId, bytes: u64) -> Result<ScheduleDecision, ScheduleError> {
        self.check_onu(onu)?;
        let t_e = earliest_start(self.now, self.topology.rtt(onu));
        let duration = burst_duration(bytes, self.topology.olt_rate_bps, self.topology.t_grd);
        let mut best: Option<CandidateVoid> = None;
        // Merged order is by start, so once a void starts after the best
        // candidate nothing later can start earlier.
        for tv in &self.merged {
            if let Some(cur) = &best {
                if tv.void.start > cur.start {
                    break;
                }
            }
            let start = t_e.max(tv.void.start);
            if tv.void.finish < start || tv.void.finish - start < duration {
                continue;
            }
            let c = CandidateVoid {
                start,
                finish: tv.void.finish,
                receiver: tv.receiver,
                rx_void: tv.void,
                group_void: None,
            };
            let better = match &best {
                None => true,
                Some(cur) => (c.start, c.receiver) < (cur.start, cur.receiver),
            };
            if better {
                best = Some(c);
            }
        }
        let best = best.expect("horizon voids always fit");
        Ok(self.decision(onu, bytes, duration, best))
    }
}
