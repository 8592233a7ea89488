use crate::error::ScheduleError;
use crate::message::ScheduleDecision;
use crate::time::{transmission_time, Time};
use crate::topology::{OnuId, ReceiverId};
use crate::void::Void;

use super::SchedulerState;

/// Intersection of a receiver void and a group void, clamped at `T_e`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct CandidateVoid {
    pub start: Time,
    pub finish: Time,
    pub receiver: ReceiverId,
    pub rx_void: Void,
    pub group_void: Option<Void>,
}

impl CandidateVoid {
    pub fn length(&self) -> Time {
        self.finish - self.start
    }

    pub fn window(&self) -> Void {
        Void::new(self.start, self.finish)
    }
}

/// `T_e = t + rtt`: nothing sent in response to a request at `now` can reach
/// the OLT earlier.
pub fn earliest_start(now: Time, rtt: Time) -> Time {
    now + rtt
}

/// `[max(t_e, S(a), S(b)), min(F(a), F(b)))`, or `None` when the finish
/// would precede the start. Zero-length windows are returned.
pub fn intersect(a: &Void, b: &Void, t_e: Time) -> Option<Void> {
    let start = t_e.max(a.start).max(b.start);
    let finish = a.finish.min(b.finish);
    (finish >= start).then(|| Void::new(start, finish))
}

/// Reserved interval for `bytes` at `rate_bps`: serialization time rounded up
/// to the next nanosecond plus one guard time.
pub fn burst_duration(bytes: u64, rate_bps: u64, t_grd: Time) -> Time {
    transmission_time(bytes, rate_bps) + t_grd
}

/// Whether `window` can hold a burst of `bytes` (guard included).
pub fn fits(window: &Void, bytes: u64, rate_bps: u64, t_grd: Time) -> bool {
    window.length() >= burst_duration(bytes, rate_bps, t_grd)
}

/// `t_g = t_s - rtt`, rejected if it lies before `now`.
pub fn grant_instant(t_s: Time, rtt: Time, now: Time) -> Result<Time, ScheduleError> {
    let grant_at = t_s - rtt;
    if grant_at < now {
        return Err(ScheduleError::InfeasibleGrant { grant_at, now });
    }
    Ok(grant_at)
}

/// Tie-break key: earlier start, then lower receiver, then earlier receiver void.
fn rank(c: &CandidateVoid) -> (Time, ReceiverId, Time) {
    (c.start, c.receiver, c.rx_void.start)
}

impl SchedulerState {
    pub(super) fn decision(&self, onu: OnuId, bytes: u64, duration: Time, c: CandidateVoid) -> ScheduleDecision {
        let grant_at = c.start - self.topology.rtt(onu);
        debug_assert!(grant_at >= self.now, "candidate starts before T_e");
        ScheduleDecision {
            onu,
            receiver: c.receiver,
            start: c.start,
            grant_at,
            duration,
            bytes,
            rx_void: c.rx_void,
            group_void: c.group_void,
        }
    }

    fn burst(&self, bytes: u64) -> Time {
        burst_duration(bytes, self.topology.olt_rate_bps, self.topology.t_grd)
    }

    /// Every receiver void against every void of the ONU's group.
    pub fn schedule_cevf_naive(&self, onu: OnuId, bytes: u64) -> Result<ScheduleDecision, ScheduleError> {
        self.check_onu(onu)?;
        let t_e = earliest_start(self.now, self.topology.rtt(onu));
        let duration = self.burst(bytes);
        let group = &self.groups[self.topology.group_of(onu).index()];
        let mut best: Option<CandidateVoid> = None;
        for (r, tl) in self.receivers.iter().enumerate() {
            for a in tl.voids() {
                for b in group.voids() {
                    let Some(w) = intersect(a, b, t_e) else { continue };
                    if w.length() < duration {
                        continue;
                    }
                    let c = CandidateVoid {
                        start: w.start,
                        finish: w.finish,
                        receiver: ReceiverId(r as u32),
                        rx_void: *a,
                        group_void: Some(*b),
                    };
                    if best.as_ref().is_none_or(|cur| rank(&c) < rank(cur)) {
                        best = Some(c);
                    }
                }
            }
        }
        let best = best.expect("horizon voids always intersect");
        Ok(self.decision(onu, bytes, duration, best))
    }

    /// Two-pointer walk over the merged receiver voids and the group voids.
    ///
    /// Returns the decision and the number of hops. After the first fit at
    /// start `s`, receiver voids further down the merged order that also
    /// start no later than `s` are checked against the same group void so
    /// that the lowest receiver wins a tie.
    pub fn schedule_cevf_fast(&self, onu: OnuId, bytes: u64) -> Result<(ScheduleDecision, u32), ScheduleError> {
        self.check_onu(onu)?;
        let t_e = earliest_start(self.now, self.topology.rtt(onu));
        let duration = self.burst(bytes);
        let a = &self.merged;
        let b = self.groups[self.topology.group_of(onu).index()].voids();

        let (mut i, mut j, mut hops) = (0usize, 0usize, 0u32);
        let window = loop {
            if let Some(w) = intersect(&a[i].void, &b[j], t_e) {
                if w.length() >= duration {
                    break w;
                }
            }
            if a[i].void.finish <= b[j].finish {
                i += 1;
            } else {
                j += 1;
            }
            hops += 1;
        };

        let mut best = (i, window);
        for k in i + 1..a.len() {
            if a[k].void.start > window.start {
                break;
            }
            hops += 1;
            if a[k].receiver >= a[best.0].receiver {
                continue;
            }
            if let Some(w) = intersect(&a[k].void, &b[j], t_e) {
                if w.start == window.start && w.length() >= duration {
                    best = (k, w);
                }
            }
        }

        let (k, w) = best;
        let c = CandidateVoid {
            start: w.start,
            finish: w.finish,
            receiver: a[k].receiver,
            rx_void: a[k].void,
            group_void: Some(b[j]),
        };
        Ok((self.decision(onu, bytes, duration, c), hops))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ns(v: i64) -> Time {
        Time::from_nanos(v)
    }

    fn v(s: i64, f: i64) -> Void {
        Void::new(ns(s), ns(f))
    }

    #[test]
    fn earliest_start_adds_rtt() {
        assert_eq!(earliest_start(Time::from_micros(10), Time::from_micros(200)), Time::from_micros(210));
        assert_eq!(earliest_start(Time::ZERO, Time::ZERO), Time::ZERO);
        assert_eq!(earliest_start(ns(5), ns(3)), ns(8));
    }

    #[test]
    fn intersections() {
        assert_eq!(intersect(&v(0, 10), &v(5, 20), ns(0)), Some(v(5, 10)));
        assert_eq!(intersect(&v(5, 10), &v(5, 10), ns(0)), Some(v(5, 10)));
        assert_eq!(intersect(&v(0, 5), &v(6, 10), ns(0)), None);
        assert_eq!(intersect(&v(5, 10), &v(0, 20), ns(7)), Some(v(7, 10)));
        assert_eq!(intersect(&Void::horizon(ns(3)), &Void::horizon(ns(9)), ns(1)), Some(Void::horizon(ns(9))));
    }

    #[test]
    fn fits_admits_equality() {
        let g = 1_125u64; // 9 us at 1 Gb/s
        let rate = 1_000_000_000;
        let grd = Time::from_micros(1);
        assert_eq!(burst_duration(g, rate, grd), Time::from_micros(10));
        assert!(fits(&Void::new(Time::ZERO, Time::from_micros(10)), g, rate, grd));
        assert!(!fits(&Void::new(Time::ZERO, Time::from_micros(10) - ns(1)), g, rate, grd));
        assert!(fits(&Void::horizon(Time::ZERO), 1_000_000_000_000, rate, grd));
    }

    #[test]
    fn grant_instants() {
        let us = Time::from_micros;
        assert_eq!(grant_instant(us(210), us(200), us(10)), Ok(us(10)));
        assert_eq!(grant_instant(us(7), Time::ZERO, us(7)), Ok(us(7)));
        assert_eq!(grant_instant(us(7), Time::ZERO, Time::ZERO), Ok(us(7)));
        assert!(grant_instant(us(209), us(200), us(10)).is_err());
    }
}
