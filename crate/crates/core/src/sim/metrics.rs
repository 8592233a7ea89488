use crate::scheduler::InsertStats;
use crate::time::Time;

/// Fast-CEVF search cost over a run.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct HopStats {
    pub calls: u64,
    pub total: u64,
    pub max: u32,
    /// `N + M*N + R` for the simulated topology.
    pub bound: u32,
    pub violations: u64,
}

impl HopStats {
    pub fn with_bound(bound: u32) -> Self {
        HopStats { bound, ..Self::default() }
    }

    pub fn record(&mut self, hops: u32) {
        self.calls += 1;
        self.total += u64::from(hops);
        self.max = self.max.max(hops);
        if hops > self.bound {
            self.violations += 1;
        }
    }

    pub fn mean(&self) -> f64 {
        if self.calls == 0 {
            0.0
        } else {
            self.total as f64 / self.calls as f64
        }
    }
}

/// Bit counters over some interval.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct Volumes {
    pub offered_bits: u64,
    pub delivered_bits: u64,
    pub buffer_dropped_bits: u64,
    pub collision_lost_bits: u64,
    pub delivered_frames: u64,
    pub lost_frames: u64,
    /// Frames lost to an overlap on their receiver.
    pub receiver_collisions: u64,
    /// Frames lost to an overlap with another ONU of their group.
    pub group_collisions: u64,
}

/// Independent batch re-check of every finished transmission.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct AuditReport {
    pub transmissions: u64,
    pub lost_frames: u64,
    pub lost_bits: u64,
    /// Frames whose batch verdict differs from the online tracker.
    pub mismatches: u64,
    /// Scheduler invariant scans that failed after a commit.
    pub invariant_failures: u64,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Metrics {
    pub load: f64,
    /// Length of the measurement window (run length minus warm-up).
    pub window: Time,
    /// Counters restricted to the measurement window.
    pub measured: Volumes,
    /// Counters over the whole run.
    pub total: Volumes,
    /// Bytes still queued at the ONUs when the run stops.
    pub residual_bits: u64,
    /// Bits dequeued for bursts that had not finished when the run stopped.
    pub in_flight_bits: u64,
    /// Sum of ONU line rates, the capacity `measured` is normalised by.
    pub capacity_bps: u64,
    pub hops: HopStats,
    pub inserts: InsertStats,
    pub audit: Option<AuditReport>,
}

impl Metrics {
    /// Carried share of the offered load, scaled by the load: `100 * rho *
    /// min(1, delivered / offered)`. Equals 100 when a fully loaded network
    /// carries everything.
    pub fn throughput_pct(&self) -> f64 {
        let m = &self.measured;
        if m.offered_bits == 0 {
            return 0.0;
        }
        100.0 * self.load * (m.delivered_bits as f64 / m.offered_bits as f64).min(1.0)
    }

    /// Delivered bits over the aggregate ONU line rate and the window.
    pub fn utilization_pct(&self) -> f64 {
        let cap = self.capacity_bps as f64 * self.window.as_secs_f64();
        if cap == 0.0 {
            0.0
        } else {
            100.0 * self.measured.delivered_bits as f64 / cap
        }
    }

    pub fn collision_loss_pct(&self) -> f64 {
        share(self.measured.collision_lost_bits, self.measured.offered_bits)
    }

    pub fn buffer_drop_pct(&self) -> f64 {
        share(self.measured.buffer_dropped_bits, self.measured.offered_bits)
    }

    /// Whole-run conservation: everything offered was delivered, dropped,
    /// lost, is still queued or still on the fibre.
    pub fn is_conserved(&self) -> bool {
        let t = &self.total;
        t.offered_bits
            == t.delivered_bits
                + t.buffer_dropped_bits
                + t.collision_lost_bits
                + self.residual_bits
                + self.in_flight_bits
    }
}

fn share(part: u64, whole: u64) -> f64 {
    if whole == 0 {
        0.0
    } else {
        100.0 * part as f64 / whole as f64
    }
}
