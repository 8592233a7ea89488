//! Pareto on-off packet sources and drop-tail ONU buffers.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::ConfigError;
use crate::time::{transmission_time, Time};

pub const SHAPE_ON: f64 = 1.2;
pub const SHAPE_OFF: f64 = 1.4;
pub const MAX_PACKET_BYTES: u64 = 1500;
/// Tail mass cut off from each period distribution.
pub const TAIL_CUTOFF: f64 = 1e-6;

/// Pareto law `P(X > x) = (min/x)^alpha` restricted to `[min, max]`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BoundedPareto {
    pub alpha: f64,
    pub min: f64,
    pub max: f64,
}

impl BoundedPareto {
    pub fn new(alpha: f64, min: f64, max: f64) -> Self {
        assert!(alpha > 0.0 && min > 0.0 && max > min, "invalid bounded Pareto parameters");
        BoundedPareto { alpha, min, max }
    }

    /// Truncated at the `1 - tail` quantile of the unbounded law.
    pub fn with_tail(alpha: f64, min: f64, tail: f64) -> Self {
        Self::new(alpha, min, min * libm::pow(tail, -1.0 / alpha))
    }

    fn tail_ratio(&self) -> f64 {
        libm::pow(self.min / self.max, self.alpha)
    }

    pub fn cdf(&self, x: f64) -> f64 {
        if x <= self.min {
            return 0.0;
        }
        if x >= self.max {
            return 1.0;
        }
        (1.0 - libm::pow(self.min / x, self.alpha)) / (1.0 - self.tail_ratio())
    }

    pub fn mean(&self) -> f64 {
        let a = self.alpha;
        let norm = libm::pow(self.min, a) / (1.0 - self.tail_ratio());
        if (a - 1.0).abs() < 1e-12 {
            norm * libm::log(self.max / self.min)
        } else {
            norm * a / (a - 1.0) * (libm::pow(self.min, 1.0 - a) - libm::pow(self.max, 1.0 - a))
        }
    }

    /// Inverse-CDF draw from a uniform `u` in `[0, 1)`.
    pub fn quantile(&self, u: f64) -> f64 {
        let x = self.min / libm::pow(1.0 - u * (1.0 - self.tail_ratio()), 1.0 / self.alpha);
        x.clamp(self.min, self.max)
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        self.quantile(rng.gen::<f64>())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Packet {
    /// Instant the last bit of the packet is in the ONU buffer.
    pub arrival: Time,
    pub bytes: u64,
}

/// On-off source emitting packets at `peak_bps` during on periods.
///
/// The shortest on period carries one full packet. The off-period scale is
/// solved from the bounded means so the long-run rate is `load * peak_bps`.
/// `load == 1` yields back-to-back bursts; `load == 0` never emits.
#[derive(Clone, Debug)]
pub struct ParetoOnOffSource {
    peak_bps: u64,
    on: BoundedPareto,
    off: Option<BoundedPareto>,
    silent: bool,
    rng: ChaCha8Rng,
    cursor: Time,
    burst_start: Time,
    burst_sent: u64,
    burst_left: u64,
}

impl ParetoOnOffSource {
    /// `stream` separates sources that share a seed.
    pub fn new(peak_bps: u64, load: f64, seed: u64, stream: u64) -> Result<Self, ConfigError> {
        if peak_bps == 0 {
            return Err(ConfigError::NotPositive("source peak rate"));
        }
        if !(0.0..=1.0).contains(&load) || !load.is_finite() {
            return Err(ConfigError::Load(load));
        }
        let packet_secs = (MAX_PACKET_BYTES * 8) as f64 / peak_bps as f64;
        let on = BoundedPareto::with_tail(SHAPE_ON, packet_secs, TAIL_CUTOFF);
        let off = if load > 0.0 && load < 1.0 {
            let unit = BoundedPareto::with_tail(SHAPE_OFF, 1.0, TAIL_CUTOFF);
            let mean_off = on.mean() * (1.0 - load) / load;
            Some(BoundedPareto::with_tail(SHAPE_OFF, mean_off / unit.mean(), TAIL_CUTOFF))
        } else {
            None
        };
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(stream);
        Ok(ParetoOnOffSource {
            peak_bps,
            on,
            off,
            silent: load == 0.0,
            rng,
            cursor: Time::ZERO,
            burst_start: Time::ZERO,
            burst_sent: 0,
            burst_left: 0,
        })
    }

    pub fn on_period(&self) -> &BoundedPareto {
        &self.on
    }

    pub fn off_period(&self) -> Option<&BoundedPareto> {
        self.off.as_ref()
    }

    /// Next packet, or `None` for a silent source. Every source starts with
    /// an off period so that sources sharing a start instant drift apart.
    pub fn next_packet(&mut self) -> Option<Packet> {
        if self.silent {
            return None;
        }
        if self.burst_left == 0 {
            self.start_burst();
        }
        let bytes = self.burst_left.min(MAX_PACKET_BYTES);
        self.burst_left -= bytes;
        self.burst_sent += bytes;
        let arrival = self.burst_start + transmission_time(self.burst_sent, self.peak_bps);
        Some(Packet { arrival, bytes })
    }

    /// Start, end and size of the next on period; drains any packets left
    /// from the current one.
    pub fn next_burst(&mut self) -> Option<(Time, Time, u64)> {
        if self.silent {
            return None;
        }
        self.start_burst();
        let bytes = self.burst_left;
        self.burst_left = 0;
        Some((self.burst_start, self.cursor, bytes))
    }

    fn start_burst(&mut self) {
        if let Some(off) = &self.off {
            let gap = off.sample(&mut self.rng);
            self.cursor += Time::from_secs_f64(gap);
        }
        let on_secs = self.on.sample(&mut self.rng);
        let bits = on_secs * self.peak_bps as f64;
        let bytes = ((bits / 8.0) as u64).max(MAX_PACKET_BYTES);
        let on = transmission_time(bytes, self.peak_bps);
        self.burst_start = self.cursor;
        self.cursor += on;
        self.burst_sent = 0;
        self.burst_left = bytes;
    }
}

/// Byte-fluid FIFO with whole-packet drop-tail admission.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct OnuBuffer {
    capacity: u64,
    occupancy: u64,
    arrived: u64,
    departed: u64,
    dropped: u64,
}

impl OnuBuffer {
    pub fn new(capacity_bytes: u64) -> Self {
        OnuBuffer { capacity: capacity_bytes, occupancy: 0, arrived: 0, departed: 0, dropped: 0 }
    }

    /// Accepts the packet iff it fits entirely.
    pub fn enqueue(&mut self, bytes: u64) -> bool {
        self.arrived += bytes;
        if self.occupancy + bytes <= self.capacity {
            self.occupancy += bytes;
            true
        } else {
            self.dropped += bytes;
            false
        }
    }

    /// Removes up to `bytes` from the head and returns how much left.
    pub fn dequeue(&mut self, bytes: u64) -> u64 {
        let taken = bytes.min(self.occupancy);
        self.occupancy -= taken;
        self.departed += taken;
        taken
    }

    pub fn capacity(&self) -> u64 {
        self.capacity
    }

    pub fn occupancy(&self) -> u64 {
        self.occupancy
    }

    pub fn arrived(&self) -> u64 {
        self.arrived
    }

    pub fn departed(&self) -> u64 {
        self.departed
    }

    pub fn dropped(&self) -> u64 {
        self.dropped
    }

    pub fn is_conserved(&self) -> bool {
        self.arrived == self.departed + self.occupancy + self.dropped
    }
}
