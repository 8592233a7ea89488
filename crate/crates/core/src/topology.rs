//! Network shape: groups of ONUs behind switch ports, OLT receivers, rates
//! and per-ONU round-trip times.

use alloc::vec::Vec;
use core::fmt;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::ConfigError;
use crate::time::Time;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct OnuId(pub u32);

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct GroupId(pub u32);

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct ReceiverId(pub u32);

macro_rules! index_newtype {
    ($($t:ident => $p:literal),*) => {$(
        impl $t {
            pub const fn index(self) -> usize {
                self.0 as usize
            }
        }

        impl fmt::Display for $t {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                write!(f, concat!($p, "{}"), self.0)
            }
        }
    )*};
}

index_newtype!(OnuId => "onu", GroupId => "group", ReceiverId => "rx");

/// Cycle length shared by all ONUs of a group under limited granting
/// (`lim * N`).
pub const GRANT_CYCLE: Time = Time::from_millis(2);

pub const DEFAULT_OLT_RATE_BPS: u64 = 1_000_000_000;
pub const DEFAULT_GUARD: Time = Time::from_micros(1);
pub const DEFAULT_BUFFER_BITS: u64 = 1_000_000_000;
pub const DEFAULT_RTT_RANGE: (Time, Time) = (Time::from_micros(100), Time::from_micros(200));

/// `M` groups of `N` ONUs, `R` OLT receivers.
///
/// ONU `u` belongs to group `u / N`. Bursts are clocked at the transceiver
/// rate `olt_rate_bps`; `onu_rate_bps` is the ONU's provisioned line rate and
/// sets the offered traffic.
#[derive(Clone, Debug, PartialEq)]
pub struct Topology {
    pub groups: usize,
    pub group_size: usize,
    pub receivers: usize,
    pub olt_rate_bps: u64,
    pub onu_rate_bps: u64,
    pub rtt: Vec<Time>,
    pub t_grd: Time,
    /// Grant cap in bytes; `None` grants the whole request.
    pub grant_limit: Option<u64>,
    pub buffer_bits: u64,
}

impl Topology {
    /// Default guard time, transceiver rate, buffer and grant cap; RTTs are
    /// drawn uniformly from 100..=200 us with `seed`.
    pub fn new(groups: usize, group_size: usize, receivers: usize, onu_rate_bps: u64, seed: u64) -> Self {
        let mut t = Topology {
            groups,
            group_size,
            receivers,
            olt_rate_bps: DEFAULT_OLT_RATE_BPS,
            onu_rate_bps,
            rtt: Vec::new(),
            t_grd: DEFAULT_GUARD,
            grant_limit: Some(default_grant_limit(group_size, DEFAULT_OLT_RATE_BPS)),
            buffer_bits: DEFAULT_BUFFER_BITS,
        };
        t.rtt = uniform_rtts(groups * group_size, DEFAULT_RTT_RANGE, seed);
        t
    }

    pub fn with_rtts(mut self, rtt: Vec<Time>) -> Self {
        self.rtt = rtt;
        self
    }

    pub fn with_guard(mut self, t_grd: Time) -> Self {
        self.t_grd = t_grd;
        self
    }

    pub fn with_grant_limit(mut self, lim: Option<u64>) -> Self {
        self.grant_limit = lim;
        self
    }

    pub fn with_olt_rate(mut self, bps: u64) -> Self {
        self.olt_rate_bps = bps;
        self
    }

    pub fn with_buffer_bits(mut self, bits: u64) -> Self {
        self.buffer_bits = bits;
        self
    }

    pub fn onus(&self) -> usize {
        self.groups * self.group_size
    }

    pub fn group_of(&self, onu: OnuId) -> GroupId {
        GroupId((onu.index() / self.group_size) as u32)
    }

    pub fn rtt(&self, onu: OnuId) -> Time {
        self.rtt[onu.index()]
    }

    pub fn contains(&self, onu: OnuId) -> bool {
        onu.index() < self.onus()
    }

    /// Bytes the OLT will grant for a request of `requested` bytes.
    pub fn grant_for(&self, requested: u64) -> u64 {
        match self.grant_limit {
            Some(lim) => requested.min(lim),
            None => requested,
        }
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        if self.groups == 0 {
            return Err(ConfigError::NotPositive("number of groups"));
        }
        if self.group_size == 0 {
            return Err(ConfigError::NotPositive("group size"));
        }
        if self.receivers == 0 {
            return Err(ConfigError::NotPositive("number of receivers"));
        }
        if self.receivers > self.onus() {
            return Err(ConfigError::TooManyReceivers { receivers: self.receivers, onus: self.onus() });
        }
        if self.olt_rate_bps == 0 {
            return Err(ConfigError::NotPositive("OLT rate"));
        }
        if self.onu_rate_bps == 0 {
            return Err(ConfigError::NotPositive("ONU rate"));
        }
        if self.t_grd <= Time::ZERO || self.t_grd.is_infinite() {
            return Err(ConfigError::NotPositive("guard time"));
        }
        if self.grant_limit == Some(0) {
            return Err(ConfigError::NotPositive("grant limit"));
        }
        if self.buffer_bits == 0 {
            return Err(ConfigError::NotPositive("buffer size"));
        }
        if self.rtt.len() != self.onus() {
            return Err(ConfigError::RttCount { expected: self.onus(), got: self.rtt.len() });
        }
        if let Some(i) = self.rtt.iter().position(|r| *r < Time::ZERO || r.is_infinite()) {
            return Err(ConfigError::NegativeRtt(i));
        }
        Ok(())
    }
}

/// `lim` such that `lim * N` bytes take one grant cycle (2 ms) at `rate_bps`.
pub fn default_grant_limit(group_size: usize, rate_bps: u64) -> u64 {
    let cycle_ns = GRANT_CYCLE.as_nanos() as u128;
    let bits = cycle_ns * rate_bps as u128 / (group_size.max(1) as u128 * 1_000_000_000);
    (bits / 8) as u64
}

pub fn uniform_rtts(count: usize, (lo, hi): (Time, Time), seed: u64) -> Vec<Time> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x5254_545f_5345_4544);
    (0..count).map(|_| Time::from_nanos(rng.gen_range(lo.as_nanos()..=hi.as_nanos()))).collect()
}
