//! Integer nanosecond time base.
//!
//! Every scheduler comparison is exact integer arithmetic. `Time::INFINITY`
//! is a reserved sentinel that orders above every finite instant and is
//! absorbing under addition.

use core::fmt;
use core::ops::{Add, AddAssign, Sub};

/// An instant or a span, in nanoseconds.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Time(i64);

impl Time {
    pub const ZERO: Time = Time(0);
    /// Finish time of horizon voids.
    pub const INFINITY: Time = Time(i64::MAX);

    pub const fn from_nanos(ns: i64) -> Self {
        Time(ns)
    }

    pub const fn from_micros(us: i64) -> Self {
        Time(us * 1_000)
    }

    pub const fn from_millis(ms: i64) -> Self {
        Time(ms * 1_000_000)
    }

    pub const fn from_secs(s: i64) -> Self {
        Time(s * 1_000_000_000)
    }

    /// Rounds to the nearest nanosecond.
    pub fn from_secs_f64(s: f64) -> Self {
        Time(libm::round(s * 1e9) as i64)
    }

    pub const fn as_nanos(self) -> i64 {
        self.0
    }

    pub fn as_secs_f64(self) -> f64 {
        self.0 as f64 * 1e-9
    }

    pub const fn is_infinite(self) -> bool {
        self.0 == i64::MAX
    }

    pub const fn is_finite(self) -> bool {
        self.0 != i64::MAX
    }

    pub fn min(self, other: Time) -> Time {
        if self <= other {
            self
        } else {
            other
        }
    }

    pub fn max(self, other: Time) -> Time {
        if self >= other {
            self
        } else {
            other
        }
    }
}

impl Add for Time {
    type Output = Time;

    fn add(self, rhs: Time) -> Time {
        if self.is_infinite() || rhs.is_infinite() {
            return Time::INFINITY;
        }
        let sum = self.0.checked_add(rhs.0).expect("time overflow");
        debug_assert!(sum != i64::MAX, "finite sum collides with the infinity sentinel");
        Time(sum)
    }
}

impl AddAssign for Time {
    fn add_assign(&mut self, rhs: Time) {
        *self = *self + rhs;
    }
}

impl Sub for Time {
    type Output = Time;

    /// `INFINITY - finite` stays infinite; subtracting infinity is a bug.
    fn sub(self, rhs: Time) -> Time {
        assert!(rhs.is_finite(), "cannot subtract an infinite time");
        if self.is_infinite() {
            return Time::INFINITY;
        }
        Time(self.0 - rhs.0)
    }
}

impl fmt::Display for Time {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_infinite() {
            f.write_str("+inf")
        } else {
            write!(f, "{}ns", self.0)
        }
    }
}

/// Time to clock `bytes` onto a link of `rate_bps`: `ceil(8 * bytes * 1e9 / rate)` ns.
///
/// Rounding up never lets two back-to-back reservations overlap.
pub fn transmission_time(bytes: u64, rate_bps: u64) -> Time {
    assert!(rate_bps > 0, "link rate must be positive");
    let num = 8u128 * bytes as u128 * 1_000_000_000u128;
    let ns = num.div_ceil(rate_bps as u128);
    Time(i64::try_from(ns).expect("transmission time overflows i64"))
}
