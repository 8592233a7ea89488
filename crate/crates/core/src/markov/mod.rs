//! Buffer-occupancy Markov chain of one ONU under limited granting, and the
//! throughput bound derived from its full-buffer probability.
//!
//! States count 1500-byte quanta. Each grant cycle serves up to `lim_q`
//! quanta and brings Poisson(`A`) new ones.

mod matrix;
mod solve;

pub use matrix::{build_transition_matrix, poisson_pmf, TransitionMatrix, TAIL_MASS};
pub use solve::{steady_state, steady_state_direct, PowerOptions, Stationary};

use crate::error::MarkovError;
use crate::topology::GRANT_CYCLE;
use crate::traffic::MAX_PACKET_BYTES;

/// How mean arrivals per cycle scale with the load.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum ArrivalMode {
    /// Cycle length `rho * 2 ms` and arrival rate `rho * r`: `A = rho^2 * lim_q`.
    Literal,
    /// Fixed 2 ms cycle: `A = rho * lim_q`.
    Linear,
}

/// How a growing buffer is counted.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum TransitionRule {
    /// Service applies every cycle: `B' = B + k - lim`.
    Lindley,
    /// Growth uses `k = B' - B` (no service that cycle); rows rescaled.
    AsPrinted,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ChainConfig {
    /// Buffer capacity `K` in quanta; the top state is "buffer full".
    pub capacity: usize,
    /// Grant cap in quanta.
    pub lim_q: usize,
    /// Mean arrivals per cycle `A`.
    pub arrivals: f64,
    pub load: f64,
    pub mode: ArrivalMode,
    pub rule: TransitionRule,
}

/// Quanta of 1500 bytes.
const QUANTUM_BITS: u64 = MAX_PACKET_BYTES * 8;

impl ChainConfig {
    /// Chain for an ONU of line rate `onu_rate_bps` in a group of
    /// `group_size`, with a buffer of `buffer_bits`.
    pub fn for_network(
        onu_rate_bps: u64,
        group_size: usize,
        buffer_bits: u64,
        load: f64,
        mode: ArrivalMode,
        rule: TransitionRule,
    ) -> Result<Self, MarkovError> {
        let lim_q = grant_quanta(onu_rate_bps, group_size);
        let capacity = buffer_bits.div_ceil(QUANTUM_BITS) as usize;
        let cfg = ChainConfig { capacity, lim_q, arrivals: mean_arrivals(lim_q, load, mode), load, mode, rule };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<(), MarkovError> {
        if self.lim_q == 0 || self.capacity < self.lim_q {
            return Err(MarkovError::Capacity { capacity: self.capacity, lim: self.lim_q });
        }
        if !self.arrivals.is_finite() || self.arrivals < 0.0 {
            return Err(MarkovError::Arrivals(self.arrivals));
        }
        Ok(())
    }
}

/// `floor((2 ms / N) * r / 12000)`: whole packets an ONU may send per cycle.
pub fn grant_quanta(onu_rate_bps: u64, group_size: usize) -> usize {
    let bits = GRANT_CYCLE.as_nanos() as u128 * onu_rate_bps as u128 / (group_size.max(1) as u128 * 1_000_000_000);
    (bits / QUANTUM_BITS as u128) as usize
}

pub fn mean_arrivals(lim_q: usize, load: f64, mode: ArrivalMode) -> f64 {
    match mode {
        ArrivalMode::Literal => load * load * lim_q as f64,
        ArrivalMode::Linear => load * lim_q as f64,
    }
}

/// `rho * (1 - pi[K]) * 100`.
pub fn throughput_bound(pi: &[f64], load: f64) -> f64 {
    let full = pi.last().copied().unwrap_or(0.0);
    load * (1.0 - full) * 100.0
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grant_quanta_for_the_reference_rates() {
        assert_eq!(grant_quanta(125_000_000, 8), 2);
        assert_eq!(grant_quanta(125_000_000, 4), 5);
        assert_eq!(grant_quanta(31_250_000, 8), 0);
    }

    #[test]
    fn arrival_modes() {
        assert!((mean_arrivals(5, 0.5, ArrivalMode::Literal) - 1.25).abs() < 1e-15);
        assert!((mean_arrivals(5, 0.5, ArrivalMode::Linear) - 2.5).abs() < 1e-15);
    }

    #[test]
    fn full_fidelity_capacity() {
        let c =
            ChainConfig::for_network(125_000_000, 8, 1_000_000_000, 1.0, ArrivalMode::Literal, TransitionRule::Lindley)
                .unwrap();
        assert_eq!(c.capacity, 83_334);
        assert_eq!(c.lim_q, 2);
        assert_eq!(c.arrivals, 2.0);
        assert!(ChainConfig::for_network(
            31_250_000,
            8,
            1_000_000_000,
            1.0,
            ArrivalMode::Literal,
            TransitionRule::Lindley
        )
        .is_err());
    }

    #[test]
    fn bound_edges() {
        assert_eq!(throughput_bound(&[0.0, 1.0], 0.7), 0.0);
        assert!((throughput_bound(&[1.0, 0.0], 0.1) - 10.0).abs() < 1e-12);
    }
}
