//! Analytic throughput bound sweeps.

use std::io::{self, Write};

use anyhow::{Context, Result};
use twdm_core::markov::{
    build_transition_matrix, steady_state, steady_state_direct, throughput_bound, ArrivalMode, ChainConfig,
    PowerOptions, Stationary, TransitionMatrix, TransitionRule,
};
use twdm_core::MarkovError;

use crate::config::Solver;

/// Iteration cap for power iteration before `auto` switches solvers.
pub const AUTO_POWER_ITERATIONS: usize = 20_000;

#[derive(Clone, Debug, PartialEq)]
pub struct BoundSweep {
    pub onu_rate_bps: u64,
    pub group_size: usize,
    pub buffer_bits: u64,
    /// Replaces the buffer-derived `K`.
    pub capacity: Option<usize>,
    pub loads: Vec<f64>,
    pub mode: ArrivalMode,
    pub rule: TransitionRule,
    pub solver: Solver,
}

#[derive(Clone, Debug, PartialEq)]
pub struct BoundRow {
    pub chain: ChainConfig,
    pub pi_full: f64,
    pub throughput_pct: f64,
    /// Whether `auto` had to fall back to the direct solver.
    pub fell_back: bool,
}

pub const CSV_HEADER: &str = "rho,K,lim_q,A,pi_full,throughput_percent";

impl BoundSweep {
    pub fn chain(&self, load: f64) -> Result<ChainConfig, MarkovError> {
        let mut c =
            ChainConfig::for_network(self.onu_rate_bps, self.group_size, self.buffer_bits, load, self.mode, self.rule)?;
        if let Some(k) = self.capacity {
            c.capacity = k;
            c.validate()?;
        }
        Ok(c)
    }

    pub fn run(&self) -> Result<Vec<BoundRow>> {
        self.loads
            .iter()
            .map(|&load| {
                let chain = self.chain(load).with_context(|| format!("chain at rho = {load}"))?;
                let p = build_transition_matrix(&chain)?;
                let (st, fell_back) =
                    solve(&p, self.solver).with_context(|| format!("steady state at rho = {load}"))?;
                Ok(BoundRow {
                    chain,
                    pi_full: *st.pi.last().expect("chain has states"),
                    throughput_pct: throughput_bound(&st.pi, load),
                    fell_back,
                })
            })
            .collect()
    }
}

/// Steady state with the chosen solver; the flag reports an `auto` fallback.
pub fn solve(p: &TransitionMatrix, solver: Solver) -> Result<(Stationary, bool), MarkovError> {
    match solver {
        Solver::Power => Ok((steady_state(p, &PowerOptions::default())?, false)),
        Solver::Direct => Ok((steady_state_direct(p)?, false)),
        Solver::Auto => {
            let opts = PowerOptions { max_iterations: AUTO_POWER_ITERATIONS, ..PowerOptions::default() };
            match steady_state(p, &opts) {
                Ok(s) => Ok((s, false)),
                Err(MarkovError::NoConvergence { .. } | MarkovError::Residual(_)) => {
                    Ok((steady_state_direct(p)?, true))
                }
                Err(e) => Err(e),
            }
        }
    }
}

impl BoundRow {
    pub fn csv(&self) -> String {
        let c = &self.chain;
        format!(
            "{:.4},{},{},{:.6},{:.6e},{:.6}",
            c.load, c.capacity, c.lim_q, c.arrivals, self.pi_full, self.throughput_pct
        )
    }
}

pub fn write_csv<W: Write>(mut w: W, rows: &[BoundRow]) -> io::Result<()> {
    writeln!(w, "{CSV_HEADER}")?;
    for r in rows {
        writeln!(w, "{}", r.csv())?;
    }
    w.flush()
}
