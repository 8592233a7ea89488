use alloc::vec;
use alloc::vec::Vec;

use crate::error::MarkovError;

use super::{ChainConfig, TransitionRule};

/// Probability mass beyond which Poisson terms are folded into the last
/// reachable state.
pub const TAIL_MASS: f64 = 1e-13;

/// Row-major sparse (CSR) row-stochastic matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct TransitionMatrix {
    n: usize,
    row_ptr: Vec<usize>,
    cols: Vec<usize>,
    vals: Vec<f64>,
}

impl TransitionMatrix {
    /// Builds from per-row `(column, value)` lists; zero values are skipped.
    pub fn from_rows(rows: Vec<Vec<(usize, f64)>>) -> Self {
        let n = rows.len();
        let mut row_ptr = Vec::with_capacity(n + 1);
        let (mut cols, mut vals) = (Vec::new(), Vec::new());
        row_ptr.push(0);
        for mut row in rows {
            row.sort_by_key(|e| e.0);
            for (c, v) in row {
                assert!(c < n, "column out of range");
                if v != 0.0 {
                    if cols.len() > *row_ptr.last().unwrap() && *cols.last().unwrap() == c {
                        *vals.last_mut().unwrap() += v;
                    } else {
                        cols.push(c);
                        vals.push(v);
                    }
                }
            }
            row_ptr.push(cols.len());
        }
        TransitionMatrix { n, row_ptr, cols, vals }
    }

    /// Number of states.
    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn nnz(&self) -> usize {
        self.vals.len()
    }

    pub fn row(&self, i: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        let r = self.row_ptr[i]..self.row_ptr[i + 1];
        self.cols[r.clone()].iter().copied().zip(self.vals[r].iter().copied())
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        let r = self.row_ptr[i]..self.row_ptr[i + 1];
        match self.cols[r.clone()].binary_search(&j) {
            Ok(k) => self.vals[r.start + k],
            Err(_) => 0.0,
        }
    }

    pub fn row_sum(&self, i: usize) -> f64 {
        self.row(i).map(|(_, v)| v).sum()
    }

    /// Fails on the first row whose sum is off by more than `tol`.
    pub fn check_stochastic(&self, tol: f64) -> Result<(), MarkovError> {
        for i in 0..self.n {
            let sum = self.row_sum(i);
            if (sum - 1.0).abs() > tol || self.row(i).any(|(_, v)| v < 0.0) {
                return Err(MarkovError::NotStochastic { row: i, sum });
            }
        }
        Ok(())
    }

    /// `y = x P`, skipping rows where `x` is zero.
    pub fn left_mul(&self, x: &[f64], y: &mut [f64]) {
        y.iter_mut().for_each(|v| *v = 0.0);
        for (i, &xi) in x.iter().enumerate() {
            if xi == 0.0 {
                continue;
            }
            for (j, v) in self.row(i) {
                y[j] += xi * v;
            }
        }
    }

    /// Largest `i - j` and `j - i` over the non-zero entries.
    pub fn bandwidth(&self) -> (usize, usize) {
        let (mut lower, mut upper) = (0, 0);
        for i in 0..self.n {
            for (j, _) in self.row(i) {
                if j < i {
                    lower = lower.max(i - j);
                } else {
                    upper = upper.max(j - i);
                }
            }
        }
        (lower, upper)
    }
}

/// Poisson pmf for `k = 0, 1, ...` until the remaining tail is below
/// [`TAIL_MASS`] or `k` reaches `max_k`.
pub fn poisson_pmf(mean: f64, max_k: usize) -> Vec<f64> {
    if mean == 0.0 {
        return vec![1.0];
    }
    let ln_mean = libm::log(mean);
    let mut pmf = Vec::new();
    let mut cum = 0.0;
    for k in 0..=max_k {
        let p = libm::exp(k as f64 * ln_mean - mean - libm::lgamma(k as f64 + 1.0));
        pmf.push(p);
        cum += p;
        if k as f64 > mean && 1.0 - cum < TAIL_MASS {
            break;
        }
    }
    pmf
}

/// Transition matrix over buffer states `0..=K` (in packet quanta).
///
/// With `k` Poisson arrivals in a cycle and `lim` quanta served, the
/// [`TransitionRule::Lindley`] rule moves `B -> min(K, max(0, B + k - lim))`.
/// [`TransitionRule::AsPrinted`] keeps that for `B' <= B` but uses `k = B' - B`
/// when the buffer grows, then rescales every row by its (common) sum.
/// Tail mass past the truncation point goes to the last reachable state.
pub fn build_transition_matrix(cfg: &ChainConfig) -> Result<TransitionMatrix, MarkovError> {
    cfg.validate()?;
    let (k_cap, lim) = (cfg.capacity, cfg.lim_q);
    let pmf = poisson_pmf(cfg.arrivals, k_cap + lim);
    let tail = (1.0 - pmf.iter().sum::<f64>()).max(0.0);
    let rows = (0..=k_cap)
        .map(|b| {
            let mut row: Vec<(usize, f64)> = Vec::with_capacity(pmf.len() + 2);
            let dest = |x: isize| x.clamp(0, k_cap as isize) as usize;
            match cfg.rule {
                TransitionRule::Lindley => {
                    for (k, &p) in pmf.iter().enumerate() {
                        row.push((dest(b as isize + k as isize - lim as isize), p));
                    }
                    let top = dest(b as isize + pmf.len() as isize - 1 - lim as isize);
                    row.push((top, tail));
                }
                TransitionRule::AsPrinted => {
                    let served = |k: usize| pmf.get(k).copied().unwrap_or(0.0);
                    let mut mass = 0.0;
                    // Non-increasing moves, including the drain to zero.
                    for k in 0..=lim {
                        let p = served(k);
                        row.push((dest(b as isize + k as isize - lim as isize), p));
                        mass += p;
                    }
                    // Growth by `k >= 1` quanta, read off the pmf at `k`.
                    let mut grow_mass = 0.0;
                    for (k, &p) in pmf.iter().enumerate().skip(1) {
                        row.push((dest(b as isize + k as isize), p));
                        grow_mass += p;
                    }
                    let grow_total = 1.0 - pmf[0];
                    row.push((dest(b as isize + pmf.len() as isize - 1), (grow_total - grow_mass).max(0.0)));
                    let norm = mass + grow_total;
                    for e in &mut row {
                        e.1 /= norm;
                    }
                }
            }
            row
        })
        .collect();
    Ok(TransitionMatrix::from_rows(rows))
}
