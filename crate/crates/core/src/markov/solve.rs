use alloc::vec;
use alloc::vec::Vec;

use crate::error::MarkovError;

use super::TransitionMatrix;

const RESCALE_AT: f64 = 1e150;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PowerOptions {
    pub max_iterations: usize,
    /// Stop once successive iterates differ by less than this in L1.
    pub step_tolerance: f64,
    /// Required `||pi P - pi||_1` of the result.
    pub residual_tolerance: f64,
}

impl Default for PowerOptions {
    fn default() -> Self {
        PowerOptions { max_iterations: 200_000, step_tolerance: 1e-12, residual_tolerance: 1e-10 }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Stationary {
    pub pi: Vec<f64>,
    /// Power iterations used; zero for the direct solver.
    pub iterations: usize,
    pub residual: f64,
}

/// `||x P - x||_1`.
pub fn residual(p: &TransitionMatrix, x: &[f64]) -> f64 {
    let mut y = vec![0.0; x.len()];
    p.left_mul(x, &mut y);
    y.iter().zip(x).map(|(a, b)| (a - b).abs()).sum()
}

/// Power iteration from a point mass at the end of the state space the
/// chain drifts towards (judged from the middle row).
pub fn steady_state(p: &TransitionMatrix, opts: &PowerOptions) -> Result<Stationary, MarkovError> {
    let n = p.dim();
    let mid = n / 2;
    let drift: f64 = p.row(mid).map(|(j, v)| (j as f64 - mid as f64) * v).sum();
    let mut x = vec![0.0; n];
    x[if drift > 0.0 { n - 1 } else { 0 }] = 1.0;
    let mut y = vec![0.0; n];
    let mut delta = f64::INFINITY;
    for it in 1..=opts.max_iterations {
        p.left_mul(&x, &mut y);
        let sum: f64 = y.iter().sum();
        y.iter_mut().for_each(|v| *v /= sum);
        delta = x.iter().zip(&y).map(|(a, b)| (a - b).abs()).sum();
        core::mem::swap(&mut x, &mut y);
        if delta < opts.step_tolerance {
            let r = residual(p, &x);
            if r >= opts.residual_tolerance {
                return Err(MarkovError::Residual(r));
            }
            return Ok(Stationary { pi: x, iterations: it, residual: r });
        }
    }
    Err(MarkovError::NoConvergence { iterations: opts.max_iterations, delta })
}

/// Grassmann-Taksar-Heyman state reduction on the band of `P`.
///
/// Subtraction-free, so it stays accurate for nearly critical chains where
/// power iteration mixes too slowly. Eliminating a state only fills entries
/// inside the existing band, so the cost is `O(n * w^2)` for band width `w`.
pub fn steady_state_direct(p: &TransitionMatrix) -> Result<Stationary, MarkovError> {
    let n = p.dim();
    let (lower, upper) = p.bandwidth();
    let w = lower.max(upper);
    let width = 2 * w + 1;
    // a[i][j] lives at i * width + (j + w - i).
    let mut a = vec![0.0; n * width];
    let at = |i: usize, j: usize| i * width + (j + w - i);
    for i in 0..n {
        for (j, v) in p.row(i) {
            a[at(i, j)] = v;
        }
    }
    let mut s = vec![0.0; n];
    for k in (1..n).rev() {
        let lo = k.saturating_sub(w);
        let sk: f64 = (lo..k).map(|j| a[at(k, j)]).sum();
        if sk <= 0.0 {
            return Err(MarkovError::Reducible(k));
        }
        s[k] = sk;
        for i in lo..k {
            let f = a[at(i, k)] / sk;
            if f == 0.0 {
                continue;
            }
            for j in lo..k {
                let v = a[at(k, j)];
                if v != 0.0 {
                    a[at(i, j)] += f * v;
                }
            }
        }
    }
    let mut pi = vec![0.0; n];
    pi[0] = 1.0;
    for k in 1..n {
        let lo = k.saturating_sub(w);
        pi[k] = (lo..k).map(|i| pi[i] * a[at(i, k)]).sum::<f64>() / s[k];
        // Chains that pile up at the top grow geometrically; rescale before
        // overflow. Entries that underflow are negligible after normalising.
        if pi[k] > RESCALE_AT {
            pi[..=k].iter_mut().for_each(|v| *v /= RESCALE_AT);
        }
    }
    let total: f64 = pi.iter().sum();
    pi.iter_mut().for_each(|v| *v /= total);
    let r = residual(p, &pi);
    Ok(Stationary { pi, iterations: 0, residual: r })
}
