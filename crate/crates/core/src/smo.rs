//! Sequential minimal optimization for
//!
//! ```text
//!     minimize    ½ αᵀQα + pᵀα,   Q_ij = yᵢyⱼK_ij
//!     subject to  yᵀα = 0,  0 ≤ α ≤ C
//! ```
//!
//! Working pairs are chosen with second-order information (maximal violating
//! `i`, then the `j` giving the largest objective decrease). No shrinking, no
//! kernel cache: the full Gram matrix is passed in.

use alloc::vec;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::matrix::Matrix;

const TAU: f64 = 1e-12;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SmoSettings {
    /// Stop when the maximal KKT violation `m(α) − M(α)` drops below `eps`.
    pub eps: f64,
    pub max_iter: usize,
}

impl Default for SmoSettings {
    fn default() -> Self {
        Self { eps: 1e-6, max_iter: 10_000_000 }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SmoSolution {
    pub alpha: Vec<f64>,
    /// `Qα + p` at the returned point.
    pub gradient: Vec<f64>,
    pub iterations: usize,
    pub converged: bool,
    /// Final `m(α) − M(α)`.
    pub violation: f64,
}

impl SmoSolution {
    pub fn objective(&self, p: &[f64]) -> f64 {
        // ½αᵀQα + pᵀα = ½αᵀ(G + p)
        self.alpha.iter().zip(&self.gradient).zip(p).map(|((a, g), pi)| 0.5 * a * (g + pi)).sum()
    }
}

/// Solves the box- and equality-constrained dual. `p` defaults to `−1`.
///
/// Panics if shapes disagree or `c ≤ 0`.
pub fn solve(k: &Matrix, y: &[f64], c: f64, p: Option<&[f64]>, settings: &SmoSettings) -> SmoSolution {
    let n = y.len();
    assert_eq!(k.shape(), (n, n), "Gram matrix shape");
    assert!(c > 0.0, "C must be positive");
    let mut alpha = vec![0.0; n];
    let mut grad: Vec<f64> = match p {
        Some(p) => {
            assert_eq!(p.len(), n);
            p.to_vec()
        }
        None => vec![-1.0; n],
    };
    let is_up = |a: f64, yi: f64| if yi > 0.0 { a < c } else { a > 0.0 };
    let is_low = |a: f64, yi: f64| if yi > 0.0 { a > 0.0 } else { a < c };

    let mut iterations = 0;
    let mut violation = f64::INFINITY;
    let mut converged = false;
    while iterations < settings.max_iter {
        // i = argmax over I_up of −yG
        let mut gmax = f64::NEG_INFINITY;
        let mut gmin = f64::INFINITY;
        let mut i = usize::MAX;
        for t in 0..n {
            if is_up(alpha[t], y[t]) {
                let v = -y[t] * grad[t];
                if v > gmax {
                    gmax = v;
                    i = t;
                }
            }
        }
        if i == usize::MAX {
            violation = 0.0;
            converged = true;
            break;
        }
        let ki = k.row(i);
        let kii = ki[i];
        let mut j = usize::MAX;
        let mut best = f64::INFINITY;
        for t in 0..n {
            if !is_low(alpha[t], y[t]) {
                continue;
            }
            let v = -y[t] * grad[t];
            gmin = gmin.min(v);
            let b = gmax - v;
            if b > 0.0 {
                let a = kii + k[(t, t)] - 2.0 * ki[t];
                let a = if a > 0.0 { a } else { TAU };
                let obj = -(b * b) / a;
                if obj <= best {
                    best = obj;
                    j = t;
                }
            }
        }
        violation = gmax - gmin;
        if violation < settings.eps || j == usize::MAX {
            converged = true;
            break;
        }
        iterations += 1;

        let kj = k.row(j);
        let quad = {
            let q = kii + kj[j] - 2.0 * ki[j];
            if q > 0.0 { q } else { TAU }
        };
        let (old_i, old_j) = (alpha[i], alpha[j]);
        let (mut ai, mut aj);
        if y[i] != y[j] {
            let delta = (-grad[i] - grad[j]) / quad;
            let diff = old_i - old_j;
            ai = old_i + delta;
            aj = old_j + delta;
            if diff > 0.0 {
                if aj < 0.0 {
                    aj = 0.0;
                    ai = diff;
                }
            } else if ai < 0.0 {
                ai = 0.0;
                aj = -diff;
            }
            if diff > 0.0 {
                if ai > c {
                    ai = c;
                    aj = c - diff;
                }
            } else if aj > c {
                aj = c;
                ai = c + diff;
            }
        } else {
            let delta = (grad[i] - grad[j]) / quad;
            let sum = old_i + old_j;
            ai = old_i - delta;
            aj = old_j + delta;
            if sum > c {
                if ai > c {
                    ai = c;
                    aj = sum - c;
                }
            } else if aj < 0.0 {
                aj = 0.0;
                ai = sum;
            }
            if sum > c {
                if aj > c {
                    aj = c;
                    ai = sum - c;
                }
            } else if ai < 0.0 {
                ai = 0.0;
                aj = sum;
            }
        }
        alpha[i] = ai;
        alpha[j] = aj;
        let di = (ai - old_i) * y[i];
        let dj = (aj - old_j) * y[j];
        for t in 0..n {
            grad[t] += y[t] * (ki[t] * di + kj[t] * dj);
        }
    }
    if !converged {
        log::warn!("SMO stopped after {iterations} iterations with violation {violation:e}");
    }
    SmoSolution { alpha, gradient: grad, iterations, converged, violation }
}
