//! Kernel functions and Gram matrices.
//!
//! RBF distances use `‖x−y‖² = ‖x‖² + ‖y‖² − 2⟨x,y⟩` clamped at zero. Both
//! [`gram`] and [`kernel_row`] go through the same arithmetic so their entries
//! agree bit-for-bit, and `k(x, x)` is exactly 1 for the RBF kernel.

use alloc::vec::Vec;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::matrix::{dot, Matrix};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum KernelSpec {
    Linear,
    Rbf { gamma: f64 },
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum KernelError {
    #[error("dimension mismatch: {left} columns vs {right} columns")]
    DimensionMismatch { left: usize, right: usize },
    #[error("input contains non-finite values")]
    NonFinite,
    #[error("rbf gamma must be positive and finite, got {0}")]
    InvalidGamma(f64),
}

impl KernelSpec {
    pub fn rbf(gamma: f64) -> Self {
        KernelSpec::Rbf { gamma }
    }

    pub fn validate(&self) -> Result<(), KernelError> {
        match *self {
            KernelSpec::Rbf { gamma } if !(gamma > 0.0 && gamma.is_finite()) => {
                Err(KernelError::InvalidGamma(gamma))
            }
            _ => Ok(()),
        }
    }

    pub fn kind_name(&self) -> &'static str {
        match self {
            KernelSpec::Linear => "linear",
            KernelSpec::Rbf { .. } => "rbf",
        }
    }

    pub fn gamma(&self) -> Option<f64> {
        match *self {
            KernelSpec::Rbf { gamma } => Some(gamma),
            KernelSpec::Linear => None,
        }
    }

    /// Single kernel evaluation. `nx`, `ny` are the squared norms of `x`, `y`.
    #[inline]
    fn eval_with_norms(&self, x: &[f64], y: &[f64], nx: f64, ny: f64) -> f64 {
        let ip = dot(x, y);
        match *self {
            KernelSpec::Linear => ip,
            KernelSpec::Rbf { gamma } => {
                let d2 = (nx + ny - 2.0 * ip).max(0.0);
                libm::exp(-gamma * d2)
            }
        }
    }

    pub fn eval(&self, x: &[f64], y: &[f64]) -> f64 {
        self.eval_with_norms(x, y, dot(x, x), dot(y, y))
    }
}

/// Dense kernel matrix. `values[(i, j)] = k(row_i, col_j)`.
#[derive(Clone, Debug, PartialEq)]
pub struct GramMatrix {
    pub values: Matrix,
    pub symmetric: bool,
}

impl GramMatrix {
    pub fn nrows(&self) -> usize {
        self.values.nrows()
    }

    pub fn ncols(&self) -> usize {
        self.values.ncols()
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.values[(i, j)]
    }

    pub fn row(&self, i: usize) -> &[f64] {
        self.values.row(i)
    }

    /// Restriction to `indices × indices`; stays symmetric if the source was.
    pub fn principal_submatrix(&self, indices: &[usize]) -> GramMatrix {
        GramMatrix { values: self.values.select(indices, indices), symmetric: self.symmetric }
    }
}

fn check(x: &Matrix, y: &Matrix, spec: &KernelSpec) -> Result<(), KernelError> {
    spec.validate()?;
    if x.ncols() != y.ncols() {
        return Err(KernelError::DimensionMismatch { left: x.ncols(), right: y.ncols() });
    }
    if !x.is_finite() || !y.is_finite() {
        return Err(KernelError::NonFinite);
    }
    Ok(())
}

fn squared_norms(x: &Matrix) -> Vec<f64> {
    x.rows().map(|r| dot(r, r)).collect()
}

/// Kernel matrix between the rows of `x` and the rows of `y`.
pub fn gram(x: &Matrix, y: &Matrix, spec: &KernelSpec) -> Result<GramMatrix, KernelError> {
    check(x, y, spec)?;
    if core::ptr::eq(x, y) {
        return Ok(gram_symmetric(x, spec));
    }
    let nx = squared_norms(x);
    let ny = squared_norms(y);
    let mut values = Matrix::zeros(x.nrows(), y.nrows());
    for i in 0..x.nrows() {
        let xi = x.row(i);
        let out = values.row_mut(i);
        for (j, o) in out.iter_mut().enumerate() {
            *o = spec.eval_with_norms(xi, y.row(j), nx[i], ny[j]);
        }
    }
    Ok(GramMatrix { values, symmetric: false })
}

/// `gram(x, x)` computing only the upper triangle.
pub fn gram_self(x: &Matrix, spec: &KernelSpec) -> Result<GramMatrix, KernelError> {
    check(x, x, spec)?;
    Ok(gram_symmetric(x, spec))
}

fn gram_symmetric(x: &Matrix, spec: &KernelSpec) -> GramMatrix {
    let n = x.nrows();
    let norms = squared_norms(x);
    let mut values = Matrix::zeros(n, n);
    for i in 0..n {
        let xi = x.row(i);
        for j in i..n {
            let v = spec.eval_with_norms(xi, x.row(j), norms[i], norms[j]);
            values[(i, j)] = v;
            values[(j, i)] = v;
        }
    }
    GramMatrix { values, symmetric: true }
}

/// `[k(x, x_1), …, k(x, x_n)]` over the rows of `rows`.
pub fn kernel_row(x: &[f64], rows: &Matrix, spec: &KernelSpec) -> Result<Vec<f64>, KernelError> {
    spec.validate()?;
    if x.len() != rows.ncols() {
        return Err(KernelError::DimensionMismatch { left: x.len(), right: rows.ncols() });
    }
    if x.iter().any(|v| !v.is_finite()) || !rows.is_finite() {
        return Err(KernelError::NonFinite);
    }
    let nx = dot(x, x);
    Ok(rows.rows().map(|r| spec.eval_with_norms(x, r, nx, dot(r, r))).collect())
}
