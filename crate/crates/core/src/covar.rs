//! Maximum-likelihood covariance and covariates of the sensitive feature.

use alloc::vec::Vec;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::dataset::TabularDataset;
use crate::matrix::Matrix;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CovarianceMatrix {
    pub values: Matrix,
    pub sample_count: usize,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct CovariateSet {
    pub indices: Vec<usize>,
    pub covariances: Vec<f64>,
}

impl CovariateSet {
    pub fn is_empty(&self) -> bool {
        self.indices.is_empty()
    }

    pub fn contains(&self, j: usize) -> bool {
        self.indices.contains(&j)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CovarError {
    #[error("need more samples than features for covariance estimation (n = {n}, d = {d})")]
    TooFewSamples { n: usize, d: usize },
    #[error("feature index {index} out of range for {d} features")]
    Index { index: usize, d: usize },
}

/// `(1/n) Σ (xᵢ − x̄)(xᵢ − x̄)ᵀ`.
pub fn mle_covariance(train: &TabularDataset) -> Result<CovarianceMatrix, CovarError> {
    covariance_of(train.features())
}

pub fn covariance_of(x: &Matrix) -> Result<CovarianceMatrix, CovarError> {
    let (n, d) = x.shape();
    if n <= d {
        return Err(CovarError::TooFewSamples { n, d });
    }
    if n < 5 * d {
        log::warn!("covariance from {n} samples of {d} features is poorly conditioned");
    }
    let mut mean = alloc::vec![0.0; d];
    for r in x.rows() {
        crate::matrix::axpy(1.0, r, &mut mean);
    }
    mean.iter_mut().for_each(|m| *m /= n as f64);
    let mut values = Matrix::zeros(d, d);
    let mut centered = alloc::vec![0.0; d];
    for r in x.rows() {
        for j in 0..d {
            centered[j] = r[j] - mean[j];
        }
        for i in 0..d {
            let ci = centered[i];
            if ci == 0.0 {
                continue;
            }
            let row = values.row_mut(i);
            for j in i..d {
                row[j] += ci * centered[j];
            }
        }
    }
    for i in 0..d {
        for j in i..d {
            let v = values[(i, j)] / n as f64;
            values[(i, j)] = v;
            values[(j, i)] = v;
        }
    }
    if values.as_slice().iter().all(|v| *v == 0.0) {
        log::warn!("all features are constant; covariance is zero");
    }
    Ok(CovarianceMatrix { values, sample_count: n })
}

/// Features whose covariance with column `s` is strictly positive, excluding
/// `s`, sorted by covariance descending (ties by ascending index).
pub fn find_covariates(train: &TabularDataset, s: usize) -> Result<CovariateSet, CovarError> {
    let d = train.d();
    if s >= d {
        return Err(CovarError::Index { index: s, d });
    }
    let cov = mle_covariance(train)?;
    Ok(covariates_from(&cov, s))
}

pub fn covariates_from(cov: &CovarianceMatrix, s: usize) -> CovariateSet {
    let d = cov.values.nrows();
    let mut pairs: Vec<(usize, f64)> =
        (0..d).filter(|&j| j != s).map(|j| (j, cov.values[(s, j)])).filter(|&(_, c)| c > 0.0).collect();
    pairs.sort_by(|x, y| y.1.total_cmp(&x.1).then(x.0.cmp(&y.0)));
    CovariateSet { indices: pairs.iter().map(|p| p.0).collect(), covariances: pairs.iter().map(|p| p.1).collect() }
}
