//! Fairness-constrained kernel SVM training.
//!
//! The crate covers the algorithmic half of the CONFAIR procedure:
//!
//! * [`kernel`]: linear and RBF kernels, Gram matrices.
//! * [`qpsolve`]: a dense primal-dual interior-point solver for
//!   `min ½xᵀPx + qᵀx  s.t.  Gx ≤ h, Ax = b`.
//! * [`smo`]: sequential minimal optimization for the plain soft-margin dual,
//!   used for fast unconstrained fits.
//! * [`fairsvm`]: the soft-margin dual with the variance-scaled barycenter
//!   equal-opportunity constraint.
//! * [`featrank`]: permutation feature importance and the critical feature set.
//! * [`covar`]: maximum-likelihood covariance and sensitive-feature covariates.
//! * [`metrics`]: per-group confusion counts, DEO, NPV and TNR differences.
//! * [`confair`]: the top-level orchestration that picks the retraining case.
//!
//! Everything here is `no_std` + `alloc` compatible; file formats, the CLI and
//! the experiment harness live in the `confair` crate.
#![cfg_attr(not(feature = "std"), no_std)]

extern crate alloc;

pub mod confair;
pub mod covar;
pub mod dataset;
pub mod fairsvm;
pub mod featrank;
pub mod kernel;
pub mod matrix;
pub mod metrics;
pub mod qpsolve;
pub mod smo;

#[cfg(any(test, feature = "oracle"))]
pub mod fixtures;
#[cfg(any(test, feature = "oracle"))]
pub mod oracle;

pub use crate::confair::{run_confair, ConfairCase, ConfairDecision, ConfairModel, ConfairResult};
pub use crate::covar::{find_covariates, mle_covariance, CovarianceMatrix, CovariateSet};
pub use crate::dataset::{make_folds, split, FoldPlan, SplitMode, SplitSpec, TabularDataset};
pub use crate::fairsvm::{
    ConstraintMode, FairSvmModel, FairnessConstraintSpec, FairnessCriterion, TrainOptions,
};
pub use crate::featrank::{find_crit_feats, to_critical_set, Classifier, CriticalFeatureSet, FeatureRanking};
pub use crate::kernel::{gram, kernel_row, GramMatrix, KernelSpec};
pub use crate::matrix::Matrix;
pub use crate::metrics::{FairnessReport, GroupConfusion};
pub use crate::qpsolve::{solve, QpSolution, QuadraticProgram, SolveStatus, SolverSettings};
