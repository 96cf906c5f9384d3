//! Kernel SVM with a variance-scaled equal-opportunity constraint.
//!
//! The dual is solved over `α` with `γᵢ = αᵢyᵢ`:
//!
//! ```text
//!     minimize    ½ αᵀ((yyᵀ)∘K)α − 1ᵀα
//!     subject to  0 ≤ α ≤ C,  yᵀα = 0,  |cᵀα| ≤ f_tol
//! ```
//!
//! where `cᵢ = yᵢ (m_a[i]/σ_a − m_b[i]/σ_b)` and `m_g[i]` is the mean kernel
//! value between point `i` and the criterion-labeled points of group `g`.

use alloc::vec;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::dataset::TabularDataset;
use crate::featrank::{Classifier, PredictError};
use crate::kernel::{gram, gram_self, GramMatrix, KernelError, KernelSpec};
use crate::matrix::{dot, Matrix};
use crate::qpsolve::{self, QpError, QuadraticProgram, SolveStatus, SolverSettings, SparseRows};
use crate::smo::{self, SmoSettings};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FairnessCriterion {
    /// Equal true-positive rates; uses the positively labeled points.
    EqualOpportunity,
    /// Equal true-negative rates; uses the negatively labeled points.
    EqualTnr,
}

impl FairnessCriterion {
    pub fn label(&self) -> i8 {
        match self {
            FairnessCriterion::EqualOpportunity => 1,
            FairnessCriterion::EqualTnr => -1,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ConstraintMode {
    /// `−f_tol ≤ cᵀα ≤ f_tol`
    TwoSidedInequality,
    /// `cᵀα = f_tol`
    Equality,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct FairnessConstraintSpec {
    pub criterion: FairnessCriterion,
    /// Infinite means no fairness rows.
    pub f_tol: f64,
    pub mode: ConstraintMode,
}

impl FairnessConstraintSpec {
    pub fn new(criterion: FairnessCriterion, f_tol: f64, mode: ConstraintMode) -> Self {
        Self { criterion, f_tol, mode }
    }

    pub fn equal_opportunity(f_tol: f64) -> Self {
        Self::new(FairnessCriterion::EqualOpportunity, f_tol, ConstraintMode::TwoSidedInequality)
    }

    /// The unconstrained SVM.
    pub fn none() -> Self {
        Self::equal_opportunity(f64::INFINITY)
    }

    pub fn is_active(&self) -> bool {
        self.f_tol.is_finite()
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Backend {
    /// SMO when no fairness rows are present, interior point otherwise.
    #[default]
    Auto,
    InteriorPoint,
    Smo,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrainOptions {
    pub backend: Backend,
    pub qp: SolverSettings,
    pub smo: SmoSettings,
    /// Support vectors have `α > sv_eps_rel · min(C, 1)`.
    pub sv_eps_rel: f64,
}

impl Default for TrainOptions {
    fn default() -> Self {
        Self { backend: Backend::Auto, qp: SolverSettings::default(), smo: SmoSettings::default(), sv_eps_rel: 1e-6 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GroupBarycenter {
    /// 0 for group `a`, 1 for group `b`.
    pub group: u8,
    pub positive_indices: Vec<usize>,
    pub count: usize,
    pub sigma: f64,
    /// Entry `i` is `(1/N_g) Σ_{j∈I_g} K_ij`.
    pub mean_kernel_row: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum FairSvmError {
    #[error("feature subset is empty")]
    EmptySubset,
    #[error("feature index {index} out of range for {d} features")]
    SubsetIndex { index: usize, d: usize },
    #[error("C must be positive and finite, got {0}")]
    InvalidC(f64),
    #[error("f_tol must be nonnegative, got {0}")]
    InvalidTolerance(f64),
    #[error("group {group} has no points labeled {label}; the fairness constraint is undefined")]
    DegenerateGroup { group: char, label: i8 },
    #[error("need both labels to train an SVM")]
    SingleClass,
    #[error("f_tol infeasible for this data (f_tol = {0}); increase f_tol")]
    Infeasible(f64),
    #[error("solver hit its iteration limit after {0} iterations")]
    MaxIter(usize),
    #[error("{got} columns supplied, model expects {expected}")]
    Dimension { expected: usize, got: usize },
    #[error("shape mismatch: {0}")]
    Shape(&'static str),
    #[error(transparent)]
    Kernel(#[from] KernelError),
    #[error(transparent)]
    Qp(#[from] QpError),
}

fn group_char(g: u8) -> char {
    if g == 0 { 'a' } else { 'b' }
}

/// Barycenters of the criterion-labeled points of both groups.
pub fn barycenters(
    train: &TabularDataset,
    gram: &GramMatrix,
    criterion: FairnessCriterion,
) -> Result<(GroupBarycenter, GroupBarycenter), FairSvmError> {
    barycenters_raw(train.labels(), train.sensitive_values(), &gram.values, criterion)
}

pub fn barycenters_raw(
    labels: &[i8],
    groups: &[u8],
    k: &Matrix,
    criterion: FairnessCriterion,
) -> Result<(GroupBarycenter, GroupBarycenter), FairSvmError> {
    let n = labels.len();
    if groups.len() != n || k.shape() != (n, n) {
        return Err(FairSvmError::Shape("labels, groups and Gram matrix disagree"));
    }
    let label = criterion.label();
    let members = |g: u8| -> Vec<usize> { (0..n).filter(|&i| labels[i] == label && groups[i] == g).collect() };
    let idx = [members(0), members(1)];
    for g in 0..2u8 {
        if idx[g as usize].is_empty() {
            return Err(FairSvmError::DegenerateGroup { group: group_char(g), label });
        }
    }
    let mean_rows: [Vec<f64>; 2] = core::array::from_fn(|g| {
        let set = &idx[g];
        let inv = 1.0 / set.len() as f64;
        (0..n).map(|i| { let r = k.row(i); set.iter().map(|&j| r[j]).sum::<f64>() * inv }).collect()
    });
    let mut out = Vec::with_capacity(2);
    for g in 0..2usize {
        let other = 1 - g;
        let own = &idx[g];
        // (1/N_ĝ²) Σ_{j,k∈I_ĝ} K_jk
        let other_self = idx[other].iter().map(|&j| mean_rows[other][j]).sum::<f64>() / idx[other].len() as f64;
        let sigma = if own.len() < 2 {
            log::warn!("group {} has a single criterion-labeled point; using unit scaling", group_char(g as u8));
            1.0
        } else {
            let ss: f64 = own.iter().map(|&i| k[(i, i)] - 2.0 * mean_rows[other][i] + other_self).sum();
            let var = ss / (own.len() - 1) as f64;
            if var > 0.0 && var.is_finite() {
                libm::sqrt(var)
            } else {
                log::warn!("group {} has zero spread; using unit scaling", group_char(g as u8));
                1.0
            }
        };
        out.push(GroupBarycenter {
            group: g as u8,
            positive_indices: own.clone(),
            count: own.len(),
            sigma,
            mean_kernel_row: mean_rows[g].clone(),
        });
    }
    let b = out.pop().unwrap();
    let a = out.pop().unwrap();
    Ok((a, b))
}

/// `cᵢ = yᵢ (m_a[i]/σ_a − m_b[i]/σ_b)`.
pub fn build_constraint_row(a: &GroupBarycenter, b: &GroupBarycenter, labels: &[i8]) -> Vec<f64> {
    labels
        .iter()
        .enumerate()
        .map(|(i, &y)| y as f64 * (a.mean_kernel_row[i] / a.sigma - b.mean_kernel_row[i] / b.sigma))
        .collect()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FairSvmModel {
    pub kernel: KernelSpec,
    pub regularization_c: f64,
    pub bias: f64,
    /// Dual variables, one per training row.
    pub alphas: Vec<f64>,
    pub support_indices: Vec<usize>,
    /// Training rows at `support_indices`, restricted to `feature_subset`.
    pub support_vectors: Matrix,
    /// `αᵢyᵢ` for each support vector.
    pub dual_coefs: Vec<f64>,
    pub feature_subset: Vec<usize>,
    /// Column count of the full input the model is applied to.
    pub input_dim: usize,
    pub constraint: Option<FairnessConstraintSpec>,
    /// `|cᵀα|` when a constraint was imposed.
    pub constraint_value: Option<f64>,
    pub status: SolveStatus,
    pub iterations: usize,
}

struct Problem<'a> {
    k: &'a Matrix,
    labels: &'a [i8],
    groups: &'a [u8],
    c: f64,
}

fn check_subset(subset: &[usize], d: usize) -> Result<(), FairSvmError> {
    if subset.is_empty() {
        return Err(FairSvmError::EmptySubset);
    }
    match subset.iter().find(|&&j| j >= d) {
        Some(&index) => Err(FairSvmError::SubsetIndex { index, d }),
        None => Ok(()),
    }
}

/// Trains on `train` restricted to `feature_subset`.
pub fn train(
    train: &TabularDataset,
    feature_subset: &[usize],
    kernel: KernelSpec,
    c: f64,
    constraint: &FairnessConstraintSpec,
    opts: &TrainOptions,
) -> Result<FairSvmModel, FairSvmError> {
    check_subset(feature_subset, train.d())?;
    let x = train.features().select_columns(feature_subset);
    let k = gram_self(&x, &kernel)?;
    train_on_gram(&k.values, &x, train.labels(), train.sensitive_values(), kernel, feature_subset, train.d(), c, constraint, opts)
}

/// Trains from a precomputed Gram matrix of the rows of `x` (already
/// restricted to `feature_subset`).
#[allow(clippy::too_many_arguments)]
pub fn train_on_gram(
    k: &Matrix,
    x: &Matrix,
    labels: &[i8],
    groups: &[u8],
    kernel: KernelSpec,
    feature_subset: &[usize],
    input_dim: usize,
    c: f64,
    constraint: &FairnessConstraintSpec,
    opts: &TrainOptions,
) -> Result<FairSvmModel, FairSvmError> {
    let n = labels.len();
    check_subset(feature_subset, input_dim)?;
    if k.shape() != (n, n) || x.nrows() != n || groups.len() != n {
        return Err(FairSvmError::Shape("Gram matrix, rows, labels and groups disagree"));
    }
    if x.ncols() != feature_subset.len() {
        return Err(FairSvmError::Dimension { expected: feature_subset.len(), got: x.ncols() });
    }
    if !(c > 0.0 && c.is_finite()) {
        return Err(FairSvmError::InvalidC(c));
    }
    if !(constraint.f_tol >= 0.0) {
        return Err(FairSvmError::InvalidTolerance(constraint.f_tol));
    }
    if !labels.contains(&1) || !labels.contains(&-1) {
        return Err(FairSvmError::SingleClass);
    }
    let prob = Problem { k, labels, groups, c };
    let (alphas, status, iterations, row) = if constraint.is_active() {
        solve_constrained(&prob, constraint, opts)?
    } else {
        let (a, s, it) = solve_plain(&prob, opts)?;
        (a, s, it, None)
    };
    let constraint_value = row.as_ref().map(|r| dot(r, &alphas).abs());
    let sv_eps = opts.sv_eps_rel * c.min(1.0);
    let y: Vec<f64> = labels.iter().map(|&v| v as f64).collect();
    let bias = recover_bias(k, &y, &alphas, c, sv_eps);
    let support_indices: Vec<usize> = (0..n).filter(|&i| alphas[i] > sv_eps).collect();
    Ok(FairSvmModel {
        kernel,
        regularization_c: c,
        bias,
        support_vectors: x.select_rows(&support_indices),
        dual_coefs: support_indices.iter().map(|&i| alphas[i] * y[i]).collect(),
        support_indices,
        alphas,
        feature_subset: feature_subset.to_vec(),
        input_dim,
        constraint: constraint.is_active().then_some(*constraint),
        constraint_value,
        status,
        iterations,
    })
}

fn box_and_sum(prob: &Problem, qp: QuadraticProgram) -> QuadraticProgram {
    let n = prob.labels.len();
    let mut g = SparseRows::new(n);
    let mut h = Vec::with_capacity(2 * n + 2);
    for i in 0..n {
        g.push([(i, -1.0)]);
        h.push(0.0);
    }
    for i in 0..n {
        g.push([(i, 1.0)]);
        h.push(prob.c);
    }
    let mut a = SparseRows::new(n);
    a.push(prob.labels.iter().map(|&v| v as f64).enumerate());
    qp.with_inequalities(g, h).with_equalities(a, vec![0.0])
}

fn dual_qp(prob: &Problem) -> QuadraticProgram {
    let n = prob.labels.len();
    let y = prob.labels;
    let p = Matrix::from_fn(n, n, |i, j| (y[i] * y[j]) as f64 * prob.k[(i, j)]);
    box_and_sum(prob, QuadraticProgram::new(p, vec![-1.0; n]))
}

fn run_ipm(qp: &QuadraticProgram, opts: &TrainOptions, f_tol: f64) -> Result<(Vec<f64>, SolveStatus, usize), FairSvmError> {
    let sol = qpsolve::solve(qp, &opts.qp)?;
    match sol.status {
        SolveStatus::Optimal => Ok((sol.x, sol.status, sol.iterations)),
        SolveStatus::Infeasible => Err(FairSvmError::Infeasible(f_tol)),
        SolveStatus::MaxIter => Err(FairSvmError::MaxIter(sol.iterations)),
    }
}

fn solve_plain(prob: &Problem, opts: &TrainOptions) -> Result<(Vec<f64>, SolveStatus, usize), FairSvmError> {
    match opts.backend {
        Backend::InteriorPoint => run_ipm(&dual_qp(prob), opts, f64::INFINITY),
        Backend::Auto | Backend::Smo => {
            let y: Vec<f64> = prob.labels.iter().map(|&v| v as f64).collect();
            let sol = smo::solve(prob.k, &y, prob.c, None, &opts.smo);
            if !sol.converged {
                return Err(FairSvmError::MaxIter(sol.iterations));
            }
            Ok((sol.alpha, SolveStatus::Optimal, sol.iterations))
        }
    }
}

fn solve_constrained(
    prob: &Problem,
    spec: &FairnessConstraintSpec,
    opts: &TrainOptions,
) -> Result<(Vec<f64>, SolveStatus, usize, Option<Vec<f64>>), FairSvmError> {
    let (ba, bb) = barycenters_raw(prob.labels, prob.groups, prob.k, spec.criterion)?;
    let row = build_constraint_row(&ba, &bb, prob.labels);
    if row.iter().all(|v| v.abs() <= 1e-14) {
        if spec.mode == ConstraintMode::Equality && spec.f_tol > 0.0 {
            return Err(FairSvmError::Infeasible(spec.f_tol));
        }
        log::info!("fairness row vanishes; constraint is vacuous");
        let (a, s, it) = run_ipm(&dual_qp(prob), opts, spec.f_tol)?;
        return Ok((a, s, it, Some(row)));
    }
    let mut qp = dual_qp(prob);
    match spec.mode {
        // −0 ≤ cᵀα ≤ 0 has no interior.
        ConstraintMode::TwoSidedInequality if spec.f_tol == 0.0 => {
            qp.a.push_dense(&row);
            qp.b.push(0.0);
        }
        ConstraintMode::TwoSidedInequality => {
            qp.g.push_dense(&row);
            qp.h.push(spec.f_tol);
            qp.g.push(row.iter().map(|v| -v).enumerate());
            qp.h.push(spec.f_tol);
        }
        ConstraintMode::Equality => {
            qp.a.push_dense(&row);
            qp.b.push(spec.f_tol);
        }
    }
    let (alphas, status, it) = run_ipm(&qp, opts, spec.f_tol)?;
    Ok((alphas, status, it, Some(row)))
}

/// Average of `yᵢ − Σⱼ αⱼyⱼK_ij` over free support vectors, or the midpoint
/// of the interval allowed by the bound vectors when none are free.
pub fn recover_bias(k: &Matrix, y: &[f64], alphas: &[f64], c: f64, sv_eps: f64) -> f64 {
    let n = y.len();
    let coef: Vec<f64> = alphas.iter().zip(y).map(|(a, y)| a * y).collect();
    let f0 = |i: usize| dot(k.row(i), &coef);
    let mut sum = 0.0;
    let mut count = 0usize;
    let mut lower = f64::NEG_INFINITY;
    let mut upper = f64::INFINITY;
    for i in 0..n {
        let a = alphas[i];
        let fi = f0(i);
        if a > sv_eps && a < c - sv_eps {
            sum += y[i] - fi;
            count += 1;
        } else if count == 0 {
            // At α = 0: yᵢ(fᵢ + b) ≥ 1. At α = C: yᵢ(fᵢ + b) ≤ 1.
            let edge = y[i] - fi;
            let at_zero = a <= sv_eps;
            if (y[i] > 0.0) == at_zero {
                lower = lower.max(edge);
            } else {
                upper = upper.min(edge);
            }
        }
    }
    if count > 0 {
        return sum / count as f64;
    }
    match (lower.is_finite(), upper.is_finite()) {
        (true, true) => 0.5 * (lower + upper),
        (true, false) => lower,
        (false, true) => upper,
        (false, false) => 0.0,
    }
}

impl FairSvmModel {
    /// Decision values for rows already restricted to `feature_subset`.
    pub fn decision_function_subset(&self, x: &Matrix) -> Result<Vec<f64>, FairSvmError> {
        if x.ncols() != self.feature_subset.len() {
            return Err(FairSvmError::Dimension { expected: self.feature_subset.len(), got: x.ncols() });
        }
        if self.support_indices.is_empty() {
            return Ok(vec![self.bias; x.nrows()]);
        }
        let kx = gram(x, &self.support_vectors, &self.kernel)?;
        Ok(kx.values.rows().map(|r| dot(r, &self.dual_coefs) + self.bias).collect())
    }

    /// Decision values for full-width rows.
    pub fn decision_function(&self, x: &Matrix) -> Result<Vec<f64>, FairSvmError> {
        if x.ncols() != self.input_dim {
            return Err(FairSvmError::Dimension { expected: self.input_dim, got: x.ncols() });
        }
        self.decision_function_subset(&x.select_columns(&self.feature_subset))
    }

    pub fn predict_subset(&self, x: &Matrix) -> Result<Vec<i8>, FairSvmError> {
        Ok(self.decision_function_subset(x)?.into_iter().map(sign).collect())
    }

    pub fn predict(&self, x: &Matrix) -> Result<Vec<i8>, FairSvmError> {
        Ok(self.decision_function(x)?.into_iter().map(sign).collect())
    }

    pub fn num_support_vectors(&self) -> usize {
        self.support_indices.len()
    }
}

fn sign(v: f64) -> i8 {
    if v >= 0.0 { 1 } else { -1 }
}

/// `|cᵀα|` for the row built from `a`, `b` and the training labels.
pub fn constraint_value(model: &FairSvmModel, a: &GroupBarycenter, b: &GroupBarycenter, labels: &[i8]) -> f64 {
    dot(&build_constraint_row(a, b, labels), &model.alphas).abs()
}

impl Classifier for FairSvmModel {
    fn input_dim(&self) -> usize {
        self.input_dim
    }

    fn predict(&self, x: &Matrix) -> Result<Vec<i8>, PredictError> {
        FairSvmModel::predict(self, x).map_err(|e| PredictError(alloc::format!("{e}")))
    }
}
