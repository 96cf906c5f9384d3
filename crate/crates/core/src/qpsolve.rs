//! Dense convex quadratic programming.
//!
//! Solves
//!
//! ```text
//!     minimize    ½ xᵀPx + qᵀx
//!     subject to  Gx ≤ h
//!                 Ax = b
//! ```
//!
//! with a primal-dual interior-point method using Mehrotra's
//! predictor-corrector. Inequalities are stored row-sparse: rows with one
//! nonzero (box bounds) contribute only to the diagonal of the reduced KKT
//! matrix, so an SVM dual with `2n` bound rows costs one dense
//! `(n + p) × (n + p)` symmetric indefinite factorization per iteration.

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use faer::linalg::solvers::Solve;
use faer::{Mat, Side};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::matrix::{dot, norm_inf, Matrix};

/// Shift used to certify positive semidefiniteness of `P`.
const PSD_TOL: f64 = 1e-8;
/// Larger shift under which `P` is accepted after a ridge repair.
const PSD_REPAIR_TOL: f64 = 1e-6;
const RIDGE: f64 = 1e-10;

/// Row-sparse constraint matrix.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct SparseRows {
    ncols: usize,
    rows: Vec<Vec<(usize, f64)>>,
}

impl SparseRows {
    pub fn new(ncols: usize) -> Self {
        Self { ncols, rows: Vec::new() }
    }

    pub fn from_dense(m: &Matrix) -> Self {
        let mut out = Self::new(m.ncols());
        for r in m.rows() {
            out.push_dense(r);
        }
        out
    }

    /// Appends a row given as `(column, value)` pairs. Zeros are dropped.
    pub fn push(&mut self, entries: impl IntoIterator<Item = (usize, f64)>) {
        let row: Vec<(usize, f64)> = entries.into_iter().filter(|&(_, v)| v != 0.0).collect();
        assert!(row.iter().all(|&(j, _)| j < self.ncols), "column out of range");
        self.rows.push(row);
    }

    pub fn push_dense(&mut self, row: &[f64]) {
        assert_eq!(row.len(), self.ncols);
        self.push(row.iter().copied().enumerate());
    }

    pub fn nrows(&self) -> usize {
        self.rows.len()
    }

    pub fn ncols(&self) -> usize {
        self.ncols
    }

    pub fn row(&self, r: usize) -> &[(usize, f64)] {
        &self.rows[r]
    }

    pub fn mul_vec(&self, x: &[f64]) -> Vec<f64> {
        self.rows.iter().map(|row| row.iter().map(|&(j, v)| v * x[j]).sum()).collect()
    }

    /// `out += selfᵀ z`.
    pub fn tr_mul_add(&self, z: &[f64], out: &mut [f64]) {
        for (row, &zr) in self.rows.iter().zip(z) {
            for &(j, v) in row {
                out[j] += v * zr;
            }
        }
    }

    pub fn to_dense(&self) -> Matrix {
        let mut m = Matrix::zeros(self.nrows(), self.ncols);
        for (r, row) in self.rows.iter().enumerate() {
            for &(j, v) in row {
                m[(r, j)] += v;
            }
        }
        m
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct QuadraticProgram {
    pub p: Matrix,
    pub q: Vec<f64>,
    pub g: SparseRows,
    pub h: Vec<f64>,
    pub a: SparseRows,
    pub b: Vec<f64>,
}

impl QuadraticProgram {
    /// Unconstrained problem; add constraints with the builder methods.
    pub fn new(p: Matrix, q: Vec<f64>) -> Self {
        let n = q.len();
        Self { p, q, g: SparseRows::new(n), h: Vec::new(), a: SparseRows::new(n), b: Vec::new() }
    }

    pub fn with_inequalities(mut self, g: SparseRows, h: Vec<f64>) -> Self {
        self.g = g;
        self.h = h;
        self
    }

    pub fn with_equalities(mut self, a: SparseRows, b: Vec<f64>) -> Self {
        self.a = a;
        self.b = b;
        self
    }

    pub fn num_vars(&self) -> usize {
        self.q.len()
    }

    pub fn num_ineq(&self) -> usize {
        self.h.len()
    }

    pub fn num_eq(&self) -> usize {
        self.b.len()
    }

    pub fn objective(&self, x: &[f64]) -> f64 {
        0.5 * dot(x, &self.p.mul_vec(x)) + dot(&self.q, x)
    }

    pub fn validate(&self) -> Result<(), QpError> {
        let n = self.num_vars();
        if self.p.shape() != (n, n) {
            return Err(QpError::Dimension(format!("P is {:?}, expected ({n}, {n})", self.p.shape())));
        }
        if self.g.ncols() != n || self.g.nrows() != self.h.len() {
            return Err(QpError::Dimension(format!(
                "G is {}x{}, h has {} entries, n = {n}",
                self.g.nrows(),
                self.g.ncols(),
                self.h.len()
            )));
        }
        if self.a.ncols() != n || self.a.nrows() != self.b.len() {
            return Err(QpError::Dimension(format!(
                "A is {}x{}, b has {} entries, n = {n}",
                self.a.nrows(),
                self.a.ncols(),
                self.b.len()
            )));
        }
        let finite = self.p.is_finite()
            && self.q.iter().chain(&self.h).chain(&self.b).all(|v| v.is_finite())
            && self.g.rows.iter().chain(&self.a.rows).flatten().all(|(_, v)| v.is_finite());
        if !finite {
            return Err(QpError::NonFinite);
        }
        let asym = self.p.asymmetry();
        if asym > 1e-10 {
            return Err(QpError::NotSymmetric(asym));
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SolverSettings {
    /// Relative primal and dual residual tolerance.
    pub tol: f64,
    /// Relative duality gap tolerance, `sᵀz / max(1, |objective|)`.
    pub gap_tol: f64,
    pub max_iter: usize,
    /// Iterations without progress before declaring infeasibility.
    pub stall_iterations: usize,
}

impl Default for SolverSettings {
    fn default() -> Self {
        Self { tol: 1e-8, gap_tol: 1e-8, max_iter: 100, stall_iterations: 15 }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SolveStatus {
    Optimal,
    MaxIter,
    Infeasible,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct QpSolution {
    pub x: Vec<f64>,
    pub ineq_multipliers: Vec<f64>,
    pub eq_multipliers: Vec<f64>,
    pub slacks: Vec<f64>,
    pub objective: f64,
    /// Relative gap `sᵀz / max(1, |objective|)` at the returned iterate.
    pub duality_gap: f64,
    pub iterations: usize,
    pub status: SolveStatus,
    /// Relative gap after each iteration.
    pub gap_history: Vec<f64>,
    /// Ridge added to `P` during the semidefiniteness repair (0 if none).
    pub ridge: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct KktResiduals {
    /// `‖Px + q + Gᵀz + Aᵀy‖∞`
    pub stationarity: f64,
    /// `max(max(Gx − h)₊, ‖Ax − b‖∞)`
    pub primal_feasibility: f64,
    /// `max(−z)₊`
    pub dual_feasibility: f64,
    /// `max |zᵢ (Gx − h)ᵢ|`
    pub complementarity: f64,
}

impl KktResiduals {
    pub fn max(&self) -> f64 {
        self.stationarity.max(self.primal_feasibility).max(self.dual_feasibility).max(self.complementarity)
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum QpError {
    #[error("dimension mismatch: {0}")]
    Dimension(String),
    #[error("problem data contains non-finite values")]
    NonFinite,
    #[error("P is not symmetric (max asymmetry {0:e})")]
    NotSymmetric(f64),
    #[error("P is not positive semidefinite (fails a {0:e} diagonal shift)")]
    NotPsd(f64),
    #[error("KKT system is singular; equality constraints may be dependent")]
    Singular,
}

/// Residuals of the optimality conditions at `sol` (`sol.x`, multipliers).
pub fn kkt_residuals(qp: &QuadraticProgram, sol: &QpSolution) -> KktResiduals {
    residuals_at(qp, &sol.x, &sol.ineq_multipliers, &sol.eq_multipliers)
}

pub fn residuals_at(qp: &QuadraticProgram, x: &[f64], z: &[f64], y: &[f64]) -> KktResiduals {
    let mut grad = qp.p.mul_vec(x);
    for (gi, qi) in grad.iter_mut().zip(&qp.q) {
        *gi += qi;
    }
    qp.g.tr_mul_add(z, &mut grad);
    qp.a.tr_mul_add(y, &mut grad);
    let gx = qp.g.mul_vec(x);
    let viol = gx.iter().zip(&qp.h).map(|(g, h)| g - h);
    let ineq = viol.clone().fold(0.0f64, |m, v| m.max(v));
    let ax = qp.a.mul_vec(x);
    let eq = ax.iter().zip(&qp.b).fold(0.0f64, |m, (a, b)| m.max((a - b).abs()));
    KktResiduals {
        stationarity: norm_inf(&grad),
        primal_feasibility: ineq.max(eq),
        dual_feasibility: z.iter().fold(0.0f64, |m, &v| m.max(-v)),
        complementarity: viol.zip(z).fold(0.0f64, |m, (v, zi)| m.max((v * zi).abs())),
    }
}

/// Returns the ridge to add to `P`, or an error when `P` is clearly indefinite.
fn psd_ridge(p: &Matrix) -> Result<f64, QpError> {
    let n = p.nrows();
    if n == 0 || p.as_slice().iter().all(|v| *v == 0.0) {
        return Ok(0.0);
    }
    let shifted = |shift: f64| {
        let mut m = p.to_faer();
        for i in 0..n {
            m[(i, i)] += shift;
        }
        m.llt(Side::Lower).is_ok()
    };
    if shifted(PSD_TOL) {
        Ok(0.0)
    } else if shifted(PSD_REPAIR_TOL) {
        log::warn!("P fails the {PSD_TOL:e} semidefiniteness check; adding ridge {RIDGE:e}");
        Ok(RIDGE)
    } else {
        Err(QpError::NotPsd(PSD_REPAIR_TOL))
    }
}

/// Reduced KKT system `[[P + GᵀWG, Aᵀ], [A, 0]]`, factorized.
struct Kkt {
    matrix: Mat<f64>,
    factor: faer::linalg::solvers::Lblt<f64>,
}

impl Kkt {
    fn assemble(qp: &QuadraticProgram, ridge: f64, weights: Option<&[f64]>) -> Kkt {
        let n = qp.num_vars();
        let p = qp.num_eq();
        let dim = n + p;
        let mut m = Mat::<f64>::zeros(dim, dim);
        for j in 0..n {
            let prow = qp.p.row(j);
            let col = m.col_mut(j);
            let col = col.try_as_col_major_mut().expect("owned matrix is column-major").as_slice_mut();
            col[..n].copy_from_slice(prow);
            col[j] += ridge;
        }
        for (r, row) in qp.g.rows.iter().enumerate() {
            let w = weights.map_or(1.0, |w| w[r]);
            for &(i, vi) in row {
                for &(j, vj) in row {
                    m[(i, j)] += w * vi * vj;
                }
            }
        }
        for (r, row) in qp.a.rows.iter().enumerate() {
            for &(j, v) in row {
                m[(n + r, j)] += v;
                m[(j, n + r)] += v;
            }
        }
        let factor = m.lblt(Side::Lower);
        Kkt { matrix: m, factor }
    }

    /// Solves with iterative refinement, stopping once the residual no
    /// longer halves.
    fn solve(&self, rhs: &[f64]) -> Result<Vec<f64>, QpError> {
        let dim = rhs.len();
        let b = Mat::<f64>::from_fn(dim, 1, |i, _| rhs[i]);
        let mut x = self.factor.solve(&b);
        let mut r = &b - &self.matrix * &x;
        let mut rnorm = mat_norm_inf(&r);
        for _ in 0..REFINE_STEPS {
            let cand = &x + self.factor.solve(&r);
            let rc = &b - &self.matrix * &cand;
            let cnorm = mat_norm_inf(&rc);
            if !(cnorm < rnorm) {
                break;
            }
            let enough = cnorm > 0.5 * rnorm;
            x = cand;
            r = rc;
            rnorm = cnorm;
            if enough {
                break;
            }
        }
        let out: Vec<f64> = (0..dim).map(|i| x[(i, 0)]).collect();
        if out.iter().all(|v| v.is_finite()) {
            Ok(out)
        } else {
            Err(QpError::Singular)
        }
    }
}

const REFINE_STEPS: usize = 5;

fn mat_norm_inf(m: &Mat<f64>) -> f64 {
    (0..m.nrows()).fold(0.0f64, |a, i| a.max(m[(i, 0)].abs()))
}

struct Iterate {
    x: Vec<f64>,
    s: Vec<f64>,
    z: Vec<f64>,
    y: Vec<f64>,
}

/// Largest `α ∈ (0, 1]` keeping `v + α dv ≥ 0`.
fn max_step(v: &[f64], dv: &[f64]) -> f64 {
    v.iter().zip(dv).fold(1.0f64, |a, (&vi, &di)| if di < 0.0 { a.min(-vi / di) } else { a })
}

fn shift_positive(v: &mut [f64]) {
    let min = v.iter().cloned().fold(f64::INFINITY, f64::min);
    if min <= 0.0 {
        let shift = 1.0 - min;
        v.iter_mut().for_each(|x| *x += shift);
    }
}

pub fn solve(qp: &QuadraticProgram, settings: &SolverSettings) -> Result<QpSolution, QpError> {
    qp.validate()?;
    let ridge = psd_ridge(&qp.p)?;
    let n = qp.num_vars();
    let m = qp.num_ineq();

    if m == 0 {
        let kkt = Kkt::assemble(qp, ridge, None);
        let mut rhs: Vec<f64> = qp.q.iter().map(|v| -v).collect();
        rhs.extend_from_slice(&qp.b);
        let sol = kkt.solve(&rhs)?;
        let x = sol[..n].to_vec();
        let y = sol[n..].to_vec();
        let res = residuals_at(qp, &x, &[], &y);
        let scale = 1.0f64.max(norm_inf(&qp.q)).max(norm_inf(&qp.b));
        // A singular P with q outside its range leaves the residual large.
        let status = if res.max() <= settings.tol.max(1e-9) * scale * 1e3 {
            SolveStatus::Optimal
        } else {
            SolveStatus::Infeasible
        };
        return Ok(QpSolution {
            objective: qp.objective(&x),
            x,
            ineq_multipliers: Vec::new(),
            eq_multipliers: y,
            slacks: Vec::new(),
            duality_gap: 0.0,
            iterations: 0,
            status,
            gap_history: Vec::new(),
            ridge,
        });
    }

    // Starting point from the least-squares system with W = I.
    let kkt0 = Kkt::assemble(qp, ridge, None);
    let mut rhs: Vec<f64> = qp.q.iter().map(|v| -v).collect();
    qp.g.tr_mul_add(&qp.h, &mut rhs);
    rhs.extend_from_slice(&qp.b);
    let sol0 = kkt0.solve(&rhs)?;
    drop(kkt0);
    let x = sol0[..n].to_vec();
    let y = sol0[n..].to_vec();
    let gx = qp.g.mul_vec(&x);
    let mut s: Vec<f64> = qp.h.iter().zip(&gx).map(|(h, g)| h - g).collect();
    let mut z: Vec<f64> = s.iter().map(|v| -v).collect();
    shift_positive(&mut s);
    shift_positive(&mut z);
    let mut it = Iterate { x, s, z, y };

    let escale = 1.0f64.max(norm_inf(&qp.b));
    let iscale = 1.0f64.max(norm_inf(&qp.h));
    let dscale = 1.0f64.max(norm_inf(&qp.q));

    let mut gap_history = Vec::new();
    let mut best: Option<(f64, Vec<f64>, Vec<f64>, Vec<f64>, Vec<f64>, f64)> = None;
    let mut best_pres = f64::INFINITY;
    let mut best_gap = f64::INFINITY;
    let mut stall = 0usize;
    let mut status = SolveStatus::MaxIter;
    let mut iterations = 0;

    for iter in 0..=settings.max_iter {
        // Residuals.
        let mut rx = qp.p.mul_vec(&it.x);
        if ridge > 0.0 {
            for (r, xi) in rx.iter_mut().zip(&it.x) {
                *r += ridge * xi;
            }
        }
        let pcost = 0.5 * dot(&it.x, &rx) + dot(&qp.q, &it.x);
        for (r, qi) in rx.iter_mut().zip(&qp.q) {
            *r += qi;
        }
        qp.g.tr_mul_add(&it.z, &mut rx);
        qp.a.tr_mul_add(&it.y, &mut rx);
        let ry: Vec<f64> = qp.a.mul_vec(&it.x).iter().zip(&qp.b).map(|(a, b)| a - b).collect();
        let rz: Vec<f64> =
            qp.g.mul_vec(&it.x).iter().zip(&it.s).zip(&qp.h).map(|((g, s), h)| g + s - h).collect();
        let gap = dot(&it.s, &it.z);
        let pres = (norm_inf(&ry) / escale).max(norm_inf(&rz) / iscale);
        let dres = norm_inf(&rx) / dscale;
        let relgap = gap / 1.0f64.max(pcost.abs());
        if iter > 0 {
            gap_history.push(relgap);
        }

        let merit = pres.max(dres).max(relgap);
        if best.as_ref().map_or(true, |b| merit < b.0) {
            best = Some((merit, it.x.clone(), it.s.clone(), it.z.clone(), it.y.clone(), relgap));
        }
        iterations = iter;
        log::debug!("iter {iter}: pres {pres:.3e} dres {dres:.3e} gap {relgap:.3e}");

        if pres <= settings.tol && dres <= settings.tol && relgap <= settings.gap_tol {
            status = SolveStatus::Optimal;
            break;
        }
        if iter == settings.max_iter {
            break;
        }

        // Infeasibility: no primal progress while the gap stalls.
        let progressed = pres < 0.99 * best_pres || relgap < 0.99 * best_gap;
        best_pres = best_pres.min(pres);
        best_gap = best_gap.min(relgap);
        stall = if progressed { 0 } else { stall + 1 };
        if stall >= settings.stall_iterations {
            status = if best_pres > libm::sqrt(settings.tol) { SolveStatus::Infeasible } else { SolveStatus::MaxIter };
            break;
        }

        let w: Vec<f64> = it.z.iter().zip(&it.s).map(|(z, s)| z / s).collect();
        let kkt = Kkt::assemble(qp, ridge, Some(&w));

        let newton = |rsz: &[f64]| -> Result<(Vec<f64>, Vec<f64>, Vec<f64>, Vec<f64>), QpError> {
            // dz = W(G dx + rz) − rsz/s ; ds = (−rsz − s∘dz)/z
            let t: Vec<f64> = (0..m).map(|i| w[i] * rz[i] - rsz[i] / it.s[i]).collect();
            let mut rhs: Vec<f64> = rx.iter().map(|v| -v).collect();
            qp.g.tr_mul_add(&t.iter().map(|v| -v).collect::<Vec<_>>(), &mut rhs);
            rhs.extend(ry.iter().map(|v| -v));
            let sol = kkt.solve(&rhs)?;
            let dx = sol[..n].to_vec();
            let dy = sol[n..].to_vec();
            let gdx = qp.g.mul_vec(&dx);
            let dz: Vec<f64> = (0..m).map(|i| w[i] * (gdx[i] + rz[i]) - rsz[i] / it.s[i]).collect();
            let ds: Vec<f64> = (0..m).map(|i| (-rsz[i] - it.s[i] * dz[i]) / it.z[i]).collect();
            Ok((dx, ds, dz, dy))
        };

        // Predictor.
        let rsz_aff: Vec<f64> = it.s.iter().zip(&it.z).map(|(s, z)| s * z).collect();
        let (_, ds_a, dz_a, _) = newton(&rsz_aff)?;
        let alpha_aff = max_step(&it.s, &ds_a).min(max_step(&it.z, &dz_a));
        let mu = gap / m as f64;
        let mu_aff = (0..m)
            .map(|i| (it.s[i] + alpha_aff * ds_a[i]) * (it.z[i] + alpha_aff * dz_a[i]))
            .sum::<f64>()
            / m as f64;
        let ratio = (mu_aff / mu).clamp(0.0, 1.0);
        let sigma = ratio * ratio * ratio;

        // Corrector.
        let rsz: Vec<f64> = (0..m).map(|i| it.s[i] * it.z[i] + ds_a[i] * dz_a[i] - sigma * mu).collect();
        let (dx, ds, dz, dy) = newton(&rsz)?;
        let alpha = (0.99 * max_step(&it.s, &ds).min(max_step(&it.z, &dz))).min(1.0);

        for (v, d) in it.x.iter_mut().zip(&dx) {
            *v += alpha * d;
        }
        for (v, d) in it.s.iter_mut().zip(&ds) {
            *v += alpha * d;
        }
        for (v, d) in it.z.iter_mut().zip(&dz) {
            *v += alpha * d;
        }
        for (v, d) in it.y.iter_mut().zip(&dy) {
            *v += alpha * d;
        }
    }

    let (x, s, z, y, gap) = if status == SolveStatus::Optimal {
        let g = *gap_history.last().unwrap_or(&0.0);
        (it.x, it.s, it.z, it.y, g)
    } else {
        let (_, x, s, z, y, g) = best.expect("at least one iterate evaluated");
        (x, s, z, y, g)
    };
    Ok(QpSolution {
        objective: qp.objective(&x),
        x,
        ineq_multipliers: z,
        eq_multipliers: y,
        slacks: s,
        duality_gap: gap,
        iterations,
        status,
        gap_history,
        ridge,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn one_dim(g: Option<(f64, f64)>) -> QuadraticProgram {
        let qp = QuadraticProgram::new(Matrix::from_rows(&[[2.0]]), vec![-2.0]);
        match g {
            Some((gv, h)) => {
                let mut rows = SparseRows::new(1);
                rows.push([(0, gv)]);
                qp.with_inequalities(rows, vec![h])
            }
            None => qp,
        }
    }

    #[test]
    fn unconstrained_stationary_point() {
        let sol = solve(&one_dim(None), &SolverSettings::default()).unwrap();
        assert_eq!(sol.status, SolveStatus::Optimal);
        assert!((sol.x[0] - 1.0).abs() < 1e-12);
        assert!((sol.objective + 1.0).abs() < 1e-12);
    }

    #[test]
    fn clipped_optimum_has_unit_multiplier() {
        let qp = one_dim(Some((1.0, 0.5)));
        let sol = solve(&qp, &SolverSettings::default()).unwrap();
        assert_eq!(sol.status, SolveStatus::Optimal);
        assert!((sol.x[0] - 0.5).abs() < 1e-7, "{:?}", sol.x);
        assert!((sol.ineq_multipliers[0] - 1.0).abs() < 1e-6);
        assert!(kkt_residuals(&qp, &sol).max() < 1e-6);
    }

    #[test]
    fn zero_problem_has_zero_residuals() {
        let qp = QuadraticProgram::new(Matrix::zeros(3, 3), vec![0.0; 3]);
        let sol = QpSolution {
            x: vec![0.0; 3],
            ineq_multipliers: vec![],
            eq_multipliers: vec![],
            slacks: vec![],
            objective: 0.0,
            duality_gap: 0.0,
            iterations: 0,
            status: SolveStatus::Optimal,
            gap_history: vec![],
            ridge: 0.0,
        };
        let r = kkt_residuals(&qp, &sol);
        assert_eq!(r, KktResiduals { stationarity: 0.0, primal_feasibility: 0.0, dual_feasibility: 0.0, complementarity: 0.0 });
    }

    #[test]
    fn perturbed_solution_has_large_stationarity() {
        let p = Matrix::from_rows(&[[3.0, 1.0], [1.0, 2.0]]);
        let mut g = SparseRows::new(2);
        g.push([(0, 1.0), (1, 1.0)]);
        let qp = QuadraticProgram::new(p, vec![-1.0, -1.0]).with_inequalities(g, vec![0.2]);
        let mut sol = solve(&qp, &SolverSettings::default()).unwrap();
        assert!(kkt_residuals(&qp, &sol).max() < 1e-6);
        sol.x[0] += 0.1;
        // Direct evaluation: P·(0.1, 0) = (0.3, 0.1).
        assert!(kkt_residuals(&qp, &sol).stationarity > 0.01);
    }

    #[test]
    fn rejects_indefinite_and_asymmetric() {
        let qp = QuadraticProgram::new(Matrix::from_rows(&[[1.0, 0.0], [0.0, -1.0]]), vec![0.0; 2]);
        assert!(matches!(solve(&qp, &SolverSettings::default()), Err(QpError::NotPsd(_))));
        let qp = QuadraticProgram::new(Matrix::from_rows(&[[1.0, 0.5], [0.0, 1.0]]), vec![0.0; 2]);
        assert!(matches!(solve(&qp, &SolverSettings::default()), Err(QpError::NotSymmetric(_))));
        let qp = QuadraticProgram::new(Matrix::identity(2), vec![0.0; 3]);
        assert!(matches!(solve(&qp, &SolverSettings::default()), Err(QpError::Dimension(_))));
    }

    #[test]
    fn slightly_indefinite_gets_ridge() {
        let qp = QuadraticProgram::new(Matrix::from_rows(&[[1.0, 0.0], [0.0, -5e-8]]), vec![-1.0, 0.0]);
        let mut g = SparseRows::new(2);
        g.push([(1, 1.0)]);
        g.push([(1, -1.0)]);
        let qp = qp.with_inequalities(g, vec![1.0, 1.0]);
        let sol = solve(&qp, &SolverSettings::default()).unwrap();
        assert_eq!(sol.ridge, RIDGE);
        assert!((sol.x[0] - 1.0).abs() < 1e-6);
    }

    #[test]
    fn detects_infeasible_box() {
        // x ≤ -1 and -x ≤ -1 (x ≥ 1).
        let mut g = SparseRows::new(1);
        g.push([(0, 1.0)]);
        g.push([(0, -1.0)]);
        let qp = QuadraticProgram::new(Matrix::from_rows(&[[1.0]]), vec![0.0]).with_inequalities(g, vec![-1.0, -1.0]);
        let sol = solve(&qp, &SolverSettings::default()).unwrap();
        assert_ne!(sol.status, SolveStatus::Optimal);
    }

    #[test]
    fn equality_constrained_projection() {
        // min ½‖x‖² s.t. x0 + x1 = 1, x ≥ 0 → (0.5, 0.5).
        let mut a = SparseRows::new(2);
        a.push([(0, 1.0), (1, 1.0)]);
        let mut g = SparseRows::new(2);
        g.push([(0, -1.0)]);
        g.push([(1, -1.0)]);
        let qp = QuadraticProgram::new(Matrix::identity(2), vec![0.0; 2])
            .with_inequalities(g, vec![0.0; 2])
            .with_equalities(a, vec![1.0]);
        let sol = solve(&qp, &SolverSettings::default()).unwrap();
        assert_eq!(sol.status, SolveStatus::Optimal);
        assert!((sol.x[0] - 0.5).abs() < 1e-8 && (sol.x[1] - 0.5).abs() < 1e-8);
        assert!((sol.eq_multipliers[0] + 0.5).abs() < 1e-6);
    }
}
