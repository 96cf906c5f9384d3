//! Brute-force reference solvers for tests.
//!
//! Nothing here shares code with the production solvers beyond the problem
//! containers: linear systems are solved by plain Gaussian elimination and
//! QPs by enumerating every active set.

use alloc::vec;
use alloc::vec::Vec;

use crate::matrix::Matrix;
use crate::qpsolve::QuadraticProgram;

/// Solves `m x = rhs` by Gaussian elimination with partial pivoting.
/// Returns `None` when a pivot falls below `1e-11` times the largest entry.
pub fn gauss_solve(m: &Matrix, rhs: &[f64]) -> Option<Vec<f64>> {
    let n = m.nrows();
    assert!(m.is_square() && rhs.len() == n);
    let scale = m.as_slice().iter().fold(1e-300f64, |a, v| a.max(v.abs()));
    let mut a: Vec<Vec<f64>> = (0..n).map(|i| {
        let mut r = m.row(i).to_vec();
        r.push(rhs[i]);
        r
    }).collect();
    for col in 0..n {
        let piv = (col..n).max_by(|&i, &j| a[i][col].abs().total_cmp(&a[j][col].abs()))?;
        if a[piv][col].abs() < 1e-11 * scale {
            return None;
        }
        a.swap(col, piv);
        for r in 0..n {
            if r != col {
                let f = a[r][col] / a[col][col];
                if f != 0.0 {
                    for c in col..=n {
                        let v = a[col][c];
                        a[r][c] -= f * v;
                    }
                }
            }
        }
    }
    Some((0..n).map(|i| a[i][n] / a[i][i]).collect())
}

#[derive(Clone, Debug, PartialEq)]
pub struct OracleSolution {
    pub x: Vec<f64>,
    pub objective: f64,
    pub active: Vec<usize>,
}

/// Enumerates all `2^m` active sets of the inequality rows, solves the
/// equality-constrained KKT system for each, and keeps the feasible point with
/// nonnegative active multipliers and the smallest objective.
///
/// Intended for `m ≤ 16`.
pub fn active_set_qp(qp: &QuadraticProgram, tol: f64) -> Option<OracleSolution> {
    let n = qp.num_vars();
    let m = qp.num_ineq();
    let p = qp.num_eq();
    assert!(m <= 20, "active-set enumeration is exponential in m");
    let g = qp.g.to_dense();
    let a = qp.a.to_dense();
    let mut best: Option<OracleSolution> = None;
    for mask in 0u32..(1u32 << m) {
        let active: Vec<usize> = (0..m).filter(|&i| mask & (1 << i) != 0).collect();
        let k = p + active.len();
        if k > n {
            continue;
        }
        let dim = n + k;
        let mut kkt = Matrix::zeros(dim, dim);
        let mut rhs = vec![0.0; dim];
        for i in 0..n {
            for j in 0..n {
                kkt[(i, j)] = qp.p[(i, j)];
            }
            rhs[i] = -qp.q[i];
        }
        for r in 0..k {
            let (row, val): (&[f64], f64) =
                if r < p { (a.row(r), qp.b[r]) } else { (g.row(active[r - p]), qp.h[active[r - p]]) };
            for j in 0..n {
                kkt[(n + r, j)] = row[j];
                kkt[(j, n + r)] = row[j];
            }
            rhs[n + r] = val;
        }
        let Some(sol) = gauss_solve(&kkt, &rhs) else { continue };
        let x = &sol[..n];
        let feasible = (0..m).all(|i| {
            let gx: f64 = g.row(i).iter().zip(x).map(|(a, b)| a * b).sum();
            gx <= qp.h[i] + tol
        });
        let dual_ok = (0..active.len()).all(|r| sol[n + p + r] >= -tol);
        if !(feasible && dual_ok) {
            continue;
        }
        let px = qp.p.mul_vec(x);
        let objective =
            0.5 * x.iter().zip(&px).map(|(a, b)| a * b).sum::<f64>() + x.iter().zip(&qp.q).map(|(a, b)| a * b).sum::<f64>();
        if best.as_ref().map_or(true, |b| objective < b.objective - 1e-12) {
            best = Some(OracleSolution { x: x.to_vec(), objective, active });
        }
    }
    best
}

/// Soft-margin SVM dual solved by [`active_set_qp`]; returns `α`.
///
/// `gram` must be the kernel matrix of the training points. Only for tiny `n`.
pub fn svm_dual(gram: &Matrix, labels: &[f64], c: f64) -> Option<Vec<f64>> {
    use crate::qpsolve::SparseRows;
    let n = labels.len();
    let p = Matrix::from_fn(n, n, |i, j| labels[i] * labels[j] * gram[(i, j)]);
    let mut g = SparseRows::new(n);
    let mut h = Vec::new();
    for i in 0..n {
        g.push([(i, -1.0)]);
        h.push(0.0);
        g.push([(i, 1.0)]);
        h.push(c);
    }
    let mut a = SparseRows::new(n);
    a.push(labels.iter().copied().enumerate());
    let qp = QuadraticProgram::new(p, vec![-1.0; n]).with_inequalities(g, h).with_equalities(a, vec![0.0]);
    active_set_qp(&qp, 1e-9).map(|s| s.x)
}

/// Random strictly convex QP with a known feasible point.
///
/// `P = BᵀB + 0.1·I`; `h` and `b` are chosen so that a random `x₀` is
/// feasible, with roughly half of the inequalities tight at `x₀`.
pub fn random_qp(seed: u64, n: usize, m: usize, p: usize) -> QuadraticProgram {
    use crate::qpsolve::SparseRows;
    use rand::{Rng, SeedableRng};
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    let mut u = || rng.random::<f64>() * 2.0 - 1.0;
    let b_mat = Matrix::from_fn(n, n, |_, _| u());
    let mut pm = Matrix::from_fn(n, n, |i, j| (0..n).map(|k| b_mat[(k, i)] * b_mat[(k, j)]).sum());
    for i in 0..n {
        pm[(i, i)] += 0.1;
    }
    let q: Vec<f64> = (0..n).map(|_| 3.0 * u()).collect();
    let x0: Vec<f64> = (0..n).map(|_| u()).collect();
    let mut g = SparseRows::new(n);
    let mut h = Vec::with_capacity(m);
    for _ in 0..m {
        let row: Vec<f64> = (0..n).map(|_| u()).collect();
        let gx: f64 = row.iter().zip(&x0).map(|(a, b)| a * b).sum();
        let slack = u().max(0.0);
        g.push_dense(&row);
        h.push(gx + slack);
    }
    let mut a = SparseRows::new(n);
    let mut b = Vec::with_capacity(p);
    for _ in 0..p {
        let row: Vec<f64> = (0..n).map(|_| u()).collect();
        b.push(row.iter().zip(&x0).map(|(a, b)| a * b).sum());
        a.push_dense(&row);
    }
    QuadraticProgram::new(pm, q).with_inequalities(g, h).with_equalities(a, b)
}
