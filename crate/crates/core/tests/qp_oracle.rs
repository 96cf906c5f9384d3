use confair_core::oracle::{active_set_qp, random_qp};
use confair_core::qpsolve::{kkt_residuals, solve, QuadraticProgram, SolveStatus, SolverSettings, SparseRows};

fn shape(seed: u64) -> (usize, usize, usize) {
    let n = 1 + (seed % 6) as usize;
    let m = ((seed / 6) % 13) as usize;
    let p = ((seed / 78) % 3) as usize;
    (n, m, p.min(n - 1))
}

#[test]
fn matches_active_set_oracle_on_random_problems() {
    let mut checked = 0;
    for seed in 0..200u64 {
        let (n, m, p) = shape(seed * 7 + 3);
        let qp = random_qp(seed, n, m, p);
        let sol = solve(&qp, &SolverSettings::default()).unwrap();
        assert_eq!(sol.status, SolveStatus::Optimal, "seed {seed} ({n},{m},{p})");
        let reference = active_set_qp(&qp, 1e-9).expect("feasible by construction");
        assert!((sol.objective - reference.objective).abs() <= 1e-6, "seed {seed}: {} vs {}", sol.objective, reference.objective);
        for (a, b) in sol.x.iter().zip(&reference.x) {
            assert!((a - b).abs() <= 1e-5, "seed {seed}: {:?} vs {:?}", sol.x, reference.x);
        }
        assert!(kkt_residuals(&qp, &sol).max() <= 1e-6);
        checked += 1;
    }
    assert_eq!(checked, 200);
}

#[test]
fn four_variable_box_and_equality() {
    let qp = random_qp(2024, 4, 0, 1);
    let mut g = SparseRows::new(4);
    let mut h = Vec::new();
    for i in 0..4 {
        g.push([(i, 1.0)]);
        h.push(0.3);
    }
    let qp = QuadraticProgram::new(qp.p, qp.q).with_inequalities(g, h).with_equalities(qp.a, qp.b);
    let sol = solve(&qp, &SolverSettings::default()).unwrap();
    let reference = active_set_qp(&qp, 1e-9).unwrap();
    assert!((sol.objective - reference.objective).abs() <= 1e-6);
    for (a, b) in sol.x.iter().zip(&reference.x) {
        assert!((a - b).abs() <= 1e-6);
    }
}

#[test]
fn gap_is_monotone_at_the_end() {
    for seed in 0..50u64 {
        let (n, m, p) = shape(seed * 11 + 1);
        if m == 0 {
            continue;
        }
        let sol = solve(&random_qp(seed + 1000, n, m, p), &SolverSettings::default()).unwrap();
        assert_eq!(sol.status, SolveStatus::Optimal);
        let tail = &sol.gap_history[sol.gap_history.len().saturating_sub(5)..];
        assert!(tail.windows(2).all(|w| w[1] <= w[0]), "seed {seed}: {tail:?}");
    }
}

#[test]
fn argmin_is_scale_invariant() {
    for seed in 0..30u64 {
        let (n, m, p) = shape(seed * 5 + 2);
        let qp = random_qp(seed + 500, n, m, p);
        let mut scaled = qp.clone();
        scaled.p.scale(7.5);
        scaled.q.iter_mut().for_each(|v| *v *= 7.5);
        let tight = SolverSettings { tol: 1e-12, gap_tol: 1e-12, ..SolverSettings::default() };
        let a = solve(&qp, &tight).unwrap();
        let b = solve(&scaled, &tight).unwrap();
        for (x, y) in a.x.iter().zip(&b.x) {
            assert!((x - y).abs() <= 1e-8, "seed {seed}: {:?} vs {:?}", a.x, b.x);
        }
    }
}

#[test]
fn optimal_solutions_satisfy_the_contract() {
    for seed in 0..40u64 {
        let (n, m, p) = shape(seed * 3 + 5);
        let qp = random_qp(seed + 77, n, m, p);
        let sol = solve(&qp, &SolverSettings::default()).unwrap();
        let r = kkt_residuals(&qp, &sol);
        assert!(r.primal_feasibility <= 1e-8 * 10.0);
        assert!(r.dual_feasibility <= 1e-8);
        assert!(r.complementarity <= 1e-6);
        assert!(sol.duality_gap <= 1e-8);
    }
}
