//! Synthetic datasets shared by the unit, integration and acceptance tests.

use alloc::format;
use alloc::vec::Vec;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::dataset::{split, SplitSpec, TabularDataset};
use crate::matrix::Matrix;

/// Uniform `[0, 1)` stream from a 64-bit LCG.
pub fn lcg(seed: u64) -> impl FnMut() -> f64 {
    let mut s = seed;
    move || {
        s = s.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
        (s >> 11) as f64 / (1u64 << 53) as f64
    }
}

/// `n` rows, 4 columns; column 0 carries the alternating label as its sign
/// (|x₀| ≥ 0.01), the rest is uniform noise.
pub fn balanced_sign(n: usize, seed: u64) -> (Matrix, Vec<i8>) {
    let mut r = lcg(seed);
    let x = Matrix::from_fn(n, 4, |i, j| {
        let v = r() + 0.01;
        if j == 0 {
            if i % 2 == 0 { v } else { -v }
        } else {
            r() * 2.0 - 1.0
        }
    });
    let y = (0..n).map(|i| if i % 2 == 0 { 1 } else { -1 }).collect();
    (x, y)
}

/// 50 rows, 3 columns; column 1 is the constant 2.5 and labels are the sign
/// of column 0.
pub fn constant_column(seed: u64) -> (Matrix, Vec<i8>) {
    let mut r = lcg(seed);
    let x = Matrix::from_fn(50, 3, |_, j| if j == 1 { 2.5 } else { r() - 0.5 });
    let y = x.rows().map(|row| if row[0] >= 0.0 { 1 } else { -1 }).collect();
    (x, y)
}

/// Ten points on each side of `x₀ = 0`, some on the margins `x₀ = ±1`; the
/// hard-margin linear separator is `f(x) = x₀`.
pub fn twenty_points() -> (Vec<[f64; 2]>, Vec<i8>) {
    let mut pts = Vec::new();
    let mut labels = Vec::new();
    for i in 0..10 {
        let t = i as f64 * 0.37 - 1.6;
        let off = if i % 3 == 0 { 0.0 } else { 0.5 + 0.2 * i as f64 };
        pts.push([1.0 + off, t]);
        labels.push(1);
        pts.push([-1.0 - off, -t]);
        labels.push(-1);
    }
    (pts, labels)
}

/// Appends an alternating 0/1 group column (index 2) to 2-D points.
pub fn with_group_column(points: &[[f64; 2]], labels: Vec<i8>) -> TabularDataset {
    let rows: Vec<[f64; 3]> = points.iter().enumerate().map(|(i, p)| [p[0], p[1], (i % 2) as f64]).collect();
    TabularDataset::new(Matrix::from_rows(&rows), labels, 2, alloc::vec!["x0".into(), "x1".into(), "g".into()], Vec::new())
        .expect("valid fixture")
}

fn build(rows: Vec<Vec<f64>>, labels: Vec<i8>, s: usize) -> TabularDataset {
    let d = rows[0].len();
    let names = (0..d).map(|j| format!("f{j}")).collect();
    TabularDataset::new(Matrix::from_rows(&rows), labels, s, names, Vec::new()).expect("valid fixture")
}

/// 70/30 stratified train/test split with a fixed seed.
pub fn halves(ds: &TabularDataset) -> (TabularDataset, TabularDataset) {
    split(ds, &SplitSpec { holdout_fraction: 0.3, seed: 9, ..SplitSpec::default() }, None).expect("splittable fixture")
}

/// Columns `[x₁, s]`, `y = sign(1.5(s − ½) + x₁)`: `s` dominates the label.
/// Sensitive index 1.
pub fn sensitive_critical() -> TabularDataset {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let mut rows = Vec::new();
    let mut labels = Vec::new();
    for i in 0..160 {
        let s = (i % 2) as f64;
        let x1: f64 = rng.random::<f64>() * 2.0 - 1.0;
        labels.push(if 1.5 * (s - 0.5) + x1 > 0.0 { 1 } else { -1 });
        rows.push(alloc::vec![x1, s]);
    }
    build(rows, labels, 1)
}

/// Columns `[s, p, x₁]` with proxy `p = s + small noise` and
/// `y = sign(p + 0.8x₁ − ½)`. Sensitive index 0; train the baseline on
/// `[1, 2]` so that `s` itself has zero importance.
pub fn proxy_covariate() -> TabularDataset {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let mut rows = Vec::new();
    let mut labels = Vec::new();
    for i in 0..160 {
        let s = (i % 2) as f64;
        let p = s + 0.1 * (rng.random::<f64>() - 0.5);
        let x1: f64 = rng.random::<f64>() * 2.0 - 1.0;
        labels.push(if p + 0.8 * x1 > 0.5 { 1 } else { -1 });
        rows.push(alloc::vec![s, p, x1]);
    }
    build(rows, labels, 0)
}

/// Columns `[x₀, s]`; the label is the sign of `x₀` (|x₀| ≥ 1) and group 0
/// sits slightly higher, so `cov(x₀, s) < 0`. Sensitive index 1.
pub fn extrinsic() -> TabularDataset {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let mut rows = Vec::new();
    let mut labels = Vec::new();
    for i in 0..160 {
        let s = (i % 2) as f64;
        let sign = if (i / 2) % 2 == 0 { 1.0 } else { -1.0 };
        let x0 = sign * (1.0 + rng.random::<f64>()) + if s == 0.0 { 0.01 } else { 0.0 };
        labels.push(if sign > 0.0 { 1 } else { -1 });
        rows.push(alloc::vec![x0, s]);
    }
    build(rows, labels, 1)
}

/// All `n!` permutations of `0..n`.
pub fn all_permutations(n: usize) -> Vec<Vec<usize>> {
    if n == 0 {
        return alloc::vec![Vec::new()];
    }
    let mut out = Vec::new();
    for p in all_permutations(n - 1) {
        for pos in 0..=p.len() {
            let mut q = p.clone();
            q.insert(pos, n - 1);
            out.push(q);
        }
    }
    out
}
