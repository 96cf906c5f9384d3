use confair_core::fairsvm::{self, Backend, FairSvmModel, FairnessConstraintSpec, TrainOptions};
use confair_core::fixtures::{twenty_points, with_group_column};
use confair_core::oracle;
use confair_core::kernel::gram_self;
use confair_core::{KernelSpec, Matrix};

fn backends() -> [TrainOptions; 2] {
    let mut smo = TrainOptions { backend: Backend::Smo, ..TrainOptions::default() };
    smo.smo.eps = 1e-9;
    [smo, TrainOptions { backend: Backend::InteriorPoint, ..TrainOptions::default() }]
}

#[test]
fn twenty_point_separable_matches_analytic_margin() {
    let (pts, labels) = twenty_points();
    let ds = with_group_column(&pts, labels.clone());
    let probes = Matrix::from_rows(&[[0.3, 0.0, 0.0], [-0.3, 2.0, 1.0], [2.5, -1.0, 0.0], [0.0, 0.7, 1.0], [-4.0, 0.1, 0.0]]);
    for opts in backends() {
        let m = fairsvm::train(&ds, &[0, 1], KernelSpec::Linear, 1e4, &FairnessConstraintSpec::none(), &opts).unwrap();
        let f = m.decision_function(&probes).unwrap();
        for (i, v) in f.iter().enumerate() {
            assert!((v - probes[(i, 0)]).abs() < 1e-5, "{:?}: {v} vs {}", opts.backend, probes[(i, 0)]);
        }
        assert_eq!(FairSvmModel::predict(&m, ds.features()).unwrap(), labels);
        let sum: f64 = m.alphas.iter().zip(&labels).map(|(a, &y)| a * y as f64).sum();
        assert!(sum.abs() <= 1e-8);
    }
}

#[test]
fn small_problems_match_dual_oracle() {
    let (pts, labels) = twenty_points();
    let pick = [0usize, 1, 4, 5, 8, 9, 12, 13];
    let sub: Vec<[f64; 2]> = pick.iter().map(|&i| [pts[i][0] * 0.3 + 0.1 * pts[i][1], pts[i][1]]).collect();
    let y: Vec<i8> = pick.iter().map(|&i| labels[i]).collect();
    let ds = with_group_column(&sub, y.clone());
    let x = ds.features().select_columns(&[0, 1]);
    for spec in [KernelSpec::Linear, KernelSpec::rbf(0.8)] {
        let k = gram_self(&x, &spec).unwrap().values;
        let yf: Vec<f64> = y.iter().map(|&v| v as f64).collect();
        let alpha = oracle::svm_dual(&k, &yf, 0.5).unwrap();
        let b = fairsvm::recover_bias(&k, &yf, &alpha, 0.5, 0.5e-6);
        for opts in backends() {
            let m = fairsvm::train(&ds, &[0, 1], spec, 0.5, &FairnessConstraintSpec::none(), &opts).unwrap();
            let f = m.decision_function_subset(&x).unwrap();
            for i in 0..8 {
                let want: f64 = (0..8).map(|j| alpha[j] * yf[j] * k[(i, j)]).sum::<f64>() + b;
                assert!((f[i] - want).abs() < 1e-5, "{spec:?} {:?}: {} vs {want}", opts.backend, f[i]);
            }
        }
    }
}
