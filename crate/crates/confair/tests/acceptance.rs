//! Acceptance suite: one PASS/FAIL line per criterion.
//!
//! The dataset criteria (3, 4, 5 and the German part of 6) run the shipped
//! configs end to end and take the better part of an hour on one core.
//! `CONFAIR_ACCEPTANCE_DATASETS=german,compas` restricts the dataset blocks.
//! Failed checks are printed and summarized; the process exits non-zero only
//! with `CONFAIR_ACCEPTANCE_STRICT=1`.

use std::collections::BTreeMap;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::{Path, PathBuf};
use std::process::{Command, ExitCode};
use std::time::{Duration, Instant};

use confair::config::{ExperimentConfig, Method};
use confair::experiment::{load_data, run_experiment, ExperimentOutcome, ResultRow};
use confair::output::{emit_outputs, RESULTS_HEADER, TIMING_COLUMNS};
use confair_core::confair::{run_confair, ConfairCase, ConfairParams};
use confair_core::fairsvm::{self, recover_bias, Backend, FairSvmModel, FairnessConstraintSpec, TrainOptions};
use confair_core::featrank::{accuracy, find_crit_feats, ranking_from_scores, SignRule};
use confair_core::fixtures;
use confair_core::kernel::gram_self;
use confair_core::metrics::{confusion, deo, npv_diff, tnr_diff, Counts, GroupConfusion};
use confair_core::oracle::{active_set_qp, random_qp, svm_dual};
use confair_core::qpsolve::{solve, SolveStatus, SolverSettings};
use confair_core::{KernelSpec, Matrix, TabularDataset};
use proptest::prelude::*;
use proptest::test_runner::{Config, TestRunner};

const TOLERANCES: [f64; 3] = [0.0, 0.001, 0.1];
const REPORTED_TOL: f64 = 0.001;

type Verdict = Result<String, String>;

fn root() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../..")
}

fn ensure(cond: bool, msg: impl Into<String>) -> Result<(), String> {
    if cond { Ok(()) } else { Err(msg.into()) }
}

fn within(limit: Duration, t: Duration) -> Result<(), String> {
    ensure(t <= limit, format!("took {:.1}s, limit {:.0}s", t.as_secs_f64(), limit.as_secs_f64()))
}

fn guarded(f: impl FnOnce() -> Verdict) -> Verdict {
    catch_unwind(AssertUnwindSafe(f)).unwrap_or_else(|p| {
        let msg = p.downcast_ref::<String>().cloned().or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string()));
        Err(format!("panicked: {}", msg.unwrap_or_default()))
    })
}

fn mean(v: &[f64]) -> f64 {
    v.iter().sum::<f64>() / v.len() as f64
}

// ---- criterion 1 -------------------------------------------------------

fn qp_oracle() -> Verdict {
    let t = Instant::now();
    let mut worst_obj = 0.0f64;
    let mut worst_x = 0.0f64;
    for seed in 0..200u64 {
        let k = seed * 7 + 3;
        let n = 1 + (k % 6) as usize;
        let m = ((k / 6) % 13) as usize;
        let p = (((k / 78) % 3) as usize).min(n - 1);
        let qp = random_qp(seed, n, m, p);
        let sol = solve(&qp, &SolverSettings::default()).map_err(|e| format!("seed {seed}: {e}"))?;
        ensure(sol.status == SolveStatus::Optimal, format!("seed {seed}: {:?}", sol.status))?;
        let reference = active_set_qp(&qp, 1e-9).ok_or(format!("seed {seed}: oracle found no vertex"))?;
        worst_obj = worst_obj.max((sol.objective - reference.objective).abs());
        for (a, b) in sol.x.iter().zip(&reference.x) {
            worst_x = worst_x.max((a - b).abs());
        }
    }
    let el = t.elapsed();
    ensure(worst_obj <= 1e-6, format!("objective error {worst_obj:.2e}"))?;
    ensure(worst_x <= 1e-5, format!("x error {worst_x:.2e}"))?;
    within(Duration::from_secs(10), el)?;
    Ok(format!("200 QPs, max |Δobj| {worst_obj:.1e}, max |Δx| {worst_x:.1e}, {:.2}s", el.as_secs_f64()))
}

// ---- criterion 2 -------------------------------------------------------

fn backends() -> [TrainOptions; 2] {
    let mut smo = TrainOptions { backend: Backend::Smo, ..TrainOptions::default() };
    smo.smo.eps = 1e-9;
    [smo, TrainOptions { backend: Backend::InteriorPoint, ..TrainOptions::default() }]
}

fn unconstrained_svm() -> Verdict {
    let t = Instant::now();
    let mut worst = 0.0f64;
    let none = FairnessConstraintSpec::none();

    // Two points at ±1: α = ½, b = 0, f(x) = x₀.
    let two = TabularDataset::new(Matrix::from_rows(&[[1.0, 0.0], [-1.0, 1.0]]), vec![1, -1], 1, vec!["x".into(), "g".into()], vec![])
        .map_err(|e| e.to_string())?;
    let probes = Matrix::from_rows(&[[0.3, 0.0], [-0.3, 1.0], [2.0, 0.0]]);
    for opts in backends() {
        let m = fairsvm::train(&two, &[0], KernelSpec::Linear, 1e3, &none, &opts).map_err(|e| e.to_string())?;
        for (i, v) in m.decision_function(&probes).map_err(|e| e.to_string())?.iter().enumerate() {
            worst = worst.max((v - probes[(i, 0)]).abs());
        }
    }

    let (pts, labels) = fixtures::twenty_points();
    let ds = fixtures::with_group_column(&pts, labels.clone());
    let probes = Matrix::from_rows(&[[0.3, 0.0, 0.0], [-0.3, 2.0, 1.0], [2.5, -1.0, 0.0], [0.0, 0.7, 1.0], [-4.0, 0.1, 0.0]]);
    for opts in backends() {
        let m = fairsvm::train(&ds, &[0, 1], KernelSpec::Linear, 1e4, &none, &opts).map_err(|e| e.to_string())?;
        for (i, v) in m.decision_function(&probes).map_err(|e| e.to_string())?.iter().enumerate() {
            worst = worst.max((v - probes[(i, 0)]).abs());
        }
        ensure(FairSvmModel::predict(&m, ds.features()).map_err(|e| e.to_string())? == labels, "training points misclassified")?;
    }

    // Eight of the points, squeezed so the margin is soft, against the dual oracle.
    let pick = [0usize, 1, 4, 5, 8, 9, 12, 13];
    let sub: Vec<[f64; 2]> = pick.iter().map(|&i| [pts[i][0] * 0.3 + 0.1 * pts[i][1], pts[i][1]]).collect();
    let y: Vec<i8> = pick.iter().map(|&i| labels[i]).collect();
    let yf: Vec<f64> = y.iter().map(|&v| v as f64).collect();
    let small = fixtures::with_group_column(&sub, y);
    let x = small.features().select_columns(&[0, 1]);
    for spec in [KernelSpec::Linear, KernelSpec::rbf(0.8)] {
        let k = gram_self(&x, &spec).map_err(|e| e.to_string())?.values;
        let alpha = svm_dual(&k, &yf, 0.5).ok_or("dual oracle failed")?;
        let b = recover_bias(&k, &yf, &alpha, 0.5, 0.5e-6);
        for opts in backends() {
            let m = fairsvm::train(&small, &[0, 1], spec, 0.5, &none, &opts).map_err(|e| e.to_string())?;
            let f = m.decision_function_subset(&x).map_err(|e| e.to_string())?;
            for i in 0..8 {
                let want: f64 = (0..8).map(|j| alpha[j] * yf[j] * k[(i, j)]).sum::<f64>() + b;
                worst = worst.max((f[i] - want).abs());
            }
        }
    }
    let el = t.elapsed();
    ensure(worst <= 1e-5, format!("decision value error {worst:.2e}"))?;
    within(Duration::from_secs(5), el)?;
    Ok(format!("max decision error {worst:.1e} over SMO and IPM, {:.2}s", el.as_secs_f64()))
}

// ---- dataset blocks (criteria 3, 4, 5, 6) ------------------------------

struct Block {
    name: String,
    confair: Vec<ResultRow>,
    full: Vec<ResultRow>,
    outcome: ExperimentOutcome,
    sensitive: usize,
    elapsed: Duration,
    sweep_elapsed: Duration,
}

fn run_block(name: &str) -> Result<Block, String> {
    let t = Instant::now();
    let cfg = ExperimentConfig::load(&root().join("configs").join(format!("{name}.json")), &[]).map_err(|e| e.to_string())?;
    let data = load_data(&cfg).map_err(|e| e.to_string())?;
    let outcome = run_experiment(&cfg, &data, false);
    let out_dir = Path::new(env!("CARGO_TARGET_TMPDIR")).join("acceptance").join(name);
    emit_outputs(&outcome, &cfg, &out_dir, true).map_err(|e| e.to_string())?;
    let confair = outcome.rows();

    // Full-feature FairSVM per seed at that seed's cross-validated (C, γ).
    let sweep = Instant::now();
    let mut full = Vec::new();
    let tolerances: Vec<f64> = if name == "adult" { vec![REPORTED_TOL] } else { TOLERANCES.to_vec() };
    for base in confair.iter().filter(|r| r.f_tol.is_none()) {
        let Some(c) = base.chosen_c else {
            return Err(format!("{name} seed {}: baseline failed: {:?}", base.run_seed, base.error));
        };
        let one = ExperimentConfig {
            method: Method::FairSvmFullFeatures,
            c_grid: vec![c],
            gamma_grid: base.chosen_gamma.map_or_else(|| cfg.gamma_grid.clone(), |g| vec![g]),
            f_tol_list: tolerances.clone(),
            seeds: vec![base.run_seed],
            runs: 1,
            ..cfg.clone()
        };
        full.extend(run_experiment(&one, &data, false).rows().into_iter().filter(|r| r.f_tol.is_some()));
    }
    Ok(Block {
        name: name.into(),
        confair,
        full,
        sensitive: data.train.sensitive_index(),
        outcome,
        elapsed: t.elapsed(),
        sweep_elapsed: sweep.elapsed(),
    })
}

fn feasibility(blocks: &[&Block]) -> Verdict {
    ensure(!blocks.is_empty(), "no COMPAS or German block")?;
    let mut checked = 0;
    let mut worst = f64::NEG_INFINITY;
    let mut time = Duration::ZERO;
    for b in blocks {
        time += b.sweep_elapsed;
        for tol in TOLERANCES {
            let rows: Vec<&ResultRow> =
                b.full.iter().chain(&b.confair).filter(|r| r.f_tol == Some(tol) && r.error.is_none()).collect();
            let converged: Vec<f64> = rows.iter().filter_map(|r| r.constraint_value).collect();
            ensure(!converged.is_empty(), format!("{} f_tol={tol}: no converged constrained model", b.name))?;
            for v in converged {
                worst = worst.max(v - tol);
                ensure(v <= tol + 1e-6, format!("{} f_tol={tol}: constraint {v:.3e}", b.name))?;
                checked += 1;
            }
        }
    }
    within(Duration::from_secs(30 * 60), time)?;
    Ok(format!(
        "{checked} converged models, max (constraint − f_tol) {worst:.1e}, full-feature sweep {:.0}s",
        time.as_secs_f64()
    ))
}

fn at_tol(rows: &[ResultRow], tol: Option<f64>) -> Vec<&ResultRow> {
    rows.iter().filter(|r| r.f_tol == tol && r.error.is_none()).collect()
}

fn band(b: &Block) -> Verdict {
    let (min_acc, max_deo) = match b.name.as_str() {
        "german" => (0.68, 0.08),
        "compas" => (0.64, 0.22),
        "adult" => (0.79, 0.06),
        other => return Err(format!("no band for {other}")),
    };
    let rows = at_tol(&b.confair, Some(REPORTED_TOL));
    ensure(!rows.is_empty(), "no successful CONFAIR rows")?;
    let acc: Vec<f64> = rows.iter().filter_map(|r| r.accuracy).collect();
    let dv: Vec<f64> = rows.iter().filter_map(|r| r.deo).collect();
    ensure(dv.len() == rows.len(), "DEO undefined on some seed")?;
    let (a, d) = (mean(&acc), mean(&dv));
    let mut detail = format!(
        "{}: acc {a:.3} (≥ {min_acc}), DEO {d:.3} (≤ {max_deo}) over {} seeds, {:.0}s",
        b.name,
        rows.len(),
        b.elapsed.as_secs_f64()
    );
    ensure(a >= min_acc && d <= max_deo, detail.clone())?;
    if b.name == "compas" {
        let base: BTreeMap<u64, Option<f64>> = at_tol(&b.confair, None).iter().map(|r| (r.run_seed, r.deo)).collect();
        let mut below = 0;
        for r in &rows {
            match (r.deo, base.get(&r.run_seed).copied().flatten()) {
                (Some(x), Some(y)) if x < y => below += 1,
                (x, y) => return Err(format!("{detail}; seed {}: DEO {x:?} vs baseline {y:?}", r.run_seed)),
            }
        }
        detail += &format!(", below baseline on {below}/{} seeds", rows.len());
    }
    within(Duration::from_secs(45 * 60), b.elapsed).map_err(|e| format!("{detail}; {e}"))?;
    Ok(detail)
}

fn ordering(b: &Block) -> Verdict {
    let base: BTreeMap<u64, f64> = at_tol(&b.confair, None).iter().filter_map(|r| Some((r.run_seed, r.deo?))).collect();
    let fair: BTreeMap<u64, f64> =
        at_tol(&b.full, Some(REPORTED_TOL)).iter().filter_map(|r| Some((r.run_seed, r.deo?))).collect();
    let seeds: Vec<u64> = fair.keys().filter(|s| base.contains_key(s)).copied().collect();
    ensure(!seeds.is_empty(), format!("{}: no seed with both DEOs", b.name))?;
    let fb: Vec<f64> = seeds.iter().map(|s| fair[s]).collect();
    let bb: Vec<f64> = seeds.iter().map(|s| base[s]).collect();
    let per_seed = seeds.iter().filter(|s| fair[*s] <= base[*s]).count();
    let (f, bm) = (mean(&fb), mean(&bb));
    let detail = format!(
        "{}: FairSVM DEO {f:.4} vs baseline {bm:.4} (not worse on {per_seed}/{} seeds)",
        b.name,
        seeds.len()
    );
    ensure(f <= bm, detail.clone())?;
    Ok(detail)
}

// ---- criterion 6 -------------------------------------------------------

fn importance_suite(german: Option<&Block>) -> Verdict {
    let (x, y) = fixtures::constant_column(3);
    let r = find_crit_feats(&SignRule { feature: 0, dim: 3 }, &x, &y, 7, 11).map_err(|e| e.to_string())?;
    ensure(r.importances[1] == 0.0, format!("constant column importance {}", r.importances[1]))?;

    let (x, y) = fixtures::balanced_sign(200, 5);
    let r = find_crit_feats(&SignRule { feature: 0, dim: 4 }, &x, &y, 20, 1).map_err(|e| e.to_string())?;
    let top = r.importances[0];
    ensure(r.order[0] == 0 && (0.4..=0.6).contains(&top), format!("sign fixture: order {:?}, importance {top}", r.order))?;

    let x = Matrix::from_rows(&[[1.0, 0.2], [-2.0, 0.1], [3.0, -0.3], [-0.5, 0.4]]);
    let y = [1, -1, 1, -1];
    let rule = SignRule { feature: 0, dim: 2 };
    let perms = fixtures::all_permutations(4);
    let mut scores = Matrix::zeros(2, perms.len());
    for j in 0..2 {
        let col = x.column(j);
        for (k, p) in perms.iter().enumerate() {
            let mut w = x.clone();
            w.set_column(j, &p.iter().map(|&i| col[i]).collect::<Vec<_>>());
            scores[(j, k)] = accuracy(&rule, &w, &y).map_err(|e| e.to_string())?;
        }
    }
    let r = ranking_from_scores(1.0, scores);
    // Matches 4, 2, 0 labels with probability 1/6, 4/6, 1/6.
    let exact = 1.0 - (1.0 + 4.0 * 0.5) / 6.0;
    let err = (r.importances[0] - exact).abs();
    ensure(err <= 1e-12 && r.importances[1] == 0.0, format!("exhaustive oracle off by {err:e}"))?;

    let owned;
    let german = match german {
        Some(b) => b,
        None => {
            let cfg = ExperimentConfig::load(&root().join("configs/german.json"), &[]).map_err(|e| e.to_string())?;
            let data = load_data(&cfg).map_err(|e| e.to_string())?;
            let outcome = run_experiment(&cfg, &data, true);
            owned = Block {
                name: "german".into(),
                confair: vec![],
                full: vec![],
                sensitive: data.train.sensitive_index(),
                outcome,
                elapsed: Duration::ZERO,
                sweep_elapsed: Duration::ZERO,
            };
            &owned
        }
    };
    let imps: Vec<f64> = german.outcome.rankings().iter().map(|r| r.importances[german.sensitive]).collect();
    ensure(!imps.is_empty(), "no German rankings")?;
    let m = mean(&imps);
    let name = &german.outcome.feature_names[german.sensitive];
    ensure((m - 0.001).abs() <= 0.05, format!("German {name} importance {m:.4}"))?;
    Ok(format!("fixtures exact; German {name} importance {m:.4} over {} seeds", imps.len()))
}

// ---- criterion 7 -------------------------------------------------------

fn c(tp: u64, fp: u64, tn: u64, fn_: u64) -> Counts {
    Counts { tp, fp, tn, fn_ }
}

fn metric_examples() -> Result<(), String> {
    let y = [1, 1, 1, 1, 1];
    let conf = confusion(&y, &y, &[0, 1, 0, 0, 1]).map_err(|e| e.to_string())?;
    ensure(conf == GroupConfusion { a: c(3, 0, 0, 0), b: c(2, 0, 0, 0) }, "all-correct counts")?;

    let conf = confusion(&[1, 1, -1, -1, 1, -1, 1, -1], &[1, -1, -1, 1, 1, -1, -1, -1], &[0, 0, 0, 0, 1, 1, 1, 1])
        .map_err(|e| e.to_string())?;
    ensure(conf.a == c(1, 1, 1, 1) && conf.b == c(1, 0, 2, 1), "hand-counted fixture")?;
    ensure(conf.accuracy() == Some(5.0 / 8.0), "hand-counted accuracy")?;

    let perfect = GroupConfusion { a: c(4, 0, 3, 0), b: c(2, 0, 5, 0) };
    ensure(deo(&perfect) == Some(0.0) && npv_diff(&perfect) == Some(0.0) && tnr_diff(&perfect) == Some(0.0), "perfect")?;
    ensure(deo(&GroupConfusion { a: c(3, 0, 0, 1), b: c(1, 0, 0, 1) }) == Some(0.25), "DEO 0.25")?;
    ensure(deo(&GroupConfusion { a: c(0, 2, 2, 0), b: c(1, 0, 0, 1) }).is_none(), "DEO undefined")?;
    ensure(npv_diff(&GroupConfusion { a: c(0, 0, 3, 1), b: c(0, 0, 2, 0) }) == Some(0.25), "NPV 0.25")?;
    let all_positive = GroupConfusion { a: c(3, 2, 0, 0), b: c(1, 4, 0, 0) };
    ensure(npv_diff(&all_positive).is_none() && deo(&all_positive) == Some(0.0), "NPV undefined")?;
    ensure(tnr_diff(&GroupConfusion { a: c(0, 2, 2, 0), b: c(0, 1, 3, 0) }) == Some(0.25), "TNR 0.25")?;
    ensure(tnr_diff(&GroupConfusion { a: c(0, 2, 2, 0), b: c(3, 0, 0, 1) }).is_none(), "TNR undefined")
}

fn metric_arithmetic() -> Verdict {
    let t = Instant::now();
    metric_examples()?;
    let counts = || (0u64..20, 0u64..20, 0u64..20, 0u64..20).prop_map(|(tp, fp, tn, fn_)| Counts { tp, fp, tn, fn_ });
    let mut runner = TestRunner::new(Config { cases: 1000, failure_persistence: None, ..Config::default() });
    runner
        .run(&(counts(), counts(), 1u64..6), |(a, b, k)| {
            let conf = GroupConfusion { a, b };
            let sw = conf.swapped();
            let dup = conf.scaled(k);
            prop_assert_eq!(deo(&conf), deo(&sw));
            prop_assert_eq!(npv_diff(&conf), npv_diff(&sw));
            prop_assert_eq!(tnr_diff(&conf), tnr_diff(&sw));
            prop_assert_eq!(deo(&conf), deo(&dup));
            prop_assert_eq!(npv_diff(&conf), npv_diff(&dup));
            prop_assert_eq!(tnr_diff(&conf), tnr_diff(&dup));
            prop_assert_eq!(conf.accuracy(), dup.accuracy());
            Ok(())
        })
        .map_err(|e| e.to_string())?;
    let el = t.elapsed();
    within(Duration::from_secs(5), el)?;
    Ok(format!("examples exact, 1000 swap/duplication cases, {:.2}s", el.as_secs_f64()))
}

// ---- criterion 8 -------------------------------------------------------

fn branches() -> Verdict {
    let t = Instant::now();
    let params = |seed| ConfairParams {
        kernel: KernelSpec::Linear,
        c: 1.0,
        constraint: FairnessConstraintSpec::equal_opportunity(0.01),
        permutations: 5,
        tau: 0.0,
        seed,
        train_options: TrainOptions::default(),
    };
    let cases = [
        ("sensitive-critical", fixtures::sensitive_critical(), vec![0, 1], 1, ConfairCase::SensitiveInCritical),
        ("proxy-covariate", fixtures::proxy_covariate(), vec![1, 2], 0, ConfairCase::CovariateInCritical),
        ("extrinsic", fixtures::extrinsic(), vec![0, 1], 1, ConfairCase::ExtrinsicBias),
    ];
    for (i, (name, ds, subset, s, want)) in cases.into_iter().enumerate() {
        let (train, test) = fixtures::halves(&ds);
        let baseline = fairsvm::train(&train, &subset, KernelSpec::Linear, 1.0, &FairnessConstraintSpec::none(), &TrainOptions::default())
            .map_err(|e| format!("{name}: {e}"))?;
        let res = run_confair(&train, &test, &baseline, s, &params(3 + i as u64)).map_err(|e| format!("{name}: {e}"))?;
        ensure(res.decision.case == want, format!("{name}: got {:?}", res.decision.case))?;
        ensure((res.qp_solves == 0) == (want == ConfairCase::ExtrinsicBias), format!("{name}: {} QP solves", res.qp_solves))?;
    }
    let el = t.elapsed();
    within(Duration::from_secs(60), el)?;
    Ok(format!("three branches hit, {:.2}s", el.as_secs_f64()))
}

// ---- criterion 9 -------------------------------------------------------

fn untimed(path: &Path) -> Result<Vec<Vec<String>>, String> {
    let mut r = csv::Reader::from_path(path).map_err(|e| e.to_string())?;
    let header: Vec<String> = r.headers().map_err(|e| e.to_string())?.iter().map(String::from).collect();
    ensure(header == RESULTS_HEADER, "unexpected results.csv header")?;
    let skip: Vec<usize> = header.iter().enumerate().filter(|(_, h)| TIMING_COLUMNS.contains(&h.as_str())).map(|(i, _)| i).collect();
    r.records()
        .map(|rec| {
            let rec = rec.map_err(|e| e.to_string())?;
            Ok(rec.iter().enumerate().filter(|(i, _)| !skip.contains(i)).map(|(_, v)| v.to_string()).collect())
        })
        .collect()
}

fn determinism() -> Verdict {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let cfg = serde_json::json!({
        "dataset": "german",
        "data_dir": root().join("data"),
        "c_grid": [0.1, 1],
        "gamma_grid": [0.1],
        "f_tol_list": [0, 0.1],
        "runs": 2,
        "seeds": [1, 2],
        "cv_folds": 3,
    });
    let path = dir.path().join("config.json");
    std::fs::write(&path, cfg.to_string()).map_err(|e| e.to_string())?;
    let mut tables = Vec::new();
    for out in ["a", "b"] {
        let status = Command::new(env!("CARGO_BIN_EXE_confair"))
            .args(["run", "--config", path.to_str().unwrap(), "--override", &format!("output_dir={out}")])
            .env("RUST_LOG", "warn")
            .output()
            .map_err(|e| e.to_string())?;
        ensure(status.status.success(), format!("confair run: {}", String::from_utf8_lossy(&status.stderr)))?;
        tables.push(untimed(&dir.path().join(out).join("results.csv"))?);
    }
    ensure(tables[0] == tables[1], "results.csv differs between runs")?;
    Ok(format!("{} rows identical across two binary runs", tables[0].len()))
}

// ---- driver ------------------------------------------------------------

fn main() -> ExitCode {
    let selected: Vec<String> = std::env::var("CONFAIR_ACCEPTANCE_DATASETS")
        .map(|v| v.split(',').map(|s| s.trim().to_lowercase()).filter(|s| !s.is_empty()).collect())
        .unwrap_or_else(|_| vec!["german".into(), "compas".into(), "adult".into()]);

    let mut results: Vec<(u8, Verdict)> = Vec::new();
    let mut report = |n: u8, v: Verdict| {
        match &v {
            Ok(d) => println!("criterion {n}: PASS  {d}"),
            Err(d) => println!("criterion {n}: FAIL  {d}"),
        }
        results.push((n, v));
    };

    report(1, guarded(qp_oracle));
    report(2, guarded(unconstrained_svm));

    let mut blocks = Vec::new();
    for name in &selected {
        eprintln!("running the {name} block");
        match guarded(|| run_block(name).map(|b| { blocks.push(b); String::new() })) {
            Ok(_) => {}
            Err(e) => report(4, Err(format!("{name} block: {e}"))),
        }
    }
    let by_name = |n: &str| blocks.iter().find(|b| b.name == n);

    let sweep: Vec<&Block> = ["compas", "german"].iter().filter_map(|n| by_name(n)).collect();
    report(3, guarded(|| feasibility(&sweep)));
    for b in &blocks {
        report(4, guarded(|| band(b)));
    }
    for b in &blocks {
        report(5, guarded(|| ordering(b)));
    }
    report(6, guarded(|| importance_suite(by_name("german"))));
    report(7, guarded(metric_arithmetic));
    report(8, guarded(branches));
    report(9, guarded(determinism));

    let failed: Vec<u8> = results.iter().filter(|(_, v)| v.is_err()).map(|(n, _)| *n).collect();
    println!("acceptance: {} checks, {} failed {:?}", results.len(), failed.len(), failed);
    let strict = std::env::var("CONFAIR_ACCEPTANCE_STRICT").is_ok_and(|v| v == "1");
    if failed.is_empty() || !strict { ExitCode::SUCCESS } else { ExitCode::FAILURE }
}
