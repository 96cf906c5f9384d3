//! results.csv, results.json, summary.csv, importances.csv, manifest.json,
//! covariance CSVs and saved models.

use std::fs;
use std::path::{Path, PathBuf};

use confair_core::{CovarianceMatrix, FeatureRanking};
use serde::Serialize;
use serde_json::json;

use crate::config::ExperimentConfig;
use crate::experiment::{ExperimentOutcome, ResultRow};
use crate::model_io::ModelDocument;

/// Frozen column order of results.csv.
pub const RESULTS_HEADER: [&str; 16] = [
    "dataset",
    "method",
    "f_tol",
    "kernel_kind",
    "run_seed",
    "accuracy",
    "deo",
    "npv_diff",
    "tnr_diff",
    "chosen_C",
    "chosen_gamma",
    "confair_case",
    "constraint_value",
    "n_support",
    "error",
    "wall_time_s",
];

/// Marker written for metrics whose conditioning set is empty.
pub const UNDEFINED: &str = "NA";

/// Columns that vary between identical runs.
pub const TIMING_COLUMNS: [&str; 1] = ["wall_time_s"];

pub const SUMMARY_HEADER: [&str; 13] = [
    "dataset",
    "method",
    "f_tol",
    "runs",
    "accuracy_mean",
    "accuracy_std",
    "deo_mean",
    "deo_std",
    "npv_diff_mean",
    "npv_diff_std",
    "tnr_diff_mean",
    "tnr_diff_std",
    "failed_runs",
];

/// Shortest round-trip text, switching to exponent form for tiny or huge values.
pub fn fmt_f64(x: f64) -> String {
    let a = x.abs();
    if a != 0.0 && !(1e-5..1e15).contains(&a) {
        format!("{x:e}")
    } else {
        x.to_string()
    }
}

fn num(v: Option<f64>) -> String {
    v.map_or_else(String::new, fmt_f64)
}

fn metric(v: Option<f64>, errored: bool) -> String {
    match v {
        Some(x) => fmt_f64(x),
        None if errored => String::new(),
        None => UNDEFINED.into(),
    }
}

fn record(r: &ResultRow) -> Vec<String> {
    let e = r.error.is_some();
    vec![
        r.dataset.clone(),
        r.method.clone(),
        num(r.f_tol),
        r.kernel_kind.clone(),
        r.run_seed.to_string(),
        metric(r.accuracy, e),
        metric(r.deo, e),
        metric(r.npv_diff, e),
        metric(r.tnr_diff, e),
        num(r.chosen_c),
        num(r.chosen_gamma),
        r.confair_case.clone().unwrap_or_default(),
        num(r.constraint_value),
        r.n_support.map_or_else(String::new, |n| n.to_string()),
        r.error.clone().unwrap_or_default(),
        format!("{:.3}", r.wall_time_s),
    ]
}

fn write_csv(path: &Path, header: &[&str], records: impl IntoIterator<Item = Vec<String>>) -> anyhow::Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(header)?;
    for r in records {
        w.write_record(&r)?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_results_csv(path: &Path, rows: &[ResultRow]) -> anyhow::Result<()> {
    write_csv(path, &RESULTS_HEADER, rows.iter().map(record))
}

/// Mean and sample standard deviation (0 for a single value).
pub fn mean_std(values: &[f64]) -> (f64, f64) {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    if values.len() < 2 {
        return (mean, 0.0);
    }
    let var = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (n - 1.0);
    (mean, var.sqrt())
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SummaryRow {
    pub dataset: String,
    pub method: String,
    pub f_tol: Option<f64>,
    pub runs: usize,
    /// `(mean, std)`; `None` unless every run produced the metric.
    pub accuracy: Option<(f64, f64)>,
    pub deo: Option<(f64, f64)>,
    pub npv_diff: Option<(f64, f64)>,
    pub tnr_diff: Option<(f64, f64)>,
    pub failed_runs: usize,
}

/// One aggregate row per (method, f_tol), in order of first appearance.
pub fn summarize(rows: &[ResultRow]) -> Vec<SummaryRow> {
    let mut keys: Vec<(String, String, Option<f64>)> = Vec::new();
    for r in rows {
        let k = (r.dataset.clone(), r.method.clone(), r.f_tol);
        if !keys.contains(&k) {
            keys.push(k);
        }
    }
    keys.into_iter()
        .map(|(dataset, method, f_tol)| {
            let group: Vec<&ResultRow> =
                rows.iter().filter(|r| r.dataset == dataset && r.method == method && r.f_tol == f_tol).collect();
            let agg = |get: fn(&ResultRow) -> Option<f64>| {
                let vals: Vec<f64> = group.iter().filter_map(|r| get(r)).collect();
                (vals.len() == group.len()).then(|| mean_std(&vals))
            };
            SummaryRow {
                runs: group.len(),
                accuracy: agg(|r| r.accuracy),
                deo: agg(|r| r.deo),
                npv_diff: agg(|r| r.npv_diff),
                tnr_diff: agg(|r| r.tnr_diff),
                failed_runs: group.iter().filter(|r| r.error.is_some()).count(),
                dataset,
                method,
                f_tol,
            }
        })
        .collect()
}

fn summary_record(s: &SummaryRow) -> Vec<String> {
    let pair = |v: Option<(f64, f64)>| match v {
        Some((m, sd)) => [fmt_f64(m), fmt_f64(sd)],
        None => [UNDEFINED.into(), UNDEFINED.into()],
    };
    let mut r = vec![s.dataset.clone(), s.method.clone(), num(s.f_tol), s.runs.to_string()];
    for v in [s.accuracy, s.deo, s.npv_diff, s.tnr_diff] {
        r.extend(pair(v));
    }
    r.push(s.failed_runs.to_string());
    r
}

/// Per-feature mean importance and the standard deviation of the pooled
/// `runs × K` permutation drops.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PooledImportance {
    pub feature_name: String,
    pub mean_importance: f64,
    pub std: f64,
}

pub fn pool_importances(rankings: &[&FeatureRanking], names: &[String]) -> Vec<PooledImportance> {
    let Some(first) = rankings.first() else { return Vec::new() };
    (0..first.num_features())
        .map(|j| {
            let drops: Vec<f64> = rankings
                .iter()
                .flat_map(|r| {
                    let s = &r.per_feature_scores;
                    (0..s.ncols()).map(move |k| r.baseline_accuracy - s[(j, k)])
                })
                .collect();
            let mean_importance = rankings.iter().map(|r| r.importances[j]).sum::<f64>() / rankings.len() as f64;
            PooledImportance {
                feature_name: names.get(j).cloned().unwrap_or_else(|| format!("f{j}")),
                mean_importance,
                std: mean_std(&drops).1,
            }
        })
        .collect()
}

pub fn write_importances(path: &Path, pooled: &[PooledImportance]) -> anyhow::Result<()> {
    write_csv(
        path,
        &["feature_name", "mean_importance", "std"],
        pooled.iter().map(|p| vec![p.feature_name.clone(), fmt_f64(p.mean_importance), fmt_f64(p.std)]),
    )
}

pub fn write_covariance(path: &Path, cov: &CovarianceMatrix, names: &[String]) -> anyhow::Result<()> {
    let mut header = vec!["feature"];
    header.extend(names.iter().map(String::as_str));
    let v = &cov.values;
    write_csv(
        path,
        &header,
        (0..v.nrows()).map(|i| {
            let mut r = vec![names[i].clone()];
            r.extend(v.row(i).iter().map(|&x| fmt_f64(x)));
            r
        }),
    )
}

fn names_of(idx: &[usize], names: &[String]) -> Vec<String> {
    idx.iter().map(|&j| names[j].clone()).collect()
}

/// Writes every output file of a run or rank invocation into `dir` and
/// returns the paths written.
pub fn emit_outputs(
    outcome: &ExperimentOutcome,
    cfg: &ExperimentConfig,
    dir: &Path,
    include_results: bool,
) -> anyhow::Result<Vec<PathBuf>> {
    fs::create_dir_all(dir)?;
    let mut written = Vec::new();
    let names = &outcome.feature_names;

    if include_results {
        let rows = outcome.rows();
        let p = dir.join("results.csv");
        write_results_csv(&p, &rows)?;
        written.push(p);
        let p = dir.join("results.json");
        fs::write(&p, serde_json::to_string_pretty(&rows)?)?;
        written.push(p);
        let summary = summarize(&rows);
        let p = dir.join("summary.csv");
        write_csv(&p, &SUMMARY_HEADER, summary.iter().map(summary_record))?;
        written.push(p);
    }

    let rankings = outcome.rankings();
    let p = dir.join("importances.csv");
    write_importances(&p, &pool_importances(&rankings, names))?;
    written.push(p);

    for s in &outcome.seeds {
        if let Some(a) = &s.analysis {
            let p = dir.join(format!("covariance_seed{}.csv", s.seed));
            write_covariance(&p, &a.covariance, names)?;
            written.push(p);
        }
    }

    if cfg.save_models {
        let mdir = dir.join("models");
        fs::create_dir_all(&mdir)?;
        for s in &outcome.seeds {
            for (stem, model) in &s.models {
                let p = mdir.join(format!("{stem}.json"));
                ModelDocument::new(model.clone(), names.clone(), s.standardizer.clone()).save(&p)?;
                written.push(p);
            }
        }
    }

    let seeds: Vec<serde_json::Value> = outcome
        .seeds
        .iter()
        .map(|s| {
            let analysis = s.analysis.as_ref().map(|a| {
                json!({
                    "importances": a.ranking.importances,
                    "importance_std_over_k": a.ranking.std_over_k,
                    "baseline_accuracy": a.ranking.baseline_accuracy,
                    "ranking": names_of(&a.ranking.order, names),
                    "critical_features": names_of(&a.critical.indices, names),
                    "covariates": names_of(&a.covariates.indices, names),
                    "covariate_values": a.covariates.covariances,
                    "decision": a.decision.as_ref().map(|d| json!({
                        "case": d.case.as_str(),
                        "effective_features": names_of(&d.effective_features, names),
                        "training_features": names_of(&d.training_features, names),
                        "covariates_used": names_of(&d.covariates_used, names),
                    })),
                    "covariance_file": format!("covariance_seed{}.csv", s.seed),
                })
            });
            json!({
                "seed": s.seed,
                "split_mode": s.split_mode,
                "train_rows": s.train_rows,
                "train_rows_before_subsample": s.train_rows_full,
                "test_rows": s.test_rows,
                "cross_validation": s.cv,
                "analysis": analysis,
                "models": s.models.iter().map(|(stem, _)| format!("models/{stem}.json")).collect::<Vec<_>>(),
                "errors": s.errors,
            })
        })
        .collect();
    let manifest = json!({
        "tool": env!("CARGO_PKG_NAME"),
        "version": env!("CARGO_PKG_VERSION"),
        "config": cfg,
        "data": outcome.paths,
        "feature_names": names,
        "seeds": cfg.seeds,
        "subsample_cap": cfg.subsample,
        "critical_set_split": "the evaluation train/test split of each seed",
        "results_header": RESULTS_HEADER,
        "runs": seeds,
        "files": written.iter().filter_map(|p| p.file_name()).map(|f| f.to_string_lossy().into_owned()).collect::<Vec<_>>(),
    });
    let p = dir.join("manifest.json");
    fs::write(&p, serde_json::to_string_pretty(&manifest)?)?;
    written.push(p);
    Ok(written)
}
