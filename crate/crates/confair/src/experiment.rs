//! Split, cross-validate, train and evaluate over seeds and f_tol values.

use std::time::Instant;

use confair_core::confair::{decide, retrain, ConfairParams};
use confair_core::covar::{covariates_from, mle_covariance};
use confair_core::dataset::{self, Standardizer};
use confair_core::fairsvm::{self, FairSvmError};
use confair_core::kernel::gram_self;
use confair_core::{
    find_crit_feats, to_critical_set, ConfairCase, ConfairDecision, CovarianceMatrix, CovariateSet, CriticalFeatureSet,
    FairSvmModel, FairnessConstraintSpec, FairnessReport, FeatureRanking, FoldPlan, SplitMode, SplitSpec,
    TabularDataset, TrainOptions,
};
use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::config::{DataPaths, ExperimentConfig, KernelKind, Method};
use crate::dataio::{load_csv, DataError, Encoding, Schema};

/// Encoded training file and, when the dataset ships one, its test file.
pub struct LoadedData {
    pub paths: DataPaths,
    pub encoding: Encoding,
    pub train: TabularDataset,
    pub test: Option<TabularDataset>,
}

pub fn load_data(cfg: &ExperimentConfig) -> Result<LoadedData, DataError> {
    let paths = cfg.data_paths();
    let schema = Schema::from_path(&paths.schema)?;
    let (train, encoding) = load_csv(&paths.train, &schema)?;
    let test = paths.test.as_deref().map(|p| encoding.load(p)).transpose()?;
    Ok(LoadedData { paths, encoding, train, test })
}

/// Standardized train/test pair for one seed.
#[derive(Clone, Debug)]
pub struct Prepared {
    pub train: TabularDataset,
    pub test: TabularDataset,
    pub split_mode: SplitMode,
    /// Training rows before subsampling.
    pub train_rows_full: usize,
    pub standardizer: Standardizer,
}

pub fn prepare(cfg: &ExperimentConfig, data: &LoadedData, seed: u64) -> Result<Prepared, dataset::DatasetError> {
    let mode = if data.test.is_some() { SplitMode::ProvidedTest } else { SplitMode::RandomHoldout };
    let spec = SplitSpec { mode, holdout_fraction: cfg.holdout_fraction, seed, stratify: cfg.stratify };
    let (train, test) = dataset::split(&data.train, &spec, data.test.as_ref())?;
    let train_rows_full = train.n();
    let train = match cfg.subsample {
        Some(cap) => dataset::subsample(&train, cap, seed)?,
        None => train,
    };
    let standardizer = Standardizer::fit(&train);
    Ok(Prepared {
        train: standardizer.transform(&train),
        test: standardizer.transform(&test),
        split_mode: mode,
        train_rows_full,
        standardizer,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CvCell {
    pub c: f64,
    pub gamma: Option<f64>,
    pub mean_accuracy: Option<f64>,
    pub fold_accuracies: Vec<f64>,
    pub error: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CvOutcome {
    pub c: f64,
    pub gamma: Option<f64>,
    pub cells: Vec<CvCell>,
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum CvError {
    #[error("hyperparameter grid is empty")]
    EmptyGrid,
    #[error("every grid cell failed: {}", .0.join("; "))]
    AllFailed(Vec<String>),
}

fn gamma_of(kernel: KernelKind, gamma: f64) -> Option<f64> {
    (kernel == KernelKind::Rbf).then_some(gamma)
}

/// Grid search of the unconstrained SVM by mean validation accuracy. Ties go
/// to the smaller C, then the smaller γ.
pub fn select_hyperparams(
    train: &TabularDataset,
    folds: &FoldPlan,
    grid: &[(f64, f64)],
    kernel: KernelKind,
    opts: &TrainOptions,
) -> Result<CvOutcome, CvError> {
    if grid.is_empty() {
        return Err(CvError::EmptyGrid);
    }
    let all: Vec<usize> = (0..train.d()).collect();
    let parts: Vec<(Vec<usize>, Vec<usize>)> = (0..folds.k).map(|f| folds.partition(f)).collect();
    let mut gammas: Vec<f64> = grid.iter().map(|g| g.1).collect();
    gammas.sort_by(f64::total_cmp);
    gammas.dedup_by(|a, b| a.total_cmp(b).is_eq());

    let mut cells = Vec::with_capacity(grid.len());
    for gamma in gammas {
        let spec = kernel.spec(gamma);
        let k_full = match gram_self(train.features(), &spec) {
            Ok(k) => k,
            Err(e) => {
                for &(c, g) in grid.iter().filter(|g| g.1.total_cmp(&gamma).is_eq()) {
                    cells.push(CvCell { c, gamma: gamma_of(kernel, g), mean_accuracy: None, fold_accuracies: vec![], error: Some(e.to_string()) });
                }
                continue;
            }
        };
        let cs: Vec<f64> = grid.iter().filter(|g| g.1.total_cmp(&gamma).is_eq()).map(|g| g.0).collect();
        let jobs: Vec<(usize, usize)> = (0..cs.len()).flat_map(|ci| (0..folds.k).map(move |f| (ci, f))).collect();
        let results: Vec<Result<f64, FairSvmError>> = jobs
            .par_iter()
            .map(|&(ci, f)| {
                let (tr, va) = &parts[f];
                let k = k_full.values.select(tr, tr);
                let x = train.features().select_rows(tr);
                let labels: Vec<i8> = tr.iter().map(|&i| train.labels()[i]).collect();
                let groups: Vec<u8> = tr.iter().map(|&i| train.sensitive_values()[i]).collect();
                let model = fairsvm::train_on_gram(
                    &k, &x, &labels, &groups, spec, &all, train.d(), cs[ci], &FairnessConstraintSpec::none(), opts,
                )?;
                let correct = va
                    .iter()
                    .filter(|&&v| {
                        let row = k_full.row(v);
                        let f: f64 = model
                            .support_indices
                            .iter()
                            .zip(&model.dual_coefs)
                            .map(|(&s, &a)| a * row[tr[s]])
                            .sum::<f64>()
                            + model.bias;
                        (if f >= 0.0 { 1 } else { -1 }) == train.labels()[v]
                    })
                    .count();
                Ok(correct as f64 / va.len() as f64)
            })
            .collect();
        for (ci, &c) in cs.iter().enumerate() {
            let rs = &results[ci * folds.k..(ci + 1) * folds.k];
            let error = rs.iter().find_map(|r| r.as_ref().err().map(|e| e.to_string()));
            let fold_accuracies: Vec<f64> = rs.iter().filter_map(|r| r.as_ref().ok().copied()).collect();
            let mean_accuracy = error.is_none().then(|| fold_accuracies.iter().sum::<f64>() / folds.k as f64);
            cells.push(CvCell { c, gamma: gamma_of(kernel, gamma), mean_accuracy, fold_accuracies, error });
        }
    }
    cells.sort_by(|a, b| a.c.total_cmp(&b.c).then(a.gamma.unwrap_or(0.0).total_cmp(&b.gamma.unwrap_or(0.0))));
    let mut best: Option<&CvCell> = None;
    for cell in &cells {
        if let Some(acc) = cell.mean_accuracy {
            if best.map_or(true, |b| acc > b.mean_accuracy.unwrap_or(f64::NEG_INFINITY)) {
                best = Some(cell);
            }
        }
    }
    match best {
        Some(b) => Ok(CvOutcome { c: b.c, gamma: b.gamma, cells: cells.clone() }),
        None => Err(CvError::AllFailed(
            cells.iter().map(|c| format!("C={} gamma={:?}: {}", c.c, c.gamma, c.error.as_deref().unwrap_or("?"))).collect(),
        )),
    }
}

/// One line of results.csv.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ResultRow {
    pub dataset: String,
    pub method: String,
    pub f_tol: Option<f64>,
    pub kernel_kind: String,
    pub run_seed: u64,
    pub accuracy: Option<f64>,
    pub deo: Option<f64>,
    pub npv_diff: Option<f64>,
    pub tnr_diff: Option<f64>,
    pub chosen_c: Option<f64>,
    pub chosen_gamma: Option<f64>,
    pub confair_case: Option<String>,
    pub constraint_value: Option<f64>,
    pub n_support: Option<usize>,
    pub error: Option<String>,
    pub wall_time_s: f64,
}

impl ResultRow {
    fn failed(base: &ResultRow, error: String) -> Self {
        ResultRow { error: Some(error), ..base.clone() }
    }

    fn with_report(mut self, r: &FairnessReport) -> Self {
        self.accuracy = Some(r.accuracy);
        self.deo = r.deo;
        self.npv_diff = r.npv_diff;
        self.tnr_diff = r.tnr_diff;
        self
    }
}

/// Rank and covariate results for one seed.
#[derive(Clone, Debug, Serialize)]
pub struct Analysis {
    pub ranking: FeatureRanking,
    pub critical: CriticalFeatureSet,
    pub covariance: CovarianceMatrix,
    pub covariates: CovariateSet,
    pub decision: Option<ConfairDecision>,
}

#[derive(Clone, Debug, Serialize)]
pub struct SeedOutcome {
    pub seed: u64,
    pub train_rows: Option<usize>,
    pub train_rows_full: Option<usize>,
    pub test_rows: Option<usize>,
    pub split_mode: Option<SplitMode>,
    pub cv: Option<CvOutcome>,
    pub analysis: Option<Analysis>,
    pub rows: Vec<ResultRow>,
    #[serde(skip)]
    pub models: Vec<(String, FairSvmModel)>,
    #[serde(skip)]
    pub standardizer: Option<Standardizer>,
    pub errors: Vec<String>,
}

fn evaluate(model: &FairSvmModel, test: &TabularDataset) -> Result<FairnessReport, String> {
    let pred = model.predict(test.features()).map_err(|e| e.to_string())?;
    FairnessReport::evaluate(test.labels(), &pred, test.sensitive_values()).map_err(|e| e.to_string())
}

fn tol_tag(f: f64) -> String {
    format!("{f}").replace('.', "p")
}

/// Runs one seed. With `rank_only` no constrained model is trained and no
/// rows are produced.
pub fn run_seed(cfg: &ExperimentConfig, data: &LoadedData, seed: u64, rank_only: bool) -> SeedOutcome {
    let name = data.paths.name.clone();
    let mut out = SeedOutcome {
        seed,
        train_rows: None,
        train_rows_full: None,
        test_rows: None,
        split_mode: None,
        cv: None,
        analysis: None,
        rows: Vec::new(),
        models: Vec::new(),
        standardizer: None,
        errors: Vec::new(),
    };
    let template = ResultRow {
        dataset: name,
        method: Method::UnconstrainedSvm.as_str().into(),
        f_tol: None,
        kernel_kind: format!("{:?}", cfg.kernel).to_lowercase(),
        run_seed: seed,
        accuracy: None,
        deo: None,
        npv_diff: None,
        tnr_diff: None,
        chosen_c: None,
        chosen_gamma: None,
        confair_case: None,
        constraint_value: None,
        n_support: None,
        error: None,
        wall_time_s: 0.0,
    };
    let method_rows = |base: &ResultRow| -> Vec<ResultRow> {
        if cfg.method == Method::UnconstrainedSvm {
            return Vec::new();
        }
        cfg.f_tol_list
            .iter()
            .map(|&f| ResultRow { method: cfg.method.as_str().into(), f_tol: Some(f), ..base.clone() })
            .collect()
    };
    let fail_all = |out: &mut SeedOutcome, base: &ResultRow, msg: String| {
        log::error!("seed {seed}: {msg}");
        out.errors.push(msg.clone());
        if !rank_only {
            out.rows.push(ResultRow::failed(base, msg.clone()));
            out.rows.extend(method_rows(base).iter().map(|r| ResultRow::failed(r, msg.clone())));
        }
    };

    let prep = match prepare(cfg, data, seed) {
        Ok(p) => p,
        Err(e) => {
            fail_all(&mut out, &template, format!("split: {e}"));
            return out;
        }
    };
    out.train_rows = Some(prep.train.n());
    out.train_rows_full = Some(prep.train_rows_full);
    out.test_rows = Some(prep.test.n());
    out.split_mode = Some(prep.split_mode);
    out.standardizer = Some(prep.standardizer.clone());
    let (train, test) = (&prep.train, &prep.test);
    let opts = TrainOptions::default();

    let grid = cfg.grid();
    let (c, gamma) = if grid.len() == 1 {
        grid[0]
    } else {
        let cv = dataset::make_folds(train, cfg.cv_folds, seed)
            .map_err(|e| e.to_string())
            .and_then(|folds| select_hyperparams(train, &folds, &grid, cfg.kernel, &opts).map_err(|e| e.to_string()));
        match cv {
            Ok(cv) => {
                let chosen = (cv.c, cv.gamma.unwrap_or(f64::NAN));
                out.cv = Some(cv);
                chosen
            }
            Err(e) => {
                fail_all(&mut out, &template, format!("cross-validation: {e}"));
                return out;
            }
        }
    };
    let kernel = cfg.kernel.spec(gamma);
    let base = ResultRow { chosen_c: Some(c), chosen_gamma: gamma_of(cfg.kernel, gamma), ..template };
    log::info!("seed {seed}: C={c} gamma={gamma} on {} training rows", train.n());

    let all: Vec<usize> = (0..train.d()).collect();
    let t0 = Instant::now();
    let baseline = match fairsvm::train(train, &all, kernel, c, &FairnessConstraintSpec::none(), &opts) {
        Ok(m) => m,
        Err(e) => {
            fail_all(&mut out, &base, format!("baseline training: {e}"));
            return out;
        }
    };
    let baseline_report = evaluate(&baseline, test);
    let baseline_row = match &baseline_report {
        Ok(r) => ResultRow {
            n_support: Some(baseline.num_support_vectors()),
            wall_time_s: t0.elapsed().as_secs_f64(),
            ..base.clone()
        }
        .with_report(r),
        Err(e) => ResultRow::failed(&base, e.clone()),
    };

    let analysis = (|| -> Result<Analysis, String> {
        let ranking = find_crit_feats(&baseline, test.features(), test.labels(), cfg.k_permutations, seed)
            .map_err(|e| e.to_string())?;
        let critical = to_critical_set(&ranking, cfg.tau);
        let covariance = mle_covariance(train).map_err(|e| e.to_string())?;
        let covariates = covariates_from(&covariance, train.sensitive_index());
        Ok(Analysis { ranking, critical, covariance, covariates, decision: None })
    })();
    let mut analysis = match analysis {
        Ok(a) => Some(a),
        Err(e) => {
            out.errors.push(format!("feature analysis: {e}"));
            None
        }
    };
    if rank_only {
        out.analysis = analysis;
        if cfg.save_models {
            out.models.push((format!("baseline_seed{seed}"), baseline));
        }
        return out;
    }
    out.rows.push(baseline_row.clone());

    let decision = match (cfg.method, &analysis) {
        (Method::Confair, Some(a)) => match decide(&a.critical, &a.covariates, train.sensitive_index()) {
            Ok(d) => Some(Ok(d)),
            Err(e) => Some(Err(e.to_string())),
        },
        (Method::Confair, None) => Some(Err("feature analysis failed".to_string())),
        _ => None,
    };
    if let (Some(a), Some(Ok(d))) = (analysis.as_mut(), &decision) {
        a.decision = Some(d.clone());
    }

    for row in method_rows(&base) {
        let f_tol = row.f_tol.unwrap_or(0.0);
        let constraint = FairnessConstraintSpec::new(cfg.criterion, f_tol, cfg.constraint_mode);
        let t = Instant::now();
        let trained: Result<Option<FairSvmModel>, String> = match (&cfg.method, &decision) {
            (Method::FairSvmFullFeatures, _) => {
                fairsvm::train(train, &all, kernel, c, &constraint, &opts).map(Some).map_err(|e| e.to_string())
            }
            (Method::Confair, Some(Ok(d))) if d.case == ConfairCase::ExtrinsicBias => Ok(None),
            (Method::Confair, Some(Ok(d))) => {
                let params = ConfairParams {
                    kernel,
                    c,
                    constraint,
                    permutations: cfg.k_permutations,
                    tau: cfg.tau,
                    seed,
                    train_options: opts,
                };
                retrain(train, d, &params).map(Some).map_err(|e| e.to_string())
            }
            (_, Some(Err(e))) => Err(e.clone()),
            _ => Err("unsupported method".into()),
        };
        let case = match &decision {
            Some(Ok(d)) => Some(d.case.as_str().to_string()),
            _ => None,
        };
        let row = ResultRow { confair_case: case, ..row };
        let row = match trained {
            Ok(Some(model)) => {
                let r = match evaluate(&model, test) {
                    Ok(rep) => ResultRow {
                        constraint_value: model.constraint_value,
                        n_support: Some(model.num_support_vectors()),
                        wall_time_s: t.elapsed().as_secs_f64(),
                        ..row
                    }
                    .with_report(&rep),
                    Err(e) => ResultRow::failed(&row, e),
                };
                if cfg.save_models {
                    out.models.push((format!("{}_ftol{}_seed{seed}", cfg.method.as_str(), tol_tag(f_tol)), model));
                }
                r
            }
            Ok(None) => ResultRow {
                accuracy: baseline_row.accuracy,
                deo: baseline_row.deo,
                npv_diff: baseline_row.npv_diff,
                tnr_diff: baseline_row.tnr_diff,
                n_support: baseline_row.n_support,
                error: baseline_row.error.clone(),
                wall_time_s: t.elapsed().as_secs_f64(),
                ..row
            },
            Err(e) => {
                log::warn!("seed {seed}, f_tol {f_tol}: {e}");
                ResultRow { wall_time_s: t.elapsed().as_secs_f64(), ..ResultRow::failed(&row, e) }
            }
        };
        out.rows.push(row);
    }
    if cfg.save_models {
        out.models.insert(0, (format!("baseline_seed{seed}"), baseline));
    }
    out.analysis = analysis;
    out
}

/// Everything a run produces before it is written out.
pub struct ExperimentOutcome {
    pub paths: DataPaths,
    pub feature_names: Vec<String>,
    pub seeds: Vec<SeedOutcome>,
}

impl ExperimentOutcome {
    pub fn rows(&self) -> Vec<ResultRow> {
        self.seeds.iter().flat_map(|s| s.rows.iter().cloned()).collect()
    }

    pub fn all_failed(&self) -> bool {
        self.seeds.iter().all(|s| s.rows.iter().all(|r| r.error.is_some()))
    }

    pub fn rankings(&self) -> Vec<&FeatureRanking> {
        self.seeds.iter().filter_map(|s| s.analysis.as_ref().map(|a| &a.ranking)).collect()
    }
}

/// Runs every seed in the current rayon pool; results keep seed order.
pub fn run_experiment(cfg: &ExperimentConfig, data: &LoadedData, rank_only: bool) -> ExperimentOutcome {
    let seeds = cfg.seeds.par_iter().map(|&s| run_seed(cfg, data, s, rank_only)).collect();
    ExperimentOutcome { paths: data.paths.clone(), feature_names: data.encoding.feature_names.clone(), seeds }
}

#[cfg(test)]
mod tests {
    use super::*;
    use confair_core::Matrix;

    fn line(n: usize) -> TabularDataset {
        // x0 separates the classes with margin; x1 is the group.
        let x = Matrix::from_fn(n, 2, |i, j| {
            let pos = i % 2 == 0;
            if j == 0 {
                (if pos { 1.0 } else { -1.0 }) * (1.0 + (i / 2) as f64 * 0.1)
            } else {
                ((i / 2) % 2) as f64
            }
        });
        let y = (0..n).map(|i| if i % 2 == 0 { 1 } else { -1 }).collect();
        TabularDataset::new(x, y, 1, vec!["x".into(), "s".into()], vec![0]).unwrap()
    }

    #[test]
    fn single_cell_grid_returns_it() {
        let ds = line(20);
        let folds = dataset::make_folds(&ds, 5, 1).unwrap();
        let out = select_hyperparams(&ds, &folds, &[(3.0, 0.5)], KernelKind::Rbf, &TrainOptions::default()).unwrap();
        assert_eq!((out.c, out.gamma), (3.0, Some(0.5)));
    }

    #[test]
    fn ties_prefer_smaller_c_then_gamma() {
        let ds = line(20);
        let folds = dataset::make_folds(&ds, 5, 1).unwrap();
        let grid = [(10.0, 0.5), (1.0, 0.5), (1.0, 0.1), (10.0, 0.1)];
        let out = select_hyperparams(&ds, &folds, &grid, KernelKind::Linear, &TrainOptions::default()).unwrap();
        assert!(out.cells.iter().all(|c| c.mean_accuracy == Some(1.0)));
        assert_eq!(out.c, 1.0);
        let out = select_hyperparams(&ds, &folds, &grid, KernelKind::Rbf, &TrainOptions::default()).unwrap();
        assert_eq!((out.c, out.gamma), (1.0, Some(0.1)));
    }

    #[test]
    fn empty_grid_is_an_error() {
        let ds = line(10);
        let folds = dataset::make_folds(&ds, 2, 1).unwrap();
        assert_eq!(select_hyperparams(&ds, &folds, &[], KernelKind::Rbf, &TrainOptions::default()), Err(CvError::EmptyGrid));
    }
}
