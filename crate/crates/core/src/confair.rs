//! Critical features, covariates, and the retraining decision.

use alloc::vec::Vec;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::covar::{find_covariates, CovarError, CovariateSet};
use crate::dataset::TabularDataset;
use crate::fairsvm::{self, FairSvmError, FairSvmModel, FairnessConstraintSpec, TrainOptions};
use crate::featrank::{find_crit_feats, to_critical_set, Classifier, CriticalFeatureSet, FeatRankError, FeatureRanking, PredictError};
use crate::kernel::KernelSpec;
use crate::matrix::Matrix;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ConfairCase {
    SensitiveInCritical,
    CovariateInCritical,
    ExtrinsicBias,
}

impl ConfairCase {
    pub fn as_str(&self) -> &'static str {
        match self {
            ConfairCase::SensitiveInCritical => "sensitive_in_critical",
            ConfairCase::CovariateInCritical => "covariate_in_critical",
            ConfairCase::ExtrinsicBias => "extrinsic_bias",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConfairDecision {
    pub case: ConfairCase,
    /// The critical set, or its intersection with the covariates.
    pub effective_features: Vec<usize>,
    /// Columns the retrained model uses: `effective_features`, plus the
    /// sensitive column in the covariate case. Empty for extrinsic bias.
    pub training_features: Vec<usize>,
    pub covariates_used: Vec<usize>,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConfairParams {
    pub kernel: KernelSpec,
    pub c: f64,
    pub constraint: FairnessConstraintSpec,
    pub permutations: usize,
    pub tau: f64,
    pub seed: u64,
    pub train_options: TrainOptions,
}

/// Either the caller's baseline, untouched, or the retrained model.
pub enum ConfairModel<'a> {
    Baseline(&'a dyn Classifier),
    Retrained(FairSvmModel),
}

impl ConfairModel<'_> {
    pub fn retrained(&self) -> Option<&FairSvmModel> {
        match self {
            ConfairModel::Retrained(m) => Some(m),
            ConfairModel::Baseline(_) => None,
        }
    }
}

impl core::fmt::Debug for ConfairModel<'_> {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        match self {
            ConfairModel::Baseline(_) => f.write_str("Baseline"),
            ConfairModel::Retrained(m) => f.debug_tuple("Retrained").field(m).finish(),
        }
    }
}

impl Classifier for ConfairModel<'_> {
    fn input_dim(&self) -> usize {
        match self {
            ConfairModel::Baseline(b) => b.input_dim(),
            ConfairModel::Retrained(m) => m.input_dim,
        }
    }

    fn predict(&self, x: &Matrix) -> Result<Vec<i8>, PredictError> {
        match self {
            ConfairModel::Baseline(b) => b.predict(x),
            ConfairModel::Retrained(m) => Classifier::predict(m, x),
        }
    }
}

#[derive(Debug)]
pub struct ConfairResult<'a> {
    pub model: ConfairModel<'a>,
    pub decision: ConfairDecision,
    pub ranking: FeatureRanking,
    pub critical: CriticalFeatureSet,
    pub covariates: CovariateSet,
    /// Number of constrained trainings performed.
    pub qp_solves: usize,
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ConfairError {
    #[error("sensitive index {index} out of range for {d} features")]
    SensitiveIndex { index: usize, d: usize },
    #[error("feature ranking failed: {0}")]
    Ranking(#[from] FeatRankError),
    #[error("covariate search failed: {0}")]
    Covariates(#[from] CovarError),
    #[error("covariate case selected but no covariate is critical")]
    EmptyIntersection,
    #[error("retraining in case {case} failed: {source}")]
    Train { case: &'static str, source: FairSvmError },
}

/// Picks the retraining case from the critical set and the covariates of `s`.
pub fn decide(critical: &CriticalFeatureSet, covariates: &CovariateSet, s: usize) -> Result<ConfairDecision, ConfairError> {
    let (case, effective, training) = if critical.contains(s) {
        (ConfairCase::SensitiveInCritical, critical.indices.clone(), critical.indices.clone())
    } else if !covariates.is_empty() && critical.indices.iter().any(|&j| covariates.contains(j)) {
        let inter: Vec<usize> = critical.indices.iter().copied().filter(|&j| covariates.contains(j)).collect();
        if inter.is_empty() {
            return Err(ConfairError::EmptyIntersection);
        }
        let mut with_s = inter.clone();
        with_s.push(s);
        (ConfairCase::CovariateInCritical, inter, with_s)
    } else {
        (ConfairCase::ExtrinsicBias, Vec::new(), Vec::new())
    };
    let covariates_used = effective.iter().copied().filter(|&j| covariates.contains(j)).collect();
    Ok(ConfairDecision { case, effective_features: effective, training_features: training, covariates_used })
}

/// Constrained training on `decision.training_features`.
pub fn retrain(train: &TabularDataset, decision: &ConfairDecision, params: &ConfairParams) -> Result<FairSvmModel, ConfairError> {
    fairsvm::train(train, &decision.training_features, params.kernel, params.c, &params.constraint, &params.train_options)
        .map_err(|source| ConfairError::Train { case: decision.case.as_str(), source })
}

/// Ranks features with the baseline, finds covariates of `s`, and retrains
/// under the fairness constraint when `s` or one of its covariates is
/// critical.
pub fn run_confair<'a>(
    train: &TabularDataset,
    test: &TabularDataset,
    baseline: &'a dyn Classifier,
    s: usize,
    params: &ConfairParams,
) -> Result<ConfairResult<'a>, ConfairError> {
    let d = train.d();
    if s >= d {
        return Err(ConfairError::SensitiveIndex { index: s, d });
    }
    let ranking = find_crit_feats(baseline, test.features(), test.labels(), params.permutations, params.seed)?;
    let critical = to_critical_set(&ranking, params.tau);
    let covariates = find_covariates(train, s)?;

    let decision = decide(&critical, &covariates, s)?;
    let case = decision.case;
    log::info!("confair case: {}", case.as_str());

    let (model, qp_solves) = match case {
        ConfairCase::ExtrinsicBias => (ConfairModel::Baseline(baseline), 0),
        _ => {
            let m = retrain(train, &decision, params)?;
            (ConfairModel::Retrained(m), 1)
        }
    };
    Ok(ConfairResult {
        model,
        decision,
        ranking,
        critical,
        covariates,
        qp_solves,
    })
}
