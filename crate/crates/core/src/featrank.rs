//! Permutation feature importance and the critical feature set.
//!
//! For every feature `j` the test column is shuffled `K` times; the
//! importance is the mean drop in score relative to the unshuffled baseline.

use alloc::string::String;
use alloc::vec::Vec;
use core::fmt::Write;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::matrix::Matrix;

#[derive(Debug, Clone, PartialEq, Error)]
#[error("prediction failed: {0}")]
pub struct PredictError(pub String);

/// Anything that maps feature rows to labels in `{−1, +1}`.
pub trait Classifier {
    /// Number of columns `predict` expects.
    fn input_dim(&self) -> usize;
    fn predict(&self, x: &Matrix) -> Result<Vec<i8>, PredictError>;
}

impl<T: Classifier + ?Sized> Classifier for &T {
    fn input_dim(&self) -> usize {
        (**self).input_dim()
    }

    fn predict(&self, x: &Matrix) -> Result<Vec<i8>, PredictError> {
        (**self).predict(x)
    }
}

/// Performance measure used by the importance loop. Higher is better.
pub trait ScoreFn {
    fn score(&self, y_true: &[i8], y_pred: &[i8]) -> f64;
}

#[derive(Clone, Copy, Debug, Default)]
pub struct Accuracy;

impl ScoreFn for Accuracy {
    fn score(&self, y_true: &[i8], y_pred: &[i8]) -> f64 {
        let hits = y_true.iter().zip(y_pred).filter(|(a, b)| a == b).count();
        hits as f64 / y_true.len() as f64
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum FeatRankError {
    #[error("need at least one permutation per feature")]
    NoPermutations,
    #[error("empty evaluation set")]
    Empty,
    #[error("{rows} rows but {labels} labels")]
    Length { rows: usize, labels: usize },
    #[error("classifier expects {expected} columns, got {got}")]
    Dimension { expected: usize, got: usize },
    #[error(transparent)]
    Predict(#[from] PredictError),
}

pub fn accuracy(clf: &dyn Classifier, x: &Matrix, y: &[i8]) -> Result<f64, FeatRankError> {
    check(clf, x, y)?;
    let pred = clf.predict(x)?;
    Ok(Accuracy.score(y, &pred))
}

fn check(clf: &dyn Classifier, x: &Matrix, y: &[i8]) -> Result<(), FeatRankError> {
    if x.nrows() == 0 {
        return Err(FeatRankError::Empty);
    }
    if x.nrows() != y.len() {
        return Err(FeatRankError::Length { rows: x.nrows(), labels: y.len() });
    }
    if x.ncols() != clf.input_dim() {
        return Err(FeatRankError::Dimension { expected: clf.input_dim(), got: x.ncols() });
    }
    Ok(())
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FeatureRanking {
    pub importances: Vec<f64>,
    /// Feature indices by descending importance, ties by ascending index.
    pub order: Vec<usize>,
    pub baseline_accuracy: f64,
    pub permutations_per_feature: usize,
    /// `d × K` permuted scores.
    pub per_feature_scores: Matrix,
    /// Sample standard deviation of the `K` permuted scores of each feature.
    pub std_over_k: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CriticalFeatureSet {
    pub indices: Vec<usize>,
    pub threshold: f64,
}

impl CriticalFeatureSet {
    pub fn contains(&self, j: usize) -> bool {
        self.indices.contains(&j)
    }

    pub fn is_empty(&self) -> bool {
        self.indices.is_empty()
    }
}

/// The shuffle applied to column `feature` in repetition `rep`.
pub fn permutation(n: usize, seed: u64, feature: usize, rep: usize) -> Vec<usize> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(((feature as u64) << 32) | rep as u64);
    let mut idx: Vec<usize> = (0..n).collect();
    idx.shuffle(&mut rng);
    idx
}

/// Builds the ranking from a baseline score and a `d × K` table of permuted
/// scores.
pub fn ranking_from_scores(baseline: f64, scores: Matrix) -> FeatureRanking {
    let (d, k) = scores.shape();
    let mut importances = Vec::with_capacity(d);
    let mut std_over_k = Vec::with_capacity(d);
    for row in scores.rows() {
        // Mean of differences, so an unchanged score gives exactly zero.
        importances.push(row.iter().map(|s| baseline - s).sum::<f64>() / k as f64);
        let mean = row.iter().sum::<f64>() / k as f64;
        let var = if k > 1 { row.iter().map(|s| (s - mean) * (s - mean)).sum::<f64>() / (k - 1) as f64 } else { 0.0 };
        std_over_k.push(libm::sqrt(var));
    }
    let mut order: Vec<usize> = (0..d).collect();
    order.sort_by(|&a, &b| importances[b].total_cmp(&importances[a]).then(a.cmp(&b)));
    FeatureRanking {
        importances,
        order,
        baseline_accuracy: baseline,
        permutations_per_feature: k,
        per_feature_scores: scores,
        std_over_k,
    }
}

/// Permutation importance of every column of `x_test` under accuracy.
pub fn find_crit_feats(
    clf: &dyn Classifier,
    x_test: &Matrix,
    y_test: &[i8],
    k: usize,
    seed: u64,
) -> Result<FeatureRanking, FeatRankError> {
    find_crit_feats_with(clf, x_test, y_test, k, seed, &Accuracy)
}

pub fn find_crit_feats_with(
    clf: &dyn Classifier,
    x_test: &Matrix,
    y_test: &[i8],
    k: usize,
    seed: u64,
    score: &dyn ScoreFn,
) -> Result<FeatureRanking, FeatRankError> {
    if k < 1 {
        return Err(FeatRankError::NoPermutations);
    }
    check(clf, x_test, y_test)?;
    let (n, d) = x_test.shape();
    let baseline = score.score(y_test, &clf.predict(x_test)?);
    let mut work = x_test.clone();
    let mut scores = Matrix::zeros(d, k);
    for j in 0..d {
        let original = x_test.column(j);
        for rep in 0..k {
            let perm = permutation(n, seed, j, rep);
            let shuffled: Vec<f64> = perm.iter().map(|&i| original[i]).collect();
            work.set_column(j, &shuffled);
            scores[(j, rep)] = score.score(y_test, &clf.predict(&work)?);
        }
        work.set_column(j, &original);
    }
    Ok(ranking_from_scores(baseline, scores))
}

/// Features with importance strictly above `threshold`, in ranking order.
pub fn to_critical_set(ranking: &FeatureRanking, threshold: f64) -> CriticalFeatureSet {
    let indices = ranking.order.iter().copied().filter(|&j| ranking.importances[j] > threshold).collect();
    CriticalFeatureSet { indices, threshold }
}

impl FeatureRanking {
    pub fn num_features(&self) -> usize {
        self.importances.len()
    }

    /// `feature_name,importance,std_over_k` lines in feature order.
    pub fn to_csv(&self, names: &[String]) -> String {
        let mut out = String::from("feature_name,importance,std_over_k\n");
        for j in 0..self.num_features() {
            let name = names.get(j).map_or_else(|| alloc::format!("f{j}"), |s| s.clone());
            let _ = writeln!(out, "{},{},{}", name, self.importances[j], self.std_over_k[j]);
        }
        out
    }
}

/// Sign rule on a single column, for fixtures.
#[derive(Clone, Copy, Debug)]
pub struct SignRule {
    pub feature: usize,
    pub dim: usize,
}

impl Classifier for SignRule {
    fn input_dim(&self) -> usize {
        self.dim
    }

    fn predict(&self, x: &Matrix) -> Result<Vec<i8>, PredictError> {
        Ok(x.rows().map(|r| if r[self.feature] >= 0.0 { 1 } else { -1 }).collect())
    }
}
