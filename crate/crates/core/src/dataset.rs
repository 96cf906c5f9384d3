//! The canonical in-memory dataset, train/test splitting and fold plans.
//!
//! Labels are `±1` (`i8`), group membership is `0` (group a) or `1` (group b).
//! The sensitive attribute is always one of the feature columns.

use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::matrix::Matrix;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum DatasetError {
    #[error("label at row {row} is {value}, expected -1 or +1")]
    BadLabel { row: usize, value: i8 },
    #[error("sensitive code at row {row} is {value}, expected 0 or 1")]
    BadGroup { row: usize, value: u8 },
    #[error("sensitive column {index} out of range for {cols} features")]
    SensitiveIndex { index: usize, cols: usize },
    #[error("sensitive column disagrees with sensitive values at row {0}")]
    SensitiveMismatch(usize),
    #[error("length mismatch: {what} has {got} entries, expected {expected}")]
    Length { what: &'static str, got: usize, expected: usize },
    #[error("dataset needs at least two rows, got {0}")]
    TooFewRows(usize),
    #[error("sensitive group {0} is empty")]
    EmptyGroup(char),
    #[error("non-finite feature value at row {row}, column {col}")]
    NonFinite { row: usize, col: usize },
    #[error("holdout fraction must lie in (0, 1), got {0}")]
    HoldoutFraction(f64),
    #[error("split leaves the {part} part without {what}")]
    DegenerateSplit { part: &'static str, what: &'static str },
    #[error("provided-test split requested but no companion test set was loaded")]
    MissingTestSet,
    #[error("fold count {k} invalid for {n} rows (need 2 <= k <= n)")]
    FoldCount { k: usize, n: usize },
    #[error("test set does not match the training layout: {0}")]
    Layout(String),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TabularDataset {
    features: Matrix,
    labels: Vec<i8>,
    sensitive_index: usize,
    sensitive_values: Vec<u8>,
    feature_names: Vec<String>,
    /// Columns eligible for standardization (numeric and ordinal encodings).
    continuous_columns: Vec<usize>,
}

impl TabularDataset {
    /// Validates every invariant; `sensitive_values` is read off the sensitive column.
    pub fn new(
        features: Matrix,
        labels: Vec<i8>,
        sensitive_index: usize,
        feature_names: Vec<String>,
        continuous_columns: Vec<usize>,
    ) -> Result<Self, DatasetError> {
        let (n, d) = features.shape();
        if sensitive_index >= d {
            return Err(DatasetError::SensitiveIndex { index: sensitive_index, cols: d });
        }
        let mut sensitive_values = Vec::with_capacity(n);
        for i in 0..n {
            let v = features[(i, sensitive_index)];
            let code = if v == 0.0 {
                0
            } else if v == 1.0 {
                1
            } else {
                return Err(DatasetError::SensitiveMismatch(i));
            };
            sensitive_values.push(code);
        }
        Self::with_groups(features, labels, sensitive_index, sensitive_values, feature_names, continuous_columns)
    }

    pub fn with_groups(
        features: Matrix,
        labels: Vec<i8>,
        sensitive_index: usize,
        sensitive_values: Vec<u8>,
        feature_names: Vec<String>,
        continuous_columns: Vec<usize>,
    ) -> Result<Self, DatasetError> {
        let ds = Self { features, labels, sensitive_index, sensitive_values, feature_names, continuous_columns };
        ds.validate()?;
        Ok(ds)
    }

    pub fn validate(&self) -> Result<(), DatasetError> {
        let (n, d) = self.features.shape();
        if self.labels.len() != n {
            return Err(DatasetError::Length { what: "labels", got: self.labels.len(), expected: n });
        }
        if self.sensitive_values.len() != n {
            return Err(DatasetError::Length {
                what: "sensitive_values",
                got: self.sensitive_values.len(),
                expected: n,
            });
        }
        if self.feature_names.len() != d {
            return Err(DatasetError::Length { what: "feature_names", got: self.feature_names.len(), expected: d });
        }
        if self.sensitive_index >= d {
            return Err(DatasetError::SensitiveIndex { index: self.sensitive_index, cols: d });
        }
        if n < 2 {
            return Err(DatasetError::TooFewRows(n));
        }
        for (row, &value) in self.labels.iter().enumerate() {
            if value != 1 && value != -1 {
                return Err(DatasetError::BadLabel { row, value });
            }
        }
        for (row, &value) in self.sensitive_values.iter().enumerate() {
            if value > 1 {
                return Err(DatasetError::BadGroup { row, value });
            }
            if self.features[(row, self.sensitive_index)] != f64::from(value) {
                return Err(DatasetError::SensitiveMismatch(row));
            }
        }
        if !self.sensitive_values.contains(&0) {
            return Err(DatasetError::EmptyGroup('a'));
        }
        if !self.sensitive_values.contains(&1) {
            return Err(DatasetError::EmptyGroup('b'));
        }
        for row in 0..n {
            for col in 0..d {
                if !self.features[(row, col)].is_finite() {
                    return Err(DatasetError::NonFinite { row, col });
                }
            }
        }
        Ok(())
    }

    pub fn n(&self) -> usize {
        self.features.nrows()
    }

    pub fn d(&self) -> usize {
        self.features.ncols()
    }

    pub fn features(&self) -> &Matrix {
        &self.features
    }

    pub fn labels(&self) -> &[i8] {
        &self.labels
    }

    pub fn sensitive_index(&self) -> usize {
        self.sensitive_index
    }

    pub fn sensitive_values(&self) -> &[u8] {
        &self.sensitive_values
    }

    pub fn feature_names(&self) -> &[String] {
        &self.feature_names
    }

    pub fn continuous_columns(&self) -> &[usize] {
        &self.continuous_columns
    }

    /// Rows at `indices`, in that order. Panics on out-of-range indices.
    ///
    /// The result may violate the group invariant (e.g. a CV fold with one
    /// group), so it is not re-validated.
    pub fn select_rows(&self, indices: &[usize]) -> TabularDataset {
        TabularDataset {
            features: self.features.select_rows(indices),
            labels: indices.iter().map(|&i| self.labels[i]).collect(),
            sensitive_index: self.sensitive_index,
            sensitive_values: indices.iter().map(|&i| self.sensitive_values[i]).collect(),
            feature_names: self.feature_names.clone(),
            continuous_columns: self.continuous_columns.clone(),
        }
    }

    /// Replaces the feature matrix, keeping labels and groups. Used by scaling.
    fn with_features(&self, features: Matrix) -> TabularDataset {
        TabularDataset { features, ..self.clone() }
    }

    /// Stratum id used by splitting: `2 * group + (label == +1)`.
    fn stratum(&self, i: usize) -> usize {
        2 * usize::from(self.sensitive_values[i]) + usize::from(self.labels[i] == 1)
    }

    pub fn count_positive(&self) -> usize {
        self.labels.iter().filter(|&&y| y == 1).count()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SplitMode {
    ProvidedTest,
    RandomHoldout,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SplitSpec {
    pub mode: SplitMode,
    pub holdout_fraction: f64,
    pub seed: u64,
    pub stratify: bool,
}

impl Default for SplitSpec {
    fn default() -> Self {
        Self { mode: SplitMode::RandomHoldout, holdout_fraction: 0.2, seed: 0, stratify: true }
    }
}

/// Index-level train/test partition, both sides sorted ascending.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SplitIndices {
    pub train: Vec<usize>,
    pub test: Vec<usize>,
}

/// Allocates `total` draws across strata proportionally to their sizes using
/// the largest-remainder rule (ties go to the lower stratum id).
fn proportional_allocation(sizes: &[usize], total: usize) -> Vec<usize> {
    let n: usize = sizes.iter().sum();
    if n == 0 {
        return vec![0; sizes.len()];
    }
    let mut alloc_: Vec<usize> = sizes.iter().map(|&s| s * total / n).collect();
    let mut rema: Vec<(usize, usize)> = sizes.iter().enumerate().map(|(i, &s)| ((s * total) % n, i)).collect();
    rema.sort_by(|a, b| b.0.cmp(&a.0).then(a.1.cmp(&b.1)));
    let mut left = total - alloc_.iter().sum::<usize>();
    for &(_, i) in &rema {
        if left == 0 {
            break;
        }
        if alloc_[i] < sizes[i] {
            alloc_[i] += 1;
            left -= 1;
        }
    }
    alloc_
}

fn strata(ds: &TabularDataset) -> [Vec<usize>; 4] {
    let mut out: [Vec<usize>; 4] = Default::default();
    for i in 0..ds.n() {
        out[ds.stratum(i)].push(i);
    }
    out
}

/// Draws `count` rows, stratified by (group, label) when `stratify` is set.
/// Returns the drawn and the remaining indices, each sorted.
fn draw(ds: &TabularDataset, count: usize, seed: u64, stratify: bool) -> (Vec<usize>, Vec<usize>) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut drawn = Vec::with_capacity(count);
    let mut rest = Vec::with_capacity(ds.n() - count);
    if stratify {
        let mut groups = strata(ds);
        let sizes: Vec<usize> = groups.iter().map(Vec::len).collect();
        let take = proportional_allocation(&sizes, count);
        for (idx, k) in groups.iter_mut().zip(take) {
            idx.shuffle(&mut rng);
            drawn.extend_from_slice(&idx[..k]);
            rest.extend_from_slice(&idx[k..]);
        }
    } else {
        let mut idx: Vec<usize> = (0..ds.n()).collect();
        idx.shuffle(&mut rng);
        drawn.extend_from_slice(&idx[..count]);
        rest.extend_from_slice(&idx[count..]);
    }
    drawn.sort_unstable();
    rest.sort_unstable();
    (drawn, rest)
}

fn check_part(ds: &TabularDataset, idx: &[usize], part: &'static str) -> Result<(), DatasetError> {
    let has = |pred: &dyn Fn(usize) -> bool| idx.iter().any(|&i| pred(i));
    if !has(&|i| ds.labels[i] == 1) {
        return Err(DatasetError::DegenerateSplit { part, what: "positive labels" });
    }
    if !has(&|i| ds.labels[i] == -1) {
        return Err(DatasetError::DegenerateSplit { part, what: "negative labels" });
    }
    if !has(&|i| ds.sensitive_values[i] == 0) {
        return Err(DatasetError::DegenerateSplit { part, what: "group a" });
    }
    if !has(&|i| ds.sensitive_values[i] == 1) {
        return Err(DatasetError::DegenerateSplit { part, what: "group b" });
    }
    Ok(())
}

/// Random holdout indices. The test size is `round(n * holdout_fraction)`.
pub fn split_indices(ds: &TabularDataset, spec: &SplitSpec) -> Result<SplitIndices, DatasetError> {
    if !(spec.holdout_fraction > 0.0 && spec.holdout_fraction < 1.0) {
        return Err(DatasetError::HoldoutFraction(spec.holdout_fraction));
    }
    let n = ds.n();
    let n_test = libm::round(n as f64 * spec.holdout_fraction) as usize;
    let n_test = n_test.clamp(1, n - 1);
    let (test, train) = draw(ds, n_test, spec.seed, spec.stratify);
    check_part(ds, &train, "train")?;
    check_part(ds, &test, "test")?;
    Ok(SplitIndices { train, test })
}

/// Splits into (train, test).
///
/// In [`SplitMode::ProvidedTest`] mode the companion test set loaded alongside
/// the training file is returned unchanged.
pub fn split(
    ds: &TabularDataset,
    spec: &SplitSpec,
    provided_test: Option<&TabularDataset>,
) -> Result<(TabularDataset, TabularDataset), DatasetError> {
    match spec.mode {
        SplitMode::ProvidedTest => {
            let test = provided_test.ok_or(DatasetError::MissingTestSet)?;
            if test.d() != ds.d() || test.sensitive_index != ds.sensitive_index {
                return Err(DatasetError::Layout(alloc::format!(
                    "{} columns (sensitive {}) vs {} columns (sensitive {})",
                    test.d(),
                    test.sensitive_index,
                    ds.d(),
                    ds.sensitive_index
                )));
            }
            Ok((ds.clone(), test.clone()))
        }
        SplitMode::RandomHoldout => {
            let idx = split_indices(ds, spec)?;
            Ok((ds.select_rows(&idx.train), ds.select_rows(&idx.test)))
        }
    }
}

/// Seeded stratified subsample of at most `cap` rows (row order preserved).
pub fn subsample(ds: &TabularDataset, cap: usize, seed: u64) -> Result<TabularDataset, DatasetError> {
    if cap >= ds.n() {
        return Ok(ds.clone());
    }
    let (kept, _) = draw(ds, cap, seed, true);
    check_part(ds, &kept, "subsample")?;
    Ok(ds.select_rows(&kept))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FoldWarning {
    pub fold: usize,
    pub group: char,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FoldPlan {
    pub k: usize,
    pub fold_assignments: Vec<usize>,
    /// Folds lacking a positive-labeled sample of some group.
    pub warnings: Vec<FoldWarning>,
}

impl FoldPlan {
    pub fn fold_sizes(&self) -> Vec<usize> {
        let mut sizes = vec![0; self.k];
        for &f in &self.fold_assignments {
            sizes[f] += 1;
        }
        sizes
    }

    /// (training indices, validation indices) for fold `f`.
    pub fn partition(&self, f: usize) -> (Vec<usize>, Vec<usize>) {
        let mut train = Vec::new();
        let mut valid = Vec::new();
        for (i, &a) in self.fold_assignments.iter().enumerate() {
            if a == f {
                valid.push(i);
            } else {
                train.push(i);
            }
        }
        (train, valid)
    }
}

/// Label-stratified k-fold assignment.
///
/// Positives are shuffled, then negatives, and the concatenation is dealt
/// round-robin, so fold sizes differ by at most one and each class is spread
/// as evenly as possible.
pub fn make_folds(ds: &TabularDataset, k: usize, seed: u64) -> Result<FoldPlan, DatasetError> {
    let n = ds.n();
    if k < 2 || k > n {
        return Err(DatasetError::FoldCount { k, n });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut pos: Vec<usize> = (0..n).filter(|&i| ds.labels[i] == 1).collect();
    let mut neg: Vec<usize> = (0..n).filter(|&i| ds.labels[i] == -1).collect();
    pos.shuffle(&mut rng);
    neg.shuffle(&mut rng);
    let mut fold_assignments = vec![0; n];
    for (slot, &i) in pos.iter().chain(neg.iter()).enumerate() {
        fold_assignments[i] = slot % k;
    }
    let mut warnings = Vec::new();
    for fold in 0..k {
        for (group, name) in [(0u8, 'a'), (1u8, 'b')] {
            let present = (0..n)
                .any(|i| fold_assignments[i] == fold && ds.labels[i] == 1 && ds.sensitive_values[i] == group);
            if !present {
                log::warn!("fold {fold} has no positive sample in group {name}");
                warnings.push(FoldWarning { fold, group: name });
            }
        }
    }
    Ok(FoldPlan { k, fold_assignments, warnings })
}

/// Per-column affine scaling fit on a training set.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Standardizer {
    pub columns: Vec<usize>,
    pub means: Vec<f64>,
    pub scales: Vec<f64>,
}

impl Standardizer {
    /// Fits zero-mean, unit-variance scaling on the dataset's continuous columns.
    /// Constant columns get scale 1.
    pub fn fit(train: &TabularDataset) -> Self {
        let n = train.n() as f64;
        let columns = train.continuous_columns.clone();
        let mut means = Vec::with_capacity(columns.len());
        let mut scales = Vec::with_capacity(columns.len());
        for &c in &columns {
            let col = train.features.column(c);
            let mean = col.iter().sum::<f64>() / n;
            let var = col.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / n;
            let sd = libm::sqrt(var);
            means.push(mean);
            scales.push(if sd > 1e-12 { sd } else { 1.0 });
        }
        Self { columns, means, scales }
    }

    pub fn transform(&self, ds: &TabularDataset) -> TabularDataset {
        let mut x = ds.features.clone();
        for ((&c, &m), &s) in self.columns.iter().zip(&self.means).zip(&self.scales) {
            for i in 0..x.nrows() {
                x[(i, c)] = (x[(i, c)] - m) / s;
            }
        }
        ds.with_features(x)
    }
}
