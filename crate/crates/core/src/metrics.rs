//! Accuracy and group-fairness metrics.
//!
//! Group code 0 is group `a`, code 1 is group `b`. A metric whose
//! conditioning cell is empty in either group is `None`; it is never
//! reported as zero.

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Counts {
    pub tp: u64,
    pub fp: u64,
    pub tn: u64,
    #[serde(rename = "fn")]
    pub fn_: u64,
}

impl Counts {
    pub fn total(&self) -> u64 {
        self.tp + self.fp + self.tn + self.fn_
    }

    pub fn correct(&self) -> u64 {
        self.tp + self.tn
    }

    /// `tp / (tp + fn)`.
    pub fn tpr(&self) -> Option<f64> {
        ratio(self.tp, self.tp + self.fn_)
    }

    /// `tn / (tn + fp)`.
    pub fn tnr(&self) -> Option<f64> {
        ratio(self.tn, self.tn + self.fp)
    }

    /// `tn / (tn + fn)`.
    pub fn npv(&self) -> Option<f64> {
        ratio(self.tn, self.tn + self.fn_)
    }

    fn scaled(&self, k: u64) -> Counts {
        Counts { tp: self.tp * k, fp: self.fp * k, tn: self.tn * k, fn_: self.fn_ * k }
    }
}

fn ratio(num: u64, den: u64) -> Option<f64> {
    (den > 0).then(|| num as f64 / den as f64)
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct GroupConfusion {
    pub a: Counts,
    pub b: Counts,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum MetricsError {
    #[error("length mismatch: {y_true} labels, {y_pred} predictions, {groups} group codes")]
    Length { y_true: usize, y_pred: usize, groups: usize },
    #[error("group code {0} is not 0 or 1")]
    BadGroup(u8),
    #[error("label {0} is not -1 or +1")]
    BadLabel(i8),
    #[error("empty evaluation set")]
    Empty,
}

impl GroupConfusion {
    pub fn total(&self) -> u64 {
        self.a.total() + self.b.total()
    }

    pub fn accuracy(&self) -> Option<f64> {
        ratio(self.a.correct() + self.b.correct(), self.total())
    }

    pub fn swapped(&self) -> GroupConfusion {
        GroupConfusion { a: self.b, b: self.a }
    }

    pub fn scaled(&self, k: u64) -> GroupConfusion {
        GroupConfusion { a: self.a.scaled(k), b: self.b.scaled(k) }
    }
}

pub fn confusion(y_true: &[i8], y_pred: &[i8], groups: &[u8]) -> Result<GroupConfusion, MetricsError> {
    if y_true.len() != y_pred.len() || y_true.len() != groups.len() {
        return Err(MetricsError::Length { y_true: y_true.len(), y_pred: y_pred.len(), groups: groups.len() });
    }
    let mut conf = GroupConfusion::default();
    for ((&t, &p), &g) in y_true.iter().zip(y_pred).zip(groups) {
        let cell = match g {
            0 => &mut conf.a,
            1 => &mut conf.b,
            other => return Err(MetricsError::BadGroup(other)),
        };
        match (t, p) {
            (1, 1) => cell.tp += 1,
            (1, -1) => cell.fn_ += 1,
            (-1, 1) => cell.fp += 1,
            (-1, -1) => cell.tn += 1,
            (1, bad) | (-1, bad) => return Err(MetricsError::BadLabel(bad)),
            (bad, _) => return Err(MetricsError::BadLabel(bad)),
        }
    }
    Ok(conf)
}

fn abs_diff(a: Option<f64>, b: Option<f64>) -> Option<f64> {
    Some((a? - b?).abs())
}

/// `|TPR_a − TPR_b|`.
pub fn deo(conf: &GroupConfusion) -> Option<f64> {
    abs_diff(conf.a.tpr(), conf.b.tpr())
}

/// `|NPV_a − NPV_b|`.
pub fn npv_diff(conf: &GroupConfusion) -> Option<f64> {
    abs_diff(conf.a.npv(), conf.b.npv())
}

/// `|TNR_a − TNR_b|`.
pub fn tnr_diff(conf: &GroupConfusion) -> Option<f64> {
    abs_diff(conf.a.tnr(), conf.b.tnr())
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct FairnessReport {
    pub accuracy: f64,
    pub deo: Option<f64>,
    pub npv_diff: Option<f64>,
    pub tnr_diff: Option<f64>,
    pub confusion: GroupConfusion,
}

impl FairnessReport {
    pub fn from_confusion(confusion: GroupConfusion) -> Result<Self, MetricsError> {
        Ok(FairnessReport {
            accuracy: confusion.accuracy().ok_or(MetricsError::Empty)?,
            deo: deo(&confusion),
            npv_diff: npv_diff(&confusion),
            tnr_diff: tnr_diff(&confusion),
            confusion,
        })
    }

    pub fn evaluate(y_true: &[i8], y_pred: &[i8], groups: &[u8]) -> Result<Self, MetricsError> {
        Self::from_confusion(confusion(y_true, y_pred, groups)?)
    }
}
