//! CSV + JSON schema loading into [`TabularDataset`].

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fs::File;
use std::path::{Path, PathBuf};

use confair_core::dataset::DatasetError;
use confair_core::{Matrix, TabularDataset};
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ColumnKind {
    Numeric,
    /// Categories mapped to integer codes, one column.
    Ordinal,
    OneHot,
    /// `1` when the cell equals `positive`, else `0`.
    Binary,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ColumnSpec {
    pub name: String,
    pub kind: ColumnKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub positive: Option<String>,
    /// Fixed category order for ordinal and one-hot columns. Learned
    /// (sorted) from the training file when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub categories: Option<Vec<String>>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Schema {
    pub label_column: String,
    pub positive_label: String,
    /// When absent every non-positive label value is negative.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub negative_label: Option<String>,
    pub sensitive_column: String,
    pub sensitive_positive_value: String,
    pub columns: Vec<ColumnSpec>,
}

#[derive(Debug, Error)]
pub enum DataError {
    #[error("cannot read {path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("malformed CSV in {path}: {source}")]
    Csv { path: PathBuf, source: csv::Error },
    #[error("malformed schema {path}: {source}")]
    SchemaJson { path: PathBuf, source: serde_json::Error },
    #[error("invalid schema: {0}")]
    Schema(String),
    #[error("column {0:?} not found in CSV header")]
    UnknownColumn(String),
    #[error("row {row}: label {value:?} is neither {positive:?} nor {negative:?}")]
    BadLabel { row: usize, value: String, positive: String, negative: String },
    #[error("sensitive column {column:?} has more than two values: {values:?}")]
    SensitiveValues { column: String, values: Vec<String> },
    #[error("row {row}, column {column:?}: {value:?} is not a finite number")]
    NonNumeric { row: usize, column: String, value: String },
    #[error("binary column {column:?} has values {values:?}; set `positive` in the schema")]
    Binary { column: String, values: Vec<String> },
    #[error(transparent)]
    Dataset(#[from] DatasetError),
}

impl Schema {
    pub fn from_path(path: &Path) -> Result<Self, DataError> {
        let file = File::open(path).map_err(|source| DataError::Io { path: path.into(), source })?;
        let schema: Schema = serde_json::from_reader(std::io::BufReader::new(file))
            .map_err(|source| DataError::SchemaJson { path: path.into(), source })?;
        schema.check()?;
        Ok(schema)
    }

    pub fn check(&self) -> Result<(), DataError> {
        let mut seen = BTreeSet::new();
        for c in &self.columns {
            if !seen.insert(c.name.as_str()) {
                return Err(DataError::Schema(format!("column {:?} listed twice", c.name)));
            }
            if c.name == self.label_column {
                return Err(DataError::Schema(format!("label column {:?} listed as a feature", c.name)));
            }
        }
        match self.columns.iter().find(|c| c.name == self.sensitive_column) {
            None => Err(DataError::Schema(format!("sensitive column {:?} is not a listed column", self.sensitive_column))),
            Some(c) if c.kind != ColumnKind::Binary => {
                Err(DataError::Schema(format!("sensitive column {:?} must have kind binary", c.name)))
            }
            Some(_) => Ok(()),
        }
    }
}

/// Per-column levels fitted on a training file.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Encoding {
    pub schema: Schema,
    /// Categories for ordinal and one-hot columns; the positive value for
    /// binary columns; empty for numeric.
    pub levels: Vec<Vec<String>>,
    pub feature_names: Vec<String>,
    pub continuous_columns: Vec<usize>,
    pub sensitive_index: usize,
}

/// Source column and, for one-hot columns, the category of a feature.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FeatureOrigin {
    pub column: String,
    pub level: Option<String>,
}

struct Table {
    path: PathBuf,
    header: HashMap<String, usize>,
    rows: Vec<csv::StringRecord>,
}

fn read_table(path: &Path) -> Result<Table, DataError> {
    let file = File::open(path).map_err(|source| DataError::Io { path: path.into(), source })?;
    let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(std::io::BufReader::new(file));
    let csv_err = |source| DataError::Csv { path: path.into(), source };
    let header = rdr.headers().map_err(csv_err)?.iter().enumerate().map(|(i, h)| (h.to_string(), i)).collect();
    let rows = rdr.records().collect::<Result<Vec<_>, _>>().map_err(csv_err)?;
    Ok(Table { path: path.into(), header, rows })
}

impl Table {
    fn column(&self, name: &str) -> Result<usize, DataError> {
        self.header.get(name).copied().ok_or_else(|| DataError::UnknownColumn(name.into()))
    }

    fn distinct(&self, col: usize) -> BTreeSet<&str> {
        self.rows.iter().map(|r| &r[col]).collect()
    }
}

impl Encoding {
    fn fit(schema: &Schema, table: &Table) -> Result<Self, DataError> {
        let mut levels = Vec::with_capacity(schema.columns.len());
        let mut feature_names = Vec::new();
        let mut continuous_columns = Vec::new();
        let mut sensitive_index = 0;
        for spec in &schema.columns {
            let col = table.column(&spec.name)?;
            let lv: Vec<String> = match spec.kind {
                ColumnKind::Numeric => Vec::new(),
                ColumnKind::Ordinal | ColumnKind::OneHot => match &spec.categories {
                    Some(c) => c.clone(),
                    None => table.distinct(col).into_iter().map(String::from).collect(),
                },
                ColumnKind::Binary => {
                    let values = table.distinct(col);
                    let positive = if spec.name == schema.sensitive_column {
                        if values.len() > 2 {
                            return Err(DataError::SensitiveValues {
                                column: spec.name.clone(),
                                values: values.into_iter().map(String::from).collect(),
                            });
                        }
                        schema.sensitive_positive_value.clone()
                    } else if let Some(p) = &spec.positive {
                        p.clone()
                    } else if values.len() <= 2 {
                        values.last().map_or_else(String::new, |s| s.to_string())
                    } else {
                        return Err(DataError::Binary {
                            column: spec.name.clone(),
                            values: values.into_iter().map(String::from).collect(),
                        });
                    };
                    vec![positive]
                }
            };
            match spec.kind {
                ColumnKind::OneHot => feature_names.extend(lv.iter().map(|l| format!("{}={}", spec.name, l))),
                _ => {
                    if spec.name == schema.sensitive_column {
                        sensitive_index = feature_names.len();
                    }
                    if matches!(spec.kind, ColumnKind::Numeric | ColumnKind::Ordinal) {
                        continuous_columns.push(feature_names.len());
                    }
                    feature_names.push(spec.name.clone());
                }
            }
            levels.push(lv);
        }
        Ok(Self { schema: schema.clone(), levels, feature_names, continuous_columns, sensitive_index })
    }

    pub fn d(&self) -> usize {
        self.feature_names.len()
    }

    /// Maps every encoded feature back to its schema column.
    pub fn origins(&self) -> Vec<FeatureOrigin> {
        let mut out = Vec::with_capacity(self.d());
        for (spec, lv) in self.schema.columns.iter().zip(&self.levels) {
            match spec.kind {
                ColumnKind::OneHot => out.extend(
                    lv.iter().map(|l| FeatureOrigin { column: spec.name.clone(), level: Some(l.clone()) }),
                ),
                _ => out.push(FeatureOrigin { column: spec.name.clone(), level: None }),
            }
        }
        out
    }

    /// Encodes a CSV with this (already fitted) encoding.
    pub fn load(&self, path: &Path) -> Result<TabularDataset, DataError> {
        let table = read_table(path)?;
        self.encode(&table)
    }

    fn encode(&self, table: &Table) -> Result<TabularDataset, DataError> {
        let schema = &self.schema;
        let n = table.rows.len();
        let d = self.d();
        let label_col = table.column(&schema.label_column)?;
        let cols = schema.columns.iter().map(|c| table.column(&c.name)).collect::<Result<Vec<_>, _>>()?;

        let sens_col = cols[schema.columns.iter().position(|c| c.name == schema.sensitive_column).unwrap_or(0)];
        let sens_values = table.distinct(sens_col);
        if sens_values.len() > 2 {
            return Err(DataError::SensitiveValues {
                column: schema.sensitive_column.clone(),
                values: sens_values.into_iter().map(String::from).collect(),
            });
        }

        let index: Vec<HashMap<&str, usize>> =
            self.levels.iter().map(|lv| lv.iter().enumerate().map(|(i, l)| (l.as_str(), i)).collect()).collect();
        let mut unseen: BTreeMap<&str, usize> = BTreeMap::new();
        let mut data = Vec::with_capacity(n * d);
        let mut labels = Vec::with_capacity(n);
        for (r, row) in table.rows.iter().enumerate() {
            let line = r + 2;
            let y = &row[label_col];
            labels.push(if y == schema.positive_label {
                1
            } else if schema.negative_label.as_deref().map_or(true, |neg| neg == y) {
                -1
            } else {
                return Err(DataError::BadLabel {
                    row: line,
                    value: y.into(),
                    positive: schema.positive_label.clone(),
                    negative: schema.negative_label.clone().unwrap_or_default(),
                });
            });
            for (k, spec) in schema.columns.iter().enumerate() {
                let cell = &row[cols[k]];
                match spec.kind {
                    ColumnKind::Numeric => {
                        let v: f64 = cell.parse().ok().filter(|v: &f64| v.is_finite()).ok_or_else(|| {
                            DataError::NonNumeric { row: line, column: spec.name.clone(), value: cell.into() }
                        })?;
                        data.push(v);
                    }
                    ColumnKind::Binary => data.push(if cell == self.levels[k][0] { 1.0 } else { 0.0 }),
                    ColumnKind::Ordinal => {
                        let code = index[k].get(cell).copied().unwrap_or_else(|| {
                            *unseen.entry(spec.name.as_str()).or_default() += 1;
                            self.levels[k].len()
                        });
                        data.push(code as f64);
                    }
                    ColumnKind::OneHot => {
                        let hit = index[k].get(cell).copied();
                        if hit.is_none() {
                            *unseen.entry(spec.name.as_str()).or_default() += 1;
                        }
                        data.extend((0..self.levels[k].len()).map(|i| if Some(i) == hit { 1.0 } else { 0.0 }));
                    }
                }
            }
        }
        for (col, count) in unseen {
            log::warn!("{}: {count} cells in column {col:?} hold categories unseen in training", table.path.display());
        }
        let x = Matrix::from_vec(n, d, data);
        Ok(TabularDataset::new(x, labels, self.sensitive_index, self.feature_names.clone(), self.continuous_columns.clone())?)
    }
}

/// Loads a training CSV, fitting category levels on it.
pub fn load_csv(path: &Path, schema: &Schema) -> Result<(TabularDataset, Encoding), DataError> {
    schema.check()?;
    let table = read_table(path)?;
    let enc = Encoding::fit(schema, &table)?;
    let ds = enc.encode(&table)?;
    Ok((ds, enc))
}

/// Row, class and group counts of a loaded dataset.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DataSummary {
    pub n: usize,
    pub d: usize,
    pub positives: usize,
    pub negatives: usize,
    pub sensitive_feature: String,
    pub group_a: usize,
    pub group_b: usize,
    pub group_a_positives: usize,
    pub group_b_positives: usize,
}

impl DataSummary {
    pub fn of(ds: &TabularDataset) -> Self {
        let mut s = Self {
            n: ds.n(),
            d: ds.d(),
            positives: 0,
            negatives: 0,
            sensitive_feature: ds.feature_names()[ds.sensitive_index()].clone(),
            group_a: 0,
            group_b: 0,
            group_a_positives: 0,
            group_b_positives: 0,
        };
        for (&y, &g) in ds.labels().iter().zip(ds.sensitive_values()) {
            let pos = usize::from(y > 0);
            s.positives += pos;
            s.negatives += 1 - pos;
            if g == 0 {
                s.group_a += 1;
                s.group_a_positives += pos;
            } else {
                s.group_b += 1;
                s.group_b_positives += pos;
            }
        }
        s
    }
}
