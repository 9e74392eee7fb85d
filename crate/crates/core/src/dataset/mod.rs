//! Typed columnar datasets with a designated binary target.
//!
//! A [`DatasetTable`] is immutable once built. Every constructor validates the
//! table invariants: equal column lengths, unique names, and a categorical
//! target with exactly two labels, one of which is the positive class.

mod csv_io;
mod nslkdd;
mod partition;

use std::collections::{BTreeMap, HashSet};
use std::ops::Range;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use csv_io::{load_csv, write_csv};
pub use nslkdd::{load_nslkdd, NSLKDD_FEATURES, NSLKDD_NEGATIVE, NSLKDD_POSITIVE, NSLKDD_TARGET};
pub use partition::{make_subsets, stratified_split, SplitPair};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ColumnKind {
    Numeric,
    Categorical,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ColumnData {
    Numeric(Vec<f64>),
    Categorical(Vec<String>),
}

impl ColumnData {
    pub fn len(&self) -> usize {
        match self {
            ColumnData::Numeric(v) => v.len(),
            ColumnData::Categorical(v) => v.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn kind(&self) -> ColumnKind {
        match self {
            ColumnData::Numeric(_) => ColumnKind::Numeric,
            ColumnData::Categorical(_) => ColumnKind::Categorical,
        }
    }

    fn select(&self, rows: &[usize]) -> ColumnData {
        match self {
            ColumnData::Numeric(v) => ColumnData::Numeric(rows.iter().map(|&r| v[r]).collect()),
            ColumnData::Categorical(v) => {
                ColumnData::Categorical(rows.iter().map(|&r| v[r].clone()).collect())
            }
        }
    }

    fn slice(&self, range: Range<usize>) -> ColumnData {
        match self {
            ColumnData::Numeric(v) => ColumnData::Numeric(v[range].to_vec()),
            ColumnData::Categorical(v) => ColumnData::Categorical(v[range].to_vec()),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Column {
    pub name: String,
    pub data: ColumnData,
}

impl Column {
    pub fn numeric(name: impl Into<String>, values: Vec<f64>) -> Self {
        Column {
            name: name.into(),
            data: ColumnData::Numeric(values),
        }
    }

    pub fn categorical<S: Into<String>>(name: impl Into<String>, values: impl IntoIterator<Item = S>) -> Self {
        Column {
            name: name.into(),
            data: ColumnData::Categorical(values.into_iter().map(Into::into).collect()),
        }
    }

    pub fn kind(&self) -> ColumnKind {
        self.data.kind()
    }

    pub fn as_numeric(&self) -> Option<&[f64]> {
        match &self.data {
            ColumnData::Numeric(v) => Some(v),
            ColumnData::Categorical(_) => None,
        }
    }

    pub fn as_categorical(&self) -> Option<&[String]> {
        match &self.data {
            ColumnData::Categorical(v) => Some(v),
            ColumnData::Numeric(_) => None,
        }
    }
}

/// Ordered (name, kind) pairs of the predictor columns.
pub type Schema = Vec<(String, ColumnKind)>;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DatasetTable {
    name: String,
    columns: Vec<Column>,
    target: String,
    positive_label: String,
    negative_label: String,
    row_count: usize,
}

impl DatasetTable {
    pub fn new(
        name: impl Into<String>,
        columns: Vec<Column>,
        target: impl Into<String>,
        positive_label: impl Into<String>,
    ) -> Result<Self> {
        let target = target.into();
        let positive_label = positive_label.into();
        let row_count = columns.first().map(|c| c.data.len()).unwrap_or(0);

        let mut seen = HashSet::new();
        for column in &columns {
            if !seen.insert(column.name.as_str()) {
                return Err(Error::DuplicateColumn(column.name.clone()));
            }
            if column.data.len() != row_count {
                return Err(Error::InvalidTable(format!(
                    "column `{}` has {} values, expected {}",
                    column.name,
                    column.data.len(),
                    row_count
                )));
            }
            if let ColumnData::Numeric(v) = &column.data {
                if v.iter().any(|x| !x.is_finite()) {
                    return Err(Error::InvalidTable(format!(
                        "column `{}` contains a non-finite value",
                        column.name
                    )));
                }
            }
        }

        let target_col = columns
            .iter()
            .find(|c| c.name == target)
            .ok_or_else(|| Error::MissingColumn(target.clone()))?;
        let labels = target_col.as_categorical().ok_or_else(|| {
            Error::InvalidTable(format!("target column `{target}` must be categorical"))
        })?;
        let distinct = distinct_in_order(labels);
        if distinct.len() != 2 {
            return Err(Error::TargetNotBinary {
                column: target,
                found: distinct.len(),
            });
        }
        let negative_label = match distinct.iter().position(|l| *l == positive_label) {
            Some(0) => distinct[1].clone(),
            Some(_) => distinct[0].clone(),
            None => {
                return Err(Error::UnknownPositiveLabel {
                    column: target,
                    label: positive_label,
                })
            }
        };

        Ok(DatasetTable {
            name: name.into(),
            columns,
            target,
            positive_label,
            negative_label,
            row_count,
        })
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn columns(&self) -> &[Column] {
        &self.columns
    }

    pub fn target(&self) -> &str {
        &self.target
    }

    pub fn positive_label(&self) -> &str {
        &self.positive_label
    }

    pub fn negative_label(&self) -> &str {
        &self.negative_label
    }

    pub fn row_count(&self) -> usize {
        self.row_count
    }

    pub fn column(&self, name: &str) -> Option<&Column> {
        self.columns.iter().find(|c| c.name == name)
    }

    pub fn predictors(&self) -> impl Iterator<Item = &Column> {
        self.columns.iter().filter(move |c| c.name != self.target)
    }

    pub fn predictor_schema(&self) -> Schema {
        self.predictors().map(|c| (c.name.clone(), c.kind())).collect()
    }

    pub fn kinds(&self) -> BTreeMap<String, ColumnKind> {
        self.columns.iter().map(|c| (c.name.clone(), c.kind())).collect()
    }

    pub fn target_values(&self) -> &[String] {
        self.column(&self.target)
            .and_then(Column::as_categorical)
            .expect("target validated at construction")
    }

    /// Binary labels with `true` for the positive class.
    pub fn labels(&self) -> Vec<bool> {
        self.target_values()
            .iter()
            .map(|v| *v == self.positive_label)
            .collect()
    }

    /// (positive, negative) row counts.
    pub fn class_counts(&self) -> (usize, usize) {
        let pos = self.labels().into_iter().filter(|&b| b).count();
        (pos, self.row_count - pos)
    }

    pub fn with_name(mut self, name: impl Into<String>) -> Self {
        self.name = name.into();
        self
    }

    /// Sub-table of the given rows, in the given order.
    pub fn select_rows(&self, name: impl Into<String>, rows: &[usize]) -> Result<DatasetTable> {
        if let Some(&bad) = rows.iter().find(|&&r| r >= self.row_count) {
            return Err(Error::InvalidParameter(format!(
                "row index {bad} out of range for {} rows",
                self.row_count
            )));
        }
        let columns = self
            .columns
            .iter()
            .map(|c| Column {
                name: c.name.clone(),
                data: c.data.select(rows),
            })
            .collect();
        DatasetTable::new(name, columns, self.target.clone(), self.positive_label.clone())
    }

    pub fn slice_rows(&self, name: impl Into<String>, range: Range<usize>) -> Result<DatasetTable> {
        if range.end > self.row_count || range.start > range.end {
            return Err(Error::InvalidParameter(format!(
                "row range {range:?} out of bounds for {} rows",
                self.row_count
            )));
        }
        let columns = self
            .columns
            .iter()
            .map(|c| Column {
                name: c.name.clone(),
                data: c.data.slice(range.clone()),
            })
            .collect();
        DatasetTable::new(name, columns, self.target.clone(), self.positive_label.clone())
    }

    /// Row-wise concatenation of tables sharing one schema.
    pub fn concat(name: impl Into<String>, parts: &[DatasetTable]) -> Result<DatasetTable> {
        let first = parts
            .first()
            .ok_or_else(|| Error::Empty("no tables to concatenate".into()))?;
        let mut columns: Vec<Column> = first.columns.clone();
        for part in &parts[1..] {
            if part.kinds() != first.kinds() || part.target != first.target {
                return Err(Error::SchemaMismatch(format!(
                    "cannot concatenate `{}` onto `{}`",
                    part.name, first.name
                )));
            }
            for column in &mut columns {
                let other = part.column(&column.name).expect("schema checked");
                match (&mut column.data, &other.data) {
                    (ColumnData::Numeric(a), ColumnData::Numeric(b)) => a.extend_from_slice(b),
                    (ColumnData::Categorical(a), ColumnData::Categorical(b)) => {
                        a.extend(b.iter().cloned())
                    }
                    _ => unreachable!("kinds checked"),
                }
            }
        }
        DatasetTable::new(name, columns, first.target.clone(), first.positive_label.clone())
    }
}

pub(crate) fn distinct_in_order(values: &[String]) -> Vec<String> {
    let mut seen = HashSet::new();
    values
        .iter()
        .filter(|v| seen.insert(v.as_str()))
        .cloned()
        .collect()
}
