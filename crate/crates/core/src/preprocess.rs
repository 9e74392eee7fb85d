//! Feature preprocessing: numeric columns go through min-max scaling, a full
//! PCA rotation, and a second min-max scaling; categorical columns are one-hot
//! encoded. The fitted [`PreprocessModel`] is immutable and serializes to a
//! versioned JSON document.

use nalgebra::{DMatrix, SymmetricEigen};
use serde::{Deserialize, Serialize};

use crate::dataset::{ColumnData, DatasetTable, Schema};
use crate::error::{Error, Result};
use crate::matrix::NumericMatrix;

pub const PREPROCESS_FORMAT_VERSION: u32 = 1;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct MinMax {
    pub min: f64,
    pub max: f64,
}

impl MinMax {
    pub fn fit(values: &[f64]) -> Result<MinMax> {
        if values.is_empty() {
            return Err(Error::Empty("cannot fit min-max on an empty column".into()));
        }
        let (min, max) = values
            .iter()
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| (lo.min(v), hi.max(v)));
        if !min.is_finite() || !max.is_finite() {
            return Err(Error::NonFinite);
        }
        Ok(MinMax { min, max })
    }

    /// Maps into [0, 1], clamping values outside the fitted range. A constant
    /// column (max == min) maps to 0.
    pub fn apply(&self, x: f64) -> f64 {
        let span = self.max - self.min;
        if span <= 0.0 {
            return 0.0;
        }
        ((x - self.min) / span).clamp(0.0, 1.0)
    }
}

/// Fits (when `params` is `None`) or applies min-max scaling to a column.
pub fn minmax_scale(column: &[f64], params: Option<MinMax>) -> Result<(Vec<f64>, MinMax)> {
    if column.is_empty() {
        return Err(Error::Empty("min-max scaling needs a nonempty column".into()));
    }
    let params = match params {
        Some(p) => p,
        None => MinMax::fit(column)?,
    };
    Ok((column.iter().map(|&x| params.apply(x)).collect(), params))
}

/// One-hot encodes a categorical column.
///
/// Fitted categories follow first-occurrence order. Values not among the
/// categories encode as an all-zero row.
pub fn onehot_encode(
    column: &[String],
    categories: Option<&[String]>,
) -> Result<(NumericMatrix, Vec<String>)> {
    if column.is_empty() {
        return Err(Error::Empty("one-hot encoding needs a nonempty column".into()));
    }
    let categories = match categories {
        Some(c) => c.to_vec(),
        None => crate::dataset::distinct_in_order(column),
    };
    let indicators = indicator_columns(column, &categories);
    let matrix = NumericMatrix::hstack(column.len(), &[(indicators, categories.clone())])?;
    Ok((matrix, categories))
}

fn indicator_columns(column: &[String], categories: &[String]) -> Vec<Vec<f64>> {
    categories
        .iter()
        .map(|cat| column.iter().map(|v| if v == cat { 1.0 } else { 0.0 }).collect())
        .collect()
}

/// Centering means and principal axes, one component per row, ordered by
/// descending explained variance.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PcaModel {
    pub means: Vec<f64>,
    pub components: Vec<Vec<f64>>,
    pub explained_variance: Vec<f64>,
}

impl PcaModel {
    pub fn fit(matrix: &NumericMatrix) -> Result<PcaModel> {
        let (n, d) = (matrix.rows(), matrix.cols());
        if n < 2 {
            return Err(Error::InvalidParameter(format!(
                "PCA needs at least 2 rows, got {n}"
            )));
        }
        if d == 0 {
            return Err(Error::InvalidParameter("PCA needs at least 1 column".into()));
        }
        let means: Vec<f64> = (0..d)
            .map(|j| matrix.row_iter().map(|r| r[j]).sum::<f64>() / n as f64)
            .collect();

        let mut cov = DMatrix::<f64>::zeros(d, d);
        for row in matrix.row_iter() {
            for a in 0..d {
                let da = row[a] - means[a];
                for b in a..d {
                    cov[(a, b)] += da * (row[b] - means[b]);
                }
            }
        }
        for a in 0..d {
            for b in a..d {
                let v = cov[(a, b)] / (n - 1) as f64;
                cov[(a, b)] = v;
                cov[(b, a)] = v;
            }
        }

        let eigen = SymmetricEigen::new(cov);
        let mut order: Vec<usize> = (0..d).collect();
        order.sort_by(|&a, &b| eigen.eigenvalues[b].total_cmp(&eigen.eigenvalues[a]));

        let mut components = Vec::with_capacity(d);
        let mut explained_variance = Vec::with_capacity(d);
        for &k in &order {
            let mut axis: Vec<f64> = eigen.eigenvectors.column(k).iter().copied().collect();
            let pivot = axis
                .iter()
                .enumerate()
                .fold(0, |best, (i, v)| if v.abs() > axis[best].abs() { i } else { best });
            if axis[pivot] < 0.0 {
                axis.iter_mut().for_each(|v| *v = -*v);
            }
            components.push(axis);
            explained_variance.push(eigen.eigenvalues[k].max(0.0));
        }

        Ok(PcaModel {
            means,
            components,
            explained_variance,
        })
    }

    pub fn rotate(&self, matrix: &NumericMatrix) -> Result<NumericMatrix> {
        let d = self.means.len();
        if matrix.cols() != d {
            return Err(Error::DimensionMismatch {
                expected: d,
                found: matrix.cols(),
            });
        }
        let mut values = Vec::with_capacity(matrix.rows() * self.components.len());
        let mut centered = vec![0.0; d];
        for row in matrix.row_iter() {
            for j in 0..d {
                centered[j] = row[j] - self.means[j];
            }
            for axis in &self.components {
                values.push(axis.iter().zip(&centered).map(|(a, c)| a * c).sum());
            }
        }
        let names = (1..=self.components.len()).map(|k| format!("pc{k}")).collect();
        NumericMatrix::new(matrix.rows(), self.components.len(), values, names)
    }
}

/// Fits a PCA on `matrix` (when `model` is `None`) and rotates onto all
/// components.
pub fn pca_rotate(
    matrix: &NumericMatrix,
    model: Option<&PcaModel>,
) -> Result<(NumericMatrix, PcaModel)> {
    let model = match model {
        Some(m) => m.clone(),
        None => PcaModel::fit(matrix)?,
    };
    Ok((model.rotate(matrix)?, model))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NumericParams {
    pub name: String,
    pub scale: MinMax,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CategoricalParams {
    pub name: String,
    pub categories: Vec<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PreprocessModel {
    pub version: u32,
    pub schema: Schema,
    pub minmax: Vec<NumericParams>,
    pub pca: Option<PcaModel>,
    pub rescale: Vec<MinMax>,
    pub onehot: Vec<CategoricalParams>,
}

impl PreprocessModel {
    /// Number of output features.
    pub fn output_width(&self) -> usize {
        self.rescale.len() + self.onehot.iter().map(|c| c.categories.len()).sum::<usize>()
    }

    pub fn to_json(&self) -> Result<String> {
        serde_json::to_string_pretty(self).map_err(|e| Error::json("preprocess model", e))
    }

    pub fn from_json(text: &str) -> Result<PreprocessModel> {
        let model: PreprocessModel =
            serde_json::from_str(text).map_err(|e| Error::json("preprocess model", e))?;
        if model.version != PREPROCESS_FORMAT_VERSION {
            return Err(Error::InvalidParameter(format!(
                "unsupported preprocess model version {}",
                model.version
            )));
        }
        Ok(model)
    }
}

fn numeric_block(table: &DatasetTable) -> (Vec<&str>, Vec<&[f64]>) {
    table
        .predictors()
        .filter_map(|c| c.as_numeric().map(|v| (c.name.as_str(), v)))
        .unzip()
}

fn scaled_block(
    table: &DatasetTable,
    columns: &[&[f64]],
    names: &[&str],
    params: &[MinMax],
) -> Result<NumericMatrix> {
    let n = table.row_count();
    let mut values = Vec::with_capacity(n * columns.len());
    for i in 0..n {
        for (col, p) in columns.iter().zip(params) {
            values.push(p.apply(col[i]));
        }
    }
    NumericMatrix::new(
        n,
        columns.len(),
        values,
        names.iter().map(|s| s.to_string()).collect(),
    )
}

/// Fits the preprocessing pipeline on a table's predictor columns.
pub fn fit_pipeline(train: &DatasetTable) -> Result<PreprocessModel> {
    let schema = train.predictor_schema();
    if schema.is_empty() {
        return Err(Error::InvalidTable(format!(
            "`{}` has no predictor columns",
            train.name()
        )));
    }
    let (names, columns) = numeric_block(train);
    let minmax = columns
        .iter()
        .map(|c| MinMax::fit(c))
        .collect::<Result<Vec<_>>>()?;

    let (pca, rescale) = if columns.is_empty() {
        (None, Vec::new())
    } else {
        let scaled = scaled_block(train, &columns, &names, &minmax)?;
        let pca = PcaModel::fit(&scaled)?;
        let rotated = pca.rotate(&scaled)?;
        let rescale = (0..rotated.cols())
            .map(|j| MinMax::fit(&rotated.column(j)))
            .collect::<Result<Vec<_>>>()?;
        (Some(pca), rescale)
    };

    let onehot = train
        .predictors()
        .filter_map(|c| {
            c.as_categorical().map(|v| CategoricalParams {
                name: c.name.clone(),
                categories: crate::dataset::distinct_in_order(v),
            })
        })
        .collect();

    Ok(PreprocessModel {
        version: PREPROCESS_FORMAT_VERSION,
        schema,
        minmax: names
            .iter()
            .zip(minmax)
            .map(|(n, scale)| NumericParams {
                name: n.to_string(),
                scale,
            })
            .collect(),
        pca,
        rescale,
        onehot,
    })
}

/// Applies a fitted pipeline. Output columns are the rotated numeric block
/// followed by the indicator blocks in original column order.
pub fn transform(model: &PreprocessModel, table: &DatasetTable) -> Result<NumericMatrix> {
    let schema = table.predictor_schema();
    if schema != model.schema {
        return Err(Error::SchemaMismatch(format!(
            "`{}` does not match the fitted predictor schema",
            table.name()
        )));
    }
    let n = table.row_count();
    let mut blocks: Vec<(Vec<Vec<f64>>, Vec<String>)> = Vec::new();

    if let Some(pca) = &model.pca {
        let (names, columns) = numeric_block(table);
        let params: Vec<MinMax> = model.minmax.iter().map(|p| p.scale).collect();
        let scaled = scaled_block(table, &columns, &names, &params)?;
        let rotated = pca.rotate(&scaled)?;
        let rescaled: Vec<Vec<f64>> = model
            .rescale
            .iter()
            .enumerate()
            .map(|(j, p)| (0..n).map(|i| p.apply(rotated.get(i, j))).collect())
            .collect();
        blocks.push((rescaled, rotated.col_names().to_vec()));
    }

    for params in &model.onehot {
        let column = table
            .column(&params.name)
            .expect("schema checked above");
        let values = match &column.data {
            ColumnData::Categorical(v) => v,
            ColumnData::Numeric(_) => unreachable!("schema checked above"),
        };
        let names = params
            .categories
            .iter()
            .map(|c| format!("{}={}", params.name, c))
            .collect();
        blocks.push((indicator_columns(values, &params.categories), names));
    }

    NumericMatrix::hstack(n, &blocks)
}
