//! The twelve dataset meta-features consumed by the meta-learner.

use std::collections::HashSet;

use serde::{Deserialize, Serialize};

use crate::dataset::DatasetTable;
use crate::error::{Error, Result};
use crate::preprocess::MinMax;

/// Meta-feature values in their canonical order.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct MetaFeatureVector {
    pub n_rows: f64,
    pub n_cols: f64,
    pub rows_to_cols: f64,
    pub n_discrete: f64,
    pub max_factors: f64,
    pub min_factors: f64,
    pub avg_factors: f64,
    pub n_continuous: f64,
    pub grad_avg: f64,
    pub grad_min: f64,
    pub grad_max: f64,
    pub grad_std: f64,
}

/// Field names in canonical order.
pub const META_FEATURE_NAMES: [&str; 12] = [
    "n_rows",
    "n_cols",
    "rows_to_cols",
    "n_discrete",
    "max_factors",
    "min_factors",
    "avg_factors",
    "n_continuous",
    "grad_avg",
    "grad_min",
    "grad_max",
    "grad_std",
];

/// Names a single meta-feature, e.g. in rule predicates.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MetaFeature {
    NRows,
    NCols,
    RowsToCols,
    NDiscrete,
    MaxFactors,
    MinFactors,
    AvgFactors,
    NContinuous,
    GradAvg,
    GradMin,
    GradMax,
    GradStd,
}

impl MetaFeatureVector {
    pub fn to_array(&self) -> [f64; 12] {
        [
            self.n_rows,
            self.n_cols,
            self.rows_to_cols,
            self.n_discrete,
            self.max_factors,
            self.min_factors,
            self.avg_factors,
            self.n_continuous,
            self.grad_avg,
            self.grad_min,
            self.grad_max,
            self.grad_std,
        ]
    }

    pub fn from_array(v: [f64; 12]) -> Self {
        MetaFeatureVector {
            n_rows: v[0],
            n_cols: v[1],
            rows_to_cols: v[2],
            n_discrete: v[3],
            max_factors: v[4],
            min_factors: v[5],
            avg_factors: v[6],
            n_continuous: v[7],
            grad_avg: v[8],
            grad_min: v[9],
            grad_max: v[10],
            grad_std: v[11],
        }
    }

    pub fn get(&self, feature: MetaFeature) -> f64 {
        self.to_array()[feature as usize]
    }
}

/// Mean absolute difference between consecutive rows of the min-max scaled
/// column. Row order matters; a constant column has gradient 0.
pub fn column_gradient(column: &[f64]) -> Result<f64> {
    if column.len() < 2 {
        return Err(Error::InvalidParameter(format!(
            "gradient needs at least 2 values, got {}",
            column.len()
        )));
    }
    let scale = MinMax::fit(column)?;
    let total: f64 = column
        .windows(2)
        .map(|w| (scale.apply(w[1]) - scale.apply(w[0])).abs())
        .sum();
    Ok(total / (column.len() - 1) as f64)
}

pub fn extract(table: &DatasetTable) -> Result<MetaFeatureVector> {
    let n_rows = table.row_count();
    if n_rows < 2 {
        return Err(Error::InvalidTable(format!(
            "`{}` has {n_rows} rows, meta-features need at least 2",
            table.name()
        )));
    }

    let mut factors = Vec::new();
    let mut gradients = Vec::new();
    for column in table.predictors() {
        if let Some(values) = column.as_categorical() {
            let distinct: HashSet<&str> = values.iter().map(String::as_str).collect();
            factors.push(distinct.len() as f64);
        } else if let Some(values) = column.as_numeric() {
            gradients.push(column_gradient(values)?);
        }
    }
    let n_cols = factors.len() + gradients.len();
    if n_cols == 0 {
        return Err(Error::InvalidTable(format!(
            "`{}` has no predictor columns",
            table.name()
        )));
    }

    let (max_factors, min_factors, avg_factors) = summarize(&factors);
    let (grad_max, grad_min, grad_avg) = summarize(&gradients);
    let grad_std = if gradients.is_empty() {
        0.0
    } else {
        let var = gradients.iter().map(|g| (g - grad_avg).powi(2)).sum::<f64>()
            / gradients.len() as f64;
        var.sqrt()
    };

    Ok(MetaFeatureVector {
        n_rows: n_rows as f64,
        n_cols: n_cols as f64,
        rows_to_cols: n_rows as f64 / n_cols as f64,
        n_discrete: factors.len() as f64,
        max_factors,
        min_factors,
        avg_factors,
        n_continuous: gradients.len() as f64,
        grad_avg,
        grad_min,
        grad_max,
        grad_std,
    })
}

/// (max, min, mean), all zero for an empty slice.
fn summarize(values: &[f64]) -> (f64, f64, f64) {
    if values.is_empty() {
        return (0.0, 0.0, 0.0);
    }
    let max = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let min = values.iter().copied().fold(f64::INFINITY, f64::min);
    let mean = values.iter().sum::<f64>() / values.len() as f64;
    (max, min, mean)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dataset::Column;

    #[test]
    fn gradient_examples() {
        let g = column_gradient(&[0.0, 0.5, 1.0, 0.25]).unwrap();
        assert!((g - 1.75 / 3.0).abs() < 1e-15);
        assert_eq!(column_gradient(&[7.0; 4]).unwrap(), 0.0);
        assert_eq!(column_gradient(&[0.0, 1.0, 0.0, 1.0]).unwrap(), 1.0);
        assert!(column_gradient(&[1.0]).is_err());
    }

    #[test]
    fn all_categorical_table() {
        let t = DatasetTable::new(
            "cats",
            vec![
                Column::categorical("a", ["x", "y", "x", "y"]),
                Column::categorical("b", ["p", "q", "r", "p"]),
                Column::categorical("t", ["1", "0", "1", "0"]),
            ],
            "t",
            "1",
        )
        .unwrap();
        let mf = extract(&t).unwrap();
        assert_eq!(mf.n_continuous, 0.0);
        assert_eq!([mf.grad_avg, mf.grad_min, mf.grad_max, mf.grad_std], [0.0; 4]);
        assert_eq!((mf.max_factors, mf.min_factors, mf.avg_factors), (3.0, 2.0, 2.5));
    }

    #[test]
    fn json_keys_follow_canonical_order() {
        let mf = MetaFeatureVector::from_array(std::array::from_fn(|i| i as f64));
        let json = serde_json::to_string(&mf).unwrap();
        let mut last = 0;
        for name in META_FEATURE_NAMES {
            let pos = json.find(&format!("\"{name}\"")).unwrap();
            assert!(pos >= last);
            last = pos;
        }
        assert_eq!(mf.get(MetaFeature::GradStd), 11.0);
        assert_eq!(mf.get(MetaFeature::NRows), 0.0);
    }

    #[test]
    fn rejects_degenerate_tables() {
        let t = DatasetTable::new("t", vec![Column::categorical("t", ["a", "b"])], "t", "a").unwrap();
        assert!(extract(&t).is_err());
    }
}
