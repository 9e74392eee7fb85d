use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Dense row-major matrix of finite reals with named columns.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NumericMatrix {
    rows: usize,
    cols: usize,
    values: Vec<f64>,
    col_names: Vec<String>,
}

impl NumericMatrix {
    pub fn new(rows: usize, cols: usize, values: Vec<f64>, col_names: Vec<String>) -> Result<Self> {
        if values.len() != rows * cols {
            return Err(Error::DimensionMismatch {
                expected: rows * cols,
                found: values.len(),
            });
        }
        if col_names.len() != cols {
            return Err(Error::DimensionMismatch {
                expected: cols,
                found: col_names.len(),
            });
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite);
        }
        Ok(NumericMatrix {
            rows,
            cols,
            values,
            col_names,
        })
    }

    /// Builds a matrix from rows, naming columns `x0, x1, ...`.
    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let cols = rows.first().map(Vec::len).unwrap_or(0);
        if let Some(bad) = rows.iter().find(|r| r.len() != cols) {
            return Err(Error::DimensionMismatch {
                expected: cols,
                found: bad.len(),
            });
        }
        let values = rows.iter().flatten().copied().collect();
        let names = (0..cols).map(|j| format!("x{j}")).collect();
        NumericMatrix::new(rows.len(), cols, values, names)
    }

    pub fn empty(cols: usize) -> Self {
        NumericMatrix {
            rows: 0,
            cols,
            values: Vec::new(),
            col_names: (0..cols).map(|j| format!("x{j}")).collect(),
        }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn col_names(&self) -> &[String] {
        &self.col_names
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.values[i * self.cols..(i + 1) * self.cols]
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.values[i * self.cols + j]
    }

    pub fn column(&self, j: usize) -> Vec<f64> {
        (0..self.rows).map(|i| self.get(i, j)).collect()
    }

    pub fn row_iter(&self) -> impl Iterator<Item = &[f64]> {
        // chunks_exact panics on a zero chunk size
        let width = self.cols.max(1);
        self.values.chunks_exact(width).take(if self.cols == 0 { 0 } else { self.rows })
    }

    pub fn select_rows(&self, rows: &[usize]) -> NumericMatrix {
        let mut values = Vec::with_capacity(rows.len() * self.cols);
        for &r in rows {
            values.extend_from_slice(self.row(r));
        }
        NumericMatrix {
            rows: rows.len(),
            cols: self.cols,
            values,
            col_names: self.col_names.clone(),
        }
    }

    /// Population variance of every entry, as used by RBF `gamma` scaling.
    pub fn total_variance(&self) -> f64 {
        let n = self.values.len();
        if n == 0 {
            return 0.0;
        }
        let mean = self.values.iter().sum::<f64>() / n as f64;
        self.values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / n as f64
    }

    /// Column blocks joined left to right. All parts must share a row count.
    pub fn hstack(rows: usize, parts: &[(Vec<Vec<f64>>, Vec<String>)]) -> Result<NumericMatrix> {
        let cols: usize = parts.iter().map(|(c, _)| c.len()).sum();
        let mut names = Vec::with_capacity(cols);
        let mut columns: Vec<&Vec<f64>> = Vec::with_capacity(cols);
        for (block, block_names) in parts {
            for c in block {
                if c.len() != rows {
                    return Err(Error::DimensionMismatch {
                        expected: rows,
                        found: c.len(),
                    });
                }
                columns.push(c);
            }
            names.extend(block_names.iter().cloned());
        }
        let mut values = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            values.extend(columns.iter().map(|c| c[i]));
        }
        NumericMatrix::new(rows, cols, values, names)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn row_access_and_variance() {
        let m = NumericMatrix::from_rows(&[vec![1.0, 2.0], vec![3.0, 4.0]]).unwrap();
        assert_eq!(m.row(1), &[3.0, 4.0]);
        assert_eq!(m.column(0), vec![1.0, 3.0]);
        assert_eq!(m.row_iter().count(), 2);
        assert!((m.total_variance() - 1.25).abs() < 1e-15);
    }

    #[test]
    fn rejects_non_finite_and_bad_shapes() {
        assert!(matches!(
            NumericMatrix::from_rows(&[vec![f64::NAN]]),
            Err(Error::NonFinite)
        ));
        assert!(NumericMatrix::from_rows(&[vec![1.0], vec![1.0, 2.0]]).is_err());
        assert_eq!(NumericMatrix::empty(3).row_iter().count(), 0);
    }
}
