//! Dense row-major matrix of `f64` values.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Row-major matrix. Rows are samples, columns are features.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Matrix {
    cols: usize,
    data: Vec<f64>,
}

impl Matrix {
    /// Matrix with `cols` columns and no rows yet.
    pub fn empty(cols: usize) -> Self {
        Matrix {
            cols,
            data: Vec::new(),
        }
    }

    /// Build from a flat row-major buffer.
    pub fn from_flat(cols: usize, data: Vec<f64>) -> Result<Self> {
        if cols == 0 {
            return Err(Error::InvalidParameter(
                "matrix needs at least one column".into(),
            ));
        }
        if data.len() % cols != 0 {
            return Err(Error::InvalidParameter(format!(
                "flat buffer of {} values is not a multiple of {} columns",
                data.len(),
                cols
            )));
        }
        Ok(Matrix { cols, data })
    }

    /// Build from per-row slices; all rows must have the same length.
    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let Some(first) = rows.first() else {
            return Err(Error::InvalidParameter(
                "cannot infer column count from zero rows".into(),
            ));
        };
        let cols = first.len();
        let mut m = Matrix::empty(cols);
        for row in rows {
            m.push_row(row)?;
        }
        Ok(m)
    }

    pub fn nrows(&self) -> usize {
        if self.cols == 0 {
            0
        } else {
            self.data.len() / self.cols
        }
    }

    pub fn ncols(&self) -> usize {
        self.cols
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn rows(&self) -> impl Iterator<Item = &[f64]> {
        self.data.chunks_exact(self.cols.max(1))
    }

    pub fn column(&self, j: usize) -> impl Iterator<Item = f64> + '_ {
        self.data.iter().skip(j).step_by(self.cols).copied()
    }

    pub fn push_row(&mut self, row: &[f64]) -> Result<()> {
        if row.len() != self.cols {
            return Err(Error::DimensionMismatch {
                expected: self.cols,
                found: row.len(),
            });
        }
        self.data.extend_from_slice(row);
        Ok(())
    }

    /// New matrix holding the given rows, in order. Indices may repeat.
    pub fn select_rows(&self, indices: &[usize]) -> Matrix {
        let mut data = Vec::with_capacity(indices.len() * self.cols);
        for &i in indices {
            data.extend_from_slice(self.row(i));
        }
        Matrix {
            cols: self.cols,
            data,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn from_rows_and_access() {
        let m = Matrix::from_rows(&[vec![1.0, 2.0], vec![3.0, 4.0]]).unwrap();
        assert_eq!(m.nrows(), 2);
        assert_eq!(m.ncols(), 2);
        assert_eq!(m.row(1), &[3.0, 4.0]);
        assert_eq!(m.column(0).collect::<Vec<_>>(), vec![1.0, 3.0]);
    }

    #[test]
    fn ragged_rows_rejected() {
        assert!(Matrix::from_rows(&[vec![1.0], vec![1.0, 2.0]]).is_err());
    }

    #[test]
    fn select_repeats_rows() {
        let m = Matrix::from_rows(&[vec![1.0], vec![2.0]]).unwrap();
        let s = m.select_rows(&[1, 1, 0]);
        assert_eq!(s.nrows(), 3);
        assert_eq!(s.row(0), &[2.0]);
        assert_eq!(s.row(2), &[1.0]);
    }
}
