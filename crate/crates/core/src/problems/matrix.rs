use ndarray::Array2;

use crate::point::Point;

/// Compressed sparse rows.
#[derive(Clone, Debug, PartialEq)]
pub struct CsrMatrix {
    nrows: usize,
    ncols: usize,
    indptr: Vec<usize>,
    indices: Vec<usize>,
    values: Vec<f64>,
}

#[derive(Debug, thiserror::Error, PartialEq)]
pub enum MatrixError {
    #[error("column index {index} out of range for {ncols} columns (row {row})")]
    ColumnOutOfRange { row: usize, index: usize, ncols: usize },
    #[error("non-finite entry at ({row}, {col})")]
    NonFinite { row: usize, col: usize },
}

impl CsrMatrix {
    /// Builds from per-row `(column, value)` lists. Columns within a row may
    /// come in any order; explicit zeros are dropped.
    pub fn from_rows(ncols: usize, rows: &[Vec<(usize, f64)>]) -> Result<Self, MatrixError> {
        let mut indptr = Vec::with_capacity(rows.len() + 1);
        let mut indices = Vec::new();
        let mut values = Vec::new();
        indptr.push(0);
        for (i, row) in rows.iter().enumerate() {
            let mut row = row.clone();
            row.sort_by_key(|&(j, _)| j);
            for (j, v) in row {
                if j >= ncols {
                    return Err(MatrixError::ColumnOutOfRange { row: i, index: j, ncols });
                }
                if !v.is_finite() {
                    return Err(MatrixError::NonFinite { row: i, col: j });
                }
                if v != 0.0 {
                    indices.push(j);
                    values.push(v);
                }
            }
            indptr.push(indices.len());
        }
        Ok(Self { nrows: rows.len(), ncols, indptr, indices, values })
    }

    pub fn from_dense(a: &Array2<f64>) -> Self {
        let rows: Vec<Vec<(usize, f64)>> = a
            .rows()
            .into_iter()
            .map(|r| r.iter().enumerate().filter(|(_, v)| **v != 0.0).map(|(j, v)| (j, *v)).collect())
            .collect();
        Self::from_rows(a.ncols(), &rows).expect("dense input has valid shape")
    }

    pub fn to_dense(&self) -> Array2<f64> {
        let mut a = Array2::zeros((self.nrows, self.ncols));
        for i in 0..self.nrows {
            for (j, v) in self.row(i) {
                a[[i, j]] = v;
            }
        }
        a
    }

    pub fn scaled(mut self, factor: f64) -> Self {
        self.values.iter_mut().for_each(|v| *v *= factor);
        self
    }

    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    pub fn row(&self, i: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        let span = self.indptr[i]..self.indptr[i + 1];
        self.indices[span.clone()].iter().copied().zip(self.values[span].iter().copied())
    }

    fn apply(&self, x: &Point) -> Point {
        Point::from_iter((0..self.nrows).map(|i| self.row(i).map(|(j, v)| v * x[j]).sum::<f64>()))
    }

    fn apply_transpose(&self, u: &Point) -> Point {
        let mut out = Point::zeros(self.ncols);
        for i in 0..self.nrows {
            let ui = u[i];
            for (j, v) in self.row(i) {
                out[j] += v * ui;
            }
        }
        out
    }
}

/// `m × n` design matrix, dense or sparse.
#[derive(Clone, Debug, PartialEq)]
pub enum DesignMatrix {
    Dense(Array2<f64>),
    Sparse(CsrMatrix),
}

impl DesignMatrix {
    pub fn nrows(&self) -> usize {
        match self {
            DesignMatrix::Dense(a) => a.nrows(),
            DesignMatrix::Sparse(a) => a.nrows,
        }
    }

    pub fn ncols(&self) -> usize {
        match self {
            DesignMatrix::Dense(a) => a.ncols(),
            DesignMatrix::Sparse(a) => a.ncols,
        }
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.nrows(), self.ncols())
    }

    /// `A x`.
    pub fn apply(&self, x: &Point) -> Point {
        assert_eq!(x.len(), self.ncols(), "apply: dimension mismatch");
        match self {
            DesignMatrix::Dense(a) => a.dot(x),
            DesignMatrix::Sparse(a) => a.apply(x),
        }
    }

    /// `Aᵀ u`.
    pub fn apply_transpose(&self, u: &Point) -> Point {
        assert_eq!(u.len(), self.nrows(), "apply_transpose: dimension mismatch");
        match self {
            DesignMatrix::Dense(a) => a.t().dot(u),
            DesignMatrix::Sparse(a) => a.apply_transpose(u),
        }
    }

    pub fn to_dense(&self) -> Array2<f64> {
        match self {
            DesignMatrix::Dense(a) => a.clone(),
            DesignMatrix::Sparse(a) => a.to_dense(),
        }
    }

    pub fn to_sparse(&self) -> CsrMatrix {
        match self {
            DesignMatrix::Dense(a) => CsrMatrix::from_dense(a),
            DesignMatrix::Sparse(a) => a.clone(),
        }
    }

    pub fn all_finite(&self) -> bool {
        match self {
            DesignMatrix::Dense(a) => a.iter().all(|v| v.is_finite()),
            DesignMatrix::Sparse(a) => a.values.iter().all(|v| v.is_finite()),
        }
    }
}
