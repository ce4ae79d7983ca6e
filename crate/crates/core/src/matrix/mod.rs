//! Dense and CSR matrices plus the factorizations the solvers and the
//! theory engine rely on.

mod csr;
mod dense;
mod eig;
mod mtx;
mod qr;
mod svd;
mod vecfile;

pub use csr::{sparse_dot, CsrMatrix, GramStats};
pub use dense::{axpy, dot, norm_sq, DenseMatrix};
pub use eig::{adjugate, determinant, min_eigenvalue, symmetric_eigenvalues};
pub use mtx::{parse_matrix_market, read_matrix_market, write_dense_matrix_market, write_matrix_market};
pub use qr::{complete_orthonormal_basis, qr_householder, QR_RANK_TOL};
pub use svd::{svd_jacobi, SvdResult, MAX_SWEEPS, RANK_TOL};
pub use vecfile::{parse_vector, read_vector, write_vector};

use serde::{Deserialize, Serialize};

use crate::error::Result;

/// Row-wise access used by every Kaczmarz-type update.
pub trait RowAccess: Sync {
    fn nrows(&self) -> usize;
    fn ncols(&self) -> usize;
    /// `⟨A_i, x⟩`.
    fn row_dot(&self, i: usize, x: &[f64]) -> f64;
    /// `y += alpha · A_i`.
    fn row_axpy(&self, i: usize, alpha: f64, y: &mut [f64]);
    /// `⟨A_i, A_j⟩`.
    fn rows_dot(&self, i: usize, j: usize) -> f64;
    /// Calls `f(col, value)` over the stored entries of row `i`.
    fn for_each_in_row(&self, i: usize, f: &mut dyn FnMut(usize, f64));
    /// Number of stored entries in row `i`.
    fn row_len(&self, i: usize) -> usize;

    fn row_norm_sq(&self, i: usize) -> f64 {
        self.rows_dot(i, i)
    }

    /// Dense copy of the selected rows.
    fn gather_rows(&self, idx: &[usize]) -> DenseMatrix {
        let n = self.ncols();
        let mut out = DenseMatrix::zeros(idx.len(), n);
        for (k, &i) in idx.iter().enumerate() {
            let row = out.row_mut(k);
            self.for_each_in_row(i, &mut |c, v| row[c] = v);
        }
        out
    }
}

impl RowAccess for DenseMatrix {
    fn nrows(&self) -> usize {
        self.rows()
    }

    fn ncols(&self) -> usize {
        self.cols()
    }

    #[inline]
    fn row_dot(&self, i: usize, x: &[f64]) -> f64 {
        dot(self.row(i), x)
    }

    #[inline]
    fn row_axpy(&self, i: usize, alpha: f64, y: &mut [f64]) {
        axpy(alpha, self.row(i), y)
    }

    #[inline]
    fn rows_dot(&self, i: usize, j: usize) -> f64 {
        dot(self.row(i), self.row(j))
    }

    fn for_each_in_row(&self, i: usize, f: &mut dyn FnMut(usize, f64)) {
        for (c, &v) in self.row(i).iter().enumerate() {
            f(c, v);
        }
    }

    fn row_len(&self, _i: usize) -> usize {
        self.cols()
    }
}

impl RowAccess for CsrMatrix {
    fn nrows(&self) -> usize {
        self.rows()
    }

    fn ncols(&self) -> usize {
        self.cols()
    }

    #[inline]
    fn row_dot(&self, i: usize, x: &[f64]) -> f64 {
        let (idx, vals) = self.row(i);
        idx.iter().zip(vals).map(|(&c, &v)| v * x[c]).sum()
    }

    #[inline]
    fn row_axpy(&self, i: usize, alpha: f64, y: &mut [f64]) {
        let (idx, vals) = self.row(i);
        for (&c, &v) in idx.iter().zip(vals) {
            y[c] += alpha * v;
        }
    }

    #[inline]
    fn rows_dot(&self, i: usize, j: usize) -> f64 {
        sparse_dot(self.row(i), self.row(j)).0
    }

    fn for_each_in_row(&self, i: usize, f: &mut dyn FnMut(usize, f64)) {
        let (idx, vals) = self.row(i);
        for (&c, &v) in idx.iter().zip(vals) {
            f(c, v);
        }
    }

    fn row_len(&self, i: usize) -> usize {
        self.row(i).0.len()
    }
}

/// Either storage, for callers that load matrices at runtime.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub enum SystemMatrix {
    Dense(DenseMatrix),
    Sparse(CsrMatrix),
}

impl SystemMatrix {
    pub fn matvec(&self, x: &[f64]) -> Result<Vec<f64>> {
        match self {
            SystemMatrix::Dense(a) => a.matvec(x),
            SystemMatrix::Sparse(a) => a.matvec(x),
        }
    }

    pub fn to_dense(&self) -> DenseMatrix {
        match self {
            SystemMatrix::Dense(a) => a.clone(),
            SystemMatrix::Sparse(a) => a.to_dense(),
        }
    }

    pub fn to_csr(&self) -> CsrMatrix {
        match self {
            SystemMatrix::Dense(a) => CsrMatrix::from_dense(a),
            SystemMatrix::Sparse(a) => a.clone(),
        }
    }
}

macro_rules! dispatch {
    ($self:ident, $a:ident => $e:expr) => {
        match $self {
            SystemMatrix::Dense($a) => $e,
            SystemMatrix::Sparse($a) => $e,
        }
    };
}

impl RowAccess for SystemMatrix {
    fn nrows(&self) -> usize {
        dispatch!(self, a => a.nrows())
    }

    fn ncols(&self) -> usize {
        dispatch!(self, a => a.ncols())
    }

    #[inline]
    fn row_dot(&self, i: usize, x: &[f64]) -> f64 {
        dispatch!(self, a => a.row_dot(i, x))
    }

    #[inline]
    fn row_axpy(&self, i: usize, alpha: f64, y: &mut [f64]) {
        dispatch!(self, a => a.row_axpy(i, alpha, y))
    }

    #[inline]
    fn rows_dot(&self, i: usize, j: usize) -> f64 {
        dispatch!(self, a => a.rows_dot(i, j))
    }

    fn for_each_in_row(&self, i: usize, f: &mut dyn FnMut(usize, f64)) {
        dispatch!(self, a => a.for_each_in_row(i, f))
    }

    fn row_len(&self, i: usize) -> usize {
        dispatch!(self, a => a.row_len(i))
    }
}
