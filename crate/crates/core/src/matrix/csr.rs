use serde::{Deserialize, Serialize};

use super::dense::DenseMatrix;
use crate::error::{Error, Result};

/// Compressed sparse row matrix.
///
/// Column indices are strictly increasing within each row and no explicit
/// zeros are stored.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CsrMatrix {
    rows: usize,
    cols: usize,
    row_ptr: Vec<usize>,
    col_idx: Vec<usize>,
    values: Vec<f64>,
}

/// Operation counts gathered while forming `A A^T`.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct GramStats {
    /// `Σ_{(i,ℓ)∈T, i≤ℓ} s_{i,ℓ}`: overlapping nonzeros over the upper triangle.
    pub overlap_sum: u64,
    /// `|T|`, the number of structurally nonzero entries of `A A^T`.
    pub t_size: u64,
    /// Floating-point operations actually executed in the sparse dot products.
    pub flops: u64,
}

impl CsrMatrix {
    /// Validates raw CSR arrays.
    pub fn new(rows: usize, cols: usize, row_ptr: Vec<usize>, col_idx: Vec<usize>, values: Vec<f64>) -> Result<Self> {
        if row_ptr.len() != rows + 1 {
            return Err(Error::InvalidMatrix(format!(
                "row_ptr has length {}, expected {}",
                row_ptr.len(),
                rows + 1
            )));
        }
        if row_ptr[0] != 0 {
            return Err(Error::InvalidMatrix("row_ptr[0] must be 0".into()));
        }
        let nnz = row_ptr[rows];
        if col_idx.len() != nnz || values.len() != nnz {
            return Err(Error::InvalidMatrix(format!(
                "nnz mismatch: row_ptr says {nnz}, col_idx {} values {}",
                col_idx.len(),
                values.len()
            )));
        }
        for i in 0..rows {
            let (lo, hi) = (row_ptr[i], row_ptr[i + 1]);
            if lo > hi {
                return Err(Error::InvalidMatrix(format!("row_ptr decreases at row {i}")));
            }
            for k in lo..hi {
                let c = col_idx[k];
                if c >= cols {
                    return Err(Error::InvalidMatrix(format!(
                        "column index {c} out of range in row {i}"
                    )));
                }
                if k > lo && col_idx[k - 1] >= c {
                    return Err(Error::InvalidMatrix(format!(
                        "column indices not strictly increasing in row {i}"
                    )));
                }
                let v = values[k];
                if !v.is_finite() {
                    return Err(Error::NonFinite { row: i, col: c });
                }
                if v == 0.0 {
                    return Err(Error::InvalidMatrix(format!("explicit zero stored at ({i}, {c})")));
                }
            }
        }
        Ok(Self {
            rows,
            cols,
            row_ptr,
            col_idx,
            values,
        })
    }

    /// Builds from (row, col, value) triplets: duplicates are summed, zeros dropped.
    pub fn from_triplets(rows: usize, cols: usize, triplets: &[(usize, usize, f64)]) -> Result<Self> {
        let mut sorted = triplets.to_vec();
        for &(i, j, v) in &sorted {
            if i >= rows || j >= cols {
                return Err(Error::InvalidMatrix(format!(
                    "triplet ({i}, {j}) out of range for {rows}x{cols}"
                )));
            }
            if !v.is_finite() {
                return Err(Error::NonFinite { row: i, col: j });
            }
        }
        sorted.sort_by_key(|t| (t.0, t.1));
        let mut row_ptr = vec![0usize; rows + 1];
        let mut col_idx = Vec::with_capacity(sorted.len());
        let mut values = Vec::with_capacity(sorted.len());
        let mut k = 0;
        for i in 0..rows {
            while k < sorted.len() && sorted[k].0 == i {
                let j = sorted[k].1;
                let mut v = 0.0;
                while k < sorted.len() && sorted[k].0 == i && sorted[k].1 == j {
                    v += sorted[k].2;
                    k += 1;
                }
                if v != 0.0 {
                    col_idx.push(j);
                    values.push(v);
                }
            }
            row_ptr[i + 1] = col_idx.len();
        }
        Self::new(rows, cols, row_ptr, col_idx, values)
    }

    pub fn from_dense(a: &DenseMatrix) -> Self {
        let mut row_ptr = Vec::with_capacity(a.rows() + 1);
        row_ptr.push(0);
        let mut col_idx = Vec::new();
        let mut values = Vec::new();
        for i in 0..a.rows() {
            for (j, &v) in a.row(i).iter().enumerate() {
                if v != 0.0 {
                    col_idx.push(j);
                    values.push(v);
                }
            }
            row_ptr.push(col_idx.len());
        }
        Self {
            rows: a.rows(),
            cols: a.cols(),
            row_ptr,
            col_idx,
            values,
        }
    }

    pub fn identity(n: usize) -> Self {
        Self {
            rows: n,
            cols: n,
            row_ptr: (0..=n).collect(),
            col_idx: (0..n).collect(),
            values: vec![1.0; n],
        }
    }

    pub fn to_dense(&self) -> DenseMatrix {
        let mut d = DenseMatrix::zeros(self.rows, self.cols);
        for i in 0..self.rows {
            let (idx, vals) = self.row(i);
            for (&j, &v) in idx.iter().zip(vals) {
                d[(i, j)] = v;
            }
        }
        d
    }

    #[inline]
    pub fn rows(&self) -> usize {
        self.rows
    }

    #[inline]
    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    pub fn row_ptr(&self) -> &[usize] {
        &self.row_ptr
    }

    pub fn col_idx(&self) -> &[usize] {
        &self.col_idx
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// Column indices and values of row `i`.
    #[inline]
    pub fn row(&self, i: usize) -> (&[usize], &[f64]) {
        let (lo, hi) = (self.row_ptr[i], self.row_ptr[i + 1]);
        (&self.col_idx[lo..hi], &self.values[lo..hi])
    }

    /// Value at `(i, j)`, zero when not stored.
    pub fn get(&self, i: usize, j: usize) -> f64 {
        let (idx, vals) = self.row(i);
        idx.binary_search(&j).map_or(0.0, |k| vals[k])
    }

    pub fn matvec(&self, x: &[f64]) -> Result<Vec<f64>> {
        if x.len() != self.cols {
            return Err(Error::DimensionMismatch {
                expected: self.cols,
                actual: x.len(),
            });
        }
        Ok((0..self.rows)
            .map(|i| {
                let (idx, vals) = self.row(i);
                idx.iter().zip(vals).map(|(&j, &v)| v * x[j]).sum()
            })
            .collect())
    }

    pub fn row_norms_sq(&self) -> Vec<f64> {
        (0..self.rows)
            .map(|i| self.row(i).1.iter().map(|v| v * v).sum())
            .collect()
    }

    /// First zero row, if any.
    pub fn find_zero_row(&self) -> Option<usize> {
        (0..self.rows).find(|&i| self.row_ptr[i] == self.row_ptr[i + 1])
    }

    pub fn ensure_no_zero_rows(&self) -> Result<()> {
        match self.find_zero_row() {
            Some(i) => Err(Error::ZeroRow(i)),
            None => Ok(()),
        }
    }

    /// Transpose, used here as a column-to-rows index.
    pub fn transpose(&self) -> CsrMatrix {
        let mut counts = vec![0usize; self.cols + 1];
        for &c in &self.col_idx {
            counts[c + 1] += 1;
        }
        for c in 0..self.cols {
            counts[c + 1] += counts[c];
        }
        let row_ptr = counts.clone();
        let mut next = counts;
        let mut col_idx = vec![0usize; self.nnz()];
        let mut values = vec![0.0; self.nnz()];
        for i in 0..self.rows {
            let (idx, vals) = self.row(i);
            for (&c, &v) in idx.iter().zip(vals) {
                let k = next[c];
                col_idx[k] = i;
                values[k] = v;
                next[c] += 1;
            }
        }
        CsrMatrix {
            rows: self.cols,
            cols: self.rows,
            row_ptr,
            col_idx,
            values,
        }
    }

    /// `A A^T` stored sparse.
    pub fn gram(&self) -> Result<CsrMatrix> {
        self.gram_with_stats().map(|(g, _)| g)
    }

    /// `A A^T` via sparse dot products over intersecting column supports.
    ///
    /// For each row `i` the candidate partners `ℓ ≥ i` are found through the
    /// column index; each inner product then merges the two sorted supports.
    /// Exactly-cancelling entries are dropped so the CSR invariants hold.
    pub fn gram_with_stats(&self) -> Result<(CsrMatrix, GramStats)> {
        self.ensure_no_zero_rows()?;
        let m = self.rows;
        let at = self.transpose();
        let mut stats = GramStats::default();
        let mut marker = vec![usize::MAX; m];
        let mut upper: Vec<Vec<(usize, f64)>> = vec![Vec::new(); m];
        let mut partners = Vec::new();
        for i in 0..m {
            partners.clear();
            let (ci, _) = self.row(i);
            for &c in ci {
                for &l in at.row(c).0 {
                    if l >= i && marker[l] != i {
                        marker[l] = i;
                        partners.push(l);
                    }
                }
            }
            partners.sort_unstable();
            for &l in &partners {
                let (v, s) = sparse_dot(self.row(i), self.row(l));
                stats.overlap_sum += s as u64;
                stats.flops += 2 * s as u64 - 1;
                stats.t_size += if l == i { 1 } else { 2 };
                if v != 0.0 {
                    upper[i].push((l, v));
                }
            }
        }
        // Mirror the upper triangle; values are copied so symmetry is exact.
        let mut full: Vec<Vec<(usize, f64)>> = vec![Vec::new(); m];
        for (i, entries) in upper.iter().enumerate() {
            for &(l, v) in entries {
                if l != i {
                    full[l].push((i, v));
                }
            }
        }
        for (i, entries) in upper.into_iter().enumerate() {
            full[i].extend(entries);
        }
        let mut row_ptr = Vec::with_capacity(m + 1);
        row_ptr.push(0);
        let mut col_idx = Vec::new();
        let mut values = Vec::new();
        for row in full {
            // lower-triangle entries were pushed in increasing i, upper ones follow
            for (c, v) in row {
                col_idx.push(c);
                values.push(v);
            }
            row_ptr.push(col_idx.len());
        }
        let g = CsrMatrix {
            rows: m,
            cols: m,
            row_ptr,
            col_idx,
            values,
        };
        Ok((g, stats))
    }
}

/// Inner product of two sorted sparse rows; also returns the overlap count.
#[inline]
pub fn sparse_dot((ia, va): (&[usize], &[f64]), (ib, vb): (&[usize], &[f64])) -> (f64, usize) {
    let (mut p, mut q) = (0, 0);
    let mut acc = 0.0;
    let mut overlap = 0;
    while p < ia.len() && q < ib.len() {
        match ia[p].cmp(&ib[q]) {
            std::cmp::Ordering::Less => p += 1,
            std::cmp::Ordering::Greater => q += 1,
            std::cmp::Ordering::Equal => {
                acc += va[p] * vb[q];
                overlap += 1;
                p += 1;
                q += 1;
            }
        }
    }
    (acc, overlap)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn diagonal_matvec() {
        let a = CsrMatrix::from_triplets(2, 2, &[(0, 0, 2.0), (1, 1, 3.0)]).unwrap();
        assert_eq!(a.matvec(&[1.0, 1.0]).unwrap(), vec![2.0, 3.0]);
    }

    #[test]
    fn identity_gram_has_three_entries() {
        let g = CsrMatrix::identity(3).gram().unwrap();
        assert_eq!(g.nnz(), 3);
        assert_eq!(g.to_dense(), DenseMatrix::identity(3));
    }

    #[test]
    fn orthogonal_rows_give_diagonal_gram() {
        let a = CsrMatrix::from_triplets(3, 4, &[(0, 0, 1.0), (1, 1, 2.0), (2, 3, 3.0)]).unwrap();
        let g = a.gram().unwrap();
        assert_eq!(g.to_dense(), DenseMatrix::from_diag(&[1.0, 4.0, 9.0]));
    }

    #[test]
    fn zero_row_rejected_by_gram() {
        let a = CsrMatrix::from_triplets(2, 2, &[(0, 0, 1.0)]).unwrap();
        assert!(matches!(a.gram(), Err(Error::ZeroRow(1))));
    }

    #[test]
    fn invariants_checked() {
        assert!(CsrMatrix::new(1, 3, vec![0, 2], vec![2, 1], vec![1.0, 1.0]).is_err());
        assert!(CsrMatrix::new(1, 3, vec![0, 1], vec![0], vec![0.0]).is_err());
        assert!(CsrMatrix::new(1, 3, vec![1, 1], vec![], vec![]).is_err());
        assert!(CsrMatrix::new(1, 3, vec![0, 1], vec![3], vec![1.0]).is_err());
    }

    #[test]
    fn duplicates_summed_and_cancellations_dropped() {
        let a = CsrMatrix::from_triplets(1, 2, &[(0, 0, 1.0), (0, 0, 2.0), (0, 1, 1.0), (0, 1, -1.0)]).unwrap();
        assert_eq!(a.nnz(), 1);
        assert_eq!(a.get(0, 0), 3.0);
    }

    #[test]
    fn gram_flop_count_matches_overlap_formula() {
        // path incidence: each row overlaps itself in 2 places, neighbours in 1
        let a = CsrMatrix::from_triplets(
            3,
            4,
            &[
                (0, 0, 1.0),
                (0, 1, -1.0),
                (1, 1, 1.0),
                (1, 2, -1.0),
                (2, 2, 1.0),
                (2, 3, -1.0),
            ],
        )
        .unwrap();
        let (_, st) = a.gram_with_stats().unwrap();
        // upper triangle pairs: (0,0),(0,1),(1,1),(1,2),(2,2)
        assert_eq!(st.overlap_sum, 2 + 1 + 2 + 1 + 2);
        assert_eq!(st.t_size, 3 + 2 * 2);
        assert_eq!(st.flops, 3 + 1 + 3 + 1 + 3);
    }
}
