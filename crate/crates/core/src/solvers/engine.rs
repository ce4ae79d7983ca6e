use rand::seq::SliceRandom;

use crate::error::{Error, Result};
use crate::matrix::{svd_jacobi, RowAccess, RANK_TOL};
use crate::sampling::{RngStream, VsEnumerator, VsPreprocS2};

/// `|det G| ≤ PAIR_DEGENERACY · ‖A_i‖² ‖A_j‖²` switches a pair solve to the
/// rank-one pseudoinverse.
pub const PAIR_DEGENERACY: f64 = 1e-14;

/// Inverse-CDF sampler over squared row norms.
#[derive(Clone, Debug)]
pub struct RowNormSampler {
    cdf: Vec<f64>,
}

impl RowNormSampler {
    pub fn new(norms_sq: &[f64]) -> Result<Self> {
        if let Some(i) = norms_sq.iter().position(|&v| !(v > 0.0)) {
            return Err(Error::ZeroRow(i));
        }
        let mut acc = 0.0;
        let cdf = norms_sq
            .iter()
            .map(|v| {
                acc += v;
                acc
            })
            .collect();
        Ok(Self { cdf })
    }

    #[inline]
    pub fn sample(&self, rng: &mut RngStream) -> usize {
        let t = rng.uniform_positive() * self.cdf[self.cdf.len() - 1];
        crate::sampling::first_at_least(&self.cdf, t)
    }

    /// Two distinct rows: `i` by norm, then `j ≠ i` by norm renormalized over
    /// the remaining rows (drawn by rejection).
    #[inline]
    pub fn sample_pair(&self, rng: &mut RngStream) -> (usize, usize) {
        let i = self.sample(rng);
        loop {
            let j = self.sample(rng);
            if j != i {
                return (i, j);
            }
        }
    }
}

/// Volume sampler backing RBKVS and mRBKVS.
#[derive(Clone, Copy, Debug)]
pub enum VsSource<'a> {
    Pairs(&'a VsPreprocS2),
    Enumerated(&'a VsEnumerator),
}

impl VsSource<'_> {
    pub fn block_size(&self) -> usize {
        match self {
            VsSource::Pairs(_) => 2,
            VsSource::Enumerated(e) => e.block_size(),
        }
    }

    fn rows(&self) -> usize {
        match self {
            VsSource::Pairs(p) => p.m(),
            VsSource::Enumerated(e) => e.subsets().iter().flatten().max().map_or(0, |&i| i + 1),
        }
    }
}

/// Row or block selection rule.
#[derive(Clone, Debug)]
pub enum BlockPicker<'a> {
    Rk(RowNormSampler),
    Rbk(Vec<Vec<usize>>),
    Gtrk(RowNormSampler),
    Volume(VsSource<'a>),
}

impl BlockPicker<'_> {
    /// Random partition of `0..m` into consecutive blocks of `p` entries of a
    /// uniform permutation; the last block is shorter when `p ∤ m`.
    pub fn random_partition(m: usize, p: usize, rng: &mut RngStream) -> Vec<Vec<usize>> {
        let mut perm: Vec<usize> = (0..m).collect();
        perm.shuffle(rng);
        perm.chunks(p).map(<[usize]>::to_vec).collect()
    }

    #[inline]
    fn pick(&self, rng: &mut RngStream, out: &mut Vec<usize>) {
        out.clear();
        match self {
            BlockPicker::Rk(s) => out.push(s.sample(rng)),
            BlockPicker::Rbk(blocks) => out.extend_from_slice(&blocks[rng.index(blocks.len())]),
            BlockPicker::Gtrk(s) => {
                let (i, j) = s.sample_pair(rng);
                out.extend_from_slice(&[i, j]);
            }
            BlockPicker::Volume(VsSource::Pairs(p)) => {
                let (i, j) = p.sample(rng);
                out.extend_from_slice(&[i, j]);
            }
            BlockPicker::Volume(VsSource::Enumerated(e)) => out.extend_from_slice(e.sample(rng)),
        }
    }
}

/// Residual, Gram matrix and coefficients of one block solve
/// `x ← x − A_S^T y`, `y = (A_S A_S^T)^† (A_S x − b_S)`.
#[derive(Clone, Debug, Default)]
pub(crate) struct BlockSolve {
    pub r: Vec<f64>,
    pub y: Vec<f64>,
    /// Row-major `|S| × |S|` Gram matrix.
    pub g: Vec<f64>,
}

impl BlockSolve {
    pub fn compute<M: RowAccess + ?Sized>(&mut self, a: &M, b: &[f64], norms: &[f64], block: &[usize], x: &[f64]) {
        let s = block.len();
        self.r.clear();
        self.r.extend(block.iter().map(|&i| a.row_dot(i, x) - b[i]));
        self.y.clear();
        self.g.clear();
        match s {
            1 => {
                let n = norms[block[0]];
                self.g.push(n);
                self.y.push(self.r[0] / n);
            }
            2 => {
                let (i, j) = (block[0], block[1]);
                let (g11, g22) = (norms[i], norms[j]);
                let g12 = a.rows_dot(i, j);
                self.g.extend_from_slice(&[g11, g12, g12, g22]);
                let det = g11 * g22 - g12 * g12;
                let (r1, r2) = (self.r[0], self.r[1]);
                if det.abs() <= PAIR_DEGENERACY * g11 * g22 {
                    // rank one: G^† = G / tr(G)²
                    let t2 = (g11 + g22) * (g11 + g22);
                    self.y.push((g11 * r1 + g12 * r2) / t2);
                    self.y.push((g12 * r1 + g22 * r2) / t2);
                } else {
                    self.y.push((g22 * r1 - g12 * r2) / det);
                    self.y.push((g11 * r2 - g12 * r1) / det);
                }
            }
            _ => {
                for &i in block {
                    for &j in block {
                        self.g.push(if i == j { norms[i] } else { a.rows_dot(i, j) });
                    }
                }
                // y = U Σ^{-2} U^T r from the SVD of A_S
                let svd = svd_jacobi(&a.gather_rows(block), RANK_TOL).expect("jacobi SVD of a small block converges");
                let u = &svd.left_vectors;
                self.y.resize(s, 0.0);
                for (k, sigma) in svd.singular_values.iter().enumerate() {
                    let c: f64 = (0..s).map(|p| u[(p, k)] * self.r[p]).sum::<f64>() / (sigma * sigma);
                    for p in 0..s {
                        self.y[p] += c * u[(p, k)];
                    }
                }
            }
        }
    }

    /// `x += scale · A_S^T y`.
    #[inline]
    pub fn apply<M: RowAccess + ?Sized>(&self, a: &M, block: &[usize], scale: f64, x: &mut [f64]) {
        for (&i, &yk) in block.iter().zip(&self.y) {
            a.row_axpy(i, scale * yk, x);
        }
    }

    /// Change of `‖x − x*‖²` caused by `x ← x − A_S^T y`, where
    /// `shift_i = b_i − ⟨A_i, x*⟩`.
    #[inline]
    pub fn error_change(&self, block: &[usize], shift: &[f64]) -> f64 {
        let s = block.len();
        let mut lin = 0.0;
        let mut quad = 0.0;
        for p in 0..s {
            lin += self.y[p] * (self.r[p] + shift[block[p]]);
            let gy: f64 = (0..s).map(|q| self.g[p * s + q] * self.y[q]).sum();
            quad += self.y[p] * gy;
        }
        quad - 2.0 * lin
    }
}

/// One Kaczmarz-type iteration at a time: selection, block projection and
/// optional heavy-ball momentum `x^{k+1} = x^k − ω A_S^†(A_S x^k − b_S) + β(x^k − x^{k−1})`
/// with `x^1 = x^0`.
pub struct KaczmarzIter<'a, M: RowAccess + ?Sized> {
    a: &'a M,
    b: &'a [f64],
    norms: Vec<f64>,
    picker: BlockPicker<'a>,
    rng: RngStream,
    x: Vec<f64>,
    x_prev: Vec<f64>,
    scratch: Vec<f64>,
    omega: f64,
    beta: f64,
    block: Vec<usize>,
    solve: BlockSolve,
    iterations: u64,
}

impl<'a, M: RowAccess + ?Sized> KaczmarzIter<'a, M> {
    pub fn new(a: &'a M, b: &'a [f64], x0: &[f64], picker: BlockPicker<'a>, rng: RngStream) -> Result<Self> {
        let (m, n) = (a.nrows(), a.ncols());
        if b.len() != m {
            return Err(Error::DimensionMismatch {
                expected: m,
                actual: b.len(),
            });
        }
        if x0.len() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                actual: x0.len(),
            });
        }
        let norms: Vec<f64> = (0..m).map(|i| a.row_norm_sq(i)).collect();
        if let Some(i) = norms.iter().position(|&v| !(v > 0.0)) {
            return Err(Error::ZeroRow(i));
        }
        if let BlockPicker::Volume(src) = &picker {
            if src.rows() > m {
                return Err(Error::DimensionMismatch {
                    expected: m,
                    actual: src.rows(),
                });
            }
        }
        Ok(Self {
            a,
            b,
            norms,
            picker,
            rng,
            x: x0.to_vec(),
            x_prev: x0.to_vec(),
            scratch: Vec::new(),
            omega: 1.0,
            beta: 0.0,
            block: Vec::new(),
            solve: BlockSolve::default(),
            iterations: 0,
        })
    }

    /// Switches on relaxation `ω` and momentum `β`.
    pub fn with_momentum(mut self, omega: f64, beta: f64) -> Self {
        self.omega = omega;
        self.beta = beta;
        self
    }

    pub fn x(&self) -> &[f64] {
        &self.x
    }

    pub fn matrix(&self) -> &'a M {
        self.a
    }

    pub fn iterations(&self) -> u64 {
        self.iterations
    }

    /// Rows used by the last step.
    pub fn last_block(&self) -> &[usize] {
        &self.block
    }

    pub(crate) fn last_solve(&self) -> &BlockSolve {
        &self.solve
    }

    pub fn has_momentum(&self) -> bool {
        self.beta != 0.0 || self.omega != 1.0
    }

    /// Performs one iteration.
    #[inline]
    pub fn step(&mut self) {
        self.picker.pick(&mut self.rng, &mut self.block);
        self.solve.compute(self.a, self.b, &self.norms, &self.block, &self.x);
        if self.beta == 0.0 {
            self.solve.apply(self.a, &self.block, -self.omega, &mut self.x);
        } else {
            // scratch = x + β (x − x_prev) − ω A_S^T y
            self.scratch.clear();
            let beta = self.beta;
            self.scratch
                .extend(self.x.iter().zip(&self.x_prev).map(|(&xk, &xp)| xk + beta * (xk - xp)));
            self.solve.apply(self.a, &self.block, -self.omega, &mut self.scratch);
            std::mem::swap(&mut self.x_prev, &mut self.x);
            std::mem::swap(&mut self.x, &mut self.scratch);
        }
        self.iterations += 1;
    }
}
