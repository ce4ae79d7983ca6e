use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matrix::{norm_sq, qr_householder, DenseMatrix, RowAccess};
use crate::sampling::RngStream;

/// `A = U D V^T` with `D = diag(σ₁, σ₂, δ, …, δ)` of length `r`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TypeISpec {
    pub m: usize,
    pub n: usize,
    pub r: usize,
    pub sigma1: f64,
    pub sigma2: f64,
    pub delta: f64,
}

/// `A = U D V^T` with `D` drawn uniformly from `(1, κ]`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TypeIISpec {
    pub m: usize,
    pub n: usize,
    pub r: usize,
    pub kappa: f64,
}

/// A generated consistent system with its planted solution.
#[derive(Clone, Debug)]
pub struct PlantedSystem {
    pub a: DenseMatrix,
    /// Lies in `Range(A^T)`, so it equals `A^† b`.
    pub x_star: Vec<f64>,
    pub b: Vec<f64>,
    /// The prescribed nonzero singular values, nonincreasing.
    pub singular_values: Vec<f64>,
}

fn check_shape(m: usize, n: usize, r: usize) -> Result<()> {
    if m == 0 || n == 0 || r == 0 || r > m.min(n) {
        return Err(Error::invalid(format!(
            "need 1 <= r <= min(m, n), got m = {m}, n = {n}, r = {r}"
        )));
    }
    Ok(())
}

impl TypeISpec {
    pub fn validate(&self) -> Result<()> {
        check_shape(self.m, self.n, self.r)?;
        if !(self.sigma1 >= self.sigma2 && self.sigma2 >= self.delta && self.delta > 0.0) {
            return Err(Error::invalid(format!(
                "need sigma1 >= sigma2 >= delta > 0, got {}, {}, {}",
                self.sigma1, self.sigma2, self.delta
            )));
        }
        Ok(())
    }

    pub fn singular_values(&self) -> Vec<f64> {
        (0..self.r)
            .map(|i| match i {
                0 => self.sigma1,
                1 => self.sigma2,
                _ => self.delta,
            })
            .collect()
    }
}

impl TypeIISpec {
    pub fn validate(&self) -> Result<()> {
        check_shape(self.m, self.n, self.r)?;
        if !(self.kappa > 1.0 && self.kappa.is_finite()) {
            return Err(Error::invalid(format!("need kappa > 1, got {}", self.kappa)));
        }
        Ok(())
    }
}

/// Orthonormal `rows × r` basis from the QR factor of a Gaussian matrix,
/// redrawn once if the draw is numerically rank deficient.
fn gaussian_basis(rows: usize, r: usize, rng: &mut RngStream) -> Result<DenseMatrix> {
    let mut last = None;
    for _ in 0..2 {
        let g = DenseMatrix::new(rows, r, rng.gaussian_vec(rows * r))?;
        match qr_householder(&g) {
            Ok((q, _)) => return Ok(q),
            Err(e) => last = Some(e),
        }
    }
    Err(last.unwrap())
}

fn assemble(m: usize, n: usize, d: Vec<f64>, rng: &mut RngStream) -> Result<PlantedSystem> {
    let r = d.len();
    let u = gaussian_basis(m, r, rng)?;
    let v = gaussian_basis(n, r, rng)?;
    let mut ud = u;
    for i in 0..m {
        for (k, dk) in d.iter().enumerate() {
            ud[(i, k)] *= dk;
        }
    }
    let a = ud.matmul(&v.transpose())?;
    let mut x_star = rng.gaussian_vec(n);
    if r < n {
        let coef = v.matvec_t(&x_star)?;
        x_star = v.matvec(&coef)?;
    }
    let b = a.matvec(&x_star)?;
    Ok(PlantedSystem {
        a,
        x_star,
        b,
        singular_values: d,
    })
}

pub fn gen_type1(spec: &TypeISpec, rng: &mut RngStream) -> Result<PlantedSystem> {
    spec.validate()?;
    assemble(spec.m, spec.n, spec.singular_values(), rng)
}

pub fn gen_type2(spec: &TypeIISpec, rng: &mut RngStream) -> Result<PlantedSystem> {
    spec.validate()?;
    let mut d: Vec<f64> = (0..spec.r)
        .map(|_| 1.0 + (spec.kappa - 1.0) * rng.uniform_positive())
        .collect();
    let sys = assemble(spec.m, spec.n, d.clone(), rng)?;
    d.sort_by(|a, b| b.total_cmp(a));
    Ok(PlantedSystem {
        singular_values: d,
        ..sys
    })
}

/// Planted solution for a fixed matrix: `x* = A^T y / ‖A^T y‖` with Gaussian
/// `y`, which lies in `Range(A^T)` and so equals `A^† A x*`.
pub fn plant_in_row_space<M: RowAccess + ?Sized>(a: &M, rng: &mut RngStream) -> (Vec<f64>, Vec<f64>) {
    let y = rng.gaussian_vec(a.nrows());
    let mut x = vec![0.0; a.ncols()];
    for (i, yi) in y.iter().enumerate() {
        a.row_axpy(i, *yi, &mut x);
    }
    let norm = norm_sq(&x).sqrt();
    if norm > 0.0 {
        x.iter_mut().for_each(|v| *v /= norm);
    }
    let b = (0..a.nrows()).map(|i| a.row_dot(i, &x)).collect();
    (x, b)
}
