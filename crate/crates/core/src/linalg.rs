//! Dense complex linear algebra and FFT helpers shared by every module.
//!
//! Matrices are `nalgebra::DMatrix<Complex64>` (column-major). The DFT
//! convention is the unitary one: `W` is the normalized inverse DFT with
//! `W[r, c] = exp(+j2πrc/n)/√n`, and forward FFTs are unnormalized sums
//! with `exp(-j2πkn/n)` unless stated otherwise.

use std::cell::RefCell;
use std::f64::consts::PI;
use std::sync::Arc;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

use crate::error::{GfdmError, Result};

pub type C64 = Complex64;
pub type CMat = DMatrix<C64>;

/// Singular-value ratio below which a matrix (or block) counts as singular.
pub const SINGULAR_RATIO: f64 = 1e-12;

thread_local! {
    static PLANNER: RefCell<FftPlanner<f64>> = RefCell::new(FftPlanner::new());
}

pub fn fft_plan(len: usize, inverse: bool) -> Arc<dyn Fft<f64>> {
    PLANNER.with(|p| {
        let mut p = p.borrow_mut();
        if inverse {
            p.plan_fft_inverse(len)
        } else {
            p.plan_fft_forward(len)
        }
    })
}

/// Unnormalized forward DFT: `X[k] = Σ x[n] e^{-j2πkn/N}`.
pub fn fft(x: &[C64]) -> Vec<C64> {
    let mut buf = x.to_vec();
    if !buf.is_empty() {
        fft_plan(buf.len(), false).process(&mut buf);
    }
    buf
}

/// Unnormalized inverse DFT: `x[n] = Σ X[k] e^{+j2πkn/N}`.
pub fn ifft(x: &[C64]) -> Vec<C64> {
    let mut buf = x.to_vec();
    if !buf.is_empty() {
        fft_plan(buf.len(), true).process(&mut buf);
    }
    buf
}

/// Unitary forward DFT (`W^H x`).
pub fn fft_unitary(x: &[C64]) -> Vec<C64> {
    let scale = 1.0 / (x.len() as f64).sqrt();
    fft(x).into_iter().map(|v| v * scale).collect()
}

/// Unitary inverse DFT (`W x`).
pub fn ifft_unitary(x: &[C64]) -> Vec<C64> {
    let scale = 1.0 / (x.len() as f64).sqrt();
    ifft(x).into_iter().map(|v| v * scale).collect()
}

pub fn expj(phase: f64) -> C64 {
    C64::from_polar(1.0, phase)
}

/// Normalized inverse DFT matrix `W` of order `n`.
pub fn unitary_idft_matrix(n: usize) -> CMat {
    let scale = 1.0 / (n as f64).sqrt();
    CMat::from_fn(n, n, |r, c| expj(2.0 * PI * ((r * c) % n) as f64 / n as f64) * scale)
}

/// Normalized forward DFT matrix `W^H` of order `n`.
pub fn unitary_dft_matrix(n: usize) -> CMat {
    unitary_idft_matrix(n).adjoint()
}

/// Circulant matrix whose first column is `first_col`.
pub fn circulant(first_col: &[C64]) -> CMat {
    let n = first_col.len();
    CMat::from_fn(n, n, |r, c| first_col[(r + n - c) % n])
}

pub fn matvec(m: &CMat, v: &[C64]) -> Vec<C64> {
    let out = m * DVector::from_column_slice(v);
    out.as_slice().to_vec()
}

/// `m^H v` without materializing the adjoint.
pub fn adjoint_matvec(m: &CMat, v: &[C64]) -> Vec<C64> {
    (0..m.ncols())
        .map(|c| {
            m.column(c)
                .iter()
                .zip(v)
                .fold(C64::new(0.0, 0.0), |acc, (a, b)| acc + a.conj() * b)
        })
        .collect()
}

pub fn max_abs_diff(a: &CMat, b: &CMat) -> f64 {
    a.iter()
        .zip(b.iter())
        .map(|(x, y)| (x - y).norm())
        .fold(0.0, f64::max)
}

pub fn max_abs_diff_vec(a: &[C64], b: &[C64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y).norm())
        .fold(0.0, f64::max)
}

pub fn frobenius_sq(m: &CMat) -> f64 {
    m.iter().map(|v| v.norm_sqr()).sum()
}

/// Deviation of `m^H m` from the identity (max-abs norm).
pub fn unitarity_error(m: &CMat) -> f64 {
    let g = m.adjoint() * m;
    let id = CMat::identity(m.nrows(), m.ncols());
    max_abs_diff(&g, &id)
}

/// Eigen-decomposition of a Hermitian matrix: eigenvalues and unitary eigenvectors
/// (as columns), in the solver's order.
pub fn hermitian_eigen(m: &CMat) -> (Vec<f64>, CMat) {
    // Symmetrize first so rounding noise does not leak into the solver.
    let herm = (m + m.adjoint()) * C64::new(0.5, 0.0);
    let eig = herm.symmetric_eigen();
    (eig.eigenvalues.as_slice().to_vec(), eig.eigenvectors)
}

pub fn singular_values(m: &CMat) -> Vec<f64> {
    m.clone().singular_values().as_slice().to_vec()
}

/// Returns `(smallest, largest)` singular value.
pub fn singular_value_range(m: &CMat) -> (f64, f64) {
    let sv = singular_values(m);
    let max = sv.iter().copied().fold(0.0, f64::max);
    let min = sv.iter().copied().fold(f64::INFINITY, f64::min);
    (min, max)
}

pub fn is_singular(m: &CMat) -> (bool, f64, f64) {
    let (min, max) = singular_value_range(m);
    (max == 0.0 || min < SINGULAR_RATIO * max, min, max)
}

/// Inverse that refuses numerically singular input.
pub fn checked_inverse(m: &CMat) -> Result<CMat> {
    let (singular, smallest, largest) = is_singular(m);
    if singular {
        return Err(GfdmError::SingularMatrix { smallest, largest });
    }
    m.clone()
        .try_inverse()
        .ok_or(GfdmError::SingularMatrix { smallest, largest })
}

/// Solve `m x = b` for a column of right-hand sides.
pub fn solve(m: &CMat, b: &CMat) -> Result<CMat> {
    let lu = m.clone().lu();
    lu.solve(b).ok_or_else(|| {
        let (smallest, largest) = singular_value_range(m);
        GfdmError::SingularMatrix { smallest, largest }
    })
}

/// Squared row norms of `m`.
pub fn row_norms_sq(m: &CMat) -> Vec<f64> {
    let mut out = vec![0.0; m.nrows()];
    for c in 0..m.ncols() {
        for (r, v) in m.column(c).iter().enumerate() {
            out[r] += v.norm_sqr();
        }
    }
    out
}

pub fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

pub fn from_real(v: &[f64]) -> Vec<C64> {
    v.iter().map(|&x| C64::new(x, 0.0)).collect()
}

pub fn energy(v: &[C64]) -> f64 {
    v.iter().map(|x| x.norm_sqr()).sum()
}

pub fn dmatrix_from_columns(cols: &[Vec<C64>]) -> CMat {
    let n = cols.first().map_or(0, Vec::len);
    CMat::from_fn(n, cols.len(), |r, c| cols[c][r])
}

/// A complex matrix stored as separate real and imaginary parts, so that
/// products with many columns run through real GEMM kernels.
#[derive(Debug, Clone)]
pub struct SplitMatrix {
    re: DMatrix<f64>,
    im: DMatrix<f64>,
}

impl SplitMatrix {
    pub fn new(m: &CMat) -> Self {
        Self {
            re: m.map(|v| v.re),
            im: m.map(|v| v.im),
        }
    }

    pub fn nrows(&self) -> usize {
        self.re.nrows()
    }

    pub fn ncols(&self) -> usize {
        self.re.ncols()
    }

    /// `self · x` for a block of column vectors given as real/imag parts.
    pub fn mul_split(&self, x_re: &DMatrix<f64>, x_im: &DMatrix<f64>) -> (DMatrix<f64>, DMatrix<f64>) {
        let re = &self.re * x_re - &self.im * x_im;
        let im = &self.re * x_im + &self.im * x_re;
        (re, im)
    }

    pub fn mul(&self, x: &CMat) -> CMat {
        let (re, im) = self.mul_split(&x.map(|v| v.re), &x.map(|v| v.im));
        re.zip_map(&im, C64::new)
    }
}
