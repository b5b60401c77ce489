//! Periodic grids and the grid-function types that live on them.

use alloc::sync::Arc;
use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::PI;
use core::fmt;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::fft::FftPlan;

/// Uniform periodic lattice on `(0, L)^dim` with `n` points per axis.
///
/// Cloning is cheap: the transform plan and wavenumber tables are shared.
#[derive(Clone)]
pub struct Grid {
    inner: Arc<GridInner>,
}

struct GridInner {
    dim: usize,
    n: usize,
    length: f64,
    spacing: f64,
    plan: FftPlan,
    /// Signed wavenumber for each FFT index along one axis.
    ell: Vec<i64>,
    /// Physical wavevector `2 pi ell / L` per mode, zeroed on every mode that
    /// touches the Nyquist index of an even-length axis.
    kvec: Vec<[f64; 3]>,
    /// `|kvec|^2`; zero exactly on the kernel of the discrete Laplacian.
    lambda: Vec<f64>,
    /// Flat index of the mode `-k`.
    neg: Vec<usize>,
    nyquist: Vec<bool>,
    /// Two-thirds rule mask (`|ell_a| <= n / 3` on every axis).
    dealias_keep: Vec<bool>,
}

/// Wavevector data handed to user symbols by [`crate::spectral::apply_symbol`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Wavevector {
    /// Signed integer wavenumbers; unused axes are zero.
    pub index: [i64; 3],
    /// Physical wavevector `2 pi index / L`, zero on Nyquist-touching modes.
    pub kappa: [f64; 3],
    /// `|kappa|^2`, the eigenvalue of `-Laplacian` on this mode.
    pub lambda: f64,
    /// The mode sits on the Nyquist plane of some even-length axis.
    pub nyquist: bool,
}

impl Grid {
    pub fn new(dim: usize, n: usize, length: f64) -> Result<Self> {
        if !(dim == 2 || dim == 3) {
            return Err(Error::InvalidGrid("dimension must be 2 or 3"));
        }
        if n < 3 {
            return Err(Error::InvalidGrid("need at least 3 points per axis"));
        }
        if !(length.is_finite() && length > 0.0) {
            return Err(Error::InvalidGrid("length must be positive and finite"));
        }
        let total = n.pow(dim as u32);
        let ell: Vec<i64> = (0..n)
            .map(|i| {
                if i <= n / 2 {
                    i as i64
                } else {
                    i as i64 - n as i64
                }
            })
            .collect();
        let nyq_axis = |i: usize| n.is_multiple_of(2) && i == n / 2;
        let scale = 2.0 * PI / length;

        let mut kvec = vec![[0.0; 3]; total];
        let mut lambda = vec![0.0; total];
        let mut neg = vec![0usize; total];
        let mut nyquist = vec![false; total];
        let mut dealias_keep = vec![false; total];
        let third = (n / 3) as i64;
        for idx in 0..total {
            let axes = split_index(idx, n, dim);
            let is_nyq = axes[..dim].iter().any(|&i| nyq_axis(i));
            let mut k = [0.0; 3];
            let mut neg_idx = 0;
            let mut keep = true;
            for a in 0..dim {
                let l = ell[axes[a]];
                if !is_nyq {
                    k[a] = scale * l as f64;
                }
                neg_idx = neg_idx * n + (n - axes[a]) % n;
                keep &= l.abs() <= third;
            }
            kvec[idx] = k;
            lambda[idx] = k.iter().map(|v| v * v).sum();
            neg[idx] = neg_idx;
            nyquist[idx] = is_nyq;
            dealias_keep[idx] = keep;
        }

        Ok(Self {
            inner: Arc::new(GridInner {
                dim,
                n,
                length,
                spacing: length / n as f64,
                plan: FftPlan::new(n),
                ell,
                kvec,
                lambda,
                neg,
                nyquist,
                dealias_keep,
            }),
        })
    }

    pub fn dim(&self) -> usize {
        self.inner.dim
    }

    pub fn n_per_axis(&self) -> usize {
        self.inner.n
    }

    pub fn length(&self) -> f64 {
        self.inner.length
    }

    pub fn spacing(&self) -> f64 {
        self.inner.spacing
    }

    /// `K = floor((n - 1) / 2)`.
    pub fn half_modes(&self) -> usize {
        (self.inner.n - 1) / 2
    }

    /// Number of grid nodes (equals the number of Fourier modes).
    pub fn len(&self) -> usize {
        self.inner.kvec.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// `|Omega| = L^dim`.
    pub fn volume(&self) -> f64 {
        libm::pow(self.inner.length, self.inner.dim as f64)
    }

    /// Quadrature weight `h^dim`.
    pub fn cell_volume(&self) -> f64 {
        libm::pow(self.inner.spacing, self.inner.dim as f64)
    }

    /// Coordinates of node `idx` (row-major, first axis slowest).
    pub fn node(&self, idx: usize) -> [f64; 3] {
        let axes = split_index(idx, self.inner.n, self.inner.dim);
        let mut x = [0.0; 3];
        for a in 0..self.inner.dim {
            x[a] = axes[a] as f64 * self.inner.spacing;
        }
        x
    }

    /// Flat index of the node nearest to `x`, with periodic wrap.
    pub fn nearest_node(&self, x: &[f64]) -> usize {
        let n = self.inner.n as i64;
        let mut idx = 0usize;
        for &xa in &x[..self.inner.dim] {
            let i = libm::round(xa / self.inner.spacing) as i64;
            idx = idx * self.inner.n + i.rem_euclid(n) as usize;
        }
        idx
    }

    /// Flat FFT-order index of the signed wavenumber `k` (one entry per axis).
    pub fn mode_index(&self, k: &[i64]) -> Option<usize> {
        let n = self.inner.n as i64;
        if k.len() != self.inner.dim {
            return None;
        }
        let mut idx = 0usize;
        for &l in k {
            if l <= -n || l >= n {
                return None;
            }
            let i = l.rem_euclid(n);
            // Each signed wavenumber must map to a stored representative.
            let stored = self.inner.ell[i as usize];
            if stored != l && !(n % 2 == 0 && l == -n / 2) {
                return None;
            }
            idx = idx * self.inner.n + i as usize;
        }
        Some(idx)
    }

    pub fn wavevector(&self, idx: usize) -> Wavevector {
        let axes = split_index(idx, self.inner.n, self.inner.dim);
        let mut index = [0i64; 3];
        for a in 0..self.inner.dim {
            index[a] = self.inner.ell[axes[a]];
        }
        Wavevector {
            index,
            kappa: self.inner.kvec[idx],
            lambda: self.inner.lambda[idx],
            nyquist: self.inner.nyquist[idx],
        }
    }

    pub(crate) fn plan(&self) -> &FftPlan {
        &self.inner.plan
    }

    pub(crate) fn kvec(&self) -> &[[f64; 3]] {
        &self.inner.kvec
    }

    pub(crate) fn lambda(&self) -> &[f64] {
        &self.inner.lambda
    }

    pub(crate) fn neg(&self) -> &[usize] {
        &self.inner.neg
    }

    pub(crate) fn dealias_keep(&self) -> &[bool] {
        &self.inner.dealias_keep
    }

    pub fn same_as(&self, other: &Grid) -> bool {
        Arc::ptr_eq(&self.inner, &other.inner) || self == other
    }
}

impl PartialEq for Grid {
    fn eq(&self, other: &Self) -> bool {
        self.inner.dim == other.inner.dim
            && self.inner.n == other.inner.n
            && self.inner.length == other.inner.length
    }
}

impl fmt::Debug for Grid {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Grid")
            .field("dim", &self.inner.dim)
            .field("n", &self.inner.n)
            .field("length", &self.inner.length)
            .finish()
    }
}

fn split_index(mut idx: usize, n: usize, dim: usize) -> [usize; 3] {
    let mut axes = [0usize; 3];
    for a in (0..dim).rev() {
        axes[a] = idx % n;
        idx /= n;
    }
    axes
}

/// Real grid function, row-major over the node indices.
#[derive(Clone, PartialEq)]
pub struct Field {
    grid: Grid,
    values: Vec<f64>,
}

impl Field {
    pub fn new(grid: &Grid, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::LengthMismatch {
                expected: grid.len(),
                actual: values.len(),
            });
        }
        if let Some(index) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite { index });
        }
        Ok(Self {
            grid: grid.clone(),
            values,
        })
    }

    pub(crate) fn from_raw(grid: &Grid, values: Vec<f64>) -> Self {
        debug_assert_eq!(values.len(), grid.len());
        Self {
            grid: grid.clone(),
            values,
        }
    }

    pub fn zeros(grid: &Grid) -> Self {
        Self::constant(grid, 0.0)
    }

    pub fn constant(grid: &Grid, c: f64) -> Self {
        Self::from_raw(grid, vec![c; grid.len()])
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    /// Discrete average `<f, 1> / |Omega|`.
    pub fn mean(&self) -> f64 {
        self.values.iter().sum::<f64>() / self.values.len() as f64
    }

    pub fn is_finite(&self) -> bool {
        self.values.iter().all(|v| v.is_finite())
    }

    pub fn min(&self) -> f64 {
        self.values.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn max(&self) -> f64 {
        self.values
            .iter()
            .copied()
            .fold(f64::NEG_INFINITY, f64::max)
    }

    /// `self + s * other`.
    pub fn axpy(&self, s: f64, other: &Field) -> Field {
        assert!(self.grid.same_as(&other.grid), "grid mismatch");
        let values = self
            .values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| a + s * b)
            .collect();
        Field::from_raw(&self.grid, values)
    }

    pub fn scaled(&self, s: f64) -> Field {
        Field::from_raw(&self.grid, self.values.iter().map(|v| s * v).collect())
    }

    /// `sum_i w_i f_i` over fields on one grid.
    pub fn combination(terms: &[(f64, &Field)]) -> Field {
        let (_, first) = terms[0];
        let mut values = vec![0.0; first.values.len()];
        for &(w, f) in terms {
            assert!(first.grid.same_as(&f.grid), "grid mismatch");
            for (acc, v) in values.iter_mut().zip(&f.values) {
                *acc += w * v;
            }
        }
        Field::from_raw(&first.grid, values)
    }

    /// Copy with the mean subtracted.
    pub fn mean_free(&self) -> Field {
        let m = self.mean();
        Field::from_raw(&self.grid, self.values.iter().map(|v| v - m).collect())
    }

    pub fn max_abs_diff(&self, other: &Field) -> f64 {
        self.values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }
}

impl fmt::Debug for Field {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Field")
            .field("grid", &self.grid)
            .field("min", &self.min())
            .field("max", &self.max())
            .field("mean", &self.mean())
            .finish()
    }
}

/// One [`Field`] per spatial axis.
#[derive(Debug, Clone, PartialEq)]
pub struct VectorField {
    components: Vec<Field>,
}

impl VectorField {
    pub fn new(components: Vec<Field>) -> Result<Self> {
        let first = components
            .first()
            .ok_or(Error::InvalidParameter("empty vector field"))?;
        if components.len() != first.grid().dim() {
            return Err(Error::InvalidParameter(
                "component count must equal the grid dimension",
            ));
        }
        if components.iter().any(|c| !c.grid().same_as(first.grid())) {
            return Err(Error::GridMismatch);
        }
        Ok(Self { components })
    }

    pub(crate) fn from_raw(components: Vec<Field>) -> Self {
        Self { components }
    }

    pub fn components(&self) -> &[Field] {
        &self.components
    }

    pub fn grid(&self) -> &Grid {
        self.components[0].grid()
    }

    /// Pointwise Euclidean magnitude squared.
    pub fn magnitude_squared(&self) -> Vec<f64> {
        let mut out = vec![0.0; self.grid().len()];
        for c in &self.components {
            for (o, v) in out.iter_mut().zip(c.values()) {
                *o += v * v;
            }
        }
        out
    }
}

/// Discrete Fourier coefficients in FFT order.
///
/// Normalization: `coeff(k) = h^dim * sum_j f_j exp(-2 pi i k.x_j / L)`, so
/// that `f_j = L^-dim * sum_k coeff(k) exp(2 pi i k.x_j / L)`. On the unit box
/// this is exactly the usual collocation pair; in general `coeff(0)` is the
/// integral of `f`.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralField {
    grid: Grid,
    coeffs: Vec<Complex64>,
}

impl SpectralField {
    pub fn new(grid: &Grid, coeffs: Vec<Complex64>) -> Result<Self> {
        if coeffs.len() != grid.len() {
            return Err(Error::LengthMismatch {
                expected: grid.len(),
                actual: coeffs.len(),
            });
        }
        Ok(Self {
            grid: grid.clone(),
            coeffs,
        })
    }

    pub fn zeros(grid: &Grid) -> Self {
        Self {
            grid: grid.clone(),
            coeffs: vec![Complex64::new(0.0, 0.0); grid.len()],
        }
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn coeffs(&self) -> &[Complex64] {
        &self.coeffs
    }

    pub fn coeffs_mut(&mut self) -> &mut [Complex64] {
        &mut self.coeffs
    }

    /// Coefficient at signed wavenumber `k`; panics if `k` is out of range.
    pub fn coeff(&self, k: &[i64]) -> Complex64 {
        let idx = self.grid.mode_index(k).expect("wavenumber out of range");
        self.coeffs[idx]
    }

    pub fn set_coeff(&mut self, k: &[i64], value: Complex64) {
        let idx = self.grid.mode_index(k).expect("wavenumber out of range");
        self.coeffs[idx] = value;
    }

    /// `max |c(-k) - conj(c(k))|` relative to the largest coefficient.
    pub fn hermitian_defect(&self) -> f64 {
        let neg = self.grid.neg();
        let scale = self.coeffs.iter().map(|c| c.norm()).fold(0.0, f64::max);
        if scale == 0.0 {
            return 0.0;
        }
        let worst = self
            .coeffs
            .iter()
            .enumerate()
            .map(|(i, c)| (self.coeffs[neg[i]] - c.conj()).norm())
            .fold(0.0, f64::max);
        worst / scale
    }
}
