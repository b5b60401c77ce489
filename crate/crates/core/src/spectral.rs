//! Fourier collocation operators, inner products and norms.
//!
//! Every derivative is a per-mode multiplier applied between a forward and an
//! inverse transform. On even grids the unmatched Nyquist modes are treated as
//! part of the Laplacian kernel (all derivative symbols vanish there), which
//! keeps `div grad = laplacian`, the summation-by-parts identities and the
//! interpolation inequalities exact for arbitrary grid functions.

use alloc::vec;
use alloc::vec::Vec;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::fft::transform_nd;
use crate::grid::{Field, Grid, SpectralField, VectorField, Wavevector};

type C = Complex64;

const ZERO: C = C::new(0.0, 0.0);

/// Relative tolerance (against the RMS value) for mean-zero preconditions.
pub const MEAN_ZERO_TOL: f64 = 1e-12;

// Internal spectra use amplitude normalization: c_k = DFT_k / n^dim, so that
// f_j = sum_k c_k e^{...} and ||f||_2^2 = |Omega| sum_k |c_k|^2.

pub(crate) fn spectrum(grid: &Grid, values: &[f64]) -> Vec<C> {
    let mut buf: Vec<C> = values.iter().map(|&v| C::new(v, 0.0)).collect();
    let mut scratch = Vec::new();
    transform_nd(grid.plan(), grid.dim(), &mut buf, false, &mut scratch);
    let s = 1.0 / buf.len() as f64;
    for z in buf.iter_mut() {
        *z *= s;
    }
    buf
}

/// Two real fields through one complex transform.
pub(crate) fn spectrum_pair(grid: &Grid, a: &[f64], b: &[f64]) -> (Vec<C>, Vec<C>) {
    let mut buf: Vec<C> = a.iter().zip(b).map(|(&x, &y)| C::new(x, y)).collect();
    let mut scratch = Vec::new();
    transform_nd(grid.plan(), grid.dim(), &mut buf, false, &mut scratch);
    let s = 0.5 / buf.len() as f64;
    let neg = grid.neg();
    let mut sa = vec![ZERO; buf.len()];
    let mut sb = vec![ZERO; buf.len()];
    for k in 0..buf.len() {
        let z = buf[k];
        let zn = buf[neg[k]].conj();
        sa[k] = (z + zn) * s;
        let d = (z - zn) * s;
        sb[k] = C::new(d.im, -d.re);
    }
    (sa, sb)
}

pub(crate) fn spectra(grid: &Grid, fields: &[&[f64]]) -> Vec<Vec<C>> {
    let mut out = Vec::with_capacity(fields.len());
    let mut chunks = fields.chunks_exact(2);
    for pair in &mut chunks {
        let (a, b) = spectrum_pair(grid, pair[0], pair[1]);
        out.push(a);
        out.push(b);
    }
    if let [last] = chunks.remainder() {
        out.push(spectrum(grid, last));
    }
    out
}

/// Inverse of [`spectrum`], keeping the real part. Consumes the buffer.
pub(crate) fn values(grid: &Grid, mut spec: Vec<C>) -> Vec<f64> {
    let mut scratch = Vec::new();
    transform_nd(grid.plan(), grid.dim(), &mut spec, true, &mut scratch);
    spec.into_iter().map(|z| z.re).collect()
}

/// Two Hermitian spectra back to real space through one complex transform.
pub(crate) fn values_pair(grid: &Grid, a: &[C], b: &[C]) -> (Vec<f64>, Vec<f64>) {
    let mut buf: Vec<C> = a
        .iter()
        .zip(b)
        .map(|(&x, &y)| x + C::new(-y.im, y.re))
        .collect();
    let mut scratch = Vec::new();
    transform_nd(grid.plan(), grid.dim(), &mut buf, true, &mut scratch);
    buf.into_iter().map(|z| (z.re, z.im)).unzip()
}

pub(crate) fn values_many(grid: &Grid, specs: &[Vec<C>]) -> Vec<Vec<f64>> {
    let mut out = Vec::with_capacity(specs.len());
    let mut chunks = specs.chunks_exact(2);
    for pair in &mut chunks {
        let (a, b) = values_pair(grid, &pair[0], &pair[1]);
        out.push(a);
        out.push(b);
    }
    if let [last] = chunks.remainder() {
        out.push(values(grid, last.clone()));
    }
    out
}

/// Gradient components in physical space from an amplitude spectrum.
pub(crate) fn gradient_values(grid: &Grid, spec: &[C]) -> Vec<Vec<f64>> {
    let kvec = grid.kvec();
    let comps: Vec<Vec<C>> = (0..grid.dim())
        .map(|a| {
            spec.iter()
                .zip(kvec)
                .map(|(c, k)| C::new(-k[a] * c.im, k[a] * c.re))
                .collect()
        })
        .collect();
    values_many(grid, &comps)
}

/// Amplitude spectrum of `div v` from physical components.
pub(crate) fn divergence_spectrum(grid: &Grid, comps: &[&[f64]]) -> Vec<C> {
    let kvec = grid.kvec();
    let specs = spectra(grid, comps);
    let mut out = vec![ZERO; grid.len()];
    for (a, s) in specs.iter().enumerate() {
        for ((o, c), k) in out.iter_mut().zip(s).zip(kvec) {
            *o += C::new(-k[a] * c.im, k[a] * c.re);
        }
    }
    out
}

/// `|Omega| sum_k w_k |c_k|^2`.
pub(crate) fn weighted_energy(grid: &Grid, spec: &[C], weight: impl Fn(usize) -> f64) -> f64 {
    grid.volume()
        * spec
            .iter()
            .enumerate()
            .map(|(k, c)| weight(k) * c.norm_sqr())
            .sum::<f64>()
}

/// `||(-Laplacian)^{-1/2} f||_2^2` over the range of the Laplacian.
pub(crate) fn hm1_sq(grid: &Grid, spec: &[C]) -> f64 {
    let lambda = grid.lambda();
    weighted_energy(grid, spec, |k| {
        if lambda[k] > 0.0 {
            1.0 / lambda[k]
        } else {
            0.0
        }
    })
}

pub(crate) fn check_mean_zero(f: &Field) -> Result<()> {
    let rms = norm_l2(f) / libm::sqrt(f.grid().volume());
    let mean = f.mean();
    let tolerance = MEAN_ZERO_TOL * rms;
    if mean.abs() > tolerance {
        return Err(Error::MeanViolation { mean, tolerance });
    }
    Ok(())
}

fn filtered(f: &Field, mult: impl Fn(usize, C) -> C) -> Field {
    let grid = f.grid();
    let mut spec = spectrum(grid, f.values());
    for (k, c) in spec.iter_mut().enumerate() {
        *c = mult(k, *c);
    }
    Field::from_raw(grid, values(grid, spec))
}

/// Forward discrete Fourier transform.
pub fn forward_transform(f: &Field) -> SpectralField {
    let grid = f.grid();
    let vol = grid.volume();
    let coeffs = spectrum(grid, f.values())
        .into_iter()
        .map(|c| c * vol)
        .collect();
    SpectralField::new(grid, coeffs).expect("length matches grid")
}

/// Inverse transform; rejects coefficient sets that do not describe a real field.
pub fn inverse_transform(s: &SpectralField) -> Result<Field> {
    let defect = s.hermitian_defect();
    if defect > 1e-10 {
        return Err(Error::NotHermitian { defect });
    }
    let grid = s.grid();
    let inv = 1.0 / grid.volume();
    let spec = s.coeffs().iter().map(|c| c * inv).collect();
    Ok(Field::from_raw(grid, values(grid, spec)))
}

pub fn grad(f: &Field) -> VectorField {
    let grid = f.grid();
    let comps = gradient_values(grid, &spectrum(grid, f.values()));
    VectorField::from_raw(
        comps
            .into_iter()
            .map(|v| Field::from_raw(grid, v))
            .collect(),
    )
}

pub fn div(v: &VectorField) -> Result<Field> {
    let grid = v.grid();
    if v.components().iter().any(|c| !c.grid().same_as(grid)) {
        return Err(Error::GridMismatch);
    }
    let comps: Vec<&[f64]> = v.components().iter().map(|c| c.values()).collect();
    let spec = divergence_spectrum(grid, &comps);
    Ok(Field::from_raw(grid, values(grid, spec)))
}

pub fn laplacian(f: &Field) -> Field {
    let lambda = f.grid().lambda();
    filtered(f, |k, c| c * -lambda[k])
}

/// Multiplies each mode by a real symbol of its wavevector.
pub fn apply_symbol(f: &Field, symbol: impl Fn(&Wavevector) -> f64) -> Field {
    let grid = f.grid().clone();
    filtered(f, |k, c| c * symbol(&grid.wavevector(k)))
}

/// `(-Laplacian)^gamma`. For negative powers the input must be mean-zero and
/// the result is taken on the range of the Laplacian (mean-zero output).
pub fn neg_laplacian_pow(f: &Field, gamma: f64) -> Result<Field> {
    if !gamma.is_finite() {
        return Err(Error::InvalidParameter("exponent must be finite"));
    }
    if gamma < 0.0 {
        check_mean_zero(f)?;
    }
    let lambda = f.grid().lambda();
    Ok(filtered(f, |k, c| {
        let l = lambda[k];
        if gamma == 0.0 {
            c
        } else if l > 0.0 {
            c * libm::pow(l, gamma)
        } else {
            ZERO
        }
    }))
}

/// `<f, g> = h^dim sum f g`.
pub fn inner(f: &Field, g: &Field) -> f64 {
    assert!(f.grid().same_as(g.grid()), "grid mismatch");
    f.grid().cell_volume()
        * f.values()
            .iter()
            .zip(g.values())
            .map(|(a, b)| a * b)
            .sum::<f64>()
}

pub fn norm_l2(f: &Field) -> f64 {
    libm::sqrt(inner(f, f))
}

/// Discrete `l^p` norm; `p = f64::INFINITY` gives the max norm.
pub fn norm_lp(f: &Field, p: f64) -> f64 {
    assert!(p >= 1.0, "p must be at least 1");
    if p.is_infinite() {
        return norm_inf(f);
    }
    let sum: f64 = f.values().iter().map(|v| libm::pow(v.abs(), p)).sum();
    libm::pow(f.grid().cell_volume() * sum, 1.0 / p)
}

pub fn norm_inf(f: &Field) -> f64 {
    f.values().iter().fold(0.0, |m, v| m.max(v.abs()))
}

/// `||(-Laplacian)^{-1/2} f||_2`; requires a mean-zero argument.
pub fn norm_hm1(f: &Field) -> Result<f64> {
    check_mean_zero(f)?;
    Ok(libm::sqrt(hm1_sq(
        f.grid(),
        &spectrum(f.grid(), f.values()),
    )))
}

/// `(||f||^2 + ||grad f||^2)^{1/2}`.
pub fn norm_h1(f: &Field) -> f64 {
    let grid = f.grid();
    let lambda = grid.lambda();
    let spec = spectrum(grid, f.values());
    libm::sqrt(weighted_energy(grid, &spec, |k| 1.0 + lambda[k]))
}

/// `(||f||^2 + ||grad f||^2 + ||lap f||^2)^{1/2}`.
pub fn norm_h2(f: &Field) -> f64 {
    let grid = f.grid();
    let lambda = grid.lambda();
    let spec = spectrum(grid, f.values());
    libm::sqrt(weighted_energy(grid, &spec, |k| {
        1.0 + lambda[k] + lambda[k] * lambda[k]
    }))
}

/// Trigonometric interpolant of `f` evaluated on `target`, a grid of the same
/// dimension and box. Modes on a Nyquist plane of either grid are dropped.
pub fn resample(f: &Field, target: &Grid) -> Result<Field> {
    let src = f.grid();
    if src.dim() != target.dim() || src.length() != target.length() {
        return Err(Error::GridMismatch);
    }
    let spec = spectrum(src, f.values());
    let mut out = vec![ZERO; target.len()];
    for (k, c) in spec.iter().enumerate() {
        let w = src.wavevector(k);
        if w.nyquist {
            continue;
        }
        if let Some(j) = target.mode_index(&w.index[..src.dim()]) {
            if !target.wavevector(j).nyquist {
                out[j] = *c;
            }
        }
    }
    Ok(Field::from_raw(target, values(target, out)))
}

/// Grid projection: pointwise evaluation at the nodes `x_i = i h`.
pub fn sample(grid: &Grid, func: impl Fn(&[f64]) -> f64) -> Field {
    let dim = grid.dim();
    let values = (0..grid.len())
        .map(|i| func(&grid.node(i)[..dim]))
        .collect();
    Field::from_raw(grid, values)
}
