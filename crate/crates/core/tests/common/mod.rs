//! Brute-force reference implementations: direct DFT sums, no FFT.
#![allow(dead_code)]

use std::f64::consts::PI;

use num_complex::Complex64 as C;
use rand_core::{Rng, SeedableRng};
use rand_pcg::Pcg64;
use spfc_core::{Field, Grid};

pub fn rng(seed: u64) -> Pcg64 {
    Pcg64::seed_from_u64(seed)
}

pub fn uniform(rng: &mut Pcg64) -> f64 {
    (rng.next_u64() >> 11) as f64 / (1u64 << 53) as f64
}

pub fn random_field(grid: &Grid, rng: &mut Pcg64, amp: f64) -> Field {
    let v = (0..grid.len())
        .map(|_| amp * (2.0 * uniform(rng) - 1.0))
        .collect();
    Field::new(grid, v).unwrap()
}

/// Smooth random field: a few low modes with random amplitudes and phases.
pub fn smooth_field(grid: &Grid, rng: &mut Pcg64, amp: f64, kmax: i64) -> Field {
    let l = grid.length();
    let mut terms = Vec::new();
    for kx in -kmax..=kmax {
        for ky in 0..=kmax {
            terms.push((
                kx as f64,
                ky as f64,
                amp * uniform(rng),
                2.0 * PI * uniform(rng),
            ));
        }
    }
    let v = (0..grid.len())
        .map(|j| {
            let x = grid.node(j);
            terms
                .iter()
                .map(|(kx, ky, a, ph)| a * (2.0 * PI * (kx * x[0] + ky * x[1]) / l + ph).cos())
                .sum()
        })
        .collect();
    Field::new(grid, v).unwrap()
}

/// Signed wavenumber of FFT index `i` on `n` points.
pub fn ell(i: usize, n: usize) -> i64 {
    if i <= n / 2 {
        i as i64
    } else {
        i as i64 - n as i64
    }
}

pub fn on_nyquist(k: &[i64], n: usize) -> bool {
    n.is_multiple_of(2) && k.iter().any(|&v| v.unsigned_abs() as usize == n / 2)
}

fn axes(j: usize, n: usize, dim: usize) -> Vec<usize> {
    let mut out = vec![0; dim];
    let mut rest = j;
    for a in (0..dim).rev() {
        out[a] = rest % n;
        rest /= n;
    }
    out
}

pub fn modes(grid: &Grid) -> Vec<Vec<i64>> {
    let n = grid.n_per_axis();
    (0..grid.len())
        .map(|j| {
            axes(j, n, grid.dim())
                .into_iter()
                .map(|i| ell(i, n))
                .collect()
        })
        .collect()
}

/// `h^dim sum_j f_j exp(-2 pi i k.x_j / L)` for every mode, in FFT order.
pub fn dense_coeffs(f: &Field) -> Vec<(Vec<i64>, C)> {
    let grid = f.grid();
    let l = grid.length();
    let hd = grid.cell_volume();
    modes(grid)
        .into_iter()
        .map(|k| {
            let mut acc = C::new(0.0, 0.0);
            for (j, &v) in f.values().iter().enumerate() {
                let x = grid.node(j);
                let ang = -2.0 * PI * k.iter().zip(x).map(|(a, b)| *a as f64 * b).sum::<f64>() / l;
                acc += C::new(ang.cos(), ang.sin()) * v;
            }
            (k, acc * hd)
        })
        .collect()
}

/// `L^-dim sum_k symbol(k) c_k exp(2 pi i k.x_j / L)`, real part.
pub fn dense_synth(
    grid: &Grid,
    coeffs: &[(Vec<i64>, C)],
    symbol: impl Fn(&[i64]) -> C,
) -> Vec<f64> {
    let l = grid.length();
    let vol = grid.volume();
    (0..grid.len())
        .map(|j| {
            let x = grid.node(j);
            let mut acc = C::new(0.0, 0.0);
            for (k, c) in coeffs {
                let s = symbol(k);
                if s == C::new(0.0, 0.0) {
                    continue;
                }
                let ang = 2.0 * PI * k.iter().zip(x).map(|(a, b)| *a as f64 * b).sum::<f64>() / l;
                acc += s * c * C::new(ang.cos(), ang.sin());
            }
            acc.re / vol
        })
        .collect()
}

/// Derivative along `axis`; zero on every Nyquist-touching mode.
pub fn dense_deriv(f: &Field, axis: usize) -> Vec<f64> {
    let grid = f.grid();
    let n = grid.n_per_axis();
    let w = 2.0 * PI / grid.length();
    dense_synth(grid, &dense_coeffs(f), |k| {
        if on_nyquist(k, n) {
            C::new(0.0, 0.0)
        } else {
            C::new(0.0, w * k[axis] as f64)
        }
    })
}

pub fn dense_lap(f: &Field) -> Vec<f64> {
    let grid = f.grid();
    let n = grid.n_per_axis();
    let w = 2.0 * PI / grid.length();
    dense_synth(grid, &dense_coeffs(f), |k| {
        if on_nyquist(k, n) {
            C::new(0.0, 0.0)
        } else {
            C::new(-w * w * k.iter().map(|v| (v * v) as f64).sum::<f64>(), 0.0)
        }
    })
}

pub fn field(grid: &Grid, v: Vec<f64>) -> Field {
    Field::new(grid, v).unwrap()
}

/// `-div(|grad f|^2 grad f)` with dense derivatives.
pub fn dense_p_laplacian(f: &Field) -> Vec<f64> {
    let grid = f.grid();
    let g: Vec<Vec<f64>> = (0..grid.dim()).map(|a| dense_deriv(f, a)).collect();
    let mut out = vec![0.0; grid.len()];
    for a in 0..grid.dim() {
        let q: Vec<f64> = (0..grid.len())
            .map(|j| {
                let m: f64 = g.iter().map(|c| c[j] * c[j]).sum();
                m * g[a][j]
            })
            .collect();
        let dq = dense_deriv(&field(grid, q), a);
        for (o, v) in out.iter_mut().zip(dq) {
            *o -= v;
        }
    }
    out
}

pub fn dot(grid: &Grid, a: &[f64], b: &[f64]) -> f64 {
    grid.cell_volume() * a.iter().zip(b).map(|(x, y)| x * y).sum::<f64>()
}

pub fn max_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).fold(0.0, |m, (x, y)| m.max((x - y).abs()))
}

pub fn max_abs(a: &[f64]) -> f64 {
    a.iter().fold(0.0, |m, x| m.max(x.abs()))
}

/// Minus-one-norm squared by dense coefficients, skipping kernel modes.
pub fn dense_hm1_sq(f: &Field) -> f64 {
    let grid = f.grid();
    let n = grid.n_per_axis();
    let w = 2.0 * PI / grid.length();
    dense_coeffs(f)
        .iter()
        .filter(|(k, _)| !on_nyquist(k, n) && k.iter().any(|&v| v != 0))
        .map(|(k, c)| c.norm_sqr() / (w * w * k.iter().map(|v| (v * v) as f64).sum::<f64>()))
        .sum::<f64>()
        / grid.volume()
}
