//! Manufactured solution `phi_e = sin(2 pi x / L) cos(2 pi y / L) T(t) / (2 pi)`
//! and the source terms that make it exact.
//!
//! Spatial operators are applied to `phi_e` symbolically through [`TrigPoly`],
//! a finite Fourier series with exact products and derivatives.

use alloc::collections::BTreeMap;
use alloc::vec::Vec;
use core::f64::consts::PI;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::grid::{Field, Grid};
use crate::model::{ModelParams, Scheme};

type C = Complex64;

/// `sum_k c_k exp(2 pi i k.x / L)` with finitely many wavenumbers.
#[derive(Debug, Clone, PartialEq)]
pub struct TrigPoly {
    dim: usize,
    length: f64,
    terms: BTreeMap<[i64; 3], C>,
}

impl TrigPoly {
    pub fn zero(dim: usize, length: f64) -> Self {
        Self {
            dim,
            length,
            terms: BTreeMap::new(),
        }
    }

    pub fn mode(dim: usize, length: f64, k: [i64; 3], c: C) -> Self {
        let mut p = Self::zero(dim, length);
        p.terms.insert(k, c);
        p
    }

    /// `sin(2 pi m x_axis / L)`.
    pub fn sin(dim: usize, length: f64, axis: usize, m: i64) -> Self {
        let mut k = [0; 3];
        k[axis] = m;
        let mut p = Self::mode(dim, length, k, C::new(0.0, -0.5));
        k[axis] = -m;
        p.terms.insert(k, C::new(0.0, 0.5));
        p
    }

    /// `cos(2 pi m x_axis / L)`.
    pub fn cos(dim: usize, length: f64, axis: usize, m: i64) -> Self {
        let mut k = [0; 3];
        k[axis] = m;
        let mut p = Self::mode(dim, length, k, C::new(0.5, 0.0));
        k[axis] = -m;
        p.terms.insert(k, C::new(0.5, 0.0));
        p
    }

    pub fn terms(&self) -> &BTreeMap<[i64; 3], C> {
        &self.terms
    }

    fn map(&self, f: impl Fn(&[i64; 3], C) -> C) -> Self {
        let mut out = Self::zero(self.dim, self.length);
        for (k, &c) in &self.terms {
            let v = f(k, c);
            if v != C::new(0.0, 0.0) {
                out.terms.insert(*k, v);
            }
        }
        out
    }

    pub fn scale(&self, s: f64) -> Self {
        self.map(|_, c| c * s)
    }

    pub fn add(&self, other: &Self) -> Self {
        let mut out = self.clone();
        for (k, &c) in &other.terms {
            *out.terms.entry(*k).or_insert(C::new(0.0, 0.0)) += c;
        }
        out
    }

    /// `sum s_i p_i`.
    pub fn combination(terms: &[(f64, &Self)]) -> Self {
        let first = terms[0].1;
        terms
            .iter()
            .fold(Self::zero(first.dim, first.length), |acc, (s, p)| {
                acc.add(&p.scale(*s))
            })
    }

    pub fn mul(&self, other: &Self) -> Self {
        let mut out = Self::zero(self.dim, self.length);
        for (ka, &a) in &self.terms {
            for (kb, &b) in &other.terms {
                let k = [ka[0] + kb[0], ka[1] + kb[1], ka[2] + kb[2]];
                *out.terms.entry(k).or_insert(C::new(0.0, 0.0)) += a * b;
            }
        }
        out
    }

    pub fn derivative(&self, axis: usize) -> Self {
        let w = 2.0 * PI / self.length;
        self.map(|k, c| c * C::new(0.0, w * k[axis] as f64))
    }

    pub fn gradient(&self) -> Vec<Self> {
        (0..self.dim).map(|a| self.derivative(a)).collect()
    }

    pub fn laplacian(&self) -> Self {
        let w = 2.0 * PI / self.length;
        self.map(|k, c| {
            let k2: i64 = k.iter().map(|v| v * v).sum();
            c * (-w * w * k2 as f64)
        })
    }

    /// `-div(|grad p|^2 grad p)`.
    pub fn p_laplacian(&self) -> Self {
        let g = self.gradient();
        let mut mag2 = Self::zero(self.dim, self.length);
        for c in &g {
            mag2 = mag2.add(&c.mul(c));
        }
        let mut div = Self::zero(self.dim, self.length);
        for (a, c) in g.iter().enumerate() {
            div = div.add(&mag2.mul(c).derivative(a));
        }
        div.scale(-1.0)
    }

    pub fn eval(&self, x: &[f64]) -> f64 {
        let w = 2.0 * PI / self.length;
        self.terms
            .iter()
            .map(|(k, c)| {
                let ang = w * (0..self.dim).map(|a| k[a] as f64 * x[a]).sum::<f64>();
                c.re * libm::cos(ang) - c.im * libm::sin(ang)
            })
            .sum()
    }

    pub fn sample(&self, grid: &Grid) -> Field {
        crate::spectral::sample(grid, |x| self.eval(x))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TimeProfile {
    /// `T(t) = cos t`.
    Cosine,
    /// `T(t) = 1`.
    Constant,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SourceMode {
    /// Time-discrete scheme applied to `phi_e` with exact spatial operators:
    /// the only error left is spatial.
    Spatial,
    /// Continuum residual `d/dt phi_e - lap mu(phi_e)`: the only error left is temporal.
    Temporal,
}

#[derive(Debug, Clone)]
pub struct ManufacturedSolution {
    profile: TimeProfile,
    shape: TrigPoly,
}

impl ManufacturedSolution {
    /// The solution on the 2D box of side `length`.
    pub fn new(length: f64, profile: TimeProfile) -> Self {
        let shape = TrigPoly::sin(2, length, 0, 1)
            .mul(&TrigPoly::cos(2, length, 1, 1))
            .scale(1.0 / (2.0 * PI));
        Self { profile, shape }
    }

    pub fn shape(&self) -> &TrigPoly {
        &self.shape
    }

    pub fn time_factor(&self, t: f64) -> f64 {
        match self.profile {
            TimeProfile::Cosine => libm::cos(t),
            TimeProfile::Constant => 1.0,
        }
    }

    fn time_derivative(&self, t: f64) -> f64 {
        match self.profile {
            TimeProfile::Cosine => -libm::sin(t),
            TimeProfile::Constant => 0.0,
        }
    }

    pub fn at(&self, t: f64) -> TrigPoly {
        self.shape.scale(self.time_factor(t))
    }

    fn check_grid(&self, grid: &Grid) -> Result<()> {
        if grid.dim() != 2 || grid.length() != self.shape.length {
            return Err(Error::InvalidParameter(
                "manufactured solution needs the matching 2D box",
            ));
        }
        Ok(())
    }

    pub fn sample(&self, grid: &Grid, t: f64) -> Result<Field> {
        self.check_grid(grid)?;
        Ok(self.at(t).sample(grid))
    }

    /// Source for the step ending at `t_new`.
    pub fn source(
        &self,
        mode: SourceMode,
        t_new: f64,
        dt: f64,
        params: &ModelParams,
        grid: &Grid,
    ) -> Result<Field> {
        self.check_grid(grid)?;
        let s = match mode {
            SourceMode::Temporal => {
                let p = self.at(t_new);
                TrigPoly::combination(&[
                    (self.time_derivative(t_new), &self.shape),
                    (-1.0, &continuum_mu(&p, params).laplacian()),
                ])
            }
            SourceMode::Spatial => {
                let p1 = self.at(t_new);
                let p0 = self.at(t_new - dt);
                let pm = self.at(t_new - 2.0 * dt);
                let bdf =
                    TrigPoly::combination(&[(1.5 / dt, &p1), (-2.0 / dt, &p0), (0.5 / dt, &pm)]);
                bdf.add(&scheme_mu(&p1, &p0, &pm, dt, params).laplacian().scale(-1.0))
            }
        };
        let mut field = s.sample(grid);
        // Sources must not change the mass.
        let mean = field.mean();
        for v in field.values_mut() {
            *v -= mean;
        }
        Ok(field)
    }
}

/// `P(p) + a p + 2 lap p + lap^2 p`.
pub fn continuum_mu(p: &TrigPoly, params: &ModelParams) -> TrigPoly {
    let l = p.laplacian();
    TrigPoly::combination(&[
        (1.0, &p.p_laplacian()),
        (params.a(), p),
        (2.0, &l),
        (1.0, &l.laplacian()),
    ])
}

/// Scheme chemical potential with exact spatial operators.
pub fn scheme_mu(
    p1: &TrigPoly,
    p0: &TrigPoly,
    pm: &TrigPoly,
    dt: f64,
    params: &ModelParams,
) -> TrigPoly {
    let extrap = TrigPoly::combination(&[(2.0, p0), (-1.0, pm)]);
    let reg = TrigPoly::combination(&[(1.0, p1), (-1.0, p0)])
        .laplacian()
        .scale(-params.reg_a() * dt);
    let l1 = p1.laplacian();
    let rest = match params.scheme() {
        Scheme::Bdf2Es1 => TrigPoly::combination(&[
            (params.a(), p1),
            (2.0, &extrap.laplacian()),
            (1.0, &l1.laplacian()),
        ]),
        Scheme::Bdf2Es2 => TrigPoly::combination(&[
            (-params.epsilon(), &extrap),
            (1.0, p1),
            (2.0, &l1),
            (1.0, &l1.laplacian()),
        ]),
    };
    TrigPoly::combination(&[(1.0, &p1.p_laplacian()), (1.0, &reg), (1.0, &rest)])
}
