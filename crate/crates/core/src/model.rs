//! SPFC energy, the chemical potentials of the two BDF2 splittings, and the
//! per-step nonlinear operator with its convex objective.
//!
//! One time step of either scheme is the equation `N[phi] = f` posed on the
//! mass hyperplane `mean(phi) = mean(phi_k)`, where (scheme 1)
//!
//! ```text
//! N[phi] = (-lap)^-1 (3/2 phi - 2 phi_k + 1/2 phi_km1) + dt P(phi)
//!          + a dt phi - A dt^2 lap phi + dt lap^2 phi
//! f      = -2 dt lap (2 phi_k - phi_km1) - A dt^2 lap phi_k
//! ```
//!
//! with `P(phi) = -div(|grad phi|^2 grad phi)`. Scheme 2 swaps
//! `a dt phi + dt lap^2 phi` for `dt (1 + lap)^2 phi` and uses
//! `f = dt eps (2 phi_k - phi_km1) - A dt^2 lap phi_k`.

use alloc::vec;
use alloc::vec::Vec;
use core::fmt;
use core::str::FromStr;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::grid::{Field, Grid};
use crate::spectral::{
    self, divergence_spectrum, gradient_values, spectrum, values, weighted_energy,
};

type C = Complex64;

/// Relative slack for "same mean" checks between time levels.
pub const MASS_TOL: f64 = 1e-11;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Scheme {
    /// `-|grad phi|^2` treated explicitly.
    Bdf2Es1,
    /// `-eps/2 phi^2` treated explicitly.
    Bdf2Es2,
}

impl Scheme {
    pub const ALL: [Scheme; 2] = [Scheme::Bdf2Es1, Scheme::Bdf2Es2];

    pub fn name(self) -> &'static str {
        match self {
            Scheme::Bdf2Es1 => "bdf2-es-1",
            Scheme::Bdf2Es2 => "bdf2-es-2",
        }
    }
}

impl fmt::Display for Scheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Scheme {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "1" | "bdf2-es-1" | "BDF2_ES_1" => Ok(Scheme::Bdf2Es1),
            "2" | "bdf2-es-2" | "BDF2_ES_2" => Ok(Scheme::Bdf2Es2),
            _ => Err(Error::InvalidParameter("unknown scheme")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModelParams {
    epsilon: f64,
    a: f64,
    reg_a: f64,
    scheme: Scheme,
    dealias: bool,
}

impl ModelParams {
    pub fn new(epsilon: f64, reg_a: f64, scheme: Scheme) -> Result<Self> {
        if !(epsilon > 0.0 && epsilon < 1.0) {
            return Err(Error::InvalidParameter("epsilon must lie in (0, 1)"));
        }
        if !(reg_a >= 0.0 && reg_a.is_finite()) {
            return Err(Error::InvalidParameter(
                "regularization A must be finite and >= 0",
            ));
        }
        Ok(Self {
            epsilon,
            a: 1.0 - epsilon,
            reg_a,
            scheme,
            dealias: false,
        })
    }

    /// Regularization at the stability threshold `A = eps^2 / 16`.
    pub fn at_threshold(epsilon: f64, scheme: Scheme) -> Result<Self> {
        Self::new(epsilon, epsilon * epsilon / 16.0, scheme)
    }

    /// Filters the gradient entering the quartic term with the two-thirds rule.
    pub fn with_dealias(mut self, on: bool) -> Self {
        self.dealias = on;
        self
    }

    pub fn with_scheme(mut self, scheme: Scheme) -> Self {
        self.scheme = scheme;
        self
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    /// `a = 1 - eps`.
    pub fn a(&self) -> f64 {
        self.a
    }

    pub fn reg_a(&self) -> f64 {
        self.reg_a
    }

    pub fn scheme(&self) -> Scheme {
        self.scheme
    }

    pub fn dealias(&self) -> bool {
        self.dealias
    }

    /// `A >= eps^2 / 16`: modified-energy dissipation is guaranteed.
    pub fn stable_guarantee(&self) -> bool {
        self.reg_a >= self.epsilon * self.epsilon / 16.0
    }
}

pub(crate) fn check_mass(left: f64, right: f64) -> Result<()> {
    if (left - right).abs() > MASS_TOL * (1.0 + left.abs().max(right.abs())) {
        return Err(Error::MassMismatch { left, right });
    }
    Ok(())
}

/// Data fixed during one time step.
#[derive(Debug, Clone)]
pub struct StepContext {
    pub phi_k: Field,
    pub phi_km1: Field,
    pub dt: f64,
    pub params: ModelParams,
    /// External source added to the time-derivative side; `None` in production runs.
    pub source: Option<Field>,
}

impl StepContext {
    pub fn new(phi_k: Field, phi_km1: Field, dt: f64, params: ModelParams) -> Result<Self> {
        if !phi_k.grid().same_as(phi_km1.grid()) {
            return Err(Error::GridMismatch);
        }
        if !(dt > 0.0 && dt.is_finite()) {
            return Err(Error::InvalidParameter("time step must be positive"));
        }
        check_mass(phi_k.mean(), phi_km1.mean())?;
        Ok(Self {
            phi_k,
            phi_km1,
            dt,
            params,
            source: None,
        })
    }

    pub fn with_source(mut self, source: Field) -> Result<Self> {
        if !source.grid().same_as(self.phi_k.grid()) {
            return Err(Error::GridMismatch);
        }
        self.source = Some(source);
        Ok(self)
    }

    pub fn grid(&self) -> &Grid {
        self.phi_k.grid()
    }

    pub(crate) fn check_hyperplane(&self, phi: &Field) -> Result<()> {
        if !phi.grid().same_as(self.grid()) {
            return Err(Error::GridMismatch);
        }
        check_mass(phi.mean(), self.phi_k.mean())
    }
}

/// Gradient entering the quartic term, in physical space.
pub(crate) fn quartic_gradient(grid: &Grid, spec: &[C], dealias: bool) -> Vec<Vec<f64>> {
    if dealias {
        let keep = grid.dealias_keep();
        let masked: Vec<C> = spec
            .iter()
            .zip(keep)
            .map(|(&c, &k)| if k { c } else { C::new(0.0, 0.0) })
            .collect();
        gradient_values(grid, &masked)
    } else {
        gradient_values(grid, spec)
    }
}

/// Amplitude spectrum of `-div(|g|^2 g)` for a physical gradient `g`.
pub(crate) fn p_laplacian_spectrum(grid: &Grid, g: &[Vec<f64>], dealias: bool) -> Vec<C> {
    let len = grid.len();
    let mut mag2 = vec![0.0; len];
    for comp in g {
        for (m, v) in mag2.iter_mut().zip(comp) {
            *m += v * v;
        }
    }
    let flux: Vec<Vec<f64>> = g
        .iter()
        .map(|comp| comp.iter().zip(&mag2).map(|(v, m)| m * v).collect())
        .collect();
    let refs: Vec<&[f64]> = flux.iter().map(|v| v.as_slice()).collect();
    let mut out = divergence_spectrum(grid, &refs);
    let keep = grid.dealias_keep();
    for (k, o) in out.iter_mut().enumerate() {
        *o = if dealias && !keep[k] {
            C::new(0.0, 0.0)
        } else {
            -*o
        };
    }
    out
}

/// `sum_j |g_j|^4 h^dim`, i.e. `||g||_4^4` for a vector field given by components.
pub(crate) fn quartic_sum(grid: &Grid, g: &[Vec<f64>]) -> f64 {
    let mut total = 0.0;
    for j in 0..grid.len() {
        let m: f64 = g.iter().map(|c| c[j] * c[j]).sum();
        total += m * m;
    }
    grid.cell_volume() * total
}

/// Per-step operator tables shared by the public operators and the PSD solver.
pub(crate) struct StepOperator {
    pub grid: Grid,
    pub dt: f64,
    /// Spectrum of `-2 phi_k + 1/2 phi_km1`.
    pub history: Vec<C>,
    /// Linear implicit symbol besides the BDF part:
    /// scheme 1 `a dt + A dt^2 lam + dt lam^2`, scheme 2 `A dt^2 lam + dt (1 - lam)^2`.
    pub implicit: Vec<f64>,
}

impl StepOperator {
    pub fn new(ctx: &StepContext) -> Self {
        let grid = ctx.grid().clone();
        let (sk, skm1) = spectral::spectrum_pair(&grid, ctx.phi_k.values(), ctx.phi_km1.values());
        let history = sk
            .iter()
            .zip(&skm1)
            .map(|(a, b)| a * -2.0 + b * 0.5)
            .collect();
        let implicit = implicit_symbol(&grid, ctx.dt, &ctx.params);
        Self {
            grid,
            dt: ctx.dt,
            history,
            implicit,
        }
    }

    /// `N[phi]` in amplitude form, given the spectrum of `phi` and of `P(phi)`.
    pub fn apply(&self, phi: &[C], plap: &[C]) -> Vec<C> {
        let lambda = self.grid.lambda();
        (0..phi.len())
            .map(|k| {
                let bdf = if lambda[k] > 0.0 {
                    (phi[k] * 1.5 + self.history[k]) / lambda[k]
                } else {
                    C::new(0.0, 0.0)
                };
                bdf + phi[k] * self.implicit[k] + plap[k] * self.dt
            })
            .collect()
    }

    /// Symbol of the linearized operator used as preconditioner.
    pub fn preconditioner(&self) -> Vec<f64> {
        let lambda = self.grid.lambda();
        lambda
            .iter()
            .zip(&self.implicit)
            .map(|(&l, &imp)| {
                if l > 0.0 {
                    1.5 / l + self.dt * l + imp
                } else {
                    0.0
                }
            })
            .collect()
    }
}

fn implicit_symbol(grid: &Grid, dt: f64, p: &ModelParams) -> Vec<f64> {
    let reg = p.reg_a * dt * dt;
    grid.lambda()
        .iter()
        .map(|&l| match p.scheme {
            Scheme::Bdf2Es1 => p.a * dt + reg * l + dt * l * l,
            Scheme::Bdf2Es2 => reg * l + dt * (1.0 - l) * (1.0 - l),
        })
        .collect()
}

/// Discrete SPFC energy
/// `1/4 ||grad phi||_4^4 + a/2 ||phi||^2 - ||grad phi||^2 + 1/2 ||lap phi||^2`.
pub fn energy(phi: &Field, params: &ModelParams) -> f64 {
    let grid = phi.grid();
    let spec = spectrum(grid, phi.values());
    let g = quartic_gradient(grid, &spec, params.dealias);
    let lambda = grid.lambda();
    let a = params.a;
    0.25 * quartic_sum(grid, &g)
        + weighted_energy(grid, &spec, |k| {
            0.5 * a - lambda[k] + 0.5 * lambda[k] * lambda[k]
        })
}

/// `-div(|grad phi|^2 grad phi)`: gradient by transform, cubic pointwise,
/// divergence by transform.
pub fn p_laplacian_term(phi: &Field) -> Field {
    p_laplacian_term_with(phi, false)
}

pub fn p_laplacian_term_with(phi: &Field, dealias: bool) -> Field {
    let grid = phi.grid();
    let g = quartic_gradient(grid, &spectrum(grid, phi.values()), dealias);
    Field::from_raw(grid, values(grid, p_laplacian_spectrum(grid, &g, dealias)))
}

/// Chemical potential of the selected scheme evaluated at the new level `phi_new`.
pub fn chemical_potential(phi_new: &Field, ctx: &StepContext) -> Field {
    let grid = ctx.grid();
    let p = &ctx.params;
    let lambda = grid.lambda();
    let spec = spectrum(grid, phi_new.values());
    let (sk, skm1) = spectral::spectrum_pair(grid, ctx.phi_k.values(), ctx.phi_km1.values());
    let g = quartic_gradient(grid, &spec, p.dealias);
    let mut mu = p_laplacian_spectrum(grid, &g, p.dealias);
    let reg = p.reg_a * ctx.dt;
    for k in 0..mu.len() {
        let l = lambda[k];
        let extrap = sk[k] * 2.0 - skm1[k];
        let dd = (spec[k] - sk[k]) * (reg * l);
        mu[k] += match p.scheme {
            Scheme::Bdf2Es1 => spec[k] * (p.a + l * l) - extrap * (2.0 * l) + dd,
            Scheme::Bdf2Es2 => spec[k] * ((1.0 - l) * (1.0 - l)) - extrap * p.epsilon + dd,
        };
    }
    Field::from_raw(grid, values(grid, mu))
}

/// Chemical potential of the initial data, used by the ghost step.
pub fn mu_zero(phi0: &Field, params: &ModelParams) -> Field {
    let grid = phi0.grid();
    let lambda = grid.lambda();
    let spec = spectrum(grid, phi0.values());
    let g = quartic_gradient(grid, &spec, params.dealias);
    let mut mu = p_laplacian_spectrum(grid, &g, params.dealias);
    for k in 0..mu.len() {
        let l = lambda[k];
        mu[k] += spec[k] * (params.a - 2.0 * l + l * l);
    }
    Field::from_raw(grid, values(grid, mu))
}

/// `N[phi]` for the context's scheme; `phi` must lie on the mass hyperplane.
pub fn nonlinear_operator(phi: &Field, ctx: &StepContext) -> Result<Field> {
    ctx.check_hyperplane(phi)?;
    let op = StepOperator::new(ctx);
    let grid = ctx.grid();
    let spec = spectrum(grid, phi.values());
    let g = quartic_gradient(grid, &spec, ctx.params.dealias);
    let plap = p_laplacian_spectrum(grid, &g, ctx.params.dealias);
    Ok(Field::from_raw(grid, values(grid, op.apply(&spec, &plap))))
}

pub(crate) fn rhs_spectrum(ctx: &StepContext) -> Vec<C> {
    let grid = ctx.grid();
    let p = &ctx.params;
    let dt = ctx.dt;
    let lambda = grid.lambda();
    let (sk, skm1) = spectral::spectrum_pair(grid, ctx.phi_k.values(), ctx.phi_km1.values());
    let source = ctx.source.as_ref().map(|s| spectrum(grid, s.values()));
    (0..grid.len())
        .map(|k| {
            let l = lambda[k];
            let extrap = sk[k] * 2.0 - skm1[k];
            let mut f = sk[k] * (p.reg_a * dt * dt * l)
                + match p.scheme {
                    Scheme::Bdf2Es1 => extrap * (2.0 * dt * l),
                    Scheme::Bdf2Es2 => extrap * (dt * p.epsilon),
                };
            // Sources enter only through the range of the Laplacian.
            if let (Some(s), true) = (&source, l > 0.0) {
                f += s[k] * (dt / l);
            }
            f
        })
        .collect()
}

/// Right-hand side `f` of the step equation, including `dt (-lap)^-1 S` for a source `S`.
pub fn rhs(ctx: &StepContext) -> Field {
    let grid = ctx.grid();
    Field::from_raw(grid, values(grid, rhs_spectrum(ctx)))
}

/// Objective whose minimizer on the mass hyperplane solves `N[phi] = f`.
pub fn objective(phi: &Field, ctx: &StepContext, f: &Field) -> Result<f64> {
    ctx.check_hyperplane(phi)?;
    if !f.grid().same_as(ctx.grid()) {
        return Err(Error::GridMismatch);
    }
    let op = StepOperator::new(ctx);
    let grid = ctx.grid();
    let spec = spectrum(grid, phi.values());
    let g = quartic_gradient(grid, &spec, ctx.params.dealias);
    Ok(objective_from_parts(
        &op,
        &spec,
        &g,
        spectral::inner(f, phi),
    ))
}

/// Objective from the spectrum of `phi`, its quartic-term gradient and `<f, phi>`.
pub(crate) fn objective_from_parts(
    op: &StepOperator,
    phi: &[C],
    g: &[Vec<f64>],
    f_dot_phi: f64,
) -> f64 {
    let grid = &op.grid;
    let bdf: Vec<C> = phi
        .iter()
        .zip(&op.history)
        .map(|(p, h)| p * 1.5 + h)
        .collect();
    let hm1 = spectral::hm1_sq(grid, &bdf);
    let quad = weighted_energy(grid, phi, |k| 0.5 * op.implicit[k]);
    hm1 / 3.0 + 0.25 * op.dt * quartic_sum(grid, g) + quad - f_dot_phi
}
