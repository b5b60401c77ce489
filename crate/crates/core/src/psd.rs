//! Preconditioned steepest descent for the step equation `N[phi] = f`.
//!
//! The search direction inverts the constant-coefficient linearization
//! mode by mode; the step length is the root of the derivative of the
//! objective along the direction, a strictly increasing cubic.
//!
//! The iteration is carried in coefficient space. Per iteration it costs one
//! forward transform of the flux and one inverse transform of the direction
//! gradient; the iterate gradient is updated as `g += alpha e`.
//!
//! Residuals are measured on the range of the Laplacian. Kernel modes (the
//! mean, and Nyquist modes of even grids) are conserved by the flow: the
//! iterate takes them from `phi_k` and never changes them.

use alloc::vec;
use alloc::vec::Vec;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::grid::{Field, Grid};
use crate::model::{
    objective_from_parts, p_laplacian_spectrum, quartic_gradient, rhs_spectrum, StepContext,
    StepOperator,
};
use crate::spectral::{spectrum, values, weighted_energy};

type C = Complex64;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ResidualNorm {
    L2,
    Hm1,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PsdConfig {
    /// Relative residual target: stop when `||r|| <= tol (1 + ||f||)`.
    pub tol: f64,
    pub max_iter: usize,
    pub residual_norm: ResidualNorm,
    /// Take `alpha = 1` instead of the exact line minimizer.
    pub unit_step: bool,
}

impl Default for PsdConfig {
    fn default() -> Self {
        Self {
            tol: 1e-9,
            max_iter: 200,
            residual_norm: ResidualNorm::L2,
            unit_step: false,
        }
    }
}

impl PsdConfig {
    pub fn with_tol(mut self, tol: f64) -> Self {
        self.tol = tol;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.tol > 0.0 && self.tol < 1.0) {
            return Err(Error::InvalidParameter("PSD tolerance must lie in (0, 1)"));
        }
        if self.max_iter == 0 {
            return Err(Error::InvalidParameter("PSD max_iter must be at least 1"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct SolveStats {
    /// Number of updates applied.
    pub iterations: usize,
    /// Residual norm before each update, and after the last one.
    pub residual_history: Vec<f64>,
    /// `r_{n+1} / r_n` for `n >= 2`.
    pub contraction_ratios: Vec<f64>,
    /// Objective value at every iterate, starting from the guess.
    pub objective_history: Vec<f64>,
    pub step_sizes: Vec<f64>,
    pub converged: bool,
}

impl SolveStats {
    pub fn final_residual(&self) -> f64 {
        self.residual_history.last().copied().unwrap_or(0.0)
    }
}

fn residual_norm(grid: &Grid, r: &[C], kind: ResidualNorm) -> f64 {
    let lambda = grid.lambda();
    let sq = match kind {
        ResidualNorm::L2 => weighted_energy(grid, r, |k| if lambda[k] > 0.0 { 1.0 } else { 0.0 }),
        ResidualNorm::Hm1 => weighted_energy(grid, r, |k| {
            if lambda[k] > 0.0 {
                1.0 / lambda[k]
            } else {
                0.0
            }
        }),
    };
    libm::sqrt(sq)
}

/// `f - N[phi]` on range modes, zero on the kernel.
fn residual(op: &StepOperator, phi: &[C], plap: &[C], f: &[C]) -> Vec<C> {
    let lambda = op.grid.lambda();
    let n = op.apply(phi, plap);
    (0..phi.len())
        .map(|k| {
            if lambda[k] > 0.0 {
                f[k] - n[k]
            } else {
                C::new(0.0, 0.0)
            }
        })
        .collect()
}

fn inner_spec(grid: &Grid, a: &[C], b: &[C]) -> f64 {
    grid.volume()
        * a.iter()
            .zip(b)
            .map(|(x, y)| x.re * y.re + x.im * y.im)
            .sum::<f64>()
}

/// Cubic coefficients of the derivative of the objective along `d`.
fn coefficients(op: &StepOperator, g: &[Vec<f64>], d: &[C], e: &[Vec<f64>], r: &[C]) -> [f64; 4] {
    let grid = &op.grid;
    let lambda = grid.lambda();
    let (mut s1, mut s2, mut s3) = (0.0, 0.0, 0.0);
    for j in 0..grid.len() {
        let (mut ge, mut gg, mut ee) = (0.0, 0.0, 0.0);
        for (ga, ea) in g.iter().zip(e) {
            ge += ga[j] * ea[j];
            gg += ga[j] * ga[j];
            ee += ea[j] * ea[j];
        }
        s1 += 2.0 * ge * ge + gg * ee;
        s2 += ge * ee;
        s3 += ee * ee;
    }
    let dt_h = op.dt * grid.cell_volume();
    let lin = weighted_energy(grid, d, |k| {
        let bdf = if lambda[k] > 0.0 {
            1.5 / lambda[k]
        } else {
            0.0
        };
        bdf + op.implicit[k]
    });
    [
        -inner_spec(grid, r, d),
        dt_h * s1 + lin,
        3.0 * dt_h * s2,
        dt_h * s3,
    ]
}

/// Solves `L[d] = r - mean(r)` for the linearized operator, mode by mode.
pub fn precondition_solve(r: &Field, ctx: &StepContext) -> Field {
    let op = StepOperator::new(ctx);
    let grid = ctx.grid();
    let prec = op.preconditioner();
    let mut spec = spectrum(grid, r.values());
    for (c, p) in spec.iter_mut().zip(&prec) {
        *c = if *p > 0.0 { *c / *p } else { C::new(0.0, 0.0) };
    }
    Field::from_raw(grid, values(grid, spec))
}

/// `(c0, c1, c2, c3)` with `d/da F[phi + a d] = c3 a^3 + c2 a^2 + c1 a + c0`.
pub fn line_search_coefficients(
    phi: &Field,
    d: &Field,
    ctx: &StepContext,
    f: &Field,
) -> Result<[f64; 4]> {
    ctx.check_hyperplane(phi)?;
    if !d.grid().same_as(ctx.grid()) || !f.grid().same_as(ctx.grid()) {
        return Err(Error::GridMismatch);
    }
    let op = StepOperator::new(ctx);
    let grid = ctx.grid();
    let dealias = ctx.params.dealias();
    let phi_hat = spectrum(grid, phi.values());
    let mut d_hat = spectrum(grid, d.values());
    d_hat[0] = C::new(0.0, 0.0);
    let f_hat = spectrum(grid, f.values());
    let g = quartic_gradient(grid, &phi_hat, dealias);
    let e = quartic_gradient(grid, &d_hat, dealias);
    let plap = p_laplacian_spectrum(grid, &g, dealias);
    // c0 = <N[phi] - f, d> over all modes but the mean.
    let n = op.apply(&phi_hat, &plap);
    let mut r: Vec<C> = f_hat.iter().zip(&n).map(|(a, b)| a - b).collect();
    r[0] = C::new(0.0, 0.0);
    Ok(coefficients(&op, &g, &d_hat, &e, &r))
}

fn cubic(c: [f64; 4], a: f64) -> f64 {
    ((c[3] * a + c[2]) * a + c[1]) * a + c[0]
}

/// Unique real root of a strictly increasing cubic `c3 a^3 + c2 a^2 + c1 a + c0`.
///
/// Safeguarded Newton on a bracket grown geometrically from `[-1, 1]`.
pub fn solve_cubic_monotone(c0: f64, c1: f64, c2: f64, c3: f64) -> Result<f64> {
    let c = [c0, c1, c2, c3];
    if c.iter().all(|&v| v == 0.0) {
        return Ok(0.0);
    }
    if !(c1 > 0.0) || c3 < 0.0 || c.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonMonotone { c1 });
    }
    let tol = 1e-13 * c0.abs().max(c1);
    let (mut lo, mut hi) = (-1.0f64, 1.0f64);
    let mut grow = 0;
    while cubic(c, lo) > 0.0 {
        lo *= 2.0;
        grow += 1;
        if grow > 2100 {
            return Err(Error::NonMonotone { c1 });
        }
    }
    while cubic(c, hi) < 0.0 {
        hi *= 2.0;
        grow += 1;
        if grow > 2100 {
            return Err(Error::NonMonotone { c1 });
        }
    }
    let mut a = (-c0 / c1).clamp(lo, hi);
    for _ in 0..400 {
        let p = cubic(c, a);
        if p.abs() <= tol {
            return Ok(a);
        }
        if p < 0.0 {
            lo = a;
        } else {
            hi = a;
        }
        let dp = (3.0 * c3 * a + 2.0 * c2) * a + c1;
        let next = a - p / dp;
        a = if dp > 0.0 && next > lo && next < hi {
            next
        } else {
            0.5 * (lo + hi)
        };
        if hi - lo <= 4.0 * f64::EPSILON * lo.abs().max(hi.abs()) {
            return Ok(a);
        }
    }
    Ok(a)
}

/// Runs PSD from `guess` (which must share the mean of `ctx.phi_k`).
///
/// Returns `converged = false` when `max_iter` updates do not reach the
/// tolerance; a residual that grows tenfold over five iterations is an error.
pub fn psd_solve(
    guess: &Field,
    ctx: &StepContext,
    f: &Field,
    cfg: &PsdConfig,
) -> Result<(Field, SolveStats)> {
    ctx.check_hyperplane(guess)?;
    if !f.grid().same_as(ctx.grid()) {
        return Err(Error::GridMismatch);
    }
    let f_hat = spectrum(ctx.grid(), f.values());
    solve_spectral(guess, ctx, &f_hat, cfg)
}

/// [`psd_solve`] with `f` built from the context.
pub(crate) fn psd_solve_ctx(
    guess: &Field,
    ctx: &StepContext,
    cfg: &PsdConfig,
) -> Result<(Field, SolveStats)> {
    ctx.check_hyperplane(guess)?;
    solve_spectral(guess, ctx, &rhs_spectrum(ctx), cfg)
}

fn solve_spectral(
    guess: &Field,
    ctx: &StepContext,
    f_hat: &[C],
    cfg: &PsdConfig,
) -> Result<(Field, SolveStats)> {
    cfg.validate()?;
    let grid = ctx.grid();
    let dealias = ctx.params.dealias();
    let op = StepOperator::new(ctx);
    let prec = op.preconditioner();
    let len = grid.len();

    let mut phi = spectrum(grid, guess.values());
    let anchor = spectrum(grid, ctx.phi_k.values());
    for (k, &l) in grid.lambda().iter().enumerate().skip(1) {
        if l == 0.0 {
            phi[k] = anchor[k];
        }
    }
    let mut g = quartic_gradient(grid, &phi, dealias);
    let f_norm = residual_norm(grid, f_hat, cfg.residual_norm);
    let target = cfg.tol * (1.0 + f_norm);
    let f_dot = |phi: &[C]| inner_spec(grid, f_hat, phi);

    let mut stats = SolveStats::default();
    stats
        .objective_history
        .push(objective_from_parts(&op, &phi, &g, f_dot(&phi)));
    let mut d = vec![C::new(0.0, 0.0); len];

    loop {
        let plap = p_laplacian_spectrum(grid, &g, dealias);
        let r = residual(&op, &phi, &plap, f_hat);
        let res = residual_norm(grid, &r, cfg.residual_norm);
        if !res.is_finite() {
            return Err(Error::Diverged {
                iteration: stats.iterations,
                residual: res,
            });
        }
        stats.residual_history.push(res);
        let n = stats.residual_history.len();
        if n >= 4 {
            let h = &stats.residual_history;
            stats.contraction_ratios.push(h[n - 1] / h[n - 2]);
        }
        if res <= target {
            stats.converged = true;
            break;
        }
        if n > 5 && res > 10.0 * stats.residual_history[n - 6] {
            return Err(Error::Diverged {
                iteration: stats.iterations,
                residual: res,
            });
        }
        if stats.iterations >= cfg.max_iter {
            break;
        }

        for k in 0..len {
            d[k] = if prec[k] > 0.0 {
                r[k] / prec[k]
            } else {
                C::new(0.0, 0.0)
            };
        }
        let e = quartic_gradient(grid, &d, dealias);
        let alpha = if cfg.unit_step {
            1.0
        } else {
            let c = coefficients(&op, &g, &d, &e, &r);
            solve_cubic_monotone(c[0], c[1], c[2], c[3])?
        };
        for (p, dk) in phi.iter_mut().zip(&d) {
            *p += dk * alpha;
        }
        for (ga, ea) in g.iter_mut().zip(&e) {
            for (x, y) in ga.iter_mut().zip(ea) {
                *x += alpha * y;
            }
        }
        stats.iterations += 1;
        stats.step_sizes.push(alpha);
        stats
            .objective_history
            .push(objective_from_parts(&op, &phi, &g, f_dot(&phi)));
    }

    let mut out = values(grid, phi);
    // The mean is the guess's up to roundoff; pin it exactly.
    let shift = guess.mean() - out.iter().sum::<f64>() / len as f64;
    for v in out.iter_mut() {
        *v += shift;
    }
    Ok((Field::from_raw(grid, out), stats))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cubic_examples() {
        assert_eq!(solve_cubic_monotone(-2.0, 1.0, 0.0, 0.0).unwrap(), 2.0);
        assert_eq!(solve_cubic_monotone(0.0, 1.0, 0.0, 1.0).unwrap(), 0.0);
        assert_eq!(solve_cubic_monotone(0.0, 0.0, 0.0, 0.0).unwrap(), 0.0);
        let a = solve_cubic_monotone(-1.0, 1.0, 0.0, 1.0).unwrap();
        assert!((a - 0.682_327_803_8).abs() < 1e-10);
        assert!(solve_cubic_monotone(1.0, 0.0, 0.0, 1.0).is_err());
        assert!(solve_cubic_monotone(1.0, -1.0, 0.0, 0.0).is_err());
    }

    #[test]
    fn cubic_far_root_and_tiny_coefficients() {
        let a = solve_cubic_monotone(-1e6, 1.0, 0.0, 0.0).unwrap();
        assert!((a - 1e6).abs() < 1e-6);
        let a = solve_cubic_monotone(3e-30, 1e-30, 0.0, 0.0).unwrap();
        assert!((a + 3.0).abs() < 1e-12);
        let c = [-5.0, 0.1, 2.0, 20.0];
        let a = solve_cubic_monotone(c[0], c[1], c[2], c[3]).unwrap();
        assert!(cubic(c, a).abs() <= 1e-13 * 5.0);
    }

    #[test]
    fn config_validation() {
        assert!(PsdConfig::default().validate().is_ok());
        assert!(PsdConfig::default().with_tol(1.0).validate().is_err());
        let cfg = PsdConfig {
            max_iter: 0,
            ..PsdConfig::default()
        };
        assert!(cfg.validate().is_err());
    }
}
