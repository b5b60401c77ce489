//! Property battery over the operators, the step objective, the solver and
//! short runs. Each check reports its measured value next to its threshold.

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use rand_core::{Rng, SeedableRng};
use rand_pcg::Pcg64;

use crate::error::Result;
use crate::grid::{Field, Grid};
use crate::model::{nonlinear_operator, objective, rhs, ModelParams, Scheme, StepContext};
use crate::psd::{psd_solve, PsdConfig};
use crate::spectral::{apply_symbol, grad, inner, laplacian, norm_l2};
use crate::stepper::{run, Recorder, RunOptions, Segment, SimState};

use super::pattern::{random_init, PatternConfig};

/// Deliberate defects for negative controls.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Mutation {
    #[default]
    None,
    /// Laplacian symbol scaled by `1 + 1e-3` in the integration-by-parts checks.
    LaplacianSymbol,
}

#[derive(Debug, Clone, PartialEq)]
pub struct VerifyOptions {
    /// Random instances per property.
    pub samples: usize,
    pub seed: u64,
    pub mutation: Mutation,
}

impl Default for VerifyOptions {
    fn default() -> Self {
        Self {
            samples: 20,
            seed: 7,
            mutation: Mutation::None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CheckResult {
    pub name: String,
    pub passed: bool,
    pub measured: f64,
    pub threshold: f64,
    /// Exploratory checks are reported but do not fail the suite.
    pub advisory: bool,
}

impl CheckResult {
    fn at_most(name: String, measured: f64, threshold: f64) -> Self {
        Self {
            name,
            passed: measured <= threshold,
            measured,
            threshold,
            advisory: false,
        }
    }

    /// `threshold / measured`; infinite when the measurement is exactly zero.
    pub fn margin(&self) -> f64 {
        if self.measured == 0.0 {
            f64::INFINITY
        } else {
            self.threshold / self.measured
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct VerifyReport {
    pub checks: Vec<CheckResult>,
}

impl VerifyReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed || c.advisory)
    }

    pub fn failures(&self) -> impl Iterator<Item = &CheckResult> {
        self.checks.iter().filter(|c| !c.passed && !c.advisory)
    }
}

fn uniform(rng: &mut Pcg64) -> f64 {
    (rng.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
}

/// Node values uniform in `[-amp, amp]`.
fn random_field(grid: &Grid, rng: &mut Pcg64, amp: f64) -> Field {
    let v = (0..grid.len())
        .map(|_| amp * (2.0 * uniform(rng) - 1.0))
        .collect();
    Field::new(grid, v).expect("finite samples")
}

fn lap_of(f: &Field, mutation: Mutation) -> Field {
    match mutation {
        Mutation::None => laplacian(f),
        Mutation::LaplacianSymbol => apply_symbol(f, |w| -w.lambda * (1.0 + 1e-3)),
    }
}

fn grad_inner(f: &Field, g: &Field) -> f64 {
    grad(f)
        .components()
        .iter()
        .zip(grad(g).components())
        .map(|(a, b)| inner(a, b))
        .sum()
}

/// Worst relative defect of the three integration-by-parts identities.
fn sbp_defect(grid: &Grid, rng: &mut Pcg64, samples: usize, mutation: Mutation) -> f64 {
    let mut worst: f64 = 0.0;
    for _ in 0..samples {
        let f = random_field(grid, rng, 1.0);
        let g = random_field(grid, rng, 1.0);
        let lg = lap_of(&g, mutation);
        let llg = lap_of(&lg, mutation);
        let lllg = lap_of(&llg, mutation);
        let lf = lap_of(&f, mutation);
        let nf = norm_l2(&f);
        // <f, lap g> = -<grad f, grad g>
        let d1 = (inner(&f, &lg) + grad_inner(&f, &g)).abs() / (nf * norm_l2(&lg));
        // <f, lap^2 g> = <lap f, lap g>
        let d2 = (inner(&f, &llg) - inner(&lf, &lg)).abs() / (nf * norm_l2(&llg));
        // <f, lap^3 g> = -<grad lap f, grad lap g>
        let d3 = (inner(&f, &lllg) + grad_inner(&lf, &lg)).abs() / (nf * norm_l2(&lllg));
        worst = worst.max(d1).max(d2).max(d3);
    }
    worst
}

/// Largest relative excess of the two interpolation inequalities
/// `||grad f|| <= ||f||^(2/3) ||grad lap f||^(1/3)` and
/// `||lap f|| <= ||f||^(1/3) ||grad lap f||^(2/3)`; nonpositive when both hold.
pub fn interpolation_excess(f: &Field) -> f64 {
    let l2 = norm_l2(f);
    let g = libm::sqrt(grad_inner(f, f));
    let lf = laplacian(f);
    let l = norm_l2(&lf);
    let h3 = libm::sqrt(grad_inner(&lf, &lf));
    let b1 = libm::cbrt(l2 * l2 * h3);
    let b2 = libm::cbrt(l2 * h3 * h3);
    (g / b1 - 1.0).max(l / b2 - 1.0)
}

/// Relative gap between `<N[phi] - f, d>` and the centred difference of the
/// objective with step `h`.
pub fn gradient_gap(ctx: &StepContext, phi: &Field, d: &Field, h: f64) -> Result<f64> {
    let f = rhs(ctx);
    let n = nonlinear_operator(phi, ctx)?;
    let exact = inner(&n.axpy(-1.0, &f), d);
    let plus = objective(&phi.axpy(h, d), ctx, &f)?;
    let minus = objective(&phi.axpy(-h, d), ctx, &f)?;
    let fd = (plus - minus) / (2.0 * h);
    Ok((fd - exact).abs() / exact.abs())
}

fn random_context(grid: &Grid, rng: &mut Pcg64, params: ModelParams, dt: f64) -> StepContext {
    let mean = 0.2 * (2.0 * uniform(rng) - 1.0);
    let phi_k = random_field(grid, rng, 0.5)
        .mean_free()
        .axpy(mean, &Field::constant(grid, 1.0));
    let phi_km1 = phi_k.axpy(0.1, &random_field(grid, rng, 0.5).mean_free());
    StepContext::new(phi_k, phi_km1, dt, params).expect("consistent levels")
}

fn params_for(scheme: Scheme) -> ModelParams {
    ModelParams::at_threshold(0.5, scheme).expect("valid parameters")
}

/// Runs every property check. Failures are entries in the report, not errors.
pub fn verify_suite(opts: &VerifyOptions) -> VerifyReport {
    let mut rng = Pcg64::seed_from_u64(opts.seed);
    let mut report = VerifyReport::default();
    let samples = opts.samples.max(1);

    for (dim, n) in [(2, 16), (2, 32), (3, 16)] {
        let grid = Grid::new(dim, n, 1.0).expect("valid grid");
        let worst = sbp_defect(&grid, &mut rng, samples, opts.mutation);
        report.checks.push(CheckResult::at_most(
            format!("summation by parts, {dim}D N={n}"),
            worst,
            1e-10,
        ));
    }

    let grid = Grid::new(2, 16, 1.0).expect("valid grid");
    let mut worst = f64::NEG_INFINITY;
    for _ in 0..samples * 10 {
        let f = random_field(&grid, &mut rng, 1.0).mean_free();
        worst = worst.max(interpolation_excess(&f));
    }
    report.checks.push(CheckResult::at_most(
        "interpolation inequalities".into(),
        worst.max(0.0),
        1e-12,
    ));

    let grid = Grid::new(2, 8, 10.0).expect("valid grid");
    for scheme in Scheme::ALL {
        let mut worst: f64 = 0.0;
        for _ in 0..samples {
            let ctx = random_context(&grid, &mut rng, params_for(scheme), 0.01);
            let phi = ctx
                .phi_k
                .axpy(1.0, &random_field(&grid, &mut rng, 0.5).mean_free());
            let d = random_field(&grid, &mut rng, 1.0).mean_free();
            worst = worst.max(gradient_gap(&ctx, &phi, &d, 1e-5).unwrap_or(f64::INFINITY));
        }
        report.checks.push(CheckResult::at_most(
            format!("objective gradient, {scheme}"),
            worst,
            1e-5,
        ));
    }

    let grid = Grid::new(2, 16, 10.0).expect("valid grid");
    for scheme in Scheme::ALL {
        let ctx = random_context(&grid, &mut rng, params_for(scheme), 0.05);
        let f = rhs(&ctx);
        let cfg = PsdConfig::default().with_tol(1e-12);
        let other = ctx
            .phi_k
            .axpy(1.0, &random_field(&grid, &mut rng, 1.0).mean_free());
        let diff = psd_solve(&ctx.phi_k, &ctx, &f, &cfg)
            .and_then(|(a, _)| psd_solve(&other, &ctx, &f, &cfg).map(|(b, _)| a.max_abs_diff(&b)))
            .unwrap_or(f64::INFINITY);
        report.checks.push(CheckResult::at_most(
            format!("PSD multi-start uniqueness, {scheme}"),
            diff,
            1e-8,
        ));
    }

    for scheme in Scheme::ALL {
        let (drift, rise) =
            smoke_run(params_for(scheme), 20).unwrap_or((f64::INFINITY, f64::INFINITY));
        report.checks.push(CheckResult::at_most(
            format!("mass drift, {scheme}"),
            drift,
            1e-11,
        ));
        report.checks.push(CheckResult::at_most(
            format!("modified energy increase, {scheme}"),
            rise,
            1e-9,
        ));
    }

    // Below the stability threshold nothing is guaranteed.
    let weak = ModelParams::new(0.9, 0.0, Scheme::Bdf2Es1).expect("valid parameters");
    let rise = smoke_run(weak, 20).map(|(_, r)| r).unwrap_or(f64::INFINITY);
    let mut c = CheckResult::at_most(
        "modified energy increase, eps=0.9 A=0 (exploratory)".into(),
        rise,
        1e-9,
    );
    c.advisory = true;
    report.checks.push(c);

    report
}

/// Short noisy run with a nucleation site; returns the relative mass drift and
/// the largest relative step increase of the modified energy.
fn smoke_run(params: ModelParams, steps: usize) -> Result<(f64, f64)> {
    let cfg = PatternConfig {
        n: 32,
        length: 12.5,
        params,
        sites: alloc::vec![super::pattern::Site {
            x: 6.25,
            y: 6.25,
            magnitude: 10.0,
        }],
        ..PatternConfig::one_site()
    };
    let grid = cfg.grid()?;
    let phi0 = random_init(&cfg, &grid)?;
    let mass0 = phi0.mean();
    let dt = 0.05;
    let schedule = [Segment {
        dt,
        t_end: dt * steps as f64,
    }];
    let mut rec = Recorder::default();
    let end = run(
        &schedule,
        SimState::at_rest(phi0, 0.0),
        &params,
        &PsdConfig::default(),
        &RunOptions::default(),
        &mut rec,
    )?;
    let drift = (end.phi_curr.mean() - mass0).abs() / (1.0 + mass0.abs());
    let rise = rec
        .records
        .windows(2)
        .map(|w| (w[1].modified_energy - w[0].modified_energy) / w[0].modified_energy.abs())
        .fold(f64::NEG_INFINITY, f64::max);
    Ok((drift, rise.max(0.0)))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sbp_mutation_is_caught() {
        let grid = Grid::new(2, 8, 1.0).unwrap();
        let mut rng = Pcg64::seed_from_u64(3);
        assert!(sbp_defect(&grid, &mut rng, 3, Mutation::None) < 1e-12);
        assert!(sbp_defect(&grid, &mut rng, 3, Mutation::LaplacianSymbol) > 1e-5);
    }
}
