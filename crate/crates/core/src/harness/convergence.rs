use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::grid::Grid;
use crate::manufactured::{ManufacturedSolution, SourceMode, TimeProfile};
use crate::model::ModelParams;
use crate::psd::PsdConfig;
use crate::spectral::{self, spectrum, weighted_energy};
use crate::stepper::{step, SimState};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConvergenceRow {
    /// Grid points per axis (spatial study) or number of steps (temporal study).
    pub resolution: usize,
    pub dt: f64,
    /// `||Phi - phi||_2` at the final time.
    pub error_l2: f64,
    /// `(sum_k dt ||grad lap e^k||^2)^(1/2)`.
    pub error_h3: f64,
}

/// Shared settings of a manufactured-solution study.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StudySpec {
    pub params: ModelParams,
    pub t_final: f64,
    pub length: f64,
    pub profile: TimeProfile,
    pub psd: PsdConfig,
}

impl StudySpec {
    /// `(0,1)^2`, `T = 0.16`, cosine profile.
    pub fn unit_box(params: ModelParams, psd: PsdConfig) -> Self {
        Self {
            params,
            t_final: 0.16,
            length: 1.0,
            profile: TimeProfile::Cosine,
            psd,
        }
    }
}

fn manufactured_run(
    spec: &StudySpec,
    n: usize,
    steps: usize,
    mode: SourceMode,
) -> Result<ConvergenceRow> {
    let grid = Grid::new(2, n, spec.length)?;
    let exact = ManufacturedSolution::new(spec.length, spec.profile);
    let dt = spec.t_final / steps as f64;
    let mut state = SimState::new(exact.sample(&grid, 0.0)?, exact.sample(&grid, -dt)?, 0.0)?;
    let lambda = grid.lambda();
    let mut h3 = 0.0;
    for k in 1..=steps {
        let t = k as f64 * dt;
        let source = exact.source(mode, t, dt, &spec.params, &grid)?;
        let (next, _, _) = step(&state, dt, &spec.params, &spec.psd, Some(&source))?;
        state = next;
        state.time = t;
        let err = state.phi_curr.axpy(-1.0, &exact.sample(&grid, t)?);
        h3 += dt
            * weighted_energy(&grid, &spectrum(&grid, err.values()), |j| {
                lambda[j] * lambda[j] * lambda[j]
            });
    }
    let err = state
        .phi_curr
        .axpy(-1.0, &exact.sample(&grid, spec.t_final)?);
    Ok(ConvergenceRow {
        resolution: if mode == SourceMode::Spatial {
            n
        } else {
            steps
        },
        dt,
        error_l2: spectral::norm_l2(&err),
        error_h3: libm::sqrt(h3),
    })
}

/// Error at `t_final` against the exact solution for each grid size, with the
/// source built so that only the spatial discretization contributes.
pub fn spatial_convergence_study(
    n_list: &[usize],
    dt: f64,
    spec: &StudySpec,
) -> Result<Vec<ConvergenceRow>> {
    let steps = libm::round(spec.t_final / dt);
    if steps < 1.0 || ((spec.t_final / dt) - steps).abs() > 1e-6 * steps {
        return Err(Error::InvalidParameter(
            "final time must be a multiple of the time step",
        ));
    }
    n_list
        .iter()
        .map(|&n| manufactured_run(spec, n, steps as usize, SourceMode::Spatial))
        .collect()
}

/// Errors for `dt = t_final / N_k` at a fixed grid, and the fitted order.
pub fn temporal_convergence_study(
    nk_list: &[usize],
    n: usize,
    spec: &StudySpec,
) -> Result<(Vec<ConvergenceRow>, f64)> {
    let rows: Vec<ConvergenceRow> = nk_list
        .iter()
        .map(|&nk| manufactured_run(spec, n, nk, SourceMode::Temporal))
        .collect::<Result<_>>()?;
    let errors: Vec<f64> = rows.iter().map(|r| r.error_l2).collect();
    let dts: Vec<f64> = rows.iter().map(|r| r.dt).collect();
    let order = order_fit(&errors, &dts)?;
    Ok((rows, order))
}

/// Least-squares slope of `log(error)` against `log(dt)`.
pub fn order_fit(errors: &[f64], dts: &[f64]) -> Result<f64> {
    if errors.len() != dts.len() || errors.len() < 2 {
        return Err(Error::InvalidParameter(
            "order fit needs two or more paired samples",
        ));
    }
    if errors
        .iter()
        .chain(dts)
        .any(|&v| !(v > 0.0 && v.is_finite()))
    {
        return Err(Error::InvalidParameter("order fit needs positive samples"));
    }
    let x: Vec<f64> = dts.iter().map(|&v| libm::log(v)).collect();
    let y: Vec<f64> = errors.iter().map(|&v| libm::log(v)).collect();
    let m = x.len() as f64;
    let mx = x.iter().sum::<f64>() / m;
    let my = y.iter().sum::<f64>() / m;
    let sxy: f64 = x.iter().zip(&y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = x.iter().map(|a| (a - mx) * (a - mx)).sum();
    if sxx == 0.0 {
        return Err(Error::InvalidParameter(
            "order fit needs distinct step sizes",
        ));
    }
    Ok(sxy / sxx)
}
