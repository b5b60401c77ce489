//! Time integration: ghost initialization, BDF2 steps through PSD,
//! modified-energy bookkeeping and time-step schedules with restarts.

use alloc::boxed::Box;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::grid::Field;
use crate::model::{check_mass, energy, mu_zero, ModelParams, Scheme, StepContext};
use crate::psd::{psd_solve_ctx, PsdConfig, SolveStats};
use crate::spectral::{self, spectrum, values, weighted_energy};

/// Relative mass-drift tolerance checked after every step.
pub const MASS_DRIFT_TOL: f64 = 1e-11;

#[derive(Debug, Clone)]
pub struct SimState {
    pub phi_curr: Field,
    pub phi_prev: Field,
    pub time: f64,
    pub step_index: usize,
    /// Mean of the initial field.
    pub mass0: f64,
}

impl SimState {
    pub fn new(phi0: Field, phi_prev: Field, time: f64) -> Result<Self> {
        if !phi0.grid().same_as(phi_prev.grid()) {
            return Err(Error::GridMismatch);
        }
        check_mass(phi0.mean(), phi_prev.mean())?;
        let mass0 = phi0.mean();
        Ok(Self {
            phi_curr: phi0,
            phi_prev,
            time,
            step_index: 0,
            mass0,
        })
    }

    /// Two-level history started with `phi_prev = phi0`.
    pub fn at_rest(phi0: Field, time: f64) -> Self {
        let mass0 = phi0.mean();
        Self {
            phi_prev: phi0.clone(),
            phi_curr: phi0,
            time,
            step_index: 0,
            mass0,
        }
    }

    /// Restart rule on a time-step change: forget the older level.
    pub fn restart(&mut self) {
        self.phi_prev = self.phi_curr.clone();
    }

    pub fn check_mass(&self) -> Result<()> {
        let mass = self.phi_curr.mean();
        if (mass - self.mass0).abs() > MASS_DRIFT_TOL * (1.0 + self.mass0.abs()) {
            return Err(Error::MassDrift {
                mass,
                mass0: self.mass0,
            });
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EnergyRecord {
    pub step: usize,
    pub time: f64,
    pub energy: f64,
    pub modified_energy: f64,
    pub mass: f64,
    pub h2_norm: f64,
    pub psd_iters: usize,
    pub residual: f64,
}

/// `phi^-1 = phi^0 - dt lap mu^0`.
pub fn ghost_init(phi0: &Field, dt: f64, params: &ModelParams) -> Field {
    ghost_init_forced(phi0, dt, params, None)
}

/// [`ghost_init`] for a forced equation `d/dt phi = lap mu + S`:
/// `phi^-1 = phi^0 - dt (lap mu^0 + S)`.
pub fn ghost_init_forced(
    phi0: &Field,
    dt: f64,
    params: &ModelParams,
    source: Option<&Field>,
) -> Field {
    let grid = phi0.grid();
    let lambda = grid.lambda();
    let mut spec = spectrum(grid, phi0.values());
    let mu = spectrum(grid, mu_zero(phi0, params).values());
    let src = source.map(|s| spectrum(grid, s.values()));
    for k in 0..spec.len() {
        spec[k] += mu[k] * (dt * lambda[k]);
        if let (Some(s), true) = (&src, lambda[k] > 0.0) {
            spec[k] -= s[k] * dt;
        }
    }
    let mut out = values(grid, spec);
    let shift = phi0.mean() - out.iter().sum::<f64>() / out.len() as f64;
    for v in out.iter_mut() {
        *v += shift;
    }
    Field::from_raw(grid, out)
}

/// Energy plus the step-difference terms the scheme dissipates.
///
/// Scheme 1 adds `1/(4 dt) ||s||_{-1}^2 + ||grad s||^2`, scheme 2 adds
/// `1/(4 dt) ||s||_{-1}^2 + eps/2 ||s||^2`, with `s = phi_new - phi_old`.
pub fn modified_energy(
    phi_new: &Field,
    phi_old: &Field,
    dt: f64,
    params: &ModelParams,
) -> Result<f64> {
    if !phi_new.grid().same_as(phi_old.grid()) {
        return Err(Error::GridMismatch);
    }
    check_mass(phi_new.mean(), phi_old.mean())?;
    let grid = phi_new.grid();
    let lambda = grid.lambda();
    let diff = phi_new.axpy(-1.0, phi_old);
    let s = spectrum(grid, diff.values());
    let eps = params.epsilon();
    let extra = weighted_energy(grid, &s, |k| {
        let l = lambda[k];
        let hm1 = if l > 0.0 { 0.25 / (dt * l) } else { 0.0 };
        hm1 + match params.scheme() {
            Scheme::Bdf2Es1 => l,
            Scheme::Bdf2Es2 => 0.5 * eps,
        }
    });
    Ok(energy(phi_new, params) + extra)
}

/// Advances one step. The returned record describes the new level.
///
/// A PSD solve that fails to converge is an error carrying the new step index.
pub fn step(
    state: &SimState,
    dt: f64,
    params: &ModelParams,
    cfg: &PsdConfig,
    source: Option<&Field>,
) -> Result<(SimState, EnergyRecord, SolveStats)> {
    let index = state.step_index + 1;
    let wrap = |e: Error| Error::Step {
        step: index,
        source: Box::new(e),
    };
    let mut ctx = StepContext::new(state.phi_curr.clone(), state.phi_prev.clone(), dt, *params)
        .map_err(wrap)?;
    if let Some(s) = source {
        ctx = ctx.with_source(s.clone()).map_err(wrap)?;
    }
    let (phi_new, stats) = psd_solve_ctx(&state.phi_curr, &ctx, cfg).map_err(wrap)?;
    if !stats.converged {
        return Err(wrap(Error::NotConverged {
            iterations: stats.iterations,
            residual: stats.final_residual(),
        }));
    }
    if !phi_new.is_finite() {
        return Err(wrap(Error::NonFinite { index: 0 }));
    }
    let e_mod = modified_energy(&phi_new, &state.phi_curr, dt, params).map_err(wrap)?;
    let next = SimState {
        phi_prev: state.phi_curr.clone(),
        phi_curr: phi_new,
        time: state.time + dt,
        step_index: index,
        mass0: state.mass0,
    };
    next.check_mass().map_err(wrap)?;
    let record = EnergyRecord {
        step: index,
        time: next.time,
        energy: energy(&next.phi_curr, params),
        modified_energy: e_mod,
        mass: next.phi_curr.mean(),
        h2_norm: spectral::norm_h2(&next.phi_curr),
        psd_iters: stats.iterations,
        residual: stats.final_residual(),
    };
    Ok((next, record, stats))
}

/// Record for the current level without taking a step.
pub fn record_state(state: &SimState, dt: f64, params: &ModelParams) -> Result<EnergyRecord> {
    Ok(EnergyRecord {
        step: state.step_index,
        time: state.time,
        energy: energy(&state.phi_curr, params),
        modified_energy: modified_energy(&state.phi_curr, &state.phi_prev, dt, params)?,
        mass: state.phi_curr.mean(),
        h2_norm: spectral::norm_h2(&state.phi_curr),
        psd_iters: 0,
        residual: 0.0,
    })
}

/// Constant time step up to `t_end`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Segment {
    pub dt: f64,
    pub t_end: f64,
}

/// Receives run output. Both methods default to doing nothing.
pub trait Sink {
    fn record(&mut self, _record: &EnergyRecord, _stats: Option<&SolveStats>) -> Result<()> {
        Ok(())
    }

    fn snapshot(&mut self, _state: &SimState, _params: &ModelParams) -> Result<()> {
        Ok(())
    }
}

/// Discards everything.
pub struct NullSink;

impl Sink for NullSink {}

/// Keeps energy records and per-step solver statistics in memory.
#[derive(Debug, Default, Clone)]
pub struct Recorder {
    pub records: Vec<EnergyRecord>,
    pub stats: Vec<SolveStats>,
    pub snapshots: Vec<(f64, Field)>,
    /// Drop histories from stored stats to bound memory on long runs.
    pub keep_histories: bool,
}

impl Sink for Recorder {
    fn record(&mut self, record: &EnergyRecord, stats: Option<&SolveStats>) -> Result<()> {
        self.records.push(*record);
        if let Some(s) = stats {
            if self.keep_histories {
                self.stats.push(s.clone());
            } else {
                self.stats.push(SolveStats {
                    iterations: s.iterations,
                    converged: s.converged,
                    ..SolveStats::default()
                });
            }
        }
        Ok(())
    }

    fn snapshot(&mut self, state: &SimState, _params: &ModelParams) -> Result<()> {
        self.snapshots.push((state.time, state.phi_curr.clone()));
        Ok(())
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct RunOptions {
    /// Times at which the field is handed to [`Sink::snapshot`].
    pub snapshot_times: Vec<f64>,
    /// Emit one record every this many steps (0 or 1: every step).
    pub record_every: usize,
}

fn segment_steps(t0: f64, seg: &Segment) -> Result<usize> {
    if !(seg.dt > 0.0 && seg.dt.is_finite()) {
        return Err(Error::InvalidParameter(
            "segment time step must be positive",
        ));
    }
    if !(seg.t_end > t0) {
        return Err(Error::InvalidParameter("segment end times must increase"));
    }
    let ratio = (seg.t_end - t0) / seg.dt;
    let n = libm::round(ratio);
    if (ratio - n).abs() > 1e-6 * ratio.max(1.0) {
        return Err(Error::InvalidParameter(
            "segment length is not a multiple of its time step",
        ));
    }
    Ok(n as usize)
}

/// Integrates through `schedule`. On every change of time step the history is
/// restarted with `phi_prev = phi_curr`.
pub fn run(
    schedule: &[Segment],
    state0: SimState,
    params: &ModelParams,
    cfg: &PsdConfig,
    opts: &RunOptions,
    sink: &mut dyn Sink,
) -> Result<SimState> {
    if schedule.is_empty() {
        return Err(Error::InvalidParameter("empty time-step schedule"));
    }
    let mut snaps: Vec<f64> = opts.snapshot_times.clone();
    snaps.sort_by(f64::total_cmp);
    let mut next_snap = 0;

    let mut state = state0;
    let every = opts.record_every.max(1);
    sink.record(&record_state(&state, schedule[0].dt, params)?, None)?;
    while next_snap < snaps.len() && snaps[next_snap] <= state.time + 0.5 * schedule[0].dt {
        sink.snapshot(&state, params)?;
        next_snap += 1;
    }

    let mut prev_dt: Option<f64> = None;
    for (segment, seg) in schedule.iter().enumerate() {
        let t0 = state.time;
        let steps = segment_steps(t0, seg)?;
        if prev_dt.is_some_and(|d| d != seg.dt) {
            state.restart();
        }
        prev_dt = Some(seg.dt);
        for j in 1..=steps {
            let (mut next, mut rec, stats) =
                step(&state, seg.dt, params, cfg, None).map_err(|e| Error::Run {
                    segment,
                    step: state.step_index + 1,
                    source: Box::new(e),
                })?;
            // Avoid accumulating roundoff in the clock.
            next.time = t0 + j as f64 * seg.dt;
            rec.time = next.time;
            state = next;
            if state.step_index.is_multiple_of(every) || j == steps {
                sink.record(&rec, Some(&stats))?;
            }
            while next_snap < snaps.len() && snaps[next_snap] <= state.time + 0.5 * seg.dt {
                sink.snapshot(&state, params)?;
                next_snap += 1;
            }
        }
    }
    Ok(state)
}
