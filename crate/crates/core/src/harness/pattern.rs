use alloc::vec;
use alloc::vec::Vec;

use rand_core::{Rng, SeedableRng};
use rand_pcg::Pcg64;

use crate::error::{Error, Result};
use crate::grid::{Field, Grid};
use crate::model::{energy, ModelParams, Scheme};
use crate::psd::{PsdConfig, SolveStats};
use crate::stepper::{run, EnergyRecord, RunOptions, Segment, SimState, Sink};

/// Union of the snapshot times shown for the one- and four-site runs.
pub const SNAPSHOT_TIMES: [f64; 9] = [1.0, 10.0, 20.0, 40.0, 100.0, 200.0, 500.0, 3000.0, 9000.0];

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SiteShape {
    /// Whole magnitude added at the nearest node.
    Impulse,
    /// Periodic Gaussian of width `2h` with peak equal to the magnitude.
    Gaussian,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Site {
    pub x: f64,
    pub y: f64,
    pub magnitude: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PatternConfig {
    pub length: f64,
    pub n: usize,
    pub params: ModelParams,
    pub seed: u64,
    pub amplitude: f64,
    pub sites: Vec<Site>,
    pub site_shape: SiteShape,
    pub schedule: Vec<Segment>,
    pub snapshot_times: Vec<f64>,
}

impl PatternConfig {
    /// `L = 100`, `N = 256`, `eps = 0.5`, `A = eps^2/16`, noise amplitude 0.05,
    /// one site of magnitude 10 at the centre, `dt = 0.05` up to `t = 100`.
    pub fn one_site() -> Self {
        Self {
            length: 100.0,
            n: 256,
            params: ModelParams::at_threshold(0.5, Scheme::Bdf2Es1).expect("valid defaults"),
            seed: 1,
            amplitude: 0.05,
            sites: vec![Site {
                x: 50.0,
                y: 50.0,
                magnitude: 10.0,
            }],
            site_shape: SiteShape::Impulse,
            schedule: vec![Segment {
                dt: 0.05,
                t_end: 100.0,
            }],
            snapshot_times: SNAPSHOT_TIMES.to_vec(),
        }
    }

    pub fn four_sites() -> Self {
        let sites = [(25.0, 25.0), (25.0, 75.0), (75.0, 25.0), (75.0, 75.0)]
            .iter()
            .map(|&(x, y)| Site {
                x,
                y,
                magnitude: 10.0,
            })
            .collect();
        Self {
            sites,
            ..Self::one_site()
        }
    }

    /// `dt = 0.05` on `[0, 1000]`, then `dt = 0.1` on `[1000, 9000]`.
    pub fn long_schedule() -> Vec<Segment> {
        vec![
            Segment {
                dt: 0.05,
                t_end: 1000.0,
            },
            Segment {
                dt: 0.1,
                t_end: 9000.0,
            },
        ]
    }

    pub fn grid(&self) -> Result<Grid> {
        Grid::new(2, self.n, self.length)
    }

    pub fn validate(&self) -> Result<()> {
        for s in &self.sites {
            if !(s.x > 0.0 && s.x < self.length && s.y > 0.0 && s.y < self.length) {
                return Err(Error::InvalidParameter(
                    "nucleation site outside the domain",
                ));
            }
        }
        if !(self.amplitude >= 0.0 && self.amplitude.is_finite()) {
            return Err(Error::InvalidParameter("noise amplitude must be >= 0"));
        }
        Ok(())
    }
}

/// Uniform noise `amplitude (2 r - 1)` drawn row-major from PCG64 seeded with
/// `seed`, `r = (next_u64 >> 11) 2^-53`, plus the nucleation sites.
pub fn random_init(cfg: &PatternConfig, grid: &Grid) -> Result<Field> {
    cfg.validate()?;
    let mut rng = Pcg64::seed_from_u64(cfg.seed);
    let scale = 1.0 / (1u64 << 53) as f64;
    let mut values: Vec<f64> = (0..grid.len())
        .map(|_| {
            let r = (rng.next_u64() >> 11) as f64 * scale;
            cfg.amplitude * (2.0 * r - 1.0)
        })
        .collect();
    let l = grid.length();
    for s in &cfg.sites {
        match cfg.site_shape {
            SiteShape::Impulse => values[grid.nearest_node(&[s.x, s.y])] += s.magnitude,
            SiteShape::Gaussian => {
                let w = 2.0 * grid.spacing();
                for (j, v) in values.iter_mut().enumerate() {
                    let x = grid.node(j);
                    let wrap = |d: f64| d - l * libm::round(d / l);
                    let (dx, dy) = (wrap(x[0] - s.x), wrap(x[1] - s.y));
                    *v += s.magnitude * libm::exp(-(dx * dx + dy * dy) / (2.0 * w * w));
                }
            }
        }
    }
    Field::new(grid, values)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PatternSummary {
    pub steps: usize,
    pub initial_energy: f64,
    pub final_energy: f64,
    pub min: f64,
    pub max: f64,
    /// `|mean(phi_final) - mean(phi_0)|`.
    pub mass_drift: f64,
    pub max_h2: f64,
    pub total_psd_iters: usize,
}

struct Tracker<'a> {
    inner: &'a mut dyn Sink,
    max_h2: f64,
    iters: usize,
}

impl Sink for Tracker<'_> {
    fn record(&mut self, record: &EnergyRecord, stats: Option<&SolveStats>) -> Result<()> {
        self.max_h2 = self.max_h2.max(record.h2_norm);
        self.iters += record.psd_iters;
        self.inner.record(record, stats)
    }

    fn snapshot(&mut self, state: &SimState, params: &ModelParams) -> Result<()> {
        self.inner.snapshot(state, params)
    }
}

/// Seeded noise plus nucleation sites, integrated through the schedule with
/// `phi^-1 = phi^0` at the start and at every change of time step.
pub fn pattern_experiment(
    cfg: &PatternConfig,
    psd: &PsdConfig,
    sink: &mut dyn Sink,
) -> Result<PatternSummary> {
    let grid = cfg.grid()?;
    let phi0 = random_init(cfg, &grid)?;
    let initial_energy = energy(&phi0, &cfg.params);
    let mass0 = phi0.mean();
    let mut tracker = Tracker {
        inner: sink,
        max_h2: 0.0,
        iters: 0,
    };
    let opts = RunOptions {
        snapshot_times: cfg.snapshot_times.clone(),
        record_every: 1,
    };
    let end = run(
        &cfg.schedule,
        SimState::at_rest(phi0, 0.0),
        &cfg.params,
        psd,
        &opts,
        &mut tracker,
    )?;
    Ok(PatternSummary {
        steps: end.step_index,
        initial_energy,
        final_energy: energy(&end.phi_curr, &cfg.params),
        min: end.phi_curr.min(),
        max: end.phi_curr.max(),
        mass_drift: (end.phi_curr.mean() - mass0).abs(),
        max_h2: tracker.max_h2,
        total_psd_iters: tracker.iters,
    })
}
