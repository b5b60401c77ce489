//! Shared pieces of the acceptance runs: seeded random data and the
//! one-line-per-criterion outcome format.

use std::fmt;
use std::time::{Duration, Instant};

use rand_core::{Rng, SeedableRng};
use rand_pcg::Pcg64;
use spfc_core::{Field, Grid};

pub fn rng(seed: u64) -> Pcg64 {
    Pcg64::seed_from_u64(seed)
}

pub fn uniform(rng: &mut Pcg64) -> f64 {
    (rng.next_u64() >> 11) as f64 / (1u64 << 53) as f64
}

/// Node values uniform in `[-amp, amp]`.
pub fn random_field(grid: &Grid, rng: &mut Pcg64, amp: f64) -> Field {
    let v = (0..grid.len())
        .map(|_| amp * (2.0 * uniform(rng) - 1.0))
        .collect();
    Field::new(grid, v).expect("finite samples")
}

#[derive(Debug, Clone)]
pub struct Outcome {
    pub id: u32,
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
    pub elapsed: Duration,
}

impl fmt::Display for Outcome {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "criterion {:>2} {:<28} {}  {} [{:.1} s]",
            self.id,
            self.name,
            if self.passed { "PASS" } else { "FAIL" },
            self.detail,
            self.elapsed.as_secs_f64()
        )
    }
}

/// Times `body`, which returns `(passed, detail)`.
pub fn criterion(id: u32, name: &'static str, body: impl FnOnce() -> (bool, String)) -> Outcome {
    let start = Instant::now();
    let (passed, detail) = body();
    let out = Outcome {
        id,
        name,
        passed,
        detail,
        elapsed: start.elapsed(),
    };
    println!("{out}");
    out
}
