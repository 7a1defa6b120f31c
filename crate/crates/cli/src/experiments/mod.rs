//! Experiment implementations behind the CLI subcommands.

pub mod evolve;
pub mod inequalities;
pub mod picard;
pub mod report;
pub mod selftest;
pub mod sources;
pub mod transforms_cmd;

use nlslab_core::field::ComplexField;
use nlslab_core::spectral::band_limit;
use nlslab_core::SpectralGrid;
use num_complex::Complex64;
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Failure classes mapped to process exit codes.
#[derive(Debug)]
pub enum RunError {
    /// Exit 1: configuration or schema problem.
    Config(String),
    /// Exit 2: numerical failure (NaN, non-convergent quadrature,
    /// boundary-mass violation, divergence).
    Numerical(String),
    /// Exit 3: an invariant suite failed in selftest.
    Acceptance(String),
}

impl std::fmt::Display for RunError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            RunError::Config(m) => write!(f, "config error: {m}"),
            RunError::Numerical(m) => write!(f, "numerical failure: {m}"),
            RunError::Acceptance(m) => write!(f, "selftest violation: {m}"),
        }
    }
}

impl std::error::Error for RunError {}

impl From<nlslab_core::Error> for RunError {
    fn from(e: nlslab_core::Error) -> Self {
        use nlslab_core::Error as E;
        match e {
            E::GridSize { .. }
            | E::BoxMultiple { .. }
            | E::InvalidParameter { .. }
            | E::SupportTouchesHalfInteger { .. }
            | E::SupportOutsideCell { .. }
            | E::DerivativeOrder { .. } => RunError::Config(e.to_string()),
            _ => RunError::Numerical(e.to_string()),
        }
    }
}

impl From<anyhow::Error> for RunError {
    fn from(e: anyhow::Error) -> Self {
        RunError::Numerical(e.to_string())
    }
}

pub type RunResult<T> = std::result::Result<T, RunError>;

/// Deterministic concentrated band-limited field: Gaussian envelope times
/// random plane waves, re-band-limited in the far spectral tail so the
/// field carries no mass at the box seam even after x-weighting.
pub fn random_concentrated_field(grid: &SpectralGrid, rng: &mut ChaCha8Rng) -> ComplexField {
    let l = grid.box_len();
    let env_width = l / 20.0;
    let carriers: Vec<(f64, f64, f64)> = (0..3)
        .map(|_| {
            (
                rng.gen_range(-2.0..2.0),
                rng.gen_range(0.2..1.0),
                rng.gen_range(0.0..std::f64::consts::TAU),
            )
        })
        .collect();
    let f = ComplexField::from_fn(grid, |x| {
        let env = (-(x / env_width).powi(2)).exp();
        carriers
            .iter()
            .map(|&(nu, amp, phase)| Complex64::from_polar(amp * env, nu * x + phase))
            .sum()
    });
    band_limit(&f, 8.0).expect("band limit")
}

/// Seeded generator for the invariant suites.
pub fn seeded_rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Geometric sample times for fits: `count` points from `t_lo` to `t_hi`.
pub fn geometric_samples(t_lo: f64, t_hi: f64, count: usize) -> Vec<f64> {
    (0..count)
        .map(|i| t_lo * (t_hi / t_lo).powf(i as f64 / (count - 1) as f64))
        .collect()
}
