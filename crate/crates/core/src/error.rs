use thiserror::Error;

/// Errors raised by the numerical core.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("grid point count must be a power of two >= 64, got {n}")]
    GridSize { n: usize },
    #[error("box multiple must be >= 1, got {m}")]
    BoxMultiple { m: usize },
    #[error("field is in the {found} representation, expected {expected}")]
    Representation { expected: &'static str, found: &'static str },
    #[error("grids do not match (n = {left_n}/{right_n}, m = {left_m}/{right_m})")]
    GridMismatch {
        left_n: usize,
        right_n: usize,
        left_m: usize,
        right_m: usize,
    },
    #[error("derivative order {k} not supported (max {max})")]
    DerivativeOrder { k: usize, max: usize },
    #[error("mode j = {j} maps to grid index {index}, beyond the Nyquist index {nyquist}")]
    ModeBeyondNyquist { j: i64, index: i64, nyquist: i64 },
    #[error("time must be positive, got {t}")]
    NonPositiveTime { t: f64 },
    #[error(
        "profile support [{lo}, {hi}] must avoid half-integers Z/2 (fracu condition), \
         offending point {point}"
    )]
    SupportTouchesHalfInteger { lo: f64, hi: f64, point: f64 },
    #[error("profile support [{lo}, {hi}] is not inside cell ({cell_lo}, {cell_hi})")]
    SupportOutsideCell {
        lo: f64,
        hi: f64,
        cell_lo: f64,
        cell_hi: f64,
    },
    #[error("quadrature did not converge in {context}: refinement still changes result by {delta:e}")]
    QuadratureNotConverged { context: &'static str, delta: f64 },
    #[error("boundary mass fraction {fraction:e} exceeds limit {limit:e} at t = {t}")]
    BoundaryMass { fraction: f64, limit: f64, t: f64 },
    #[error("non-finite value detected in {context}")]
    NonFinite { context: &'static str },
    #[error("evaluation point {x} outside the reliable range [{lo}, {hi}]")]
    EvaluationOutOfRange { x: f64, lo: f64, hi: f64 },
    #[error("snapshot lattice too coarse in {context}: refinement check fails by {delta:e}")]
    LatticeTooCoarse { context: &'static str, delta: f64 },
    #[error("fixed-point iteration diverged: update norm grew for {growth_streak} consecutive iterations after iteration {iter}")]
    PicardDiverged { iter: usize, growth_streak: usize },
    #[error("decay fit needs at least {required} samples spanning a decade, got {got} over factor {span:.3}")]
    FitWindow { required: usize, got: usize, span: f64 },
    #[error("decay fit requires positive values, got {value} at t = {t}")]
    FitNonPositive { value: f64, t: f64 },
    #[error("supremum attained at the scan window edge x = {x}; widen the window")]
    SupAtWindowEdge { x: f64 },
    #[error("invalid parameter {name}: {message}")]
    InvalidParameter { name: &'static str, message: String },
}

pub type Result<T> = std::result::Result<T, Error>;
