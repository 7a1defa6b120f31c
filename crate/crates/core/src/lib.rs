//! Numerical laboratory for a critical class of 1-D cubic NLS solutions.
//!
//! The lab studies the renormalized equation
//!
//! ```text
//! i∂ₜv + ∂ₓₓv + (σ/2t)(|v|² - 2M)v = 0        (t ≥ t₀ > 0)
//! ```
//!
//! whose distinguished solutions look, for large time, like an
//! almost-periodic Dirac-train wave `A(t,x)` on the half-integer frequency
//! lattice plus a free-evolving scattering profile `e^{it∂ₓₓ}u₊`. The crate
//! provides:
//!
//! * [`grid`]/[`field`]/[`spectral`] — the periodic spectral substrate
//!   (box length locked to multiples of 4π so the lattice `ℤ/2` is exact);
//! * [`profiles`] — Dirac trains, closed-form single-mode solutions,
//!   band-limited scattering profiles, and mode extraction;
//! * [`transforms`] — the pseudo-conformal transform, the operator
//!   `J = x/2 + it∇`, and their algebraic identities;
//! * [`evolution`] — direct time integration by Strang splitting with an
//!   exact logarithmic nonlinear sub-step;
//! * [`duhamel`] — the scattering fixed point: source terms, the
//!   integral functional, weighted norms, and Picard iteration;
//! * [`analysis`] — power-law decay fits and the dispersion /
//!   Gagliardo–Nirenberg inequality checkers.

pub mod analysis;
pub mod duhamel;
pub mod error;
pub mod evolution;
pub mod field;
pub mod grid;
pub mod jet;
pub mod profiles;
pub mod quad;
pub mod spectral;
pub mod transforms;

pub use error::{Error, Result};
pub use field::{ComplexField, Representation};
pub use grid::SpectralGrid;
