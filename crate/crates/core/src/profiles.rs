//! Dirac-train data, the closed-form almost-periodic wave `A(t,x)`, the
//! band-limited scattering profile `u₊`, and mode extraction.
//!
//! All evaluators here are meshless: they are closed forms or compactly
//! supported frequency integrals, evaluable at any `(t, x)` without a grid,
//! plus samplers onto a [`SpectralGrid`].
//!
//! The train wave is
//!
//! ```text
//! A(t,x) = Σ_j e^{iθ_j(t)} (ᾱ_j + R̄_j(1/t)) e^{-itj²/4 + ixj/2},
//! θ_j(t) = σ·κ·(|α_j|² - 2M + c)·ln t,        M = Σ_j |α_j|².
//! ```
//!
//! With the default `κ = 1/2`, `c = 0` a single-mode train solves
//! `i∂ₜv + ∂ₓₓv + (σ/2t)(|v|²-2M)v = 0` exactly: substituting one mode
//! forces `θ' = σ(|α|²-2M)/(2t)`. The log-phase coefficients are exposed
//! because other conventions for the same family differ by factors of two;
//! the residual oracle in the tests arbitrates.

use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::field::{ComplexField, Representation};
use crate::grid::SpectralGrid;
use crate::jet::Jet;
use crate::quad::{gauss_legendre, rule_on};

const TWO_PI: f64 = 2.0 * std::f64::consts::PI;

/// Finite Dirac-train coefficients `{α_j}` with weight exponent `q`,
/// total mass `M = Σ|α_j|²`, log-phase convention `(κ, c)` and focusing
/// sign `σ = ±1`.
#[derive(Debug, Clone, PartialEq)]
pub struct DiracTrain {
    modes: Vec<(i64, Complex64)>,
    q: f64,
    mass: f64,
    kappa: f64,
    kappa_offset: f64,
    sign: f64,
}

impl DiracTrain {
    pub fn new(
        alphas: &[(i64, Complex64)],
        q: f64,
        kappa: f64,
        kappa_offset: f64,
        sign: f64,
    ) -> Result<Self> {
        if sign != 1.0 && sign != -1.0 {
            return Err(Error::InvalidParameter {
                name: "sign",
                message: format!("must be +1 or -1, got {sign}"),
            });
        }
        let mut modes: Vec<(i64, Complex64)> = alphas
            .iter()
            .copied()
            .filter(|(_, a)| a.norm() > 0.0)
            .collect();
        modes.sort_by_key(|(j, _)| *j);
        for w in modes.windows(2) {
            if w[0].0 == w[1].0 {
                return Err(Error::InvalidParameter {
                    name: "alphas",
                    message: format!("duplicate mode index {}", w[0].0),
                });
            }
        }
        let mass = modes.iter().map(|(_, a)| a.norm_sqr()).sum();
        Ok(Self {
            modes,
            q,
            mass,
            kappa,
            kappa_offset,
            sign,
        })
    }

    /// Empty train (zero data).
    pub fn empty(sign: f64) -> Self {
        Self {
            modes: Vec::new(),
            q: 2.0,
            mass: 0.0,
            kappa: 0.5,
            kappa_offset: 0.0,
            sign,
        }
    }

    pub fn modes(&self) -> &[(i64, Complex64)] {
        &self.modes
    }

    /// `M = Σ|α_j|²`, recomputed on demand.
    pub fn mass(&self) -> f64 {
        self.mass
    }

    pub fn sign(&self) -> f64 {
        self.sign
    }

    pub fn kappa(&self) -> f64 {
        self.kappa
    }

    /// Weighted sequence norm `(Σ (1+|j|)^{2q} |α_j|²)^{1/2}`.
    pub fn l2q_norm(&self) -> f64 {
        self.modes
            .iter()
            .map(|(j, a)| (1.0 + j.unsigned_abs() as f64).powf(2.0 * self.q) * a.norm_sqr())
            .sum::<f64>()
            .sqrt()
    }

    /// Log-phase `θ_j(t) = σ·κ·(|α_j|² - 2M + c)·ln t`.
    pub fn theta(&self, alpha: Complex64, t: f64) -> f64 {
        self.sign * self.kappa * (alpha.norm_sqr() - 2.0 * self.mass + self.kappa_offset) * t.ln()
    }

    /// Largest mode index magnitude present.
    pub fn max_mode(&self) -> i64 {
        self.modes.iter().map(|(j, _)| j.abs()).max().unwrap_or(0)
    }
}

/// Per-mode remainder input for the train wave; `R_j ≡ 0` when absent.
#[derive(Debug, Clone, Default)]
pub struct ModeRemainders {
    values: Vec<(i64, Complex64)>,
}

impl ModeRemainders {
    pub fn new(values: Vec<(i64, Complex64)>) -> Self {
        Self { values }
    }

    pub fn get(&self, j: i64) -> Complex64 {
        self.values
            .iter()
            .find(|(jj, _)| *jj == j)
            .map(|(_, v)| *v)
            .unwrap_or(Complex64::new(0.0, 0.0))
    }
}

/// Meshless evaluator for the train wave `A(t,x)`.
#[derive(Debug, Clone)]
pub struct DiracWave<'a> {
    train: &'a DiracTrain,
    remainders: Option<&'a ModeRemainders>,
}

impl<'a> DiracWave<'a> {
    pub fn new(train: &'a DiracTrain, remainders: Option<&'a ModeRemainders>) -> Self {
        Self { train, remainders }
    }

    fn coefficient(&self, j: i64, alpha: Complex64, t: f64) -> Complex64 {
        let r = self
            .remainders
            .map(|r| r.get(j))
            .unwrap_or(Complex64::new(0.0, 0.0));
        Complex64::from_polar(1.0, self.train.theta(alpha, t)) * (alpha.conj() + r.conj())
    }

    /// `A(t, x)` for `t > 0`.
    pub fn eval(&self, t: f64, x: f64) -> Complex64 {
        let mut acc = Complex64::new(0.0, 0.0);
        for &(j, alpha) in &self.train.modes {
            let jf = j as f64;
            let phase = -t * jf * jf / 4.0 + x * jf / 2.0;
            acc += self.coefficient(j, alpha, t) * Complex64::from_polar(1.0, phase);
        }
        acc
    }

    /// Closed-form time derivative `∂ₜA(t,x)`, used by the residual oracle.
    pub fn eval_dt(&self, t: f64, x: f64) -> Complex64 {
        let mut acc = Complex64::new(0.0, 0.0);
        for &(j, alpha) in &self.train.modes {
            let jf = j as f64;
            let phase = -t * jf * jf / 4.0 + x * jf / 2.0;
            let theta_dot = self.train.sign
                * self.train.kappa
                * (alpha.norm_sqr() - 2.0 * self.train.mass + self.train.kappa_offset)
                / t;
            let factor = Complex64::new(0.0, theta_dot - jf * jf / 4.0);
            acc += self.coefficient(j, alpha, t) * Complex64::from_polar(1.0, phase) * factor;
        }
        acc
    }

    /// Sample `A(t,·)` onto a grid. Errors when a train mode lies beyond
    /// the grid's Nyquist index.
    pub fn sample(&self, grid: &SpectralGrid, t: f64) -> Result<ComplexField> {
        if t <= 0.0 {
            return Err(Error::NonPositiveTime { t });
        }
        for &(j, _) in &self.train.modes {
            grid.half_integer_slot(j)?;
        }
        // per-mode plane waves via phase recurrence over the uniform grid
        let n = grid.n();
        let mut samples = vec![Complex64::new(0.0, 0.0); n];
        for &(j, alpha) in &self.train.modes {
            let jf = j as f64;
            let coef = self.coefficient(j, alpha, t)
                * Complex64::from_polar(1.0, -t * jf * jf / 4.0);
            accumulate_wave(&mut samples, grid, coef, jf / 2.0);
        }
        ComplexField::from_samples(grid, Representation::Physical, samples)
    }
}

/// Add `coef·e^{iξx_i}` to every sample, resynchronizing the phase
/// recurrence periodically to stop rounding drift.
pub(crate) fn accumulate_wave(
    samples: &mut [Complex64],
    grid: &SpectralGrid,
    coef: Complex64,
    xi: f64,
) {
    let ratio = Complex64::from_polar(1.0, xi * grid.dx());
    let mut cur = coef * Complex64::from_polar(1.0, xi * grid.x(0));
    for (i, s) in samples.iter_mut().enumerate() {
        if i % 512 == 0 {
            cur = coef * Complex64::from_polar(1.0, xi * grid.x(i));
        }
        *s += cur;
        cur *= ratio;
    }
}

/// Closed-form single-Dirac solutions: the self-similar chirp pair
/// `u_α(t,x) = α e^{-iλ|α|² ln t} e^{ix²/4t}/√t` and
/// `ψ_α(t,x) = α e^{ix²/4t}/√t` (the latter solves the free equation).
///
/// The default `λ = -σ/2` keeps `u_α` consistent with the single-mode train
/// wave under the pseudo-conformal transform and the crate's equation
/// conventions; it is configurable because printed conventions for this
/// family differ in both sign and the use of `α²` versus `|α|²`.
#[derive(Debug, Clone, Copy)]
pub struct SingleDirac {
    pub alpha: Complex64,
    pub lambda: f64,
}

impl SingleDirac {
    pub fn with_default_lambda(alpha: Complex64, sign: f64) -> Self {
        Self {
            alpha,
            lambda: -sign / 2.0,
        }
    }

    fn chirp(t: f64, x: f64) -> Complex64 {
        Complex64::from_polar(1.0 / t.sqrt(), x * x / (4.0 * t))
    }

    pub fn u_alpha(&self, t: f64, x: f64) -> Result<Complex64> {
        if t <= 0.0 {
            return Err(Error::NonPositiveTime { t });
        }
        let phase = -self.lambda * self.alpha.norm_sqr() * t.ln();
        Ok(self.alpha * Complex64::from_polar(1.0, phase) * Self::chirp(t, x))
    }

    pub fn psi_alpha(&self, t: f64, x: f64) -> Result<Complex64> {
        if t <= 0.0 {
            return Err(Error::NonPositiveTime { t });
        }
        Ok(self.alpha * Self::chirp(t, x))
    }
}

/// Band-limited scattering profile: `û₊` is a smooth bump supported on
/// `[center-width, center+width]` strictly inside one half-integer cell
/// `(p/2, (p+1)/2)`, so `û₊/(·+p'/2)` stays smooth for every integer `p'`
/// and the free evolution is a compact, meshless frequency integral.
#[derive(Debug, Clone, PartialEq)]
pub struct ScatteringProfile {
    cell: i64,
    center: f64,
    width: f64,
    amplitude: f64,
    smoothness: u32,
    quad_nodes: usize,
}

impl ScatteringProfile {
    /// Construct and validate a profile in cell `p`, i.e. with support
    /// inside `(p/2, (p+1)/2)`.
    pub fn new(
        cell: i64,
        center: f64,
        width: f64,
        amplitude: f64,
        smoothness: u32,
        quad_nodes: usize,
    ) -> Result<Self> {
        if width <= 0.0 {
            return Err(Error::InvalidParameter {
                name: "width",
                message: format!("must be positive, got {width}"),
            });
        }
        if smoothness == 0 {
            return Err(Error::InvalidParameter {
                name: "smoothness",
                message: "must be at least 1".into(),
            });
        }
        let profile = Self {
            cell,
            center,
            width,
            amplitude,
            smoothness,
            quad_nodes: quad_nodes.max(16),
        };
        profile.validate()?;
        Ok(profile)
    }

    /// Build without the support check; used by the condition checkers to
    /// probe deliberately bad supports.
    pub fn new_unchecked(
        cell: i64,
        center: f64,
        width: f64,
        amplitude: f64,
        smoothness: u32,
        quad_nodes: usize,
    ) -> Self {
        Self {
            cell,
            center,
            width,
            amplitude,
            smoothness,
            quad_nodes: quad_nodes.max(16),
        }
    }

    fn validate(&self) -> Result<()> {
        let (lo, hi) = self.support();
        let cell_lo = self.cell as f64 / 2.0;
        let cell_hi = (self.cell + 1) as f64 / 2.0;
        if !(lo > cell_lo && hi < cell_hi) {
            // name the nearest offending half-integer for the message
            let point = if lo <= cell_lo { cell_lo } else { cell_hi };
            if lo <= cell_lo && hi < cell_hi && lo > cell_lo - 1e-12 {
                return Err(Error::SupportTouchesHalfInteger { lo, hi, point });
            }
            if (lo - cell_lo).abs() < 1e-9 || (hi - cell_hi).abs() < 1e-9 {
                return Err(Error::SupportTouchesHalfInteger { lo, hi, point });
            }
            return Err(Error::SupportOutsideCell {
                lo,
                hi,
                cell_lo,
                cell_hi,
            });
        }
        Ok(())
    }

    /// Support interval `[a, b]` of `û₊`.
    pub fn support(&self) -> (f64, f64) {
        (self.center - self.width, self.center + self.width)
    }

    /// Distance from the support to the half-integer lattice `ℤ/2`.
    pub fn distance_to_half_integers(&self) -> f64 {
        let (lo, hi) = self.support();
        let mut d = f64::INFINITY;
        let lo_cell = (2.0 * lo).floor() as i64 - 1;
        let hi_cell = (2.0 * hi).ceil() as i64 + 1;
        for p in lo_cell..=hi_cell {
            let h = p as f64 / 2.0;
            if h <= lo {
                d = d.min(lo - h);
            } else if h >= hi {
                d = d.min(h - hi);
            } else {
                return 0.0;
            }
        }
        d
    }

    pub fn amplitude(&self) -> f64 {
        self.amplitude
    }

    pub fn quad_nodes(&self) -> usize {
        self.quad_nodes
    }

    pub fn is_zero(&self) -> bool {
        self.amplitude == 0.0
    }

    /// `û₊(ξ)`: `amplitude·exp(-1/(1-z²)^ν)` with `z` affine onto [-1, 1].
    pub fn hat(&self, xi: f64) -> f64 {
        let z = (xi - self.center) / self.width;
        if z.abs() >= 1.0 {
            return 0.0;
        }
        let base = 1.0 - z * z;
        let arg = base.powi(self.smoothness as i32).recip();
        if arg > 700.0 {
            return 0.0;
        }
        self.amplitude * (-arg).exp()
    }

    /// Jet (value and four ξ-derivatives) of `û₊` at `xi`.
    pub fn hat_jet(&self, xi: f64) -> Jet {
        let z = (xi - self.center) / self.width;
        if z.abs() >= 1.0 {
            return Jet::constant(0.0);
        }
        let base = 1.0 - z * z;
        if base.powi(self.smoothness as i32).recip() > 700.0 {
            return Jet::constant(0.0);
        }
        // chain rule through the affine map: d/dξ = (1/width) d/dz
        let zj = Jet::variable(z);
        let one_minus = Jet::constant(1.0).add(&zj.mul(&zj).neg());
        let jet_z = one_minus
            .powi(self.smoothness as usize)
            .recip()
            .neg()
            .exp()
            .scale(self.amplitude);
        let mut c = jet_z.c;
        let mut scale = 1.0;
        for (k, v) in c.iter_mut().enumerate() {
            if k > 0 {
                scale /= self.width;
            }
            *v *= scale;
        }
        Jet { c }
    }

    /// Node count adequate for the oscillatory phase `e^{-itξ² + ixξ}` over
    /// the support: six nodes per oscillation cycle plus a base count.
    pub fn nodes_for(&self, t: f64, x_extent: f64) -> usize {
        let (a, b) = self.support();
        let phase_span = t.abs() * (b * b - a * a).abs() + x_extent.abs() * (b - a);
        let cycles = phase_span / TWO_PI;
        (self.quad_nodes).max((6.0 * cycles).ceil() as usize + 16)
    }

    /// Free evolution `(e^{it∂ₓₓ}u₊)(x) = (1/2π)∫ û₊(ξ) e^{-itξ²+ixξ} dξ`
    /// at a single point, with an explicit node count.
    pub fn free_evolution_with_nodes(&self, t: f64, x: f64, nodes: usize) -> Complex64 {
        if self.is_zero() {
            return Complex64::new(0.0, 0.0);
        }
        let (a, b) = self.support();
        let (xs, ws) = rule_on(a, b, nodes);
        let mut acc = Complex64::new(0.0, 0.0);
        for (xi, w) in xs.iter().zip(&ws) {
            let phase = -t * xi * xi + x * xi;
            acc += Complex64::from_polar(self.hat(*xi) * w, phase);
        }
        acc / TWO_PI
    }

    /// Free evolution with automatic node choice.
    pub fn free_evolution(&self, t: f64, x: f64) -> Complex64 {
        self.free_evolution_with_nodes(t, x, self.nodes_for(t, x))
    }

    /// Free evolution with a node-doubling convergence check: errors when
    /// doubling changes the value by more than `1e-10·(1+|value|)`.
    pub fn free_evolution_checked(&self, t: f64, x: f64) -> Result<Complex64> {
        let n = self.nodes_for(t, x);
        let coarse = self.free_evolution_with_nodes(t, x, n);
        let fine = self.free_evolution_with_nodes(t, x, 2 * n);
        let delta = (fine - coarse).norm();
        if delta > 1e-10 * (1.0 + fine.norm()) {
            return Err(Error::QuadratureNotConverged {
                context: "free evolution of the scattering profile",
                delta,
            });
        }
        Ok(fine)
    }

    /// `u₊(x)` itself (free evolution at `t = 0`).
    pub fn eval_profile(&self, x: f64) -> Complex64 {
        self.free_evolution(0.0, x)
    }

    /// Sample the free evolution onto a grid via per-node plane-wave
    /// synthesis; exact on the line (no box wraparound) as long as the
    /// physical content fits the box.
    pub fn sample_free_evolution(&self, grid: &SpectralGrid, t: f64) -> Result<ComplexField> {
        if self.is_zero() {
            return Ok(ComplexField::zeros(grid));
        }
        let x_extent = 0.5 * grid.box_len();
        let nodes = self.nodes_for(t, x_extent);
        let (a, b) = self.support();
        let (xs, ws) = rule_on(a, b, nodes);
        let n = grid.n();
        // chunk the nodes, synthesize into per-chunk buffers in parallel,
        // then reduce in a fixed order so outputs stay deterministic
        let chunks: Vec<(usize, usize)> = {
            let step = 64.min(xs.len()).max(1);
            (0..xs.len())
                .step_by(step)
                .map(|s| (s, (s + step).min(xs.len())))
                .collect()
        };
        let buffers: Vec<Vec<Complex64>> = chunks
            .par_iter()
            .map(|&(s, e)| {
                let mut buf = vec![Complex64::new(0.0, 0.0); n];
                for q in s..e {
                    let xi = xs[q];
                    let coef = Complex64::from_polar(
                        self.hat(xi) * ws[q] / TWO_PI,
                        -t * xi * xi,
                    );
                    accumulate_wave(&mut buf, grid, coef, xi);
                }
                buf
            })
            .collect();
        let mut samples = vec![Complex64::new(0.0, 0.0); n];
        for buf in buffers {
            for (s, v) in samples.iter_mut().zip(buf) {
                *s += v;
            }
        }
        ComplexField::from_samples(grid, Representation::Physical, samples)
    }

    /// Box-free L² norm via Plancherel on the compact support:
    /// `‖u₊‖₂² = (1/2π)∫|û₊|² dξ`. Time-independent under free evolution.
    pub fn l2_norm(&self) -> f64 {
        let (a, b) = self.support();
        let (xs, ws) = rule_on(a, b, 256);
        let s: f64 = xs
            .iter()
            .zip(&ws)
            .map(|(xi, w)| w * self.hat(*xi).powi(2))
            .sum();
        (s / TWO_PI).sqrt()
    }

    /// Sobolev norm of `u₊` itself: `(1/2π)∫ Σ_{j≤k} ξ^{2j} |û₊|² dξ`.
    pub fn sobolev_norm(&self, k: usize) -> f64 {
        let (a, b) = self.support();
        let (xs, ws) = rule_on(a, b, 256);
        let mut s = 0.0;
        for (xi, w) in xs.iter().zip(&ws) {
            let mut weight = 1.0;
            let mut pow = 1.0;
            for _ in 1..=k {
                pow *= xi * xi;
                weight += pow;
            }
            s += w * weight * self.hat(*xi).powi(2);
        }
        (s / TWO_PI).sqrt()
    }

    /// Line L¹ norm of `u₊` by windowed quadrature: the profile decays
    /// super-polynomially so the window is grown until the increment is
    /// negligible.
    pub fn l1_norm(&self) -> Result<f64> {
        if self.is_zero() {
            return Ok(0.0);
        }
        let panel = 4.0;
        let rule = gauss_legendre(12);
        let mut total = 0.0;
        let mut x_edge = 0.0;
        let mut stalled = 0;
        for _ in 0..4000 {
            let mut inc = 0.0;
            for side in [-1.0, 1.0] {
                let (a, b) = if side > 0.0 {
                    (x_edge, x_edge + panel)
                } else {
                    (-x_edge - panel, -x_edge)
                };
                let mid = 0.5 * (a + b);
                let half = 0.5 * (b - a);
                for (node, w) in rule.nodes.iter().zip(&rule.weights) {
                    let x = mid + half * node;
                    inc += w * half * self.free_evolution(0.0, x).norm();
                }
            }
            total += inc;
            x_edge += panel;
            if inc < 1e-13 * (1.0 + total) {
                stalled += 1;
                if stalled >= 2 {
                    return Ok(total);
                }
            } else {
                stalled = 0;
            }
        }
        Err(Error::QuadratureNotConverged {
            context: "L1 norm of the scattering profile",
            delta: total,
        })
    }
}

/// Report from the half-integer division check: the Sobolev norms of
/// `û₊(ξ)/(ξ + p/2)` for `|p| ≤ p_max`, `k ≤ k_max`, each verified stable
/// under quadrature refinement.
#[derive(Debug, Clone)]
pub struct FracuReport {
    /// (p, k, norm) triples.
    pub norms: Vec<(i64, usize, f64)>,
    pub max_norm: f64,
}

/// Check that `û₊(ξ)/(ξ + p/2)` lies in `Hᵏ(ℝ)` (as a function of ξ) for
/// every `|p| ≤ p_max` and `k ≤ k_max`, by nested quadrature refinement of
/// the derivative norms. Divergence (support touching `-p/2`) is reported
/// as a quadrature-non-convergence error.
pub fn check_half_integer_division(
    profile: &ScatteringProfile,
    p_max: i64,
    k_max: usize,
) -> Result<FracuReport> {
    let (a, b) = profile.support();
    let mut norms = Vec::new();
    let mut max_norm = 0.0_f64;
    for p in -p_max..=p_max {
        let shift = p as f64 / 2.0;
        let norm_with_nodes = |nodes: usize, k: usize| -> f64 {
            let (xs, ws) = rule_on(a, b, nodes);
            let mut acc = 0.0;
            for (xi, w) in xs.iter().zip(&ws) {
                let numerator = profile.hat_jet(*xi);
                let denominator = Jet::variable(*xi).add(&Jet::constant(shift));
                let quotient = numerator.div(&denominator);
                for j in 0..=k {
                    acc += w * quotient.derivative(j).powi(2);
                }
            }
            acc.sqrt()
        };
        for k in 0..=k_max {
            let mut nodes = 128;
            let mut prev = norm_with_nodes(nodes, k);
            let mut converged = None;
            for _ in 0..6 {
                nodes *= 2;
                let cur = norm_with_nodes(nodes, k);
                if (cur - prev).abs() <= 1e-8 * (1.0 + cur.abs()) {
                    converged = Some(cur);
                    break;
                }
                prev = cur;
            }
            match converged {
                Some(v) if v.is_finite() => {
                    max_norm = max_norm.max(v);
                    norms.push((p, k, v));
                }
                _ => {
                    return Err(Error::QuadratureNotConverged {
                        context: "half-integer division norm of the profile",
                        delta: prev,
                    })
                }
            }
        }
    }
    Ok(FracuReport { norms, max_norm })
}

/// The combined reference state `v₁(t,x) = A(t,x) + (e^{it∂ₓₓ}u₊)(x)` as a
/// meshless evaluator plus grid sampler.
#[derive(Debug, Clone)]
pub struct ReferenceState<'a> {
    pub wave: DiracWave<'a>,
    pub profile: &'a ScatteringProfile,
}

impl<'a> ReferenceState<'a> {
    pub fn new(train: &'a DiracTrain, profile: &'a ScatteringProfile) -> Self {
        Self {
            wave: DiracWave::new(train, None),
            profile,
        }
    }

    pub fn eval(&self, t: f64, x: f64) -> Result<Complex64> {
        if t <= 0.0 {
            return Err(Error::NonPositiveTime { t });
        }
        Ok(self.wave.eval(t, x) + self.profile.free_evolution(t, x))
    }

    pub fn sample(&self, grid: &SpectralGrid, t: f64) -> Result<ComplexField> {
        let a = self.wave.sample(grid, t)?;
        let g = self.profile.sample_free_evolution(grid, t)?;
        a.add_scaled(&g, Complex64::new(1.0, 0.0))
    }
}

/// Extracted amplitude trace of one lattice mode:
/// `A_j(t) = e^{itj²/4}·(1/L)∫ v(t,x) e^{-ixj/2} dx` and the derived
/// remainder `R̄_j(1/t) = e^{-iθ_j(t)} A_j(t) - ᾱ_j`.
#[derive(Debug, Clone)]
pub struct ModeTrace {
    pub j: i64,
    pub times: Vec<f64>,
    pub amplitudes: Vec<Complex64>,
    pub remainders: Vec<Complex64>,
}

/// Project the fields of a time series onto the train's lattice modes.
pub fn extract_modes(
    times: &[f64],
    fields: &[ComplexField],
    train: &DiracTrain,
) -> Result<Vec<ModeTrace>> {
    if times.len() != fields.len() {
        return Err(Error::InvalidParameter {
            name: "times",
            message: "time and field counts differ".into(),
        });
    }
    let mut traces: Vec<ModeTrace> = train
        .modes
        .iter()
        .map(|&(j, _)| ModeTrace {
            j,
            times: times.to_vec(),
            amplitudes: Vec::with_capacity(times.len()),
            remainders: Vec::with_capacity(times.len()),
        })
        .collect();
    for (idx, field) in fields.iter().enumerate() {
        let t = times[idx];
        let hat = match field.representation() {
            Representation::Physical => field.to_fourier()?,
            Representation::Frequency => field.clone(),
        };
        let grid = hat.grid();
        for (trace, &(j, alpha)) in traces.iter_mut().zip(train.modes.iter()) {
            let slot = grid.half_integer_slot(j)?;
            let jf = j as f64;
            let amplitude = hat.samples()[slot] / grid.box_len()
                * Complex64::from_polar(1.0, t * jf * jf / 4.0);
            let remainder_conj =
                amplitude * Complex64::from_polar(1.0, -train.theta(alpha, t)) - alpha.conj();
            trace.amplitudes.push(amplitude);
            trace.remainders.push(remainder_conj.conj());
        }
    }
    Ok(traces)
}
