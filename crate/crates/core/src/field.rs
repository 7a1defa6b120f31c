//! Complex-valued state sampled on a [`SpectralGrid`], with physical and
//! frequency representations.
//!
//! The discrete transform is scaled to approximate the continuum convention
//!
//! ```text
//! f̂(ξ) = ∫ f(x) e^{-iξx} dx,      f(x) = (1/2π) ∫ f̂(ξ) e^{iξx} dξ,
//! ```
//!
//! so a frequency-representation field stores samples of the continuum `f̂`
//! at the lattice frequencies. With points `x_i = -L/2 + i·dx` this is
//! `f̂(ξ_k) = dx·(-1)^k·FFT_k(f)`, the `(-1)^k` being the exact centering
//! factor `e^{-iξ_k x_0}`.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::grid::SpectralGrid;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Representation {
    Physical,
    Frequency,
}

impl Representation {
    fn name(self) -> &'static str {
        match self {
            Representation::Physical => "physical",
            Representation::Frequency => "frequency",
        }
    }
}

/// Complex field on a periodic grid.
#[derive(Debug, Clone, PartialEq)]
pub struct ComplexField {
    grid: SpectralGrid,
    repr: Representation,
    samples: Vec<Complex64>,
}

impl ComplexField {
    pub fn zeros(grid: &SpectralGrid) -> Self {
        Self {
            grid: grid.clone(),
            repr: Representation::Physical,
            samples: vec![Complex64::new(0.0, 0.0); grid.n()],
        }
    }

    /// Physical-space field from a pointwise rule.
    pub fn from_fn(grid: &SpectralGrid, f: impl Fn(f64) -> Complex64) -> Self {
        let samples = (0..grid.n()).map(|i| f(grid.x(i))).collect();
        Self {
            grid: grid.clone(),
            repr: Representation::Physical,
            samples,
        }
    }

    pub fn from_samples(grid: &SpectralGrid, repr: Representation, samples: Vec<Complex64>) -> Result<Self> {
        if samples.len() != grid.n() {
            return Err(Error::InvalidParameter {
                name: "samples",
                message: format!("expected {} values, got {}", grid.n(), samples.len()),
            });
        }
        Ok(Self {
            grid: grid.clone(),
            repr,
            samples,
        })
    }

    pub fn grid(&self) -> &SpectralGrid {
        &self.grid
    }

    pub fn representation(&self) -> Representation {
        self.repr
    }

    pub fn samples(&self) -> &[Complex64] {
        &self.samples
    }

    pub fn samples_mut(&mut self) -> &mut [Complex64] {
        &mut self.samples
    }

    pub fn into_samples(self) -> Vec<Complex64> {
        self.samples
    }

    fn expect_repr(&self, expected: Representation) -> Result<()> {
        if self.repr != expected {
            return Err(Error::Representation {
                expected: expected.name(),
                found: self.repr.name(),
            });
        }
        Ok(())
    }

    pub(crate) fn check_same_grid(&self, other: &Self) -> Result<()> {
        if self.grid != other.grid {
            return Err(Error::GridMismatch {
                left_n: self.grid.n(),
                right_n: other.grid.n(),
                left_m: self.grid.box_multiple(),
                right_m: other.grid.box_multiple(),
            });
        }
        Ok(())
    }

    /// Transform a physical field to its continuum-scaled frequency form.
    pub fn to_fourier(&self) -> Result<Self> {
        self.expect_repr(Representation::Physical)?;
        let mut buf = self.samples.clone();
        self.grid.fft_forward().process(&mut buf);
        let dx = self.grid.dx();
        for (k, v) in buf.iter_mut().enumerate() {
            let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
            *v *= dx * sign;
        }
        Ok(Self {
            grid: self.grid.clone(),
            repr: Representation::Frequency,
            samples: buf,
        })
    }

    /// Inverse of [`ComplexField::to_fourier`].
    pub fn from_fourier(&self) -> Result<Self> {
        self.expect_repr(Representation::Frequency)?;
        let mut buf: Vec<Complex64> = self
            .samples
            .iter()
            .enumerate()
            .map(|(k, v)| if k % 2 == 0 { *v } else { -*v })
            .collect();
        self.grid.fft_inverse().process(&mut buf);
        let scale = 1.0 / self.grid.box_len();
        for v in buf.iter_mut() {
            *v *= scale;
        }
        Ok(Self {
            grid: self.grid.clone(),
            repr: Representation::Physical,
            samples: buf,
        })
    }

    /// Box L² norm, `(∫_box |f|² dx)^{1/2}`, valid in either representation
    /// (Plancherel in the frequency one).
    pub fn l2_norm(&self) -> f64 {
        let sum: f64 = self.samples.iter().map(|v| v.norm_sqr()).sum();
        match self.repr {
            Representation::Physical => (sum * self.grid.dx()).sqrt(),
            Representation::Frequency => (sum / self.grid.box_len()).sqrt(),
        }
    }

    /// Grid maximum modulus. Physical representation only.
    pub fn lebesgue_sup(&self) -> Result<f64> {
        self.expect_repr(Representation::Physical)?;
        Ok(self
            .samples
            .iter()
            .map(|v| v.norm())
            .fold(0.0_f64, f64::max))
    }

    /// dx-weighted sum of moduli, the box L¹ norm.
    pub fn lebesgue_l1(&self) -> Result<f64> {
        self.expect_repr(Representation::Physical)?;
        Ok(self.samples.iter().map(|v| v.norm()).sum::<f64>() * self.grid.dx())
    }

    /// Fraction of L² mass carried by samples with `|x| >= 0.45·L`
    /// (the outer 10% of the box). Zero field reports zero.
    pub fn boundary_mass_fraction(&self) -> Result<f64> {
        self.expect_repr(Representation::Physical)?;
        let threshold = 0.45 * self.grid.box_len();
        let mut outer = 0.0;
        let mut total = 0.0;
        for (i, v) in self.samples.iter().enumerate() {
            let m = v.norm_sqr();
            total += m;
            if self.grid.x(i).abs() >= threshold {
                outer += m;
            }
        }
        if total == 0.0 {
            Ok(0.0)
        } else {
            Ok(outer / total)
        }
    }

    pub fn is_finite(&self) -> bool {
        self.samples.iter().all(|v| v.re.is_finite() && v.im.is_finite())
    }

    /// Pointwise linear combination `self + c·other`.
    pub fn add_scaled(&self, other: &Self, c: Complex64) -> Result<Self> {
        self.check_same_grid(other)?;
        if self.repr != other.repr {
            return Err(Error::Representation {
                expected: self.repr.name(),
                found: other.repr.name(),
            });
        }
        let samples = self
            .samples
            .iter()
            .zip(&other.samples)
            .map(|(a, b)| a + c * b)
            .collect();
        Ok(Self {
            grid: self.grid.clone(),
            repr: self.repr,
            samples,
        })
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.add_scaled(other, Complex64::new(-1.0, 0.0))
    }

    pub fn scale(&self, c: Complex64) -> Self {
        Self {
            grid: self.grid.clone(),
            repr: self.repr,
            samples: self.samples.iter().map(|v| c * v).collect(),
        }
    }
}
