//! Periodic sampling lattice for the spectral substrate.
//!
//! The box length is locked to `L = 4π·m` so that every plane wave
//! `e^{ixj/2}` with half-integer frequency `j/2` is an exact grid mode:
//! frequencies are `ξ_k = 2πk/L = k/(2m)`, hence `ξ_{j·m} = j/2`.

use std::sync::Arc;

use rustfft::{Fft, FftPlanner};

use crate::error::{Error, Result};

/// Periodic grid with `n` points on a box of length `L = 4π·m`.
///
/// Points are `x_i = -L/2 + i·dx` and frequencies follow the usual FFT
/// layout `k = 0, 1, …, n/2-1, -n/2, …, -1` with `ξ_k = k/(2m)`.
#[derive(Clone)]
pub struct SpectralGrid {
    n: usize,
    m: usize,
    len: f64,
    dx: f64,
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
}

impl std::fmt::Debug for SpectralGrid {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("SpectralGrid")
            .field("n", &self.n)
            .field("m", &self.m)
            .field("len", &self.len)
            .finish()
    }
}

impl PartialEq for SpectralGrid {
    fn eq(&self, other: &Self) -> bool {
        self.n == other.n && self.m == other.m
    }
}

impl SpectralGrid {
    /// Build a grid with `n` points (power of two, at least 64) on a box of
    /// length `4π·m`.
    pub fn new(n: usize, m: usize) -> Result<Self> {
        if !n.is_power_of_two() || n < 64 {
            return Err(Error::GridSize { n });
        }
        if m < 1 {
            return Err(Error::BoxMultiple { m });
        }
        let len = 4.0 * std::f64::consts::PI * m as f64;
        let mut planner = FftPlanner::new();
        Ok(Self {
            n,
            m,
            len,
            dx: len / n as f64,
            forward: planner.plan_fft_forward(n),
            inverse: planner.plan_fft_inverse(n),
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn box_multiple(&self) -> usize {
        self.m
    }

    /// Box length `L = 4π·m`.
    pub fn box_len(&self) -> f64 {
        self.len
    }

    pub fn dx(&self) -> f64 {
        self.dx
    }

    /// Physical coordinate of sample `i`, in `[-L/2, L/2)`.
    pub fn x(&self, i: usize) -> f64 {
        -0.5 * self.len + i as f64 * self.dx
    }

    /// Signed integer frequency index for storage slot `k`.
    pub fn k_signed(&self, k: usize) -> i64 {
        if k < self.n / 2 {
            k as i64
        } else {
            k as i64 - self.n as i64
        }
    }

    /// Frequency of storage slot `k`: `ξ_k = k_signed/(2m)`.
    pub fn xi(&self, k: usize) -> f64 {
        self.k_signed(k) as f64 / (2.0 * self.m as f64)
    }

    /// Largest representable frequency magnitude (Nyquist), `n/(4m)`.
    pub fn nyquist(&self) -> f64 {
        self.n as f64 / (4.0 * self.m as f64)
    }

    /// Storage slot holding the plane wave `e^{ixj/2}`, i.e. signed index `j·m`.
    ///
    /// Fails when the mode lies at or beyond the Nyquist index.
    pub fn half_integer_slot(&self, j: i64) -> Result<usize> {
        let idx = j * self.m as i64;
        let nyq = (self.n / 2) as i64;
        if idx >= nyq || idx < -nyq {
            return Err(Error::ModeBeyondNyquist {
                j,
                index: idx,
                nyquist: nyq,
            });
        }
        Ok(if idx >= 0 {
            idx as usize
        } else {
            (idx + self.n as i64) as usize
        })
    }

    pub(crate) fn fft_forward(&self) -> &Arc<dyn Fft<f64>> {
        &self.forward
    }

    pub(crate) fn fft_inverse(&self) -> &Arc<dyn Fft<f64>> {
        &self.inverse
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_bad_sizes() {
        assert!(matches!(SpectralGrid::new(100, 1), Err(Error::GridSize { .. })));
        assert!(matches!(SpectralGrid::new(32, 1), Err(Error::GridSize { .. })));
        assert!(matches!(SpectralGrid::new(64, 0), Err(Error::BoxMultiple { .. })));
    }

    #[test]
    fn frequency_lattice_matches_definition() {
        // (n=8 is below the artifact minimum; use n=64, m=1 and check the
        // published lattice values on the corresponding slots.)
        let g = SpectralGrid::new(64, 1).unwrap();
        assert_eq!(g.box_len(), 4.0 * std::f64::consts::PI);
        assert_eq!(g.xi(0), 0.0);
        assert_eq!(g.xi(1), 0.5);
        assert_eq!(g.xi(3), 1.5);
        assert_eq!(g.xi(63), -0.5);
        assert_eq!(g.xi(32), -16.0);
        // dx example: n=4096, m=4 -> dx = 16π/4096
        let g = SpectralGrid::new(4096, 4).unwrap();
        assert!((g.dx() - 16.0 * std::f64::consts::PI / 4096.0).abs() < 1e-15);
    }

    #[test]
    fn half_integer_slots() {
        let g = SpectralGrid::new(64, 2).unwrap();
        // e^{ix·3/2} = mode j=3 sits exactly at signed index k = j·m = 6.
        assert_eq!(g.half_integer_slot(3).unwrap(), 6);
        assert_eq!(g.half_integer_slot(-3).unwrap(), 64 - 6);
        assert!((g.xi(6) - 1.5).abs() == 0.0);
        // beyond Nyquist
        assert!(g.half_integer_slot(16).is_err());
    }
}
