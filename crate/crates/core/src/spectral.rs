//! Free Schrödinger propagator, spectral derivatives, and Sobolev norms.
//!
//! Everything here is a diagonal frequency multiplier under the continuum
//! convention of [`crate::field`]: the propagator acts as
//! `(e^{it∂ₓₓ}f)^(ξ) = e^{-itξ²} f̂(ξ)` and the derivative as `(iξ)^k`.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::field::{ComplexField, Representation};

/// Highest derivative order supported by the lab.
pub const MAX_DERIVATIVE_ORDER: usize = 4;

fn apply_multiplier(f: &ComplexField, mul: impl Fn(f64) -> Complex64) -> Result<ComplexField> {
    let (hat, was_physical) = match f.representation() {
        Representation::Physical => (f.to_fourier()?, true),
        Representation::Frequency => (f.clone(), false),
    };
    let grid = hat.grid().clone();
    let mut samples = hat.into_samples();
    for (k, v) in samples.iter_mut().enumerate() {
        *v *= mul(grid.xi(k));
    }
    let out = ComplexField::from_samples(&grid, Representation::Frequency, samples)?;
    if was_physical {
        out.from_fourier()
    } else {
        Ok(out)
    }
}

/// Apply the free flow `e^{it∂ₓₓ}` for any real `t` (backward included).
pub fn free_propagate(f: &ComplexField, t: f64) -> Result<ComplexField> {
    apply_multiplier(f, |xi| Complex64::from_polar(1.0, -t * xi * xi))
}

/// `k`-th spectral derivative, multiplier `(iξ)^k`.
pub fn spatial_derivative(f: &ComplexField, k: usize) -> Result<ComplexField> {
    if k > MAX_DERIVATIVE_ORDER {
        return Err(Error::DerivativeOrder {
            k,
            max: MAX_DERIVATIVE_ORDER,
        });
    }
    if k == 0 {
        return Ok(f.clone());
    }
    apply_multiplier(f, |xi| Complex64::new(0.0, xi).powu(k as u32))
}

/// Sobolev norm `(Σ_{j=0..k} ‖∇ʲf‖₂²)^{1/2}` with box L² norms.
pub fn sobolev_norm(f: &ComplexField, k: usize) -> Result<f64> {
    let hat = match f.representation() {
        Representation::Physical => f.to_fourier()?,
        Representation::Frequency => f.clone(),
    };
    let grid = hat.grid().clone();
    let mut sum = 0.0;
    for (slot, v) in hat.samples().iter().enumerate() {
        let xi2 = grid.xi(slot).powi(2);
        let mut weight = 1.0;
        let mut pow = 1.0;
        for _ in 1..=k {
            pow *= xi2;
            weight += pow;
        }
        sum += weight * v.norm_sqr();
    }
    Ok((sum / grid.box_len()).sqrt())
}

/// Zero out all content with `|ξ| > xi_cut`.
pub fn band_limit(f: &ComplexField, xi_cut: f64) -> Result<ComplexField> {
    apply_multiplier(f, |xi| {
        if xi.abs() <= xi_cut {
            Complex64::new(1.0, 0.0)
        } else {
            Complex64::new(0.0, 0.0)
        }
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::SpectralGrid;
    use approx::assert_abs_diff_eq;
    use num_complex::Complex64 as C;

    fn rel_l2_diff(a: &ComplexField, b: &ComplexField) -> f64 {
        let d = a.sub(b).unwrap().l2_norm();
        let n = a.l2_norm().max(b.l2_norm()).max(1e-300);
        d / n
    }

    #[test]
    fn propagate_identity_at_zero_time() {
        let g = SpectralGrid::new(256, 2).unwrap();
        let f = ComplexField::from_fn(&g, |x| C::from_polar((-x * x).exp(), 0.5 * x));
        let p = free_propagate(&f, 0.0).unwrap();
        assert!(rel_l2_diff(&f, &p) < 1e-14);
    }

    #[test]
    fn plane_wave_picks_up_quarter_phase() {
        // e^{ix/2} at t = π: multiplier at ξ = 1/2 is e^{-iπ/4}.
        let g = SpectralGrid::new(256, 1).unwrap();
        let f = ComplexField::from_fn(&g, |x| C::from_polar(1.0, 0.5 * x));
        let p = free_propagate(&f, std::f64::consts::PI).unwrap();
        let expected = f.scale(C::from_polar(1.0, -std::f64::consts::FRAC_PI_4));
        assert!(rel_l2_diff(&p, &expected) < 1e-12);
    }

    #[test]
    fn gaussian_evolution_matches_closed_form() {
        // e^{it∂ₓₓ} e^{-x²} = e^{-x²/(1+4it)} / √(1+4it), checked pointwise
        // at t = 1 to 1e-8 on n=4096, m=4.
        let g = SpectralGrid::new(4096, 4).unwrap();
        let f = ComplexField::from_fn(&g, |x| C::new((-x * x).exp(), 0.0));
        let p = free_propagate(&f, 1.0).unwrap();
        let denom = C::new(1.0, 4.0);
        let root = denom.sqrt();
        let mut worst = 0.0_f64;
        for (i, v) in p.samples().iter().enumerate() {
            let x = g.x(i);
            let exact = (C::new(-x * x, 0.0) / denom).exp() / root;
            worst = worst.max((v - exact).norm());
        }
        assert!(worst < 1e-8, "worst pointwise error {worst:e}");
    }

    #[test]
    fn derivative_of_plane_wave() {
        let g = SpectralGrid::new(256, 1).unwrap();
        let f = ComplexField::from_fn(&g, |x| C::from_polar(1.0, 0.5 * x));
        let d0 = spatial_derivative(&f, 0).unwrap();
        assert!(rel_l2_diff(&d0, &f) < 1e-15);
        let d1 = spatial_derivative(&f, 1).unwrap();
        let expected = f.scale(C::new(0.0, 0.5));
        assert!(rel_l2_diff(&d1, &expected) < 1e-12);
        assert!(spatial_derivative(&f, 5).is_err());
    }

    #[test]
    fn derivative_commutes_with_propagator() {
        let g = SpectralGrid::new(512, 2).unwrap();
        let f = ComplexField::from_fn(&g, |x| C::from_polar((-0.2 * x * x).exp(), 1.5 * x));
        for k in 0..=2 {
            let a = spatial_derivative(&free_propagate(&f, 3.7).unwrap(), k).unwrap();
            let b = free_propagate(&spatial_derivative(&f, k).unwrap(), 3.7).unwrap();
            assert!(rel_l2_diff(&a, &b) < 1e-12);
        }
    }

    #[test]
    fn sobolev_norm_of_plane_wave() {
        // f = a·e^{iξ₀x}: ‖f‖_{Hᵏ}² = |a|²·L·Σ_{j≤k} ξ₀^{2j}
        let g = SpectralGrid::new(256, 2).unwrap();
        let a = C::new(0.3, 0.7);
        let xi0 = 1.5;
        let f = ComplexField::from_fn(&g, |x| a * C::from_polar(1.0, xi0 * x));
        for k in 0..=3usize {
            let weight: f64 = (0..=k).map(|j| xi0.powi(2 * j as i32)).sum();
            let expected = (a.norm_sqr() * g.box_len() * weight).sqrt();
            let got = sobolev_norm(&f, k).unwrap();
            assert_abs_diff_eq!(got, expected, epsilon = 1e-9 * expected);
        }
        // k = 0 equals the plain L² norm; zero field gives 0.
        assert_abs_diff_eq!(sobolev_norm(&f, 0).unwrap(), f.l2_norm(), epsilon = 1e-12);
        let z = ComplexField::zeros(&g);
        assert_eq!(sobolev_norm(&z, 3).unwrap(), 0.0);
    }
}
