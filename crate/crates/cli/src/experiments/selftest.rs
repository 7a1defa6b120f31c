//! Fast invariant suites over the spectral substrate and the transforms.
//!
//! Any violated threshold is an acceptance error (exit 3).

use super::{random_concentrated_field, seeded_rng, RunError, RunResult};
use crate::config::ExperimentConfig;
use crate::output::{CsvField, OutputDir};
use nlslab_core::field::ComplexField;
use nlslab_core::profiles::{check_half_integer_division, DiracTrain, DiracWave};
use nlslab_core::spectral::{free_propagate, spatial_derivative};
use nlslab_core::transforms;
use num_complex::Complex64;

struct Check {
    name: &'static str,
    worst: f64,
    threshold: f64,
}

pub fn run(config: &ExperimentConfig, out: &OutputDir, quiet: bool) -> RunResult<()> {
    let grid = config.build_grid()?;
    let mut rng = seeded_rng(config.seed);
    let mut checks: Vec<Check> = Vec::new();

    // --- spectral substrate on 100 random band-limited fields ---
    let fields: Vec<ComplexField> = (0..100)
        .map(|_| random_concentrated_field(&grid, &mut rng))
        .collect();
    let mut unitarity = 0.0_f64;
    let mut group_law = 0.0_f64;
    let mut plancherel = 0.0_f64;
    let mut commutation = 0.0_f64;
    let mut round_trip = 0.0_f64;
    for f in &fields {
        let n0 = f.l2_norm();
        for &t in &[0.1, 1.0, 10.0, 100.0] {
            let p = free_propagate(f, t)?;
            unitarity = unitarity.max((p.l2_norm() - n0).abs() / n0);
        }
        let two_step = free_propagate(&free_propagate(f, 1.3)?, 2.4)?;
        let one_step = free_propagate(f, 3.7)?;
        group_law = group_law.max(two_step.sub(&one_step)?.l2_norm() / n0);
        let hat = f.to_fourier()?;
        plancherel = plancherel.max((hat.l2_norm() - n0).abs() / n0);
        round_trip = round_trip.max(hat.from_fourier()?.sub(f)?.l2_norm() / n0);
        for k in 1..=2 {
            let a = spatial_derivative(&free_propagate(f, 2.2)?, k)?;
            let b = free_propagate(&spatial_derivative(f, k)?, 2.2)?;
            // compare on the field's content band: beyond it both paths
            // hold only round-trip rounding noise, which ξᵏ amplifies by
            // (Nyquist/band)ᵏ without carrying any information
            let diff = nlslab_core::spectral::band_limit(&a.sub(&b)?, 8.0)?;
            let scale = a.l2_norm().max(1e-300);
            commutation = commutation.max(diff.l2_norm() / scale);
        }
    }
    checks.push(Check { name: "propagator_unitarity", worst: unitarity, threshold: 1e-12 });
    checks.push(Check { name: "propagator_group_law", worst: group_law, threshold: 1e-12 });
    checks.push(Check { name: "plancherel", worst: plancherel, threshold: 1e-12 });
    checks.push(Check { name: "derivative_commutation", worst: commutation, threshold: 1e-12 });
    checks.push(Check { name: "transform_round_trip", worst: round_trip, threshold: 1e-12 });

    // --- pseudo-conformal identities on a smaller batch ---
    let mut involution = 0.0_f64;
    let mut isometry = 0.0_f64;
    let mut comm1 = 0.0_f64;
    let mut comm2 = 0.0_f64;
    for f in fields.iter().take(5) {
        let interp = transforms::TrigInterpolant::new(f)?;
        let t: f64 = 2.0;
        let g_eval = |y: f64| {
            let chirp = Complex64::from_polar(t.sqrt(), y * y * t / 4.0);
            chirp * interp.eval(y * t).unwrap().conj()
        };
        let back = transforms::pseudo_conformal_sample(&g_eval, t, &grid)?;
        involution = involution.max(back.sub(f)?.l2_norm() / f.l2_norm());
        let tf = transforms::pseudo_conformal_sample_field(&interp, t, &grid)?;
        isometry = isometry.max((tf.l2_norm() - f.l2_norm()).abs() / f.l2_norm());
        comm1 = comm1.max(transforms::commutation_defect(f, 2.0, 1, &grid)?);
        comm2 = comm2.max(transforms::commutation_defect(f, 2.0, 2, &grid)?);
    }
    checks.push(Check { name: "transform_involution", worst: involution, threshold: 1e-9 });
    checks.push(Check { name: "transform_isometry", worst: isometry, threshold: 1e-9 });
    checks.push(Check { name: "commutation_defect_k1", worst: comm1, threshold: 1e-7 });
    checks.push(Check { name: "commutation_defect_k2", worst: comm2, threshold: 1e-6 });

    // --- interpolation inequality margins ---
    let mut gn_worst = 0.0_f64;
    for f in fields.iter().take(20) {
        let blob = ComplexField::from_fn(&grid, |x| {
            Complex64::new((-(x / (grid.box_len() / 8.0)).powi(2)).exp(), 0.0)
        });
        let f0 = f.to_fourier()?.samples()[0];
        let b0 = blob.to_fourier()?.samples()[0];
        let mean_zero = f.add_scaled(&blob, -f0 / b0)?;
        let margin = nlslab_core::analysis::check_gn(&mean_zero)?;
        gn_worst = gn_worst.max(-margin);
    }
    checks.push(Check { name: "gn_margin_deficit", worst: gn_worst, threshold: 1e-10 });

    // --- half-integer division condition for the configured profile ---
    let profile = config.build_profile()?;
    if !profile.is_zero() {
        let report = check_half_integer_division(&profile, 20, 2)
            .map_err(|e| RunError::Numerical(e.to_string()))?;
        let finite = report.max_norm.is_finite();
        checks.push(Check {
            name: "half_integer_division_finite",
            worst: if finite { 0.0 } else { 1.0 },
            threshold: 0.5,
        });
    }

    // --- single-mode residual oracle (closed-form time derivative) ---
    let single = DiracTrain::new(
        &[(0, Complex64::new(0.3, 0.1))],
        2.0,
        config.train.kappa,
        config.train.kappa_offset,
        config.train.sign,
    )?;
    let wave = DiracWave::new(&single, None);
    let mut residual = 0.0_f64;
    for &t in &[0.5, 5.0, 50.0] {
        let v = wave.sample(&grid, t)?;
        let lap = spatial_derivative(&v, 2)?;
        for (i, (vv, dd)) in v.samples().iter().zip(lap.samples()).enumerate() {
            let dt = wave.eval_dt(t, grid.x(i));
            let r = Complex64::new(0.0, 1.0) * dt
                + dd
                + vv * (single.sign() / (2.0 * t)) * (vv.norm_sqr() - 2.0 * single.mass());
            residual = residual.max(r.norm());
        }
    }
    checks.push(Check { name: "single_mode_residual", worst: residual, threshold: 1e-10 });

    let mut csv = out.csv("selftest.csv", "check,worst,threshold,pass")?;
    let mut failures = Vec::new();
    for c in &checks {
        let pass = c.worst <= c.threshold;
        if !pass {
            failures.push(format!("{} = {:.3e} > {:.1e}", c.name, c.worst, c.threshold));
        }
        if !quiet {
            println!(
                "selftest {:<32} {:>12.3e} (<= {:.1e})  {}",
                c.name,
                c.worst,
                c.threshold,
                if pass { "ok" } else { "FAIL" }
            );
        }
        csv.row(&[
            CsvField::Str(c.name),
            CsvField::Float(c.worst),
            CsvField::Float(c.threshold),
            CsvField::Int(pass as i64),
        ])?;
    }
    csv.finish()?;
    if !failures.is_empty() {
        return Err(RunError::Acceptance(failures.join("; ")));
    }
    Ok(())
}
