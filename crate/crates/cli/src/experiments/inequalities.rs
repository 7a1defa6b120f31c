//! Inequality suites: the dispersion bound on a family of canonical
//! profiles and the interpolation inequality on random fields.

use super::{random_concentrated_field, seeded_rng, RunResult};
use crate::config::ExperimentConfig;
use crate::output::{CsvField, OutputDir};
use nlslab_core::analysis::{check_dispersion, check_gn};
use nlslab_core::field::ComplexField;
use nlslab_core::profiles::ScatteringProfile;
use num_complex::Complex64;

/// The canonical profile family: varied cells, widths, and smoothness.
pub fn canonical_profiles() -> Vec<ScatteringProfile> {
    vec![
        ScatteringProfile::new(0, 0.25, 0.1, 1.0, 2, 64).unwrap(),
        ScatteringProfile::new(0, 0.25, 0.2, 1.0, 2, 64).unwrap(),
        ScatteringProfile::new(1, 0.75, 0.15, 0.8, 2, 64).unwrap(),
        ScatteringProfile::new(-2, -0.7, 0.12, 1.3, 3, 64).unwrap(),
        ScatteringProfile::new(2, 1.3, 0.15, 0.6, 1, 64).unwrap(),
    ]
}

pub fn run(config: &ExperimentConfig, out: &OutputDir, quiet: bool) -> RunResult<()> {
    // dispersion margins over the canonical family
    let mut disp = out.csv(
        "dispersion.csv",
        "profile,t,sup,sup_location,sharp_margin,unsharp_margin",
    )?;
    for (pi, profile) in canonical_profiles().iter().enumerate() {
        let margins = check_dispersion(profile, &[1.0, 10.0, 100.0])?;
        for m in &margins {
            if !quiet {
                println!(
                    "inequalities: profile {pi} t={} sharp margin {:.3e}",
                    m.t, m.sharp_margin
                );
            }
            disp.row(&[
                CsvField::Int(pi as i64),
                CsvField::Float(m.t),
                CsvField::Float(m.sup),
                CsvField::Float(m.sup_location),
                CsvField::Float(m.sharp_margin),
                CsvField::Float(m.unsharp_margin),
            ])?;
        }
    }
    disp.finish()?;

    // interpolation-inequality margins on 100 mean-zero fields
    let grid = config.build_grid()?;
    let mut rng = seeded_rng(config.seed);
    let blob = ComplexField::from_fn(&grid, |x| {
        Complex64::new((-(x / (grid.box_len() / 8.0)).powi(2)).exp(), 0.0)
    });
    let b0 = blob.to_fourier()?.samples()[0];
    let mut gn = out.csv("gn.csv", "field,margin")?;
    let mut worst = f64::INFINITY;
    for fi in 0..100 {
        let f = random_concentrated_field(&grid, &mut rng);
        let f0 = f.to_fourier()?.samples()[0];
        let mean_zero = f.add_scaled(&blob, -f0 / b0)?;
        let margin = check_gn(&mean_zero)?;
        worst = worst.min(margin);
        gn.row(&[CsvField::Int(fi), CsvField::Float(margin)])?;
    }
    gn.finish()?;
    if !quiet {
        println!("inequalities: smallest interpolation margin {worst:.3e}");
    }
    Ok(())
}
