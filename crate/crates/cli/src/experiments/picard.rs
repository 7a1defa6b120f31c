//! Fixed-point experiment: Picard iteration, contraction report, ball
//! stability, and the theorem decay fits of the fixed point.

use super::{RunError, RunResult};
use crate::config::ExperimentConfig;
use crate::output::{CsvField, OutputDir};
use nlslab_core::analysis::theorem_decay_report;
use nlslab_core::duhamel::{
    phi_apply, s_norm, picard_solve, PicardConfig, SNormWeights,
};
use nlslab_core::field::ComplexField;
use nlslab_core::spectral::band_limit;
use nlslab_core::SpectralGrid;
use num_complex::Complex64;

pub fn run(config: &ExperimentConfig, out: &OutputDir, quiet: bool) -> RunResult<()> {
    let grid = config.build_grid()?;
    let train = config.build_train()?;
    let profile = config.build_profile()?;
    let weights = SNormWeights::new(config.picard.mu, config.picard.s)?;
    let pc = PicardConfig {
        t0: config.times.t0,
        t_max_factor: config.picard.t_max_factor,
        rho: config.times.rho,
        weights,
        tol: config.picard.tol,
        max_iter: config.picard.max_iter,
        panels_per_decade: config.picard.panels_per_decade,
        nodes_per_panel: config.picard.nodes_per_panel,
        alpha_ceiling: config.picard.alpha_ceiling,
        check_sources: false,
    };
    let outcome = picard_solve(&train, &profile, &grid, &pc)?;
    if !outcome.converged {
        return Err(RunError::Numerical(format!(
            "picard iteration did not reach tol {} within {} iterations",
            pc.tol, pc.max_iter
        )));
    }

    let mut iters = out.csv(
        "iterations.csv",
        "iter,update_S_norm,contraction_ratio,tail_bound",
    )?;
    for row in &outcome.iterations {
        if !quiet {
            println!(
                "picard: iter {} update {:.6e} ratio {:.4}",
                row.iter, row.update_s_norm, row.contraction_ratio
            );
        }
        iters.row(&[
            CsvField::Int(row.iter as i64),
            CsvField::Float(row.update_s_norm),
            CsvField::Float(if row.contraction_ratio.is_finite() {
                row.contraction_ratio
            } else {
                -1.0
            }),
            CsvField::Float(row.tail_bound),
        ])?;
    }
    iters.finish()?;

    // per-kind source norms over the family
    let mut source_csv = out.csv("sources.csv", "t,term,l2")?;
    for (idx, &t) in outcome.times.iter().enumerate() {
        for (ki, kind) in outcome.source_kinds.iter().enumerate() {
            source_csv.row(&[
                CsvField::Float(t),
                CsvField::Str(kind.label()),
                CsvField::Float(outcome.source_kind_l2[idx][ki]),
            ])?;
        }
    }
    source_csv.finish()?;

    // ball stability: one application from v₁ + δ·bump stays within δ
    let delta = config.picard.delta;
    let bump_raw = ComplexField::from_fn(&grid, |x| {
        Complex64::from_polar((-(x / (grid.box_len() / 30.0)).powi(2)).exp(), 0.3 * x)
    });
    let bump = band_limit(&bump_raw, 4.0)?;
    let bump_s = s_norm(&outcome.times, &vec![bump.clone(); outcome.times.len()], weights)?;
    let scaled: Vec<ComplexField> = outcome
        .times
        .iter()
        .zip(&outcome.v1)
        .map(|(&t, f)| {
            // scale so the perturbation family has S-norm exactly δ
            let c = delta / bump_s * t.powf(-config.picard.mu);
            f.add_scaled(&bump, Complex64::new(c, 0.0)).unwrap()
        })
        .collect();
    let phi_pert = phi_apply(
        &outcome.times,
        &scaled,
        &outcome.v1,
        &outcome.source_totals,
        train.mass(),
        train.sign(),
    )?;
    let diff: Vec<ComplexField> = phi_pert
        .iter()
        .zip(&outcome.v1)
        .map(|(a, b)| a.sub(b))
        .collect::<nlslab_core::Result<Vec<_>>>()?;
    let ball_norm = s_norm(&outcome.times, &diff, weights)?;
    let mut ball = out.csv("ball.csv", "delta,phi_image_S_norm,inside")?;
    ball.row(&[
        CsvField::Float(delta),
        CsvField::Float(ball_norm),
        CsvField::Int((ball_norm <= delta) as i64),
    ])?;
    ball.finish()?;
    if !quiet {
        println!("picard: ball check |phi(v1+delta·b) - v1|_S = {ball_norm:.3e} vs delta {delta:.3e}");
    }

    // theorem decay of the fixed point over [t0, t0·10]
    let outer = SpectralGrid::new(4096, 2).map_err(RunError::from)?;
    let window = (config.times.t0, config.times.t0 * 10.0);
    let report = theorem_decay_report(
        &outcome.times,
        &outcome.fixed_point,
        &outcome.v1,
        config.picard.s,
        &outer,
        Some(window),
    )
    .map_err(|e| RunError::Numerical(e.to_string()))?;
    let mut decay = out.csv("decay.csv", "k,t,nls_norm,s,transformed_norm")?;
    for &(k, t, n, s, tn) in &report.series {
        decay.row(&[
            CsvField::Int(k as i64),
            CsvField::Float(t),
            CsvField::Float(n),
            CsvField::Float(s),
            CsvField::Float(tn),
        ])?;
    }
    decay.finish()?;
    let mut fits = out.csv(
        "fits.csv",
        "side,k,exponent,log_constant,rms_residual,t_lo,t_hi,samples",
    )?;
    for (k, fit) in &report.nls_side {
        if !quiet {
            println!(
                "picard: |grad^{k}(v - v1)| exponent {:.4} (rms {:.2e})",
                fit.exponent, fit.rms_residual
            );
        }
        fits.row(&[
            CsvField::Str("nls"),
            CsvField::Int(*k as i64),
            CsvField::Float(fit.exponent),
            CsvField::Float(fit.log_constant),
            CsvField::Float(fit.rms_residual),
            CsvField::Float(fit.t_lo),
            CsvField::Float(fit.t_hi),
            CsvField::Int(fit.samples as i64),
        ])?;
    }
    for (k, fit) in &report.transformed_side {
        if !quiet {
            println!(
                "picard: transformed k={k} exponent {:.4} (rms {:.2e})",
                fit.exponent, fit.rms_residual
            );
        }
        fits.row(&[
            CsvField::Str("transformed"),
            CsvField::Int(*k as i64),
            CsvField::Float(fit.exponent),
            CsvField::Float(fit.log_constant),
            CsvField::Float(fit.rms_residual),
            CsvField::Float(fit.t_lo),
            CsvField::Float(fit.t_hi),
            CsvField::Int(fit.samples as i64),
        ])?;
    }
    fits.finish()?;
    Ok(())
}
