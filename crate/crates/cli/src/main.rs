//! `nlslab` — experiment runner for the critical 1-D cubic NLS laboratory.
//!
//! Subcommands map to experiment suites; every run writes CSV artifacts
//! plus a manifest into the output directory. Outputs are deterministic:
//! identical config and seed produce byte-identical CSVs.
//!
//! Exit codes: 0 success; 1 configuration or schema error; 2 numerical
//! failure (NaN, non-convergent quadrature, boundary-mass violation,
//! divergence); 3 acceptance violation in selftest.

mod config;
mod experiments;
mod output;

use clap::{Parser, Subcommand};
use config::ExperimentConfig;
use experiments::RunError;
use output::OutputDir;
use std::path::PathBuf;
use std::time::Instant;

#[derive(Parser)]
#[command(name = "nlslab", version, about = "Critical 1-D cubic NLS laboratory")]
struct Cli {
    /// Configuration file (TOML); defaults to the subcommand's built-in.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output directory for CSV artifacts and the manifest.
    #[arg(long, global = true, default_value = "out")]
    out: PathBuf,
    /// Dump per-snapshot field CSVs (evolve).
    #[arg(long, global = true)]
    dump: bool,
    /// Override the quadrature panels per decade.
    #[arg(long, global = true)]
    panels: Option<usize>,
    /// Suppress progress output.
    #[arg(long, global = true)]
    quiet: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Clone, Copy)]
enum Command {
    /// Spectral-substrate and transform invariant suites.
    Selftest,
    /// Direct solver, mode extraction, and decay report.
    Evolve,
    /// Source-term evaluation, oracle cross-checks, and decay fits.
    Sources,
    /// Fixed-point iteration, contraction report, and theorem decay.
    Picard,
    /// Commutation and small-time limit defects.
    Transforms,
    /// Dispersion and interpolation inequality suites.
    Inequalities,
    /// Aggregate prior outputs in the output directory.
    Report,
}

impl Command {
    fn name(self) -> &'static str {
        match self {
            Command::Selftest => "selftest",
            Command::Evolve => "evolve",
            Command::Sources => "sources",
            Command::Picard => "picard",
            Command::Transforms => "transforms",
            Command::Inequalities => "inequalities",
            Command::Report => "report",
        }
    }

    fn builtin_config(self) -> &'static str {
        match self {
            Command::Evolve => include_str!("../configs/evolve.toml"),
            Command::Sources => include_str!("../configs/sources.toml"),
            Command::Picard => include_str!("../configs/picard.toml"),
            _ => include_str!("../configs/default.toml"),
        }
    }
}

fn init_threads() {
    if let Ok(value) = std::env::var("NLSLAB_THREADS") {
        if let Ok(count) = value.parse::<usize>() {
            let _ = rayon::ThreadPoolBuilder::new()
                .num_threads(count.max(1))
                .build_global();
        }
    }
}

fn load_config(cli: &Cli) -> Result<ExperimentConfig, RunError> {
    let text = match &cli.config {
        Some(path) => std::fs::read_to_string(path)
            .map_err(|e| RunError::Config(format!("cannot read {}: {e}", path.display())))?,
        None => cli.command.builtin_config().to_string(),
    };
    let mut cfg =
        ExperimentConfig::from_toml(&text).map_err(|e| RunError::Config(e.to_string()))?;
    if let Some(panels) = cli.panels {
        cfg.picard.panels_per_decade = panels;
        cfg.validate().map_err(|e| RunError::Config(e.to_string()))?;
    }
    Ok(cfg)
}

fn run(cli: &Cli) -> Result<(), RunError> {
    init_threads();
    let out = OutputDir::create(&cli.out).map_err(|e| RunError::Config(e.to_string()))?;
    let started = Instant::now();
    let (result, config_echo) = match cli.command {
        Command::Report => (experiments::report::run(&out, cli.quiet), String::new()),
        command => {
            let cfg = load_config(cli)?;
            let echo = cfg.to_toml();
            let res = match command {
                Command::Selftest => experiments::selftest::run(&cfg, &out, cli.quiet),
                Command::Evolve => experiments::evolve::run(&cfg, &out, cli.dump, cli.quiet),
                Command::Sources => experiments::sources::run(&cfg, &out, cli.quiet),
                Command::Picard => experiments::picard::run(&cfg, &out, cli.quiet),
                Command::Transforms => experiments::transforms_cmd::run(&cfg, &out, cli.quiet),
                Command::Inequalities => experiments::inequalities::run(&cfg, &out, cli.quiet),
                Command::Report => unreachable!(),
            };
            (res, echo)
        }
    };
    out.manifest(
        cli.command.name(),
        &config_echo,
        started.elapsed().as_secs_f64(),
    )
    .map_err(|e| RunError::Numerical(e.to_string()))?;
    result
}

fn main() {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => {}
        Err(e) => {
            eprintln!("nlslab {}: {e}", cli.command.name());
            let code = match e {
                RunError::Config(_) => 1,
                RunError::Numerical(_) => 2,
                RunError::Acceptance(_) => 3,
            };
            std::process::exit(code);
        }
    }
}
