//! Aggregate prior experiment outputs in a directory into one summary.

use super::RunResult;
use crate::output::OutputDir;
use std::fmt::Write as _;
use std::path::Path;

fn head_of(path: &Path, lines: usize) -> Option<String> {
    let text = std::fs::read_to_string(path).ok()?;
    Some(
        text.lines()
            .take(lines + 1)
            .collect::<Vec<_>>()
            .join("\n"),
    )
}

pub fn run(out: &OutputDir, quiet: bool) -> RunResult<()> {
    let mut summary = String::new();
    writeln!(summary, "nlslab report").unwrap();
    let artifacts = [
        ("selftest.csv", 16),
        ("iterations.csv", 20),
        ("fits.csv", 20),
        ("rates.csv", 8),
        ("agreement.csv", 8),
        ("tails.csv", 8),
        ("dispersion.csv", 20),
        ("norms.csv", 4),
        ("smalltime.csv", 12),
        ("commutation.csv", 4),
        ("ball.csv", 4),
    ];
    let mut found = 0;
    for (name, lines) in artifacts {
        let path = out.path(name);
        if let Some(head) = head_of(&path, lines) {
            found += 1;
            writeln!(summary, "\n== {name} ==").unwrap();
            writeln!(summary, "{head}").unwrap();
        }
    }
    if found == 0 {
        writeln!(summary, "\n(no experiment artifacts found in this directory)").unwrap();
    }
    std::fs::write(out.path("summary.txt"), &summary)
        .map_err(|e| super::RunError::Numerical(e.to_string()))?;
    if !quiet {
        println!("report: aggregated {found} artifacts into summary.txt");
    }
    Ok(())
}
