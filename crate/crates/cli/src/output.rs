//! Deterministic CSV and manifest writing.
//!
//! Floats are emitted with 17 significant digits so repeated runs with the
//! same config and seed produce byte-identical files.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

pub struct OutputDir {
    root: PathBuf,
}

impl OutputDir {
    pub fn create(root: &Path) -> anyhow::Result<Self> {
        std::fs::create_dir_all(root)?;
        Ok(Self {
            root: root.to_path_buf(),
        })
    }

    pub fn path(&self, name: &str) -> PathBuf {
        self.root.join(name)
    }

    pub fn csv(&self, name: &str, header: &str) -> anyhow::Result<CsvWriter> {
        let file = File::create(self.path(name))?;
        let mut writer = BufWriter::new(file);
        writeln!(writer, "{header}")?;
        Ok(CsvWriter { writer })
    }

    /// Config echo, code version, and wall time for the run.
    pub fn manifest(
        &self,
        subcommand: &str,
        config_echo: &str,
        wall_seconds: f64,
    ) -> anyhow::Result<()> {
        let file = File::create(self.path("manifest.txt"))?;
        let mut w = BufWriter::new(file);
        writeln!(w, "tool: nlslab {}", env!("CARGO_PKG_VERSION"))?;
        writeln!(w, "subcommand: {subcommand}")?;
        writeln!(w, "wall_seconds: {wall_seconds:.3}")?;
        writeln!(w, "--- config ---")?;
        write!(w, "{config_echo}")?;
        Ok(())
    }
}

pub struct CsvWriter {
    writer: BufWriter<File>,
}

impl CsvWriter {
    pub fn row(&mut self, fields: &[CsvField]) -> anyhow::Result<()> {
        let mut first = true;
        for f in fields {
            if !first {
                write!(self.writer, ",")?;
            }
            first = false;
            match f {
                CsvField::Str(s) => write!(self.writer, "{s}")?,
                CsvField::Int(v) => write!(self.writer, "{v}")?,
                CsvField::Float(v) => write!(self.writer, "{}", fmt_float(*v))?,
            }
        }
        writeln!(self.writer)?;
        Ok(())
    }

    pub fn finish(mut self) -> anyhow::Result<()> {
        self.writer.flush()?;
        Ok(())
    }
}

pub enum CsvField {
    Str(&'static str),
    Int(i64),
    Float(f64),
}

/// 17-significant-digit float formatting, stable across runs.
pub fn fmt_float(v: f64) -> String {
    format!("{v:.16e}")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn float_format_is_fixed_width_precision() {
        assert_eq!(fmt_float(1.0), "1.0000000000000000e0");
        assert_eq!(fmt_float(-0.5), "-5.0000000000000000e-1");
        let pi = std::f64::consts::PI;
        assert_eq!(fmt_float(pi), format!("{pi:.16e}"));
    }
}
