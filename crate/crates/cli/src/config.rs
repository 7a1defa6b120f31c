//! Experiment configuration: TOML-backed, schema-validated, with defaults
//! for every field and byte-identical serialization round trips.

use nlslab_core::profiles::{DiracTrain, ScatteringProfile};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GridConfig {
    /// Point count, power of two.
    pub n: usize,
    /// Box multiple: box length is 4π·m.
    pub m: usize,
}

impl Default for GridConfig {
    fn default() -> Self {
        Self { n: 4096, m: 4 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TrainConfig {
    /// Mode list as [j, re, im] triples.
    pub alphas: Vec<(i64, f64, f64)>,
    /// Weight exponent of the sequence norm.
    pub q: f64,
    /// Log-phase coefficient κ in θ_j = σ·κ·(|α_j|² - 2M + c)·ln t.
    pub kappa: f64,
    /// Log-phase offset c.
    pub kappa_offset: f64,
    /// Focusing sign σ = ±1.
    pub sign: f64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            alphas: vec![(0, 0.06, 0.0), (1, 0.02, 0.0)],
            q: 2.0,
            kappa: 0.5,
            kappa_offset: 0.0,
            sign: 1.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ProfileConfig {
    /// Half-integer cell p: support must sit inside (p/2, (p+1)/2).
    pub cell: i64,
    pub center: f64,
    pub width: f64,
    pub amplitude: f64,
    /// Bump exponent ν in exp(-1/(1-z²)^ν).
    pub smoothness: u32,
    /// Base frequency-quadrature node count.
    pub quad_nodes: usize,
}

impl Default for ProfileConfig {
    fn default() -> Self {
        Self {
            cell: 0,
            center: 0.25,
            width: 0.1,
            amplitude: 1.0,
            smoothness: 2,
            quad_nodes: 64,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TimesConfig {
    pub t0: f64,
    pub t_end: f64,
    /// Snapshot ratio ρ.
    pub rho: f64,
    /// Strang sub-steps per snapshot interval.
    pub substeps_per_interval: usize,
    /// Which end the initial data is matched at: "start" or "end".
    pub match_end: String,
}

impl Default for TimesConfig {
    fn default() -> Self {
        Self {
            t0: 20.0,
            t_end: 200.0,
            rho: 1.0905077326652577,
            substeps_per_interval: 64,
            match_end: "start".into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PicardSection {
    /// Time weight μ ∈ (0, 1/2) of the S-norm.
    pub mu: f64,
    /// Top derivative order s ≥ 1.
    pub s: usize,
    /// Ball radius δ used by the stability experiment.
    pub delta: f64,
    pub max_iter: usize,
    pub tol: f64,
    /// Integration horizon T = t_max_factor·t0.
    pub t_max_factor: f64,
    pub panels_per_decade: usize,
    pub nodes_per_panel: usize,
    /// Smallness ceiling on the weighted train norm.
    pub alpha_ceiling: f64,
}

impl Default for PicardSection {
    fn default() -> Self {
        Self {
            mu: 0.4,
            s: 1,
            delta: 0.01,
            max_iter: 15,
            tol: 1e-8,
            t_max_factor: 50.0,
            panels_per_decade: 4,
            nodes_per_panel: 8,
            alpha_ceiling: 0.5,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub grid: GridConfig,
    pub train: TrainConfig,
    pub profile: ProfileConfig,
    pub times: TimesConfig,
    pub picard: PicardSection,
    pub seed: u64,
    /// Boundary-mass abort threshold for monitored runs.
    pub boundary_mass_limit: f64,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            grid: GridConfig::default(),
            train: TrainConfig::default(),
            profile: ProfileConfig::default(),
            times: TimesConfig::default(),
            picard: PicardSection::default(),
            seed: 7,
            boundary_mass_limit: 1e-6,
        }
    }
}

impl ExperimentConfig {
    pub fn from_toml(text: &str) -> anyhow::Result<Self> {
        let cfg: ExperimentConfig = toml::from_str(text)?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string_pretty(self).expect("config serializes")
    }

    /// Schema validation beyond what construction enforces; returns a
    /// readable message naming the violated condition.
    pub fn validate(&self) -> anyhow::Result<()> {
        self.build_grid()
            .map_err(|e| anyhow::anyhow!("grid: {e}"))?;
        self.build_train()
            .map_err(|e| anyhow::anyhow!("train: {e}"))?;
        self.build_profile()
            .map_err(|e| anyhow::anyhow!("profile: {e}"))?;
        if self.times.t0 <= 0.0 || self.times.t_end <= self.times.t0 {
            anyhow::bail!("times: need 0 < t0 < t_end");
        }
        if self.times.rho <= 1.0 {
            anyhow::bail!("times: snapshot ratio rho must exceed 1");
        }
        if !(self.picard.mu > 0.0 && self.picard.mu < 0.5) {
            anyhow::bail!("picard: mu must lie in (0, 1/2)");
        }
        if self.picard.s < 1 {
            anyhow::bail!("picard: s must be at least 1");
        }
        if self.picard.t_max_factor < 10.0 {
            anyhow::bail!("picard: t_max_factor must be at least 10");
        }
        if self.picard.panels_per_decade < 4 {
            anyhow::bail!("picard: panels_per_decade must be at least 4");
        }
        match self.times.match_end.as_str() {
            "start" | "end" => {}
            other => anyhow::bail!("times: match_end must be 'start' or 'end', got '{other}'"),
        }
        Ok(())
    }

    pub fn build_grid(&self) -> nlslab_core::Result<nlslab_core::SpectralGrid> {
        nlslab_core::SpectralGrid::new(self.grid.n, self.grid.m)
    }

    pub fn build_train(&self) -> nlslab_core::Result<DiracTrain> {
        let alphas: Vec<(i64, Complex64)> = self
            .train
            .alphas
            .iter()
            .map(|&(j, re, im)| (j, Complex64::new(re, im)))
            .collect();
        DiracTrain::new(
            &alphas,
            self.train.q,
            self.train.kappa,
            self.train.kappa_offset,
            self.train.sign,
        )
    }

    pub fn build_profile(&self) -> nlslab_core::Result<ScatteringProfile> {
        if self.profile.amplitude == 0.0 {
            // zero profile carries no support constraints
            return Ok(ScatteringProfile::new_unchecked(
                self.profile.cell,
                self.profile.center,
                self.profile.width,
                0.0,
                self.profile.smoothness.max(1),
                self.profile.quad_nodes,
            ));
        }
        ScatteringProfile::new(
            self.profile.cell,
            self.profile.center,
            self.profile.width,
            self.profile.amplitude,
            self.profile.smoothness,
            self.profile.quad_nodes,
        )
    }

    pub fn match_end(&self) -> nlslab_core::evolution::MatchEnd {
        match self.times.match_end.as_str() {
            "end" => nlslab_core::evolution::MatchEnd::End,
            _ => nlslab_core::evolution::MatchEnd::Start,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_validate() {
        let cfg = ExperimentConfig::default();
        cfg.validate().unwrap();
        // the pinned default weighted norm is 0.1 exactly
        let train = cfg.build_train().unwrap();
        assert!((train.l2q_norm() - 0.1).abs() < 1e-15);
    }

    #[test]
    fn round_trip_is_byte_identical() {
        let cfg = ExperimentConfig::default();
        let text = cfg.to_toml();
        let parsed = ExperimentConfig::from_toml(&text).unwrap();
        assert_eq!(parsed, cfg);
        assert_eq!(parsed.to_toml(), text);
    }

    #[test]
    fn support_touching_half_integer_is_rejected_with_named_condition() {
        let mut cfg = ExperimentConfig::default();
        cfg.profile.center = 0.25;
        cfg.profile.width = 0.25; // support [0, 1/2] touches both ends
        let err = cfg.validate().unwrap_err().to_string();
        assert!(err.contains("fracu") || err.contains("cell"), "{err}");
    }

    #[test]
    fn unknown_fields_are_rejected() {
        let text = "[grid]\nn = 4096\nm = 4\nbogus = 1\n";
        assert!(ExperimentConfig::from_toml(text).is_err());
    }
}
