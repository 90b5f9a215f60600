//! TOML run configuration.

use std::fs;
use std::path::{Path, PathBuf};

use qball_core::analysis::{AnalysisOptions, GridPolicy, TREND_RATIO};
use qball_core::grid::MIN_NODES;
use qball_core::minimizer::MinimizeOptions;
use qball_core::shooting::ShootOptions;
use qball_core::{ModelParams, RadialGrid};
use serde::{Deserialize, Serialize};

use crate::error::{CliError, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub model: ModelParams,
    #[serde(default)]
    pub grid: GridConfig,
    #[serde(default)]
    pub minimize: MinimizeOptions,
    #[serde(default)]
    pub shoot: ShootOptions,
    #[serde(default)]
    pub analysis: AnalysisOptions,
    #[serde(default)]
    pub sweep: SweepConfig,
    #[serde(default)]
    pub output: OutputConfig,
}

/// Truncation radius in decay lengths and node count.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct GridConfig {
    pub rmax_sigma: f64,
    pub n: usize,
}

impl Default for GridConfig {
    fn default() -> Self {
        Self {
            rmax_sigma: 25.0,
            n: 4000,
        }
    }
}

impl From<GridConfig> for GridPolicy {
    fn from(g: GridConfig) -> Self {
        GridPolicy {
            rmax_sigma: g.rmax_sigma,
            n: g.n,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SweepConfig {
    pub g_inf: Vec<f64>,
    /// Largest accepted `Q(min g_inf) / Q(max g_inf)`.
    pub terminal_ratio: f64,
    pub workers: Option<usize>,
}

impl Default for SweepConfig {
    fn default() -> Self {
        Self {
            g_inf: Vec::new(),
            terminal_ratio: TREND_RATIO,
            workers: None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Json,
    Svg,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct OutputConfig {
    pub dir: PathBuf,
    pub formats: Vec<Format>,
}

impl Default for OutputConfig {
    fn default() -> Self {
        Self {
            dir: PathBuf::from("runs"),
            formats: vec![Format::Csv, Format::Json],
        }
    }
}

impl OutputConfig {
    pub fn wants(&self, f: Format) -> bool {
        self.formats.contains(&f)
    }
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|source| CliError::Read {
            path: path.to_path_buf(),
            source,
        })?;
        let cfg = Self::parse(&text).map_err(|message| CliError::Config {
            path: path.to_path_buf(),
            message,
        })?;
        Ok(cfg)
    }

    /// Parses and checks the option ranges. Errors name the offending key.
    pub fn parse(text: &str) -> Result<Self, String> {
        let de = toml::Deserializer::new(text);
        let cfg: RunConfig = serde_path_to_error::deserialize(de).map_err(|e| {
            let path = e.path().to_string();
            let inner = e.into_inner();
            format!("{path}: {}", inner.message())
        })?;
        cfg.check()?;
        Ok(cfg)
    }

    /// Range checks on every option block.
    pub fn check(&self) -> Result<(), String> {
        let g = &self.grid;
        if g.rmax_sigma.is_nan() || g.rmax_sigma <= 0.0 || !g.rmax_sigma.is_finite() {
            return Err(format!("grid.rmax_sigma: must be positive, got {}", g.rmax_sigma));
        }
        if g.n < MIN_NODES {
            return Err(format!("grid.n: need at least {MIN_NODES} nodes, got {}", g.n));
        }
        self.minimize.validate().map_err(|e| format!("minimize: {e}"))?;
        self.shoot.validate().map_err(|e| format!("shoot: {e}"))?;
        if let Some(k) = self.sweep.g_inf.iter().position(|v| !v.is_finite()) {
            return Err(format!("sweep.g_inf[{k}]: must be finite"));
        }
        if self.sweep.terminal_ratio.is_nan() || self.sweep.terminal_ratio <= 0.0 {
            return Err("sweep.terminal_ratio: must be positive".into());
        }
        if self.sweep.workers == Some(0) {
            return Err("sweep.workers: must be positive".into());
        }
        Ok(())
    }

    /// Grid from `grid.rmax_sigma / sigma(g_inf)`.
    pub fn radial_grid(&self) -> qball_core::Result<RadialGrid> {
        GridPolicy::from(self.grid).grid_for(&self.model)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const BASE: &str = "[model]\ne = 1.0\nm = 1.0\nh1 = 1.0\nh2 = 1.0\ng_inf = 0.3\n";

    #[test]
    fn defaults_fill_in() {
        let c = RunConfig::parse(BASE).unwrap();
        assert_eq!(c.grid, GridConfig::default());
        assert_eq!(c.minimize, MinimizeOptions::default());
        assert_eq!(c.output.formats, vec![Format::Csv, Format::Json]);
    }

    #[test]
    fn type_errors_name_the_field() {
        let err = RunConfig::parse(&BASE.replace("h2 = 1.0", "h2 = \"one\"")).unwrap_err();
        assert!(err.starts_with("model.h2"), "{err}");
        let err = RunConfig::parse(&format!("{BASE}[grid]\nn = 4\n")).unwrap_err();
        assert!(err.starts_with("grid.n"), "{err}");
    }

    #[test]
    fn unknown_keys_are_rejected() {
        let err = RunConfig::parse(&format!("{BASE}[minimize]\nmax_iter = 3\n")).unwrap_err();
        assert!(err.contains("minimize") && err.contains("max_iter"), "{err}");
    }

    #[test]
    fn round_trips_through_toml() {
        let mut c = RunConfig::parse(BASE).unwrap();
        c.sweep.g_inf = vec![0.3, 0.1];
        c.analysis.decay_window = Some((10.0, 20.0));
        assert_eq!(RunConfig::parse(&c.to_toml()).unwrap(), c);
    }
}
