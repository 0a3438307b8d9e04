//! Run configuration, read from TOML and echoed into every report.

use std::path::{Path, PathBuf};

use graphdrift::dataset::SimulationConfig;
use graphdrift::inference::{Encoding, SamplerConfig};
use graphdrift::mi::{Criterion, MiConfig, MixedMode};
use graphdrift::transition::StabilityMode;
use serde::{Deserialize, Serialize};

use crate::error::{CliError, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    /// Root seed. Required, either here or on the command line.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub input: Option<InputConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub simulation: Option<SimulationSection>,
    #[serde(default = "default_window_len")]
    pub window_len: usize,
    #[serde(default)]
    pub mi: MiSection,
    #[serde(default)]
    pub stability: StabilitySection,
    #[serde(default)]
    pub inference: InferenceSection,
    #[serde(default)]
    pub sampler: SamplerSection,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub baseline: Option<BaselineSection>,
}

fn default_window_len() -> usize {
    336
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InputConfig {
    pub path: PathBuf,
    /// Schema file (TOML or JSON) typing every column of the file, in order.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub schema: Option<PathBuf>,
    /// Header names to keep, in node order. Without a schema these are typed
    /// by `discrete`; with one they select from it.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub columns: Vec<String>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub discrete: Vec<String>,
    /// Discrete columns that must have exactly two levels.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub binary: Vec<String>,
    /// Half-open `[start, end)` row range applied before windowing.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rows: Option<[usize; 2]>,
    #[serde(default = "yes")]
    pub has_header: bool,
}

fn yes() -> bool {
    true
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimulationSection {
    #[serde(default = "default_n_per_period")]
    pub n_per_period: usize,
}

impl Default for SimulationSection {
    fn default() -> Self {
        SimulationSection {
            n_per_period: default_n_per_period(),
        }
    }
}

fn default_n_per_period() -> usize {
    5000
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MiSection {
    #[serde(default = "default_criterion")]
    pub criterion: Criterion,
    #[serde(default = "default_mixed")]
    pub mixed: MixedMode,
}

fn default_criterion() -> Criterion {
    Criterion::Aic
}

fn default_mixed() -> MixedMode {
    MixedMode::Homogeneous
}

impl Default for MiSection {
    fn default() -> Self {
        MiSection {
            criterion: default_criterion(),
            mixed: default_mixed(),
        }
    }
}

impl MiSection {
    pub fn config(&self) -> MiConfig {
        MiConfig {
            criterion: self.criterion,
            mixed_mode: self.mixed,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StabilitySection {
    #[serde(default = "default_mode")]
    pub mode: StabilityMode,
}

fn default_mode() -> StabilityMode {
    StabilityMode::Cumulative
}

impl Default for StabilitySection {
    fn default() -> Self {
        StabilitySection { mode: default_mode() }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InferenceSection {
    #[serde(default = "default_encoding")]
    pub encoding: Encoding,
    #[serde(default = "default_sigma")]
    pub prior_sigma: f64,
    #[serde(default)]
    pub prior_mu: f64,
    #[serde(default)]
    pub center_time: bool,
}

fn default_encoding() -> Encoding {
    Encoding::Canonical
}

fn default_sigma() -> f64 {
    10.0
}

impl Default for InferenceSection {
    fn default() -> Self {
        InferenceSection {
            encoding: default_encoding(),
            prior_sigma: default_sigma(),
            prior_mu: 0.0,
            center_time: false,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SamplerSection {
    #[serde(default = "default_draws")]
    pub draws: usize,
    #[serde(default = "default_burn_in")]
    pub burn_in: usize,
    #[serde(default = "default_step_scale")]
    pub step_scale: f64,
    #[serde(default = "default_adapt_rounds")]
    pub adapt_rounds: usize,
    #[serde(default = "default_adapt_len")]
    pub adapt_len: usize,
}

fn default_draws() -> usize {
    4000
}
fn default_burn_in() -> usize {
    1000
}
fn default_step_scale() -> f64 {
    1.0
}
fn default_adapt_rounds() -> usize {
    20
}
fn default_adapt_len() -> usize {
    250
}

impl Default for SamplerSection {
    fn default() -> Self {
        SamplerSection {
            draws: default_draws(),
            burn_in: default_burn_in(),
            step_scale: default_step_scale(),
            adapt_rounds: default_adapt_rounds(),
            adapt_len: default_adapt_len(),
        }
    }
}

impl SamplerSection {
    pub fn config(&self, seed: u64) -> SamplerConfig {
        SamplerConfig {
            draws: self.draws,
            burn_in: self.burn_in,
            step_scale: self.step_scale,
            seed,
            adapt_rounds: self.adapt_rounds,
            adapt_len: self.adapt_len,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BaselineSection {
    pub target: String,
}

impl RunConfig {
    /// Reads a TOML config, or the provenance block of a previous report
    /// (`.json`). Relative paths are resolved against the file's directory.
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|source| CliError::ConfigRead {
            path: path.to_path_buf(),
            source,
        })?;
        let parse_err = |message: String| CliError::ConfigParse {
            path: path.to_path_buf(),
            message,
        };
        let mut cfg: RunConfig = if path.extension().is_some_and(|e| e == "json") {
            let value: serde_json::Value =
                serde_json::from_str(&text).map_err(|e| parse_err(e.to_string()))?;
            let inner = value
                .pointer("/provenance/config")
                .cloned()
                .ok_or_else(|| parse_err("report has no provenance.config block".into()))?;
            serde_json::from_value(inner).map_err(|e| parse_err(e.to_string()))?
        } else {
            toml::from_str(&text).map_err(|e| parse_err(e.to_string()))?
        };
        let base = path.parent().unwrap_or(Path::new("."));
        if let Some(input) = cfg.input.as_mut() {
            input.path = resolve(base, &input.path);
            input.schema = input.schema.as_ref().map(|s| resolve(base, s));
        }
        Ok(cfg)
    }

    pub fn seed(&self) -> Result<u64> {
        self.seed
            .ok_or_else(|| CliError::Validation("a seed is required (config `seed` or --seed)".into()))
    }

    pub fn validate(&self) -> Result<()> {
        self.seed()?;
        if self.window_len < 2 {
            return Err(CliError::Validation(format!(
                "window_len must be >= 2, got {}",
                self.window_len
            )));
        }
        if !(self.inference.prior_sigma > 0.0 && self.inference.prior_sigma.is_finite()) {
            return Err(CliError::Validation(
                "inference.prior_sigma must be positive".into(),
            ));
        }
        if !self.inference.prior_mu.is_finite() {
            return Err(CliError::Validation("inference.prior_mu must be finite".into()));
        }
        if self.sampler.draws < SamplerConfig::MIN_DRAWS {
            return Err(CliError::Validation(format!(
                "sampler.draws must be >= {}, got {}",
                SamplerConfig::MIN_DRAWS,
                self.sampler.draws
            )));
        }
        if self.sampler.step_scale.is_nan() || self.sampler.step_scale <= 0.0 {
            return Err(CliError::Validation("sampler.step_scale must be positive".into()));
        }
        if let Some(sim) = &self.simulation {
            if sim.n_per_period < SimulationConfig::MIN_N {
                return Err(CliError::Validation(format!(
                    "simulation.n_per_period must be >= {}, got {}",
                    SimulationConfig::MIN_N,
                    sim.n_per_period
                )));
            }
        }
        if let Some(input) = &self.input {
            if let Some([a, b]) = input.rows {
                if a >= b {
                    return Err(CliError::Validation(format!("input.rows [{a}, {b}) is empty")));
                }
            }
            if input.schema.is_none() && input.columns.is_empty() {
                return Err(CliError::Validation(
                    "input needs either `schema` or `columns`".into(),
                ));
            }
            if input.schema.is_none() && !input.has_header {
                return Err(CliError::Validation(
                    "selecting columns by name requires a header row".into(),
                ));
            }
        }
        Ok(())
    }
}

fn resolve(base: &Path, p: &Path) -> PathBuf {
    if p.is_absolute() {
        p.to_path_buf()
    } else {
        base.join(p)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults() {
        let cfg: RunConfig = toml::from_str("seed = 3").unwrap();
        assert_eq!(cfg.window_len, 336);
        assert_eq!(cfg.mi.config(), MiConfig::default());
        assert_eq!(cfg.stability.mode, StabilityMode::Cumulative);
        assert_eq!(cfg.inference.encoding, Encoding::Canonical);
        assert_eq!(cfg.sampler.draws, 4000);
        cfg.validate().unwrap();
    }

    #[test]
    fn seed_is_mandatory() {
        let cfg: RunConfig = toml::from_str("window_len = 10").unwrap();
        assert!(matches!(cfg.validate(), Err(CliError::Validation(_))));
    }

    #[test]
    fn enums_parse() {
        let cfg: RunConfig = toml::from_str(
            "seed = 1\n[mi]\ncriterion = \"bic\"\nmixed = \"heterogeneous\"\n[stability]\nmode = \"consecutive\"\n[inference]\nencoding = \"full\"",
        )
        .unwrap();
        assert_eq!(cfg.mi.criterion, Criterion::Bic);
        assert_eq!(cfg.mi.mixed, MixedMode::Heterogeneous);
        assert_eq!(cfg.stability.mode, StabilityMode::Consecutive);
        assert_eq!(cfg.inference.encoding, Encoding::Full);
        assert!(toml::from_str::<RunConfig>("seed = 1\n[mi]\ncriterion = \"hqc\"").is_err());
    }
}
