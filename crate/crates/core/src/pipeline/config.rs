//! TOML pipeline configuration.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::bicm::SolverConfig;
use crate::ingest::PeriodFilter;
use crate::validation::PvalueMode;

use super::PipelineError;

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct InputPaths {
    pub tweets: PathBuf,
    pub firms: PathBuf,
    pub lexicon: PathBuf,
    #[serde(default)]
    pub wordlists: Vec<PathBuf>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default)]
pub struct NormalizationSection {
    pub relative_threshold: f64,
    pub enable_digit_strip: bool,
}

impl Default for NormalizationSection {
    fn default() -> Self {
        Self {
            relative_threshold: 0.20,
            enable_digit_strip: true,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default)]
pub struct ValidationSection {
    pub alpha: f64,
    pub mode: PvalueMode,
    /// Replace the hypothesis count (pairs with V >= 1) with a stricter,
    /// fixed denominator.
    pub hypothesis_override: Option<usize>,
}

impl Default for ValidationSection {
    fn default() -> Self {
        Self {
            alpha: 0.05,
            mode: PvalueMode::Auto,
            hypothesis_override: None,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default)]
pub struct CommunitySection {
    pub seed: u64,
}

impl Default for CommunitySection {
    fn default() -> Self {
        Self { seed: 42 }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PipelineConfig {
    pub inputs: InputPaths,
    #[serde(default)]
    pub period: PeriodFilter,
    #[serde(default)]
    pub normalization: NormalizationSection,
    #[serde(default)]
    pub solver: SolverConfig,
    #[serde(default)]
    pub validation: ValidationSection,
    #[serde(default)]
    pub communities: CommunitySection,
    /// Output directory; overridable from the CLI.
    pub output_dir: PathBuf,
}

impl PipelineConfig {
    pub fn load(path: &Path) -> Result<Self, PipelineError> {
        let text = std::fs::read_to_string(path).map_err(|e| {
            PipelineError::Config(format!("cannot read {}: {e}", path.display()))
        })?;
        let mut cfg: PipelineConfig = toml::from_str(&text)
            .map_err(|e| PipelineError::Config(format!("{}: {e}", path.display())))?;
        // paths are relative to the config file
        if let Some(base) = path.parent() {
            cfg.inputs.tweets = base.join(&cfg.inputs.tweets);
            cfg.inputs.firms = base.join(&cfg.inputs.firms);
            cfg.inputs.lexicon = base.join(&cfg.inputs.lexicon);
            cfg.inputs.wordlists = cfg
                .inputs
                .wordlists
                .iter()
                .map(|w| base.join(w))
                .collect();
            cfg.output_dir = base.join(&cfg.output_dir);
        }
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<(), PipelineError> {
        for path in [&self.inputs.tweets, &self.inputs.firms, &self.inputs.lexicon]
            .into_iter()
            .chain(self.inputs.wordlists.iter())
        {
            if !path.exists() {
                return Err(PipelineError::Config(format!(
                    "input path does not exist: {}",
                    path.display()
                )));
            }
        }
        if !(self.validation.alpha > 0.0 && self.validation.alpha < 1.0) {
            return Err(PipelineError::Config(format!(
                "alpha must be in (0, 1), got {}",
                self.validation.alpha
            )));
        }
        if self.period.start >= self.period.end {
            return Err(PipelineError::Config(format!(
                "period start {} is not before end {}",
                self.period.start, self.period.end
            )));
        }
        Ok(())
    }
}
