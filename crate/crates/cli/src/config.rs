//! Run configuration: test settings plus Monte Carlo controls.
//!
//! Values are layered: built-in defaults, then a JSON file, then command-line
//! flags, then the `FPANEL_SEED` environment variable for the seed.

use std::path::Path;

use anyhow::{bail, Context};
use fpanel_core::mcstudy::DEFAULT_REPLICATIONS;
use fpanel_core::{Centering, TestConfig};
use serde::{Deserialize, Serialize};

pub const SEED_ENV: &str = "FPANEL_SEED";
pub const DEFAULT_SEED: u64 = 20_240_601;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct RunConfig {
    #[serde(flatten)]
    pub test: TestConfig,
    pub seed: u64,
    pub replications: usize,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            test: TestConfig::default(),
            seed: DEFAULT_SEED,
            replications: DEFAULT_REPLICATIONS,
        }
    }
}

impl RunConfig {
    pub fn from_json_file(path: impl AsRef<Path>) -> anyhow::Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path)
            .with_context(|| format!("reading config {}", path.display()))?;
        serde_json::from_str(&text).with_context(|| format!("parsing config {}", path.display()))
    }

    pub fn validate(&self) -> anyhow::Result<()> {
        self.test.validate()?;
        if self.replications == 0 {
            bail!("replications must be at least 1");
        }
        Ok(())
    }
}

/// Command-line overrides; `None` leaves the underlying value alone.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Overrides {
    pub variance_threshold: Option<f64>,
    pub pooled_threshold: Option<f64>,
    pub strict_cutoff: bool,
    pub h_max: Option<usize>,
    pub alpha: Option<f64>,
    pub detrend: bool,
    pub full_dimension_centering: bool,
    pub seed: Option<u64>,
    pub replications: Option<usize>,
}

impl Overrides {
    pub fn apply(&self, cfg: &mut RunConfig) {
        if let Some(v) = self.variance_threshold {
            cfg.test.variance_threshold = v;
        }
        if let Some(v) = self.pooled_threshold {
            cfg.test.pooled_threshold = v;
        }
        if self.strict_cutoff {
            cfg.test.strict_cutoff = true;
        }
        if let Some(v) = self.h_max {
            cfg.test.h_max = v;
        }
        if let Some(v) = self.alpha {
            cfg.test.alpha = v;
        }
        if self.detrend {
            cfg.test.detrend = true;
        }
        if self.full_dimension_centering {
            cfg.test.centering = Centering::FullDimension;
        }
        if let Some(v) = self.seed {
            cfg.seed = v;
        }
        if let Some(v) = self.replications {
            cfg.replications = v;
        }
    }
}

/// Builds the effective configuration. `env_seed` is the raw value of
/// `FPANEL_SEED`, if set.
pub fn resolve(
    config_file: Option<&Path>,
    overrides: &Overrides,
    env_seed: Option<&str>,
) -> anyhow::Result<RunConfig> {
    let mut cfg = match config_file {
        Some(path) => RunConfig::from_json_file(path)?,
        None => RunConfig::default(),
    };
    overrides.apply(&mut cfg);
    if let Some(raw) = env_seed {
        cfg.seed = raw
            .trim()
            .parse()
            .with_context(|| format!("{SEED_ENV} must be an unsigned integer, got `{raw}`"))?;
    }
    cfg.validate()?;
    Ok(cfg)
}
