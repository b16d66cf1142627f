//! Argument definitions and subcommand handlers.
//!
//! Handlers write human-readable output to the supplied writer and JSON or
//! CSV artifacts to `--output`, so they can be driven in-process by tests.

use std::io::Write;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context};
use clap::{Args, Parser, Subcommand};
use fpanel_core::mcstudy::{clt_check, run_power_study, run_size_study, StudyConfig};
use fpanel_core::simulate::{el_nino_like, estimate_generator, DEFAULT_COMPONENTS};
use fpanel_core::{run_test, FunctionalPanel, PanelGenerator, StudyResult, TestReport};
use serde::Serialize;

use crate::config::{resolve, Overrides, RunConfig};
use crate::panel_io::{ingest, write_panel};
use crate::report::{render_clt, render_study_table, render_test_table, Envelope};

pub const DEFAULT_SIM_PERIODS: usize = 120;

#[derive(Debug, Parser)]
#[command(
    name = "fpanel",
    version,
    about = "Portmanteau randomness test for panels of functional time series"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Test a panel file for serial dependence at lags 1..=H.
    Test {
        #[arg(long)]
        input: PathBuf,
        /// Write the JSON report here.
        #[arg(long)]
        output: Option<PathBuf>,
        /// Print JSON instead of the table.
        #[arg(long)]
        json: bool,
        #[command(flatten)]
        tuning: Tuning,
    },
    /// Draw one panel from a generator and write it as a panel file.
    Simulate {
        #[arg(long)]
        output: PathBuf,
        /// AR(1)-type dependence of the scores; iid when absent.
        #[arg(long, allow_hyphen_values = true)]
        rho: Option<f64>,
        #[command(flatten)]
        generator: GeneratorArgs,
        #[command(flatten)]
        tuning: Tuning,
    },
    /// Empirical size of the test under iid panels.
    Size {
        #[arg(long)]
        output: Option<PathBuf>,
        #[arg(long, value_delimiter = ',')]
        lags: Option<Vec<usize>>,
        #[command(flatten)]
        generator: GeneratorArgs,
        #[command(flatten)]
        tuning: Tuning,
    },
    /// Empirical power against AR(1)-type dependence.
    Power {
        #[arg(long, allow_hyphen_values = true)]
        rho: f64,
        #[arg(long)]
        output: Option<PathBuf>,
        #[arg(long, value_delimiter = ',')]
        lags: Option<Vec<usize>>,
        #[command(flatten)]
        generator: GeneratorArgs,
        #[command(flatten)]
        tuning: Tuning,
    },
    /// Simulate the normalized statistic under iid Gaussian scores.
    Clt {
        #[arg(long, default_value_t = 10)]
        p: usize,
        #[arg(long = "n-periods", default_value_t = 2000)]
        n: usize,
        #[arg(long)]
        output: Option<PathBuf>,
        #[command(flatten)]
        tuning: Tuning,
    },
}

#[derive(Debug, Clone, Default, Args)]
pub struct Tuning {
    /// JSON file with any subset of the run configuration.
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub h_max: Option<usize>,
    #[arg(long)]
    pub alpha: Option<f64>,
    #[arg(long)]
    pub variance_threshold: Option<f64>,
    #[arg(long)]
    pub pooled_threshold: Option<f64>,
    /// Require explained variance strictly above the threshold.
    #[arg(long)]
    pub strict_cutoff: bool,
    /// Remove a linear trend in the replicate index first.
    #[arg(long)]
    pub detrend: bool,
    /// Center the statistic with p_N instead of the pooled cutoff q.
    #[arg(long)]
    pub full_dimension_centering: bool,
    /// Base seed; FPANEL_SEED takes precedence when set.
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub replications: Option<usize>,
}

impl Tuning {
    fn overrides(&self) -> Overrides {
        Overrides {
            variance_threshold: self.variance_threshold,
            pooled_threshold: self.pooled_threshold,
            strict_cutoff: self.strict_cutoff,
            h_max: self.h_max,
            alpha: self.alpha,
            detrend: self.detrend,
            full_dimension_centering: self.full_dimension_centering,
            seed: self.seed,
            replications: self.replications,
        }
    }

    pub fn resolve(&self, env_seed: Option<&str>) -> anyhow::Result<RunConfig> {
        resolve(self.config.as_deref(), &self.overrides(), env_seed)
    }
}

#[derive(Debug, Clone, Default, Args)]
pub struct GeneratorArgs {
    /// Generator JSON file; the built-in El Nino-like design when absent.
    #[arg(long, conflicts_with = "estimate_from")]
    pub generator: Option<PathBuf>,
    /// Estimate the generator from this panel file instead.
    #[arg(long)]
    pub estimate_from: Option<PathBuf>,
    /// Components kept when estimating.
    #[arg(long, default_value_t = DEFAULT_COMPONENTS)]
    pub components: usize,
    /// Panel length N of the generated panels.
    #[arg(long)]
    pub n_periods: Option<usize>,
    /// Save the generator actually used as JSON.
    #[arg(long)]
    pub save_generator: Option<PathBuf>,
}

impl GeneratorArgs {
    pub fn build(&self) -> anyhow::Result<PanelGenerator> {
        let gen = if let Some(path) = &self.generator {
            let text = std::fs::read_to_string(path)
                .with_context(|| format!("reading generator {}", path.display()))?;
            serde_json::from_str(&text)
                .with_context(|| format!("parsing generator {}", path.display()))?
        } else if let Some(path) = &self.estimate_from {
            let panel = ingest(path)?;
            let k = self
                .components
                .min(panel.n_replicates().min(panel.grid().len()));
            estimate_generator(&panel, k)?
        } else {
            el_nino_like(DEFAULT_SIM_PERIODS)?
        };
        let gen = match self.n_periods {
            Some(n) => gen.with_n(n)?,
            None => gen,
        };
        if let Some(path) = &self.save_generator {
            std::fs::write(path, serde_json::to_string_pretty(&gen)?)
                .with_context(|| format!("writing generator {}", path.display()))?;
        }
        Ok(gen)
    }
}

pub fn cmd_test(input: &Path, cfg: &RunConfig) -> anyhow::Result<TestReport> {
    let panel = ingest(input)?;
    Ok(run_test(&panel, &cfg.test)?)
}

pub fn cmd_simulate(
    gen: &PanelGenerator,
    rho: Option<f64>,
    seed: u64,
) -> anyhow::Result<FunctionalPanel> {
    match rho {
        None => Ok(gen.generate_h0_panel(seed)),
        Some(r) => Ok(gen.generate_ar_panel(r, seed)?),
    }
}

fn study_config(cfg: &RunConfig, lags: Option<&[usize]>) -> StudyConfig {
    let lags = match lags {
        Some(l) => l.to_vec(),
        None => (1..=cfg.test.h_max).collect(),
    };
    let mut sc = StudyConfig::new(cfg.replications, lags, cfg.test.alpha, cfg.seed);
    sc.test = cfg.test.clone();
    sc
}

pub fn cmd_size(
    gen: &PanelGenerator,
    cfg: &RunConfig,
    lags: Option<&[usize]>,
) -> anyhow::Result<StudyResult> {
    Ok(run_size_study(gen, &study_config(cfg, lags))?)
}

pub fn cmd_power(
    gen: &PanelGenerator,
    rho: f64,
    cfg: &RunConfig,
    lags: Option<&[usize]>,
) -> anyhow::Result<StudyResult> {
    Ok(run_power_study(gen, rho, &study_config(cfg, lags))?)
}

#[derive(Debug, Serialize)]
struct StudyEcho<'a> {
    #[serde(flatten)]
    run: &'a RunConfig,
    lags: Vec<usize>,
}

fn write_study(
    path: &Path,
    command: &str,
    cfg: &RunConfig,
    result: &StudyResult,
) -> anyhow::Result<()> {
    let body = if path
        .extension()
        .is_some_and(|e| e.eq_ignore_ascii_case("json"))
    {
        let echo = StudyEcho {
            run: cfg,
            lags: result.rows.iter().map(|r| r.h).collect(),
        };
        Envelope::new(command, echo, result).to_json()
    } else {
        result.to_csv()
    };
    std::fs::write(path, body).with_context(|| format!("writing {}", path.display()))
}

/// Runs a parsed command. `env_seed` is the raw `FPANEL_SEED` value.
pub fn run(cli: Cli, env_seed: Option<&str>, out: &mut dyn Write) -> anyhow::Result<()> {
    match cli.command {
        Command::Test {
            input,
            output,
            json,
            tuning,
        } => {
            let cfg = tuning.resolve(env_seed)?;
            let report = cmd_test(&input, &cfg)?;
            let doc = Envelope::new("test", &cfg, &report).to_json();
            if let Some(path) = &output {
                std::fs::write(path, &doc)
                    .with_context(|| format!("writing {}", path.display()))?;
            }
            if json {
                out.write_all(doc.as_bytes())?;
            } else {
                out.write_all(render_test_table(&report).as_bytes())?;
            }
        }
        Command::Simulate {
            output,
            rho,
            generator,
            tuning,
        } => {
            let cfg = tuning.resolve(env_seed)?;
            let gen = generator.build()?;
            let panel = cmd_simulate(&gen, rho, cfg.seed)?;
            write_panel(&panel, &output)?;
            writeln!(
                out,
                "wrote {} series x {} replicates x {} grid points to {}",
                panel.n_series(),
                panel.n_replicates(),
                panel.grid().len(),
                output.display()
            )?;
        }
        Command::Size {
            output,
            lags,
            generator,
            tuning,
        } => {
            let cfg = tuning.resolve(env_seed)?;
            let gen = generator.build()?;
            let result = cmd_size(&gen, &cfg, lags.as_deref())?;
            if let Some(path) = &output {
                write_study(path, "size", &cfg, &result)?;
            }
            out.write_all(render_study_table(&result).as_bytes())?;
        }
        Command::Power {
            rho,
            output,
            lags,
            generator,
            tuning,
        } => {
            let cfg = tuning.resolve(env_seed)?;
            let gen = generator.build()?;
            let result = cmd_power(&gen, rho, &cfg, lags.as_deref())?;
            if let Some(path) = &output {
                write_study(path, "power", &cfg, &result)?;
            }
            out.write_all(render_study_table(&result).as_bytes())?;
        }
        Command::Clt {
            p,
            n,
            output,
            tuning,
        } => {
            let cfg = tuning.resolve(env_seed)?;
            if tuning.h_max.is_none() && tuning.config.is_none() {
                bail!("clt needs --h-max (or a config file setting h_max)");
            }
            let summary = clt_check(p, n, cfg.test.h_max, cfg.replications, cfg.seed)?;
            if let Some(path) = &output {
                let doc = Envelope::new("clt", &cfg, &summary).to_json();
                std::fs::write(path, doc).with_context(|| format!("writing {}", path.display()))?;
            }
            out.write_all(render_clt(&summary).as_bytes())?;
        }
    }
    Ok(())
}
