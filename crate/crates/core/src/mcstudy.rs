//! Size and power studies with exact binomial bands, and a direct Monte Carlo
//! check of the normal limit of the lagged Kronecker quadratic form.
//!
//! Replication `r` of a study with seed `s` draws from stream
//! [`RngKey::new(s, r)`](RngKey), so results do not depend on how rayon
//! schedules replications. Aggregation walks replications in index order.

use nalgebra::DMatrix;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, Normal};
use statrs::function::beta::beta_reg;

use crate::error::{Error, Result};
use crate::portmanteau::{run_test, TestConfig};
use crate::rng::{NormalStream, RngKey};
use crate::simulate::PanelGenerator;

/// Desk-scale default number of replications.
pub const DEFAULT_REPLICATIONS: usize = 200;

const QUANTILE_TOL: f64 = 1e-12;

/// Solves `I_x(a, b) = p` for `x` by bisection on `[0, 1]`.
fn beta_quantile(p: f64, a: f64, b: f64) -> f64 {
    let (mut lo, mut hi) = (0.0f64, 1.0f64);
    while hi - lo > QUANTILE_TOL {
        let mid = 0.5 * (lo + hi);
        if beta_reg(a, b, mid) < p {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// Exact (Clopper–Pearson) two-sided interval for a binomial proportion.
///
/// `lo` is the `(1 - level)/2` quantile of `Beta(x, n - x + 1)` and `hi` the
/// `(1 + level)/2` quantile of `Beta(x + 1, n - x)`, with `lo = 0` when
/// `x = 0` and `hi = 1` when `x = n`.
pub fn clopper_pearson(successes: u64, trials: u64, level: f64) -> Result<(f64, f64)> {
    if trials == 0 {
        return Err(Error::InvalidParameter("trials must be at least 1".into()));
    }
    if successes > trials {
        return Err(Error::InvalidParameter(format!(
            "successes ({successes}) exceed trials ({trials})"
        )));
    }
    if !(level > 0.0 && level < 1.0) {
        return Err(Error::InvalidParameter(format!(
            "level must lie in (0, 1), got {level}"
        )));
    }
    let tail = 0.5 * (1.0 - level);
    let (x, n) = (successes as f64, trials as f64);
    let lo = if successes == 0 {
        0.0
    } else {
        beta_quantile(tail, x, n - x + 1.0)
    };
    let hi = if successes == trials {
        1.0
    } else {
        beta_quantile(1.0 - tail, x + 1.0, n - x)
    };
    Ok((lo, hi))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StudyRow {
    pub h: usize,
    pub rejections: u64,
    pub trials: u64,
    pub frequency: f64,
    pub lo: f64,
    pub hi: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Scenario {
    pub kind: StudyKind,
    pub n_series: usize,
    pub n: usize,
    pub rho: f64,
    pub alpha: f64,
    pub seed: u64,
    pub replications: usize,
    pub level: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StudyKind {
    Size,
    Power,
}

/// Rejection frequencies per lag with Clopper–Pearson bands.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StudyResult {
    pub scenario: Scenario,
    pub rows: Vec<StudyRow>,
}

impl StudyResult {
    pub fn row(&self, h: usize) -> Option<&StudyRow> {
        self.rows.iter().find(|r| r.h == h)
    }

    /// CSV with header `H,frequency,lo,hi,rejections,trials`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("H,frequency,lo,hi,rejections,trials\n");
        for r in &self.rows {
            out.push_str(&format!(
                "{},{:.3},{:.3},{:.3},{},{}\n",
                r.h, r.frequency, r.lo, r.hi, r.rejections, r.trials
            ));
        }
        out
    }
}

/// Parameters shared by size and power studies.
#[derive(Debug, Clone, PartialEq)]
pub struct StudyConfig {
    pub replications: usize,
    pub lags: Vec<usize>,
    pub alpha: f64,
    pub seed: u64,
    /// Confidence level of the Clopper–Pearson bands.
    pub level: f64,
    /// Test settings; `alpha` and `h_max` are overridden per study.
    pub test: TestConfig,
}

impl StudyConfig {
    pub fn new(replications: usize, lags: Vec<usize>, alpha: f64, seed: u64) -> Self {
        Self {
            replications,
            lags,
            alpha,
            seed,
            level: 0.95,
            test: TestConfig::default(),
        }
    }

    fn validate(&self) -> Result<TestConfig> {
        if self.replications == 0 {
            return Err(Error::InvalidParameter(
                "replications must be at least 1".into(),
            ));
        }
        if self.lags.is_empty() || self.lags.contains(&0) {
            return Err(Error::InvalidParameter(
                "lags must be a nonempty list of positive integers".into(),
            ));
        }
        let mut test = self.test.clone();
        test.alpha = self.alpha;
        test.h_max = *self.lags.iter().max().expect("nonempty");
        test.validate()?;
        Ok(test)
    }
}

fn run_study(gen: &PanelGenerator, cfg: &StudyConfig, rho: Option<f64>) -> Result<StudyResult> {
    let test = cfg.validate()?;
    if let Some(r) = rho {
        crate::simulate::ar_factor(r, 1)?;
    }
    let verdicts: Vec<Vec<bool>> = (0..cfg.replications as u64)
        .into_par_iter()
        .map(|rep| {
            let key = RngKey::new(cfg.seed, rep);
            let panel = match rho {
                None => gen.generate_h0_panel(key),
                Some(r) => gen.generate_ar_panel(r, key)?,
            };
            let report = run_test(&panel, &test)?;
            Ok(cfg
                .lags
                .iter()
                .map(|&h| report.row(h).expect("h <= h_max").reject)
                .collect())
        })
        .collect::<Result<_>>()?;
    let trials = cfg.replications as u64;
    let rows = cfg
        .lags
        .iter()
        .enumerate()
        .map(|(col, &h)| {
            let rejections = verdicts.iter().filter(|v| v[col]).count() as u64;
            let (lo, hi) = clopper_pearson(rejections, trials, cfg.level)?;
            Ok(StudyRow {
                h,
                rejections,
                trials,
                frequency: rejections as f64 / trials as f64,
                lo,
                hi,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(StudyResult {
        scenario: Scenario {
            kind: if rho.is_some() {
                StudyKind::Power
            } else {
                StudyKind::Size
            },
            n_series: gen.n_series(),
            n: gen.n(),
            rho: rho.unwrap_or(0.0),
            alpha: cfg.alpha,
            seed: cfg.seed,
            replications: cfg.replications,
            level: cfg.level,
        },
        rows,
    })
}

/// Rejection frequencies of the test on iid panels from `gen`.
pub fn run_size_study(gen: &PanelGenerator, cfg: &StudyConfig) -> Result<StudyResult> {
    run_study(gen, cfg, None)
}

/// Rejection frequencies on the autocorrelated siblings with level `rho`.
/// Replication `r` uses the same draws as replication `r` of the size study
/// with the same seed.
pub fn run_power_study(gen: &PanelGenerator, rho: f64, cfg: &StudyConfig) -> Result<StudyResult> {
    run_study(gen, cfg, Some(rho))
}

/// Distribution of the normalized statistic across replications.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CltSummary {
    pub p: usize,
    pub n: usize,
    pub h: usize,
    pub replications: usize,
    pub mean: f64,
    /// Sample standard deviation; absent for a single replication.
    pub sd: Option<f64>,
    /// Kolmogorov–Smirnov distance to N(0, 1); absent for a single replication.
    pub ks_distance: Option<f64>,
    /// Set when fewer than 100 replications were run.
    pub underpowered: bool,
    pub values: Vec<f64>,
}

/// `(N^-1 Σ_h |Σ_{n>h} Z_{n-h} ⊗ Z_n|² - p² H) / (p sqrt(2H))` for one
/// sample of `N` iid `N(0, I_p)` vectors, without any estimation.
pub fn clt_statistic(z: &DMatrix<f64>, h_max: usize) -> f64 {
    let (n, p) = z.shape();
    let mut total = 0.0;
    for h in 1..=h_max {
        // |Σ_n a_n ⊗ b_n|² = ‖Σ_n b_n a_nᵀ‖²_F
        let lead = z.rows(h, n - h);
        let lagged = z.rows(0, n - h);
        total += (lead.transpose() * lagged).norm_squared();
    }
    let pf = p as f64;
    let hf = h_max as f64;
    (total / n as f64 - pf * pf * hf) / (pf * (2.0 * hf).sqrt())
}

pub fn clt_check(
    p: usize,
    n: usize,
    h: usize,
    replications: usize,
    seed: u64,
) -> Result<CltSummary> {
    if p == 0 || h == 0 || replications == 0 {
        return Err(Error::InvalidParameter(
            "p, H and replications must be at least 1".into(),
        ));
    }
    if n <= h {
        return Err(Error::InsufficientData {
            needed: h + 1,
            got: n,
            context: "sample length for the CLT check",
        });
    }
    let values: Vec<f64> = (0..replications as u64)
        .into_par_iter()
        .map(|rep| {
            let mut stream = NormalStream::new(RngKey::new(seed, rep));
            let mut z = DMatrix::zeros(n, p);
            for r in 0..n {
                for c in 0..p {
                    z[(r, c)] = stream.standard_normal();
                }
            }
            clt_statistic(&z, h)
        })
        .collect();
    let r = values.len() as f64;
    let mean = values.iter().sum::<f64>() / r;
    let (sd, ks_distance) = if values.len() >= 2 {
        let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (r - 1.0);
        (Some(var.sqrt()), Some(ks_distance_normal(&values)))
    } else {
        (None, None)
    };
    Ok(CltSummary {
        p,
        n,
        h,
        replications,
        mean,
        sd,
        ks_distance,
        underpowered: replications < 100,
        values,
    })
}

/// `sup_x |F_R(x) - Φ(x)|` for the empirical CDF of `values`.
pub fn ks_distance_normal(values: &[f64]) -> f64 {
    let mut sorted = values.to_vec();
    sorted.sort_by(f64::total_cmp);
    let std = Normal::standard();
    let r = sorted.len() as f64;
    sorted
        .iter()
        .enumerate()
        .map(|(i, &x)| {
            let f = std.cdf(x);
            ((i + 1) as f64 / r - f).max(f - i as f64 / r)
        })
        .fold(0.0, f64::max)
}
