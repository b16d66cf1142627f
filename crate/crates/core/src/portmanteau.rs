//! The pooled-score portmanteau statistic.
//!
//! With `X_n` the stacked score vector of all series at time `n`,
//!
//! ```text
//! V_h = N^-1 sum_{n=1}^{N-h} X_n ⊗ X_{n+h},    C_0 = N^-1 sum_n X_n X_n^T,
//! Q_N = N sum_{h=1}^{H} V_h^T (C_0^- ⊗ C_0^-) V_h,
//! ```
//!
//! where `C_0^-` inverts only the leading `q` eigendirections of `C_0`. The
//! fast path uses `vec(M_h) = V_h` with `M_h = N^-1 X_{+h}^T X_{-h}` and
//! `V^T (A ⊗ A) V = <M, A^T M A>_F`, which never forms a `p_N² x p_N²` matrix.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, Normal};

use crate::error::{Error, Result};
use crate::fpca::{
    fit_panel, select_num_components, FpcaModel, Selection, DEFAULT_VARIANCE_THRESHOLD,
};
use crate::linalg::sorted_symmetric_eigen;
use crate::panel::{center_panel, linear_detrend, FunctionalPanel};

/// Largest `p_N` accepted by [`statistic_kron`].
pub const KRONECKER_LIMIT: usize = 64;

/// Pooled `N x p_N` score matrix; columns are per-series blocks in series order.
#[derive(Debug, Clone, PartialEq)]
pub struct ScoreMatrix {
    data: DMatrix<f64>,
    block_sizes: Vec<usize>,
}

impl ScoreMatrix {
    pub fn new(data: DMatrix<f64>, block_sizes: Vec<usize>) -> Result<Self> {
        let p_n: usize = block_sizes.iter().sum();
        if p_n != data.ncols() {
            return Err(Error::DimensionMismatch {
                expected: p_n,
                got: data.ncols(),
                context: "score columns vs block sizes",
            });
        }
        if data.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("scores"));
        }
        Ok(Self { data, block_sizes })
    }

    /// One block with all columns.
    pub fn single_block(data: DMatrix<f64>) -> Result<Self> {
        let p = data.ncols();
        Self::new(data, vec![p])
    }

    pub fn from_models(models: &[FpcaModel]) -> Result<Self> {
        let n = models
            .first()
            .map(|m| m.scores().nrows())
            .ok_or(Error::EmptyInput("no FPCA models"))?;
        let block_sizes: Vec<usize> = models.iter().map(|m| m.p()).collect();
        let p_n = block_sizes.iter().sum();
        let mut data = DMatrix::zeros(n, p_n);
        let mut col = 0;
        for m in models {
            if m.scores().nrows() != n {
                return Err(Error::DimensionMismatch {
                    expected: n,
                    got: m.scores().nrows(),
                    context: "score rows across series",
                });
            }
            data.columns_mut(col, m.p()).copy_from(m.scores());
            col += m.p();
        }
        Self::new(data, block_sizes)
    }

    pub fn data(&self) -> &DMatrix<f64> {
        &self.data
    }

    pub fn block_sizes(&self) -> &[usize] {
        &self.block_sizes
    }

    /// Number of time points `N`.
    pub fn n(&self) -> usize {
        self.data.nrows()
    }

    /// Pooled dimension `p_N`.
    pub fn p_n(&self) -> usize {
        self.data.ncols()
    }
}

/// `C_0 = N^-1 X^T X` with its spectrum, cutoff `q` and generalized inverse.
#[derive(Debug, Clone)]
pub struct PooledCovariance {
    c0: DMatrix<f64>,
    eigenvalues: DVector<f64>,
    eigenvectors: DMatrix<f64>,
    q: usize,
    cinv: DMatrix<f64>,
}

impl PooledCovariance {
    pub fn c0(&self) -> &DMatrix<f64> {
        &self.c0
    }

    /// Descending, clamped at zero.
    pub fn eigenvalues(&self) -> &DVector<f64> {
        &self.eigenvalues
    }

    pub fn eigenvectors(&self) -> &DMatrix<f64> {
        &self.eigenvectors
    }

    /// Number of retained eigendirections.
    pub fn q(&self) -> usize {
        self.q
    }

    pub fn generalized_inverse(&self) -> &DMatrix<f64> {
        &self.cinv
    }
}

/// Pooled covariance with the default 85% cutoff.
pub fn pooled_covariance(scores: &ScoreMatrix) -> Result<PooledCovariance> {
    pooled_covariance_with(scores, DEFAULT_VARIANCE_THRESHOLD, false)
}

pub fn pooled_covariance_with(
    scores: &ScoreMatrix,
    threshold: f64,
    strict: bool,
) -> Result<PooledCovariance> {
    let n = scores.n();
    if n < 2 {
        return Err(Error::InsufficientData {
            needed: 2,
            got: n,
            context: "time points for pooled covariance",
        });
    }
    if scores.p_n() == 0 {
        return Err(Error::EmptyInput("score matrix has no columns"));
    }
    let x = scores.data();
    let c0 = x.transpose() * x / n as f64;
    let eig = sorted_symmetric_eigen(&c0);
    let eigenvalues = eig.values.map(|d| d.max(0.0));
    if eigenvalues.iter().all(|&d| d == 0.0) {
        return Err(Error::Degenerate("pooled score covariance is zero".into()));
    }
    let q = select_num_components(eigenvalues.as_slice(), threshold, strict)?;
    let inv_d = DVector::from_fn(eigenvalues.len(), |i, _| {
        if i < q {
            1.0 / eigenvalues[i]
        } else {
            0.0
        }
    });
    let u = &eig.vectors;
    let cinv = u * DMatrix::from_diagonal(&inv_d) * u.transpose();
    Ok(PooledCovariance {
        c0,
        eigenvalues,
        eigenvectors: eig.vectors,
        q,
        cinv,
    })
}

fn check_lag(h: usize, n: usize) -> Result<()> {
    if h == 0 || h >= n {
        return Err(Error::LagOutOfRange { lag: h, n });
    }
    Ok(())
}

/// `M_h[a, b] = N^-1 sum_{n=1}^{N-h} X[n+h, a] X[n, b]`, so that `vec(M_h)`
/// (column-major) equals `V_h`. The divisor is `N` for every lag.
pub fn lag_cross_cov(scores: &ScoreMatrix, h: usize) -> Result<DMatrix<f64>> {
    let n = scores.n();
    check_lag(h, n)?;
    let x = scores.data();
    let lead = x.rows(h, n - h);
    let lagged = x.rows(0, n - h);
    Ok(lead.transpose() * lagged / n as f64)
}

/// `V_h = N^-1 sum_n X_n ⊗ X_{n+h}` as a vector of length `p_N²`.
pub fn lag_kronecker_vector(scores: &ScoreMatrix, h: usize) -> Result<DVector<f64>> {
    let n = scores.n();
    check_lag(h, n)?;
    let p = scores.p_n();
    let x = scores.data();
    let mut v = DVector::zeros(p * p);
    for t in 0..n - h {
        let now = x.row(t);
        let later = x.row(t + h);
        v += now.transpose().kronecker(&later.transpose());
    }
    Ok(v / n as f64)
}

fn check_h(h_max: usize, n: usize) -> Result<()> {
    if h_max == 0 {
        return Err(Error::InvalidParameter("H must be at least 1".into()));
    }
    check_lag(h_max, n)
}

/// Reference path: forms `C_0^- ⊗ C_0^-` explicitly.
pub fn statistic_kron(
    scores: &ScoreMatrix,
    pooled: &PooledCovariance,
    h_max: usize,
) -> Result<f64> {
    statistic_kron_with_limit(scores, pooled, h_max, KRONECKER_LIMIT)
}

pub fn statistic_kron_with_limit(
    scores: &ScoreMatrix,
    pooled: &PooledCovariance,
    h_max: usize,
    limit: usize,
) -> Result<f64> {
    let p_n = scores.p_n();
    if p_n > limit {
        return Err(Error::KroneckerTooLarge { p_n, limit });
    }
    check_pooled(scores, pooled)?;
    check_h(h_max, scores.n())?;
    let cinv = pooled.generalized_inverse();
    let big = cinv.kronecker(cinv);
    let mut q = 0.0;
    for h in 1..=h_max {
        let v = lag_kronecker_vector(scores, h)?;
        q += v.dot(&(&big * &v));
    }
    Ok((scores.n() as f64 * q).max(0.0))
}

/// `<M, A^T M A>_F` for one lag.
fn lag_term(m: &DMatrix<f64>, cinv: &DMatrix<f64>) -> f64 {
    let sandwich = cinv.transpose() * m * cinv;
    m.dot(&sandwich)
}

/// Production path in `O(H p_N³)` time and `O(p_N²)` memory.
pub fn statistic_fast(
    scores: &ScoreMatrix,
    pooled: &PooledCovariance,
    h_max: usize,
) -> Result<f64> {
    Ok(*cumulative_statistics(scores, pooled, h_max)?
        .last()
        .expect("h_max >= 1"))
}

/// `Q_N` for `H = 1..=h_max`, sharing the lag terms.
pub fn cumulative_statistics(
    scores: &ScoreMatrix,
    pooled: &PooledCovariance,
    h_max: usize,
) -> Result<Vec<f64>> {
    check_pooled(scores, pooled)?;
    check_h(h_max, scores.n())?;
    let n = scores.n() as f64;
    let cinv = pooled.generalized_inverse();
    let mut acc = 0.0;
    let mut out = Vec::with_capacity(h_max);
    for h in 1..=h_max {
        let m = lag_cross_cov(scores, h)?;
        acc += lag_term(&m, cinv);
        out.push((n * acc).max(0.0));
    }
    Ok(out)
}

fn check_pooled(scores: &ScoreMatrix, pooled: &PooledCovariance) -> Result<()> {
    if pooled.c0.nrows() != scores.p_n() {
        return Err(Error::DimensionMismatch {
            expected: scores.p_n(),
            got: pooled.c0.nrows(),
            context: "pooled covariance vs scores",
        });
    }
    Ok(())
}

/// Normalized statistic and its one-sided verdict.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Normalized {
    pub z: f64,
    pub p_value: f64,
    pub reject: bool,
    /// `Φ^-1(1 - α)`.
    pub critical_value: f64,
}

/// Centers `Q_N` by `d² H c` and scales by `d sqrt(2 H c)` with
/// `c = 1 - (H + 1) / (2N)`, where `d` is the retained dimension. Rejects
/// when `z > Φ^-1(1 - α)`.
pub fn normalize_and_pvalue(
    q_stat: f64,
    dim: usize,
    h: usize,
    n: usize,
    alpha: f64,
) -> Result<Normalized> {
    if dim == 0 || h == 0 {
        return Err(Error::InvalidParameter(
            "dimension and H must be at least 1".into(),
        ));
    }
    if n <= h + 1 {
        return Err(Error::InsufficientData {
            needed: h + 2,
            got: n,
            context: "time points for normalization (N > H + 1)",
        });
    }
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::InvalidParameter(format!(
            "alpha must lie in (0, 1), got {alpha}"
        )));
    }
    let d = dim as f64;
    let hf = h as f64;
    let c = 1.0 - (hf + 1.0) / (2.0 * n as f64);
    let z = (q_stat - d * d * hf * c) / (d * (2.0 * hf * c).sqrt());
    let std = Normal::standard();
    let critical_value = std.inverse_cdf(1.0 - alpha);
    Ok(Normalized {
        z,
        p_value: std.sf(z),
        reject: z > critical_value,
        critical_value,
    })
}

/// Which dimension centers and scales `Q_N`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Centering {
    /// The pooled cutoff `q` (finite-sample rule).
    #[default]
    Cutoff,
    /// The full pooled dimension `p_N` (asymptotic form).
    FullDimension,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct TestConfig {
    pub variance_threshold: f64,
    pub pooled_threshold: f64,
    pub strict_cutoff: bool,
    pub h_max: usize,
    pub alpha: f64,
    pub detrend: bool,
    pub centering: Centering,
}

impl Default for TestConfig {
    fn default() -> Self {
        Self {
            variance_threshold: DEFAULT_VARIANCE_THRESHOLD,
            pooled_threshold: DEFAULT_VARIANCE_THRESHOLD,
            strict_cutoff: false,
            h_max: 10,
            alpha: 0.05,
            detrend: false,
            centering: Centering::Cutoff,
        }
    }
}

impl TestConfig {
    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("variance_threshold", self.variance_threshold),
            ("pooled_threshold", self.pooled_threshold),
            ("alpha", self.alpha),
        ] {
            if !(v > 0.0 && v < 1.0) {
                return Err(Error::InvalidParameter(format!(
                    "{name} must lie in (0, 1), got {v}"
                )));
            }
        }
        if self.h_max == 0 {
            return Err(Error::InvalidParameter("h_max must be at least 1".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LagResult {
    pub h: usize,
    pub statistic: f64,
    pub normalized: f64,
    pub p_value: f64,
    pub reject: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TestReport {
    pub n: usize,
    pub n_series: usize,
    pub p_per_series: Vec<usize>,
    pub p_n: usize,
    pub q: usize,
    pub alpha: f64,
    pub critical_value: f64,
    pub centering: Centering,
    pub detrended: bool,
    pub rows: Vec<LagResult>,
}

impl TestReport {
    pub fn row(&self, h: usize) -> Option<&LagResult> {
        self.rows.iter().find(|r| r.h == h)
    }
}

/// Runs the full procedure for every `H` in `1..=config.h_max`.
///
/// Optional detrending, centering, per-series FPCA, pooled covariance and
/// cutoff are computed once and shared across lags.
pub fn run_test(panel: &FunctionalPanel, config: &TestConfig) -> Result<TestReport> {
    config.validate()?;
    let n = panel.n_replicates();
    if n <= config.h_max + 1 {
        return Err(Error::InsufficientData {
            needed: config.h_max + 2,
            got: n,
            context: "replicates for the requested H (N > H + 1)",
        });
    }
    let prepared = if config.detrend {
        linear_detrend(panel)?
    } else {
        panel.clone()
    };
    let (centered, _) = center_panel(&prepared);
    let models = fit_panel(
        &centered,
        Selection::Threshold {
            threshold: config.variance_threshold,
            strict: config.strict_cutoff,
        },
    )?;
    let scores = ScoreMatrix::from_models(&models)?;
    let pooled = pooled_covariance_with(&scores, config.pooled_threshold, config.strict_cutoff)?;
    let stats = cumulative_statistics(&scores, &pooled, config.h_max)?;
    let dim = match config.centering {
        Centering::Cutoff => pooled.q(),
        Centering::FullDimension => scores.p_n(),
    };
    let mut rows = Vec::with_capacity(config.h_max);
    let mut critical_value = f64::NAN;
    for (k, &q_stat) in stats.iter().enumerate() {
        let h = k + 1;
        let norm = normalize_and_pvalue(q_stat, dim, h, n, config.alpha)?;
        critical_value = norm.critical_value;
        rows.push(LagResult {
            h,
            statistic: q_stat,
            normalized: norm.z,
            p_value: norm.p_value,
            reject: norm.reject,
        });
    }
    Ok(TestReport {
        n,
        n_series: panel.n_series(),
        p_per_series: models.iter().map(|m| m.p()).collect(),
        p_n: scores.p_n(),
        q: pooled.q(),
        alpha: config.alpha,
        critical_value,
        centering: config.centering,
        detrended: config.detrend,
        rows,
    })
}
