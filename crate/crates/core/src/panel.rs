//! Functional panels on a shared grid of `[0, 1]`.
//!
//! Curves are stored raw as grid samples. The L² inner product is
//! discretized with trapezoid weights on the observed (possibly non-uniform)
//! grid, so `<f, g> = sum_t w_t f(t) g(t)`.

use std::sync::Arc;

use nalgebra::DMatrix;

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct Grid {
    points: Vec<f64>,
    weights: Vec<f64>,
}

impl Grid {
    /// Builds a grid with trapezoid quadrature weights.
    ///
    /// Points must be finite, strictly increasing, lie in `[0, 1]`, and
    /// number at least two.
    pub fn new(points: Vec<f64>) -> Result<Self> {
        if points.len() < 2 {
            return Err(Error::InvalidGrid(format!(
                "need at least 2 points, got {}",
                points.len()
            )));
        }
        if points.iter().any(|t| !t.is_finite()) {
            return Err(Error::NonFinite("grid points"));
        }
        if let Some(w) = points.windows(2).find(|w| w[1] <= w[0]) {
            return Err(Error::InvalidGrid(format!(
                "points must be strictly increasing ({} then {})",
                w[0], w[1]
            )));
        }
        let (first, last) = (points[0], points[points.len() - 1]);
        if first < 0.0 || last > 1.0 {
            return Err(Error::InvalidGrid(format!(
                "points must lie in [0, 1], got [{first}, {last}]"
            )));
        }
        let weights = trapezoid_weights(&points);
        Ok(Self { points, weights })
    }

    /// `len` equally spaced points from 0 to 1 inclusive.
    pub fn uniform(len: usize) -> Result<Self> {
        if len < 2 {
            return Err(Error::InvalidGrid(format!(
                "need at least 2 points, got {len}"
            )));
        }
        let step = 1.0 / (len - 1) as f64;
        let mut points: Vec<f64> = (0..len).map(|k| k as f64 * step).collect();
        points[len - 1] = 1.0;
        Self::new(points)
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn points(&self) -> &[f64] {
        &self.points
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// Quadrature of the pointwise product of two sampled functions.
    pub fn integrate_product(&self, f: &[f64], g: &[f64]) -> f64 {
        debug_assert_eq!(f.len(), self.len());
        debug_assert_eq!(g.len(), self.len());
        self.weights
            .iter()
            .zip(f.iter().zip(g))
            .map(|(w, (a, b))| w * a * b)
            .sum()
    }
}

fn trapezoid_weights(points: &[f64]) -> Vec<f64> {
    let t = points.len();
    let mut w = vec![0.0; t];
    for k in 0..t - 1 {
        let half = 0.5 * (points[k + 1] - points[k]);
        w[k] += half;
        w[k + 1] += half;
    }
    w
}

/// A single curve sampled on a grid.
#[derive(Debug, Clone, PartialEq)]
pub struct GridCurve {
    grid: Arc<Grid>,
    values: Vec<f64>,
}

impl GridCurve {
    pub fn new(grid: Arc<Grid>, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::DimensionMismatch {
                expected: grid.len(),
                got: values.len(),
                context: "curve values vs grid",
            });
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("curve values"));
        }
        Ok(Self { grid, values })
    }

    pub fn from_fn(grid: Arc<Grid>, f: impl Fn(f64) -> f64) -> Result<Self> {
        let values = grid.points().iter().map(|&t| f(t)).collect();
        Self::new(grid, values)
    }

    pub fn grid(&self) -> &Arc<Grid> {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }
}

fn same_grid(a: &Arc<Grid>, b: &Arc<Grid>) -> bool {
    Arc::ptr_eq(a, b) || **a == **b
}

/// Quadrature inner product `sum_t w_t f(t) g(t)`.
pub fn inner_product(f: &GridCurve, g: &GridCurve) -> Result<f64> {
    if !same_grid(&f.grid, &g.grid) {
        return Err(Error::GridMismatch);
    }
    Ok(f.grid.integrate_product(&f.values, &g.values))
}

/// `I` functional time series of `N` curves each on one grid.
///
/// Series `i` is stored as an `N x T` matrix whose row `n` holds the samples
/// of curve `X_{i,n}`.
#[derive(Debug, Clone, PartialEq)]
pub struct FunctionalPanel {
    grid: Arc<Grid>,
    series: Vec<DMatrix<f64>>,
    labels: Option<Vec<String>>,
}

impl FunctionalPanel {
    pub fn new(grid: Arc<Grid>, series: Vec<DMatrix<f64>>) -> Result<Self> {
        if series.is_empty() {
            return Err(Error::EmptyInput("panel needs at least one series"));
        }
        let n = series[0].nrows();
        if n < 2 {
            return Err(Error::InsufficientData {
                needed: 2,
                got: n,
                context: "replicates per series",
            });
        }
        for s in &series {
            if s.nrows() != n {
                return Err(Error::DimensionMismatch {
                    expected: n,
                    got: s.nrows(),
                    context: "replicates per series",
                });
            }
            if s.ncols() != grid.len() {
                return Err(Error::DimensionMismatch {
                    expected: grid.len(),
                    got: s.ncols(),
                    context: "grid points per curve",
                });
            }
            if s.iter().any(|v| !v.is_finite()) {
                return Err(Error::NonFinite("panel values"));
            }
        }
        Ok(Self {
            grid,
            series,
            labels: None,
        })
    }

    /// Builds a panel from `curves[i][n]`, which must all share one grid.
    pub fn from_curves(curves: Vec<Vec<GridCurve>>) -> Result<Self> {
        let grid = curves
            .first()
            .and_then(|s| s.first())
            .map(|c| c.grid.clone())
            .ok_or(Error::EmptyInput("panel needs at least one curve"))?;
        let mut series = Vec::with_capacity(curves.len());
        for s in &curves {
            let mut m = DMatrix::zeros(s.len(), grid.len());
            for (n, c) in s.iter().enumerate() {
                if !same_grid(&c.grid, &grid) {
                    return Err(Error::GridMismatch);
                }
                m.row_mut(n).copy_from_slice(&c.values);
            }
            series.push(m);
        }
        Self::new(grid, series)
    }

    pub fn with_labels(mut self, labels: Vec<String>) -> Result<Self> {
        if labels.len() != self.series.len() {
            return Err(Error::DimensionMismatch {
                expected: self.series.len(),
                got: labels.len(),
                context: "series labels",
            });
        }
        self.labels = Some(labels);
        Ok(self)
    }

    pub fn grid(&self) -> &Arc<Grid> {
        &self.grid
    }

    /// Number of series `I`.
    pub fn n_series(&self) -> usize {
        self.series.len()
    }

    /// Number of replicates (time points) `N`.
    pub fn n_replicates(&self) -> usize {
        self.series[0].nrows()
    }

    pub fn series(&self, i: usize) -> &DMatrix<f64> {
        &self.series[i]
    }

    pub fn all_series(&self) -> &[DMatrix<f64>] {
        &self.series
    }

    pub fn labels(&self) -> Option<&[String]> {
        self.labels.as_deref()
    }

    /// Label of series `i`, falling back to its 1-based position.
    pub fn label(&self, i: usize) -> String {
        match &self.labels {
            Some(l) => l[i].clone(),
            None => (i + 1).to_string(),
        }
    }

    pub fn curve(&self, i: usize, n: usize) -> GridCurve {
        GridCurve {
            grid: self.grid.clone(),
            values: self.series[i].row(n).iter().copied().collect(),
        }
    }

    /// Applies `f` to every sampled value.
    pub fn map_values(&self, f: impl Fn(f64) -> f64) -> Result<Self> {
        let series = self.series.iter().map(|s| s.map(&f)).collect();
        let mut out = Self::new(self.grid.clone(), series)?;
        out.labels = self.labels.clone();
        Ok(out)
    }

    /// Reorders series so that output series `k` is input series `order[k]`.
    pub fn permute_series(&self, order: &[usize]) -> Result<Self> {
        let mut seen = vec![false; self.n_series()];
        if order.len() != self.n_series() {
            return Err(Error::DimensionMismatch {
                expected: self.n_series(),
                got: order.len(),
                context: "series permutation",
            });
        }
        for &k in order {
            if k >= seen.len() || std::mem::replace(&mut seen[k], true) {
                return Err(Error::InvalidParameter(format!(
                    "not a permutation of 0..{}",
                    self.n_series()
                )));
            }
        }
        Ok(Self {
            grid: self.grid.clone(),
            series: order.iter().map(|&k| self.series[k].clone()).collect(),
            labels: self
                .labels
                .as_ref()
                .map(|l| order.iter().map(|&k| l[k].clone()).collect()),
        })
    }

    fn with_series(&self, series: Vec<DMatrix<f64>>) -> Self {
        Self {
            grid: self.grid.clone(),
            series,
            labels: self.labels.clone(),
        }
    }
}

/// Subtracts the per-series mean curve. Returns the centered panel and the
/// mean curves `mu_i(t) = N^-1 sum_n X_{i,n}(t)`.
pub fn center_panel(panel: &FunctionalPanel) -> (FunctionalPanel, Vec<GridCurve>) {
    let n = panel.n_replicates() as f64;
    let mut means = Vec::with_capacity(panel.n_series());
    let mut centered = Vec::with_capacity(panel.n_series());
    for s in &panel.series {
        let mu: Vec<f64> = s.column_iter().map(|col| col.sum() / n).collect();
        let mut c = s.clone();
        for (t, &m) in mu.iter().enumerate() {
            c.column_mut(t).add_scalar_mut(-m);
        }
        centered.push(c);
        means.push(GridCurve {
            grid: panel.grid.clone(),
            values: mu,
        });
    }
    (panel.with_series(centered), means)
}

/// Replaces every sequence `{X_{i,n}(t)}_n` by its residuals from an
/// ordinary least-squares line in `n`.
pub fn linear_detrend(panel: &FunctionalPanel) -> Result<FunctionalPanel> {
    let n = panel.n_replicates();
    if n < 3 {
        return Err(Error::InsufficientData {
            needed: 3,
            got: n,
            context: "linear detrending (replicates)",
        });
    }
    let nf = n as f64;
    let n_bar = (nf + 1.0) / 2.0;
    let dev: Vec<f64> = (1..=n).map(|k| k as f64 - n_bar).collect();
    let sxx: f64 = dev.iter().map(|d| d * d).sum();
    let series = panel
        .series
        .iter()
        .map(|s| {
            let mut out = s.clone();
            for mut col in out.column_iter_mut() {
                let mean = col.sum() / nf;
                let sxy: f64 = col.iter().zip(&dev).map(|(x, d)| (x - mean) * d).sum();
                let slope = sxy / sxx;
                for (x, d) in col.iter_mut().zip(&dev) {
                    *x = *x - mean - slope * d;
                }
            }
            out
        })
        .collect();
    Ok(panel.with_series(series))
}
