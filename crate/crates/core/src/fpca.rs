//! Functional principal components of one series on a quadrature grid.
//!
//! The covariance operator `x -> ∫ K(·, t) x(t) dt` is discretized as `K W`
//! with `W = diag(w)`. Its eigenpairs are obtained from the symmetric matrix
//! `W^{1/2} K W^{1/2}`; eigenvectors `u` map back to eigenfunctions
//! `v = W^{-1/2} u`, which are orthonormal in the quadrature inner product.

use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::linalg::{ensure_symmetric, sorted_symmetric_eigen};
use crate::panel::{FunctionalPanel, Grid};

pub const DEFAULT_VARIANCE_THRESHOLD: f64 = 0.85;

/// Relative slack used when comparing explained-variance ratios against a
/// threshold, so that ratios equal to the threshold in exact arithmetic are
/// not lost to rounding.
const RATIO_SLACK: f64 = 1e-12;

/// Eigenpairs of a discretized covariance operator, descending.
#[derive(Debug, Clone)]
pub struct Eigensystem {
    pub values: Vec<f64>,
    /// `T x T`; column `j` holds the grid samples of eigenfunction `j`.
    pub functions: DMatrix<f64>,
}

/// Empirical covariance kernel `K(s,t) = N^-1 sum_n x_n(s) x_n(t)` of the
/// rows of `curves` (`N x T`). The caller is responsible for centering.
pub fn covariance_kernel(curves: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    let n = curves.nrows();
    if n == 0 {
        return Err(Error::EmptyInput(
            "covariance kernel needs at least one curve",
        ));
    }
    Ok(curves.transpose() * curves / n as f64)
}

/// Solves the weighted eigenproblem of the integral operator with kernel
/// `kernel` on `grid`.
///
/// Each eigenfunction's sign is fixed so that its entry of largest absolute
/// value is positive (first such entry on ties).
pub fn eigen_decompose(kernel: &DMatrix<f64>, grid: &Grid) -> Result<Eigensystem> {
    let t = grid.len();
    if kernel.nrows() != t || kernel.ncols() != t {
        return Err(Error::DimensionMismatch {
            expected: t,
            got: kernel.nrows().max(kernel.ncols()),
            context: "kernel size vs grid",
        });
    }
    ensure_symmetric(kernel, 1e-10)?;
    let sqrt_w: Vec<f64> = grid.weights().iter().map(|w| w.sqrt()).collect();
    let weighted = DMatrix::from_fn(t, t, |a, b| sqrt_w[a] * kernel[(a, b)] * sqrt_w[b]);
    let eig = sorted_symmetric_eigen(&weighted);
    let mut functions = eig.vectors;
    for mut col in functions.column_iter_mut() {
        for (x, s) in col.iter_mut().zip(&sqrt_w) {
            *x /= s;
        }
        let pivot = col.iter().copied().fold(
            0.0f64,
            |best, x| {
                if x.abs() > best.abs() {
                    x
                } else {
                    best
                }
            },
        );
        if pivot < 0.0 {
            col.neg_mut();
        }
    }
    Ok(Eigensystem {
        values: eig.values.iter().copied().collect(),
        functions,
    })
}

/// Smallest `k` whose leading eigenvalues explain at least `threshold` of
/// the total (strictly more than `threshold` when `strict`).
pub fn select_num_components(eigenvalues: &[f64], threshold: f64, strict: bool) -> Result<usize> {
    if !(threshold > 0.0 && threshold < 1.0) {
        return Err(Error::InvalidParameter(format!(
            "variance threshold must lie in (0, 1), got {threshold}"
        )));
    }
    if eigenvalues.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite("eigenvalues"));
    }
    let total: f64 = eigenvalues.iter().map(|v| v.max(0.0)).sum();
    if total <= 0.0 {
        return Err(Error::Degenerate("all eigenvalues are zero".into()));
    }
    let target = threshold * total;
    let slack = RATIO_SLACK * total;
    let mut cum = 0.0;
    for (k, v) in eigenvalues.iter().enumerate() {
        cum += v.max(0.0);
        let reached = if strict {
            cum > target + slack
        } else {
            cum >= target - slack
        };
        if reached {
            return Ok(k + 1);
        }
    }
    Ok(eigenvalues.len())
}

/// Scores `<x_n, v_j>` for the first `p` eigenfunctions: an `N x p` matrix.
pub fn compute_scores(
    curves: &DMatrix<f64>,
    grid: &Grid,
    eigenfunctions: &DMatrix<f64>,
    p: usize,
) -> Result<DMatrix<f64>> {
    let t = grid.len();
    if curves.ncols() != t || eigenfunctions.nrows() != t {
        return Err(Error::DimensionMismatch {
            expected: t,
            got: if curves.ncols() != t {
                curves.ncols()
            } else {
                eigenfunctions.nrows()
            },
            context: "grid points in scores",
        });
    }
    if p > eigenfunctions.ncols() {
        return Err(Error::TooManyComponents {
            requested: p,
            available: eigenfunctions.ncols(),
        });
    }
    let w = DVector::from_column_slice(grid.weights());
    let weighted = DMatrix::from_fn(t, p, |a, j| w[a] * eigenfunctions[(a, j)]);
    Ok(curves * weighted)
}

/// How the number of retained components is chosen.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Selection {
    /// Smallest `k` reaching the explained-variance threshold.
    Threshold { threshold: f64, strict: bool },
    /// Exactly `k` components.
    Fixed(usize),
}

impl Default for Selection {
    fn default() -> Self {
        Selection::Threshold {
            threshold: DEFAULT_VARIANCE_THRESHOLD,
            strict: false,
        }
    }
}

/// FPCA of one series: spectrum, eigenfunctions, selected dimension, scores.
#[derive(Debug, Clone)]
pub struct FpcaModel {
    series_index: usize,
    eigenvalues: Vec<f64>,
    eigenfunctions: DMatrix<f64>,
    p: usize,
    scores: DMatrix<f64>,
}

impl FpcaModel {
    /// Fits the model to already centered curves (`N x T`).
    ///
    /// `min(N, T)` eigenpairs are kept; the explained-variance denominator is
    /// their full sum.
    pub fn fit(
        series_index: usize,
        centered: &DMatrix<f64>,
        grid: &Grid,
        selection: Selection,
    ) -> Result<Self> {
        let kernel = covariance_kernel(centered)?;
        let eig = eigen_decompose(&kernel, grid)?;
        let m = centered.nrows().min(grid.len());
        let eigenvalues: Vec<f64> = eig.values[..m].iter().map(|v| v.max(0.0)).collect();
        let eigenfunctions = eig.functions.columns(0, m).into_owned();
        let p = match selection {
            Selection::Threshold { threshold, strict } => {
                select_num_components(&eigenvalues, threshold, strict)?
            }
            Selection::Fixed(k) => {
                let rank = numerical_rank(&eigenvalues);
                if k == 0 || k > rank {
                    return Err(Error::TooManyComponents {
                        requested: k,
                        available: rank,
                    });
                }
                k
            }
        };
        let scores = compute_scores(centered, grid, &eigenfunctions, p)?;
        Ok(Self {
            series_index,
            eigenvalues,
            eigenfunctions,
            p,
            scores,
        })
    }

    pub fn series_index(&self) -> usize {
        self.series_index
    }

    pub fn eigenvalues(&self) -> &[f64] {
        &self.eigenvalues
    }

    /// `T x m` matrix of eigenfunction samples, one per column.
    pub fn eigenfunctions(&self) -> &DMatrix<f64> {
        &self.eigenfunctions
    }

    /// Selected dimension `p(i)`.
    pub fn p(&self) -> usize {
        self.p
    }

    /// `N x p` score matrix.
    pub fn scores(&self) -> &DMatrix<f64> {
        &self.scores
    }
}

fn numerical_rank(eigenvalues: &[f64]) -> usize {
    let top = eigenvalues.first().copied().unwrap_or(0.0);
    if top <= 0.0 {
        return 0;
    }
    eigenvalues.iter().filter(|&&v| v > 1e-12 * top).count()
}

/// Fits every series of an already centered panel, in parallel.
pub fn fit_panel(centered: &FunctionalPanel, selection: Selection) -> Result<Vec<FpcaModel>> {
    let grid = centered.grid();
    centered
        .all_series()
        .par_iter()
        .enumerate()
        .map(|(i, s)| FpcaModel::fit(i, s, grid, selection))
        .collect()
}

/// Eigen-gap functionals of the retained components.
#[derive(Debug, Clone, PartialEq)]
pub struct GapDiagnostics {
    /// `alphas[i][j]`: gap of component `j` of series `i`.
    pub alphas: Vec<Vec<f64>>,
    /// `sum_{(i,j),(i',j')} (1/alpha_{i,j} + 1/alpha_{i',j'})^2`; infinite if
    /// any gap is non-positive.
    pub gamma_n: f64,
    /// `(series, component)` pairs whose gap is not positive.
    pub nonpositive: Vec<(usize, usize)>,
}

impl GapDiagnostics {
    pub fn has_nonpositive_gap(&self) -> bool {
        !self.nonpositive.is_empty()
    }

    pub fn from_models(models: &[FpcaModel]) -> Result<Self> {
        let spectra: Vec<(&[f64], usize)> =
            models.iter().map(|m| (m.eigenvalues(), m.p())).collect();
        gap_diagnostics(&spectra)
    }
}

/// Eigen-gaps `alpha_{i,1} = l_1 - l_2` and
/// `alpha_{i,j} = min(l_{j-1} - l_j, l_j - l_{j+1})` for each retained
/// component, and their aggregate `Gamma_N`.
///
/// Each entry of `spectra` is a descending spectrum with its retained
/// dimension `p`; at least `p + 1` eigenvalues are required.
pub fn gap_diagnostics(spectra: &[(&[f64], usize)]) -> Result<GapDiagnostics> {
    let mut alphas = Vec::with_capacity(spectra.len());
    let mut nonpositive = Vec::new();
    for (i, &(lambda, p)) in spectra.iter().enumerate() {
        if p == 0 || lambda.len() < p + 1 {
            return Err(Error::InsufficientData {
                needed: p.max(1) + 1,
                got: lambda.len(),
                context: "eigenvalues for gap diagnostics",
            });
        }
        let series: Vec<f64> = (0..p)
            .map(|j| {
                let below = lambda[j] - lambda[j + 1];
                if j == 0 {
                    below
                } else {
                    below.min(lambda[j - 1] - lambda[j])
                }
            })
            .collect();
        nonpositive.extend(
            series
                .iter()
                .enumerate()
                .filter(|(_, &a)| a <= 0.0)
                .map(|(j, _)| (i, j)),
        );
        alphas.push(series);
    }
    let gamma_n = if nonpositive.is_empty() {
        // sum_x sum_y (a_x + a_y)^2 = 2 P sum a^2 + 2 (sum a)^2
        let inv: Vec<f64> = alphas.iter().flatten().map(|a| 1.0 / a).collect();
        let count = inv.len() as f64;
        let sum: f64 = inv.iter().sum();
        let sum_sq: f64 = inv.iter().map(|a| a * a).sum();
        2.0 * count * sum_sq + 2.0 * sum * sum
    } else {
        f64::INFINITY
    };
    Ok(GapDiagnostics {
        alphas,
        gamma_n,
        nonpositive,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::sync::Arc;

    fn pseudo_random(n: usize, t: usize, seed: u64) -> DMatrix<f64> {
        let mut s = seed.wrapping_add(0x9E3779B97F4A7C15);
        DMatrix::from_fn(n, t, |_, _| {
            s ^= s << 13;
            s ^= s >> 7;
            s ^= s << 17;
            (s >> 11) as f64 / (1u64 << 53) as f64 - 0.5
        })
    }

    /// Gram–Schmidt in the quadrature inner product.
    fn orthonormal_basis(grid: &Grid, raw: &[Vec<f64>]) -> Vec<Vec<f64>> {
        let mut out: Vec<Vec<f64>> = Vec::new();
        for f in raw {
            let mut v = f.clone();
            for e in &out {
                let c = grid.integrate_product(&v, e);
                for (x, y) in v.iter_mut().zip(e) {
                    *x -= c * y;
                }
            }
            let norm = grid.integrate_product(&v, &v).sqrt();
            out.push(v.iter().map(|x| x / norm).collect());
        }
        out
    }

    #[test]
    fn kernel_of_zero_series() {
        let k = covariance_kernel(&DMatrix::zeros(4, 3)).unwrap();
        assert_eq!(k, DMatrix::zeros(3, 3));
        assert!(covariance_kernel(&DMatrix::zeros(0, 3)).is_err());
    }

    #[test]
    fn kernel_single_curve_is_outer_product() {
        let c = DMatrix::from_row_slice(1, 3, &[1.0, -2.0, 0.5]);
        let k = covariance_kernel(&c).unwrap();
        for s in 0..3 {
            for t in 0..3 {
                assert_eq!(k[(s, t)], c[(0, s)] * c[(0, t)]);
            }
        }
    }

    #[test]
    fn kernel_matches_double_loop() {
        let x = pseudo_random(9, 6, 1);
        let k = covariance_kernel(&x).unwrap();
        for s in 0..6 {
            for t in 0..6 {
                let mut acc = 0.0;
                for n in 0..9 {
                    acc += x[(n, s)] * x[(n, t)];
                }
                assert!((k[(s, t)] - acc / 9.0).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn rank_one_kernel() {
        let grid = Grid::uniform(11).unwrap();
        let raw: Vec<f64> = grid.points().iter().map(|t| 1.0 + t).collect();
        let c = &orthonormal_basis(&grid, &[raw])[0];
        let k = DMatrix::from_fn(11, 11, |a, b| c[a] * c[b]);
        let eig = eigen_decompose(&k, &grid).unwrap();
        assert!((eig.values[0] - 1.0).abs() < 1e-12);
        assert!(eig.values[1..].iter().all(|v| v.abs() < 1e-12));
        // c is positive everywhere, so the sign convention yields +c.
        for (a, ca) in c.iter().enumerate() {
            assert!((eig.functions[(a, 0)] - ca).abs() < 1e-10);
        }
    }

    #[test]
    fn zero_kernel() {
        let grid = Grid::uniform(5).unwrap();
        let eig = eigen_decompose(&DMatrix::zeros(5, 5), &grid).unwrap();
        assert!(eig.values.iter().all(|&v| v == 0.0));
    }

    #[test]
    fn non_symmetric_kernel_rejected() {
        let grid = Grid::uniform(3).unwrap();
        let mut k = DMatrix::identity(3, 3);
        k[(0, 1)] = 0.3;
        assert!(matches!(
            eigen_decompose(&k, &grid),
            Err(Error::NotSymmetric { .. })
        ));
        assert!(eigen_decompose(&DMatrix::identity(4, 4), &grid).is_err());
    }

    #[test]
    fn two_component_kernel_recovered() {
        let grid = Grid::new(vec![0.0, 0.1, 0.25, 0.3, 0.5, 0.65, 0.8, 0.9, 1.0]).unwrap();
        let raw = vec![
            grid.points().iter().map(|_| 1.0).collect::<Vec<_>>(),
            grid.points().iter().map(|t| t - 0.4).collect(),
        ];
        let basis = orthonormal_basis(&grid, &raw);
        let t = grid.len();
        let k = DMatrix::from_fn(t, t, |a, b| {
            2.0 * basis[0][a] * basis[0][b] + basis[1][a] * basis[1][b]
        });
        let eig = eigen_decompose(&k, &grid).unwrap();
        assert!((eig.values[0] - 2.0).abs() < 1e-10);
        assert!((eig.values[1] - 1.0).abs() < 1e-10);
        for (j, f) in basis.iter().enumerate() {
            let col = eig.functions.column(j);
            let sign = if grid.integrate_product(col.as_slice(), f) > 0.0 {
                1.0
            } else {
                -1.0
            };
            for a in 0..t {
                assert!((sign * col[a] - f[a]).abs() < 1e-8);
            }
        }
    }

    #[test]
    fn eigenfunctions_orthonormal_and_signed() {
        let grid = Grid::new(vec![0.0, 0.05, 0.2, 0.4, 0.45, 0.7, 1.0]).unwrap();
        let x = pseudo_random(12, 7, 5);
        let k = covariance_kernel(&x).unwrap();
        let eig = eigen_decompose(&k, &grid).unwrap();
        for j in 0..7 {
            for l in 0..7 {
                let ip = grid.integrate_product(
                    eig.functions.column(j).as_slice(),
                    eig.functions.column(l).as_slice(),
                );
                let want = if j == l { 1.0 } else { 0.0 };
                assert!((ip - want).abs() < 1e-8);
            }
            let col = eig.functions.column(j);
            let big = col
                .iter()
                .copied()
                .max_by(|a, b| a.abs().total_cmp(&b.abs()))
                .unwrap();
            assert!(big > 0.0);
        }
        assert!(eig.values.windows(2).all(|w| w[0] >= w[1]));
        // Trace identity.
        let trace: f64 = (0..7).map(|a| grid.weights()[a] * k[(a, a)]).sum();
        let sum: f64 = eig.values.iter().sum();
        assert!((trace - sum).abs() <= 1e-8 * trace);
    }

    #[test]
    fn select_simple_cases() {
        assert_eq!(
            select_num_components(&[0.9, 0.06, 0.04], 0.85, false).unwrap(),
            1
        );
        assert_eq!(
            select_num_components(&[0.85, 0.1, 0.05], 0.85, false).unwrap(),
            1
        );
        assert_eq!(
            select_num_components(&[0.85, 0.1, 0.05], 0.85, true).unwrap(),
            2
        );
        assert!(matches!(
            select_num_components(&[0.0, 0.0], 0.85, false),
            Err(Error::Degenerate(_))
        ));
        assert!(select_num_components(&[1.0], 1.0, false).is_err());
        assert!(select_num_components(&[1.0], 0.0, false).is_err());
    }

    #[test]
    fn select_equal_eigenvalues() {
        for m in 1..=40usize {
            for &value in &[1.0, 0.3, 7.1] {
                let eig = vec![value; m];
                // Direct ratio scan, exact rational arithmetic on counts.
                let want = (1..=m).find(|&k| 100 * k >= 85 * m).unwrap();
                assert_eq!(
                    select_num_components(&eig, 0.85, false).unwrap(),
                    want,
                    "m={m}"
                );
                assert_eq!(want, (0.85 * m as f64).ceil() as usize);
            }
        }
    }

    #[test]
    fn scores_rank_one_model() {
        let grid = Grid::uniform(9).unwrap();
        let v = &orthonormal_basis(
            &grid,
            &[grid.points().iter().map(|t| t * t + 0.2).collect()],
        )[0];
        let xi = [1.5, -0.3, 0.8, -2.0, 0.1];
        let lambda: f64 = 2.5;
        let x = DMatrix::from_fn(5, 9, |n, a| lambda.sqrt() * xi[n] * v[a]);
        let vf = DMatrix::from_column_slice(9, 1, v);
        let s = compute_scores(&x, &grid, &vf, 1).unwrap();
        for n in 0..5 {
            assert!((s[(n, 0)] - lambda.sqrt() * xi[n]).abs() < 1e-12);
        }
        let zero = compute_scores(&DMatrix::zeros(5, 9), &grid, &vf, 1).unwrap();
        assert!(zero.iter().all(|&v| v == 0.0));
        assert!(compute_scores(&x, &grid, &vf, 2).is_err());
        assert!(compute_scores(&DMatrix::zeros(5, 8), &grid, &vf, 1).is_err());
    }

    #[test]
    fn score_variances_equal_eigenvalues() {
        let grid = Arc::new(Grid::uniform(8).unwrap());
        let mut x = pseudo_random(30, 8, 9);
        for mut col in x.column_iter_mut() {
            let m = col.mean();
            col.add_scalar_mut(-m);
        }
        let model = FpcaModel::fit(
            0,
            &x,
            &grid,
            Selection::Threshold {
                threshold: 0.999,
                strict: false,
            },
        )
        .unwrap();
        for j in 0..model.p() {
            let col = model.scores().column(j);
            let var = col.iter().map(|s| s * s).sum::<f64>() / 30.0;
            let lam = model.eigenvalues()[j];
            assert!((var - lam).abs() <= 1e-6 * lam, "j={j} var={var} lam={lam}");
        }
    }

    #[test]
    fn fit_keeps_min_n_t_pairs() {
        let grid = Grid::uniform(10).unwrap();
        let mut x = pseudo_random(4, 10, 2);
        for mut col in x.column_iter_mut() {
            let m = col.mean();
            col.add_scalar_mut(-m);
        }
        let model = FpcaModel::fit(3, &x, &grid, Selection::default()).unwrap();
        assert_eq!(model.eigenvalues().len(), 4);
        assert_eq!(model.series_index(), 3);
        assert!(model.p() >= 1 && model.p() <= 3);
        // Centered rank is N - 1 = 3.
        assert!(matches!(
            FpcaModel::fit(0, &x, &grid, Selection::Fixed(4)),
            Err(Error::TooManyComponents { available: 3, .. })
        ));
        assert_eq!(
            FpcaModel::fit(0, &x, &grid, Selection::Fixed(3))
                .unwrap()
                .p(),
            3
        );
    }

    #[test]
    fn gap_hand_example() {
        let lam = [3.0, 2.0, 1.0];
        let d = gap_diagnostics(&[(&lam[..], 2)]).unwrap();
        assert_eq!(d.alphas, vec![vec![1.0, 1.0]]);
        assert_eq!(d.gamma_n, 16.0);
        assert!(!d.has_nonpositive_gap());
    }

    #[test]
    fn gap_ties_flagged() {
        let lam = [2.0, 2.0, 1.0];
        let d = gap_diagnostics(&[(&lam[..], 1)]).unwrap();
        assert!(d.has_nonpositive_gap());
        assert_eq!(d.nonpositive, vec![(0, 0)]);
        assert!(d.gamma_n.is_infinite());
    }

    #[test]
    fn gap_needs_extra_eigenvalue() {
        let lam = [3.0, 2.0];
        assert!(gap_diagnostics(&[(&lam[..], 2)]).is_err());
    }

    /// Direct quadruple sum over (i, j, i', j').
    fn gamma_brute(alphas: &[Vec<f64>]) -> f64 {
        let mut acc = 0.0;
        for a in alphas {
            for b in alphas {
                for x in a {
                    for y in b {
                        acc += (1.0 / x + 1.0 / y).powi(2);
                    }
                }
            }
        }
        acc
    }

    #[test]
    fn gamma_matches_brute_force() {
        let s1 = [5.0, 3.5, 1.0, 0.7, 0.1];
        let s2 = [2.0, 1.2, 0.3];
        let d = gap_diagnostics(&[(&s1[..], 3), (&s2[..], 2)]).unwrap();
        let want = gamma_brute(&d.alphas);
        assert!((d.gamma_n - want).abs() <= 1e-12 * want);
        for (got, want) in d.alphas[0].iter().zip([1.5, 1.5, 0.3]) {
            assert!((got - want).abs() < 1e-12);
        }
    }

    fn log_log_slope(ps: &[usize], spectrum: impl Fn(usize) -> Vec<f64>) -> f64 {
        let pts: Vec<(f64, f64)> = ps
            .iter()
            .map(|&p| {
                let lam = spectrum(p);
                let g = gap_diagnostics(&[(&lam[..], p)]).unwrap().gamma_n;
                ((p as f64).ln(), g.ln())
            })
            .collect();
        let k = pts.len() as f64;
        let mx = pts.iter().map(|p| p.0).sum::<f64>() / k;
        let my = pts.iter().map(|p| p.1).sum::<f64>() / k;
        pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum::<f64>()
            / pts.iter().map(|p| (p.0 - mx).powi(2)).sum::<f64>()
    }

    #[test]
    fn gamma_power_law_scaling() {
        // Decay exponent 2 with gaps l_j - l_{j+1} = j^-3 gives Gamma_N ~ p^8.
        let gap_law = |p: usize| {
            let mut lam = vec![0.0; p + 1];
            for j in (0..p).rev() {
                lam[j] = lam[j + 1] + ((j + 1) as f64).powi(-3);
            }
            lam
        };
        let slope = log_log_slope(&[4, 8, 16, 32], gap_law);
        assert!((slope - 8.0).abs() <= 0.5, "slope {slope}");

        // The plain j^-2 spectrum approaches the same exponent more slowly.
        let plain = |p: usize| (1..=p + 1).map(|j| (j as f64).powi(-2)).collect::<Vec<_>>();
        let early = log_log_slope(&[4, 8], plain);
        let late = log_log_slope(&[16, 32], plain);
        assert!(early < late && late < 8.0 && late > 7.5, "{early} {late}");
    }
}
