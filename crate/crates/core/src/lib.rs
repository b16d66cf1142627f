//! Portmanteau test of the iid hypothesis for panels of functional time series.
//!
//! A panel holds `I` series of `N` curves each, sampled on one shared grid of
//! `[0, 1]`. The test reduces every series with functional principal
//! components, pools the scores of all series, and aggregates the squared
//! lagged cross-covariances of the pooled scores in the metric of a spectral
//! generalized inverse of their covariance. The resulting statistic is
//! approximately normal after centering and scaling, which gives a one-sided
//! test with a finite-sample correction.
//!
//! The modules follow the pipeline:
//!
//! - [`panel`]: grids, curves, panels, quadrature inner products, centering
//!   and per-grid-point linear detrending.
//! - [`fpca`]: covariance kernels, weighted eigenproblems, dimension
//!   selection, scores and eigen-gap diagnostics.
//! - [`portmanteau`]: pooled covariance, lag cross-covariances, the statistic
//!   (Kronecker reference path and fast path), normalization and [`run_test`].
//! - [`simulate`]: data-generating processes with cross-sectional coupling
//!   and FAR(1)-type temporal dependence.
//! - [`mcstudy`]: size/power studies with Clopper–Pearson bands and a Monte
//!   Carlo check of the increasing-dimension normal limit.
//! - [`rng`]: reproducible counter-based normal streams.

pub mod error;
pub mod fpca;
pub mod linalg;
pub mod mcstudy;
pub mod panel;
pub mod portmanteau;
pub mod rng;
pub mod simulate;

pub use error::{Error, Result};
pub use fpca::{FpcaModel, GapDiagnostics};
pub use mcstudy::{clopper_pearson, CltSummary, StudyResult};
pub use panel::{FunctionalPanel, Grid, GridCurve};
pub use portmanteau::{run_test, Centering, PooledCovariance, ScoreMatrix, TestConfig, TestReport};
pub use rng::RngKey;
pub use simulate::{ArFactor, PanelGenerator};
