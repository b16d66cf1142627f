//! Deterministic fixtures shared by the benchmarks in `benches/`.

use std::sync::Arc;

use fpanel_core::rng::NormalStream;
use fpanel_core::{FunctionalPanel, Grid, ScoreMatrix};
use nalgebra::DMatrix;

/// `N x p_N` scores split into blocks of at most three columns.
pub fn score_fixture(n: usize, p_n: usize, seed: u64) -> ScoreMatrix {
    let mut rng = NormalStream::new(seed);
    let data = DMatrix::from_fn(n, p_n, |_, _| rng.standard_normal());
    let mut blocks = vec![3; p_n / 3];
    if !p_n.is_multiple_of(3) {
        blocks.push(p_n % 3);
    }
    ScoreMatrix::new(data, blocks).expect("valid fixture")
}

/// `I` series of `N` smooth random curves on `T` uniform points.
pub fn panel_fixture(i_count: usize, n: usize, t: usize, seed: u64) -> FunctionalPanel {
    let mut rng = NormalStream::new(seed);
    let grid = Arc::new(Grid::uniform(t).expect("t >= 2"));
    let series = (0..i_count)
        .map(|_| {
            let coefs = DMatrix::from_fn(n, 6, |_, k| rng.standard_normal() / (k + 1) as f64);
            DMatrix::from_fn(n, t, |r, c| {
                let x = grid.points()[c];
                (0..6)
                    .map(|k| coefs[(r, k)] * (std::f64::consts::PI * (k + 1) as f64 * x).sin())
                    .sum()
            })
        })
        .collect();
    FunctionalPanel::new(grid, series).expect("valid fixture")
}
