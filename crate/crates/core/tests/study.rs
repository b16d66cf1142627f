use fpanel_core::mcstudy::{clopper_pearson, run_power_study, run_size_study, StudyConfig};
use fpanel_core::simulate::el_nino_like;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Binomial, Distribution};

/// Central `1 - 2 * tail` acceptance region of Binomial(n, p) in counts.
fn binomial_band(n: u64, p: f64, tail: f64) -> (u64, u64) {
    let mut pmf = vec![0.0; n as usize + 1];
    pmf[0] = (n as f64 * (1.0 - p).ln()).exp();
    for k in 1..=n as usize {
        pmf[k] = pmf[k - 1] * (n as f64 - k as f64 + 1.0) / k as f64 * p / (1.0 - p);
    }
    let mut acc = 0.0;
    let mut lo = 0;
    for (k, m) in pmf.iter().enumerate() {
        acc += m;
        if acc > tail {
            lo = k as u64;
            break;
        }
    }
    let mut acc = 0.0;
    let mut hi = n;
    for (k, m) in pmf.iter().enumerate().rev() {
        acc += m;
        if acc > tail {
            hi = k as u64;
            break;
        }
    }
    (lo, hi)
}

#[test]
fn clopper_pearson_covers_at_nominal_level() {
    let (trials, p) = (200u64, 0.05);
    let dist = Binomial::new(trials, p).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let draws = 10_000;
    let covered = (0..draws)
        .filter(|_| {
            let x = dist.sample(&mut rng);
            let (lo, hi) = clopper_pearson(x, trials, 0.95).unwrap();
            lo <= p && p <= hi
        })
        .count();
    let coverage = covered as f64 / draws as f64;
    assert!(coverage >= 0.95, "coverage {coverage}");
}

#[test]
fn size_under_h0_inside_binomial_band() {
    let gen = el_nino_like(120).unwrap();
    let r = 1000;
    let study = run_size_study(&gen, &StudyConfig::new(r, vec![3, 4, 5, 6], 0.05, 606)).unwrap();
    let (lo, hi) = binomial_band(r as u64, 0.05, 0.005);
    for row in &study.rows {
        assert!(
            (lo..=hi).contains(&row.rejections),
            "H={}: {} rejections outside [{lo}, {hi}]",
            row.h,
            row.rejections
        );
    }
}

#[test]
fn power_is_monotone_in_rho() {
    let gen = el_nino_like(120).unwrap();
    let cfg = StudyConfig::new(500, vec![1, 3, 6], 0.05, 99);
    let weak = run_power_study(&gen, 0.2, &cfg).unwrap();
    let strong = run_power_study(&gen, 0.4, &cfg).unwrap();
    for (w, s) in weak.rows.iter().zip(&strong.rows) {
        assert!(
            s.frequency >= w.frequency,
            "H={}: {} < {}",
            s.h,
            s.frequency,
            w.frequency
        );
    }
}

#[test]
fn power_is_monotone_in_n() {
    let cfg = StudyConfig::new(200, vec![1, 3, 6], 0.05, 7);
    let short = run_power_study(&el_nino_like(60).unwrap(), 0.3, &cfg).unwrap();
    let long = run_power_study(&el_nino_like(120).unwrap(), 0.3, &cfg).unwrap();
    for (a, b) in short.rows.iter().zip(&long.rows) {
        assert!(
            b.frequency >= a.frequency,
            "H={}: {} < {}",
            b.h,
            b.frequency,
            a.frequency
        );
    }
}

#[test]
fn zero_rho_power_is_size() {
    let gen = el_nino_like(120).unwrap();
    let cfg = StudyConfig::new(300, vec![3], 0.05, 12);
    let size = run_size_study(&gen, &cfg).unwrap();
    let power = run_power_study(&gen, 0.0, &cfg).unwrap();
    assert_eq!(size.rows, power.rows);
}

#[test]
fn studies_are_reproducible() {
    let gen = el_nino_like(60).unwrap();
    let cfg = StudyConfig::new(50, vec![2, 4], 0.05, 5);
    let a = run_power_study(&gen, 0.3, &cfg).unwrap();
    let b = run_power_study(&gen, 0.3, &cfg).unwrap();
    assert_eq!(a.to_csv(), b.to_csv());
}

#[test]
fn clopper_pearson_matches_published_intervals() {
    // (rejections out of 1000, lower, upper) at 3 decimals.
    let table = [
        (33, 0.023, 0.046),
        (41, 0.030, 0.055),
        (46, 0.034, 0.061),
        (48, 0.036, 0.063),
        (51, 0.038, 0.067),
        (52, 0.039, 0.068),
        (53, 0.040, 0.069),
        (54, 0.041, 0.070),
        (55, 0.042, 0.071),
        (57, 0.043, 0.073),
        (58, 0.044, 0.074),
        (59, 0.045, 0.075),
        (60, 0.046, 0.077),
        (61, 0.047, 0.078),
        (62, 0.048, 0.079),
        (63, 0.049, 0.080),
        (71, 0.056, 0.089),
        (79, 0.063, 0.097),
        (554, 0.523, 0.585),
        (607, 0.576, 0.637),
        (615, 0.584, 0.645),
        (690, 0.660, 0.719),
        (778, 0.751, 0.803),
        (790, 0.763, 0.815),
        (927, 0.909, 0.942),
        (951, 0.936, 0.964),
        (966, 0.953, 0.976),
        (974, 0.962, 0.983),
        (981, 0.970, 0.989),
        (986, 0.977, 0.992),
        (987, 0.978, 0.993),
        (994, 0.987, 0.998),
        (996, 0.990, 0.999),
        (997, 0.991, 0.999),
        (1000, 0.996, 1.000),
    ];
    for (k, lo, hi) in table {
        let (a, b) = clopper_pearson(k, 1000, 0.95).unwrap();
        let round = |v: f64| (v * 1000.0).round() / 1000.0;
        assert_eq!((round(a), round(b)), (lo, hi), "{k} of 1000");
    }
}
