use polysel::config::{CoverageSpec, HeatmapSpec, LinearGrid, QuantileSpec, ScenarioConfig};
use polysel::experiments::{
    run_ci, run_coverage_check, run_floor_curves, run_heatmap, run_length_curve, run_quantile_study,
};
use polysel::io::{read_matrix, read_vector, write_csv};
use polysel::sim::make_design;
use polysel::stats::fit_reciprocal_curve;
use polysel::HarnessError;
use polysel_core::IntervalUnion;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

const STANDARD: f64 = 3.919_927_969_080_108;

fn sample_corr(a: &[f64], b: &[f64]) -> f64 {
    let n = a.len() as f64;
    let (ma, mb) = (a.iter().sum::<f64>() / n, b.iter().sum::<f64>() / n);
    let cov: f64 = a.iter().zip(b).map(|(x, y)| (x - ma) * (y - mb)).sum();
    let va: f64 = a.iter().map(|x| (x - ma).powi(2)).sum();
    let vb: f64 = b.iter().map(|y| (y - mb).powi(2)).sum();
    cov / (va * vb).sqrt()
}

#[test]
fn design_correlations() {
    let x = make_design(400, 4, 0.0, 1);
    let bound = 3.0 / 20.0;
    for j in 1..4 {
        assert!(sample_corr(x.col(0), x.col(j)).abs() < bound);
    }
    let x = make_design(10_000, 2, 0.2, 2);
    assert!((sample_corr(x.col(0), x.col(1)) - 0.2).abs() < 0.03);
    let var = x.col(0).iter().map(|v| v * v).sum::<f64>() / 10_000.0;
    assert!((var - 1.0).abs() < 0.05);
}

#[test]
fn length_curves_match_their_limits() {
    let bounded = IntervalUnion::new([(-3.0, -2.0), (-1.0, 1.0), (2.0, 3.0)]).unwrap();
    let c = run_length_curve(&bounded, 1.0, 0.05, &[0.0, 1.5, 2.999]).unwrap();
    assert_eq!(c.rows.len(), 2);
    assert_eq!(c.notes.len(), 1);
    let last = c.rows.last().unwrap();
    assert!(last.length > 10.0 * STANDARD, "length {}", last.length);

    let open = IntervalUnion::new([(f64::NEG_INFINITY, -2.0), (-1.0, 1.0), (2.0, f64::INFINITY)]).unwrap();
    let grid = LinearGrid {
        start: -10.0,
        stop: 10.0,
        points: 401,
    }
    .values();
    let c = run_length_curve(&open, 1.0, 0.05, &grid).unwrap();
    for r in &c.rows {
        assert!(r.length <= STANDARD + 4.0 + 1e-8, "w = {}: {}", r.w, r.length);
    }
    for w in [-10.0, 10.0] {
        let r = c.rows.iter().find(|r| r.w == w).unwrap();
        assert!((r.length - STANDARD).abs() < 1e-3);
    }
}

#[test]
fn floor_curves_increase_in_theta() {
    let kappas = [0.5, 0.9, 0.99];
    let rows = run_floor_curves(&[-2.0, -1.0, 0.0], 1.0, 0.0, &kappas, 0.05).unwrap();
    for k in 0..kappas.len() {
        let at: Vec<f64> = rows.iter().skip(k).step_by(kappas.len()).map(|r| r.floor).collect();
        assert!(at.windows(2).all(|w| w[0] < w[1]), "{at:?}");
    }
    let r99 = rows.iter().find(|r| r.theta == 0.0 && r.kappa == 0.99).unwrap().floor;
    assert!((r99 - 292.309_93).abs() < 1e-3);
}

fn small_heatmap() -> (ScenarioConfig, HeatmapSpec) {
    let base = ScenarioConfig {
        n: 30,
        reps: 12,
        seed: 42,
        ..ScenarioConfig::default()
    };
    let spec = HeatmapSpec {
        p_grid: vec![6, 40],
        lambda_grid: vec![2.0, 20.0],
    };
    (base, spec)
}

#[test]
fn heatmap_is_independent_of_worker_count() {
    let (base, spec) = small_heatmap();
    let run = |workers: usize| {
        let pool = rayon::ThreadPoolBuilder::new().num_threads(workers).build().unwrap();
        let out = pool.install(|| run_heatmap(&base, &spec)).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("h.csv");
        write_csv(&path, &out.cells).unwrap();
        let reps = dir.path().join("r.csv");
        write_csv(&reps, &out.records).unwrap();
        (std::fs::read(path).unwrap(), std::fs::read(reps).unwrap())
    };
    assert_eq!(run(1), run(4));
}

#[test]
fn heatmap_cells_are_consistent() {
    let (base, spec) = small_heatmap();
    let out = run_heatmap(&base, &spec).unwrap();
    assert_eq!(out.cells.len(), 4);
    assert_eq!(out.records.len(), 4 * 12);
    for (cell, recs) in out.cells.iter().zip(out.records.chunks(12)) {
        assert!((0.0..=1.0).contains(&cell.fraction_certified));
        let skipped = recs.iter().filter(|r| r.model_size <= 1);
        assert!(skipped.clone().all(|r| r.verdict == "skipped"));
        if cell.fraction_certified < 1.0 {
            let (lo, hi) = (cell.min_ratio.unwrap(), cell.max_ratio.unwrap());
            assert!(0.0 <= lo && lo <= hi && hi <= 1.0);
        } else {
            assert!(cell.min_ratio.is_none());
        }
    }
}

#[test]
fn quantiles_are_monotone_in_kappa() {
    let base = ScenarioConfig {
        reps: 300,
        seed: 3,
        ..ScenarioConfig::default()
    };
    let out = run_quantile_study(&base, &QuantileSpec::default()).unwrap();
    assert_eq!(out.summaries.len(), 3);
    for s in &out.summaries {
        let q: Vec<f64> = out
            .rows
            .iter()
            .filter(|r| r.norm_label == s.label)
            .map(|r| r.quantile)
            .collect();
        assert_eq!(q.len(), 11);
        assert!(q.windows(2).all(|w| w[0] <= w[1]));
        assert_eq!(s.accepted + s.empty_models, 300);
    }
}

#[test]
fn coverage_is_near_nominal_at_two_levels() {
    for alpha in [0.05, 0.1] {
        let base = ScenarioConfig {
            n: 50,
            p: 6,
            lambda: 4.0,
            reps: 4000,
            alpha,
            seed: 11,
            ..ScenarioConfig::default()
        };
        let out = run_coverage_check(&base, &CoverageSpec::default()).unwrap();
        for row in &out.rows {
            assert!(
                (row.empirical - (1.0 - alpha)).abs() < 0.02,
                "{}: {}",
                row.conditioning,
                row.empirical
            );
        }
    }
}

#[test]
fn conditional_coverage_needs_enough_draws() {
    let base = ScenarioConfig {
        n: 40,
        p: 10,
        lambda: 3.0,
        reps: 200,
        ..ScenarioConfig::default()
    };
    let spec = CoverageSpec {
        conditional: true,
        ..CoverageSpec::default()
    };
    match run_coverage_check(&base, &spec) {
        Err(HarnessError::InsufficientData { accepted, required, .. }) => {
            assert!(accepted < required);
            assert_eq!(required, 1000);
        }
        other => panic!("expected insufficient data, got {other:?}"),
    }
}

#[test]
fn reciprocal_fit_with_noise_stays_within_three_standard_errors() {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let mut misses = 0;
    for _ in 0..200 {
        let pts: Vec<(f64, f64)> = (0..20)
            .map(|i| {
                let k = 0.5 + 0.025 * i as f64;
                let e: f64 = rng.sample(StandardNormal);
                (k, (2.0 + 3.0 * k) / (1.0 - k) + 0.5 * e)
            })
            .collect();
        let f = fit_reciprocal_curve(&pts).unwrap();
        if (f.a - 2.0).abs() > 3.0 * f.se_a || (f.b - 3.0).abs() > 3.0 * f.se_b {
            misses += 1;
        }
    }
    assert!(misses <= 6, "misses {misses}");
}

#[test]
fn reciprocal_fit_matches_grid_search_on_constant_data() {
    let pts: Vec<(f64, f64)> = (0..10).map(|i| (0.5 + 0.05 * i as f64, 4.0)).collect();
    let f = fit_reciprocal_curve(&pts).unwrap();
    let sse = |a: f64, b: f64| -> f64 {
        pts.iter().map(|&(k, q)| (q - (a + b * k) / (1.0 - k)).powi(2)).sum()
    };
    // coarse grid, then successively finer grids around the best point
    let (mut a0, mut b0, mut h) = (0.0, 0.0, 1.0);
    for _ in 0..12 {
        let mut best = (f64::INFINITY, a0, b0);
        for i in -20..=20 {
            for j in -20..=20 {
                let (a, b) = (a0 + h * i as f64, b0 + h * j as f64);
                let s = sse(a, b);
                if s < best.0 {
                    best = (s, a, b);
                }
            }
        }
        (a0, b0) = (best.1, best.2);
        h /= 8.0;
    }
    assert!((f.a - a0).abs() < 1e-6 && (f.b - b0).abs() < 1e-6, "{f:?} vs ({a0}, {b0})");
}

#[test]
fn one_shot_interval_from_files() {
    let dir = tempfile::tempdir().unwrap();
    let (xp, yp) = (dir.path().join("x.csv"), dir.path().join("y.csv"));
    std::fs::write(&xp, "1,0\n-1,1\n").unwrap();
    std::fs::write(&yp, "7.414214\n1.414214\n").unwrap();
    let x = read_matrix(&xp, false).unwrap();
    let y = read_vector(&yp, false).unwrap();
    let rep = run_ci(&x, &y, 2.0, 0, Some(1.0), 0.05, 20, 0.5).unwrap();
    assert_eq!(rep.rows.len(), 2);
    assert_eq!(rep.rows[0].conditioning, "signs");
    assert_eq!(rep.rows[1].conditioning, "model");
    assert_eq!(rep.rows[0].model, "[0 1]");
    assert_eq!(rep.rows[0].signs, "++");
    for r in &rep.rows {
        assert!(r.lower < r.estimate && r.estimate < r.upper);
    }
    std::fs::write(&yp, "1\nx\n").unwrap();
    assert!(matches!(read_vector(&yp, false), Err(HarnessError::Config(_))));
}
