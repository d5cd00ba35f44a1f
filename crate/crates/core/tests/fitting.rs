#![allow(clippy::needless_range_loop)]

//! End-to-end estimation behavior on simulated data: recovery, degenerate
//! mixtures, information-matrix health, and Yule–Walker agreement.

use mesinar_core::error::Error;
use mesinar_core::estimate::{
    fit_cml, fit_yw, info_criteria, neg_loglik, observed_information, sample_moments, score,
    FitOptions,
};
use mesinar_core::model::{simulate, IntSeries, ModelParams, Sign};
use nalgebra::Matrix5;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn omega1() -> ModelParams {
    ModelParams::new(0.8, 0.5, 5.0f64.sqrt(), 10.0, 10.0, Sign::Plus).unwrap()
}

fn omega2() -> ModelParams {
    ModelParams::new(0.2, 0.4, 2.0, 9.0, 7.0, Sign::Plus).unwrap()
}

#[test]
fn cml_recovers_truth_on_one_long_series() {
    let truth = omega2();
    let mut rng = ChaCha8Rng::seed_from_u64(404);
    let series = simulate(&truth, 4000, 500, &mut rng);
    let fit = fit_cml(&series, Sign::Plus, &FitOptions::default()).unwrap();
    let est = fit.estimates;
    assert!(fit.converged);
    assert!((est.phi() - 0.2).abs() < 0.06, "phi = {}", est.phi());
    assert!((est.p() - 0.4).abs() < 0.08, "p = {}", est.p());
    assert!((est.beta() - 2.0).abs() < 1.0, "beta = {}", est.beta());
    assert!((est.theta1() - 9.0).abs() < 0.9, "t1 = {}", est.theta1());
    assert!((est.theta2() - 7.0).abs() < 0.9, "t2 = {}", est.theta2());
    // The optimum must beat the true parameters on the same data.
    let at_truth = neg_loglik(&series, &truth).unwrap();
    assert!(-fit.loglik <= at_truth + 1e-6);
    // First-order condition at the reported optimum.
    let g = score(&series, &est).unwrap();
    let n = series.len() as f64;
    for (j, gj) in g.iter().enumerate() {
        assert!(gj.abs() < 1e-4 * n, "score[{j}] = {gj} too large");
    }
}

#[test]
fn cml_degenerate_mixture_finds_small_phi() {
    // Pure-innovation data: phi-hat should collapse and the innovation
    // estimates should track the Skellam marginal.
    let truth = ModelParams::new(1e-12, 0.5, 1.0, 5.0, 3.0, Sign::Plus).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let series = simulate(&truth, 3000, 0, &mut rng);
    let delta = mesinar_core::estimate::detect_delta(&series).unwrap();
    let fit = fit_cml(&series, delta, &FitOptions::default()).unwrap();
    let est = fit.estimates;
    assert!(est.phi() < 0.05, "phi = {}", est.phi());
    assert!((est.theta1() - 5.0).abs() < 0.6, "t1 = {}", est.theta1());
    assert!((est.theta2() - 3.0).abs() < 0.6, "t2 = {}", est.theta2());
}

#[test]
fn information_matrix_is_symmetric_and_positive_definite_at_optimum() {
    let truth = omega2();
    let mut rng = ChaCha8Rng::seed_from_u64(99);
    let series = simulate(&truth, 2000, 500, &mut rng);
    let fit = fit_cml(&series, Sign::Plus, &FitOptions::default()).unwrap();
    let est = fit.estimates;

    // Raw finite-difference Hessian of the log-likelihood from the public
    // analytic score; asymmetry is pure finite-difference noise.
    let w0 = est.as_array();
    let mut h = [[0.0f64; 5]; 5];
    for j in 0..5 {
        let mut step = 1e-4 * w0[j].abs().max(0.05);
        if j < 2 {
            step = step.min(0.25 * w0[j].min(1.0 - w0[j]));
        }
        let mut wp = w0;
        wp[j] += step;
        let mut wm = w0;
        wm[j] -= step;
        let pp = ModelParams::new(wp[0], wp[1], wp[2], wp[3], wp[4], Sign::Plus).unwrap();
        let pm = ModelParams::new(wm[0], wm[1], wm[2], wm[3], wm[4], Sign::Plus).unwrap();
        let sp = score(&series, &pp).unwrap();
        let sm = score(&series, &pm).unwrap();
        for i in 0..5 {
            h[i][j] = (sp[i] - sm[i]) / (2.0 * step);
        }
    }
    let n = (series.len() - 1) as f64;
    let mut max_asym = 0.0f64;
    for i in 0..5 {
        for j in 0..5 {
            max_asym = max_asym.max((h[i][j] - h[j][i]).abs() / n);
        }
    }
    assert!(max_asym < 1e-4, "asymmetry = {max_asym}");

    let info = observed_information(&series, &est).unwrap();
    let m = Matrix5::from_fn(|i, j| info[i][j]);
    let eig = m.symmetric_eigen();
    for (i, ev) in eig.eigenvalues.iter().enumerate() {
        assert!(*ev > 0.0, "eigenvalue {i} = {ev}");
    }
    assert!(fit.std_errors.is_some());
}

#[test]
fn standard_errors_calibrate_against_replication_spread() {
    // Empirical SD of phi-hat across replications should be within a factor
    // 1.5 of the average reported standard error.
    let truth = omega1();
    let reps = 40;
    let mut phis = Vec::new();
    let mut ses = Vec::new();
    for r in 0..reps {
        let mut rng = ChaCha8Rng::seed_from_u64(1000 + r);
        let series = simulate(&truth, 800, 500, &mut rng);
        let opts = FitOptions {
            seed: r,
            ..FitOptions::default()
        };
        if let Ok(fit) = fit_cml(&series, Sign::Plus, &opts) {
            phis.push(fit.estimates.phi());
            if let Some(se) = fit.std_errors {
                ses.push(se[0]);
            }
        }
    }
    assert!(phis.len() as f64 >= 0.9 * reps as f64, "too many failures");
    let mean = phis.iter().sum::<f64>() / phis.len() as f64;
    let sd = (phis.iter().map(|p| (p - mean) * (p - mean)).sum::<f64>()
        / (phis.len() - 1) as f64)
        .sqrt();
    let mean_se = ses.iter().sum::<f64>() / ses.len() as f64;
    let ratio = sd / mean_se;
    assert!(
        (1.0 / 1.5..=1.5).contains(&ratio),
        "sd = {sd}, mean se = {mean_se}, ratio = {ratio}"
    );
}

#[test]
fn score_is_centered_at_truth() {
    let truth = omega1();
    let reps = 200;
    let mut sums = [0.0f64; 5];
    let mut sumsq = [0.0f64; 5];
    for r in 0..reps {
        let mut rng = ChaCha8Rng::seed_from_u64(5000 + r);
        let series = simulate(&truth, 200, 500, &mut rng);
        let g = score(&series, &truth).unwrap();
        for j in 0..5 {
            sums[j] += g[j];
            sumsq[j] += g[j] * g[j];
        }
    }
    let nf = reps as f64;
    for j in 0..5 {
        let mean = sums[j] / nf;
        let var = (sumsq[j] / nf - mean * mean).max(1e-12);
        let se = (var / nf).sqrt();
        assert!(mean.abs() < 3.0 * se, "component {j}: mean {mean}, 3se {}", 3.0 * se);
    }
}

#[test]
fn yw_tracks_cml_on_long_series() {
    let truth = omega1();
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let series = simulate(&truth, 4000, 500, &mut rng);
    let cml = fit_cml(&series, Sign::Plus, &FitOptions::default()).unwrap();
    let yw = fit_yw(
        &series,
        cml.estimates.p(),
        cml.estimates.theta(),
        Sign::Plus,
    )
    .unwrap();
    assert!(yw.std_errors.is_none());
    assert!(
        (yw.estimates.phi() - cml.estimates.phi()).abs() < 0.08,
        "phi yw = {}, cml = {}",
        yw.estimates.phi(),
        cml.estimates.phi()
    );
    assert!((yw.estimates.theta1() - 10.0).abs() < 3.0);
    assert!((yw.estimates.theta2() - 10.0).abs() < 3.0);
}

#[test]
fn criteria_ordering_and_short_series_errors() {
    for n in [10usize, 292, 1000] {
        let c = info_criteria(-100.0, 5, n);
        assert!(c.hqic < c.aic, "hqic >= aic at n = {n}");
    }
    let short = IntSeries::new(vec![1, 2, 3]);
    assert!(matches!(
        fit_cml(&short, Sign::Plus, &FitOptions::default()),
        Err(Error::SeriesTooShort { .. })
    ));
    assert!(matches!(
        sample_moments(&IntSeries::new(vec![7])),
        Err(Error::SeriesTooShort { .. })
    ));
}

#[test]
fn delta_detection_on_simulated_groups() {
    use mesinar_core::estimate::detect_delta;
    let neg = ModelParams::new(0.2, 0.8, 5.0f64.sqrt(), 10.0, 10.0, Sign::Minus).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(55);
    let series = simulate(&neg, 2000, 500, &mut rng);
    assert_eq!(detect_delta(&series).unwrap(), Sign::Minus);

    let pos = omega1();
    let series = simulate(&pos, 2000, 500, &mut rng);
    assert_eq!(detect_delta(&series).unwrap(), Sign::Plus);

    // For i.i.d. data the sign is noise; only absence of error is promised.
    let iid = ModelParams::new(1e-9, 0.5, 1.0, 4.0, 4.0, Sign::Plus).unwrap();
    let series = simulate(&iid, 500, 0, &mut rng);
    assert!(detect_delta(&series).is_ok());
}

#[test]
fn neg_loglik_is_plus_infinite_beyond_series_overflow() {
    // Far outside the moderate-argument domain the Bessel series sum
    // overflows; the objective must saturate to +inf, never to a spurious
    // minimum.
    let series = IntSeries::new(vec![0, 1, -1, 2, 0, -2, 1, 0, 1, -1]);
    let huge_innov = ModelParams::new(0.3, 0.5, 1.0, 2e5, 2e5, Sign::Plus).unwrap();
    assert_eq!(neg_loglik(&series, &huge_innov).unwrap(), f64::INFINITY);
    let huge_thin = ModelParams::new(0.3, 0.5, 900.0, 1.0, 1.0, Sign::Plus).unwrap();
    assert_eq!(neg_loglik(&series, &huge_thin).unwrap(), f64::INFINITY);
}

#[test]
fn fit_survives_an_outlier_heavy_series() {
    // A lone large excursion widens every lookup window; the fit must stay
    // finite and well-behaved rather than panic or blow up.
    let truth = omega2();
    let mut rng = ChaCha8Rng::seed_from_u64(3131);
    let mut vals = simulate(&truth, 600, 500, &mut rng).values().to_vec();
    vals[300] = 80;
    vals[301] = -75;
    let series = IntSeries::new(vals);
    let fit = fit_cml(&series, Sign::Plus, &FitOptions::default());
    let fit = match fit {
        Ok(f) => f,
        Err(Error::FitDidNotConverge(best)) => *best,
        Err(e) => panic!("unexpected error: {e}"),
    };
    assert!(fit.loglik.is_finite());
    assert!(fit.estimates.theta1() > 0.0 && fit.estimates.theta2() > 0.0);
}
