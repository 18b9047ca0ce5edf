use proptest::prelude::*;
use rayon::prelude::*;

use wavehurst::estimator::{
    analyze_segment, gls_fit, hurst_from_slope, DesignMatrix, EstimatorConfig,
};
use wavehurst::spectrum::{covariance_model, CovarianceMode, ScaleRange};
use wavehurst::synth::{generate_fbm, FbmSpec};
use wavehurst::{estimate_segment, Error};

fn fbm(h: f64, n: usize, seed: u64) -> Vec<f64> {
    generate_fbm(&FbmSpec::new(h, n, seed)).unwrap().values
}

fn estimates(h: f64, n: usize, paths: u64, base: u64, cfg: &EstimatorConfig) -> Vec<(f64, f64)> {
    (0..paths)
        .into_par_iter()
        .map(|s| {
            let e = estimate_segment(&fbm(h, n, base + s), cfg).unwrap();
            (e.hurst, e.variance)
        })
        .collect()
}

fn mean_var(v: &[f64]) -> (f64, f64) {
    let m = v.iter().sum::<f64>() / v.len() as f64;
    let var = v.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (v.len() - 1) as f64;
    (m, var)
}

#[test]
fn slope_to_hurst() {
    assert_eq!(hurst_from_slope(2.0, 0.0).0, 0.5);
    assert!((hurst_from_slope(2.2, 0.0).0 - 0.6).abs() < 1e-15);
    assert_eq!(hurst_from_slope(2.0, 0.08).1, 0.02);
    // Out of range is reported, not clamped.
    assert_eq!(hurst_from_slope(3.5, 0.0).0, 1.25);
}

#[test]
fn coarse_perturbation_moves_fit_less() {
    let scales: Vec<usize> = (2..=10).collect();
    let counts: Vec<usize> = scales.iter().map(|j| (1usize << 15) >> j).collect();
    let x = DesignMatrix::from_scales(&scales).unwrap();
    let cov = covariance_model(&counts, CovarianceMode::Diagonal, 1.0).unwrap();
    let base: Vec<f64> = scales.iter().map(|&j| 3.0 + 2.2 * j as f64).collect();
    let fit0 = gls_fit(&base, &cov, &x).unwrap();
    assert!((fit0.c - 3.0).abs() < 1e-10 && (fit0.h - 2.2).abs() < 1e-10);
    let shifted = |i: usize| {
        let mut m = base.clone();
        m[i] += 0.1;
        gls_fit(&m, &cov, &x).unwrap()
    };
    let coarse = shifted(scales.len() - 1);
    let fine = shifted(0);
    assert!((coarse.h - 2.2).abs() < (fine.h - 2.2).abs());
    assert!((coarse.c - 3.0).abs() < (fine.c - 3.0).abs());
}

#[test]
fn single_scale_design_rejected() {
    assert!(matches!(
        DesignMatrix::from_scales(&[3, 3, 3]),
        Err(Error::Input(_))
    ));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn scale_invariance(seed in 0u64..1000, log_alpha in -8.0f64..8.0) {
        let alpha = log_alpha.exp();
        let x = fbm(0.6, 1 << 12, seed);
        let scaled: Vec<f64> = x.iter().map(|v| v * alpha).collect();
        let cfg = EstimatorConfig::default();
        let a = estimate_segment(&x, &cfg).unwrap();
        let b = estimate_segment(&scaled, &cfg).unwrap();
        prop_assert!((a.hurst - b.hurst).abs() < 1e-9);
        prop_assert!((b.c - a.c - 2.0 * alpha.log2()).abs() < 1e-9);
    }

    #[test]
    fn trend_invariance(seed in 0u64..1000, slope in -10.0f64..10.0, offset in -100.0f64..100.0) {
        let x = fbm(0.7, 1 << 12, seed);
        let trended: Vec<f64> = x.iter().enumerate().map(|(t, v)| v + offset + slope * t as f64).collect();
        let cfg = EstimatorConfig::default();
        let a = estimate_segment(&x, &cfg).unwrap();
        let b = estimate_segment(&trended, &cfg).unwrap();
        prop_assert!((a.hurst - b.hurst).abs() < 1e-6);
    }
}

#[test]
fn trend_invariance_without_periodic_wrap() {
    let x = fbm(0.6, 1 << 13, 17);
    let trended: Vec<f64> = x
        .iter()
        .enumerate()
        .map(|(t, v)| v - 0.3 * t as f64)
        .collect();
    let cfg = EstimatorConfig {
        boundary: wavehurst::wavelet::Boundary::Valid,
        ..Default::default()
    };
    let a = estimate_segment(&x, &cfg).unwrap();
    let b = estimate_segment(&trended, &cfg).unwrap();
    assert!((a.hurst - b.hurst).abs() < 1e-6);
}

#[test]
fn segment_of_two_pow_fifteen() {
    let est = estimates(0.6, 1 << 15, 200, 30_000, &EstimatorConfig::default());
    let inside = est.iter().filter(|e| (0.55..=0.65).contains(&e.0)).count();
    assert!(
        inside as f64 >= 0.99 * est.len() as f64,
        "{inside} of {}",
        est.len()
    );
}

#[test]
fn brownian_motion() {
    let est = estimates(0.5, 1 << 14, 200, 40_000, &EstimatorConfig::default());
    let inside = est.iter().filter(|e| (0.45..=0.55).contains(&e.0)).count();
    assert!(
        inside as f64 >= 0.9 * est.len() as f64,
        "{inside} of {}",
        est.len()
    );
}

#[test]
fn rmse_halves_when_length_quadruples() {
    let cfg = EstimatorConfig::default();
    for &h in &[0.3, 0.5, 0.6, 0.8] {
        let rmse = |n: usize| {
            let est = estimates(h, n, 300, 50_000, &cfg);
            (est.iter().map(|e| (e.0 - h).powi(2)).sum::<f64>() / est.len() as f64).sqrt()
        };
        let ratio = rmse(1 << 14) / rmse(1 << 12);
        assert!((0.35..=0.65).contains(&ratio), "H={h}: ratio {ratio}");
    }
}

#[test]
fn estimates_are_asymptotically_normal() {
    let est = estimates(0.6, 1 << 12, 1000, 60_000, &EstimatorConfig::default());
    let hs: Vec<f64> = est.iter().map(|e| e.0).collect();
    let (m, var) = mean_var(&hs);
    let n = hs.len() as f64;
    let z: Vec<f64> = hs.iter().map(|v| (v - m) / var.sqrt()).collect();
    let skew = z.iter().map(|v| v.powi(3)).sum::<f64>() / n;
    let kurt = z.iter().map(|v| v.powi(4)).sum::<f64>() / n;
    let jb = n / 6.0 * (skew * skew + (kurt - 3.0).powi(2) / 4.0);
    // 99th percentile of chi-squared with two degrees of freedom.
    assert!(jb < 9.21, "Jarque-Bera {jb}");
}

#[test]
fn full_covariance_variance_is_calibrated() {
    let cfg = EstimatorConfig {
        covariance: CovarianceMode::Full,
        ..Default::default()
    };
    let est = estimates(0.6, 1 << 12, 500, 70_000, &cfg);
    let hs: Vec<f64> = est.iter().map(|e| e.0).collect();
    let (_, var) = mean_var(&hs);
    let reported = est.iter().map(|e| e.1).sum::<f64>() / est.len() as f64;
    let ratio = var / reported;
    assert!(
        (0.5..=2.0).contains(&ratio),
        "sample / reported variance {ratio}"
    );
}

#[test]
fn degenerate_inputs() {
    let cfg = EstimatorConfig::default();
    let line: Vec<f64> = (0..4096).map(|t| 1.0 + 0.01 * t as f64).collect();
    assert!(matches!(
        estimate_segment(&line, &cfg),
        Err(Error::Degenerate(_))
    ));
    assert!(matches!(
        estimate_segment(&[3.0; 4096], &cfg),
        Err(Error::Degenerate(_))
    ));
    assert!(estimate_segment(&[1.0, 2.0, 3.0], &cfg).is_err());
}

#[test]
fn explicit_scale_range() {
    let x = fbm(0.6, 1 << 12, 5);
    let cfg = EstimatorConfig {
        scale_range: Some(ScaleRange::new(3, 8).unwrap()),
        ..Default::default()
    };
    let a = analyze_segment(&x, &cfg).unwrap();
    assert_eq!(a.spectrum.scales(), vec![3, 4, 5, 6, 7, 8]);
    assert_eq!(a.estimate.hurst, (a.fit.h - 1.0) / 2.0);
    let too_coarse = EstimatorConfig {
        scale_range: Some(ScaleRange::new(3, 10).unwrap()),
        ..Default::default()
    };
    assert!(matches!(
        estimate_segment(&x, &too_coarse),
        Err(Error::Config(_))
    ));
}
