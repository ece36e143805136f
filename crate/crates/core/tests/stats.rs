mod common;

use common::inverse_cdf_samples;
use tvphi::{fit_linearized, fit_power, Histogram, PhiSpec};

#[test]
fn power_model_recovered_from_samples() {
    let (q, alpha) = (0.5, 0.05);
    let samples = inverse_cdf_samples(&PhiSpec::power(q).unwrap(), alpha, 1e5, 1_000_000, 3);
    let hist = Histogram::from_values_in_range(&samples, 64, 30_000.0).unwrap();
    let fit = fit_power(&hist).unwrap();
    assert!((0.45..=0.55).contains(&fit.q), "q = {}", fit.q);
    assert!((fit.alpha - alpha).abs() <= 0.1 * alpha, "alpha = {}", fit.alpha);
    assert_eq!(fit.alpha_infty, 0.0);
}

#[test]
fn linearized_model_recovered_from_samples() {
    let (q, m) = (0.35, 30.0);
    let alpha = 0.05 / (q * f64::powf(m, q - 1.0));
    let phi = PhiSpec::linearized(q, m).unwrap();
    let samples = inverse_cdf_samples(&phi, alpha, 400.0, 1_000_000, 4);
    let (upper, bins) = (100.0, 64);
    let hist = Histogram::from_values_in_range(&samples, bins, upper).unwrap();
    let fit = fit_linearized(&hist, None).unwrap();
    assert!((fit.cutoff - m).abs() <= upper / bins as f64, "M = {}", fit.cutoff);
    assert!((fit.q - q).abs() <= 0.1, "q = {}", fit.q);
    assert_eq!(fit.alpha_infty, fit.alpha * fit.q * fit.cutoff.powf(fit.q - 1.0));
}

#[test]
fn fit_stable_under_bin_doubling() {
    let samples = inverse_cdf_samples(&PhiSpec::power(0.5).unwrap(), 0.3, 3000.0, 1_000_000, 5);
    let coarse = fit_power(&Histogram::from_values_in_range(&samples, 64, 1000.0).unwrap()).unwrap();
    let fine = fit_power(&Histogram::from_values_in_range(&samples, 128, 1000.0).unwrap()).unwrap();
    assert!((coarse.q - fine.q).abs() <= 0.05 * coarse.q);
    assert!((coarse.alpha - fine.alpha).abs() <= 0.05 * coarse.alpha);
}

#[test]
fn free_cutoff_fit_never_worse_than_power() {
    for seed in 0..3 {
        let samples = inverse_cdf_samples(&PhiSpec::linearized(0.5, 20.0).unwrap(), 1.0, 150.0, 50_000, seed);
        let hist = Histogram::from_values_in_range(&samples, 64, 60.0).unwrap();
        let p = fit_power(&hist).unwrap();
        let l = fit_linearized(&hist, None).unwrap();
        assert!(l.residual <= p.residual + 1e-12);
    }
}

#[test]
fn sparse_heavy_tail_gives_positive_asymptotic_alpha() {
    // t^q has zero tail slope; the log fit still finds a linear tail
    for seed in 0..4 {
        let samples = inverse_cdf_samples(&PhiSpec::power(0.5).unwrap(), 0.3, 5000.0, 5000, seed);
        let hist = Histogram::from_values(&samples, 64).unwrap();
        let fit = fit_linearized(&hist, None).unwrap();
        assert!(fit.cutoff.is_finite());
        assert!(fit.alpha_infty > 0.0, "seed {seed}: alpha_infty {}", fit.alpha_infty);
    }
}

#[test]
fn fitted_linearized_curve_is_c1_at_cutoff() {
    let samples = inverse_cdf_samples(&PhiSpec::linearized(0.5, 20.0).unwrap(), 1.0, 150.0, 200_000, 9);
    let fit = fit_linearized(&Histogram::from_values_in_range(&samples, 64, 50.0).unwrap(), None).unwrap();
    let phi = fit.phi();
    let m = fit.cutoff;
    let d = 1e-7 * m;
    assert!((phi.value(m - d) - phi.value(m + d)).abs() < 1e-6);
    let left = phi.derivative(m - d).unwrap();
    let right = phi.derivative(m + d).unwrap();
    assert!((left - right).abs() < 1e-6 * right.abs().max(1.0));
}

#[test]
fn csv_exports() {
    let samples = inverse_cdf_samples(&PhiSpec::power(0.5).unwrap(), 0.3, 2000.0, 10_000, 1);
    let hist = Histogram::from_values(&samples, 16).unwrap();
    let csv = hist.to_csv();
    let mut lines = csv.lines();
    assert_eq!(lines.next(), Some("t_center,count,log_density"));
    assert_eq!(lines.count(), 16);
    let fit = fit_power(&hist).unwrap();
    let csv = fit.to_csv();
    let lines: Vec<&str> = csv.lines().collect();
    assert_eq!(lines[0], "C,alpha,q,M,alpha_infty,residual");
    assert_eq!(lines[1].split(',').nth(3), Some("inf"));
}
