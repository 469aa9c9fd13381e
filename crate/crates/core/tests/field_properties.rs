//! Second-order law of the wave sampler and its approach to Gaussianity.

use gaussfluct::field::{
    build_sampler, derive_seed, empirical_covariance, empirical_covariance_along, CovarianceEstimate,
};
use gaussfluct::special::{bessel_j, normalized_bessel_rho};
use gaussfluct::spectral::{bessel_spectral_measure, SpectralMeasure};
use gaussfluct::stats::Moments;

const LAGS: [f64; 3] = [1.0, 2.404_825_557_695_773, 5.0];

fn within_3se(est: &CovarianceEstimate, exact: f64) -> bool {
    (est.mean - exact).abs() <= 3.0 * est.std_error
}

#[test]
fn berry_covariance_within_three_sigma() {
    let est = empirical_covariance(&SpectralMeasure::berry(), 2, 64, &LAGS, 10_000, 11).unwrap();
    for e in &est {
        let j0 = bessel_j(0.0, e.lag).unwrap();
        assert!(
            within_3se(e, j0),
            "lag {}: {} +- {} vs {j0}",
            e.lag,
            e.mean,
            e.std_error
        );
        assert!(e.std_error > 0.0 && e.std_error < 0.02);
    }
}

#[test]
fn bessel_family_covariance_within_three_sigma() {
    let mu = bessel_spectral_measure(2, 1.0).unwrap();
    let est = empirical_covariance(&mu, 2, 64, &[0.5, 3.0], 10_000, 12).unwrap();
    for e in &est {
        let rho = normalized_bessel_rho(1.0, e.lag).unwrap();
        assert!(
            within_3se(e, rho),
            "lag {}: {} +- {} vs {rho}",
            e.lag,
            e.mean,
            e.std_error
        );
    }
}

#[test]
fn berry_covariance_in_three_dimensions() {
    let est = empirical_covariance(&SpectralMeasure::berry(), 3, 64, &[1.0, 4.0], 10_000, 13).unwrap();
    for e in &est {
        let sinc = e.lag.sin() / e.lag;
        assert!(within_3se(e, sinc), "lag {}: {} vs {sinc}", e.lag, e.mean);
    }
}

#[test]
fn stationarity_and_isotropy() {
    let mu = SpectralMeasure::berry();
    let a = (0.9f64.cos(), 0.9f64.sin());
    let cases = [
        ([1.0, 0.0], [37.5, -12.25]),
        ([a.0, a.1], [0.0, 0.0]),
        ([0.0, -1.0], [-4.0, 250.0]),
    ];
    for (k, (dir, origin)) in cases.iter().enumerate() {
        let est = empirical_covariance_along(&mu, 2, 64, &LAGS, dir, origin, 10_000, 100 + k as u64).unwrap();
        for e in &est {
            let j0 = bessel_j(0.0, e.lag).unwrap();
            assert!(
                within_3se(e, j0),
                "case {k}, lag {}: {} +- {} vs {j0}",
                e.lag,
                e.mean,
                e.std_error
            );
        }
    }
}

#[test]
fn excess_kurtosis_shrinks_like_inverse_wave_count() {
    // for iid uniform phases the exact value is -3 / (2M)
    let mu = SpectralMeasure::berry();
    let n = 10_000;
    for m in [16usize, 256, 4096] {
        let values: Vec<f64> = (0..n)
            .map(|i| {
                let s = build_sampler(&mu, 2, m, derive_seed(77, m as u64, i)).unwrap();
                s.evaluate(&[0.3, -1.7]).unwrap()[0]
            })
            .collect();
        let mo = Moments::of(&values).unwrap();
        let se = (24.0 / n as f64).sqrt();
        let excess = mo.excess_kurtosis;
        assert!(
            excess.abs() < 10.0 / m as f64 + 5.0 * se,
            "M = {m}: excess kurtosis {excess}"
        );
        assert!(
            (mo.variance - 1.0).abs() < 5.0 * (2.0 / n as f64).sqrt(),
            "M = {m}: variance {}",
            mo.variance
        );
    }
}

#[test]
fn values_are_bounded_by_total_amplitude() {
    let s = build_sampler(&SpectralMeasure::berry(), 2, 50, 3).unwrap();
    let bound = (2.0 * 50.0f64).sqrt();
    let pts: Vec<f64> = (0..400).map(|i| (i as f64 * 0.37).sin() * 100.0).collect();
    for v in s.evaluate(&pts).unwrap() {
        assert!(v.abs() <= bound + 1e-12);
    }
}
