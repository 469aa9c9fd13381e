//! Bessel and ball-transform properties checked against integral representations.

use std::f64::consts::{FRAC_PI_2, PI};

use gaussfluct::quadrature::{integrate, integrate_panels, Tolerance};
use gaussfluct::special::{ball_indicator_ft, bessel_j};
use statrs::function::gamma::gamma;

fn tight() -> Tolerance {
    Tolerance::new(1e-13, 1e-13)
}

#[test]
fn sqrt_t_bessel_is_bounded_below_one() {
    for nu in [0.0, 1.0] {
        let mut sup = 0.0f64;
        let n = 1_000_000;
        for i in 1..=n {
            let t = 1e4 * i as f64 / n as f64;
            sup = sup.max(t.sqrt() * bessel_j(nu, t).unwrap().abs());
        }
        assert!(sup < 1.0, "nu = {nu}: sup sqrt(t)|J| = {sup}");
        // the envelope sqrt(2/pi) is approached from the grid
        assert!(sup > 0.79, "nu = {nu}: sup = {sup}");
    }
    for nu in [0.5, 2.0, 5.0] {
        let sup = (1..=20_000)
            .map(|i| {
                let t = i as f64 * 0.5;
                t.sqrt() * bessel_j(nu, t).unwrap().abs()
            })
            .fold(0.0, f64::max);
        assert!(sup.is_finite() && sup < 1.5, "nu = {nu}: {sup}");
    }
}

#[test]
fn mehler_sonine_representation() {
    // s = sin(theta) turns the weight (1 - s^2)^(nu - 1/2) into a smooth factor
    for nu in [0.5, 1.0, 2.0] {
        for t in [0.5, 2.0, 8.0] {
            let f = |th: f64| (t * th.sin()).cos() * th.cos().powf(2.0 * nu);
            let integral = 2.0 * integrate(&f, 0.0, FRAC_PI_2, tight()).unwrap().value;
            let oracle = (t / 2.0).powf(nu) / (PI.sqrt() * gamma(nu + 0.5)) * integral;
            let j = bessel_j(nu, t).unwrap();
            assert!((j - oracle).abs() < 1e-8, "nu = {nu}, t = {t}: {j} vs {oracle}");
        }
    }
}

#[test]
fn schlafli_representation_for_integer_orders() {
    for nu in [0u32, 1, 2, 5] {
        for t in [0.3, 2.0, 8.0, 17.5, 40.0] {
            let f = |th: f64| (nu as f64 * th - t * th.sin()).cos();
            let oracle = integrate_panels(&f, 0.0, PI, 0.25, tight()).unwrap().value / PI;
            let j = bessel_j(nu as f64, t).unwrap();
            assert!((j - oracle).abs() < 1e-8, "nu = {nu}, t = {t}: {j} vs {oracle}");
        }
    }
}

fn window_max(d: usize, lo: f64, hi: f64, power: f64) -> f64 {
    let n = 20_000;
    (0..=n)
        .map(|i| {
            let s = lo * (hi / lo).powf(i as f64 / n as f64);
            s.powf(power) * ball_indicator_ft(d, 1.0, s).unwrap().abs()
        })
        .fold(0.0, f64::max)
}

#[test]
fn ball_transform_decays_faster_than_half_dimension() {
    for d in [2usize, 3, 4] {
        let half = d as f64 / 2.0;
        let near = window_max(d, 1.0, 10.0, half);
        let far = window_max(d, 100.0, 1000.0, half);
        assert!(near.is_finite() && far < near, "d = {d}: {near} then {far}");
        assert!(far < 0.5 * window_max(d, 10.0, 100.0, half), "d = {d}");

        let sharp = (d as f64 + 1.0) / 2.0;
        // envelope (2 pi)^(d/2) sqrt(2/pi)
        assert!(window_max(d, 1.0, 1000.0, sharp) < (2.0 * PI).powf(half), "d = {d}");
        let eps = 0.25;
        let a = window_max(d, 10.0, 100.0, sharp - eps);
        let b = window_max(d, 100.0, 1000.0, sharp - eps);
        assert!(b < a, "d = {d}: {a} then {b}");
    }
}

#[test]
fn disk_transform_matches_polar_quadrature() {
    // F(s) = int_0^1 r int_0^{2pi} cos(s r cos a) da dr = 2pi int_0^1 r J0(s r) dr
    for s in [0.0, 0.7, 3.0, 11.0] {
        let inner = |r: f64| {
            let g = |a: f64| (s * r * a.cos()).cos();
            r * integrate_panels(&g, 0.0, 2.0 * PI, 0.5, tight()).unwrap().value
        };
        let oracle = integrate(&inner, 0.0, 1.0, Tolerance::new(1e-11, 1e-11)).unwrap().value;
        let f = ball_indicator_ft(2, 1.0, s).unwrap();
        assert!((f - oracle).abs() < 1e-8, "s = {s}: {f} vs {oracle}");
    }
}
