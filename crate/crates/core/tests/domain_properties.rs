//! Covariogram and Fourier properties of the shipped domains.

use std::f64::consts::PI;

use gaussfluct::domain::{DecayClass, DomainSpec};
use gaussfluct::quadrature::{integrate, integrate_panels, Tolerance};
use gaussfluct::special::bessel_j;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn domains() -> Vec<DomainSpec> {
    vec![
        DomainSpec::ball(2, 1.0).unwrap(),
        DomainSpec::ball(3, 0.5).unwrap(),
        DomainSpec::cube(2, 1.0).unwrap(),
        DomainSpec::cube(3, 2.0).unwrap(),
    ]
}

#[test]
fn plancherel_volume_for_balls() {
    for (d, radius) in [(2usize, 1.0), (3, 1.0), (2, 0.5)] {
        let dom = DomainSpec::ball(d, radius).unwrap();
        let omega = if d == 2 { 2.0 * PI } else { 4.0 * PI };
        let f = |s: f64| dom.indicator_ft_sq_avg(s) * s.powi(d as i32 - 1);
        let cut = 2000.0 / radius;
        let body = integrate_panels(&f, 0.0, cut, 1.0 / radius, Tolerance::new(1e-12, 1e-10))
            .unwrap()
            .value;
        // averaged |F|^2 s^(d-1) ~ c s^-2 beyond the cut
        let c = f(cut) * cut * cut;
        let mean_c = (0..64)
            .map(|k| {
                let s = cut + k as f64 * PI / (64.0 * radius);
                f(s) * s * s
            })
            .sum::<f64>()
            / 64.0;
        let tail = mean_c.max(0.0) / cut;
        let total = omega * (body + tail) / (2.0 * PI).powi(d as i32);
        let vol = dom.volume();
        assert!(
            (total / vol - 1.0).abs() < 1e-4,
            "d = {d}, r = {radius}: {total} vs {vol} (c = {c})"
        );
    }
}

#[test]
fn covariogram_transform_is_squared_indicator_transform() {
    let dom = DomainSpec::ball(2, 1.0).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(17);
    for _ in 0..20 {
        let y = [rng.gen_range(-12.0..12.0), rng.gen_range(-12.0..12.0)];
        let s = f64::hypot(y[0], y[1]);
        let g = |u: f64| 2.0 * PI * u * dom.radial_covariogram(u) * bessel_j(0.0, s * u).unwrap();
        let lhs = integrate_panels(&g, 0.0, 2.0, 0.1, Tolerance::new(1e-12, 1e-12))
            .unwrap()
            .value;
        let rhs = dom.indicator_ft(&y).norm_sqr();
        assert!((lhs - rhs).abs() < 1e-4, "y = {y:?}: {lhs} vs {rhs}");
    }
}

#[test]
fn covariogram_transform_for_a_square_by_direct_quadrature() {
    let dom = DomainSpec::cube(2, 1.0).unwrap();
    for y in [[0.0, 0.0], [3.0, 0.0], [1.2, -2.5], [7.0, 4.0]] {
        let tol = Tolerance::new(1e-11, 1e-11);
        let inner = |x0: f64| {
            let h = |x1: f64| dom.covariogram(&[x0, x1]) * (y[0] * x0 + y[1] * x1).cos();
            integrate_panels(&h, -1.0, 1.0, 0.5, tol).unwrap().value
        };
        let lhs = integrate_panels(&inner, -1.0, 1.0, 0.5, tol).unwrap().value;
        let rhs = dom.indicator_ft(&y).norm_sqr();
        assert!((lhs - rhs).abs() < 1e-6, "y = {y:?}: {lhs} vs {rhs}");
    }
}

fn decay_window_max(dom: &DomainSpec, lo: f64, hi: f64) -> f64 {
    let d = dom.d;
    let n = 50_000;
    (0..=n)
        .map(|i| {
            let s = lo * (hi / lo).powf(i as f64 / n as f64);
            let mut y = vec![0.0; d];
            y[0] = s;
            s.powf(d as f64 / 2.0) * dom.indicator_ft(&y).norm()
        })
        .fold(0.0, f64::max)
}

#[test]
fn decay_classification() {
    for d in [2usize, 3] {
        let ball = DomainSpec::ball(d, 1.0).unwrap();
        assert_eq!(ball.decay_class(), DecayClass::LittleOD2);
        let windows: Vec<f64> = [(1e2, 1e3), (1e3, 1e4)]
            .iter()
            .map(|&(a, b)| decay_window_max(&ball, a, b))
            .collect();
        assert!(windows[1] < windows[0], "ball d = {d}: {windows:?}");

        let cube = DomainSpec::cube(d, 1.0).unwrap();
        assert_ne!(cube.decay_class(), DecayClass::LittleOD2);
        let windows: Vec<f64> = [(1e2, 1e3), (1e3, 1e4)]
            .iter()
            .map(|&(a, b)| decay_window_max(&cube, a, b))
            .collect();
        assert!(windows[1] >= 0.9 * windows[0], "cube d = {d}: {windows:?}");
    }
}

#[test]
fn covariogram_symmetry_bounds_and_continuity() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for dom in domains() {
        let d = dom.d;
        let vol = dom.volume();
        let reach = dom.diameter() * 1.1;
        let delta = 1e-4;
        let mut modulus = 0.0f64;
        for _ in 0..2000 {
            let x: Vec<f64> = (0..d).map(|_| rng.gen_range(-reach..reach)).collect();
            let neg: Vec<f64> = x.iter().map(|v| -v).collect();
            let g = dom.covariogram(&x);
            assert!(
                (g - dom.covariogram(&neg)).abs() <= 1e-12 * vol,
                "{dom}: asymmetric at {x:?}"
            );
            assert!((-1e-12..=vol * (1.0 + 1e-12)).contains(&g), "{dom}: g = {g} at {x:?}");
            let mut xs = x.clone();
            xs[rng.gen_range(0..d)] += delta;
            modulus = modulus.max((dom.covariogram(&xs) - g).abs() / delta);
        }
        assert!((dom.covariogram(&vec![0.0; d]) / vol - 1.0).abs() < 1e-12, "{dom}");
        // the gradient of g_D is bounded by the surface measure of D
        let surface = match dom.d {
            2 => 2.0 * PI * dom.diameter() / 2.0 + 4.0 * dom.diameter(),
            _ => 4.0 * PI * dom.diameter().powi(2) + 6.0 * dom.diameter().powi(2),
        };
        assert!(modulus < surface, "{dom}: modulus {modulus}");
    }
}

#[test]
fn radial_covariogram_integrates_to_squared_volume() {
    // int g_D = Vol(D)^2
    for dom in domains() {
        let omega = if dom.d == 2 { 2.0 * PI } else { 4.0 * PI };
        let f = |u: f64| omega * u.powi(dom.d as i32 - 1) * dom.radial_covariogram(u);
        let total = integrate(&f, 0.0, dom.diameter(), Tolerance::new(1e-10, 1e-9))
            .unwrap()
            .value;
        let expect = dom.volume().powi(2);
        let tol = if matches!(dom.d, 3) && dom.to_string().starts_with("cube") {
            5e-3
        } else {
            1e-6
        };
        assert!((total / expect - 1.0).abs() < tol, "{dom}: {total} vs {expect}");
    }
}
