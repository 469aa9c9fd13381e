//! Numerical integration: Gauss rules, a globally adaptive Gauss-Kronrod
//! integrator, and helpers for oscillatory and endpoint-singular integrands.

use std::cmp::Ordering;
use std::collections::BinaryHeap;
use std::f64::consts::PI;

use crate::error::{Error, Result};

/// Nodes and weights of an interpolatory quadrature rule.
#[derive(Debug, Clone)]
pub struct Rule {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

/// Gauss-Legendre rule with `n` nodes on `[-1, 1]`.
pub fn gauss_legendre(n: usize) -> Rule {
    assert!(n >= 1, "Gauss-Legendre rule needs at least one node");
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    let m = n.div_ceil(2);
    for i in 0..m {
        let mut z = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp;
        loop {
            let (mut p1, mut p2) = (1.0, 0.0);
            for j in 1..=n {
                let p3 = p2;
                p2 = p1;
                p1 = ((2 * j - 1) as f64 * z * p2 - (j - 1) as f64 * p3) / j as f64;
            }
            dp = n as f64 * (z * p1 - p2) / (z * z - 1.0);
            let z1 = z;
            z = z1 - p1 / dp;
            if (z - z1).abs() < 1e-15 {
                break;
            }
        }
        nodes[i] = -z;
        nodes[n - 1 - i] = z;
        let w = 2.0 / ((1.0 - z * z) * dp * dp);
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    Rule { nodes, weights }
}

/// Gauss-Hermite rule for the standard normal weight `exp(-x^2/2)/sqrt(2 pi)`.
///
/// Weights sum to one, so `sum w_i f(x_i)` approximates `E[f(N)]`.
pub fn gauss_hermite_normal(n: usize) -> Rule {
    assert!(n >= 1, "Gauss-Hermite rule needs at least one node");
    // Physicists' nodes by Newton iteration on orthonormal Hermite functions.
    let pim4 = PI.powf(-0.25);
    let nf = n as f64;
    let mut x = vec![0.0; n];
    let mut w = vec![0.0; n];
    let m = n.div_ceil(2);
    let mut z = 0.0;
    for i in 0..m {
        z = match i {
            0 => (2.0 * nf + 1.0).sqrt() - 1.85575 * (2.0 * nf + 1.0).powf(-1.0 / 6.0),
            1 => z - 1.14 * nf.powf(0.426) / z,
            2 => 1.86 * z - 0.86 * x[0],
            3 => 1.91 * z - 0.91 * x[1],
            _ => 2.0 * z - x[i - 2],
        };
        let mut pp = 0.0;
        for _ in 0..100 {
            let (mut p1, mut p2) = (pim4, 0.0);
            for j in 1..=n {
                let p3 = p2;
                p2 = p1;
                let jf = j as f64;
                p1 = z * (2.0 / jf).sqrt() * p2 - ((jf - 1.0) / jf).sqrt() * p3;
            }
            pp = (2.0 * nf).sqrt() * p2;
            let z1 = z;
            z = z1 - p1 / pp;
            if (z - z1).abs() <= 1e-14 * z.abs().max(1.0) {
                break;
            }
        }
        x[i] = z;
        x[n - 1 - i] = -z;
        w[i] = 2.0 / (pp * pp);
        w[n - 1 - i] = w[i];
    }
    let scale = 2f64.sqrt();
    let norm = PI.sqrt();
    let mut nodes: Vec<f64> = x.iter().map(|v| v * scale).collect();
    let mut weights: Vec<f64> = w.iter().map(|v| v / norm).collect();
    nodes.reverse();
    weights.reverse();
    Rule { nodes, weights }
}

/// Value and error estimate of an integral.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Estimate {
    pub value: f64,
    pub error: f64,
}

/// Convergence targets for the adaptive integrator. The run stops once the
/// summed error estimate is below `max(abs, rel * |value|)`.
#[derive(Debug, Clone, Copy)]
pub struct Tolerance {
    pub abs: f64,
    pub rel: f64,
    pub max_intervals: usize,
}

impl Tolerance {
    pub fn new(abs: f64, rel: f64) -> Self {
        Self {
            abs,
            rel,
            max_intervals: 200_000,
        }
    }

    fn target(&self, value: f64) -> f64 {
        self.abs.max(self.rel * value.abs())
    }
}

impl Default for Tolerance {
    fn default() -> Self {
        Self::new(1e-10, 1e-10)
    }
}

const XGK: [f64; 8] = [
    0.991_455_371_120_812_639_206_854_697_526_329,
    0.949_107_912_342_758_524_526_189_684_047_851,
    0.864_864_423_359_769_072_789_712_788_640_926,
    0.741_531_185_599_394_439_863_864_773_280_788,
    0.586_087_235_467_691_130_294_144_845_693_013,
    0.405_845_151_377_397_166_906_606_412_076_961,
    0.207_784_955_007_898_467_600_689_403_773_245,
    0.0,
];

const WGK: [f64; 8] = [
    0.022_935_322_010_529_224_963_732_008_058_970,
    0.063_092_092_629_978_553_290_700_663_189_204,
    0.104_790_010_322_250_183_839_876_322_541_518,
    0.140_653_259_715_525_918_745_189_590_510_238,
    0.169_004_726_639_267_902_826_583_426_598_550,
    0.190_350_578_064_785_409_913_256_402_421_014,
    0.204_432_940_075_298_892_414_161_999_234_649,
    0.209_482_141_084_727_828_012_999_174_891_714,
];

const WG: [f64; 4] = [
    0.129_484_966_168_869_693_270_611_432_679_082,
    0.279_705_391_489_276_667_901_467_771_423_780,
    0.381_830_050_505_118_944_950_369_775_488_975,
    0.417_959_183_673_469_387_755_102_040_816_327,
];

/// One 7/15-point Gauss-Kronrod step on `[a, b]`.
pub fn gauss_kronrod15<F: Fn(f64) -> f64 + ?Sized>(f: &F, a: f64, b: f64) -> Estimate {
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let fc = f(center);
    let mut kronrod = fc * WGK[7];
    let mut gauss = fc * WG[3];
    for (j, (&x, &wk)) in XGK.iter().zip(WGK.iter()).take(7).enumerate() {
        let dx = half * x;
        let f1 = f(center - dx);
        let f2 = f(center + dx);
        kronrod += wk * (f1 + f2);
        if j % 2 == 1 {
            gauss += WG[j / 2] * (f1 + f2);
        }
    }
    Estimate {
        value: kronrod * half,
        error: ((kronrod - gauss) * half).abs(),
    }
}

#[derive(Debug, Clone, Copy)]
struct Interval {
    a: f64,
    b: f64,
    est: Estimate,
}

impl PartialEq for Interval {
    fn eq(&self, other: &Self) -> bool {
        self.est.error == other.est.error
    }
}

impl Eq for Interval {}

impl PartialOrd for Interval {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Interval {
    fn cmp(&self, other: &Self) -> Ordering {
        self.est.error.total_cmp(&other.est.error)
    }
}

/// Globally adaptive Gauss-Kronrod integration starting from the partition
/// given by `breaks` (sorted, at least two entries).
pub fn integrate_partition<F: Fn(f64) -> f64 + ?Sized>(f: &F, breaks: &[f64], tol: Tolerance) -> Result<Estimate> {
    debug_assert!(breaks.len() >= 2);
    let mut heap = BinaryHeap::with_capacity(breaks.len() * 2);
    let mut value = 0.0;
    let mut error = 0.0;
    for w in breaks.windows(2) {
        if w[1] == w[0] {
            continue;
        }
        let est = gauss_kronrod15(f, w[0], w[1]);
        value += est.value;
        error += est.error;
        heap.push(Interval { a: w[0], b: w[1], est });
    }
    if !value.is_finite() {
        return Err(Error::Quadrature {
            value,
            achieved: f64::INFINITY,
            requested: tol.target(0.0),
        });
    }
    let mut recompute = 0usize;
    while error > tol.target(value) {
        if heap.len() >= tol.max_intervals {
            return Err(Error::Quadrature {
                value,
                achieved: error,
                requested: tol.target(value),
            });
        }
        let Some(worst) = heap.pop() else { break };
        let mid = 0.5 * (worst.a + worst.b);
        if mid <= worst.a || mid >= worst.b {
            // Interval exhausted at machine precision; keep what we have.
            heap.push(worst);
            return Err(Error::Quadrature {
                value,
                achieved: error,
                requested: tol.target(value),
            });
        }
        let left = gauss_kronrod15(f, worst.a, mid);
        let right = gauss_kronrod15(f, mid, worst.b);
        value += left.value + right.value - worst.est.value;
        error += left.error + right.error - worst.est.error;
        if !(value.is_finite() && error.is_finite()) {
            return Err(Error::Quadrature {
                value,
                achieved: f64::INFINITY,
                requested: tol.target(0.0),
            });
        }
        heap.push(Interval {
            a: worst.a,
            b: mid,
            est: left,
        });
        heap.push(Interval {
            a: mid,
            b: worst.b,
            est: right,
        });
        recompute += 1;
        // Resum periodically so cancellation in the running totals cannot drift.
        if recompute % 512 == 0 {
            value = heap.iter().map(|i| i.est.value).sum();
            error = heap.iter().map(|i| i.est.error).sum();
        }
    }
    value = heap.iter().map(|i| i.est.value).sum();
    error = heap.iter().map(|i| i.est.error).sum();
    Ok(Estimate { value, error })
}

/// Adaptive integral of `f` over `[a, b]`.
pub fn integrate<F: Fn(f64) -> f64 + ?Sized>(f: &F, a: f64, b: f64, tol: Tolerance) -> Result<Estimate> {
    if a == b {
        return Ok(Estimate { value: 0.0, error: 0.0 });
    }
    integrate_partition(f, &[a, b], tol)
}

/// Adaptive integral over `[a, b]` with an initial partition into panels no
/// wider than `panel`. Used for oscillatory integrands whose period is known,
/// so that no oscillation is skipped by the first Kronrod sample.
pub fn integrate_panels<F: Fn(f64) -> f64 + ?Sized>(
    f: &F,
    a: f64,
    b: f64,
    panel: f64,
    tol: Tolerance,
) -> Result<Estimate> {
    if a == b {
        return Ok(Estimate { value: 0.0, error: 0.0 });
    }
    let breaks = panel_breaks(a, b, panel);
    integrate_partition(f, &breaks, tol)
}

pub(crate) fn panel_breaks(a: f64, b: f64, panel: f64) -> Vec<f64> {
    let n = ((b - a) / panel).ceil().max(1.0) as usize;
    let step = (b - a) / n as f64;
    let mut breaks: Vec<f64> = (0..n).map(|i| a + step * i as f64).collect();
    breaks.push(b);
    breaks
}

/// `int_0^1 u^(a-1) (1-u)^(b-1) g(u) du` for `a, b > 0`.
///
/// Each half of the interval is mapped by a power substitution that absorbs
/// the algebraic endpoint factor, leaving a bounded integrand.
pub fn beta_weighted<F: Fn(f64) -> f64 + ?Sized>(a: f64, b: f64, g: &F, tol: Tolerance) -> Result<Estimate> {
    if !(a > 0.0 && b > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "beta-weighted integral needs positive exponents, got a = {a}, b = {b}"
        )));
    }
    // u = v^(1/p) on [0, 1/2] with p = min(a, 1)
    let pa = a.min(1.0);
    let left = |v: f64| {
        let u = v.powf(1.0 / pa);
        v.powf((a - pa) / pa) * (1.0 - u).powf(b - 1.0) * g(u) / pa
    };
    // 1 - u = v^(1/p) on [1/2, 1] with p = min(b, 1)
    let pb = b.min(1.0);
    let right = |v: f64| {
        let w = v.powf(1.0 / pb);
        v.powf((b - pb) / pb) * (1.0 - w).powf(a - 1.0) * g(1.0 - w) / pb
    };
    let half_tol = Tolerance {
        abs: tol.abs * 0.5,
        ..tol
    };
    let l = integrate(&left, 0.0, 0.5f64.powf(pa), half_tol)?;
    let r = integrate(&right, 0.0, 0.5f64.powf(pb), half_tol)?;
    Ok(Estimate {
        value: l.value + r.value,
        error: l.error + r.error,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn legendre_integrates_polynomials_exactly() {
        let rule = gauss_legendre(10);
        for k in 0..20 {
            let got: f64 = rule.nodes.iter().zip(&rule.weights).map(|(x, w)| w * x.powi(k)).sum();
            let exact = if k % 2 == 1 { 0.0 } else { 2.0 / (k as f64 + 1.0) };
            assert!((got - exact).abs() < 1e-13, "k = {k}: {got} vs {exact}");
        }
    }

    #[test]
    fn kronrod_exact_to_degree_22() {
        for k in 0..=22 {
            let est = gauss_kronrod15(&|x: f64| x.powi(k), 0.0, 1.0);
            assert!((est.value - 1.0 / (k as f64 + 1.0)).abs() < 1e-14, "k = {k}");
        }
        // The embedded Gauss rule is exact to degree 13, so the error estimate vanishes there.
        assert!(gauss_kronrod15(&|x: f64| x.powi(13), 0.0, 1.0).error < 1e-14);
    }

    #[test]
    fn hermite_rule_matches_normal_moments() {
        let rule = gauss_hermite_normal(128);
        let moment = |k: i32| -> f64 { rule.nodes.iter().zip(&rule.weights).map(|(x, w)| w * x.powi(k)).sum() };
        assert!((moment(0) - 1.0).abs() < 1e-13);
        assert!(moment(1).abs() < 1e-13);
        assert!((moment(2) - 1.0).abs() < 1e-12);
        assert!((moment(4) - 3.0).abs() < 1e-11);
        assert!((moment(8) - 105.0).abs() < 1e-9);
        assert!(rule.nodes.windows(2).all(|w| w[0] < w[1]));
    }

    #[test]
    fn adaptive_handles_oscillation_and_kinks() {
        let est = integrate_panels(&|x: f64| x.sin(), 0.0, 100.0 * PI, PI / 2.0, Tolerance::default()).unwrap();
        assert!(est.value.abs() < 1e-9);
        let est = integrate(&|x: f64| (x - 0.3).abs(), 0.0, 1.0, Tolerance::default()).unwrap();
        assert!((est.value - (0.045 + 0.245)).abs() < 1e-10);
    }

    #[test]
    fn beta_weighted_matches_beta_function() {
        // B(0.5, 0.5) = pi, B(2, 3) = 1/12
        let est = beta_weighted(0.5, 0.5, &|_| 1.0, Tolerance::default()).unwrap();
        assert!((est.value - PI).abs() < 1e-9);
        let est = beta_weighted(2.0, 3.0, &|_| 1.0, Tolerance::default()).unwrap();
        assert!((est.value - 1.0 / 12.0).abs() < 1e-12);
    }

    #[test]
    fn divergence_is_reported() {
        let err = integrate(&|x: f64| 1.0 / x, 0.0, 1.0, Tolerance::new(1e-12, 1e-12));
        assert!(matches!(err, Err(Error::Quadrature { .. })));
    }
}
