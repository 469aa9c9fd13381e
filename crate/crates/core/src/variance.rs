//! Chaos variance theory: `w_{q,t}`, `v_{q,t}`, chaos and total variances,
//! the spectral form of the rank-one variance, growth-rate predictions and
//! the contraction-ratio estimator.

use std::f64::consts::PI;
use std::fmt::Write as _;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::Serialize;

use crate::domain::DomainSpec;
use crate::error::{invalid, Error, Result};
use crate::field::derive_seed;
use crate::hermite::{CaseLabel, HermiteExpansion};
use crate::quadrature::{integrate_panels, Estimate, Tolerance};
use crate::special::{unit_ball_volume, unit_sphere_area};
use crate::spectral::{Covariance, RadialCovariance, SpectralMeasure};

/// Initial panel width when the covariance has no known period.
pub const DEFAULT_PANEL: f64 = 0.5;
const CONTRACTION_CHUNKS: usize = 64;

fn panel_for<C: RadialCovariance + ?Sized>(rho: &C) -> f64 {
    rho.period().map_or(DEFAULT_PANEL, |p| 0.25 * p)
}

fn check_qt(q: usize, t: f64) -> Result<()> {
    if q == 0 {
        return Err(invalid("chaos order q must be at least 1"));
    }
    if !(t.is_finite() && t > 0.0) {
        return Err(invalid(format!("t must be positive and finite, got {t}")));
    }
    Ok(())
}

fn radial_integral<F: Fn(f64) -> f64>(f: &F, upper: f64, panel: f64, scale: f64) -> Result<Estimate> {
    let tol = Tolerance::new(1e-13 * scale.max(1.0), 1e-9);
    integrate_panels(f, 0.0, upper, panel, tol)
}

/// `w_{q,t} = int_{|z| <= t} C(z)^q dz`, reduced to a radial integral.
pub fn w_qt<C: RadialCovariance + ?Sized>(rho: &C, d: usize, q: usize, t: f64) -> Result<f64> {
    check_qt(q, t)?;
    let qi = q as i32;
    let f = |r: f64| rho.rho(r).powi(qi) * r.powi(d as i32 - 1);
    let est = radial_integral(&f, t, panel_for(rho), t.powi(d as i32))?;
    Ok(unit_sphere_area(d) * est.value)
}

/// `v_{q,t} = int C(z)^q g_D(z/t) dz`, integrated against the spherical
/// average of the covariogram.
pub fn v_qt<C: RadialCovariance + ?Sized>(rho: &C, domain: &DomainSpec, q: usize, t: f64) -> Result<f64> {
    check_qt(q, t)?;
    let d = domain.d;
    let qi = q as i32;
    let f = |r: f64| rho.rho(r).powi(qi) * r.powi(d as i32 - 1) * domain.radial_covariogram(r / t);
    let upper = domain.diameter() * t;
    let est = radial_integral(&f, upper, panel_for(rho), domain.volume() * t.powi(d as i32))?;
    Ok(unit_sphere_area(d) * est.value)
}

/// `Var(Y_{q,t}) = q! t^d v_{q,t}` for `Y_{q,t} = int_{tD} H_q(B_x) dx`.
pub fn chaos_variance<C: RadialCovariance + ?Sized>(rho: &C, domain: &DomainSpec, q: usize, t: f64) -> Result<f64> {
    let fact: f64 = (1..=q).map(|k| k as f64).product();
    Ok(fact * t.powi(domain.d as i32) * v_qt(rho, domain, q, t)?)
}

/// `Var(int_{tD} B_x dx) = t^{2d} int avg_{|u|=1} |F[1_D](t s u)|^2 mu(ds)`.
pub fn rank_one_variance(mu: &SpectralMeasure, domain: &DomainSpec, t: f64) -> Result<f64> {
    check_qt(1, t)?;
    let d = domain.d;
    mu.check_dimension(d)?;
    let panel = (0.5 * PI / (t * domain.diameter())).min(0.25);
    let f = |s: f64| domain.indicator_ft_sq_avg(t * s);
    let scale = domain.volume().powi(2);
    let est = mu.integrate(&f, panel, Tolerance::new(1e-14 * scale, 1e-9))?;
    Ok(t.powi(2 * d as i32) * est.value)
}

/// One chaos of a [`VarianceTable`].
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ChaosRow {
    pub q: usize,
    pub a_q: f64,
    pub w_qt: f64,
    pub v_qt: f64,
    /// `Var(Y_{q,t})`
    pub var_q: f64,
    /// `a_q^2 Var(Y_{q,t})`
    pub contribution: f64,
}

/// Chaos-by-chaos variance budget of `Y_t` at one scale.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VarianceTable {
    pub t: f64,
    pub d: usize,
    pub domain: String,
    pub measure: String,
    /// `m_t = a_0 t^d Vol(D)`
    pub mean: f64,
    pub rows: Vec<ChaosRow>,
    pub total_variance: f64,
    pub dominant_q: Option<usize>,
    pub rank_one_variance: Option<f64>,
}

impl VarianceTable {
    pub fn to_csv(&self) -> String {
        let mut out = String::from("q,w_qt,v_qt,var_q\n");
        for r in &self.rows {
            let _ = writeln!(out, "{},{:e},{:e},{:e}", r.q, r.w_qt, r.v_qt, r.var_q);
        }
        out
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }
}

/// `sigma_t^2 = sum_q a_q^2 Var(Y_{q,t})` over the nonzero coefficients of
/// `e`, with the first chaos taken from [`rank_one_variance`].
pub fn total_variance(e: &HermiteExpansion, cov: &Covariance, domain: &DomainSpec, t: f64) -> Result<VarianceTable> {
    if e.rank.is_none() {
        return Err(invalid("observable is constant; its variance vanishes identically"));
    }
    if cov.d != domain.d {
        return Err(invalid(format!(
            "covariance lives in dimension {} but the domain in {}",
            cov.d, domain.d
        )));
    }
    let d = domain.d;
    let mut rows = Vec::new();
    let mut r1 = None;
    for (q, a) in e.nonzero_terms() {
        let w = w_qt(cov, d, q, t)?;
        let v = v_qt(cov, domain, q, t)?;
        let var_q = if q == 1 {
            let r = rank_one_variance(&cov.measure, domain, t)?;
            r1 = Some(r);
            r
        } else {
            let fact: f64 = (1..=q).map(|k| k as f64).product();
            fact * t.powi(d as i32) * v
        };
        rows.push(ChaosRow {
            q,
            a_q: a,
            w_qt: w,
            v_qt: v,
            var_q,
            contribution: a * a * var_q,
        });
    }
    let total_variance = rows.iter().map(|r| r.contribution).sum();
    let mut dominant_q = None;
    let mut best = f64::NEG_INFINITY;
    for r in &rows {
        if r.contribution > best {
            best = r.contribution;
            dominant_q = Some(r.q);
        }
    }
    Ok(VarianceTable {
        t,
        d,
        domain: domain.to_string(),
        measure: cov.measure.id.clone(),
        mean: e.mean * t.powi(d as i32) * domain.volume(),
        rows,
        total_variance,
        dominant_q,
        rank_one_variance: r1,
    })
}

/// Scale against which `sigma_t^2` is compared.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum ReferenceQuantity {
    /// `t^d w_{R,t}`
    #[serde(rename = "t^d*w_{R,t}")]
    TdWRank,
    /// `t^d w_{R',t}`
    #[serde(rename = "t^d*w_{R',t}")]
    TdWSecondRank,
    #[serde(rename = "t^d")]
    Td,
}

/// Predicted order of `sigma_t^2`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RatePrediction {
    pub case: CaseLabel,
    /// Chaos whose `w_{q,t}` sets the rate, when one does.
    pub order: Option<usize>,
    pub reference: ReferenceQuantity,
    /// Power of `t`; absent when the decay of `C` is unknown.
    pub exponent: Option<f64>,
    /// An extra `log t` factor multiplies `t^exponent`.
    pub log_correction: bool,
}

impl RatePrediction {
    /// Numerical value of the reference quantity at `t`.
    pub fn reference_value<C: RadialCovariance + ?Sized>(&self, rho: &C, d: usize, t: f64) -> Result<f64> {
        let td = t.powi(d as i32);
        match self.order {
            Some(q) => Ok(td * w_qt(rho, d, q, t)?),
            None => Ok(td),
        }
    }

    /// `t^exponent`, times `log t` when flagged.
    pub fn scaling(&self, t: f64) -> Option<f64> {
        self.exponent
            .map(|e| t.powf(e) * if self.log_correction { t.ln() } else { 1.0 })
    }
}

/// Growth rate of `Var(Y_t)` for a classified case. `gamma` is the decay
/// exponent of `|C(x)| ~ |x|^{-gamma}`, which turns `w_{q,t}` into an
/// explicit power `t^{max(0, d - q gamma)}` (logarithmic at equality).
pub fn predicted_rate(case: &CaseLabel, d: usize, gamma: Option<f64>) -> Result<RatePrediction> {
    let (order, reference) = match case {
        CaseLabel::Excluded(why) => return Err(Error::ExcludedCase(why.clone())),
        CaseLabel::BreuerMajor | CaseLabel::RankOnePrimeGE5 => (None, ReferenceQuantity::Td),
        CaseLabel::RankTwo => (Some(2), ReferenceQuantity::TdWRank),
        CaseLabel::EvenRankGE4(r) => (Some(*r), ReferenceQuantity::TdWRank),
        CaseLabel::RankOnePrime2 => (Some(2), ReferenceQuantity::TdWSecondRank),
        CaseLabel::RankOnePrime4 => (Some(4), ReferenceQuantity::TdWSecondRank),
    };
    let df = d as f64;
    let (exponent, log_correction) = match order {
        None => (Some(df), false),
        Some(q) => match gamma {
            None => (None, false),
            Some(g) => {
                let excess = df - q as f64 * g;
                if excess.abs() < 1e-12 {
                    (Some(df), true)
                } else {
                    (Some(df + excess.max(0.0)), false)
                }
            }
        },
    };
    Ok(RatePrediction {
        case: case.clone(),
        order,
        reference,
        exponent,
        log_correction,
    })
}

/// Monte Carlo estimate with its standard error.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct McEstimate {
    pub estimate: f64,
    pub std_error: f64,
}

/// Estimates the contraction criterion
/// `t^d / Var(Y_{q,t})^2 int |C(x)|^r |C(y)|^r |C(z)|^{q-r} |C(x+y+z)|^{q-r}`
/// over three balls of radius `diam(D) t`, sampling `x, y, z` uniformly.
///
/// Work is split into fixed substreams merged in index order, so the result
/// does not depend on the thread count.
#[allow(clippy::too_many_arguments)]
pub fn contraction_ratio<C: RadialCovariance + ?Sized>(
    rho: &C,
    domain: &DomainSpec,
    q: usize,
    r: usize,
    t: f64,
    n_mc: usize,
    seed: u64,
) -> Result<McEstimate> {
    check_qt(q, t)?;
    if r == 0 || r >= q {
        return Err(invalid(format!(
            "contraction index r must lie in 1..={}, got {r}",
            q - 1
        )));
    }
    if n_mc < 1000 {
        return Err(invalid(format!("need at least 1000 Monte Carlo draws, got {n_mc}")));
    }
    let d = domain.d;
    let radius = domain.diameter() * t;
    let ball = unit_ball_volume(d) * radius.powi(d as i32);
    let (ri, si) = (r as i32, (q - r) as i32);

    let per_chunk = n_mc.div_ceil(CONTRACTION_CHUNKS);
    let partial: Vec<(f64, f64, usize)> = (0..CONTRACTION_CHUNKS)
        .into_par_iter()
        .map(|c| {
            let n = per_chunk.min(n_mc.saturating_sub(c * per_chunk));
            let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(seed, 1, c as u64));
            let mut x = vec![0.0; d];
            let mut y = vec![0.0; d];
            let mut z = vec![0.0; d];
            let (mut s1, mut s2) = (0.0, 0.0);
            for _ in 0..n {
                uniform_in_ball(&mut rng, radius, &mut x);
                uniform_in_ball(&mut rng, radius, &mut y);
                uniform_in_ball(&mut rng, radius, &mut z);
                let norm = |v: &[f64]| v.iter().map(|c| c * c).sum::<f64>().sqrt();
                let sum: f64 = (0..d).map(|l| (x[l] + y[l] + z[l]).powi(2)).sum::<f64>().sqrt();
                let f = (rho.rho(norm(&x)).abs() * rho.rho(norm(&y)).abs()).powi(ri)
                    * (rho.rho(norm(&z)).abs() * rho.rho(sum).abs()).powi(si);
                s1 += f;
                s2 += f * f;
            }
            (s1, s2, n)
        })
        .collect();
    let (s1, s2, n) = partial
        .iter()
        .fold((0.0, 0.0, 0usize), |acc, p| (acc.0 + p.0, acc.1 + p.1, acc.2 + p.2));
    let nf = n as f64;
    let mean = s1 / nf;
    let var = ((s2 - nf * mean * mean) / (nf - 1.0)).max(0.0);
    let var_y = chaos_variance(rho, domain, q, t)?;
    if var_y <= 0.0 {
        return Err(Error::ZeroVariance);
    }
    let scale = t.powi(d as i32) * ball.powi(3) / (var_y * var_y);
    Ok(McEstimate {
        estimate: scale * mean,
        std_error: scale * (var / nf).sqrt(),
    })
}

fn uniform_in_ball<R: Rng>(rng: &mut R, radius: f64, out: &mut [f64]) {
    let d = out.len();
    for c in out.iter_mut() {
        *c = rng.sample(StandardNormal);
    }
    let norm = out.iter().map(|c| c * c).sum::<f64>().sqrt().max(f64::MIN_POSITIVE);
    let u: f64 = rng.gen();
    let scale = radius * u.powf(1.0 / d as f64) / norm;
    out.iter_mut().for_each(|c| *c *= scale);
}
