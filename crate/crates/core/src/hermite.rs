//! Hermite polynomials (probabilists' convention), Hermite expansions of
//! observables, Hermite ranks, and the case split of the spectral CLT.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::quadrature::{gauss_hermite_normal, gauss_legendre};

/// Coefficients whose chaos norm `sqrt(q!) |a_q|` falls below this fraction of
/// `sqrt(E[phi(N)^2])` are treated as exactly zero.
pub const RANK_TOL: f64 = 1e-9;
pub const DEFAULT_Q_MAX: usize = 20;
pub const DEFAULT_QUAD_ORDER: usize = 128;

/// `H_q(x)` by the recurrence `H_{q+1} = x H_q - q H_{q-1}`.
pub fn hermite_h(q: usize, x: f64) -> f64 {
    let (mut prev, mut cur) = (0.0, 1.0);
    for k in 0..q {
        let next = x * cur - k as f64 * prev;
        prev = cur;
        cur = next;
    }
    cur
}

/// Orthonormal values `H_q(x) / sqrt(q!)` for `q = 0..=q_max`.
pub(crate) fn normalized_hermite_all(q_max: usize, x: f64, out: &mut Vec<f64>) {
    out.clear();
    out.push(1.0);
    if q_max == 0 {
        return;
    }
    out.push(x);
    for q in 1..q_max {
        let next = (x * out[q] - (q as f64).sqrt() * out[q - 1]) / ((q + 1) as f64).sqrt();
        out.push(next);
    }
}

fn factorial(q: usize) -> f64 {
    (1..=q).map(|k| k as f64).product()
}

/// Hermite expansion `phi = a_0 + sum_{q>=1} a_q H_q` truncated at `q_max`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HermiteExpansion {
    /// `a_0 = E[phi(N)]`
    pub mean: f64,
    /// `coeffs[q - 1] = a_q` for `q = 1..=q_max`
    pub coeffs: Vec<f64>,
    pub q_max: usize,
    /// Smallest `q >= 1` with `a_q != 0`; `None` when `phi` is constant.
    pub rank: Option<usize>,
    /// Rank of `phi - a_0 - a_R H_R`; `None` when no further coefficient is
    /// nonzero up to `q_max` (reported as infinite).
    pub second_rank: Option<usize>,
    pub has_even_coeff: bool,
    /// `a_0^2 + sum_q q! a_q^2`
    pub l2_norm_sq: f64,
}

impl HermiteExpansion {
    /// Builds the expansion from the normalized projections
    /// `c_q = E[phi(N) H_q(N)] / sqrt(q!)`, `q = 0..=q_max`.
    fn from_projections(proj: &[f64]) -> Self {
        let q_max = proj.len() - 1;
        let l2_norm_sq: f64 = proj.iter().map(|c| c * c).sum();
        let cutoff = RANK_TOL * l2_norm_sq.sqrt();
        let mut coeffs = Vec::with_capacity(q_max);
        for (q, &c) in proj.iter().enumerate().skip(1) {
            if c.abs() < cutoff {
                coeffs.push(0.0);
            } else {
                coeffs.push(c / factorial(q).sqrt());
            }
        }
        let nonzero: Vec<usize> = (1..=q_max).filter(|&q| coeffs[q - 1] != 0.0).collect();
        let rank = nonzero.first().copied();
        let second_rank = nonzero.get(1).copied();
        let has_even_coeff = nonzero.iter().any(|q| q % 2 == 0);
        Self {
            mean: proj[0],
            coeffs,
            q_max,
            rank,
            second_rank,
            has_even_coeff,
            l2_norm_sq,
        }
    }

    /// Exact expansion from given coefficients `[a_0, a_1, ..., a_qmax]`.
    pub fn from_coefficients(a: &[f64]) -> Result<Self> {
        if a.len() < 2 {
            return Err(invalid("need at least a_0 and a_1"));
        }
        let proj: Vec<f64> = a.iter().enumerate().map(|(q, &aq)| aq * factorial(q).sqrt()).collect();
        Ok(Self::from_projections(&proj))
    }

    /// `a_q`, with `a_0` the mean; zero beyond `q_max`.
    pub fn coeff(&self, q: usize) -> f64 {
        match q {
            0 => self.mean,
            q if q <= self.q_max => self.coeffs[q - 1],
            _ => 0.0,
        }
    }

    /// Evaluates the truncated expansion at `x`.
    pub fn eval(&self, x: f64) -> f64 {
        let mut sum = self.mean;
        let (mut prev, mut cur) = (0.0, 1.0);
        for (k, &a) in self.coeffs.iter().enumerate() {
            let next = x * cur - k as f64 * prev;
            prev = cur;
            cur = next;
            sum += a * cur;
        }
        sum
    }

    /// Nonzero `(q, a_q)` pairs for `q >= 1`.
    pub fn nonzero_terms(&self) -> impl Iterator<Item = (usize, f64)> + '_ {
        self.coeffs
            .iter()
            .enumerate()
            .filter(|(_, a)| **a != 0.0)
            .map(|(i, &a)| (i + 1, a))
    }
}

fn check_orders(q_max: usize, quad_order: usize) -> Result<()> {
    if q_max < 2 {
        return Err(invalid(format!("q_max must be at least 2, got {q_max}")));
    }
    if quad_order < 2 * q_max {
        return Err(invalid(format!(
            "quadrature order {quad_order} too small for q_max = {q_max} (need at least {})",
            2 * q_max
        )));
    }
    Ok(())
}

/// `a_q = E[phi(N) H_q(N)] / q!` by Gauss-Hermite quadrature.
pub fn hermite_coefficients<F: Fn(f64) -> f64 + ?Sized>(
    phi: &F,
    q_max: usize,
    quad_order: usize,
) -> Result<HermiteExpansion> {
    check_orders(q_max, quad_order)?;
    let rule = gauss_hermite_normal(quad_order);
    project(phi, &rule.nodes, &rule.weights, q_max)
}

/// Same as [`hermite_coefficients`], but integrates piecewise between the
/// given points of non-smoothness with composite Gauss-Legendre panels
/// against the normal density. Accurate for indicators and kinks, where a
/// global Gauss rule converges only at first order.
pub fn hermite_coefficients_piecewise<F: Fn(f64) -> f64 + ?Sized>(
    phi: &F,
    breakpoints: &[f64],
    q_max: usize,
) -> Result<HermiteExpansion> {
    if q_max < 2 {
        return Err(invalid(format!("q_max must be at least 2, got {q_max}")));
    }
    const HALF_WIDTH: f64 = 14.0;
    const PANEL: f64 = 0.5;
    let rule = gauss_legendre(24);
    let mut cuts = vec![-HALF_WIDTH];
    let mut inner: Vec<f64> = breakpoints.iter().copied().filter(|b| b.abs() < HALF_WIDTH).collect();
    inner.sort_by(f64::total_cmp);
    cuts.extend(inner);
    cuts.push(HALF_WIDTH);

    let norm = (2.0 * std::f64::consts::PI).sqrt();
    let mut nodes = Vec::new();
    let mut weights = Vec::new();
    for seg in cuts.windows(2) {
        let (a, b) = (seg[0], seg[1]);
        if b <= a {
            continue;
        }
        let n = ((b - a) / PANEL).ceil() as usize;
        let h = (b - a) / n as f64;
        for p in 0..n {
            let lo = a + p as f64 * h;
            for (x, w) in rule.nodes.iter().zip(&rule.weights) {
                let node = lo + 0.5 * h * (x + 1.0);
                nodes.push(node);
                weights.push(0.5 * h * w * (-0.5 * node * node).exp() / norm);
            }
        }
    }
    project(phi, &nodes, &weights, q_max)
}

fn project<F: Fn(f64) -> f64 + ?Sized>(
    phi: &F,
    nodes: &[f64],
    weights: &[f64],
    q_max: usize,
) -> Result<HermiteExpansion> {
    let mut proj = vec![0.0; q_max + 1];
    let mut h = Vec::with_capacity(q_max + 1);
    for (&x, &w) in nodes.iter().zip(weights) {
        let v = phi(x);
        if !v.is_finite() {
            return Err(Error::NonFiniteObservable { node: x, value: v });
        }
        normalized_hermite_all(q_max, x, &mut h);
        for (p, hq) in proj.iter_mut().zip(&h) {
            *p += w * v * hq;
        }
    }
    Ok(HermiteExpansion::from_projections(&proj))
}

/// Which regime of the central limit theory an observable falls into.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub enum CaseLabel {
    /// Covariance in `L^R`: short memory, variance of order `t^d`.
    BreuerMajor,
    /// Even rank `R >= 4` without `L^R` summability.
    EvenRankGE4(usize),
    RankTwo,
    RankOnePrime2,
    RankOnePrime4,
    RankOnePrimeGE5,
    Excluded(String),
}

impl CaseLabel {
    pub fn is_excluded(&self) -> bool {
        matches!(self, CaseLabel::Excluded(_))
    }
}

impl fmt::Display for CaseLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CaseLabel::BreuerMajor => write!(f, "breuer-major"),
            CaseLabel::EvenRankGE4(r) => write!(f, "even-rank-{r}"),
            CaseLabel::RankTwo => write!(f, "rank-2"),
            CaseLabel::RankOnePrime2 => write!(f, "rank-1-second-2"),
            CaseLabel::RankOnePrime4 => write!(f, "rank-1-second-4"),
            CaseLabel::RankOnePrimeGE5 => write!(f, "rank-1-second-ge-5"),
            CaseLabel::Excluded(why) => write!(f, "excluded ({why})"),
        }
    }
}

/// Classifies an expansion given whether `int |C|^R < infinity`.
pub fn classify_case(e: &HermiteExpansion, covariance_summable_at_rank: bool) -> Result<CaseLabel> {
    let rank = e
        .rank
        .ok_or_else(|| invalid("observable is constant; its Hermite rank is undefined"))?;
    if covariance_summable_at_rank {
        return Ok(CaseLabel::BreuerMajor);
    }
    if !e.has_even_coeff {
        return Ok(CaseLabel::Excluded("odd observable".into()));
    }
    let label = match rank {
        1 => match e.second_rank {
            Some(2) => CaseLabel::RankOnePrime2,
            Some(3) => CaseLabel::Excluded("(1,3) not covered".into()),
            Some(4) => CaseLabel::RankOnePrime4,
            _ => CaseLabel::RankOnePrimeGE5,
        },
        2 => CaseLabel::RankTwo,
        r if r % 2 == 0 => CaseLabel::EvenRankGE4(r),
        _ => CaseLabel::Excluded("odd rank >= 3".into()),
    };
    Ok(label)
}
