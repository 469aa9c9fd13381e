//! Sample moments, normality diagnostics and variance growth-rate fits.

use serde::Serialize;
use statrs::distribution::{ContinuousCDF, Normal, StudentsT};

use crate::error::{invalid, Error, Result};
use crate::variance::RatePrediction;

/// Asymptotic 1% critical value of `sqrt(n) D_n`.
pub const KS_CRITICAL_1PCT: f64 = 1.6276;
pub const MIN_SAMPLES: usize = 8;

/// Mean, unbiased variance and standardized third and fourth moments.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Moments {
    pub n: usize,
    pub mean: f64,
    pub variance: f64,
    pub skewness: f64,
    pub excess_kurtosis: f64,
}

impl Moments {
    pub fn of(x: &[f64]) -> Result<Self> {
        if x.len() < 2 {
            return Err(invalid("moments need at least two samples"));
        }
        let n = x.len() as f64;
        let mean = x.iter().sum::<f64>() / n;
        let (mut m2, mut m3, mut m4) = (0.0, 0.0, 0.0);
        for &v in x {
            let c = v - mean;
            let c2 = c * c;
            m2 += c2;
            m3 += c2 * c;
            m4 += c2 * c2;
        }
        let (m2, m3, m4) = (m2 / n, m3 / n, m4 / n);
        let variance = m2 * n / (n - 1.0);
        let (skewness, excess_kurtosis) = if m2 > 0.0 {
            (m3 / m2.powf(1.5), m4 / (m2 * m2) - 3.0)
        } else {
            (f64::NAN, f64::NAN)
        };
        Ok(Self {
            n: x.len(),
            mean,
            variance,
            skewness,
            excess_kurtosis,
        })
    }

    pub fn std_error_of_mean(&self) -> f64 {
        (self.variance / self.n as f64).sqrt()
    }
}

/// Distance of a sample from the standard normal law.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct NormalityReport {
    pub n: usize,
    pub skewness: f64,
    pub skewness_se: f64,
    pub excess_kurtosis: f64,
    pub kurtosis_se: f64,
    /// `sup |F_n - Phi|` of the studentized sample
    pub ks_statistic: f64,
    /// `1.6276 / sqrt(n)`
    pub ks_critical_1pct: f64,
    /// Bracket on the asymptotic Kolmogorov p-value.
    pub p_value_lower: f64,
    pub p_value_upper: f64,
}

impl NormalityReport {
    pub fn passes_ks(&self) -> bool {
        self.ks_statistic < self.ks_critical_1pct
    }
}

/// Studentizes `samples` and compares them with `N(0, 1)`.
pub fn normality_report(samples: &[f64]) -> Result<NormalityReport> {
    if samples.len() < MIN_SAMPLES {
        return Err(invalid(format!(
            "normality diagnostics need at least {MIN_SAMPLES} samples, got {}",
            samples.len()
        )));
    }
    let m = Moments::of(samples)?;
    if m.variance.is_nan() || m.variance <= 0.0 || m.variance.sqrt() <= 1e-14 * m.mean.abs() {
        return Err(Error::ZeroVariance);
    }
    let sd = m.variance.sqrt();
    let mut z: Vec<f64> = samples.iter().map(|v| (v - m.mean) / sd).collect();
    z.sort_by(f64::total_cmp);
    let normal = Normal::new(0.0, 1.0).expect("standard normal");
    let nf = z.len() as f64;
    let ks = z
        .iter()
        .enumerate()
        .map(|(i, &v)| {
            let f = normal.cdf(v);
            ((i + 1) as f64 / nf - f).max(f - i as f64 / nf)
        })
        .fold(0.0, f64::max);
    let sqrt_n = nf.sqrt();
    let (lo_a, hi_a) = kolmogorov_tail(sqrt_n * ks);
    let (lo_b, hi_b) = kolmogorov_tail((sqrt_n + 0.12 + 0.11 / sqrt_n) * ks);
    Ok(NormalityReport {
        n: z.len(),
        skewness: m.skewness,
        skewness_se: (6.0 / nf).sqrt(),
        excess_kurtosis: m.excess_kurtosis,
        kurtosis_se: (24.0 / nf).sqrt(),
        ks_statistic: ks,
        ks_critical_1pct: KS_CRITICAL_1PCT / sqrt_n,
        p_value_lower: lo_a.min(lo_b),
        p_value_upper: hi_a.max(hi_b),
    })
}

/// `Q(lambda) = 2 sum_{k>=1} (-1)^{k-1} exp(-2 k^2 lambda^2)`, bracketed by
/// the last two partial sums of the alternating series.
fn kolmogorov_tail(lambda: f64) -> (f64, f64) {
    if lambda < 0.2 {
        return (1.0 - 1e-12, 1.0);
    }
    let mut sum = 0.0;
    let mut prev = 0.0;
    for k in 1..200 {
        let kf = k as f64;
        let term = 2.0 * (-2.0 * kf * kf * lambda * lambda).exp();
        prev = sum;
        sum += if k % 2 == 1 { term } else { -term };
        if term < 1e-17 {
            break;
        }
    }
    let (a, b) = (prev.min(sum).clamp(0.0, 1.0), prev.max(sum).clamp(0.0, 1.0));
    (a, b)
}

/// Acceptance thresholds for [`rate_fit`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RateCriteria {
    /// Allowed `|slope - exponent|`.
    pub slope_tol: f64,
    /// Allowed `max / min` of the ratio series in the logarithmic case.
    pub ratio_factor: f64,
}

impl Default for RateCriteria {
    fn default() -> Self {
        Self {
            slope_tol: 0.15,
            ratio_factor: 3.0,
        }
    }
}

/// Least-squares growth exponent of a variance series.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RateFit {
    pub slope: f64,
    pub intercept: f64,
    /// 95% confidence interval of the slope.
    pub ci: (f64, f64),
    /// `var / (t^exponent [log t])` at each `t`.
    pub ratio_series: Vec<f64>,
    /// `max / min` of `ratio_series`.
    pub ratio_spread: Option<f64>,
    pub verdict: bool,
}

/// Fits `log var = intercept + slope log t` and judges it against
/// `prediction`: the slope must match the predicted exponent, or, when a
/// logarithmic correction is predicted, the ratio series must stay bounded.
pub fn rate_fit(ts: &[f64], variances: &[f64], prediction: &RatePrediction, criteria: RateCriteria) -> Result<RateFit> {
    if ts.len() != variances.len() {
        return Err(invalid("t grid and variance series differ in length"));
    }
    let span = match (ts.first(), ts.last()) {
        (Some(a), Some(b)) if *a > 0.0 => b / a,
        _ => 0.0,
    };
    if ts.len() < 3 || span < 8.0 - 1e-12 {
        return Err(Error::InsufficientSpan { count: ts.len(), span });
    }
    if variances.iter().any(|v| !(*v > 0.0 && v.is_finite())) {
        return Err(invalid("variances must be positive and finite for a log-log fit"));
    }
    let x: Vec<f64> = ts.iter().map(|t| t.ln()).collect();
    let y: Vec<f64> = variances.iter().map(|v| v.ln()).collect();
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxx: f64 = x.iter().map(|v| (v - mx).powi(2)).sum();
    let sxy: f64 = x.iter().zip(&y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let rss: f64 = x.iter().zip(&y).map(|(a, b)| (b - intercept - slope * a).powi(2)).sum();
    let dof = n - 2.0;
    let se = (rss / dof / sxx).sqrt();
    let q = StudentsT::new(0.0, 1.0, dof).expect("positive dof").inverse_cdf(0.975);
    let ci = (slope - q * se, slope + q * se);

    let ratio_series: Vec<f64> = match prediction.exponent {
        Some(_) => ts
            .iter()
            .zip(variances)
            .map(|(&t, v)| v / prediction.scaling(t).unwrap_or(f64::NAN))
            .collect(),
        None => Vec::new(),
    };
    let ratio_spread = (!ratio_series.is_empty()).then(|| {
        let (lo, hi) = ratio_series
            .iter()
            .fold((f64::MAX, f64::MIN), |(a, b), &r| (a.min(r), b.max(r)));
        hi / lo
    });
    let slope_ok = prediction
        .exponent
        .is_some_and(|e| (slope - e).abs() <= criteria.slope_tol);
    let ratio_ok = prediction.log_correction && ratio_spread.is_some_and(|s| s <= criteria.ratio_factor);
    Ok(RateFit {
        slope,
        intercept,
        ci,
        ratio_series,
        ratio_spread,
        verdict: slope_ok || ratio_ok,
    })
}
