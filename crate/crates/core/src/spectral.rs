//! Isotropic spectral measures `mu` on `(0, inf)` and the covariances they
//! define through `rho(r) = int b_d(r s) mu(ds)`.

use std::f64::consts::PI;
use std::fmt;
use std::path::Path;

use rand::Rng;
use rand_distr::{Beta, Distribution};
use serde::{Deserialize, Serialize};
use statrs::function::beta::beta;

use crate::error::{ensure_finite, invalid, Error, Result};
use crate::quadrature::{beta_weighted, integrate, integrate_partition, panel_breaks, Estimate, Tolerance};
use crate::special::{normalized_bessel_rho_unchecked, radial_kernel_unchecked};

/// Tolerance used for covariance quadrature.
pub const COVARIANCE_TOL: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum MeasureKind {
    /// Dirac mass at `s0`.
    Atom { s0: f64 },
    /// `c s^{d-1} (1 - s^2)^{nu - d/2}` on `(0, 1)`: the law of the square root
    /// of a `Beta(d/2, nu - d/2 + 1)` variable.
    BesselFamily { d: usize, nu: f64 },
    /// Density proportional to `s^{beta - 1}` on `(s_min, s_max]`.
    PowerLaw { beta: f64, s_min: f64, s_max: f64 },
    /// `weights[0]` sits as an atom at `nodes[0]` (the mass below the first
    /// node); `weights[i]` is spread uniformly over `(nodes[i-1], nodes[i]]`.
    Tabulated { nodes: Vec<f64>, weights: Vec<f64> },
}

/// A probability measure on `(0, inf)` describing the radial part of the
/// spectral measure of a unit-variance isotropic field.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectralMeasure {
    pub id: String,
    pub kind: MeasureKind,
}

/// Outcome of the spectral condition `int s^{-d/R} mu(ds) < inf`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "verdict", rename_all = "snake_case")]
pub enum SpectralCondition {
    Finite {
        value: f64,
        #[serde(skip_serializing_if = "Option::is_none")]
        warning: Option<String>,
    },
    Divergent,
}

impl SpectralCondition {
    pub fn is_finite(&self) -> bool {
        matches!(self, SpectralCondition::Finite { .. })
    }
}

/// The spectral measure of the Bessel field of order `nu` in dimension `d`.
///
/// The field exists iff `nu >= d/2 - 1`; at the boundary the measure is the
/// unit atom (the `d`-dimensional random wave model).
pub fn bessel_spectral_measure(d: usize, nu: f64) -> Result<SpectralMeasure> {
    if d < 2 {
        return Err(invalid(format!("dimension must be at least 2, got {d}")));
    }
    ensure_finite("order", nu)?;
    let critical = d as f64 / 2.0 - 1.0;
    if nu < critical - 1e-12 {
        return Err(Error::NonexistentField { d, nu });
    }
    let id = format!("bessel:{d},{nu}");
    if (nu - critical).abs() <= 1e-12 {
        return Ok(SpectralMeasure {
            id,
            kind: MeasureKind::Atom { s0: 1.0 },
        });
    }
    Ok(SpectralMeasure {
        id,
        kind: MeasureKind::BesselFamily { d, nu },
    })
}

impl SpectralMeasure {
    pub fn atom(s0: f64) -> Result<Self> {
        ensure_finite("atom location", s0)?;
        if s0 <= 0.0 {
            return Err(invalid(format!("atom location must be positive, got {s0}")));
        }
        Ok(Self {
            id: format!("atom:{s0}"),
            kind: MeasureKind::Atom { s0 },
        })
    }

    /// The random wave model measure `delta_1`.
    pub fn berry() -> Self {
        Self {
            id: "berry".into(),
            kind: MeasureKind::Atom { s0: 1.0 },
        }
    }

    pub fn power_law(beta: f64, s_min: f64, s_max: f64) -> Result<Self> {
        ensure_finite("beta", beta)?;
        ensure_finite("s_min", s_min)?;
        ensure_finite("s_max", s_max)?;
        if beta <= 0.0 {
            return Err(invalid(format!("power-law exponent must be positive, got {beta}")));
        }
        if !(s_min >= 0.0 && s_max > s_min) {
            return Err(invalid(format!("need 0 <= s_min < s_max, got ({s_min}, {s_max})")));
        }
        let id = if s_min == 0.0 && s_max == 1.0 {
            format!("powerlaw:{beta}")
        } else {
            format!("powerlaw:{beta},{s_min},{s_max}")
        };
        Ok(Self {
            id,
            kind: MeasureKind::PowerLaw { beta, s_min, s_max },
        })
    }

    /// Piecewise-constant measure; weights are renormalized to unit mass.
    pub fn tabulated(nodes: Vec<f64>, weights: Vec<f64>) -> Result<Self> {
        if nodes.is_empty() || nodes.len() != weights.len() {
            return Err(invalid(
                "tabulated measure needs matching, nonempty node and weight columns",
            ));
        }
        if nodes.iter().chain(&weights).any(|v| !v.is_finite()) {
            return Err(invalid("tabulated measure contains non-finite entries"));
        }
        if nodes.windows(2).any(|w| w[1] <= w[0]) {
            return Err(invalid("tabulated nodes must be strictly increasing"));
        }
        if nodes[0] < 0.0 || weights.iter().any(|w| *w < 0.0) {
            return Err(invalid("tabulated nodes and weights must be nonnegative"));
        }
        if nodes[0] == 0.0 && weights[0] > 0.0 {
            return Err(invalid("an atom at frequency 0 is not allowed"));
        }
        let total: f64 = weights.iter().sum();
        if total <= 0.0 {
            return Err(invalid("tabulated weights sum to zero"));
        }
        let weights = weights.into_iter().map(|w| w / total).collect();
        Ok(Self {
            id: "table".into(),
            kind: MeasureKind::Tabulated { nodes, weights },
        })
    }

    /// Reads a two-column CSV `(s, weight)`; a non-numeric first line is
    /// taken as a header and `#` starts a comment.
    pub fn from_csv(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        let mut nodes = Vec::new();
        let mut weights = Vec::new();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let mut cols = line.split(',').map(str::trim);
            let (Some(a), Some(b)) = (cols.next(), cols.next()) else {
                return Err(Error::Config {
                    line: i + 1,
                    msg: format!("expected two columns in `{line}`"),
                });
            };
            match (a.parse::<f64>(), b.parse::<f64>()) {
                (Ok(s), Ok(w)) => {
                    nodes.push(s);
                    weights.push(w);
                }
                _ if nodes.is_empty() => continue,
                _ => {
                    return Err(Error::Config {
                        line: i + 1,
                        msg: format!("cannot parse `{line}` as numbers"),
                    })
                }
            }
        }
        let mut m = Self::tabulated(nodes, weights)?;
        m.id = format!("table:{}", path.display());
        Ok(m)
    }

    /// Resolves `berry`, `bessel:d,nu`, `powerlaw:beta` and `table:<path>`.
    pub fn from_id(id: &str) -> Result<Self> {
        let id = id.trim();
        let unknown = || Error::UnknownId {
            kind: "measure",
            id: id.to_string(),
        };
        if id == "berry" {
            return Ok(Self::berry());
        }
        let (head, args) = id.split_once(':').ok_or_else(unknown)?;
        match head {
            "bessel" => {
                let (d, nu) = args.split_once(',').ok_or_else(unknown)?;
                let d: usize = d.trim().parse().map_err(|_| unknown())?;
                let nu: f64 = nu.trim().parse().map_err(|_| unknown())?;
                bessel_spectral_measure(d, nu)
            }
            "powerlaw" => {
                let parts: Vec<f64> = args
                    .split(',')
                    .map(|p| p.trim().parse::<f64>())
                    .collect::<std::result::Result<_, _>>()
                    .map_err(|_| unknown())?;
                match parts.as_slice() {
                    [b] => Self::power_law(*b, 0.0, 1.0),
                    [b, lo, hi] => Self::power_law(*b, *lo, *hi),
                    _ => Err(unknown()),
                }
            }
            "table" => {
                let mut m = Self::from_csv(Path::new(args))?;
                m.id = id.to_string();
                Ok(m)
            }
            _ => Err(unknown()),
        }
    }

    /// Largest frequency in the support.
    pub fn max_frequency(&self) -> f64 {
        match &self.kind {
            MeasureKind::Atom { s0 } => *s0,
            MeasureKind::BesselFamily { .. } => 1.0,
            MeasureKind::PowerLaw { s_max, .. } => *s_max,
            MeasureKind::Tabulated { nodes, .. } => *nodes.last().unwrap_or(&1.0),
        }
    }

    /// Checks that the measure is admissible for a field on `R^d`.
    pub fn check_dimension(&self, d: usize) -> Result<()> {
        if d < 2 {
            return Err(invalid(format!("dimension must be at least 2, got {d}")));
        }
        if let MeasureKind::PowerLaw { beta, .. } = self.kind {
            if beta >= d as f64 {
                return Err(invalid(format!(
                    "power-law exponent {beta} must be below the dimension {d}"
                )));
            }
        }
        Ok(())
    }

    /// `int f(s) mu(ds)`. `panel` bounds the initial subdivision width and
    /// should be a fraction of the oscillation period of `f`.
    pub fn integrate<F: Fn(f64) -> f64>(&self, f: &F, panel: f64, tol: Tolerance) -> Result<Estimate> {
        let panel = panel.max(1e-6);
        match &self.kind {
            MeasureKind::Atom { s0 } => Ok(Estimate {
                value: f(*s0),
                error: 0.0,
            }),
            MeasureKind::BesselFamily { d, nu } => {
                let d = *d;
                let alpha = nu - d as f64 / 2.0;
                let c = 2.0 / beta(d as f64 / 2.0, alpha + 1.0);
                let density = |s: f64| c * s.powi(d as i32 - 1) * (1.0 - s * s).powf(alpha);
                let smooth = alpha >= 0.0 && alpha.fract() == 0.0;
                if smooth {
                    let g = |s: f64| f(s) * density(s);
                    return integrate_partition(&g, &panel_breaks(0.0, 1.0, panel), tol);
                }
                // Power substitution near s = 1 absorbs (1 - s)^alpha.
                let split = (1.0 - panel).clamp(0.5, 1.0 - 1e-3);
                let len = 1.0 - split;
                let k = 1.0 / (alpha + 1.0);
                let tail = |v: f64| {
                    let s = 1.0 - len * v.powf(k);
                    f(s) * c * s.powi(d as i32 - 1) * (1.0 + s).powf(alpha) * len.powf(alpha + 1.0) * k
                };
                let g = |s: f64| f(s) * density(s);
                let head = integrate_partition(&g, &panel_breaks(0.0, split, panel), tol)?;
                let n_tail = (len / panel).ceil().max(1.0) * 4.0;
                let tail_est = integrate_partition(&tail, &panel_breaks(0.0, 1.0, 1.0 / n_tail), tol)?;
                Ok(Estimate {
                    value: head.value + tail_est.value,
                    error: head.error + tail_est.error,
                })
            }
            MeasureKind::PowerLaw { beta: b, s_min, s_max } => {
                let (b, s_min, s_max) = (*b, *s_min, *s_max);
                let z = s_max.powf(b) - s_min.powf(b);
                let g = |s: f64| f(s) * b * s.powf(b - 1.0) / z;
                if s_min > 0.0 || b == 1.0 {
                    return integrate_partition(&g, &panel_breaks(s_min, s_max, panel), tol);
                }
                // s = s1 v^(1/beta) on [0, s1] turns beta s^(beta-1) ds into s1^beta dv.
                let s1 = panel.min(s_max);
                let head_fn = |v: f64| f(s1 * v.powf(1.0 / b)) * s1.powf(b) / z;
                let head = integrate(&head_fn, 0.0, 1.0, tol)?;
                if s1 >= s_max {
                    return Ok(head);
                }
                let rest = integrate_partition(&g, &panel_breaks(s1, s_max, panel), tol)?;
                Ok(Estimate {
                    value: head.value + rest.value,
                    error: head.error + rest.error,
                })
            }
            MeasureKind::Tabulated { nodes, weights } => {
                let mut value = weights[0] * f(nodes[0]);
                let mut error = 0.0;
                for i in 1..nodes.len() {
                    if weights[i] == 0.0 {
                        continue;
                    }
                    let (lo, hi) = (nodes[i - 1], nodes[i]);
                    let dens = weights[i] / (hi - lo);
                    let g = |s: f64| f(s) * dens;
                    let est = integrate_partition(&g, &panel_breaks(lo, hi, panel), tol)?;
                    value += est.value;
                    error += est.error;
                }
                Ok(Estimate { value, error })
            }
        }
    }

    /// Total mass, computed by quadrature (one by construction).
    pub fn total_mass(&self) -> Result<f64> {
        Ok(self.integrate(&|_| 1.0, 0.25, Tolerance::new(1e-12, 1e-12))?.value)
    }

    /// `int s^k mu(ds)`
    pub fn moment(&self, k: f64) -> Result<f64> {
        Ok(self
            .integrate(&|s: f64| s.powf(k), 0.25, Tolerance::new(1e-12, 1e-12))?
            .value)
    }

    /// Exponent `gamma` with `|rho(r)| ~ r^{-gamma}` at infinity, when known.
    pub fn decay_exponent(&self, d: usize) -> Option<f64> {
        match &self.kind {
            MeasureKind::Atom { .. } => Some((d as f64 - 1.0) / 2.0),
            MeasureKind::BesselFamily { d: dm, nu } if *dm == d => Some(nu + 0.5),
            MeasureKind::PowerLaw { beta, s_min, .. } if *s_min == 0.0 => Some(*beta),
            _ => None,
        }
    }

    /// Whether `int |C(x)|^q dx < inf` on `R^d`. Unknown decay counts as not
    /// summable.
    pub fn covariance_summable(&self, d: usize, q: usize) -> bool {
        self.decay_exponent(d).is_some_and(|g| g * q as f64 > d as f64)
    }
}

impl fmt::Display for SpectralMeasure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.id)
    }
}

/// `rho(r) = int b_d(r s) mu(ds)`, with `rho(0) = 1`.
pub fn covariance_from_spectrum(mu: &SpectralMeasure, d: usize, r: f64) -> Result<f64> {
    mu.check_dimension(d)?;
    ensure_finite("lag", r)?;
    if r < 0.0 {
        return Err(invalid(format!("lag must be nonnegative, got {r}")));
    }
    covariance_quadrature(mu, d, r, COVARIANCE_TOL)
}

fn covariance_quadrature(mu: &SpectralMeasure, d: usize, r: f64, tol: f64) -> Result<f64> {
    if r == 0.0 {
        return Ok(1.0);
    }
    if let MeasureKind::Atom { s0 } = mu.kind {
        return Ok(radial_kernel_unchecked(d, r * s0));
    }
    let panel = (0.5 * PI / r).min(0.25);
    let est = mu.integrate(
        &|s: f64| radial_kernel_unchecked(d, r * s),
        panel,
        Tolerance::new(tol, 1e-12),
    )?;
    Ok(est.value)
}

/// `int_0^inf s^{-d/R} mu(ds)`; finite iff the spectral condition holds.
pub fn spectral_condition(mu: &SpectralMeasure, d: usize, rank: usize) -> Result<SpectralCondition> {
    mu.check_dimension(d)?;
    if rank == 0 {
        return Err(invalid("Hermite rank must be at least 1"));
    }
    let p = d as f64 / rank as f64;
    let finite = |value: f64| SpectralCondition::Finite { value, warning: None };
    match &mu.kind {
        MeasureKind::Atom { s0 } => Ok(finite(s0.powf(-p))),
        MeasureKind::BesselFamily { d: dm, nu } => {
            let dm = *dm as f64;
            // integrand ~ s^{dm - 1 - p} at the origin
            if dm - 1.0 - p <= -1.0 {
                return Ok(SpectralCondition::Divergent);
            }
            let b = nu - dm / 2.0 + 1.0;
            let a = (dm - p) / 2.0;
            let est = beta_weighted(a, b, &|_| 1.0, Tolerance::new(1e-13, 1e-12))?;
            Ok(finite(est.value / beta(dm / 2.0, b)))
        }
        MeasureKind::PowerLaw { beta: b, s_min, s_max } => {
            let z = s_max.powf(*b) - s_min.powf(*b);
            if *s_min == 0.0 {
                if *b <= p {
                    return Ok(SpectralCondition::Divergent);
                }
                return Ok(finite(b / (z * (b - p)) * s_max.powf(b - p)));
            }
            let value = if (b - p).abs() < 1e-14 {
                b / z * (s_max / s_min).ln()
            } else {
                b / (z * (b - p)) * (s_max.powf(b - p) - s_min.powf(b - p))
            };
            Ok(finite(value))
        }
        MeasureKind::Tabulated { nodes, weights } => {
            let mut value = if weights[0] > 0.0 {
                weights[0] * nodes[0].powf(-p)
            } else {
                0.0
            };
            for i in 1..nodes.len() {
                if weights[i] == 0.0 {
                    continue;
                }
                let (lo, hi) = (nodes[i - 1], nodes[i]);
                if lo == 0.0 && p >= 1.0 {
                    return Ok(SpectralCondition::Divergent);
                }
                let integral = if (p - 1.0).abs() < 1e-14 {
                    (hi / lo).ln()
                } else {
                    (hi.powf(1.0 - p) - lo.powf(1.0 - p)) / (1.0 - p)
                };
                value += weights[i] / (hi - lo) * integral;
            }
            let warning = (weights[0] > 0.0).then(|| {
                format!(
                    "mass {:.3e} below the first node is lumped at s = {}; behaviour at the origin is not resolved",
                    weights[0], nodes[0]
                )
            });
            Ok(SpectralCondition::Finite { value, warning })
        }
    }
}

/// Draws one wavenumber `|k|` from `mu`.
pub fn sample_wavenumber<R: Rng + ?Sized>(mu: &SpectralMeasure, rng: &mut R) -> f64 {
    match &mu.kind {
        MeasureKind::Atom { s0 } => *s0,
        MeasureKind::BesselFamily { d, nu } => {
            let a = *d as f64 / 2.0;
            let b = nu - a + 1.0;
            let dist = Beta::new(a, b).expect("Bessel family parameters validated at construction");
            dist.sample(rng).sqrt()
        }
        MeasureKind::PowerLaw { beta: b, s_min, s_max } => {
            let u: f64 = rng.gen();
            let lo = s_min.powf(*b);
            let hi = s_max.powf(*b);
            (lo + u * (hi - lo)).powf(1.0 / b)
        }
        MeasureKind::Tabulated { nodes, weights } => {
            let u: f64 = rng.gen();
            let mut acc = 0.0;
            for (i, w) in weights.iter().enumerate() {
                acc += w;
                if u < acc || i == weights.len() - 1 {
                    if i == 0 {
                        return nodes[0];
                    }
                    let v: f64 = rng.gen();
                    return nodes[i - 1] + v * (nodes[i] - nodes[i - 1]);
                }
            }
            nodes[0]
        }
    }
}

/// A radial covariance `C(x) = rho(|x|)`.
pub trait RadialCovariance: Sync {
    fn rho(&self, r: f64) -> f64;

    /// Period of the leading oscillation of `rho`, when known.
    fn period(&self) -> Option<f64> {
        None
    }
}

impl<F: Fn(f64) -> f64 + Sync> RadialCovariance for F {
    fn rho(&self, r: f64) -> f64 {
        self(r)
    }
}

/// Covariance of the field with spectral measure `mu` on `R^d`.
///
/// Atoms and Bessel measures in their own dimension use closed forms; other
/// measures are integrated numerically, optionally through a lookup table
/// built by [`Covariance::tabulate`].
#[derive(Debug, Clone)]
pub struct Covariance {
    pub measure: SpectralMeasure,
    pub d: usize,
    table: Option<Table>,
}

#[derive(Debug, Clone)]
struct Table {
    step: f64,
    values: Vec<f64>,
}

impl Covariance {
    pub fn new(measure: SpectralMeasure, d: usize) -> Result<Self> {
        measure.check_dimension(d)?;
        Ok(Self {
            measure,
            d,
            table: None,
        })
    }

    fn has_closed_form(&self) -> bool {
        match self.measure.kind {
            MeasureKind::Atom { .. } => true,
            MeasureKind::BesselFamily { d, .. } => d == self.d,
            _ => false,
        }
    }

    /// Precomputes `rho` on `[0, r_max]` for fast interpolated lookups.
    /// A no-op for closed-form covariances.
    pub fn tabulate(mut self, r_max: f64) -> Result<Self> {
        if self.has_closed_form() {
            return Ok(self);
        }
        let step = 0.025 / self.measure.max_frequency();
        let n = (r_max / step).ceil() as usize + 4;
        let values = (0..n)
            .map(|i| covariance_quadrature(&self.measure, self.d, i as f64 * step, 1e-11))
            .collect::<Result<Vec<_>>>()?;
        self.table = Some(Table { step, values });
        Ok(self)
    }

    pub fn try_rho(&self, r: f64) -> Result<f64> {
        let r = r.abs();
        match self.measure.kind {
            MeasureKind::Atom { s0 } => return Ok(radial_kernel_unchecked(self.d, r * s0)),
            MeasureKind::BesselFamily { d, nu } if d == self.d => return Ok(normalized_bessel_rho_unchecked(nu, r)),
            _ => {}
        }
        if let Some(t) = &self.table {
            let x = r / t.step;
            let i = x.floor() as usize;
            if i + 2 < t.values.len() {
                // four-point Lagrange interpolation on nodes i-1..=i+2
                let i0 = i.max(1) - 1;
                let u = x - i0 as f64;
                let v = &t.values[i0..i0 + 4];
                let l0 = -(u - 1.0) * (u - 2.0) * (u - 3.0) / 6.0;
                let l1 = u * (u - 2.0) * (u - 3.0) / 2.0;
                let l2 = -u * (u - 1.0) * (u - 3.0) / 2.0;
                let l3 = u * (u - 1.0) * (u - 2.0) / 6.0;
                return Ok(l0 * v[0] + l1 * v[1] + l2 * v[2] + l3 * v[3]);
            }
        }
        covariance_quadrature(&self.measure, self.d, r, COVARIANCE_TOL)
    }
}

impl RadialCovariance for Covariance {
    fn rho(&self, r: f64) -> f64 {
        self.try_rho(r).unwrap_or(f64::NAN)
    }

    fn period(&self) -> Option<f64> {
        Some(2.0 * PI / self.measure.max_frequency())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::special::{bessel_j, normalized_bessel_rho};
    use rand::SeedableRng;

    #[test]
    fn berry_covariance_is_j0() {
        let mu = SpectralMeasure::berry();
        for &r in &[0.5, 1.0, 2.4048, 5.0, 10.0] {
            let c = covariance_from_spectrum(&mu, 2, r).unwrap();
            assert!((c - bessel_j(0.0, r).unwrap()).abs() < 1e-10);
        }
        assert_eq!(covariance_from_spectrum(&mu, 2, 0.0).unwrap(), 1.0);
    }

    #[test]
    fn bessel_family_round_trip() {
        let mu = bessel_spectral_measure(2, 1.0).unwrap();
        for &r in &[0.5, 3.0, 10.0] {
            let c = covariance_from_spectrum(&mu, 2, r).unwrap();
            let expect = 2.0 * bessel_j(1.0, r).unwrap() / r;
            assert!((c - expect).abs() < 1e-6, "r {r}: {c} vs {expect}");
        }
        for &nu in &[0.25, 0.5, 1.0, 2.0] {
            let mu = bessel_spectral_measure(2, nu).unwrap();
            for i in 0..=80 {
                let r = 0.5 * i as f64;
                let c = covariance_from_spectrum(&mu, 2, r).unwrap();
                let expect = normalized_bessel_rho(nu, r).unwrap();
                assert!((c - expect).abs() < 1e-6, "nu {nu} r {r}: {c} vs {expect}");
            }
        }
    }

    #[test]
    fn bessel_measure_existence_and_mass() {
        assert!(matches!(
            bessel_spectral_measure(2, -0.5),
            Err(Error::NonexistentField { d: 2, .. })
        ));
        assert_eq!(
            bessel_spectral_measure(2, 0.0).unwrap().kind,
            MeasureKind::Atom { s0: 1.0 }
        );
        assert_eq!(
            bessel_spectral_measure(3, 0.5).unwrap().kind,
            MeasureKind::Atom { s0: 1.0 }
        );
        let mu = bessel_spectral_measure(3, 2.0).unwrap();
        assert!((mu.total_mass().unwrap() - 1.0).abs() < 1e-10);
        // density c s^2 (1 - s^2)^{1/2} with c = 2 / B(3/2, 3/2) = 16 / pi
        let direct = integrate(
            &|s: f64| 16.0 / PI * s * s * (1.0 - s * s).sqrt(),
            0.0,
            1.0,
            Tolerance::new(1e-13, 1e-13),
        )
        .unwrap();
        assert!((direct.value - 1.0).abs() < 1e-10);
    }

    #[test]
    fn spectral_condition_cases() {
        let berry = SpectralMeasure::berry();
        for r in [1, 2, 4] {
            assert_eq!(
                spectral_condition(&berry, 2, r).unwrap(),
                SpectralCondition::Finite {
                    value: 1.0,
                    warning: None
                }
            );
        }
        let pl = SpectralMeasure::power_law(0.4, 0.0, 1.0).unwrap();
        assert_eq!(spectral_condition(&pl, 2, 2).unwrap(), SpectralCondition::Divergent);
        // boundary beta = d/R counts as divergent
        let pl1 = SpectralMeasure::power_law(1.0, 0.0, 1.0).unwrap();
        assert_eq!(spectral_condition(&pl1, 2, 2).unwrap(), SpectralCondition::Divergent);
        assert!(spectral_condition(&pl1, 2, 3).unwrap().is_finite());

        let bes = bessel_spectral_measure(2, 1.5).unwrap();
        assert_eq!(spectral_condition(&bes, 2, 1).unwrap(), SpectralCondition::Divergent);
        let SpectralCondition::Finite { value, .. } = spectral_condition(&bes, 2, 2).unwrap() else {
            panic!("expected finite");
        };
        // E[S^{-1}] for S^2 ~ Beta(1, 1.5): B(1/2, 3/2) / B(1, 3/2) = (pi/2) / (2/3)
        assert!((value - 0.75 * PI).abs() < 1e-9);
    }

    #[test]
    fn bessel_condition_quadrature_matches_monte_carlo() {
        let bes = bessel_spectral_measure(2, 1.5).unwrap();
        let SpectralCondition::Finite { value, .. } = spectral_condition(&bes, 2, 2).unwrap() else {
            panic!("expected finite");
        };
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(3);
        let dist = Beta::<f64>::new(1.0, 1.5).unwrap();
        let n = 1_000_000;
        let mc = (0..n).map(|_| dist.sample(&mut rng).sqrt().recip()).sum::<f64>() / n as f64;
        assert!((mc - value).abs() / value < 1e-2, "{mc} vs {value}");
    }

    #[test]
    fn sampler_moments() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(5);
        assert_eq!(sample_wavenumber(&SpectralMeasure::berry(), &mut rng), 1.0);

        let bes = bessel_spectral_measure(2, 1.0).unwrap();
        let n = 100_000;
        let m2 = (0..n).map(|_| sample_wavenumber(&bes, &mut rng).powi(2)).sum::<f64>() / n as f64;
        assert!((m2 - 0.5).abs() < 0.01);
        assert!((bes.moment(2.0).unwrap() - 0.5).abs() < 1e-10);

        let pl = SpectralMeasure::power_law(0.4, 0.0, 1.0).unwrap();
        let below = (0..n).filter(|_| sample_wavenumber(&pl, &mut rng) <= 0.5).count() as f64 / n as f64;
        assert!((below - 0.5f64.powf(0.4)).abs() < 0.01);
    }

    #[test]
    fn covariance_is_bounded_by_one() {
        let measures = [
            SpectralMeasure::berry(),
            bessel_spectral_measure(2, 0.75).unwrap(),
            SpectralMeasure::power_law(0.4, 0.0, 1.0).unwrap(),
            SpectralMeasure::tabulated(vec![0.5, 1.0, 2.0], vec![0.2, 0.5, 0.3]).unwrap(),
        ];
        for mu in &measures {
            for i in 0..60 {
                let r = 0.37 * i as f64;
                let c = covariance_from_spectrum(mu, 2, r).unwrap();
                assert!(c.abs() <= 1.0 + 1e-9, "{mu} r {r}: {c}");
            }
        }
    }

    #[test]
    fn tabulated_covariance_interpolates() {
        let pl = SpectralMeasure::power_law(0.4, 0.0, 1.0).unwrap();
        let cov = Covariance::new(pl.clone(), 2).unwrap().tabulate(30.0).unwrap();
        for &r in &[0.013, 1.7, 9.99, 29.0] {
            let direct = covariance_from_spectrum(&pl, 2, r).unwrap();
            assert!((cov.rho(r) - direct).abs() < 1e-7, "r {r}");
        }
        // beyond the table it falls back to quadrature
        let direct = covariance_from_spectrum(&pl, 2, 45.0).unwrap();
        assert!((cov.rho(45.0) - direct).abs() < 1e-12);
    }

    #[test]
    fn tabulated_measure_from_csv() {
        let dir = std::env::temp_dir().join("gaussfluct-table-test");
        std::fs::create_dir_all(&dir).unwrap();
        let path = dir.join("mu.csv");
        std::fs::write(&path, "s,weight\n0.5,1\n1.0,2\n# trailing comment\n1.5,1\n").unwrap();
        let mu = SpectralMeasure::from_id(&format!("table:{}", path.display())).unwrap();
        let MeasureKind::Tabulated { weights, .. } = &mu.kind else {
            panic!()
        };
        assert_eq!(weights, &vec![0.25, 0.5, 0.25]);
        let cond = spectral_condition(&mu, 2, 2).unwrap();
        let SpectralCondition::Finite { warning, .. } = cond else {
            panic!()
        };
        assert!(warning.is_some());
        assert!((mu.total_mass().unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn ids() {
        assert_eq!(SpectralMeasure::from_id("berry").unwrap(), SpectralMeasure::berry());
        assert!(matches!(
            SpectralMeasure::from_id("bessel:2,-0.5"),
            Err(Error::NonexistentField { .. })
        ));
        assert!(matches!(
            SpectralMeasure::from_id("gauss"),
            Err(Error::UnknownId { .. })
        ));
        let pl = SpectralMeasure::from_id("powerlaw:0.4").unwrap();
        assert_eq!(
            pl.kind,
            MeasureKind::PowerLaw {
                beta: 0.4,
                s_min: 0.0,
                s_max: 1.0
            }
        );
        assert!(pl.check_dimension(2).is_ok());
        assert!(SpectralMeasure::from_id("powerlaw:2.5")
            .unwrap()
            .check_dimension(2)
            .is_err());
    }

    #[test]
    fn summability() {
        let berry = SpectralMeasure::berry();
        assert!(!berry.covariance_summable(2, 4));
        assert!(berry.covariance_summable(2, 5));
        let pl = SpectralMeasure::power_law(0.4, 0.0, 1.0).unwrap();
        assert!(!pl.covariance_summable(2, 2));
        assert!(pl.covariance_summable(2, 6));
    }
}
