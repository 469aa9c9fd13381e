//! Observation domains: centered balls and cubes.

use std::f64::consts::PI;
use std::fmt;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{ensure_finite, invalid, Error, Result};
use crate::quadrature::{integrate, Tolerance};
use crate::special::{ball_indicator_ft_unchecked, unit_ball_volume};

/// Lattice points allowed in one box grid unless overridden.
pub const DEFAULT_POINT_CAP: usize = 4_000_000;
pub const DEFAULT_SPACING: f64 = 0.5;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "shape", rename_all = "snake_case")]
pub enum DomainKind {
    Ball { radius: f64 },
    Cube { side: f64 },
}

/// Decay of `|F[1_D](y)|` against `|y|^{-d/2}`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum DecayClass {
    LittleOD2,
    BigOD2,
    Slower,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DomainSpec {
    pub d: usize,
    pub kind: DomainKind,
}

/// Cell-centred lattice clipped to `tD`. Field values over the full box
/// (row-major, last axis fastest) are combined with `mask` to integrate.
#[derive(Debug, Clone)]
pub struct Grid {
    pub axes: Vec<Vec<f64>>,
    pub mask: Vec<bool>,
    /// Cell volume `h^d`.
    pub weight: f64,
    pub count: usize,
}

impl Grid {
    /// Coordinates of the points inside the domain, `d` per point.
    pub fn points(&self) -> Vec<f64> {
        let d = self.axes.len();
        let mut out = Vec::with_capacity(self.count * d);
        for (flat, _) in self.mask.iter().enumerate().filter(|(_, m)| **m) {
            let mut rem = flat;
            let start = out.len();
            out.resize(start + d, 0.0);
            for l in (0..d).rev() {
                let n = self.axes[l].len();
                out[start + l] = self.axes[l][rem % n];
                rem /= n;
            }
        }
        out
    }

    pub fn total_weight(&self) -> f64 {
        self.weight * self.count as f64
    }

    pub fn box_size(&self) -> usize {
        self.mask.len()
    }

    /// `h^d sum_{inside} f(values[i])` for field values on the full box.
    pub fn integrate_values<F: Fn(f64) -> f64>(&self, values: &[f64], f: F) -> f64 {
        debug_assert_eq!(values.len(), self.mask.len());
        let sum: f64 = values
            .iter()
            .zip(&self.mask)
            .filter(|(_, m)| **m)
            .map(|(v, _)| f(*v))
            .sum();
        sum * self.weight
    }
}

impl DomainSpec {
    pub fn ball(d: usize, radius: f64) -> Result<Self> {
        check_dim(d)?;
        ensure_finite("radius", radius)?;
        if radius <= 0.0 {
            return Err(invalid(format!("ball radius must be positive, got {radius}")));
        }
        Ok(Self {
            d,
            kind: DomainKind::Ball { radius },
        })
    }

    pub fn cube(d: usize, side: f64) -> Result<Self> {
        check_dim(d)?;
        ensure_finite("side", side)?;
        if side <= 0.0 {
            return Err(invalid(format!("cube side must be positive, got {side}")));
        }
        Ok(Self {
            d,
            kind: DomainKind::Cube { side },
        })
    }

    /// Resolves `ball:d,r` and `cube:d,side`.
    pub fn from_id(id: &str) -> Result<Self> {
        let unknown = || Error::UnknownId {
            kind: "domain",
            id: id.to_string(),
        };
        let (head, args) = id.trim().split_once(':').ok_or_else(unknown)?;
        let (d, size) = args.split_once(',').ok_or_else(unknown)?;
        let d: usize = d.trim().parse().map_err(|_| unknown())?;
        let size: f64 = size.trim().parse().map_err(|_| unknown())?;
        match head {
            "ball" => Self::ball(d, size),
            "cube" => Self::cube(d, size),
            _ => Err(unknown()),
        }
    }

    pub fn volume(&self) -> f64 {
        match self.kind {
            DomainKind::Ball { radius } => unit_ball_volume(self.d) * radius.powi(self.d as i32),
            DomainKind::Cube { side } => side.powi(self.d as i32),
        }
    }

    pub fn diameter(&self) -> f64 {
        match self.kind {
            DomainKind::Ball { radius } => 2.0 * radius,
            DomainKind::Cube { side } => side * (self.d as f64).sqrt(),
        }
    }

    pub fn decay_class(&self) -> DecayClass {
        match self.kind {
            DomainKind::Ball { .. } => DecayClass::LittleOD2,
            DomainKind::Cube { .. } => DecayClass::Slower,
        }
    }

    /// `g_D(x) = Vol(D cap (x + D))`.
    pub fn covariogram(&self, x: &[f64]) -> f64 {
        match self.kind {
            DomainKind::Ball { .. } => {
                let u = x.iter().map(|v| v * v).sum::<f64>().sqrt();
                self.ball_covariogram(u)
            }
            DomainKind::Cube { side } => x.iter().map(|v| (side - v.abs()).max(0.0)).product(),
        }
    }

    fn ball_covariogram(&self, u: f64) -> f64 {
        let DomainKind::Ball { radius: r } = self.kind else {
            unreachable!()
        };
        if u >= 2.0 * r {
            return 0.0;
        }
        match self.d {
            2 => 2.0 * r * r * (u / (2.0 * r)).acos() - 0.5 * u * (4.0 * r * r - u * u).sqrt(),
            3 => PI * (4.0 * r + u) * (2.0 * r - u).powi(2) / 12.0,
            d => {
                // two caps of height r - u/2, each a stack of (d-1)-balls
                let a = unit_ball_volume(d - 1);
                let e = (d as f64 - 1.0) / 2.0;
                let cap = integrate(
                    &|s: f64| (r * r - s * s).max(0.0).powf(e),
                    0.5 * u,
                    r,
                    Tolerance::new(1e-13 * r.powi(d as i32), 1e-12),
                )
                .map(|est| est.value)
                .unwrap_or_else(|err| match err {
                    Error::Quadrature { value, .. } => value,
                    _ => f64::NAN,
                });
                2.0 * a * cap
            }
        }
    }

    /// Spherical average of `g_D` over `|x| = u`.
    pub fn radial_covariogram(&self, u: f64) -> f64 {
        match self.kind {
            DomainKind::Ball { .. } => self.ball_covariogram(u.abs()),
            DomainKind::Cube { .. } => sphere_average(self.d, |dir| {
                let x: Vec<f64> = dir.iter().map(|c| c * u).collect();
                self.covariogram(&x)
            }),
        }
    }

    /// `F[1_D](y) = int_D e^{i<x,y>} dx`.
    pub fn indicator_ft(&self, y: &[f64]) -> Complex64 {
        match self.kind {
            DomainKind::Ball { radius } => {
                let s = y.iter().map(|v| v * v).sum::<f64>().sqrt();
                Complex64::new(ball_indicator_ft_unchecked(self.d, radius, s), 0.0)
            }
            DomainKind::Cube { side } => {
                // centred cube: real product of 2 sin(L y / 2) / y
                let v: f64 = y
                    .iter()
                    .map(|&yi| {
                        if yi.abs() < 1e-8 {
                            side * (1.0 - (side * yi).powi(2) / 24.0)
                        } else {
                            2.0 * (0.5 * side * yi).sin() / yi
                        }
                    })
                    .product();
                Complex64::new(v, 0.0)
            }
        }
    }

    /// Spherical average of `|F[1_D]|^2` over `|y| = s`.
    pub fn indicator_ft_sq_avg(&self, s: f64) -> f64 {
        match self.kind {
            DomainKind::Ball { radius } => ball_indicator_ft_unchecked(self.d, radius, s).powi(2),
            DomainKind::Cube { .. } => sphere_average(self.d, |dir| {
                let y: Vec<f64> = dir.iter().map(|c| c * s).collect();
                self.indicator_ft(&y).norm_sqr()
            }),
        }
    }

    /// Half-width of the bounding box of `tD`.
    fn half_extent(&self, t: f64) -> f64 {
        match self.kind {
            DomainKind::Ball { radius } => t * radius,
            DomainKind::Cube { side } => 0.5 * t * side,
        }
    }

    fn contains_scaled(&self, x: &[f64], t: f64) -> bool {
        match self.kind {
            DomainKind::Ball { radius } => {
                let lim = t * radius;
                x.iter().map(|v| v * v).sum::<f64>() <= lim * lim * (1.0 + 1e-12)
            }
            DomainKind::Cube { side } => x.iter().all(|v| v.abs() <= 0.5 * t * side * (1.0 + 1e-12)),
        }
    }

    /// Cell-centred lattice of spacing `h` over `tD`; errors when the
    /// bounding box holds more than `cap` lattice points.
    pub fn grid(&self, t: f64, h: f64, cap: usize) -> Result<Grid> {
        ensure_finite("t", t)?;
        ensure_finite("h", h)?;
        if t <= 0.0 || h <= 0.0 {
            return Err(invalid(format!("t and h must be positive, got t = {t}, h = {h}")));
        }
        let hw = self.half_extent(t);
        let n = ((2.0 * hw / h) - 1e-9).ceil().max(1.0) as usize;
        let total = n
            .checked_pow(self.d as u32)
            .filter(|&p| p <= cap)
            .ok_or(Error::GridTooLarge {
                t,
                points: n.saturating_pow(self.d as u32),
                cap,
            })?;
        let axis: Vec<f64> = (0..n).map(|i| (i as f64 + 0.5) * h - 0.5 * n as f64 * h).collect();
        let axes = vec![axis; self.d];
        let mut mask = vec![false; total];
        let mut coords = vec![0.0; self.d];
        let mut count = 0;
        for (flat, m) in mask.iter_mut().enumerate() {
            let mut rem = flat;
            for l in (0..self.d).rev() {
                coords[l] = axes[l][rem % n];
                rem /= n;
            }
            if self.contains_scaled(&coords, t) {
                *m = true;
                count += 1;
            }
        }
        Ok(Grid {
            axes,
            mask,
            weight: h.powi(self.d as i32),
            count,
        })
    }
}

impl fmt::Display for DomainSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.kind {
            DomainKind::Ball { radius } => write!(f, "ball:{},{}", self.d, radius),
            DomainKind::Cube { side } => write!(f, "cube:{},{}", self.d, side),
        }
    }
}

fn check_dim(d: usize) -> Result<()> {
    if d < 2 {
        Err(invalid(format!("dimension must be at least 2, got {d}")))
    } else {
        Ok(())
    }
}

/// Average of `f` over the unit sphere, for integrands symmetric under
/// coordinate sign flips (so one orthant suffices in d = 2, 3).
fn sphere_average<F: Fn(&[f64]) -> f64>(d: usize, f: F) -> f64 {
    let tol = Tolerance::new(1e-10, 1e-9);
    let best = |r: Result<crate::quadrature::Estimate>| match r {
        Ok(e) => e.value,
        Err(Error::Quadrature { value, .. }) => value,
        Err(_) => f64::NAN,
    };
    match d {
        2 => {
            let g = |th: f64| f(&[th.cos(), th.sin()]);
            best(integrate(&g, 0.0, 0.5 * PI, tol)) / (0.5 * PI)
        }
        3 => {
            // uniform on the sphere: z = cos(theta) uniform on [0, 1] in one octant
            let outer = |phi: f64| {
                let inner = |z: f64| {
                    let rho = (1.0 - z * z).max(0.0).sqrt();
                    f(&[rho * phi.cos(), rho * phi.sin(), z])
                };
                best(integrate(&inner, 0.0, 1.0, tol))
            };
            best(integrate(&outer, 0.0, 0.5 * PI, tol)) / (0.5 * PI)
        }
        _ => {
            let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(0x5eed);
            let n = 8192;
            let mut dir = vec![0.0; d];
            let mut sum = 0.0;
            for _ in 0..n {
                for c in dir.iter_mut() {
                    *c = rng.sample(StandardNormal);
                }
                let norm = dir.iter().map(|c| c * c).sum::<f64>().sqrt();
                dir.iter_mut().for_each(|c| *c /= norm);
                sum += f(&dir);
            }
            sum / n as f64
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::special::bessel_j;

    #[test]
    fn geometry() {
        let b = DomainSpec::ball(2, 1.0).unwrap();
        assert!((b.volume() - PI).abs() < 1e-14);
        assert_eq!(b.diameter(), 2.0);
        let c = DomainSpec::cube(3, 2.0).unwrap();
        assert_eq!(c.volume(), 8.0);
        assert!((c.diameter() - 2.0 * 3f64.sqrt()).abs() < 1e-14);
        assert_eq!(DomainSpec::from_id("ball:2,1").unwrap(), b);
        assert_eq!(DomainSpec::from_id("cube:3,2").unwrap(), c);
        assert!(DomainSpec::from_id("disk:2,1").is_err());
        assert!(DomainSpec::ball(2, -1.0).is_err());
        assert_eq!(b.to_string(), "ball:2,1");
    }

    #[test]
    fn covariogram_values() {
        let b = DomainSpec::ball(2, 1.0).unwrap();
        assert!((b.covariogram(&[0.0, 0.0]) - PI).abs() < 1e-14);
        assert_eq!(b.covariogram(&[2.0, 0.0]), 0.0);
        let lens = 2.0 * (0.5f64).acos() - 0.5 * 3f64.sqrt();
        assert!((b.covariogram(&[0.6, 0.8]) - lens).abs() < 1e-14);
        let c = DomainSpec::cube(2, 1.0).unwrap();
        assert!((c.covariogram(&[0.25, -0.5]) - 0.75 * 0.5).abs() < 1e-15);
        // general-d formula against the closed forms
        let b3 = DomainSpec::ball(3, 1.3).unwrap();
        let b4 = DomainSpec::ball(4, 1.0).unwrap();
        assert!((b4.covariogram(&[0.0; 4]) - b4.volume()).abs() < 1e-10);
        assert!(b3.covariogram(&[1.0, 0.0, 0.0]) > 0.0);
    }

    #[test]
    fn lens_area_hit_or_miss() {
        use rand::Rng;
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(17);
        let n = 10_000_000;
        let mut hits = 0usize;
        for _ in 0..n {
            let x: f64 = rng.gen_range(-1.0..1.0);
            let y: f64 = rng.gen_range(-1.0..1.0);
            if x * x + y * y <= 1.0 && (x - 1.0).powi(2) + y * y <= 1.0 {
                hits += 1;
            }
        }
        let mc = 4.0 * hits as f64 / n as f64;
        let b = DomainSpec::ball(2, 1.0).unwrap();
        assert!((b.covariogram(&[1.0, 0.0]) - mc).abs() < 2e-3);
        assert!((b.covariogram(&[1.0, 0.0]) - 1.228_369_698_608_757).abs() < 1e-12);
    }

    #[test]
    fn d3_ball_formula_matches_cap_integral() {
        let r = 1.0;
        for &u in &[0.0, 0.3, 1.0, 1.9] {
            let b3 = DomainSpec::ball(3, r).unwrap();
            let closed = b3.covariogram(&[u, 0.0, 0.0]);
            let cap = integrate(&|s: f64| PI * (r * r - s * s), u / 2.0, r, Tolerance::default()).unwrap();
            assert!((closed - 2.0 * cap.value).abs() < 1e-12);
        }
    }

    #[test]
    fn indicator_transform() {
        let b = DomainSpec::ball(2, 1.0).unwrap();
        assert!((b.indicator_ft(&[0.0, 0.0]).re - PI).abs() < 1e-14);
        let y = [3.0, 4.0];
        let expect = 2.0 * PI * bessel_j(1.0, 5.0).unwrap() / 5.0;
        assert!((b.indicator_ft(&y).re - expect).abs() < 1e-13);
        let c = DomainSpec::cube(2, 1.0).unwrap();
        assert!(c.indicator_ft(&[2.0 * PI, 0.0]).norm() < 1e-15);
        assert!((c.indicator_ft(&[0.0, 0.0]).re - 1.0).abs() < 1e-15);
    }

    #[test]
    fn grids() {
        let c = DomainSpec::cube(2, 1.0).unwrap();
        let g = c.grid(2.0, 1.0, DEFAULT_POINT_CAP).unwrap();
        assert_eq!(g.count, 4);
        assert_eq!(g.total_weight(), 4.0);

        let b = DomainSpec::ball(2, 1.0).unwrap();
        let g = b.grid(10.0, 0.25, DEFAULT_POINT_CAP).unwrap();
        assert!((g.total_weight() / (100.0 * PI) - 1.0).abs() < 0.01);

        let g = b.grid(1.0, 2.0, DEFAULT_POINT_CAP).unwrap();
        assert!(g.count <= 1);
        assert!(matches!(b.grid(1000.0, 0.01, 1000), Err(Error::GridTooLarge { .. })));

        let pts = b.grid(3.0, 0.5, DEFAULT_POINT_CAP).unwrap();
        let p = pts.points();
        assert_eq!(p.len(), 2 * pts.count);
        assert!(p.chunks(2).all(|x| x[0] * x[0] + x[1] * x[1] <= 9.0 + 1e-9));
    }

    #[test]
    fn cube_radial_average() {
        let c = DomainSpec::cube(2, 1.0).unwrap();
        assert!((c.radial_covariogram(0.0) - 1.0).abs() < 1e-12);
        // g(u e_theta) averaged over theta; at small u: 1 - u (|cos| + |sin|) + ..., mean of |cos|+|sin| is 4/pi
        let u = 1e-4;
        assert!((c.radial_covariogram(u) - (1.0 - u * 4.0 / PI)).abs() < 1e-7);
    }
}
