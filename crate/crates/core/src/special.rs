//! Bessel functions of the first kind and the radial functions built on them.
//!
//! `J_nu(x)` is evaluated from its power series for small arguments and from
//! the Hankel asymptotic expansion beyond the switch radius `max(12, 2 nu^2)`.
//! When the switch radius is pushed out by a large order, the gap
//! `12 < x < 2 nu^2` with `x >= nu` is bridged by upward recurrence from the
//! fractional part of the order, which is stable while the order stays below
//! the argument.

use std::f64::consts::PI;

use statrs::function::gamma::{gamma, ln_gamma};

use crate::error::{ensure_finite, invalid, Result};

/// Radius below which the power series is always used.
pub const SERIES_RADIUS: f64 = 12.0;
const SERIES_MAX_TERMS: usize = 300;

/// Argument at which `J_nu` switches to the asymptotic expansion.
pub fn switch_radius(nu: f64) -> f64 {
    SERIES_RADIUS.max(2.0 * nu * nu)
}

fn check_order_arg(nu: f64, x: f64) -> Result<()> {
    ensure_finite("order", nu)?;
    ensure_finite("argument", x)?;
    if nu < 0.0 {
        return Err(invalid(format!("Bessel order must be nonnegative, got {nu}")));
    }
    if x < 0.0 {
        return Err(invalid(format!("Bessel argument must be nonnegative, got {x}")));
    }
    Ok(())
}

/// Bessel function of the first kind `J_nu(x)` for `nu, x >= 0`.
pub fn bessel_j(nu: f64, x: f64) -> Result<f64> {
    check_order_arg(nu, x)?;
    Ok(bessel_j_unchecked(nu, x))
}

pub(crate) fn bessel_j_unchecked(nu: f64, x: f64) -> f64 {
    if x == 0.0 {
        return if nu == 0.0 { 1.0 } else { 0.0 };
    }
    if x >= switch_radius(nu) {
        hankel_asymptotic(nu, x)
    } else if x <= SERIES_RADIUS || x < nu {
        series_prefactor(nu, x) * normalized_series(nu, x)
    } else {
        upward_recurrence(nu, x)
    }
}

/// `(x/2)^nu / Gamma(nu + 1)`
fn series_prefactor(nu: f64, x: f64) -> f64 {
    if nu == 0.0 {
        1.0
    } else if nu < 100.0 {
        (0.5 * x).powf(nu) / gamma(nu + 1.0)
    } else {
        (nu * (0.5 * x).ln() - ln_gamma(nu + 1.0)).exp()
    }
}

/// `sum_j (-1)^j Gamma(nu+1) (x^2/4)^j / (j! Gamma(j+nu+1))`, equal to
/// `Gamma(nu+1) (2/x)^nu J_nu(x)`.
fn normalized_series(nu: f64, x: f64) -> f64 {
    let q = 0.25 * x * x;
    let mut term = 1.0;
    let mut sum = 1.0;
    for j in 1..SERIES_MAX_TERMS {
        let jf = j as f64;
        term *= -q / (jf * (jf + nu));
        sum += term;
        if term.abs() <= 1e-17 * sum.abs() && jf * (jf + nu) > q {
            break;
        }
    }
    sum
}

/// Hankel expansion `sqrt(2/(pi x)) (P cos chi - Q sin chi)`, truncated at the
/// smallest term.
fn hankel_asymptotic(nu: f64, x: f64) -> f64 {
    let mu = 4.0 * nu * nu;
    let mut p = 1.0;
    let mut q = 0.0;
    let mut term: f64 = 1.0;
    let mut last = f64::INFINITY;
    for k in 1..80usize {
        let odd = (2 * k - 1) as f64;
        let next = term * (mu - odd * odd) / (k as f64 * 8.0 * x);
        if next.abs() >= last.min(term.abs()) && k > 2 {
            break;
        }
        last = term.abs();
        term = next;
        // terms alternate between Q (odd k) and P (even k), each with alternating sign
        let sign = if (k / 2) % 2 == 0 { 1.0 } else { -1.0 };
        if k % 2 == 1 {
            q += sign * term;
        } else {
            p += sign * term;
        }
        if term.abs() < 1e-17 {
            break;
        }
    }
    let chi = x - (0.5 * nu + 0.25) * PI;
    (2.0 / (PI * x)).sqrt() * (p * chi.cos() - q * chi.sin())
}

fn upward_recurrence(nu: f64, x: f64) -> f64 {
    let base = nu.fract();
    let steps = nu.floor() as usize;
    let mut prev = hankel_asymptotic(base, x);
    if steps == 0 {
        return prev;
    }
    let mut cur = hankel_asymptotic(base + 1.0, x);
    for k in 1..steps {
        let order = base + k as f64;
        let next = 2.0 * order / x * cur - prev;
        prev = cur;
        cur = next;
    }
    cur
}

/// `rho_nu(r) = Gamma(nu+1) (2/r)^nu J_nu(r)`, the Bessel covariance scaled
/// so that `rho_nu(0) = 1`.
pub fn normalized_bessel_rho(nu: f64, r: f64) -> Result<f64> {
    check_order_arg(nu, r)?;
    Ok(normalized_bessel_rho_unchecked(nu, r))
}

pub(crate) fn normalized_bessel_rho_unchecked(nu: f64, r: f64) -> f64 {
    if r == 0.0 {
        return 1.0;
    }
    if r < switch_radius(nu) && (r <= SERIES_RADIUS || r < nu) {
        normalized_series(nu, r)
    } else if nu == 0.0 {
        bessel_j_unchecked(0.0, r)
    } else {
        let log_scale = ln_gamma(nu + 1.0) + nu * (2.0 / r).ln();
        log_scale.exp() * bessel_j_unchecked(nu, r)
    }
}

/// Radial profile `b_d` of the normalized spherical average
/// `(1/|S^{d-1}|) int e^{i<lambda, xi>} d xi` at `r = |lambda|`; `b_d(0) = 1`.
pub fn radial_kernel_bd(d: usize, r: f64) -> Result<f64> {
    if d < 2 {
        return Err(invalid(format!("dimension must be at least 2, got {d}")));
    }
    ensure_finite("radius", r)?;
    if r < 0.0 {
        return Err(invalid(format!("radius must be nonnegative, got {r}")));
    }
    Ok(radial_kernel_unchecked(d, r))
}

pub(crate) fn radial_kernel_unchecked(d: usize, r: f64) -> f64 {
    match d {
        2 => bessel_j_unchecked(0.0, r),
        3 => {
            if r < 1e-4 {
                1.0 - r * r / 6.0 + r.powi(4) / 120.0
            } else {
                r.sin() / r
            }
        }
        _ => normalized_bessel_rho_unchecked(d as f64 / 2.0 - 1.0, r),
    }
}

/// Volume of the unit ball in `R^d`.
pub fn unit_ball_volume(d: usize) -> f64 {
    let h = d as f64 / 2.0;
    PI.powf(h) / gamma(h + 1.0)
}

/// Surface area of the unit sphere `S^{d-1}`.
pub fn unit_sphere_area(d: usize) -> f64 {
    let h = d as f64 / 2.0;
    2.0 * PI.powf(h) / gamma(h)
}

/// Fourier transform `int_{|x| <= radius} e^{i<x,y>} dx` at `|y| = s`.
pub fn ball_indicator_ft(d: usize, radius: f64, s: f64) -> Result<f64> {
    if d < 2 {
        return Err(invalid(format!("dimension must be at least 2, got {d}")));
    }
    ensure_finite("radius", radius)?;
    ensure_finite("frequency", s)?;
    if radius <= 0.0 {
        return Err(invalid(format!("ball radius must be positive, got {radius}")));
    }
    if s < 0.0 {
        return Err(invalid(format!("frequency magnitude must be nonnegative, got {s}")));
    }
    Ok(ball_indicator_ft_unchecked(d, radius, s))
}

pub(crate) fn ball_indicator_ft_unchecked(d: usize, radius: f64, s: f64) -> f64 {
    // Vol * rho_{d/2}(radius s) == (2 pi)^{d/2} radius^d (radius s)^{-d/2} J_{d/2}(radius s)
    unit_ball_volume(d) * radius.powi(d as i32) * normalized_bessel_rho_unchecked(d as f64 / 2.0, radius * s)
}
