//! Named observables `phi` addressable from config files.

use std::fmt;

use crate::error::{invalid, Error, Result};
use crate::hermite::{
    hermite_coefficients, hermite_coefficients_piecewise, hermite_h, HermiteExpansion, DEFAULT_QUAD_ORDER,
};

/// Preset observables.
///
/// Ids: `hermite:q`, `poly:c0,c1,...` (monomial coefficients),
/// `indicator_above:u`, `abs`, `sq_plus_lin` (`x + x^2`).
#[derive(Debug, Clone, PartialEq)]
pub enum Observable {
    Hermite(usize),
    Poly(Vec<f64>),
    IndicatorAbove(f64),
    Abs,
    SqPlusLin,
}

impl Observable {
    pub fn from_id(id: &str) -> Result<Self> {
        let unknown = || Error::UnknownId {
            kind: "observable",
            id: id.to_string(),
        };
        let id = id.trim();
        let (head, args) = match id.split_once(':') {
            Some((h, a)) => (h, Some(a)),
            None => (id, None),
        };
        match (head, args) {
            ("hermite", Some(a)) => {
                let q: usize = a.trim().parse().map_err(|_| unknown())?;
                Ok(Observable::Hermite(q))
            }
            ("poly", Some(a)) => {
                let coeffs = a
                    .split(',')
                    .map(|c| c.trim().parse::<f64>())
                    .collect::<std::result::Result<Vec<_>, _>>()
                    .map_err(|_| unknown())?;
                if coeffs.is_empty() || coeffs.iter().any(|c| !c.is_finite()) {
                    return Err(unknown());
                }
                Ok(Observable::Poly(coeffs))
            }
            ("indicator_above", Some(a)) => {
                let u: f64 = a.trim().parse().map_err(|_| unknown())?;
                if !u.is_finite() {
                    return Err(invalid(format!("indicator level must be finite, got {u}")));
                }
                Ok(Observable::IndicatorAbove(u))
            }
            ("abs", None) => Ok(Observable::Abs),
            ("sq_plus_lin", None) => Ok(Observable::SqPlusLin),
            _ => Err(unknown()),
        }
    }

    #[inline]
    pub fn eval(&self, x: f64) -> f64 {
        match self {
            Observable::Hermite(q) => hermite_h(*q, x),
            Observable::Poly(c) => c.iter().rev().fold(0.0, |acc, a| acc * x + a),
            Observable::IndicatorAbove(u) => {
                if x >= *u {
                    1.0
                } else {
                    0.0
                }
            }
            Observable::Abs => x.abs(),
            Observable::SqPlusLin => x + x * x,
        }
    }

    /// Points where `phi` is not smooth.
    pub fn breakpoints(&self) -> Vec<f64> {
        match self {
            Observable::IndicatorAbove(u) => vec![*u],
            Observable::Abs => vec![0.0],
            _ => Vec::new(),
        }
    }

    /// Hermite expansion up to `q_max`, integrating piecewise across
    /// breakpoints when the observable has any.
    pub fn expansion(&self, q_max: usize) -> Result<HermiteExpansion> {
        let bps = self.breakpoints();
        let phi = |x: f64| self.eval(x);
        if bps.is_empty() {
            hermite_coefficients(&phi, q_max, DEFAULT_QUAD_ORDER.max(2 * q_max))
        } else {
            hermite_coefficients_piecewise(&phi, &bps, q_max)
        }
    }
}

impl fmt::Display for Observable {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Observable::Hermite(q) => write!(f, "hermite:{q}"),
            Observable::Poly(c) => {
                let parts: Vec<String> = c.iter().map(|v| v.to_string()).collect();
                write!(f, "poly:{}", parts.join(","))
            }
            Observable::IndicatorAbove(u) => write!(f, "indicator_above:{u}"),
            Observable::Abs => write!(f, "abs"),
            Observable::SqPlusLin => write!(f, "sq_plus_lin"),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_catalog_ids() {
        assert_eq!(Observable::from_id("hermite:4").unwrap(), Observable::Hermite(4));
        assert_eq!(
            Observable::from_id("poly:1,0,2").unwrap(),
            Observable::Poly(vec![1.0, 0.0, 2.0])
        );
        assert_eq!(
            Observable::from_id("indicator_above:0.5").unwrap(),
            Observable::IndicatorAbove(0.5)
        );
        assert_eq!(Observable::from_id("abs").unwrap(), Observable::Abs);
        assert_eq!(Observable::from_id("sq_plus_lin").unwrap(), Observable::SqPlusLin);
        for bad in ["hermite", "hermite:x", "poly:", "cube", "abs:1"] {
            assert!(
                matches!(Observable::from_id(bad), Err(Error::UnknownId { .. })),
                "{bad}"
            );
        }
        for id in [
            "hermite:6",
            "poly:1,-0.5,2",
            "indicator_above:0.5",
            "abs",
            "sq_plus_lin",
        ] {
            assert_eq!(Observable::from_id(id).unwrap().to_string(), id);
        }
    }

    #[test]
    fn polynomial_evaluation() {
        let p = Observable::Poly(vec![1.0, -2.0, 3.0]);
        assert_eq!(p.eval(2.0), 1.0 - 4.0 + 12.0);
        assert_eq!(Observable::SqPlusLin.eval(3.0), 12.0);
    }

    #[test]
    fn abs_expansion_is_even() {
        // E|N| = sqrt(2/pi), a_2 = E[|N|(N^2-1)]/2 = sqrt(2/pi)/2
        let e = Observable::Abs.expansion(20).unwrap();
        let m = (2.0 / std::f64::consts::PI).sqrt();
        assert!((e.mean - m).abs() < 1e-12);
        assert!((e.coeff(2) - m / 2.0).abs() < 1e-12);
        assert_eq!(e.coeff(1), 0.0);
        assert_eq!(e.coeff(3), 0.0);
        assert_eq!(e.rank, Some(2));
    }

    #[test]
    fn hermite_preset_has_single_term() {
        let e = Observable::Hermite(6).expansion(20).unwrap();
        assert_eq!(e.rank, Some(6));
        assert_eq!(e.second_rank, None);
        assert!((e.coeff(6) - 1.0).abs() < 1e-10);
        assert!(e.mean.abs() < 1e-10);
    }
}
