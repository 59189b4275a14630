//! Density profiles Sigma(x) > 0 and their pointwise evaluation.
//!
//! The catalog carries the two benchmark families (parabolic `(1+alpha
//! x)^2` and the rapidly oscillating `2 + sin(2 pi (x + eta/2) / eps)`),
//! constants, separable two-dimensional products, and user-supplied
//! callables. Evaluation is a pure formula; positivity is checked lazily
//! per call, and domain membership is the caller's concern.

use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};

/// A user-supplied pure density profile of one coordinate.
pub type Evaluator = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

/// Density Sigma on the domain.
#[derive(Clone)]
pub enum DensitySpec {
    /// Sigma(x) = c with c > 0.
    Constant(f64),
    /// Sigma(x) = (1 + alpha x)^2. Requires |alpha| <= 2/a on an interval of
    /// length a so that 1 + alpha x stays non-negative.
    Parabolic { alpha: f64 },
    /// Sigma(x) = 2 + sin(2 pi (x + eta/2) / epsilon), period epsilon.
    Oscillating { epsilon: f64, eta: f64 },
    /// Sigma(x, y) = Sigma_x(x) * Sigma_y(y).
    Separable2D(Box<DensitySpec>, Box<DensitySpec>),
    /// User-supplied x-profile; must be pure and re-entrant.
    Custom(Evaluator),
}

impl fmt::Debug for DensitySpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            DensitySpec::Constant(c) => write!(f, "Constant({c})"),
            DensitySpec::Parabolic { alpha } => write!(f, "Parabolic {{ alpha: {alpha} }}"),
            DensitySpec::Oscillating { epsilon, eta } => {
                write!(f, "Oscillating {{ epsilon: {epsilon}, eta: {eta} }}")
            }
            DensitySpec::Separable2D(x, y) => write!(f, "Separable2D({x:?}, {y:?})"),
            DensitySpec::Custom(_) => write!(f, "Custom(..)"),
        }
    }
}

impl DensitySpec {
    pub fn oscillating(epsilon: f64, eta: f64) -> Self {
        DensitySpec::Oscillating { epsilon, eta }
    }

    pub fn parabolic(alpha: f64) -> Self {
        DensitySpec::Parabolic { alpha }
    }

    /// Evaluate Sigma at a 1D point (rectangles: the x-profile).
    pub fn eval(&self, x: f64) -> Result<f64> {
        let v = self.eval_raw(x);
        if v > 0.0 {
            Ok(v)
        } else {
            Err(Error::NonPositiveDensity { value: v })
        }
    }

    /// Evaluate Sigma at a 2D point. One-dimensional profiles vary along x
    /// only, matching the rectangular-drum setup.
    pub fn eval_xy(&self, x: f64, y: f64) -> Result<f64> {
        match self {
            DensitySpec::Separable2D(fx, fy) => {
                let v = fx.eval_raw(x) * fy.eval_raw(y);
                if v > 0.0 {
                    Ok(v)
                } else {
                    Err(Error::NonPositiveDensity { value: v })
                }
            }
            _ => self.eval(x),
        }
    }

    /// sqrt(Sigma) at a 1D point.
    pub fn eval_sqrt(&self, x: f64) -> Result<f64> {
        Ok(self.eval(x)?.sqrt())
    }

    /// sqrt(Sigma) at a 2D point.
    pub fn eval_sqrt_xy(&self, x: f64, y: f64) -> Result<f64> {
        Ok(self.eval_xy(x, y)?.sqrt())
    }

    fn eval_raw(&self, x: f64) -> f64 {
        match self {
            DensitySpec::Constant(c) => *c,
            DensitySpec::Parabolic { alpha } => {
                let t = 1.0 + alpha * x;
                t * t
            }
            DensitySpec::Oscillating { epsilon, eta } => {
                2.0 + (2.0 * std::f64::consts::PI * (x + eta / 2.0) / epsilon).sin()
            }
            DensitySpec::Separable2D(fx, _) => fx.eval_raw(x),
            DensitySpec::Custom(f) => f(x),
        }
    }

    /// Shortest oscillation period of the profile, used to size quadrature
    /// panels. None for smooth non-oscillatory profiles.
    pub fn oscillation_period(&self) -> Option<f64> {
        match self {
            DensitySpec::Oscillating { epsilon, .. } => Some(*epsilon),
            DensitySpec::Separable2D(fx, fy) => match (fx.oscillation_period(), fy.oscillation_period()) {
                (Some(px), Some(py)) => Some(px.min(py)),
                (Some(p), None) | (None, Some(p)) => Some(p),
                (None, None) => None,
            },
            _ => None,
        }
    }

    /// Validate the spec against an interval of length `a` (rectangles: the
    /// x side). The parabolic family must keep 1 + alpha x >= 0 on it.
    pub fn validate_for_length(&self, a: f64) -> Result<()> {
        match self {
            DensitySpec::Constant(c) if *c <= 0.0 => Err(Error::NonPositiveDensity { value: *c }),
            DensitySpec::Parabolic { alpha } if alpha.abs() > 2.0 / a + 1e-14 => {
                Err(Error::NonPositiveDensity { value: 0.0 })
            }
            DensitySpec::Oscillating { epsilon, .. } if *epsilon <= 0.0 => {
                Err(Error::NonPositiveDensity { value: *epsilon })
            }
            DensitySpec::Separable2D(fx, fy) => {
                fx.validate_for_length(a)?;
                fy.validate_for_length(a)
            }
            _ => Ok(()),
        }
    }

    /// CLI tag `kind:params`, e.g. `parabolic:2`, `oscillating:0.1,1`.
    pub fn parse(s: &str) -> Result<Self> {
        let (kind, params) = match s.split_once(':') {
            Some((k, p)) => (k, p),
            None => (s, ""),
        };
        let nums: Vec<f64> = if params.is_empty() {
            Vec::new()
        } else {
            params
                .split(',')
                .map(|t| {
                    t.trim()
                        .parse::<f64>()
                        .map_err(|_| Error::Config(format!("bad density parameter '{t}'")))
                })
                .collect::<Result<_>>()?
        };
        match kind.to_ascii_lowercase().as_str() {
            "constant" => Ok(DensitySpec::Constant(*nums.first().unwrap_or(&1.0))),
            "parabolic" => match nums.as_slice() {
                [alpha] => Ok(DensitySpec::Parabolic { alpha: *alpha }),
                _ => Err(Error::Config("parabolic density needs alpha".into())),
            },
            "oscillating" => match nums.as_slice() {
                [epsilon, eta] => Ok(DensitySpec::Oscillating { epsilon: *epsilon, eta: *eta }),
                _ => Err(Error::Config("oscillating density needs epsilon,eta".into())),
            },
            other => Err(Error::Config(format!("unknown density kind '{other}'"))),
        }
    }

    /// CLI tag of the spec, inverse of [`DensitySpec::parse`] for the
    /// parseable kinds.
    pub fn as_tag(&self) -> String {
        match self {
            DensitySpec::Constant(c) => format!("constant:{c}"),
            DensitySpec::Parabolic { alpha } => format!("parabolic:{alpha}"),
            DensitySpec::Oscillating { epsilon, eta } => format!("oscillating:{epsilon},{eta}"),
            DensitySpec::Separable2D(fx, fy) => format!("separable:[{},{}]", fx.as_tag(), fy.as_tag()),
            DensitySpec::Custom(_) => "custom".into(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parabolic_values() {
        let d = DensitySpec::parabolic(2.0);
        assert_eq!(d.eval(0.0).unwrap(), 1.0);
        let d = DensitySpec::parabolic(1.0);
        assert!((d.eval(0.5).unwrap() - 2.25).abs() < 1e-15);
        assert!((d.eval_sqrt(0.5).unwrap() - 1.5).abs() < 1e-15);
    }

    #[test]
    fn oscillating_values() {
        let d = DensitySpec::oscillating(0.1, 1.0);
        // 2 + sin(2 pi (-0.05)/0.1) = 2 + sin(-pi) = 2
        assert!((d.eval(-0.55).unwrap() - 2.0).abs() < 1e-12);
        // sqrt(2 + sin(-pi/2)) = 1
        assert!((d.eval_sqrt(-0.525).unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn constant_sqrt() {
        let d = DensitySpec::Constant(4.0);
        assert_eq!(d.eval_sqrt(0.3).unwrap(), 2.0);
    }

    #[test]
    fn sqrt_squares_back() {
        let specs = [
            DensitySpec::Constant(3.0),
            DensitySpec::parabolic(1.5),
            DensitySpec::oscillating(0.25, 0.5),
        ];
        // simple LCG over in-domain points
        let mut state: u64 = 0x9e3779b97f4a7c15;
        for _ in 0..10_000 {
            state = state.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            let x = (state >> 11) as f64 / (1u64 << 53) as f64 - 0.5;
            for d in &specs {
                let s = d.eval(x).unwrap();
                let r = d.eval_sqrt(x).unwrap();
                assert!((r * r - s).abs() <= 1e-14 * s);
            }
        }
    }

    #[test]
    fn oscillating_periodicity() {
        let eps = 0.125;
        let d = DensitySpec::oscillating(eps, 1.0);
        for i in 0..50 {
            let x = -0.5 + i as f64 * 0.007;
            if x + eps > 0.5 {
                break;
            }
            let lhs = d.eval(x + eps).unwrap();
            let rhs = d.eval(x).unwrap();
            assert!((lhs - rhs).abs() <= 1e-14 * rhs.abs());
        }
    }

    #[test]
    fn parabolic_endpoint_degeneracy() {
        // alpha = 2/a vanishes only at x = -a/2
        let d = DensitySpec::parabolic(2.0);
        assert!(d.eval(-0.5).is_err());
        assert!(d.eval(-0.499999).unwrap() > 0.0);
        assert!(d.validate_for_length(1.0).is_ok());
        let too_steep = DensitySpec::parabolic(2.2);
        assert!(too_steep.validate_for_length(1.0).is_err());
    }

    #[test]
    fn parse_tags() {
        let d = DensitySpec::parse("parabolic:2").unwrap();
        assert!(matches!(d, DensitySpec::Parabolic { alpha } if alpha == 2.0));
        let d = DensitySpec::parse("oscillating:0.1,1").unwrap();
        assert_eq!(d.as_tag(), "oscillating:0.1,1");
        assert!(DensitySpec::parse("granular:1").is_err());
    }

    #[test]
    fn separable_eval() {
        let d = DensitySpec::Separable2D(
            Box::new(DensitySpec::parabolic(1.0)),
            Box::new(DensitySpec::Constant(2.0)),
        );
        assert!((d.eval_xy(0.5, 0.1).unwrap() - 4.5).abs() < 1e-15);
        assert_eq!(d.oscillation_period(), None);
    }
}
