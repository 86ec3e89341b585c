//! Model parameters and their validity constraints.

use serde::{Deserialize, Serialize};
use std::fmt;
use std::str::FromStr;

use crate::error::ParamsError;

/// A positive exponent that may carry an exact rational representation.
///
/// Regime classification hinges on whether `beta * (d - 1)` equals 1
/// exactly; when the exponent was supplied as `"p/q"` that comparison is
/// done in integers, so the regime boundary cannot flip due to a floating
/// representation of `1/(d-1)`. Otherwise a relative tolerance of `1e-12`
/// is used.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Exponent {
    value: f64,
    ratio: Option<(u64, u64)>,
}

impl Exponent {
    pub const CRITICALITY_TOLERANCE: f64 = 1e-12;

    pub fn from_f64(value: f64) -> Self {
        Exponent { value, ratio: None }
    }

    pub fn from_ratio(num: u64, den: u64) -> Result<Self, ParamsError> {
        if den == 0 || num == 0 {
            return Err(ParamsError::BadExponent {
                text: format!("{num}/{den}"),
            });
        }
        Ok(Exponent {
            value: num as f64 / den as f64,
            ratio: Some((num, den)),
        })
    }

    pub fn value(&self) -> f64 {
        self.value
    }

    /// Sign of `self * (d - 1) - 1`, exact when a ratio is known.
    pub fn criticality(&self, d: usize) -> std::cmp::Ordering {
        if d == 0 {
            return std::cmp::Ordering::Less;
        }
        if let Some((num, den)) = self.ratio {
            return (num as u128 * (d as u128 - 1)).cmp(&(den as u128));
        }
        let x = self.value * (d as f64 - 1.0);
        if (x - 1.0).abs() <= Self::CRITICALITY_TOLERANCE {
            std::cmp::Ordering::Equal
        } else if x < 1.0 {
            std::cmp::Ordering::Less
        } else {
            std::cmp::Ordering::Greater
        }
    }
}

impl FromStr for Exponent {
    type Err = ParamsError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let bad = || ParamsError::BadExponent {
            text: s.to_string(),
        };
        if let Some((num, den)) = s.split_once('/') {
            let num: u64 = num.trim().parse().map_err(|_| bad())?;
            let den: u64 = den.trim().parse().map_err(|_| bad())?;
            Exponent::from_ratio(num, den)
        } else {
            let value: f64 = s.trim().parse().map_err(|_| bad())?;
            if !value.is_finite() {
                return Err(bad());
            }
            Ok(Exponent::from_f64(value))
        }
    }
}

impl fmt::Display for Exponent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.ratio {
            Some((num, den)) => write!(f, "{num}/{den}"),
            None => write!(f, "{}", self.value),
        }
    }
}

impl Serialize for Exponent {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        match self.ratio {
            Some(_) => s.serialize_str(&self.to_string()),
            None => s.serialize_f64(self.value),
        }
    }
}

impl<'de> Deserialize<'de> for Exponent {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Number(f64),
            Text(String),
        }
        match Raw::deserialize(d)? {
            Raw::Number(x) => Ok(Exponent::from_f64(x)),
            Raw::Text(t) => t.parse().map_err(serde::de::Error::custom),
        }
    }
}

/// All scalar model parameters.
///
/// Arrival rate `lambda` is per node per unit time; service sizes are
/// exponential with rates `mu_u` / `mu_v` by side; active queues drain at
/// speed `c`; activation rates are `b * q^beta` on U and
/// `b_prime * q^beta_prime` on V; initial queues are `gamma_u * r` on U
/// and `gamma_v * r` on V.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelParams {
    pub lambda: f64,
    pub mu_u: f64,
    pub mu_v: f64,
    pub c: f64,
    pub b: f64,
    pub beta: Exponent,
    pub b_prime: f64,
    pub beta_prime: f64,
    pub gamma_u: f64,
    pub gamma_v: f64,
    pub r: f64,
}

impl ModelParams {
    /// Offered load on the U side, `rho_U = lambda / mu_U`.
    pub fn rho_u(&self) -> f64 {
        self.lambda / self.mu_u
    }

    /// Offered load on the V side, `rho_V = lambda / mu_V`.
    pub fn rho_v(&self) -> f64 {
        self.lambda / self.mu_v
    }

    /// Net drain speed of a saturated active U-queue, `c - rho_U`.
    pub fn drain_u(&self) -> f64 {
        self.c - self.rho_u()
    }

    /// U-side activation rate `g_U(q) = b q^beta`.
    pub fn g_u(&self, q: f64) -> f64 {
        self.b * q.powf(self.beta.value())
    }

    /// V-side activation rate `g_V(q) = b' q^beta'`.
    pub fn g_v(&self, q: f64) -> f64 {
        self.b_prime * q.powf(self.beta_prime)
    }

    /// Check every model constraint; the error names the violated one.
    pub fn validate(&self) -> Result<(), ParamsError> {
        let positive = [
            ("lambda", self.lambda),
            ("mu_u", self.mu_u),
            ("mu_v", self.mu_v),
            ("c", self.c),
            ("b", self.b),
            ("beta", self.beta.value()),
            ("b_prime", self.b_prime),
            ("beta_prime", self.beta_prime),
            ("gamma_u", self.gamma_u),
            ("gamma_v", self.gamma_v),
            ("r", self.r),
        ];
        for (field, value) in positive {
            if !(value > 0.0) {
                return Err(ParamsError::NotPositive { field, value });
            }
        }
        if self.rho_u() >= self.c {
            return Err(ParamsError::UnstableU {
                rho: self.rho_u(),
                c: self.c,
            });
        }
        if self.rho_v() >= self.c {
            return Err(ParamsError::UnstableV {
                rho: self.rho_v(),
                c: self.c,
            });
        }
        if !(self.gamma_u >= self.gamma_v) {
            return Err(ParamsError::InitialQueueOrder {
                gamma_u: self.gamma_u,
                gamma_v: self.gamma_v,
            });
        }
        if !(self.beta_prime > self.beta.value() + 1.0) {
            return Err(ParamsError::NotAggressiveEnough {
                beta: self.beta.value(),
                beta_prime: self.beta_prime,
            });
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::cmp::Ordering;

    pub(crate) fn subcritical_params() -> ModelParams {
        ModelParams {
            lambda: 0.5,
            mu_u: 1.0,
            mu_v: 1.0,
            c: 1.0,
            b: 1.0,
            beta: Exponent::from_ratio(1, 4).unwrap(),
            b_prime: 1.0,
            beta_prime: 2.0,
            gamma_u: 1.0,
            gamma_v: 1.0,
            r: 2000.0,
        }
    }

    #[test]
    fn valid_params_pass() {
        subcritical_params().validate().unwrap();
    }

    #[test]
    fn aggressiveness_constraint_is_strict() {
        let mut p = subcritical_params();
        p.beta = Exponent::from_f64(1.0);
        p.beta_prime = 2.0;
        assert!(matches!(
            p.validate(),
            Err(ParamsError::NotAggressiveEnough { .. })
        ));
    }

    #[test]
    fn load_must_be_below_drain_speed() {
        let mut p = subcritical_params();
        p.lambda = 1.0;
        assert!(matches!(p.validate(), Err(ParamsError::UnstableU { .. })));
    }

    #[test]
    fn gamma_order_enforced() {
        let mut p = subcritical_params();
        p.gamma_v = 2.0;
        assert!(matches!(
            p.validate(),
            Err(ParamsError::InitialQueueOrder { .. })
        ));
    }

    #[test]
    fn rational_criticality_is_exact() {
        // beta = 1/3: critical exactly at d = 4.
        let b = Exponent::from_ratio(1, 3).unwrap();
        assert_eq!(b.criticality(3), Ordering::Less);
        assert_eq!(b.criticality(4), Ordering::Equal);
        assert_eq!(b.criticality(5), Ordering::Greater);
        // The 1e-12 tolerance deliberately treats the float 1/3 as
        // critical at d = 4; a genuinely off value stays subcritical.
        let f = Exponent::from_f64(1.0 / 3.0);
        assert_eq!(f.criticality(4), Ordering::Equal);
        assert_eq!(Exponent::from_f64(0.33).criticality(4), Ordering::Less);
    }

    #[test]
    fn float_criticality_uses_tolerance() {
        let b = Exponent::from_f64(0.5);
        assert_eq!(b.criticality(3), Ordering::Equal);
        assert_eq!(b.criticality(2), Ordering::Less);
        assert_eq!(b.criticality(4), Ordering::Greater);
    }

    #[test]
    fn exponent_parses_both_forms() {
        let r: Exponent = "1/2".parse().unwrap();
        assert_eq!(r.value(), 0.5);
        let f: Exponent = "0.25".parse().unwrap();
        assert_eq!(f.value(), 0.25);
        assert!("one/half".parse::<Exponent>().is_err());
    }

    #[test]
    fn params_json_round_trip_keeps_rational_beta() {
        let p = subcritical_params();
        let json = serde_json::to_string(&p).unwrap();
        assert!(json.contains("\"1/4\""));
        let back: ModelParams = serde_json::from_str(&json).unwrap();
        assert_eq!(back, p);
    }
}
