//! Model couplings and the admissibility predicates that gate every solver.

use alloc::vec::Vec;
use core::fmt;

use crate::error::{Error, Result};
use crate::math::sqrt;

/// Which predicates a parameter set must satisfy before a solve is attempted.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "kebab-case"))]
pub enum Admissibility {
    /// Positive couplings, `0 < g_inf < m`, the existence inequality
    /// `h1^2 < (16/3) h2 (m^2 - g_inf^2)` and the global-minimum condition.
    #[default]
    Theorem,
    /// Drops the existence inequality. This is the regime where the
    /// effective potential `V - g_inf^2 f^2 / 2` dips below zero, which is
    /// where non-trivial balls actually live.
    PotentialOnly,
}

/// Couplings `(e, m, h1, h2)` and the asymptotic gauge value `g_inf`.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(deny_unknown_fields))]
pub struct ModelParams {
    pub e: f64,
    pub m: f64,
    pub h1: f64,
    pub h2: f64,
    pub g_inf: f64,
    #[cfg_attr(feature = "serde", serde(default))]
    pub admissibility: Admissibility,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "kebab-case"))]
pub enum Predicate {
    /// `e, m, h1, h2 > 0`
    PositiveCouplings,
    /// `0 < g_inf < m`
    GaugeWindow,
    /// `h1^2 < (16/3) h2 (m^2 - g_inf^2)`
    ExistenceInequality,
    /// `3 h1^2 < 16 h2 m^2`
    GlobalMinimum,
}

impl Predicate {
    pub fn name(self) -> &'static str {
        match self {
            Predicate::PositiveCouplings => "positive-couplings",
            Predicate::GaugeWindow => "gauge-window",
            Predicate::ExistenceInequality => "existence-inequality",
            Predicate::GlobalMinimum => "global-minimum",
        }
    }

    pub fn statement(self) -> &'static str {
        match self {
            Predicate::PositiveCouplings => "e, m, h1, h2 > 0",
            Predicate::GaugeWindow => "0 < g_inf < m",
            Predicate::ExistenceInequality => "h1^2 < (16/3) h2 (m^2 - g_inf^2)",
            Predicate::GlobalMinimum => "3 h1^2 < 16 h2 m^2",
        }
    }
}

/// One evaluated predicate. `margin > 0` iff the predicate holds.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct PredicateCheck {
    pub predicate: Predicate,
    pub holds: bool,
    pub margin: f64,
    /// Whether the active [`Admissibility`] requires this predicate.
    pub required: bool,
}

/// A failed required predicate, as carried by [`Error::Parameter`].
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct Violation {
    pub predicate: Predicate,
    pub margin: f64,
    pub note: Option<&'static str>,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{} violated: {} (margin {:.6e})",
            self.predicate.name(),
            self.predicate.statement(),
            self.margin
        )?;
        if let Some(note) = self.note {
            write!(f, "; {note}")?;
        }
        Ok(())
    }
}

const NEGATIVE_G_NOTE: &str =
    "g_inf < 0 is not accepted: g -> -g maps solutions to solutions, so solve for |g_inf| instead";

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct Validation {
    pub admissibility: Admissibility,
    pub checks: Vec<PredicateCheck>,
    pub violations: Vec<Violation>,
}

impl Validation {
    pub fn is_ok(&self) -> bool {
        self.violations.is_empty()
    }
}

impl ModelParams {
    pub fn new(e: f64, m: f64, h1: f64, h2: f64, g_inf: f64) -> Self {
        Self {
            e,
            m,
            h1,
            h2,
            g_inf,
            admissibility: Admissibility::Theorem,
        }
    }

    pub fn with_admissibility(mut self, admissibility: Admissibility) -> Self {
        self.admissibility = admissibility;
        self
    }

    pub fn with_g_inf(mut self, g_inf: f64) -> Self {
        self.g_inf = g_inf;
        self
    }

    /// Asymptotic decay rate of the scalar profile, `sqrt(m^2 - g_inf^2)`.
    pub fn sigma(&self) -> f64 {
        sqrt(self.m * self.m - self.g_inf * self.g_inf)
    }

    /// Upper bound on the scalar amplitude, `sqrt(2 h1 / h2)`.
    pub fn amplitude_bound(&self) -> f64 {
        sqrt(2.0 * self.h1 / self.h2)
    }

    /// Amplitude minimising `V(f)/f^2`, `sqrt(3 h1 / (2 h2))`.
    pub fn plateau_amplitude(&self) -> f64 {
        sqrt(1.5 * self.h1 / self.h2)
    }

    fn check_finite(&self) -> Result<()> {
        for (field, v) in [
            ("e", self.e),
            ("m", self.m),
            ("h1", self.h1),
            ("h2", self.h2),
            ("g_inf", self.g_inf),
        ] {
            if !v.is_finite() {
                return Err(Error::InvalidNumber { field });
            }
        }
        Ok(())
    }

    /// Evaluate every predicate. Only non-finite input is an error; failed
    /// predicates are listed in the returned [`Validation`].
    pub fn validate(&self) -> Result<Validation> {
        self.check_finite()?;
        let ModelParams {
            e, m, h1, h2, g_inf, ..
        } = *self;
        let s = m * m - g_inf * g_inf;

        let positive = [e, m, h1, h2].iter().cloned().fold(f64::INFINITY, f64::min);
        let window = if g_inf <= 0.0 { g_inf } else { m - g_inf };
        let existence = (16.0 / 3.0) * h2 * s - h1 * h1;
        let global = 16.0 * h2 * m * m - 3.0 * h1 * h1;

        let required_existence = self.admissibility == Admissibility::Theorem;
        let raw = [
            (Predicate::PositiveCouplings, positive, true),
            (Predicate::GaugeWindow, window, true),
            (Predicate::ExistenceInequality, existence, required_existence),
            (Predicate::GlobalMinimum, global, true),
        ];

        let mut checks = Vec::with_capacity(raw.len());
        let mut violations = Vec::new();
        for (predicate, margin, required) in raw {
            let holds = margin > 0.0;
            checks.push(PredicateCheck {
                predicate,
                holds,
                margin,
                required,
            });
            if required && !holds {
                let note = if predicate == Predicate::GaugeWindow && g_inf < 0.0 {
                    Some(NEGATIVE_G_NOTE)
                } else {
                    None
                };
                violations.push(Violation {
                    predicate,
                    margin,
                    note,
                });
            }
        }
        Ok(Validation {
            admissibility: self.admissibility,
            checks,
            violations,
        })
    }

    /// `Ok(())` iff every required predicate holds.
    pub fn ensure_valid(&self) -> Result<()> {
        let v = self.validate()?;
        if v.is_ok() {
            Ok(())
        } else {
            Err(Error::Parameter(v.violations))
        }
    }

    /// The constant `c` with `(m^2 - g_inf^2) - (h1/4) t + (h2/12) t^2 >= c`
    /// for all `t = f^2 >= 0`.
    ///
    /// Only the quadratic needs to be well formed here (`h2 > 0`,
    /// `h1 >= 0`); the result must be strictly positive.
    pub fn coercivity_constant(&self) -> Result<f64> {
        self.check_finite()?;
        if self.h2 <= 0.0 || self.h1 < 0.0 {
            let predicate = Predicate::PositiveCouplings;
            return Err(Error::Parameter(alloc::vec![Violation {
                predicate,
                margin: self.h2.min(self.h1),
                note: None,
            }]));
        }
        let c = (self.m * self.m - self.g_inf * self.g_inf) - 3.0 * self.h1 * self.h1 / (16.0 * self.h2);
        if c > 0.0 {
            Ok(c)
        } else {
            Err(Error::Parameter(alloc::vec![Violation {
                predicate: Predicate::ExistenceInequality,
                margin: c,
                note: Some("the quadratic potential density is not bounded below by a positive constant"),
            }]))
        }
    }

    /// `(m^2 - g_inf^2) - (h1/4) t + (h2/12) t^2`
    pub fn potential_density(&self, t: f64) -> f64 {
        (self.m * self.m - self.g_inf * self.g_inf) - 0.25 * self.h1 * t + self.h2 / 12.0 * t * t
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn unit(g_inf: f64) -> ModelParams {
        ModelParams::new(1.0, 1.0, 1.0, 1.0, g_inf)
    }

    #[test]
    fn baseline_is_admissible() {
        let v = unit(0.3).validate().unwrap();
        assert!(v.is_ok());
        let existence = v
            .checks
            .iter()
            .find(|c| c.predicate == Predicate::ExistenceInequality)
            .unwrap();
        // (16/3)(1 - 0.09) - 1
        assert!((existence.margin - (16.0 / 3.0 * 0.91 - 1.0)).abs() < 1e-14);
    }

    #[test]
    fn g_inf_above_mass_violates_window() {
        let v = unit(1.5).validate().unwrap();
        assert!(!v.is_ok());
        assert!(v.violations.iter().any(|x| x.predicate == Predicate::GaugeWindow));
    }

    #[test]
    fn large_quartic_violates_existence_inequality() {
        let p = ModelParams::new(1.0, 1.0, 3.0, 1.0, 0.1);
        let v = p.validate().unwrap();
        let names: Vec<_> = v.violations.iter().map(|x| x.predicate).collect();
        assert!(names.contains(&Predicate::ExistenceInequality));
        // 27 < 16 fails as well
        assert!(names.contains(&Predicate::GlobalMinimum));
    }

    #[test]
    fn potential_only_skips_existence_inequality() {
        let p = ModelParams::new(0.05, 1.0, 2.0, 1.0, 0.8);
        assert!(p.validate().unwrap().violations.len() == 1);
        let p = p.with_admissibility(Admissibility::PotentialOnly);
        assert!(p.validate().unwrap().is_ok());
    }

    #[test]
    fn negative_g_inf_cites_sign_symmetry() {
        let err = unit(-0.3).ensure_valid().unwrap_err();
        match err {
            Error::Parameter(v) => {
                assert_eq!(v[0].predicate, Predicate::GaugeWindow);
                assert!(v[0].note.unwrap().contains("g -> -g"));
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn non_finite_is_invalid_number() {
        let p = ModelParams::new(1.0, f64::NAN, 1.0, 1.0, 0.3);
        assert!(matches!(p.validate(), Err(Error::InvalidNumber { field: "m" })));
    }

    #[test]
    fn coercivity_constant_examples() {
        let c = ModelParams::new(1.0, 1.0, 0.0, 1.0, 0.0).coercivity_constant().unwrap();
        assert_eq!(c, 1.0);
        let c = unit(0.3).coercivity_constant().unwrap();
        assert!((c - 0.7225).abs() < 1e-14);
        assert!(ModelParams::new(1.0, 1.0, 2.0, 1.0, 0.8).coercivity_constant().is_err());
    }

    fn valid_params() -> impl Strategy<Value = ModelParams> {
        (0.01f64..5.0, 0.1f64..5.0, 0.01f64..1.0, 0.01f64..0.99, 0.0f64..0.999).prop_map(|(e, m, h2, gfrac, hfrac)| {
            let g_inf = gfrac * m;
            let h1max = sqrt(16.0 / 3.0 * h2 * (m * m - g_inf * g_inf));
            ModelParams::new(e, m, (hfrac * h1max).max(1e-6), h2, g_inf)
        })
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(1000))]

        #[test]
        fn coercivity_positive_for_valid(p in valid_params()) {
            prop_assert!(p.validate().unwrap().is_ok());
            prop_assert!(p.coercivity_constant().unwrap() > 0.0);
        }

        #[test]
        fn coercivity_is_a_lower_bound(p in valid_params(), t in 0.0f64..100.0) {
            let c = p.coercivity_constant().unwrap();
            let scale = 1.0 + p.potential_density(t).abs();
            prop_assert!(p.potential_density(t) >= c - 1e-12 * scale);
        }
    }
}
