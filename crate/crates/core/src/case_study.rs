//! Closed-form analytics for the quadratic-distortion specification
//! `u(x) = (x − K)⁺`, `w(q) = ηq² + (1−η)q` with `K > 0`, `η ∈ (0,1)`.
//!
//! For this family the threshold laws `1_{(0,b)}` (stop at and above `b`)
//! are equilibria exactly for `0 ≤ b ≤ b* = (η+1)K/η`; larger thresholds
//! collapse in one operator step to the ray at `b' = Kb/(η(b−K))`.  Among
//! the equilibrium family, `b*` maximizes the time-0 value at every state,
//! the shortfall of an inferior equilibrium is the explicit cash
//! compensation `c(x, b)`, and value dominance is monotone in the
//! threshold.

use thiserror::Error;

use crate::problem::{DistortionSpec, PayoffSpec, StoppingProblem};

/// Errors from the case-study formulas.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum CaseStudyError {
    #[error("strike must be positive, got {strike}")]
    BadStrike { strike: f64 },
    #[error("eta must lie in (0,1), got {eta}")]
    BadEta { eta: f64 },
    #[error("threshold map applies to thresholds above b* = {b_star}, got {b}")]
    ThresholdNotAboveFamily { b: f64, b_star: f64 },
    #[error("cost is defined for thresholds below b* = {b_star}, got {b}")]
    ThresholdOutsideFamily { b: f64, b_star: f64 },
    #[error("threshold must be nonnegative, got {b}")]
    NegativeThreshold { b: f64 },
}

/// Parameters of the quadratic case study.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CaseStudyParams {
    strike: f64,
    eta: f64,
}

impl CaseStudyParams {
    pub fn new(strike: f64, eta: f64) -> Result<Self, CaseStudyError> {
        if !(strike.is_finite() && strike > 0.0) {
            return Err(CaseStudyError::BadStrike { strike });
        }
        if !(eta.is_finite() && eta > 0.0 && eta < 1.0) {
            return Err(CaseStudyError::BadEta { eta });
        }
        Ok(Self { strike, eta })
    }

    pub fn strike(&self) -> f64 {
        self.strike
    }

    pub fn eta(&self) -> f64 {
        self.eta
    }

    /// Largest equilibrium threshold `b* = (η+1)K/η`, the naive threshold.
    pub fn optimal_threshold(&self) -> f64 {
        (self.eta + 1.0) * self.strike / self.eta
    }

    /// `u(x) = (x − K)⁺`.
    pub fn payoff(&self, x: f64) -> f64 {
        (x - self.strike).max(0.0)
    }

    /// `w(q) = ηq² + (1−η)q`.
    pub fn distort(&self, q: f64) -> f64 {
        self.eta * q * q + (1.0 - self.eta) * q
    }

    /// The same specification as a [`StoppingProblem`] (`β = 1`), for
    /// cross-checks against the generic solvers.
    pub fn to_problem(&self) -> StoppingProblem {
        StoppingProblem::from_beta(
            1.0,
            PayoffSpec::Call {
                strike: self.strike,
            },
            DistortionSpec::ConvexQuadratic { eta: self.eta },
        )
        .expect("case-study parameters are valid")
    }

    /// One operator step applied to the non-equilibrium threshold `b > b*`:
    /// the new threshold `b' = Kb/(η(b−K))`, always inside `(K/η, b*)`.
    pub fn theta_threshold_map(&self, b: f64) -> Result<f64, CaseStudyError> {
        let b_star = self.optimal_threshold();
        if !(b > b_star) {
            return Err(CaseStudyError::ThresholdNotAboveFamily { b, b_star });
        }
        Ok(self.strike * b / (self.eta * (b - self.strike)))
    }

    /// Time-0 value `J(x; T_{[b,∞)})` of the threshold law at state `x`:
    /// `u(x)` once `x ≥ b`, otherwise `w(x/b)·(b − K)⁺`.  Defined for any
    /// `b ≥ 0`; thresholds above `b*` are outside the equilibrium family
    /// but still evaluate.
    pub fn value_of_threshold(&self, x: f64, b: f64) -> Result<f64, CaseStudyError> {
        if !(b >= 0.0) {
            return Err(CaseStudyError::NegativeThreshold { b });
        }
        if x >= b {
            Ok(self.payoff(x))
        } else {
            Ok(self.distort(x / b) * self.payoff(b))
        }
    }

    /// The equilibrium threshold maximizing the time-0 value: `b*` is the
    /// unique maximizer for `x < b*` and, by convention, is returned for
    /// `x ≥ b*` where the family's values are all equal to `u(x)`.
    pub fn optimal_equilibrium(&self, _x: f64) -> f64 {
        self.optimal_threshold()
    }

    /// Cash compensation that lifts the value of the inferior equilibrium
    /// `1_{(0,b)}`, `b < b*`, to the optimal one at state `x`:
    ///
    /// `c(x,b) = K − (b ∨ x) + (K/η)·w(x/b*) / w((x/b) ∧ 1)` for `x < b*`,
    /// and 0 for `x ≥ b*`.  (`b = 0` means stop immediately; `(x/b) ∧ 1`
    /// is then 1.)
    pub fn cost_of_equilibrium(&self, x: f64, b: f64) -> Result<f64, CaseStudyError> {
        let b_star = self.optimal_threshold();
        if !(b >= 0.0) {
            return Err(CaseStudyError::NegativeThreshold { b });
        }
        if b >= b_star {
            return Err(CaseStudyError::ThresholdOutsideFamily { b, b_star });
        }
        if x >= b_star {
            return Ok(0.0);
        }
        let ratio = if b <= x { 1.0 } else { x / b };
        Ok(self.strike - b.max(x)
            + (self.strike / self.eta) * self.distort(x / b_star) / self.distort(ratio))
    }

    /// Value dominance within the equilibrium family is monotone in the
    /// threshold: `1_{(0,b1)}` dominates `1_{(0,b2)}` iff `b1 ≥ b2`.
    pub fn pareto_dominates(&self, b1: f64, b2: f64) -> Result<bool, CaseStudyError> {
        let b_star = self.optimal_threshold();
        for b in [b1, b2] {
            if !(b >= 0.0) {
                return Err(CaseStudyError::NegativeThreshold { b });
            }
            if b > b_star {
                return Err(CaseStudyError::ThresholdOutsideFamily { b, b_star });
            }
        }
        Ok(b1 >= b2)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn params() -> CaseStudyParams {
        CaseStudyParams::new(1.0, 0.5).unwrap()
    }

    #[test]
    fn optimal_threshold_formula() {
        assert_eq!(params().optimal_threshold(), 3.0);
        let c = CaseStudyParams::new(2.0, 0.25).unwrap();
        assert_eq!(c.optimal_threshold(), 10.0);
    }

    #[test]
    fn threshold_map_examples_and_limits() {
        let c = params();
        let b_prime = c.theta_threshold_map(10.0).unwrap();
        assert!((b_prime - 20.0 / 9.0).abs() < 1e-15);

        // b → b*⁺ has limit b*, b → ∞ has limit K/η.
        let near = c.theta_threshold_map(3.0 + 1e-9).unwrap();
        assert!((near - 3.0).abs() < 1e-6);
        let far = c.theta_threshold_map(1e12).unwrap();
        assert!((far - 2.0).abs() < 1e-9);

        for b in [0.5, 3.0] {
            assert!(c.theta_threshold_map(b).is_err());
        }
        // The image always lands strictly inside (K/η, b*).
        let mut b = 3.0 + 1e-6;
        while b < 1000.0 {
            let image = c.theta_threshold_map(b).unwrap();
            assert!(image > 2.0 && image < 3.0, "b = {b} mapped to {image}");
            b *= 1.7;
        }
    }

    #[test]
    fn value_examples() {
        let c = params();
        // w(1/3)·u(3) = (2/9)·2 = 4/9.
        let v = c.value_of_threshold(1.0, 3.0).unwrap();
        assert!((v - 4.0 / 9.0).abs() < 1e-15);
        // b = 0: stop immediately at x = 1, at or below strike.
        assert_eq!(c.value_of_threshold(1.0, 0.0).unwrap(), 0.0);
        // Above b* the family values are constant u(x).
        for b in [0.0, 1.0, 3.0] {
            assert_eq!(c.value_of_threshold(5.0, b).unwrap(), 4.0);
        }
    }

    #[test]
    fn values_increase_with_threshold() {
        let c = params();
        for x in [0.5, 1.0, 2.0, 2.9] {
            let mut prev = -1.0;
            for k in 0..=1000 {
                let b = 3.0 * k as f64 / 1000.0;
                let v = c.value_of_threshold(x, b).unwrap();
                assert!(v >= prev - 1e-12, "x={x}, b={b}");
                prev = v;
            }
        }
    }

    #[test]
    fn optimal_equilibrium_matches_brute_force_argmax() {
        let c = params();
        let n = 10_000;
        for x in [0.5, 2.0] {
            let mut best = (0.0, f64::MIN);
            for k in 0..=n {
                let b = 3.0 * k as f64 / n as f64;
                let v = c.value_of_threshold(x, b).unwrap();
                if v > best.1 {
                    best = (b, v);
                }
            }
            assert!(
                (best.0 - c.optimal_equilibrium(x)).abs() <= 3.0 / n as f64 + 1e-12,
                "x = {x}: argmax {}",
                best.0
            );
        }
    }

    #[test]
    fn cost_examples() {
        let c = params();
        // c(1,0) = 1 − 1 + 2·w(1/3)/w(1) = 4/9.
        let v = c.cost_of_equilibrium(1.0, 0.0).unwrap();
        assert!((v - 4.0 / 9.0).abs() < 1e-12);
        // Above b* the cost vanishes.
        assert_eq!(c.cost_of_equilibrium(4.0, 0.0).unwrap(), 0.0);
        assert_eq!(c.cost_of_equilibrium(4.0, 2.0).unwrap(), 0.0);
        // b → b*⁻ at x = 1: K − b* + K/η → 0.
        let v = c.cost_of_equilibrium(1.0, 3.0 - 1e-10).unwrap();
        assert!(v.abs() < 1e-8);
        assert!(c.cost_of_equilibrium(1.0, 3.0).is_err());
    }

    #[test]
    fn cost_is_positive_inside_the_family() {
        let c = params();
        for i in 0..50 {
            let x = 3.0 * (i as f64 + 0.5) / 50.0;
            for j in 0..50 {
                let b = 3.0 * j as f64 / 50.0;
                let v = c.cost_of_equilibrium(x, b).unwrap();
                assert!(v > 0.0, "c({x},{b}) = {v}");
            }
        }
    }

    #[test]
    fn pareto_order_is_threshold_order() {
        let c = params();
        assert!(c.pareto_dominates(3.0, 1.0).unwrap());
        assert!(!c.pareto_dominates(1.0, 3.0).unwrap());
        assert!(c.pareto_dominates(2.0, 2.0).unwrap());
        assert!(c.pareto_dominates(3.5, 1.0).is_err());

        // Cross-validated against values on an x-grid.
        for (b1, b2) in [(3.0, 1.0), (2.5, 0.0), (1.0, 0.5)] {
            for k in 1..60 {
                let x = 0.1 * k as f64;
                let v1 = c.value_of_threshold(x, b1).unwrap();
                let v2 = c.value_of_threshold(x, b2).unwrap();
                assert!(v1 >= v2 - 1e-12, "x={x}");
            }
        }
    }

    #[test]
    fn parameters_are_validated() {
        assert!(CaseStudyParams::new(0.0, 0.5).is_err());
        assert!(CaseStudyParams::new(1.0, 0.0).is_err());
        assert!(CaseStudyParams::new(1.0, 1.0).is_err());
    }
}
