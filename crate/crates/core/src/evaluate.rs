//! Closed-form distorted payoffs of interval-exit stopping times.
//!
//! For the driftless transformed process started at `x` and the exit time of
//! `(a, b)`, the distorted expected payoff has the closed form
//!
//! - `0`                                        for `a = 0, b = ∞` (the state
//!   drifts to zero almost surely),
//! - `u(a)`                                     for `a > 0, b = ∞`,
//! - `u(a) + w((x−a)/(b−a))·(u(b) − u(a))`      for `b < ∞`,
//!
//! which also covers `a = 0, b < ∞` as `w(x/b)·u(b)` via `u(0) = 0`.  The
//! continuation value of an interval-kernel law at `x` reduces to one of
//! these cases through the neighbor query, with closure membership (interior,
//! boundary, or isolated kernel points) meaning an immediate stop at value
//! `u(x)`.

use thiserror::Error;

use crate::kernel::StoppingLaw;
use crate::problem::StoppingProblem;

/// Errors from evaluation domain checks.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum EvalError {
    #[error("evaluation requires beta > 0, problem has beta = {beta}")]
    WrongRegime { beta: f64 },
    #[error("interval must satisfy 0 <= lower < upper, got [{lower}, {upper}]")]
    BadInterval { lower: f64, upper: f64 },
    #[error("start {start} lies outside [{lower}, {upper}]")]
    StartOutsideInterval { start: f64, lower: f64, upper: f64 },
    #[error("hit level requires 0 < x <= b, got x = {x}, b = {b}")]
    BadHitLevel { x: f64, b: f64 },
}

/// Exit-time specification: leave `(lower, upper)` starting from `start`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExitSpec {
    lower: f64,
    upper: f64,
    start: f64,
}

impl ExitSpec {
    /// `lower ≥ 0`, `lower < upper ≤ +∞`, `lower ≤ start ≤ upper`.
    pub fn new(lower: f64, upper: f64, start: f64) -> Result<Self, EvalError> {
        if !(lower >= 0.0) || !(upper > lower) || lower.is_infinite() {
            return Err(EvalError::BadInterval { lower, upper });
        }
        if !(start >= lower && start <= upper) || start.is_infinite() {
            return Err(EvalError::StartOutsideInterval {
                start,
                lower,
                upper,
            });
        }
        Ok(Self {
            lower,
            upper,
            start,
        })
    }

    pub fn lower(&self) -> f64 {
        self.lower
    }

    pub fn upper(&self) -> f64 {
        self.upper
    }

    pub fn start(&self) -> f64 {
        self.start
    }
}

fn require_positive_beta(p: &StoppingProblem) -> Result<(), EvalError> {
    if p.beta() > 0.0 {
        Ok(())
    } else {
        Err(EvalError::WrongRegime { beta: p.beta() })
    }
}

/// Distorted expected payoff of the interval exit described by `exit`.
/// Boundary starts are exact: `x = a` gives `u(a)`, `x = b` gives `u(b)`.
pub fn interval_exit_value(p: &StoppingProblem, exit: &ExitSpec) -> Result<f64, EvalError> {
    require_positive_beta(p)?;
    let (a, b, x) = (exit.lower(), exit.upper(), exit.start());
    if b.is_infinite() {
        if a == 0.0 {
            return Ok(0.0);
        }
        return Ok(p.transformed_payoff(a));
    }
    let u_a = p.transformed_payoff(a);
    let u_b = p.transformed_payoff(b);
    let q = (x - a) / (b - a);
    Ok(u_a + p.distort(q) * (u_b - u_a))
}

/// Value of continuing at `x` when all future selves follow `law`:
/// the distorted payoff of the first entry of the kernel after time zero.
pub fn continuation_value(
    p: &StoppingProblem,
    law: &StoppingLaw,
    x: f64,
) -> Result<f64, EvalError> {
    require_positive_beta(p)?;
    let n = law.kernel().neighbors(x);
    if n.in_closure {
        // Interior, boundary, and isolated kernel points all revisit the
        // kernel immediately.
        return Ok(p.transformed_payoff(x));
    }
    let exit = ExitSpec::new(n.below, n.above, x).expect("neighbors bracket x");
    interval_exit_value(p, &exit)
}

/// `P[X hits b | X_0 = x] = x / b` for `0 < x ≤ b`.
pub fn hit_probability(x: f64, b: f64) -> Result<f64, EvalError> {
    if !(x > 0.0 && b > 0.0 && x <= b) || b.is_infinite() {
        return Err(EvalError::BadHitLevel { x, b });
    }
    Ok(x / b)
}
