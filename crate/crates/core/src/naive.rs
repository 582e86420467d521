//! Per-state pre-committed optimal stopping and the naive stopping law.
//!
//! A naive agent re-solves the pre-committed problem at every state and
//! follows today's optimum.  The per-state solution is one of
//!
//! - stop now,
//! - run to a one-sided threshold `b ≥ x` (the moving threshold is the
//!   source of time-inconsistency),
//! - no optimal stopping time exists (the supremum is approached but not
//!   attained, possibly infinite), in which case the naive law continues.
//!
//! For convex transformed payoffs the problem reduces to the one-dimensional
//! maximization `sup_{λ ∈ (0,1]} w(λ)·u(x/λ)` (take `λ = x/b` for the
//! threshold `b`); concave and flat-then-concave payoffs are classified
//! against the distortion shape.  Analytic routes cover the parametric
//! families with known solutions; a geometric-grid maximizer with
//! supremum-at-zero detection handles the rest.

use thiserror::Error;

use crate::evaluate::{interval_exit_value, ExitSpec};
use crate::kernel::StoppingLaw;
use crate::numeric::{bisect_predicate, bisect_root, golden_max};
use crate::problem::{
    DistortionShape, DistortionSpec, PayoffShape, PayoffSpec, SlopeAtZero, StoppingProblem,
};

/// Errors from the naive solver.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum SolveError {
    #[error("solver requires beta > 0, problem has beta = {beta}")]
    WrongRegime { beta: f64 },
    #[error("state must be positive, got {x}")]
    StateOutOfRange { x: f64 },
    #[error("lambda must lie in (0,1], got {lambda}")]
    LambdaOutOfRange { lambda: f64 },
    #[error("reduced objective applies to convex transformed payoffs only")]
    NotReducible,
    #[error("no pre-committed classification is known for {payoff:?} with {distortion:?} at beta = {beta}")]
    UnsupportedCombination {
        payoff: PayoffSpec,
        distortion: DistortionSpec,
        beta: f64,
    },
    #[error("threshold formula requires beta >= 1, got {beta}")]
    BetaBelowOne { beta: f64 },
    #[error("threshold equation has no positive root at x = {x}")]
    NoThresholdRoot { x: f64 },
}

/// Sign-of-β regime of the problem.
///
/// Only `β > 0` is time-inconsistent.  For `β < 0` never stopping is
/// pre-committed optimal at every state; for `β = 0` the optimum is a fixed
/// threshold on the price process itself, independent of the current state.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum BetaRegime {
    NeverStop,
    /// Threshold in original price coordinates; `+∞` when the payoff
    /// supremum is unattained.
    FixedThreshold {
        threshold: f64,
    },
    TimeInconsistent,
}

/// Decision component of a pre-committed solution.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum PrecommitDecision {
    StopNow,
    /// Stop at the first time the state reaches `level` (`level ≥ x`).
    Threshold {
        level: f64,
    },
    /// No optimal stopping time exists; the naive agent continues.
    NoOptimum,
}

/// Pre-committed solution at one state.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PrecommitResult {
    pub decision: PrecommitDecision,
    /// Optimal value when the route computes it: `u(x)` for stop-now, the
    /// threshold exit value otherwise, `+∞` for provably infinite suprema.
    /// `None` when the classification route establishes only the decision
    /// (inverse-S continue cases outside the one-sided family).
    pub value: Option<f64>,
}

impl PrecommitResult {
    fn stop_now(p: &StoppingProblem, x: f64) -> Self {
        Self {
            decision: PrecommitDecision::StopNow,
            value: Some(p.transformed_payoff(x)),
        }
    }
}

/// Classifies the problem by the sign of `β`.
pub fn classify_beta(p: &StoppingProblem) -> BetaRegime {
    let beta = p.beta();
    if beta < 0.0 {
        BetaRegime::NeverStop
    } else if beta == 0.0 {
        let threshold = p.payoff().attained_maximum(beta).unwrap_or(f64::INFINITY);
        BetaRegime::FixedThreshold { threshold }
    } else {
        BetaRegime::TimeInconsistent
    }
}

/// `w(λ)·u(x/λ)`: value of running from `x` to the threshold `x/λ`.
pub fn reduced_objective(p: &StoppingProblem, x: f64, lambda: f64) -> Result<f64, SolveError> {
    if p.beta() <= 0.0 {
        return Err(SolveError::WrongRegime { beta: p.beta() });
    }
    if !(x > 0.0) {
        return Err(SolveError::StateOutOfRange { x });
    }
    if !(lambda > 0.0 && lambda <= 1.0) {
        return Err(SolveError::LambdaOutOfRange { lambda });
    }
    let shape = p.shape().expect("beta > 0 checked above");
    if shape.payoff != PayoffShape::Convex {
        return Err(SolveError::NotReducible);
    }
    Ok(p.distort(lambda) * p.transformed_payoff(x / lambda))
}

/// Outcome of maximizing the reduced objective over `λ ∈ (0,1]`.
#[derive(Debug, Clone, Copy, PartialEq)]
enum ReducedMax {
    /// Maximizer attained at `lambda`.
    At { lambda: f64, value: f64 },
    /// Supremum approached as `λ → 0+`, never attained.
    SupAtZero { value: f64 },
}

fn from_reduced(outcome: ReducedMax, p: &StoppingProblem, x: f64) -> PrecommitResult {
    match outcome {
        ReducedMax::At { lambda, value } => {
            if lambda >= 1.0 - 1e-12 {
                PrecommitResult::stop_now(p, x)
            } else {
                PrecommitResult {
                    decision: PrecommitDecision::Threshold { level: x / lambda },
                    value: Some(value),
                }
            }
        }
        ReducedMax::SupAtZero { value } => PrecommitResult {
            decision: PrecommitDecision::NoOptimum,
            value: Some(value),
        },
    }
}

/// Closed-form maximizer of the reduced objective for a pure power payoff
/// `u(x) = x^p`, `p ≥ 1`, where the distortion family admits one.
fn power_reduced(p_exp: f64, p: &StoppingProblem, x: f64) -> Option<ReducedMax> {
    // f(λ) = λ^{q − p} x^p for a power distortion with exponent q.
    let power_vs_power = |w_exp: f64| {
        if w_exp >= p_exp {
            Some(ReducedMax::At {
                lambda: 1.0,
                value: p.transformed_payoff(x),
            })
        } else {
            Some(ReducedMax::SupAtZero {
                value: f64::INFINITY,
            })
        }
    };
    match *p.distortion() {
        DistortionSpec::Prelec { alpha, gamma } => {
            if alpha > 1.0 {
                // Unique interior critical point of λ ↦ w(λ)(x/λ)^p.
                let lambda = (-(p_exp / (alpha * gamma)).powf(1.0 / (alpha - 1.0))).exp();
                let value = p.distort(lambda) * p.transformed_payoff(x / lambda);
                Some(ReducedMax::At { lambda, value })
            } else if alpha < 1.0 {
                // exp(−γ y^α) decays slower than any power: sup is infinite.
                Some(ReducedMax::SupAtZero {
                    value: f64::INFINITY,
                })
            } else {
                power_vs_power(gamma)
            }
        }
        DistortionSpec::TverskyKahneman { .. } | DistortionSpec::TwoParameter { .. } => {
            // w(λ) ~ c·λ^γ with γ < 1 ≤ p near zero: sup is infinite.
            Some(ReducedMax::SupAtZero {
                value: f64::INFINITY,
            })
        }
        DistortionSpec::ConvexPower { eta } => power_vs_power(eta),
        DistortionSpec::Identity => power_vs_power(1.0),
        DistortionSpec::ConvexQuadratic { .. } => {
            if p_exp == 1.0 {
                // f(λ) = x(ηλ + 1 − η) is increasing.
                Some(ReducedMax::At {
                    lambda: 1.0,
                    value: p.transformed_payoff(x),
                })
            } else {
                // the (1−η)λ^{1−p} term blows up.
                Some(ReducedMax::SupAtZero {
                    value: f64::INFINITY,
                })
            }
        }
    }
}

/// Geometric-grid maximizer `λ = 2^{-k}`, `k = 0..=60`, with golden-section
/// refinement and supremum-at-zero detection.
fn maximize_reduced_numeric(p: &StoppingProblem, x: f64) -> ReducedMax {
    let f = |lambda: f64| p.distort(lambda) * p.transformed_payoff(x / lambda);
    const K_MAX: usize = 60;
    let mut values = [0.0f64; K_MAX + 1];
    let mut best_k = 0usize;
    for k in 0..=K_MAX {
        values[k] = f(2f64.powi(-(k as i32)));
        if values[k] > values[best_k] {
            best_k = k;
        }
    }
    if best_k == K_MAX && values[K_MAX] > values[K_MAX - 1] {
        // Still increasing at the smallest grid point.  Growing increments
        // mean divergence; shrinking increments mean a finite unattained
        // supremum, reported as the best value seen.
        let last = values[K_MAX] - values[K_MAX - 1];
        let prev = values[K_MAX - 1] - values[K_MAX - 2];
        let value = if last >= prev {
            f64::INFINITY
        } else {
            values[K_MAX]
        };
        return ReducedMax::SupAtZero { value };
    }
    // Refine on the log axis over the bracketing grid cells.
    let ln2 = std::f64::consts::LN_2;
    let t_lo = -((best_k + 1).min(K_MAX) as f64) * ln2;
    let t_hi = -(best_k.saturating_sub(1) as f64) * ln2;
    let (t_star, value) = golden_max(|t| f(t.exp()), t_lo, t_hi, 1e-12);
    // Stopping now attains the supremum within float noise on plateaus;
    // prefer λ = 1 whenever it ties the refined maximum.
    let at_one = f(1.0);
    if at_one >= value * (1.0 - 1e-12) {
        return ReducedMax::At {
            lambda: 1.0,
            value: at_one,
        };
    }
    let lambda = t_star.exp().min(1.0);
    ReducedMax::At { lambda, value }
}

/// Pre-committed solution for `u(x) = (x − K)⁺` with the quadratic
/// distortion `w(q) = ηq² + (1−η)q` (the `β = 1` case).
///
/// The reduced objective is `f(λ) = (ηλ + 1−η)(x − Kλ)` on the range where
/// the payoff is active, with vertex `λ̄ = (η(x+K) − K)/(2ηK)`.  The vertex
/// is positive exactly for `x > (1−η)K/η` and reaches 1 at `x = (η+1)K/η`,
/// giving three branches: stop now at or above `(η+1)K/η`, run to the
/// moving threshold `x/λ̄ = 2ηKx/(η(x+K) − K)` in between, and no optimum
/// at or below `(1−η)K/η` (f decreases toward its unattained limit
/// `(1−η)x` as λ → 0).
fn quad_call_three_branch(eta: f64, strike: f64, p: &StoppingProblem, x: f64) -> PrecommitResult {
    let b_star = (eta + 1.0) * strike / eta;
    let lower = strike * (1.0 - eta) / eta;
    if x >= b_star {
        PrecommitResult::stop_now(p, x)
    } else if x > lower {
        let level = 2.0 * eta * strike * x / (eta * (x + strike) - strike);
        let lambda = x / level;
        PrecommitResult {
            decision: PrecommitDecision::Threshold { level },
            value: Some(p.distort(lambda) * p.transformed_payoff(level)),
        }
    } else {
        PrecommitResult {
            decision: PrecommitDecision::NoOptimum,
            value: Some((1.0 - eta) * x),
        }
    }
}

/// Stop-at-or-above threshold `x̄ = (3K/(3 − 2/β))^β` above which stopping
/// immediately is pre-committed optimal for `u(x) = (x^{1/β} − K)⁺` with
/// `w(q) = (q² + q)/2` and `β ≥ 1`.
pub fn bar_x_threshold(beta: f64, strike: f64) -> Result<f64, SolveError> {
    if !(beta >= 1.0) {
        return Err(SolveError::BetaBelowOne { beta });
    }
    Ok((3.0 * strike / (3.0 - 2.0 / beta)).powf(beta))
}

/// Optimal one-sided threshold `b*(x)` for the same specification: the
/// unique positive root of
/// `h(b) = (1/β − 1)·b^{1/β+1} + (1/β − 2)·x·b^{1/β} + K·b + 2xK`,
/// satisfying `b*(x) > x` exactly when `x < x̄`.
pub fn b_star_threshold(beta: f64, strike: f64, x: f64) -> Result<f64, SolveError> {
    if !(beta >= 1.0) {
        return Err(SolveError::BetaBelowOne { beta });
    }
    if !(x > 0.0) {
        return Err(SolveError::StateOutOfRange { x });
    }
    let inv_b = 1.0 / beta;
    let h = |b: f64| {
        (inv_b - 1.0) * b.powf(inv_b + 1.0)
            + (inv_b - 2.0) * x * b.powf(inv_b)
            + strike * b
            + 2.0 * x * strike
    };
    // h(0) = 2xK > 0 and h is eventually negative (for β > 1 the leading
    // power dominates; for β = 1 the linear coefficient K − x must be < 0).
    let mut hi = x.max(strike.powf(beta)).max(1.0);
    let mut doublings = 0;
    while h(hi) > 0.0 {
        hi *= 2.0;
        doublings += 1;
        if doublings > 200 {
            return Err(SolveError::NoThresholdRoot { x });
        }
    }
    Ok(bisect_root(h, 0.0, hi, 1e-12))
}

fn xbar_route(
    beta: f64,
    strike: f64,
    p: &StoppingProblem,
    x: f64,
) -> Result<PrecommitResult, SolveError> {
    let xbar = bar_x_threshold(beta, strike)?;
    if x >= xbar {
        return Ok(PrecommitResult::stop_now(p, x));
    }
    let level = b_star_threshold(beta, strike, x)?;
    let exit = ExitSpec::new(0.0, level, x).expect("0 < x < b*");
    let value = interval_exit_value(p, &exit).expect("beta > 0 checked");
    Ok(PrecommitResult {
        decision: PrecommitDecision::Threshold { level },
        value: Some(value),
    })
}

/// Concave / flat-then-concave payoff with inverse-S distortion and
/// `w'(0+) = ∞`.  When the payoff supremum is attained at `y*` the optimum
/// is the `y*` threshold; otherwise no optimal stopping time exists and only
/// provable divergence of the one-sided family gives a value.
fn concave_route(
    p: &StoppingProblem,
    x: f64,
    attained_transformed: Option<f64>,
) -> PrecommitResult {
    if let Some(y_star) = attained_transformed {
        if x >= y_star {
            return PrecommitResult::stop_now(p, x);
        }
        return PrecommitResult {
            decision: PrecommitDecision::Threshold { level: y_star },
            value: Some(p.transformed_payoff(y_star)),
        };
    }
    let growth = p.payoff().growth_exponent(p.beta());
    let value = match *p.distortion() {
        // w(x/b)·u(b) → ∞ along b → ∞.
        DistortionSpec::Prelec { alpha, .. } if alpha < 1.0 => Some(f64::INFINITY),
        DistortionSpec::TverskyKahneman { gamma } | DistortionSpec::TwoParameter { gamma, .. }
            if growth > gamma =>
        {
            Some(f64::INFINITY)
        }
        _ => None,
    };
    PrecommitResult {
        decision: PrecommitDecision::NoOptimum,
        value,
    }
}

/// Solves the pre-committed problem at state `x`.
pub fn solve_precommitted(p: &StoppingProblem, x: f64) -> Result<PrecommitResult, SolveError> {
    let beta = p.beta();
    if beta <= 0.0 {
        return Err(SolveError::WrongRegime { beta });
    }
    if !(x > 0.0) {
        return Err(SolveError::StateOutOfRange { x });
    }
    let shape = p.shape().expect("beta > 0");
    let unsupported = || SolveError::UnsupportedCombination {
        payoff: *p.payoff(),
        distortion: *p.distortion(),
        beta,
    };
    match shape.payoff {
        PayoffShape::Convex => {
            if let (&PayoffSpec::Call { strike }, &DistortionSpec::ConvexQuadratic { eta }) =
                (p.payoff(), p.distortion())
            {
                if beta == 1.0 {
                    return Ok(quad_call_three_branch(eta, strike, p, x));
                }
            }
            let outcome = match p.payoff().power_exponent(beta) {
                Some(p_exp) => {
                    power_reduced(p_exp, p, x).unwrap_or_else(|| maximize_reduced_numeric(p, x))
                }
                None => {
                    if shape.distortion == DistortionShape::InverseS
                        && shape.slope_at_zero == SlopeAtZero::Infinite
                    {
                        // Convex call payoff with heavy tail overweighting:
                        // the supremum is infinite for all three inverse-S
                        // families.
                        ReducedMax::SupAtZero {
                            value: f64::INFINITY,
                        }
                    } else {
                        maximize_reduced_numeric(p, x)
                    }
                }
            };
            Ok(from_reduced(outcome, p, x))
        }
        PayoffShape::ConstantThenConcave | PayoffShape::SShaped => {
            if let (&PayoffSpec::Call { strike }, &DistortionSpec::ConvexQuadratic { eta }) =
                (p.payoff(), p.distortion())
            {
                if eta == 0.5 && beta >= 1.0 {
                    return xbar_route(beta, strike, p, x);
                }
            }
            if shape.distortion == DistortionShape::InverseS
                && shape.slope_at_zero == SlopeAtZero::Infinite
            {
                let attained = p.payoff().attained_maximum(beta);
                Ok(concave_route(p, x, attained))
            } else {
                Err(unsupported())
            }
        }
        PayoffShape::Concave => {
            if shape.distortion == DistortionShape::InverseS
                && shape.slope_at_zero == SlopeAtZero::Infinite
            {
                let attained = p.payoff().attained_maximum(beta);
                Ok(concave_route(p, x, attained))
            } else if matches!(
                shape.distortion,
                DistortionShape::Convex | DistortionShape::Identity
            ) {
                // Concave payoff under a pessimistic distortion: stopping
                // immediately is optimal, the problem is time-consistent.
                Ok(PrecommitResult::stop_now(p, x))
            } else {
                Err(unsupported())
            }
        }
    }
}

/// Assembles the naive stopping law: the closure of the stop-now set.
///
/// For `β ≤ 0` the trivial regime laws are returned (in price coordinates,
/// as no state transformation exists there).  For `β > 0` the stop-now set
/// is empty, everything, or a ray whose edge is found by monotone bisection
/// on the stop-now predicate.
pub fn naive_law(p: &StoppingProblem) -> Result<StoppingLaw, SolveError> {
    match classify_beta(p) {
        BetaRegime::NeverStop => return Ok(StoppingLaw::never()),
        BetaRegime::FixedThreshold { threshold } => {
            return Ok(if threshold.is_infinite() {
                StoppingLaw::never()
            } else {
                StoppingLaw::stop_at_or_above(threshold)
            });
        }
        BetaRegime::TimeInconsistent => {}
    }
    let scale = p.scale();
    // The solver route is shape-based, hence state-independent: one probe
    // surfaces any unsupported-combination error.
    solve_precommitted(p, scale)?;
    let stops = |x: f64| {
        matches!(
            solve_precommitted(p, x)
                .expect("solver route is state-independent")
                .decision,
            PrecommitDecision::StopNow
        )
    };
    let probes: Vec<f64> = (-6..=6).map(|k| scale * 10f64.powi(k)).collect();
    let flags: Vec<bool> = probes.iter().map(|&x| stops(x)).collect();
    let Some(first_stop) = flags.iter().position(|&s| s) else {
        return Ok(StoppingLaw::never());
    };
    debug_assert!(
        flags[first_stop..].iter().all(|&s| s),
        "stop-now set must be a ray for the supported families"
    );
    if first_stop == 0 {
        return Ok(StoppingLaw::everywhere());
    }
    let threshold = bisect_predicate(
        probes[first_stop - 1],
        probes[first_stop],
        1e-10 * scale,
        stops,
    );
    Ok(StoppingLaw::stop_at_or_above(threshold))
}
