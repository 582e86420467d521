//! Naive and sophisticated-equilibrium stopping laws for geometric Brownian
//! motion under probability distortion.
//!
//! The library solves one-dimensional distorted-expectation stopping
//! problems: an agent watches a GBM, values the stopped state through a
//! rank-dependent objective (a probability distortion `w` applied to
//! decumulative probabilities of a payoff `u`), and the distortion makes the
//! problem time-inconsistent.  Three layers are provided:
//!
//! - **Closed forms** ([`evaluate`]): distorted payoffs of interval-exit
//!   stopping times of the transformed driftless process.
//! - **Solvers**: the per-state pre-committed problem and the naive stopping
//!   law it induces ([`naive`]), and the fixed-point iteration on the
//!   best-response operator whose fixed points are subgame-perfect
//!   equilibrium laws ([`equilibrium`]).  The quadratic-distortion case
//!   study with its full closed-form equilibrium family lives in
//!   [`case_study`].
//! - **A Monte-Carlo oracle** ([`mc`]): seeded, reproducible path simulation
//!   plus a rank-dependent estimator with bootstrap errors, used to verify
//!   every closed form independently.
//!
//! States, kernels, and thresholds all live in the transformed coordinates
//! `x = s^β` with `β = 1 − 2μ/σ²`.

// Guards are written `!(x > 0.0)` on purpose: unlike `x <= 0.0`, the negated
// form also rejects NaN inputs.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod case_study;
pub mod equilibrium;
pub mod evaluate;
pub mod kernel;
pub mod mc;
pub mod naive;
mod numeric;
pub mod problem;

pub use evaluate::{continuation_value, hit_probability, interval_exit_value, EvalError, ExitSpec};
pub use kernel::{IntervalKernel, KernelError, Neighbors, StoppingLaw};
pub use problem::{
    parse_problem_json, DistortionSpec, MarketParams, PayoffSpec, ProblemDocument, ProblemError,
    StoppingProblem,
};
