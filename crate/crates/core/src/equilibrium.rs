//! The strategic best-response operator and its fixed-point iteration.
//!
//! Given a stopping law `τ`, one level of strategic reasoning compares the
//! immediate payoff `u(x)` with the value `J(x)` of continuing while all
//! future selves follow `τ`.  The state space splits into
//!
//! - the stop region `S = {J < u}`,
//! - the continuation region `C = {J > u}`,
//! - the indifference region `I = {J = u}`, which always contains the
//!   kernel of `τ`,
//!
//! and the improved law keeps `τ` on `I`, stops on `S`, continues on `C`.
//! Its kernel is therefore `closure(S) ∪ ker(τ)`: iteration only ever grows
//! the stop set, the iterates converge, and the limits are exactly the
//! subgame-perfect equilibrium laws.  Equilibria are detected as fixed
//! points: one more application leaves the kernel unchanged.
//!
//! On each bounded kernel gap the continuation value is the closed-form
//! interval-exit payoff, so `J − u` is piecewise analytic with finitely many
//! sign changes; they are isolated on a log-spaced sample grid and refined
//! by bisection.  The unbounded gap is handled analytically: continuing
//! there is worth the constant `u(a)` (or 0 below an empty kernel), so the
//! stop region starts exactly where the payoff first exceeds it.

use thiserror::Error;

use crate::kernel::{IntervalKernel, StoppingLaw};
use crate::numeric::{bisect_predicate, bisect_root, log_spaced};
use crate::problem::StoppingProblem;

/// Errors from the fixed-point engine.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum EngineError {
    #[error("engine requires beta > 0, problem has beta = {beta}")]
    WrongRegime { beta: f64 },
    #[error("domain must satisfy 0 < lo < hi < inf, got [{lo}, {hi}]")]
    BadDomain { lo: f64, hi: f64 },
}

/// Tunables for region classification and iteration.
#[derive(Debug, Clone, PartialEq)]
pub struct EngineConfig {
    /// Computational domain `[lo, hi]` for sampling below the lowest kernel
    /// point; the unbounded gap is handled analytically, so truncation only
    /// affects reporting.
    pub domain: (f64, f64),
    /// Log-spaced sample points per bounded kernel gap.
    pub samples_per_gap: usize,
    /// `|J − u|` at or below this counts as indifferent.
    pub indifference_tol: f64,
    /// Relative tolerance for refining region edges.
    pub root_rel_tol: f64,
    /// Endpoint tolerance for kernel fixed-point comparison.
    pub kernel_tol: f64,
    /// Iteration cap for [`iterate_to_equilibrium`].
    pub max_iter: usize,
}

impl EngineConfig {
    /// Defaults scaled to the problem's natural state scale.
    pub fn for_problem(p: &StoppingProblem) -> Self {
        let scale = p.scale();
        let value_ref = if p.beta() > 0.0 {
            p.transformed_payoff(2.0 * scale).max(1.0)
        } else {
            1.0
        };
        Self {
            domain: (1e-6 * scale, 1e4 * scale),
            samples_per_gap: 1024,
            indifference_tol: 1e-9 * value_ref,
            root_rel_tol: 1e-10,
            kernel_tol: 1e-9 * scale,
            max_iter: 50,
        }
    }

    fn validate(&self) -> Result<(), EngineError> {
        let (lo, hi) = self.domain;
        if !(lo > 0.0 && hi > lo && hi.is_finite()) {
            return Err(EngineError::BadDomain { lo, hi });
        }
        Ok(())
    }
}

/// Stop / continuation / indifference split of the state space.
///
/// All three sets are reported as closed interval unions; `stop` and `cont`
/// are the closures of the open sign regions, so they share isolated
/// boundary points with `indiff` (which also holds the kernel itself and
/// any sign-change points).
#[derive(Debug, Clone, PartialEq)]
pub struct RegionDecomposition {
    pub stop: IntervalKernel,
    pub cont: IntervalKernel,
    pub indiff: IntervalKernel,
}

/// Record of one fixed-point run.  `kernels[0]` is the initial kernel and
/// each later entry is one more application of the operator; inclusion is
/// monotone along the sequence.
#[derive(Debug, Clone, PartialEq)]
pub struct IterationTrace {
    pub kernels: Vec<IntervalKernel>,
    pub converged: bool,
    /// Number of operator applications performed.
    pub steps: usize,
}

#[derive(Clone, Copy, PartialEq, Eq, Debug)]
enum Class {
    Stop,
    Cont,
    Indiff,
}

/// Computes the region decomposition of `law` under one level of strategic
/// reasoning.
pub fn classify_regions(
    p: &StoppingProblem,
    law: &StoppingLaw,
    cfg: &EngineConfig,
) -> Result<RegionDecomposition, EngineError> {
    if p.beta() <= 0.0 {
        return Err(EngineError::WrongRegime { beta: p.beta() });
    }
    cfg.validate()?;
    let kernel = law.kernel();
    let mut stop: Vec<(f64, f64)> = Vec::new();
    let mut cont: Vec<(f64, f64)> = Vec::new();
    let mut indiff: Vec<(f64, f64)> = kernel.pieces().iter().map(|q| (q.lo(), q.hi())).collect();

    for (a, b) in gaps(kernel) {
        if b.is_finite() {
            classify_bounded_gap(p, a, b, cfg, &mut stop, &mut cont, &mut indiff);
        } else {
            // Continuing on (a, ∞) is worth u(a) (0 when a = 0): the state
            // drifts to the kernel material at a, or to zero.  The payoff
            // exceeds that constant exactly beyond its flat part.
            let edge = a.max(p.payoff().support_infimum(p.beta()));
            if edge > a {
                indiff.push((a, edge));
            }
            stop.push((edge, f64::INFINITY));
        }
    }

    let build = |pieces: Vec<(f64, f64)>| {
        IntervalKernel::from_pieces(pieces).expect("region endpoints are valid")
    };
    Ok(RegionDecomposition {
        stop: build(stop),
        cont: build(cont),
        indiff: build(indiff),
    })
}

/// Maximal open gaps of the kernel in `(0, ∞)`, as `(a, b)` pairs where `a`
/// is 0 or a kernel endpoint and `b` is a kernel endpoint or `+∞`.
fn gaps(kernel: &IntervalKernel) -> Vec<(f64, f64)> {
    let pieces = kernel.pieces();
    if pieces.is_empty() {
        return vec![(0.0, f64::INFINITY)];
    }
    let mut out = Vec::with_capacity(pieces.len() + 1);
    if pieces[0].lo() > 0.0 {
        out.push((0.0, pieces[0].lo()));
    }
    for w in pieces.windows(2) {
        out.push((w[0].hi(), w[1].lo()));
    }
    let last = pieces.last().expect("nonempty");
    if last.hi().is_finite() {
        out.push((last.hi(), f64::INFINITY));
    }
    out
}

fn classify_bounded_gap(
    p: &StoppingProblem,
    a: f64,
    b: f64,
    cfg: &EngineConfig,
    stop: &mut Vec<(f64, f64)>,
    cont: &mut Vec<(f64, f64)>,
    indiff: &mut Vec<(f64, f64)>,
) {
    let u_a = p.transformed_payoff(a);
    let u_b = p.transformed_payoff(b);
    let g = |x: f64| u_a + p.distort((x - a) / (b - a)) * (u_b - u_a) - p.transformed_payoff(x);
    let tol = cfg.indifference_tol;
    let class = |x: f64| {
        let v = g(x);
        if v < -tol {
            Class::Stop
        } else if v > tol {
            Class::Cont
        } else {
            Class::Indiff
        }
    };

    let lo = if a > 0.0 {
        a
    } else {
        cfg.domain.0.min(1e-3 * b)
    };
    let xs = log_spaced(lo, b, cfg.samples_per_gap.max(8));
    let classes: Vec<Class> = xs.iter().map(|&x| class(x)).collect();

    // Group consecutive equal classifications and refine the run edges.
    let mut runs: Vec<(Class, usize, usize)> = Vec::new();
    for (i, &c) in classes.iter().enumerate() {
        match runs.last_mut() {
            Some((rc, _, end)) if *rc == c => *end = i,
            _ => runs.push((c, i, i)),
        }
    }
    let gap_left = if a > 0.0 { a } else { 0.0 };
    let mut left_edge = gap_left;
    for (j, &(c, _, end)) in runs.iter().enumerate() {
        let right_edge = if j + 1 == runs.len() {
            b
        } else {
            let (next_c, next_start, _) = runs[j + 1];
            let xl = xs[end];
            let xr = xs[next_start];
            if (c == Class::Stop && next_c == Class::Cont)
                || (c == Class::Cont && next_c == Class::Stop)
            {
                // Sign change of g: refine the root and record it as an
                // indifference point.
                let r = bisect_root(g, xl, xr, cfg.root_rel_tol);
                indiff.push((r, r));
                r
            } else {
                bisect_predicate(xl, xr, cfg.root_rel_tol * xr, |x| class(x) == next_c)
            }
        };
        let band = (left_edge, right_edge);
        match c {
            Class::Stop => stop.push(band),
            Class::Cont => cont.push(band),
            Class::Indiff => indiff.push(band),
        }
        left_edge = right_edge;
    }
}

/// One application of the best-response operator: the new kernel is
/// `closure(S) ∪ ker(τ)`.
pub fn theta_step(
    p: &StoppingProblem,
    law: &StoppingLaw,
    cfg: &EngineConfig,
) -> Result<StoppingLaw, EngineError> {
    let regions = classify_regions(p, law, cfg)?;
    Ok(StoppingLaw::from_kernel(regions.stop.union(law.kernel())))
}

/// Iterates the operator until the kernel stops changing (within
/// `cfg.kernel_tol`) or `cfg.max_iter` applications.  Non-convergence is
/// reported explicitly through `trace.converged`.
pub fn iterate_to_equilibrium(
    p: &StoppingProblem,
    init: &StoppingLaw,
    cfg: &EngineConfig,
) -> Result<(StoppingLaw, IterationTrace), EngineError> {
    let mut kernels = vec![init.kernel().clone()];
    let mut current = init.clone();
    let mut converged = false;
    for _ in 0..cfg.max_iter.max(1) {
        let next = theta_step(p, &current, cfg)?;
        let done = next.kernel().approx_eq(current.kernel(), cfg.kernel_tol);
        kernels.push(next.kernel().clone());
        current = next;
        if done {
            converged = true;
            break;
        }
    }
    let steps = kernels.len() - 1;
    Ok((
        current,
        IterationTrace {
            kernels,
            converged,
            steps,
        },
    ))
}

/// Whether `law` is a fixed point of the operator.
pub fn is_equilibrium(
    p: &StoppingProblem,
    law: &StoppingLaw,
    cfg: &EngineConfig,
) -> Result<bool, EngineError> {
    let next = theta_step(p, law, cfg)?;
    Ok(next.kernel().approx_eq(law.kernel(), cfg.kernel_tol))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::problem::{DistortionSpec, PayoffSpec};

    fn quad_call() -> StoppingProblem {
        StoppingProblem::from_beta(
            1.0,
            PayoffSpec::Call { strike: 1.0 },
            DistortionSpec::ConvexQuadratic { eta: 0.5 },
        )
        .unwrap()
    }

    fn cfg(p: &StoppingProblem) -> EngineConfig {
        EngineConfig::for_problem(p)
    }

    #[test]
    fn regions_of_equilibrium_threshold_law() {
        // b = 2.5 within the equilibrium family: S empty, C = (0, 2.5),
        // I = [2.5, inf).
        let p = quad_call();
        let law = StoppingLaw::stop_at_or_above(2.5);
        let r = classify_regions(&p, &law, &cfg(&p)).unwrap();
        assert!(r.stop.is_empty());
        assert_eq!(r.cont.pieces().len(), 1);
        assert!(r.cont.pieces()[0].lo() < 1e-5);
        assert!((r.cont.pieces()[0].hi() - 2.5).abs() < 1e-9);
        assert!(r.indiff.approx_eq(&IntervalKernel::ray(2.5), 1e-9));
    }

    #[test]
    fn regions_of_overgrown_threshold_law() {
        // b = 10: S = (b', 10) with b' = Kb/(η(b−K)) = 20/9, C = (0, b'),
        // I = {b'} ∪ [10, inf).
        let p = quad_call();
        let law = StoppingLaw::stop_at_or_above(10.0);
        let r = classify_regions(&p, &law, &cfg(&p)).unwrap();
        let b_prime = 20.0 / 9.0;

        assert_eq!(r.stop.pieces().len(), 1);
        assert!((r.stop.pieces()[0].lo() - b_prime).abs() < 1e-6);
        assert!((r.stop.pieces()[0].hi() - 10.0).abs() < 1e-9);

        assert_eq!(r.cont.pieces().len(), 1);
        assert!((r.cont.pieces()[0].hi() - b_prime).abs() < 1e-6);

        assert_eq!(r.indiff.pieces().len(), 2);
        assert!(r.indiff.pieces()[0].is_point());
        assert!((r.indiff.pieces()[0].lo() - b_prime).abs() < 1e-6);
        assert!((r.indiff.pieces()[1].lo() - 10.0).abs() < 1e-12);
    }

    #[test]
    fn all_stop_is_all_indifferent() {
        let p = quad_call();
        let r = classify_regions(&p, &StoppingLaw::everywhere(), &cfg(&p)).unwrap();
        assert!(r.stop.is_empty());
        assert!(r.cont.is_empty());
        assert!(r.indiff.is_full());
    }

    #[test]
    fn kernel_is_inside_indifference_region() {
        let p = quad_call();
        for law in [
            StoppingLaw::stop_at_or_above(2.0),
            StoppingLaw::from_kernel(
                IntervalKernel::from_pieces([(1.5, 1.5), (4.0, f64::INFINITY)]).unwrap(),
            ),
            StoppingLaw::everywhere(),
        ] {
            let r = classify_regions(&p, &law, &cfg(&p)).unwrap();
            assert!(
                r.indiff.includes(law.kernel(), 1e-12),
                "kernel escaped I for {law}"
            );
        }
    }

    #[test]
    fn regions_cover_the_domain() {
        let p = quad_call();
        let c = cfg(&p);
        for law in [
            StoppingLaw::stop_at_or_above(10.0),
            StoppingLaw::from_kernel(
                IntervalKernel::from_pieces([(1.5, 1.5), (4.0, 6.0)]).unwrap(),
            ),
            StoppingLaw::never(),
        ] {
            let r = classify_regions(&p, &law, &c).unwrap();
            for k in 0..200 {
                let x = c.domain.0 * 1.5 + (50.0 - c.domain.0) * k as f64 / 199.0;
                let hits = [&r.stop, &r.cont, &r.indiff]
                    .iter()
                    .filter(|region| region.contains(x))
                    .count();
                assert!(hits >= 1, "x = {x} uncovered for {law}");
            }
        }
    }

    #[test]
    fn theta_collapses_never_stop_to_all_stop_exactly() {
        // u > 0 everywhere: one application of the operator stops always.
        let p = StoppingProblem::from_beta(
            1.0,
            PayoffSpec::Identity,
            DistortionSpec::Prelec {
                alpha: 2.0,
                gamma: 1.0,
            },
        )
        .unwrap();
        let next = theta_step(&p, &StoppingLaw::never(), &cfg(&p)).unwrap();
        assert!(next.kernel().is_full());
    }

    #[test]
    fn theta_of_never_stop_for_call_stops_above_strike() {
        let p = quad_call();
        let next = theta_step(&p, &StoppingLaw::never(), &cfg(&p)).unwrap();
        assert!(next.kernel().approx_eq(&IntervalKernel::ray(1.0), 1e-12));
    }

    #[test]
    fn theta_maps_overgrown_threshold_to_b_prime_ray() {
        let p = quad_call();
        let next = theta_step(&p, &StoppingLaw::stop_at_or_above(10.0), &cfg(&p)).unwrap();
        assert!(
            next.kernel()
                .approx_eq(&IntervalKernel::ray(20.0 / 9.0), 1e-6),
            "got {next}"
        );
    }

    #[test]
    fn all_stop_is_a_fixed_point() {
        let p = quad_call();
        let next = theta_step(&p, &StoppingLaw::everywhere(), &cfg(&p)).unwrap();
        assert!(next.kernel().is_full());
        assert!(is_equilibrium(&p, &StoppingLaw::everywhere(), &cfg(&p)).unwrap());
    }

    #[test]
    fn equilibrium_family_iff_threshold_below_b_star() {
        let p = quad_call();
        for b in [0.5, 1.0, 2.9, 3.0] {
            assert!(
                is_equilibrium(&p, &StoppingLaw::stop_at_or_above(b), &cfg(&p)).unwrap(),
                "b = {b} should be an equilibrium"
            );
        }
        for b in [3.1, 5.0] {
            assert!(
                !is_equilibrium(&p, &StoppingLaw::stop_at_or_above(b), &cfg(&p)).unwrap(),
                "b = {b} should not be an equilibrium"
            );
        }
    }

    #[test]
    fn naive_law_is_a_fixed_point_across_the_quadratic_family() {
        for eta in [0.3, 0.5, 0.7] {
            let p = StoppingProblem::from_beta(
                1.0,
                PayoffSpec::Call { strike: 1.0 },
                DistortionSpec::ConvexQuadratic { eta },
            )
            .unwrap();
            let law = crate::naive::naive_law(&p).unwrap();
            assert!(
                is_equilibrium(&p, &law, &cfg(&p)).unwrap(),
                "eta = {eta}: naive law {law} is not fixed"
            );
        }
    }

    #[test]
    fn iteration_converges_in_one_changing_step() {
        let p = quad_call();
        let init = StoppingLaw::stop_at_or_above(10.0);
        let (law, trace) = iterate_to_equilibrium(&p, &init, &cfg(&p)).unwrap();
        assert!(trace.converged);
        assert_eq!(trace.steps, 2); // one change, one confirmation
        assert!(law
            .kernel()
            .approx_eq(&IntervalKernel::ray(20.0 / 9.0), 1e-6));
        for w in trace.kernels.windows(2) {
            assert!(w[1].includes(&w[0], 1e-9), "trace not monotone");
        }
    }

    #[test]
    fn iteration_reports_non_convergence_explicitly() {
        let p = quad_call();
        let mut c = cfg(&p);
        c.max_iter = 1;
        let init = StoppingLaw::stop_at_or_above(10.0);
        let (_, trace) = iterate_to_equilibrium(&p, &init, &c).unwrap();
        assert!(!trace.converged);
        assert_eq!(trace.steps, 1);
    }

    #[test]
    fn theta_is_idempotent_at_convergence() {
        let p = quad_call();
        let (law, trace) =
            iterate_to_equilibrium(&p, &StoppingLaw::stop_at_or_above(7.3), &cfg(&p)).unwrap();
        assert!(trace.converged);
        let again = theta_step(&p, &law, &cfg(&p)).unwrap();
        assert!(again.kernel().approx_eq(law.kernel(), cfg(&p).kernel_tol));
    }

    #[test]
    fn engine_rejects_bad_inputs() {
        let p = quad_call();
        let mut c = cfg(&p);
        c.domain = (2.0, 1.0);
        assert!(matches!(
            classify_regions(&p, &StoppingLaw::never(), &c),
            Err(EngineError::BadDomain { .. })
        ));
        let neg = StoppingProblem::from_beta(-1.0, PayoffSpec::Identity, DistortionSpec::Identity)
            .unwrap();
        assert!(matches!(
            theta_step(
                &neg,
                &StoppingLaw::never(),
                &EngineConfig::for_problem(&neg)
            ),
            Err(EngineError::WrongRegime { .. })
        ));
    }
}
