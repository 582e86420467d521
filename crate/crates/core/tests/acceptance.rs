//! Acceptance suite: one test per criterion, each printing a PASS line with
//! the measured numbers (visible with `--nocapture`).  Tolerances are pinned
//! in the assertions.

use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use distorted_stopping::case_study::CaseStudyParams;
use distorted_stopping::equilibrium::{
    is_equilibrium, iterate_to_equilibrium, theta_step, EngineConfig,
};
use distorted_stopping::mc::{
    distorted_expectation, estimate_hit_prob, simulate_stopped_states, simulate_stopped_values,
    BootstrapConfig, EmpiricalSample, SimConfig,
};
use distorted_stopping::naive::{bar_x_threshold, naive_law};
use distorted_stopping::{
    interval_exit_value, DistortionSpec, ExitSpec, IntervalKernel, PayoffSpec, StoppingLaw,
    StoppingProblem,
};

fn quad_case() -> StoppingProblem {
    StoppingProblem::from_beta(
        1.0,
        PayoffSpec::Call { strike: 1.0 },
        DistortionSpec::ConvexQuadratic { eta: 0.5 },
    )
    .unwrap()
}

fn quad_case_beta(beta: f64) -> StoppingProblem {
    StoppingProblem::from_beta(
        beta,
        PayoffSpec::Call { strike: 1.0 },
        DistortionSpec::ConvexQuadratic { eta: 0.5 },
    )
    .unwrap()
}

#[test]
fn acceptance_01_naive_law_of_quadratic_case_study() {
    let p = quad_case();
    let law = naive_law(&p).unwrap();
    let pieces = law.kernel().pieces();
    assert_eq!(pieces.len(), 1);
    let threshold = pieces[0].lo();
    let err = (threshold - 3.0).abs();
    assert!(err < 1e-9, "threshold {threshold} off by {err}");
    assert!(pieces[0].is_ray());

    let cfg = EngineConfig::for_problem(&p);
    assert!(is_equilibrium(&p, &law, &cfg).unwrap());
    println!("ACCEPTANCE 1 PASS — naive kernel [{threshold},inf), threshold error {err:.2e}, equilibrium confirmed");
}

#[test]
fn acceptance_02_one_step_theta_map() {
    let p = quad_case();
    let cfg = EngineConfig::for_problem(&p);
    let init = StoppingLaw::stop_at_or_above(10.0);
    let (law, trace) = iterate_to_equilibrium(&p, &init, &cfg).unwrap();
    assert!(trace.converged);
    assert_eq!(
        trace.steps, 2,
        "expected one changing step plus one confirming step"
    );
    let expected = 20.0 / 9.0;
    let engine_threshold = law.kernel().pieces()[0].lo();
    assert!(law.kernel().approx_eq(&IntervalKernel::ray(expected), 1e-6));

    let closed = CaseStudyParams::new(1.0, 0.5)
        .unwrap()
        .theta_threshold_map(10.0)
        .unwrap();
    let gap = (engine_threshold - closed).abs();
    assert!(gap < 1e-6, "engine {engine_threshold} vs closed {closed}");
    println!(
        "ACCEPTANCE 2 PASS — engine threshold {engine_threshold} vs closed form {closed} (|Δ| = {gap:.2e}), converged in {} steps",
        trace.steps
    );
}

#[test]
fn acceptance_03_equilibrium_family_iff() {
    let p = quad_case();
    let cfg = EngineConfig::for_problem(&p);
    for b in [0.5, 1.0, 2.9, 3.0, 3.1, 5.0] {
        let fixed = is_equilibrium(&p, &StoppingLaw::stop_at_or_above(b), &cfg).unwrap();
        assert_eq!(fixed, b <= 3.0, "b = {b}");
    }
    println!(
        "ACCEPTANCE 3 PASS — 1_(0,b) is an equilibrium exactly for b <= 3 on {{0.5,1,2.9,3,3.1,5}}"
    );
}

#[test]
fn acceptance_04_never_stop_collapses_to_all_stop() {
    // Linear payoff with the S-shaped Prelec distortion (α = 2, γ = 1).
    let prelec = StoppingProblem::from_beta(
        1.0,
        PayoffSpec::Identity,
        DistortionSpec::Prelec {
            alpha: 2.0,
            gamma: 1.0,
        },
    )
    .unwrap();
    // Concave power utility (γ/β = 1/2) with an inverse-S distortion.
    let concave = StoppingProblem::from_beta(
        1.0,
        PayoffSpec::PowerUtility { gamma: 0.5 },
        DistortionSpec::Prelec {
            alpha: 0.65,
            gamma: 1.0,
        },
    )
    .unwrap();
    for (name, p) in [("prelec-linear", prelec), ("concave-inverse-s", concave)] {
        let naive = naive_law(&p).unwrap();
        assert!(
            naive.kernel().is_empty(),
            "{name}: naive law must continue everywhere"
        );
        let cfg = EngineConfig::for_problem(&p);
        let next = theta_step(&p, &naive, &cfg).unwrap();
        assert!(
            next.kernel().is_full(),
            "{name}: one step must stop everywhere"
        );
    }
    println!(
        "ACCEPTANCE 4 PASS — never-stopping naive laws collapse to all-stop in one operator step"
    );
}

#[test]
fn acceptance_05_x_bar_thresholds_and_fixity() {
    assert_eq!(bar_x_threshold(1.0, 1.0).unwrap(), 3.0);
    assert_eq!(bar_x_threshold(2.0, 1.0).unwrap(), 2.25);
    for beta in [1.0, 2.0] {
        let p = quad_case_beta(beta);
        let xbar = bar_x_threshold(beta, 1.0).unwrap();
        let law = StoppingLaw::stop_at_or_above(xbar);
        let cfg = EngineConfig::for_problem(&p);
        let next = theta_step(&p, &law, &cfg).unwrap();
        assert!(
            next.kernel().approx_eq(&IntervalKernel::ray(xbar), 1e-6),
            "beta = {beta}: theta moved the x̄ threshold to {next}"
        );
    }
    println!("ACCEPTANCE 5 PASS — x̄(β=1) = 3.0 and x̄(β=2) = 2.25 exactly; both are Θ-fixed thresholds (error < 1e-6)");
}

#[test]
fn acceptance_06_closed_form_vs_monte_carlo_matrix() {
    let started = Instant::now();
    let distortions = [
        ("quadratic", DistortionSpec::ConvexQuadratic { eta: 0.5 }),
        (
            "prelec",
            DistortionSpec::Prelec {
                alpha: 0.65,
                gamma: 1.0,
            },
        ),
        ("identity", DistortionSpec::Identity),
    ];
    let problems: Vec<(&str, StoppingProblem)> = distortions
        .iter()
        .map(|(name, w)| {
            (
                *name,
                StoppingProblem::from_beta(1.0, PayoffSpec::Call { strike: 1.0 }, *w).unwrap(),
            )
        })
        .collect();
    let triples = [(1.0, 3.0, 2.0), (0.0, 2.0, 1.0), (1.5, 2.5, 2.0)];

    for (t, &(a, b, x)) in triples.iter().enumerate() {
        let kernel = if a > 0.0 {
            IntervalKernel::point(a).union(&IntervalKernel::ray(b))
        } else {
            IntervalKernel::ray(b)
        };
        let law = StoppingLaw::from_kernel(kernel);
        let cfg = SimConfig::for_scale(1.0, 0xACCE55 + t as u64).with_bridge();
        // The stopped-value sample depends on the payoff only; the three
        // distortions share it.
        let sample = simulate_stopped_values(&problems[0].1, x, &law, &cfg).unwrap();
        assert!(
            !sample.censoring_warning(),
            "triple {t}: censored fraction {}",
            sample.censored_fraction()
        );
        for (name, p) in &problems {
            let closed = interval_exit_value(p, &ExitSpec::new(a, b, x).unwrap()).unwrap();
            let est = distorted_expectation(p, &sample, &BootstrapConfig::default());
            let gap = (est.value - closed).abs();
            let band = 4.0 * est.std_error;
            assert!(
                gap <= band,
                "({a},{b},{x}) × {name}: |{} - {closed}| = {gap:.2e} > 4·SE = {band:.2e}",
                est.value
            );
            println!(
                "  ({a},{b},{x}) × {name:9}: MC {:.6} ± {:.6} vs closed {closed:.6} (z = {:+.2})",
                est.value,
                est.std_error,
                (est.value - closed) / est.std_error
            );
        }
    }
    let elapsed = started.elapsed();
    assert!(
        elapsed.as_secs_f64() < 60.0,
        "matrix took {elapsed:?}, budget is 60 s"
    );
    println!(
        "ACCEPTANCE 6 PASS — 3×3 matrix within 4 bootstrap SE in {:.1} s",
        elapsed.as_secs_f64()
    );
}

#[test]
fn acceptance_07_hitting_probability() {
    let cfg = SimConfig::for_scale(1.0, 0x417).with_bridge();
    let est = estimate_hit_prob(1.0, 2.0, &cfg).unwrap();
    let gap = (est.value - 0.5).abs();
    assert!(
        gap <= 4.0 * est.std_error,
        "hit prob {} ± {} vs 0.5",
        est.value,
        est.std_error
    );
    println!(
        "ACCEPTANCE 7 PASS — P[hit 2 from 1] = {:.5} ± {:.5} (exact 0.5, z = {:+.2})",
        est.value,
        est.std_error,
        (est.value - 0.5) / est.std_error
    );
}

#[test]
fn acceptance_08_cost_surface_and_cash_compensation() {
    let c = CaseStudyParams::new(1.0, 0.5).unwrap();

    // Closed-form point value: c(1,0) = 4/9.
    let c10 = c.cost_of_equilibrium(1.0, 0.0).unwrap();
    assert!((c10 - 4.0 / 9.0).abs() <= 1e-12, "c(1,0) = {c10}");

    // Positivity on the 50×50 grid over (0,3)×[0,3).
    for i in 0..50 {
        let x = 3.0 * (i as f64 + 0.5) / 50.0;
        for j in 0..50 {
            let b = 3.0 * j as f64 / 50.0;
            assert!(c.cost_of_equilibrium(x, b).unwrap() > 0.0, "c({x},{b})");
        }
    }
    // Vanishes at and above b*.
    for x in [3.0, 3.5, 10.0] {
        for b in [0.0, 1.0, 2.9] {
            assert_eq!(c.cost_of_equilibrium(x, b).unwrap(), 0.0);
        }
    }

    // Cash-compensation identity via the oracle: the distorted value of
    // u(X_{Lτ_b} + c) matches the optimal equilibrium value within 4 SE.
    let p = quad_case();
    let target = c.value_of_threshold(1.0, 3.0).unwrap(); // w(1/3)·K/η = 4/9
    for (tag, b, seed) in [("b=0", 0.0, 0xC057u64), ("b=2", 2.0, 0xC058u64)] {
        let cash = c.cost_of_equilibrium(1.0, b).unwrap();
        let law = StoppingLaw::stop_at_or_above(b);
        let cfg = SimConfig::for_scale(1.0, seed).with_bridge();
        let outcomes = simulate_stopped_states(&p, 1.0, &law, &cfg).unwrap();
        let sample = EmpiricalSample::from_outcomes(&outcomes, |s| p.transformed_payoff(s + cash));
        let est = distorted_expectation(&p, &sample, &BootstrapConfig::default());
        let gap = (est.value - target).abs();
        let band = (4.0 * est.std_error).max(1e-12);
        assert!(
            gap <= band,
            "{tag}: compensated value {} ± {} vs {target}",
            est.value,
            est.std_error
        );
        println!(
            "  {tag}: cash {cash:.6}, compensated value {:.6} ± {:.6} vs optimal {target:.6}",
            est.value, est.std_error
        );
    }
    println!("ACCEPTANCE 8 PASS — c(1,0) = 4/9 ± 1e-12, positive on (0,3)×[0,3), zero above b*, cash identity within 4 SE");
}

#[test]
fn acceptance_09_value_monotonicity_and_argmax() {
    let c = CaseStudyParams::new(1.0, 0.5).unwrap();
    let n = 10_000;
    for x in [0.5, 1.0, 2.0, 2.9] {
        let mut prev = f64::MIN;
        let mut argmax = (0.0, f64::MIN);
        for k in 0..=n {
            let b = 3.0 * k as f64 / n as f64;
            let v = c.value_of_threshold(x, b).unwrap();
            assert!(v >= prev - 1e-12, "x = {x}: value dips at b = {b}");
            prev = prev.max(v);
            if v > argmax.1 {
                argmax = (b, v);
            }
        }
        assert_eq!(argmax.0, 3.0, "x = {x}: brute-force argmax");
    }
    println!("ACCEPTANCE 9 PASS — value_of_threshold nondecreasing on [0,3] and brute-force argmax = 3.0 for x in {{0.5,1,2,2.9}}");
}

#[test]
fn acceptance_10_randomized_property_suite() {
    let mut rng = ChaCha8Rng::seed_from_u64(0x10B5);

    // Union idempotence and kernel monotonicity under the operator.
    let p = quad_case();
    let cfg = EngineConfig::for_problem(&p);
    for _ in 0..100 {
        let lo: f64 = rng.random_range(0.1..20.0);
        let len: f64 = rng.random_range(0.0..5.0);
        let k = IntervalKernel::from_pieces([(lo, lo + len), (lo * 3.0, f64::INFINITY)]).unwrap();
        assert_eq!(k.union(&k), k);

        let law = StoppingLaw::from_kernel(k);
        let next = theta_step(&p, &law, &cfg).unwrap();
        assert!(next.kernel().includes(law.kernel(), 1e-9));
    }

    // All-stop fixity.
    let everywhere = StoppingLaw::everywhere();
    assert!(theta_step(&p, &everywhere, &cfg)
        .unwrap()
        .kernel()
        .is_full());

    // Rank-dependent sum equals the mean under the identity distortion.
    let identity =
        StoppingProblem::from_beta(1.0, PayoffSpec::Identity, DistortionSpec::Identity).unwrap();
    for _ in 0..20 {
        let values: Vec<f64> = (0..5_000).map(|_| rng.random::<f64>() * 10.0).collect();
        let mean = values.iter().sum::<f64>() / values.len() as f64;
        let sample = EmpiricalSample::from_values(values);
        let est = distorted_expectation(
            &identity,
            &sample,
            &BootstrapConfig {
                resamples: 0,
                seed: 0,
            },
        );
        assert!((est.value - mean).abs() <= 1e-12 * mean);
    }

    // Deterministic replay under a fixed seed.
    let law = StoppingLaw::stop_at_or_above(2.0);
    let sim = SimConfig {
        n_paths: 5_000,
        ..SimConfig::for_scale(1.0, 0xF1D0)
    };
    let a = simulate_stopped_values(&p, 1.3, &law, &sim).unwrap();
    let b = simulate_stopped_values(&p, 1.3, &law, &sim).unwrap();
    assert_eq!(a, b);

    println!(
        "ACCEPTANCE 10 PASS — randomized kernel/operator/estimator/replay properties all hold"
    );
}
