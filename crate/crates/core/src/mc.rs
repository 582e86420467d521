//! Monte-Carlo oracle: seeded simulation of the transformed driftless GBM,
//! first-passage stopping under interval-kernel laws, and rank-dependent
//! estimation of distorted expectations.
//!
//! Paths step the exact log-scheme `X_{t+dt} = X_t·exp(−½ν²dt + ν√dt·Z)`
//! with `ν` the transformed volatility.  A path ends when it
//!
//! - crosses into the kernel (stopped at the kernel boundary it crossed,
//!   optionally with a Brownian-bridge sub-step crossing check),
//! - falls to the lower cutoff while no kernel material lies below
//!   (absorbed: stands in for the almost-sure drift to zero, payoff 0), or
//! - reaches the horizon (censored at the terminal state and counted, since
//!   the closed forms assume an infinite horizon).
//!
//! Determinism: path `i` draws from its own ChaCha8 stream seeded by
//! `splitmix64(seed, i)`, so results are bit-identical for a fixed seed and
//! configuration regardless of how many worker threads run the paths
//! (thread count follows rayon, e.g. `RAYON_NUM_THREADS`).

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use thiserror::Error;

use crate::kernel::{IntervalKernel, StoppingLaw};
use crate::numeric::{splitmix64, KahanSum};
use crate::problem::StoppingProblem;

/// Censored-path fraction above which results should be flagged.
pub const CENSOR_WARN_FRACTION: f64 = 0.005;

/// Errors from simulation configuration.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum SimError {
    #[error("simulation requires beta > 0, problem has beta = {beta}")]
    WrongRegime { beta: f64 },
    #[error("invalid simulation config: {message}")]
    BadConfig { message: String },
    #[error("lower cutoff {cutoff} must lie below the kernel minimum {kernel_min}")]
    CutoffAboveKernel { cutoff: f64, kernel_min: f64 },
    #[error("start state {x0} must lie above the lower cutoff {cutoff}")]
    StartBelowCutoff { x0: f64, cutoff: f64 },
}

/// Simulation parameters.
#[derive(Debug, Clone, PartialEq)]
pub struct SimConfig {
    /// Time step of the exact log-scheme.
    pub dt: f64,
    /// Hard time horizon; paths alive at the horizon are censored.
    pub horizon: f64,
    /// Absorption level emulating the almost-sure decay to zero.
    pub lower_cutoff: f64,
    pub n_paths: usize,
    pub seed: u64,
    /// Sub-step Brownian-bridge crossing checks at the bracketing kernel
    /// boundaries (off by default; the grid-crossing bias is O(√dt)).
    pub bridge_correction: bool,
}

impl SimConfig {
    /// Defaults sized for the test matrices: `dt = 1e-3`, `horizon = 50`,
    /// `cutoff = 1e-4·scale`, `10^5` paths.
    pub fn for_scale(scale: f64, seed: u64) -> Self {
        Self {
            dt: 1e-3,
            horizon: 50.0,
            lower_cutoff: 1e-4 * scale,
            n_paths: 100_000,
            seed,
            bridge_correction: false,
        }
    }

    pub fn with_bridge(mut self) -> Self {
        self.bridge_correction = true;
        self
    }

    fn validate(&self) -> Result<(), SimError> {
        let bad = |message: &str| SimError::BadConfig {
            message: message.to_string(),
        };
        if !(self.dt > 0.0 && self.dt.is_finite()) {
            return Err(bad("dt must be positive and finite"));
        }
        if !(self.horizon > self.dt) {
            return Err(bad("horizon must exceed dt"));
        }
        if !(self.lower_cutoff > 0.0) {
            return Err(bad("lower_cutoff must be positive"));
        }
        if self.n_paths < 1_000 {
            return Err(bad("n_paths must be at least 1000"));
        }
        Ok(())
    }
}

/// Terminal state of one simulated path.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum PathOutcome {
    /// Entered the kernel at this state.
    Stopped(f64),
    /// Fell to the lower cutoff with no kernel below; stands for `X_∞ = 0`.
    Absorbed,
    /// Alive at the horizon in this state.
    Censored(f64),
}

/// Sorted sample of stopped payoff values plus censoring diagnostics.
#[derive(Debug, Clone, PartialEq)]
pub struct EmpiricalSample {
    values: Vec<f64>,
    censored_fraction: f64,
}

impl EmpiricalSample {
    /// Builds a sample by valuing each outcome: stopped and censored paths
    /// through their terminal state, absorbed paths through state 0.
    pub fn from_outcomes<F: Fn(f64) -> f64>(outcomes: &[PathOutcome], value_of_state: F) -> Self {
        let mut values: Vec<f64> = outcomes
            .iter()
            .map(|o| match *o {
                PathOutcome::Stopped(s) | PathOutcome::Censored(s) => value_of_state(s),
                PathOutcome::Absorbed => value_of_state(0.0),
            })
            .collect();
        values.sort_by(f64::total_cmp);
        let censored = outcomes
            .iter()
            .filter(|o| matches!(o, PathOutcome::Censored(_)))
            .count();
        Self {
            values,
            censored_fraction: censored as f64 / outcomes.len().max(1) as f64,
        }
    }

    pub fn from_values(mut values: Vec<f64>) -> Self {
        values.sort_by(f64::total_cmp);
        Self {
            values,
            censored_fraction: 0.0,
        }
    }

    /// Ascending order statistics.
    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn censored_fraction(&self) -> f64 {
        self.censored_fraction
    }

    /// True when horizon censoring is heavy enough to bias the estimate
    /// visibly.
    pub fn censoring_warning(&self) -> bool {
        self.censored_fraction > CENSOR_WARN_FRACTION
    }
}

/// Point estimate with its standard error.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Estimate {
    pub value: f64,
    pub std_error: f64,
}

/// Bootstrap parameters for [`distorted_expectation`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BootstrapConfig {
    pub resamples: usize,
    pub seed: u64,
}

impl Default for BootstrapConfig {
    fn default() -> Self {
        Self {
            resamples: 200,
            seed: 0xB005_757A,
        }
    }
}

/// Simulates terminal outcomes of the law from `x0`.
pub fn simulate_stopped_states(
    p: &StoppingProblem,
    x0: f64,
    law: &StoppingLaw,
    cfg: &SimConfig,
) -> Result<Vec<PathOutcome>, SimError> {
    if p.beta() <= 0.0 {
        return Err(SimError::WrongRegime { beta: p.beta() });
    }
    run_paths(law.kernel(), x0, p.transformed_volatility(), cfg)
}

/// Simulates and values stopped payoffs `u(X_stop)` under the law.
pub fn simulate_stopped_values(
    p: &StoppingProblem,
    x0: f64,
    law: &StoppingLaw,
    cfg: &SimConfig,
) -> Result<EmpiricalSample, SimError> {
    let outcomes = simulate_stopped_states(p, x0, law, cfg)?;
    Ok(EmpiricalSample::from_outcomes(&outcomes, |s| {
        p.transformed_payoff(s)
    }))
}

fn run_paths(
    kernel: &IntervalKernel,
    x0: f64,
    volatility: f64,
    cfg: &SimConfig,
) -> Result<Vec<PathOutcome>, SimError> {
    cfg.validate()?;
    if !(x0 > 0.0 && x0.is_finite()) {
        return Err(SimError::BadConfig {
            message: format!("start state must be positive and finite, got {x0}"),
        });
    }
    if !(volatility > 0.0 && volatility.is_finite()) {
        return Err(SimError::BadConfig {
            message: format!("volatility must be positive and finite, got {volatility}"),
        });
    }
    if let Some(kernel_min) = kernel.infimum() {
        if kernel_min > 0.0 && cfg.lower_cutoff >= kernel_min {
            return Err(SimError::CutoffAboveKernel {
                cutoff: cfg.lower_cutoff,
                kernel_min,
            });
        }
    }
    if !kernel.contains(x0) && x0 <= cfg.lower_cutoff {
        return Err(SimError::StartBelowCutoff {
            x0,
            cutoff: cfg.lower_cutoff,
        });
    }

    if kernel.contains(x0) {
        return Ok(vec![PathOutcome::Stopped(x0); cfg.n_paths]);
    }

    // The path lives in one kernel gap until it exits, so the bracketing
    // barriers are fixed for its whole lifetime.
    let n = kernel.neighbors(x0);
    let barriers = Barriers {
        lower: n.below,
        upper: n.above,
        ln_lower: if n.below > 0.0 {
            n.below.ln()
        } else {
            f64::NEG_INFINITY
        },
        ln_upper: if n.above.is_finite() {
            n.above.ln()
        } else {
            f64::INFINITY
        },
        ln_cutoff: cfg.lower_cutoff.ln(),
    };

    let drift = -0.5 * volatility * volatility * cfg.dt;
    let sd = volatility * cfg.dt.sqrt();
    let step_var = volatility * volatility * cfg.dt;
    let max_steps = (cfg.horizon / cfg.dt).ceil() as u64;
    let y0 = x0.ln();
    let seed = cfg.seed;
    let bridge = cfg.bridge_correction;

    let outcomes: Vec<PathOutcome> = (0..cfg.n_paths)
        .into_par_iter()
        .map(|i| {
            let mut rng = ChaCha8Rng::seed_from_u64(path_seed(seed, i as u64));
            run_one_path(
                &mut rng, y0, &barriers, drift, sd, step_var, max_steps, bridge,
            )
        })
        .collect();
    Ok(outcomes)
}

/// Per-path seed: the `i`-th output of a splitmix64 stream keyed by the base
/// seed.  (Plain `seed ^ i` would make neighboring seeds permute each
/// other's path streams.)
fn path_seed(seed: u64, i: u64) -> u64 {
    splitmix64(splitmix64(seed).wrapping_add(i))
}

struct Barriers {
    lower: f64,
    upper: f64,
    ln_lower: f64,
    ln_upper: f64,
    ln_cutoff: f64,
}

#[allow(clippy::too_many_arguments)]
fn run_one_path(
    rng: &mut ChaCha8Rng,
    y0: f64,
    barriers: &Barriers,
    drift: f64,
    sd: f64,
    step_var: f64,
    max_steps: u64,
    bridge: bool,
) -> PathOutcome {
    let has_lower = barriers.lower > 0.0;
    let has_upper = barriers.upper.is_finite();
    // Bridge checks only matter within a few step standard deviations of a
    // barrier; beyond this window the crossing probability underflows.
    let bridge_window = 16.0 * step_var;
    let mut y = y0;
    for _ in 0..max_steps {
        let z: f64 = rng.sample(StandardNormal);
        let y_next = y + drift + sd * z;
        if has_upper && y_next >= barriers.ln_upper {
            return PathOutcome::Stopped(barriers.upper);
        }
        if has_lower {
            if y_next <= barriers.ln_lower {
                return PathOutcome::Stopped(barriers.lower);
            }
        } else if y_next <= barriers.ln_cutoff {
            return PathOutcome::Absorbed;
        }
        if bridge {
            if has_upper {
                let d1 = barriers.ln_upper - y;
                let d2 = barriers.ln_upper - y_next;
                if d1 * d2 < bridge_window {
                    let p_cross = (-2.0 * d1 * d2 / step_var).exp();
                    if rng.random::<f64>() < p_cross {
                        return PathOutcome::Stopped(barriers.upper);
                    }
                }
            }
            if has_lower {
                let d1 = y - barriers.ln_lower;
                let d2 = y_next - barriers.ln_lower;
                if d1 * d2 < bridge_window {
                    let p_cross = (-2.0 * d1 * d2 / step_var).exp();
                    if rng.random::<f64>() < p_cross {
                        return PathOutcome::Stopped(barriers.lower);
                    }
                }
            }
        }
        y = y_next;
    }
    PathOutcome::Censored(y.exp())
}

/// Rank-dependent estimate of the distorted expectation from the order
/// statistics `v_(1) ≤ … ≤ v_(n)`:
///
/// `Ĵ = Σ_i v_(i)·[w((n−i+1)/n) − w((n−i)/n)]`,
///
/// with a nonparametric bootstrap standard error (multinomial resampling of
/// the sorted sample, reusing a `w` table on the grid `k/n`).
pub fn distorted_expectation(
    p: &StoppingProblem,
    sample: &EmpiricalSample,
    boot: &BootstrapConfig,
) -> Estimate {
    assert!(!sample.is_empty(), "sample must be nonempty");
    let values = sample.values();
    let n = values.len();
    let w_table: Vec<f64> = (0..=n).map(|k| p.distort(k as f64 / n as f64)).collect();

    let point = rank_dependent_sum(values, &w_table, None);

    if boot.resamples < 2 {
        return Estimate {
            value: point,
            std_error: 0.0,
        };
    }
    let mut rng = ChaCha8Rng::seed_from_u64(splitmix64(boot.seed));
    let mut counts = vec![0u32; n];
    let mut replicates = Vec::with_capacity(boot.resamples);
    for _ in 0..boot.resamples {
        counts.fill(0);
        for _ in 0..n {
            counts[rng.random_range(0..n)] += 1;
        }
        replicates.push(rank_dependent_sum(values, &w_table, Some(&counts)));
    }
    let mut mean = KahanSum::default();
    for &r in &replicates {
        mean.add(r);
    }
    let mean = mean.total() / replicates.len() as f64;
    let mut var = KahanSum::default();
    for &r in &replicates {
        var.add((r - mean) * (r - mean));
    }
    let std_error = (var.total() / (replicates.len() - 1) as f64).sqrt();
    Estimate {
        value: point,
        std_error,
    }
}

/// `Σ v_(i)·[w(N_i/n) − w(N_{i+1}/n)]` over the decumulative counts `N_i`.
/// Without `counts` every value has multiplicity one; with `counts` the
/// sorted base values carry bootstrap multiplicities.
fn rank_dependent_sum(values: &[f64], w_table: &[f64], counts: Option<&[u32]>) -> f64 {
    let mut acc = KahanSum::default();
    let mut above = 0usize; // decumulative count of strictly later entries
    for i in (0..values.len()).rev() {
        let mult = counts.map_or(1, |c| c[i] as usize);
        if mult == 0 {
            continue;
        }
        let upper = above + mult;
        acc.add(values[i] * (w_table[upper] - w_table[above]));
        above = upper;
    }
    acc.total()
}

/// Estimates `P[X hits b before cutoff/horizon | X_0 = x0]` with its
/// binomial standard error.  The hitting probability of the driftless
/// transformed process is volatility-invariant, so unit volatility is used.
pub fn estimate_hit_prob(x0: f64, b: f64, cfg: &SimConfig) -> Result<Estimate, SimError> {
    if !(x0 > 0.0 && b > x0 && b.is_finite()) {
        return Err(SimError::BadConfig {
            message: format!("need 0 < x0 < b < inf, got x0 = {x0}, b = {b}"),
        });
    }
    let outcomes = run_paths(&IntervalKernel::ray(b), x0, 1.0, cfg)?;
    let hits = outcomes
        .iter()
        .filter(|o| matches!(o, PathOutcome::Stopped(_)))
        .count();
    let n = outcomes.len() as f64;
    let p_hat = hits as f64 / n;
    Ok(Estimate {
        value: p_hat,
        std_error: (p_hat * (1.0 - p_hat) / n).sqrt(),
    })
}
