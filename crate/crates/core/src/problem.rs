//! Problem data: market dynamics, payoff and distortion families, and the
//! power transformation that reduces the stopped GBM to a driftless one.
//!
//! A stopping problem is specified by
//!
//! - the goodness parameter `β = 1 − 2μ/σ²` of the underlying GBM (or `μ, σ`
//!   directly), under which `X = S^β` is a driftless geometric Brownian
//!   motion,
//! - a nondecreasing payoff `U` with `U(0) = 0`, evaluated on the original
//!   price, giving the transformed payoff `u(x) = U(x^{1/β})`,
//! - a strictly increasing probability distortion `w` on `[0,1]` with
//!   `w(0) = 0`, `w(1) = 1`, applied to decumulative probabilities.
//!
//! Everything downstream (closed-form evaluation, the naive solver, the
//! fixed-point engine, the Monte-Carlo oracle) works on `(β, u, w)` in the
//! transformed coordinates.

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Errors from problem construction, evaluation domains, and JSON parsing.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum ProblemError {
    #[error("invalid {field}: {message}")]
    InvalidParameter { field: String, message: String },
    #[error("dynamics must be given either as beta or as (mu, sigma)")]
    MissingDynamics,
    #[error("dynamics given both as beta and as (mu, sigma); pick one")]
    AmbiguousDynamics,
    #[error("operation requires beta > 0, problem has beta = {beta}")]
    UnsupportedRegime { beta: f64 },
    #[error("probability argument must lie in [0,1], got {q}")]
    ProbabilityOutOfRange { q: f64 },
    #[error("state argument must be nonnegative, got {x}")]
    StateOutOfRange { x: f64 },
    #[error("problem JSON at `{path}`: {message}")]
    Json { path: String, message: String },
}

fn invalid(field: &str, message: impl Into<String>) -> ProblemError {
    ProblemError::InvalidParameter {
        field: field.to_string(),
        message: message.into(),
    }
}

/// GBM drift/volatility pair for the original price process.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MarketParams {
    pub mu: f64,
    pub sigma: f64,
}

impl MarketParams {
    pub fn new(mu: f64, sigma: f64) -> Result<Self, ProblemError> {
        if !mu.is_finite() {
            return Err(invalid("mu", "must be finite"));
        }
        if !(sigma.is_finite() && sigma > 0.0) {
            return Err(invalid("sigma", "must be finite and positive"));
        }
        Ok(Self { mu, sigma })
    }

    /// Goodness parameter `β = 1 − 2μ/σ²`.
    pub fn beta(&self) -> f64 {
        1.0 - 2.0 * self.mu / (self.sigma * self.sigma)
    }
}

/// Payoff family `U` in original price coordinates.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum PayoffSpec {
    /// Isoelastic utility `U(s) = s^γ`, `γ ∈ (0,1)`.
    PowerUtility { gamma: f64 },
    /// Perpetual call / real-option payoff `U(s) = (s − K)⁺`, `K > 0`.
    Call { strike: f64 },
    /// `U(s) = s`.
    Identity,
}

impl PayoffSpec {
    pub fn validate(&self) -> Result<(), ProblemError> {
        match *self {
            PayoffSpec::PowerUtility { gamma } => {
                if !(gamma.is_finite() && gamma > 0.0 && gamma < 1.0) {
                    return Err(invalid("payoff.gamma", "must lie in (0,1)"));
                }
            }
            PayoffSpec::Call { strike } => {
                if !(strike.is_finite() && strike > 0.0) {
                    return Err(invalid("payoff.strike", "must be positive"));
                }
            }
            PayoffSpec::Identity => {}
        }
        Ok(())
    }

    /// `U(s)` for a price `s ≥ 0`.
    pub fn value(&self, s: f64) -> f64 {
        match *self {
            PayoffSpec::PowerUtility { gamma } => s.powf(gamma),
            PayoffSpec::Call { strike } => (s - strike).max(0.0),
            PayoffSpec::Identity => s,
        }
    }

    /// Exponent `p` when the transformed payoff is the pure power `x^p`.
    pub fn power_exponent(&self, beta: f64) -> Option<f64> {
        match *self {
            PayoffSpec::PowerUtility { gamma } => Some(gamma / beta),
            PayoffSpec::Identity => Some(1.0 / beta),
            PayoffSpec::Call { .. } => None,
        }
    }

    /// Asymptotic power-growth exponent of the transformed payoff at +∞.
    pub fn growth_exponent(&self, beta: f64) -> f64 {
        match *self {
            PayoffSpec::PowerUtility { gamma } => gamma / beta,
            PayoffSpec::Call { .. } | PayoffSpec::Identity => 1.0 / beta,
        }
    }

    /// Left edge of `{x : u(x) > 0}` in transformed coordinates.
    pub fn support_infimum(&self, beta: f64) -> f64 {
        match *self {
            PayoffSpec::Call { strike } => strike.powf(beta),
            _ => 0.0,
        }
    }

    /// `inf {y : u(y) = sup u}` when the supremum of the transformed payoff
    /// is attained.  All current families are unbounded, so this is `None`;
    /// the naive solver keeps the attained branch for bounded payoffs.
    pub fn attained_maximum(&self, _beta: f64) -> Option<f64> {
        None
    }
}

/// Probability distortion family `w` on `[0,1]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum DistortionSpec {
    /// `w(q) = exp(−γ(−ln q)^α)`, `α, γ > 0`.  Inverse-S for `α < 1`,
    /// S-shaped for `α > 1`, the power `q^γ` at `α = 1`.
    Prelec { alpha: f64, gamma: f64 },
    /// One-parameter inverse-S family `w(q) = q^γ / (q^γ + (1−q)^γ)^{1/γ}`;
    /// `γ ≥ 0.279` keeps it nondecreasing.
    TverskyKahneman { gamma: f64 },
    /// Two-parameter inverse-S family `w(q) = αq^γ / (αq^γ + (1−q)^γ)`.
    TwoParameter { alpha: f64, gamma: f64 },
    /// Pessimistic convex power `w(q) = q^η`, `η > 1`.
    ConvexPower { eta: f64 },
    /// Convex quadratic `w(q) = ηq² + (1−η)q`, `η ∈ (0,1)`.
    ConvexQuadratic { eta: f64 },
    /// No distortion.
    Identity,
}

impl DistortionSpec {
    pub fn validate(&self) -> Result<(), ProblemError> {
        match *self {
            DistortionSpec::Prelec { alpha, gamma } => {
                if !(alpha.is_finite() && alpha > 0.0) {
                    return Err(invalid("distortion.alpha", "must be positive"));
                }
                if !(gamma.is_finite() && gamma > 0.0) {
                    return Err(invalid("distortion.gamma", "must be positive"));
                }
            }
            DistortionSpec::TverskyKahneman { gamma } => {
                if !(gamma.is_finite() && (0.279..1.0).contains(&gamma)) {
                    return Err(invalid("distortion.gamma", "must lie in [0.279, 1)"));
                }
            }
            DistortionSpec::TwoParameter { alpha, gamma } => {
                if !(alpha.is_finite() && alpha > 0.0) {
                    return Err(invalid("distortion.alpha", "must be positive"));
                }
                if !(gamma.is_finite() && gamma > 0.0 && gamma < 1.0) {
                    return Err(invalid("distortion.gamma", "must lie in (0,1)"));
                }
            }
            DistortionSpec::ConvexPower { eta } => {
                if !(eta.is_finite() && eta > 1.0) {
                    return Err(invalid("distortion.eta", "must exceed 1"));
                }
            }
            DistortionSpec::ConvexQuadratic { eta } => {
                if !(eta.is_finite() && eta > 0.0 && eta < 1.0) {
                    return Err(invalid("distortion.eta", "must lie in (0,1)"));
                }
            }
            DistortionSpec::Identity => {}
        }
        Ok(())
    }

    /// `w(q)` for `q ∈ [0,1]`; exact at both endpoints.
    pub fn value(&self, q: f64) -> f64 {
        debug_assert!((0.0..=1.0).contains(&q));
        match *self {
            DistortionSpec::Prelec { alpha, gamma } => {
                if q == 0.0 {
                    0.0
                } else if q == 1.0 {
                    1.0
                } else {
                    (-gamma * (-q.ln()).powf(alpha)).exp()
                }
            }
            DistortionSpec::TverskyKahneman { gamma } => {
                let num = q.powf(gamma);
                let den = (num + (1.0 - q).powf(gamma)).powf(1.0 / gamma);
                num / den
            }
            DistortionSpec::TwoParameter { alpha, gamma } => {
                let num = alpha * q.powf(gamma);
                num / (num + (1.0 - q).powf(gamma))
            }
            DistortionSpec::ConvexPower { eta } => q.powf(eta),
            DistortionSpec::ConvexQuadratic { eta } => eta * q * q + (1.0 - eta) * q,
            DistortionSpec::Identity => q,
        }
    }

    /// Analytic shape and the behavior of `w'(0+)`, which drive the naive
    /// solver dispatch.
    pub fn shape(&self) -> (DistortionShape, SlopeAtZero) {
        match *self {
            DistortionSpec::Prelec { alpha, gamma } => {
                if alpha < 1.0 {
                    (DistortionShape::InverseS, SlopeAtZero::Infinite)
                } else if alpha > 1.0 {
                    (DistortionShape::SShaped, SlopeAtZero::Finite)
                } else if gamma < 1.0 {
                    (DistortionShape::Concave, SlopeAtZero::Infinite)
                } else if gamma > 1.0 {
                    (DistortionShape::Convex, SlopeAtZero::Finite)
                } else {
                    (DistortionShape::Identity, SlopeAtZero::Finite)
                }
            }
            DistortionSpec::TverskyKahneman { .. } | DistortionSpec::TwoParameter { .. } => {
                (DistortionShape::InverseS, SlopeAtZero::Infinite)
            }
            DistortionSpec::ConvexPower { .. } | DistortionSpec::ConvexQuadratic { .. } => {
                (DistortionShape::Convex, SlopeAtZero::Finite)
            }
            DistortionSpec::Identity => (DistortionShape::Identity, SlopeAtZero::Finite),
        }
    }
}

/// Shape of the transformed payoff `u` on `(0,∞)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PayoffShape {
    /// Includes the linear boundary case, which the reduced one-sided
    /// optimization handles.
    Convex,
    Concave,
    /// Strictly convex then concave.
    SShaped,
    /// Flat at zero, then concave (call payoff with β > 1).
    ConstantThenConcave,
}

/// Shape of the distortion `w` on `[0,1]`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DistortionShape {
    Convex,
    Concave,
    /// Concave then convex (overweights both tails).
    InverseS,
    /// Convex then concave.
    SShaped,
    Identity,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SlopeAtZero {
    Finite,
    Infinite,
}

/// Joint analytic classification used for solver dispatch.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ShapeProfile {
    pub payoff: PayoffShape,
    pub distortion: DistortionShape,
    pub slope_at_zero: SlopeAtZero,
}

/// A fully specified stopping problem in transformed coordinates.
#[derive(Debug, Clone, PartialEq)]
pub struct StoppingProblem {
    beta: f64,
    market: Option<MarketParams>,
    payoff: PayoffSpec,
    distortion: DistortionSpec,
    scale: f64,
}

impl StoppingProblem {
    /// Builds a problem from `β` directly.
    pub fn from_beta(
        beta: f64,
        payoff: PayoffSpec,
        distortion: DistortionSpec,
    ) -> Result<Self, ProblemError> {
        if !beta.is_finite() {
            return Err(invalid("beta", "must be finite"));
        }
        payoff.validate()?;
        distortion.validate()?;
        let scale = default_scale(&payoff, beta);
        Ok(Self {
            beta,
            market: None,
            payoff,
            distortion,
            scale,
        })
    }

    /// Builds a problem from drift and volatility; `β` is derived.
    pub fn from_market(
        market: MarketParams,
        payoff: PayoffSpec,
        distortion: DistortionSpec,
    ) -> Result<Self, ProblemError> {
        let mut p = Self::from_beta(market.beta(), payoff, distortion)?;
        p.market = Some(market);
        Ok(p)
    }

    /// Overrides the natural state scale (used for tolerances and domains).
    pub fn with_scale(mut self, scale: f64) -> Result<Self, ProblemError> {
        if !(scale.is_finite() && scale > 0.0) {
            return Err(invalid("scale", "must be finite and positive"));
        }
        self.scale = scale;
        Ok(self)
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    pub fn market(&self) -> Option<MarketParams> {
        self.market
    }

    pub fn payoff(&self) -> &PayoffSpec {
        &self.payoff
    }

    pub fn distortion(&self) -> &DistortionSpec {
        &self.distortion
    }

    /// Natural scale of the transformed state (strike level for calls).
    pub fn scale(&self) -> f64 {
        self.scale
    }

    /// Volatility of the transformed process `X = S^β` (`β·σ`), defaulting
    /// to 1 when only `β` was supplied.  Rescaling volatility only rescales
    /// time, so interval-exit laws and hitting probabilities are unaffected.
    pub fn transformed_volatility(&self) -> f64 {
        match self.market {
            Some(m) => (self.beta * m.sigma).abs(),
            None => 1.0,
        }
    }

    /// Transformed payoff `u(x) = U(x^{1/β})` for `x ≥ 0`.
    ///
    /// Panics when `β = 0`; callers dispatch that regime before evaluating.
    pub fn transformed_payoff(&self, x: f64) -> f64 {
        assert!(self.beta != 0.0, "transformed payoff undefined at beta = 0");
        debug_assert!(x >= 0.0);
        self.payoff.value(x.powf(1.0 / self.beta))
    }

    /// Checked variant of [`Self::transformed_payoff`].
    pub fn transformed_payoff_checked(&self, x: f64) -> Result<f64, ProblemError> {
        if self.beta == 0.0 {
            return Err(ProblemError::UnsupportedRegime { beta: self.beta });
        }
        if !(x >= 0.0) {
            return Err(ProblemError::StateOutOfRange { x });
        }
        Ok(self.transformed_payoff(x))
    }

    /// Distortion `w(q)`.
    pub fn distort(&self, q: f64) -> f64 {
        self.distortion.value(q)
    }

    /// Checked variant of [`Self::distort`].
    pub fn distort_checked(&self, q: f64) -> Result<f64, ProblemError> {
        if !(0.0..=1.0).contains(&q) {
            return Err(ProblemError::ProbabilityOutOfRange { q });
        }
        Ok(self.distort(q))
    }

    /// Analytic shape classification; requires the time-inconsistent regime
    /// `β > 0` where the transformed payoff is monotone.
    pub fn shape(&self) -> Result<ShapeProfile, ProblemError> {
        if self.beta <= 0.0 {
            return Err(ProblemError::UnsupportedRegime { beta: self.beta });
        }
        let payoff = match self.payoff {
            PayoffSpec::Call { .. } => {
                if self.beta <= 1.0 {
                    PayoffShape::Convex
                } else {
                    PayoffShape::ConstantThenConcave
                }
            }
            _ => {
                let p = self
                    .payoff
                    .power_exponent(self.beta)
                    .expect("power families have an exponent");
                if p >= 1.0 {
                    PayoffShape::Convex
                } else {
                    PayoffShape::Concave
                }
            }
        };
        let (distortion, slope_at_zero) = self.distortion.shape();
        Ok(ShapeProfile {
            payoff,
            distortion,
            slope_at_zero,
        })
    }
}

fn default_scale(payoff: &PayoffSpec, beta: f64) -> f64 {
    match *payoff {
        // Strike level mapped to transformed coordinates, where meaningful.
        PayoffSpec::Call { strike } if beta > 0.0 => strike.powf(beta),
        _ => 1.0,
    }
}

// ---------------------------------------------------------------------------
// JSON problem documents
// ---------------------------------------------------------------------------

/// On-disk problem document.  Dynamics come either as `beta` or as
/// `mu`/`sigma`; `payoff` and `distortion` are tagged by `type`.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProblemDocument {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub beta: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mu: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sigma: Option<f64>,
    pub payoff: PayoffSpec,
    pub distortion: DistortionSpec,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub scale: Option<f64>,
}

impl ProblemDocument {
    pub fn into_problem(self) -> Result<StoppingProblem, ProblemError> {
        let problem = match (self.beta, self.mu, self.sigma) {
            (Some(_), Some(_), _) | (Some(_), _, Some(_)) => {
                return Err(ProblemError::AmbiguousDynamics)
            }
            (Some(beta), None, None) => {
                StoppingProblem::from_beta(beta, self.payoff, self.distortion)?
            }
            (None, Some(mu), Some(sigma)) => {
                let market = MarketParams::new(mu, sigma)?;
                StoppingProblem::from_market(market, self.payoff, self.distortion)?
            }
            _ => return Err(ProblemError::MissingDynamics),
        };
        match self.scale {
            Some(s) => problem.with_scale(s),
            None => Ok(problem),
        }
    }

    pub fn from_problem(p: &StoppingProblem) -> Self {
        let (beta, mu, sigma) = match p.market() {
            Some(m) => (None, Some(m.mu), Some(m.sigma)),
            None => (Some(p.beta()), None, None),
        };
        Self {
            beta,
            mu,
            sigma,
            payoff: *p.payoff(),
            distortion: *p.distortion(),
            scale: Some(p.scale()),
        }
    }
}

/// Parses a problem document, reporting the JSON field path on error.
pub fn parse_problem_json(json: &str) -> Result<StoppingProblem, ProblemError> {
    let de = &mut serde_json::Deserializer::from_str(json);
    let doc: ProblemDocument =
        serde_path_to_error::deserialize(de).map_err(|e| ProblemError::Json {
            path: e.path().to_string(),
            message: e.inner().to_string(),
        })?;
    doc.into_problem()
}

// ---------------------------------------------------------------------------
// Sampled curvature cross-check
// ---------------------------------------------------------------------------

/// Curvature read off from second differences on a sample grid; used as a
/// generic cross-check of the analytic shape tables.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SampledCurvature {
    Linear,
    Convex,
    Concave,
    ConvexThenConcave,
    ConcaveThenConvex,
    Mixed,
}

/// Classifies `f` by the sign pattern of slope changes over `grid`
/// (strictly increasing, at least 3 points).  Slope changes smaller than
/// `tol · max(1, max|f|)` count as zero.
pub fn classify_curvature<F: Fn(f64) -> f64>(f: F, grid: &[f64], tol: f64) -> SampledCurvature {
    assert!(grid.len() >= 3, "need at least 3 grid points");
    let values: Vec<f64> = grid.iter().map(|&x| f(x)).collect();
    let f_scale = values.iter().fold(1.0f64, |m, v| m.max(v.abs()));
    let tol_abs = tol * f_scale;
    let mut signs = Vec::with_capacity(grid.len().saturating_sub(2));
    for i in 1..grid.len() - 1 {
        let left = (values[i] - values[i - 1]) / (grid[i] - grid[i - 1]);
        let right = (values[i + 1] - values[i]) / (grid[i + 1] - grid[i]);
        let d = right - left;
        signs.push(if d > tol_abs {
            1i8
        } else if d < -tol_abs {
            -1i8
        } else {
            0i8
        });
    }
    let nonzero: Vec<i8> = signs.iter().copied().filter(|&s| s != 0).collect();
    if nonzero.is_empty() {
        return SampledCurvature::Linear;
    }
    let flips = nonzero.windows(2).filter(|w| w[0] != w[1]).count();
    match (flips, nonzero[0]) {
        (0, 1) => SampledCurvature::Convex,
        (0, -1) => SampledCurvature::Concave,
        (1, 1) => SampledCurvature::ConvexThenConcave,
        (1, -1) => SampledCurvature::ConcaveThenConvex,
        _ => SampledCurvature::Mixed,
    }
}
