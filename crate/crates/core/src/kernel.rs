//! Interval-kernel representation of Markovian stopping laws.
//!
//! A stopping law is a Borel map `τ: (0,∞) → {0,1}` where `τ(x) = 0` means
//! "stop at state x".  Its kernel is the stop set `{x : τ(x) = 0}`.  Every
//! law handled by this crate has a kernel that is a finite disjoint union of
//! closed intervals, isolated points, and at most one unbounded ray, which is
//! what [`IntervalKernel`] stores in normalized (sorted, gap-separated) form.
//!
//! Kernels are kept closed: the fixed-point engine only ever unions closures
//! of open stop regions into the kernel, and closing never changes the
//! induced stopping behavior because the driftless state process revisits
//! boundary and isolated points immediately.

use std::fmt;
use std::str::FromStr;

use serde::de::Error as _;
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

/// Relative merge tolerance: pieces closer than this (relative to endpoint
/// magnitude) are merged during normalization.
const MERGE_TOL: f64 = 1e-12;

/// Errors from kernel construction and parsing.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum KernelError {
    #[error("interval endpoints must satisfy 0 <= lo <= hi, got [{lo}, {hi}]")]
    BadEndpoints { lo: f64, hi: f64 },
    #[error("interval endpoints must not be NaN")]
    NanEndpoint,
    #[error("left endpoint must be finite, got {lo}")]
    InfiniteLeft { lo: f64 },
    #[error("cannot parse kernel from {input:?}: {reason}")]
    Parse { input: String, reason: String },
}

/// One maximal closed piece `[lo, hi]` of a kernel.
///
/// `lo == 0.0` is a sentinel meaning the piece reaches down to the left edge
/// of the state space `(0,∞)`, i.e. it represents `(0, hi]`.  `hi` may be
/// `+∞` for the terminal ray.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Piece {
    lo: f64,
    hi: f64,
}

impl Piece {
    pub fn lo(&self) -> f64 {
        self.lo
    }

    pub fn hi(&self) -> f64 {
        self.hi
    }

    pub fn is_point(&self) -> bool {
        self.lo == self.hi
    }

    pub fn is_ray(&self) -> bool {
        self.hi.is_infinite()
    }
}

/// Finite disjoint union of closed intervals in `(0, ∞)`, sorted ascending.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct IntervalKernel {
    pieces: Vec<Piece>,
}

/// Result of the neighbor query at a state `x`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Neighbors {
    /// `sup(kernel ∩ (0,x))`, with the convention 0 when the set is empty.
    pub below: f64,
    /// `inf(kernel ∩ (x,∞))`, with the convention +∞ when the set is empty.
    pub above: f64,
    /// Whether `x` lies in the (closed) kernel itself.  Interior, boundary
    /// and isolated points all trigger immediate-stop semantics.
    pub in_closure: bool,
}

impl IntervalKernel {
    /// The empty kernel (the never-stopping law).
    pub fn empty() -> Self {
        Self { pieces: Vec::new() }
    }

    /// The full kernel `(0, ∞)` (the stop-everywhere law).
    pub fn full() -> Self {
        Self {
            pieces: vec![Piece {
                lo: 0.0,
                hi: f64::INFINITY,
            }],
        }
    }

    /// The ray `[lo, ∞)`.
    pub fn ray(lo: f64) -> Self {
        Self::from_pieces([(lo, f64::INFINITY)]).expect("valid ray")
    }

    /// The single point `{p}`.
    pub fn point(p: f64) -> Self {
        Self::from_pieces([(p, p)]).expect("valid point")
    }

    /// A single closed interval `[lo, hi]`.
    pub fn interval(lo: f64, hi: f64) -> Result<Self, KernelError> {
        Self::from_pieces([(lo, hi)])
    }

    /// Builds a kernel from `(lo, hi)` pairs, validating and normalizing.
    pub fn from_pieces<I>(pairs: I) -> Result<Self, KernelError>
    where
        I: IntoIterator<Item = (f64, f64)>,
    {
        let mut pieces = Vec::new();
        for (lo, hi) in pairs {
            if lo.is_nan() || hi.is_nan() {
                return Err(KernelError::NanEndpoint);
            }
            if lo.is_infinite() {
                return Err(KernelError::InfiniteLeft { lo });
            }
            if lo < 0.0 || hi < lo {
                return Err(KernelError::BadEndpoints { lo, hi });
            }
            pieces.push(Piece { lo, hi });
        }
        Ok(Self::normalized(pieces))
    }

    fn normalized(mut pieces: Vec<Piece>) -> Self {
        // {0} is not a state; drop it.
        pieces.retain(|p| p.hi > 0.0);
        pieces.sort_by(|a, b| a.lo.total_cmp(&b.lo));
        let mut merged: Vec<Piece> = Vec::with_capacity(pieces.len());
        for p in pieces {
            match merged.last_mut() {
                Some(last) if p.lo <= last.hi + merge_gap(last.hi, p.lo) => {
                    last.hi = last.hi.max(p.hi);
                }
                _ => merged.push(p),
            }
        }
        Self { pieces: merged }
    }

    pub fn pieces(&self) -> &[Piece] {
        &self.pieces
    }

    pub fn is_empty(&self) -> bool {
        self.pieces.is_empty()
    }

    /// True when the kernel covers the whole state space `(0, ∞)`.
    pub fn is_full(&self) -> bool {
        self.pieces.len() == 1 && self.pieces[0].lo == 0.0 && self.pieces[0].hi.is_infinite()
    }

    /// Smallest kernel point, `None` when empty.  For a piece touching the
    /// left edge this is 0 (infimum, not attained).
    pub fn infimum(&self) -> Option<f64> {
        self.pieces.first().map(|p| p.lo)
    }

    /// Exact membership test; endpoints belong to the kernel.
    pub fn contains(&self, x: f64) -> bool {
        debug_assert!(x > 0.0, "states live in (0,inf)");
        let idx = self.pieces.partition_point(|p| p.lo <= x);
        idx > 0 && x <= self.pieces[idx - 1].hi
    }

    /// Nearest kernel material strictly below and strictly above `x`.
    pub fn neighbors(&self, x: f64) -> Neighbors {
        debug_assert!(x > 0.0, "states live in (0,inf)");
        let mut below = 0.0f64;
        let mut above = f64::INFINITY;
        for p in &self.pieces {
            if p.lo < x {
                below = below.max(p.hi.min(x));
            }
            if p.hi > x {
                above = above.min(p.lo.max(x));
                break;
            }
        }
        Neighbors {
            below,
            above,
            in_closure: self.contains(x),
        }
    }

    /// Set union, renormalized.
    pub fn union(&self, other: &Self) -> Self {
        let mut pieces = self.pieces.clone();
        pieces.extend_from_slice(&other.pieces);
        Self::normalized(pieces)
    }

    /// True when piece counts match and every endpoint pair differs by less
    /// than `tol` (with ∞ matching only ∞).
    pub fn approx_eq(&self, other: &Self, tol: f64) -> bool {
        self.pieces.len() == other.pieces.len()
            && self
                .pieces
                .iter()
                .zip(&other.pieces)
                .all(|(a, b)| close(a.lo, b.lo, tol) && close(a.hi, b.hi, tol))
    }

    /// True when every piece of `other` is covered by a piece of `self`,
    /// allowing endpoint slack `tol`.
    pub fn includes(&self, other: &Self, tol: f64) -> bool {
        other.pieces.iter().all(|q| {
            self.pieces
                .iter()
                .any(|p| p.lo <= q.lo + tol && q.hi <= p.hi + tol)
        })
    }
}

fn merge_gap(hi: f64, lo: f64) -> f64 {
    if hi.is_infinite() {
        return f64::INFINITY;
    }
    MERGE_TOL * hi.abs().max(lo.abs()).max(1.0)
}

fn close(a: f64, b: f64, tol: f64) -> bool {
    if a.is_infinite() || b.is_infinite() {
        a == b
    } else {
        (a - b).abs() < tol
    }
}

impl fmt::Display for IntervalKernel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_empty() {
            return write!(f, "∅");
        }
        for (i, p) in self.pieces.iter().enumerate() {
            if i > 0 {
                write!(f, "∪")?;
            }
            match (p.lo == 0.0, p.hi.is_infinite()) {
                (true, true) => write!(f, "(0,inf)")?,
                (true, false) => write!(f, "(0,{}]", p.hi)?,
                (false, true) => write!(f, "[{},inf)", p.lo)?,
                (false, false) => write!(f, "[{},{}]", p.lo, p.hi)?,
            }
        }
        Ok(())
    }
}

impl FromStr for IntervalKernel {
    type Err = KernelError;

    fn from_str(s: &str) -> Result<Self, KernelError> {
        let text = s.trim();
        let err = |reason: &str| KernelError::Parse {
            input: s.to_string(),
            reason: reason.to_string(),
        };
        match text {
            "" | "∅" | "empty" | "never" => return Ok(Self::empty()),
            "(0,inf)" | "all" => return Ok(Self::full()),
            _ => {}
        }
        let mut pairs = Vec::new();
        for part in text.split(['∪', 'u', 'U']) {
            let part = part.trim();
            let inner = part
                .strip_prefix(['[', '('])
                .and_then(|r| r.strip_suffix([']', ')']))
                .ok_or_else(|| err("piece must be bracketed like [a,b] or [a,inf)"))?;
            let (lo_s, hi_s) = inner
                .split_once(',')
                .ok_or_else(|| err("piece must contain a comma"))?;
            let lo: f64 = lo_s
                .trim()
                .parse()
                .map_err(|_| err("left endpoint is not a number"))?;
            let hi_s = hi_s.trim();
            let hi: f64 = if hi_s.eq_ignore_ascii_case("inf") {
                f64::INFINITY
            } else {
                hi_s.parse()
                    .map_err(|_| err("right endpoint is not a number or 'inf'"))?
            };
            pairs.push((lo, hi));
        }
        Self::from_pieces(pairs)
    }
}

#[derive(Serialize, Deserialize)]
#[serde(untagged)]
enum Endpoint {
    Num(f64),
    Word(String),
}

impl Serialize for IntervalKernel {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        let pairs: Vec<(f64, Endpoint)> = self
            .pieces
            .iter()
            .map(|p| {
                let hi = if p.hi.is_infinite() {
                    Endpoint::Word("inf".to_string())
                } else {
                    Endpoint::Num(p.hi)
                };
                (p.lo, hi)
            })
            .collect();
        pairs.serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for IntervalKernel {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let pairs = Vec::<(f64, Endpoint)>::deserialize(deserializer)?;
        let mut out = Vec::with_capacity(pairs.len());
        for (lo, hi) in pairs {
            let hi = match hi {
                Endpoint::Num(v) => v,
                Endpoint::Word(w) if w.eq_ignore_ascii_case("inf") => f64::INFINITY,
                Endpoint::Word(w) => {
                    return Err(D::Error::custom(format!(
                        "right endpoint must be a number or \"inf\", got {w:?}"
                    )))
                }
            };
            out.push((lo, hi));
        }
        IntervalKernel::from_pieces(out).map_err(D::Error::custom)
    }
}

/// A Markovian stopping law, `τ(x) = 0 ⇔ kernel.contains(x)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StoppingLaw {
    kernel: IntervalKernel,
}

impl StoppingLaw {
    pub fn from_kernel(kernel: IntervalKernel) -> Self {
        Self { kernel }
    }

    /// The law that never stops (empty kernel).
    pub fn never() -> Self {
        Self::from_kernel(IntervalKernel::empty())
    }

    /// The trivial stop-everywhere law.
    pub fn everywhere() -> Self {
        Self::from_kernel(IntervalKernel::full())
    }

    /// Threshold law `1_{(0,b)}`: continue strictly below `b`, stop at and
    /// above it.  `b = 0` degenerates to the stop-everywhere law.
    pub fn stop_at_or_above(b: f64) -> Self {
        Self::from_kernel(IntervalKernel::ray(b))
    }

    pub fn kernel(&self) -> &IntervalKernel {
        &self.kernel
    }

    pub fn into_kernel(self) -> IntervalKernel {
        self.kernel
    }

    /// τ(x) == 0.
    pub fn stops_at(&self, x: f64) -> bool {
        self.kernel.contains(x)
    }
}

impl fmt::Display for StoppingLaw {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.kernel.fmt(f)
    }
}
