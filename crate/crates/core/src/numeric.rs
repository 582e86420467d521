//! Small numeric helpers shared across the solvers: bracketed bisection,
//! golden-section maximization on a log axis, compensated summation, and the
//! splitmix64 mixer used to derive per-path RNG seeds.

/// Bisects a boolean predicate that is false at `lo` and true at `hi`
/// (or the reverse), returning the flip point to absolute tolerance `tol`.
pub(crate) fn bisect_predicate<F>(mut lo: f64, mut hi: f64, tol: f64, pred: F) -> f64
where
    F: Fn(f64) -> bool,
{
    let at_hi = pred(hi);
    debug_assert_ne!(pred(lo), at_hi, "predicate must flip across the bracket");
    while hi - lo > tol {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break; // float resolution reached
        }
        if pred(mid) == at_hi {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    0.5 * (lo + hi)
}

/// Bisects a sign change of `f` on `[lo, hi]` to relative tolerance
/// `rel_tol` (absolute near zero).  Requires `f(lo)` and `f(hi)` of opposite
/// sign; zero endpoint values are returned directly.
pub(crate) fn bisect_root<F>(f: F, mut lo: f64, mut hi: f64, rel_tol: f64) -> f64
where
    F: Fn(f64) -> f64,
{
    let mut f_lo = f(lo);
    if f_lo == 0.0 {
        return lo;
    }
    let f_hi = f(hi);
    if f_hi == 0.0 {
        return hi;
    }
    debug_assert!(
        f_lo.signum() != f_hi.signum(),
        "root must be bracketed: f({lo})={f_lo}, f({hi})={f_hi}"
    );
    loop {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi || hi - lo <= rel_tol * mid.abs().max(rel_tol) {
            return mid;
        }
        let f_mid = f(mid);
        if f_mid == 0.0 {
            return mid;
        }
        if f_mid.signum() == f_lo.signum() {
            lo = mid;
            f_lo = f_mid;
        } else {
            hi = mid;
        }
    }
}

/// Golden-section search for the maximum of `f` on `[lo, hi]`.
/// Returns `(argmax, max)`.  `f` should be unimodal on the bracket; on a
/// plateau the search drifts toward `hi`.
pub(crate) fn golden_max<F>(f: F, mut lo: f64, mut hi: f64, tol: f64) -> (f64, f64)
where
    F: Fn(f64) -> f64,
{
    const INV_PHI: f64 = 0.618_033_988_749_894_9;
    let mut x1 = hi - INV_PHI * (hi - lo);
    let mut x2 = lo + INV_PHI * (hi - lo);
    let mut f1 = f(x1);
    let mut f2 = f(x2);
    while hi - lo > tol {
        if f1 > f2 {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - INV_PHI * (hi - lo);
            f1 = f(x1);
        } else {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + INV_PHI * (hi - lo);
            f2 = f(x2);
        }
    }
    let x = 0.5 * (lo + hi);
    (x, f(x))
}

/// `n` strictly interior geometrically spaced points of `(lo, hi)`,
/// offset half a slot from each edge.  Requires `0 < lo < hi`.
pub(crate) fn log_spaced(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    debug_assert!(lo > 0.0 && hi > lo && n > 0);
    let ln_lo = lo.ln();
    let step = (hi.ln() - ln_lo) / n as f64;
    (0..n)
        .map(|i| (ln_lo + (i as f64 + 0.5) * step).exp())
        .collect()
}

/// splitmix64 finalizer; used to derive statistically independent per-path
/// seeds from `(base seed, index)`.
pub(crate) fn splitmix64(state: u64) -> u64 {
    let mut z = state.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Kahan compensated accumulator.
#[derive(Debug, Clone, Copy, Default)]
pub(crate) struct KahanSum {
    sum: f64,
    carry: f64,
}

impl KahanSum {
    pub(crate) fn add(&mut self, value: f64) {
        let y = value - self.carry;
        let t = self.sum + y;
        self.carry = (t - self.sum) - y;
        self.sum = t;
    }

    pub(crate) fn total(&self) -> f64 {
        self.sum
    }
}
