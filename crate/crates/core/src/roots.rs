//! Bracketed scalar root finding: bisection with secant acceleration.

use crate::error::{ApqError, Result};

/// Relative tolerance on the abscissa used throughout the crate.
pub const ROOT_TOL: f64 = 1e-14;
/// Hard iteration cap; exceeding it is reported, never silently accepted.
pub const MAX_ITER: usize = 200;

/// Find a root of `f` in `[lo, hi]`, where `f(lo)` and `f(hi)` differ in sign.
///
/// Each step tries a secant (regula falsi) point and falls back to bisection
/// whenever the bracket failed to halve over the previous two steps.
pub fn solve_bracketed<F>(mut f: F, lo: f64, hi: f64, tol: f64) -> Result<f64>
where
    F: FnMut(f64) -> f64,
{
    let (mut a, mut b) = if lo <= hi { (lo, hi) } else { (hi, lo) };
    let mut fa = f(a);
    let mut fb = f(b);
    if !fa.is_finite() || !fb.is_finite() {
        return Err(ApqError::NoConvergence(format!(
            "non-finite value at bracket end [{a}, {b}]"
        )));
    }
    if fa == 0.0 {
        return Ok(a);
    }
    if fb == 0.0 {
        return Ok(b);
    }
    if fa.signum() == fb.signum() {
        return Err(ApqError::NoConvergence(format!(
            "no sign change on [{a}, {b}]"
        )));
    }
    let mut width_two_ago = f64::INFINITY;
    let mut width_one_ago = b - a;
    for _ in 0..MAX_ITER {
        let width = b - a;
        if width <= tol * a.abs().max(b.abs()).max(f64::MIN_POSITIVE) {
            return Ok(if fa.abs() < fb.abs() { a } else { b });
        }
        let mid = 0.5 * (a + b);
        let secant = b - fb * (b - a) / (fb - fa);
        let use_bisect = width > 0.5 * width_two_ago || !(secant > a && secant < b);
        let x = if use_bisect { mid } else { secant };
        if x <= a || x >= b {
            return Ok(if fa.abs() < fb.abs() { a } else { b });
        }
        let fx = f(x);
        if !fx.is_finite() {
            return Err(ApqError::NoConvergence(format!("non-finite value at {x}")));
        }
        if fx == 0.0 {
            return Ok(x);
        }
        if fx.signum() == fa.signum() {
            a = x;
            fa = fx;
        } else {
            b = x;
            fb = fx;
        }
        width_two_ago = width_one_ago;
        width_one_ago = width;
    }
    Err(ApqError::NoConvergence(format!(
        "iteration cap reached on [{a}, {b}]"
    )))
}

/// Grow a bracket geometrically away from `anchor` until `f` changes sign.
///
/// `anchor` must be positive; the search moves towards zero when `downward`
/// and towards infinity otherwise, by a factor of 4 per step.
pub fn expand_geometric<F>(mut f: F, anchor: f64, start: f64, downward: bool) -> Result<(f64, f64)>
where
    F: FnMut(f64) -> f64,
{
    let f_anchor = f(anchor);
    let mut prev = anchor;
    let mut t = start;
    for _ in 0..MAX_ITER {
        let ft = f(t);
        if ft.is_finite() && (ft == 0.0 || ft.signum() != f_anchor.signum()) {
            return Ok(if t < prev { (t, prev) } else { (prev, t) });
        }
        prev = t;
        t = if downward { t / 4.0 } else { t * 4.0 };
        if t == 0.0 || !t.is_finite() {
            break;
        }
    }
    Err(ApqError::NoConvergence(
        "could not bracket a root by geometric expansion".into(),
    ))
}
