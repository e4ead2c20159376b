//! Shared scalar root-finding kernel: safeguarded Newton with a bisection
//! fallback inside a bracket found by doubling expansion.
//!
//! Both the epigraph projection and the smooth 1-D proximal map reduce to a
//! strictly increasing scalar equation; they share this single kernel.

use crate::{Error, Result};

/// Hard cap on Newton/bisection steps.
pub const MAX_ITER: usize = 200;

/// Number of doubling steps allowed while hunting for a sign change.
pub const MAX_EXPAND: usize = 200;

/// Finds the root of an increasing function `g` near `start`.
///
/// The bracket is grown from `start` by doubling until `g` changes sign,
/// then Newton steps are taken whenever they stay inside the bracket and
/// bisection otherwise. Stops when `|g| <= target` (and polishes the
/// bracket down to floating-point width as a fallback).
pub fn solve_increasing(
    g: impl Fn(f64) -> f64,
    dg: impl Fn(f64) -> f64,
    start: f64,
    target: f64,
) -> Result<f64> {
    let (mut lo, mut hi) = expand_bracket(&g, start)?;

    let mut x = 0.5 * (lo + hi);
    for _ in 0..MAX_ITER {
        let gx = g(x);
        if !gx.is_finite() {
            return Err(Error::Numerical(format!(
                "root function returned {gx} at x = {x}"
            )));
        }
        if gx.abs() <= target {
            return Ok(x);
        }
        if gx > 0.0 {
            hi = x;
        } else {
            lo = x;
        }

        let slope = dg(x);
        let newton = x - gx / slope;
        x = if slope.is_finite() && slope > 0.0 && newton > lo && newton < hi {
            newton
        } else {
            0.5 * (lo + hi)
        };

        if hi - lo <= f64::EPSILON * (1.0 + x.abs()) {
            // Bracket exhausted to machine width; take the midpoint.
            return Ok(0.5 * (lo + hi));
        }
    }
    let x = 0.5 * (lo + hi);
    if g(x).abs() <= target.max(1e-9) {
        return Ok(x);
    }
    Err(Error::RootResidual(format!(
        "no convergence after {MAX_ITER} iterations; bracket [{lo}, {hi}], residual {}",
        g(x)
    )))
}

/// Grows a bracket around `start` by doubling until `g` changes sign.
fn expand_bracket(g: impl Fn(f64) -> f64, start: f64) -> Result<(f64, f64)> {
    let g0 = g(start);
    if !g0.is_finite() {
        return Err(Error::Numerical(format!(
            "root function returned {g0} at start {start}"
        )));
    }
    if g0 == 0.0 {
        return Ok((start, start));
    }

    let mut step = 1.0f64.max(start.abs() * 1e-3);
    if g0 > 0.0 {
        // Root is to the left.
        let mut lo = start;
        for _ in 0..MAX_EXPAND {
            lo -= step;
            step *= 2.0;
            let glo = g(lo);
            if !glo.is_finite() {
                return Err(Error::Numerical(format!(
                    "root function returned {glo} at x = {lo}"
                )));
            }
            if glo <= 0.0 {
                return Ok((lo, start));
            }
        }
        Err(Error::Bracketing(format!(
            "g stayed positive down to x = {lo} (started at {start}, g(start) = {g0})"
        )))
    } else {
        let mut hi = start;
        for _ in 0..MAX_EXPAND {
            hi += step;
            step *= 2.0;
            let ghi = g(hi);
            if !ghi.is_finite() {
                return Err(Error::Numerical(format!(
                    "root function returned {ghi} at x = {hi}"
                )));
            }
            if ghi >= 0.0 {
                return Ok((start, hi));
            }
        }
        Err(Error::Bracketing(format!(
            "g stayed negative up to x = {hi} (started at {start}, g(start) = {g0})"
        )))
    }
}
