//! Implicit Euler: the resolvent `(I + τ∂F_ν)⁻¹`, one grid point at a time.
//!
//! For `y = gᵢ + 2τsᵢ` the new value is the unique `x` with
//! `y ∈ [x + 2τR⁻(x), x + 2τR⁺(x)]`, which is the smallest `x` satisfying
//! the right-continuous predicate `x + 2τR⁺(x) ≥ y`. Since `0 ≤ R⁺ ≤ 1`,
//! the root lies in `[y - 2τ, y]`.
//!
//! The search runs over the integer lattice `{k·h}` with `h = bisect_atol`
//! instead of over floats. The result is the first lattice point at or above
//! the exact root (snapped onto a target atom when the root is one), so it is
//! within `h` of the exact root and nondecreasing in `y` without exception.

use rayon::prelude::*;

use super::DEFAULT_BISECT_ATOL;
use crate::error::{Error, Result};
use crate::grid::QuantileGrid;
use crate::target::Target;

const MAX_LATTICE_INDEX: f64 = 4.0e18;

/// One implicit Euler step with the default lattice spacing.
pub fn implicit_euler_step(g: &QuantileGrid, t: &Target, tau: f64) -> Result<QuantileGrid> {
    implicit_euler_step_with(g, t, tau, DEFAULT_BISECT_ATOL)
}

/// One implicit Euler step with lattice spacing `h`.
pub fn implicit_euler_step_with(
    g: &QuantileGrid,
    t: &Target,
    tau: f64,
    h: f64,
) -> Result<QuantileGrid> {
    if !(tau > 0.0 && tau.is_finite()) {
        return Err(Error::Config(format!("tau must be positive, got {tau}")));
    }
    let n = g.n();
    let values = g
        .values()
        .par_iter()
        .enumerate()
        .map(|(i, &gi)| resolvent_point(gi + 2.0 * tau * QuantileGrid::level(i, n), t, tau, h))
        .collect::<Result<Vec<_>>>()?;
    let out = QuantileGrid::new(values)?;
    debug_assert!(!g.is_monotone() || out.is_monotone());
    Ok(out)
}

/// Smallest lattice point `x = k·h` with `x + 2τR⁺(x) ≥ y`.
pub(crate) fn resolvent_point(y: f64, t: &Target, tau: f64, h: f64) -> Result<f64> {
    if !y.is_finite() || (y.abs() + 2.0 * tau) / h > MAX_LATTICE_INDEX {
        return Err(Error::Bracket(y));
    }
    let pred = |x: f64| x + 2.0 * tau * t.cdf_right(x) >= y;
    // lo fails (x < y - 2τ), hi holds (x ≥ y)
    let mut lo = ((y - 2.0 * tau) / h).floor() as i64 - 1;
    let mut hi = (y / h).ceil() as i64;
    if pred(lo as f64 * h) {
        return Err(Error::Bracket(y));
    }
    while !pred(hi as f64 * h) {
        // only reachable through rounding in `y / h`
        hi += 1;
    }
    while hi - lo > 1 {
        let mid = lo + (hi - lo) / 2;
        if pred(mid as f64 * h) {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    let (a, b) = (lo as f64 * h, hi as f64 * h);
    // the exact root lies in (a, b]; if a target atom sits there and
    // satisfies the predicate, it is the root itself
    let atoms = t.atom_locations();
    if !atoms.is_empty() {
        let j = atoms.partition_point(|&x| x <= a);
        if let Some(&x) = atoms.get(j) {
            if x <= b && pred(x) {
                return Ok(x);
            }
        }
    }
    Ok(b)
}
