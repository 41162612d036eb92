//! Adaptive Simpson quadrature.
//!
//! Integrands in this crate are smooth between finitely many known kinks or
//! jumps (atoms, interval endpoints). Callers pass those as breakpoints so
//! every panel sees a continuous integrand.

use crate::error::{Error, Result};

/// Default absolute tolerance.
pub const TOL: f64 = 1e-10;
/// Default maximum bisection depth per panel.
pub const MAX_DEPTH: u32 = 40;
const MIN_DEPTH: u32 = 4;

struct Panel {
    a: f64,
    m: f64,
    b: f64,
    fa: f64,
    fm: f64,
    fb: f64,
    whole: f64,
}

fn simpson(a: f64, b: f64, fa: f64, fm: f64, fb: f64) -> f64 {
    (b - a) * (fa + 4.0 * fm + fb) / 6.0
}

fn refine<F: Fn(f64) -> f64>(
    f: &F,
    p: Panel,
    eps: f64,
    depth: u32,
    max_depth: u32,
    failed: &mut bool,
) -> f64 {
    let Panel {
        a,
        m,
        b,
        fa,
        fm,
        fb,
        whole,
    } = p;
    let lm = 0.5 * (a + m);
    let rm = 0.5 * (m + b);
    let flm = f(lm);
    let frm = f(rm);
    let left = simpson(a, m, fa, flm, fm);
    let right = simpson(m, b, fm, frm, fb);
    let delta = left + right - whole;
    if depth >= MIN_DEPTH && delta.abs() <= 15.0 * eps {
        return left + right + delta / 15.0;
    }
    if depth >= max_depth || !(lm > a && m > lm && rm > m && b > rm) {
        *failed = true;
        return left + right + delta / 15.0;
    }
    let l = Panel {
        a,
        m: lm,
        b: m,
        fa,
        fm: flm,
        fb: fm,
        whole: left,
    };
    let r = Panel {
        a: m,
        m: rm,
        b,
        fa: fm,
        fm: frm,
        fb,
        whole: right,
    };
    refine(f, l, 0.5 * eps, depth + 1, max_depth, failed)
        + refine(f, r, 0.5 * eps, depth + 1, max_depth, failed)
}

/// Integrates `f` over `[a, b]` to absolute tolerance `tol`.
pub fn adaptive_simpson<F: Fn(f64) -> f64>(
    f: F,
    a: f64,
    b: f64,
    tol: f64,
    max_depth: u32,
) -> Result<f64> {
    if a == b {
        return Ok(0.0);
    }
    if b < a {
        return adaptive_simpson(f, b, a, tol, max_depth).map(|v| -v);
    }
    let m = 0.5 * (a + b);
    let (fa, fm, fb) = (f(a), f(m), f(b));
    let whole = simpson(a, b, fa, fm, fb);
    let mut failed = false;
    let value = refine(
        &f,
        Panel {
            a,
            m,
            b,
            fa,
            fm,
            fb,
            whole,
        },
        tol,
        0,
        max_depth,
        &mut failed,
    );
    if failed || !value.is_finite() {
        return Err(Error::Quadrature { lo: a, hi: b });
    }
    Ok(value)
}

/// Integrates over `[a, b]`, splitting at every breakpoint strictly inside.
///
/// The tolerance is shared between panels in proportion to their width.
pub fn integrate_piecewise<F: Fn(f64) -> f64>(
    f: F,
    a: f64,
    b: f64,
    breakpoints: &[f64],
    tol: f64,
) -> Result<f64> {
    if a == b {
        return Ok(0.0);
    }
    if b < a {
        return integrate_piecewise(f, b, a, breakpoints, tol).map(|v| -v);
    }
    let mut cuts: Vec<f64> = Vec::with_capacity(breakpoints.len() + 2);
    cuts.push(a);
    cuts.extend(breakpoints.iter().copied().filter(|&x| x > a && x < b));
    cuts.push(b);
    cuts.sort_by(f64::total_cmp);
    cuts.dedup();

    let width = b - a;
    let mut total = 0.0;
    for w in cuts.windows(2) {
        let share = ((w[1] - w[0]) / width).max(1e-3);
        total += adaptive_simpson(&f, w[0], w[1], tol * share, MAX_DEPTH)?;
    }
    Ok(total)
}

/// Piecewise integration for integrands that jump at the breakpoints.
///
/// `f(x, hi)` is called with the right end `hi` of the current panel, so an
/// integrand built from right-continuous CDFs can switch to left limits at
/// `x == hi` and every panel sees a continuous function.
pub fn integrate_one_sided<F: Fn(f64, f64) -> f64>(
    f: F,
    a: f64,
    b: f64,
    breakpoints: &[f64],
    tol: f64,
) -> Result<f64> {
    if b <= a {
        return Ok(0.0);
    }
    let mut cuts: Vec<f64> = Vec::with_capacity(breakpoints.len() + 2);
    cuts.push(a);
    cuts.extend(breakpoints.iter().copied().filter(|&x| x > a && x < b));
    cuts.push(b);
    cuts.sort_by(f64::total_cmp);
    cuts.dedup();

    let width = b - a;
    let mut total = 0.0;
    for w in cuts.windows(2) {
        let hi = w[1];
        let share = ((hi - w[0]) / width).max(1e-3);
        total += adaptive_simpson(|x| f(x, hi), w[0], hi, tol * share, MAX_DEPTH)?;
    }
    Ok(total)
}
