//! Exact pointwise solution through the time change
//!
//! ```text
//! Φ_{ν,s}(x) = ∫_{Q_{μ₀}(s)}^x dz / (s - R_ν(z)),
//! ```
//!
//! with `g_s(t) = Φ⁻¹(2t)` while `2t < Φ(Q_ν(s))` and `g_s(t) = Q_ν(s)` after.
//!
//! The integrand blows up at `Q_ν(s)` when the CDF is continuous there, so the
//! segment toward `Q_ν(s)` is cut into pieces whose distance to it halves each
//! time. Pieces are added until the running total passes `2t` (then the root
//! is found inside that piece) or the increments vanish (then `Q_ν(s)` is
//! reached in finite time).

use crate::error::{Error, Result};
use crate::quad;
use crate::target::Target;

const PIECE_TOL: f64 = 1e-12;
const NEGLIGIBLE_INCREMENT: f64 = 1e-10;
const DIVERGENCE: f64 = 1e6;
const MAX_PIECES: usize = 200;

/// `g_s(time)` for a target whose quantile is continuous at `s`.
pub fn pointwise_ode_solve(q0: f64, t: &Target, s: f64, time: f64) -> Result<f64> {
    if !(s > 0.0 && s < 1.0) {
        return Err(Error::Domain(format!("level {s} outside (0, 1)")));
    }
    if !(time >= 0.0) {
        return Err(Error::Domain(format!(
            "time must be nonnegative, got {time}"
        )));
    }
    if !q0.is_finite() {
        return Err(Error::Domain(format!("initial value {q0} is not finite")));
    }
    let nu = t.measure();
    if nu.is_quantile_jump(s) {
        return Err(Error::DiscontinuityPoint(s));
    }
    let q = nu.quantile(s)?;
    if time == 0.0 || q0 == q {
        return Ok(if time == 0.0 { q0 } else { q });
    }

    let bps = nu.breakpoints();
    let goal = 2.0 * time;
    // ∫ between a and b (either order) of 1/|s - R|, using one-sided limits
    // at the panel ends so that atoms only sit on panel boundaries
    // near `q` the integrand is only known to relative precision ~ε|q|/|q - z|,
    // so the requested accuracy is relaxed to that noise floor
    let scale = q.abs().max(q0.abs());
    let integral = |a: f64, b: f64, tol: f64| -> Result<f64> {
        let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
        let dist = (q - a).abs().min((q - b).abs());
        let tol = tol.max(1e3 * f64::EPSILON * scale * (hi - lo) / (dist * dist));
        quad::integrate_one_sided(
            |z, end| {
                let r = if z >= end {
                    t.cdf_left(z)
                } else {
                    t.cdf_right(z)
                };
                1.0 / (s - r).abs()
            },
            lo,
            hi,
            &bps,
            tol,
        )
    };

    let d = q - q0;
    let mut total = 0.0;
    let mut a = q0;
    for j in 1..=MAX_PIECES {
        let b = q - d * 0.5f64.powi(j as i32);
        if b == a || !(b - a).is_finite() {
            break;
        }
        let inc = integral(a, b, PIECE_TOL)?;
        if total + inc >= goal {
            return solve_in_piece(
                a,
                b,
                goal - total,
                |x| integral(a, x, PIECE_TOL * 1e-1),
                |x| 1.0 / (s - t.cdf_right(x)).abs(),
            );
        }
        total += inc;
        if inc < NEGLIGIBLE_INCREMENT || total > DIVERGENCE {
            break;
        }
        a = b;
    }
    Ok(q)
}

/// Finds `x` between `a` and `b` with `partial(x) = need`, where `partial` is
/// increasing in `|x - a|` with derivative `rate(x)`.
fn solve_in_piece(
    a: f64,
    b: f64,
    need: f64,
    partial: impl Fn(f64) -> Result<f64>,
    rate: impl Fn(f64) -> f64,
) -> Result<f64> {
    let len = b - a;
    let (mut ul, mut ur) = (0.0f64, 1.0f64);
    let mut u = 0.5;
    for _ in 0..200 {
        let x = a + u * len;
        let gval = partial(x)? - need;
        if gval.abs() <= 1e-14 * need.max(1.0) {
            return Ok(x);
        }
        if gval < 0.0 {
            ul = u;
        } else {
            ur = u;
        }
        if ur - ul <= f64::EPSILON {
            break;
        }
        let slope = rate(x) * len.abs();
        let newton = u - gval / slope;
        u = if slope.is_finite() && slope > 0.0 && newton > ul && newton < ur {
            newton
        } else {
            0.5 * (ul + ur)
        };
    }
    Ok(a + 0.5 * (ul + ur) * len)
}
