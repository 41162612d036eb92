//! Exact flow toward a purely atomic target `ν = Σ wⱼ δ_{xⱼ}`.
//!
//! For fixed `s` the path `t ↦ g_s(t)` is piecewise linear. It moves toward
//! `Q_ν(s)` with speed `2|s - R|`, where `R` is the constant value of the CDF
//! between the atoms it crosses (`R⁺` when moving right, `R⁻` when moving
//! left), and stops on arrival. With `x_{s,0} = Q_{μ₀}(s)` and crossing
//! locations `x_{s,j}`,
//!
//! ```text
//! t_{s,j+1} = t_{s,j} + (x_{s,j+1} - x_{s,j}) / (2(s - R_{s,j}))
//! g_s(t)    = x_{s,j} + 2(s - R_{s,j})(t - t_{s,j})   on [t_{s,j}, t_{s,j+1}]
//! ```
//!
//! At `s = W_k` the left-moving speed is zero and the point stays put.

use crate::error::{Error, Result};
use crate::grid::QuantileGrid;
use crate::measure::Discrete;
use crate::target::Target;

/// `g_s(time)` for a single level `s` started at `q0`.
pub fn closed_form_point(q0: f64, s: f64, nu: &Discrete, time: f64) -> f64 {
    let atoms = nu.atoms();
    let q = atoms[nu.plateau_index(s).min(atoms.len()) - 1];
    if q0 == q || time <= 0.0 {
        return if time <= 0.0 { q0 } else { q };
    }
    let mut x = q0;
    let mut t_j = 0.0;
    if q0 < q {
        let mut k = nu.count_le(x);
        loop {
            let speed = 2.0 * (s - nu.level(k));
            let next = atoms[k];
            let t_next = t_j + (next - x) / speed;
            if time < t_next {
                return x + speed * (time - t_j);
            }
            if next >= q {
                return q;
            }
            x = next;
            t_j = t_next;
            k += 1;
        }
    } else {
        let mut k = nu.count_lt(x);
        loop {
            let speed = 2.0 * (nu.level(k) - s);
            if speed <= 0.0 {
                return x;
            }
            let next = atoms[k - 1];
            let t_next = t_j + (x - next) / speed;
            if time < t_next {
                return x - speed * (time - t_j);
            }
            if next <= q {
                return q;
            }
            x = next;
            t_j = t_next;
            k -= 1;
        }
    }
}

/// Exact state at `time` started from the grid `q0`.
pub fn closed_form_discrete(q0: &QuantileGrid, t: &Target, time: f64) -> Result<QuantileGrid> {
    let nu = t.atoms().ok_or(Error::NotDiscreteTarget)?;
    if !(time >= 0.0) {
        return Err(Error::Domain(format!(
            "time must be nonnegative, got {time}"
        )));
    }
    let n = q0.n();
    QuantileGrid::new(
        q0.values()
            .iter()
            .enumerate()
            .map(|(i, &x)| closed_form_point(x, QuantileGrid::level(i, n), nu, time))
            .collect(),
    )
}
