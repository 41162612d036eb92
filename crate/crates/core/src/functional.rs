//! The energy functional on quantile grids and the distances around it.
//!
//! For a quantile function `u` and target `ν`,
//!
//! ```text
//! F_ν(u) = ∫₀¹ (1 - 2s) u(s) + E_ν|u(s) - X| ds
//! ```
//!
//! and `F_ν(Q_μ) + ½∬K dν dν = MMD²(μ, ν) = ∫ (R_μ - R_ν)² dx` with
//! `K(x, y) = -|x - y|`.

use crate::error::{Error, Result};
use crate::grid::QuantileGrid;
use crate::measure::Measure;
use crate::quad;
use crate::target::Target;

/// Which element of `2[R⁻(u(s)), R⁺(u(s))] - 2s` to report.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum SubgradientSelection {
    /// Element of least absolute value.
    #[default]
    Minimal,
    Left,
    Right,
}

/// Grid approximation of the Wasserstein-2 distance.
pub fn w2_distance(a: &QuantileGrid, b: &QuantileGrid) -> Result<f64> {
    a.check_same_size(b)?;
    let sq: f64 = a
        .values()
        .iter()
        .zip(b.values())
        .map(|(x, y)| (x - y) * (x - y))
        .sum();
    Ok((sq / a.n() as f64).sqrt())
}

/// `∫ (R_μ(x) - R_ν(x))² dx` by piecewise adaptive quadrature.
pub fn mmd_squared(mu: &Measure, nu: &Measure) -> Result<f64> {
    let (a1, b1) = mu.effective_range(1e-12);
    let (a2, b2) = nu.effective_range(1e-12);
    let (lo, hi) = (a1.min(a2), b1.max(b2));
    let mut bps = mu.breakpoints();
    bps.extend(nu.breakpoints());
    let v = quad::integrate_one_sided(
        |x, end| {
            let d = if x >= end {
                mu.cdf_left(x) - nu.cdf_left(x)
            } else {
                mu.cdf_right(x) - nu.cdf_right(x)
            };
            d * d
        },
        lo,
        hi,
        &bps,
        quad::TOL,
    )?;
    Ok(v.max(0.0))
}

/// `½∬K dν dν = -½ E|X - X'|`, the constant separating `F_ν` from MMD².
pub fn half_self_interaction(nu: &Measure) -> Result<f64> {
    Ok(-0.5 * nu.mean_abs_difference()?)
}

/// Midpoint-rule value of `F_ν(g)`.
pub fn functional_f(g: &QuantileGrid, t: &Target) -> f64 {
    let nu = t.measure();
    let total: f64 = g
        .values()
        .iter()
        .enumerate()
        .map(|(i, &u)| {
            let s = g.midpoint(i);
            (1.0 - 2.0 * s) * u + nu.abs_deviation(u)
        })
        .sum();
    total / g.n() as f64
}

/// A selection from the subdifferential `∂F_ν(g)`, one value per grid point.
pub fn subgradient(g: &QuantileGrid, t: &Target, sel: SubgradientSelection) -> Vec<f64> {
    g.values()
        .iter()
        .enumerate()
        .map(|(i, &u)| {
            let s2 = 2.0 * g.midpoint(i);
            let lo = 2.0 * t.cdf_left(u) - s2;
            let hi = 2.0 * t.cdf_right(u) - s2;
            match sel {
                SubgradientSelection::Left => lo,
                SubgradientSelection::Right => hi,
                SubgradientSelection::Minimal => {
                    if lo > 0.0 {
                        lo
                    } else if hi < 0.0 {
                        hi
                    } else {
                        0.0
                    }
                }
            }
        })
        .collect()
}

/// `∇F_ν(g) = 2 R_ν(g) - 2s`, defined when `ν` has no atoms.
pub fn gradient_continuous(g: &QuantileGrid, t: &Target) -> Result<Vec<f64>> {
    if t.has_atoms() {
        return Err(Error::AtomicTarget);
    }
    Ok(g.values()
        .iter()
        .enumerate()
        .map(|(i, &u)| 2.0 * t.cdf_right(u) - 2.0 * g.midpoint(i))
        .collect())
}

/// Absolutely continuous piece `density` on `[x_lo, x_hi]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DensityPiece {
    pub x_lo: f64,
    pub x_hi: f64,
    pub density: f64,
}

impl DensityPiece {
    pub fn mass(&self) -> f64 {
        self.density * (self.x_hi - self.x_lo)
    }
}

/// Measure read off a quantile grid: density pieces plus atoms.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct PiecewiseDensity {
    pub pieces: Vec<DensityPiece>,
    /// `(location, mass)`, sorted by location.
    pub atoms: Vec<(f64, f64)>,
}

impl PiecewiseDensity {
    pub fn total_mass(&self) -> f64 {
        self.pieces.iter().map(DensityPiece::mass).sum::<f64>()
            + self.atoms.iter().map(|a| a.1).sum::<f64>()
    }

    /// Density at `x`, or `None` if `x` is outside every piece.
    pub fn density_at(&self, x: f64) -> Option<f64> {
        self.pieces
            .iter()
            .find(|p| x >= p.x_lo && x <= p.x_hi)
            .map(|p| p.density)
    }
}

fn atom_tol(v: f64) -> f64 {
    1e-9 * v.abs().max(1.0)
}

/// Splits the law of a quantile grid into atoms and a piecewise constant
/// density.
///
/// A run of at least two values equal up to `1e-9·max(1, |v|)` is an atom of
/// mass `run/n`. Between consecutive distinct values the density is `Δs/Δg`.
/// A gap touching an atom carries only the half of `1/n` belonging to its
/// non-atom end, or inherits the density of its other neighbour when that
/// neighbour is an ordinary gap.
pub fn density_and_atoms(g: &QuantileGrid) -> PiecewiseDensity {
    let v = g.values();
    let n = v.len();
    let inv_n = 1.0 / n as f64;

    // distinct points: (location, is_atom, run length)
    let mut points: Vec<(f64, bool, usize)> = Vec::new();
    let mut i = 0;
    while i < n {
        let mut j = i;
        while j + 1 < n && (v[j + 1] - v[i]).abs() <= atom_tol(v[i]) {
            j += 1;
        }
        let len = j - i + 1;
        points.push((v[i], len >= 2, len));
        i = j + 1;
    }

    let atoms: Vec<(f64, f64)> = points
        .iter()
        .filter(|p| p.1)
        .map(|p| (p.0, p.2 as f64 * inv_n))
        .collect();

    // raw gaps between consecutive distinct points
    struct Gap {
        lo: f64,
        hi: f64,
        touches_atom: bool,
        half_mass: f64,
    }
    let gaps: Vec<Gap> = points
        .windows(2)
        .map(|w| {
            let (l, r) = (w[0], w[1]);
            let mass = 0.5 * inv_n * ((!l.1) as u8 + (!r.1) as u8) as f64;
            Gap {
                lo: l.0,
                hi: r.0,
                touches_atom: l.1 || r.1,
                half_mass: mass,
            }
        })
        .filter(|g| g.hi > g.lo)
        .collect();

    let mut raw: Vec<DensityPiece> = Vec::with_capacity(gaps.len());
    for (k, gap) in gaps.iter().enumerate() {
        let width = gap.hi - gap.lo;
        let density = if !gap.touches_atom {
            gap.half_mass / width
        } else {
            let neighbour = [k.checked_sub(1), Some(k + 1)]
                .into_iter()
                .flatten()
                .filter_map(|m| gaps.get(m))
                .find(|o| !o.touches_atom && o.hi > o.lo && (o.hi == gap.lo || o.lo == gap.hi));
            match neighbour {
                Some(o) if gap.half_mass > 0.0 => o.half_mass / (o.hi - o.lo),
                _ => gap.half_mass / width,
            }
        };
        if density > 0.0 {
            raw.push(DensityPiece {
                x_lo: gap.lo,
                x_hi: gap.hi,
                density,
            });
        }
    }

    // merge contiguous pieces whose densities agree to 1e-6 relative
    let mut pieces: Vec<DensityPiece> = Vec::new();
    for p in raw {
        if let Some(last) = pieces.last_mut() {
            let close = (last.density - p.density).abs() <= 1e-6 * last.density.max(p.density);
            if close && last.x_hi == p.x_lo {
                let mass = last.mass() + p.mass();
                last.x_hi = p.x_hi;
                last.density = mass / (last.x_hi - last.x_lo);
                continue;
            }
        }
        pieces.push(p);
    }

    PiecewiseDensity { pieces, atoms }
}
