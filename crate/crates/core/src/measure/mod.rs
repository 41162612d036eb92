//! Probability measures on the real line.
//!
//! Every measure exposes both one-sided CDFs,
//!
//! ```text
//! R⁺(x) = μ((-∞, x]),   R⁻(x) = μ((-∞, x)),
//! ```
//!
//! and the minimal (left-continuous) quantile `Q(s) = min{x : R⁺(x) ≥ s}`.
//! The two are tied by the Galois duality `Q(s) ≤ x ⇔ s ≤ R⁺(x)`, which the
//! discrete variants satisfy exactly in floating point and the numerically
//! inverted variants satisfy outside a window of width `1e-12`.

mod parse;

use std::fmt;

use crate::error::{Error, Result};
use crate::grid::QuantileGrid;
use crate::quad;
use crate::special::{self, SQRT_2PI};

pub use parse::parse_measure;

/// Iteration cap of numeric CDF inversion.
const INVERSION_MAX_ITER: usize = 200;
const WEIGHT_SUM_TOL: f64 = 1e-12;

/// Finitely many weighted atoms `Σ wⱼ δ_{xⱼ}` with `x₁ < … < xₙ`.
#[derive(Debug, Clone, PartialEq)]
pub struct Discrete {
    atoms: Vec<f64>,
    weights: Vec<f64>,
    /// `W_k = w₁ + … + w_k`; the last entry is exactly 1.
    cum: Vec<f64>,
}

impl Discrete {
    pub fn new(atoms: Vec<f64>, weights: Vec<f64>) -> Result<Self> {
        if atoms.is_empty() {
            return Err(Error::InvalidMeasure(
                "discrete measure needs at least one atom".into(),
            ));
        }
        if atoms.len() != weights.len() {
            return Err(Error::InvalidMeasure(format!(
                "{} atoms but {} weights",
                atoms.len(),
                weights.len()
            )));
        }
        if atoms.iter().any(|x| !x.is_finite()) {
            return Err(Error::InvalidMeasure(
                "atom locations must be finite".into(),
            ));
        }
        if atoms.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::InvalidMeasure(
                "atoms must be strictly increasing".into(),
            ));
        }
        if weights.iter().any(|&w| !(w > 0.0 && w <= 1.0)) {
            return Err(Error::InvalidMeasure("weights must lie in (0, 1]".into()));
        }
        let total: f64 = weights.iter().sum();
        if (total - 1.0).abs() > WEIGHT_SUM_TOL {
            return Err(Error::InvalidMeasure(format!(
                "weights sum to {total}, not 1"
            )));
        }
        let mut cum = Vec::with_capacity(weights.len());
        let mut acc = 0.0;
        for &w in &weights {
            acc += w;
            cum.push(acc);
        }
        *cum.last_mut().unwrap() = 1.0;
        if cum.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::InvalidMeasure(
                "cumulative weights must be strictly increasing".into(),
            ));
        }
        Ok(Self {
            atoms,
            weights,
            cum,
        })
    }

    pub fn atoms(&self) -> &[f64] {
        &self.atoms
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// Cumulative weights `W₁, …, Wₙ`.
    pub fn cumulative(&self) -> &[f64] {
        &self.cum
    }

    /// `W_k` with the convention `W₀ = 0`.
    pub fn level(&self, k: usize) -> f64 {
        if k == 0 {
            0.0
        } else {
            self.cum[k - 1]
        }
    }

    /// Number of atoms `≤ x`.
    pub fn count_le(&self, x: f64) -> usize {
        self.atoms.partition_point(|&a| a <= x)
    }

    /// Number of atoms `< x`.
    pub fn count_lt(&self, x: f64) -> usize {
        self.atoms.partition_point(|&a| a < x)
    }

    fn cdf_right(&self, x: f64) -> f64 {
        self.level(self.count_le(x))
    }

    fn cdf_left(&self, x: f64) -> f64 {
        self.level(self.count_lt(x))
    }

    /// 1-based index of the first cumulative weight `≥ s`.
    pub fn plateau_index(&self, s: f64) -> usize {
        self.cum.partition_point(|&w| w < s) + 1
    }

    fn quantile(&self, s: f64) -> f64 {
        let k = self.plateau_index(s).min(self.atoms.len());
        self.atoms[k - 1]
    }

    fn abs_deviation(&self, u: f64) -> f64 {
        self.atoms
            .iter()
            .zip(&self.weights)
            .map(|(&x, &w)| w * (u - x).abs())
            .sum()
    }
}

/// Equally weighted sorted sample; repeated values are allowed.
#[derive(Debug, Clone, PartialEq)]
pub struct Empirical {
    values: Vec<f64>,
}

impl Empirical {
    pub fn new(mut values: Vec<f64>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::InvalidMeasure(
                "empirical measure needs at least one value".into(),
            ));
        }
        if values.iter().any(|x| !x.is_finite()) {
            return Err(Error::InvalidMeasure("sample values must be finite".into()));
        }
        values.sort_by(f64::total_cmp);
        Ok(Self { values })
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }
}

// Shared helpers for equally weighted sorted values (Empirical, GridQuantile).
mod sorted {
    pub fn cdf_right(v: &[f64], x: f64) -> f64 {
        v.partition_point(|&a| a <= x) as f64 / v.len() as f64
    }

    pub fn cdf_left(v: &[f64], x: f64) -> f64 {
        v.partition_point(|&a| a < x) as f64 / v.len() as f64
    }

    /// Order statistic `x_{⌈sn⌉}`, with the index chosen so that it agrees
    /// exactly with `cdf_right` under the Galois duality.
    pub fn quantile(v: &[f64], s: f64) -> f64 {
        let n = v.len();
        let nf = n as f64;
        let mut k = ((s * nf).ceil() as usize).clamp(1, n);
        while k > 1 && (k - 1) as f64 / nf >= s {
            k -= 1;
        }
        while k < n && (k as f64) / nf < s {
            k += 1;
        }
        v[k - 1]
    }

    pub fn abs_deviation(v: &[f64], u: f64) -> f64 {
        v.iter().map(|&x| (u - x).abs()).sum::<f64>() / v.len() as f64
    }

    /// `E|X - X'| = (2/n²) Σ_{i<j} (x_j - x_i)` for sorted values.
    pub fn mean_abs_difference(v: &[f64]) -> f64 {
        let n = v.len() as f64;
        let mut prefix = 0.0;
        let mut acc = 0.0;
        for (j, &x) in v.iter().enumerate() {
            acc += j as f64 * x - prefix;
            prefix += x;
        }
        2.0 * acc / (n * n)
    }

    pub fn atoms(v: &[f64]) -> Vec<(f64, f64)> {
        let n = v.len() as f64;
        let mut out: Vec<(f64, f64)> = Vec::new();
        for &x in v {
            match out.last_mut() {
                Some((y, m)) if *y == x => *m += 1.0 / n,
                _ => out.push((x, 1.0 / n)),
            }
        }
        out
    }
}

/// Convex combination of measures.
#[derive(Debug, Clone, PartialEq)]
pub struct Mixture {
    weights: Vec<f64>,
    components: Vec<Measure>,
}

impl Mixture {
    pub fn new(weights: Vec<f64>, components: Vec<Measure>) -> Result<Self> {
        if components.is_empty() || weights.len() != components.len() {
            return Err(Error::InvalidMeasure(
                "mixture needs one weight per component and at least one component".into(),
            ));
        }
        if weights.iter().any(|&w| !(w >= 0.0) || !w.is_finite()) {
            return Err(Error::InvalidMeasure(
                "mixture weights must be nonnegative".into(),
            ));
        }
        let total: f64 = weights.iter().sum();
        if (total - 1.0).abs() > WEIGHT_SUM_TOL {
            return Err(Error::InvalidMeasure(format!(
                "mixture weights sum to {total}, not 1"
            )));
        }
        let weights = weights.into_iter().map(|w| w / total).collect();
        Ok(Self {
            weights,
            components,
        })
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn components(&self) -> &[Measure] {
        &self.components
    }

    fn active(&self) -> impl Iterator<Item = (f64, &Measure)> {
        self.weights
            .iter()
            .copied()
            .zip(&self.components)
            .filter(|(w, _)| *w > 0.0)
    }
}

/// A probability measure on ℝ.
#[derive(Debug, Clone, PartialEq)]
pub enum Measure {
    Discrete(Discrete),
    Uniform {
        lo: f64,
        hi: f64,
    },
    Gaussian {
        mean: f64,
        std: f64,
    },
    Laplace {
        loc: f64,
        scale: f64,
    },
    /// Law of `|Y|` with `Y ~ N(loc, scale²)`.
    FoldedNormal {
        loc: f64,
        scale: f64,
    },
    Exponential {
        rate: f64,
    },
    Mixture(Mixture),
    Empirical(Empirical),
    /// A quantile grid read as the law of its step function, i.e. equal
    /// mass `1/n` on each grid value.
    GridQuantile(QuantileGrid),
}

fn positive(name: &str, v: f64) -> Result<f64> {
    if v.is_finite() && v > 0.0 {
        Ok(v)
    } else {
        Err(Error::InvalidMeasure(format!(
            "{name} must be positive and finite, got {v}"
        )))
    }
}

fn finite(name: &str, v: f64) -> Result<f64> {
    if v.is_finite() {
        Ok(v)
    } else {
        Err(Error::InvalidMeasure(format!(
            "{name} must be finite, got {v}"
        )))
    }
}

fn check_level(s: f64) -> Result<()> {
    if s > 0.0 && s < 1.0 {
        Ok(())
    } else {
        Err(Error::Domain(format!("quantile level {s} outside (0, 1)")))
    }
}

impl Measure {
    pub fn dirac(x: f64) -> Self {
        Measure::Discrete(Discrete::new(vec![x], vec![1.0]).expect("finite dirac location"))
    }

    pub fn discrete(atoms: Vec<f64>, weights: Vec<f64>) -> Result<Self> {
        Discrete::new(atoms, weights).map(Measure::Discrete)
    }

    pub fn uniform(lo: f64, hi: f64) -> Result<Self> {
        finite("uniform endpoint", lo)?;
        finite("uniform endpoint", hi)?;
        if lo >= hi {
            return Err(Error::InvalidMeasure(format!(
                "uniform needs lo < hi, got [{lo}, {hi}]"
            )));
        }
        Ok(Measure::Uniform { lo, hi })
    }

    pub fn gaussian(mean: f64, std: f64) -> Result<Self> {
        Ok(Measure::Gaussian {
            mean: finite("mean", mean)?,
            std: positive("std", std)?,
        })
    }

    pub fn laplace(loc: f64, scale: f64) -> Result<Self> {
        Ok(Measure::Laplace {
            loc: finite("loc", loc)?,
            scale: positive("scale", scale)?,
        })
    }

    pub fn folded_normal(loc: f64, scale: f64) -> Result<Self> {
        Ok(Measure::FoldedNormal {
            loc: finite("loc", loc)?,
            scale: positive("scale", scale)?,
        })
    }

    pub fn exponential(rate: f64) -> Result<Self> {
        Ok(Measure::Exponential {
            rate: positive("rate", rate)?,
        })
    }

    pub fn mixture(weights: Vec<f64>, components: Vec<Measure>) -> Result<Self> {
        Mixture::new(weights, components).map(Measure::Mixture)
    }

    pub fn empirical(values: Vec<f64>) -> Result<Self> {
        Empirical::new(values).map(Measure::Empirical)
    }

    /// Reads a monotone grid as a measure; fails on non-monotone grids.
    pub fn from_grid(grid: QuantileGrid) -> Result<Self> {
        if !grid.is_monotone() {
            return Err(Error::InvalidMeasure(
                "quantile grid is not nondecreasing".into(),
            ));
        }
        Ok(Measure::GridQuantile(grid))
    }

    /// Parses the text syntax, e.g. `gaussian(mean=5,std=1)`.
    pub fn parse(text: &str) -> Result<Self> {
        parse_measure(text)
    }

    /// `R⁺(x) = μ((-∞, x])`.
    pub fn cdf_right(&self, x: f64) -> f64 {
        match self {
            Measure::Discrete(d) => d.cdf_right(x),
            Measure::Empirical(e) => sorted::cdf_right(&e.values, x),
            Measure::GridQuantile(g) => sorted::cdf_right(g.values(), x),
            _ => self.continuous_cdf(x),
        }
    }

    /// `R⁻(x) = μ((-∞, x))`.
    pub fn cdf_left(&self, x: f64) -> f64 {
        match self {
            Measure::Discrete(d) => d.cdf_left(x),
            Measure::Empirical(e) => sorted::cdf_left(&e.values, x),
            Measure::GridQuantile(g) => sorted::cdf_left(g.values(), x),
            Measure::Mixture(m) => m.active().map(|(w, c)| w * c.cdf_left(x)).sum(),
            _ => self.continuous_cdf(x),
        }
    }

    // CDF of the analytic variants (right-continuous for mixtures).
    fn continuous_cdf(&self, x: f64) -> f64 {
        match *self {
            Measure::Uniform { lo, hi } => ((x - lo) / (hi - lo)).clamp(0.0, 1.0),
            Measure::Gaussian { mean, std } => special::normal_cdf((x - mean) / std),
            Measure::Laplace { loc, scale } => {
                let z = (x - loc) / scale;
                if z < 0.0 {
                    0.5 * z.exp()
                } else {
                    1.0 - 0.5 * (-z).exp()
                }
            }
            Measure::FoldedNormal { loc, scale } => {
                if x < 0.0 {
                    0.0
                } else {
                    let c = std::f64::consts::FRAC_1_SQRT_2 / scale;
                    (0.5 * (libm::erf((x - loc) * c) + libm::erf((x + loc) * c))).clamp(0.0, 1.0)
                }
            }
            Measure::Exponential { rate } => {
                if x <= 0.0 {
                    0.0
                } else {
                    -(-rate * x).exp_m1()
                }
            }
            Measure::Mixture(ref m) => m.active().map(|(w, c)| w * c.cdf_right(x)).sum(),
            _ => unreachable!("discrete variants handled by caller"),
        }
    }

    /// Minimal quantile `Q(s) = min{x : R⁺(x) ≥ s}` for `s ∈ (0, 1)`.
    pub fn quantile(&self, s: f64) -> Result<f64> {
        check_level(s)?;
        let q = match self {
            Measure::Discrete(d) => d.quantile(s),
            Measure::Empirical(e) => sorted::quantile(&e.values, s),
            Measure::GridQuantile(g) => sorted::quantile(g.values(), s),
            Measure::Uniform { lo, hi } => lo + s * (hi - lo),
            Measure::Gaussian { mean, std } => mean + std * special::normal_quantile(s),
            Measure::Laplace { loc, scale } => {
                if s <= 0.5 {
                    loc + scale * (2.0 * s).ln()
                } else {
                    loc - scale * (2.0 * (1.0 - s)).ln()
                }
            }
            Measure::Exponential { rate } => -(-s).ln_1p() / rate,
            Measure::FoldedNormal { loc, scale } => self.invert_cdf(s, loc.abs(), *scale),
            Measure::Mixture(m) => {
                let mut center = 0.0;
                let mut spread: f64 = 1.0;
                for (w, c) in m.active() {
                    let med = c.quantile(0.5)?;
                    center += w * med;
                    spread = spread.max((med - center).abs().min(1e6));
                }
                self.invert_cdf(s, center, spread)
            }
        };
        Ok(match self {
            Measure::Discrete(_) | Measure::Empirical(_) | Measure::GridQuantile(_) => q,
            _ => self.polish_quantile(s, q),
        })
    }

    // Closed-form inverses are a few ulps off; move onto the smallest float
    // with R⁺(x) ≥ s so that Q(s) ≤ x ⇔ s ≤ R⁺(x) holds exactly.
    fn polish_quantile(&self, s: f64, q: f64) -> f64 {
        smallest_float_where(|x| self.cdf_right(x) >= s, q)
    }

    /// Bisection on `R⁺`: the returned point always satisfies `R⁺(x) ≥ s`.
    fn invert_cdf(&self, s: f64, center: f64, scale: f64) -> f64 {
        let mut step = scale.max(1e-3);
        let mut lo = center - step;
        let mut iters = 0;
        while self.cdf_right(lo) >= s && iters < INVERSION_MAX_ITER {
            step *= 2.0;
            lo = center - step;
            iters += 1;
        }
        step = scale.max(1e-3);
        let mut hi = center + step;
        iters = 0;
        while self.cdf_right(hi) < s && iters < INVERSION_MAX_ITER {
            step *= 2.0;
            hi = center + step;
            iters += 1;
        }
        // to full precision: the result must be the minimal quantile
        for _ in 0..INVERSION_MAX_ITER {
            let mid = 0.5 * (lo + hi);
            if mid <= lo || mid >= hi {
                break;
            }
            if self.cdf_right(mid) >= s {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        hi
    }

    /// Endpoints of the closed convex hull of the support (possibly infinite).
    pub fn support_hull(&self) -> (f64, f64) {
        match self {
            Measure::Discrete(d) => (d.atoms[0], *d.atoms.last().unwrap()),
            Measure::Empirical(e) => (e.values[0], *e.values.last().unwrap()),
            Measure::GridQuantile(g) => {
                let v = g.values();
                (v[0], v[v.len() - 1])
            }
            Measure::Uniform { lo, hi } => (*lo, *hi),
            Measure::Gaussian { .. } | Measure::Laplace { .. } => {
                (f64::NEG_INFINITY, f64::INFINITY)
            }
            Measure::FoldedNormal { .. } | Measure::Exponential { .. } => (0.0, f64::INFINITY),
            Measure::Mixture(m) => {
                m.active()
                    .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), (_, c)| {
                        let (a, b) = c.support_hull();
                        (lo.min(a), hi.max(b))
                    })
            }
        }
    }

    /// Quantile values on the midpoint grid `sᵢ = (i + ½)/n`.
    pub fn sample_quantile_grid(&self, n: usize) -> Result<QuantileGrid> {
        if n < 2 {
            return Err(Error::Domain(format!(
                "grid size must be at least 2, got {n}"
            )));
        }
        let values = (0..n)
            .map(|i| self.quantile(QuantileGrid::level(i, n)))
            .collect::<Result<Vec<_>>>()?;
        QuantileGrid::new(values)
    }

    /// Whether the measure has point masses.
    pub fn has_atoms(&self) -> bool {
        match self {
            Measure::Discrete(_) | Measure::Empirical(_) | Measure::GridQuantile(_) => true,
            Measure::Mixture(m) => m.active().any(|(_, c)| c.has_atoms()),
            _ => false,
        }
    }

    /// Point masses `(location, mass)`, sorted by location.
    pub fn atoms(&self) -> Vec<(f64, f64)> {
        match self {
            Measure::Discrete(d) => d
                .atoms
                .iter()
                .copied()
                .zip(d.weights.iter().copied())
                .collect(),
            Measure::Empirical(e) => sorted::atoms(&e.values),
            Measure::GridQuantile(g) => sorted::atoms(g.values()),
            Measure::Mixture(m) => {
                let mut all: Vec<(f64, f64)> = m
                    .active()
                    .flat_map(|(w, c)| c.atoms().into_iter().map(move |(x, p)| (x, w * p)))
                    .collect();
                all.sort_by(|a, b| a.0.total_cmp(&b.0));
                let mut merged: Vec<(f64, f64)> = Vec::with_capacity(all.len());
                for (x, p) in all {
                    match merged.last_mut() {
                        Some((y, q)) if *y == x => *q += p,
                        _ => merged.push((x, p)),
                    }
                }
                merged
            }
            _ => Vec::new(),
        }
    }

    /// Finite points where the CDF has a jump or a kink.
    pub fn breakpoints(&self) -> Vec<f64> {
        let mut out = match self {
            Measure::Discrete(d) => d.atoms.clone(),
            Measure::Empirical(e) => e.values.clone(),
            Measure::GridQuantile(g) => g.values().to_vec(),
            Measure::Uniform { lo, hi } => vec![*lo, *hi],
            Measure::Gaussian { .. } => Vec::new(),
            Measure::Laplace { loc, .. } => vec![*loc],
            Measure::FoldedNormal { .. } | Measure::Exponential { .. } => vec![0.0],
            Measure::Mixture(m) => m.active().flat_map(|(_, c)| c.breakpoints()).collect(),
        };
        out.sort_by(f64::total_cmp);
        out.dedup();
        out
    }

    /// Lebesgue density, or `None` when the measure has atoms.
    pub fn density(&self, x: f64) -> Option<f64> {
        match *self {
            Measure::Uniform { lo, hi } => Some(if x >= lo && x <= hi {
                1.0 / (hi - lo)
            } else {
                0.0
            }),
            Measure::Gaussian { mean, std } => Some(special::normal_pdf((x - mean) / std) / std),
            Measure::Laplace { loc, scale } => Some(0.5 / scale * (-(x - loc).abs() / scale).exp()),
            Measure::FoldedNormal { loc, scale } => Some(if x < 0.0 {
                0.0
            } else {
                (special::normal_pdf((x - loc) / scale) + special::normal_pdf((x + loc) / scale))
                    / scale
            }),
            Measure::Exponential { rate } => Some(if x < 0.0 {
                0.0
            } else {
                rate * (-rate * x).exp()
            }),
            Measure::Mixture(ref m) => {
                let mut acc = 0.0;
                for (w, c) in m.active() {
                    acc += w * c.density(x)?;
                }
                Some(acc)
            }
            _ => None,
        }
    }

    /// A finite interval outside of which each tail carries at most `eps`.
    pub fn effective_range(&self, eps: f64) -> (f64, f64) {
        let (lo, hi) = self.support_hull();
        let lo = if lo.is_finite() {
            lo
        } else {
            self.quantile(eps).unwrap_or(lo)
        };
        let hi = if hi.is_finite() {
            hi
        } else {
            self.quantile(1.0 - eps).unwrap_or(hi)
        };
        (lo, hi)
    }

    /// `E|u - X|`, the inner integral `∫₀¹ |u - Q(t)| dt`.
    pub fn abs_deviation(&self, u: f64) -> f64 {
        match self {
            Measure::Discrete(d) => d.abs_deviation(u),
            Measure::Empirical(e) => sorted::abs_deviation(&e.values, u),
            Measure::GridQuantile(g) => sorted::abs_deviation(g.values(), u),
            Measure::Uniform { lo, hi } => {
                let (a, b) = (*lo, *hi);
                if u <= a {
                    0.5 * (a + b) - u
                } else if u >= b {
                    u - 0.5 * (a + b)
                } else {
                    ((u - a) * (u - a) + (b - u) * (b - u)) / (2.0 * (b - a))
                }
            }
            Measure::Gaussian { mean, std } => {
                std * special::normal_abs_deviation((u - mean) / std)
            }
            Measure::Laplace { loc, scale } => {
                let d = (u - loc).abs();
                d + scale * (-d / scale).exp()
            }
            Measure::Exponential { rate } => {
                if u <= 0.0 {
                    1.0 / rate - u
                } else {
                    u - 1.0 / rate + 2.0 * (-rate * u).exp() / rate
                }
            }
            Measure::FoldedNormal { loc, scale } => {
                // E|X - u| = E X - u + 2 ∫_{-∞}^u R(x) dx
                let (m, sd) = (*loc, *scale);
                let mean =
                    sd * (2.0 / std::f64::consts::PI).sqrt() * (-0.5 * (m / sd).powi(2)).exp()
                        + m * (1.0 - 2.0 * special::normal_cdf(-m / sd));
                if u <= 0.0 {
                    mean - u
                } else {
                    let psi = special::normal_cdf_integral;
                    let int_r = sd * (psi((u - m) / sd) - psi(-m / sd))
                        + sd * (psi((u + m) / sd) - psi(m / sd))
                        - u;
                    mean - u + 2.0 * int_r
                }
            }
            Measure::Mixture(m) => m.active().map(|(w, c)| w * c.abs_deviation(u)).sum(),
        }
    }

    /// `E|X - X'|` for independent copies, i.e. `∬ |x - y| dμ dμ`.
    pub fn mean_abs_difference(&self) -> Result<f64> {
        Ok(match self {
            Measure::Discrete(d) => {
                let mut prefix_w = 0.0;
                let mut prefix_wx = 0.0;
                let mut acc = 0.0;
                for (&x, &w) in d.atoms.iter().zip(&d.weights) {
                    acc += w * (x * prefix_w - prefix_wx);
                    prefix_w += w;
                    prefix_wx += w * x;
                }
                2.0 * acc
            }
            Measure::Empirical(e) => sorted::mean_abs_difference(&e.values),
            Measure::GridQuantile(g) => sorted::mean_abs_difference(g.values()),
            Measure::Uniform { lo, hi } => (hi - lo) / 3.0,
            Measure::Gaussian { std, .. } => 2.0 * std / std::f64::consts::PI.sqrt(),
            Measure::Laplace { scale, .. } => 1.5 * scale,
            Measure::Exponential { rate } => 1.0 / rate,
            Measure::FoldedNormal { .. } | Measure::Mixture(_) => {
                // E|X - X'| = 2 ∫ R (1 - R) dx
                let (lo, hi) = self.effective_range(1e-13);
                let v = quad::integrate_one_sided(
                    |x, end| {
                        let r = if x >= end {
                            self.cdf_left(x)
                        } else {
                            self.cdf_right(x)
                        };
                        r * (1.0 - r)
                    },
                    lo,
                    hi,
                    &self.breakpoints(),
                    quad::TOL,
                )?;
                2.0 * v
            }
        })
    }

    /// Whether `supp μ` is an interval (or a single point).
    pub fn has_convex_support(&self) -> bool {
        match self {
            Measure::Discrete(d) => d.atoms.len() == 1,
            Measure::Empirical(e) => e.values[0] == *e.values.last().unwrap(),
            Measure::GridQuantile(g) => {
                let v = g.values();
                v[0] == v[v.len() - 1]
            }
            Measure::Mixture(m) => {
                let mut hulls = Vec::new();
                for (_, c) in m.active() {
                    if !c.has_convex_support() {
                        return false;
                    }
                    hulls.push(c.support_hull());
                }
                hulls.sort_by(|a, b| a.0.total_cmp(&b.0));
                let mut reach = hulls[0].1;
                for &(a, b) in &hulls[1..] {
                    if a > reach {
                        return false;
                    }
                    reach = reach.max(b);
                }
                true
            }
            _ => true,
        }
    }

    /// Whether the quantile function jumps at `s`, i.e. `s` lies on a flat
    /// piece of the CDF.
    pub fn is_quantile_jump(&self, s: f64) -> bool {
        match self {
            Measure::Discrete(d) => d.cum[..d.cum.len() - 1].contains(&s),
            Measure::Empirical(_) | Measure::GridQuantile(_) => {
                let v = match self {
                    Measure::Empirical(e) => e.values.as_slice(),
                    Measure::GridQuantile(g) => g.values(),
                    _ => unreachable!(),
                };
                let n = v.len();
                let k = (s * n as f64).round() as usize;
                k >= 1 && k < n && (k as f64 / n as f64) == s && v[k - 1] < v[k]
            }
            Measure::Mixture(_) => {
                let Ok(q) = self.quantile(s) else {
                    return false;
                };
                if self.cdf_right(q) > s {
                    return false;
                }
                let probe = q + 1e-9 * q.abs().max(1.0);
                self.cdf_right(probe) <= s
            }
            _ => false,
        }
    }

    /// Largest lower Lipschitz constant `L_low(Q)`, which equals
    /// `1 / sup density` (zero when there are atoms).
    pub fn quantile_lower_lipschitz(&self) -> f64 {
        match *self {
            Measure::Uniform { lo, hi } => hi - lo,
            Measure::Gaussian { std, .. } => SQRT_2PI * std,
            Measure::Laplace { scale, .. } => 2.0 * scale,
            Measure::Exponential { rate } => 1.0 / rate,
            Measure::FoldedNormal { .. } | Measure::Mixture(_) => {
                if self.has_atoms() {
                    0.0
                } else {
                    let sup = self.density_extremum(true);
                    if sup > 0.0 && sup.is_finite() {
                        1.0 / sup
                    } else {
                        0.0
                    }
                }
            }
            _ => 0.0,
        }
    }

    /// Smallest Lipschitz constant `Lip(Q)`; `+∞` when the quantile jumps or
    /// the support is unbounded.
    pub fn quantile_lipschitz(&self) -> f64 {
        let (lo, hi) = self.support_hull();
        if lo == hi {
            return 0.0;
        }
        if !lo.is_finite() || !hi.is_finite() || !self.has_convex_support() || self.has_atoms() {
            return f64::INFINITY;
        }
        match *self {
            Measure::Uniform { lo, hi } => hi - lo,
            _ => {
                let inf = self.density_extremum(false);
                if inf > 0.0 {
                    1.0 / inf
                } else {
                    f64::INFINITY
                }
            }
        }
    }

    // sup (or inf over the hull) of the density by a dense scan refined with
    // golden-section search.
    fn density_extremum(&self, maximize: bool) -> f64 {
        let (lo, hi) = self.effective_range(1e-9);
        let f = |x: f64| {
            let d = self.density(x).unwrap_or(f64::INFINITY);
            if maximize {
                d
            } else {
                -d
            }
        };
        let bps = self.breakpoints();
        let mut candidates: Vec<f64> = (0..=4000)
            .map(|i| lo + (hi - lo) * (i as f64 + 0.5) / 4001.0)
            .collect();
        for w in bps.windows(2) {
            candidates.push(0.5 * (w[0] + w[1]));
        }
        // the density is ambiguous on breakpoints, so they are never sampled
        let on_breakpoint = |x: f64| bps.iter().any(|&p| (p - x).abs() <= 1e-9 * (1.0 + p.abs()));
        candidates.retain(|&x| !on_breakpoint(x));
        let h = (hi - lo) / 4001.0;
        let (best, _) =
            candidates
                .iter()
                .map(|&x| (x, f(x)))
                .fold(
                    (lo, f64::NEG_INFINITY),
                    |acc, c| if c.1 > acc.1 { c } else { acc },
                );
        // golden section on [best - h, best + h], kept inside the range
        let (mut a, mut b) = ((best - h).max(lo), (best + h).min(hi));
        let g = 0.5 * (5f64.sqrt() - 1.0);
        let mut c = b - g * (b - a);
        let mut d = a + g * (b - a);
        for _ in 0..100 {
            if f(c) > f(d) {
                b = d;
            } else {
                a = c;
            }
            c = b - g * (b - a);
            d = a + g * (b - a);
        }
        let x = 0.5 * (a + b);
        let refined = if on_breakpoint(x) {
            f(best)
        } else {
            f(x).max(f(best))
        };
        if maximize {
            refined
        } else {
            -refined
        }
    }
}

impl fmt::Display for Measure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fn list(v: &[f64]) -> String {
            v.iter()
                .map(|x| format!("{x:?}"))
                .collect::<Vec<_>>()
                .join(",")
        }
        match self {
            Measure::Discrete(d) if d.atoms.len() == 1 => write!(f, "dirac({:?})", d.atoms[0]),
            Measure::Discrete(d) => write!(
                f,
                "discrete(x=[{}],w=[{}])",
                list(&d.atoms),
                list(&d.weights)
            ),
            Measure::Uniform { lo, hi } => write!(f, "uniform({lo:?},{hi:?})"),
            Measure::Gaussian { mean, std } => write!(f, "gaussian(mean={mean:?},std={std:?})"),
            Measure::Laplace { loc, scale } => write!(f, "laplace(loc={loc:?},scale={scale:?})"),
            Measure::FoldedNormal { loc, scale } => {
                write!(f, "folded_normal(loc={loc:?},scale={scale:?})")
            }
            Measure::Exponential { rate } => write!(f, "exponential(rate={rate:?})"),
            Measure::Mixture(m) => {
                write!(f, "mixture(")?;
                for (i, (w, c)) in m.weights.iter().zip(&m.components).enumerate() {
                    if i > 0 {
                        write!(f, "+")?;
                    }
                    write!(f, "{w:?}*{c}")?;
                }
                write!(f, ")")
            }
            Measure::Empirical(e) => write!(f, "empirical(x=[{}])", list(&e.values)),
            Measure::GridQuantile(g) => write!(f, "empirical(x=[{}])", list(g.values())),
        }
    }
}

// Total order on finite floats as integers.
fn float_key(x: f64) -> i64 {
    let b = x.to_bits() as i64;
    if b < 0 {
        i64::MIN - b
    } else {
        b
    }
}

fn key_float(k: i64) -> f64 {
    f64::from_bits(if k < 0 {
        (i64::MIN - k) as u64
    } else {
        k as u64
    })
}

// Smallest float where the monotone predicate holds, searched outward from
// `guess` by galloping and then bisection over the float ordering.
fn smallest_float_where(pred: impl Fn(f64) -> bool, guess: f64) -> f64 {
    let g = float_key(guess);
    let (mut lo, mut hi);
    if pred(guess) {
        hi = g;
        let mut step = 1i64;
        loop {
            lo = hi.saturating_sub(step);
            if !pred(key_float(lo)) || step > 1 << 52 {
                break;
            }
            hi = lo;
            step *= 2;
        }
    } else {
        lo = g;
        let mut step = 1i64;
        loop {
            hi = lo.saturating_add(step);
            if pred(key_float(hi)) || step > 1 << 52 {
                break;
            }
            lo = hi;
            step *= 2;
        }
    }
    if !pred(key_float(hi)) || pred(key_float(lo)) {
        return guess;
    }
    while hi - lo > 1 {
        let mid = lo + (hi - lo) / 2;
        if pred(key_float(mid)) {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    key_float(hi)
}
