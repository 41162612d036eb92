//! The discretized flow state.

use crate::error::{Error, Result};

/// Values `g(sᵢ)` of a function on `(0, 1)` at the midpoints `sᵢ = (i + ½)/n`.
///
/// Finite values are enforced on construction. Monotonicity is not: explicit
/// Euler can leave the cone, and [`QuantileGrid::violations`] reports that.
#[derive(Debug, Clone, PartialEq)]
pub struct QuantileGrid {
    values: Vec<f64>,
}

impl QuantileGrid {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if values.len() < 2 {
            return Err(Error::Domain(format!(
                "grid size must be at least 2, got {}",
                values.len()
            )));
        }
        if let Some(index) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite { index });
        }
        Ok(Self { values })
    }

    /// Builds a grid from `f(sᵢ)`.
    pub fn from_fn(n: usize, f: impl Fn(f64) -> f64) -> Result<Self> {
        Self::new((0..n).map(|i| f(Self::level(i, n))).collect())
    }

    /// `sᵢ = (i + ½)/n`.
    #[inline]
    pub fn level(i: usize, n: usize) -> f64 {
        (i as f64 + 0.5) / n as f64
    }

    pub fn n(&self) -> usize {
        self.values.len()
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn midpoint(&self, i: usize) -> f64 {
        Self::level(i, self.n())
    }

    pub fn levels(&self) -> impl Iterator<Item = f64> + '_ {
        (0..self.n()).map(|i| self.midpoint(i))
    }

    /// Number of adjacent pairs with `g_{i+1} < g_i`.
    pub fn violations(&self) -> usize {
        self.values.windows(2).filter(|w| w[1] < w[0]).count()
    }

    /// Cone membership, with zero tolerance.
    pub fn is_monotone(&self) -> bool {
        self.violations() == 0
    }

    pub fn first(&self) -> f64 {
        self.values[0]
    }

    pub fn last(&self) -> f64 {
        self.values[self.values.len() - 1]
    }

    /// Estimates `g(0+)` and `g(1-)`, the endpoints of the closed range,
    /// by cubic extrapolation from the four outermost points on each side.
    ///
    /// The estimate is never inside `[g₀, g_{n-1}]`.
    pub fn support_endpoints(&self) -> (f64, f64) {
        let v = &self.values;
        let n = v.len();
        if n < 4 {
            let lo = v[0] - 0.5 * (v[1] - v[0]);
            let hi = v[n - 1] + 0.5 * (v[n - 1] - v[n - 2]);
            return (lo.min(v[0]), hi.max(v[n - 1]));
        }
        // Lagrange weights at 0 for nodes ½, 3/2, 5/2, 7/2
        const W: [f64; 4] = [2.1875, -2.1875, 1.3125, -0.3125];
        let lo: f64 = W.iter().zip(v).map(|(w, x)| w * x).sum();
        let hi: f64 = W.iter().zip(v.iter().rev()).map(|(w, x)| w * x).sum();
        (lo.min(v[0]), hi.max(v[n - 1]))
    }

    /// Size of the last term of each endpoint extrapolation, the gap between
    /// the cubic and the quadratic estimate. Zero below four points.
    pub fn support_extrapolation_error(&self) -> (f64, f64) {
        let v = &self.values;
        let n = v.len();
        if n < 4 {
            return (0.0, 0.0);
        }
        const W3: [f64; 4] = [2.1875, -2.1875, 1.3125, -0.3125];
        const W2: [f64; 3] = [1.875, -1.25, 0.375];
        let side = |x: &mut dyn Iterator<Item = f64>| {
            let x: Vec<f64> = x.take(4).collect();
            let c: f64 = W3.iter().zip(&x).map(|(w, x)| w * x).sum();
            let q: f64 = W2.iter().zip(&x).map(|(w, x)| w * x).sum();
            (c - q).abs()
        };
        (
            side(&mut v.iter().copied()),
            side(&mut v.iter().rev().copied()),
        )
    }

    pub(crate) fn check_same_size(&self, other: &Self) -> Result<()> {
        if self.n() != other.n() {
            return Err(Error::DimensionMismatch(self.n(), other.n()));
        }
        Ok(())
    }

    /// `(1/n) Σ aᵢ bᵢ`, the grid version of the `L2(0, 1)` inner product.
    pub fn inner(&self, other: &Self) -> Result<f64> {
        self.check_same_size(other)?;
        Ok(dot(&self.values, &other.values))
    }

    /// `max |aᵢ - bᵢ|`.
    pub fn sup_distance(&self, other: &Self) -> Result<f64> {
        self.check_same_size(other)?;
        Ok(self
            .values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max))
    }
}

/// `(1/n) Σ aᵢ bᵢ` for plain slices of equal length.
pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    debug_assert_eq!(a.len(), b.len());
    a.iter().zip(b).map(|(x, y)| x * y).sum::<f64>() / a.len() as f64
}
