//! Explicit Euler, `g ← g - τ(2R_ν(g) - 2s)`.

use crate::error::{Error, Result};
use crate::functional::gradient_continuous;
use crate::grid::QuantileGrid;
use crate::isotonic::project_monotone;
use crate::target::Target;

/// What to do when an explicit step leaves the monotone cone.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum MonotonicityPolicy {
    /// Fail with [`Error::Monotonicity`].
    Error,
    /// Keep the non-monotone state and report the violation count.
    #[default]
    Warn,
    /// Replace the state by its isotonic (least squares) projection.
    Project,
}

impl MonotonicityPolicy {
    pub fn name(self) -> &'static str {
        match self {
            Self::Error => "error",
            Self::Warn => "warn",
            Self::Project => "project",
        }
    }
}

impl std::str::FromStr for MonotonicityPolicy {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "error" => Ok(Self::Error),
            "warn" => Ok(Self::Warn),
            "project" => Ok(Self::Project),
            other => Err(Error::Config(format!(
                "unknown monotonicity policy '{other}'; expected error, warn or project"
            ))),
        }
    }
}

/// One explicit step. Returns the new grid and the number of monotonicity
/// violations of the raw update (before any projection).
pub fn explicit_euler_step(
    g: &QuantileGrid,
    t: &Target,
    tau: f64,
    policy: MonotonicityPolicy,
) -> Result<(QuantileGrid, usize)> {
    if !(tau > 0.0 && tau.is_finite()) {
        return Err(Error::Config(format!("tau must be positive, got {tau}")));
    }
    let grad = gradient_continuous(g, t)?;
    let values: Vec<f64> = g
        .values()
        .iter()
        .zip(&grad)
        .map(|(x, d)| x - tau * d)
        .collect();
    let next = QuantileGrid::new(values)?;
    let violations = next.violations();
    if violations == 0 {
        return Ok((next, 0));
    }
    match policy {
        MonotonicityPolicy::Error => Err(Error::Monotonicity { violations }),
        MonotonicityPolicy::Warn => Ok((next, violations)),
        MonotonicityPolicy::Project => Ok((
            QuantileGrid::new(project_monotone(next.values()))?,
            violations,
        )),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::measure::Measure;

    #[test]
    fn zero_gradient_at_target() {
        let nu = Measure::uniform(0.0, 1.0).unwrap();
        let g = nu.sample_quantile_grid(50).unwrap();
        let (h, v) =
            explicit_euler_step(&g, &Target::new(nu), 0.1, MonotonicityPolicy::Error).unwrap();
        assert_eq!(v, 0);
        assert!(h.sup_distance(&g).unwrap() < 1e-14);
    }

    #[test]
    fn symmetric_gradient_from_dirac() {
        let t = Target::new(Measure::gaussian(0.0, 1.0).unwrap());
        let g = QuantileGrid::new(vec![0.0; 10]).unwrap();
        let (h, _) = explicit_euler_step(&g, &t, 0.01, MonotonicityPolicy::Warn).unwrap();
        for (i, x) in h.values().iter().enumerate() {
            assert!((x - 0.02 * (g.midpoint(i) - 0.5)).abs() < 1e-16);
        }
    }

    #[test]
    fn atomic_target_rejected() {
        let g = QuantileGrid::new(vec![0.0; 4]).unwrap();
        assert_eq!(
            explicit_euler_step(
                &g,
                &Target::new(Measure::dirac(0.0)),
                0.1,
                MonotonicityPolicy::Warn
            ),
            Err(Error::AtomicTarget)
        );
    }

    #[test]
    fn large_steps_break_monotonicity() {
        let mu0 = Measure::mixture(
            vec![0.5, 0.5],
            vec![
                Measure::gaussian(-10.0, 1.0).unwrap(),
                Measure::gaussian(10.0, 1.0).unwrap(),
            ],
        )
        .unwrap();
        let t = Target::new(Measure::gaussian(0.0, 1.0).unwrap());
        let g = mu0.sample_quantile_grid(1000).unwrap();
        let mut cur = g.clone();
        let mut seen = 0;
        for _ in 0..5 {
            let (next, v) = explicit_euler_step(&cur, &t, 5.0, MonotonicityPolicy::Warn).unwrap();
            seen += v;
            cur = next;
        }
        assert!(seen > 0);
        let err = (0..5).try_fold(g.clone(), |cur, _| {
            explicit_euler_step(&cur, &t, 5.0, MonotonicityPolicy::Error).map(|r| r.0)
        });
        assert!(matches!(err, Err(Error::Monotonicity { .. })));
        let (p, v) = (0..5)
            .try_fold((g, 0), |(cur, acc), _| {
                explicit_euler_step(&cur, &t, 5.0, MonotonicityPolicy::Project)
                    .map(|(h, v)| (h, acc + v))
            })
            .unwrap();
        assert!(v > 0);
        assert!(p.is_monotone());
    }
}
