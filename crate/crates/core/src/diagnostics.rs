//! Lipschitz estimates of grid states and the smoothing/invariance checks.
//!
//! For a target with `L_low(Q_ν) > 0` the flow satisfies
//!
//! ```text
//! L_low(g(t)) ≥ L_low(g₀) e^{-2t/L_low(Q_ν)} + L_low(Q_ν)(1 - e^{-2t/L_low(Q_ν)})
//! ```
//!
//! and, when `supp ν = [a, b]` contains the convex support of `μ₀`, the same
//! expression with `Lip` bounds `Lip(g(t))` from above.

use std::fmt;

use crate::error::{Error, Result};
use crate::grid::QuantileGrid;
use crate::measure::Measure;
use crate::solver::{FlowTrajectory, Scheme};
use crate::target::Target;

/// Slack of the support and hull checks.
pub const SUPPORT_SLACK: f64 = 1e-9;

/// Grid estimates of `L_low` and `Lip` from adjacent difference quotients.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LipschitzReport {
    pub l_low: f64,
    pub lip: f64,
}

pub fn lipschitz_estimate(g: &QuantileGrid) -> LipschitzReport {
    let n = g.n() as f64;
    let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
    for w in g.values().windows(2) {
        let q = n * (w[1] - w[0]);
        lo = lo.min(q);
        hi = hi.max(q);
    }
    LipschitzReport {
        l_low: lo.max(0.0),
        lip: hi.max(0.0),
    }
}

fn decay_mix(t: f64, start: f64, limit: f64) -> f64 {
    let e = (-2.0 * t / limit).exp();
    start * e + limit * (1.0 - e)
}

/// Lower bound on `L_low(g(t))`.
pub fn smoothing_bound(t: f64, l_low_g0: f64, l_low_qnu: f64) -> Result<f64> {
    if !(l_low_qnu > 0.0 && l_low_qnu.is_finite()) {
        return Err(Error::Domain(format!(
            "L_low(Q_nu) must be positive and finite, got {l_low_qnu}"
        )));
    }
    if !(t >= 0.0) || !(l_low_g0 >= 0.0) {
        return Err(Error::Domain(format!(
            "need t >= 0 and L_low(g0) >= 0, got {t}, {l_low_g0}"
        )));
    }
    Ok(decay_mix(t, l_low_g0, l_low_qnu))
}

/// Upper bound on `Lip(g(t))`.
pub fn lip_invariance_bound(t: f64, lip_g0: f64, lip_qnu: f64) -> Result<f64> {
    if !(lip_qnu >= 0.0 && lip_qnu.is_finite()) {
        return Err(Error::Domain(format!(
            "Lip(Q_nu) must be finite and nonnegative, got {lip_qnu}"
        )));
    }
    if !(t >= 0.0) || !(lip_g0 >= 0.0) {
        return Err(Error::Domain(format!(
            "need t >= 0 and Lip(g0) >= 0, got {t}, {lip_g0}"
        )));
    }
    if t == 0.0 {
        return Ok(lip_g0);
    }
    if lip_qnu == 0.0 {
        // single-atom target: only a start on that atom is covered
        return if lip_g0 == 0.0 {
            Ok(0.0)
        } else {
            Err(Error::Domain("Lip(Q_nu) = 0 requires Lip(g0) = 0".into()))
        };
    }
    Ok(decay_mix(t, lip_g0, lip_qnu))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum CheckKind {
    /// `min g` nonincreasing and `max g` nondecreasing in time.
    SupportMonotone,
    /// All values inside the joint hull of `μ₀` and `ν`.
    HullConfinement,
    /// `L_low(g(t))` above the smoothing bound.
    Smoothing,
    /// `Lip(g(t))` below the invariance bound.
    LipInvariance,
}

impl CheckKind {
    pub fn name(self) -> &'static str {
        match self {
            CheckKind::SupportMonotone => "support_monotone",
            CheckKind::HullConfinement => "hull_confinement",
            CheckKind::Smoothing => "smoothing",
            CheckKind::LipInvariance => "lip_invariance",
        }
    }

    pub fn from_name(s: &str) -> Option<Self> {
        [
            Self::SupportMonotone,
            Self::HullConfinement,
            Self::Smoothing,
            Self::LipInvariance,
        ]
        .into_iter()
        .find(|k| k.name() == s)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CheckStatus {
    Pass,
    Fail,
    Skipped,
}

impl CheckStatus {
    pub fn name(self) -> &'static str {
        match self {
            CheckStatus::Pass => "pass",
            CheckStatus::Fail => "fail",
            CheckStatus::Skipped => "skipped",
        }
    }

    pub fn from_name(s: &str) -> Option<Self> {
        [Self::Pass, Self::Fail, Self::Skipped]
            .into_iter()
            .find(|k| k.name() == s)
    }
}

impl fmt::Display for CheckStatus {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// One evaluated bound. For lower bounds `pass ⇔ observed ≥ bound - slack`,
/// for upper bounds `pass ⇔ observed ≤ bound + slack`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundCheck {
    pub kind: CheckKind,
    pub time: f64,
    pub observed: f64,
    pub bound: f64,
    pub slack: f64,
    pub status: CheckStatus,
}

impl BoundCheck {
    fn upper(kind: CheckKind, time: f64, observed: f64, bound: f64, slack: f64) -> Self {
        let status = if observed <= bound + slack {
            CheckStatus::Pass
        } else {
            CheckStatus::Fail
        };
        Self {
            kind,
            time,
            observed,
            bound,
            slack,
            status,
        }
    }

    fn lower(kind: CheckKind, time: f64, observed: f64, bound: f64, slack: f64) -> Self {
        let status = if observed >= bound - slack {
            CheckStatus::Pass
        } else {
            CheckStatus::Fail
        };
        Self {
            kind,
            time,
            observed,
            bound,
            slack,
            status,
        }
    }

    fn skipped(kind: CheckKind, time: f64, observed: f64, bound: f64, slack: f64) -> Self {
        Self {
            kind,
            time,
            observed,
            bound,
            slack,
            status: CheckStatus::Skipped,
        }
    }

    pub fn passed(&self) -> bool {
        self.status == CheckStatus::Pass
    }

    pub fn failed(&self) -> bool {
        self.status == CheckStatus::Fail
    }
}

/// Slack used for the Lipschitz bounds on an `n`-point grid.
pub fn grid_slack(n: usize) -> f64 {
    2.0 / n as f64 + 1e-6
}

/// Evaluates the support, hull, smoothing and Lipschitz checks on a
/// trajectory. Checks whose hypotheses fail are reported as skipped.
///
/// The support check uses the per-step diagnostics when present; the other
/// checks use the stored states.
pub fn check_trajectory(traj: &FlowTrajectory, t: &Target) -> Vec<BoundCheck> {
    let mut out = Vec::new();
    if traj.is_empty() {
        return out;
    }
    let g0 = traj.initial();
    let n = g0.n();
    let slack = grid_slack(n);

    // (a) support monotonicity, asserted for a convex initial support. A side
    // on which the initial support is unbounded stays unbounded, so only the
    // finite sides are compared.
    let convex0 = match &traj.mu0 {
        Some(m) => m.has_convex_support(),
        None => initial_grid_looks_continuous(g0),
    };
    let (a0, b0) = match &traj.mu0 {
        Some(m) => m.support_hull(),
        None => (g0.first(), g0.last()),
    };
    let supp: Vec<(f64, f64, f64)> = if traj.diagnostics.is_empty() {
        traj.times
            .iter()
            .zip(&traj.states)
            .map(|(&tm, g)| {
                let (lo, hi) = g.support_endpoints();
                (tm, lo, hi)
            })
            .collect()
    } else {
        traj.diagnostics
            .iter()
            .map(|d| (d.time, d.supp_lo, d.supp_hi))
            .collect()
    };
    // on coarse grids the extrapolated endpoints wobble by their own
    // truncation error, estimated on the stored states
    let extrapolation = traj
        .states
        .iter()
        .map(QuantileGrid::support_extrapolation_error)
        .map(|(lo, hi)| {
            let lo = if a0.is_finite() { lo } else { 0.0 };
            let hi = if b0.is_finite() { hi } else { 0.0 };
            lo.max(hi)
        })
        .fold(0.0, f64::max);
    let support_slack = SUPPORT_SLACK + 2.0 * extrapolation;
    for w in supp.windows(2) {
        let (_, lo0, hi0) = w[0];
        let (tm, lo1, hi1) = w[1];
        let lo_excess = if a0.is_finite() { lo1 - lo0 } else { 0.0 };
        let hi_excess = if b0.is_finite() { hi0 - hi1 } else { 0.0 };
        let excess = lo_excess.max(hi_excess).max(0.0);
        out.push(if convex0 {
            BoundCheck::upper(CheckKind::SupportMonotone, tm, excess, 0.0, support_slack)
        } else {
            BoundCheck::skipped(CheckKind::SupportMonotone, tm, excess, 0.0, support_slack)
        });
    }

    // (b) confinement of every stored value to the joint hull
    let (na, nb) = t.hull();
    let (a, b) = (a0.min(na), b0.max(nb));
    for (&tm, g) in traj.times.iter().zip(&traj.states).skip(1) {
        let excess = (a - g.first()).max(g.last() - b).max(0.0);
        out.push(if a.is_finite() && b.is_finite() {
            BoundCheck::upper(CheckKind::HullConfinement, tm, excess, 0.0, SUPPORT_SLACK)
        } else {
            BoundCheck::skipped(CheckKind::HullConfinement, tm, excess, 0.0, SUPPORT_SLACK)
        });
    }

    // (c) smoothing and (d) Lipschitz invariance on the stored states
    let rep0 = lipschitz_estimate(g0);
    let lq = t.l_low_q();
    let lipq = t.lip_q();
    let nu = t.measure();
    let lip_hypotheses = lipq.is_finite()
        && nu.has_convex_support()
        && convex0
        && a0 >= na - SUPPORT_SLACK
        && b0 <= nb + SUPPORT_SLACK
        && rep0.lip.is_finite();
    for ((&tm, &k), g) in traj.times.iter().zip(&traj.steps).zip(&traj.states).skip(1) {
        let rep = lipschitz_estimate(g);
        let gap = |start: f64, limit: f64| stepping_gap(traj.scheme, traj.tau, k, tm, start, limit);
        out.push(match smoothing_bound(tm, rep0.l_low, lq) {
            Ok(bound) => {
                let slack = slack + gap(rep0.l_low, lq);
                BoundCheck::lower(CheckKind::Smoothing, tm, rep.l_low, bound, slack)
            }
            Err(_) => BoundCheck::skipped(CheckKind::Smoothing, tm, rep.l_low, f64::NAN, slack),
        });
        out.push(match lip_invariance_bound(tm, rep0.lip, lipq) {
            Ok(bound) if lip_hypotheses => {
                let slack = slack + gap(rep0.lip, lipq);
                BoundCheck::upper(CheckKind::LipInvariance, tm, rep.lip, bound, slack)
            }
            Ok(bound) => BoundCheck::skipped(CheckKind::LipInvariance, tm, rep.lip, bound, slack),
            Err(_) => BoundCheck::skipped(CheckKind::LipInvariance, tm, rep.lip, f64::NAN, slack),
        });
    }
    out.sort_by(|x, y| x.time.total_cmp(&y.time));
    out
}

// Both bounds relax from `start` towards `limit` by the factor e^{-2t/limit}.
// Euler steps contract by (1 + 2τ/limit)⁻¹ (implicit) or (1 - 2τ/limit)
// (explicit) per step instead; the difference of the two bounds after `k`
// steps ending at time `t` is returned. Zero for the exact schemes.
fn stepping_gap(scheme: Scheme, tau: f64, k: usize, t: f64, start: f64, limit: f64) -> f64 {
    if k == 0 || start == limit || !(limit > 0.0) || !limit.is_finite() {
        return 0.0;
    }
    let per_step = |dt: f64| match scheme {
        Scheme::ImplicitEuler => 1.0 / (1.0 + 2.0 * dt / limit),
        _ => 1.0 - 2.0 * dt / limit,
    };
    let discrete = match scheme {
        Scheme::ImplicitEuler | Scheme::ExplicitEuler => {
            let last = t - (k - 1) as f64 * tau;
            per_step(tau).powi((k - 1) as i32) * per_step(last)
        }
        Scheme::ClosedFormDiscrete | Scheme::PointwiseODE => return 0.0,
    };
    let gap = (start - limit).abs() * (discrete - (-2.0 * t / limit).exp()).abs();
    if gap.is_finite() {
        gap
    } else {
        0.0
    }
}

// Without the initial measure, a grid is read as having convex support when
// no jump between neighbours exceeds a tenth of its range.
fn initial_grid_looks_continuous(g: &QuantileGrid) -> bool {
    let range = g.last() - g.first();
    range == 0.0 || g.values().windows(2).all(|w| w[1] - w[0] <= 0.1 * range)
}

// Deterministic low-discrepancy probes in (0, 1).
fn probe(k: usize, alpha: f64) -> f64 {
    ((k as f64 + 1.0) * alpha).fract().clamp(1e-6, 1.0 - 1e-6)
}

/// Checks the duality between Lipschitz bounds of `Q_μ` and of its CDF on
/// `n_probe` deterministic pairs: `Q_μ` has lower constant `L` exactly when
/// `R_μ` is `1/L`-Lipschitz, and `Q_μ` is `M`-Lipschitz exactly when `R_μ⁺`
/// grows at least like `1/M` on the support hull.
pub fn duality_check(m: &Measure, n_probe: usize) -> bool {
    const PHI: f64 = 0.618_033_988_749_894_8;
    const SQRT2M1: f64 = 0.414_213_562_373_095_1;
    const MIN_SEP: f64 = 1e-4;
    let rel = |v: f64| 1e-9 * v.abs().max(1.0);

    let l = m.quantile_lower_lipschitz();
    let lip = m.quantile_lipschitz();
    let (xlo, xhi) = m.effective_range(1e-9);
    let (hlo, hhi) = m.support_hull();

    let mut q_lower_ok = true;
    let mut r_upper_ok = true;
    let mut q_upper_ok = true;
    let mut r_lower_ok = true;
    for k in 0..n_probe {
        let (s1, s2) = (probe(k, PHI), probe(k, SQRT2M1));
        if (s1 - s2).abs() >= MIN_SEP {
            let (Ok(q1), Ok(q2)) = (m.quantile(s1), m.quantile(s2)) else {
                return false;
            };
            let quot = (q1 - q2) / (s1 - s2);
            if l > 0.0 && quot < l - rel(l) {
                q_lower_ok = false;
            }
            if lip.is_finite() && quot > lip + rel(lip) {
                q_upper_ok = false;
            }
        }
        let x1 = xlo + (xhi - xlo) * probe(k, SQRT2M1);
        let x2 = xlo + (xhi - xlo) * probe(k, PHI);
        if (x1 - x2).abs() >= MIN_SEP * (xhi - xlo).max(1e-300) {
            let quot = (m.cdf_right(x1) - m.cdf_right(x2)) / (x1 - x2);
            if l > 0.0 && quot > 1.0 / l + rel(1.0 / l) {
                r_upper_ok = false;
            }
            let inside = x1.min(x2) >= hlo && x1.max(x2) <= hhi;
            if lip.is_finite() && lip > 0.0 && inside && quot < 1.0 / lip - rel(1.0 / lip) {
                r_lower_ok = false;
            }
        }
    }
    q_lower_ok && r_upper_ok && q_upper_ok && r_lower_ok
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::solver::{run_flow, Scheme, SolverConfig};

    #[test]
    fn stepping_gap_is_first_order() {
        let gap = |tau: f64| {
            stepping_gap(
                Scheme::ImplicitEuler,
                tau,
                (1.0 / tau) as usize,
                1.0,
                0.0,
                1.0,
            )
        };
        let (a, b) = (gap(0.01), gap(0.005));
        assert!(a > 0.0 && (a / b - 2.0).abs() < 0.05, "{a} {b}");
        assert_eq!(
            stepping_gap(Scheme::ClosedFormDiscrete, 0.1, 10, 1.0, 0.0, 1.0),
            0.0
        );
        // implicit Euler from δ₀ towards U[0,1]: L_k = 1 - (1 + 2τ)^{-k} exactly
        let discrete = 1.0 - 1.2f64.powi(-2);
        let bound = smoothing_bound(0.2, 0.0, 1.0).unwrap();
        assert!(
            (bound - discrete - stepping_gap(Scheme::ImplicitEuler, 0.1, 2, 0.2, 0.0, 1.0)).abs()
                < 1e-15
        );
    }

    #[test]
    fn coarse_implicit_run_passes_checks() {
        let mu0 = Measure::exponential(2.0).unwrap();
        let t = Target::new(Measure::uniform(0.0, 1.0).unwrap());
        for (tau, n) in [(0.1, 1000), (0.1, 50)] {
            let cfg = SolverConfig::new(Scheme::ImplicitEuler, tau, n, 0.5).unwrap();
            let traj = run_flow(&mu0, &t, &cfg).unwrap();
            let failed: Vec<_> = check_trajectory(&traj, &t)
                .into_iter()
                .filter(|c| c.failed())
                .collect();
            assert!(failed.is_empty(), "tau {tau}, n {n}: {failed:?}");
        }
    }

    #[test]
    fn lipschitz_examples() {
        let u = Measure::uniform(2.0, 5.0)
            .unwrap()
            .sample_quantile_grid(1000)
            .unwrap();
        let r = lipschitz_estimate(&u);
        assert!((r.l_low - 3.0).abs() < 1e-9 && (r.lip - 3.0).abs() < 1e-9);
        let d = Measure::dirac(0.0).sample_quantile_grid(10).unwrap();
        assert_eq!(
            lipschitz_estimate(&d),
            LipschitzReport {
                l_low: 0.0,
                lip: 0.0
            }
        );
        let n = 1000;
        let k = QuantileGrid::from_fn(n, |s| (2.0 * s - 1.0).min(0.0)).unwrap();
        let r = lipschitz_estimate(&k);
        assert_eq!(r.l_low, 0.0);
        assert!((r.lip - 2.0).abs() <= 2.0 / n as f64);
    }

    #[test]
    fn bound_examples() {
        assert_eq!(smoothing_bound(0.0, 0.3, 1.0).unwrap(), 0.3);
        for t in [0.1, 1.0, 3.0] {
            assert!(
                (smoothing_bound(t, 0.0, 1.0).unwrap() - (1.0 - (-2.0 * t).exp())).abs() < 1e-15
            );
        }
        assert!((smoothing_bound(50.0 * 2.0, 0.0, 2.0).unwrap() - 2.0).abs() < 1e-12);
        assert!(smoothing_bound(1.0, 0.0, 0.0).is_err());

        assert_eq!(lip_invariance_bound(0.0, 0.7, 1.0).unwrap(), 0.7);
        assert!((lip_invariance_bound(2.0, 1.5, 1.5).unwrap() - 1.5).abs() < 1e-15);
        assert!((lip_invariance_bound(2f64.ln(), 1.0, 2.0).unwrap() - 1.5).abs() < 1e-15);
        assert_eq!(lip_invariance_bound(1.0, 0.0, 0.0).unwrap(), 0.0);
        assert!(lip_invariance_bound(1.0, 1.0, 0.0).is_err());
        assert!(lip_invariance_bound(1.0, 1.0, f64::INFINITY).is_err());
    }

    #[test]
    fn duality_examples() {
        assert!(duality_check(&Measure::uniform(0.0, 1.0).unwrap(), 500));
        assert!(duality_check(&Measure::gaussian(0.0, 1.0).unwrap(), 500));
        assert!(duality_check(&Measure::dirac(0.0), 50));
        assert!(duality_check(&Measure::laplace(1.0, 0.5).unwrap(), 500));
        assert!(duality_check(&Measure::exponential(2.0).unwrap(), 500));
    }

    #[test]
    fn dirac_to_dirac_skips_lipschitz_checks() {
        let cfg = SolverConfig::new(Scheme::ClosedFormDiscrete, 0.1, 200, 2.0).unwrap();
        let t = Target::new(Measure::dirac(0.0));
        let traj = run_flow(&Measure::dirac(-1.0), &t, &cfg).unwrap();
        let checks = check_trajectory(&traj, &t);
        for c in &checks {
            match c.kind {
                CheckKind::SupportMonotone | CheckKind::HullConfinement => {
                    assert!(c.passed(), "{c:?}")
                }
                CheckKind::Smoothing | CheckKind::LipInvariance => {
                    assert_eq!(c.status, CheckStatus::Skipped)
                }
            }
        }
    }

    #[test]
    fn dirac_to_uniform_smoothing_is_sharp() {
        let n = 400;
        let cfg = SolverConfig::new(Scheme::ImplicitEuler, 1e-3, n, 1.0).unwrap();
        let t = Target::new(Measure::uniform(0.0, 1.0).unwrap());
        let traj = run_flow(&Measure::dirac(0.0), &t, &cfg).unwrap();
        let checks = check_trajectory(&traj, &t);
        let smoothing: Vec<_> = checks
            .iter()
            .filter(|c| c.kind == CheckKind::Smoothing)
            .collect();
        assert!(!smoothing.is_empty());
        for c in smoothing {
            assert!(c.passed(), "{c:?}");
            assert!((c.observed - c.bound).abs() <= c.slack, "{c:?}");
        }
        assert!(checks.iter().all(|c| !c.failed()));
    }

    #[test]
    fn stationary_trajectory_passes() {
        let nu = Measure::uniform(-1.0, 2.0).unwrap();
        let t = Target::new(nu.clone());
        let cfg = SolverConfig::new(Scheme::ImplicitEuler, 0.05, 300, 1.0).unwrap();
        let traj = run_flow(&nu, &t, &cfg).unwrap();
        let checks = check_trajectory(&traj, &t);
        assert!(
            checks.iter().all(|c| c.passed()),
            "{:?}",
            checks.iter().find(|c| !c.passed())
        );
    }
}
