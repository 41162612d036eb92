//! Time stepping for `g'(t) ∈ -∂F_ν(g(t))`.
//!
//! | Scheme | Per-point update |
//! |---|---|
//! | [`Scheme::ImplicitEuler`] | resolvent by bisection on a fixed lattice |
//! | [`Scheme::ExplicitEuler`] | `g - τ(2R_ν(g) - 2s)`, continuous targets only |
//! | [`Scheme::ClosedFormDiscrete`] | exact piecewise linear paths for atomic targets |
//! | [`Scheme::PointwiseODE`] | exact solution by inverting `Φ_{ν,s}` |
//!
//! The two exact schemes are evaluated directly at every output time, so they
//! carry no accumulated time-stepping error.

mod closed_form;
mod explicit;
mod implicit;
mod pointwise;

pub use closed_form::{closed_form_discrete, closed_form_point};
pub use explicit::{explicit_euler_step, MonotonicityPolicy};
pub use implicit::{implicit_euler_step, implicit_euler_step_with};
pub use pointwise::pointwise_ode_solve;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::functional::{functional_f, w2_distance};
use crate::grid::QuantileGrid;
use crate::measure::Measure;
use crate::target::Target;

/// Default lattice spacing of the implicit solver.
pub const DEFAULT_BISECT_ATOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Scheme {
    ImplicitEuler,
    ExplicitEuler,
    ClosedFormDiscrete,
    PointwiseODE,
}

impl Scheme {
    pub fn name(self) -> &'static str {
        match self {
            Scheme::ImplicitEuler => "implicit",
            Scheme::ExplicitEuler => "explicit",
            Scheme::ClosedFormDiscrete => "closed-form",
            Scheme::PointwiseODE => "pointwise",
        }
    }

    /// Whether states are computed exactly at each output time.
    pub fn is_exact(self) -> bool {
        matches!(self, Scheme::ClosedFormDiscrete | Scheme::PointwiseODE)
    }
}

impl std::str::FromStr for Scheme {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().replace('_', "-").as_str() {
            "implicit" | "implicit-euler" => Ok(Scheme::ImplicitEuler),
            "explicit" | "explicit-euler" => Ok(Scheme::ExplicitEuler),
            "closed-form" | "closed-form-discrete" | "closedform" | "exact-discrete" => {
                Ok(Scheme::ClosedFormDiscrete)
            }
            "pointwise" | "pointwise-ode" | "ode" => Ok(Scheme::PointwiseODE),
            other => Err(Error::Config(format!(
                "unknown scheme '{other}'; expected implicit, explicit, closed-form or pointwise"
            ))),
        }
    }
}

impl std::fmt::Display for Scheme {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

/// Which steps keep a full state.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Snapshots {
    /// Every `k`-th step.
    Stride(usize),
    /// The listed steps (those beyond the last step are ignored).
    Steps(Vec<usize>),
}

impl Snapshots {
    fn keeps(&self, step: usize, last: usize) -> bool {
        step == 0
            || step == last
            || match self {
                Snapshots::Stride(k) => step % (*k).max(1) == 0,
                Snapshots::Steps(v) => v.contains(&step),
            }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolverConfig {
    pub scheme: Scheme,
    pub tau: f64,
    pub n: usize,
    pub t_end: f64,
    pub bisect_atol: f64,
    pub monotonicity_policy: MonotonicityPolicy,
    pub snapshots: Snapshots,
}

impl SolverConfig {
    pub fn new(scheme: Scheme, tau: f64, n: usize, t_end: f64) -> Result<Self> {
        let cfg = Self {
            scheme,
            tau,
            n,
            t_end,
            bisect_atol: DEFAULT_BISECT_ATOL,
            monotonicity_policy: MonotonicityPolicy::Warn,
            snapshots: Snapshots::Stride(1),
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn with_snapshots(mut self, snapshots: Snapshots) -> Self {
        self.snapshots = snapshots;
        self
    }

    pub fn with_policy(mut self, policy: MonotonicityPolicy) -> Self {
        self.monotonicity_policy = policy;
        self
    }

    pub fn with_bisect_atol(mut self, atol: f64) -> Self {
        self.bisect_atol = atol;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.tau > 0.0 && self.tau.is_finite()) {
            return Err(Error::Config(format!(
                "tau must be positive, got {}",
                self.tau
            )));
        }
        if self.n < 2 {
            return Err(Error::Config(format!(
                "n must be at least 2, got {}",
                self.n
            )));
        }
        if !(self.t_end >= 0.0 && self.t_end.is_finite()) {
            return Err(Error::Config(format!(
                "t_end must be nonnegative, got {}",
                self.t_end
            )));
        }
        if !(self.bisect_atol > 0.0 && self.bisect_atol.is_finite()) {
            return Err(Error::Config(format!(
                "bisect_atol must be positive, got {}",
                self.bisect_atol
            )));
        }
        if let Snapshots::Stride(0) = self.snapshots {
            return Err(Error::Config("snapshot stride must be positive".into()));
        }
        Ok(())
    }

    /// Number of steps needed to reach `t_end`; the last one may be shorter.
    pub fn n_steps(&self) -> usize {
        if self.t_end == 0.0 {
            0
        } else {
            ((self.t_end / self.tau) - 1e-9).ceil().max(1.0) as usize
        }
    }

    /// Time of step `k`, computed without accumulation.
    pub fn time_of(&self, k: usize) -> f64 {
        if k >= self.n_steps() {
            self.t_end
        } else {
            k as f64 * self.tau
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepDiagnostics {
    pub step: usize,
    pub time: f64,
    pub f: f64,
    pub w2_to_target: f64,
    pub mono_violations: usize,
    /// Extrapolated endpoints of the range of the state.
    pub supp_lo: f64,
    pub supp_hi: f64,
}

impl StepDiagnostics {
    pub fn of(
        step: usize,
        time: f64,
        g: &QuantileGrid,
        t: &Target,
        target_grid: &QuantileGrid,
    ) -> Self {
        Self {
            step,
            time,
            f: functional_f(g, t),
            w2_to_target: w2_distance(g, target_grid).unwrap_or(f64::NAN),
            mono_violations: g.violations(),
            supp_lo: g.support_endpoints().0,
            supp_hi: g.support_endpoints().1,
        }
    }
}

/// Output of [`run_flow`]; `states[k]` is the grid at `times[k]`, reached
/// after `steps[k]` steps.
#[derive(Debug, Clone, PartialEq)]
pub struct FlowTrajectory {
    pub scheme: Scheme,
    pub tau: f64,
    pub times: Vec<f64>,
    pub steps: Vec<usize>,
    pub states: Vec<QuantileGrid>,
    /// Every step for the time-stepping schemes, snapshots only for the
    /// exact ones.
    pub diagnostics: Vec<StepDiagnostics>,
    /// The initial measure, when known.
    pub mu0: Option<Measure>,
}

impl FlowTrajectory {
    pub fn initial(&self) -> &QuantileGrid {
        &self.states[0]
    }

    pub fn last(&self) -> &QuantileGrid {
        self.states.last().expect("trajectory is never empty")
    }

    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }

    /// State stored for step `k`, if it was kept.
    pub fn state_at_step(&self, k: usize) -> Option<&QuantileGrid> {
        self.steps
            .iter()
            .position(|&s| s == k)
            .map(|i| &self.states[i])
    }

    pub fn n(&self) -> usize {
        self.states[0].n()
    }
}

/// Runs a flow from `mu0` to `t_end`.
pub fn run_flow(mu0: &Measure, t: &Target, cfg: &SolverConfig) -> Result<FlowTrajectory> {
    let g0 = mu0.sample_quantile_grid(cfg.n)?;
    let mut traj = run_flow_from_grid(g0, t, cfg)?;
    traj.mu0 = Some(mu0.clone());
    Ok(traj)
}

/// Runs a flow from an explicit initial grid.
pub fn run_flow_from_grid(
    g0: QuantileGrid,
    t: &Target,
    cfg: &SolverConfig,
) -> Result<FlowTrajectory> {
    cfg.validate()?;
    if g0.n() != cfg.n {
        return Err(Error::DimensionMismatch(g0.n(), cfg.n));
    }
    match cfg.scheme {
        Scheme::ExplicitEuler if t.has_atoms() => return Err(Error::AtomicTarget),
        Scheme::ClosedFormDiscrete if t.atoms().is_none() => return Err(Error::NotDiscreteTarget),
        _ => {}
    }
    let target_grid = t.measure().sample_quantile_grid(cfg.n)?;
    let last = cfg.n_steps();
    let mut traj = FlowTrajectory {
        scheme: cfg.scheme,
        tau: cfg.tau,
        times: vec![0.0],
        steps: vec![0],
        states: vec![g0.clone()],
        diagnostics: vec![StepDiagnostics::of(0, 0.0, &g0, t, &target_grid)],
        mu0: None,
    };

    if cfg.scheme.is_exact() {
        let kept: Vec<usize> = (1..=last)
            .filter(|&k| cfg.snapshots.keeps(k, last))
            .collect();
        let states = kept
            .iter()
            .map(|&k| exact_state(&g0, t, cfg, cfg.time_of(k)).map_err(|e| e.at_step(k)))
            .collect::<Result<Vec<_>>>()?;
        for (k, g) in kept.into_iter().zip(states) {
            let time = cfg.time_of(k);
            traj.diagnostics
                .push(StepDiagnostics::of(k, time, &g, t, &target_grid));
            traj.times.push(time);
            traj.steps.push(k);
            traj.states.push(g);
        }
        return Ok(traj);
    }

    let mut g = g0;
    for k in 1..=last {
        let dt = cfg.time_of(k) - cfg.time_of(k - 1);
        // explicit steps report the violations seen before any projection
        let (next, violations) = match cfg.scheme {
            Scheme::ImplicitEuler => {
                implicit_euler_step_with(&g, t, dt, cfg.bisect_atol).map(|h| (h, None))
            }
            Scheme::ExplicitEuler => {
                explicit_euler_step(&g, t, dt, cfg.monotonicity_policy).map(|(h, v)| (h, Some(v)))
            }
            _ => unreachable!(),
        }
        .map_err(|e| e.at_step(k))?;
        g = next;
        let time = cfg.time_of(k);
        let mut d = StepDiagnostics::of(k, time, &g, t, &target_grid);
        if let Some(v) = violations {
            d.mono_violations = v;
        }
        traj.diagnostics.push(d);
        if cfg.snapshots.keeps(k, last) {
            traj.times.push(time);
            traj.steps.push(k);
            traj.states.push(g.clone());
        }
    }
    Ok(traj)
}

fn exact_state(
    g0: &QuantileGrid,
    t: &Target,
    cfg: &SolverConfig,
    time: f64,
) -> Result<QuantileGrid> {
    match cfg.scheme {
        Scheme::ClosedFormDiscrete => closed_form_discrete(g0, t, time),
        Scheme::PointwiseODE => {
            let n = g0.n();
            let values = (0..n)
                .into_par_iter()
                .map(|i| pointwise_ode_solve(g0.values()[i], t, QuantileGrid::level(i, n), time))
                .collect::<Result<Vec<_>>>()?;
            QuantileGrid::new(values)
        }
        _ => unreachable!(),
    }
}
