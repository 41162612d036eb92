//! # mmdflow-core
//!
//! Wasserstein-2 gradient flows of the energy distance (MMD with the negative
//! distance kernel `K(x, y) = -|x - y|`) toward a fixed target measure on the
//! real line.
//!
//! In one dimension the Wasserstein space embeds isometrically into `L2(0, 1)`
//! through quantile functions, and the flow becomes the subgradient inclusion
//!
//! ```text
//! d/dt g(t) ∈ -∂F(g(t)),   ∂F(u)(s) = 2 [R⁻(u(s)), R⁺(u(s))] - 2s
//! ```
//!
//! where `R⁻`/`R⁺` are the left/right CDFs of the target. The inclusion is
//! separable in `s`, so every scheme here works one quantile level at a time.
//!
//! ## Modules
//!
//! | Module | Contents |
//! |---|---|
//! | [`measure`] | measure zoo with exact CDFs and minimal quantiles |
//! | [`grid`] | [`QuantileGrid`], the discretized flow state |
//! | [`target`] | [`Target`], a measure plus solver-side metadata |
//! | [`functional`] | `F`, subgradients, W2, MMD² and density extraction |
//! | [`solver`] | implicit/explicit Euler, closed forms, [`run_flow`] |
//! | [`diagnostics`] | Lipschitz estimates and smoothing/invariance checks |
//! | [`io`] | CSV encoding of grids, densities, diagnostics and checks |
//! | [`presets`] | the reference experiment setups |
//!
//! ## Quick start
//!
//! ```
//! use mmdflow_core::{Measure, Target, SolverConfig, Scheme, run_flow};
//!
//! let mu0 = Measure::dirac(0.0);
//! let nu = Target::new(Measure::uniform(0.0, 1.0).unwrap());
//! let cfg = SolverConfig::new(Scheme::ImplicitEuler, 1e-2, 200, 0.5).unwrap();
//! let traj = run_flow(&mu0, &nu, &cfg).unwrap();
//!
//! // δ₀ spreads into the uniform law on [0, 1 - e^{-2t}].
//! let last = traj.states.last().unwrap();
//! let width = last.values()[199] / last.midpoint(199);
//! assert!((width - (1.0 - (-1.0f64).exp())).abs() < 5e-3);
//! ```

// `!(x >= 0.0)` is used on purpose to reject NaN along with negatives.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod diagnostics;
pub mod error;
pub mod functional;
pub mod grid;
pub mod io;
pub mod isotonic;
pub mod measure;
pub mod presets;
pub mod quad;
pub mod solver;
pub mod special;
pub mod target;

pub use diagnostics::{
    check_trajectory, duality_check, lip_invariance_bound, lipschitz_estimate, smoothing_bound,
    BoundCheck, CheckKind, CheckStatus, LipschitzReport,
};
pub use error::{Error, Result};
pub use functional::{
    density_and_atoms, functional_f, gradient_continuous, half_self_interaction, mmd_squared,
    subgradient, w2_distance, DensityPiece, PiecewiseDensity, SubgradientSelection,
};
pub use grid::QuantileGrid;
pub use measure::Measure;
pub use solver::{
    closed_form_discrete, closed_form_point, explicit_euler_step, implicit_euler_step,
    pointwise_ode_solve, run_flow, FlowTrajectory, MonotonicityPolicy, Scheme, Snapshots,
    SolverConfig, StepDiagnostics,
};
pub use target::Target;
