//! Reference experiment setups.
//!
//! Every preset runs at `τ = 1/100` on `n = 1000` levels and keeps the states
//! after 10, 100, 200, 500, 1000 and 10000 steps. It is solved with implicit
//! Euler and, as a second variant, with explicit Euler when the target has no
//! atoms or with the exact discrete solution when it is purely atomic.

use crate::error::{Error, Result};
use crate::measure::Measure;
use crate::solver::{Scheme, Snapshots, SolverConfig};
use crate::target::Target;

pub const TAU: f64 = 0.01;
pub const N: usize = 1000;
pub const SNAPSHOT_STEPS: [usize; 6] = [10, 100, 200, 500, 1000, 10000];

/// A named pair `(μ₀, ν)`.
#[derive(Debug, Clone, Copy)]
pub struct Preset {
    pub name: &'static str,
    pub mu0: &'static str,
    pub nu: &'static str,
    /// Description of the setup as originally stated.
    pub anchor: &'static str,
}

pub const PRESETS: [Preset; 10] = [
    Preset {
        name: "gauss-shift",
        mu0: "gaussian(5, 1)",
        nu: "gaussian(-5, 1)",
        anchor: r"between two Gaussians $\mu_0 \sim \NN(5, 1)$ and $\nu \sim \NN(-5, 1)$",
    },
    Preset {
        name: "laplace-shift",
        mu0: "laplace(5, 1)",
        nu: "laplace(-5, 1)",
        anchor: r"between two Laplacians $\mu_0 \sim \mathcal L(5, 1)$ and $\nu \sim \mathcal L(-5, 1)$",
    },
    Preset {
        name: "unif-to-unif",
        mu0: "uniform(0, 1)",
        nu: "uniform(2, 3)",
        anchor: r"between two uniform distributions $\mu_0 \sim \mathcal U([0,1])$ and $\nu \sim \mathcal U([2,3])$",
    },
    Preset {
        // the second parameter is read as the standard deviation
        name: "gauss-scales",
        mu0: "gaussian(0, 1/sqrt(2))",
        nu: "gaussian(0, sqrt(2))",
        anchor: r"between two Gaussians $\mu_0 \sim \NN(0, \tfrac{1}{\sqrt{2}})$ and $\nu \sim \NN(0, \sqrt{2})$",
    },
    Preset {
        name: "bimodal-to-gauss",
        mu0: "0.5*gaussian(-10, 1) + 0.5*gaussian(10, 1)",
        nu: "gaussian(0, 1)",
        anchor: r"\mu_0 \sim \frac{1}{2} \NN(-10, 1) + \frac{1}{2} \NN(10, 1)$ and $\nu \sim \NN(0, 1)",
    },
    Preset {
        name: "gauss-to-bimodal",
        mu0: "gaussian(0, 1)",
        nu: "0.5*gaussian(-10, 1) + 0.5*gaussian(10, 1)",
        anchor: r"$\mu_0 \sim \NN(0, 1)$ and $\nu \sim \frac{1}{2} \NN(-10, 1) + \frac{1}{2} \NN(10, 1)$",
    },
    Preset {
        name: "folded-norm",
        mu0: "folded_normal(0, 1)",
        nu: "folded_normal(2, 1)",
        anchor: r"$\mu_0 \sim \mathcal{FN}(0, 1)$ and $\nu \sim \mathcal{FN}(2, 1)$",
    },
    Preset {
        name: "dirac-to-dirac",
        mu0: "dirac(-1)",
        nu: "dirac(0)",
        anchor: r"from $\delta_{-1}$ towards $\nu = \delta_0$",
    },
    Preset {
        name: "three-to-two-diracs",
        mu0: "discrete(x=[-1, 0.5, 2], w=[1/3, 1/3, 1/3])",
        nu: "discrete(x=[0, 1], w=[0.25, 0.75])",
        anchor: r"$\mu_0 = \tfrac13 (\delta_{-1} + \delta_{\frac12} + \delta_2)$ and $\nu = \tfrac14 \delta_0 + \tfrac34 \delta_1$",
    },
    Preset {
        name: "dirac-to-unif",
        mu0: "dirac(0)",
        nu: "uniform(0, 1)",
        anchor: r"$\mu_0 = \delta_0$ and $\nu = \Lambda_{[0,1]}$",
    },
];

pub fn names() -> impl Iterator<Item = &'static str> {
    PRESETS.iter().map(|p| p.name)
}

pub fn find(name: &str) -> Result<&'static Preset> {
    PRESETS.iter().find(|p| p.name == name).ok_or_else(|| {
        Error::Config(format!(
            "unknown preset '{name}'; valid presets: {}",
            names().collect::<Vec<_>>().join(", ")
        ))
    })
}

impl Preset {
    pub fn initial(&self) -> Measure {
        Measure::parse(self.mu0).expect("preset expressions are valid")
    }

    pub fn target(&self) -> Target {
        Target::new(Measure::parse(self.nu).expect("preset expressions are valid"))
    }

    /// Implicit Euler first, then the second variant.
    pub fn schemes(&self) -> Vec<Scheme> {
        let t = self.target();
        let second = if t.atoms().is_some() {
            Scheme::ClosedFormDiscrete
        } else if t.has_atoms() {
            return vec![Scheme::ImplicitEuler];
        } else {
            Scheme::ExplicitEuler
        };
        vec![Scheme::ImplicitEuler, second]
    }

    /// Standard configuration for `scheme`; `steps` overrides the final step.
    pub fn config(&self, scheme: Scheme, steps: Option<usize>) -> Result<SolverConfig> {
        let last = steps.unwrap_or(SNAPSHOT_STEPS[SNAPSHOT_STEPS.len() - 1]);
        let keep: Vec<usize> = SNAPSHOT_STEPS
            .iter()
            .copied()
            .filter(|&k| k <= last)
            .collect();
        Ok(SolverConfig::new(scheme, TAU, N, TAU * last as f64)?
            .with_snapshots(Snapshots::Steps(keep)))
    }
}
