//! Target measure with the data the solvers look up repeatedly.

use crate::measure::{Discrete, Measure};

/// The target `ν` of the flow.
#[derive(Debug, Clone, PartialEq)]
pub struct Target {
    measure: Measure,
    hull: (f64, f64),
    l_low_q: f64,
    lip_q: f64,
    discrete: Option<Discrete>,
    atom_locations: Vec<f64>,
}

impl Target {
    pub fn new(measure: Measure) -> Self {
        let hull = measure.support_hull();
        let l_low_q = measure.quantile_lower_lipschitz();
        let lip_q = measure.quantile_lipschitz();
        let atoms = measure.atoms();
        let atom_locations: Vec<f64> = atoms.iter().map(|a| a.0).collect();
        let discrete = match &measure {
            Measure::Discrete(d) => Some(d.clone()),
            _ if measure.density(0.0).is_none() => {
                // purely atomic (empirical, grid, mixtures of atoms)
                let mass: f64 = atoms.iter().map(|a| a.1).sum();
                if (mass - 1.0).abs() <= 1e-12 {
                    let (x, w) = atoms.into_iter().unzip();
                    Discrete::new(x, w).ok()
                } else {
                    None
                }
            }
            _ => None,
        };
        Self {
            measure,
            hull,
            l_low_q,
            lip_q,
            discrete,
            atom_locations,
        }
    }

    pub fn measure(&self) -> &Measure {
        &self.measure
    }

    pub fn hull(&self) -> (f64, f64) {
        self.hull
    }

    /// Atom locations and cumulative levels `W_k`, for purely atomic targets.
    pub fn atoms(&self) -> Option<&Discrete> {
        self.discrete.as_ref()
    }

    /// Locations of all point masses, sorted.
    pub fn atom_locations(&self) -> &[f64] {
        &self.atom_locations
    }

    /// `L_low(Q_ν)`; zero when `ν` has atoms.
    pub fn l_low_q(&self) -> f64 {
        self.l_low_q
    }

    /// `Lip(Q_ν)`; `+∞` when unbounded or discontinuous.
    pub fn lip_q(&self) -> f64 {
        self.lip_q
    }

    pub fn has_atoms(&self) -> bool {
        self.measure.has_atoms()
    }

    #[inline]
    pub fn cdf_right(&self, x: f64) -> f64 {
        self.measure.cdf_right(x)
    }

    #[inline]
    pub fn cdf_left(&self, x: f64) -> f64 {
        self.measure.cdf_left(x)
    }
}

impl From<Measure> for Target {
    fn from(m: Measure) -> Self {
        Target::new(m)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn metadata() {
        let t = Target::new(Measure::uniform(2.0, 3.0).unwrap());
        assert_eq!(t.hull(), (2.0, 3.0));
        assert_eq!(t.l_low_q(), 1.0);
        assert_eq!(t.lip_q(), 1.0);
        assert!(t.atoms().is_none());

        let d = Target::new(Measure::discrete(vec![0.0, 1.0], vec![0.25, 0.75]).unwrap());
        assert_eq!(d.atoms().unwrap().cumulative(), &[0.25, 1.0]);
        assert_eq!(d.l_low_q(), 0.0);
        assert_eq!(d.lip_q(), f64::INFINITY);

        let e = Target::new(Measure::empirical(vec![1.0, 0.0, 1.0, 1.0]).unwrap());
        assert_eq!(e.atoms().unwrap().atoms(), &[0.0, 1.0]);
        assert_eq!(e.atoms().unwrap().cumulative(), &[0.25, 1.0]);
        let mix = Measure::mixture(
            vec![0.5, 0.5],
            vec![Measure::dirac(0.0), Measure::uniform(0.0, 1.0).unwrap()],
        )
        .unwrap();
        let m = Target::new(mix);
        assert!(m.atoms().is_none());
        assert_eq!(m.atom_locations(), &[0.0]);
    }
}
