use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::numerics::Grid;

/// A potential jump located exactly on node `node`, from `below` on the
/// left to `above` on the right.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Interface {
    pub node: usize,
    pub below: f64,
    pub above: f64,
}

impl Interface {
    pub fn jump(&self) -> f64 {
        self.above - self.below
    }
}

/// Everything needed to assemble the discrete problem at one energy.
///
/// The potential is stored on the physical nodes `0..=N_x` and extended
/// by its boundary values outside the device.
#[derive(Debug, Clone, PartialEq)]
pub struct SchrodingerContext {
    grid: Grid,
    potential: Vec<f64>,
    kinetic: f64,
    energy: f64,
    interfaces: Vec<Interface>,
}

impl SchrodingerContext {
    /// `kinetic` is ħ²/(2m*) (eV·nm² in physical units).
    pub fn new(grid: Grid, potential: Vec<f64>, kinetic: f64, energy: f64) -> Result<Self> {
        if potential.len() != grid.nx() + 1 {
            return Err(Error::InvalidSystem(format!(
                "potential needs {} nodal values, got {}",
                grid.nx() + 1,
                potential.len()
            )));
        }
        if !(kinetic > 0.0 && kinetic.is_finite()) {
            return Err(Error::validation("kinetic", "ħ²/2m* must be positive"));
        }
        if !energy.is_finite() || potential.iter().any(|v| !v.is_finite()) {
            return Err(Error::validation("potential", "values must be finite"));
        }
        Ok(SchrodingerContext {
            grid,
            potential,
            kinetic,
            energy,
            interfaces: Vec::new(),
        })
    }

    /// Marks nodes where the potential jumps. Rows touching those nodes
    /// get one-sided corrections that keep the scheme fourth order
    /// across the discontinuity; the nodal value there becomes the mean
    /// of the two sides.
    ///
    /// Interfaces must sit at least two nodes from each boundary and from
    /// each other.
    pub fn with_interfaces(mut self, mut interfaces: Vec<Interface>) -> Result<Self> {
        let n = self.grid.nx();
        interfaces.sort_by_key(|f| f.node);
        for (i, f) in interfaces.iter().enumerate() {
            if f.node < 2 || f.node + 2 > n {
                return Err(Error::validation("interfaces", format!("node {} too close to the boundary", f.node)));
            }
            if i > 0 && f.node < interfaces[i - 1].node + 2 {
                return Err(Error::validation("interfaces", format!("nodes {} and {} are adjacent", interfaces[i - 1].node, f.node)));
            }
            if !(f.below.is_finite() && f.above.is_finite()) {
                return Err(Error::validation("interfaces", "values must be finite"));
            }
        }
        for f in &interfaces {
            self.potential[f.node] = 0.5 * (f.below + f.above);
        }
        self.interfaces = interfaces;
        Ok(self)
    }

    pub fn interfaces(&self) -> &[Interface] {
        &self.interfaces
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn kinetic(&self) -> f64 {
        self.kinetic
    }

    pub fn energy(&self) -> f64 {
        self.energy
    }

    pub fn nodal_potential(&self) -> &[f64] {
        &self.potential
    }

    /// Same device at another energy.
    pub fn at_energy(&self, energy: f64) -> Self {
        SchrodingerContext {
            energy,
            ..self.clone()
        }
    }

    /// Potential at node `i`, constant-extended outside `0..=N_x`.
    pub fn potential(&self, i: isize) -> f64 {
        let n = self.grid.nx() as isize;
        self.potential[i.clamp(0, n) as usize]
    }

    pub fn left_potential(&self) -> f64 {
        self.potential[0]
    }

    pub fn right_potential(&self) -> f64 {
        self.potential[self.grid.nx()]
    }

    pub fn lambda(&self) -> f64 {
        self.grid.lambda()
    }

    /// Boundary parameter `t = (ħ²/2m*)·12/Δx²`.
    pub fn t(&self) -> f64 {
        self.kinetic * self.lambda()
    }

    /// `c_j = (V_j − E)/(ħ²/2m*)`.
    pub fn c(&self, j: isize) -> f64 {
        (self.potential(j) - self.energy) / self.kinetic
    }

    /// Wavenumber in the left lead; imaginary (decaying) below the band edge.
    pub fn k_left(&self) -> Complex64 {
        Complex64::new((self.energy - self.left_potential()) / self.kinetic, 0.0).sqrt()
    }

    pub fn k_right(&self) -> Complex64 {
        Complex64::new((self.energy - self.right_potential()) / self.kinetic, 0.0).sqrt()
    }

    /// Whether `t > max{2(E − V₀), 2(E − V_N)}`, the condition under which
    /// the discrete dispersion roots are unimodular and the discrete
    /// problems are uniquely solvable.
    pub fn precondition_holds(&self) -> bool {
        self.check_precondition().is_ok()
    }

    pub fn check_precondition(&self) -> Result<()> {
        let limit = 2.0 * (self.energy - self.left_potential().min(self.right_potential()));
        let t = self.t();
        if t > limit {
            Ok(())
        } else {
            Err(Error::PreconditionViolated { t, limit })
        }
    }

    /// The spatially reversed device on the same grid.
    pub fn mirrored(&self) -> Self {
        let mut potential = self.potential.clone();
        potential.reverse();
        let n = self.grid.nx();
        let mut interfaces: Vec<Interface> = self
            .interfaces
            .iter()
            .map(|f| Interface {
                node: n - f.node,
                below: f.above,
                above: f.below,
            })
            .collect();
        interfaces.reverse();
        SchrodingerContext {
            potential,
            interfaces,
            ..self.clone()
        }
    }
}
