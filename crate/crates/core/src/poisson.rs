//! Compact fourth-order Neumann Poisson solve for the self-consistent
//! potential energy `V_s`.
//!
//! Interior rows: `λV_{i−1} − 2λV_i + λV_{i+1} = f_{i−1} + 10f_i + f_{i+1}`
//! with `f = (q²/ε)(N_d − n)`. The zero-flux ends become
//! `−2λV₀ + 2λV₁ = −f₋₁ + 10f₀ + 3f₁` and its mirror image. The pure
//! Neumann operator is singular; the Gummel predictor
//! `n → n·exp(−(V − Vᵖ)/k_BT)` puts a positive density response on the
//! Newton diagonal, which fixes the gauge through charge neutrality.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numerics::{solve_banded, BandedSystem, Grid, RealGridFunction};

/// Device data that stays fixed during a Poisson solve.
#[derive(Debug, Clone, PartialEq)]
pub struct PoissonProblem {
    grid: Grid,
    /// nm⁻³ on `−1..=N_x+1`
    doping: RealGridFunction,
    /// q²/ε (eV·nm)
    coulomb: f64,
    /// k_B·T (eV)
    kt: f64,
}

impl PoissonProblem {
    /// `doping` holds the nodal values `0..=N_x`; the ghost values repeat
    /// the boundary ones.
    pub fn new(grid: Grid, doping: &[f64], coulomb: f64, kt: f64) -> Result<Self> {
        let n = grid.nx();
        if doping.len() != n + 1 {
            return Err(Error::InvalidSystem(format!("doping needs {} nodal values, got {}", n + 1, doping.len())));
        }
        let grid = grid.with_ghosts(1)?;
        let doping = RealGridFunction::from_fn(grid, |i| doping[i.clamp(0, n as isize) as usize]);
        Self::with_ghost_doping(doping, coulomb, kt)
    }

    /// Doping given on `−1..=N_x+1` directly.
    pub fn with_ghost_doping(doping: RealGridFunction, coulomb: f64, kt: f64) -> Result<Self> {
        if doping.grid().ghosts() != 1 {
            return Err(Error::InvalidSystem("doping must carry exactly one ghost node per side".into()));
        }
        if doping.storage().iter().any(|d| !(d.is_finite() && *d >= 0.0)) {
            return Err(Error::validation("doping", "densities must be finite and nonnegative"));
        }
        if !(coulomb > 0.0 && kt > 0.0) {
            return Err(Error::validation("poisson", "q²/ε and k_B·T must be positive"));
        }
        Ok(PoissonProblem {
            grid: *doping.grid(),
            doping,
            coulomb,
            kt,
        })
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn doping(&self) -> &RealGridFunction {
        &self.doping
    }

    pub fn coulomb(&self) -> f64 {
        self.coulomb
    }

    pub fn kt(&self) -> f64 {
        self.kt
    }

    /// `f_i = (q²/ε)(N_d,i − n_i)` on `−1..=N_x+1`.
    pub fn source(&self, density: &RealGridFunction) -> Result<RealGridFunction> {
        self.check_len(density)?;
        let (lo, hi) = self.grid.index_bounds();
        let values = (lo..=hi).map(|i| self.coulomb * (self.doping[i] - density[i])).collect();
        RealGridFunction::from_storage(self.grid, values)
    }

    fn check_len(&self, g: &RealGridFunction) -> Result<()> {
        if g.storage().len() != self.grid.storage_len() {
            return Err(Error::InvalidSystem(format!(
                "expected {} values on −1..=N_x+1, got {}",
                self.grid.storage_len(),
                g.storage().len()
            )));
        }
        Ok(())
    }
}

/// `V_s` and the source it was solved against, both on `−1..=N_x+1`.
#[derive(Debug, Clone, PartialEq)]
pub struct PoissonState {
    /// eV; ghost values from the discrete zero-flux relations
    pub potential: RealGridFunction,
    /// eV·nm⁻²
    pub source: RealGridFunction,
}

impl PoissonState {
    /// Builds the state from nodal potentials, filling the ghosts from
    /// `(V₁ − V₋₁)/2Δx = (Δx/12)(f₁ − f₋₁)` and its right-hand twin.
    pub fn new(nodal: &[f64], source: RealGridFunction) -> Result<Self> {
        let grid = *source.grid();
        let n = grid.nx();
        if nodal.len() != n + 1 || grid.ghosts() != 1 {
            return Err(Error::InvalidSystem("potential must have N_x + 1 nodal values and one ghost per side".into()));
        }
        let ni = n as isize;
        let h2 = grid.dx() * grid.dx() / 6.0;
        let potential = RealGridFunction::from_fn(grid, |i| {
            if i < 0 {
                nodal[1] - h2 * (source[1] - source[-1])
            } else if i > ni {
                nodal[n - 1] + h2 * (source[ni + 1] - source[ni - 1])
            } else {
                nodal[i as usize]
            }
        });
        Ok(PoissonState { potential, source })
    }

    pub fn nodal(&self) -> &[f64] {
        self.potential.interior()
    }
}

/// The compact Neumann system `A·V = W·f` for the state's source.
pub fn assemble_poisson(state: &PoissonState) -> Result<BandedSystem<f64>> {
    let grid = *state.source.grid();
    let n = grid.nx();
    if n < 2 {
        return Err(Error::validation("grid.nx", "Poisson needs at least two cells"));
    }
    let l = grid.lambda();
    let f = &state.source;
    let ni = n as isize;
    let mut sys = BandedSystem::tridiagonal(n + 1)?;
    sys.set_row(0, &[(0, -2.0 * l), (1, 2.0 * l)], -f[-1] + 10.0 * f[0] + 3.0 * f[1]);
    for i in 1..n {
        let j = i as isize;
        sys.set_row(i, &[(i - 1, l), (i, -2.0 * l), (i + 1, l)], f[j - 1] + 10.0 * f[j] + f[j + 1]);
    }
    sys.set_row(n, &[(n - 1, 2.0 * l), (n, -2.0 * l)], 3.0 * f[ni - 1] + 10.0 * f[ni] - f[ni + 1]);
    Ok(sys)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct NewtonConfig {
    /// Stop when `‖ΔV_s‖∞` falls to this (eV).
    pub tolerance: f64,
    pub max_iterations: usize,
    /// Initial step length in `(0, 1]`; halved while the residual grows.
    pub damping: f64,
    /// Off freezes the density, leaving a linear singular problem that is
    /// gauge-fixed by pinning `V₀ = 0`.
    pub predictor: bool,
}

impl Default for NewtonConfig {
    fn default() -> Self {
        NewtonConfig {
            tolerance: 1e-10,
            max_iterations: 100,
            damping: 1.0,
            predictor: true,
        }
    }
}

impl NewtonConfig {
    pub const MIN_DAMPING: f64 = 1.0 / 64.0;

    pub fn validate(&self) -> Result<()> {
        if !(self.tolerance > 0.0) {
            return Err(Error::validation("newton.tolerance", "must be positive"));
        }
        if self.max_iterations == 0 {
            return Err(Error::validation("newton.max_iterations", "must be at least 1"));
        }
        if !(self.damping > 0.0 && self.damping <= 1.0) {
            return Err(Error::validation("newton.damping", "must lie in (0, 1]"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct NewtonOutcome {
    pub state: PoissonState,
    /// Predicted density at the returned potential (nm⁻³).
    pub density: RealGridFunction,
    pub iterations: usize,
    /// `‖ΔV_s‖∞` of each step.
    pub history: Vec<f64>,
}

// keeps exp() finite for absurd trial steps
const MAX_EXPONENT: f64 = 200.0;

struct Linearization<'a> {
    problem: &'a PoissonProblem,
    density: &'a RealGridFunction,
    reference: &'a [f64],
    predictor: bool,
}

impl Linearization<'_> {
    /// Predicted density; ghosts follow the adjacent boundary node.
    fn density_at(&self, v: &[f64]) -> RealGridFunction {
        let n = self.problem.grid.nx() as isize;
        let kt = self.problem.kt;
        RealGridFunction::from_fn(self.problem.grid, |i| {
            let n0 = self.density[i];
            if !self.predictor {
                return n0;
            }
            let j = i.clamp(0, n) as usize;
            n0 * (-(v[j] - self.reference[j]) / kt).min(MAX_EXPONENT).exp()
        })
    }

    fn residual(&self, v: &[f64]) -> Result<(Vec<f64>, RealGridFunction, BandedSystem<f64>)> {
        let density = self.density_at(v);
        let source = self.problem.source(&density)?;
        let sys = assemble_poisson(&PoissonState {
            potential: RealGridFunction::filled(self.problem.grid, 0.0),
            source,
        })?;
        let av = sys.matvec(v);
        let r = av.iter().zip(sys.rhs()).map(|(a, b)| a - b).collect();
        Ok((r, density, sys))
    }

    /// `J = A − W·diag(∂f/∂V)` with `∂f_i/∂V_i = (q²/ε)n_i/k_BT`.
    fn jacobian(&self, sys: &BandedSystem<f64>, density: &RealGridFunction) -> Result<BandedSystem<f64>> {
        let n = self.problem.grid.nx();
        let ni = n as isize;
        let mut jac = BandedSystem::tridiagonal(n + 1)?;
        for i in 0..=n {
            for j in i.saturating_sub(1)..=(i + 1).min(n) {
                jac.set(i, j, sys.get(i, j));
            }
        }
        if !self.predictor {
            jac.set_row(0, &[(0, 1.0), (1, 0.0)], 0.0);
            return Ok(jac);
        }
        let d = |i: isize| self.problem.coulomb * density[i] / self.problem.kt;
        jac.add(0, 0, -(-d(-1) + 10.0 * d(0)));
        jac.add(0, 1, -3.0 * d(1));
        for i in 1..n {
            let j = i as isize;
            jac.add(i, i - 1, -d(j - 1));
            jac.add(i, i, -10.0 * d(j));
            jac.add(i, i + 1, -d(j + 1));
        }
        jac.add(n, n - 1, -3.0 * d(ni - 1));
        jac.add(n, n, -(10.0 * d(ni) - d(ni + 1)));
        Ok(jac)
    }
}

fn norm_inf(v: &[f64]) -> f64 {
    v.iter().fold(0.0, |m, x| m.max(x.abs()))
}

/// Damped Newton iteration for `A·V = W·f(V)` with the density frozen at
/// `density` apart from the predictor response around `reference`, the
/// potential that produced it. Starts from `reference`.
pub fn newton_solve(
    problem: &PoissonProblem,
    density: &RealGridFunction,
    reference: &[f64],
    config: &NewtonConfig,
) -> Result<NewtonOutcome> {
    config.validate()?;
    problem.check_len(density)?;
    let n = problem.grid.nx();
    if reference.len() != n + 1 {
        return Err(Error::InvalidSystem(format!("potential needs {} nodal values, got {}", n + 1, reference.len())));
    }
    if density.storage().iter().any(|d| !(d.is_finite() && *d >= 0.0)) {
        return Err(Error::validation("density", "must be finite and nonnegative"));
    }
    if config.predictor && density.storage().iter().all(|d| *d == 0.0) {
        return Err(Error::validation("density", "identically zero; the Neumann Jacobian is singular"));
    }
    let lin = Linearization {
        problem,
        density,
        reference,
        predictor: config.predictor,
    };

    let mut v = reference.to_vec();
    if !config.predictor {
        let shift = v[0];
        v.iter_mut().for_each(|x| *x -= shift);
    }
    let (mut r, mut dens, mut sys) = lin.residual(&v)?;
    let mut history = Vec::new();
    let mut best = (norm_inf(&r), v.clone());

    for it in 1..=config.max_iterations {
        let mut jac = lin.jacobian(&sys, &dens)?;
        for (i, ri) in r.iter().enumerate() {
            jac.set_rhs(i, -ri);
        }
        if !config.predictor {
            jac.set_rhs(0, 0.0);
        }
        let step = solve_banded(&jac)?;
        let step_norm = norm_inf(&step);
        let r_norm = norm_inf(&r);

        let mut omega = config.damping;
        let (trial, tr) = loop {
            let mut trial: Vec<f64> = v.iter().zip(&step).map(|(a, b)| a + omega * b).collect();
            if !config.predictor {
                trial[0] = 0.0;
            }
            let tr = lin.residual(&trial)?;
            let grew = norm_inf(&tr.0) > r_norm;
            if !grew || omega <= NewtonConfig::MIN_DAMPING || !config.predictor {
                break (trial, tr);
            }
            omega *= 0.5;
        };
        v = trial;
        (r, dens, sys) = tr;
        history.push(omega * step_norm);
        if norm_inf(&r) < best.0 {
            best = (norm_inf(&r), v.clone());
        }

        if step_norm <= config.tolerance {
            let source = problem.source(&dens)?;
            return Ok(NewtonOutcome {
                state: PoissonState::new(&v, source)?,
                density: dens,
                iterations: it,
                history,
            });
        }
    }
    Err(Error::MaxIterationsExceeded {
        iterations: config.max_iterations,
        last_update: history.last().copied().unwrap_or(f64::NAN),
        history,
        best: best.1,
    })
}
