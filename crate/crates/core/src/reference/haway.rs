//! Staggered leapfrog scheme for the damped acoustic system
//!
//! ```text
//! rho_t + div J = 0,    J_t + c0^2 grad rho + g J = 0
//! ```
//!
//! Density lives at cell centers and integer time levels; `J^x` on x-faces
//! `(i dx, (j + 1/2) dx)`, `J^y` on y-faces `((i + 1/2) dx, j dx)`, both at
//! half-integer time levels. The damping term is averaged over the two
//! momentum levels, which gives the solved update
//! `(1/dt + g/2) J^{n+1/2} = (1/dt - g/2) J^{n-1/2} - c0^2 grad_h rho^n`.

#[cfg(feature = "parallel")]
use rayon::prelude::*;

use super::{wrap_next, wrap_prev};
use crate::error::{param, LabError, Result};
use crate::field::ScalarField;

/// Step-count ratio between the staggered scheme and the lattice scheme in
/// the acoustic comparison runs.
pub const ACOUSTIC_STEP_RATIO: usize = 4;

/// `safety * dx / (c0 sqrt(2))`.
pub fn haway_stable_dt(c0: f64, dx: f64, safety: f64) -> Result<f64> {
    if !(c0 > 0.0 && dx > 0.0 && safety > 0.0) {
        return Err(param("c0/dx/safety", "must be positive"));
    }
    Ok(safety * dx / (c0 * std::f64::consts::SQRT_2))
}

/// Time step taking `ratio` staggered steps per lattice step.
pub fn haway_dt_from_lbm(dt_lbm: f64, ratio: usize) -> f64 {
    dt_lbm / ratio as f64
}

fn check_cfl(c0: f64, dx: f64, dt: f64) -> Result<()> {
    if !(dt > 0.0) {
        return Err(param("dt", format!("must be positive, got {dt}")));
    }
    let number = c0 * dt * std::f64::consts::SQRT_2 / dx;
    if number > 1.0 + 1e-12 {
        return Err(LabError::Cfl { number });
    }
    Ok(())
}

/// Density at time `time` with momenta half a step behind.
#[derive(Debug, Clone, PartialEq)]
pub struct StaggeredState {
    pub rho: ScalarField,
    /// x-face momenta; the field origin is shifted by `-dx/2` in x so that
    /// `cell_center` returns face positions.
    pub jx: ScalarField,
    /// y-face momenta, origin shifted by `-dx/2` in y.
    pub jy: ScalarField,
    pub c0: f64,
    pub g: f64,
    pub time: f64,
}

impl StaggeredState {
    fn check_coefficients(c0: f64, g: f64) -> Result<()> {
        if !(c0 > 0.0 && c0.is_finite()) {
            return Err(param("c0", format!("must be positive, got {c0}")));
        }
        if !(g >= 0.0 && g.is_finite()) {
            return Err(param("g", format!("must be non-negative, got {g}")));
        }
        Ok(())
    }

    /// Builds a state at time `t0` from closures: `rho(x, y)` at `t0` and
    /// `jx(x, y)`, `jy(x, y)` evaluated by the caller at `t0 - dt/2`.
    pub fn from_fns(
        template: &ScalarField,
        c0: f64,
        g: f64,
        t0: f64,
        rho: impl FnMut(f64, f64) -> f64,
        jx: impl FnMut(f64, f64) -> f64,
        jy: impl FnMut(f64, f64) -> f64,
    ) -> Result<Self> {
        Self::check_coefficients(c0, g)?;
        let (nx, ny, dx, o) = (template.nx, template.ny, template.dx, template.origin);
        Ok(Self {
            rho: ScalarField::from_fn(nx, ny, dx, o, rho),
            jx: ScalarField::from_fn(nx, ny, dx, (o.0 - dx / 2.0, o.1), jx),
            jy: ScalarField::from_fn(nx, ny, dx, (o.0, o.1 - dx / 2.0), jy),
            c0,
            g,
            time: t0,
        })
    }

    /// Starts from `J(t = 0) = 0`: the momenta are advanced over the first
    /// half step, then the density over a full step. The returned state is
    /// at time `dt` (one step taken).
    pub fn start_from_rest(rho0: &ScalarField, c0: f64, g: f64, dt: f64) -> Result<Self> {
        Self::check_coefficients(c0, g)?;
        check_cfl(c0, rho0.dx, dt)?;
        let mut state = Self::from_fns(rho0, c0, g, 0.0, |_, _| 0.0, |_, _| 0.0, |_, _| 0.0)?;
        state.rho = rho0.clone();
        update_momentum(&mut state, dt / 2.0);
        update_density(&mut state, dt);
        state.time = dt;
        Ok(state)
    }

    pub fn total_mass(&self) -> f64 {
        self.rho.sum()
    }
}

fn update_momentum(s: &mut StaggeredState, dt: f64) {
    let (nx, ny) = (s.rho.nx, s.rho.ny);
    let a = 1.0 / dt - s.g / 2.0;
    let b = 1.0 / dt + s.g / 2.0;
    let grad = s.c0 * s.c0 / s.rho.dx;
    let rho = &s.rho.values;
    let x_row = |j: usize, out: &mut [f64]| {
        let r = &rho[j * nx..(j + 1) * nx];
        for i in 0..nx {
            out[i] = (a * out[i] - grad * (r[i] - r[wrap_prev(i, nx)])) / b;
        }
    };
    let y_row = |j: usize, out: &mut [f64]| {
        let r = &rho[j * nx..(j + 1) * nx];
        let below = &rho[wrap_prev(j, ny) * nx..(wrap_prev(j, ny) + 1) * nx];
        for i in 0..nx {
            out[i] = (a * out[i] - grad * (r[i] - below[i])) / b;
        }
    };
    #[cfg(feature = "parallel")]
    {
        s.jx.values
            .par_chunks_mut(nx)
            .enumerate()
            .for_each(|(j, o)| x_row(j, o));
        s.jy.values
            .par_chunks_mut(nx)
            .enumerate()
            .for_each(|(j, o)| y_row(j, o));
    }
    #[cfg(not(feature = "parallel"))]
    {
        s.jx.values
            .chunks_mut(nx)
            .enumerate()
            .for_each(|(j, o)| x_row(j, o));
        s.jy.values
            .chunks_mut(nx)
            .enumerate()
            .for_each(|(j, o)| y_row(j, o));
    }
}

fn update_density(s: &mut StaggeredState, dt: f64) {
    let (nx, ny) = (s.rho.nx, s.rho.ny);
    let ratio = dt / s.rho.dx;
    let jx = &s.jx.values;
    let jy = &s.jy.values;
    let row = |j: usize, out: &mut [f64]| {
        let fx = &jx[j * nx..(j + 1) * nx];
        let fy = &jy[j * nx..(j + 1) * nx];
        let up = wrap_next(j, ny) * nx;
        let fy_up = &jy[up..up + nx];
        for i in 0..nx {
            let div = fx[wrap_next(i, nx)] - fx[i] + fy_up[i] - fy[i];
            out[i] -= ratio * div;
        }
    };
    #[cfg(feature = "parallel")]
    s.rho
        .values
        .par_chunks_mut(nx)
        .enumerate()
        .for_each(|(j, o)| row(j, o));
    #[cfg(not(feature = "parallel"))]
    s.rho
        .values
        .chunks_mut(nx)
        .enumerate()
        .for_each(|(j, o)| row(j, o));
}

/// One leapfrog step: momenta first, then density with the new fluxes.
pub fn haway_step(s: &StaggeredState, dt: f64) -> Result<StaggeredState> {
    check_cfl(s.c0, s.rho.dx, dt)?;
    let mut next = s.clone();
    advance(&mut next, dt);
    Ok(next)
}

fn advance(s: &mut StaggeredState, dt: f64) {
    update_momentum(s, dt);
    update_density(s, dt);
    s.time += dt;
}

/// Staggered integrator with a fixed time step.
#[derive(Debug, Clone)]
pub struct HawaySolver {
    state: StaggeredState,
    dt: f64,
    steps: usize,
}

impl HawaySolver {
    /// Wraps an initialized state; no step has been taken.
    pub fn new(state: StaggeredState, dt: f64) -> Result<Self> {
        check_cfl(state.c0, state.rho.dx, dt)?;
        Ok(Self {
            state,
            dt,
            steps: 0,
        })
    }

    /// From `rho0` with `J = 0`; the startup half step counts as step one.
    pub fn from_rest(rho0: &ScalarField, c0: f64, g: f64, dt: f64) -> Result<Self> {
        Ok(Self {
            state: StaggeredState::start_from_rest(rho0, c0, g, dt)?,
            dt,
            steps: 1,
        })
    }

    pub fn step(&mut self) {
        advance(&mut self.state, self.dt);
        self.steps += 1;
    }

    pub fn run(&mut self, steps: usize) {
        for _ in 0..steps {
            self.step();
        }
    }

    /// Advances until `total` steps have been taken in all.
    pub fn run_to(&mut self, total: usize) {
        while self.steps < total {
            self.step();
        }
    }

    pub fn state(&self) -> &StaggeredState {
        &self.state
    }

    pub fn steps(&self) -> usize {
        self.steps
    }

    pub fn time(&self) -> f64 {
        self.state.time
    }
}
