#[cfg(feature = "parallel")]
use rayon::prelude::*;

use super::{wrap_next, wrap_prev};
use crate::error::{param, LabError, Result};
use crate::field::ScalarField;

/// Largest stable explicit step times `safety`: `safety * dx^2 / (4 kappa)`.
pub fn heat_fd_stable_dt(kappa: f64, dx: f64, safety: f64) -> Result<f64> {
    if !(kappa > 0.0) || !(dx > 0.0) {
        return Err(param("kappa/dx", "must be positive"));
    }
    if !(safety > 0.0 && safety <= 1.0) {
        return Err(param("safety", format!("must lie in (0, 1], got {safety}")));
    }
    Ok(safety * dx * dx / (4.0 * kappa))
}

fn check_stability(kappa: f64, dx: f64, dt: f64) -> Result<()> {
    if !(kappa >= 0.0) {
        return Err(param("kappa", format!("must be non-negative, got {kappa}")));
    }
    if !(dt > 0.0) {
        return Err(param("dt", format!("must be positive, got {dt}")));
    }
    let bound = dx * dx / (4.0 * kappa);
    if dt > bound * (1.0 + 1e-12) {
        return Err(LabError::HeatStability { dt, bound });
    }
    Ok(())
}

fn step_into(src: &ScalarField, r: f64, dst: &mut [f64]) {
    let (nx, ny) = (src.nx, src.ny);
    let v = &src.values;
    let row = |j: usize, out: &mut [f64]| {
        let up = wrap_next(j, ny) * nx;
        let down = wrap_prev(j, ny) * nx;
        let here = j * nx;
        for i in 0..nx {
            let c = v[here + i];
            let lap =
                v[here + wrap_next(i, nx)] + v[here + wrap_prev(i, nx)] + v[up + i] + v[down + i]
                    - 4.0 * c;
            out[i] = c + r * lap;
        }
    };
    #[cfg(feature = "parallel")]
    dst.par_chunks_mut(nx)
        .enumerate()
        .for_each(|(j, o)| row(j, o));
    #[cfg(not(feature = "parallel"))]
    dst.chunks_mut(nx).enumerate().for_each(|(j, o)| row(j, o));
}

/// One explicit step of `rho_t = kappa Laplacian(rho)` with the periodic
/// five-point Laplacian.
pub fn heat_fd_step(rho: &ScalarField, kappa: f64, dt: f64) -> Result<ScalarField> {
    check_stability(kappa, rho.dx, dt)?;
    let mut out = rho.clone();
    step_into(rho, kappa * dt / (rho.dx * rho.dx), &mut out.values);
    Ok(out)
}

/// Explicit heat integrator owning its field and scratch buffer.
#[derive(Debug, Clone)]
pub struct HeatSolver {
    field: ScalarField,
    scratch: Vec<f64>,
    ratio: f64,
    dt: f64,
    steps: usize,
}

impl HeatSolver {
    pub fn new(field: ScalarField, kappa: f64, dt: f64) -> Result<Self> {
        check_stability(kappa, field.dx, dt)?;
        Ok(Self {
            scratch: field.values.clone(),
            ratio: kappa * dt / (field.dx * field.dx),
            field,
            dt,
            steps: 0,
        })
    }

    pub fn step(&mut self) {
        step_into(&self.field, self.ratio, &mut self.scratch);
        std::mem::swap(&mut self.field.values, &mut self.scratch);
        self.steps += 1;
    }

    pub fn run(&mut self, steps: usize) {
        for _ in 0..steps {
            self.step();
        }
    }

    pub fn field(&self) -> &ScalarField {
        &self.field
    }

    pub fn time(&self) -> f64 {
        self.steps as f64 * self.dt
    }

    pub fn steps(&self) -> usize {
        self.steps
    }
}
