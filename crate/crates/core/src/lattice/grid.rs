#[cfg(feature = "parallel")]
use rayon::prelude::*;

use super::moments::{equilibrium_moments, CollisionOperator, MomentMatrix};
use super::{LatticeSpec, SchemeParams, Q, SWAP_XY, VELOCITIES};
use crate::error::{LabError, Result};
use crate::field::ScalarField;

/// Per-cell particle distributions on a periodic lattice, nine contiguous
/// populations per cell, cells row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct PopulationGrid {
    pub spec: LatticeSpec,
    pub f: Vec<f64>,
}

impl PopulationGrid {
    pub fn zeros(spec: LatticeSpec) -> Self {
        Self {
            f: vec![0.0; spec.cells() * Q],
            spec,
        }
    }

    pub fn from_populations(spec: LatticeSpec, f: Vec<f64>) -> Result<Self> {
        if f.len() != spec.cells() * Q {
            return Err(LabError::GridMismatch(format!(
                "expected {} populations, got {}",
                spec.cells() * Q,
                f.len()
            )));
        }
        Ok(Self { spec, f })
    }

    #[inline]
    fn offset(&self, i: usize, j: usize) -> usize {
        (j * self.spec.nx + i) * Q
    }

    pub fn cell(&self, i: usize, j: usize) -> &[f64; Q] {
        let o = self.offset(i, j);
        self.f[o..o + Q].try_into().unwrap()
    }

    pub fn cell_mut(&mut self, i: usize, j: usize) -> &mut [f64; Q] {
        let o = self.offset(i, j);
        (&mut self.f[o..o + Q]).try_into().unwrap()
    }

    pub fn total_mass(&self) -> f64 {
        self.f.iter().sum()
    }

    pub fn rho_field(&self) -> ScalarField {
        let s = &self.spec;
        let mut field = ScalarField::zeros(s.nx, s.ny, s.dx, s.origin);
        for (v, cell) in field.values.iter_mut().zip(self.f.chunks_exact(Q)) {
            *v = cell.iter().sum();
        }
        field
    }

    /// `(J_x, J_y)` fields, `J = lambda * sum_j e_j f_j`.
    pub fn momentum_fields(&self) -> (ScalarField, ScalarField) {
        let s = &self.spec;
        let mut jx = ScalarField::zeros(s.nx, s.ny, s.dx, s.origin);
        let mut jy = jx.clone();
        for (c, cell) in self.f.chunks_exact(Q).enumerate() {
            let (mut ax, mut ay) = (0.0, 0.0);
            for (q, v) in cell.iter().enumerate() {
                ax += VELOCITIES[q][0] as f64 * v;
                ay += VELOCITIES[q][1] as f64 * v;
            }
            jx.values[c] = s.lambda * ax;
            jy.values[c] = s.lambda * ay;
        }
        (jx, jy)
    }

    /// Mirror image under x <-> y: cell (i, j) moves to (j, i) and directions
    /// are relabeled accordingly. Requires a square grid.
    pub fn swap_xy(&self) -> Self {
        assert_eq!(self.spec.nx, self.spec.ny, "swap_xy needs a square grid");
        let mut out = Self::zeros(self.spec);
        for j in 0..self.spec.ny {
            for i in 0..self.spec.nx {
                let src = self.cell(i, j);
                let dst = out.cell_mut(j, i);
                for q in 0..Q {
                    dst[SWAP_XY[q]] = src[q];
                }
            }
        }
        out
    }
}

/// How the per-cell collision is evaluated.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum CollisionPath {
    /// Populations to moments, relax, back to populations.
    Moments,
    /// Single precomputed 9x9 product.
    #[default]
    Fused,
}

/// `f_j(x, t + dt) = f_j(x - v_j dt, t)` with periodic wraparound.
pub fn stream(g: &PopulationGrid) -> PopulationGrid {
    let mut out = PopulationGrid::zeros(g.spec);
    stream_into(&g.spec, &g.f, &mut out.f);
    out
}

fn stream_into(spec: &LatticeSpec, src: &[f64], dst: &mut [f64]) {
    let (nx, ny) = (spec.nx, spec.ny);
    let gather_row = |j: usize, out: &mut [f64]| {
        for (q, e) in VELOCITIES.iter().enumerate() {
            let sj = (j as isize - e[1] as isize).rem_euclid(ny as isize) as usize;
            let src_row = &src[sj * nx * Q..(sj + 1) * nx * Q];
            match e[0] {
                0 => {
                    for i in 0..nx {
                        out[i * Q + q] = src_row[i * Q + q];
                    }
                }
                1 => {
                    out[q] = src_row[(nx - 1) * Q + q];
                    for i in 1..nx {
                        out[i * Q + q] = src_row[(i - 1) * Q + q];
                    }
                }
                _ => {
                    for i in 0..nx - 1 {
                        out[i * Q + q] = src_row[(i + 1) * Q + q];
                    }
                    out[(nx - 1) * Q + q] = src_row[q];
                }
            }
        }
    };
    #[cfg(feature = "parallel")]
    dst.par_chunks_mut(nx * Q)
        .enumerate()
        .for_each(|(j, row)| gather_row(j, row));
    #[cfg(not(feature = "parallel"))]
    dst.chunks_mut(nx * Q)
        .enumerate()
        .for_each(|(j, row)| gather_row(j, row));
}

fn collide_all(op: &CollisionOperator, path: CollisionPath, f: &mut [f64]) {
    let collide = |cell: &mut [f64]| {
        let c: &mut [f64; Q] = cell.try_into().unwrap();
        *c = match path {
            CollisionPath::Moments => op.collide_via_moments(c),
            CollisionPath::Fused => op.collide_fused(c),
        };
    };
    #[cfg(feature = "parallel")]
    f.par_chunks_mut(Q * 64)
        .for_each(|block| block.chunks_exact_mut(Q).for_each(collide));
    #[cfg(not(feature = "parallel"))]
    f.chunks_exact_mut(Q).for_each(collide);
}

/// One full time step (collision then streaming) of a copy of `g`.
pub fn lbm_step(g: &PopulationGrid, p: &SchemeParams) -> Result<PopulationGrid> {
    let mut solver = LbmSolver::new(g.clone(), p)?;
    solver.step();
    Ok(solver.into_grid())
}

/// Equilibrium populations with zero momentum for a sampled density.
pub fn init_equilibrium(rho0: &ScalarField, p: &SchemeParams) -> Result<PopulationGrid> {
    p.validate()?;
    let spec = LatticeSpec::new(rho0.nx, rho0.ny, rho0.dx, rho0.dx / p.lambda, rho0.origin)?;
    let mm = MomentMatrix::new(p.lambda)?;
    let unit = mm.populations_from_moments(&equilibrium_moments(1.0, p));
    let mut grid = PopulationGrid::zeros(spec);
    for (cell, &rho) in grid.f.chunks_exact_mut(Q).zip(&rho0.values) {
        for (c, u) in cell.iter_mut().zip(&unit) {
            *c = u * rho;
        }
    }
    Ok(grid)
}

/// A lattice state together with its collision operator and streaming buffer.
#[derive(Debug, Clone)]
pub struct LbmSolver {
    grid: PopulationGrid,
    op: CollisionOperator,
    scratch: Vec<f64>,
    path: CollisionPath,
    steps: usize,
}

impl LbmSolver {
    pub fn new(grid: PopulationGrid, p: &SchemeParams) -> Result<Self> {
        p.check_lambda(&grid.spec)?;
        let op = CollisionOperator::new(p)?;
        Ok(Self {
            scratch: vec![0.0; grid.f.len()],
            grid,
            op,
            path: CollisionPath::default(),
            steps: 0,
        })
    }

    pub fn with_path(mut self, path: CollisionPath) -> Self {
        self.path = path;
        self
    }

    pub fn step(&mut self) {
        collide_all(&self.op, self.path, &mut self.grid.f);
        stream_into(&self.grid.spec, &self.grid.f, &mut self.scratch);
        std::mem::swap(&mut self.grid.f, &mut self.scratch);
        self.steps += 1;
    }

    pub fn run(&mut self, steps: usize) {
        for _ in 0..steps {
            self.step();
        }
    }

    pub fn steps(&self) -> usize {
        self.steps
    }

    pub fn time(&self) -> f64 {
        self.steps as f64 * self.grid.spec.dt
    }

    pub fn grid(&self) -> &PopulationGrid {
        &self.grid
    }

    pub fn into_grid(self) -> PopulationGrid {
        self.grid
    }

    pub fn operator(&self) -> &CollisionOperator {
        &self.op
    }

    pub fn rho_field(&self) -> ScalarField {
        self.grid.rho_field()
    }
}
