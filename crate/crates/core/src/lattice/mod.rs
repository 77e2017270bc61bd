//! Scalar D2Q9 multiple-relaxation-time lattice Boltzmann scheme.
//!
//! Velocity directions follow the column order of the moment matrix:
//! ```text
//!   6   2   5
//!    \  |  /
//!   3 - 0 - 1
//!    /  |  \
//!   7   4   8
//! ```

mod grid;
pub(crate) mod moments;

pub use grid::{init_equilibrium, lbm_step, stream, CollisionPath, LbmSolver, PopulationGrid};
pub use moments::{
    equilibrium_moments, relax_moments, CollisionOperator, Matrix9, MomentMatrix, MomentSet,
};

use crate::error::{param, LabError, Result};

/// Number of discrete velocities.
pub const Q: usize = 9;

/// Unit lattice vectors e_j; the physical velocity is v_j = lambda * e_j.
pub const VELOCITIES: [[i32; 2]; Q] = [
    [0, 0],
    [1, 0],
    [0, 1],
    [-1, 0],
    [0, -1],
    [1, 1],
    [-1, 1],
    [-1, -1],
    [1, -1],
];

/// Direction relabeling under the reflection x <-> y.
pub const SWAP_XY: [usize; Q] = [0, 2, 1, 4, 3, 5, 8, 7, 6];

/// Geometry of a periodic Cartesian lattice.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LatticeSpec {
    pub nx: usize,
    pub ny: usize,
    pub dx: f64,
    pub dt: f64,
    pub lambda: f64,
    /// Lower-left corner of the domain. Cell (i, j) is centered at
    /// `origin + ((i + 1/2) dx, (j + 1/2) dx)`.
    pub origin: (f64, f64),
}

impl LatticeSpec {
    pub fn new(nx: usize, ny: usize, dx: f64, dt: f64, origin: (f64, f64)) -> Result<Self> {
        if nx < 3 || ny < 3 {
            return Err(param(
                "nx/ny",
                format!("need at least 3 cells, got {nx}x{ny}"),
            ));
        }
        if !(dx > 0.0 && dx.is_finite()) {
            return Err(param("dx", format!("must be positive, got {dx}")));
        }
        if !(dt > 0.0 && dt.is_finite()) {
            return Err(param("dt", format!("must be positive, got {dt}")));
        }
        Ok(Self {
            nx,
            ny,
            dx,
            dt,
            lambda: dx / dt,
            origin,
        })
    }

    /// Square lattice of `n` cells per side covering `[origin, origin + extent]^2`.
    pub fn square(n: usize, extent: f64, origin: f64, lambda: f64) -> Result<Self> {
        if !(lambda > 0.0) {
            return Err(param("lambda", format!("must be positive, got {lambda}")));
        }
        let dx = extent / n as f64;
        Self::new(n, n, dx, dx / lambda, (origin, origin))
    }

    pub fn cells(&self) -> usize {
        self.nx * self.ny
    }

    pub fn cell_center(&self, i: usize, j: usize) -> (f64, f64) {
        (
            self.origin.0 + (i as f64 + 0.5) * self.dx,
            self.origin.1 + (j as f64 + 0.5) * self.dx,
        )
    }
}

/// Per-family relaxation rates; expands to the 8-entry vector
/// `(s_J, s_J, s_e, s_x, s_x, s_q, s_q, s_eps)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RelaxationRates {
    pub s_j: f64,
    pub s_e: f64,
    pub s_x: f64,
    pub s_q: f64,
    pub s_eps: f64,
}

impl RelaxationRates {
    /// Fixed non-momentum rates used throughout the experiments:
    /// s_e = 1.7, s_x = 1.1, s_q = 1.1, s_eps = 1.7.
    pub fn with_momentum_rate(s_j: f64) -> Self {
        Self {
            s_j,
            s_e: 1.7,
            s_x: 1.1,
            s_q: 1.1,
            s_eps: 1.7,
        }
    }

    pub fn to_vector(self) -> [f64; 8] {
        [
            self.s_j, self.s_j, self.s_e, self.s_x, self.s_x, self.s_q, self.s_q, self.s_eps,
        ]
    }
}

/// One instance of the scheme: equilibrium coefficients, relaxation vector
/// and lattice velocity.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SchemeParams {
    pub alpha: f64,
    pub beta: f64,
    pub s: [f64; 8],
    pub lambda: f64,
}

impl SchemeParams {
    pub fn new(alpha: f64, beta: f64, rates: RelaxationRates, lambda: f64) -> Result<Self> {
        let p = Self {
            alpha,
            beta,
            s: rates.to_vector(),
            lambda,
        };
        p.validate()?;
        Ok(p)
    }

    /// alpha = -2, beta = 1 with the default non-momentum rates.
    pub fn standard(s_j: f64, lambda: f64) -> Result<Self> {
        Self::new(-2.0, 1.0, RelaxationRates::with_momentum_rate(s_j), lambda)
    }

    pub fn s_j(&self) -> f64 {
        self.s[0]
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.alpha > -4.0 && self.alpha < 2.0) {
            return Err(param(
                "alpha",
                format!("must lie in (-4, 2), got {}", self.alpha),
            ));
        }
        if !self.beta.is_finite() {
            return Err(param("beta", "must be finite"));
        }
        if !(self.lambda > 0.0 && self.lambda.is_finite()) {
            return Err(param(
                "lambda",
                format!("must be positive, got {}", self.lambda),
            ));
        }
        for (k, &s) in self.s.iter().enumerate() {
            if !(s > 0.0 && s <= 2.0) {
                return Err(param("s", format!("entry {k} = {s} outside (0, 2]")));
            }
        }
        for (a, b) in [(0, 1), (3, 4), (5, 6)] {
            if self.s[a] != self.s[b] {
                return Err(param(
                    "s",
                    format!(
                        "entries {a} and {b} must be equal ({} != {})",
                        self.s[a], self.s[b]
                    ),
                ));
            }
        }
        Ok(())
    }

    pub(crate) fn check_lambda(&self, spec: &LatticeSpec) -> Result<()> {
        if ((self.lambda - spec.lambda) / spec.lambda).abs() > 1e-12 {
            return Err(LabError::Parameter {
                name: "lambda",
                reason: format!(
                    "scheme uses {} but the lattice has dx/dt = {}",
                    self.lambda, spec.lambda
                ),
            });
        }
        Ok(())
    }
}
