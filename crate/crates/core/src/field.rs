use crate::error::{LabError, Result};

/// Cell-centered scalar values on a periodic square-celled grid.
///
/// Cell `(i, j)` sits at `origin + ((i + 1/2) dx, (j + 1/2) dx)` and is stored
/// at `j * nx + i`.
#[derive(Debug, Clone, PartialEq)]
pub struct ScalarField {
    pub nx: usize,
    pub ny: usize,
    pub dx: f64,
    pub origin: (f64, f64),
    pub values: Vec<f64>,
}

impl ScalarField {
    pub fn zeros(nx: usize, ny: usize, dx: f64, origin: (f64, f64)) -> Self {
        Self {
            nx,
            ny,
            dx,
            origin,
            values: vec![0.0; nx * ny],
        }
    }

    /// Samples `f` at every cell center.
    pub fn from_fn(
        nx: usize,
        ny: usize,
        dx: f64,
        origin: (f64, f64),
        mut f: impl FnMut(f64, f64) -> f64,
    ) -> Self {
        let mut field = Self::zeros(nx, ny, dx, origin);
        for j in 0..ny {
            for i in 0..nx {
                let (x, y) = field.cell_center(i, j);
                field.values[j * nx + i] = f(x, y);
            }
        }
        field
    }

    pub fn cell_center(&self, i: usize, j: usize) -> (f64, f64) {
        (
            self.origin.0 + (i as f64 + 0.5) * self.dx,
            self.origin.1 + (j as f64 + 0.5) * self.dx,
        )
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.values[j * self.nx + i]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        self.values[j * self.nx + i] = v;
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn sum(&self) -> f64 {
        self.values.iter().sum()
    }

    pub fn max(&self) -> f64 {
        self.values
            .iter()
            .copied()
            .fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn min(&self) -> f64 {
        self.values.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn area(&self) -> f64 {
        self.nx as f64 * self.ny as f64 * self.dx * self.dx
    }

    pub fn same_grid(&self, other: &Self) -> Result<()> {
        let tol = 1e-12 * self.dx.abs().max(1.0);
        if self.nx != other.nx
            || self.ny != other.ny
            || (self.dx - other.dx).abs() > tol
            || (self.origin.0 - other.origin.0).abs() > tol
            || (self.origin.1 - other.origin.1).abs() > tol
        {
            return Err(LabError::GridMismatch(format!(
                "{}x{} (dx {}) vs {}x{} (dx {})",
                self.nx, self.ny, self.dx, other.nx, other.ny, other.dx
            )));
        }
        Ok(())
    }
}
