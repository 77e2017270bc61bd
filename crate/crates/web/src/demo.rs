//! Plain-Rust operations behind the browser exports.

use std::f64::consts::PI;

use d2q9_lab::experiments::{gaussian_with_width, run_comparison, SolverKind};
use d2q9_lab::io::{load_preset, Overrides};
use d2q9_lab::lattice::{init_equilibrium, LbmSolver, SchemeParams};
use d2q9_lab::scaling::{sj_for_diffusivity, Transport};
use d2q9_lab::spectral::{acoustic_roots, c0_and_g, heat_rate, lbm_spectrum, WaveVector};
use d2q9_lab::ScalarField;

/// Values per sample in [`dispersion_curve`]:
/// `|k|, heat, Re root1, Re root2, Re gamma0, Re gamma1`.
pub const CURVE_STRIDE: usize = 6;

/// Decay rates along the direction `angle` on an `n x n` mesh of the box
/// `[0, 2 pi]^2`, acoustic scaling with `lambda = 1`, `|k|` from one
/// period per box up to a quarter of the mesh cutoff.
pub fn dispersion_curve(
    kappa: f64,
    n: usize,
    angle: f64,
    samples: usize,
) -> Result<Vec<f64>, String> {
    if n < 4 || samples < 2 {
        return Err(format!(
            "need n >= 4 and samples >= 2, got n = {n}, samples = {samples}"
        ));
    }
    let dx = 2.0 * PI / n as f64;
    let (alpha, lambda) = (-2.0, 1.0);
    let s_j = sj_for_diffusivity(kappa, lambda, dx, alpha).map_err(|e| e.to_string())?;
    let p = SchemeParams::standard(s_j, lambda).map_err(|e| e.to_string())?;
    let (c0, g) = c0_and_g(alpha, lambda, kappa).map_err(|e| e.to_string())?;
    let (k_lo, k_hi) = (1.0, 0.25 * PI / dx);
    let mut out = Vec::with_capacity(samples * CURVE_STRIDE);
    for i in 0..samples {
        let m = k_lo + (k_hi - k_lo) * i as f64 / (samples - 1) as f64;
        let k = WaveVector::new(m * angle.cos(), m * angle.sin());
        let roots = acoustic_roots(k, c0, g).map_err(|e| e.to_string())?;
        let rates = lbm_spectrum(k, &p, dx / lambda).map_err(|e| e.to_string())?;
        out.extend([
            m,
            heat_rate(k, kappa),
            roots[0].re,
            roots[1].re,
            rates[0].gamma.re,
            rates[1].gamma.re,
        ]);
    }
    Ok(out)
}

/// Lattice run of a centered Gaussian on `[-1, 1]^2`.
pub struct GaussianRun {
    solver: LbmSolver,
    n: usize,
}

impl GaussianRun {
    pub fn new(n: usize, s_j: f64, lambda: f64, width: f64) -> Result<Self, String> {
        if n < 3 {
            return Err(format!("need n >= 3, got {n}"));
        }
        if width.is_nan() || width <= 0.0 {
            return Err(format!("width must be positive, got {width}"));
        }
        let p = SchemeParams::standard(s_j, lambda).map_err(|e| e.to_string())?;
        let dx = 2.0 / n as f64;
        let rho0 = ScalarField::from_fn(n, n, dx, (-1.0, -1.0), |x, y| {
            gaussian_with_width(x, y, width)
        });
        let grid = init_equilibrium(&rho0, &p).map_err(|e| e.to_string())?;
        let solver = LbmSolver::new(grid, &p).map_err(|e| e.to_string())?;
        Ok(Self { solver, n })
    }

    pub fn advance(&mut self, steps: usize) {
        self.solver.run(steps);
    }

    pub fn size(&self) -> usize {
        self.n
    }

    pub fn time(&self) -> f64 {
        self.solver.time()
    }

    pub fn steps(&self) -> usize {
        self.solver.steps()
    }

    /// Row-major densities, `j * n + i`.
    pub fn density(&self) -> Vec<f64> {
        self.solver.rho_field().values
    }
}

/// Autocorrelation of the standing wave `cos(3x + 4y)` up to `t = 2 pi`:
/// triples `t, lattice, exact` on an `n x n` mesh.
pub fn autocorrelation_traces(kappa: f64, n: usize) -> Result<Vec<f64>, String> {
    let overrides = Overrides {
        meshes: Some(vec![n]),
        ..Overrides::default()
    };
    let mut c = load_preset("wave-prop", &overrides).map_err(|e| e.to_string())?;
    c.transport = Transport::Diffusivity(kappa);
    c.validate().map_err(|e| e.to_string())?;
    let report = run_comparison(&c.to_spec()).map_err(|e| e.to_string())?;
    let row = &report.rows[0];
    if let Some(f) = &row.failure {
        return Err(f.clone());
    }
    let runs = [row.a.as_ref(), row.b.as_ref()];
    let find = |kind| {
        runs.iter()
            .flatten()
            .find(|r| r.kind == kind)
            .map(|r| &r.trace)
            .ok_or_else(|| format!("no {} run", kind.name()))
    };
    let (lbm, exact) = (find(SolverKind::Lbm)?, find(SolverKind::ExactWave)?);
    Ok(lbm
        .iter()
        .zip(exact)
        .flat_map(|(a, b)| [a.time, a.gamma, b.gamma])
        .collect())
}
