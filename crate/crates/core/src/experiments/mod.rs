//! Initial conditions, diagnostics and mesh-sweep comparisons.

mod comparison;

pub use comparison::{
    run_comparison, ComparisonSpec, ConvergenceReport, HawayStepPolicy, HeatStepPolicy,
    InitialCondition, MeshRow, SolverKind, SolverRun, TimeTarget, TracePoint,
};

use crate::error::{LabError, Result};
use crate::field::ScalarField;
use crate::scaling::{resolve_plan, ExperimentPlan};
use crate::spectral::{dispersion_spectrum, DispersionSpectrum, WaveVector};

/// Width `w` in `exp(-(x^2 + y^2) / w)` of the reference Gaussian.
pub const GAUSSIAN_WIDTH: f64 = 0.09;

pub fn gaussian_init(x: f64, y: f64) -> f64 {
    gaussian_with_width(x, y, GAUSSIAN_WIDTH)
}

pub fn gaussian_with_width(x: f64, y: f64, width: f64) -> f64 {
    (-(x * x + y * y) / width).exp()
}

/// Number of periods of `k` over a box side of length `extent`, when
/// integer within 1e-9.
fn mode_number(k: f64, extent: f64) -> std::result::Result<i64, f64> {
    let m = k * extent / (2.0 * std::f64::consts::PI);
    let r = m.round();
    if (m - r).abs() <= 1e-9 * r.abs().max(1.0) {
        Ok(r as i64)
    } else {
        Err(r)
    }
}

/// `cos(k.x)`, accepted only when `k` is periodic on a square box of side
/// `extent`.
pub fn plane_wave_init(k: WaveVector, extent: f64) -> Result<impl Fn(f64, f64) -> f64 + Copy> {
    let mx = mode_number(k.kx, extent);
    let my = mode_number(k.ky, extent);
    if mx.is_err() || my.is_err() {
        let unit = 2.0 * std::f64::consts::PI / extent;
        let nearest = |r: std::result::Result<i64, f64>| match r {
            Ok(m) => m as f64,
            Err(m) => m,
        };
        let (nx, ny) = (nearest(mx), nearest(my));
        return Err(LabError::Domain(format!(
            "wave vector ({}, {}) is not periodic on a box of side {extent}; nearest commensurate \
             vector is ({}, {}) = 2 pi / {extent} * ({nx}, {ny})",
            k.kx,
            k.ky,
            nx * unit,
            ny * unit
        )));
    }
    Ok(move |x: f64, y: f64| k.dot(x, y).cos())
}

/// `sum rho_t rho_0 / sum rho_0^2`.
pub fn autocorrelation(rho_t: &ScalarField, rho_0: &ScalarField) -> Result<f64> {
    rho_t.same_grid(rho_0)?;
    let norm: f64 = rho_0.values.iter().map(|v| v * v).sum();
    if norm == 0.0 {
        return Err(LabError::Domain(
            "autocorrelation undefined for an identically zero initial field".into(),
        ));
    }
    let dot: f64 = rho_t
        .values
        .iter()
        .zip(&rho_0.values)
        .map(|(a, b)| a * b)
        .sum();
    Ok(dot / norm)
}

/// Discrete norms of a cellwise difference.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct ErrorNorms {
    /// `sqrt(sum diff^2 dx^2)`.
    pub l2: f64,
    pub linf: f64,
}

pub fn error_norms(a: &ScalarField, b: &ScalarField) -> Result<ErrorNorms> {
    a.same_grid(b)?;
    let mut sq = 0.0;
    let mut linf = 0.0f64;
    for (x, y) in a.values.iter().zip(&b.values) {
        let d = x - y;
        sq += d * d;
        linf = linf.max(d.abs());
    }
    Ok(ErrorNorms {
        l2: (sq * a.dx * a.dx).sqrt(),
        linf,
    })
}

/// Same norms of a single field.
pub fn field_norms(a: &ScalarField) -> ErrorNorms {
    let sq: f64 = a.values.iter().map(|v| v * v).sum();
    ErrorNorms {
        l2: (sq * a.dx * a.dx).sqrt(),
        linf: a.values.iter().fold(0.0f64, |m, v| m.max(v.abs())),
    }
}

/// Least-squares slope of `log(error)` against `log(dx)`.
pub fn convergence_order(dxs: &[f64], errors: &[f64]) -> Result<f64> {
    if dxs.len() != errors.len() {
        return Err(LabError::Domain(format!(
            "{} mesh sizes but {} errors",
            dxs.len(),
            errors.len()
        )));
    }
    if dxs.len() < 3 {
        return Err(LabError::InsufficientPoints {
            needed: 3,
            got: dxs.len(),
        });
    }
    if let Some(&e) = errors.iter().find(|e| !(**e > 0.0)) {
        return Err(LabError::NonPositiveError(e));
    }
    if let Some(&h) = dxs.iter().find(|h| !(**h > 0.0)) {
        return Err(LabError::Domain(format!(
            "mesh size must be positive, got {h}"
        )));
    }
    let xs: Vec<f64> = dxs.iter().map(|h| h.ln()).collect();
    let ys: Vec<f64> = errors.iter().map(|e| e.ln()).collect();
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let mut sxy = 0.0;
    let mut sxx = 0.0;
    for (x, y) in xs.iter().zip(&ys) {
        sxy += (x - mx) * (y - my);
        sxx += (x - mx) * (x - mx);
    }
    if sxx == 0.0 {
        return Err(LabError::Domain("all mesh sizes are equal".into()));
    }
    Ok(sxy / sxx)
}

/// Lattice and model spectra on one mesh of a sweep.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectrumRow {
    pub plan: ExperimentPlan,
    pub spectra: Vec<DispersionSpectrum>,
}

/// Evaluates the dispersion spectrum of every wave vector on every mesh of
/// `spec`, using each mesh's resolved time step and relaxation rate.
pub fn dispersion_sweep(spec: &ComparisonSpec, ks: &[WaveVector]) -> Result<Vec<SpectrumRow>> {
    if ks.is_empty() {
        return Err(LabError::Domain("no wave vectors given".into()));
    }
    (0..spec.meshes.len())
        .map(|i| {
            let plan = resolve_plan(&spec.plan_request(i)?)?;
            let p = spec.scheme_params(&plan)?;
            let spectra = ks
                .iter()
                .map(|&k| dispersion_spectrum(k, &p, plan.dt))
                .collect::<Result<Vec<_>>>()?;
            Ok(SpectrumRow { plan, spectra })
        })
        .collect()
}
