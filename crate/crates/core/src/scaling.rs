//! Relations between diffusivity, relaxation rate and mesh parameters, and
//! resolution of per-mesh experiment plans.

use crate::error::{param, LabError, Result};

/// How the time step follows the space step under refinement.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ScalingKind {
    /// `dt = dx^2 / lambda_ref`, so `lambda = lambda_ref / dx` grows as the mesh is refined.
    Diffusive,
    /// `dt = dx / lambda` with fixed `lambda = lambda_ref`.
    Acoustic,
}

impl ScalingKind {
    pub fn name(self) -> &'static str {
        match self {
            ScalingKind::Diffusive => "diffusive",
            ScalingKind::Acoustic => "acoustic",
        }
    }
}

impl std::str::FromStr for ScalingKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "diffusive" => Ok(Self::Diffusive),
            "acoustic" => Ok(Self::Acoustic),
            other => Err(format!(
                "unknown scaling `{other}` (expected diffusive or acoustic)"
            )),
        }
    }
}

/// Henon parameter `1/s - 1/2`.
pub fn henon_sigma(s: f64) -> Result<f64> {
    if !(s > 0.0 && s <= 2.0) {
        return Err(param("s", format!("relaxation rate {s} outside (0, 2]")));
    }
    Ok(1.0 / s - 0.5)
}

fn check_alpha(alpha: f64) -> Result<()> {
    if !(alpha > -4.0 && alpha < 2.0) {
        return Err(param("alpha", format!("must lie in (-4, 2), got {alpha}")));
    }
    Ok(())
}

fn check_positive(name: &'static str, v: f64) -> Result<()> {
    if !(v > 0.0 && v.is_finite()) {
        return Err(param(name, format!("must be positive, got {v}")));
    }
    Ok(())
}

/// `kappa = (4 + alpha)/6 * sigma(s_J) * lambda * dx`.
pub fn diffusivity(s_j: f64, lambda: f64, dx: f64, alpha: f64) -> Result<f64> {
    check_positive("lambda", lambda)?;
    check_positive("dx", dx)?;
    check_alpha(alpha)?;
    Ok((4.0 + alpha) / 6.0 * henon_sigma(s_j)? * lambda * dx)
}

/// Exact inverse of [`diffusivity`]: the momentum relaxation rate that yields
/// `kappa` on a mesh of step `dx`.
pub fn sj_for_diffusivity(kappa: f64, lambda: f64, dx: f64, alpha: f64) -> Result<f64> {
    check_positive("kappa", kappa)?;
    check_positive("lambda", lambda)?;
    check_positive("dx", dx)?;
    check_alpha(alpha)?;
    let sigma = 6.0 * kappa / ((4.0 + alpha) * lambda * dx);
    let s = 1.0 / (sigma + 0.5);
    if !(s > 0.0) {
        return Err(LabError::Infeasible {
            value: s,
            bound: "s_J > 0",
        });
    }
    if !(s < 2.0) {
        return Err(LabError::Infeasible {
            value: s,
            bound: "s_J < 2",
        });
    }
    Ok(s)
}

/// What fixes the transport coefficient of a plan.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Transport {
    /// Physical diffusivity held fixed; s_J is solved per mesh.
    Diffusivity(f64),
    /// s_J held fixed; the diffusivity follows per mesh.
    MomentumRate(f64),
}

/// How the run length is chosen.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum StepTarget {
    /// Nearest-integer number of steps to reach this time.
    FinalTime(f64),
    Steps(usize),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PlanRequest {
    pub n: usize,
    /// Side length of the square domain.
    pub extent: f64,
    pub kind: ScalingKind,
    pub transport: Transport,
    pub alpha: f64,
    pub lambda_ref: f64,
    pub target: StepTarget,
}

/// Fully resolved parameters for one mesh of a sweep.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExperimentPlan {
    pub n: usize,
    pub extent: f64,
    pub kind: ScalingKind,
    pub dx: f64,
    pub dt: f64,
    pub lambda: f64,
    pub alpha: f64,
    pub kappa: f64,
    pub s_j: f64,
    pub steps: usize,
    pub final_time: f64,
}

pub fn resolve_plan(req: &PlanRequest) -> Result<ExperimentPlan> {
    if req.n < 3 {
        return Err(param(
            "n",
            format!("need at least 3 cells per side, got {}", req.n),
        ));
    }
    check_positive("extent", req.extent)?;
    check_positive("lambda_ref", req.lambda_ref)?;
    check_alpha(req.alpha)?;

    let dx = req.extent / req.n as f64;
    let (dt, lambda) = match req.kind {
        ScalingKind::Diffusive => {
            let dt = dx * dx / req.lambda_ref;
            (dt, dx / dt)
        }
        ScalingKind::Acoustic => (dx / req.lambda_ref, req.lambda_ref),
    };

    let (kappa, s_j) = match req.transport {
        Transport::Diffusivity(kappa) => (kappa, sj_for_diffusivity(kappa, lambda, dx, req.alpha)?),
        Transport::MomentumRate(s) => {
            if !(s > 0.0 && s < 2.0) {
                return Err(LabError::Infeasible {
                    value: s,
                    bound: "(0, 2)",
                });
            }
            (diffusivity(s, lambda, dx, req.alpha)?, s)
        }
    };

    let steps = match req.target {
        StepTarget::FinalTime(t) => {
            check_positive("target_final_time", t)?;
            (t / dt).round() as usize
        }
        StepTarget::Steps(s) => s,
    };
    if steps == 0 {
        return Err(param("steps", "resolved plan has zero time steps"));
    }

    Ok(ExperimentPlan {
        n: req.n,
        extent: req.extent,
        kind: req.kind,
        dx,
        dt,
        lambda,
        alpha: req.alpha,
        kappa,
        s_j,
        steps,
        final_time: steps as f64 * dt,
    })
}
