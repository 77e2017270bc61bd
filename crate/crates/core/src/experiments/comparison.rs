#[cfg(feature = "parallel")]
use rayon::prelude::*;

use super::{autocorrelation, convergence_order, error_norms, field_norms, ErrorNorms};
use crate::error::{param, LabError, Result};
use crate::field::ScalarField;
use crate::lattice::{init_equilibrium, LbmSolver, RelaxationRates, SchemeParams};
use crate::reference::{
    haway_dt_from_lbm, haway_stable_dt, heat_fd_stable_dt, HawaySolver, HeatSolver,
};
use crate::scaling::{
    resolve_plan, ExperimentPlan, PlanRequest, ScalingKind, StepTarget, Transport,
};
use crate::spectral::{c0_and_g, StandingWave, WaveVector};

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum InitialCondition {
    /// `exp(-(x^2 + y^2) / width)`.
    Gaussian { width: f64 },
    /// `cos(k.x)` with zero momentum.
    PlaneWave { k: WaveVector },
}

impl InitialCondition {
    pub fn name(&self) -> &'static str {
        match self {
            InitialCondition::Gaussian { .. } => "gaussian",
            InitialCondition::PlaneWave { .. } => "plane-wave",
        }
    }

    /// Samples the density at the cell centers of an `n x n` grid covering
    /// `[origin, origin + extent]^2`.
    pub fn sample(&self, n: usize, extent: f64, origin: f64) -> Result<ScalarField> {
        let dx = extent / n as f64;
        match *self {
            InitialCondition::Gaussian { width } => {
                if !(width > 0.0) {
                    return Err(param("width", format!("must be positive, got {width}")));
                }
                Ok(ScalarField::from_fn(n, n, dx, (origin, origin), |x, y| {
                    super::gaussian_with_width(x, y, width)
                }))
            }
            InitialCondition::PlaneWave { k } => {
                let f = super::plane_wave_init(k, extent)?;
                Ok(ScalarField::from_fn(n, n, dx, (origin, origin), f))
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SolverKind {
    Lbm,
    HeatFd,
    Haway,
    /// Closed-form damped acoustic solution for a plane-wave start.
    ExactWave,
}

impl SolverKind {
    pub const ALL: [SolverKind; 4] = [
        SolverKind::Lbm,
        SolverKind::HeatFd,
        SolverKind::Haway,
        SolverKind::ExactWave,
    ];

    pub fn name(self) -> &'static str {
        match self {
            SolverKind::Lbm => "lbm",
            SolverKind::HeatFd => "heat-fd",
            SolverKind::Haway => "haway",
            SolverKind::ExactWave => "exact-wave",
        }
    }
}

impl std::str::FromStr for SolverKind {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        Self::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| {
                format!("unknown solver `{s}` (expected lbm, heat-fd, haway or exact-wave)")
            })
    }
}

/// Time step of the explicit heat solver relative to the lattice run.
#[derive(Debug, Clone, PartialEq)]
pub enum HeatStepPolicy {
    /// Same time step and step count as the lattice scheme.
    SameAsLattice,
    /// Explicit step count per mesh; `dt = final_time / steps`.
    Steps(Vec<usize>),
    /// Fewest steps with `dt <= safety * dx^2 / (4 kappa)` that divide the
    /// final time.
    Stable { safety: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum HawayStepPolicy {
    /// `ratio` staggered steps per lattice step.
    Ratio(usize),
    /// Fewest steps within `safety` times the CFL bound that divide the
    /// final time.
    Cfl { safety: f64 },
}

#[derive(Debug, Clone, PartialEq)]
pub enum TimeTarget {
    FinalTime(f64),
    /// Lattice step count per mesh.
    Steps(Vec<usize>),
}

/// Everything needed to run a mesh sweep comparing two solvers.
#[derive(Debug, Clone, PartialEq)]
pub struct ComparisonSpec {
    pub name: String,
    pub meshes: Vec<usize>,
    pub extent: f64,
    /// Lower-left corner coordinate (same in x and y).
    pub origin: f64,
    pub kind: ScalingKind,
    pub transport: Transport,
    pub alpha: f64,
    pub beta: f64,
    /// Non-momentum rates; `s_j` is replaced by the per-mesh value.
    pub rates: RelaxationRates,
    pub lambda_ref: f64,
    pub time: TimeTarget,
    pub init: InitialCondition,
    pub solvers: (SolverKind, SolverKind),
    pub heat_steps: HeatStepPolicy,
    pub haway_steps: HawayStepPolicy,
    /// Autocorrelation traces run to this time (at least the final time).
    pub trace_end: Option<f64>,
    /// Approximate number of trace points per solver; 0 disables traces.
    pub trace_samples: usize,
}

impl ComparisonSpec {
    pub fn plan_request(&self, index: usize) -> Result<PlanRequest> {
        let n = *self
            .meshes
            .get(index)
            .ok_or_else(|| param("meshes", format!("no mesh at index {index}")))?;
        let target = match &self.time {
            TimeTarget::FinalTime(t) => StepTarget::FinalTime(*t),
            TimeTarget::Steps(s) => StepTarget::Steps(*s.get(index).ok_or_else(|| {
                param(
                    "steps",
                    format!("{} step counts for {} meshes", s.len(), self.meshes.len()),
                )
            })?),
        };
        Ok(PlanRequest {
            n,
            extent: self.extent,
            kind: self.kind,
            transport: self.transport,
            alpha: self.alpha,
            lambda_ref: self.lambda_ref,
            target,
        })
    }

    pub fn plans(&self) -> Vec<Result<ExperimentPlan>> {
        (0..self.meshes.len())
            .map(|i| resolve_plan(&self.plan_request(i)?))
            .collect()
    }

    pub fn scheme_params(&self, plan: &ExperimentPlan) -> Result<SchemeParams> {
        let rates = RelaxationRates {
            s_j: plan.s_j,
            ..self.rates
        };
        SchemeParams::new(self.alpha, self.beta, rates, plan.lambda)
    }

    /// One-line description of how each solver's time step was chosen.
    pub fn time_policy(&self) -> String {
        let lattice = match &self.time {
            TimeTarget::FinalTime(t) => format!("lattice steps = round({t}/dt)"),
            TimeTarget::Steps(_) => "lattice steps listed per mesh".to_string(),
        };
        let mut parts = vec![lattice, "lattice final time authoritative".to_string()];
        let uses = |k| self.solvers.0 == k || self.solvers.1 == k;
        if uses(SolverKind::HeatFd) {
            parts.push(match &self.heat_steps {
                HeatStepPolicy::SameAsLattice => "heat-fd dt = lattice dt".to_string(),
                HeatStepPolicy::Steps(_) => "heat-fd steps listed per mesh".to_string(),
                HeatStepPolicy::Stable { safety } => {
                    format!("heat-fd dt <= {safety} x stability bound")
                }
            });
        }
        if uses(SolverKind::Haway) {
            parts.push(match self.haway_steps {
                HawayStepPolicy::Ratio(r) => format!("haway dt = lattice dt / {r}"),
                HawayStepPolicy::Cfl { safety } => format!("haway dt <= {safety} x CFL bound"),
            });
            parts.push("haway start: half-step momentum from rest".to_string());
        }
        parts.join("; ")
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TracePoint {
    pub time: f64,
    pub gamma: f64,
}

/// Outcome of one solver on one mesh.
#[derive(Debug, Clone, PartialEq)]
pub struct SolverRun {
    pub kind: SolverKind,
    pub dt: f64,
    pub steps: usize,
    pub final_time: f64,
    /// Density at the final time.
    pub field: ScalarField,
    pub trace: Vec<TracePoint>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MeshRow {
    pub n: usize,
    pub plan: Option<ExperimentPlan>,
    pub a: Option<SolverRun>,
    pub b: Option<SolverRun>,
    pub norms: Option<ErrorNorms>,
    /// Norms divided by the norms of the second solver's field.
    pub relative: Option<ErrorNorms>,
    pub failure: Option<String>,
}

impl MeshRow {
    pub fn is_ok(&self) -> bool {
        self.failure.is_none()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConvergenceReport {
    pub spec: ComparisonSpec,
    pub rows: Vec<MeshRow>,
    pub order_l2: Option<f64>,
    pub order_linf: Option<f64>,
    /// Why the order fit was not produced.
    pub order_note: Option<String>,
}

impl ConvergenceReport {
    pub fn solver_pair(&self) -> String {
        format!(
            "{} vs {}",
            self.spec.solvers.0.name(),
            self.spec.solvers.1.name()
        )
    }

    /// `(dx, norms)` of every successful row.
    pub fn successful(&self) -> Vec<(f64, ErrorNorms)> {
        self.rows
            .iter()
            .filter_map(|r| Some((r.plan?.dx, r.norms?)))
            .collect()
    }
}

enum Stepper {
    Lbm(Box<LbmSolver>),
    Heat(HeatSolver),
    Haway(HawaySolver),
    Exact {
        wave: StandingWave,
        template: ScalarField,
        dt: f64,
        steps: usize,
    },
}

impl Stepper {
    fn step(&mut self) {
        match self {
            Stepper::Lbm(s) => s.step(),
            Stepper::Heat(s) => s.step(),
            Stepper::Haway(s) => s.step(),
            Stepper::Exact { steps, .. } => *steps += 1,
        }
    }

    fn steps(&self) -> usize {
        match self {
            Stepper::Lbm(s) => s.steps(),
            Stepper::Heat(s) => s.steps(),
            Stepper::Haway(s) => s.steps(),
            Stepper::Exact { steps, .. } => *steps,
        }
    }

    fn rho(&self) -> ScalarField {
        match self {
            Stepper::Lbm(s) => s.rho_field(),
            Stepper::Heat(s) => s.field().clone(),
            Stepper::Haway(s) => s.state().rho.clone(),
            Stepper::Exact {
                wave,
                template,
                dt,
                steps,
            } => {
                let t = *steps as f64 * *dt;
                ScalarField::from_fn(
                    template.nx,
                    template.ny,
                    template.dx,
                    template.origin,
                    |x, y| wave.density(x, y, t),
                )
            }
        }
    }
}

fn count_steps(final_time: f64, dt_max: f64) -> usize {
    let s = (final_time / dt_max).ceil();
    // guard against ceil landing one above an exact ratio
    if ((s - 1.0) * dt_max - final_time).abs() <= 1e-12 * final_time {
        (s as usize - 1).max(1)
    } else {
        (s as usize).max(1)
    }
}

fn prepare(
    kind: SolverKind,
    spec: &ComparisonSpec,
    plan: &ExperimentPlan,
    index: usize,
    rho0: &ScalarField,
) -> Result<(Stepper, f64, usize)> {
    let t = plan.final_time;
    match kind {
        SolverKind::Lbm => {
            let p = spec.scheme_params(plan)?;
            let grid = init_equilibrium(rho0, &p)?;
            let solver = LbmSolver::new(grid, &p)?;
            Ok((Stepper::Lbm(Box::new(solver)), plan.dt, plan.steps))
        }
        SolverKind::HeatFd => {
            let (dt, steps) = match &spec.heat_steps {
                HeatStepPolicy::SameAsLattice => (plan.dt, plan.steps),
                HeatStepPolicy::Steps(list) => {
                    let s = *list.get(index).ok_or_else(|| {
                        param(
                            "heat_steps",
                            format!("no heat step count for mesh {}", plan.n),
                        )
                    })?;
                    if s == 0 {
                        return Err(param("heat_steps", "step counts must be positive"));
                    }
                    (t / s as f64, s)
                }
                HeatStepPolicy::Stable { safety } => {
                    let s = count_steps(t, heat_fd_stable_dt(plan.kappa, plan.dx, *safety)?);
                    (t / s as f64, s)
                }
            };
            let solver = HeatSolver::new(rho0.clone(), plan.kappa, dt)?;
            Ok((Stepper::Heat(solver), dt, steps))
        }
        SolverKind::Haway => {
            let (c0, g) = c0_and_g(spec.alpha, plan.lambda, plan.kappa)?;
            let (dt, steps) = match spec.haway_steps {
                HawayStepPolicy::Ratio(r) => {
                    if r == 0 {
                        return Err(param("haway_ratio", "must be positive"));
                    }
                    (haway_dt_from_lbm(plan.dt, r), plan.steps * r)
                }
                HawayStepPolicy::Cfl { safety } => {
                    let s = count_steps(t, haway_stable_dt(c0, plan.dx, safety)?);
                    (t / s as f64, s)
                }
            };
            let solver = HawaySolver::from_rest(rho0, c0, g, dt)?;
            Ok((Stepper::Haway(solver), dt, steps))
        }
        SolverKind::ExactWave => {
            let InitialCondition::PlaneWave { k } = spec.init else {
                return Err(LabError::Domain(
                    "the exact wave solution needs a plane-wave initial condition".into(),
                ));
            };
            let (c0, g) = c0_and_g(spec.alpha, plan.lambda, plan.kappa)?;
            let wave = StandingWave::new(k, c0, g)?;
            Ok((
                Stepper::Exact {
                    wave,
                    template: rho0.clone(),
                    dt: plan.dt,
                    steps: 0,
                },
                plan.dt,
                plan.steps,
            ))
        }
    }
}

fn run_solver(
    kind: SolverKind,
    spec: &ComparisonSpec,
    plan: &ExperimentPlan,
    index: usize,
    rho0: &ScalarField,
) -> Result<SolverRun> {
    let (mut stepper, dt, steps) = prepare(kind, spec, plan, index, rho0)?;
    let trace_steps = match spec.trace_end {
        Some(end) if end > steps as f64 * dt => (end / dt).round() as usize,
        _ => steps,
    };
    let total = steps.max(trace_steps);
    let stride = total
        .checked_div(spec.trace_samples)
        .map_or(0, |s| s.max(1));

    let mut trace = Vec::new();
    if stride > 0 {
        trace.push(TracePoint {
            time: 0.0,
            gamma: 1.0,
        });
    }
    let mut field = None;
    loop {
        let done = stepper.steps();
        let at_final = done == steps;
        let sample = stride > 0 && done > 0 && (done % stride == 0 || done == total);
        if at_final || sample {
            let rho = stepper.rho();
            if sample {
                trace.push(TracePoint {
                    time: done as f64 * dt,
                    gamma: autocorrelation(&rho, rho0)?,
                });
            }
            if at_final {
                if rho.values.iter().any(|v| !v.is_finite()) {
                    return Err(LabError::Domain(format!(
                        "{} produced non-finite values on the {}x{} mesh",
                        kind.name(),
                        plan.n,
                        plan.n
                    )));
                }
                field = Some(rho);
            }
        }
        if done >= total {
            break;
        }
        stepper.step();
    }

    Ok(SolverRun {
        kind,
        dt,
        steps,
        final_time: steps as f64 * dt,
        field: field.expect("final step is always visited"),
        trace,
    })
}

fn run_mesh(spec: &ComparisonSpec, index: usize) -> MeshRow {
    let n = spec.meshes[index];
    let mut row = MeshRow {
        n,
        plan: None,
        a: None,
        b: None,
        norms: None,
        relative: None,
        failure: None,
    };
    let result = (|| -> Result<()> {
        let plan = resolve_plan(&spec.plan_request(index)?)?;
        row.plan = Some(plan);
        let rho0 = spec.init.sample(n, spec.extent, spec.origin)?;
        let a = run_solver(spec.solvers.0, spec, &plan, index, &rho0)?;
        let b = run_solver(spec.solvers.1, spec, &plan, index, &rho0)?;
        let norms = error_norms(&a.field, &b.field)?;
        let reference = field_norms(&b.field);
        let rel = |e: f64, r: f64| if r > 0.0 { e / r } else { f64::NAN };
        row.relative = Some(ErrorNorms {
            l2: rel(norms.l2, reference.l2),
            linf: rel(norms.linf, reference.linf),
        });
        row.norms = Some(norms);
        row.a = Some(a);
        row.b = Some(b);
        Ok(())
    })();
    if let Err(e) = result {
        row.failure = Some(e.to_string());
    }
    row
}

fn validate(spec: &ComparisonSpec) -> Result<()> {
    if spec.meshes.is_empty() {
        return Err(param("meshes", "at least one mesh is required"));
    }
    if spec.meshes.windows(2).any(|w| w[0] >= w[1]) {
        return Err(param("meshes", "mesh sizes must be strictly increasing"));
    }
    if let TimeTarget::Steps(s) = &spec.time {
        if s.len() != spec.meshes.len() {
            return Err(param(
                "steps",
                format!("{} step counts for {} meshes", s.len(), spec.meshes.len()),
            ));
        }
    }
    let uses_heat = spec.solvers.0 == SolverKind::HeatFd || spec.solvers.1 == SolverKind::HeatFd;
    if let (true, HeatStepPolicy::Steps(s)) = (uses_heat, &spec.heat_steps) {
        if s.len() != spec.meshes.len() {
            return Err(param(
                "heat_steps",
                format!("{} step counts for {} meshes", s.len(), spec.meshes.len()),
            ));
        }
    }
    Ok(())
}

/// Runs both solvers on every mesh from the shared initial condition and
/// fits convergence orders to the final-time differences.
///
/// Mesh rows are computed in parallel; a failing mesh is marked in its row
/// and excluded from the fit.
pub fn run_comparison(spec: &ComparisonSpec) -> Result<ConvergenceReport> {
    validate(spec)?;
    let indices: Vec<usize> = (0..spec.meshes.len()).collect();
    #[cfg(feature = "parallel")]
    let rows: Vec<MeshRow> = indices.par_iter().map(|&i| run_mesh(spec, i)).collect();
    #[cfg(not(feature = "parallel"))]
    let rows: Vec<MeshRow> = indices.iter().map(|&i| run_mesh(spec, i)).collect();

    let mut report = ConvergenceReport {
        spec: spec.clone(),
        rows,
        order_l2: None,
        order_linf: None,
        order_note: None,
    };
    let ok = report.successful();
    let dxs: Vec<f64> = ok.iter().map(|r| r.0).collect();
    let l2: Vec<f64> = ok.iter().map(|r| r.1.l2).collect();
    let linf: Vec<f64> = ok.iter().map(|r| r.1.linf).collect();
    match (convergence_order(&dxs, &l2), convergence_order(&dxs, &linf)) {
        (Ok(a), Ok(b)) => {
            report.order_l2 = Some(a);
            report.order_linf = Some(b);
        }
        (Err(e), _) | (_, Err(e)) => report.order_note = Some(e.to_string()),
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small_spec(solvers: (SolverKind, SolverKind)) -> ComparisonSpec {
        ComparisonSpec {
            name: "small".into(),
            meshes: vec![9, 15, 21],
            extent: 2.0,
            origin: -1.0,
            kind: ScalingKind::Acoustic,
            transport: Transport::Diffusivity(0.05),
            alpha: -2.0,
            beta: 1.0,
            rates: RelaxationRates::with_momentum_rate(1.0),
            lambda_ref: 1.0,
            time: TimeTarget::FinalTime(0.3),
            init: InitialCondition::Gaussian { width: 0.09 },
            solvers,
            heat_steps: HeatStepPolicy::Stable { safety: 0.9 },
            haway_steps: HawayStepPolicy::Ratio(4),
            trace_end: None,
            trace_samples: 10,
        }
    }

    #[test]
    fn self_comparison_has_zero_error_and_no_fit() {
        let r = run_comparison(&small_spec((SolverKind::Lbm, SolverKind::Lbm))).unwrap();
        for row in &r.rows {
            assert_eq!(row.norms.unwrap(), ErrorNorms::default());
        }
        assert!(r.order_l2.is_none());
        assert!(r
            .order_note
            .as_deref()
            .unwrap()
            .contains("strictly positive"));
    }

    #[test]
    fn reports_are_deterministic() {
        let spec = small_spec((SolverKind::Lbm, SolverKind::Haway));
        let a = run_comparison(&spec).unwrap();
        let b = run_comparison(&spec).unwrap();
        assert_eq!(a, b);
        assert!(a.order_l2.is_some());
    }

    #[test]
    fn failing_mesh_is_marked() {
        let mut spec = small_spec((SolverKind::Lbm, SolverKind::ExactWave));
        spec.meshes = vec![9, 15, 21];
        let r = run_comparison(&spec).unwrap();
        assert!(r.rows.iter().all(|row| !row.is_ok()));
        assert!(r.rows[0].failure.as_deref().unwrap().contains("plane-wave"));
        assert!(r.order_note.is_some());
    }

    #[test]
    fn heat_step_policies() {
        assert_eq!(count_steps(1.0, 0.25), 4);
        assert_eq!(count_steps(1.0, 0.3), 4);
        assert_eq!(count_steps(0.1, 1.0), 1);
        let mut spec = small_spec((SolverKind::Lbm, SolverKind::HeatFd));
        spec.heat_steps = HeatStepPolicy::Steps(vec![40, 80, 160]);
        let r = run_comparison(&spec).unwrap();
        let row = &r.rows[1];
        let b = row.b.as_ref().unwrap();
        assert_eq!(b.steps, 80);
        assert!((b.final_time - row.plan.unwrap().final_time).abs() < 1e-12);
    }

    #[test]
    fn traces_start_at_one() {
        let r = run_comparison(&small_spec((SolverKind::Lbm, SolverKind::HeatFd))).unwrap();
        for row in &r.rows {
            for run in [row.a.as_ref().unwrap(), row.b.as_ref().unwrap()] {
                assert_eq!(
                    run.trace[0],
                    TracePoint {
                        time: 0.0,
                        gamma: 1.0
                    }
                );
                assert!(run.trace.windows(2).all(|w| w[1].time > w[0].time));
            }
        }
    }

    #[test]
    fn mismatched_step_lists_rejected() {
        let mut spec = small_spec((SolverKind::Lbm, SolverKind::HeatFd));
        spec.time = TimeTarget::Steps(vec![1, 2]);
        assert!(run_comparison(&spec).is_err());
        spec.time = TimeTarget::FinalTime(0.3);
        spec.meshes = vec![15, 9];
        assert!(run_comparison(&spec).is_err());
    }
}
