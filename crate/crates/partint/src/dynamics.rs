//! Structure-preserving time integration of Hamilton's equations.
//!
//! Three one-step schemes:
//!
//! - **Implicit midpoint** — the default. Symplectic and self-adjoint, it
//!   handles position-dependent kinetic forms (squared-distance and volume
//!   Hamiltonians couple coordinates and momenta in the kinetic term, so no
//!   explicit splitting exists). The implicit equation is solved by damped
//!   Newton iteration; the Jacobian comes from dual-number second
//!   derivatives of the energy, never from finite differences.
//! - **Strang splitting** — explicit kick–drift–kick for separable energies
//!   `T(p) + V(q)`; the separability of both parts is checked against the
//!   chart before any stepping.
//! - **Classical Runge–Kutta 4** — non-symplectic reference used to measure
//!   convergence orders and to show what energy drift looks like without
//!   structure preservation.
//!
//! All schemes use a fixed step size: naive adaptivity destroys the
//! symplectic property that motivates the midpoint rule in the first place.
//! Poles of the energy (collisions) are not regularized — hitting one stops
//! the run with a domain error and a truncated trajectory.

use std::sync::Arc;

use nalgebra::{DMatrix, DVector};

use crate::expr::dual::Dual;
use crate::expr::Expression;
use crate::poisson::{Chart, ChartBound, PhasePoint, PoissonError};

/// Observables whose initial value is within this of zero count as "starting
/// on the zero level set" for drift flagging.
pub const ZERO_LEVEL_TOL: f64 = 1e-12;

/// A zero-level observable that exceeds this during a run is flagged: the
/// level set was not numerically invariant.
pub const LEVEL_FLAG_TOL: f64 = 1e-8;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum DynamicsError {
    #[error(
        "midpoint Newton iteration stalled after {iterations} iterations \
         (residual {residual:.3e}, tolerance {tolerance:.3e}); a smaller \
         step size usually helps"
    )]
    NonConvergence {
        iterations: usize,
        residual: f64,
        tolerance: f64,
    },
    #[error("the flow left the domain of the energy: {0}")]
    Domain(String),
    #[error("split-step integration needs a separable energy: the {part} part depends on `{symbol}`")]
    SeparabilityViolation { part: String, symbol: String },
    #[error("invalid integrator settings: {0}")]
    InvalidSpec(String),
    #[error(transparent)]
    Chart(#[from] PoissonError),
}

/// Evaluation failures during stepping mean the flow reached a pole or left
/// the domain; structural failures (unknown symbols) pass through unchanged.
fn domainize(e: PoissonError) -> DynamicsError {
    match e {
        PoissonError::Eval(ev) => DynamicsError::Domain(ev.to_string()),
        other => DynamicsError::Chart(other),
    }
}

/// One-step method selector.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Scheme {
    ImplicitMidpoint,
    StrangSplit,
    Rk4Reference,
}

impl Scheme {
    pub fn name(self) -> &'static str {
        match self {
            Scheme::ImplicitMidpoint => "implicit-midpoint",
            Scheme::StrangSplit => "strang-split",
            Scheme::Rk4Reference => "rk4-reference",
        }
    }
}

impl std::fmt::Display for Scheme {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for Scheme {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "implicit-midpoint" => Ok(Scheme::ImplicitMidpoint),
            "strang-split" => Ok(Scheme::StrangSplit),
            "rk4-reference" => Ok(Scheme::Rk4Reference),
            other => Err(format!(
                "unknown scheme `{other}` (expected implicit-midpoint, strang-split, or rk4-reference)"
            )),
        }
    }
}

/// Fixed-step integrator settings.
#[derive(Debug, Clone, PartialEq)]
pub struct IntegratorSpec {
    pub scheme: Scheme,
    pub dt: f64,
    pub steps: usize,
    pub newton_tol: f64,
    pub newton_max_iter: usize,
}

impl IntegratorSpec {
    /// Default Newton settings: tolerance 1e-12, at most 50 iterations.
    pub fn new(scheme: Scheme, dt: f64, steps: usize) -> IntegratorSpec {
        IntegratorSpec {
            scheme,
            dt,
            steps,
            newton_tol: 1e-12,
            newton_max_iter: 50,
        }
    }

    pub fn midpoint(dt: f64, steps: usize) -> IntegratorSpec {
        IntegratorSpec::new(Scheme::ImplicitMidpoint, dt, steps)
    }

    pub fn strang(dt: f64, steps: usize) -> IntegratorSpec {
        IntegratorSpec::new(Scheme::StrangSplit, dt, steps)
    }

    pub fn rk4(dt: f64, steps: usize) -> IntegratorSpec {
        IntegratorSpec::new(Scheme::Rk4Reference, dt, steps)
    }

    pub fn total_time(&self) -> f64 {
        self.dt * self.steps as f64
    }

    pub fn validate(&self) -> Result<(), DynamicsError> {
        if !(self.dt.is_finite() && self.dt != 0.0) {
            return Err(DynamicsError::InvalidSpec(format!(
                "step size must be finite and nonzero, got {}",
                self.dt
            )));
        }
        if !(self.newton_tol.is_finite() && self.newton_tol > 0.0) {
            return Err(DynamicsError::InvalidSpec(format!(
                "Newton tolerance must be positive, got {}",
                self.newton_tol
            )));
        }
        if self.newton_max_iter == 0 {
            return Err(DynamicsError::InvalidSpec(
                "Newton iteration cap must be at least 1".to_string(),
            ));
        }
        Ok(())
    }
}

/// An energy function, either monolithic or split into kinetic and
/// potential parts (required for Strang stepping).
#[derive(Debug, Clone)]
pub enum Hamiltonian {
    Full(Expression),
    Split {
        kinetic: Expression,
        potential: Expression,
        /// Kinetic + potential, prebuilt for energy evaluation.
        total: Expression,
    },
}

impl Hamiltonian {
    pub fn full(h: Expression) -> Hamiltonian {
        Hamiltonian::Full(h)
    }

    pub fn split(kinetic: Expression, potential: Expression) -> Hamiltonian {
        let total = kinetic.plus(&potential);
        Hamiltonian::Split {
            kinetic,
            potential,
            total,
        }
    }

    /// The complete energy expression.
    pub fn total(&self) -> &Expression {
        match self {
            Hamiltonian::Full(h) => h,
            Hamiltonian::Split { total, .. } => total,
        }
    }

    /// Kinetic and potential parts when the energy was built split.
    pub fn parts(&self) -> Option<(&Expression, &Expression)> {
        match self {
            Hamiltonian::Full(_) => None,
            Hamiltonian::Split {
                kinetic, potential, ..
            } => Some((kinetic, potential)),
        }
    }
}

impl From<Expression> for Hamiltonian {
    fn from(h: Expression) -> Hamiltonian {
        Hamiltonian::Full(h)
    }
}

// ---------------------------------------------------------------------------
// Implicit midpoint
// ---------------------------------------------------------------------------

/// Midpoint stepper with the energy bound to a chart once; reused across
/// steps so long runs pay no per-step symbol resolution.
struct MidpointStepper<'e> {
    bound: ChartBound<'e>,
    dof: usize,
    dim: usize,
    newton_tol: f64,
    newton_max_iter: usize,
}

impl<'e> MidpointStepper<'e> {
    fn new(h: &'e Expression, chart: &Chart, spec: &IntegratorSpec) -> Result<Self, DynamicsError> {
        Ok(MidpointStepper {
            bound: ChartBound::new(h, chart)?,
            dof: chart.dof(),
            dim: chart.dim(),
            newton_tol: spec.newton_tol,
            newton_max_iter: spec.newton_max_iter,
        })
    }

    /// Hamiltonian vector field `(∂H/∂p, −∂H/∂q)` at raw coordinates.
    fn field(&self, coords: &[f64]) -> Result<Vec<f64>, DynamicsError> {
        let grad = self.bound.gradient(coords).map_err(domainize)?;
        let n = self.dof;
        let mut out = Vec::with_capacity(self.dim);
        out.extend_from_slice(&grad[n..]);
        out.extend(grad[..n].iter().map(|g| -g));
        if out.iter().any(|v| !v.is_finite()) {
            return Err(DynamicsError::Domain(
                "the vector field became non-finite (the flow is at or past a pole)".to_string(),
            ));
        }
        Ok(out)
    }

    /// Residual of the midpoint equation `F(z) = z − x − dt·X_H((x+z)/2)`
    /// and its max-norm.
    fn residual(
        &self,
        x: &[f64],
        z: &[f64],
        dt: f64,
    ) -> Result<(DVector<f64>, f64), DynamicsError> {
        let mid: Vec<f64> = x.iter().zip(z).map(|(a, b)| 0.5 * (a + b)).collect();
        let f = self.field(&mid)?;
        let res = DVector::from_iterator(
            self.dim,
            (0..self.dim).map(|i| z[i] - x[i] - dt * f[i]),
        );
        let norm = res.amax();
        Ok((res, norm))
    }

    /// Newton Jacobian `I − (dt/2)·S·H''(mid)`, with the energy Hessian from
    /// nested dual numbers (one gradient pass per column, exact to roundoff).
    fn newton_jacobian(&self, mid: &[f64], dt: f64) -> Result<DMatrix<f64>, DynamicsError> {
        let dim = self.dim;
        let n = self.dof;
        let mut hess = DMatrix::zeros(dim, dim);
        for j in 0..dim {
            let seeded: Vec<Dual<f64>> = mid
                .iter()
                .enumerate()
                .map(|(i, &v)| {
                    if i == j {
                        Dual::seeded(v)
                    } else {
                        Dual::constant(v)
                    }
                })
                .collect();
            let col = self.bound.gradient(&seeded).map_err(domainize)?;
            for k in 0..dim {
                hess[(k, j)] = col[k].eps;
            }
        }
        let mut jac = DMatrix::identity(dim, dim);
        let half_dt = 0.5 * dt;
        // X_H = S·∇H with S = [[0, I], [−I, 0]], so ∂F/∂z = I − (dt/2)·S·H''.
        for r in 0..n {
            for c in 0..dim {
                jac[(r, c)] -= half_dt * hess[(n + r, c)];
                jac[(n + r, c)] += half_dt * hess[(r, c)];
            }
        }
        Ok(jac)
    }

    fn step(&self, x: &[f64], dt: f64) -> Result<Vec<f64>, DynamicsError> {
        // Explicit Euler initial guess.
        let f0 = self.field(x)?;
        let mut z: Vec<f64> = x.iter().zip(&f0).map(|(a, f)| a + dt * f).collect();
        let (mut res, mut res_norm) = self.residual(x, &z, dt)?;

        for _iter in 0..self.newton_max_iter {
            if res_norm <= self.newton_tol {
                return Ok(z);
            }
            let mid: Vec<f64> = x.iter().zip(&z).map(|(a, b)| 0.5 * (a + b)).collect();
            let jac = self.newton_jacobian(&mid, dt)?;
            let delta = jac.lu().solve(&res).ok_or(DynamicsError::NonConvergence {
                iterations: _iter,
                residual: res_norm,
                tolerance: self.newton_tol,
            })?;

            // Damped update: halve the step while the residual grows.
            let mut lambda = 1.0;
            loop {
                let z_try: Vec<f64> = z
                    .iter()
                    .zip(delta.iter())
                    .map(|(v, d)| v - lambda * d)
                    .collect();
                let (res_try, norm_try) = self.residual(x, &z_try, dt)?;
                if norm_try < res_norm || lambda <= 1.0 / 64.0 {
                    z = z_try;
                    res = res_try;
                    res_norm = norm_try;
                    break;
                }
                lambda *= 0.5;
            }
        }
        if res_norm <= self.newton_tol {
            Ok(z)
        } else {
            Err(DynamicsError::NonConvergence {
                iterations: self.newton_max_iter,
                residual: res_norm,
                tolerance: self.newton_tol,
            })
        }
    }
}

/// One implicit-midpoint step: solve `z = x + dt·X_H((x+z)/2)` by damped
/// Newton iteration with a dual-number Jacobian.
///
/// Newton settings come from `spec`; `dt` is taken from the argument (not
/// `spec.dt`), which makes reversal steps with `−dt` a one-liner.
pub fn step_implicit_midpoint(
    h: &Expression,
    x: &PhasePoint,
    dt: f64,
    spec: &IntegratorSpec,
) -> Result<PhasePoint, DynamicsError> {
    let stepper = MidpointStepper::new(h, x.chart(), spec)?;
    let z = stepper.step(x.coords(), dt)?;
    Ok(PhasePoint::new(x.chart().clone(), z).expect("midpoint produced finite coordinates"))
}

// ---------------------------------------------------------------------------
// Strang splitting
// ---------------------------------------------------------------------------

struct StrangStepper<'e> {
    kinetic: ChartBound<'e>,
    potential: ChartBound<'e>,
    dof: usize,
}

impl<'e> StrangStepper<'e> {
    fn new(
        kinetic: &'e Expression,
        potential: &'e Expression,
        chart: &Chart,
    ) -> Result<Self, DynamicsError> {
        // The kinetic part may touch only momenta, the potential only
        // coordinates; chart constants are fine in both.
        for name in kinetic.free_symbols() {
            if let Some(i) = chart.coord_index(name) {
                if i < chart.dof() {
                    return Err(DynamicsError::SeparabilityViolation {
                        part: "kinetic".to_string(),
                        symbol: name.clone(),
                    });
                }
            }
        }
        for name in potential.free_symbols() {
            if let Some(i) = chart.coord_index(name) {
                if i >= chart.dof() {
                    return Err(DynamicsError::SeparabilityViolation {
                        part: "potential".to_string(),
                        symbol: name.clone(),
                    });
                }
            }
        }
        Ok(StrangStepper {
            kinetic: ChartBound::new(kinetic, chart)?,
            potential: ChartBound::new(potential, chart)?,
            dof: chart.dof(),
        })
    }

    fn step(&self, x: &[f64], dt: f64) -> Result<Vec<f64>, DynamicsError> {
        let n = self.dof;
        let mut z = x.to_vec();
        // Half kick: p ← p − (dt/2)·∂V/∂q.
        let gv = self.potential.gradient(&z).map_err(domainize)?;
        for i in 0..n {
            z[n + i] -= 0.5 * dt * gv[i];
        }
        // Full drift: q ← q + dt·∂T/∂p at the updated momenta.
        let gt = self.kinetic.gradient(&z).map_err(domainize)?;
        for i in 0..n {
            z[i] += dt * gt[n + i];
        }
        // Half kick at the new coordinates.
        let gv = self.potential.gradient(&z).map_err(domainize)?;
        for i in 0..n {
            z[n + i] -= 0.5 * dt * gv[i];
        }
        if z.iter().any(|v| !v.is_finite()) {
            return Err(DynamicsError::Domain(
                "the split step produced non-finite coordinates".to_string(),
            ));
        }
        Ok(z)
    }
}

/// One Strang (kick–drift–kick) step for a separable energy `T(p) + V(q)`.
/// Explicit, second order, symplectic.
pub fn step_strang(
    kinetic: &Expression,
    potential: &Expression,
    x: &PhasePoint,
    dt: f64,
) -> Result<PhasePoint, DynamicsError> {
    let stepper = StrangStepper::new(kinetic, potential, x.chart())?;
    let z = stepper.step(x.coords(), dt)?;
    Ok(PhasePoint::new(x.chart().clone(), z).expect("split step produced finite coordinates"))
}

// ---------------------------------------------------------------------------
// Runge–Kutta 4 reference
// ---------------------------------------------------------------------------

struct Rk4Stepper<'e> {
    inner: MidpointStepper<'e>,
}

impl<'e> Rk4Stepper<'e> {
    fn new(h: &'e Expression, chart: &Chart, spec: &IntegratorSpec) -> Result<Self, DynamicsError> {
        Ok(Rk4Stepper {
            inner: MidpointStepper::new(h, chart, spec)?,
        })
    }

    fn step(&self, x: &[f64], dt: f64) -> Result<Vec<f64>, DynamicsError> {
        let dim = x.len();
        let at = |base: &[f64], k: &[f64], scale: f64| -> Vec<f64> {
            base.iter().zip(k).map(|(b, v)| b + scale * v).collect()
        };
        let k1 = self.inner.field(x)?;
        let k2 = self.inner.field(&at(x, &k1, 0.5 * dt))?;
        let k3 = self.inner.field(&at(x, &k2, 0.5 * dt))?;
        let k4 = self.inner.field(&at(x, &k3, dt))?;
        let mut z = Vec::with_capacity(dim);
        for i in 0..dim {
            z.push(x[i] + dt / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]));
        }
        Ok(z)
    }
}

/// One classical fourth-order Runge–Kutta step. Not symplectic; used as a
/// reference solution and as a contrast in drift comparisons.
pub fn step_rk4(h: &Expression, x: &PhasePoint, dt: f64) -> Result<PhasePoint, DynamicsError> {
    let spec = IntegratorSpec::rk4(dt, 1);
    let stepper = Rk4Stepper::new(h, x.chart(), &spec)?;
    let z = stepper.step(x.coords(), dt)?;
    Ok(PhasePoint::new(x.chart().clone(), z).expect("rk4 produced finite coordinates"))
}

// ---------------------------------------------------------------------------
// Trajectories
// ---------------------------------------------------------------------------

/// Recorded flow: states, times, and named observable series. The energy is
/// always the first observable.
#[derive(Debug, Clone)]
pub struct Trajectory {
    chart: Arc<Chart>,
    times: Vec<f64>,
    states: Vec<PhasePoint>,
    observable_names: Vec<String>,
    /// One series per observable name, each as long as `times`.
    observable_series: Vec<Vec<f64>>,
}

impl Trajectory {
    pub fn chart(&self) -> &Arc<Chart> {
        &self.chart
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn states(&self) -> &[PhasePoint] {
        &self.states
    }

    pub fn last_state(&self) -> &PhasePoint {
        self.states.last().expect("trajectory holds at least the initial state")
    }

    pub fn observable_names(&self) -> &[String] {
        &self.observable_names
    }

    pub fn observable(&self, name: &str) -> Option<&[f64]> {
        let i = self.observable_names.iter().position(|n| n == name)?;
        Some(&self.observable_series[i])
    }

    /// The energy series (always recorded).
    pub fn energy(&self) -> &[f64] {
        &self.observable_series[0]
    }
}

/// Outcome of a run: the trajectory as far as it got, plus the error that
/// stopped it early, if any.
#[derive(Debug, Clone)]
pub struct IntegrationResult {
    pub trajectory: Trajectory,
    pub error: Option<DynamicsError>,
}

/// Integrate `steps` fixed steps of the chosen scheme from `x0`, recording
/// the energy and every named observable at each state.
///
/// Setup problems (invalid settings, symbols missing from the chart, a
/// non-separable energy handed to the split scheme) fail immediately.
/// Runtime problems (poles, Newton stalls) return the truncated trajectory
/// together with the error.
pub fn integrate(
    h: &Hamiltonian,
    x0: &PhasePoint,
    spec: &IntegratorSpec,
    observables: &[(String, Expression)],
) -> Result<IntegrationResult, DynamicsError> {
    spec.validate()?;
    if observables.iter().any(|(name, _)| name == "energy") {
        return Err(DynamicsError::InvalidSpec(
            "`energy` is recorded automatically; pick another observable name".to_string(),
        ));
    }
    let chart = x0.chart();

    enum Stepper<'e> {
        Mid(MidpointStepper<'e>),
        Strang(StrangStepper<'e>),
        Rk4(Rk4Stepper<'e>),
    }
    let stepper = match spec.scheme {
        Scheme::ImplicitMidpoint => Stepper::Mid(MidpointStepper::new(h.total(), chart, spec)?),
        Scheme::Rk4Reference => Stepper::Rk4(Rk4Stepper::new(h.total(), chart, spec)?),
        Scheme::StrangSplit => {
            let Some((kinetic, potential)) = h.parts() else {
                return Err(DynamicsError::InvalidSpec(
                    "strang-split needs an energy built from kinetic and potential parts"
                        .to_string(),
                ));
            };
            Stepper::Strang(StrangStepper::new(kinetic, potential, chart)?)
        }
    };

    let energy_bound = ChartBound::new(h.total(), chart)?;
    let obs_bounds: Vec<ChartBound> = observables
        .iter()
        .map(|(_, e)| ChartBound::new(e, chart))
        .collect::<Result<_, _>>()?;
    let record = |coords: &[f64]| -> Result<Vec<f64>, DynamicsError> {
        let mut row = Vec::with_capacity(1 + obs_bounds.len());
        row.push(energy_bound.value(coords).map_err(domainize)?);
        for b in &obs_bounds {
            row.push(b.value(coords).map_err(domainize)?);
        }
        Ok(row)
    };

    let mut observable_names = vec!["energy".to_string()];
    observable_names.extend(observables.iter().map(|(n, _)| n.clone()));
    let mut series: Vec<Vec<f64>> = vec![Vec::with_capacity(spec.steps + 1); observable_names.len()];

    // A failure at the initial state is a setup problem, not a flow event.
    let row0 = record(x0.coords())?;
    for (s, v) in series.iter_mut().zip(&row0) {
        s.push(*v);
    }
    let mut times = vec![0.0];
    let mut raw_states: Vec<Vec<f64>> = vec![x0.coords().to_vec()];
    let mut error = None;

    for k in 0..spec.steps {
        let current = raw_states.last().expect("at least the initial state");
        let next = match &stepper {
            Stepper::Mid(s) => s.step(current, spec.dt),
            Stepper::Strang(s) => s.step(current, spec.dt),
            Stepper::Rk4(s) => s.step(current, spec.dt),
        };
        let next = match next {
            Ok(z) => z,
            Err(e) => {
                error = Some(e);
                break;
            }
        };
        match record(&next) {
            Ok(row) => {
                for (s, v) in series.iter_mut().zip(&row) {
                    s.push(*v);
                }
            }
            Err(e) => {
                error = Some(e);
                break;
            }
        }
        times.push((k + 1) as f64 * spec.dt);
        raw_states.push(next);
    }

    let states: Vec<PhasePoint> = raw_states
        .into_iter()
        .map(|coords| {
            PhasePoint::new(chart.clone(), coords).expect("steppers produce finite coordinates")
        })
        .collect();
    Ok(IntegrationResult {
        trajectory: Trajectory {
            chart: chart.clone(),
            times,
            states,
            observable_names,
            observable_series: series,
        },
        error,
    })
}

// ---------------------------------------------------------------------------
// Drift reporting
// ---------------------------------------------------------------------------

/// Conservation summary for one recorded observable.
#[derive(Debug, Clone, PartialEq)]
pub struct ObservableDrift {
    pub name: String,
    pub initial: f64,
    /// Max |f(t) − f(0)| over the run.
    pub max_drift: f64,
    /// True when the run started on the zero level set |f(0)| ≤ 1e-12.
    pub started_on_zero_level: bool,
    /// Zero-level runs only: max |f(t)|, the level-set residual.
    pub max_abs: f64,
    /// Zero-level runs whose residual exceeded the invariance tolerance:
    /// the level set failed to be invariant under the discrete flow.
    pub flagged: bool,
}

/// Conservation summary for a whole trajectory.
#[derive(Debug, Clone, PartialEq)]
pub struct DriftReport {
    pub energy_initial: f64,
    /// Max |E(t) − E(0)|.
    pub max_energy_drift: f64,
    /// Max |E(t) − E(0)| / |E(0)|, or the absolute drift when E(0) = 0.
    pub relative_energy_drift: f64,
    /// Every non-energy observable, in registration order.
    pub observables: Vec<ObservableDrift>,
}

impl DriftReport {
    /// Observables that started on their zero level and left it.
    pub fn flagged(&self) -> impl Iterator<Item = &ObservableDrift> {
        self.observables.iter().filter(|o| o.flagged)
    }
}

/// Summarize conservation over a recorded trajectory: relative energy
/// drift, per-observable drift, and level-set invariance flags for
/// observables that started at zero.
pub fn drift_report(traj: &Trajectory) -> DriftReport {
    let energy = traj.energy();
    let e0 = energy[0];
    let max_energy_drift = energy
        .iter()
        .map(|e| (e - e0).abs())
        .fold(0.0_f64, f64::max);
    let relative_energy_drift = if e0 == 0.0 {
        max_energy_drift
    } else {
        max_energy_drift / e0.abs()
    };
    let observables = traj
        .observable_names()
        .iter()
        .skip(1)
        .map(|name| {
            let series = traj.observable(name).expect("name comes from the trajectory");
            let f0 = series[0];
            let max_drift = series.iter().map(|v| (v - f0).abs()).fold(0.0_f64, f64::max);
            let max_abs = series.iter().map(|v| v.abs()).fold(0.0_f64, f64::max);
            let started_on_zero_level = f0.abs() <= ZERO_LEVEL_TOL;
            ObservableDrift {
                name: name.clone(),
                initial: f0,
                max_drift,
                started_on_zero_level,
                max_abs,
                flagged: started_on_zero_level && max_abs > LEVEL_FLAG_TOL,
            }
        })
        .collect();
    DriftReport {
        energy_initial: e0,
        max_energy_drift,
        relative_energy_drift,
        observables,
    }
}
