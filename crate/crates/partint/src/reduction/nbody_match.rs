//! Matching a Cartesian N-body state to the squared-distance variables and
//! running both representations side by side.
//!
//! The squared-distance description carries only the shape of the
//! configuration, so it represents exactly the motions with zero total
//! linear and angular momentum. Matching therefore checks those
//! preconditions first, reads the squared distances off the positions, and
//! recovers the conjugate momenta from a velocity solve: the reduced
//! kinetic matrix `G` must satisfy `2 G p = dρ/dt`, where the rates come
//! from the bracket of each squared distance with the full energy.
//!
//! The comparison harness then integrates the Cartesian system and the
//! reduced one from matched initial data and reports how far the squared
//! distances drift apart — and optionally does the same through the
//! simplex-content variables, whose momenta live on a smaller manifold
//! reached by a least-squares pullback.

use nalgebra::{DMatrix, DVector};

use super::ReductionError;
use crate::dynamics::{integrate, IntegratorSpec, Trajectory};
use crate::expr::Expression;
use crate::models::{
    nbody_cartesian, rho_kinetic_matrix, rho_model, vol_model_with_potential, volume_system,
    NBody,
};
use crate::poisson::{poisson_bracket, PhasePoint};

/// Total linear and angular momentum must vanish to this tolerance before
/// a state can be matched to shape variables.
const MOMENTUM_PRECONDITION_TOL: f64 = 1e-10;

/// Largest velocity-solve residual a comparison run will accept.
const MATCH_RESIDUAL_LIMIT: f64 = 1e-8;

/// Kinetic matrices with a smaller singular-value ratio count as singular.
const SIGMA_RATIO_LIMIT: f64 = 1e-12;

/// A Cartesian state translated into squared-distance variables.
#[derive(Debug, Clone)]
pub struct MatchedMomenta {
    /// Squared pair distances, in the fixed pair-name order.
    pub rho: Vec<f64>,
    /// Time derivative of each squared distance under the full flow.
    pub rho_rate: Vec<f64>,
    /// Conjugate momenta recovered from the velocity solve.
    pub p_rho: Vec<f64>,
    /// Scaled infinity-norm residual of `2 G p = dρ/dt`.
    pub residual: f64,
    /// Singular-value ratio of the kinetic matrix at this shape.
    pub sigma_ratio: f64,
}

/// Flatten body-major positions and momenta into the Cartesian chart's
/// coordinate order (all positions, then all momenta).
pub fn cartesian_coords(positions: &DMatrix<f64>, momenta: &DMatrix<f64>) -> Vec<f64> {
    let mut coords = Vec::with_capacity(2 * positions.len());
    for i in 0..positions.nrows() {
        for a in 0..positions.ncols() {
            coords.push(positions[(i, a)]);
        }
    }
    for i in 0..momenta.nrows() {
        for a in 0..momenta.ncols() {
            coords.push(momenta[(i, a)]);
        }
    }
    coords
}

/// Momenta for the given positions and velocities, corrected so the total
/// linear momentum and total angular momentum both vanish.
///
/// The linear part subtracts the center-of-mass velocity; the angular part
/// subtracts the rigid rotation whose angular momentum matches the
/// remainder (scalar rate in the plane, inertia-tensor solve in space).
/// Supports one, two, or three spatial dimensions.
pub fn momenta_with_zero_totals(
    masses: &[f64],
    positions: &DMatrix<f64>,
    velocities: &DMatrix<f64>,
) -> Result<DMatrix<f64>, ReductionError> {
    let n = positions.nrows();
    let d = positions.ncols();
    if masses.len() != n || velocities.nrows() != n || velocities.ncols() != d {
        return Err(ReductionError::InvalidInput(
            "masses, positions, and velocities disagree on body count or dimension".into(),
        ));
    }
    if d == 0 || d > 3 {
        return Err(ReductionError::InvalidInput(
            "zero-total projection supports one to three spatial dimensions".into(),
        ));
    }
    let total_mass: f64 = masses.iter().sum();

    // Remove the center-of-mass velocity: total linear momentum becomes zero.
    let mut v = velocities.clone();
    for a in 0..d {
        let vcm: f64 = (0..n).map(|i| masses[i] * v[(i, a)]).sum::<f64>() / total_mass;
        for i in 0..n {
            v[(i, a)] -= vcm;
        }
    }
    // Positions relative to the center of mass.
    let mut s = positions.clone();
    for a in 0..d {
        let rcm: f64 = (0..n).map(|i| masses[i] * positions[(i, a)]).sum::<f64>() / total_mass;
        for i in 0..n {
            s[(i, a)] -= rcm;
        }
    }

    match d {
        1 => {} // No rotations on a line.
        2 => {
            let l: f64 = (0..n)
                .map(|i| masses[i] * (s[(i, 0)] * v[(i, 1)] - s[(i, 1)] * v[(i, 0)]))
                .sum();
            let inertia: f64 = (0..n)
                .map(|i| masses[i] * (s[(i, 0)].powi(2) + s[(i, 1)].powi(2)))
                .sum();
            if inertia > 0.0 {
                let omega = l / inertia;
                for i in 0..n {
                    v[(i, 0)] -= -omega * s[(i, 1)];
                    v[(i, 1)] -= omega * s[(i, 0)];
                }
            }
        }
        3 => {
            let mut l = [0.0f64; 3];
            for i in 0..n {
                let (sx, sy, sz) = (s[(i, 0)], s[(i, 1)], s[(i, 2)]);
                let (vx, vy, vz) = (v[(i, 0)], v[(i, 1)], v[(i, 2)]);
                l[0] += masses[i] * (sy * vz - sz * vy);
                l[1] += masses[i] * (sz * vx - sx * vz);
                l[2] += masses[i] * (sx * vy - sy * vx);
            }
            let mut inertia = nalgebra::Matrix3::<f64>::zeros();
            for i in 0..n {
                let si = nalgebra::Vector3::new(s[(i, 0)], s[(i, 1)], s[(i, 2)]);
                inertia += masses[i] * (si.norm_squared() * nalgebra::Matrix3::identity()
                    - si * si.transpose());
            }
            // Least squares handles degenerate (collinear) configurations,
            // whose angular momentum never points along the null direction.
            let svd = inertia.svd(true, true);
            let omega = svd
                .solve(&nalgebra::Vector3::new(l[0], l[1], l[2]), 1e-12)
                .map_err(|e| ReductionError::InvalidInput(e.to_string()))?;
            for i in 0..n {
                let si = nalgebra::Vector3::new(s[(i, 0)], s[(i, 1)], s[(i, 2)]);
                let rot = omega.cross(&si);
                for a in 0..3 {
                    v[(i, a)] -= rot[a];
                }
            }
        }
        _ => unreachable!(),
    }

    let mut momenta = v;
    for i in 0..n {
        for a in 0..d {
            momenta[(i, a)] *= masses[i];
        }
    }
    Ok(momenta)
}

/// Translate a Cartesian state into squared-distance variables: read the
/// squared distances off the positions and recover the conjugate momenta
/// from the velocity solve `2 G p = dρ/dt`.
///
/// Requires zero total linear and angular momentum (the shape variables
/// carry no room for either). Shapes where the kinetic matrix is singular
/// — collinear three-body configurations, for instance — are rejected.
pub fn match_reduced_momenta(
    state: &PhasePoint,
    system: &NBody,
) -> Result<MatchedMomenta, ReductionError> {
    let chart = state.chart();
    if chart.name() != system.model.chart.name() || chart.dim() != system.model.chart.dim() {
        return Err(ReductionError::InvalidInput(format!(
            "state lives on chart `{}` but the system uses `{}`",
            chart.name(),
            system.model.chart.name()
        )));
    }

    // Shape variables represent zero-momentum motion only.
    for (name, expr) in &system.model.observables {
        if !(name.starts_with("P_") || name.starts_with("L_")) {
            continue;
        }
        let value = expr.eval(&super::binding_at(chart, state.coords()))?;
        if value.abs() > MOMENTUM_PRECONDITION_TOL {
            let kind = if name.starts_with("P_") {
                "total linear momentum"
            } else {
                "total angular momentum"
            };
            return Err(ReductionError::PreconditionViolation(format!(
                "{kind} {name} = {value:.3e} (must vanish to {MOMENTUM_PRECONDITION_TOL:.0e})"
            )));
        }
    }

    let n = system.bodies;
    let d = system.dim;
    let mut positions = DMatrix::zeros(n, d);
    for i in 0..n {
        for a in 0..d {
            positions[(i, a)] = state.coords()[i * d + a];
        }
    }
    let rho = crate::models::rho_from_positions(&positions);

    let h = system.model.energy_expression();
    let mut rho_rate = Vec::with_capacity(rho.len());
    for (_, rho_expr) in system.rho_substitutions() {
        rho_rate.push(poisson_bracket(&rho_expr, h, state)?);
    }

    let g = rho_kinetic_matrix(n, &system.masses, &rho)?;
    let two_g = 2.0 * g;
    let svd = two_g.clone().svd(true, true);
    let sigma_max = svd.singular_values.iter().fold(0.0f64, |m, s| m.max(*s));
    let sigma_min = svd
        .singular_values
        .iter()
        .fold(f64::INFINITY, |m, s| m.min(*s));
    let sigma_ratio = if sigma_max > 0.0 {
        sigma_min / sigma_max
    } else {
        0.0
    };
    if sigma_ratio < SIGMA_RATIO_LIMIT {
        return Err(ReductionError::RankDeficient { sigma_ratio });
    }

    let rhs = DVector::from_vec(rho_rate.clone());
    let p_rho = svd
        .solve(&rhs, sigma_max * 1e-14)
        .map_err(|e| ReductionError::InvalidInput(e.to_string()))?;
    let misfit = &two_g * &p_rho - &rhs;
    let rate_scale = rho_rate.iter().fold(0.0f64, |m, r| m.max(r.abs()));
    let residual = misfit.iter().fold(0.0f64, |m, r| m.max(r.abs())) / (1.0 + rate_scale);

    Ok(MatchedMomenta {
        rho,
        rho_rate,
        p_rho: p_rho.iter().copied().collect(),
        residual,
        sigma_ratio,
    })
}

/// What the comparison harness asks for: the Cartesian system to build and
/// the reduced representations to run against it.
#[derive(Debug, Clone)]
pub struct ComparisonSetup {
    pub bodies: usize,
    pub dim: usize,
    pub masses: Vec<f64>,
    /// Interaction potential written in the squared-distance symbols.
    pub potential: Expression,
    /// Also run the simplex-content route with this potential (written in
    /// the content symbols `V1..`). Needs unit masses.
    pub volume_potential: Option<Expression>,
}

/// Simplex-content leg of a comparison run.
#[derive(Debug, Clone)]
pub struct VolumeComparison {
    /// Largest scaled deviation of any content variable over the run.
    pub max_relative_deviation: f64,
    /// Scaled residual of the momentum pullback `Jᵀ P = p_ρ`; a visible
    /// residual means the initial state is off the content manifold and
    /// the deviation is not meaningful.
    pub momentum_residual: f64,
    /// Reduced energy at the initial matched state.
    pub energy: f64,
}

/// Outcome of running the full and reduced systems side by side.
#[derive(Debug, Clone)]
pub struct ComparisonReport {
    /// Steps both runs completed.
    pub steps: usize,
    /// Largest scaled deviation of any squared distance over the run.
    pub max_relative_deviation: f64,
    /// Per-pair maxima, in the fixed pair-name order.
    pub per_pair_deviation: Vec<f64>,
    /// Velocity-solve residual at the initial state.
    pub momentum_match_residual: f64,
    /// Full energy at the initial state.
    pub full_energy: f64,
    /// Center-of-mass kinetic energy at the initial state (zero for data
    /// meeting the preconditions; reported for the bookkeeping identity).
    pub cm_kinetic_energy: f64,
    /// Reduced energy at the matched initial state; equals the full energy
    /// minus the center-of-mass share.
    pub reduced_energy: f64,
    /// The simplex-content leg, when requested.
    pub volume: Option<VolumeComparison>,
}

/// Scaled deviation between two series of the same variable.
fn max_scaled_deviation(reference: &[f64], other: &[f64]) -> f64 {
    reference
        .iter()
        .zip(other)
        .map(|(a, b)| (a - b).abs() / (1.0 + a.abs()))
        .fold(0.0, f64::max)
}

/// Integrate the Cartesian N-body system and its squared-distance
/// reduction from the same physical state and report how far the squared
/// distances drift apart; optionally run the simplex-content reduction as
/// a third leg.
///
/// `initial` lists the Cartesian coordinates in chart order (positions
/// then momenta, body-major). The state must carry zero total linear and
/// angular momentum, and its velocity solve must succeed cleanly; both
/// requirements fail loudly rather than producing a meaningless overlay.
pub fn compare_full_vs_reduced(
    setup: &ComparisonSetup,
    initial: &[f64],
    spec: &IntegratorSpec,
) -> Result<ComparisonReport, ReductionError> {
    let rho_potential = &setup.potential;
    // The Cartesian side wants the potential in pair distances: each
    // squared-distance symbol is a squared pair distance.
    let mut cart_potential = rho_potential.clone();
    for name in crate::models::rho_names(setup.bodies) {
        let pair = name.trim_start_matches("rho");
        let squared = Expression::parse(&format!("r{pair}^2"))
            .expect("squared pair distance parses");
        cart_potential = cart_potential.substitute(&name, &squared);
    }
    let full = nbody_cartesian(setup.bodies, setup.dim, &setup.masses, &cart_potential)?;

    let x0 = PhasePoint::new(full.model.chart.clone(), initial.to_vec())?;
    let matched = match_reduced_momenta(&x0, &full)?;
    if matched.residual > MATCH_RESIDUAL_LIMIT {
        return Err(ReductionError::MomentumMatchResidual {
            residual: matched.residual,
            limit: MATCH_RESIDUAL_LIMIT,
        });
    }

    // Full run, recording each squared distance as an observable.
    let rho_observables: Vec<(String, Expression)> = full.rho_substitutions();
    let full_run = integrate(&full.model.energy, &x0, spec, &rho_observables)?;
    if let Some(err) = full_run.error {
        return Err(err.into());
    }

    // Reduced run: the squared distances are the coordinates themselves.
    let reduced = rho_model(setup.bodies, &setup.masses, Some(rho_potential))?;
    let mut y0 = matched.rho.clone();
    y0.extend_from_slice(&matched.p_rho);
    let y0 = PhasePoint::new(reduced.chart.clone(), y0)?;
    let reduced_run = integrate(&reduced.energy, &y0, spec, &[])?;
    if let Some(err) = reduced_run.error {
        return Err(err.into());
    }

    let steps = full_run.trajectory.len().min(reduced_run.trajectory.len()) - 1;
    let pair_names = crate::models::rho_names(setup.bodies);
    let mut per_pair_deviation = Vec::with_capacity(pair_names.len());
    for (k, name) in pair_names.iter().enumerate() {
        let full_series = full_run
            .trajectory
            .observable(name)
            .expect("squared distances were recorded");
        let reduced_series: Vec<f64> = reduced_run
            .trajectory
            .states()
            .iter()
            .map(|s| s.coords()[k])
            .collect();
        per_pair_deviation.push(max_scaled_deviation(full_series, &reduced_series));
    }
    let max_relative_deviation = per_pair_deviation.iter().fold(0.0, |m: f64, d| m.max(*d));

    let full_energy = full_run.trajectory.energy()[0];
    let total_mass: f64 = setup.masses.iter().sum();
    let mut cm_kinetic_energy = 0.0;
    for a in 0..setup.dim {
        let p_total: f64 = (0..setup.bodies)
            .map(|i| initial[setup.bodies * setup.dim + i * setup.dim + a])
            .sum();
        cm_kinetic_energy += p_total * p_total / (2.0 * total_mass);
    }
    let reduced_energy = reduced_run.trajectory.energy()[0];

    let volume = match &setup.volume_potential {
        None => None,
        Some(vol_potential) => {
            if setup.masses.iter().any(|&m| m != 1.0) {
                return Err(ReductionError::InvalidInput(
                    "the simplex-content route assumes unit masses".into(),
                ));
            }
            let vsys = volume_system(setup.bodies)?;
            let v0 = vsys.values(&matched.rho)?;
            // Pull the squared-distance momenta back through the content
            // Jacobian: p_ρ = Jᵀ P in least squares.
            let jac = vsys.jacobian(&matched.rho)?;
            let jt = jac.transpose();
            let rhs = DVector::from_vec(matched.p_rho.clone());
            let svd = jt.clone().svd(true, true);
            let sigma_max = svd.singular_values.iter().fold(0.0f64, |m, s| m.max(*s));
            let p0 = svd
                .solve(&rhs, sigma_max * 1e-14)
                .map_err(|e| ReductionError::InvalidInput(e.to_string()))?;
            let misfit = &jt * &p0 - &rhs;
            let scale = matched.p_rho.iter().fold(0.0f64, |m, p| m.max(p.abs()));
            let momentum_residual =
                misfit.iter().fold(0.0f64, |m, r| m.max(r.abs())) / (1.0 + scale);

            let vol_model = vol_model_with_potential(setup.bodies, Some(vol_potential))?;
            let mut z0 = v0.clone();
            z0.extend(p0.iter().copied());
            let z0 = PhasePoint::new(vol_model.chart.clone(), z0)?;
            let vol_run = integrate(&vol_model.energy, &z0, spec, &[])?;
            if let Some(err) = vol_run.error {
                return Err(err.into());
            }

            // Contents along the full run, from the recorded squared
            // distances, against the reduced run's own coordinates.
            let vol_deviation = volume_deviation(&vsys, &full_run.trajectory, &vol_run.trajectory)?;
            Some(VolumeComparison {
                max_relative_deviation: vol_deviation,
                momentum_residual,
                energy: vol_run.trajectory.energy()[0],
            })
        }
    };

    Ok(ComparisonReport {
        steps,
        max_relative_deviation,
        per_pair_deviation,
        momentum_match_residual: matched.residual,
        full_energy,
        cm_kinetic_energy,
        reduced_energy,
        volume,
    })
}

fn volume_deviation(
    vsys: &crate::models::VolumeSystem,
    full: &Trajectory,
    vol: &Trajectory,
) -> Result<f64, ReductionError> {
    let pair_names: Vec<String> = vsys.rho_names().to_vec();
    let steps = full.len().min(vol.len());
    let mut max_dev = 0.0f64;
    for t in 0..steps {
        let rho: Vec<f64> = pair_names
            .iter()
            .map(|n| full.observable(n).expect("recorded")[t])
            .collect();
        let reference = vsys.values(&rho)?;
        let coords = vol.states()[t].coords();
        for (k, r) in reference.iter().enumerate() {
            let dev = (r - coords[k]).abs() / (1.0 + r.abs());
            max_dev = max_dev.max(dev);
        }
    }
    Ok(max_dev)
}
