//! One body in a rotationally invariant potential, in two charts.
//!
//! The Cartesian chart `(x, y, z | px, py, pz)` carries the plain energy
//! `|p|²/(2m) + V(|x|)`. The reduced chart `(r, φ, ρ | p_r, p_φ, p_ρ)` mixes
//! the spherical radius `r`, the azimuth `φ`, and the cylindrical radius
//! `ρ = √(x² + y²)`; it is non-orthogonal, so the kinetic energy picks up a
//! `p_r p_ρ` cross term:
//!
//! ```text
//! K = (p_ρ² + p_r² + (2ρ/r) p_ρ p_r + p_φ²/ρ²) / (2m) + V(r)
//! ```
//!
//! `p_φ` is conserved outright; `p_ρ` is conserved only on the level set
//! `p_φ = 0, p_ρ = 0`, which is what makes this system the standard exercise
//! for level-set (rather than global) conservation. Restricting `K` first to
//! `p_φ = 0` and then to `p_ρ = 0` gives the two lower rungs exposed here as
//! [`CentralForce::planar_energy`] and [`CentralForce::radial_energy`].
//!
//! The reduced chart degenerates where `ρ = 0` (the vertical axis, azimuth
//! undefined) and where `ρ = r` (the plane `z = 0`, where `r` and `ρ` cease
//! to be independent). [`CentralForce::map_to_reduced`] rejects points near
//! either locus.

use nalgebra::{Matrix3, Vector3};

use super::{parse_internal, ModelError, SystemModel};
use crate::dynamics::Hamiltonian;
use crate::expr::{Binding, Expression};
use crate::poisson::{Chart, PhasePoint};

/// Central-force system: both charts plus the restriction ladder.
#[derive(Debug, Clone)]
pub struct CentralForce {
    pub mass: f64,
    /// The potential as given, a function of the symbol `r` only.
    pub potential: Expression,
    /// Cartesian chart and energy (id `hc`).
    pub cartesian: SystemModel,
    /// Reduced chart and energy (id `hc2`).
    pub reduced: SystemModel,
    /// The energy restricted to `p_φ = 0`, on the reduced chart.
    pub planar_energy: Expression,
    /// The energy restricted to `p_φ = 0, p_ρ = 0`: radial motion
    /// `p_r²/(2m) + V(r)`.
    pub radial_energy: Expression,
}

/// Build the central-force system for a point mass `m` and a potential
/// expression in the single symbol `r`.
pub fn central_force(mass: f64, potential: &Expression) -> Result<CentralForce, ModelError> {
    if !(mass.is_finite() && mass > 0.0) {
        return Err(ModelError::NonPositiveMass(mass));
    }
    for sym in potential.free_symbols() {
        if sym != "r" {
            return Err(ModelError::UnexpectedPotentialSymbol {
                expected: "the radius symbol `r`".to_string(),
                found: sym.clone(),
            });
        }
    }

    let constants = Binding::new().with("m", mass);

    let cartesian_chart = Chart::new(
        "cartesian3",
        vec!["x".into(), "y".into(), "z".into()],
        vec!["px".into(), "py".into(), "pz".into()],
        constants.clone(),
    )?;
    let kinetic = parse_internal("(px^2 + py^2 + pz^2)/(2*m)");
    let radius = parse_internal("sqrt(x^2 + y^2 + z^2)");
    let v_cartesian = potential.substitute("r", &radius);
    let cartesian = SystemModel {
        id: "hc".to_string(),
        description: "Point mass in a rotationally invariant potential, Cartesian chart"
            .to_string(),
        chart: cartesian_chart,
        energy: Hamiltonian::split(kinetic, v_cartesian),
        observables: vec![
            ("lx".to_string(), parse_internal("y*pz - z*py")),
            ("ly".to_string(), parse_internal("z*px - x*pz")),
            ("lz".to_string(), parse_internal("x*py - y*px")),
        ],
        // z stays clear of 0 so sampled points remain inside the reduced
        // chart's domain as well.
        sample_ranges: vec![
            (0.4, 1.6),
            (0.4, 1.6),
            (0.4, 1.6),
            (-1.0, 1.0),
            (-1.0, 1.0),
            (-1.0, 1.0),
        ],
    };

    let reduced_chart = Chart::new(
        "spherical-cylindrical",
        vec!["r".into(), "phi".into(), "rho".into()],
        vec!["pr".into(), "pphi".into(), "prho".into()],
        constants,
    )?;
    let reduced_kinetic =
        parse_internal("(prho^2 + pr^2 + (2*rho/r)*prho*pr + pphi^2/rho^2)/(2*m)");
    let reduced_energy = reduced_kinetic.plus(potential);
    let planar_energy = parse_internal("(prho^2 + pr^2 + (2*rho/r)*prho*pr)/(2*m)").plus(potential);
    let radial_energy = parse_internal("pr^2/(2*m)").plus(potential);
    let reduced = SystemModel {
        id: "hc2".to_string(),
        description:
            "Central-force motion in the non-orthogonal spherical-cylindrical chart (r, phi, rho)"
                .to_string(),
        chart: reduced_chart,
        energy: Hamiltonian::full(reduced_energy),
        observables: vec![
            ("pphi".to_string(), parse_internal("pphi")),
            ("prho".to_string(), parse_internal("prho")),
        ],
        // ρ strictly below r keeps samples realizable (ρ < r off the plane
        // z = 0) and clear of both chart degeneracies.
        sample_ranges: vec![
            (0.8, 2.0),
            (-3.0, 3.0),
            (0.3, 0.7),
            (-1.0, 1.0),
            (-1.0, 1.0),
            (-1.0, 1.0),
        ],
    };

    Ok(CentralForce {
        mass,
        potential: potential.clone(),
        cartesian,
        reduced,
        planar_energy,
        radial_energy,
    })
}

impl CentralForce {
    /// Map a Cartesian phase point into the reduced chart.
    ///
    /// Positions map by `r = |x|`, `φ = atan2(y, x)`, `ρ = √(x² + y²)`;
    /// momenta transform contragradiently, i.e. `P` solves `Jᵀ P = p` with
    /// `J` the Jacobian of the position map, which makes the map canonical.
    /// Points near the chart's degeneracies (`ρ ≈ 0` or `z ≈ 0`) are
    /// rejected.
    pub fn map_to_reduced(&self, point: &PhasePoint) -> Result<PhasePoint, ModelError> {
        if point.chart().dim() != 6 || point.chart().coord_index("x").is_none() {
            return Err(ModelError::SingularPoint(
                "expected a point on the Cartesian central-force chart".to_string(),
            ));
        }
        let c = point.coords();
        let (x, y, z) = (c[0], c[1], c[2]);
        let p = Vector3::new(c[3], c[4], c[5]);

        let r = (x * x + y * y + z * z).sqrt();
        let rho = (x * x + y * y).sqrt();
        // The Jacobian determinant is −z/(rρ); both factors below make it
        // vanish, so treat them as chart boundaries rather than solving an
        // ill-conditioned system.
        if rho <= 1e-12 * r.max(1.0) {
            return Err(ModelError::SingularPoint(format!(
                "cylindrical radius {rho:.3e} is on the azimuth axis"
            )));
        }
        if z.abs() <= 1e-12 * r.max(1.0) {
            return Err(ModelError::SingularPoint(format!(
                "height {z:.3e} is on the plane where r and rho coincide"
            )));
        }
        let phi = y.atan2(x);

        // Rows of J are the gradients of (r, φ, ρ); momenta solve Jᵀ P = p.
        let jac = Matrix3::new(
            x / r,
            y / r,
            z / r,
            -y / (rho * rho),
            x / (rho * rho),
            0.0,
            x / rho,
            y / rho,
            0.0,
        );
        let big_p = jac.transpose().lu().solve(&p).ok_or_else(|| {
            ModelError::SingularPoint("momentum transform is singular here".to_string())
        })?;

        PhasePoint::new(
            self.reduced.chart.clone(),
            vec![r, phi, rho, big_p[0], big_p[1], big_p[2]],
        )
        .map_err(|e| ModelError::SingularPoint(e.to_string()))
    }
}
