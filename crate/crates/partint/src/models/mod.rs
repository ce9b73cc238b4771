//! Builtin catalog of Hamiltonian systems: charts, energies, coordinate
//! maps, and the observables worth watching for each system.
//!
//! Four families:
//!
//! - **Central force** (`hc`, `hc2`): one body in a rotationally invariant
//!   potential, in Cartesian coordinates and in a non-orthogonal chart
//!   `(r, φ, ρ)` built from the spherical radius, the azimuth, and the
//!   cylindrical radius. The second chart is where the momentum ladder
//!   `p_φ → p_ρ` lives.
//! - **Charged pair in a magnetic field** (`Hmf`): two opposite charges in
//!   a uniform perpendicular field, written in center-of-mass plus relative
//!   variables. The pseudomomentum components commute with the energy
//!   globally; the relative angular momentum only on the zero level set of
//!   the pseudomomentum.
//! - **N bodies** (`HN`): point masses with pair-distance interactions,
//!   with total momentum and angular momentum as catalog observables, plus
//!   the mass-weighted orthogonal relative-coordinate transform.
//! - **Relative-motion reductions** (`HRNrho`, `vol-N2`..`vol-N6`): the
//!   zero-angular-momentum dynamics rewritten in squared distances ρ_ij,
//!   and further in simplex-content (volume) variables for equal masses.
//!
//! Variable naming is fixed and documented per chart (`rho12`, `prho12`,
//! `V1`, `P1`, `lz`, `Kx`, ...) so config files and scripts can rely on it.

mod central;
mod magnetic;
mod nbody;
mod volume;

use std::sync::Arc;

use crate::dynamics::Hamiltonian;
use crate::expr::Expression;
use crate::poisson::{Chart, ChartError};

pub use central::{central_force, CentralForce};
pub use magnetic::{magnetic_pair, MagneticPair, MagneticPairParams};
pub use nbody::{
    jacobi_transform, nbody_cartesian, rho_from_positions, rho_hamiltonian, rho_kinetic_matrix,
    rho_model, rho_names, JacobiTransform, NBody,
};
pub(crate) use nbody::pair_list;
pub use volume::{
    vol_hamiltonian, vol_model, vol_model_with_potential, volume_system, VolumeSystem,
};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ModelError {
    #[error("mass must be positive and finite, got {0}")]
    NonPositiveMass(f64),
    #[error("parameter `{name}` must be finite, got {value}")]
    NonFiniteParameter { name: &'static str, value: f64 },
    #[error("the potential may depend only on {expected}; found `{found}`")]
    UnexpectedPotentialSymbol { expected: String, found: String },
    #[error("body count must be between {min} and {max}, got {n}")]
    UnsupportedBodyCount { n: usize, min: usize, max: usize },
    #[error("expected {expected} masses, got {got}")]
    MassCountMismatch { expected: usize, got: usize },
    #[error("spatial dimension must be at least 1")]
    ZeroDimension,
    #[error("expected {expected} values, got {got}")]
    LengthMismatch { expected: usize, got: usize },
    #[error("point is outside the chart: {0}")]
    SingularPoint(String),
    #[error(transparent)]
    Chart(#[from] ChartError),
}

/// A catalog system: chart, energy, named observables, and per-coordinate
/// sampling ranges for the numeric verification harnesses.
#[derive(Debug, Clone)]
pub struct SystemModel {
    /// Stable catalog key (`hc2`, `Hmf`, `vol-N3`, ...).
    pub id: String,
    /// One-line behavioral description.
    pub description: String,
    pub chart: Arc<Chart>,
    pub energy: Hamiltonian,
    /// Observables worth recording along trajectories of this system.
    pub observables: Vec<(String, Expression)>,
    /// Per-coordinate `(low, high)` boxes for random phase-space sampling,
    /// aligned with the chart's coordinate order. Chosen to keep samples
    /// clear of chart singularities (collision points, the azimuth axis).
    pub sample_ranges: Vec<(f64, f64)>,
}

impl SystemModel {
    /// The complete energy expression.
    pub fn energy_expression(&self) -> &Expression {
        self.energy.total()
    }

    pub fn observable(&self, name: &str) -> Option<&Expression> {
        self.observables
            .iter()
            .find(|(n, _)| n == name)
            .map(|(_, e)| e)
    }
}

/// Internal: parse a source string this module itself generated.
pub(crate) fn parse_internal(src: &str) -> Expression {
    Expression::parse(src)
        .unwrap_or_else(|e| panic!("catalog expression failed to parse: {e}\n  source: {src}"))
}

/// The default-parameter instance of every catalog system.
///
/// Defaults: unit masses, unit charge and field, attractive `−1/r` pair
/// potentials where a potential is needed, three bodies for the N-body
/// entries. Parameterized variants come from the individual constructors.
pub fn catalog() -> Vec<SystemModel> {
    let kepler = parse_internal("0 - 1/r");
    let central = central_force(1.0, &kepler).expect("default central-force model");
    let magnetic = magnetic_pair(MagneticPairParams {
        m1: 1.0,
        m2: 1.0,
        charge: 1.0,
        field: 1.0,
    })
    .expect("default magnetic-pair model");
    let pair_potential = parse_internal("0 - 1/r12 - 1/r13 - 1/r23");
    let nbody = nbody_cartesian(3, 3, &[1.0, 1.0, 1.0], &pair_potential)
        .expect("default three-body model");
    let rho = rho_model(3, &[1.0, 1.0, 1.0], None).expect("default squared-distance model");

    let mut items = vec![
        central.cartesian,
        central.reduced,
        magnetic.model,
        nbody.model,
        rho,
    ];
    for n in 2..=6 {
        items.push(vol_model(n).expect("volume models cover n = 2..=6"));
    }
    items
}

/// Look up a catalog system by id, built with default parameters.
pub fn catalog_model(id: &str) -> Option<SystemModel> {
    catalog().into_iter().find(|m| m.id == id)
}
