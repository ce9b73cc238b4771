//! Two opposite charges in a uniform magnetic field perpendicular to their
//! plane of motion, in center-of-mass plus relative variables.
//!
//! Chart: `(Rx, Ry, rx, ry | Kx, Ky, px, py)` — center of mass, relative
//! position, pseudomomentum, relative momentum. With total mass `M`,
//! reduced mass `μ = m₁m₂/M`, and effective coupling
//! `e_eff = e (m₁ − m₂)/M`, the energy splits into three parts:
//!
//! ```text
//! H  =  |K|²/(2M)                                  (center of mass)
//!     + (eB/M) (Kx ry − Ky rx)                     (coupling)
//!     + |p − (e_eff B/2) ẑ×r|²/(2μ)
//!       + e²B²|r|²/(2M) − e²/|r|                   (relative motion)
//! ```
//!
//! Both pseudomomentum components commute with `H` (it does not depend on
//! the center of mass at all). The relative angular momentum
//! `ℓ_z = rx py − ry px` does not: a direct computation gives
//!
//! ```text
//! {ℓ_z, H} = −(eB/M) (Kx rx + Ky ry)
//! ```
//!
//! which vanishes identically on the level set `K = 0` and only there. On
//! that set, `(H, Kx, Ky, ℓ_z)` close among themselves, which is the model's
//! role in the level-set conservation test suite.

use super::{parse_internal, ModelError, SystemModel};
use crate::dynamics::Hamiltonian;
use crate::expr::{Binding, Expression};
use crate::poisson::Chart;

/// Physical constants of the pair: two masses, the charge magnitude, and
/// the field strength. The charges are `+e` on body 1 and `−e` on body 2.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MagneticPairParams {
    pub m1: f64,
    pub m2: f64,
    pub charge: f64,
    pub field: f64,
}

/// The assembled system plus its three energy components and the watched
/// angular momentum, each exposed separately so tests and verification
/// harnesses can probe them one at a time.
#[derive(Debug, Clone)]
pub struct MagneticPair {
    pub params: MagneticPairParams,
    /// Chart, full energy, observables (id `Hmf`).
    pub model: SystemModel,
    /// `|K|²/(2M)`.
    pub cm_energy: Expression,
    /// `(eB/M)(Kx ry − Ky rx)` — the only term coupling `K` to `r`.
    pub coupling_energy: Expression,
    /// Relative-motion energy including the diamagnetic and attraction
    /// terms.
    pub relative_energy: Expression,
    /// `ℓ_z = rx py − ry px`.
    pub angular_momentum: Expression,
}

pub fn magnetic_pair(params: MagneticPairParams) -> Result<MagneticPair, ModelError> {
    let MagneticPairParams {
        m1,
        m2,
        charge,
        field,
    } = params;
    if !(m1.is_finite() && m1 > 0.0) {
        return Err(ModelError::NonPositiveMass(m1));
    }
    if !(m2.is_finite() && m2 > 0.0) {
        return Err(ModelError::NonPositiveMass(m2));
    }
    if !charge.is_finite() {
        return Err(ModelError::NonFiniteParameter {
            name: "charge",
            value: charge,
        });
    }
    if !field.is_finite() {
        return Err(ModelError::NonFiniteParameter {
            name: "field",
            value: field,
        });
    }

    let total_mass = m1 + m2;
    let constants = Binding::new()
        .with("m1", m1)
        .with("m2", m2)
        .with("e", charge)
        .with("B", field)
        .with("M", total_mass)
        .with("mu", m1 * m2 / total_mass)
        .with("eeff", charge * (m1 - m2) / total_mass);

    let chart = Chart::new(
        "pair-in-field",
        vec!["Rx".into(), "Ry".into(), "rx".into(), "ry".into()],
        vec!["Kx".into(), "Ky".into(), "px".into(), "py".into()],
        constants,
    )?;

    let cm_energy = parse_internal("(Kx^2 + Ky^2)/(2*M)");
    let coupling_energy = parse_internal("(e*B/M)*(Kx*ry - Ky*rx)");
    let relative_energy = parse_internal(
        "((px + (eeff*B/2)*ry)^2 + (py - (eeff*B/2)*rx)^2)/(2*mu) \
         + e^2*B^2*(rx^2 + ry^2)/(2*M) - e^2/sqrt(rx^2 + ry^2)",
    );
    let total = cm_energy.plus(&coupling_energy).plus(&relative_energy);
    let angular_momentum = parse_internal("rx*py - ry*px");

    let model = SystemModel {
        id: "Hmf".to_string(),
        description:
            "Two opposite charges in a uniform perpendicular magnetic field, center-of-mass plus relative chart"
                .to_string(),
        chart,
        energy: Hamiltonian::full(total),
        observables: vec![
            ("lz".to_string(), angular_momentum.clone()),
            ("Kx".to_string(), parse_internal("Kx")),
            ("Ky".to_string(), parse_internal("Ky")),
        ],
        // Relative position stays clear of the collision r = 0.
        sample_ranges: vec![
            (-1.0, 1.0),
            (-1.0, 1.0),
            (0.4, 1.5),
            (0.4, 1.5),
            (-1.0, 1.0),
            (-1.0, 1.0),
            (-1.0, 1.0),
            (-1.0, 1.0),
        ],
    };

    Ok(MagneticPair {
        params,
        model,
        cm_energy,
        coupling_energy,
        relative_energy,
        angular_momentum,
    })
}
