//! Successive restriction of an energy along a chain of conserved momenta.
//!
//! When a momentum coordinate is conserved on its own zero level, setting
//! it to zero and dropping its conjugate position yields a smaller system
//! whose flow is the restriction of the original one. Applied repeatedly
//! this produces a ladder of ever-smaller energies — for the central force
//! the planar and then the radial problem.
//!
//! Each rung also reports whether the separability condition behind the
//! restriction holds *exactly*: the rung is canonical off its level
//! precisely when `∂K/∂f` lies in the module generated by `f`, i.e.
//! `∂K/∂f = b·f`. That membership is decided in exact arithmetic when the
//! energy is polynomial (negative powers included); otherwise it is left
//! undecided rather than guessed.

use std::sync::Arc;

use super::ReductionError;
use crate::expr::Expression;
use crate::poisson::Chart;
use crate::polyalg::{module_reduce, poly_from_expression, MonomialOrder, SparsePoly};

/// Exact status of the separability condition at one rung.
#[derive(Debug, Clone, PartialEq)]
pub enum LadderCondition {
    /// `∂K/∂f = coefficient · f` identically.
    Holds { coefficient: SparsePoly },
    /// `∂K/∂f` has a provable component outside the module generated by
    /// `f`. The restriction to the zero level is still valid; the reduced
    /// flow just fails to be canonical off that level.
    Fails { remainder: SparsePoly },
    /// The energy is outside the exact polynomial layer, so membership was
    /// not decided.
    Undecided,
}

/// One restriction step: which pair was dropped, what remains, and whether
/// the separability condition held exactly.
#[derive(Debug, Clone)]
pub struct LadderRung {
    /// Momentum set to zero at this rung.
    pub momentum: String,
    /// Its conjugate position, dropped with it.
    pub conjugate: String,
    /// Chart of the remaining coordinates.
    pub chart: Arc<Chart>,
    /// Energy restricted to the momentum's zero level.
    pub energy: Expression,
    pub condition: LadderCondition,
}

/// Restrict `energy` along `momenta`, one zero level at a time, dropping
/// each momentum's conjugate pair from the chart.
///
/// Every name must be a momentum coordinate of the chart reached at its
/// rung, its conjugate position must no longer occur in the restricted
/// energy (the restriction would otherwise not close), and at least one
/// coordinate pair must survive.
pub fn reduced_ladder(
    chart: &Arc<Chart>,
    energy: &Expression,
    momenta: &[&str],
) -> Result<Vec<LadderRung>, ReductionError> {
    if momenta.is_empty() {
        return Err(ReductionError::InvalidInput(
            "the ladder needs at least one momentum to restrict".into(),
        ));
    }
    let mut current_chart = chart.clone();
    let mut current_energy = energy.clone();
    let mut rungs = Vec::with_capacity(momenta.len());

    for &name in momenta {
        let Some(idx) = current_chart.momentum_index(name) else {
            return Err(ReductionError::NotAMomentumCoordinate(name.to_string()));
        };

        // Exact separability: does ∂K/∂f lie in the module generated by f?
        let condition = match poly_from_expression(&current_energy) {
            Err(_) => LadderCondition::Undecided,
            Ok(poly) => {
                let derivative = poly.partial(name);
                let generator = SparsePoly::variable(name);
                let reduction = module_reduce(&derivative, &[generator], MonomialOrder::GrLex);
                if reduction.remainder.is_zero() {
                    LadderCondition::Holds {
                        coefficient: reduction.coefficients.into_iter().next()
                            .expect("one generator, one coefficient"),
                    }
                } else if reduction.decisive {
                    LadderCondition::Fails {
                        remainder: reduction.remainder,
                    }
                } else {
                    LadderCondition::Undecided
                }
            }
        };

        let restricted = current_energy.restrict_to_zero(name);
        let conjugate = current_chart.q_names()[idx].clone();
        if restricted.free_symbols().iter().any(|s| s == &conjugate) {
            return Err(ReductionError::NonCyclicCoordinate {
                coordinate: conjugate,
            });
        }
        if current_chart.dof() == 1 {
            return Err(ReductionError::InvalidInput(format!(
                "restricting `{name}` would drop the last coordinate pair"
            )));
        }

        let q: Vec<String> = current_chart
            .q_names()
            .iter()
            .enumerate()
            .filter(|(i, _)| *i != idx)
            .map(|(_, n)| n.clone())
            .collect();
        let p: Vec<String> = current_chart
            .p_names()
            .iter()
            .enumerate()
            .filter(|(i, _)| *i != idx)
            .map(|(_, n)| n.clone())
            .collect();
        let reduced_chart = Chart::new(
            &format!("{}/{}=0", current_chart.name(), name),
            q,
            p,
            current_chart.constants().clone(),
        )
        .map_err(crate::models::ModelError::from)?;

        rungs.push(LadderRung {
            momentum: name.to_string(),
            conjugate,
            chart: reduced_chart.clone(),
            energy: restricted.clone(),
            condition,
        });
        current_chart = reduced_chart;
        current_energy = restricted;
    }
    Ok(rungs)
}
