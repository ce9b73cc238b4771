//! Numeric verification of level-set conservation and of the reductions
//! built on it.
//!
//! The central notion: `f` is conserved *on its own zero set* when
//! `{f, H} = a·f` for some coefficient `a` that stays finite there. The
//! zero set is then invariant under the flow, and `a ≡ 0` recovers an
//! ordinary globally conserved quantity. This module checks that property
//! numerically — sampling the zero set, probing the bracket-to-function
//! ratio nearby, and fitting the coefficient — and applies the same idea
//! to families of functions whose pairwise brackets vanish on their joint
//! zero set.
//!
//! On top of the verifiers sit the N-body reduction tools: matching a
//! Cartesian state to squared-distance variables by a velocity solve,
//! integrating both representations side by side, and restricting an
//! energy along a ladder of conserved momenta.
//!
//! Everything here is sampling-based double precision with explicit
//! tolerances; the exact-arithmetic counterparts live in the polynomial
//! layer.

mod integral;
mod involution;
mod ladder;
mod nbody_match;
mod sampler;

pub use integral::{
    verify_particular_integral, CoefficientSample, IntegralReport, SlopeFit, Verdict,
    OFF_MANIFOLD_DELTAS, ON_MANIFOLD_TOL,
};
pub use involution::{
    verify_involution_numeric, InvolutionOutcome, InvolutionReport, INDEPENDENCE_MIN_SV,
};
pub use ladder::{reduced_ladder, LadderCondition, LadderRung};
pub use nbody_match::{
    cartesian_coords, compare_full_vs_reduced, match_reduced_momenta, momenta_with_zero_totals,
    ComparisonReport, ComparisonSetup, MatchedMomenta, VolumeComparison,
};
pub use sampler::SamplerSpec;

use crate::dynamics::DynamicsError;
use crate::expr::{Binding, EvalError};
#[cfg(test)]
use crate::expr::Expression;
use crate::models::ModelError;
use crate::poisson::{Chart, PoissonError};

#[derive(Debug, thiserror::Error)]
pub enum ReductionError {
    #[error(
        "sampler found only {hits} of {needed} points on the constraint set after {attempts} attempts"
    )]
    SamplerFailure {
        needed: usize,
        hits: usize,
        attempts: usize,
    },
    #[error("gradient vanishes at a constraint-set sample; no normal direction to probe along")]
    DegenerateGradient,
    #[error("the state violates the reduction preconditions: {0}")]
    PreconditionViolation(String),
    #[error("kinetic matrix is rank deficient at this configuration (sigma ratio {sigma_ratio:.3e})")]
    RankDeficient { sigma_ratio: f64 },
    #[error("momentum match residual {residual:.3e} exceeds {limit:.3e}; the comparison run would be meaningless")]
    MomentumMatchResidual { residual: f64, limit: f64 },
    #[error("`{0}` is not a momentum coordinate of this chart")]
    NotAMomentumCoordinate(String),
    #[error("restricted energy still depends on `{coordinate}`; its conjugate pair cannot be dropped")]
    NonCyclicCoordinate { coordinate: String },
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error(transparent)]
    Eval(#[from] EvalError),
    #[error(transparent)]
    Poisson(#[from] PoissonError),
    #[error(transparent)]
    Dynamics(#[from] DynamicsError),
    #[error(transparent)]
    Model(#[from] ModelError),
}

/// Constants plus coordinate values, ready for expression evaluation.
pub(crate) fn binding_at(chart: &Chart, coords: &[f64]) -> Binding {
    let mut b = chart.constants().clone();
    for (i, name) in chart.coord_names().enumerate() {
        b.insert(name, coords[i]);
    }
    b
}

#[cfg(test)]
pub(crate) fn eval_at(expr: &Expression, chart: &Chart, coords: &[f64]) -> Result<f64, EvalError> {
    expr.eval(&binding_at(chart, coords))
}

pub(crate) fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

/// Bracket magnitude scaled by the local gradient sizes, so the tolerance
/// means the same thing for steep and shallow functions.
pub(crate) fn scaled_residual(bracket: f64, grad_f: &[f64], grad_h: &[f64]) -> f64 {
    bracket.abs() / (1.0 + norm(grad_f) * norm(grad_h))
}
