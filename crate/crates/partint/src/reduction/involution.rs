//! Numeric check that a family of functions is in involution on its joint
//! zero set, with no more members than degrees of freedom and no hidden
//! functional dependence.
//!
//! This is the several-function counterpart of the single-function verdict:
//! each pairwise bracket must vanish where *all* family members vanish, the
//! family may have at most `n` members on a chart with `n` degrees of
//! freedom, and the members must be functionally independent there —
//! measured by the smallest singular value of their row-normalized gradient
//! stack. The energy belongs to the family: it is appended when the caller
//! did not already list it.

use rayon::prelude::*;
use std::sync::Arc;

use super::integral::ON_MANIFOLD_TOL;
use super::sampler::{sample_on_joint_zero_set, SamplerSpec};
use super::{norm, ReductionError};
use crate::expr::Expression;
use crate::poisson::{Chart, ChartBound};

/// Smallest singular value of the row-normalized gradient stack required
/// for the family to count as functionally independent.
pub const INDEPENDENCE_MIN_SV: f64 = 1e-6;

/// Why a family was accepted or turned away.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum InvolutionOutcome {
    /// Pairwise brackets vanish on the joint zero set and the members are
    /// independent there.
    Accepted,
    /// More members than degrees of freedom: rejected before sampling.
    TooManyFunctions,
    /// The gradient stack loses rank on the joint zero set.
    DependentGradients,
    /// Some pairwise bracket stays visibly nonzero on the joint zero set.
    NonVanishingBracket,
}

impl std::fmt::Display for InvolutionOutcome {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            InvolutionOutcome::Accepted => "accepted",
            InvolutionOutcome::TooManyFunctions => "rejected: more functions than degrees of freedom",
            InvolutionOutcome::DependentGradients => "rejected: functionally dependent on the joint zero set",
            InvolutionOutcome::NonVanishingBracket => "rejected: a pairwise bracket does not vanish on the joint zero set",
        };
        f.write_str(s)
    }
}

/// Measurements behind the involution verdict.
#[derive(Debug, Clone)]
pub struct InvolutionReport {
    /// Members checked: the given functions, plus the energy if it was not
    /// among them.
    pub family_size: usize,
    /// Degrees of freedom of the chart (the cap on the family size).
    pub dof: usize,
    /// Joint zero-set points the evidence rests on (0 when rejected by count).
    pub joint_samples: usize,
    /// Largest scaled pairwise bracket over samples; index pairs refer to
    /// the family order.
    pub pair_residuals: Vec<(usize, usize, f64)>,
    /// Largest scaled pairwise bracket overall.
    pub max_pair_residual: f64,
    /// Smallest singular value of the row-normalized gradient stack over
    /// the samples.
    pub min_singular_value: f64,
    pub outcome: InvolutionOutcome,
}

/// Canonical bracket from two precomputed phase gradients.
fn bracket_from_gradients(ga: &[f64], gb: &[f64], dof: usize) -> f64 {
    let mut acc = 0.0;
    for i in 0..dof {
        acc += ga[i] * gb[dof + i] - ga[dof + i] * gb[i];
    }
    acc
}

/// Per-sample measurements: one residual per pair, and the smallest
/// singular value of the gradient stack.
struct SampleProbe {
    pair_residuals: Vec<f64>,
    min_singular: f64,
}

fn probe_sample(
    bounds: &[ChartBound],
    dof: usize,
    x: &[f64],
) -> Result<SampleProbe, ReductionError> {
    let grads: Vec<Vec<f64>> = bounds
        .iter()
        .map(|b| b.gradient(x))
        .collect::<Result<_, _>>()?;
    let k = bounds.len();
    let dim = x.len();

    let mut pair_residuals = Vec::with_capacity(k * (k - 1) / 2);
    for i in 0..k {
        for j in (i + 1)..k {
            let br = bracket_from_gradients(&grads[i], &grads[j], dof);
            pair_residuals.push(super::scaled_residual(br, &grads[i], &grads[j]));
        }
    }

    let mut stack = nalgebra::DMatrix::<f64>::zeros(k, dim);
    let mut min_singular = f64::INFINITY;
    for (row, g) in grads.iter().enumerate() {
        let n = norm(g);
        if n < 1e-12 {
            // A vanishing gradient is the extreme form of dependence.
            min_singular = 0.0;
            continue;
        }
        for (col, gi) in g.iter().enumerate() {
            stack[(row, col)] = gi / n;
        }
    }
    if min_singular > 0.0 {
        let sv = stack.svd(false, false).singular_values;
        min_singular = sv.iter().fold(f64::INFINITY, |m, s| m.min(*s));
    }
    Ok(SampleProbe {
        pair_residuals,
        min_singular,
    })
}

/// Check numerically that `fs` (together with the energy `h`) is a family
/// in involution on its joint zero set: at most as many members as degrees
/// of freedom, pairwise brackets vanishing on the set, and functional
/// independence there.
pub fn verify_involution_numeric(
    fs: &[Expression],
    h: &Expression,
    chart: &Arc<Chart>,
    sampler: &SamplerSpec,
) -> Result<InvolutionReport, ReductionError> {
    if fs.is_empty() {
        return Err(ReductionError::InvalidInput(
            "involution check needs at least one function".into(),
        ));
    }
    if sampler.ranges().len() != chart.dim() {
        return Err(ReductionError::InvalidInput(format!(
            "sampler has {} ranges but the chart has {} phase coordinates",
            sampler.ranges().len(),
            chart.dim()
        )));
    }
    let mut family: Vec<&Expression> = fs.iter().collect();
    if !fs.contains(h) {
        family.push(h);
    }
    let dof = chart.dof();

    if family.len() > dof {
        return Ok(InvolutionReport {
            family_size: family.len(),
            dof,
            joint_samples: 0,
            pair_residuals: Vec::new(),
            max_pair_residual: f64::NAN,
            min_singular_value: f64::NAN,
            outcome: InvolutionOutcome::TooManyFunctions,
        });
    }

    let bounds: Vec<ChartBound> = family
        .iter()
        .map(|f| ChartBound::new(f, chart))
        .collect::<Result<_, _>>()?;
    let samples = sample_on_joint_zero_set(&bounds, sampler)?;
    let probes: Vec<SampleProbe> = samples
        .par_iter()
        .map(|x| probe_sample(&bounds, dof, x))
        .collect::<Result<_, _>>()?;

    let k = family.len();
    let mut pair_max = vec![0.0f64; k * (k - 1) / 2];
    let mut min_singular = f64::INFINITY;
    for probe in &probes {
        for (acc, r) in pair_max.iter_mut().zip(&probe.pair_residuals) {
            *acc = acc.max(*r);
        }
        min_singular = min_singular.min(probe.min_singular);
    }
    let mut pair_residuals = Vec::with_capacity(pair_max.len());
    let mut flat = pair_max.iter();
    for i in 0..k {
        for j in (i + 1)..k {
            pair_residuals.push((i, j, *flat.next().expect("pair count matches")));
        }
    }
    let max_pair_residual = pair_max.iter().fold(0.0f64, |m, r| m.max(*r));

    let outcome = if min_singular < INDEPENDENCE_MIN_SV {
        InvolutionOutcome::DependentGradients
    } else if max_pair_residual > ON_MANIFOLD_TOL {
        InvolutionOutcome::NonVanishingBracket
    } else {
        InvolutionOutcome::Accepted
    };

    Ok(InvolutionReport {
        family_size: k,
        dof,
        joint_samples: samples.len(),
        pair_residuals,
        max_pair_residual,
        min_singular_value: min_singular,
        outcome,
    })
}
