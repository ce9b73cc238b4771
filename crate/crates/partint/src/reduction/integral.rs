//! Numeric verdict on whether `{f, H} = a·f` holds near the zero set of `f`.
//!
//! The check has three layers:
//!
//! 1. **On the zero set**: sample `{f = 0}` and require the bracket `{f, H}`
//!    to vanish there (scaled by gradient sizes). A function failing this is
//!    not conserved on its own level set at all.
//! 2. **Off the zero set**: step off each sample by `±δ` along the unit
//!    gradient for several `δ`, estimate the coefficient `a = {f, H}/f`
//!    pointwise, and fit the slope of `{f, H}` against `f` by least squares.
//!    Finite, refinement-stable estimates certify the proportionality; if
//!    the bracket also vanishes off the set, `a ≡ 0` and the function is
//!    conserved everywhere.
//! 3. **Along the flow**: integrate a short trajectory from one zero-set
//!    sample and record how large `|f|` gets — a direct dynamical look at
//!    the invariance the bracket condition implies.

use rayon::prelude::*;
use std::sync::Arc;

use super::sampler::{sample_on_zero_set, SamplerSpec};
use super::{scaled_residual, ReductionError};
use crate::dynamics::{integrate, Hamiltonian, IntegratorSpec};
use crate::expr::Expression;
use crate::poisson::{bracket_core, Chart, ChartBound, PhasePoint};

/// Scaled bracket magnitude below which the bracket counts as vanishing.
pub const ON_MANIFOLD_TOL: f64 = 1e-9;

/// Distances stepped off the zero set when probing the coefficient.
pub const OFF_MANIFOLD_DELTAS: [f64; 3] = [1e-1, 1e-2, 1e-3];

/// Pointwise ratios are skipped when `|f|` falls below this guard.
const RATIO_GUARD: f64 = 1e-12;

/// Coefficient estimates at the two finest distances must agree to this.
const COEFFICIENT_STABILITY_TOL: f64 = 1e-3;

const TRAJECTORY_DT: f64 = 1e-3;
const TRAJECTORY_STEPS: usize = 500;

/// What the sampled evidence supports.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Verdict {
    /// The bracket vanishes on and off the zero set: conserved everywhere.
    GlobalIntegral,
    /// The bracket vanishes on the zero set and behaves like `a·f` near it:
    /// conserved on the level set only.
    ParticularIntegral,
    /// The evidence contradicts conservation on the zero set.
    Negative,
}

impl std::fmt::Display for Verdict {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            Verdict::GlobalIntegral => "global integral",
            Verdict::ParticularIntegral => "particular integral",
            Verdict::Negative => "negative",
        };
        f.write_str(s)
    }
}

/// One pointwise coefficient estimate: the zero-set anchor it was probed
/// from, the probe distance, and the pair-averaged ratio `{f, H}/f`.
#[derive(Debug, Clone)]
pub struct CoefficientSample {
    pub anchor: Vec<f64>,
    pub delta: f64,
    pub estimate: f64,
}

/// Least-squares slope of `{f, H}` against `f` over all probe points at one
/// distance.
#[derive(Debug, Clone, Copy)]
pub struct SlopeFit {
    pub delta: f64,
    pub slope: f64,
    /// Probe points that entered the fit.
    pub points: usize,
}

/// Everything the verifier measured, plus the verdict it reached.
#[derive(Debug, Clone)]
pub struct IntegralReport {
    /// Zero-set samples the evidence rests on.
    pub samples: usize,
    /// Largest scaled `|{f, H}|` over the zero-set samples.
    pub on_manifold_max_residual: f64,
    /// Largest scaled `|{f, H}|` over all off-set probe points.
    pub off_manifold_max_residual: f64,
    /// Pointwise coefficient estimates, grouped by anchor and distance.
    pub coefficient_samples: Vec<CoefficientSample>,
    /// Per-distance least-squares slopes of `{f, H}` against `f`.
    pub slope_fits: Vec<SlopeFit>,
    /// Largest change in a pointwise estimate between the two finest probe
    /// distances; `NaN` when no anchor produced estimates at both.
    pub coefficient_stability: f64,
    /// Largest `|f|` along a short trajectory started on the zero set.
    pub trajectory_max_level: f64,
    /// Steps of that trajectory that completed (poles may cut it short).
    pub trajectory_steps: usize,
    pub verdict: Verdict,
}

/// Per-anchor measurements, accumulated in parallel then folded.
struct AnchorProbe {
    on_residual: f64,
    off_residuals: Vec<f64>,
    /// (delta, pair-averaged ratio) for deltas whose guard passed.
    ratios: Vec<(f64, f64)>,
    /// (delta, f, bracket) pairs feeding the slope fits.
    slope_points: Vec<(f64, f64, f64)>,
    degenerate: bool,
}

fn probe_anchor(
    fb: &ChartBound,
    hb: &ChartBound,
    dof: usize,
    anchor: &[f64],
) -> Result<AnchorProbe, ReductionError> {
    let grad_f = fb.gradient(anchor)?;
    let grad_h = hb.gradient(anchor)?;
    let gnorm = super::norm(&grad_f);
    if gnorm < 1e-12 {
        return Ok(AnchorProbe {
            on_residual: 0.0,
            off_residuals: Vec::new(),
            ratios: Vec::new(),
            slope_points: Vec::new(),
            degenerate: true,
        });
    }
    let bracket = bracket_core(fb, hb, dof, anchor)?;
    let on_residual = scaled_residual(bracket, &grad_f, &grad_h);

    let mut off_residuals = Vec::new();
    let mut ratios = Vec::new();
    let mut slope_points = Vec::new();
    for &delta in &OFF_MANIFOLD_DELTAS {
        let mut pair = Vec::with_capacity(2);
        for sign in [1.0f64, -1.0] {
            let x: Vec<f64> = anchor
                .iter()
                .zip(&grad_f)
                .map(|(xi, gi)| xi + sign * delta * gi / gnorm)
                .collect();
            let fv: f64 = fb.value(&x)?;
            let bv: f64 = bracket_core(fb, hb, dof, &x)?;
            let gf = fb.gradient(&x)?;
            let gh = hb.gradient(&x)?;
            off_residuals.push(scaled_residual(bv, &gf, &gh));
            slope_points.push((delta, fv, bv));
            if fv.abs() > RATIO_GUARD {
                pair.push(bv / fv);
            }
        }
        if pair.len() == 2 {
            ratios.push((delta, (pair[0] + pair[1]) / 2.0));
        }
    }
    Ok(AnchorProbe {
        on_residual,
        off_residuals,
        ratios,
        slope_points,
        degenerate: false,
    })
}

/// Decide numerically whether `f` is conserved on its zero set under the
/// flow of `h`, and whether that conservation is global or level-set-only.
///
/// Samples come from `sampler`'s box, Newton-projected onto `{f = 0}`; the
/// report records bracket residuals on and off the set, pointwise and
/// least-squares coefficient estimates, their stability under refinement,
/// and the peak `|f|` along a short trajectory started on the set.
pub fn verify_particular_integral(
    f: &Expression,
    h: &Expression,
    chart: &Arc<Chart>,
    sampler: &SamplerSpec,
) -> Result<IntegralReport, ReductionError> {
    if sampler.ranges().len() != chart.dim() {
        return Err(ReductionError::InvalidInput(format!(
            "sampler has {} ranges but the chart has {} phase coordinates",
            sampler.ranges().len(),
            chart.dim()
        )));
    }
    let fb = ChartBound::new(f, chart)?;
    let hb = ChartBound::new(h, chart)?;
    let dof = chart.dof();

    let anchors = sample_on_zero_set(&fb, sampler)?;
    let probes: Vec<AnchorProbe> = anchors
        .par_iter()
        .map(|a| probe_anchor(&fb, &hb, dof, a))
        .collect::<Result<_, _>>()?;
    if probes.iter().all(|p| p.degenerate) {
        return Err(ReductionError::DegenerateGradient);
    }

    let mut on_max = 0.0f64;
    let mut off_max = 0.0f64;
    let mut coefficient_samples = Vec::new();
    // Per delta: sums of f·bracket and f·f, plus the point count.
    let mut slope_acc: Vec<(f64, f64, usize)> = vec![(0.0, 0.0, 0); OFF_MANIFOLD_DELTAS.len()];
    let mut stability = f64::NAN;
    let (fine, finer) = (
        OFF_MANIFOLD_DELTAS[OFF_MANIFOLD_DELTAS.len() - 2],
        OFF_MANIFOLD_DELTAS[OFF_MANIFOLD_DELTAS.len() - 1],
    );
    for (anchor, probe) in anchors.iter().zip(&probes) {
        if probe.degenerate {
            continue;
        }
        on_max = on_max.max(probe.on_residual);
        for r in &probe.off_residuals {
            off_max = off_max.max(*r);
        }
        for &(delta, estimate) in &probe.ratios {
            coefficient_samples.push(CoefficientSample {
                anchor: anchor.clone(),
                delta,
                estimate,
            });
        }
        for &(delta, fv, bv) in &probe.slope_points {
            let k = OFF_MANIFOLD_DELTAS
                .iter()
                .position(|d| *d == delta)
                .expect("probe deltas come from OFF_MANIFOLD_DELTAS");
            slope_acc[k].0 += fv * bv;
            slope_acc[k].1 += fv * fv;
            slope_acc[k].2 += 1;
        }
        let at = |d: f64| {
            probe
                .ratios
                .iter()
                .find(|(delta, _)| *delta == d)
                .map(|(_, e)| *e)
        };
        if let (Some(a1), Some(a2)) = (at(fine), at(finer)) {
            let change = (a1 - a2).abs();
            stability = if stability.is_nan() {
                change
            } else {
                stability.max(change)
            };
        }
    }
    let slope_fits: Vec<SlopeFit> = OFF_MANIFOLD_DELTAS
        .iter()
        .zip(&slope_acc)
        .map(|(&delta, &(fb_sum, ff_sum, points))| SlopeFit {
            delta,
            slope: if ff_sum > 0.0 { fb_sum / ff_sum } else { f64::NAN },
            points,
        })
        .collect();

    // Dynamical confirmation: start on the zero set and watch |f| itself.
    let start = anchors
        .iter()
        .zip(&probes)
        .find(|(_, p)| !p.degenerate)
        .map(|(a, _)| a.clone())
        .expect("at least one non-degenerate anchor exists");
    let x0 = PhasePoint::new(chart.clone(), start)?;
    let spec = IntegratorSpec::midpoint(TRAJECTORY_DT, TRAJECTORY_STEPS);
    let run = integrate(
        &Hamiltonian::full(h.clone()),
        &x0,
        &spec,
        &[("level".to_string(), f.clone())],
    )?;
    let level = run
        .trajectory
        .observable("level")
        .expect("the level observable was recorded");
    let trajectory_max_level = level.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let trajectory_steps = run.trajectory.len().saturating_sub(1);

    let estimates_ok = !coefficient_samples.is_empty()
        && coefficient_samples.iter().all(|c| c.estimate.is_finite())
        && stability.is_finite()
        && stability <= COEFFICIENT_STABILITY_TOL;
    let verdict = if on_max > ON_MANIFOLD_TOL {
        Verdict::Negative
    } else if off_max <= ON_MANIFOLD_TOL {
        Verdict::GlobalIntegral
    } else if estimates_ok {
        Verdict::ParticularIntegral
    } else {
        Verdict::Negative
    };

    Ok(IntegralReport {
        samples: anchors.len(),
        on_manifold_max_residual: on_max,
        off_manifold_max_residual: off_max,
        coefficient_samples,
        slope_fits,
        coefficient_stability: stability,
        trajectory_max_level,
        trajectory_steps,
        verdict,
    })
}
