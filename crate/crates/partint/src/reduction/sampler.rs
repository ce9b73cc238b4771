//! Seeded box sampling with Newton projection onto constraint sets.
//!
//! Every verifier in this module starts the same way: draw points from an
//! axis-aligned box in phase space, then walk each draw onto the zero set
//! of one function (plain Newton along the gradient) or of several at once
//! (Gauss–Newton with a least-squares step). Draws that fail to converge
//! are discarded and replaced, up to an attempt budget, so callers always
//! get the number of constraint-set samples they asked for or a clear
//! failure.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::ReductionError;
use crate::models::SystemModel;
use crate::poisson::{ChartBound, PoissonError};

/// Residual below which a point counts as lying on the constraint set.
pub(crate) const PROJECTION_TOL: f64 = 1e-12;

const MAX_PROJECTION_STEPS: usize = 60;

/// How many box draws to spend per requested sample before giving up.
const ATTEMPT_FACTOR: usize = 40;

/// Deterministic sampling plan: an axis-aligned box per phase coordinate,
/// a seed, and how many constraint-set points to produce.
#[derive(Debug, Clone)]
pub struct SamplerSpec {
    ranges: Vec<(f64, f64)>,
    seed: u64,
    samples: usize,
}

impl SamplerSpec {
    pub fn new(ranges: Vec<(f64, f64)>, seed: u64, samples: usize) -> Result<Self, ReductionError> {
        if ranges.is_empty() {
            return Err(ReductionError::InvalidInput(
                "sampler needs at least one coordinate range".into(),
            ));
        }
        if samples == 0 {
            return Err(ReductionError::InvalidInput(
                "sampler needs a positive sample count".into(),
            ));
        }
        for (lo, hi) in &ranges {
            if !(lo.is_finite() && hi.is_finite() && lo < hi) {
                return Err(ReductionError::InvalidInput(format!(
                    "sampler range ({lo}, {hi}) is not a finite interval"
                )));
            }
        }
        Ok(SamplerSpec {
            ranges,
            seed,
            samples,
        })
    }

    /// Sampling plan over a model's stated coordinate ranges.
    pub fn for_model(model: &SystemModel, seed: u64, samples: usize) -> Result<Self, ReductionError> {
        SamplerSpec::new(model.sample_ranges.clone(), seed, samples)
    }

    pub fn ranges(&self) -> &[(f64, f64)] {
        &self.ranges
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn samples(&self) -> usize {
        self.samples
    }

    pub(crate) fn rng(&self) -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(self.seed)
    }

    pub(crate) fn draw(&self, rng: &mut ChaCha8Rng) -> Vec<f64> {
        self.ranges
            .iter()
            .map(|&(lo, hi)| rng.gen_range(lo..hi))
            .collect()
    }
}

/// Newton projection of `x` onto `{f = 0}`, stepping along the gradient.
/// Returns whether the iteration converged to `PROJECTION_TOL`.
pub(crate) fn project_onto_zero(f: &ChartBound, x: &mut [f64]) -> Result<bool, PoissonError> {
    for _ in 0..MAX_PROJECTION_STEPS {
        let v: f64 = f.value(x)?;
        if !v.is_finite() {
            return Ok(false);
        }
        if v.abs() <= PROJECTION_TOL {
            return Ok(true);
        }
        let g = f.gradient(x)?;
        let gg: f64 = g.iter().map(|c| c * c).sum();
        if !gg.is_finite() || gg < 1e-24 {
            return Ok(false);
        }
        let step = v / gg;
        for (xi, gi) in x.iter_mut().zip(&g) {
            *xi -= step * gi;
        }
    }
    Ok(f.value(x)?.abs() <= PROJECTION_TOL)
}

/// Gauss–Newton projection of `x` onto the joint zero set of `fs`, using a
/// least-squares step through the stacked gradient matrix.
pub(crate) fn project_onto_joint_zero(
    fs: &[ChartBound],
    x: &mut [f64],
) -> Result<bool, PoissonError> {
    let k = fs.len();
    let dim = x.len();
    for _ in 0..MAX_PROJECTION_STEPS {
        let mut vals = Vec::with_capacity(k);
        for f in fs {
            vals.push(f.value(x)?);
        }
        if vals.iter().any(|v: &f64| !v.is_finite()) {
            return Ok(false);
        }
        if vals.iter().all(|v| v.abs() <= PROJECTION_TOL) {
            return Ok(true);
        }
        let mut jac = nalgebra::DMatrix::<f64>::zeros(k, dim);
        for (row, f) in fs.iter().enumerate() {
            let g = f.gradient(x)?;
            for (col, gi) in g.iter().enumerate() {
                jac[(row, col)] = *gi;
            }
        }
        let rhs = nalgebra::DVector::from_vec(vals);
        let svd = jac.svd(true, true);
        let step = match svd.solve(&rhs, 1e-13) {
            Ok(s) => s,
            Err(_) => return Ok(false),
        };
        if step.iter().any(|s| !s.is_finite()) {
            return Ok(false);
        }
        for (xi, si) in x.iter_mut().zip(step.iter()) {
            *xi -= si;
        }
    }
    let mut ok = true;
    for f in fs {
        ok &= f.value(x)?.abs() <= PROJECTION_TOL;
    }
    Ok(ok)
}

/// Draw `spec.samples` points on `{f = 0}` inside (near) the sampling box.
pub(crate) fn sample_on_zero_set(
    f: &ChartBound,
    spec: &SamplerSpec,
) -> Result<Vec<Vec<f64>>, ReductionError> {
    let mut rng = spec.rng();
    let mut points = Vec::with_capacity(spec.samples);
    let budget = spec.samples * ATTEMPT_FACTOR;
    let mut attempts = 0;
    while points.len() < spec.samples && attempts < budget {
        attempts += 1;
        let mut x = spec.draw(&mut rng);
        if project_onto_zero(f, &mut x)? && x.iter().all(|c| c.is_finite()) {
            points.push(x);
        }
    }
    if points.len() < spec.samples {
        return Err(ReductionError::SamplerFailure {
            needed: spec.samples,
            hits: points.len(),
            attempts,
        });
    }
    Ok(points)
}

/// Draw `spec.samples` points on the joint zero set of `fs`.
pub(crate) fn sample_on_joint_zero_set(
    fs: &[ChartBound],
    spec: &SamplerSpec,
) -> Result<Vec<Vec<f64>>, ReductionError> {
    let mut rng = spec.rng();
    let mut points = Vec::with_capacity(spec.samples);
    let budget = spec.samples * ATTEMPT_FACTOR;
    let mut attempts = 0;
    while points.len() < spec.samples && attempts < budget {
        attempts += 1;
        let mut x = spec.draw(&mut rng);
        if project_onto_joint_zero(fs, &mut x)? && x.iter().all(|c| c.is_finite()) {
            points.push(x);
        }
    }
    if points.len() < spec.samples {
        return Err(ReductionError::SamplerFailure {
            needed: spec.samples,
            hits: points.len(),
            attempts,
        });
    }
    Ok(points)
}
