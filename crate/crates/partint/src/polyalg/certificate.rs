//! Exact involution certificates.
//!
//! A function set f₁..f_k is a candidate involution family when every
//! pairwise Poisson bracket lies in the module the family generates:
//! `{f_i, f_j} = Σ_s a_s·f_s` with coefficients regular on the joint zero
//! set. This module computes the brackets and their module reductions
//! exactly and packages the outcome as a checkable certificate: the
//! reconstruction identity `bracket = Σ coefficients·generators + residual`
//! holds term-for-term, so a reader can re-verify every claim by
//! multiplication alone.
//!
//! Coefficient regularity is flagged conservatively: a coefficient with no
//! negative exponent in any chart coordinate cannot blow up anywhere, so it
//! is auto-flagged regular. Coefficients with coordinate poles (like
//! `p_r/(m·r)`, singular only at the collision point `r = 0`) are reported
//! as-is; whether the pole meets the zero set is left to the caller.

use crate::poisson::Chart;

use super::{module_reduce, poly_poisson, ModuleReduction, MonomialOrder, SparsePoly};

/// Outcome of an exact involution check.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum InvolutionVerdict {
    /// Every pairwise bracket reduced to zero residual: the set is in
    /// particular involution (globally in involution when all coefficients
    /// vanish).
    ParticularInvolution,
    /// Some bracket has a nonzero residual and the reduction was decisive
    /// (single-variable generators): the set is not in involution.
    NotInvolution,
    /// Some bracket has a nonzero residual but the division was not a
    /// decision procedure; membership remains open.
    Undecided,
}

/// One pairwise bracket and its module reduction.
#[derive(Debug, Clone, PartialEq)]
pub struct PairReduction {
    /// Indices into the generator list, `i < j`.
    pub i: usize,
    pub j: usize,
    /// `{f_i, f_j}`, exact.
    pub bracket: SparsePoly,
    /// Module coefficients: `bracket = Σ_s coefficients[s]·f_s + residual`.
    pub coefficients: Vec<SparsePoly>,
    /// Unreduced part; zero means the pair satisfies the involution relation.
    pub residual: SparsePoly,
    /// True when no coefficient has a pole in any chart coordinate.
    pub coefficients_regular: bool,
    /// True when a nonzero residual proves non-membership for this pair.
    pub decisive: bool,
}

/// Exact certificate for a particular-involution claim.
#[derive(Debug, Clone, PartialEq)]
pub struct InvolutionCertificate {
    pub generators: Vec<SparsePoly>,
    /// All pairs `i < j`, in row-major order.
    pub pairs: Vec<PairReduction>,
    pub order: MonomialOrder,
    pub verdict: InvolutionVerdict,
}

impl InvolutionCertificate {
    /// Re-check every reconstruction identity. A certificate that fails this
    /// was corrupted; `certify_involution` always returns `true` here.
    pub fn verify_reconstruction(&self) -> bool {
        self.pairs.iter().all(|pair| {
            let red = ModuleReduction {
                coefficients: pair.coefficients.clone(),
                remainder: pair.residual.clone(),
                order: self.order,
                decisive: pair.decisive,
            };
            red.reconstructs(&pair.bracket, &self.generators)
        })
    }
}

/// Compute pairwise brackets of `fs` and reduce each against the whole
/// family, yielding an exact involution certificate.
pub fn certify_involution(
    fs: &[SparsePoly],
    chart: &Chart,
    order: MonomialOrder,
) -> InvolutionCertificate {
    let coord_names: Vec<&str> = chart.coord_names().collect();
    let mut pairs = Vec::new();
    let mut any_undecided = false;
    let mut any_refuted = false;
    for i in 0..fs.len() {
        for j in (i + 1)..fs.len() {
            let bracket = poly_poisson(&fs[i], &fs[j], chart);
            let red = module_reduce(&bracket, fs, order);
            if !red.remainder.is_zero() {
                if red.decisive {
                    any_refuted = true;
                } else {
                    any_undecided = true;
                }
            }
            let coefficients_regular = red
                .coefficients
                .iter()
                .all(|c| c.is_polefree_in(&coord_names));
            pairs.push(PairReduction {
                i,
                j,
                bracket,
                coefficients: red.coefficients,
                residual: red.remainder,
                coefficients_regular,
                decisive: red.decisive,
            });
        }
    }
    let verdict = if any_refuted {
        InvolutionVerdict::NotInvolution
    } else if any_undecided {
        InvolutionVerdict::Undecided
    } else {
        InvolutionVerdict::ParticularInvolution
    };
    InvolutionCertificate {
        generators: fs.to_vec(),
        pairs,
        order,
        verdict,
    }
}
