//! Multivariate division: reduce a polynomial against a set of module
//! generators, producing coefficient polynomials and a remainder.
//!
//! Two regimes:
//!
//! - **Single-variable generators** (each generator is a bare variable, the
//!   practical case for momentum integrals): reduction is an exact decision.
//!   A term belongs to the module iff it contains at least one generator
//!   variable with positive exponent, and the split is independent of the
//!   monomial order. Terms are assigned to the first matching generator.
//! - **General generators**: classical division with respect to a monomial
//!   order, extended to Laurent input by shifting every polynomial into
//!   non-negative exponents first (multiplication by a monomial is a unit in
//!   the Laurent ring, so membership is unaffected). Zero remainder proves
//!   membership constructively; a nonzero remainder proves nothing, since
//!   the generators are not a Gröbner basis, and callers must treat it as
//!   undecided.

use std::collections::BTreeMap;

use num_rational::BigRational;
use num_traits::Zero;

use super::SparsePoly;

/// Monomial order used to pick leading terms during general division.
///
/// Exponent vectors are compared over the variable universe sorted by name.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum MonomialOrder {
    /// Pure lexicographic comparison of exponent vectors.
    Lex,
    /// Total degree first, ties broken lexicographically.
    GrLex,
}

impl MonomialOrder {
    fn cmp_keys(self, a: &[i32], b: &[i32]) -> std::cmp::Ordering {
        match self {
            MonomialOrder::Lex => a.cmp(b),
            MonomialOrder::GrLex => {
                let da: i64 = a.iter().map(|e| *e as i64).sum();
                let db: i64 = b.iter().map(|e| *e as i64).sum();
                da.cmp(&db).then_with(|| a.cmp(b))
            }
        }
    }
}

/// Result of reducing `p` against module generators.
#[derive(Debug, Clone, PartialEq)]
pub struct ModuleReduction {
    /// One coefficient polynomial per generator:
    /// `p = Σ coefficients[s]·gens[s] + remainder` identically.
    pub coefficients: Vec<SparsePoly>,
    /// What could not be expressed in the module with this division.
    pub remainder: SparsePoly,
    /// Order the division ran under (irrelevant to the single-variable path).
    pub order: MonomialOrder,
    /// True when a nonzero remainder proves non-membership (single-variable
    /// generators). False means a nonzero remainder is merely undecided.
    pub decisive: bool,
}

impl ModuleReduction {
    /// Exact reconstruction check: `p == Σ coefficients·gens + remainder`.
    pub fn reconstructs(&self, p: &SparsePoly, gens: &[SparsePoly]) -> bool {
        let mut acc = self.remainder.clone();
        for (c, g) in self.coefficients.iter().zip(gens.iter()) {
            acc = &acc + &(c * g);
        }
        acc == *p
    }
}

/// Reduce `p` against `gens`, writing `p = Σ coefficients·gens + remainder`.
///
/// The reconstruction identity holds exactly in every case. See the module
/// docs for when the remainder decides membership.
pub fn module_reduce(
    p: &SparsePoly,
    gens: &[SparsePoly],
    order: MonomialOrder,
) -> ModuleReduction {
    let single_vars: Option<Vec<&str>> =
        gens.iter().map(|g| g.as_single_variable()).collect();
    match single_vars {
        Some(vars) => reduce_by_variables(p, &vars, gens.len(), order),
        None => reduce_general(p, gens, order),
    }
}

/// Exact term classification when every generator is a bare variable.
fn reduce_by_variables(
    p: &SparsePoly,
    vars: &[&str],
    n_gens: usize,
    order: MonomialOrder,
) -> ModuleReduction {
    // Universe: p's variables plus any generator variable absent from p.
    let mut universe: Vec<String> = p.vars().to_vec();
    for v in vars {
        if !universe.iter().any(|u| u == v) {
            universe.push(v.to_string());
        }
    }
    universe.sort();
    let cols: Vec<usize> = vars
        .iter()
        .map(|v| universe.iter().position(|u| u == v).unwrap())
        .collect();

    let mut quotients: Vec<BTreeMap<Vec<i32>, BigRational>> =
        vec![BTreeMap::new(); n_gens];
    let mut rem: BTreeMap<Vec<i32>, BigRational> = BTreeMap::new();
    for (key, coeff) in p.terms_in_universe(&universe) {
        // First generator whose variable appears with positive exponent
        // claims the term; a negative exponent is a pole in that variable,
        // not a factor of it.
        match cols.iter().position(|&c| key[c] >= 1) {
            Some(s) => {
                let mut k = key;
                k[cols[s]] -= 1;
                quotients[s].insert(k, coeff);
            }
            None => {
                rem.insert(key, coeff);
            }
        }
    }
    ModuleReduction {
        coefficients: quotients
            .into_iter()
            .map(|t| SparsePoly::from_universe_terms(&universe, t))
            .collect(),
        remainder: SparsePoly::from_universe_terms(&universe, rem),
        order,
        decisive: true,
    }
}

/// Classical multivariate division after shifting Laurent input into
/// non-negative exponents.
fn reduce_general(p: &SparsePoly, gens: &[SparsePoly], order: MonomialOrder) -> ModuleReduction {
    // Common variable universe for p and all generators.
    let mut universe: Vec<String> = p.vars().to_vec();
    for g in gens {
        for v in g.vars() {
            if !universe.iter().any(|u| u == v) {
                universe.push(v.clone());
            }
        }
    }
    universe.sort();
    let width = universe.len();

    let min_exps = |terms: &BTreeMap<Vec<i32>, BigRational>| -> Vec<i32> {
        let mut m = vec![0i32; width];
        for key in terms.keys() {
            for (col, e) in key.iter().enumerate() {
                m[col] = m[col].min(*e);
            }
        }
        m
    };
    let shift = |terms: &BTreeMap<Vec<i32>, BigRational>, delta: &[i32]| {
        terms
            .iter()
            .map(|(k, c)| {
                let key: Vec<i32> = k.iter().zip(delta.iter()).map(|(e, d)| e + d).collect();
                (key, c.clone())
            })
            .collect::<BTreeMap<Vec<i32>, BigRational>>()
    };

    let p_terms = p.terms_in_universe(&universe);
    let p_shift: Vec<i32> = min_exps(&p_terms).iter().map(|e| -e).collect();
    let mut work = shift(&p_terms, &p_shift);

    // Shift each generator independently; record the offsets so the
    // quotients can be mapped back afterwards.
    let mut shifted_gens: Vec<(BTreeMap<Vec<i32>, BigRational>, Vec<i32>)> = Vec::new();
    for g in gens {
        let terms = g.terms_in_universe(&universe);
        let s: Vec<i32> = min_exps(&terms).iter().map(|e| -e).collect();
        shifted_gens.push((shift(&terms, &s), s));
    }
    let gen_leads: Vec<Option<Vec<i32>>> = shifted_gens
        .iter()
        .map(|(t, _)| leading_key(t, order).cloned())
        .collect();

    let mut quotients: Vec<BTreeMap<Vec<i32>, BigRational>> =
        vec![BTreeMap::new(); gens.len()];
    let mut rem: BTreeMap<Vec<i32>, BigRational> = BTreeMap::new();

    'outer: while let Some(lead) = leading_key(&work, order).cloned() {
        let lead_coeff = work[&lead].clone();
        for (s, (gterms, _)) in shifted_gens.iter().enumerate() {
            let Some(glead) = gen_leads[s].as_ref() else {
                continue;
            };
            if lead.iter().zip(glead.iter()).all(|(a, b)| a >= b) {
                let t_key: Vec<i32> =
                    lead.iter().zip(glead.iter()).map(|(a, b)| a - b).collect();
                let t_coeff = &lead_coeff / &gterms[glead];
                // work -= t * g
                for (gk, gc) in gterms {
                    let k: Vec<i32> =
                        t_key.iter().zip(gk.iter()).map(|(a, b)| a + b).collect();
                    let entry = work.entry(k).or_insert_with(BigRational::zero);
                    *entry -= &t_coeff * gc;
                }
                work.retain(|_, c| !c.is_zero());
                let entry = quotients[s].entry(t_key).or_insert_with(BigRational::zero);
                *entry += t_coeff;
                continue 'outer;
            }
        }
        // No generator's leading monomial divides ours: move it aside.
        rem.insert(lead.clone(), lead_coeff);
        work.remove(&lead);
    }

    // Undo the shifts: p·x^sp = Σ q̃_s · (g_s·x^ss) + r̃ gives
    // p = Σ (q̃_s·x^(ss−sp))·g_s + r̃·x^(−sp).
    let neg = |v: &[i32]| -> Vec<i32> { v.iter().map(|e| -e).collect() };
    let coefficients: Vec<SparsePoly> = quotients
        .into_iter()
        .zip(shifted_gens.iter())
        .map(|(q, (_, ss))| {
            let delta: Vec<i32> = ss
                .iter()
                .zip(p_shift.iter())
                .map(|(s, ps)| s - ps)
                .collect();
            SparsePoly::from_universe_terms(&universe, shift(&q, &delta))
        })
        .collect();
    let remainder =
        SparsePoly::from_universe_terms(&universe, shift(&rem, &neg(&p_shift)));
    ModuleReduction {
        coefficients,
        remainder,
        order,
        decisive: false,
    }
}

fn leading_key<'a>(
    terms: &'a BTreeMap<Vec<i32>, BigRational>,
    order: MonomialOrder,
) -> Option<&'a Vec<i32>> {
    terms.keys().max_by(|a, b| order.cmp_keys(a, b))
}
