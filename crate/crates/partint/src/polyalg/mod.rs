//! Exact sparse Laurent-polynomial arithmetic over arbitrary-precision
//! rationals.
//!
//! This is the zero-roundoff route of the toolkit: where the numeric modules
//! sample and tolerate, this module proves. Brackets of polynomial data,
//! membership of a bracket in the module generated by candidate integrals,
//! and the resulting involution certificates are all computed exactly.
//!
//! Monomials may carry negative exponents. Inverse powers such as `1/r` or
//! `1/rho^2` appear in every reduced Hamiltonian of the catalog, and keeping
//! them as Laurent exponents (rather than as opaque denominators) is what
//! lets the division algorithm terminate and produce exact coefficient
//! certificates.
//!
//! Storage is canonical: variables sorted by name, one aligned exponent
//! vector per term, no zero coefficients, no unused variables. Two equal
//! polynomials are therefore structurally identical, and `==` is exact
//! mathematical equality.

mod bracket;
mod certificate;
mod convert;
mod division;

use std::collections::BTreeMap;
use std::fmt;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

pub use bracket::poly_poisson;
pub use certificate::{certify_involution, InvolutionCertificate, InvolutionVerdict, PairReduction};
pub use convert::poly_from_expression;
pub use division::{module_reduce, ModuleReduction, MonomialOrder};

use crate::expr::Binding;

/// Conversion or evaluation failure in the exact layer.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum PolyError {
    #[error("not a polynomial: {reason} in `{subexpression}`")]
    NotPolynomial {
        reason: String,
        subexpression: String,
    },
    #[error("exponent overflow while converting `{subexpression}`")]
    ExponentOverflow { subexpression: String },
    #[error("variable `{0}` has no value")]
    UnboundVariable(String),
}

/// Sparse multivariate Laurent polynomial with exact rational coefficients.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SparsePoly {
    /// Variable names, sorted ascending; every variable occurs in some term.
    vars: Vec<String>,
    /// Term map: exponent vector (aligned with `vars`) to nonzero coefficient.
    terms: BTreeMap<Vec<i32>, BigRational>,
}

impl SparsePoly {
    pub fn zero() -> SparsePoly {
        SparsePoly {
            vars: Vec::new(),
            terms: BTreeMap::new(),
        }
    }

    pub fn constant(c: BigRational) -> SparsePoly {
        let mut terms = BTreeMap::new();
        if !c.is_zero() {
            terms.insert(Vec::new(), c);
        }
        SparsePoly {
            vars: Vec::new(),
            terms,
        }
    }

    pub fn int(v: i64) -> SparsePoly {
        SparsePoly::constant(BigRational::from_integer(BigInt::from(v)))
    }

    /// Exact rational constant `num/den`.
    pub fn ratio(num: i64, den: i64) -> SparsePoly {
        SparsePoly::constant(BigRational::new(BigInt::from(num), BigInt::from(den)))
    }

    pub fn variable(name: &str) -> SparsePoly {
        SparsePoly::monomial(BigRational::one(), &[(name, 1)])
    }

    /// Single term `coeff * Π var^exp`. Zero exponents are dropped; a zero
    /// coefficient gives the zero polynomial.
    pub fn monomial(coeff: BigRational, powers: &[(&str, i32)]) -> SparsePoly {
        if coeff.is_zero() {
            return SparsePoly::zero();
        }
        let mut by_name: BTreeMap<String, i32> = BTreeMap::new();
        for (name, e) in powers {
            if *e != 0 {
                *by_name.entry(name.to_string()).or_insert(0) += e;
            }
        }
        by_name.retain(|_, e| *e != 0);
        let vars: Vec<String> = by_name.keys().cloned().collect();
        let key: Vec<i32> = by_name.values().copied().collect();
        let mut terms = BTreeMap::new();
        terms.insert(key, coeff);
        SparsePoly { vars, terms }
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    pub fn vars(&self) -> &[String] {
        &self.vars
    }

    /// Iterate terms as (variable names with exponents, coefficient), in the
    /// canonical storage order.
    pub fn terms(&self) -> impl Iterator<Item = (Vec<(&str, i32)>, &BigRational)> {
        self.terms.iter().map(|(key, c)| {
            let mono: Vec<(&str, i32)> = self
                .vars
                .iter()
                .zip(key.iter())
                .filter(|(_, e)| **e != 0)
                .map(|(v, e)| (v.as_str(), *e))
                .collect();
            (mono, c)
        })
    }

    /// True when the polynomial is exactly one term.
    pub fn is_single_term(&self) -> bool {
        self.terms.len() == 1
    }

    /// If the polynomial is exactly one variable with exponent one and unit
    /// coefficient, return the variable name.
    pub fn as_single_variable(&self) -> Option<&str> {
        if self.terms.len() != 1 || self.vars.len() != 1 {
            return None;
        }
        let (key, coeff) = self.terms.iter().next().unwrap();
        if key == &[1] && coeff.is_one() {
            Some(&self.vars[0])
        } else {
            None
        }
    }

    /// Smallest exponent of `var` over all terms (0 if absent or no terms).
    pub fn min_exponent(&self, var: &str) -> i32 {
        let Some(col) = self.vars.iter().position(|v| v == var) else {
            return 0;
        };
        self.terms.keys().map(|k| k[col]).min().unwrap_or(0)
    }

    /// True when no term carries a negative exponent of any of `vars`:
    /// the polynomial has no pole where those variables vanish.
    pub fn is_polefree_in<S: AsRef<str>>(&self, vars: &[S]) -> bool {
        vars.iter().all(|v| self.min_exponent(v.as_ref()) >= 0)
    }

    /// Rebuild in canonical form: drop zero coefficients and unused variables.
    fn normalize(vars: Vec<String>, terms: BTreeMap<Vec<i32>, BigRational>) -> SparsePoly {
        let mut terms = terms;
        terms.retain(|_, c| !c.is_zero());
        if terms.is_empty() {
            return SparsePoly::zero();
        }
        // Determine which variable columns are actually used.
        let used: Vec<bool> = (0..vars.len())
            .map(|col| terms.keys().any(|k| k[col] != 0))
            .collect();
        if used.iter().all(|u| *u) {
            return SparsePoly { vars, terms };
        }
        let kept_vars: Vec<String> = vars
            .iter()
            .zip(used.iter())
            .filter(|(_, u)| **u)
            .map(|(v, _)| v.clone())
            .collect();
        let compact = |key: &Vec<i32>| -> Vec<i32> {
            key.iter()
                .zip(used.iter())
                .filter(|(_, u)| **u)
                .map(|(e, _)| *e)
                .collect()
        };
        let terms = terms.into_iter().map(|(k, c)| (compact(&k), c)).collect();
        SparsePoly {
            vars: kept_vars,
            terms,
        }
    }

    /// Map both polynomials onto the union variable set (sorted merge).
    fn aligned(
        a: &SparsePoly,
        b: &SparsePoly,
    ) -> (
        Vec<String>,
        BTreeMap<Vec<i32>, BigRational>,
        BTreeMap<Vec<i32>, BigRational>,
    ) {
        let universe = union_vars(&a.vars, &b.vars);
        let ta = remap_terms(&a.vars, &a.terms, &universe);
        let tb = remap_terms(&b.vars, &b.terms, &universe);
        (universe, ta, tb)
    }

    pub fn scale(&self, c: &BigRational) -> SparsePoly {
        if c.is_zero() {
            return SparsePoly::zero();
        }
        let terms = self
            .terms
            .iter()
            .map(|(k, v)| (k.clone(), v * c))
            .collect();
        SparsePoly {
            vars: self.vars.clone(),
            terms,
        }
    }

    /// Non-negative integer power by repeated squaring.
    pub fn powi(&self, n: u32) -> SparsePoly {
        let mut acc = SparsePoly::int(1);
        let mut base = self.clone();
        let mut e = n;
        while e > 0 {
            if e & 1 == 1 {
                acc = &acc * &base;
            }
            base = &base * &base;
            e >>= 1;
        }
        acc
    }

    /// Reciprocal of a single-term polynomial: invert the coefficient and
    /// negate all exponents. Returns `None` for zero or multi-term input.
    pub fn term_inverse(&self) -> Option<SparsePoly> {
        if self.terms.len() != 1 {
            return None;
        }
        let (key, coeff) = self.terms.iter().next().unwrap();
        let inv_key: Vec<i32> = key.iter().map(|e| -e).collect();
        let mut terms = BTreeMap::new();
        terms.insert(inv_key, coeff.recip());
        Some(SparsePoly::normalize(self.vars.clone(), terms))
    }

    /// Exact partial derivative with respect to `var`. Negative exponents
    /// differentiate like any other: d/dx x^k = k x^(k-1).
    pub fn partial(&self, var: &str) -> SparsePoly {
        let Some(col) = self.vars.iter().position(|v| v == var) else {
            return SparsePoly::zero();
        };
        let mut terms: BTreeMap<Vec<i32>, BigRational> = BTreeMap::new();
        for (key, coeff) in &self.terms {
            let e = key[col];
            if e == 0 {
                continue;
            }
            let mut k = key.clone();
            k[col] = e - 1;
            let c = coeff * BigRational::from_integer(BigInt::from(e));
            let entry = terms.entry(k).or_insert_with(BigRational::zero);
            *entry += c;
        }
        SparsePoly::normalize(self.vars.clone(), terms)
    }

    /// Rename a variable (used to compare charts that differ only in naming).
    /// The target name must not collide with an existing variable.
    pub fn rename_variable(&self, from: &str, to: &str) -> SparsePoly {
        if !self.vars.iter().any(|v| v == from) {
            return self.clone();
        }
        assert!(
            !self.vars.iter().any(|v| v == to),
            "rename target `{to}` already occurs"
        );
        let renamed: Vec<String> = self
            .vars
            .iter()
            .map(|v| if v == from { to.to_string() } else { v.clone() })
            .collect();
        // Re-sort columns to restore canonical variable order.
        let mut order: Vec<usize> = (0..renamed.len()).collect();
        order.sort_by(|&a, &b| renamed[a].cmp(&renamed[b]));
        let vars: Vec<String> = order.iter().map(|&i| renamed[i].clone()).collect();
        let terms = self
            .terms
            .iter()
            .map(|(k, c)| {
                let key: Vec<i32> = order.iter().map(|&i| k[i]).collect();
                (key, c.clone())
            })
            .collect();
        SparsePoly { vars, terms }
    }

    /// Evaluate with double-precision values for every variable.
    pub fn eval_f64(&self, binding: &Binding) -> Result<f64, PolyError> {
        let vals: Vec<f64> = self
            .vars
            .iter()
            .map(|v| {
                binding
                    .get(v)
                    .ok_or_else(|| PolyError::UnboundVariable(v.clone()))
            })
            .collect::<Result<_, _>>()?;
        let mut acc = 0.0;
        for (key, coeff) in &self.terms {
            let mut t = rational_to_f64(coeff);
            for (col, e) in key.iter().enumerate() {
                if *e != 0 {
                    t *= vals[col].powi(*e);
                }
            }
            acc += t;
        }
        Ok(acc)
    }

    /// Evaluate with exact rational values for every variable. Negative
    /// exponents of a zero value are reported as unbound-style errors by the
    /// caller's choice; here they panic via division by zero in BigRational,
    /// so callers must pass nonzero values wherever negative exponents occur.
    pub fn eval_exact(
        &self,
        values: &BTreeMap<String, BigRational>,
    ) -> Result<BigRational, PolyError> {
        let vals: Vec<&BigRational> = self
            .vars
            .iter()
            .map(|v| {
                values
                    .get(v)
                    .ok_or_else(|| PolyError::UnboundVariable(v.clone()))
            })
            .collect::<Result<_, _>>()?;
        let mut acc = BigRational::zero();
        for (key, coeff) in &self.terms {
            let mut t = coeff.clone();
            for (col, e) in key.iter().enumerate() {
                match e.cmp(&0) {
                    std::cmp::Ordering::Greater => {
                        t *= pow_rational(vals[col], *e as u32);
                    }
                    std::cmp::Ordering::Less => {
                        t /= pow_rational(vals[col], e.unsigned_abs());
                    }
                    std::cmp::Ordering::Equal => {}
                }
            }
            acc += t;
        }
        Ok(acc)
    }

    /// Internal: terms remapped onto an explicit variable universe.
    pub(crate) fn terms_in_universe(
        &self,
        universe: &[String],
    ) -> BTreeMap<Vec<i32>, BigRational> {
        remap_terms(&self.vars, &self.terms, universe)
    }

    pub(crate) fn from_universe_terms(
        universe: &[String],
        terms: BTreeMap<Vec<i32>, BigRational>,
    ) -> SparsePoly {
        SparsePoly::normalize(universe.to_vec(), terms)
    }
}

fn pow_rational(v: &BigRational, e: u32) -> BigRational {
    let mut acc = BigRational::one();
    let mut base = v.clone();
    let mut n = e;
    while n > 0 {
        if n & 1 == 1 {
            acc *= &base;
        }
        base = &base * &base;
        n >>= 1;
    }
    acc
}

pub(crate) fn rational_to_f64(r: &BigRational) -> f64 {
    // Ratio::to_f64 exists behind num-traits' ToPrimitive.
    use num_traits::ToPrimitive;
    r.to_f64().unwrap_or(f64::NAN)
}

fn union_vars(a: &[String], b: &[String]) -> Vec<String> {
    let mut out = Vec::with_capacity(a.len() + b.len());
    let (mut i, mut j) = (0, 0);
    while i < a.len() && j < b.len() {
        match a[i].cmp(&b[j]) {
            std::cmp::Ordering::Less => {
                out.push(a[i].clone());
                i += 1;
            }
            std::cmp::Ordering::Greater => {
                out.push(b[j].clone());
                j += 1;
            }
            std::cmp::Ordering::Equal => {
                out.push(a[i].clone());
                i += 1;
                j += 1;
            }
        }
    }
    out.extend(a[i..].iter().cloned());
    out.extend(b[j..].iter().cloned());
    out
}

fn remap_terms(
    vars: &[String],
    terms: &BTreeMap<Vec<i32>, BigRational>,
    universe: &[String],
) -> BTreeMap<Vec<i32>, BigRational> {
    let cols: Vec<usize> = vars
        .iter()
        .map(|v| {
            universe
                .iter()
                .position(|u| u == v)
                .expect("universe must contain all variables")
        })
        .collect();
    terms
        .iter()
        .map(|(key, coeff)| {
            let mut k = vec![0i32; universe.len()];
            for (col, e) in cols.iter().zip(key.iter()) {
                k[*col] = *e;
            }
            (k, coeff.clone())
        })
        .collect()
}

impl std::ops::Add for &SparsePoly {
    type Output = SparsePoly;

    fn add(self, other: &SparsePoly) -> SparsePoly {
        let (universe, mut ta, tb) = SparsePoly::aligned(self, other);
        for (k, c) in tb {
            let entry = ta.entry(k).or_insert_with(BigRational::zero);
            *entry += c;
        }
        SparsePoly::normalize(universe, ta)
    }
}

impl std::ops::Sub for &SparsePoly {
    type Output = SparsePoly;

    fn sub(self, other: &SparsePoly) -> SparsePoly {
        let (universe, mut ta, tb) = SparsePoly::aligned(self, other);
        for (k, c) in tb {
            let entry = ta.entry(k).or_insert_with(BigRational::zero);
            *entry -= c;
        }
        SparsePoly::normalize(universe, ta)
    }
}

impl std::ops::Mul for &SparsePoly {
    type Output = SparsePoly;

    fn mul(self, other: &SparsePoly) -> SparsePoly {
        if self.is_zero() || other.is_zero() {
            return SparsePoly::zero();
        }
        let (universe, ta, tb) = SparsePoly::aligned(self, other);
        let mut out: BTreeMap<Vec<i32>, BigRational> = BTreeMap::new();
        for (ka, ca) in &ta {
            for (kb, cb) in &tb {
                let k: Vec<i32> = ka.iter().zip(kb.iter()).map(|(x, y)| x + y).collect();
                let entry = out.entry(k).or_insert_with(BigRational::zero);
                *entry += ca * cb;
            }
        }
        SparsePoly::normalize(universe, out)
    }
}

impl std::ops::Neg for &SparsePoly {
    type Output = SparsePoly;

    fn neg(self) -> SparsePoly {
        let terms = self
            .terms
            .iter()
            .map(|(k, c)| (k.clone(), -c.clone()))
            .collect();
        SparsePoly {
            vars: self.vars.clone(),
            terms,
        }
    }
}

impl fmt::Display for SparsePoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return f.write_str("0");
        }
        let mut first = true;
        for (key, coeff) in &self.terms {
            let negative = coeff.is_negative();
            let magnitude = if negative { -coeff.clone() } else { coeff.clone() };
            if first {
                if negative {
                    f.write_str("-")?;
                }
                first = false;
            } else if negative {
                f.write_str(" - ")?;
            } else {
                f.write_str(" + ")?;
            }
            let mono: Vec<String> = self
                .vars
                .iter()
                .zip(key.iter())
                .filter(|(_, e)| **e != 0)
                .map(|(v, e)| if *e == 1 { v.clone() } else { format!("{v}^{e}") })
                .collect();
            if mono.is_empty() {
                write!(f, "{magnitude}")?;
            } else if magnitude.is_one() {
                f.write_str(&mono.join("*"))?;
            } else {
                write!(f, "{magnitude}*{}", mono.join("*"))?;
            }
        }
        Ok(())
    }
}
