//! Conversion from parsed expressions to exact sparse polynomials.
//!
//! The expression language is broader than the polynomial ring: it has
//! transcendental functions, arbitrary exponents, and division by arbitrary
//! subexpressions. Conversion succeeds exactly when the expression denotes a
//! Laurent polynomial with rational coefficients:
//!
//! - integer literals convert exactly; decimal literals convert to the
//!   rational their double value represents exactly (every finite double is
//!   a rational), so no rounding happens here either;
//! - division is allowed only by a single-term divisor (a monomial), which
//!   folds into coefficients and Laurent exponents;
//! - exponents must be constant integers; negative exponents require a
//!   single-term base for the same reason;
//! - function calls do not convert.

use num_bigint::BigInt;
use num_rational::BigRational;

use crate::expr::{node_to_string, Expression, Node};

use super::{PolyError, SparsePoly};

/// Convert an expression to an exact sparse Laurent polynomial, or report
/// which subexpression prevents that reading.
pub fn poly_from_expression(expression: &Expression) -> Result<SparsePoly, PolyError> {
    convert(expression.root())
}

fn not_poly(reason: &str, node: &Node) -> PolyError {
    PolyError::NotPolynomial {
        reason: reason.to_string(),
        subexpression: node_to_string(node),
    }
}

fn convert(node: &Node) -> Result<SparsePoly, PolyError> {
    match node {
        Node::Int(v, _) => Ok(SparsePoly::constant(BigRational::from_integer(
            BigInt::from(v.clone()),
        ))),
        Node::Float(v) => {
            // Finite doubles are exact rationals; the parser rejects inf/nan.
            let r = BigRational::from_float(*v)
                .ok_or_else(|| not_poly("non-finite constant", node))?;
            Ok(SparsePoly::constant(r))
        }
        Node::Symbol { name, .. } => Ok(SparsePoly::variable(name)),
        Node::Add(a, b) => Ok(&convert(a)? + &convert(b)?),
        Node::Sub(a, b) => Ok(&convert(a)? - &convert(b)?),
        Node::Mul(a, b) => Ok(&convert(a)? * &convert(b)?),
        Node::Neg(a) => Ok(-&convert(a)?),
        Node::Div(a, b) => {
            let num = convert(a)?;
            let den = convert(b)?;
            if den.is_zero() {
                return Err(not_poly("division by zero", node));
            }
            let inv = den
                .term_inverse()
                .ok_or_else(|| not_poly("division by a multi-term divisor", node))?;
            Ok(&num * &inv)
        }
        Node::Pow(base, exponent) => {
            let Some(e) = exponent.as_const_integer() else {
                return Err(not_poly("non-constant-integer exponent", node));
            };
            if e.unsigned_abs() > i32::MAX as u64 {
                return Err(PolyError::ExponentOverflow {
                    subexpression: node_to_string(node),
                });
            }
            let b = convert(base)?;
            if e >= 0 {
                Ok(b.powi(e as u32))
            } else {
                let inv = b.term_inverse().ok_or_else(|| {
                    not_poly("negative exponent of a multi-term base", node)
                })?;
                Ok(inv.powi((-e) as u32))
            }
        }
        Node::Call(..) => Err(not_poly("transcendental function", node)),
    }
}
