//! Generic tree-walking evaluator.
//!
//! One walk serves values and derivatives of any order: the scalar type is
//! anything implementing [`Real`], and domain decisions (division by zero,
//! negative square roots, branch selection for powers) always inspect the
//! primal part, never the derivative components.

use super::ast::{node_to_string, Func, Node};
use super::dual::Real;
use super::EvalError;

/// Evaluate `node` with variable values supplied per symbol slot.
pub(super) fn eval_node<T: Real>(node: &Node, vals: &[T]) -> Result<T, EvalError> {
    match node {
        Node::Int(_, approx) => Ok(T::from_f64(*approx)),
        Node::Float(v) => Ok(T::from_f64(*v)),
        Node::Symbol { slot, .. } => Ok(vals[*slot]),
        Node::Add(a, b) => Ok(eval_node(a, vals)? + eval_node(b, vals)?),
        Node::Sub(a, b) => Ok(eval_node(a, vals)? - eval_node(b, vals)?),
        Node::Mul(a, b) => Ok(eval_node(a, vals)? * eval_node(b, vals)?),
        Node::Div(a, b) => {
            let num = eval_node(a, vals)?;
            let den = eval_node(b, vals)?;
            if den.primal() == 0.0 {
                return Err(EvalError::DivisionByZero {
                    subexpression: node_to_string(node),
                });
            }
            Ok(num / den)
        }
        Node::Neg(a) => Ok(-eval_node(a, vals)?),
        Node::Pow(base, exponent) => eval_pow(node, base, exponent, vals),
        Node::Call(func, arg) => {
            let a = eval_node(arg, vals)?;
            match func {
                Func::Sin => Ok(a.sin()),
                Func::Cos => Ok(a.cos()),
                Func::Tan => Ok(a.tan()),
                Func::Atan => Ok(a.atan()),
                Func::Exp => Ok(a.exp()),
                Func::Log => {
                    if a.primal() <= 0.0 {
                        return Err(EvalError::NonPositiveLog {
                            subexpression: node_to_string(node),
                        });
                    }
                    Ok(a.ln())
                }
                Func::Sqrt => {
                    if a.primal() < 0.0 {
                        return Err(EvalError::NegativeSqrt {
                            subexpression: node_to_string(node),
                        });
                    }
                    Ok(a.sqrt())
                }
            }
        }
    }
}

/// Power evaluation.
///
/// A constant integer exponent uses binary exponentiation, which is defined
/// for any base (and keeps derivatives exact through plain products). Every
/// other exponent goes through `exp(e * log(b))` and therefore needs a
/// strictly positive base.
fn eval_pow<T: Real>(
    whole: &Node,
    base: &Node,
    exponent: &Node,
    vals: &[T],
) -> Result<T, EvalError> {
    let b = eval_node(base, vals)?;
    if let Some(n) = exponent.as_const_integer() {
        if n.abs() > i32::MAX as i64 {
            return Err(EvalError::ExponentOverflow {
                subexpression: node_to_string(whole),
            });
        }
        if n < 0 && b.primal() == 0.0 {
            return Err(EvalError::DivisionByZero {
                subexpression: node_to_string(whole),
            });
        }
        return Ok(b.powi(n as i32));
    }
    let e = eval_node(exponent, vals)?;
    if b.primal() <= 0.0 {
        return Err(EvalError::NonIntegerPowerOfNonPositive {
            subexpression: node_to_string(whole),
        });
    }
    Ok((e * b.ln()).exp())
}
