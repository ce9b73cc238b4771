//! Symbolic expressions over named real variables.
//!
//! This module is the shared language of the toolkit: Hamiltonians,
//! candidate invariants, observables, and potentials are all [`Expression`]
//! values. The design is deliberately minimal:
//!
//! * a fixed grammar (`+ - * / ^`, unary minus, `sin cos tan atan exp log
//!   sqrt`, parentheses) with no user-defined functions;
//! * no rewriting or simplification — an expression stays structurally as
//!   written, and printing is canonical (`parse . print . parse == parse`);
//! * exact derivatives by forward-mode dual numbers (see [`dual`]) rather
//!   than finite differences, so gradients carry no step-size error.
//!
//! Integer literals are kept exact (arbitrary precision) so that polynomial
//! extraction downstream loses nothing; decimal literals are doubles.

mod ast;
pub mod dual;
mod eval;
mod lexer;
mod parser;

use std::collections::BTreeMap;
use std::fmt;

pub(crate) use ast::{node_to_string, Node};
use dual::{Dual, Real};

/// Parse failure: a syntax error with byte position and expectation set, or a
/// call to a function the grammar does not know.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ParseError {
    #[error("syntax error at byte {offset}: expected {}; found {found}", expected.join(" or "))]
    Syntax {
        offset: usize,
        expected: Vec<String>,
        found: String,
    },
    #[error(
        "unknown function `{name}` at byte {offset}; available functions: \
         sin, cos, tan, atan, exp, log, sqrt"
    )]
    UnknownFunction { offset: usize, name: String },
}

impl ParseError {
    /// Byte offset the error points at.
    pub fn offset(&self) -> usize {
        match self {
            ParseError::Syntax { offset, .. } => *offset,
            ParseError::UnknownFunction { offset, .. } => *offset,
        }
    }
}

/// Evaluation failure: an unbound symbol or a domain violation, which names
/// the offending subexpression.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum EvalError {
    #[error("symbol `{name}` has no bound value")]
    UnboundSymbol { name: String },
    #[error("division by zero while evaluating `{subexpression}`")]
    DivisionByZero { subexpression: String },
    #[error("square root of a negative value while evaluating `{subexpression}`")]
    NegativeSqrt { subexpression: String },
    #[error("logarithm of a non-positive value while evaluating `{subexpression}`")]
    NonPositiveLog { subexpression: String },
    #[error("non-integer power of a non-positive base while evaluating `{subexpression}`")]
    NonIntegerPowerOfNonPositive { subexpression: String },
    #[error("integer exponent too large while evaluating `{subexpression}`")]
    ExponentOverflow { subexpression: String },
}

/// Finite assignment of values to symbol names.
///
/// Backed by an ordered map so iteration (and therefore any derived output)
/// is deterministic.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Binding {
    map: BTreeMap<String, f64>,
}

impl Binding {
    pub fn new() -> Self {
        Self::default()
    }

    /// Builder-style insert.
    pub fn with(mut self, name: &str, value: f64) -> Self {
        self.insert(name, value);
        self
    }

    pub fn insert(&mut self, name: &str, value: f64) {
        self.map.insert(name.to_string(), value);
    }

    pub fn get(&self, name: &str) -> Option<f64> {
        self.map.get(name).copied()
    }

    pub fn contains(&self, name: &str) -> bool {
        self.map.contains_key(name)
    }

    pub fn len(&self) -> usize {
        self.map.len()
    }

    pub fn is_empty(&self) -> bool {
        self.map.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, f64)> {
        self.map.iter().map(|(k, v)| (k.as_str(), *v))
    }

    /// Union of two bindings; values in `other` win on collision.
    pub fn merged(&self, other: &Binding) -> Binding {
        let mut map = self.map.clone();
        for (k, v) in &other.map {
            map.insert(k.clone(), *v);
        }
        Binding { map }
    }
}

impl FromIterator<(String, f64)> for Binding {
    fn from_iter<I: IntoIterator<Item = (String, f64)>>(iter: I) -> Self {
        Binding {
            map: iter.into_iter().collect(),
        }
    }
}

/// Immutable expression: a parse tree plus the ordered set of free symbols
/// (order of first appearance in the source).
#[derive(Clone, Debug, PartialEq)]
pub struct Expression {
    root: Node,
    free: Vec<String>,
}

impl Expression {
    /// Parse source text. See the module docs for the grammar.
    pub fn parse(src: &str) -> Result<Expression, ParseError> {
        let mut root = parser::parse_source(src)?;
        let free = assign_slots(&mut root);
        Ok(Expression { root, free })
    }

    /// The constant `0`.
    pub fn zero() -> Expression {
        Expression {
            root: Node::int(0),
            free: Vec::new(),
        }
    }

    /// Integer constant.
    pub fn integer(v: i64) -> Expression {
        let root = if v < 0 {
            Node::Neg(Box::new(Node::int(v.unsigned_abs())))
        } else {
            Node::int(v as u64)
        };
        Expression { root, free: Vec::new() }
    }

    /// A bare symbol.
    pub fn symbol(name: &str) -> Expression {
        Expression {
            root: Node::Symbol {
                name: name.to_string(),
                slot: 0,
            },
            free: vec![name.to_string()],
        }
    }

    /// Free symbols in order of first appearance.
    pub fn free_symbols(&self) -> &[String] {
        &self.free
    }

    /// Structural sum `self + other` (no simplification).
    pub fn plus(&self, other: &Expression) -> Expression {
        let mut root = Node::Add(Box::new(self.root.clone()), Box::new(other.root.clone()));
        let free = assign_slots(&mut root);
        Expression { root, free }
    }

    /// Replace every occurrence of `name` by `replacement` (structural, no
    /// simplification). Substituting a symbol that does not occur is a no-op.
    pub fn substitute(&self, name: &str, replacement: &Expression) -> Expression {
        fn walk(node: &Node, name: &str, replacement: &Node) -> Node {
            match node {
                Node::Symbol { name: n, .. } if n == name => replacement.clone(),
                Node::Int(..) | Node::Float(..) | Node::Symbol { .. } => node.clone(),
                Node::Add(a, b) => Node::Add(
                    Box::new(walk(a, name, replacement)),
                    Box::new(walk(b, name, replacement)),
                ),
                Node::Sub(a, b) => Node::Sub(
                    Box::new(walk(a, name, replacement)),
                    Box::new(walk(b, name, replacement)),
                ),
                Node::Mul(a, b) => Node::Mul(
                    Box::new(walk(a, name, replacement)),
                    Box::new(walk(b, name, replacement)),
                ),
                Node::Div(a, b) => Node::Div(
                    Box::new(walk(a, name, replacement)),
                    Box::new(walk(b, name, replacement)),
                ),
                Node::Neg(a) => Node::Neg(Box::new(walk(a, name, replacement))),
                Node::Pow(a, b) => Node::Pow(
                    Box::new(walk(a, name, replacement)),
                    Box::new(walk(b, name, replacement)),
                ),
                Node::Call(f, a) => Node::Call(*f, Box::new(walk(a, name, replacement))),
            }
        }
        let mut root = walk(&self.root, name, &replacement.root);
        let free = assign_slots(&mut root);
        Expression { root, free }
    }

    /// Substitute `name := 0` and fold the zeros away: products, powers,
    /// and quotients that became zero drop out, and sums shed zero terms.
    /// Unlike [`substitute`](Self::substitute) with a zero, the result
    /// therefore loses every symbol that occurred only in vanished terms.
    ///
    /// Folding treats `0 * u` as `0`, which assumes `u` stays finite where
    /// the result is used; that holds for energies built from coordinate
    /// monomials and potentials on their natural domains.
    pub fn restrict_to_zero(&self, name: &str) -> Expression {
        fn is_zero(node: &Node) -> bool {
            matches!(node, Node::Int(v, _) if num_traits::Zero::is_zero(v))
        }
        fn fold(node: &Node, name: &str) -> Node {
            match node {
                Node::Symbol { name: n, .. } if n == name => Node::int(0),
                Node::Int(..) | Node::Float(..) | Node::Symbol { .. } => node.clone(),
                Node::Add(a, b) => {
                    let (a, b) = (fold(a, name), fold(b, name));
                    if is_zero(&a) {
                        b
                    } else if is_zero(&b) {
                        a
                    } else {
                        Node::Add(Box::new(a), Box::new(b))
                    }
                }
                Node::Sub(a, b) => {
                    let (a, b) = (fold(a, name), fold(b, name));
                    if is_zero(&b) {
                        a
                    } else if is_zero(&a) {
                        Node::Neg(Box::new(b))
                    } else {
                        Node::Sub(Box::new(a), Box::new(b))
                    }
                }
                Node::Mul(a, b) => {
                    let (a, b) = (fold(a, name), fold(b, name));
                    if is_zero(&a) || is_zero(&b) {
                        Node::int(0)
                    } else {
                        Node::Mul(Box::new(a), Box::new(b))
                    }
                }
                Node::Div(a, b) => {
                    let (a, b) = (fold(a, name), fold(b, name));
                    if is_zero(&a) && !is_zero(&b) {
                        Node::int(0)
                    } else {
                        Node::Div(Box::new(a), Box::new(b))
                    }
                }
                Node::Neg(a) => {
                    let a = fold(a, name);
                    if is_zero(&a) {
                        Node::int(0)
                    } else {
                        Node::Neg(Box::new(a))
                    }
                }
                Node::Pow(a, b) => {
                    let (a, b) = (fold(a, name), fold(b, name));
                    // 0^k vanishes only for a visibly positive exponent;
                    // anything else keeps the node (and its domain error).
                    if is_zero(&a) && b.as_const_integer().map_or(false, |k| k > 0) {
                        Node::int(0)
                    } else {
                        Node::Pow(Box::new(a), Box::new(b))
                    }
                }
                Node::Call(f, a) => Node::Call(*f, Box::new(fold(a, name))),
            }
        }
        let mut root = fold(&self.root, name);
        let free = assign_slots(&mut root);
        Expression { root, free }
    }

    /// Evaluate at a binding. Every free symbol must be bound; extra entries
    /// in the binding are ignored.
    pub fn eval(&self, binding: &Binding) -> Result<f64, EvalError> {
        let vals = self.resolve(binding)?;
        eval::eval_node(&self.root, &vals)
    }

    /// Partial derivatives with respect to `vars`, one forward-mode dual pass
    /// per variable. A variable that does not occur contributes an exact zero.
    pub fn grad<S: AsRef<str>>(
        &self,
        binding: &Binding,
        vars: &[S],
    ) -> Result<Vec<f64>, EvalError> {
        let vals = self.resolve(binding)?;
        let mut out = Vec::with_capacity(vars.len());
        for var in vars {
            match self.free.iter().position(|n| n == var.as_ref()) {
                None => out.push(0.0),
                Some(slot) => out.push(self.partial_at_slot(&vals, slot)?),
            }
        }
        Ok(out)
    }

    /// Resolve the binding into slot-ordered values.
    fn resolve(&self, binding: &Binding) -> Result<Vec<f64>, EvalError> {
        self.free
            .iter()
            .map(|name| {
                binding.get(name).ok_or_else(|| EvalError::UnboundSymbol {
                    name: name.clone(),
                })
            })
            .collect()
    }

    /// Derivative with respect to the symbol in `slot`, values given per slot.
    fn partial_at_slot(&self, vals: &[f64], slot: usize) -> Result<f64, EvalError> {
        let seeded: Vec<Dual<f64>> = vals
            .iter()
            .enumerate()
            .map(|(i, &v)| {
                if i == slot {
                    Dual::seeded(v)
                } else {
                    Dual::constant(v)
                }
            })
            .collect();
        Ok(eval::eval_node(&self.root, &seeded)?.eps)
    }

    /// Evaluate with values supplied per slot (aligned with
    /// [`free_symbols`](Self::free_symbols)), generic over the scalar type.
    /// This is the hot path used by charts and integrators.
    pub(crate) fn eval_slots<T: Real>(&self, vals: &[T]) -> Result<T, EvalError> {
        debug_assert_eq!(vals.len(), self.free.len());
        eval::eval_node(&self.root, vals)
    }

    pub(crate) fn root(&self) -> &Node {
        &self.root
    }
}

impl fmt::Display for Expression {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&node_to_string(&self.root))
    }
}

/// Intern symbols in order of first appearance (pre-order walk, which matches
/// textual order for parsed trees) and write slot indices into the nodes.
fn assign_slots(root: &mut Node) -> Vec<String> {
    fn walk(node: &mut Node, free: &mut Vec<String>) {
        match node {
            Node::Symbol { name, slot } => {
                *slot = match free.iter().position(|n| n == name) {
                    Some(i) => i,
                    None => {
                        free.push(name.clone());
                        free.len() - 1
                    }
                };
            }
            Node::Int(..) | Node::Float(..) => {}
            Node::Add(a, b)
            | Node::Sub(a, b)
            | Node::Mul(a, b)
            | Node::Div(a, b)
            | Node::Pow(a, b) => {
                walk(a, free);
                walk(b, free);
            }
            Node::Neg(a) => walk(a, free),
            Node::Call(_, a) => walk(a, free),
        }
    }
    let mut free = Vec::new();
    walk(root, &mut free);
    free
}
