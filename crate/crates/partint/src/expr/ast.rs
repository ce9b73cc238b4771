//! Expression tree, canonical printing, and small structural helpers.
//!
//! The printed form is canonical: parsing the output of the printer yields a
//! structurally identical tree, so `parse . print . parse == parse`. Nothing
//! here rewrites or simplifies; an expression stays exactly as it was built.

use num_bigint::BigUint;
use num_traits::ToPrimitive;

/// Built-in single-argument functions.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Func {
    Sin,
    Cos,
    Tan,
    Atan,
    Exp,
    Log,
    Sqrt,
}

impl Func {
    pub fn name(self) -> &'static str {
        match self {
            Func::Sin => "sin",
            Func::Cos => "cos",
            Func::Tan => "tan",
            Func::Atan => "atan",
            Func::Exp => "exp",
            Func::Log => "log",
            Func::Sqrt => "sqrt",
        }
    }

    pub fn from_name(name: &str) -> Option<Func> {
        Some(match name {
            "sin" => Func::Sin,
            "cos" => Func::Cos,
            "tan" => Func::Tan,
            "atan" => Func::Atan,
            "exp" => Func::Exp,
            "log" => Func::Log,
            "sqrt" => Func::Sqrt,
            _ => return None,
        })
    }
}

/// Expression tree node.
///
/// Constant nodes are always non-negative: the parser produces unary [`Node::Neg`]
/// for a leading minus, and internal constructors follow the same convention.
/// Integer literals keep their exact value (plus a cached double for evaluation);
/// decimal literals are doubles from the start.
#[derive(Clone, Debug)]
pub enum Node {
    /// Non-negative integer literal: exact value and cached double.
    Int(BigUint, f64),
    /// Non-negative decimal literal.
    Float(f64),
    /// Variable reference; `slot` indexes the owning expression's symbol table.
    Symbol { name: String, slot: usize },
    Add(Box<Node>, Box<Node>),
    Sub(Box<Node>, Box<Node>),
    Mul(Box<Node>, Box<Node>),
    Div(Box<Node>, Box<Node>),
    Neg(Box<Node>),
    /// `base ^ exponent`; the exponent is an arbitrary subtree.
    Pow(Box<Node>, Box<Node>),
    Call(Func, Box<Node>),
}

/// Structural equality. Symbol slots are an evaluation detail and are ignored;
/// two trees are equal when they print identically.
impl PartialEq for Node {
    fn eq(&self, other: &Self) -> bool {
        match (self, other) {
            (Node::Int(a, _), Node::Int(b, _)) => a == b,
            (Node::Float(a), Node::Float(b)) => a == b,
            (Node::Symbol { name: a, .. }, Node::Symbol { name: b, .. }) => a == b,
            (Node::Add(a1, a2), Node::Add(b1, b2)) => a1 == b1 && a2 == b2,
            (Node::Sub(a1, a2), Node::Sub(b1, b2)) => a1 == b1 && a2 == b2,
            (Node::Mul(a1, a2), Node::Mul(b1, b2)) => a1 == b1 && a2 == b2,
            (Node::Div(a1, a2), Node::Div(b1, b2)) => a1 == b1 && a2 == b2,
            (Node::Neg(a), Node::Neg(b)) => a == b,
            (Node::Pow(a1, a2), Node::Pow(b1, b2)) => a1 == b1 && a2 == b2,
            (Node::Call(fa, a), Node::Call(fb, b)) => fa == fb && a == b,
            _ => false,
        }
    }
}

impl Node {
    pub fn int(v: u64) -> Node {
        Node::Int(BigUint::from(v), v as f64)
    }

    /// If this subtree is a constant integer (possibly behind unary minus),
    /// return its value. Doubles count when they are exactly integral, so
    /// `x^2.0` takes the same repeated-squaring path as `x^2`.
    pub fn as_const_integer(&self) -> Option<i64> {
        match self {
            Node::Int(v, _) => v.to_i64(),
            Node::Float(v) => {
                if v.fract() == 0.0 && v.abs() <= 2f64.powi(53) {
                    Some(*v as i64)
                } else {
                    None
                }
            }
            Node::Neg(inner) => inner.as_const_integer().map(|n| -n),
            _ => None,
        }
    }
}

/// Where a node sits relative to its parent; decides parenthesization.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Pos {
    Top,
    AddLeft,
    AddRight,
    MulLeft,
    MulRight,
    DivRight,
    PowBase,
    PowExp,
    NegArg,
    FuncArg,
}

fn needs_parens(node: &Node, pos: Pos) -> bool {
    match node {
        Node::Int(..) | Node::Float(..) | Node::Symbol { .. } | Node::Call(..) => false,
        Node::Add(..) | Node::Sub(..) => !matches!(pos, Pos::Top | Pos::AddLeft | Pos::FuncArg),
        Node::Mul(..) | Node::Div(..) => !matches!(
            pos,
            Pos::Top | Pos::AddLeft | Pos::AddRight | Pos::MulLeft | Pos::FuncArg
        ),
        // `a^b^c` groups to the right, so an exponent that is itself a power
        // stays bare; a base that is a power must be wrapped.
        Node::Pow(..) => matches!(pos, Pos::PowBase | Pos::NegArg),
        // A bare leading minus only survives where the grammar re-reads it as
        // unary; everywhere else it would re-associate, so wrap it.
        Node::Neg(..) => !matches!(pos, Pos::Top | Pos::AddLeft | Pos::NegArg | Pos::FuncArg),
    }
}

/// Render `node` into `out` for the given position.
pub fn print_node(node: &Node, out: &mut String, pos: Pos) {
    if needs_parens(node, pos) {
        out.push('(');
        print_node(node, out, Pos::Top);
        out.push(')');
        return;
    }
    match node {
        Node::Int(v, _) => out.push_str(&v.to_string()),
        // `{:?}` prints the shortest decimal that parses back to the same bits.
        Node::Float(v) => out.push_str(&format!("{v:?}")),
        Node::Symbol { name, .. } => out.push_str(name),
        Node::Add(a, b) => {
            print_node(a, out, Pos::AddLeft);
            out.push_str(" + ");
            print_node(b, out, Pos::AddRight);
        }
        Node::Sub(a, b) => {
            print_node(a, out, Pos::AddLeft);
            out.push_str(" - ");
            print_node(b, out, Pos::AddRight);
        }
        Node::Mul(a, b) => {
            print_node(a, out, Pos::MulLeft);
            out.push('*');
            print_node(b, out, Pos::MulRight);
        }
        Node::Div(a, b) => {
            print_node(a, out, Pos::MulLeft);
            out.push('/');
            print_node(b, out, Pos::DivRight);
        }
        Node::Neg(a) => {
            out.push('-');
            print_node(a, out, Pos::NegArg);
        }
        Node::Pow(a, b) => {
            print_node(a, out, Pos::PowBase);
            out.push('^');
            print_node(b, out, Pos::PowExp);
        }
        Node::Call(f, a) => {
            out.push_str(f.name());
            out.push('(');
            print_node(a, out, Pos::FuncArg);
            out.push(')');
        }
    }
}

pub fn node_to_string(node: &Node) -> String {
    let mut s = String::new();
    print_node(node, &mut s, Pos::Top);
    s
}
