//! Recursive-descent parser for the expression grammar:
//!
//! ```text
//! expr   := term (("+" | "-") term)*
//! term   := factor (("*" | "/") factor)*
//! factor := base ("^" factor)?            -- power groups to the right
//! base   := NUMBER | SYMBOL | FUNC "(" expr ")" | "(" expr ")" | "-" base
//! ```
//!
//! `+ - * /` associate to the left. Note that the unary minus lives at the
//! `base` level, so `-x^2` reads as `(-x)^2`.

use num_bigint::BigUint;
use num_traits::ToPrimitive;

use super::ast::{Func, Node};
use super::lexer::{tokenize, Spanned, Tok};
use super::ParseError;

pub(super) fn parse_source(src: &str) -> Result<Node, ParseError> {
    let toks = tokenize(src)?;
    let mut p = Parser { toks, pos: 0 };
    let root = p.expr()?;
    match p.peek().tok {
        Tok::End => Ok(root),
        _ => Err(p.unexpected(&[
            "`+`", "`-`", "`*`", "`/`", "`^`", "end of input",
        ])),
    }
}

struct Parser {
    toks: Vec<Spanned>,
    pos: usize,
}

impl Parser {
    fn peek(&self) -> &Spanned {
        &self.toks[self.pos]
    }

    fn bump(&mut self) -> Spanned {
        let t = self.toks[self.pos].clone();
        if self.pos + 1 < self.toks.len() {
            self.pos += 1;
        }
        t
    }

    fn unexpected(&self, expected: &[&str]) -> ParseError {
        let here = self.peek();
        ParseError::Syntax {
            offset: here.offset,
            expected: expected.iter().map(|s| s.to_string()).collect(),
            found: here.tok.describe(),
        }
    }

    fn expr(&mut self) -> Result<Node, ParseError> {
        let mut lhs = self.term()?;
        loop {
            match self.peek().tok {
                Tok::Plus => {
                    self.bump();
                    let rhs = self.term()?;
                    lhs = Node::Add(Box::new(lhs), Box::new(rhs));
                }
                Tok::Minus => {
                    self.bump();
                    let rhs = self.term()?;
                    lhs = Node::Sub(Box::new(lhs), Box::new(rhs));
                }
                _ => return Ok(lhs),
            }
        }
    }

    fn term(&mut self) -> Result<Node, ParseError> {
        let mut lhs = self.factor()?;
        loop {
            match self.peek().tok {
                Tok::Star => {
                    self.bump();
                    let rhs = self.factor()?;
                    lhs = Node::Mul(Box::new(lhs), Box::new(rhs));
                }
                Tok::Slash => {
                    self.bump();
                    let rhs = self.factor()?;
                    lhs = Node::Div(Box::new(lhs), Box::new(rhs));
                }
                _ => return Ok(lhs),
            }
        }
    }

    fn factor(&mut self) -> Result<Node, ParseError> {
        let base = self.base()?;
        if self.peek().tok == Tok::Caret {
            self.bump();
            let exp = self.factor()?;
            return Ok(Node::Pow(Box::new(base), Box::new(exp)));
        }
        Ok(base)
    }

    fn base(&mut self) -> Result<Node, ParseError> {
        match self.peek().tok.clone() {
            Tok::Int(text) => {
                self.bump();
                let v: BigUint = text.parse().expect("lexer only emits digit runs");
                let approx = v.to_f64().unwrap_or(f64::INFINITY);
                Ok(Node::Int(v, approx))
            }
            Tok::Float(v) => {
                self.bump();
                Ok(Node::Float(v))
            }
            Tok::Ident(name) => {
                let ident = self.bump();
                if self.peek().tok == Tok::LParen {
                    let func = Func::from_name(&name).ok_or(ParseError::UnknownFunction {
                        offset: ident.offset,
                        name: name.clone(),
                    })?;
                    self.bump(); // consume `(`
                    let arg = self.expr()?;
                    if self.peek().tok != Tok::RParen {
                        return Err(self.unexpected(&["`)`"]));
                    }
                    self.bump();
                    Ok(Node::Call(func, Box::new(arg)))
                } else {
                    Ok(Node::Symbol { name, slot: 0 })
                }
            }
            Tok::LParen => {
                self.bump();
                let inner = self.expr()?;
                if self.peek().tok != Tok::RParen {
                    return Err(self.unexpected(&["`)`"]));
                }
                self.bump();
                Ok(inner)
            }
            Tok::Minus => {
                self.bump();
                let inner = self.base()?;
                Ok(Node::Neg(Box::new(inner)))
            }
            _ => Err(self.unexpected(&[
                "a number",
                "a symbol",
                "a function call",
                "`(`",
                "`-`",
            ])),
        }
    }
}
