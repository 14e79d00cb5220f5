//! Expression grammar for user-definable scalar fields.
//!
//! Infix arithmetic (`+ - * /`, standard precedence, left association,
//! unary minus, parentheses) over the variables `t`, `q1..qn` and either
//! `v1..vn` (velocities, Lagrangian layout) or `p1..pn` (momenta,
//! Hamiltonian layout), the functions `sin`, `cos`, `exp`, `pow(base, exp)`,
//! real literals, and named parameters supplied by the caller. Parsing is
//! deterministic: the same source string always yields the same tree.

use alloc::boxed::Box;
use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;

use crate::error::{CoreError, Result};
use crate::jet::{FieldExpr, Jet, Real, ScalarField};

/// Which fiber variables an expression may use.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum VarKind {
    /// `(t, q1..qn, v1..vn)`
    Lagrangian,
    /// `(t, q1..qn, p1..pn)`
    Hamiltonian,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct VarLayout {
    pub kind: VarKind,
    pub n: usize,
}

impl VarLayout {
    pub fn lagrangian(n: usize) -> Self {
        Self {
            kind: VarKind::Lagrangian,
            n,
        }
    }

    pub fn hamiltonian(n: usize) -> Self {
        Self {
            kind: VarKind::Hamiltonian,
            n,
        }
    }

    pub fn arity(&self) -> usize {
        1 + 2 * self.n
    }

    fn resolve(&self, name: &str) -> Option<core::result::Result<usize, String>> {
        if name == "t" {
            return Some(Ok(0));
        }
        let (prefix, fiber_offset) = match self.kind {
            VarKind::Lagrangian => ("v", self.n),
            VarKind::Hamiltonian => ("p", self.n),
        };
        let parse_index = |digits: &str| -> Option<core::result::Result<usize, String>> {
            let k: usize = digits.parse().ok()?;
            if k == 0 {
                return Some(Err(format!("variable indices start at 1, got {name}")));
            }
            if k > self.n {
                return Some(Err(format!(
                    "variable {name} exceeds the fiber dimension n = {}",
                    self.n
                )));
            }
            Some(Ok(k))
        };
        if let Some(digits) = name.strip_prefix('q') {
            return parse_index(digits);
        }
        if let Some(digits) = name.strip_prefix(prefix) {
            return parse_index(digits).map(|r| r.map(|k| fiber_offset + k));
        }
        None
    }
}

#[derive(Debug, Clone, PartialEq)]
enum Node {
    Num(f64),
    Var(usize),
    Add(Box<Node>, Box<Node>),
    Sub(Box<Node>, Box<Node>),
    Mul(Box<Node>, Box<Node>),
    Div(Box<Node>, Box<Node>),
    Neg(Box<Node>),
    Sin(Box<Node>),
    Cos(Box<Node>),
    Exp(Box<Node>),
    Pow(Box<Node>, Box<Node>),
}

impl Node {
    fn eval<T: Real>(&self, vars: &[T]) -> T {
        match self {
            Node::Num(c) => vars[0].same_shape_constant(*c),
            Node::Var(i) => vars[*i].clone(),
            Node::Add(a, b) => a.eval(vars) + b.eval(vars),
            Node::Sub(a, b) => a.eval(vars) - b.eval(vars),
            Node::Mul(a, b) => a.eval(vars) * b.eval(vars),
            Node::Div(a, b) => a.eval(vars) / b.eval(vars),
            Node::Neg(a) => -a.eval(vars),
            Node::Sin(a) => a.eval(vars).sin(),
            Node::Cos(a) => a.eval(vars).cos(),
            Node::Exp(a) => a.eval(vars).exp(),
            Node::Pow(a, b) => {
                let base = a.eval(vars);
                // An integer literal exponent keeps negative bases legal.
                if let Node::Num(e) = **b {
                    if e == libm::trunc(e) && e.abs() <= i32::MAX as f64 {
                        return base.powi(e as i32);
                    }
                }
                let e = b.eval(vars);
                base.powf(&e)
            }
        }
    }
}

/// A parsed expression bound to a variable layout.
#[derive(Debug, Clone)]
pub struct ExprTree {
    node: Node,
}

impl FieldExpr for ExprTree {
    fn eval_f64(&self, x: &[f64]) -> f64 {
        self.node.eval(x)
    }
    fn eval_jet(&self, x: &[Jet]) -> Jet {
        self.node.eval(x)
    }
}

/// Parses `src` under `layout`, resolving free identifiers through
/// `parameters`. Returns a [`ScalarField`] of arity `1 + 2n`.
pub fn parse(
    src: &str,
    layout: VarLayout,
    parameters: &BTreeMap<String, f64>,
) -> Result<ScalarField> {
    let tokens = tokenize(src)?;
    let mut parser = Parser {
        tokens,
        pos: 0,
        layout,
        parameters,
    };
    let node = parser.expression()?;
    if parser.pos != parser.tokens.len() {
        let (tok_pos, _) = parser.tokens[parser.pos].clone();
        return Err(CoreError::Parse {
            position: tok_pos,
            message: "unexpected trailing input".to_string(),
        });
    }
    Ok(ScalarField::new(layout.arity(), ExprTree { node }))
}

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Num(f64),
    Ident(String),
    Plus,
    Minus,
    Star,
    Slash,
    LParen,
    RParen,
    Comma,
}

fn tokenize(src: &str) -> Result<Vec<(usize, Tok)>> {
    let bytes = src.as_bytes();
    let mut out = Vec::new();
    let mut i = 0;
    while i < bytes.len() {
        let c = bytes[i] as char;
        match c {
            ' ' | '\t' | '\n' | '\r' => i += 1,
            '+' => {
                out.push((i, Tok::Plus));
                i += 1;
            }
            '-' => {
                out.push((i, Tok::Minus));
                i += 1;
            }
            '*' => {
                out.push((i, Tok::Star));
                i += 1;
            }
            '/' => {
                out.push((i, Tok::Slash));
                i += 1;
            }
            '(' => {
                out.push((i, Tok::LParen));
                i += 1;
            }
            ')' => {
                out.push((i, Tok::RParen));
                i += 1;
            }
            ',' => {
                out.push((i, Tok::Comma));
                i += 1;
            }
            '0'..='9' | '.' => {
                let start = i;
                while i < bytes.len() && bytes[i].is_ascii_digit() {
                    i += 1;
                }
                if i < bytes.len() && bytes[i] == b'.' {
                    i += 1;
                    while i < bytes.len() && bytes[i].is_ascii_digit() {
                        i += 1;
                    }
                }
                if i < bytes.len() && (bytes[i] == b'e' || bytes[i] == b'E') {
                    let mut j = i + 1;
                    if j < bytes.len() && (bytes[j] == b'+' || bytes[j] == b'-') {
                        j += 1;
                    }
                    if j < bytes.len() && bytes[j].is_ascii_digit() {
                        i = j;
                        while i < bytes.len() && bytes[i].is_ascii_digit() {
                            i += 1;
                        }
                    }
                }
                let text = &src[start..i];
                let value: f64 = text.parse().map_err(|_| CoreError::Parse {
                    position: start,
                    message: format!("invalid number literal '{text}'"),
                })?;
                out.push((start, Tok::Num(value)));
            }
            'a'..='z' | 'A'..='Z' | '_' => {
                let start = i;
                while i < bytes.len() && (bytes[i].is_ascii_alphanumeric() || bytes[i] == b'_') {
                    i += 1;
                }
                out.push((start, Tok::Ident(src[start..i].to_string())));
            }
            _ => {
                return Err(CoreError::Parse {
                    position: i,
                    message: format!("unexpected character '{c}'"),
                })
            }
        }
    }
    Ok(out)
}

struct Parser<'a> {
    tokens: Vec<(usize, Tok)>,
    pos: usize,
    layout: VarLayout,
    parameters: &'a BTreeMap<String, f64>,
}

impl Parser<'_> {
    fn peek(&self) -> Option<&Tok> {
        self.tokens.get(self.pos).map(|(_, t)| t)
    }

    fn here(&self) -> usize {
        self.tokens
            .get(self.pos)
            .or_else(|| self.tokens.last())
            .map_or(0, |(p, _)| *p)
    }

    fn bump(&mut self) -> Option<Tok> {
        let t = self.tokens.get(self.pos).map(|(_, t)| t.clone());
        self.pos += 1;
        t
    }

    fn expect(&mut self, tok: Tok, what: &str) -> Result<()> {
        let position = self.here();
        match self.bump() {
            Some(t) if t == tok => Ok(()),
            _ => Err(CoreError::Parse {
                position,
                message: format!("expected {what}"),
            }),
        }
    }

    fn expression(&mut self) -> Result<Node> {
        let mut node = self.term()?;
        loop {
            match self.peek() {
                Some(Tok::Plus) => {
                    self.pos += 1;
                    node = Node::Add(Box::new(node), Box::new(self.term()?));
                }
                Some(Tok::Minus) => {
                    self.pos += 1;
                    node = Node::Sub(Box::new(node), Box::new(self.term()?));
                }
                _ => return Ok(node),
            }
        }
    }

    fn term(&mut self) -> Result<Node> {
        let mut node = self.unary()?;
        loop {
            match self.peek() {
                Some(Tok::Star) => {
                    self.pos += 1;
                    node = Node::Mul(Box::new(node), Box::new(self.unary()?));
                }
                Some(Tok::Slash) => {
                    self.pos += 1;
                    node = Node::Div(Box::new(node), Box::new(self.unary()?));
                }
                _ => return Ok(node),
            }
        }
    }

    fn unary(&mut self) -> Result<Node> {
        if matches!(self.peek(), Some(Tok::Minus)) {
            self.pos += 1;
            return Ok(Node::Neg(Box::new(self.unary()?)));
        }
        self.atom()
    }

    fn atom(&mut self) -> Result<Node> {
        let position = self.here();
        match self.bump() {
            Some(Tok::Num(v)) => Ok(Node::Num(v)),
            Some(Tok::LParen) => {
                let inner = self.expression()?;
                self.expect(Tok::RParen, "closing parenthesis")?;
                Ok(inner)
            }
            Some(Tok::Ident(name)) => {
                if matches!(self.peek(), Some(Tok::LParen)) {
                    self.pos += 1;
                    return self.call(&name, position);
                }
                match self.layout.resolve(&name) {
                    Some(Ok(index)) => Ok(Node::Var(index)),
                    Some(Err(message)) => Err(CoreError::Parse { position, message }),
                    None => match self.parameters.get(&name) {
                        Some(&value) => Ok(Node::Num(value)),
                        None => Err(CoreError::Parse {
                            position,
                            message: format!("unknown identifier '{name}'"),
                        }),
                    },
                }
            }
            _ => Err(CoreError::Parse {
                position,
                message: "expected a number, variable or parenthesized expression".to_string(),
            }),
        }
    }

    fn call(&mut self, name: &str, position: usize) -> Result<Node> {
        let mut args = Vec::new();
        if !matches!(self.peek(), Some(Tok::RParen)) {
            loop {
                args.push(self.expression()?);
                if matches!(self.peek(), Some(Tok::Comma)) {
                    self.pos += 1;
                } else {
                    break;
                }
            }
        }
        self.expect(Tok::RParen, "closing parenthesis after arguments")?;

        let got = args.len();
        let arity_error = move |expected: usize| CoreError::Parse {
            position,
            message: format!("{name} expects {expected} argument(s), got {got}"),
        };
        let mut args = args.into_iter();
        match name {
            "sin" | "cos" | "exp" => {
                let a = args.next().ok_or_else(|| arity_error(1))?;
                if args.next().is_some() {
                    return Err(arity_error(1));
                }
                Ok(match name {
                    "sin" => Node::Sin(Box::new(a)),
                    "cos" => Node::Cos(Box::new(a)),
                    _ => Node::Exp(Box::new(a)),
                })
            }
            "pow" => {
                let a = args.next().ok_or_else(|| arity_error(2))?;
                let b = args.next().ok_or_else(|| arity_error(2))?;
                if args.next().is_some() {
                    return Err(arity_error(2));
                }
                Ok(Node::Pow(Box::new(a), Box::new(b)))
            }
            _ => Err(CoreError::Parse {
                position,
                message: format!("unknown function '{name}'"),
            }),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn no_params() -> BTreeMap<String, f64> {
        BTreeMap::new()
    }

    #[test]
    fn parses_a_lagrangian() {
        // driven oscillator: ½v² - ½q² + q sin t
        let f = parse(
            "0.5*v1*v1 - 0.5*q1*q1 + q1*sin(t)",
            VarLayout::lagrangian(1),
            &no_params(),
        )
        .unwrap();
        assert_eq!(f.arity(), 3);
        let half_pi = core::f64::consts::FRAC_PI_2;
        assert!((f.eval(&[half_pi, 1.0, 0.0]) - 0.5).abs() < 1e-15);
    }

    #[test]
    fn precedence_and_associativity() {
        let f = parse("1 - 2 - 3", VarLayout::lagrangian(1), &no_params()).unwrap();
        assert_eq!(f.eval(&[0.0, 0.0, 0.0]), -4.0);
        let g = parse("2 + 3 * 4", VarLayout::lagrangian(1), &no_params()).unwrap();
        assert_eq!(g.eval(&[0.0, 0.0, 0.0]), 14.0);
        let h = parse("8 / 4 / 2", VarLayout::lagrangian(1), &no_params()).unwrap();
        assert_eq!(h.eval(&[0.0, 0.0, 0.0]), 1.0);
    }

    #[test]
    fn pow_with_integer_exponent_accepts_negative_base() {
        let f = parse("pow(q1, 3)", VarLayout::lagrangian(1), &no_params()).unwrap();
        assert_eq!(f.eval(&[0.0, -2.0, 0.0]), -8.0);
    }

    #[test]
    fn parameters_resolve_as_constants() {
        let mut params = BTreeMap::new();
        params.insert(String::from("omega"), 3.0);
        let f = parse("omega * q1", VarLayout::hamiltonian(1), &params).unwrap();
        assert_eq!(f.eval(&[0.0, 2.0, 0.0]), 6.0);
    }

    #[test]
    fn rejects_out_of_range_variables() {
        assert!(parse("q3", VarLayout::lagrangian(2), &no_params()).is_err());
        assert!(parse("p1", VarLayout::lagrangian(1), &no_params()).is_err());
        assert!(parse("v1", VarLayout::hamiltonian(1), &no_params()).is_err());
    }

    #[test]
    fn reports_malformed_input() {
        assert!(parse("1 +", VarLayout::lagrangian(1), &no_params()).is_err());
        assert!(parse("sin()", VarLayout::lagrangian(1), &no_params()).is_err());
        assert!(parse("pow(q1)", VarLayout::lagrangian(1), &no_params()).is_err());
        assert!(parse("2 ** 3", VarLayout::lagrangian(1), &no_params()).is_err());
        assert!(parse("(1", VarLayout::lagrangian(1), &no_params()).is_err());
    }

    #[test]
    fn scientific_literals_parse_bit_exactly() {
        let f = parse("1e-3 + 2.5E2", VarLayout::lagrangian(1), &no_params()).unwrap();
        assert_eq!(f.eval(&[0.0, 0.0, 0.0]), 1e-3 + 2.5e2);
    }

    #[test]
    fn jets_flow_through_parsed_trees() {
        let f = parse(
            "exp(t) * v1 * v1 * 0.5",
            VarLayout::lagrangian(1),
            &no_params(),
        )
        .unwrap();
        let out = f.jet2(&[1.0, 0.0, 2.0]);
        let e = libm::exp(1.0);
        assert!((out.value - 2.0 * e).abs() < 1e-12);
        // ∂/∂v (½ eᵗ v²) = eᵗ v = 2e
        assert!((out.gradient[2] - 2.0 * e).abs() < 1e-12);
        // ∂²/∂v² = eᵗ
        assert!((out.hessian[(2, 2)] - e).abs() < 1e-12);
    }
}
