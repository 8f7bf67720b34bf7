//! A small expression language for user-defined position maps.
//!
//! ```text
//! expr  := term (('+' | '-') term)*
//! term  := unary (('*' | '/') unary)*
//! unary := '-' unary | power
//! power := atom ('^' unary)?
//! atom  := number | name | name '(' expr ')' | '(' expr ')'
//! ```
//!
//! Names resolve to the variables supplied at parse time (`u`, `v` and any
//! surface parameters), or to the constants `pi` and `e`. Functions:
//! `sin cos tan sinh cosh tanh exp ln sqrt abs`.

use alloc::boxed::Box;
use alloc::format;
use alloc::string::{String, ToString};


use crate::{Error, Result};
#[allow(unused_imports)]
use num_traits::Float;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Func {
    Sin,
    Cos,
    Tan,
    Sinh,
    Cosh,
    Tanh,
    Exp,
    Ln,
    Sqrt,
    Abs,
}

impl Func {
    fn lookup(name: &str) -> Option<Func> {
        Some(match name {
            "sin" => Func::Sin,
            "cos" => Func::Cos,
            "tan" => Func::Tan,
            "sinh" => Func::Sinh,
            "cosh" => Func::Cosh,
            "tanh" => Func::Tanh,
            "exp" => Func::Exp,
            "ln" | "log" => Func::Ln,
            "sqrt" => Func::Sqrt,
            "abs" => Func::Abs,
            _ => return None,
        })
    }

    fn apply(self, x: f64) -> f64 {
        match self {
            Func::Sin => x.sin(),
            Func::Cos => x.cos(),
            Func::Tan => x.tan(),
            Func::Sinh => x.sinh(),
            Func::Cosh => x.cosh(),
            Func::Tanh => x.tanh(),
            Func::Exp => x.exp(),
            Func::Ln => x.ln(),
            Func::Sqrt => x.sqrt(),
            Func::Abs => x.abs(),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
enum Node {
    Num(f64),
    Var(usize),
    Neg(Box<Node>),
    Add(Box<Node>, Box<Node>),
    Sub(Box<Node>, Box<Node>),
    Mul(Box<Node>, Box<Node>),
    Div(Box<Node>, Box<Node>),
    Pow(Box<Node>, Box<Node>),
    Call(Func, Box<Node>),
}

impl Node {
    fn eval(&self, vars: &[f64]) -> f64 {
        match self {
            Node::Num(x) => *x,
            Node::Var(k) => vars[*k],
            Node::Neg(a) => -a.eval(vars),
            Node::Add(a, b) => a.eval(vars) + b.eval(vars),
            Node::Sub(a, b) => a.eval(vars) - b.eval(vars),
            Node::Mul(a, b) => a.eval(vars) * b.eval(vars),
            Node::Div(a, b) => a.eval(vars) / b.eval(vars),
            Node::Pow(a, b) => {
                let base = a.eval(vars);
                match **b {
                    // Integer exponents keep negative bases real.
                    Node::Num(n) if n == n.round() && n.abs() <= 64.0 => base.powi(n as i32),
                    _ => base.powf(b.eval(vars)),
                }
            }
            Node::Call(f, a) => f.apply(a.eval(vars)),
        }
    }
}

/// A parsed expression over a fixed list of variable names.
#[derive(Clone, Debug, PartialEq)]
pub struct Expression {
    source: String,
    root: Node,
    arity: usize,
}

impl Expression {
    pub fn parse(source: &str, vars: &[&str]) -> Result<Expression> {
        let mut p = Parser {
            src: source.as_bytes(),
            pos: 0,
            vars,
        };
        let root = p.expr()?;
        p.skip_ws();
        if p.pos != p.src.len() {
            return Err(p.error("unexpected trailing input"));
        }
        Ok(Expression {
            source: source.to_string(),
            root,
            arity: vars.len(),
        })
    }

    /// Evaluates with `vars` in the order given to [`Expression::parse`].
    pub fn eval(&self, vars: &[f64]) -> f64 {
        debug_assert_eq!(vars.len(), self.arity);
        self.root.eval(vars)
    }

    pub fn source(&self) -> &str {
        &self.source
    }
}

struct Parser<'a> {
    src: &'a [u8],
    pos: usize,
    vars: &'a [&'a str],
}

impl Parser<'_> {
    fn error(&self, msg: &str) -> Error {
        Error::Expression {
            pos: self.pos,
            msg: msg.to_string(),
        }
    }

    fn skip_ws(&mut self) {
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
    }

    fn peek(&mut self) -> Option<u8> {
        self.skip_ws();
        self.src.get(self.pos).copied()
    }

    fn eat(&mut self, c: u8) -> bool {
        if self.peek() == Some(c) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn expr(&mut self) -> Result<Node> {
        let mut lhs = self.term()?;
        loop {
            if self.eat(b'+') {
                lhs = Node::Add(Box::new(lhs), Box::new(self.term()?));
            } else if self.eat(b'-') {
                lhs = Node::Sub(Box::new(lhs), Box::new(self.term()?));
            } else {
                return Ok(lhs);
            }
        }
    }

    fn term(&mut self) -> Result<Node> {
        let mut lhs = self.unary()?;
        loop {
            if self.eat(b'*') {
                lhs = Node::Mul(Box::new(lhs), Box::new(self.unary()?));
            } else if self.eat(b'/') {
                lhs = Node::Div(Box::new(lhs), Box::new(self.unary()?));
            } else {
                return Ok(lhs);
            }
        }
    }

    fn unary(&mut self) -> Result<Node> {
        if self.eat(b'-') {
            return Ok(Node::Neg(Box::new(self.unary()?)));
        }
        if self.eat(b'+') {
            return self.unary();
        }
        self.power()
    }

    fn power(&mut self) -> Result<Node> {
        let base = self.atom()?;
        if self.eat(b'^') {
            let exp = self.unary()?;
            return Ok(Node::Pow(Box::new(base), Box::new(exp)));
        }
        Ok(base)
    }

    fn atom(&mut self) -> Result<Node> {
        match self.peek() {
            None => Err(self.error("unexpected end of expression")),
            Some(b'(') => {
                self.pos += 1;
                let e = self.expr()?;
                if !self.eat(b')') {
                    return Err(self.error("expected `)`"));
                }
                Ok(e)
            }
            Some(c) if c.is_ascii_digit() || c == b'.' => self.number(),
            Some(c) if c.is_ascii_alphabetic() || c == b'_' => {
                let start = self.pos;
                while self.pos < self.src.len()
                    && (self.src[self.pos].is_ascii_alphanumeric() || self.src[self.pos] == b'_')
                {
                    self.pos += 1;
                }
                let name = core::str::from_utf8(&self.src[start..self.pos]).unwrap_or("");
                if self.peek() == Some(b'(') {
                    let f = Func::lookup(name).ok_or_else(|| Error::Expression {
                        pos: start,
                        msg: format!("unknown function `{name}`"),
                    })?;
                    self.pos += 1;
                    let arg = self.expr()?;
                    if !self.eat(b')') {
                        return Err(self.error("expected `)` after function argument"));
                    }
                    return Ok(Node::Call(f, Box::new(arg)));
                }
                if let Some(k) = self.vars.iter().position(|v| *v == name) {
                    return Ok(Node::Var(k));
                }
                match name {
                    "pi" => Ok(Node::Num(core::f64::consts::PI)),
                    "e" => Ok(Node::Num(core::f64::consts::E)),
                    _ => Err(Error::Expression {
                        pos: start,
                        msg: format!("unknown name `{name}`"),
                    }),
                }
            }
            Some(c) => Err(self.error(&format!("unexpected character `{}`", c as char))),
        }
    }

    fn number(&mut self) -> Result<Node> {
        let start = self.pos;
        let s = self.src;
        while self.pos < s.len() && (s[self.pos].is_ascii_digit() || s[self.pos] == b'.') {
            self.pos += 1;
        }
        if self.pos < s.len() && (s[self.pos] == b'e' || s[self.pos] == b'E') {
            let mut q = self.pos + 1;
            if q < s.len() && (s[q] == b'+' || s[q] == b'-') {
                q += 1;
            }
            if q < s.len() && s[q].is_ascii_digit() {
                while q < s.len() && s[q].is_ascii_digit() {
                    q += 1;
                }
                self.pos = q;
            }
        }
        let text = core::str::from_utf8(&s[start..self.pos]).unwrap_or("");
        text.parse::<f64>().map(Node::Num).map_err(|_| Error::Expression {
            pos: start,
            msg: format!("malformed number `{text}`"),
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ev(src: &str, u: f64, v: f64) -> f64 {
        Expression::parse(src, &["u", "v"]).unwrap().eval(&[u, v])
    }

    #[test]
    fn precedence_and_associativity() {
        assert_eq!(ev("1 + 2 * 3", 0.0, 0.0), 7.0);
        assert_eq!(ev("2 ^ 3 ^ 2", 0.0, 0.0), 512.0);
        assert_eq!(ev("-2 ^ 2", 0.0, 0.0), -4.0);
        assert_eq!(ev("(1 - 2) - 3", 0.0, 0.0), -4.0);
        assert_eq!(ev("8 / 4 / 2", 0.0, 0.0), 1.0);
        assert_eq!(ev("2e-1 * 10", 0.0, 0.0), 2.0);
    }

    #[test]
    fn functions_and_variables() {
        let x = ev("cosh(v) * cos(u)", 0.3, 0.7);
        assert!((x - 0.7f64.cosh() * 0.3f64.cos()).abs() < 1e-15);
        assert_eq!(ev("u^2 - v^2", -2.0, 1.0), 3.0);
        assert!((ev("sin(pi/2) + exp(0)", 0.0, 0.0) - 2.0).abs() < 1e-15);
    }

    #[test]
    fn parameters_resolve_by_name() {
        let e = Expression::parse("a * u + b", &["u", "v", "a", "b"]).unwrap();
        assert_eq!(e.eval(&[2.0, 0.0, 3.0, 1.0]), 7.0);
    }

    #[test]
    fn errors_carry_position() {
        match Expression::parse("u + foo(v)", &["u", "v"]) {
            Err(Error::Expression { pos, .. }) => assert_eq!(pos, 4),
            other => panic!("unexpected {other:?}"),
        }
        assert!(Expression::parse("u +", &["u", "v"]).is_err());
        assert!(Expression::parse("(u", &["u", "v"]).is_err());
        assert!(Expression::parse("u v", &["u", "v"]).is_err());
        assert!(Expression::parse("w", &["u", "v"]).is_err());
    }
}
