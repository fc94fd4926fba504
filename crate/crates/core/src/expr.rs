//! A small arithmetic expression language for user-supplied nonlinearities
//! and radial weights.
//!
//! Supported: decimal literals, `pi`, named variables fixed at parse time,
//! `+ - * / ^` (`**` is accepted as `^`, right associative), parentheses and
//! the functions `sin cos atan exp abs sqrt ln pow(a, b)`.

use std::fmt;

#[derive(Debug, Clone, PartialEq)]
pub struct ExprError {
    /// Byte offset into the source where parsing failed.
    pub position: usize,
    pub message: String,
}

impl fmt::Display for ExprError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} (at column {})", self.message, self.position + 1)
    }
}

impl std::error::Error for ExprError {}

#[derive(Debug, Clone, Copy, PartialEq)]
enum Func {
    Sin,
    Cos,
    Atan,
    Exp,
    Abs,
    Sqrt,
    Ln,
}

impl Func {
    fn lookup(name: &str) -> Option<Self> {
        Some(match name {
            "sin" => Func::Sin,
            "cos" => Func::Cos,
            "atan" | "arctan" => Func::Atan,
            "exp" => Func::Exp,
            "abs" => Func::Abs,
            "sqrt" => Func::Sqrt,
            "ln" => Func::Ln,
            _ => return None,
        })
    }

    fn apply(self, x: f64) -> f64 {
        match self {
            Func::Sin => x.sin(),
            Func::Cos => x.cos(),
            Func::Atan => x.atan(),
            Func::Exp => x.exp(),
            Func::Abs => x.abs(),
            Func::Sqrt => x.sqrt(),
            Func::Ln => x.ln(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
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
    fn eval(&self, args: &[f64]) -> f64 {
        match self {
            Node::Num(x) => *x,
            Node::Var(i) => args[*i],
            Node::Neg(a) => -a.eval(args),
            Node::Add(a, b) => a.eval(args) + b.eval(args),
            Node::Sub(a, b) => a.eval(args) - b.eval(args),
            Node::Mul(a, b) => a.eval(args) * b.eval(args),
            Node::Div(a, b) => a.eval(args) / b.eval(args),
            Node::Pow(a, b) => pow(a.eval(args), b.eval(args)),
            Node::Call(f, a) => f.apply(a.eval(args)),
        }
    }

    fn uses_var(&self, idx: usize) -> bool {
        match self {
            Node::Num(_) => false,
            Node::Var(i) => *i == idx,
            Node::Neg(a) | Node::Call(_, a) => a.uses_var(idx),
            Node::Add(a, b) | Node::Sub(a, b) | Node::Mul(a, b) | Node::Div(a, b) | Node::Pow(a, b) => {
                a.uses_var(idx) || b.uses_var(idx)
            }
        }
    }
}

// Integer exponents go through powi so that 0^5 and (-x)^3 behave as expected.
fn pow(base: f64, exp: f64) -> f64 {
    if exp.fract() == 0.0 && exp.abs() <= i32::MAX as f64 {
        base.powi(exp as i32)
    } else {
        base.powf(exp)
    }
}

/// A parsed expression over a fixed, ordered list of variables.
#[derive(Debug, Clone, PartialEq)]
pub struct Expr {
    source: String,
    vars: Vec<String>,
    root: Node,
}

impl Expr {
    pub fn parse(source: &str, vars: &[&str]) -> Result<Self, ExprError> {
        let tokens = tokenize(source)?;
        let mut p = Parser {
            tokens: &tokens,
            pos: 0,
            vars,
            end: source.len(),
        };
        let root = p.expr()?;
        if let Some(t) = p.peek() {
            return Err(ExprError {
                position: t.pos,
                message: format!("unexpected {}", t.kind),
            });
        }
        Ok(Self {
            source: source.trim().to_string(),
            vars: vars.iter().map(|s| s.to_string()).collect(),
            root,
        })
    }

    /// Parses and evaluates a variable-free expression such as `1/3`.
    pub fn constant(source: &str) -> Result<f64, ExprError> {
        Ok(Self::parse(source, &[])?.eval(&[]))
    }

    /// Evaluates with `args` in the order the variables were declared.
    pub fn eval(&self, args: &[f64]) -> f64 {
        debug_assert_eq!(args.len(), self.vars.len());
        self.root.eval(args)
    }

    pub fn source(&self) -> &str {
        &self.source
    }

    pub fn vars(&self) -> &[String] {
        &self.vars
    }

    pub fn uses(&self, var: &str) -> bool {
        self.vars
            .iter()
            .position(|v| v == var)
            .is_some_and(|i| self.root.uses_var(i))
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.source)
    }
}

#[derive(Debug, Clone, PartialEq)]
enum Kind {
    Num(f64),
    Ident(String),
    Plus,
    Minus,
    Star,
    Slash,
    Caret,
    LParen,
    RParen,
    Comma,
}

impl fmt::Display for Kind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Kind::Num(x) => write!(f, "number {x}"),
            Kind::Ident(s) => write!(f, "identifier '{s}'"),
            Kind::Plus => f.write_str("'+'"),
            Kind::Minus => f.write_str("'-'"),
            Kind::Star => f.write_str("'*'"),
            Kind::Slash => f.write_str("'/'"),
            Kind::Caret => f.write_str("'^'"),
            Kind::LParen => f.write_str("'('"),
            Kind::RParen => f.write_str("')'"),
            Kind::Comma => f.write_str("','"),
        }
    }
}

#[derive(Debug, Clone)]
struct Token {
    kind: Kind,
    pos: usize,
}

fn tokenize(src: &str) -> Result<Vec<Token>, ExprError> {
    let bytes = src.as_bytes();
    let mut out = Vec::new();
    let mut i = 0;
    while i < bytes.len() {
        let c = bytes[i];
        let start = i;
        let kind = match c {
            b' ' | b'\t' => {
                i += 1;
                continue;
            }
            b'+' => Kind::Plus,
            b'-' => Kind::Minus,
            b'*' if bytes.get(i + 1) == Some(&b'*') => {
                i += 1;
                Kind::Caret
            }
            b'*' => Kind::Star,
            b'/' => Kind::Slash,
            b'^' => Kind::Caret,
            b'(' => Kind::LParen,
            b')' => Kind::RParen,
            b',' => Kind::Comma,
            b'0'..=b'9' | b'.' => {
                while i < bytes.len() && (bytes[i].is_ascii_digit() || bytes[i] == b'.') {
                    i += 1;
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
                let value = text.parse::<f64>().map_err(|_| ExprError {
                    position: start,
                    message: format!("malformed number '{text}'"),
                })?;
                out.push(Token {
                    kind: Kind::Num(value),
                    pos: start,
                });
                continue;
            }
            c if c.is_ascii_alphabetic() || c == b'_' => {
                while i < bytes.len() && (bytes[i].is_ascii_alphanumeric() || bytes[i] == b'_') {
                    i += 1;
                }
                out.push(Token {
                    kind: Kind::Ident(src[start..i].to_string()),
                    pos: start,
                });
                continue;
            }
            _ => {
                return Err(ExprError {
                    position: start,
                    message: format!("unexpected character '{}'", src[start..].chars().next().unwrap_or('?')),
                })
            }
        };
        out.push(Token { kind, pos: start });
        i += 1;
    }
    Ok(out)
}

struct Parser<'a> {
    tokens: &'a [Token],
    pos: usize,
    vars: &'a [&'a str],
    end: usize,
}

impl Parser<'_> {
    fn peek(&self) -> Option<&Token> {
        self.tokens.get(self.pos)
    }

    fn eat(&mut self, kind: &Kind) -> bool {
        if self.peek().is_some_and(|t| &t.kind == kind) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn error_here(&self, message: impl Into<String>) -> ExprError {
        ExprError {
            position: self.peek().map_or(self.end, |t| t.pos),
            message: message.into(),
        }
    }

    fn expect(&mut self, kind: Kind) -> Result<(), ExprError> {
        if self.eat(&kind) {
            Ok(())
        } else {
            let found = self.peek().map_or("end of input".to_string(), |t| t.kind.to_string());
            Err(self.error_here(format!("expected {kind}, found {found}")))
        }
    }

    fn expr(&mut self) -> Result<Node, ExprError> {
        let mut lhs = self.term()?;
        loop {
            if self.eat(&Kind::Plus) {
                lhs = Node::Add(Box::new(lhs), Box::new(self.term()?));
            } else if self.eat(&Kind::Minus) {
                lhs = Node::Sub(Box::new(lhs), Box::new(self.term()?));
            } else {
                return Ok(lhs);
            }
        }
    }

    fn term(&mut self) -> Result<Node, ExprError> {
        let mut lhs = self.unary()?;
        loop {
            if self.eat(&Kind::Star) {
                lhs = Node::Mul(Box::new(lhs), Box::new(self.unary()?));
            } else if self.eat(&Kind::Slash) {
                lhs = Node::Div(Box::new(lhs), Box::new(self.unary()?));
            } else {
                return Ok(lhs);
            }
        }
    }

    fn unary(&mut self) -> Result<Node, ExprError> {
        if self.eat(&Kind::Minus) {
            return Ok(Node::Neg(Box::new(self.unary()?)));
        }
        if self.eat(&Kind::Plus) {
            return self.unary();
        }
        self.power()
    }

    fn power(&mut self) -> Result<Node, ExprError> {
        let base = self.atom()?;
        if self.eat(&Kind::Caret) {
            let exp = self.unary()?;
            return Ok(Node::Pow(Box::new(base), Box::new(exp)));
        }
        Ok(base)
    }

    fn atom(&mut self) -> Result<Node, ExprError> {
        let Some(tok) = self.peek().cloned() else {
            return Err(self.error_here("unexpected end of input"));
        };
        self.pos += 1;
        match tok.kind {
            Kind::Num(x) => Ok(Node::Num(x)),
            Kind::LParen => {
                let inner = self.expr()?;
                self.expect(Kind::RParen)?;
                Ok(inner)
            }
            Kind::Ident(name) => {
                if self.peek().is_some_and(|t| t.kind == Kind::LParen) {
                    self.pos += 1;
                    if name == "pow" {
                        let a = self.expr()?;
                        self.expect(Kind::Comma)?;
                        let b = self.expr()?;
                        self.expect(Kind::RParen)?;
                        return Ok(Node::Pow(Box::new(a), Box::new(b)));
                    }
                    let Some(f) = Func::lookup(&name) else {
                        return Err(ExprError {
                            position: tok.pos,
                            message: format!("unknown function '{name}'"),
                        });
                    };
                    let arg = self.expr()?;
                    self.expect(Kind::RParen)?;
                    return Ok(Node::Call(f, Box::new(arg)));
                }
                if name == "pi" {
                    return Ok(Node::Num(std::f64::consts::PI));
                }
                match self.vars.iter().position(|v| *v == name) {
                    Some(i) => Ok(Node::Var(i)),
                    None => Err(ExprError {
                        position: tok.pos,
                        message: format!("unknown variable '{name}'"),
                    }),
                }
            }
            other => Err(ExprError {
                position: tok.pos,
                message: format!("unexpected {other}"),
            }),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn precedence_and_associativity() {
        assert_eq!(Expr::constant("1 + 2 * 3").unwrap(), 7.0);
        assert_eq!(Expr::constant("2 ^ 3 ^ 2").unwrap(), 512.0);
        assert_eq!(Expr::constant("-2 ^ 2").unwrap(), -4.0);
        assert_eq!(Expr::constant("2 ** -1").unwrap(), 0.5);
        assert_eq!(Expr::constant("1/3").unwrap(), 1.0 / 3.0);
        assert_eq!(Expr::constant("pow(2, 10)").unwrap(), 1024.0);
        assert_eq!(Expr::constant("1.5e2").unwrap(), 150.0);
    }

    #[test]
    fn bracketed_nonlinearity() {
        let e = Expr::parse("(2 - sin(z1^2 + z2^2)) * u^5", &["u", "v", "z1", "z2"]).unwrap();
        let x = e.eval(&[0.5, 1.0, 0.0, 0.0]);
        assert!((x - 2.0 * 0.5f64.powi(5)).abs() < 1e-15);
        assert!(e.uses("z1") && !e.uses("v"));
        let g = Expr::parse("atan(1 + z1^2 + z2^2) / pi * v^5", &["u", "v", "z1", "z2"]).unwrap();
        assert!((g.eval(&[0.0, 1.0, 0.0, 0.0]) - 0.25).abs() < 1e-15);
    }

    #[test]
    fn errors_carry_position() {
        let e = Expr::parse("u + w", &["u"]).unwrap_err();
        assert_eq!(e.position, 4);
        assert!(Expr::parse("sin(u", &["u"]).is_err());
        assert!(Expr::parse("foo(u)", &["u"]).is_err());
        assert!(Expr::parse("", &[]).is_err());
        assert!(Expr::parse("1 2", &[]).is_err());
        assert!(Expr::parse("1 $ 2", &[]).is_err());
    }

    #[test]
    fn zero_to_integer_power() {
        assert_eq!(Expr::parse("u^5", &["u"]).unwrap().eval(&[0.0]), 0.0);
        assert_eq!(Expr::parse("u^3", &["u"]).unwrap().eval(&[-2.0]), -8.0);
    }
}
