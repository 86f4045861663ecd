//! Arithmetic expressions for initial, boundary and kinetics data.
//!
//! Grammar (lowest precedence first):
//!
//! ```text
//! sum     := product (('+' | '-') product)*
//! product := unary (('*' | '/') unary)*
//! unary   := ('-' | '+') unary | power
//! power   := atom ('^' unary)?
//! atom    := number | name | name '(' sum ')' | '(' sum ')'
//! ```
//!
//! `^` is right-associative and binds tighter than unary minus, so
//! `-2^2 = -4` and `2^3^2 = 512`. Names are `z`, `t`, `Y1..Yn`, `C1..Cm`
//! and the constants `pi` and `e`.

use std::fmt;

#[derive(Debug, Clone, PartialEq)]
pub struct ExprError {
    /// Byte offset into the source.
    pub pos: usize,
    pub message: String,
}

impl fmt::Display for ExprError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} (at column {})", self.message, self.pos + 1)
    }
}

impl std::error::Error for ExprError {}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Func {
    Exp,
    Log,
    Sqrt,
    Sin,
    Cos,
    Tan,
    Tanh,
    Abs,
}

impl Func {
    fn lookup(name: &str) -> Option<Self> {
        Some(match name {
            "exp" => Func::Exp,
            "log" | "ln" => Func::Log,
            "sqrt" => Func::Sqrt,
            "sin" => Func::Sin,
            "cos" => Func::Cos,
            "tan" => Func::Tan,
            "tanh" => Func::Tanh,
            "abs" => Func::Abs,
            _ => return None,
        })
    }

    fn apply(self, x: f64) -> f64 {
        match self {
            Func::Exp => x.exp(),
            Func::Log => x.ln(),
            Func::Sqrt => x.sqrt(),
            Func::Sin => x.sin(),
            Func::Cos => x.cos(),
            Func::Tan => x.tan(),
            Func::Tanh => x.tanh(),
            Func::Abs => x.abs(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Var {
    Z,
    T,
    Y(usize),
    C(usize),
}

#[derive(Debug, Clone, PartialEq)]
enum Node {
    Num(f64),
    Var(Var),
    Neg(Box<Node>),
    Add(Box<Node>, Box<Node>),
    Sub(Box<Node>, Box<Node>),
    Mul(Box<Node>, Box<Node>),
    Div(Box<Node>, Box<Node>),
    Pow(Box<Node>, Box<Node>),
    Call(Func, Box<Node>),
}

/// Values bound to the expression variables.
#[derive(Debug, Clone, Copy, Default)]
pub struct Vars<'a> {
    pub z: f64,
    pub t: f64,
    pub y: &'a [f64],
    pub c: &'a [f64],
}

#[derive(Debug, Clone, PartialEq)]
pub struct Expr {
    root: Node,
    source: String,
}

impl Expr {
    pub fn parse(src: &str) -> Result<Self, ExprError> {
        let mut p = Parser { src, pos: 0 };
        let root = p.sum()?;
        p.skip_ws();
        if p.pos < src.len() {
            return Err(p.error(format!("unexpected `{}`", &src[p.pos..])));
        }
        Ok(Self {
            root: fold(root),
            source: src.to_string(),
        })
    }

    pub fn source(&self) -> &str {
        &self.source
    }

    pub fn eval(&self, vars: &Vars<'_>) -> f64 {
        eval(&self.root, vars)
    }

    /// Evaluates with only `z` and `t` bound.
    pub fn eval_zt(&self, z: f64, t: f64) -> f64 {
        self.eval(&Vars { z, t, y: &[], c: &[] })
    }

    /// Highest `Y` and `C` indices referenced (1-based, 0 when unused).
    pub fn species_used(&self) -> (usize, usize) {
        let mut out = (0, 0);
        visit(&self.root, &mut |v| match v {
            Var::Y(i) => out.0 = out.0.max(i + 1),
            Var::C(j) => out.1 = out.1.max(j + 1),
            _ => {}
        });
        out
    }

    pub fn uses_z(&self) -> bool {
        self.uses(Var::Z)
    }

    pub fn uses_t(&self) -> bool {
        self.uses(Var::T)
    }

    fn uses(&self, target: Var) -> bool {
        let mut hit = false;
        visit(&self.root, &mut |v| hit |= v == target);
        hit
    }

    /// The value when the expression has no variables.
    pub fn constant_value(&self) -> Option<f64> {
        match self.root {
            Node::Num(x) => Some(x),
            _ => None,
        }
    }
}

fn visit(node: &Node, f: &mut impl FnMut(Var)) {
    match node {
        Node::Num(_) => {}
        Node::Var(v) => f(*v),
        Node::Neg(a) | Node::Call(_, a) => visit(a, f),
        Node::Add(a, b) | Node::Sub(a, b) | Node::Mul(a, b) | Node::Div(a, b) | Node::Pow(a, b) => {
            visit(a, f);
            visit(b, f);
        }
    }
}

fn eval(node: &Node, v: &Vars<'_>) -> f64 {
    match node {
        Node::Num(x) => *x,
        Node::Var(Var::Z) => v.z,
        Node::Var(Var::T) => v.t,
        Node::Var(Var::Y(i)) => v.y.get(*i).copied().unwrap_or(f64::NAN),
        Node::Var(Var::C(j)) => v.c.get(*j).copied().unwrap_or(f64::NAN),
        Node::Neg(a) => -eval(a, v),
        Node::Add(a, b) => eval(a, v) + eval(b, v),
        Node::Sub(a, b) => eval(a, v) - eval(b, v),
        Node::Mul(a, b) => eval(a, v) * eval(b, v),
        Node::Div(a, b) => eval(a, v) / eval(b, v),
        Node::Pow(a, b) => pow(eval(a, v), eval(b, v)),
        Node::Call(f, a) => f.apply(eval(a, v)),
    }
}

fn pow(base: f64, exp: f64) -> f64 {
    if exp.fract() == 0.0 && exp.abs() <= i32::MAX as f64 {
        base.powi(exp as i32)
    } else {
        base.powf(exp)
    }
}

/// Collapses variable-free subtrees to numbers.
fn fold(node: Node) -> Node {
    let num = |n: &Node| match n {
        Node::Num(x) => Some(*x),
        _ => None,
    };
    let bin = |a: Box<Node>, b: Box<Node>, op: fn(f64, f64) -> f64, mk: fn(Box<Node>, Box<Node>) -> Node| {
        let (a, b) = (fold(*a), fold(*b));
        match (num(&a), num(&b)) {
            (Some(x), Some(y)) => Node::Num(op(x, y)),
            _ => mk(Box::new(a), Box::new(b)),
        }
    };
    match node {
        Node::Neg(a) => match fold(*a) {
            Node::Num(x) => Node::Num(-x),
            other => Node::Neg(Box::new(other)),
        },
        Node::Call(f, a) => match fold(*a) {
            Node::Num(x) => Node::Num(f.apply(x)),
            other => Node::Call(f, Box::new(other)),
        },
        Node::Add(a, b) => bin(a, b, |x, y| x + y, Node::Add),
        Node::Sub(a, b) => bin(a, b, |x, y| x - y, Node::Sub),
        Node::Mul(a, b) => bin(a, b, |x, y| x * y, Node::Mul),
        Node::Div(a, b) => bin(a, b, |x, y| x / y, Node::Div),
        Node::Pow(a, b) => bin(a, b, pow, Node::Pow),
        leaf => leaf,
    }
}

struct Parser<'a> {
    src: &'a str,
    pos: usize,
}

impl Parser<'_> {
    fn error(&self, message: impl Into<String>) -> ExprError {
        ExprError {
            pos: self.pos,
            message: message.into(),
        }
    }

    fn skip_ws(&mut self) {
        let rest = &self.src[self.pos..];
        self.pos += rest.len() - rest.trim_start().len();
    }

    fn peek(&mut self) -> Option<char> {
        self.skip_ws();
        self.src[self.pos..].chars().next()
    }

    fn eat(&mut self, c: char) -> bool {
        if self.peek() == Some(c) {
            self.pos += c.len_utf8();
            true
        } else {
            false
        }
    }

    fn sum(&mut self) -> Result<Node, ExprError> {
        let mut lhs = self.product()?;
        loop {
            if self.eat('+') {
                lhs = Node::Add(Box::new(lhs), Box::new(self.product()?));
            } else if self.eat('-') {
                lhs = Node::Sub(Box::new(lhs), Box::new(self.product()?));
            } else {
                return Ok(lhs);
            }
        }
    }

    fn product(&mut self) -> Result<Node, ExprError> {
        let mut lhs = self.unary()?;
        loop {
            if self.eat('*') {
                lhs = Node::Mul(Box::new(lhs), Box::new(self.unary()?));
            } else if self.eat('/') {
                lhs = Node::Div(Box::new(lhs), Box::new(self.unary()?));
            } else {
                return Ok(lhs);
            }
        }
    }

    fn unary(&mut self) -> Result<Node, ExprError> {
        if self.eat('-') {
            Ok(Node::Neg(Box::new(self.unary()?)))
        } else if self.eat('+') {
            self.unary()
        } else {
            self.power()
        }
    }

    fn power(&mut self) -> Result<Node, ExprError> {
        let base = self.atom()?;
        if self.eat('^') {
            Ok(Node::Pow(Box::new(base), Box::new(self.unary()?)))
        } else {
            Ok(base)
        }
    }

    fn atom(&mut self) -> Result<Node, ExprError> {
        match self.peek() {
            None => Err(self.error("unexpected end of expression")),
            Some('(') => {
                self.pos += 1;
                let inner = self.sum()?;
                if !self.eat(')') {
                    return Err(self.error("expected `)`"));
                }
                Ok(inner)
            }
            Some(c) if c.is_ascii_digit() || c == '.' => self.number(),
            Some(c) if c.is_ascii_alphabetic() || c == '_' => self.name(),
            Some(c) => Err(self.error(format!("unexpected `{c}`"))),
        }
    }

    fn number(&mut self) -> Result<Node, ExprError> {
        let start = self.pos;
        let bytes = self.src.as_bytes();
        let mut end = start;
        while end < bytes.len() && (bytes[end].is_ascii_digit() || bytes[end] == b'.') {
            end += 1;
        }
        if end < bytes.len() && (bytes[end] == b'e' || bytes[end] == b'E') {
            let mut k = end + 1;
            if k < bytes.len() && (bytes[k] == b'+' || bytes[k] == b'-') {
                k += 1;
            }
            if k < bytes.len() && bytes[k].is_ascii_digit() {
                while k < bytes.len() && bytes[k].is_ascii_digit() {
                    k += 1;
                }
                end = k;
            }
        }
        let text = &self.src[start..end];
        let value = text
            .parse::<f64>()
            .map_err(|_| self.error(format!("malformed number `{text}`")))?;
        self.pos = end;
        Ok(Node::Num(value))
    }

    fn name(&mut self) -> Result<Node, ExprError> {
        let start = self.pos;
        let rest = &self.src[start..];
        let len = rest
            .find(|c: char| !(c.is_ascii_alphanumeric() || c == '_'))
            .unwrap_or(rest.len());
        let name = &rest[..len];
        self.pos += len;
        if let Some(func) = Func::lookup(name) {
            if !self.eat('(') {
                return Err(self.error(format!("expected `(` after `{name}`")));
            }
            let arg = self.sum()?;
            if !self.eat(')') {
                return Err(self.error("expected `)`"));
            }
            return Ok(Node::Call(func, Box::new(arg)));
        }
        let var = match name {
            "z" => Var::Z,
            "t" => Var::T,
            "pi" => return Ok(Node::Num(std::f64::consts::PI)),
            "e" => return Ok(Node::Num(std::f64::consts::E)),
            _ => {
                let species = |prefix: char| {
                    name.strip_prefix(prefix)
                        .and_then(|d| d.parse::<usize>().ok())
                        .filter(|&i| i >= 1 && !name[1..].starts_with('0'))
                };
                if let Some(i) = species('Y') {
                    Var::Y(i - 1)
                } else if let Some(j) = species('C') {
                    Var::C(j - 1)
                } else {
                    self.pos = start;
                    return Err(self.error(format!("unknown name `{name}`")));
                }
            }
        };
        Ok(Node::Var(var))
    }
}
