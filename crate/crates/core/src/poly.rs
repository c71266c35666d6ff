//! Real polynomials in a few variables, parsed from text like `"x^2 - 3*x*y + 1"`.
//!
//! Variables are `x, y, z, w` (indices 0..4) or `x1, x2, …` (1-based).

use std::collections::BTreeMap;
use std::fmt;

use crate::error::{domain, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct Polynomial {
    vars: usize,
    /// Exponent vector to coefficient; zero coefficients are dropped.
    terms: BTreeMap<Vec<u32>, f64>,
}

impl Polynomial {
    pub fn zero(vars: usize) -> Self {
        Self { vars, terms: BTreeMap::new() }
    }

    pub fn constant(vars: usize, c: f64) -> Self {
        let mut p = Self::zero(vars);
        p.add_term(vec![0; vars], c);
        p
    }

    pub fn variable(vars: usize, index: usize) -> Self {
        let mut e = vec![0; vars];
        e[index] = 1;
        let mut p = Self::zero(vars);
        p.add_term(e, 1.0);
        p
    }

    /// Builds from `(coefficient, exponents)` pairs.
    pub fn from_terms(vars: usize, terms: &[(f64, Vec<u32>)]) -> Result<Self> {
        let mut p = Self::zero(vars);
        for (c, e) in terms {
            if e.len() != vars {
                return Err(domain("exponent vector length differs from variable count"));
            }
            p.add_term(e.clone(), *c);
        }
        Ok(p)
    }

    fn add_term(&mut self, e: Vec<u32>, c: f64) {
        let slot = self.terms.entry(e).or_insert(0.0);
        *slot += c;
        if *slot == 0.0 {
            self.terms.retain(|_, v| *v != 0.0);
        }
    }

    pub fn vars(&self) -> usize {
        self.vars
    }

    pub fn degree(&self) -> u32 {
        self.terms.keys().map(|e| e.iter().sum()).max().unwrap_or(0)
    }

    /// Same polynomial viewed in `vars >= self.vars()` variables.
    pub fn with_vars(&self, vars: usize) -> Result<Self> {
        if vars < self.vars {
            return Err(domain(format!("polynomial uses {} variables, cannot embed in {vars}", self.vars)));
        }
        let terms = self
            .terms
            .iter()
            .map(|(e, &c)| {
                let mut e = e.clone();
                e.resize(vars, 0);
                (e, c)
            })
            .collect();
        Ok(Self { vars, terms })
    }

    pub fn eval(&self, x: &[f64]) -> f64 {
        self.terms.iter().map(|(e, c)| e.iter().zip(x).fold(*c, |acc, (&k, xi)| acc * xi.powi(k as i32))).sum()
    }

    pub fn derivative(&self, var: usize) -> Self {
        let mut out = Self::zero(self.vars);
        for (e, &c) in &self.terms {
            if e[var] > 0 {
                let mut e2 = e.clone();
                e2[var] -= 1;
                out.add_term(e2, c * e[var] as f64);
            }
        }
        out
    }

    pub fn scale(&self, s: f64) -> Self {
        let mut out = Self::zero(self.vars);
        for (e, &c) in &self.terms {
            out.add_term(e.clone(), c * s);
        }
        out
    }

    fn add(&self, other: &Self) -> Self {
        let vars = self.vars.max(other.vars);
        let mut out = self.with_vars(vars).unwrap_or_else(|_| self.clone());
        for (e, &c) in &other.with_vars(vars).unwrap_or_else(|_| other.clone()).terms {
            out.add_term(e.clone(), c);
        }
        out
    }

    fn mul(&self, other: &Self) -> Self {
        let vars = self.vars.max(other.vars);
        let a = self.with_vars(vars).unwrap_or_else(|_| self.clone());
        let b = other.with_vars(vars).unwrap_or_else(|_| other.clone());
        let mut out = Self::zero(vars);
        for (ea, &ca) in &a.terms {
            for (eb, &cb) in &b.terms {
                let e = ea.iter().zip(eb).map(|(x, y)| x + y).collect();
                out.add_term(e, ca * cb);
            }
        }
        out
    }

    pub fn parse(text: &str) -> Result<Self> {
        let tokens = tokenize(text)?;
        let mut parser = Parser { tokens, pos: 0, text };
        let p = parser.expr()?;
        if parser.pos != parser.tokens.len() {
            return Err(domain(format!("unexpected trailing input in {text:?}")));
        }
        let vars = p
            .terms
            .keys()
            .flat_map(|e| e.iter().enumerate().filter(|(_, &k)| k > 0).map(|(i, _)| i + 1))
            .max()
            .unwrap_or(1);
        p.with_vars(p.vars.max(1)).map(|q| trim_vars(q, vars))
    }
}

fn trim_vars(p: Polynomial, vars: usize) -> Polynomial {
    let terms = p.terms.into_iter().map(|(mut e, c)| {
        e.truncate(vars);
        e.resize(vars, 0);
        (e, c)
    });
    let mut out = Polynomial::zero(vars);
    for (e, c) in terms {
        out.add_term(e, c);
    }
    out
}

impl fmt::Display for Polynomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        let names = ["x", "y", "z", "w"];
        for (i, (e, c)) in self.terms.iter().rev().enumerate() {
            let sign = if *c < 0.0 {
                "-"
            } else if i > 0 {
                "+"
            } else {
                ""
            };
            let sep = if i > 0 { " " } else { "" };
            write!(f, "{sep}{sign}{}{}", if i > 0 && !sign.is_empty() { " " } else { "" }, c.abs())?;
            for (v, &k) in e.iter().enumerate() {
                if k == 0 {
                    continue;
                }
                let name = if self.vars <= 4 { names[v].to_string() } else { format!("x{}", v + 1) };
                if k == 1 {
                    write!(f, "*{name}")?;
                } else {
                    write!(f, "*{name}^{k}")?;
                }
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
enum Token {
    Num(f64),
    Var(usize),
    Op(char),
}

fn tokenize(text: &str) -> Result<Vec<Token>> {
    let chars: Vec<char> = text.chars().collect();
    let mut out = Vec::new();
    let mut i = 0;
    while i < chars.len() {
        let c = chars[i];
        if c.is_whitespace() {
            i += 1;
        } else if c.is_ascii_digit() || c == '.' {
            let start = i;
            while i < chars.len() && (chars[i].is_ascii_digit() || chars[i] == '.') {
                i += 1;
            }
            if i < chars.len() && (chars[i] == 'e' || chars[i] == 'E') {
                let mut j = i + 1;
                if j < chars.len() && (chars[j] == '-' || chars[j] == '+') {
                    j += 1;
                }
                if j < chars.len() && chars[j].is_ascii_digit() {
                    i = j;
                    while i < chars.len() && chars[i].is_ascii_digit() {
                        i += 1;
                    }
                }
            }
            let s: String = chars[start..i].iter().collect();
            let v = s.parse().map_err(|_| domain(format!("bad number {s:?} in {text:?}")))?;
            out.push(Token::Num(v));
        } else if "xyzw".contains(c) {
            i += 1;
            let start = i;
            while c == 'x' && i < chars.len() && chars[i].is_ascii_digit() {
                i += 1;
            }
            let index = if i > start {
                let k: usize = chars[start..i].iter().collect::<String>().parse().unwrap_or(0);
                if k == 0 {
                    return Err(domain(format!("variables are numbered from x1 in {text:?}")));
                }
                k - 1
            } else {
                "xyzw".find(c).unwrap_or(0)
            };
            out.push(Token::Var(index));
        } else if "+-*/^()".contains(c) {
            out.push(Token::Op(c));
            i += 1;
        } else {
            return Err(domain(format!("unexpected character {c:?} in {text:?}")));
        }
    }
    Ok(out)
}

struct Parser<'a> {
    tokens: Vec<Token>,
    pos: usize,
    text: &'a str,
}

impl Parser<'_> {
    fn peek(&self) -> Option<&Token> {
        self.tokens.get(self.pos)
    }

    fn err(&self, what: &str) -> crate::error::Error {
        domain(format!("{what} at token {} in {:?}", self.pos, self.text))
    }

    fn expr(&mut self) -> Result<Polynomial> {
        let mut acc = self.term()?;
        while let Some(Token::Op(op @ ('+' | '-'))) = self.peek().cloned() {
            self.pos += 1;
            let rhs = self.term()?;
            acc = if op == '+' { acc.add(&rhs) } else { acc.add(&rhs.scale(-1.0)) };
        }
        Ok(acc)
    }

    fn term(&mut self) -> Result<Polynomial> {
        let mut acc = self.unary()?;
        loop {
            match self.peek().cloned() {
                Some(Token::Op('*')) => {
                    self.pos += 1;
                    acc = acc.mul(&self.unary()?);
                }
                Some(Token::Op('/')) => {
                    self.pos += 1;
                    let rhs = self.unary()?;
                    if rhs.degree() > 0 || rhs.terms.is_empty() {
                        return Err(self.err("division by a non-constant or zero"));
                    }
                    let c = rhs.eval(&vec![0.0; rhs.vars]);
                    acc = acc.scale(1.0 / c);
                }
                Some(Token::Num(_) | Token::Var(_) | Token::Op('(')) => {
                    acc = acc.mul(&self.power()?);
                }
                _ => return Ok(acc),
            }
        }
    }

    fn unary(&mut self) -> Result<Polynomial> {
        if let Some(Token::Op('-')) = self.peek() {
            self.pos += 1;
            return Ok(self.unary()?.scale(-1.0));
        }
        if let Some(Token::Op('+')) = self.peek() {
            self.pos += 1;
        }
        self.power()
    }

    fn power(&mut self) -> Result<Polynomial> {
        let base = self.atom()?;
        if let Some(Token::Op('^')) = self.peek() {
            self.pos += 1;
            let k = match self.peek().cloned() {
                Some(Token::Num(v)) if v >= 0.0 && v.fract() == 0.0 && v <= 64.0 => v as u32,
                _ => return Err(self.err("exponent must be a small non-negative integer")),
            };
            self.pos += 1;
            let mut acc = Polynomial::constant(base.vars, 1.0);
            for _ in 0..k {
                acc = acc.mul(&base);
            }
            return Ok(acc);
        }
        Ok(base)
    }

    fn atom(&mut self) -> Result<Polynomial> {
        match self.peek().cloned() {
            Some(Token::Num(v)) => {
                self.pos += 1;
                Ok(Polynomial::constant(1, v))
            }
            Some(Token::Var(i)) => {
                self.pos += 1;
                Ok(Polynomial::variable(i + 1, i))
            }
            Some(Token::Op('(')) => {
                self.pos += 1;
                let inner = self.expr()?;
                if self.peek() != Some(&Token::Op(')')) {
                    return Err(self.err("missing ')'"));
                }
                self.pos += 1;
                Ok(inner)
            }
            _ => Err(self.err("expected a number, variable or '('")),
        }
    }
}
