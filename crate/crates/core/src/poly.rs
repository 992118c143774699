//! Holomorphic polynomials on ℂⁿ and a parser for monomial-sum syntax.

use std::collections::BTreeMap;
use std::fmt;

use num_complex::Complex64;

use crate::error::{invalid, LabError, Result};

/// Polynomial Σ c_α z^α with exponent vectors of length `n`.
#[derive(Debug, Clone, PartialEq)]
pub struct HoloPoly {
    n: usize,
    terms: BTreeMap<Vec<u32>, Complex64>,
}

impl HoloPoly {
    /// Combine like terms and drop zero coefficients; rejects f ≡ 0.
    pub fn new(n: usize, terms: impl IntoIterator<Item = (Vec<u32>, Complex64)>) -> Result<Self> {
        if n == 0 {
            return Err(invalid("n", "complex dimension must be at least 1"));
        }
        let mut map: BTreeMap<Vec<u32>, Complex64> = BTreeMap::new();
        for (mut e, c) in terms {
            if e.len() > n {
                if e[n..].iter().any(|&k| k != 0) {
                    return Err(invalid("f", format!("uses variable z{} but n = {n}", e.len())));
                }
                e.truncate(n);
            }
            e.resize(n, 0);
            if !c.re.is_finite() || !c.im.is_finite() {
                return Err(invalid("f", "coefficients must be finite"));
            }
            *map.entry(e).or_default() += c;
        }
        map.retain(|_, c| *c != Complex64::new(0.0, 0.0));
        if map.is_empty() {
            return Err(invalid("f", "the zero polynomial has no growth"));
        }
        Ok(Self { n, terms: map })
    }

    pub fn monomial(exponents: Vec<u32>, coeff: Complex64) -> Result<Self> {
        let n = exponents.len();
        Self::new(n, [(exponents, coeff)])
    }

    /// Parse e.g. `z^3`, `(1+2i)*z1^2 z2 - 0.5i z3 + 4`, `(z+1)^2`.
    /// The dimension is the largest variable index unless `n` is larger.
    pub fn parse(text: &str, n: Option<usize>) -> Result<Self> {
        let tokens = lex(text)?;
        let mut p = Parser { tokens, pos: 0 };
        let poly = p.expr()?;
        if p.pos != p.tokens.len() {
            return Err(LabError::Parse(format!("unexpected `{}` in `{text}`", p.tokens[p.pos])));
        }
        let used = poly.keys().map(|e| e.len()).max().unwrap_or(0).max(1);
        let n = match n {
            Some(n) if n < used => {
                return Err(invalid("n", format!("`{text}` uses z{used} but n = {n}")));
            }
            Some(n) => n,
            None => used,
        };
        Self::new(n, poly)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn terms(&self) -> &BTreeMap<Vec<u32>, Complex64> {
        &self.terms
    }

    pub fn degree(&self) -> u32 {
        self.terms.keys().map(|e| e.iter().sum()).max().unwrap()
    }

    /// Lowest total degree with a nonzero coefficient.
    pub fn vanishing_order(&self) -> u32 {
        self.terms.keys().map(|e| e.iter().sum()).min().unwrap()
    }

    pub fn single_monomial(&self) -> Option<(&[u32], Complex64)> {
        if self.terms.len() == 1 {
            let (e, c) = self.terms.iter().next().unwrap();
            Some((e, *c))
        } else {
            None
        }
    }

    pub fn eval(&self, z: &[Complex64]) -> Complex64 {
        self.terms
            .iter()
            .map(|(e, c)| e.iter().zip(z).fold(*c, |acc, (&k, zi)| acc * zi.powu(k)))
            .sum()
    }

    /// Σ c_α u^α ρ^{|α| − s}: f(ρu)/ρ^s without forming ρ^{|α|}.
    pub(crate) fn eval_scaled(&self, u: &[Complex64], log_rho: f64, s: u32) -> Complex64 {
        self.terms
            .iter()
            .map(|(e, c)| {
                let deg: u32 = e.iter().sum();
                let scale = ((deg as f64 - s as f64) * log_rho).exp();
                e.iter().zip(u).fold(*c * scale, |acc, (&k, ui)| acc * ui.powu(k))
            })
            .sum()
    }

    /// Value and holomorphic gradient ∂f/∂z_j of the scaled polynomial.
    pub(crate) fn eval_scaled_grad(&self, u: &[Complex64], log_rho: f64, s: u32) -> (Complex64, Vec<Complex64>) {
        let mut val = Complex64::new(0.0, 0.0);
        let mut grad = vec![Complex64::new(0.0, 0.0); self.n];
        for (e, c) in &self.terms {
            let deg: u32 = e.iter().sum();
            let coef = *c * ((deg as f64 - s as f64) * log_rho).exp();
            let powers: Vec<Complex64> = e.iter().zip(u).map(|(&k, ui)| ui.powu(k)).collect();
            val += powers.iter().fold(coef, |a, p| a * p);
            for j in 0..self.n {
                if e[j] == 0 {
                    continue;
                }
                let mut g = coef * e[j] as f64 * u[j].powu(e[j] - 1);
                for (i, p) in powers.iter().enumerate() {
                    if i != j {
                        g *= p;
                    }
                }
                grad[j] += g;
            }
        }
        (val, grad)
    }

    /// f(w + a) as a polynomial in w (one variable only).
    pub fn recenter(&self, a: Complex64) -> Result<Self> {
        if self.n != 1 {
            return Err(invalid("basepoint", "recentering is supported for n = 1 only"));
        }
        let mut out: Vec<(Vec<u32>, Complex64)> = Vec::new();
        for (e, c) in &self.terms {
            let k = e[0];
            let mut binom = 1.0f64;
            for j in 0..=k {
                out.push((vec![j], *c * binom * a.powu(k - j)));
                binom = binom * (k - j) as f64 / (j + 1) as f64;
            }
        }
        // Cancellation can leave tiny residues of vanished terms.
        let scale: f64 = out.iter().map(|(_, c)| c.norm()).fold(0.0, f64::max);
        Self::new(
            1,
            out.into_iter()
                .filter(|(_, c)| c.norm() > 1e-14 * scale)
                .collect::<Vec<_>>(),
        )
    }

    /// Vanishing order at a point of ℂ (n = 1).
    pub fn vanishing_order_at(&self, a: Complex64) -> Result<u32> {
        Ok(self.recenter(a)?.vanishing_order())
    }
}

fn fmt_coeff(c: Complex64) -> String {
    if c.im == 0.0 {
        format!("{}", c.re)
    } else if c.re == 0.0 {
        format!("{}i", c.im)
    } else {
        format!("({}{:+}i)", c.re, c.im)
    }
}

impl fmt::Display for HoloPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        for (e, c) in self.terms.iter().rev() {
            if !first {
                f.write_str(" + ")?;
            }
            first = false;
            let vars: Vec<String> = e
                .iter()
                .enumerate()
                .filter(|(_, &k)| k > 0)
                .map(|(i, &k)| {
                    let name = if self.n == 1 {
                        "z".to_string()
                    } else {
                        format!("z{}", i + 1)
                    };
                    if k == 1 {
                        name
                    } else {
                        format!("{name}^{k}")
                    }
                })
                .collect();
            if vars.is_empty() {
                f.write_str(&fmt_coeff(*c))?;
            } else if *c == Complex64::new(1.0, 0.0) {
                f.write_str(&vars.join("*"))?;
            } else {
                write!(f, "{}*{}", fmt_coeff(*c), vars.join("*"))?;
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
enum Token {
    Num(f64),
    I,
    Var(usize),
    Plus,
    Minus,
    Star,
    Caret,
    LParen,
    RParen,
}

impl fmt::Display for Token {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Token::Num(v) => write!(f, "{v}"),
            Token::I => f.write_str("i"),
            Token::Var(k) => write!(f, "z{k}"),
            Token::Plus => f.write_str("+"),
            Token::Minus => f.write_str("-"),
            Token::Star => f.write_str("*"),
            Token::Caret => f.write_str("^"),
            Token::LParen => f.write_str("("),
            Token::RParen => f.write_str(")"),
        }
    }
}

fn lex(text: &str) -> Result<Vec<Token>> {
    let chars: Vec<char> = text.chars().collect();
    let mut out = Vec::new();
    let mut i = 0;
    while i < chars.len() {
        let c = chars[i];
        match c {
            c if c.is_whitespace() => i += 1,
            '+' => {
                out.push(Token::Plus);
                i += 1;
            }
            '-' => {
                out.push(Token::Minus);
                i += 1;
            }
            '*' => {
                out.push(Token::Star);
                i += 1;
            }
            '^' => {
                out.push(Token::Caret);
                i += 1;
            }
            '(' => {
                out.push(Token::LParen);
                i += 1;
            }
            ')' => {
                out.push(Token::RParen);
                i += 1;
            }
            'i' => {
                out.push(Token::I);
                i += 1;
            }
            'z' => {
                let start = i + 1;
                let mut j = start;
                while j < chars.len() && chars[j].is_ascii_digit() {
                    j += 1;
                }
                let idx = if j == start {
                    1
                } else {
                    let s: String = chars[start..j].iter().collect();
                    s.parse::<usize>()
                        .ok()
                        .filter(|&k| k >= 1)
                        .ok_or_else(|| LabError::Parse(format!("bad variable `z{s}`")))?
                };
                out.push(Token::Var(idx));
                i = j;
            }
            c if c.is_ascii_digit() || c == '.' => {
                let start = i;
                while i < chars.len() && (chars[i].is_ascii_digit() || chars[i] == '.') {
                    i += 1;
                }
                // Exponent part only when followed by digits.
                if i < chars.len() && (chars[i] == 'e' || chars[i] == 'E') {
                    let mut j = i + 1;
                    if j < chars.len() && (chars[j] == '+' || chars[j] == '-') {
                        j += 1;
                    }
                    if j < chars.len() && chars[j].is_ascii_digit() {
                        while j < chars.len() && chars[j].is_ascii_digit() {
                            j += 1;
                        }
                        i = j;
                    }
                }
                let s: String = chars[start..i].iter().collect();
                let v = s
                    .parse::<f64>()
                    .map_err(|_| LabError::Parse(format!("bad number `{s}`")))?;
                out.push(Token::Num(v));
            }
            other => return Err(LabError::Parse(format!("unexpected character `{other}`"))),
        }
    }
    Ok(out)
}

type Terms = BTreeMap<Vec<u32>, Complex64>;

fn constant(c: Complex64) -> Terms {
    let mut t = Terms::new();
    t.insert(vec![], c);
    t
}

fn trim(mut e: Vec<u32>) -> Vec<u32> {
    while e.last() == Some(&0) {
        e.pop();
    }
    e
}

fn add(mut a: Terms, b: Terms, sign: f64) -> Terms {
    for (e, c) in b {
        *a.entry(e).or_default() += c * sign;
    }
    a
}

fn mul(a: &Terms, b: &Terms) -> Terms {
    let mut out = Terms::new();
    for (ea, ca) in a {
        for (eb, cb) in b {
            let len = ea.len().max(eb.len());
            let e: Vec<u32> = (0..len)
                .map(|i| ea.get(i).copied().unwrap_or(0) + eb.get(i).copied().unwrap_or(0))
                .collect();
            *out.entry(trim(e)).or_default() += ca * cb;
        }
    }
    out
}

struct Parser {
    tokens: Vec<Token>,
    pos: usize,
}

impl Parser {
    fn peek(&self) -> Option<&Token> {
        self.tokens.get(self.pos)
    }

    fn expr(&mut self) -> Result<Terms> {
        let mut acc = self.term()?;
        while let Some(t) = self.peek() {
            let sign = match t {
                Token::Plus => 1.0,
                Token::Minus => -1.0,
                _ => break,
            };
            self.pos += 1;
            let rhs = self.term()?;
            acc = add(acc, rhs, sign);
        }
        Ok(acc)
    }

    fn term(&mut self) -> Result<Terms> {
        let mut acc = self.unary()?;
        loop {
            match self.peek() {
                Some(Token::Star) => {
                    self.pos += 1;
                }
                Some(Token::Num(_) | Token::I | Token::Var(_) | Token::LParen) => {}
                _ => break,
            }
            let rhs = self.power()?;
            acc = mul(&acc, &rhs);
        }
        Ok(acc)
    }

    fn unary(&mut self) -> Result<Terms> {
        match self.peek() {
            Some(Token::Minus) => {
                self.pos += 1;
                let t = self.unary()?;
                Ok(add(Terms::new(), t, -1.0))
            }
            Some(Token::Plus) => {
                self.pos += 1;
                self.unary()
            }
            _ => self.power(),
        }
    }

    fn power(&mut self) -> Result<Terms> {
        let base = self.atom()?;
        if self.peek() == Some(&Token::Caret) {
            self.pos += 1;
            let k = match self.tokens.get(self.pos) {
                Some(Token::Num(v)) if v.fract() == 0.0 && *v >= 0.0 && *v <= 1000.0 => *v as u32,
                other => {
                    return Err(LabError::Parse(format!(
                        "exponent must be a nonnegative integer, found {}",
                        other.map_or("end of input".to_string(), |t| t.to_string())
                    )))
                }
            };
            self.pos += 1;
            let mut acc = constant(Complex64::new(1.0, 0.0));
            for _ in 0..k {
                acc = mul(&acc, &base);
            }
            return Ok(acc);
        }
        Ok(base)
    }

    fn atom(&mut self) -> Result<Terms> {
        let tok = self
            .tokens
            .get(self.pos)
            .cloned()
            .ok_or_else(|| LabError::Parse("unexpected end of input".into()))?;
        self.pos += 1;
        match tok {
            Token::Num(v) => Ok(constant(Complex64::new(v, 0.0))),
            Token::I => Ok(constant(Complex64::new(0.0, 1.0))),
            Token::Var(k) => {
                let mut e = vec![0; k];
                e[k - 1] = 1;
                let mut t = Terms::new();
                t.insert(e, Complex64::new(1.0, 0.0));
                Ok(t)
            }
            Token::LParen => {
                let inner = self.expr()?;
                if self.tokens.get(self.pos) != Some(&Token::RParen) {
                    return Err(LabError::Parse("missing `)`".into()));
                }
                self.pos += 1;
                Ok(inner)
            }
            other => Err(LabError::Parse(format!("unexpected `{other}`"))),
        }
    }
}
