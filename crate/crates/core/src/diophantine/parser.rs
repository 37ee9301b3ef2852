//! Recursive-descent parser for polynomial expressions.
//!
//! ```text
//! equation := expr ( '=' expr )?
//! expr     := term ( ('+' | '-') term )*
//! term     := unary ( '*' unary )*
//! unary    := ('-' | '+') unary | power
//! power    := primary ( '^' INTEGER )?
//! primary  := INTEGER | IDENT | '(' expr ')'
//! ```
//!
//! `lhs = rhs` is read as `lhs - rhs`. Juxtaposition is not multiplication:
//! `xy` is a single unknown named `xy`, and `2x` is an error.

use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_traits::{One, Zero};

use super::DiophantinePolynomial;

/// Largest exponent literal accepted.
pub const MAX_EXPONENT: u32 = 1000;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ParseError {
    #[error("empty input")]
    Empty,
    #[error("syntax error at {pos}: {message}")]
    Syntax { pos: usize, message: String },
    #[error("non-integer literal at {pos}")]
    NonIntegerLiteral { pos: usize },
    #[error("exponent at {pos} must be a nonnegative integer literal")]
    BadExponent { pos: usize },
    #[error("exponent at {pos} exceeds {MAX_EXPONENT}")]
    ExponentTooLarge { pos: usize },
    #[error("expression has no unknowns")]
    NoUnknowns,
}

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Int(BigInt),
    Ident(String),
    Plus,
    Minus,
    Star,
    Caret,
    LParen,
    RParen,
    Equals,
}

fn tokenize(text: &str) -> Result<Vec<(usize, Tok)>, ParseError> {
    let bytes = text.as_bytes();
    let mut out = Vec::new();
    let mut i = 0;
    while i < bytes.len() {
        let c = bytes[i] as char;
        if c.is_ascii_whitespace() {
            i += 1;
            continue;
        }
        let start = i;
        let tok = match c {
            '+' => Tok::Plus,
            '-' => Tok::Minus,
            '*' => Tok::Star,
            '^' => Tok::Caret,
            '(' => Tok::LParen,
            ')' => Tok::RParen,
            '=' => Tok::Equals,
            '0'..='9' => {
                while i < bytes.len() && bytes[i].is_ascii_digit() {
                    i += 1;
                }
                if i < bytes.len() && matches!(bytes[i], b'.' | b'e' | b'E') {
                    return Err(ParseError::NonIntegerLiteral { pos: start });
                }
                let v: BigInt = text[start..i].parse().expect("ascii digits");
                out.push((start, Tok::Int(v)));
                continue;
            }
            '.' => return Err(ParseError::NonIntegerLiteral { pos: start }),
            c if c.is_ascii_alphabetic() || c == '_' => {
                while i < bytes.len() && (bytes[i].is_ascii_alphanumeric() || bytes[i] == b'_') {
                    i += 1;
                }
                out.push((start, Tok::Ident(text[start..i].to_string())));
                continue;
            }
            other => {
                return Err(ParseError::Syntax {
                    pos: start,
                    message: format!("unexpected character {other:?}"),
                })
            }
        };
        out.push((start, tok));
        i += 1;
    }
    Ok(out)
}

type TermMap = BTreeMap<Vec<u32>, BigInt>;

fn constant(k: usize, c: BigInt) -> TermMap {
    let mut m = TermMap::new();
    if !c.is_zero() {
        m.insert(vec![0; k], c);
    }
    m
}

fn add_into(acc: &mut TermMap, other: TermMap, sign: i32) {
    for (e, c) in other {
        let slot = acc.entry(e).or_insert_with(BigInt::zero);
        if sign < 0 {
            *slot -= c;
        } else {
            *slot += c;
        }
    }
    acc.retain(|_, c| !c.is_zero());
}

fn mul(a: &TermMap, b: &TermMap) -> TermMap {
    let mut out = TermMap::new();
    for (ea, ca) in a {
        for (eb, cb) in b {
            let e: Vec<u32> = ea.iter().zip(eb).map(|(x, y)| x + y).collect();
            *out.entry(e).or_insert_with(BigInt::zero) += ca * cb;
        }
    }
    out.retain(|_, c| !c.is_zero());
    out
}

fn pow(base: &TermMap, k: usize, mut e: u32) -> TermMap {
    let mut result = constant(k, BigInt::one());
    let mut sq = base.clone();
    while e > 0 {
        if e & 1 == 1 {
            result = mul(&result, &sq);
        }
        e >>= 1;
        if e > 0 {
            sq = mul(&sq, &sq);
        }
    }
    result
}

struct Parser<'a> {
    toks: &'a [(usize, Tok)],
    pos: usize,
    end: usize,
    vars: &'a [String],
}

impl Parser<'_> {
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos).map(|(_, t)| t)
    }

    fn offset(&self) -> usize {
        self.toks.get(self.pos).map(|(p, _)| *p).unwrap_or(self.end)
    }

    fn syntax<T>(&self, message: impl Into<String>) -> Result<T, ParseError> {
        Err(ParseError::Syntax {
            pos: self.offset(),
            message: message.into(),
        })
    }

    fn k(&self) -> usize {
        self.vars.len()
    }

    fn equation(&mut self) -> Result<TermMap, ParseError> {
        let mut lhs = self.expr()?;
        if self.peek() == Some(&Tok::Equals) {
            self.pos += 1;
            let rhs = self.expr()?;
            add_into(&mut lhs, rhs, -1);
        }
        if self.pos < self.toks.len() {
            return self.syntax("unexpected trailing input");
        }
        Ok(lhs)
    }

    fn expr(&mut self) -> Result<TermMap, ParseError> {
        let mut acc = self.term()?;
        loop {
            let sign = match self.peek() {
                Some(Tok::Plus) => 1,
                Some(Tok::Minus) => -1,
                _ => return Ok(acc),
            };
            self.pos += 1;
            let rhs = self.term()?;
            add_into(&mut acc, rhs, sign);
        }
    }

    fn term(&mut self) -> Result<TermMap, ParseError> {
        let mut acc = self.unary()?;
        while self.peek() == Some(&Tok::Star) {
            self.pos += 1;
            let rhs = self.unary()?;
            acc = mul(&acc, &rhs);
        }
        Ok(acc)
    }

    fn unary(&mut self) -> Result<TermMap, ParseError> {
        match self.peek() {
            Some(Tok::Minus) => {
                self.pos += 1;
                let mut inner = self.unary()?;
                for c in inner.values_mut() {
                    *c = -std::mem::take(c);
                }
                Ok(inner)
            }
            Some(Tok::Plus) => {
                self.pos += 1;
                self.unary()
            }
            _ => self.power(),
        }
    }

    fn power(&mut self) -> Result<TermMap, ParseError> {
        let base = self.primary()?;
        let out = if self.peek() == Some(&Tok::Caret) {
            self.pos += 1;
            let pos = self.offset();
            let e = match self.peek() {
                Some(Tok::Int(v)) => {
                    let e: u32 = v
                        .try_into()
                        .map_err(|_| ParseError::ExponentTooLarge { pos })?;
                    if e > MAX_EXPONENT {
                        return Err(ParseError::ExponentTooLarge { pos });
                    }
                    e
                }
                Some(_) => return Err(ParseError::BadExponent { pos }),
                None => return self.syntax("expected exponent"),
            };
            self.pos += 1;
            if self.peek() == Some(&Tok::Caret) {
                return self.syntax("chained '^' is ambiguous; use parentheses");
            }
            pow(&base, self.k(), e)
        } else {
            base
        };
        if matches!(
            self.peek(),
            Some(Tok::Int(_) | Tok::Ident(_) | Tok::LParen)
        ) {
            return self.syntax("implicit multiplication is not supported; use '*'");
        }
        Ok(out)
    }

    fn primary(&mut self) -> Result<TermMap, ParseError> {
        match self.peek().cloned() {
            Some(Tok::Int(v)) => {
                self.pos += 1;
                Ok(constant(self.k(), v))
            }
            Some(Tok::Ident(name)) => {
                self.pos += 1;
                let idx = self.vars.iter().position(|v| *v == name).expect("pre-scanned");
                let mut e = vec![0; self.k()];
                e[idx] = 1;
                Ok(TermMap::from([(e, BigInt::one())]))
            }
            Some(Tok::LParen) => {
                self.pos += 1;
                let inner = self.expr()?;
                if self.peek() != Some(&Tok::RParen) {
                    return self.syntax("expected ')'");
                }
                self.pos += 1;
                Ok(inner)
            }
            Some(_) => self.syntax("expected a number, an unknown or '('"),
            None => self.syntax("unexpected end of input"),
        }
    }
}

/// Parses and canonicalizes a polynomial. Unknowns are ordered by first
/// appearance in `text`.
pub fn parse(text: &str) -> Result<DiophantinePolynomial, ParseError> {
    let toks = tokenize(text)?;
    if toks.is_empty() {
        return Err(ParseError::Empty);
    }
    let mut vars: Vec<String> = Vec::new();
    for (_, t) in &toks {
        if let Tok::Ident(name) = t {
            if !vars.contains(name) {
                vars.push(name.clone());
            }
        }
    }
    let mut parser = Parser {
        toks: &toks,
        pos: 0,
        end: text.len(),
        vars: &vars,
    };
    let map = parser.equation()?;
    if vars.is_empty() {
        return Err(ParseError::NoUnknowns);
    }
    Ok(DiophantinePolynomial::from_map(vars, map))
}
