//! Integer-coefficient multivariate polynomials over nonnegative unknowns.
//!
//! A [`DiophantinePolynomial`] is always kept in canonical form: merged
//! exponent vectors, no zero coefficients, terms in descending graded
//! lexicographic order. Coefficients are arbitrary precision.

mod parser;
mod search;

use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::fmt;

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};

pub use parser::{parse, ParseError};
pub use search::{brute_force_search, SearchError, SearchResult, DEFAULT_SEARCH_CAP};

/// Occupation numbers `(n_1, ..., n_K)`, one per unknown.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct MultiIndex(pub Vec<u32>);

impl MultiIndex {
    pub fn new(occupations: Vec<u32>) -> Self {
        MultiIndex(occupations)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn as_slice(&self) -> &[u32] {
        &self.0
    }
}

impl From<Vec<u32>> for MultiIndex {
    fn from(v: Vec<u32>) -> Self {
        MultiIndex(v)
    }
}

impl fmt::Display for MultiIndex {
    /// Colon separated, e.g. `1:2`.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, n) in self.0.iter().enumerate() {
            if i > 0 {
                f.write_str(":")?;
            }
            write!(f, "{n}")?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("multi-index has {got} entries, polynomial has {expected} unknowns")]
pub struct DimensionMismatch {
    pub expected: usize,
    pub got: usize,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Term {
    pub coefficient: BigInt,
    pub exponents: Vec<u32>,
}

/// Graded lexicographic order: total degree first, then the exponent of the
/// first unknown, and so on.
pub fn grlex_cmp(a: &[u32], b: &[u32]) -> Ordering {
    let da: u64 = a.iter().map(|&e| e as u64).sum();
    let db: u64 = b.iter().map(|&e| e as u64).sum();
    da.cmp(&db).then_with(|| a.cmp(b))
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DiophantinePolynomial {
    unknowns: Vec<String>,
    terms: Vec<Term>,
}

impl DiophantinePolynomial {
    /// Builds a canonical polynomial from arbitrary (possibly repeated or
    /// zero) terms.
    ///
    /// Panics if `unknowns` is empty or a term's exponent vector has the
    /// wrong length.
    pub fn from_terms<I>(unknowns: Vec<String>, terms: I) -> Self
    where
        I: IntoIterator<Item = (BigInt, Vec<u32>)>,
    {
        assert!(!unknowns.is_empty(), "a polynomial needs at least one unknown");
        let k = unknowns.len();
        let mut merged: BTreeMap<Vec<u32>, BigInt> = BTreeMap::new();
        for (c, e) in terms {
            assert_eq!(e.len(), k, "exponent vector length must equal the number of unknowns");
            *merged.entry(e).or_insert_with(BigInt::zero) += c;
        }
        Self::from_map(unknowns, merged)
    }

    pub(crate) fn from_map(unknowns: Vec<String>, map: BTreeMap<Vec<u32>, BigInt>) -> Self {
        let mut terms: Vec<Term> = map
            .into_iter()
            .filter(|(_, c)| !c.is_zero())
            .map(|(exponents, coefficient)| Term {
                coefficient,
                exponents,
            })
            .collect();
        terms.sort_by(|a, b| grlex_cmp(&b.exponents, &a.exponents));
        DiophantinePolynomial { unknowns, terms }
    }

    /// Re-merges and re-sorts the terms. A no-op on anything built through
    /// the public constructors.
    pub fn canonicalize(&self) -> Self {
        Self::from_terms(
            self.unknowns.clone(),
            self.terms.iter().map(|t| (t.coefficient.clone(), t.exponents.clone())),
        )
    }

    pub fn unknowns(&self) -> &[String] {
        &self.unknowns
    }

    pub fn num_unknowns(&self) -> usize {
        self.unknowns.len()
    }

    pub fn terms(&self) -> &[Term] {
        &self.terms
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    /// Maximum exponent of each unknown over all terms.
    pub fn max_degrees(&self) -> Vec<u32> {
        let mut out = vec![0; self.num_unknowns()];
        for t in &self.terms {
            for (d, &e) in out.iter_mut().zip(&t.exponents) {
                *d = (*d).max(e);
            }
        }
        out
    }

    pub fn evaluate(&self, n: &MultiIndex) -> Result<BigInt, DimensionMismatch> {
        self.check_dim(n)?;
        Ok(self.evaluate_unchecked(n.as_slice()))
    }

    pub(crate) fn check_dim(&self, n: &MultiIndex) -> Result<(), DimensionMismatch> {
        if n.len() != self.num_unknowns() {
            return Err(DimensionMismatch {
                expected: self.num_unknowns(),
                got: n.len(),
            });
        }
        Ok(())
    }

    pub(crate) fn evaluate_unchecked(&self, n: &[u32]) -> BigInt {
        let mut sum = BigInt::zero();
        for t in &self.terms {
            let mut v = t.coefficient.clone();
            for (&x, &e) in n.iter().zip(&t.exponents) {
                if e > 0 {
                    v *= num_traits::pow(BigInt::from(x), e as usize);
                }
            }
            sum += v;
        }
        sum
    }

    /// `D(n)^2`, exact.
    pub fn evaluate_squared(&self, n: &MultiIndex) -> Result<BigInt, DimensionMismatch> {
        let v = self.evaluate(n)?;
        Ok(&v * &v)
    }

    /// Sum of two polynomials; unknowns are merged by name, `self`'s first.
    pub fn add(&self, other: &Self) -> Self {
        let mut unknowns = self.unknowns.clone();
        for u in &other.unknowns {
            if !unknowns.contains(u) {
                unknowns.push(u.clone());
            }
        }
        let k = unknowns.len();
        let remap = |p: &Self| -> Vec<usize> {
            p.unknowns
                .iter()
                .map(|u| unknowns.iter().position(|v| v == u).unwrap())
                .collect()
        };
        let (ra, rb) = (remap(self), remap(other));
        let lift = |t: &Term, r: &[usize]| {
            let mut e = vec![0; k];
            for (i, &x) in t.exponents.iter().enumerate() {
                e[r[i]] = x;
            }
            (t.coefficient.clone(), e)
        };
        let terms: Vec<_> = self
            .terms
            .iter()
            .map(|t| lift(t, &ra))
            .chain(other.terms.iter().map(|t| lift(t, &rb)))
            .collect();
        Self::from_terms(unknowns, terms)
    }
}

impl fmt::Display for DiophantinePolynomial {
    /// Canonical printer; its output parses back to the same terms.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return f.write_str("0");
        }
        for (i, t) in self.terms.iter().enumerate() {
            let negative = t.coefficient.is_negative();
            match (i, negative) {
                (0, true) => f.write_str("-")?,
                (0, false) => {}
                (_, true) => f.write_str(" - ")?,
                (_, false) => f.write_str(" + ")?,
            }
            let magnitude = t.coefficient.abs();
            let constant = t.exponents.iter().all(|&e| e == 0);
            let mut wrote = false;
            if constant || !magnitude.is_one() {
                write!(f, "{magnitude}")?;
                wrote = true;
            }
            for (name, &e) in self.unknowns.iter().zip(&t.exponents) {
                if e == 0 {
                    continue;
                }
                if wrote {
                    f.write_str("*")?;
                }
                f.write_str(name)?;
                if e > 1 {
                    write!(f, "^{e}")?;
                }
                wrote = true;
            }
        }
        Ok(())
    }
}
