//! Exhaustive enumeration over a finite box, used as an independent oracle.

use num_bigint::BigInt;
use num_traits::Zero;

use super::{DiophantinePolynomial, MultiIndex};

pub const DEFAULT_SEARCH_CAP: u64 = 10_000_000;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum SearchError {
    #[error("box has {bounds} bounds, polynomial has {unknowns} unknowns")]
    DimensionMismatch { bounds: usize, unknowns: usize },
    #[error("box holds {points} points, more than the cap of {cap}")]
    BoxTooLarge { points: u128, cap: u64 },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SearchResult {
    /// Every point with `D = 0`, in enumeration order (first unknown fastest).
    pub zeros: Vec<MultiIndex>,
    pub min_square: BigInt,
    pub argmin: Vec<MultiIndex>,
    /// Smallest nonzero value of `D^2` and where it is attained, if any point
    /// has `D != 0`.
    pub min_nonzero_square: Option<BigInt>,
    pub argmin_nonzero: Vec<MultiIndex>,
}

impl SearchResult {
    pub fn has_solution(&self) -> bool {
        !self.zeros.is_empty()
    }
}

/// Enumerates every `n` with `0 <= n_i <= upper[i]`.
pub fn brute_force_search(
    p: &DiophantinePolynomial,
    upper: &[u32],
    cap: u64,
) -> Result<SearchResult, SearchError> {
    if upper.len() != p.num_unknowns() {
        return Err(SearchError::DimensionMismatch {
            bounds: upper.len(),
            unknowns: p.num_unknowns(),
        });
    }
    let points: u128 = upper.iter().map(|&u| u as u128 + 1).product();
    if points > cap as u128 {
        return Err(SearchError::BoxTooLarge { points, cap });
    }

    let mut zeros = Vec::new();
    let mut min_square: Option<BigInt> = None;
    let mut argmin = Vec::new();
    let mut min_nonzero: Option<BigInt> = None;
    let mut argmin_nonzero = Vec::new();

    let mut n = vec![0u32; upper.len()];
    'outer: loop {
        let v = p.evaluate_unchecked(&n);
        let sq = &v * &v;
        if v.is_zero() {
            zeros.push(MultiIndex(n.clone()));
        } else {
            match &min_nonzero {
                Some(m) if sq > *m => {}
                Some(m) if sq == *m => argmin_nonzero.push(MultiIndex(n.clone())),
                _ => {
                    min_nonzero = Some(sq.clone());
                    argmin_nonzero = vec![MultiIndex(n.clone())];
                }
            }
        }
        match &min_square {
            Some(m) if sq > *m => {}
            Some(m) if sq == *m => argmin.push(MultiIndex(n.clone())),
            _ => {
                min_square = Some(sq);
                argmin = vec![MultiIndex(n.clone())];
            }
        }

        for i in 0..n.len() {
            if n[i] < upper[i] {
                n[i] += 1;
                continue 'outer;
            }
            n[i] = 0;
        }
        break;
    }

    Ok(SearchResult {
        zeros,
        min_square: min_square.expect("box is never empty"),
        argmin,
        min_nonzero_square: min_nonzero,
        argmin_nonzero,
    })
}
