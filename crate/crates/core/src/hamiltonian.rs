//! Matrix-free application of the problem Hamiltonian `H_P = D(N_1..N_K)^2`,
//! the displaced-oscillator initial Hamiltonian
//! `H_I = sum_i (a_i^+ - conj(alpha_i)) (a_i - alpha_i)`, and their linear
//! interpolation `H(s) = (1 - s) H_I + s H_P`.
//!
//! In the truncated box `H_I` couples `|n>` only to `|n +- e_i>`; `H_P` is
//! diagonal. Raising past a cutoff is dropped (hard wall) and the dropped
//! norm is reported as leakage.

use num_bigint::BigInt;
use num_complex::Complex64;
use num_traits::ToPrimitive;

use crate::diophantine::{DiophantinePolynomial, MultiIndex};
use crate::fock::{QuantumState, TruncatedFockSpace};

/// Largest `D^2` converted to `f64`; every integer up to here is exact.
pub const MAX_EXACT_DIAGONAL: u64 = 1 << 53;

/// Below this dimension operator application stays on the calling thread.
#[cfg(feature = "parallel")]
const PARALLEL_MIN_DIM: usize = 1 << 14;
const CHUNK: usize = 4096;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum HamiltonianError {
    #[error("D({n})^2 = {value} exceeds 2^53 and cannot be represented exactly")]
    DiagonalOverflow { n: MultiIndex, value: BigInt },
    #[error("polynomial has {polynomial} unknowns but the space has {space} modes")]
    ModeMismatch { polynomial: usize, space: usize },
    #[error("state lives in a different space than the operator")]
    SpaceMismatch,
    #[error("schedule point {0} is outside [0, 1]")]
    InvalidSchedule(f64),
}

/// A Hermitian operator on a fixed finite basis, applied without forming a
/// matrix.
pub trait HermitianOperator: Sync {
    fn dim(&self) -> usize;

    /// `out = H x`.
    fn apply_into(&self, x: &[Complex64], out: &mut [Complex64]);

    /// Diagonal entries `H_jj` (real for a Hermitian operator).
    fn diagonal(&self) -> Vec<f64>;
}

/// The ratio `s = t / T` in `[0, 1]`.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub struct SchedulePoint(f64);

impl SchedulePoint {
    pub fn new(s: f64) -> Result<Self, HamiltonianError> {
        if (0.0..=1.0).contains(&s) {
            Ok(SchedulePoint(s))
        } else {
            Err(HamiltonianError::InvalidSchedule(s))
        }
    }

    /// Clamps into `[0, 1]`; for values produced by floating-point time
    /// arithmetic that may overshoot by an ulp.
    pub fn clamped(s: f64) -> Self {
        SchedulePoint(s.clamp(0.0, 1.0))
    }

    pub fn value(self) -> f64 {
        self.0
    }
}

/// Diagonal of `H_P` over `space`: entry `idx(n)` is `D(n)^2`, evaluated in
/// exact integers before the conversion.
pub fn diag_hp(p: &DiophantinePolynomial, space: &TruncatedFockSpace) -> Result<Vec<f64>, HamiltonianError> {
    if p.num_unknowns() != space.num_modes() {
        return Err(HamiltonianError::ModeMismatch {
            polynomial: p.num_unknowns(),
            space: space.num_modes(),
        });
    }
    let limit = BigInt::from(MAX_EXACT_DIAGONAL);
    let mut out = Vec::with_capacity(space.dim());
    let mut err = None;
    space.for_each_index(|_, n| {
        if err.is_some() {
            return;
        }
        let v = p.evaluate_unchecked(n);
        let sq = &v * &v;
        if sq > limit {
            err = Some(HamiltonianError::DiagonalOverflow {
                n: MultiIndex(n.to_vec()),
                value: sq,
            });
            return;
        }
        out.push(sq.to_f64().expect("bounded by 2^53"));
    });
    match err {
        Some(e) => Err(e),
        None => Ok(out),
    }
}

#[derive(Debug, Clone)]
pub struct ProblemHamiltonian {
    polynomial: DiophantinePolynomial,
    space: TruncatedFockSpace,
    diagonal: Vec<f64>,
}

impl ProblemHamiltonian {
    pub fn new(polynomial: DiophantinePolynomial, space: TruncatedFockSpace) -> Result<Self, HamiltonianError> {
        let diagonal = diag_hp(&polynomial, &space)?;
        Ok(ProblemHamiltonian {
            polynomial,
            space,
            diagonal,
        })
    }

    /// Same polynomial on a different (typically grown) space. The diagonal
    /// is recomputed from the polynomial.
    pub fn rebuild(&self, space: TruncatedFockSpace) -> Result<Self, HamiltonianError> {
        Self::new(self.polynomial.clone(), space)
    }

    pub fn polynomial(&self) -> &DiophantinePolynomial {
        &self.polynomial
    }

    pub fn space(&self) -> &TruncatedFockSpace {
        &self.space
    }

    pub fn diagonal(&self) -> &[f64] {
        &self.diagonal
    }

    /// `<psi|H_P|psi>`, unnormalized.
    pub fn expectation(&self, psi: &QuantumState) -> f64 {
        psi.amplitudes()
            .iter()
            .zip(&self.diagonal)
            .map(|(a, d)| d * a.norm_sqr())
            .sum()
    }
}

impl HermitianOperator for ProblemHamiltonian {
    fn dim(&self) -> usize {
        self.space.dim()
    }

    fn apply_into(&self, x: &[Complex64], out: &mut [Complex64]) {
        for ((o, xi), d) in out.iter_mut().zip(x).zip(&self.diagonal) {
            *o = xi * d;
        }
    }

    fn diagonal(&self) -> Vec<f64> {
        self.diagonal.clone()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct InitialHamiltonian {
    alphas: Vec<Complex64>,
}

impl InitialHamiltonian {
    pub fn new(alphas: Vec<Complex64>) -> Self {
        InitialHamiltonian { alphas }
    }

    pub fn alphas(&self) -> &[Complex64] {
        &self.alphas
    }

    /// `sum_i |alpha_i|^2`, the constant part of the diagonal.
    fn offset(&self) -> f64 {
        self.alphas.iter().map(|a| a.norm_sqr()).sum()
    }

    /// Norm of the part of `H_I psi` that the hard wall discards:
    /// `-alpha_i a_i^+` acting on states with `n_i = m_i`.
    pub fn leakage(&self, psi: &QuantumState) -> f64 {
        let space = psi.space();
        let amps = psi.amplitudes();
        let mut total = 0.0;
        for (mode, alpha) in self.alphas.iter().enumerate() {
            let a2 = alpha.norm_sqr();
            if a2 == 0.0 {
                continue;
            }
            let m = space.cutoffs()[mode];
            let raise = (m as f64 + 1.0) * a2;
            let mut mass = 0.0;
            space.for_each_index(|idx, n| {
                if n[mode] == m {
                    mass += amps[idx].norm_sqr();
                }
            });
            total += raise * mass;
        }
        total.sqrt()
    }
}

/// `H(s)` on one fixed space. Borrowed view; cheap to construct per step.
#[derive(Debug, Clone, Copy)]
pub struct InterpolatedHamiltonian<'a> {
    s: f64,
    hp: &'a ProblemHamiltonian,
    hi: &'a InitialHamiltonian,
}

impl<'a> InterpolatedHamiltonian<'a> {
    pub fn new(
        s: SchedulePoint,
        hp: &'a ProblemHamiltonian,
        hi: &'a InitialHamiltonian,
    ) -> Result<Self, HamiltonianError> {
        if hp.space.num_modes() != hi.alphas.len() {
            return Err(HamiltonianError::ModeMismatch {
                polynomial: hp.space.num_modes(),
                space: hi.alphas.len(),
            });
        }
        Ok(InterpolatedHamiltonian { s: s.value(), hp, hi })
    }

    pub fn schedule(&self) -> f64 {
        self.s
    }

    pub fn space(&self) -> &TruncatedFockSpace {
        &self.hp.space
    }

    /// Leakage of `(1 - s) H_I` at the hard wall.
    pub fn leakage(&self, psi: &QuantumState) -> f64 {
        (1.0 - self.s) * self.hi.leakage(psi)
    }

    /// Computes output entries `start..start + out.len()`.
    fn apply_range(&self, x: &[Complex64], start: usize, out: &mut [Complex64], sqrt: &[f64]) {
        let space = &self.hp.space;
        let cutoffs = space.cutoffs();
        let strides = space.strides();
        let k = cutoffs.len();
        let wi = 1.0 - self.s;
        let wp = self.s;
        let offset = self.hi.offset();
        let alphas = &self.hi.alphas;
        let d = &self.hp.diagonal;

        let mut n: Vec<u32> = (0..k).map(|mode| space.occupation(start, mode)).collect();
        let mut total: u64 = n.iter().map(|&a| a as u64).sum();
        for (off, o) in out.iter_mut().enumerate() {
            let j = start + off;
            let xj = x[j];
            let mut hi = xj * (total as f64 + offset);
            if wi != 0.0 {
                for mode in 0..k {
                    let alpha = alphas[mode];
                    let nm = n[mode] as usize;
                    if nm > 0 {
                        hi -= alpha * sqrt[nm] * x[j - strides[mode]];
                    }
                    if (nm as u32) < cutoffs[mode] {
                        hi -= alpha.conj() * sqrt[nm + 1] * x[j + strides[mode]];
                    }
                }
            }
            *o = hi * wi + xj * (wp * d[j]);

            for mode in 0..k {
                if n[mode] < cutoffs[mode] {
                    n[mode] += 1;
                    total += 1;
                    break;
                }
                total -= n[mode] as u64;
                n[mode] = 0;
            }
        }
    }

    fn sqrt_table(&self) -> Vec<f64> {
        let max = self.hp.space.cutoffs().iter().copied().max().unwrap_or(0) as usize;
        (0..=max + 1).map(|k| (k as f64).sqrt()).collect()
    }

    /// Single-threaded application.
    pub fn apply_sequential(&self, x: &[Complex64], out: &mut [Complex64]) {
        assert_eq!(x.len(), self.dim());
        assert_eq!(out.len(), self.dim());
        let sqrt = self.sqrt_table();
        for (c, chunk) in out.chunks_mut(CHUNK).enumerate() {
            self.apply_range(x, c * CHUNK, chunk, &sqrt);
        }
    }

    /// Application split over rayon workers by output block.
    #[cfg(feature = "parallel")]
    pub fn apply_parallel(&self, x: &[Complex64], out: &mut [Complex64]) {
        use rayon::prelude::*;
        assert_eq!(x.len(), self.dim());
        assert_eq!(out.len(), self.dim());
        let sqrt = self.sqrt_table();
        out.par_chunks_mut(CHUNK)
            .enumerate()
            .for_each(|(c, chunk)| self.apply_range(x, c * CHUNK, chunk, &sqrt));
    }

    pub fn apply(&self, psi: &QuantumState) -> Result<QuantumState, HamiltonianError> {
        if psi.space() != self.space() {
            return Err(HamiltonianError::SpaceMismatch);
        }
        let mut out = vec![Complex64::new(0.0, 0.0); self.dim()];
        self.apply_into(psi.amplitudes(), &mut out);
        Ok(QuantumState::from_parts_unchecked(self.space().clone(), out))
    }
}

impl HermitianOperator for InterpolatedHamiltonian<'_> {
    fn dim(&self) -> usize {
        self.hp.space.dim()
    }

    fn apply_into(&self, x: &[Complex64], out: &mut [Complex64]) {
        #[cfg(feature = "parallel")]
        if self.dim() >= PARALLEL_MIN_DIM {
            return self.apply_parallel(x, out);
        }
        self.apply_sequential(x, out)
    }

    fn diagonal(&self) -> Vec<f64> {
        let offset = self.hi.offset();
        let mut out = Vec::with_capacity(self.dim());
        self.hp.space.for_each_index(|idx, n| {
            let total: u64 = n.iter().map(|&a| a as u64).sum();
            out.push((1.0 - self.s) * (total as f64 + offset) + self.s * self.hp.diagonal[idx]);
        });
        out
    }
}

/// `H_I psi` together with the leakage norm dropped at the truncation wall.
pub fn apply_hi(alphas: &[Complex64], psi: &QuantumState) -> Result<(QuantumState, f64), HamiltonianError> {
    if alphas.len() != psi.space().num_modes() {
        return Err(HamiltonianError::ModeMismatch {
            polynomial: alphas.len(),
            space: psi.space().num_modes(),
        });
    }
    let hi = InitialHamiltonian::new(alphas.to_vec());
    // H_P does not contribute at s = 0; a zero diagonal stands in for it.
    let hp = ProblemHamiltonian {
        polynomial: DiophantinePolynomial::from_terms(
            (0..alphas.len()).map(|i| format!("x{i}")).collect(),
            std::iter::empty(),
        ),
        space: psi.space().clone(),
        diagonal: vec![0.0; psi.space().dim()],
    };
    let h = InterpolatedHamiltonian::new(SchedulePoint(0.0), &hp, &hi)?;
    let out = h.apply(psi)?;
    Ok((out, hi.leakage(psi)))
}

/// `H(s) psi = (1 - s) H_I psi + s H_P psi`.
pub fn apply_h(
    s: SchedulePoint,
    hp: &ProblemHamiltonian,
    hi: &InitialHamiltonian,
    psi: &QuantumState,
) -> Result<QuantumState, HamiltonianError> {
    InterpolatedHamiltonian::new(s, hp, hi)?.apply(psi)
}

/// Assembles the dense matrix of any operator column by column. Test and
/// oracle use only.
pub fn assemble_columns<H: HermitianOperator + ?Sized>(h: &H) -> Vec<Vec<Complex64>> {
    let dim = h.dim();
    let mut e = vec![Complex64::new(0.0, 0.0); dim];
    let mut cols = Vec::with_capacity(dim);
    for j in 0..dim {
        e[j] = Complex64::new(1.0, 0.0);
        let mut col = vec![Complex64::new(0.0, 0.0); dim];
        h.apply_into(&e, &mut col);
        cols.push(col);
        e[j] = Complex64::new(0.0, 0.0);
    }
    cols
}
