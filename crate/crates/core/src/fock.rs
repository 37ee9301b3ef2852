//! Truncated multi-mode Fock spaces and dense states over them.
//!
//! Basis states `|n_1, ..., n_K>` with `0 <= n_i <= m_i` are laid out with
//! mode 1 varying fastest, so the linear index of `n` is
//! `sum_i n_i * prod_{j<i} (m_j + 1)`.

use std::io::{self, BufRead, Write};

use num_complex::Complex64;

use crate::diophantine::MultiIndex;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum FockError {
    #[error("a Fock space needs at least one mode")]
    NoModes,
    #[error("space dimension overflows usize")]
    DimensionOverflow,
    #[error("dimension {dim} exceeds the cap of {cap}")]
    DimensionCap { dim: usize, cap: usize },
    #[error("expected {expected} amplitudes, got {got}")]
    LengthMismatch { expected: usize, got: usize },
    #[error("expected {expected} modes, got {got}")]
    ModeMismatch { expected: usize, got: usize },
    #[error("amplitude {index} is not finite")]
    NonFinite { index: usize },
    #[error("epsilon must lie in (0, 1), got {0}")]
    InvalidEpsilon(f64),
    #[error("mode {mode}: cutoff {cutoff} is below the minimum {required} for the requested epsilon")]
    CutoffTooSmall { mode: usize, cutoff: u32, required: u32 },
    #[error("malformed state dump at line {line}: {message}")]
    Dump { line: usize, message: String },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TruncatedFockSpace {
    cutoffs: Vec<u32>,
    strides: Vec<usize>,
    dim: usize,
}

impl TruncatedFockSpace {
    pub fn new(cutoffs: Vec<u32>) -> Result<Self, FockError> {
        if cutoffs.is_empty() {
            return Err(FockError::NoModes);
        }
        let mut strides = Vec::with_capacity(cutoffs.len());
        let mut dim: usize = 1;
        for &m in &cutoffs {
            strides.push(dim);
            dim = dim
                .checked_mul(m as usize + 1)
                .ok_or(FockError::DimensionOverflow)?;
        }
        Ok(TruncatedFockSpace {
            cutoffs,
            strides,
            dim,
        })
    }

    pub fn cutoffs(&self) -> &[u32] {
        &self.cutoffs
    }

    pub fn strides(&self) -> &[usize] {
        &self.strides
    }

    pub fn num_modes(&self) -> usize {
        self.cutoffs.len()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn contains(&self, n: &[u32]) -> bool {
        n.len() == self.cutoffs.len() && n.iter().zip(&self.cutoffs).all(|(a, m)| a <= m)
    }

    /// `None` when `n` lies outside the box.
    pub fn linear_index(&self, n: &[u32]) -> Option<usize> {
        if !self.contains(n) {
            return None;
        }
        Some(n.iter().zip(&self.strides).map(|(&a, &s)| a as usize * s).sum())
    }

    pub fn multi_index(&self, mut index: usize) -> MultiIndex {
        assert!(index < self.dim, "index {index} out of range for dimension {}", self.dim);
        let mut n = Vec::with_capacity(self.cutoffs.len());
        for &m in &self.cutoffs {
            let width = m as usize + 1;
            n.push((index % width) as u32);
            index /= width;
        }
        MultiIndex(n)
    }

    /// Occupation of `mode` at linear `index`.
    #[inline]
    pub fn occupation(&self, index: usize, mode: usize) -> u32 {
        ((index / self.strides[mode]) % (self.cutoffs[mode] as usize + 1)) as u32
    }

    /// Visits every basis state in linear-index order.
    pub fn for_each_index(&self, mut f: impl FnMut(usize, &[u32])) {
        let mut n = vec![0u32; self.cutoffs.len()];
        for idx in 0..self.dim {
            f(idx, &n);
            for (a, &m) in n.iter_mut().zip(&self.cutoffs) {
                if *a < m {
                    *a += 1;
                    break;
                }
                *a = 0;
            }
        }
    }

    pub fn grown(&self, delta: &[u32]) -> Result<Self, FockError> {
        if delta.len() != self.cutoffs.len() {
            return Err(FockError::ModeMismatch {
                expected: self.cutoffs.len(),
                got: delta.len(),
            });
        }
        Self::new(
            self.cutoffs
                .iter()
                .zip(delta)
                .map(|(m, d)| m.saturating_add(*d))
                .collect(),
        )
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct QuantumState {
    space: TruncatedFockSpace,
    amplitudes: Vec<Complex64>,
}

impl QuantumState {
    pub fn new(space: TruncatedFockSpace, amplitudes: Vec<Complex64>) -> Result<Self, FockError> {
        if amplitudes.len() != space.dim() {
            return Err(FockError::LengthMismatch {
                expected: space.dim(),
                got: amplitudes.len(),
            });
        }
        if let Some(index) = amplitudes.iter().position(|a| !a.is_finite()) {
            return Err(FockError::NonFinite { index });
        }
        Ok(QuantumState { space, amplitudes })
    }

    pub(crate) fn from_parts_unchecked(space: TruncatedFockSpace, amplitudes: Vec<Complex64>) -> Self {
        debug_assert_eq!(space.dim(), amplitudes.len());
        QuantumState { space, amplitudes }
    }

    pub fn zeros(space: TruncatedFockSpace) -> Self {
        let amplitudes = vec![Complex64::new(0.0, 0.0); space.dim()];
        QuantumState { space, amplitudes }
    }

    /// The number state `|n>`; `None` when `n` is outside the space.
    pub fn basis(space: TruncatedFockSpace, n: &[u32]) -> Option<Self> {
        let idx = space.linear_index(n)?;
        let mut s = Self::zeros(space);
        s.amplitudes[idx] = Complex64::new(1.0, 0.0);
        Some(s)
    }

    pub fn space(&self) -> &TruncatedFockSpace {
        &self.space
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amplitudes
    }

    pub fn amplitudes_mut(&mut self) -> &mut [Complex64] {
        &mut self.amplitudes
    }

    pub fn into_amplitudes(self) -> Vec<Complex64> {
        self.amplitudes
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amplitudes.iter().map(|a| a.norm_sqr()).sum()
    }

    pub fn norm(&self) -> f64 {
        self.norm_sqr().sqrt()
    }

    /// Scales to unit norm and returns the norm before scaling. A zero state
    /// is left unchanged.
    pub fn normalize(&mut self) -> f64 {
        let n = self.norm();
        if n > 0.0 {
            let inv = 1.0 / n;
            for a in &mut self.amplitudes {
                *a *= inv;
            }
        }
        n
    }

    /// `<self|other>`. Panics on mismatched spaces.
    pub fn inner(&self, other: &QuantumState) -> Complex64 {
        assert_eq!(self.space, other.space, "inner product across different spaces");
        self.amplitudes
            .iter()
            .zip(&other.amplitudes)
            .map(|(a, b)| a.conj() * b)
            .sum()
    }

    pub fn fidelity(&self, other: &QuantumState) -> f64 {
        self.inner(other).norm_sqr()
    }

    pub fn probability(&self, n: &[u32]) -> f64 {
        self.space
            .linear_index(n)
            .map_or(0.0, |i| self.amplitudes[i].norm_sqr())
    }

    pub fn probabilities(&self) -> Vec<f64> {
        self.amplitudes.iter().map(|a| a.norm_sqr()).collect()
    }

    /// Embeds the state into a space with cutoffs `m + delta`; new basis
    /// states get zero amplitude.
    pub fn grow(&self, delta: &[u32], max_dim: usize) -> Result<QuantumState, FockError> {
        let space = self.space.grown(delta)?;
        if space.dim() > max_dim {
            return Err(FockError::DimensionCap {
                dim: space.dim(),
                cap: max_dim,
            });
        }
        if space == self.space {
            return Ok(self.clone());
        }
        let mut amplitudes = vec![Complex64::new(0.0, 0.0); space.dim()];
        let old = &self.space;
        // Copy contiguous runs along mode 1.
        let run = old.cutoffs()[0] as usize + 1;
        for start in (0..old.dim()).step_by(run) {
            let mut target = 0;
            for mode in 1..old.num_modes() {
                target += old.occupation(start, mode) as usize * space.strides()[mode];
            }
            amplitudes[target..target + run].copy_from_slice(&self.amplitudes[start..start + run]);
        }
        Ok(QuantumState { space, amplitudes })
    }

    /// Probability on basis states with any `n_i > m_i - w`.
    ///
    /// `w = 0` selects nothing; a `w` larger than some cutoff selects
    /// everything.
    pub fn boundary_mass(&self, w: u32) -> f64 {
        if w == 0 {
            return 0.0;
        }
        let mut mass = 0.0;
        self.space.for_each_index(|idx, n| {
            let on_shell = n
                .iter()
                .zip(self.space.cutoffs())
                .any(|(&a, &m)| a as i64 > m as i64 - w as i64);
            if on_shell {
                mass += self.amplitudes[idx].norm_sqr();
            }
        });
        mass
    }

    /// Per-mode version of [`boundary_mass`](Self::boundary_mass): entry `i`
    /// is the probability with `n_i > m_i - w`.
    pub fn mode_boundary_mass(&self, w: u32) -> Vec<f64> {
        let k = self.space.num_modes();
        let mut mass = vec![0.0; k];
        if w == 0 {
            return mass;
        }
        self.space.for_each_index(|idx, n| {
            let p = self.amplitudes[idx].norm_sqr();
            for i in 0..k {
                if n[i] as i64 > self.space.cutoffs()[i] as i64 - w as i64 {
                    mass[i] += p;
                }
            }
        });
        mass
    }

    /// `<N_i>` for each mode, unnormalized (divide by `norm_sqr` if needed).
    pub fn mean_occupations(&self) -> Vec<f64> {
        let mut out = vec![0.0; self.space.num_modes()];
        self.space.for_each_index(|idx, n| {
            let p = self.amplitudes[idx].norm_sqr();
            for (o, &a) in out.iter_mut().zip(n) {
                *o += a as f64 * p;
            }
        });
        out
    }

    /// One line per basis state: `n1 n2 ... nK re im`.
    pub fn write_dump<W: Write>(&self, mut w: W) -> io::Result<()> {
        let mut err = Ok(());
        self.space.for_each_index(|idx, n| {
            if err.is_err() {
                return;
            }
            let a = self.amplitudes[idx];
            let mut line = String::new();
            for x in n {
                line.push_str(&x.to_string());
                line.push(' ');
            }
            err = writeln!(w, "{line}{:e} {:e}", a.re, a.im);
        });
        err
    }

    /// Reads a dump back. The space is the smallest box containing every
    /// listed basis state; unlisted states get zero amplitude.
    pub fn read_dump<R: BufRead>(r: R) -> Result<QuantumState, FockError> {
        let mut entries: Vec<(Vec<u32>, Complex64)> = Vec::new();
        let mut k = None;
        for (lineno, line) in r.lines().enumerate() {
            let bad = |message: String| FockError::Dump {
                line: lineno + 1,
                message,
            };
            let line = line.map_err(|e| bad(e.to_string()))?;
            let fields: Vec<&str> = line.split_whitespace().collect();
            if fields.is_empty() {
                continue;
            }
            if fields.len() < 3 {
                return Err(bad("expected `n1 ... nK re im`".into()));
            }
            let modes = fields.len() - 2;
            if *k.get_or_insert(modes) != modes {
                return Err(bad("inconsistent number of modes".into()));
            }
            let n = fields[..modes]
                .iter()
                .map(|f| f.parse::<u32>().map_err(|e| bad(e.to_string())))
                .collect::<Result<Vec<_>, _>>()?;
            let re: f64 = fields[modes].parse().map_err(|e: std::num::ParseFloatError| bad(e.to_string()))?;
            let im: f64 = fields[modes + 1].parse().map_err(|e: std::num::ParseFloatError| bad(e.to_string()))?;
            entries.push((n, Complex64::new(re, im)));
        }
        let k = k.ok_or(FockError::NoModes)?;
        let mut cutoffs = vec![0u32; k];
        for (n, _) in &entries {
            for (c, &a) in cutoffs.iter_mut().zip(n) {
                *c = (*c).max(a);
            }
        }
        let space = TruncatedFockSpace::new(cutoffs)?;
        let mut amplitudes = vec![Complex64::new(0.0, 0.0); space.dim()];
        for (n, a) in entries {
            amplitudes[space.linear_index(&n).expect("inside bounding box")] = a;
        }
        QuantumState::new(space, amplitudes)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CoherentParams {
    alphas: Vec<Complex64>,
    epsilon: f64,
}

impl CoherentParams {
    pub fn new(alphas: Vec<Complex64>, epsilon: f64) -> Result<Self, FockError> {
        if alphas.is_empty() {
            return Err(FockError::NoModes);
        }
        if !(epsilon > 0.0 && epsilon < 1.0) {
            return Err(FockError::InvalidEpsilon(epsilon));
        }
        Ok(CoherentParams { alphas, epsilon })
    }

    pub fn alphas(&self) -> &[Complex64] {
        &self.alphas
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    /// Per-mode [`min_truncation`].
    pub fn min_cutoffs(&self) -> Vec<u32> {
        self.alphas
            .iter()
            .map(|&a| min_truncation(a, self.epsilon))
            .collect()
    }
}

/// Poisson weights `e^{-lambda} lambda^n / n!` for `n = 0..len`, evaluated in
/// log space so large `lambda` neither underflows nor overflows.
fn poisson_weights(lambda: f64, len: usize) -> Vec<f64> {
    if lambda == 0.0 {
        let mut w = vec![0.0; len];
        if len > 0 {
            w[0] = 1.0;
        }
        return w;
    }
    let ln_lambda = lambda.ln();
    let mut ln_fact = 0.0;
    (0..len)
        .map(|n| {
            if n > 0 {
                ln_fact += (n as f64).ln();
            }
            (-lambda + n as f64 * ln_lambda - ln_fact).exp()
        })
        .collect()
}

/// Norm deficit `|1 - sqrt(<alpha;m|alpha;m>)|` of the coherent state
/// truncated at occupation `m`.
pub fn truncation_deficit(alpha: Complex64, m: u32) -> f64 {
    let tail = poisson_tail(alpha.norm_sqr(), m);
    tail / (1.0 + (1.0 - tail).max(0.0).sqrt())
}

/// `P(N > m)` for `N ~ Poisson(lambda)`, summed directly over the tail so
/// small tails keep full relative precision.
fn poisson_tail(lambda: f64, m: u32) -> f64 {
    if lambda == 0.0 {
        return 0.0;
    }
    let upper = (lambda + 40.0 * lambda.sqrt() + 60.0).max(m as f64 + 60.0) as usize;
    let w = poisson_weights(lambda, upper + 1);
    let start = m as usize + 1;
    // Sum smallest terms first.
    w[start.min(w.len())..].iter().rev().sum()
}

/// Smallest cutoff `m` whose truncated coherent state has norm deficit at
/// most `epsilon`.
pub fn min_truncation(alpha: Complex64, epsilon: f64) -> u32 {
    let lambda = alpha.norm_sqr();
    if lambda == 0.0 {
        return 0;
    }
    let upper = (lambda + 40.0 * lambda.sqrt() + 60.0) as usize;
    let w = poisson_weights(lambda, upper + 1);
    // tails[m] = P(N > m)
    let mut tails = vec![0.0; w.len()];
    let mut acc = 0.0;
    for m in (0..w.len()).rev() {
        tails[m] = acc;
        acc += w[m];
    }
    for (m, &tail) in tails.iter().enumerate() {
        let deficit = tail / (1.0 + (1.0 - tail).max(0.0).sqrt());
        if deficit <= epsilon {
            return m as u32;
        }
    }
    upper as u32
}

/// Single-mode amplitudes `e^{-|a|^2/2} a^n / sqrt(n!)` for `n = 0..=m`.
fn coherent_amplitudes(alpha: Complex64, m: u32) -> Vec<Complex64> {
    let len = m as usize + 1;
    let r = alpha.norm();
    if r == 0.0 {
        let mut v = vec![Complex64::new(0.0, 0.0); len];
        v[0] = Complex64::new(1.0, 0.0);
        return v;
    }
    let theta = alpha.arg();
    let ln_r = r.ln();
    let mut half_ln_fact = 0.0;
    (0..len)
        .map(|n| {
            if n > 0 {
                half_ln_fact += 0.5 * (n as f64).ln();
            }
            let mag = (-0.5 * r * r + n as f64 * ln_r - half_ln_fact).exp();
            Complex64::from_polar(mag, n as f64 * theta)
        })
        .collect()
}

/// The product coherent state over `space`, renormalized to unit norm.
///
/// Fails if any cutoff is below [`min_truncation`] for the requested epsilon.
pub fn coherent_state(params: &CoherentParams, space: &TruncatedFockSpace) -> Result<QuantumState, FockError> {
    if params.alphas.len() != space.num_modes() {
        return Err(FockError::ModeMismatch {
            expected: space.num_modes(),
            got: params.alphas.len(),
        });
    }
    for (mode, (&alpha, &cutoff)) in params.alphas.iter().zip(space.cutoffs()).enumerate() {
        let required = min_truncation(alpha, params.epsilon);
        if cutoff < required {
            return Err(FockError::CutoffTooSmall {
                mode,
                cutoff,
                required,
            });
        }
    }
    let factors: Vec<Vec<Complex64>> = params
        .alphas
        .iter()
        .zip(space.cutoffs())
        .map(|(&a, &m)| coherent_amplitudes(a, m))
        .collect();
    let mut amplitudes = Vec::with_capacity(space.dim());
    space.for_each_index(|_, n| {
        let mut a = Complex64::new(1.0, 0.0);
        for (f, &k) in factors.iter().zip(n) {
            a *= f[k as usize];
        }
        amplitudes.push(a);
    });
    let mut state = QuantumState::from_parts_unchecked(space.clone(), amplitudes);
    let before = state.normalize();
    log::debug!(
        "truncated coherent state at cutoffs {:?}: norm {before:.12}, deficit {:.3e}",
        space.cutoffs(),
        1.0 - before
    );
    Ok(state)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    /// Poisson pmf by the textbook formula, for small n only.
    fn naive_poisson(lambda: f64, n: u32) -> f64 {
        let fact: f64 = (1..=n).map(|k| k as f64).product();
        (-lambda).exp() * lambda.powi(n as i32) / fact
    }

    #[test]
    fn truncation_for_alpha_two() {
        // Deficit at m is (1 - S_m) / (1 + sqrt(S_m)), S_m = P(N <= m).
        let s = |m: u32| (0..=m).map(|n| naive_poisson(4.0, n)).sum::<f64>();
        let deficit = |m: u32| 1.0 - s(m).sqrt();
        assert!(deficit(8) > 1e-2);
        assert!(deficit(9) <= 1e-2);
        assert_abs_diff_eq!(deficit(8), 0.0108, epsilon = 1e-4);
        assert_abs_diff_eq!(deficit(9), 0.0041, epsilon = 1e-4);
        assert_eq!(min_truncation(c(2.0), 1e-2), 9);
        assert_eq!(min_truncation(c(2.0), 1e-3), 11);
        assert!(deficit(10) > 1e-3 && deficit(11) <= 1e-3);
        assert_abs_diff_eq!(truncation_deficit(c(2.0), 9), deficit(9), epsilon = 1e-14);
    }

    #[test]
    fn truncation_for_vacuum() {
        for eps in [0.5, 1e-2, 1e-12] {
            assert_eq!(min_truncation(c(0.0), eps), 0);
        }
    }

    #[test]
    fn truncation_depends_on_modulus_only() {
        let a = Complex64::from_polar(2.0, 1.1);
        assert_eq!(min_truncation(a, 1e-3), min_truncation(c(2.0), 1e-3));
    }

    #[test]
    fn large_alpha_does_not_underflow() {
        let m = min_truncation(c(30.0), 1e-6);
        // Poisson(900): mean 900, sd 30.
        assert!(m > 900 && m < 900 + 10 * 30, "m = {m}");
        let space = TruncatedFockSpace::new(vec![m]).unwrap();
        let psi = coherent_state(&CoherentParams::new(vec![c(30.0)], 1e-6).unwrap(), &space).unwrap();
        assert_abs_diff_eq!(psi.norm(), 1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(psi.mean_occupations()[0], 900.0, epsilon = 0.5);
    }

    #[test]
    fn index_maps_are_inverse() {
        let space = TruncatedFockSpace::new(vec![3, 0, 2, 4]).unwrap();
        assert_eq!(space.dim(), 60);
        for i in 0..space.dim() {
            let n = space.multi_index(i);
            assert_eq!(space.linear_index(n.as_slice()), Some(i));
        }
        let mut seen = 0;
        space.for_each_index(|idx, n| {
            assert_eq!(space.multi_index(idx).as_slice(), n);
            for (mode, &nm) in n.iter().enumerate() {
                assert_eq!(space.occupation(idx, mode), nm);
            }
            seen += 1;
        });
        assert_eq!(seen, space.dim());
        assert_eq!(space.linear_index(&[4, 0, 0, 0]), None);
        assert_eq!(space.linear_index(&[1, 0, 0]), None);
    }

    #[test]
    fn mode_one_varies_fastest() {
        let space = TruncatedFockSpace::new(vec![2, 2]).unwrap();
        assert_eq!(space.multi_index(1).as_slice(), &[1, 0]);
        assert_eq!(space.multi_index(3).as_slice(), &[0, 1]);
    }

    #[test]
    fn coherent_single_mode_alpha_two() {
        let params = CoherentParams::new(vec![c(2.0)], 1e-2).unwrap();
        let space = TruncatedFockSpace::new(vec![9]).unwrap();
        let psi = coherent_state(&params, &space).unwrap();
        let s9: f64 = (0..=9).map(|n| naive_poisson(4.0, n)).sum();
        assert_abs_diff_eq!(s9, 0.99187, epsilon = 1e-5);
        assert_abs_diff_eq!(psi.probability(&[0]), (-4.0f64).exp() / s9, epsilon = 1e-12);
        assert_abs_diff_eq!(psi.probability(&[0]), 0.01846, epsilon = 1e-5);
        let mean: f64 = (0..=9).map(|n| n as f64 * naive_poisson(4.0, n)).sum::<f64>() / s9;
        assert_abs_diff_eq!(psi.mean_occupations()[0], mean, epsilon = 1e-12);
        assert_abs_diff_eq!(mean, 3.94664, epsilon = 1e-5);
        assert!(psi.amplitudes().iter().all(|a| a.re > 0.0 && a.im == 0.0));
        let tail = (naive_poisson(4.0, 8) + naive_poisson(4.0, 9)) / s9;
        assert_abs_diff_eq!(psi.boundary_mass(2), tail, epsilon = 1e-12);
        assert_abs_diff_eq!(tail, 0.04335, epsilon = 1e-5);
    }

    #[test]
    fn coherent_vacuum_is_exact() {
        let params = CoherentParams::new(vec![c(0.0), c(0.0)], 1e-2).unwrap();
        let space = TruncatedFockSpace::new(vec![3, 2]).unwrap();
        let psi = coherent_state(&params, &space).unwrap();
        let expected = QuantumState::basis(space, &[0, 0]).unwrap();
        assert_eq!(psi, expected);
    }

    #[test]
    fn coherent_complex_alpha_phases() {
        let alpha = Complex64::from_polar(1.5, 0.7);
        let params = CoherentParams::new(vec![alpha], 1e-8).unwrap();
        let space = TruncatedFockSpace::new(vec![params.min_cutoffs()[0]]).unwrap();
        let psi = coherent_state(&params, &space).unwrap();
        let a = psi.amplitudes();
        // Adjacent amplitudes relate by alpha / sqrt(n).
        for n in 1..a.len() {
            let ratio = a[n] / a[n - 1];
            assert_abs_diff_eq!((ratio - alpha / (n as f64).sqrt()).norm(), 0.0, epsilon = 1e-12);
        }
    }

    #[test]
    fn coherent_rejects_small_cutoff() {
        let params = CoherentParams::new(vec![c(2.0)], 1e-2).unwrap();
        let space = TruncatedFockSpace::new(vec![8]).unwrap();
        assert_eq!(
            coherent_state(&params, &space),
            Err(FockError::CutoffTooSmall {
                mode: 0,
                cutoff: 8,
                required: 9
            })
        );
        assert!(matches!(CoherentParams::new(vec![c(1.0)], 1.0), Err(FockError::InvalidEpsilon(_))));
        assert!(matches!(CoherentParams::new(vec![c(1.0)], 0.0), Err(FockError::InvalidEpsilon(_))));
    }

    #[test]
    fn boundary_mass_edge_cases() {
        let space = TruncatedFockSpace::new(vec![9, 9]).unwrap();
        let vac = QuantumState::basis(space.clone(), &[0, 0]).unwrap();
        assert_eq!(vac.boundary_mass(1), 0.0);
        let edge = QuantumState::basis(space.clone(), &[9, 0]).unwrap();
        assert_eq!(edge.boundary_mass(1), 1.0);
        assert_eq!(edge.mode_boundary_mass(1), vec![1.0, 0.0]);
        // Shell wider than the box covers everything.
        assert_eq!(vac.boundary_mass(11), 1.0);
        assert_eq!(vac.boundary_mass(0), 0.0);
    }

    #[test]
    fn grow_embeds_and_zero_pads() {
        let space = TruncatedFockSpace::new(vec![2, 1]).unwrap();
        let amps: Vec<_> = (0..space.dim()).map(|i| Complex64::new(i as f64, -(i as f64))).collect();
        let psi = QuantumState::new(space.clone(), amps).unwrap();
        let grown = psi.grow(&[2, 3], usize::MAX).unwrap();
        assert_eq!(grown.space().cutoffs(), &[4, 4]);
        grown.space().for_each_index(|idx, n| {
            let expected = psi.space().linear_index(n).map_or(Complex64::new(0.0, 0.0), |i| psi.amplitudes()[i]);
            assert_eq!(grown.amplitudes()[idx], expected);
        });
        assert_eq!(grown.norm_sqr(), psi.norm_sqr());
        assert_eq!(psi.grow(&[0, 0], usize::MAX).unwrap(), psi);
        assert_eq!(
            psi.grow(&[10, 10], 50),
            Err(FockError::DimensionCap { dim: 13 * 12, cap: 50 })
        );
    }

    #[test]
    fn dump_round_trip() {
        let params = CoherentParams::new(vec![c(1.0), Complex64::new(0.5, -0.5)], 1e-3).unwrap();
        let space = TruncatedFockSpace::new(params.min_cutoffs()).unwrap();
        let psi = coherent_state(&params, &space).unwrap();
        let mut buf = Vec::new();
        psi.write_dump(&mut buf).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert_eq!(text.lines().count(), space.dim());
        assert!(text.lines().next().unwrap().starts_with("0 0 "));
        let back = QuantumState::read_dump(&buf[..]).unwrap();
        assert_eq!(back, psi);
    }
}
