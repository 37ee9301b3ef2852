//! Dense exact-diagonalization oracle for small truncations.
//!
//! Everything here builds `H(s)` as an explicit matrix from single-mode
//! ladder matrices and Kronecker products, independently of the
//! matrix-free kernels in [`crate::hamiltonian`].

use std::io::{self, Write};

use nalgebra::{DMatrix, DVector};
use num_bigint::BigInt;
use num_complex::Complex64;
use num_traits::ToPrimitive;

use crate::diophantine::DiophantinePolynomial;
use crate::fock::{QuantumState, TruncatedFockSpace};
use crate::hamiltonian::HermitianOperator;
use crate::par;

pub const DEFAULT_ORACLE_CAP: usize = 4096;
/// Number of tracked eigenvalues in a gap profile.
pub const DEFAULT_LEVELS: usize = 4;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum SpectralError {
    #[error("dimension {dim} exceeds the dense oracle cap of {cap}")]
    CapExceeded { dim: usize, cap: usize },
    #[error("polynomial has {polynomial} unknowns, {alphas} displacements, space has {space} modes")]
    ModeMismatch { polynomial: usize, alphas: usize, space: usize },
    #[error("D^2 = {0} does not fit in f64")]
    Overflow(BigInt),
    #[error("eigensolver produced a non-finite eigenvalue at s = {s}")]
    EigenFailed { s: f64 },
    #[error("schedule point {0} is outside [0, 1]")]
    InvalidSchedule(f64),
}

fn c(re: f64) -> Complex64 {
    Complex64::new(re, 0.0)
}

fn check(
    p: &DiophantinePolynomial,
    alphas: &[Complex64],
    space: &TruncatedFockSpace,
    cap: usize,
) -> Result<(), SpectralError> {
    if p.num_unknowns() != space.num_modes() || alphas.len() != space.num_modes() {
        return Err(SpectralError::ModeMismatch {
            polynomial: p.num_unknowns(),
            alphas: alphas.len(),
            space: space.num_modes(),
        });
    }
    if space.dim() > cap {
        return Err(SpectralError::CapExceeded { dim: space.dim(), cap });
    }
    Ok(())
}

/// `(a^+ - conj(alpha)) (a - alpha)` on `{|0>, ..., |m>}` by matrix product.
fn single_mode_hi(alpha: Complex64, m: u32) -> DMatrix<Complex64> {
    let d = m as usize + 1;
    let mut a = DMatrix::<Complex64>::zeros(d, d);
    for n in 1..d {
        a[(n - 1, n)] = c((n as f64).sqrt());
    }
    let id = DMatrix::<Complex64>::identity(d, d);
    let lower = &a - &id * alpha;
    let raise = a.adjoint() - &id * alpha.conj();
    raise * lower
}

/// `I (x) ... (x) op (x) ... (x) I` with mode 0 as the fastest index, i.e.
/// the last Kronecker factor.
fn embed(op: &DMatrix<Complex64>, mode: usize, cutoffs: &[u32]) -> DMatrix<Complex64> {
    let mut out = DMatrix::<Complex64>::identity(1, 1);
    for (i, &m) in cutoffs.iter().enumerate().rev() {
        let factor = if i == mode {
            op.clone()
        } else {
            let d = m as usize + 1;
            DMatrix::identity(d, d)
        };
        out = out.kronecker(&factor);
    }
    out
}

/// Dense `H_I`.
pub fn dense_hi(alphas: &[Complex64], space: &TruncatedFockSpace) -> DMatrix<Complex64> {
    let dim = space.dim();
    let mut h = DMatrix::<Complex64>::zeros(dim, dim);
    for (mode, (&alpha, &m)) in alphas.iter().zip(space.cutoffs()).enumerate() {
        h += embed(&single_mode_hi(alpha, m), mode, space.cutoffs());
    }
    h
}

/// Dense diagonal of `H_P`.
pub fn dense_hp_diagonal(p: &DiophantinePolynomial, space: &TruncatedFockSpace) -> Result<Vec<f64>, SpectralError> {
    (0..space.dim())
        .map(|i| {
            let d = p.evaluate(&space.multi_index(i)).expect("mode count checked");
            let sq = &d * &d;
            sq.to_f64()
                .filter(|v| v.is_finite())
                .ok_or(SpectralError::Overflow(sq))
        })
        .collect()
}

/// Dense `H(s) = (1 - s) H_I + s H_P`.
pub fn dense_h(
    s: f64,
    p: &DiophantinePolynomial,
    alphas: &[Complex64],
    space: &TruncatedFockSpace,
    cap: usize,
) -> Result<DMatrix<Complex64>, SpectralError> {
    check(p, alphas, space, cap)?;
    if !(0.0..=1.0).contains(&s) {
        return Err(SpectralError::InvalidSchedule(s));
    }
    let mut h = dense_hi(alphas, space) * c(1.0 - s);
    for (i, d) in dense_hp_diagonal(p, space)?.into_iter().enumerate() {
        h[(i, i)] += c(s * d);
    }
    Ok(h)
}

/// Eigenvalues ascending with matching eigenvector columns.
pub fn hermitian_eigen(h: &DMatrix<Complex64>) -> (Vec<f64>, DMatrix<Complex64>) {
    let eig = h.clone().symmetric_eigen();
    let mut order: Vec<usize> = (0..eig.eigenvalues.len()).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let values = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let vectors = DMatrix::from_fn(h.nrows(), order.len(), |r, k| eig.eigenvectors[(r, order[k])]);
    (values, vectors)
}

/// `exp(-i H dt)` through the eigendecomposition.
pub fn propagator(h: &DMatrix<Complex64>, dt: f64) -> DMatrix<Complex64> {
    let (values, vectors) = hermitian_eigen(h);
    let phases = DVector::from_iterator(
        values.len(),
        values.iter().map(|&e| Complex64::from_polar(1.0, -e * dt)),
    );
    let scaled = DMatrix::from_fn(vectors.nrows(), vectors.ncols(), |r, k| vectors[(r, k)] * phases[k]);
    scaled * vectors.adjoint()
}

/// Applies `exp(-i H(s) dt)` segment by segment.
pub fn exact_propagate(
    psi0: &QuantumState,
    p: &DiophantinePolynomial,
    alphas: &[Complex64],
    schedule: &[(f64, f64)],
    cap: usize,
) -> Result<QuantumState, SpectralError> {
    let space = psi0.space();
    check(p, alphas, space, cap)?;
    let hi = dense_hi(alphas, space);
    let hp = dense_hp_diagonal(p, space)?;
    let mut psi = DVector::from_column_slice(psi0.amplitudes());
    let mut cached: Option<(f64, f64, DMatrix<Complex64>)> = None;
    for &(s, dt) in schedule {
        if !(0.0..=1.0).contains(&s) {
            return Err(SpectralError::InvalidSchedule(s));
        }
        let reuse = matches!(&cached, Some((cs, cdt, _)) if *cs == s && *cdt == dt);
        if !reuse {
            let mut h = &hi * c(1.0 - s);
            for (i, d) in hp.iter().enumerate() {
                h[(i, i)] += c(s * d);
            }
            cached = Some((s, dt, propagator(&h, dt)));
        }
        let u = &cached.as_ref().expect("just set").2;
        psi = u * psi;
    }
    Ok(QuantumState::new(space.clone(), psi.iter().copied().collect()).expect("dimension preserved"))
}

/// Wraps a dense Hermitian matrix as a [`HermitianOperator`].
#[derive(Debug, Clone)]
pub struct DenseOperator(pub DMatrix<Complex64>);

impl HermitianOperator for DenseOperator {
    fn dim(&self) -> usize {
        self.0.nrows()
    }

    fn apply_into(&self, x: &[Complex64], out: &mut [Complex64]) {
        let n = self.dim();
        for (r, o) in out.iter_mut().enumerate().take(n) {
            let mut acc = Complex64::new(0.0, 0.0);
            for (k, xk) in x.iter().enumerate() {
                acc += self.0[(r, k)] * xk;
            }
            *o = acc;
        }
    }

    fn diagonal(&self) -> Vec<f64> {
        (0..self.dim()).map(|i| self.0[(i, i)].re).collect()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GapProfile {
    pub s_values: Vec<f64>,
    /// Lowest eigenvalues per grid point, ascending.
    pub eigenvalues: Vec<Vec<f64>>,
    /// `(s*, gap*)`: smallest `E1 - E0` over interior grid points
    /// (`0 < s < 1`), or over all points if there are no interior ones.
    pub min_gap: (f64, f64),
}

impl GapProfile {
    pub fn gaps(&self) -> Vec<f64> {
        self.eigenvalues
            .iter()
            .map(|e| if e.len() > 1 { e[1] - e[0] } else { f64::INFINITY })
            .collect()
    }

    /// Whether the ground level at grid point `k` is degenerate, using the
    /// threshold `1e-9 * max(1, |E0|)`.
    pub fn is_degenerate(&self, k: usize) -> bool {
        let e = &self.eigenvalues[k];
        e.len() > 1 && e[1] - e[0] < 1e-9 * e[0].abs().max(1.0)
    }

    /// CSV with header `s,E0,E1,...`.
    pub fn write_csv<W: Write>(&self, mut w: W) -> io::Result<()> {
        let levels = self.eigenvalues.first().map_or(0, Vec::len);
        let header: Vec<String> = std::iter::once("s".to_string())
            .chain((0..levels).map(|l| format!("E{l}")))
            .collect();
        writeln!(w, "{}", header.join(","))?;
        for (s, e) in self.s_values.iter().zip(&self.eigenvalues) {
            let row: Vec<String> = std::iter::once(format!("{s}"))
                .chain(e.iter().map(|v| format!("{v:.12e}")))
                .collect();
            writeln!(w, "{}", row.join(","))?;
        }
        Ok(())
    }
}

/// `points` evenly spaced values covering `[0, 1]`.
pub fn uniform_grid(points: usize) -> Vec<f64> {
    match points {
        0 => Vec::new(),
        1 => vec![0.5],
        _ => (0..points).map(|k| k as f64 / (points - 1) as f64).collect(),
    }
}

/// Lowest `levels` eigenvalues of `H(s)` at each grid point, diagonalized
/// independently (in parallel when `jobs != 1`).
pub fn gap_profile(
    p: &DiophantinePolynomial,
    alphas: &[Complex64],
    space: &TruncatedFockSpace,
    grid: &[f64],
    levels: usize,
    cap: usize,
    jobs: usize,
) -> Result<GapProfile, SpectralError> {
    check(p, alphas, space, cap)?;
    if let Some(&bad) = grid.iter().find(|s| !(0.0..=1.0).contains(*s)) {
        return Err(SpectralError::InvalidSchedule(bad));
    }
    let hi = dense_hi(alphas, space);
    let hp = dense_hp_diagonal(p, space)?;
    let rows = par::map_indexed(grid.len(), jobs, |k| {
        let s = grid[k];
        let mut h = &hi * c(1.0 - s);
        for (i, d) in hp.iter().enumerate() {
            h[(i, i)] += c(s * d);
        }
        let mut values: Vec<f64> = h.symmetric_eigenvalues().iter().copied().collect();
        if values.iter().any(|v| !v.is_finite()) {
            return Err(SpectralError::EigenFailed { s });
        }
        values.sort_by(f64::total_cmp);
        values.truncate(levels.max(2));
        Ok(values)
    })
    .into_iter()
    .collect::<Result<Vec<_>, _>>()?;

    let interior: Vec<usize> = (0..grid.len()).filter(|&k| grid[k] > 0.0 && grid[k] < 1.0).collect();
    let candidates: Vec<usize> = if interior.is_empty() { (0..grid.len()).collect() } else { interior };
    let min_gap = candidates
        .iter()
        .map(|&k| {
            let e = &rows[k];
            (grid[k], if e.len() > 1 { e[1] - e[0] } else { f64::INFINITY })
        })
        .min_by(|a, b| a.1.total_cmp(&b.1))
        .unwrap_or((f64::NAN, f64::NAN));

    Ok(GapProfile {
        s_values: grid.to_vec(),
        eigenvalues: rows,
        min_gap,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::diophantine::parse;
    use approx::assert_abs_diff_eq;

    fn space(m: &[u32]) -> TruncatedFockSpace {
        TruncatedFockSpace::new(m.to_vec()).unwrap()
    }

    #[test]
    fn endpoint_s1_is_diagonal() {
        let p = parse("x*y - 2").unwrap();
        let sp = space(&[2, 3]);
        let h = dense_h(1.0, &p, &[c(2.0), c(1.0)], &sp, DEFAULT_ORACLE_CAP).unwrap();
        for i in 0..sp.dim() {
            for j in 0..sp.dim() {
                if i != j {
                    assert_eq!(h[(i, j)], c(0.0));
                }
            }
            let n = sp.multi_index(i);
            let d = (n.0[0] * n.0[1]) as f64 - 2.0;
            assert_eq!(h[(i, i)], c(d * d));
        }
    }

    #[test]
    fn hand_built_s0_tridiagonal() {
        let p = parse("x").unwrap();
        let h = dense_h(0.0, &p, &[c(2.0)], &space(&[2]), DEFAULT_ORACLE_CAP).unwrap();
        let s2 = 2f64.sqrt();
        let expected = DMatrix::from_row_slice(
            3,
            3,
            &[
                c(4.0), c(-2.0), c(0.0),
                c(-2.0), c(5.0), c(-2.0 * s2),
                c(0.0), c(-2.0 * s2), c(6.0),
            ],
        );
        assert!((h - expected).norm() < 1e-14);
    }

    #[test]
    fn hermitian_for_complex_alpha() {
        let p = parse("x + y - 3").unwrap();
        let h = dense_h(
            0.37,
            &p,
            &[Complex64::new(1.0, 0.5), Complex64::new(-0.3, 1.2)],
            &space(&[3, 4]),
            DEFAULT_ORACLE_CAP,
        )
        .unwrap();
        assert!((&h - h.adjoint()).norm() < 1e-12);
    }

    #[test]
    fn cap_is_enforced() {
        let p = parse("x*y").unwrap();
        assert_eq!(
            dense_h(0.5, &p, &[c(1.0), c(1.0)], &space(&[9, 9]), 50),
            Err(SpectralError::CapExceeded { dim: 100, cap: 50 })
        );
    }

    #[test]
    fn s1_spectrum_is_sorted_d_squared() {
        let p = parse("x*y + x + 4*y - 11").unwrap();
        let sp = space(&[5, 4]);
        let h = dense_h(1.0, &p, &[c(2.0), c(2.0)], &sp, DEFAULT_ORACLE_CAP).unwrap();
        let (values, _) = hermitian_eigen(&h);
        let mut expected = dense_hp_diagonal(&p, &sp).unwrap();
        expected.sort_by(f64::total_cmp);
        for (a, b) in values.iter().zip(&expected) {
            assert_abs_diff_eq!(a, b, epsilon = 1e-10 * b.max(1.0));
        }
    }

    #[test]
    fn s0_ground_energy_approaches_zero() {
        let p = parse("x - 1").unwrap();
        let h = dense_h(0.0, &p, &[c(2.0)], &space(&[30]), DEFAULT_ORACLE_CAP).unwrap();
        let (values, _) = hermitian_eigen(&h);
        assert!(values[0].abs() < 1e-8, "E0 = {}", values[0]);
        assert!(values[1] - values[0] > 0.99);
    }

    #[test]
    fn gap_at_s1_for_x_minus_20() {
        let p = parse("x - 20").unwrap();
        let prof = gap_profile(&p, &[c(2.0)], &space(&[25]), &[0.0, 0.5, 1.0], 4, DEFAULT_ORACLE_CAP, 1).unwrap();
        let last = &prof.eigenvalues[2];
        assert_abs_diff_eq!(last[0], 0.0, epsilon = 1e-9);
        assert_abs_diff_eq!(last[1], 1.0, epsilon = 1e-9);
        assert_abs_diff_eq!(last[2], 1.0, epsilon = 1e-9);
        assert_abs_diff_eq!(prof.gaps()[2], 1.0, epsilon = 1e-9);
        assert_eq!(prof.min_gap.0, 0.5);
        assert!(!prof.is_degenerate(2));
    }

    #[test]
    fn gap_csv_format() {
        let p = parse("x - 2").unwrap();
        let prof = gap_profile(&p, &[c(1.0)], &space(&[4]), &uniform_grid(3), 2, DEFAULT_ORACLE_CAP, 1).unwrap();
        let mut buf = Vec::new();
        prof.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], "s,E0,E1");
        assert_eq!(lines.len(), 4);
        assert!(lines[1].starts_with("0,"));
        assert!(lines[3].starts_with("1,"));
    }

    #[test]
    fn exact_propagate_diagonal_and_zero_time() {
        let p = parse("x - 3").unwrap();
        let sp = space(&[5]);
        let amps: Vec<Complex64> = (0..6).map(|i| Complex64::new(1.0 + i as f64, 0.5)).collect();
        let mut psi = QuantumState::new(sp.clone(), amps).unwrap();
        psi.normalize();
        let out = exact_propagate(&psi, &p, &[c(2.0)], &[(1.0, 0.3)], DEFAULT_ORACLE_CAP).unwrap();
        for n in 0..6 {
            let e = ((n as f64) - 3.0).powi(2);
            let expected = psi.amplitudes()[n] * Complex64::from_polar(1.0, -e * 0.3);
            assert_abs_diff_eq!((out.amplitudes()[n] - expected).norm(), 0.0, epsilon = 1e-12);
        }
        let same = exact_propagate(&psi, &p, &[c(2.0)], &[], DEFAULT_ORACLE_CAP).unwrap();
        assert_eq!(same, psi);
        let zero = exact_propagate(&psi, &p, &[c(2.0)], &[(0.4, 0.0)], DEFAULT_ORACLE_CAP).unwrap();
        assert_abs_diff_eq!(zero.fidelity(&psi), 1.0, epsilon = 1e-12);
    }

    #[test]
    fn exact_propagate_is_unitary() {
        let p = parse("x*y - 2").unwrap();
        let sp = space(&[3, 3]);
        let amps: Vec<Complex64> = (0..sp.dim())
            .map(|i| Complex64::new((i as f64).sin(), (2.0 * i as f64).cos()))
            .collect();
        let mut psi = QuantumState::new(sp, amps).unwrap();
        psi.normalize();
        let schedule: Vec<(f64, f64)> = (0..50).map(|k| (k as f64 / 49.0, 0.07)).collect();
        let out = exact_propagate(&psi, &p, &[c(1.5), Complex64::new(0.0, 1.0)], &schedule, DEFAULT_ORACLE_CAP).unwrap();
        assert_abs_diff_eq!(out.norm(), 1.0, epsilon = 1e-12);
    }
}
