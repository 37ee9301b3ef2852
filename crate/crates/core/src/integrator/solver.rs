//! Krylov solve of `(1 + i dt/2 H) x = b` for Hermitian `H`.
//!
//! The system matrix `A = 1 + i k H` (`k = dt / 2`) is normal but not
//! Hermitian, so plain CG does not apply. We run conjugate gradients on the
//! normal equations (CGLS) of the right-preconditioned system `A P^-1`,
//! with `P = diag(A)`. Since `H_P` is diagonal and usually dominates, the
//! preconditioned operator is close to the identity and converges in a
//! handful of iterations.

use num_complex::Complex64;

use crate::hamiltonian::HermitianOperator;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolveStats {
    pub iterations: usize,
    /// `||A x - b|| / ||b||` at exit.
    pub relative_residual: f64,
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
#[error("linear solve did not converge in {iterations} iterations (relative residual {relative_residual:.3e})")]
pub struct NoConvergence {
    pub iterations: usize,
    pub relative_residual: f64,
}

pub(crate) fn norm(v: &[Complex64]) -> f64 {
    v.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt()
}

/// `out = x + i k H x`, using `out` for `H x` first.
fn apply_system<H: HermitianOperator + ?Sized>(h: &H, k: f64, x: &[Complex64], out: &mut [Complex64]) {
    h.apply_into(x, out);
    let ik = Complex64::new(0.0, k);
    for (o, xi) in out.iter_mut().zip(x) {
        *o = xi + ik * *o;
    }
}

/// Solves `(1 + i dt/2 H) x = rhs` to relative residual `tol`.
///
/// Starts from the diagonal solution `P^-1 rhs`, which is exact when `H`
/// is diagonal. A negative `dt` is allowed and solves the reverse-time
/// system.
pub fn solve_linear<H: HermitianOperator + ?Sized>(
    h: &H,
    rhs: &[Complex64],
    dt: f64,
    tol: f64,
    max_iterations: usize,
) -> Result<(Vec<Complex64>, SolveStats), NoConvergence> {
    let dim = h.dim();
    assert_eq!(rhs.len(), dim, "right-hand side has the wrong length");
    let k = 0.5 * dt;
    let zero = Complex64::new(0.0, 0.0);

    let b_norm = norm(rhs);
    if b_norm == 0.0 {
        return Ok((
            vec![zero; dim],
            SolveStats {
                iterations: 0,
                relative_residual: 0.0,
            },
        ));
    }

    // P^-1 as a vector.
    let inv_p: Vec<Complex64> = h
        .diagonal()
        .iter()
        .map(|&d| Complex64::new(1.0, k * d).inv())
        .collect();

    let mut x: Vec<Complex64> = rhs.iter().zip(&inv_p).map(|(b, p)| b * p).collect();
    let mut r = vec![zero; dim];
    apply_system(h, k, &x, &mut r);
    for (ri, bi) in r.iter_mut().zip(rhs) {
        *ri = bi - *ri;
    }
    let mut r_norm = norm(&r);
    let target = tol * b_norm;
    if r_norm <= target {
        return Ok((
            x,
            SolveStats {
                iterations: 0,
                relative_residual: r_norm / b_norm,
            },
        ));
    }

    let mut work = vec![zero; dim];
    // s = P^-H A^H r, with A^H v = v - i k H v.
    let mut s = vec![zero; dim];
    let adjoint = |r: &[Complex64], s: &mut [Complex64], work: &mut [Complex64]| {
        apply_system(h, -k, r, work);
        for ((si, wi), p) in s.iter_mut().zip(work.iter()).zip(&inv_p) {
            *si = p.conj() * wi;
        }
    };
    adjoint(&r, &mut s, &mut work);
    let mut p = s.clone();
    let mut gamma: f64 = s.iter().map(|a| a.norm_sqr()).sum();
    let mut t = vec![zero; dim];
    let mut q = vec![zero; dim];

    for iteration in 1..=max_iterations {
        for ((ti, pi), ip) in t.iter_mut().zip(&p).zip(&inv_p) {
            *ti = pi * ip;
        }
        apply_system(h, k, &t, &mut q);
        let q_norm_sqr: f64 = q.iter().map(|a| a.norm_sqr()).sum();
        if q_norm_sqr == 0.0 || gamma == 0.0 {
            break;
        }
        let alpha = gamma / q_norm_sqr;
        for (xi, ti) in x.iter_mut().zip(&t) {
            *xi += ti * alpha;
        }
        for (ri, qi) in r.iter_mut().zip(&q) {
            *ri -= qi * alpha;
        }
        r_norm = norm(&r);
        if r_norm <= target {
            return Ok((
                x,
                SolveStats {
                    iterations: iteration,
                    relative_residual: r_norm / b_norm,
                },
            ));
        }
        adjoint(&r, &mut s, &mut work);
        let gamma_next: f64 = s.iter().map(|a| a.norm_sqr()).sum();
        let beta = gamma_next / gamma;
        gamma = gamma_next;
        for (pi, si) in p.iter_mut().zip(&s) {
            *pi = si + *pi * beta;
        }
    }

    Err(NoConvergence {
        iterations: max_iterations,
        relative_residual: r_norm / b_norm,
    })
}
