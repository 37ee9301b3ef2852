use super::*;
use crate::diophantine::parse;
use crate::fock::{coherent_state, CoherentParams, TruncatedFockSpace};
use crate::spectral::{exact_propagate, propagator, DenseOperator, DEFAULT_ORACLE_CAP};
use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn c(re: f64) -> Complex64 {
    Complex64::new(re, 0.0)
}

fn random_hermitian(dim: usize, per_row: usize, rng: &mut ChaCha8Rng) -> DMatrix<Complex64> {
    let mut h = DMatrix::<Complex64>::zeros(dim, dim);
    for i in 0..dim {
        h[(i, i)] = c(rng.gen_range(-1.0..1.0));
        for _ in 0..per_row {
            let j = rng.gen_range(0..dim);
            if j != i {
                let v = Complex64::new(rng.gen_range(-0.5..0.5), rng.gen_range(-0.5..0.5));
                h[(i, j)] += v;
                h[(j, i)] += v.conj();
            }
        }
    }
    h
}

fn random_state(dim: usize, rng: &mut ChaCha8Rng) -> Vec<Complex64> {
    let v: Vec<Complex64> = (0..dim)
        .map(|_| Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
        .collect();
    let n = solver::norm(&v);
    v.into_iter().map(|a| a / n).collect()
}

fn dist(a: &[Complex64], b: &[Complex64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).norm_sqr()).sum::<f64>().sqrt()
}

fn setup(eq: &str, cutoffs: Vec<u32>, eps: f64) -> (ProblemHamiltonian, InitialHamiltonian, QuantumState) {
    let p = parse(eq).unwrap();
    let alphas = vec![c(2.0); p.num_unknowns()];
    let space = TruncatedFockSpace::new(cutoffs).unwrap();
    let psi = coherent_state(&CoherentParams::new(alphas.clone(), eps).unwrap(), &space).unwrap();
    (
        ProblemHamiltonian::new(p, space).unwrap(),
        InitialHamiltonian::new(alphas),
        psi,
    )
}

#[test]
fn zero_operator_returns_rhs() {
    let h = DenseOperator(DMatrix::zeros(5, 5));
    let rhs: Vec<Complex64> = (0..5).map(|i| Complex64::new(i as f64, 1.0 - i as f64)).collect();
    let (x, stats) = solve_linear(&h, &rhs, 0.3, 1e-12, 10).unwrap();
    assert_eq!(x, rhs);
    assert_eq!(stats.iterations, 0);
}

#[test]
fn zero_rhs_returns_zero() {
    let h = DenseOperator(DMatrix::identity(3, 3));
    let (x, _) = solve_linear(&h, &[c(0.0); 3], 0.1, 1e-12, 10).unwrap();
    assert!(x.iter().all(|a| *a == c(0.0)));
}

#[test]
fn diagonal_solve_is_entrywise() {
    let energies = [0.0, 1.0, 7.5, 400.0];
    let h = DenseOperator(DMatrix::from_diagonal(&DVector::from_iterator(4, energies.iter().map(|&e| c(e)))));
    let rhs = vec![Complex64::new(1.0, 2.0), c(-1.0), Complex64::new(0.0, 3.0), c(0.5)];
    let dt = 0.2;
    let (x, _) = solve_linear(&h, &rhs, dt, 1e-14, 10).unwrap();
    for ((xi, bi), e) in x.iter().zip(&rhs).zip(energies) {
        let expected = bi / Complex64::new(1.0, e * dt / 2.0);
        assert!((xi - expected).norm() < 1e-15);
    }
}

#[test]
fn sparse_random_solve_matches_direct() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let dim = 100;
    let h = random_hermitian(dim, 3, &mut rng);
    let rhs = random_state(dim, &mut rng);
    let dt = 0.5;
    let (x, stats) = solve_linear(&DenseOperator(h.clone()), &rhs, dt, 1e-10, dim).unwrap();
    assert!(stats.iterations <= dim);
    let a = DMatrix::<Complex64>::identity(dim, dim) + &h * Complex64::new(0.0, dt / 2.0);
    let b = DVector::from_column_slice(&rhs);
    let residual = (&a * DVector::from_column_slice(&x) - &b).norm() / b.norm();
    assert!(residual <= 1e-10, "residual {residual:e}");
    let direct = a.lu().solve(&b).unwrap();
    assert!(dist(&x, direct.as_slice()) < 1e-8);
}

#[test]
fn solver_reports_non_convergence() {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let h = random_hermitian(40, 4, &mut rng);
    let rhs = random_state(40, &mut rng);
    let err = solve_linear(&DenseOperator(h), &rhs, 50.0, 1e-14, 1).unwrap_err();
    assert_eq!(err.iterations, 1);
    assert!(err.relative_residual > 1e-14);
}

#[test]
fn diagonal_step_is_cayley_phase() {
    let (hp, hi, _) = setup("x - 20", vec![25], 1e-2);
    let psi = QuantumState::basis(hp.space().clone(), &[19]).unwrap();
    let (out, _) = cn_step(&hp, &hi, &psi, SchedulePoint::new(1.0).unwrap(), 0.1, &IntegratorConfig::default()).unwrap();
    let phase = Complex64::new(1.0, -0.05) / Complex64::new(1.0, 0.05);
    for (i, a) in out.amplitudes().iter().enumerate() {
        let expected = if i == 19 { phase } else { c(0.0) };
        assert!((a - expected).norm() < 1e-14, "entry {i}: {a}");
    }
    assert!((out.amplitudes()[19].norm() - 1.0).abs() < 1e-14);
}

#[test]
fn local_error_is_third_order() {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let h = random_hermitian(6, 6, &mut rng);
    let psi = random_state(6, &mut rng);
    let op = DenseOperator(h.clone());
    let errors: Vec<f64> = (0..5)
        .map(|k| {
            let dt = 0.2 / 2f64.powi(k);
            let (x, _) = cayley_step(&op, &psi, dt, 1e-15, 100).unwrap();
            let exact = propagator(&h, dt) * DVector::from_column_slice(&psi);
            dist(&x, exact.as_slice())
        })
        .collect();
    for w in errors.windows(2) {
        let ratio = w[0] / w[1];
        assert!((7.0..9.0).contains(&ratio), "ratio {ratio} from {errors:?}");
    }
}

#[test]
fn small_dt_is_near_identity() {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let h = random_hermitian(10, 3, &mut rng);
    let psi = random_state(10, &mut rng);
    let bound = h.norm();
    for dt in [1e-3, 1e-5, 1e-7] {
        let (x, _) = cayley_step(&DenseOperator(h.clone()), &psi, dt, 1e-14, 100).unwrap();
        assert!(dist(&x, &psi) <= bound * dt);
    }
}

#[test]
fn negative_dt_inverts_step() {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let op = DenseOperator(random_hermitian(12, 3, &mut rng));
    let psi = random_state(12, &mut rng);
    let (fwd, _) = cayley_step(&op, &psi, 0.3, 1e-14, 100).unwrap();
    let (back, _) = cayley_step(&op, &fwd, -0.3, 1e-14, 100).unwrap();
    assert!(dist(&back, &psi) < 1e-12);
}

#[test]
fn step_ramps_to_dt_max_without_error_pressure() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let op = DenseOperator(random_hermitian(8, 2, &mut rng));
    let config = IntegratorConfig {
        dt_tolerance: 1e6,
        dt_max: 0.5,
        ..IntegratorConfig::default()
    };
    let mut psi = random_state(8, &mut rng);
    let mut dt = config.dt_initial;
    let mut t = 0.0;
    for _ in 0..20 {
        let step = adaptive_dt_with(|_| op.clone(), &psi, t, dt, &config).unwrap();
        assert_eq!(step.report.rejections, 0);
        t += step.dt_accepted;
        dt = step.report.dt_suggested;
        psi = step.state;
    }
    assert_eq!(dt, 0.5);
}

#[test]
fn zero_tolerance_underflows() {
    let (hp, hi, psi) = setup("x + 2", vec![12], 1e-2);
    let config = IntegratorConfig {
        dt_tolerance: 0.0,
        dt_min: 1e-6,
        ..IntegratorConfig::default()
    };
    let err = adaptive_dt(&hp, &hi, &psi, 0.0, 1.0, 1e-3, &config).unwrap_err();
    assert!(matches!(err, IntegratorError::StepUnderflow { dt_min, .. } if dt_min == 1e-6));
}

#[test]
fn report_fields_are_consistent() {
    let (hp, hi, psi) = setup("x - 3", vec![12], 1e-2);
    let config = IntegratorConfig::default();
    let (dt, next, report) = adaptive_dt(&hp, &hi, &psi, 0.0, 5.0, 0.01, &config).unwrap();
    assert_eq!(report.dt_used, dt);
    assert!(report.estimated_local_error >= 0.0);
    assert!(report.estimated_local_error <= config.dt_tolerance);
    assert!((report.norm_drift - (next.norm() - psi.norm())).abs() < 1e-15);
    assert!((report.leakage - hi.leakage(&psi)).abs() < 1e-15);
    assert_eq!(report.cutoffs, vec![12]);
    assert!(report.dt_suggested <= 2.0 * dt);
}

#[test]
fn quarter_tolerance_doubles_step_count() {
    let (hp, hi, psi) = setup("x - 20", vec![30], 1e-2);
    let base = IntegratorConfig::default();
    let steps = |config: &IntegratorConfig| {
        evolve(&hp, &hi, psi.clone(), 20.0, config, &GrowthPolicy::Fixed, usize::MAX, &mut ())
            .unwrap()
            .total_steps() as f64
    };
    let ratio = steps(&base.refined(4.0)) / steps(&base);
    assert!((1.4..2.5).contains(&ratio), "ratio {ratio}");
}

#[test]
fn sudden_limit_keeps_initial_state() {
    let (hp, hi, psi) = setup("x*y + x + 4*y - 11", vec![9, 9], 1e-2);
    let out = evolve(&hp, &hi, psi.clone(), 1e-6, &IntegratorConfig::default(), &GrowthPolicy::Fixed, usize::MAX, &mut ())
        .unwrap();
    assert_eq!(out.total_steps(), 1);
    assert!(out.state.fidelity(&psi) >= 0.999);
    assert_eq!(out.t_final, 1e-6);
}

#[test]
fn forward_then_backward_returns_initial_state() {
    let (hp, hi, psi) = setup("x*y - 2", vec![6, 6], 0.2);
    let schedule = uniform_schedule(3.0, 300);
    let config = IntegratorConfig {
        solver_tolerance: 1e-13,
        ..IntegratorConfig::default()
    };
    let fwd = propagate_schedule(&hp, &hi, &psi, &schedule, &config).unwrap();
    assert!(fwd.fidelity(&psi) < 0.99);
    let back = propagate_schedule(&hp, &hi, &fwd, &reversed_schedule(&schedule), &config).unwrap();
    assert!(back.fidelity(&psi) >= 1.0 - 1e-8, "fidelity {}", back.fidelity(&psi));
}

#[test]
fn norm_is_preserved() {
    let (hp, hi, psi) = setup("x + 20", vec![9], 1e-2);
    let config = IntegratorConfig::default();
    let out = evolve(&hp, &hi, psi, 30.0, &config, &GrowthPolicy::Fixed, usize::MAX, &mut ()).unwrap();
    assert!(out.max_step_drift() <= 10.0 * config.solver_tolerance, "{}", out.max_step_drift());
    assert!((out.state.norm() - 1.0).abs() <= 1e-6);
}

#[test]
fn adaptive_run_matches_exact_propagation() {
    let (hp, hi, psi) = setup("x - 20", vec![6], 0.1);
    let total = 10.0;
    // The default per-step tolerance lets phase error accumulate to a few
    // percent over this run.
    let config = IntegratorConfig {
        dt_tolerance: 1e-6,
        ..IntegratorConfig::default()
    };
    let out = evolve(&hp, &hi, psi.clone(), total, &config, &GrowthPolicy::Fixed, usize::MAX, &mut ()).unwrap();
    let schedule: Vec<(f64, f64)> = out
        .reports
        .iter()
        .map(|r| ((r.t_before + 0.5 * r.dt_used) / total, r.dt_used))
        .collect();
    let exact = exact_propagate(&psi, hp.polynomial(), hi.alphas(), &schedule, DEFAULT_ORACLE_CAP).unwrap();
    let f = out.state.fidelity(&exact);
    assert!(f >= 1.0 - 1e-4, "fidelity {f}");
}

#[test]
fn deterministic_runs() {
    let (hp, hi, psi) = setup("x*y + x + 4*y - 11", vec![9, 9], 1e-2);
    let run = || {
        evolve(&hp, &hi, psi.clone(), 5.0, &IntegratorConfig::default(), &GrowthPolicy::default(), usize::MAX, &mut ())
            .unwrap()
    };
    let (a, b) = (run(), run());
    assert_eq!(a.state, b.state);
    assert_eq!(a.reports, b.reports);
}

#[test]
fn growth_and_dimension_cap() {
    let (hp, hi, psi) = setup("x + 1", vec![9], 1e-2);
    let config = IntegratorConfig::default();
    let mut seen = Vec::new();
    let mut hook = |r: &StepReport, s: &QuantumState| {
        assert_eq!(r.cutoffs, s.space().cutoffs());
        seen.push(r.cutoffs[0]);
    };
    let out = evolve(&hp, &hi, psi.clone(), 0.05, &config, &GrowthPolicy::Always { step: 1 }, usize::MAX, &mut hook)
        .unwrap();
    assert!(out.aborted.is_none());
    assert_eq!(out.state.space().cutoffs()[0], 9 + out.total_steps() as u32);
    assert_eq!(out.hp.space(), out.state.space());
    assert!(seen.windows(2).all(|w| w[1] == w[0] + 1));

    let capped = evolve(&hp, &hi, psi, 1.0, &config, &GrowthPolicy::Always { step: 1 }, 12, &mut ()).unwrap();
    assert!(matches!(capped.aborted, Some(FockError::DimensionCap { .. })));
    assert_eq!(capped.state.space().dim(), 12);
    assert!(capped.t_final < 1.0);
}

#[test]
fn threshold_growth_only_touches_heavy_modes() {
    let space = TruncatedFockSpace::new(vec![4, 4]).unwrap();
    let psi = QuantumState::basis(space, &[4, 0]).unwrap();
    let policy = GrowthPolicy::default();
    assert_eq!(policy.delta(&psi), Some(vec![2, 0]));
    let inner = QuantumState::basis(psi.space().clone(), &[1, 1]).unwrap();
    assert_eq!(policy.delta(&inner), None);
    assert_eq!(GrowthPolicy::Fixed.delta(&psi), None);
}

#[test]
fn config_validation() {
    assert!(IntegratorConfig::default().validate().is_ok());
    let bad = IntegratorConfig {
        dt_min: 1.0,
        ..IntegratorConfig::default()
    };
    assert!(matches!(bad.validate(), Err(IntegratorError::InvalidConfig(_))));
    let (hp, hi, psi) = setup("x", vec![9], 1e-2);
    assert!(matches!(
        evolve(&hp, &hi, psi, 0.0, &IntegratorConfig::default(), &GrowthPolicy::Fixed, usize::MAX, &mut ()),
        Err(IntegratorError::InvalidTime(_))
    ));
}

#[test]
fn schedules() {
    let s = uniform_schedule(2.0, 4);
    assert_eq!(s, vec![(0.125, 0.5), (0.375, 0.5), (0.625, 0.5), (0.875, 0.5)]);
    assert_eq!(reversed_schedule(&s)[0], (0.875, -0.5));
}
