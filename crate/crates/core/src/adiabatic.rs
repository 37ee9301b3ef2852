//! The outer protocol: evolve for increasing total time `T`, look for a
//! basis state holding more than half the probability, and decide the
//! equation from that state's exact energy.

use std::fmt;

use num_bigint::BigInt;
use num_complex::Complex64;
use num_traits::Zero;
use rand::distributions::{Distribution, WeightedIndex};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::diophantine::{DiophantinePolynomial, MultiIndex};
use crate::fock::{coherent_state, min_truncation, CoherentParams, FockError, QuantumState, TruncatedFockSpace};
use crate::hamiltonian::{diag_hp, HamiltonianError, InitialHamiltonian, ProblemHamiltonian};
use crate::integrator::{evolve, EvolutionHooks, GrowthPolicy, IntegratorConfig, IntegratorError};
use crate::par;

/// Number of leading basis states kept per run.
pub const TOP_STATES: usize = 5;
/// Default dimension cap for growth.
pub const DEFAULT_MAX_DIM: usize = 1 << 20;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum AdiabaticError {
    #[error("invalid sweep: {0}")]
    InvalidSweep(String),
    #[error("equation has {unknowns} unknowns but {alphas} displacements were given")]
    AlphaCount { unknowns: usize, alphas: usize },
    #[error("equation has {unknowns} unknowns but {floors} initial cutoffs were given")]
    CutoffCount { unknowns: usize, floors: usize },
    #[error(transparent)]
    Fock(#[from] FockError),
    #[error(transparent)]
    Hamiltonian(#[from] HamiltonianError),
    #[error(transparent)]
    Integrator(#[from] IntegratorError),
}

/// Everything needed to run one evolution besides `T`.
#[derive(Debug, Clone, PartialEq)]
pub struct EvolutionConfig {
    pub alphas: Vec<Complex64>,
    pub epsilon: f64,
    /// Per-mode lower bounds on the initial cutoffs. The initial cutoff of
    /// mode `i` is `max(floor_i, min_truncation(alpha_i, epsilon))`.
    pub initial_cutoffs: Option<Vec<u32>>,
    pub integrator: IntegratorConfig,
    pub growth: GrowthPolicy,
    pub max_dim: usize,
}

impl EvolutionConfig {
    /// `alpha = 2` in every mode, `epsilon = 1e-2`, default integrator and
    /// growth.
    pub fn with_defaults(unknowns: usize) -> Self {
        EvolutionConfig {
            alphas: vec![Complex64::new(2.0, 0.0); unknowns],
            epsilon: 1e-2,
            initial_cutoffs: None,
            integrator: IntegratorConfig::default(),
            growth: GrowthPolicy::default(),
            max_dim: DEFAULT_MAX_DIM,
        }
    }

    pub fn validate(&self, p: &DiophantinePolynomial) -> Result<(), AdiabaticError> {
        let k = p.num_unknowns();
        if self.alphas.len() != k {
            return Err(AdiabaticError::AlphaCount {
                unknowns: k,
                alphas: self.alphas.len(),
            });
        }
        if let Some(floors) = &self.initial_cutoffs {
            if floors.len() != k {
                return Err(AdiabaticError::CutoffCount {
                    unknowns: k,
                    floors: floors.len(),
                });
            }
        }
        CoherentParams::new(self.alphas.clone(), self.epsilon)?;
        self.integrator.validate()?;
        Ok(())
    }

    pub fn initial_space(&self) -> Result<TruncatedFockSpace, AdiabaticError> {
        let cutoffs = self
            .alphas
            .iter()
            .enumerate()
            .map(|(i, &a)| {
                let floor = self.initial_cutoffs.as_ref().map_or(0, |f| f[i]);
                min_truncation(a, self.epsilon).max(floor)
            })
            .collect();
        Ok(TruncatedFockSpace::new(cutoffs)?)
    }

    pub fn initial_state(&self) -> Result<QuantumState, AdiabaticError> {
        let params = CoherentParams::new(self.alphas.clone(), self.epsilon)?;
        Ok(coherent_state(&params, &self.initial_space()?)?)
    }
}

/// Total times to try.
#[derive(Debug, Clone, PartialEq)]
pub enum TimeSchedule {
    List(Vec<f64>),
    /// `t0, t0 * factor, ...` up to and including `t_max`.
    Geometric { t0: f64, factor: f64, t_max: f64 },
}

impl TimeSchedule {
    pub fn values(&self) -> Result<Vec<f64>, AdiabaticError> {
        let bad = |m: String| Err(AdiabaticError::InvalidSweep(m));
        let values = match *self {
            TimeSchedule::List(ref v) => v.clone(),
            TimeSchedule::Geometric { t0, factor, t_max } => {
                if !(t0 > 0.0 && t0.is_finite() && t_max.is_finite()) {
                    return bad(format!("need finite T0 > 0 and T_max, got {t0} and {t_max}"));
                }
                if !(factor > 1.0 && factor.is_finite()) {
                    return bad(format!("T factor must exceed 1, got {factor}"));
                }
                let mut v = Vec::new();
                let mut k = 0;
                loop {
                    let t = t0 * factor.powi(k);
                    if t > t_max * (1.0 + 1e-12) {
                        break;
                    }
                    v.push(t);
                    k += 1;
                }
                v
            }
        };
        if values.is_empty() {
            return bad("no T values".to_string());
        }
        if let Some(t) = values.iter().find(|t| !(**t > 0.0 && t.is_finite())) {
            return bad(format!("T values must be positive and finite, got {t}"));
        }
        if values.windows(2).any(|w| w[1] <= w[0]) {
            return bad("T values must be strictly increasing".to_string());
        }
        Ok(values)
    }
}

impl Default for TimeSchedule {
    fn default() -> Self {
        TimeSchedule::Geometric {
            t0: 10.0,
            factor: 1.5,
            t_max: 2000.0,
        }
    }
}

/// How the final state is read out.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Readout {
    /// Probabilities straight from the amplitudes.
    Exact,
    /// Empirical frequencies from `shots` draws of `|psi|^2`.
    Shots { shots: u64, seed: u64 },
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepPolicy {
    pub schedule: TimeSchedule,
    pub stop_on_majority: bool,
    /// Recheck each majority with `dt_tolerance / refinement`; `None`
    /// accepts the first majority as is.
    pub refinement: Option<f64>,
    /// Also require the majority to hold in a rerun at
    /// `T * confirm_factor`. Off by default.
    pub confirm_factor: Option<f64>,
    pub readout: Readout,
    /// Worker threads for concurrent `T` values; 0 uses all cores.
    pub jobs: usize,
}

impl Default for SweepPolicy {
    fn default() -> Self {
        SweepPolicy {
            schedule: TimeSchedule::default(),
            stop_on_majority: true,
            refinement: Some(4.0),
            confirm_factor: None,
            readout: Readout::Exact,
            jobs: 1,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunRecord {
    pub total_time: f64,
    /// Up to [`TOP_STATES`] basis states, most probable first.
    pub top_states: Vec<(MultiIndex, f64)>,
    pub expectation_n: Vec<f64>,
    pub expectation_hp: f64,
    pub final_norm: f64,
    pub total_steps: usize,
    pub final_cutoffs: Vec<u32>,
    /// Growth hit the dimension cap before `T` was reached.
    pub aborted: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Verdict {
    pub ground: MultiIndex,
    pub ground_probability: f64,
    /// `D(ground)^2`, exact.
    pub e_g: BigInt,
    pub has_solution: bool,
    pub witness: Option<MultiIndex>,
    /// Total time of the run that produced the identification.
    pub total_time: f64,
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "T = {}", self.total_time)?;
        writeln!(f, "ground = {}", self.ground)?;
        writeln!(f, "ground_probability = {}", self.ground_probability)?;
        writeln!(f, "E_g = {}", self.e_g)?;
        writeln!(f, "has_solution = {}", self.has_solution)?;
        match &self.witness {
            Some(w) => writeln!(f, "witness = {w}"),
            None => writeln!(f, "witness = none"),
        }
    }
}

/// Result of rechecking a majority with a tighter step tolerance and,
/// optionally, a longer run.
#[derive(Debug, Clone, PartialEq)]
pub struct StabilityCheck {
    pub total_time: f64,
    pub candidate: MultiIndex,
    pub probability: f64,
    /// Probability of `candidate` in the refined run.
    pub refined_probability: Option<f64>,
    /// Probability of `candidate` in the run at `T * confirm_factor`.
    pub confirmed_probability: Option<f64>,
    pub stable: bool,
}

/// The unique basis state with probability above one half, if any.
pub fn identify_ground(psi: &QuantumState) -> Option<(MultiIndex, f64)> {
    let norm_sqr = psi.norm_sqr();
    if norm_sqr == 0.0 {
        return None;
    }
    let mut found: Option<(usize, f64)> = None;
    for (i, a) in psi.amplitudes().iter().enumerate() {
        let p = a.norm_sqr() / norm_sqr;
        if p > 0.5 {
            assert!(found.is_none(), "two basis states above one half");
            found = Some((i, p));
        }
    }
    found.map(|(i, p)| (psi.space().multi_index(i), p))
}

/// Same as [`identify_ground`] on empirical frequencies.
pub fn identify_from_counts(counts: &[(MultiIndex, u64)], shots: u64) -> Option<(MultiIndex, f64)> {
    counts
        .iter()
        .find(|(_, c)| 2 * c > shots)
        .map(|(n, c)| (n.clone(), *c as f64 / shots as f64))
}

/// Draws `shots` basis states from `|psi|^2`; counts sorted descending,
/// ties by basis order.
pub fn sample_counts(psi: &QuantumState, shots: u64, seed: u64) -> Vec<(MultiIndex, u64)> {
    let probs = psi.probabilities();
    let Ok(dist) = WeightedIndex::new(&probs) else {
        return Vec::new();
    };
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut counts = vec![0u64; probs.len()];
    for _ in 0..shots {
        counts[dist.sample(&mut rng)] += 1;
    }
    let mut hits: Vec<(usize, u64)> = counts.into_iter().enumerate().filter(|&(_, c)| c > 0).collect();
    hits.sort_by(|a, b| b.1.cmp(&a.1).then(a.0.cmp(&b.0)));
    hits.into_iter().map(|(i, c)| (psi.space().multi_index(i), c)).collect()
}

/// Per-mode `<N_i>` and `<H_P>` for a normalized state.
pub fn observables(psi: &QuantumState, p: &DiophantinePolynomial) -> Result<(Vec<f64>, f64), HamiltonianError> {
    let d = diag_hp(p, psi.space())?;
    let amps = psi.amplitudes();
    let mut n = vec![0.0; psi.space().num_modes()];
    psi.space().for_each_index(|idx, occ| {
        let w = amps[idx].norm_sqr();
        for (acc, &k) in n.iter_mut().zip(occ) {
            *acc += k as f64 * w;
        }
    });
    let hp = amps.iter().zip(&d).map(|(a, e)| a.norm_sqr() * e).sum();
    Ok((n, hp))
}

/// Exact verdict for an identified ground state.
pub fn decide(ground: &MultiIndex, probability: f64, total_time: f64, p: &DiophantinePolynomial) -> Verdict {
    let e_g = p
        .evaluate_squared(ground)
        .expect("ground state has one occupation per unknown");
    let has_solution = e_g.is_zero();
    Verdict {
        ground: ground.clone(),
        ground_probability: probability,
        e_g,
        has_solution,
        witness: has_solution.then(|| ground.clone()),
        total_time,
    }
}

/// Most probable basis states, descending, ties by basis order.
pub fn top_states(psi: &QuantumState, count: usize) -> Vec<(MultiIndex, f64)> {
    let probs = psi.probabilities();
    let mut order: Vec<usize> = (0..probs.len()).collect();
    order.sort_by(|&a, &b| probs[b].total_cmp(&probs[a]).then(a.cmp(&b)));
    order
        .into_iter()
        .take(count)
        .map(|i| (psi.space().multi_index(i), probs[i]))
        .collect()
}

/// One evolution and its final state.
#[derive(Debug, Clone)]
pub struct RunOutcome {
    pub record: RunRecord,
    pub state: QuantumState,
}

/// Evolves the coherent initial state for total time `T`.
pub fn run_single(
    p: &DiophantinePolynomial,
    config: &EvolutionConfig,
    total_time: f64,
    hooks: &mut dyn EvolutionHooks,
) -> Result<RunOutcome, AdiabaticError> {
    config.validate(p)?;
    let psi0 = config.initial_state()?;
    let hp = ProblemHamiltonian::new(p.clone(), psi0.space().clone())?;
    let hi = InitialHamiltonian::new(config.alphas.clone());
    let out = evolve(
        &hp,
        &hi,
        psi0,
        total_time,
        &config.integrator,
        &config.growth,
        config.max_dim,
        hooks,
    )?;
    let state = out.state;
    let (expectation_n, expectation_hp) = observables(&state, p)?;
    log::info!(
        "T = {total_time}: {} steps, cutoffs {:?}, max step drift {:.2e}",
        out.reports.len(),
        state.space().cutoffs(),
        out.reports.iter().map(|r| r.norm_drift.abs()).fold(0.0, f64::max)
    );
    Ok(RunOutcome {
        record: RunRecord {
            total_time,
            top_states: top_states(&state, TOP_STATES),
            expectation_n,
            expectation_hp,
            final_norm: state.norm(),
            total_steps: out.reports.len(),
            final_cutoffs: state.space().cutoffs().to_vec(),
            aborted: out.aborted.is_some(),
        },
        state,
    })
}

#[derive(Debug, Clone)]
pub struct SweepOutcome {
    pub records: Vec<RunRecord>,
    /// Final state of each record's run.
    pub states: Vec<QuantumState>,
    pub verdict: Option<Verdict>,
    pub checks: Vec<StabilityCheck>,
    /// A run hit the dimension cap; the sweep stopped there.
    pub cap_reached: bool,
}

fn readout(psi: &QuantumState, readout: Readout, index: usize) -> Option<(MultiIndex, f64)> {
    match readout {
        Readout::Exact => identify_ground(psi),
        Readout::Shots { shots, seed } => {
            let counts = sample_counts(psi, shots, seed.wrapping_add(index as u64));
            identify_from_counts(&counts, shots)
        }
    }
}

/// Normalized probability of `n`; zero if `n` is outside the space.
fn probability_of(psi: &QuantumState, n: &MultiIndex) -> f64 {
    psi.space()
        .linear_index(n.as_slice())
        .map_or(0.0, |i| psi.amplitudes()[i].norm_sqr() / psi.norm_sqr())
}

/// [`sweep_with_hooks`] without per-run hooks.
pub fn sweep(
    p: &DiophantinePolynomial,
    config: &EvolutionConfig,
    policy: &SweepPolicy,
) -> Result<SweepOutcome, AdiabaticError> {
    sweep_with_hooks(p, config, policy, &|_| Box::new(()))
}

/// Runs the schedule in ascending `T`, `jobs` values at a time.
///
/// A majority at `T` is rechecked with the refined step tolerance and, if
/// `confirm_factor` is set, by a run at the longer time; the first stable
/// one gives the verdict. With `stop_on_majority` the records
/// end at that `T`, so the output does not depend on `jobs`.
pub fn sweep_with_hooks(
    p: &DiophantinePolynomial,
    config: &EvolutionConfig,
    policy: &SweepPolicy,
    hooks: &(dyn Fn(f64) -> Box<dyn EvolutionHooks> + Sync),
) -> Result<SweepOutcome, AdiabaticError> {
    config.validate(p)?;
    let times = policy.schedule.values()?;
    if let Some(r) = policy.refinement {
        if !(r > 1.0 && r.is_finite()) {
            return Err(AdiabaticError::InvalidSweep(format!("refinement factor must exceed 1, got {r}")));
        }
    }
    if let Some(f) = policy.confirm_factor {
        if !(f > 1.0 && f.is_finite()) {
            return Err(AdiabaticError::InvalidSweep(format!("confirmation factor must exceed 1, got {f}")));
        }
    }
    if let Readout::Shots { shots: 0, .. } = policy.readout {
        return Err(AdiabaticError::InvalidSweep("shots must be positive".to_string()));
    }
    let jobs = if policy.jobs == 0 { par::available_jobs() } else { policy.jobs };

    let mut out = SweepOutcome {
        records: Vec::new(),
        states: Vec::new(),
        verdict: None,
        checks: Vec::new(),
        cap_reached: false,
    };
    let mut start = 0;
    'batches: while start < times.len() {
        let end = (start + jobs).min(times.len());
        let batch = &times[start..end];
        let runs = par::map_indexed(batch.len(), jobs, |k| run_single(p, config, batch[k], &mut *hooks(batch[k])));
        for (k, run) in runs.into_iter().enumerate() {
            let index = start + k;
            let RunOutcome { record, state } = run?;
            let t = record.total_time;
            let aborted = record.aborted;
            out.records.push(record);
            let candidate = readout(&state, policy.readout, index);
            out.states.push(state);
            if aborted {
                log::warn!("T = {t}: dimension cap {} reached; stopping the sweep", config.max_dim);
                out.cap_reached = true;
                break 'batches;
            }
            if out.verdict.is_some() {
                continue;
            }
            let Some((ground, probability)) = candidate else {
                continue;
            };
            let stable = if policy.refinement.is_none() && policy.confirm_factor.is_none() {
                true
            } else {
                let mut check = StabilityCheck {
                    total_time: t,
                    candidate: ground.clone(),
                    probability,
                    refined_probability: None,
                    confirmed_probability: None,
                    stable: true,
                };
                if let Some(factor) = policy.refinement {
                    let refined = EvolutionConfig {
                        integrator: config.integrator.refined(factor),
                        ..config.clone()
                    };
                    let rerun = run_single(p, &refined, t, &mut ())?;
                    let again = readout(&rerun.state, policy.readout, index);
                    check.stable &= again.as_ref().is_some_and(|(n, _)| *n == ground);
                    check.refined_probability = Some(probability_of(&rerun.state, &ground));
                }
                if let (true, Some(factor)) = (check.stable, policy.confirm_factor) {
                    let longer = run_single(p, config, t * factor, &mut ())?;
                    let again = readout(&longer.state, policy.readout, index);
                    check.stable &= again.as_ref().is_some_and(|(n, _)| *n == ground);
                    check.confirmed_probability = Some(probability_of(&longer.state, &ground));
                }
                log::info!(
                    "T = {t}: majority {ground} at {probability:.4}, refined {:?}, confirmed {:?}, {}",
                    check.refined_probability,
                    check.confirmed_probability,
                    if check.stable { "stable" } else { "unstable" }
                );
                let stable = check.stable;
                out.checks.push(check);
                stable
            };
            if stable {
                out.verdict = Some(decide(&ground, probability, t, p));
                if policy.stop_on_majority {
                    break 'batches;
                }
            }
        }
        start = end;
    }

    if let (Some(v), Some(first), Some(last)) = (&out.verdict, out.states.first(), out.states.last()) {
        let prob = |s: &QuantumState| {
            s.space()
                .linear_index(v.ground.as_slice())
                .map_or(0.0, |i| s.amplitudes()[i].norm_sqr())
        };
        let (lo, hi) = (prob(first), prob(last));
        if hi > lo {
            log::info!("ground probability rose from {lo:.4} to {hi:.4} over the sweep");
        } else {
            log::warn!("ground probability did not rise over the sweep ({lo:.4} -> {hi:.4})");
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::diophantine::parse;
    use num_bigint::BigInt;

    fn state(cutoffs: Vec<u32>, amps: &[(&[u32], Complex64)]) -> QuantumState {
        let space = TruncatedFockSpace::new(cutoffs).unwrap();
        let mut psi = QuantumState::zeros(space.clone());
        for (n, a) in amps {
            psi.amplitudes_mut()[space.linear_index(n).unwrap()] = *a;
        }
        psi
    }

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    #[test]
    fn identifies_exact_basis_state() {
        let psi = state(vec![3, 3], &[(&[1, 2], c(1.0))]);
        assert_eq!(identify_ground(&psi), Some((MultiIndex::new(vec![1, 2]), 1.0)));
    }

    #[test]
    fn no_majority_below_one_half() {
        let a = 0.45f64.sqrt();
        let b = 0.55f64.sqrt() / 2f64.sqrt();
        let psi = state(vec![4], &[(&[0], c(a)), (&[1], c(b)), (&[2], Complex64::new(0.0, b))]);
        assert!((psi.norm() - 1.0).abs() < 1e-12);
        assert_eq!(identify_ground(&psi), None);
        let half = state(vec![1], &[(&[0], c(0.5f64.sqrt())), (&[1], c(0.5f64.sqrt()))]);
        assert_eq!(identify_ground(&half), None);
    }

    #[test]
    fn observables_of_simple_states() {
        let p = parse("x - 20").unwrap();
        let psi = state(vec![25], &[(&[20], c(1.0))]);
        assert_eq!(observables(&psi, &p).unwrap(), (vec![20.0], 0.0));
        let r = 0.5f64.sqrt();
        let mix = state(vec![25], &[(&[19], c(r)), (&[21], Complex64::new(0.0, -r))]);
        let (n, hp) = observables(&mix, &p).unwrap();
        assert!((n[0] - 20.0).abs() < 1e-12);
        assert!((hp - 1.0).abs() < 1e-12);
    }

    #[test]
    fn decisions() {
        let eq = parse("x*y + x + 4*y - 11").unwrap();
        let v = decide(&MultiIndex::new(vec![1, 2]), 0.7, 1.0, &eq);
        assert!(v.has_solution);
        assert_eq!(v.e_g, BigInt::from(0));
        assert_eq!(v.witness, Some(MultiIndex::new(vec![1, 2])));

        let v = decide(&MultiIndex::new(vec![0]), 0.9, 1.0, &parse("x + 20").unwrap());
        assert!(!v.has_solution);
        assert_eq!(v.e_g, BigInt::from(400));
        assert_eq!(v.witness, None);

        assert!(decide(&MultiIndex::new(vec![20]), 0.6, 1.0, &parse("x - 20").unwrap()).has_solution);
    }

    #[test]
    fn verdict_text() {
        let v = decide(&MultiIndex::new(vec![0]), 0.75, 120.0, &parse("x + 20").unwrap());
        let text = v.to_string();
        assert!(text.contains("ground = 0\n"));
        assert!(text.contains("E_g = 400\n"));
        assert!(text.contains("has_solution = false\n"));
        assert!(text.contains("witness = none\n"));
    }

    #[test]
    fn geometric_schedule() {
        let v = TimeSchedule::Geometric {
            t0: 10.0,
            factor: 1.5,
            t_max: 50.625,
        }
        .values()
        .unwrap();
        assert_eq!(v, vec![10.0, 15.0, 22.5, 33.75, 50.625]);
        assert!(TimeSchedule::List(vec![5.0, 5.0]).values().is_err());
        assert!(TimeSchedule::List(vec![-1.0]).values().is_err());
        assert!(TimeSchedule::List(vec![]).values().is_err());
        assert!(TimeSchedule::Geometric {
            t0: 1.0,
            factor: 1.0,
            t_max: 3.0
        }
        .values()
        .is_err());
    }

    #[test]
    fn initial_space_uses_floors() {
        let mut cfg = EvolutionConfig::with_defaults(1);
        assert_eq!(cfg.initial_space().unwrap().cutoffs(), &[9]);
        cfg.initial_cutoffs = Some(vec![14]);
        assert_eq!(cfg.initial_space().unwrap().cutoffs(), &[14]);
        cfg.initial_cutoffs = Some(vec![3]);
        assert_eq!(cfg.initial_space().unwrap().cutoffs(), &[9]);
        assert!(matches!(
            cfg.validate(&parse("x*y").unwrap()),
            Err(AdiabaticError::AlphaCount { .. })
        ));
    }

    #[test]
    fn top_states_sorted() {
        let psi = state(
            vec![3],
            &[(&[0], c(0.1)), (&[1], c(0.7)), (&[2], c(0.5)), (&[3], c(0.5))],
        );
        let top = top_states(&psi, 3);
        assert_eq!(top[0].0, MultiIndex::new(vec![1]));
        assert_eq!(top[1].0, MultiIndex::new(vec![2]));
        assert_eq!(top[2].0, MultiIndex::new(vec![3]));
        assert!(top.windows(2).all(|w| w[0].1 >= w[1].1));
    }

    #[test]
    fn sampling_is_seeded() {
        let psi = state(vec![2], &[(&[0], c(0.8f64.sqrt())), (&[2], c(0.2f64.sqrt()))]);
        let a = sample_counts(&psi, 1000, 7);
        assert_eq!(a, sample_counts(&psi, 1000, 7));
        assert_eq!(a.iter().map(|x| x.1).sum::<u64>(), 1000);
        assert_eq!(a[0].0, MultiIndex::new(vec![0]));
        assert!((a[0].1 as f64 / 1000.0 - 0.8).abs() < 0.05);
        assert_eq!(identify_from_counts(&a, 1000).unwrap().0, MultiIndex::new(vec![0]));
    }

    #[test]
    fn small_sweep_finds_ground() {
        let p = parse("x - 1").unwrap();
        let cfg = EvolutionConfig::with_defaults(1);
        let policy = SweepPolicy {
            schedule: TimeSchedule::List(vec![0.5, 20.0, 40.0]),
            ..SweepPolicy::default()
        };
        let out = sweep(&p, &cfg, &policy).unwrap();
        let v = out.verdict.expect("verdict");
        assert_eq!(v.ground, MultiIndex::new(vec![1]));
        assert!(v.has_solution);
        assert_eq!(out.records.len(), out.states.len());
        assert_eq!(out.records.last().unwrap().total_time, v.total_time);
        assert!(out.checks.iter().any(|c| c.stable));
    }

    #[test]
    fn confirmation_rejects_transient_majority() {
        // x - 20 from cutoff 14: at T = 90 the evolved state has |19> above
        // one half, and a tighter step tolerance does not change that.
        let p = parse("x - 20").unwrap();
        let mut cfg = EvolutionConfig::with_defaults(1);
        cfg.epsilon = 1e-3;
        cfg.initial_cutoffs = Some(vec![14]);
        let mut policy = SweepPolicy {
            schedule: TimeSchedule::List(vec![90.0, 200.0]),
            ..SweepPolicy::default()
        };
        let plain = sweep(&p, &cfg, &policy).unwrap().verdict.unwrap();
        assert_eq!(plain.ground, MultiIndex::new(vec![19]));
        assert!(!plain.has_solution);

        policy.confirm_factor = Some(1.5);
        let out = sweep(&p, &cfg, &policy).unwrap();
        let v = out.verdict.unwrap();
        assert_eq!(v.ground, MultiIndex::new(vec![20]));
        assert_eq!(v.total_time, 200.0);
        assert!(!out.checks[0].stable);
        assert!(out.checks[0].confirmed_probability.unwrap() < 0.5);
        assert!(out.checks[1].stable);

        policy.confirm_factor = Some(1.0);
        assert!(matches!(sweep(&p, &cfg, &policy), Err(AdiabaticError::InvalidSweep(_))));
    }
}
