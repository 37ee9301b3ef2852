//! Command-line front end: flags and config file, the three run modes, and
//! the CSV / text outputs.

use std::fs::{self, File};
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};

use clap::{CommandFactory, Parser, ValueEnum};
use num_complex::Complex64;

use crate::adiabatic::{
    sweep_with_hooks, AdiabaticError, EvolutionConfig, Readout, RunRecord, SweepOutcome, SweepPolicy, TimeSchedule,
    Verdict, DEFAULT_MAX_DIM, TOP_STATES,
};
use crate::diophantine::{brute_force_search, parse, DiophantinePolynomial, ParseError, SearchError, DEFAULT_SEARCH_CAP};
use crate::fock::{FockError, QuantumState};
use crate::hamiltonian::{assemble_columns, HamiltonianError, InitialHamiltonian, InterpolatedHamiltonian, ProblemHamiltonian, SchedulePoint};
use crate::integrator::{EvolutionHooks, GrowthPolicy, IntegratorConfig, StepReport};
use crate::spectral::{dense_h, gap_profile, uniform_grid, SpectralError, DEFAULT_LEVELS, DEFAULT_ORACLE_CAP};

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("config file {path}: {message}")]
    Config { path: PathBuf, message: String },
    #[error("equation: {0}")]
    Parse(#[from] ParseError),
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: io::Error },
    #[error(transparent)]
    Adiabatic(#[from] AdiabaticError),
    #[error(transparent)]
    Spectral(#[from] SpectralError),
    #[error(transparent)]
    Search(#[from] SearchError),
    #[error(transparent)]
    Hamiltonian(#[from] HamiltonianError),
    #[error(transparent)]
    Fock(#[from] FockError),
}

fn io_err(path: &Path) -> impl FnOnce(io::Error) -> CliError + '_ {
    move |source| CliError::Io {
        path: path.to_path_buf(),
        source,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Mode {
    /// Sweep T and decide the equation.
    Sweep,
    /// Write the low-lying spectrum of H(s) on the initial space.
    GapProfile,
    /// Cross-check the matrix-free operator, the dense oracle and brute force.
    OracleCheck,
}

/// Adiabatic quantum simulation for deciding whether a Diophantine
/// equation has a solution in nonnegative integers.
///
/// Every flag can also be given in a `--config` file as `key = value`
/// (one per line, `#` starts a comment); flags on the command line win.
#[derive(Debug, Clone, Default, Parser)]
#[command(name = "dioph-adiabatic", version)]
pub struct Args {
    /// Config file of `key = value` lines.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Polynomial D, e.g. "x*y + x + 4*y - 11" (an `lhs = rhs` form is accepted).
    #[arg(long)]
    pub equation: Option<String>,
    /// Coherent displacement "re,im" per unknown; one value applies to all. Default 2,0.
    #[arg(long = "alpha", value_name = "RE,IM", allow_hyphen_values = true)]
    pub alpha: Vec<String>,
    /// Norm deficit allowed when truncating the initial coherent state. Default 1e-2.
    #[arg(long)]
    pub eps: Option<f64>,
    /// Lower bound on the initial cutoff per unknown; one value applies to all.
    #[arg(long = "initial-cutoff")]
    pub initial_cutoff: Vec<u32>,
    /// First T of the geometric sweep. Default 10.
    #[arg(long = "T0")]
    pub t0: Option<f64>,
    /// Ratio between consecutive T. Default 1.5.
    #[arg(long = "T-factor")]
    pub t_factor: Option<f64>,
    /// Largest T of the geometric sweep. Default 2000.
    #[arg(long = "T-max")]
    pub t_max: Option<f64>,
    /// Explicit comma-separated T values; replaces the geometric sweep.
    #[arg(long = "T-list", value_delimiter = ',')]
    pub t_list: Vec<f64>,
    /// Step-doubling tolerance. Default 1e-3.
    #[arg(long = "dt-tol")]
    pub dt_tol: Option<f64>,
    /// Relative residual of each linear solve. Default 1e-10.
    #[arg(long = "solver-tol")]
    pub solver_tol: Option<f64>,
    /// Grow every mode by two after every step.
    #[arg(long = "grow-always")]
    pub grow_always: bool,
    /// Grow a mode when the probability in its last two levels exceeds this. Default 1e-8.
    #[arg(long = "growth-threshold")]
    pub growth_threshold: Option<f64>,
    /// Keep the initial truncation fixed.
    #[arg(long = "no-grow")]
    pub no_grow: bool,
    /// Largest allowed dimension of the truncated space.
    #[arg(long = "max-dim")]
    pub max_dim: Option<usize>,
    /// Concurrent evolutions; 0 uses every core. Default 0.
    #[arg(long)]
    pub jobs: Option<usize>,
    #[arg(long, value_enum)]
    pub mode: Option<Mode>,
    /// Output directory. Default "out".
    #[arg(long = "out-dir")]
    pub out_dir: Option<PathBuf>,
    /// Write the final state of every run.
    #[arg(long = "dump-state")]
    pub dump_state: bool,
    /// Identify the ground state from this many sampled measurements.
    #[arg(long)]
    pub shots: Option<u64>,
    /// Seed for --shots. Default 0.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Write one line per accepted step to steps_T<T>.log.
    #[arg(long = "step-log")]
    pub step_log: bool,
    /// Keep sweeping after the verdict.
    #[arg(long = "keep-going")]
    pub keep_going: bool,
    /// Accept the first majority without the tighter-tolerance rerun.
    #[arg(long = "no-refine")]
    pub no_refine: bool,
    /// Also require each majority to hold at this multiple of its T.
    #[arg(long = "confirm-factor")]
    pub confirm_factor: Option<f64>,
    /// Grid points for --mode gap-profile. Default 101.
    #[arg(long = "gap-points")]
    pub gap_points: Option<usize>,
    /// Eigenvalues per grid point. Default 4.
    #[arg(long)]
    pub levels: Option<usize>,
}

impl Args {
    /// Reads `key = value` lines into the same flags.
    pub fn from_config_file(path: &Path) -> Result<Args, CliError> {
        let text = fs::read_to_string(path).map_err(io_err(path))?;
        Self::from_config_str(&text).map_err(|message| CliError::Config {
            path: path.to_path_buf(),
            message,
        })
    }

    pub fn from_config_str(text: &str) -> Result<Args, String> {
        let command = Args::command();
        let mut argv = vec!["dioph-adiabatic".to_string()];
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let Some((key, value)) = line.split_once('=') else {
                return Err(format!("line {}: expected `key = value`", lineno + 1));
            };
            let key = key.trim().trim_start_matches("--");
            let value = value.split(',').map(str::trim).collect::<Vec<_>>().join(",");
            let value = value.as_str();
            if key == "config" {
                return Err(format!("line {}: config files cannot include others", lineno + 1));
            }
            let Some(arg) = command.get_arguments().find(|a| a.get_long() == Some(key)) else {
                return Err(format!("line {}: unknown key `{key}`", lineno + 1));
            };
            if arg.get_action().takes_values() {
                argv.push(format!("--{key}={value}"));
            } else {
                match value {
                    "true" | "yes" | "1" => argv.push(format!("--{key}")),
                    "false" | "no" | "0" => {}
                    _ => return Err(format!("line {}: `{key}` takes true or false", lineno + 1)),
                }
            }
        }
        Args::try_parse_from(argv).map_err(|e| e.to_string().trim().to_string())
    }

    /// Fills every option not given here from `file`.
    pub fn merged_over(self, file: Args) -> Args {
        fn vec_or<T>(a: Vec<T>, b: Vec<T>) -> Vec<T> {
            if a.is_empty() {
                b
            } else {
                a
            }
        }
        Args {
            config: self.config,
            equation: self.equation.or(file.equation),
            alpha: vec_or(self.alpha, file.alpha),
            eps: self.eps.or(file.eps),
            initial_cutoff: vec_or(self.initial_cutoff, file.initial_cutoff),
            t0: self.t0.or(file.t0),
            t_factor: self.t_factor.or(file.t_factor),
            t_max: self.t_max.or(file.t_max),
            t_list: vec_or(self.t_list, file.t_list),
            dt_tol: self.dt_tol.or(file.dt_tol),
            solver_tol: self.solver_tol.or(file.solver_tol),
            grow_always: self.grow_always || file.grow_always,
            growth_threshold: self.growth_threshold.or(file.growth_threshold),
            no_grow: self.no_grow || file.no_grow,
            max_dim: self.max_dim.or(file.max_dim),
            jobs: self.jobs.or(file.jobs),
            mode: self.mode.or(file.mode),
            out_dir: self.out_dir.or(file.out_dir),
            dump_state: self.dump_state || file.dump_state,
            shots: self.shots.or(file.shots),
            seed: self.seed.or(file.seed),
            step_log: self.step_log || file.step_log,
            keep_going: self.keep_going || file.keep_going,
            no_refine: self.no_refine || file.no_refine,
            confirm_factor: self.confirm_factor.or(file.confirm_factor),
            gap_points: self.gap_points.or(file.gap_points),
            levels: self.levels.or(file.levels),
        }
    }

    /// Loads `--config` if given and merges it under the flags.
    pub fn resolve(self) -> Result<Args, CliError> {
        match self.config.clone() {
            Some(path) => {
                let file = Args::from_config_file(&path)?;
                Ok(self.merged_over(file))
            }
            None => Ok(self),
        }
    }
}

/// A validated run.
#[derive(Debug, Clone)]
pub struct RunConfig {
    pub equation: DiophantinePolynomial,
    pub evolution: EvolutionConfig,
    pub sweep: SweepPolicy,
    pub mode: Mode,
    pub out_dir: PathBuf,
    pub dump_state: bool,
    pub step_log: bool,
    pub gap_points: usize,
    pub levels: usize,
}

fn parse_alpha(text: &str) -> Result<Complex64, CliError> {
    let bad = || CliError::Usage(format!("bad --alpha `{text}`, expected \"re,im\""));
    let mut parts = text.split(',').map(str::trim);
    let re: f64 = parts.next().ok_or_else(bad)?.parse().map_err(|_| bad())?;
    let im: f64 = match parts.next() {
        Some(s) => s.parse().map_err(|_| bad())?,
        None => 0.0,
    };
    if parts.next().is_some() || !re.is_finite() || !im.is_finite() {
        return Err(bad());
    }
    Ok(Complex64::new(re, im))
}

fn per_mode<T: Clone>(values: Vec<T>, k: usize, what: &str) -> Result<Option<Vec<T>>, CliError> {
    match values.len() {
        0 => Ok(None),
        1 => Ok(Some(vec![values[0].clone(); k])),
        n if n == k => Ok(Some(values)),
        n => Err(CliError::Usage(format!("{n} values of {what} for {k} unknowns"))),
    }
}

impl RunConfig {
    pub fn from_args(args: Args) -> Result<RunConfig, CliError> {
        let args = args.resolve()?;
        let text = args
            .equation
            .ok_or_else(|| CliError::Usage("--equation is required".to_string()))?;
        let equation = parse(&text)?;
        let k = equation.num_unknowns();

        let mut evolution = EvolutionConfig::with_defaults(k);
        let alphas = args.alpha.iter().map(|a| parse_alpha(a)).collect::<Result<Vec<_>, _>>()?;
        if let Some(a) = per_mode(alphas, k, "--alpha")? {
            evolution.alphas = a;
        }
        if let Some(eps) = args.eps {
            evolution.epsilon = eps;
        }
        evolution.initial_cutoffs = per_mode(args.initial_cutoff, k, "--initial-cutoff")?;
        evolution.integrator = IntegratorConfig {
            dt_tolerance: args.dt_tol.unwrap_or(IntegratorConfig::default().dt_tolerance),
            solver_tolerance: args.solver_tol.unwrap_or(IntegratorConfig::default().solver_tolerance),
            ..IntegratorConfig::default()
        };
        let growth_flags = [args.grow_always, args.growth_threshold.is_some(), args.no_grow];
        if growth_flags.iter().filter(|&&b| b).count() > 1 {
            return Err(CliError::Usage(
                "--grow-always, --growth-threshold and --no-grow are exclusive".to_string(),
            ));
        }
        evolution.growth = if args.no_grow {
            GrowthPolicy::Fixed
        } else if args.grow_always {
            GrowthPolicy::Always { step: 2 }
        } else if let Some(threshold) = args.growth_threshold {
            if !(threshold > 0.0 && threshold < 1.0) {
                return Err(CliError::Usage("--growth-threshold must lie in (0, 1)".to_string()));
            }
            GrowthPolicy::Threshold {
                threshold,
                shell: 2,
                step: 2,
            }
        } else {
            GrowthPolicy::default()
        };
        evolution.max_dim = args.max_dim.unwrap_or(DEFAULT_MAX_DIM);
        evolution.validate(&equation)?;

        let schedule = if !args.t_list.is_empty() {
            if args.t0.is_some() || args.t_factor.is_some() || args.t_max.is_some() {
                return Err(CliError::Usage("--T-list cannot be combined with --T0/--T-factor/--T-max".to_string()));
            }
            TimeSchedule::List(args.t_list)
        } else {
            let TimeSchedule::Geometric { t0, factor, t_max } = TimeSchedule::default() else {
                unreachable!()
            };
            TimeSchedule::Geometric {
                t0: args.t0.unwrap_or(t0),
                factor: args.t_factor.unwrap_or(factor),
                t_max: args.t_max.unwrap_or(t_max),
            }
        };
        schedule.values()?;
        let readout = match args.shots {
            Some(0) => return Err(CliError::Usage("--shots must be positive".to_string())),
            Some(shots) => Readout::Shots {
                shots,
                seed: args.seed.unwrap_or(0),
            },
            None => Readout::Exact,
        };
        if let Some(f) = args.confirm_factor {
            if !(f > 1.0 && f.is_finite()) {
                return Err(CliError::Usage(format!("--confirm-factor must exceed 1, got {f}")));
            }
        }
        let sweep = SweepPolicy {
            schedule,
            stop_on_majority: !args.keep_going,
            refinement: (!args.no_refine).then_some(4.0),
            confirm_factor: args.confirm_factor,
            readout,
            jobs: args.jobs.unwrap_or(0),
        };
        let gap_points = args.gap_points.unwrap_or(101);
        if gap_points < 2 {
            return Err(CliError::Usage("--gap-points must be at least 2".to_string()));
        }
        let levels = args.levels.unwrap_or(DEFAULT_LEVELS);
        if levels < 2 {
            return Err(CliError::Usage("--levels must be at least 2".to_string()));
        }
        Ok(RunConfig {
            equation,
            evolution,
            sweep,
            mode: args.mode.unwrap_or(Mode::Sweep),
            out_dir: args.out_dir.unwrap_or_else(|| PathBuf::from("out")),
            dump_state: args.dump_state,
            step_log: args.step_log,
            gap_points,
            levels,
        })
    }
}

/// What a run ended with; maps onto the exit status.
#[derive(Debug, Clone, PartialEq)]
pub enum Outcome {
    Verdict(Verdict),
    NoVerdict,
    /// A mode without a verdict finished (gap profile, passing oracle check).
    Done,
    /// The oracle check found a mismatch.
    CheckFailed,
}

impl Outcome {
    pub fn exit_code(&self) -> i32 {
        match self {
            Outcome::Verdict(_) | Outcome::Done => 0,
            Outcome::NoVerdict => 2,
            Outcome::CheckFailed => 1,
        }
    }
}

fn join_index(n: &[u32]) -> String {
    n.iter().map(u32::to_string).collect::<Vec<_>>().join(":")
}

/// Header and rows of `records.csv`.
pub fn write_records<W: Write>(mut w: W, p: &DiophantinePolynomial, records: &[RunRecord]) -> io::Result<()> {
    let mut header = vec!["T".to_string()];
    header.extend((1..=TOP_STATES).map(|i| format!("top{i}")));
    header.extend(p.unknowns().iter().map(|u| format!("N_{u}")));
    header.extend(["HP", "norm", "steps", "cutoffs"].map(String::from));
    writeln!(w, "{}", header.join(","))?;
    for r in records {
        let mut row = vec![format!("{}", r.total_time)];
        for i in 0..TOP_STATES {
            row.push(match r.top_states.get(i) {
                Some((n, prob)) => format!("{}={prob:.10}", join_index(n.as_slice())),
                None => String::new(),
            });
        }
        row.extend(r.expectation_n.iter().map(|n| format!("{n:.10}")));
        row.push(format!("{:.10}", r.expectation_hp));
        row.push(format!("{:.12}", r.final_norm));
        row.push(r.total_steps.to_string());
        row.push(join_index(&r.final_cutoffs));
        writeln!(w, "{}", row.join(","))?;
    }
    Ok(())
}

/// Contents of `verdict.txt`.
pub fn write_verdict<W: Write>(mut w: W, p: &DiophantinePolynomial, outcome: &SweepOutcome) -> io::Result<()> {
    writeln!(w, "equation = {p}")?;
    match &outcome.verdict {
        Some(v) => write!(w, "{v}")?,
        None => {
            writeln!(w, "verdict = none")?;
            let reason = if outcome.cap_reached {
                "dimension cap reached before a majority"
            } else {
                "no stable majority within the sweep"
            };
            writeln!(w, "reason = {reason}")?;
        }
    }
    for c in &outcome.checks {
        write!(w, "check T = {}: {} p = {:.6}", c.total_time, c.candidate, c.probability)?;
        if let Some(q) = c.refined_probability {
            write!(w, ", refined p = {q:.6}")?;
        }
        if let Some(q) = c.confirmed_probability {
            write!(w, ", confirmed p = {q:.6}")?;
        }
        writeln!(w, ", {}", if c.stable { "stable" } else { "unstable" })?;
    }
    Ok(())
}

struct StepLogger {
    out: Option<BufWriter<File>>,
    path: PathBuf,
}

impl StepLogger {
    fn create(path: PathBuf) -> StepLogger {
        let out = File::create(&path)
            .and_then(|f| {
                let mut w = BufWriter::new(f);
                writeln!(w, "# t dt norm leakage solver_iters")?;
                Ok(w)
            })
            .map_err(|e| log::error!("{}: {e}", path.display()))
            .ok();
        StepLogger { out, path }
    }
}

impl EvolutionHooks for StepLogger {
    fn on_step(&mut self, report: &StepReport, psi: &QuantumState) {
        if let Some(w) = &mut self.out {
            if let Err(e) = writeln!(w, "{}", report.log_line(psi.norm())) {
                log::error!("{}: {e}; step log stopped", self.path.display());
                self.out = None;
            }
        }
    }
}

impl Drop for StepLogger {
    fn drop(&mut self) {
        if let Some(w) = &mut self.out {
            if let Err(e) = w.flush() {
                log::error!("{}: {e}", self.path.display());
            }
        }
    }
}

fn create(path: &Path) -> Result<BufWriter<File>, CliError> {
    File::create(path).map(BufWriter::new).map_err(io_err(path))
}

fn finish(w: BufWriter<File>, path: &Path) -> Result<(), CliError> {
    w.into_inner().map_err(|e| e.into_error()).map_err(io_err(path))?;
    Ok(())
}

fn run_sweep(config: &RunConfig) -> Result<Outcome, CliError> {
    let dir = config.out_dir.clone();
    let step_log = config.step_log;
    let hooks = move |t: f64| -> Box<dyn EvolutionHooks> {
        if step_log {
            Box::new(StepLogger::create(dir.join(format!("steps_T{t}.log"))))
        } else {
            Box::new(())
        }
    };
    let outcome = sweep_with_hooks(&config.equation, &config.evolution, &config.sweep, &hooks)?;

    let path = config.out_dir.join("records.csv");
    let mut w = create(&path)?;
    write_records(&mut w, &config.equation, &outcome.records).map_err(io_err(&path))?;
    finish(w, &path)?;

    let path = config.out_dir.join("verdict.txt");
    let mut w = create(&path)?;
    write_verdict(&mut w, &config.equation, &outcome).map_err(io_err(&path))?;
    finish(w, &path)?;

    if config.dump_state {
        for (r, s) in outcome.records.iter().zip(&outcome.states) {
            let path = config.out_dir.join(format!("state_T{}.txt", r.total_time));
            let mut w = create(&path)?;
            s.write_dump(&mut w).map_err(io_err(&path))?;
            finish(w, &path)?;
        }
    }

    Ok(match outcome.verdict {
        Some(v) => Outcome::Verdict(v),
        None => Outcome::NoVerdict,
    })
}

fn run_gap_profile(config: &RunConfig) -> Result<Outcome, CliError> {
    let space = config.evolution.initial_space()?;
    let profile = gap_profile(
        &config.equation,
        &config.evolution.alphas,
        &space,
        &uniform_grid(config.gap_points),
        config.levels,
        DEFAULT_ORACLE_CAP,
        config.sweep.jobs,
    )?;
    let path = config.out_dir.join("gap.csv");
    let mut w = create(&path)?;
    profile.write_csv(&mut w).map_err(io_err(&path))?;
    finish(w, &path)?;
    let (s, gap) = profile.min_gap;
    log::info!("minimum interior gap {gap:.6e} at s = {s}");
    Ok(Outcome::Done)
}

fn run_oracle_check(config: &RunConfig) -> Result<Outcome, CliError> {
    let space = config.evolution.initial_space()?;
    let hp = ProblemHamiltonian::new(config.equation.clone(), space.clone())?;
    let hi = InitialHamiltonian::new(config.evolution.alphas.clone());
    let mut lines = Vec::new();
    let mut ok = true;
    for s in [0.0, 0.25, 0.5, 0.75, 1.0] {
        let h = InterpolatedHamiltonian::new(SchedulePoint::new(s)?, &hp, &hi)?;
        let columns = assemble_columns(&h);
        let dense = dense_h(s, &config.equation, &config.evolution.alphas, &space, DEFAULT_ORACLE_CAP)?;
        let mut worst: f64 = 0.0;
        for (j, col) in columns.iter().enumerate() {
            for (i, v) in col.iter().enumerate() {
                worst = worst.max((v - dense[(i, j)]).norm());
            }
        }
        let pass = worst <= 1e-12 * dense.iter().map(|v| v.norm()).fold(1.0, f64::max);
        ok &= pass;
        lines.push(format!("operator s = {s}: max |apply_h - dense_h| = {worst:.3e} {}", if pass { "ok" } else { "MISMATCH" }));
    }
    let search = brute_force_search(&config.equation, space.cutoffs(), DEFAULT_SEARCH_CAP)?;
    lines.push(format!("box {:?}: min D^2 = {} at {}", space.cutoffs(), search.min_square, search.argmin.iter().map(ToString::to_string).collect::<Vec<_>>().join(" ")));
    lines.push(format!("box {:?}: {} zero(s){}", space.cutoffs(), search.zeros.len(), search.zeros.first().map_or(String::new(), |z| format!(", first {z}"))));

    let path = config.out_dir.join("oracle.txt");
    let mut w = create(&path)?;
    for line in &lines {
        writeln!(w, "{line}").map_err(io_err(&path))?;
    }
    finish(w, &path)?;
    Ok(if ok { Outcome::Done } else { Outcome::CheckFailed })
}

/// Executes a validated configuration.
pub fn run(config: &RunConfig) -> Result<Outcome, CliError> {
    fs::create_dir_all(&config.out_dir).map_err(io_err(&config.out_dir))?;
    match config.mode {
        Mode::Sweep => run_sweep(config),
        Mode::GapProfile => run_gap_profile(config),
        Mode::OracleCheck => run_oracle_check(config),
    }
}

/// Parses, runs and reports; returns the process exit status.
pub fn main_with_args<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let args = match Args::try_parse_from(argv) {
        Ok(a) => a,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 1 } else { 0 };
        }
    };
    let result = RunConfig::from_args(args).and_then(|config| {
        let outcome = run(&config)?;
        match &outcome {
            Outcome::Verdict(v) => println!(
                "ground {} (p = {:.4}, T = {}): E_g = {}, has_solution = {}",
                v.ground, v.ground_probability, v.total_time, v.e_g, v.has_solution
            ),
            Outcome::NoVerdict => println!("no stable majority within the sweep"),
            Outcome::Done => println!("done; output in {}", config.out_dir.display()),
            Outcome::CheckFailed => println!("oracle check failed; see {}", config.out_dir.join("oracle.txt").display()),
        }
        Ok(outcome)
    });
    match result {
        Ok(outcome) => outcome.exit_code(),
        Err(e) => {
            eprintln!("error: {e}");
            1
        }
    }
}
