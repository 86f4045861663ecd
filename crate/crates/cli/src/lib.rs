//! `biofilm` command-line driver.
//!
//! Exit codes: 0 on success, 1 when a run ends in a classified failure or a
//! check fails, 2 on usage or configuration errors.

use std::ffi::OsString;
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use biofilm_core::config::RunSpec;
use biofilm_core::coupler::{Outcome, Trajectory};
use biofilm_core::monitor::{EnvelopeOptions, InvariantFlag};
use biofilm_core::output::fmt_f64;
use biofilm_core::{
    detachment_rhs, dissipation_envelope_check, load_config, mms_study, run_simulation, write_timeseries, Error,
    MmsConfig,
};
use clap::{Args, Parser, Subcommand};
use rayon::prelude::*;

pub const EXIT_OK: i32 = 0;
pub const EXIT_FAILURE: i32 = 1;
pub const EXIT_USAGE: i32 = 2;

const DEFAULT_OUT: &str = "out";

#[derive(Debug, Parser)]
#[command(name = "biofilm", version, about = "Free-boundary biofilm simulator")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Run one simulation and write CSV outputs.
    Simulate(SimulateArgs),
    /// Run one simulation per parameter value.
    Sweep(SweepArgs),
    /// Run a simulation and check its invariants.
    Verify(VerifyArgs),
    /// Run the manufactured-solution convergence study.
    Mms(MmsArgs),
}

#[derive(Debug, Args)]
struct SimulateArgs {
    #[arg(long)]
    config: PathBuf,
    /// Output directory; overrides `output.dir`.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    dt: Option<f64>,
    #[arg(long = "grid-n")]
    grid_n: Option<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
enum SweepParam {
    Lambda,
}

#[derive(Debug, Args)]
struct SweepArgs {
    #[arg(long)]
    config: PathBuf,
    #[arg(long, value_enum)]
    param: SweepParam,
    #[arg(long, value_delimiter = ',', required = true, num_args = 1..)]
    values: Vec<f64>,
    /// Worker threads; defaults to the number of CPUs.
    #[arg(long)]
    jobs: Option<usize>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct VerifyArgs {
    #[arg(long)]
    config: PathBuf,
    /// Also write the run's outputs here.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct MmsArgs {
    /// Grid sizes to refine through.
    #[arg(long, value_delimiter = ',')]
    grids: Option<Vec<usize>>,
}

/// Parses `argv` (including the program name) and runs the subcommand.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
        }
    };
    match cli.command {
        Command::Simulate(a) => simulate(a),
        Command::Sweep(a) => sweep(a),
        Command::Verify(a) => verify(a),
        Command::Mms(a) => mms(a),
    }
}

fn usage_error(e: &Error) -> i32 {
    eprintln!("error: {e}");
    EXIT_USAGE
}

fn load(path: &Path) -> Result<RunSpec, i32> {
    load_config(path).map_err(|e| usage_error(&e))
}

fn out_dir(cli: Option<PathBuf>, spec: &RunSpec) -> PathBuf {
    cli.or_else(|| spec.output.dir.clone())
        .unwrap_or_else(|| PathBuf::from(DEFAULT_OUT))
}

fn outcome_code(outcome: Outcome) -> i32 {
    if outcome.is_success() {
        EXIT_OK
    } else {
        EXIT_FAILURE
    }
}

fn final_values(spec: &RunSpec, traj: &Trajectory) -> (f64, f64) {
    match traj.reports.last() {
        Some(r) => (r.r, r.energy),
        None => {
            let e = traj.energy_series().first().map(|&(_, e)| e).unwrap_or(f64::NAN);
            (spec.data.r0, e)
        }
    }
}

fn summary_line(spec: &RunSpec, traj: &Trajectory) -> String {
    let (r, e) = final_values(spec, traj);
    let mut line = format!("outcome={} steps={} R={r:.9} energy={e:.6e}", traj.outcome, traj.steps());
    if let Some(msg) = &traj.message {
        let _ = write!(line, " ({msg})");
    }
    line
}

fn simulate(a: SimulateArgs) -> i32 {
    let mut spec = match load(&a.config) {
        Ok(s) => s,
        Err(code) => return code,
    };
    if let Some(dt) = a.dt {
        spec.solver.dt = dt;
    }
    if let Some(n) = a.grid_n {
        spec.solver.grid_cells = n;
    }
    if let Err(e) = spec.solver.check() {
        return usage_error(&e);
    }
    let dir = out_dir(a.out, &spec);
    let traj = run_simulation(&spec.data, &spec.kinetics, &spec.solver, spec.t_end);
    if let Err(e) = write_timeseries(&traj, &dir, Some(&spec.config_hash)) {
        eprintln!("error: {e}");
        return EXIT_FAILURE;
    }
    println!("{}", summary_line(&spec, &traj));
    println!("wrote {}", dir.display());
    outcome_code(traj.outcome)
}

struct SweepRow {
    value: f64,
    outcome: Result<Outcome, String>,
    final_r: f64,
    final_energy: f64,
    steps: usize,
}

fn sweep_one(spec: &RunSpec, value: f64, dir: &Path) -> SweepRow {
    let failed = |msg: String| SweepRow {
        value,
        outcome: Err(msg),
        final_r: f64::NAN,
        final_energy: f64::NAN,
        steps: 0,
    };
    let spec = match spec.clone().with_lambda(value) {
        Ok(s) => s,
        Err(e) => return failed(e.to_string()),
    };
    let traj = run_simulation(&spec.data, &spec.kinetics, &spec.solver, spec.t_end);
    if let Err(e) = write_timeseries(&traj, dir, Some(&spec.config_hash)) {
        return failed(e.to_string());
    }
    let (final_r, final_energy) = final_values(&spec, &traj);
    SweepRow {
        value,
        outcome: Ok(traj.outcome),
        final_r,
        final_energy,
        steps: traj.steps(),
    }
}

fn sweep(a: SweepArgs) -> i32 {
    let spec = match load(&a.config) {
        Ok(s) => s,
        Err(code) => return code,
    };
    if let Some(bad) = a.values.iter().find(|v| !(**v > 0.0 && v.is_finite())) {
        return usage_error(&Error::NonpositiveParam {
            name: "lambda".into(),
            value: *bad,
        });
    }
    if a.jobs == Some(0) {
        eprintln!("error: --jobs must be at least 1");
        return EXIT_USAGE;
    }
    let root = out_dir(a.out, &spec);
    let name = match a.param {
        SweepParam::Lambda => "lambda",
    };
    let dirs: Vec<PathBuf> = (0..a.values.len())
        .map(|k| root.join(format!("{name}_{k:03}")))
        .collect();

    let mut pool = rayon::ThreadPoolBuilder::new();
    if let Some(j) = a.jobs {
        pool = pool.num_threads(j);
    }
    let pool = match pool.build() {
        Ok(p) => p,
        Err(e) => {
            eprintln!("error: {e}");
            return EXIT_FAILURE;
        }
    };
    let rows: Vec<SweepRow> = pool.install(|| {
        a.values
            .par_iter()
            .zip(dirs.par_iter())
            .map(|(&v, dir)| sweep_one(&spec, v, dir))
            .collect()
    });

    let mut csv = format!("{name},outcome,final_R,final_energy,steps\n");
    let mut ok = true;
    for row in &rows {
        let outcome = match &row.outcome {
            Ok(o) => o.as_str(),
            Err(msg) => {
                eprintln!("error: {name} = {}: {msg}", row.value);
                ok = false;
                "error"
            }
        };
        let _ = writeln!(
            csv,
            "{},{outcome},{},{},{}",
            fmt_f64(row.value),
            fmt_f64(row.final_r),
            fmt_f64(row.final_energy),
            row.steps
        );
        println!("{name}={} outcome={outcome} final_R={:.9} steps={}", row.value, row.final_r, row.steps);
    }
    let path = root.join("sweep_summary.csv");
    if let Err(e) = fs::create_dir_all(&root).and_then(|_| fs::write(&path, csv)) {
        eprintln!("error: {}: {e}", path.display());
        return EXIT_FAILURE;
    }
    println!("wrote {}", path.display());
    if ok {
        EXIT_OK
    } else {
        EXIT_FAILURE
    }
}

/// One line of the verify report.
struct Check {
    name: &'static str,
    passed: bool,
    detail: String,
}

fn verify_checks(spec: &RunSpec, traj: &Trajectory) -> Vec<Check> {
    let mut checks = Vec::new();
    let any_flag = |f: InvariantFlag| traj.reports.iter().position(|r| r.invariant_flags.contains(&f));

    checks.push(Check {
        name: "outcome",
        passed: traj.outcome.is_success(),
        detail: summary_line(spec, traj),
    });

    let nonnegative_start = traj
        .initial()
        .is_some_and(|s| s.y.iter().chain(&s.c).all(|p| p.min() >= 0.0));
    if nonnegative_start {
        let hit = any_flag(InvariantFlag::NegativeY).or(any_flag(InvariantFlag::NegativeC));
        let min = traj
            .states
            .iter()
            .flat_map(|s| s.state.y.iter().chain(&s.state.c))
            .map(|p| p.min())
            .fold(f64::INFINITY, f64::min);
        checks.push(Check {
            name: "positivity",
            passed: hit.is_none(),
            detail: match hit {
                Some(k) => format!("negative values at step {}", k + 1),
                None => format!("min over stored states {min:.3e}"),
            },
        });
    }

    let hit = any_flag(InvariantFlag::RBoundExceeded);
    checks.push(Check {
        name: "r_bound",
        passed: hit.is_none(),
        detail: match hit {
            Some(k) => format!("R above the bound at step {}", k + 1),
            None => "R stays below max(R0, sqrt(max|v1|/lambda))".into(),
        },
    });

    if let Some(v) = &spec.verify {
        let weights = spec.solver.energy_weights.resolve(spec.kinetics.n(), spec.kinetics.m());
        let opts = EnvelopeOptions {
            tol: v.envelope_tol,
            include_boundary_flux: v.include_boundary_flux,
        };
        let (passed, detail) = match dissipation_envelope_check(traj, v.alpha, v.beta_m0, &weights, opts) {
            Ok(rep) => (true, format!("gamma {:.4e}, min margin {:.3e}", rep.gamma, rep.min_margin())),
            Err(e) => (false, e.to_string()),
        };
        checks.push(Check {
            name: "energy_envelope",
            passed,
            detail,
        });
    }

    if let Some(last) = traj.reports.last() {
        let rhs = detachment_rhs(last.r, last.v1, spec.data.lambda);
        let gap = (last.v1 - spec.data.lambda * last.r * last.r).abs();
        if rhs.abs() < 1e-8 {
            let tol = 1e-6 * last.v1.max(1.0);
            checks.push(Check {
                name: "equilibrium",
                passed: gap < tol,
                detail: format!("|dR/dt| {:.3e}, |v1 - lambda R^2| {gap:.3e}", rhs.abs()),
            });
        } else {
            checks.push(Check {
                name: "equilibrium",
                passed: true,
                detail: format!("not at steady state (|dR/dt| {:.3e}); skipped", rhs.abs()),
            });
        }
    }
    checks
}

fn verify(a: VerifyArgs) -> i32 {
    let spec = match load(&a.config) {
        Ok(s) => s,
        Err(code) => return code,
    };
    let traj = run_simulation(&spec.data, &spec.kinetics, &spec.solver, spec.t_end);
    if let Some(dir) = &a.out {
        if let Err(e) = write_timeseries(&traj, dir, Some(&spec.config_hash)) {
            eprintln!("error: {e}");
            return EXIT_FAILURE;
        }
    }
    let checks = verify_checks(&spec, &traj);
    for c in &checks {
        println!("{} {}: {}", if c.passed { "PASS" } else { "FAIL" }, c.name, c.detail);
    }
    if checks.iter().all(|c| c.passed) {
        EXIT_OK
    } else {
        EXIT_FAILURE
    }
}

fn mms(a: MmsArgs) -> i32 {
    let mut cfg = MmsConfig::default();
    if let Some(g) = a.grids {
        if g.iter().any(|&n| n < 4) {
            return usage_error(&Error::TooCoarse(*g.iter().min().unwrap_or(&0)));
        }
        cfg.grids = g;
    }
    let (report, code) = match mms_study(&cfg) {
        Ok(r) => (r, EXIT_OK),
        Err(Error::OrderRegression { report, .. }) => (*report, EXIT_FAILURE),
        Err(e) => return usage_error(&e),
    };
    println!("case,N,dz,error");
    for c in &report.cases {
        for ((n, dz), e) in c.grids.iter().zip(&c.dz).zip(&c.errors) {
            println!("{},{n},{},{}", c.case.name(), fmt_f64(*dz), fmt_f64(*e));
        }
    }
    for c in &report.cases {
        println!(
            "{} {}: observed order {:.3} (floor {})",
            if c.passed() { "PASS" } else { "FAIL" },
            c.case.name(),
            c.order,
            c.floor
        );
    }
    code
}
