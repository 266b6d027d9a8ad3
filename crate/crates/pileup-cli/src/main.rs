//! Command-line front end for the wall pile-up library.
//!
//! Four subcommands cover the everyday workflows:
//!
//! - `run <spec.json>`: execute a full experiment sweep described by a JSON
//!   spec (regime, wall counts, a rule assigning `β` to each `n`, solver and
//!   grid settings, seed) and emit CSV or JSON artifacts.
//! - `minimize`: one ad-hoc discrete energy minimization from flags.
//! - `continuum`: one continuum limit minimizer, written as `x,rho` CSV.
//! - `potential`: a table of the interaction potential `V`, its derivative,
//!   the effective potential `V_eff`, and the Fourier transform `V̂`.
//!
//! Each subcommand writes its main document to `--out <path>` when given,
//! otherwise to stdout. All floating point output uses 17 significant digits
//! so that artifacts reproduce bit-for-bit.
//!
//! Exit status: 0 only when every requested solve converged; 1 when a solve
//! finished without reaching tolerance; 2 on invalid input or I/O failure.

use std::fmt::Write as _;
use std::fs;
use std::io::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use pileup::continuum::{
    limit_energy, minimizer_closed_form, minimizer_numerical, EnergyInput, GridSpec,
};
use pileup::discrete::Regime;
use pileup::experiment::{self, EmitFormat, ExperimentSpec};
use pileup::optimize::{minimize, MinimizeResult, SolveOptions};
use pileup::potential;

/// Series tolerance for the `V_eff` column of the potential table.
const VEFF_TABLE_TOL: f64 = 1e-12;

#[derive(Parser)]
#[command(
    name = "pileup",
    version,
    about = "Discrete dislocation wall pile-ups and their continuum limits"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run an experiment sweep from a JSON spec and emit artifacts.
    Run(RunArgs),
    /// Minimize the discrete energy for a single (regime, n, beta).
    Minimize(MinimizeArgs),
    /// Compute a continuum limit minimizer and write it as x,rho CSV.
    Continuum(ContinuumArgs),
    /// Tabulate V, V', V_eff, and the Fourier transform over a range.
    Potential(PotentialArgs),
}

#[derive(Args)]
struct RunArgs {
    /// Path to the JSON experiment spec.
    spec: PathBuf,
    /// Output stem; artifacts land at <OUT>.csv/.json and <OUT>_density.csv.
    /// Overrides the spec's own `output` field. Without either, the main
    /// document goes to stdout.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Main artifact format.
    #[arg(long, value_enum, default_value_t = OutputFormat::Csv)]
    format: OutputFormat,
    /// Worker thread cap for the per-n solves (defaults to all cores).
    #[arg(long)]
    jobs: Option<usize>,
}

#[derive(Args)]
struct MinimizeArgs {
    /// Asymptotic case index 1..=5.
    #[arg(long)]
    regime: usize,
    /// Number of free walls.
    #[arg(long)]
    n: usize,
    /// Nondimensional parameter beta = sqrt(K/(n sigma h)).
    #[arg(long)]
    beta: f64,
    /// Regime constant c (required for regimes 2 and 4).
    #[arg(long)]
    c: Option<f64>,
    /// Convergence threshold on the projected-gradient sup-norm.
    #[arg(long, default_value_t = 1e-8)]
    tol: f64,
    /// Where to write the JSON result (stdout when omitted).
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct ContinuumArgs {
    /// Limit case index 1..=5.
    #[arg(long)]
    regime: usize,
    /// Regime constant c (required for regimes 2 and 4).
    #[arg(long)]
    c: Option<f64>,
    /// Domain half-line truncation [0, l]; used by the numerical solver
    /// (regimes 2 and 4). Closed forms pick their own support.
    #[arg(long, default_value_t = 1.0)]
    l: f64,
    /// Number of grid nodes.
    #[arg(long, default_value_t = 201)]
    m: usize,
    /// KKT residual tolerance for the numerical solver.
    #[arg(long, default_value_t = 1e-7)]
    tol: f64,
    /// Where to write the x,rho CSV (stdout when omitted).
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct PotentialArgs {
    /// Left end of the range (must be positive; V diverges at 0).
    #[arg(long, default_value_t = 0.05)]
    min: f64,
    /// Right end of the range.
    #[arg(long, default_value_t = 5.0)]
    max: f64,
    /// Number of equally spaced sample points.
    #[arg(long, default_value_t = 100)]
    points: usize,
    /// Where to write the CSV table (stdout when omitted).
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum OutputFormat {
    Csv,
    Json,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = match cli.command {
        Command::Run(args) => run_cmd(args),
        Command::Minimize(args) => minimize_cmd(args),
        Command::Continuum(args) => continuum_cmd(args),
        Command::Potential(args) => potential_cmd(args),
    };
    match outcome {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::from(2)
        }
    }
}

/// Formats a float as a JSON/CSV-safe number with 17 significant digits.
fn num17(x: f64) -> String {
    if x.is_finite() {
        format!("{x:.16e}")
    } else {
        String::from("null")
    }
}

/// Writes the main document to `out`, or to stdout when `out` is `None`.
fn write_out(out: Option<&Path>, doc: &str) -> Result<()> {
    match out {
        Some(path) => fs::write(path, doc).with_context(|| format!("writing {}", path.display())),
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout.write_all(doc.as_bytes())?;
            if !doc.ends_with('\n') {
                stdout.write_all(b"\n")?;
            }
            Ok(())
        }
    }
}

/// Builds a [`Regime`] from the flag pair, rejecting inconsistent `--c`.
fn regime_from_flags(k: usize, c: Option<f64>) -> Result<Regime> {
    match (k, c) {
        (1, None) => Ok(Regime::Subcritical),
        (2, Some(c)) => Ok(Regime::FirstCritical { c }),
        (3, None) => Ok(Regime::Intermediate),
        (4, Some(c)) => Ok(Regime::SecondCritical { c }),
        (5, None) => Ok(Regime::Supercritical),
        (2 | 4, None) => bail!("regime {k} requires --c"),
        (1 | 3 | 5, Some(_)) => bail!("regime {k} does not take --c"),
        _ => bail!("regime must lie in 1..=5, got {k}"),
    }
}

fn run_cmd(args: RunArgs) -> Result<bool> {
    if let Some(jobs) = args.jobs {
        if jobs == 0 {
            bail!("--jobs must be at least 1");
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(jobs)
            .build_global()
            .context("configuring the worker pool")?;
    }
    let text = fs::read_to_string(&args.spec)
        .with_context(|| format!("reading spec {}", args.spec.display()))?;
    let spec = ExperimentSpec::from_json(&text).context("parsing experiment spec")?;
    let result = experiment::run(&spec).context("running the sweep")?;

    let format = match args.format {
        OutputFormat::Csv => EmitFormat::Csv,
        OutputFormat::Json => EmitFormat::Json,
    };
    let base = args.out.clone().or_else(|| spec.output.clone().map(PathBuf::from));
    match base {
        Some(base) => {
            let files = experiment::emit(&result, format, &base).context("writing artifacts")?;
            for file in &files {
                eprintln!("wrote {}", file.display());
            }
        }
        None => {
            let doc = match format {
                EmitFormat::Csv => experiment::to_csv_string(&result)?,
                EmitFormat::Json => experiment::to_json_string(&result)?,
            };
            write_out(None, &doc)?;
        }
    }

    let stalled: Vec<usize> =
        result.records.iter().filter(|r| !r.converged).map(|r| r.n).collect();
    if stalled.is_empty() {
        Ok(true)
    } else {
        eprintln!("warning: solver did not reach tolerance for n in {stalled:?}");
        Ok(false)
    }
}

fn minimize_cmd(args: MinimizeArgs) -> Result<bool> {
    let regime = regime_from_flags(args.regime, args.c)?;
    if !(args.tol > 0.0) {
        bail!("--tol must be positive, got {}", args.tol);
    }
    let opts = SolveOptions { grad_tol: args.tol, ..SolveOptions::default() };
    let solved = minimize(&regime, args.beta, args.n, &opts).context("minimizing")?;
    let doc = minimize_json(&args, &solved);
    write_out(args.out.as_deref(), &doc)?;
    if !solved.converged {
        eprintln!(
            "warning: projected gradient stalled at {:.3e} (tolerance {:.3e})",
            solved.grad_norm, args.tol
        );
    }
    Ok(solved.converged)
}

/// Renders a single-solve result as a flat JSON document.
fn minimize_json(args: &MinimizeArgs, solved: &MinimizeResult) -> String {
    let positions: Vec<String> = solved.config.positions().iter().map(|&x| num17(x)).collect();
    let mut doc = String::new();
    let _ = write!(
        doc,
        "{{\"regime\":{},\"n\":{},\"beta\":{},",
        args.regime,
        args.n,
        num17(args.beta)
    );
    if let Some(c) = args.c {
        let _ = write!(doc, "\"c\":{},", num17(c));
    }
    let _ = write!(
        doc,
        "\"energy\":{},\"iterations\":{},\"converged\":{},\"grad_norm\":{},\"positions\":[{}]}}",
        num17(solved.energy),
        solved.iterations,
        solved.converged,
        num17(solved.grad_norm),
        positions.join(",")
    );
    doc.push('\n');
    doc
}

fn continuum_cmd(args: ContinuumArgs) -> Result<bool> {
    let k = args.regime;
    let regime = regime_from_flags(k, args.c)?;
    let c = regime.c();
    let density = match k {
        1 | 3 | 5 => minimizer_closed_form(k, args.m)?,
        _ => {
            let spec = GridSpec::new(args.l, args.m)?;
            minimizer_numerical(k, c, &spec, args.tol).context("solving for the minimizer")?
        }
    };
    let energy = limit_energy(k, EnergyInput::Density(&density), c)?;

    let mut doc = String::from("x,rho\n");
    for (j, &r) in density.values().iter().enumerate() {
        let _ = writeln!(doc, "{},{}", num17(density.node(j)), num17(r));
    }
    write_out(args.out.as_deref(), &doc)?;
    eprintln!("support [0, {}], energy {}", num17(density.l()), num17(energy));
    Ok(true)
}

fn potential_cmd(args: PotentialArgs) -> Result<bool> {
    if !(args.min > 0.0 && args.min.is_finite()) {
        bail!("--min must be positive (the potential diverges at 0), got {}", args.min);
    }
    if !(args.max > args.min) || !args.max.is_finite() {
        bail!("--max must exceed --min, got {} <= {}", args.max, args.min);
    }
    if args.points < 2 {
        bail!("--points must be at least 2, got {}", args.points);
    }
    let mut doc = String::from("s,v,v_prime,v_eff,v_hat\n");
    let step = (args.max - args.min) / (args.points - 1) as f64;
    for i in 0..args.points {
        let s = args.min + step * i as f64;
        let v = potential::v(s)?;
        let vp = potential::v_prime(s)?;
        let ve = potential::v_eff(s, VEFF_TABLE_TOL)?;
        let vh = potential::v_hat(s);
        let _ = writeln!(doc, "{},{},{},{},{}", num17(s), num17(v), num17(vp), num17(ve), num17(vh));
    }
    write_out(args.out.as_deref(), &doc)?;
    Ok(true)
}
