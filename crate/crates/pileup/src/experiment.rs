//! JSON-specified convergence experiments: for each wall count `n` in a
//! sweep, minimize the discrete energy, compare the empirical measure with
//! the continuum minimizer, and persist machine-readable records.
//!
//! A spec fixes the asymptotic regime, the `β(n)` rule, solver and grid
//! settings, and a seed; a run is deterministic given the spec, including
//! the randomized starting configurations (one independent stream per `n`).
//! Per-`n` solves run concurrently; assembly is ordered by `n`.

use crate::continuum::{
    el_residual, limit_energy, minimizer_closed_form, minimizer_numerical, DensityGrid,
    EnergyInput, GridSpec,
};
use crate::discrete::{classify, Regime, WallConfiguration};
use crate::measures::{
    density_estimate, empirical_from_config, w1_distance, MeasureRef,
};
use crate::optimize::{minimize, InitialGuess, SolveOptions};
use crate::{Error, Result};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::path::{Path, PathBuf};

/// Rule assigning `β` to each `n` in the sweep.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum BetaRule {
    /// One explicit value per entry of `n_list`.
    Explicit { values: Vec<f64> },
    /// A formula tag: `"c/n"`, `"1/sqrt(n)"`, or `"c/(n*sqrt(n))"`,
    /// with `c` taken from the spec.
    Formula { formula: String },
    /// The same `β` for every `n`.
    Constant { constant: f64 },
}

/// Solver settings (discrete and continuum tolerances).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolverSection {
    /// Projected-gradient-norm tolerance for the discrete minimization.
    #[serde(default = "default_tol")]
    pub tol: f64,
    /// KKT tolerance for the continuum solver (regimes 2 and 4).
    #[serde(default = "default_continuum_tol")]
    pub continuum_tol: f64,
}

fn default_tol() -> f64 {
    1e-8
}

fn default_continuum_tol() -> f64 {
    1e-7
}

impl Default for SolverSection {
    fn default() -> Self {
        SolverSection { tol: default_tol(), continuum_tol: default_continuum_tol() }
    }
}

/// Continuum grid settings.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridSection {
    /// Support upper bound for the numerical continuum solver.
    pub l: f64,
    /// Node count for continuum grids and resampled density estimates.
    pub m: usize,
}

/// A complete experiment specification (deserialized from a flat JSON
/// document).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentSpec {
    /// Asymptotic case index 1..=5.
    pub regime: usize,
    /// Regime constant `c` (required for regimes 2 and 4).
    #[serde(default)]
    pub c: Option<f64>,
    /// Increasing wall counts to sweep.
    pub n_list: Vec<usize>,
    /// Rule assigning `β` to each `n`.
    pub beta_rule: BetaRule,
    #[serde(default)]
    pub solver: SolverSection,
    pub grid: GridSection,
    /// Default output stem for persisted artifacts (CLI may override).
    #[serde(default)]
    pub output: Option<String>,
    /// Seed for the randomized starting configurations.
    #[serde(default)]
    pub seed: u64,
}

impl ExperimentSpec {
    /// Parses a spec from JSON and validates it.
    pub fn from_json(text: &str) -> Result<Self> {
        let spec: ExperimentSpec = serde_json::from_str(text)?;
        spec.validate()?;
        Ok(spec)
    }

    /// Checks the spec invariants: nonempty increasing `n_list`, a `β` rule
    /// consistent with the declared regime at the largest `n`, and regime
    /// constants where required.
    pub fn validate(&self) -> Result<()> {
        if self.n_list.is_empty() {
            return Err(Error::invalid("n_list must not be empty"));
        }
        if self.n_list.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::invalid("n_list must be strictly increasing"));
        }
        if self.n_list[0] == 0 {
            return Err(Error::invalid("n must be positive"));
        }
        self.regime_enum()?;
        if let BetaRule::Explicit { values } = &self.beta_rule {
            if values.len() != self.n_list.len() {
                return Err(Error::invalid(format!(
                    "explicit beta list has {} entries for {} values of n",
                    values.len(),
                    self.n_list.len()
                )));
            }
        }
        let n_max = *self.n_list.last().expect("nonempty");
        let beta = self.beta_for(n_max)?;
        if !(beta > 0.0 && beta.is_finite()) {
            return Err(Error::invalid(format!("beta rule yields invalid beta {beta}")));
        }
        let suggested = classify(beta, n_max, &Default::default())?.suggestion;
        if suggested.case_index() != self.regime {
            return Err(Error::invalid(format!(
                "beta rule classifies as case {} at n = {n_max}, spec declares case {}",
                suggested.case_index(),
                self.regime
            )));
        }
        Ok(())
    }

    /// Maps the case index (plus `c`) to the regime enum.
    pub fn regime_enum(&self) -> Result<Regime> {
        match self.regime {
            1 => Ok(Regime::Subcritical),
            2 => Ok(Regime::FirstCritical { c: self.require_c()? }),
            3 => Ok(Regime::Intermediate),
            4 => Ok(Regime::SecondCritical { c: self.require_c()? }),
            5 => Ok(Regime::Supercritical),
            k => Err(Error::invalid(format!("regime must lie in 1..=5, got {k}"))),
        }
    }

    fn require_c(&self) -> Result<f64> {
        match self.c {
            Some(c) if c > 0.0 && c.is_finite() => Ok(c),
            _ => Err(Error::invalid(format!(
                "regime {} requires a positive finite c, got {:?}",
                self.regime, self.c
            ))),
        }
    }

    /// The `β` assigned to a given `n` by the rule.
    pub fn beta_for(&self, n: usize) -> Result<f64> {
        match &self.beta_rule {
            BetaRule::Explicit { values } => {
                let idx = self
                    .n_list
                    .iter()
                    .position(|&m| m == n)
                    .ok_or_else(|| Error::invalid(format!("n = {n} not in n_list")))?;
                Ok(values[idx])
            }
            BetaRule::Constant { constant } => Ok(*constant),
            BetaRule::Formula { formula } => {
                let nf = n as f64;
                match formula.as_str() {
                    "c/n" => Ok(self.require_c()? / nf),
                    "1/sqrt(n)" => Ok(1.0 / nf.sqrt()),
                    "c/(n*sqrt(n))" => Ok(self.require_c()? / (nf * nf.sqrt())),
                    other => Err(Error::invalid(format!(
                        "unknown beta formula {other:?}; supported: \"c/n\", \
                         \"1/sqrt(n)\", \"c/(n*sqrt(n))\""
                    ))),
                }
            }
        }
    }
}

/// One record per swept `n`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunRecord {
    pub n: usize,
    pub beta: f64,
    /// Minimizer positions `x_1..x_n`.
    pub positions: Vec<f64>,
    pub energy_discrete: f64,
    /// The continuum minimum value (constant across the sweep).
    pub energy_continuum: f64,
    /// W1 distance between the empirical measure of the minimizer and the
    /// continuum minimizer.
    pub w1: f64,
    /// Euler-Lagrange residual of the resampled discrete density estimate
    /// (absent for regime 5 and whenever the estimator is undefined).
    pub el_residual: Option<f64>,
    pub iterations: usize,
    pub converged: bool,
}

/// Continuum minimizer samples persisted with the sweep.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ContinuumSamples {
    pub l: f64,
    pub x: Vec<f64>,
    pub rho: Vec<f64>,
    pub energy: f64,
}

/// The full result of [`run`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunResult {
    pub spec: ExperimentSpec,
    pub records: Vec<RunRecord>,
    pub continuum: ContinuumSamples,
}

/// Deterministic randomized start: positive gaps in `[0.5/n, 2/n)`, one
/// independent stream per `(seed, n)`.
fn random_start(seed: u64, n: usize) -> WallConfiguration {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ (n as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15));
    let gaps: Vec<f64> = (0..n).map(|_| rng.gen_range(0.5..2.0) / n as f64).collect();
    WallConfiguration::from_gaps(&gaps).expect("positive gaps are valid")
}

/// The continuum minimizer for the regime: closed form for cases 1, 3, 5,
/// the numerical solver for cases 2 and 4.
fn continuum_minimizer(spec: &ExperimentSpec) -> Result<DensityGrid> {
    match spec.regime {
        1 | 3 | 5 => minimizer_closed_form(spec.regime, spec.grid.m),
        2 | 4 => {
            let grid = GridSpec::new(spec.grid.l, spec.grid.m)?;
            minimizer_numerical(spec.regime, spec.c, &grid, spec.solver.continuum_tol)
        }
        k => Err(Error::invalid(format!("regime must lie in 1..=5, got {k}"))),
    }
}

/// Resamples the discrete density estimate onto a uniform grid over
/// `[0, x_n]` for residual evaluation.
fn estimate_to_grid(config: &WallConfiguration, m: usize) -> Result<DensityGrid> {
    let est = density_estimate(config)?;
    let l = *est.positions.last().expect("nonempty");
    let h = l / (m - 1) as f64;
    let mut rho = vec![0.0; m];
    for (j, r) in rho.iter_mut().enumerate() {
        let x = j as f64 * h;
        // clamp-interpolate the estimator interpolant over [x_1, x_n]
        let x = x.clamp(est.positions[0], l);
        let t = est.positions.partition_point(|&p| p < x).clamp(1, est.positions.len() - 1);
        let (x0, x1) = (est.positions[t - 1], est.positions[t]);
        let (y0, y1) = (est.values[t - 1], est.values[t]);
        *r = (y0 + (y1 - y0) * (x - x0) / (x1 - x0)).max(0.0);
    }
    DensityGrid::normalized(l, rho)
}

/// Runs the sweep: for each `n`, minimize the discrete energy from a
/// seeded random start, then record the energy, the W1 distance to the
/// continuum minimizer, and the density-estimate residual. Solver
/// non-convergence is recorded per `n`; the run continues.
pub fn run(spec: &ExperimentSpec) -> Result<RunResult> {
    spec.validate()?;
    let regime = spec.regime_enum()?;
    let reference = continuum_minimizer(spec)?;
    let energy_continuum = limit_energy(
        spec.regime,
        EnergyInput::Density(&reference),
        if matches!(spec.regime, 2 | 4) { spec.c } else { None },
    )?;
    let records: Result<Vec<RunRecord>> = spec
        .n_list
        .par_iter()
        .map(|&n| -> Result<RunRecord> {
            let beta = spec.beta_for(n)?;
            let options = SolveOptions {
                grad_tol: spec.solver.tol,
                initial: InitialGuess::Config(random_start(spec.seed, n)),
                ..Default::default()
            };
            let solve = minimize(&regime, beta, n, &options)?;
            let mu = empirical_from_config(&solve.config);
            let w1 = w1_distance(
                MeasureRef::Empirical(&mu),
                MeasureRef::Density(&reference),
            )?;
            let el = if spec.regime <= 4 {
                estimate_to_grid(&solve.config, spec.grid.m)
                    .and_then(|grid| {
                        el_residual(
                            spec.regime,
                            &grid,
                            if matches!(spec.regime, 2 | 4) { spec.c } else { None },
                        )
                    })
                    .ok()
            } else {
                None
            };
            Ok(RunRecord {
                n,
                beta,
                positions: solve.config.positions().to_vec(),
                energy_discrete: solve.energy,
                energy_continuum,
                w1,
                el_residual: el,
                iterations: solve.iterations,
                converged: solve.converged,
            })
        })
        .collect();
    let records = records?;
    let continuum = ContinuumSamples {
        l: reference.l(),
        x: (0..reference.len()).map(|j| reference.node(j)).collect(),
        rho: reference.values().to_vec(),
        energy: energy_continuum,
    };
    Ok(RunResult { spec: spec.clone(), records, continuum })
}

/// Output format for [`emit`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EmitFormat {
    Csv,
    Json,
}

/// JSON formatter writing every float with 17 significant digits, which
/// round-trips any f64 exactly.
struct SciFormatter;

impl serde_json::ser::Formatter for SciFormatter {
    fn write_f64<W>(&mut self, writer: &mut W, value: f64) -> std::io::Result<()>
    where
        W: ?Sized + std::io::Write,
    {
        if value.is_finite() {
            write!(writer, "{value:.16e}")
        } else {
            writer.write_all(b"null")
        }
    }

    fn write_f32<W>(&mut self, writer: &mut W, value: f32) -> std::io::Result<()>
    where
        W: ?Sized + std::io::Write,
    {
        self.write_f64(writer, value as f64)
    }
}

/// Serializes a result to JSON with reproducible float formatting.
pub fn to_json_string(result: &RunResult) -> Result<String> {
    let mut out = Vec::new();
    let mut ser = serde_json::Serializer::with_formatter(&mut out, SciFormatter);
    result.serialize(&mut ser)?;
    Ok(String::from_utf8(out).expect("serde_json emits UTF-8"))
}

/// Parses a result back from JSON.
pub fn from_json_str(text: &str) -> Result<RunResult> {
    Ok(serde_json::from_str(text)?)
}

fn fmt_float(x: f64) -> String {
    format!("{x:.16e}")
}

/// The sweep table as CSV text (header pinned for downstream tooling).
pub fn to_csv_string(result: &RunResult) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record([
        "n",
        "beta",
        "energy_discrete",
        "energy_continuum",
        "w1",
        "el_residual",
        "iters",
        "converged",
    ])?;
    for r in &result.records {
        w.write_record([
            r.n.to_string(),
            fmt_float(r.beta),
            fmt_float(r.energy_discrete),
            fmt_float(r.energy_continuum),
            fmt_float(r.w1),
            r.el_residual.map(fmt_float).unwrap_or_default(),
            r.iterations.to_string(),
            r.converged.to_string(),
        ])?;
    }
    let bytes = w.into_inner().map_err(|e| Error::invalid(e.to_string()))?;
    Ok(String::from_utf8(bytes).expect("csv emits UTF-8"))
}

/// Two-column `x,rho` CSV of the continuum samples.
pub fn density_csv_string(samples: &ContinuumSamples) -> String {
    let mut out = String::from("x,rho\n");
    for (x, r) in samples.x.iter().zip(&samples.rho) {
        out.push_str(&fmt_float(*x));
        out.push(',');
        out.push_str(&fmt_float(*r));
        out.push('\n');
    }
    out
}

/// Persists the result under `base` (a path stem): the sweep table
/// (`<base>.csv`) or full result (`<base>.json`), plus the continuum
/// density as `<base>_density.csv`. Returns the written paths.
pub fn emit(result: &RunResult, format: EmitFormat, base: &Path) -> Result<Vec<PathBuf>> {
    let mut written = Vec::new();
    let main = match format {
        EmitFormat::Csv => {
            let path = base.with_extension("csv");
            std::fs::write(&path, to_csv_string(result)?)?;
            path
        }
        EmitFormat::Json => {
            let path = base.with_extension("json");
            let mut text = to_json_string(result)?;
            text.push('\n');
            std::fs::write(&path, text)?;
            path
        }
    };
    written.push(main);
    let density_path = base
        .with_file_name(format!(
            "{}_density",
            base.file_name().and_then(|s| s.to_str()).unwrap_or("run")
        ))
        .with_extension("csv");
    std::fs::write(&density_path, density_csv_string(&result.continuum))?;
    written.push(density_path);
    Ok(written)
}
