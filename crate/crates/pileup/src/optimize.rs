//! Minimization of the discrete pile-up energies and their gradient flow.
//!
//! The energies of [`crate::discrete`] are minimized over the ordered cone
//! `0 ≤ x_1 ≤ … ≤ x_n`. In the gap variables `g_i = x_i − x_{i−1}` the cone
//! becomes the box `g_i ≥ 0`, and the energy stays convex there for the
//! finite-interaction cases (`V` is convex on `(0, ∞)` and each pair distance
//! is a nonnegative combination of gaps), so projected gradient descent with
//! a Barzilai–Borwein trial step and Armijo backtracking converges to the
//! unique minimizer. Zero gaps carry infinite energy (two walls coincide), so
//! the line search automatically keeps accepted iterates strictly ordered; in
//! the renormalized subcritical case the gaps are additionally floored at
//! `1e-14` to keep the logarithmic singularity out of floating-point range.
//!
//! The same forces drive the overdamped evolution `dx_i/dt = −(1/B)∂_{x_i}E`,
//! integrated here by an explicit Euler scheme with step adaptation: a step
//! is accepted only if it preserves the wall ordering and does not increase
//! the energy (beyond rounding noise), otherwise the step halves. Energies
//! along the returned trajectory are therefore non-increasing up to machine
//! precision.

use crate::discrete::{energy, gradient, Regime, WallConfiguration};
use crate::{Error, Result};

/// Armijo backtracking parameters for [`minimize`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LineSearch {
    /// Multiplicative step shrink on rejection, in `(0, 1)`.
    pub shrink: f64,
    /// Sufficient-decrease fraction of the first-order model, in `(0, 1)`.
    pub sufficient_decrease: f64,
}

impl Default for LineSearch {
    fn default() -> Self {
        LineSearch { shrink: 0.5, sufficient_decrease: 1e-4 }
    }
}

/// Starting configuration rule for [`minimize`].
#[derive(Debug, Clone, PartialEq)]
pub enum InitialGuess {
    /// Uniform spacing with the last wall at 1 (the force-free envelope
    /// heuristic in rescaled units).
    Uniform,
    /// Uniform spacing with the last wall at the given extent.
    UniformTo(f64),
    /// An explicit feasible configuration.
    Config(WallConfiguration),
}

impl Default for InitialGuess {
    fn default() -> Self {
        InitialGuess::Uniform
    }
}

/// Options for [`minimize`].
#[derive(Debug, Clone, PartialEq)]
pub struct SolveOptions {
    /// Convergence threshold on the projected-gradient sup-norm.
    pub grad_tol: f64,
    /// Iteration budget; exhausting it yields `converged = false`, never a
    /// silent success.
    pub max_iters: usize,
    /// Starting configuration.
    pub initial: InitialGuess,
    /// Backtracking parameters.
    pub line_search: LineSearch,
}

impl Default for SolveOptions {
    fn default() -> Self {
        SolveOptions {
            grad_tol: 1e-8,
            max_iters: 200_000,
            initial: InitialGuess::default(),
            line_search: LineSearch::default(),
        }
    }
}

impl SolveOptions {
    fn validate(&self) -> Result<()> {
        if !(self.grad_tol > 0.0) {
            return Err(Error::invalid(format!("grad_tol must be > 0, got {}", self.grad_tol)));
        }
        if self.max_iters < 1 {
            return Err(Error::invalid("max_iters must be at least 1"));
        }
        let ls = &self.line_search;
        if !(ls.shrink > 0.0 && ls.shrink < 1.0) {
            return Err(Error::invalid(format!("shrink must lie in (0,1), got {}", ls.shrink)));
        }
        if !(ls.sufficient_decrease > 0.0 && ls.sufficient_decrease < 1.0) {
            return Err(Error::invalid(format!(
                "sufficient_decrease must lie in (0,1), got {}",
                ls.sufficient_decrease
            )));
        }
        Ok(())
    }
}

/// Outcome of a [`minimize`] call.
#[derive(Debug, Clone, PartialEq)]
pub struct MinimizeResult {
    /// Final (best) configuration.
    pub config: WallConfiguration,
    /// Energy at `config`; never above the initial energy.
    pub energy: f64,
    /// Outer iterations performed.
    pub iterations: usize,
    /// Whether the projected-gradient sup-norm fell below `grad_tol`.
    pub converged: bool,
    /// Final projected-gradient sup-norm.
    pub grad_norm: f64,
}

/// Options for [`gradient_flow`].
#[derive(Debug, Clone, PartialEq)]
pub struct FlowOptions {
    /// Integration horizon `t_end > 0`.
    pub t_end: f64,
    /// Initial step `dt_init > 0`.
    pub dt_init: f64,
    /// Mobility `B > 0`; only rescales time.
    pub mobility: f64,
    /// Hard step ceiling; defaults to `1e6 · dt_init` when `None`.
    pub max_dt: Option<f64>,
    /// Accepted-step budget before giving up.
    pub max_steps: usize,
}

impl Default for FlowOptions {
    fn default() -> Self {
        FlowOptions {
            t_end: 10.0,
            dt_init: 1e-3,
            mobility: 1.0,
            max_dt: None,
            max_steps: 5_000_000,
        }
    }
}

impl FlowOptions {
    fn validate(&self) -> Result<()> {
        if !(self.t_end > 0.0 && self.t_end.is_finite()) {
            return Err(Error::invalid(format!("t_end must be > 0, got {}", self.t_end)));
        }
        if !(self.dt_init > 0.0 && self.dt_init.is_finite()) {
            return Err(Error::invalid(format!("dt_init must be > 0, got {}", self.dt_init)));
        }
        if !(self.mobility > 0.0 && self.mobility.is_finite()) {
            return Err(Error::invalid(format!("mobility must be > 0, got {}", self.mobility)));
        }
        if let Some(cap) = self.max_dt {
            if !(cap >= self.dt_init) {
                return Err(Error::invalid(format!(
                    "max_dt must be at least dt_init, got {cap} < {}",
                    self.dt_init
                )));
            }
        }
        if self.max_steps < 1 {
            return Err(Error::invalid("max_steps must be at least 1"));
        }
        Ok(())
    }
}

/// Gradient-flow trajectory: aligned samples of time, configuration, and
/// energy at accepted steps (thinned to a bounded count), ending at `t_end`.
#[derive(Debug, Clone, PartialEq)]
pub struct FlowTrajectory {
    /// Sample times, starting at 0 and ending at `t_end`.
    pub times: Vec<f64>,
    /// Configurations at the sample times.
    pub configs: Vec<WallConfiguration>,
    /// Energies at the sample times; non-increasing up to rounding noise.
    pub energies: Vec<f64>,
    /// Total accepted steps.
    pub steps: usize,
    /// Step size at the end of integration.
    pub final_dt: f64,
}

impl FlowTrajectory {
    /// Final configuration (state at `t_end`).
    pub fn final_config(&self) -> &WallConfiguration {
        self.configs.last().expect("trajectory holds at least the initial state")
    }
}

/// Smallest admissible gap: only the renormalized subcritical case needs a
/// positive floor (its kernel argument scale `n²β²` can push `V` into the
/// deep log regime where step arithmetic underflows); elsewhere zero gaps are
/// excluded dynamically by their infinite energy.
fn gap_floor(regime: &Regime) -> f64 {
    match regime {
        Regime::Subcritical => 1e-14,
        _ => 0.0,
    }
}

fn config_from_gaps(g: &[f64]) -> WallConfiguration {
    WallConfiguration::from_gaps(g).expect("projected gaps are nonnegative by construction")
}

/// Energy of a gap vector, with singular/overlapping configurations mapped
/// to `+∞` so the line search simply rejects them.
fn energy_of_gaps(regime: &Regime, beta: f64, n: usize, g: &[f64]) -> f64 {
    energy(regime, &config_from_gaps(g), beta, n).unwrap_or(f64::INFINITY)
}

/// Pulls the position-space gradient back to gap space: `x_i = Σ_{j≤i} g_j`
/// gives `∂E/∂g_i = Σ_{j≥i} ∂E/∂x_j` (suffix sums).
fn gap_gradient(regime: &Regime, beta: f64, n: usize, g: &[f64]) -> Result<Vec<f64>> {
    let mut grad = gradient(regime, &config_from_gaps(g), beta, n)?;
    for i in (0..grad.len().saturating_sub(1)).rev() {
        grad[i] += grad[i + 1];
    }
    Ok(grad)
}

/// Projected-gradient sup-norm: at the floor, only components pointing back
/// into the feasible box count.
fn projected_norm(g: &[f64], grad: &[f64], floor: f64) -> f64 {
    g.iter()
        .zip(grad)
        .map(|(&gi, &di)| if gi <= floor && di > 0.0 { 0.0 } else { di.abs() })
        .fold(0.0, f64::max)
}

fn initial_gaps(initial: &InitialGuess, n: usize, floor: f64) -> Result<Vec<f64>> {
    let config = match initial {
        InitialGuess::Uniform => WallConfiguration::uniform(n, 1.0)?,
        InitialGuess::UniformTo(extent) => {
            if !(*extent > 0.0 && extent.is_finite()) {
                return Err(Error::invalid(format!("initial extent must be > 0, got {extent}")));
            }
            WallConfiguration::uniform(n, *extent)?
        }
        InitialGuess::Config(c) => {
            if c.n() != n {
                return Err(Error::invalid(format!(
                    "initial configuration has {} walls, expected {n}",
                    c.n()
                )));
            }
            c.clone()
        }
    };
    let mut g = config.gaps();
    for gi in &mut g {
        *gi = gi.max(floor);
    }
    Ok(g)
}

/// Minimizes the case energy of `regime` over the ordered cone by projected
/// gradient descent in gap variables.
///
/// Convergence is declared when the projected-gradient sup-norm drops below
/// `opts.grad_tol`; exhausting `opts.max_iters` returns the best iterate with
/// `converged = false`. The returned energy never exceeds the initial energy
/// (monotone line search).
pub fn minimize(
    regime: &Regime,
    beta: f64,
    n: usize,
    opts: &SolveOptions,
) -> Result<MinimizeResult> {
    opts.validate()?;
    let floor = gap_floor(regime);
    let mut g = initial_gaps(&opts.initial, n, floor)?;
    // Surface real errors (bad regime/β combinations, singular start) once.
    let mut e = energy(regime, &config_from_gaps(&g), beta, n)?;
    let mut grad = gap_gradient(regime, beta, n, &g)?;
    let ls = opts.line_search;

    let mut iterations = 0;
    let mut converged = false;
    let mut step = 1.0 / (1.0 + grad.iter().fold(0.0f64, |m, d| m.max(d.abs())));
    let mut prev: Option<(Vec<f64>, Vec<f64>)> = None;
    // Sub-noise acceptances may drift the energy by ~1e-14; remember the best
    // iterate so the returned energy provably never exceeds the initial one.
    let (mut best_g, mut best_e) = (g.clone(), e);

    while iterations < opts.max_iters {
        iterations += 1;
        if projected_norm(&g, &grad, floor) < opts.grad_tol {
            converged = true;
            break;
        }
        // Barzilai-Borwein trial step from the previous displacement pair.
        if let Some((g_prev, grad_prev)) = &prev {
            let (mut sy, mut yy) = (0.0, 0.0);
            for i in 0..g.len() {
                let s = g[i] - g_prev[i];
                let y = grad[i] - grad_prev[i];
                sy += s * y;
                yy += y * y;
            }
            if sy > 0.0 && yy > 0.0 {
                step = (sy / yy).clamp(1e-14, 1e3);
            }
        }
        prev = Some((g.clone(), grad.clone()));

        // Armijo backtracking along the projected path. Near the minimizer
        // the predicted decrease drops below the rounding noise of the O(n²)
        // energy sum; the energy test cannot certify descent there, so a step
        // whose model decrease is sub-noise is accepted as long as the energy
        // does not measurably increase (the gradient test still governs
        // convergence).
        let noise = 1e-14 * (1.0 + e.abs());
        let mut t = step;
        let mut accepted = false;
        while t >= 1e-18 {
            // Each gap may change by at most 4x per iteration. The kernels
            // diverge at contact, so optimal gaps are strictly positive and
            // the clamp never excludes the minimizer; without it, one
            // load-driven step can collapse a gap by many orders of
            // magnitude into the stiff log-barrier region (the energy still
            // drops through the load term) and the line search can then no
            // longer climb back out.
            let trial: Vec<f64> = g
                .iter()
                .zip(&grad)
                .map(|(&gi, &di)| {
                    let stepped = gi - t * di;
                    if gi > 0.0 {
                        stepped.clamp(0.25 * gi, 4.0 * gi).max(floor)
                    } else {
                        stepped.max(floor)
                    }
                })
                .collect();
            // first-order decrease of the projected move
            let model: f64 =
                g.iter().zip(&trial).zip(&grad).map(|((&gi, &ti), &di)| di * (gi - ti)).sum();
            if model <= 0.0 {
                break; // fully blocked: the projected gradient is ~0
            }
            let e_trial = energy_of_gaps(regime, beta, n, &trial);
            let decrease = ls.sufficient_decrease * model;
            if e_trial <= e - decrease || (decrease <= noise && e_trial <= e + noise) {
                g = trial;
                e = e_trial;
                grad = gap_gradient(regime, beta, n, &g)?;
                if e < best_e {
                    best_e = e;
                    best_g.copy_from_slice(&g);
                }
                accepted = true;
                break;
            }
            t *= ls.shrink;
        }
        if !accepted {
            // No productive step exists at this point; report the honest norm.
            converged = projected_norm(&g, &grad, floor) < opts.grad_tol;
            break;
        }
    }

    let grad_norm = projected_norm(&g, &grad, floor);
    let (g, e) = if best_e < e { (best_g, best_e) } else { (g, e) };
    Ok(MinimizeResult {
        config: config_from_gaps(&g),
        energy: e,
        iterations,
        converged,
        grad_norm,
    })
}

fn strictly_ordered(x: &[f64]) -> bool {
    let mut prev = 0.0;
    for &xi in x {
        if !(xi > prev) {
            return false;
        }
        prev = xi;
    }
    true
}

/// Integrates the overdamped wall dynamics `dx_i/dt = −(1/B)∂_{x_i}E` from
/// `config0` to `opts.t_end` by adaptive explicit Euler.
///
/// A step is accepted only if the new state is strictly ordered and its
/// energy does not exceed the current one; rejected steps halve `dt`, and
/// `dt < 1e-16` aborts with [`Error::Stagnation`]. Accepted steps regrow `dt`
/// by 1.25 up to the ceiling. Exceeding `opts.max_steps` aborts with
/// [`Error::StepBudget`].
///
/// Once no trial has strictly lowered the energy for many consecutive
/// attempts the state is pinned at its attractor to f64 resolution, and the
/// flow returns successfully with `times` ending before `opts.t_end`: under
/// the strict acceptance rule the energy can never rise later, so the
/// remaining dead time would only be integrated tie by tie.
pub fn gradient_flow(
    regime: &Regime,
    beta: f64,
    n: usize,
    config0: &WallConfiguration,
    opts: &FlowOptions,
) -> Result<FlowTrajectory> {
    opts.validate()?;
    if config0.n() != n {
        return Err(Error::invalid(format!(
            "config0 has {} walls, expected {n}",
            config0.n()
        )));
    }
    let mut x = config0.positions().to_vec();
    let mut e = energy(regime, config0, beta, n)?;
    let mut grad = gradient(regime, config0, beta, n)?;
    let dt_cap = opts.max_dt.unwrap_or(1e6 * opts.dt_init);
    let inv_b = 1.0 / opts.mobility;

    // Thinned sampling: keep every `stride`-th accepted step, doubling the
    // stride whenever the buffer would exceed the cap.
    const SAMPLE_CAP: usize = 4096;
    // Trials in a row (accepted ties or rejections) without a strict energy
    // decrease; this many mean the energy has reached its f64 floor.
    const ENERGY_FLOOR_ATTEMPTS: usize = 256;
    let mut times = vec![0.0];
    let mut configs = vec![config0.clone()];
    let mut energies = vec![e];
    let mut stride = 1usize;

    let mut t = 0.0;
    let mut dt = opts.dt_init.min(opts.t_end);
    let mut steps = 0usize;
    let mut no_drop_attempts = 0usize;
    while t < opts.t_end * (1.0 - 1e-15) {
        if steps >= opts.max_steps {
            return Err(Error::StepBudget { steps });
        }
        let trial: Vec<f64> =
            x.iter().zip(&grad).map(|(&xi, &di)| xi - dt * inv_b * di).collect();
        let mut accepted = false;
        if strictly_ordered(&trial) {
            let config = WallConfiguration::new(trial.clone())
                .expect("ordered positive positions are valid");
            if let Ok(e_trial) = energy(regime, &config, beta, n) {
                // No increase is ever accepted, so the recorded energy
                // sequence is non-increasing by construction. Exact ties are
                // accepted: once the state sits at the attractor the Euler
                // update falls below f64 resolution and the energy repeats
                // bit-for-bit, and rejecting those ties would collapse dt
                // into stagnation instead of letting time march to t_end.
                if e_trial <= e {
                    if e_trial < e {
                        no_drop_attempts = 0;
                    } else {
                        no_drop_attempts += 1;
                    }
                    x = trial;
                    e = e_trial;
                    grad = gradient(regime, &config, beta, n)?;
                    t += dt;
                    steps += 1;
                    if steps % stride == 0 {
                        times.push(t);
                        configs.push(config);
                        energies.push(e);
                        if times.len() > SAMPLE_CAP {
                            retain_every_other(&mut times);
                            retain_every_other(&mut configs);
                            retain_every_other(&mut energies);
                            stride *= 2;
                        }
                    }
                    accepted = true;
                }
            }
        }
        if accepted {
            dt = (dt * 1.25).min(dt_cap).min(opts.t_end - t).max(0.0);
            if dt == 0.0 {
                break;
            }
        } else {
            no_drop_attempts += 1;
            dt *= 0.5;
            if dt < 1e-16 {
                return Err(Error::Stagnation { t, dt });
            }
        }
        if no_drop_attempts >= ENERGY_FLOOR_ATTEMPTS {
            break;
        }
    }
    if *times.last().expect("nonempty") < t {
        times.push(t);
        configs.push(config_from_positions(&x));
        energies.push(e);
    }
    Ok(FlowTrajectory { times, configs, energies, steps, final_dt: dt })
}

fn retain_every_other<T>(v: &mut Vec<T>) {
    // keep indices 0, 2, 4, …: the initial state always survives
    let mut keep = 0;
    for i in 0..v.len() {
        if i % 2 == 0 {
            v.swap(keep, i);
            keep += 1;
        }
    }
    v.truncate(keep);
}

fn config_from_positions(x: &[f64]) -> WallConfiguration {
    WallConfiguration::new(x.to_vec()).expect("accepted flow states are valid")
}
