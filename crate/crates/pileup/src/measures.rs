//! Empirical measures of wall configurations, the discrete density
//! estimator, Wasserstein-1 distances, and quantile recovery points.
//!
//! The rescaled configuration `x_1 ≤ … ≤ x_n` induces the empirical measure
//! `μ_n = (1/n) Σ_{i=1..n} δ_{x_i}` (the pinned wall at 0 is excluded), and
//! the discrete density estimator
//!
//! ```text
//! ρ_n(x_i) = 2 A_n / (x_{i+1} − x_{i−1}),    i = 2..n−1,
//! ```
//!
//! with `A_n` normalizing the trapezoidal area of the interpolant to 1.
//! Convergence of `μ_n` to the continuum minimizers is weak convergence of
//! probability measures; since every measure in play has a bounded first
//! moment (the load term), the Wasserstein-1 distance
//! `W₁(μ, ν) = ∫ |F_μ − F_ν|` metrizes it. `w1_distance` evaluates that
//! integral exactly: both CDFs are piecewise polynomials of degree ≤ 2
//! (steps for atoms, quadratics for piecewise-linear densities), so the
//! integrand is piecewise quadratic and each piece integrates in closed
//! form after root isolation.

use crate::continuum::{quantile_of, DensityGrid};
use crate::discrete::WallConfiguration;
use crate::{Error, Result};

/// Sorted atoms of mass `1/n` each: the empirical measure of a
/// configuration of `n` free walls.
#[derive(Debug, Clone, PartialEq)]
pub struct EmpiricalMeasure {
    atoms: Vec<f64>,
}

impl EmpiricalMeasure {
    /// Sorts and validates the atoms (finite, nonnegative, at least one).
    pub fn new(mut atoms: Vec<f64>) -> Result<Self> {
        if atoms.is_empty() {
            return Err(Error::invalid("an empirical measure needs at least one atom"));
        }
        for (i, &a) in atoms.iter().enumerate() {
            if !a.is_finite() || a < 0.0 {
                return Err(Error::invalid(format!(
                    "atom {i} must be finite and nonnegative, got {a}"
                )));
            }
        }
        atoms.sort_by(|a, b| a.partial_cmp(b).expect("finite atoms"));
        Ok(EmpiricalMeasure { atoms })
    }

    /// The sorted atom positions.
    pub fn atoms(&self) -> &[f64] {
        &self.atoms
    }

    /// Number of atoms `n` (each carries weight `1/n`).
    pub fn n(&self) -> usize {
        self.atoms.len()
    }

    /// First moment `(1/n) Σ x_i`, which equals the load term of the
    /// discrete energy.
    pub fn mean(&self) -> f64 {
        self.atoms.iter().sum::<f64>() / self.atoms.len() as f64
    }
}

/// Empirical measure `μ_n` of the free walls; the pinned wall at the origin
/// carries no mass.
pub fn empirical_from_config(config: &WallConfiguration) -> EmpiricalMeasure {
    EmpiricalMeasure::new(config.positions().to_vec())
        .expect("a valid configuration yields valid atoms")
}

/// The discrete density estimator at the interior walls, with linearly
/// extended endpoint values.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityEstimate {
    /// Wall positions `x_1..x_n` (abscissae of the interpolant).
    pub positions: Vec<f64>,
    /// Estimator values `ρ_n(x_i)`; the first and last entries are linear
    /// extensions of the interior formula, see `endpoints_extended`.
    pub values: Vec<f64>,
    /// The endpoint values at `x_1` and `x_n` extrapolate the interior
    /// segments (a plotting convention, not the estimator formula).
    pub endpoints_extended: bool,
    /// Normalization constant `A_n`.
    pub a_n: f64,
}

/// Evaluates `ρ_n(x_i) = 2A_n/(x_{i+1} − x_{i−1})` at the interior walls
/// `i = 2..n−1` and fixes `A_n` so the trapezoidal area of the interpolant
/// through those points is 1.
///
/// With fewer than two interior walls (`n = 3`) that area degenerates to
/// zero; the normalization then falls back to the endpoint-extended
/// interpolant.
pub fn density_estimate(config: &WallConfiguration) -> Result<DensityEstimate> {
    let x = config.positions();
    let n = x.len();
    if n < 3 {
        return Err(Error::invalid(format!("the density estimator needs n ≥ 3 walls, got {n}")));
    }
    for i in 1..n {
        if x[i] <= x[i - 1] {
            return Err(Error::SingularConfiguration { i, j: i + 1, x: x[i] });
        }
    }
    // raw interior values at x_2..x_{n−1} (0-based: x[1..n−1])
    let mut raw = vec![0.0; n];
    for i in 1..n - 1 {
        let spread = x[i + 1] - x[i - 1];
        if spread <= 0.0 {
            return Err(Error::SingularConfiguration { i, j: i + 2, x: x[i - 1] });
        }
        raw[i] = 2.0 / spread;
    }
    // linear extension to the endpoints
    if n >= 5 {
        raw[0] = extend(x[1], raw[1], x[2], raw[2], x[0]);
        raw[n - 1] = extend(x[n - 2], raw[n - 2], x[n - 3], raw[n - 3], x[n - 1]);
    } else {
        raw[0] = raw[1];
        raw[n - 1] = raw[n - 2];
    }
    // interior-only trapezoidal area; fall back to the extended interpolant
    // when degenerate
    let area_over = |lo: usize, hi: usize| -> f64 {
        (lo..hi).map(|i| 0.5 * (raw[i] + raw[i + 1]) * (x[i + 1] - x[i])).sum()
    };
    let mut area = area_over(1, n - 2);
    if area <= 0.0 {
        area = area_over(0, n - 1);
    }
    if area <= 0.0 {
        return Err(Error::invalid("estimator interpolant has zero area"));
    }
    let a_n = 1.0 / area;
    let values = raw.iter().map(|&r| (r * a_n).max(0.0)).collect();
    Ok(DensityEstimate {
        positions: x.to_vec(),
        values,
        endpoints_extended: true,
        a_n,
    })
}

fn extend(x1: f64, y1: f64, x2: f64, y2: f64, at: f64) -> f64 {
    y1 + (y2 - y1) / (x2 - x1) * (at - x1)
}

/// A measure argument for [`w1_distance`].
#[derive(Debug, Clone, Copy)]
pub enum MeasureRef<'a> {
    Empirical(&'a EmpiricalMeasure),
    Density(&'a DensityGrid),
}

/// Piecewise-quadratic CDF: on `[xs[t], xs[t+1])`,
/// `F(xs[t] + u) = c0[t] + c1[t]·u + c2[t]·u²`.
struct PiecewiseCdf {
    xs: Vec<f64>,
    c0: Vec<f64>,
    c1: Vec<f64>,
    c2: Vec<f64>,
    total: f64,
}

impl PiecewiseCdf {
    fn from_measure(m: MeasureRef<'_>) -> Self {
        match m {
            MeasureRef::Empirical(e) => {
                let n = e.n() as f64;
                let mut xs = Vec::new();
                let mut c0 = Vec::new();
                let mut count = 0usize;
                let atoms = e.atoms();
                let mut i = 0;
                while i < atoms.len() {
                    let a = atoms[i];
                    let mut mult = 0;
                    while i < atoms.len() && atoms[i] == a {
                        mult += 1;
                        i += 1;
                    }
                    count += mult;
                    xs.push(a);
                    c0.push(count as f64 / n);
                }
                // intervals live between breakpoints; F on [a_t, a_{t+1})
                // includes the jump at a_t
                let k = xs.len().saturating_sub(1);
                PiecewiseCdf {
                    xs,
                    c0: c0[..k].to_vec(),
                    c1: vec![0.0; k],
                    c2: vec![0.0; k],
                    total: 1.0,
                }
            }
            MeasureRef::Density(d) => {
                let cdf = d.cdf();
                let h = d.h();
                let m = d.len();
                let xs: Vec<f64> = (0..m).map(|j| d.node(j)).collect();
                let c0 = cdf[..m - 1].to_vec();
                let c1 = d.values()[..m - 1].to_vec();
                let c2: Vec<f64> = (0..m - 1)
                    .map(|j| (d.values()[j + 1] - d.values()[j]) / (2.0 * h))
                    .collect();
                PiecewiseCdf { xs, c0, c1, c2, total: *cdf.last().expect("nonempty") }
            }
        }
    }

    /// Local quadratic coefficients of `F` about the point `u` (valid until
    /// the next breakpoint at or after `u`).
    fn local_at(&self, u: f64) -> (f64, f64, f64) {
        if u < self.xs[0] {
            return (0.0, 0.0, 0.0);
        }
        let last = *self.xs.last().expect("nonempty");
        if u >= last {
            return (self.total, 0.0, 0.0);
        }
        // rightmost interval starting at or before u
        let t = match self.xs.binary_search_by(|p| p.partial_cmp(&u).expect("finite")) {
            Ok(t) => t,
            Err(ins) => ins - 1,
        };
        let t = t.min(self.c0.len() - 1);
        let du = u - self.xs[t];
        let (a0, a1, a2) = (self.c0[t], self.c1[t], self.c2[t]);
        (a0 + a1 * du + a2 * du * du, a1 + 2.0 * a2 * du, a2)
    }
}

/// `∫₀^l |d0 + d1·u + d2·u²| du` by root isolation and exact antiderivatives.
fn integral_abs_quadratic(d0: f64, d1: f64, d2: f64, l: f64) -> f64 {
    let mut cuts = vec![0.0, l];
    let scale = d0.abs().max(d1.abs() * l).max(d2.abs() * l * l);
    if scale > 0.0 {
        if d2.abs() * l * l > 1e-15 * scale {
            let disc = d1 * d1 - 4.0 * d2 * d0;
            if disc >= 0.0 {
                let sq = disc.sqrt();
                let q = -0.5 * (d1 + d1.signum() * sq);
                for r in [q / d2, if q != 0.0 { d0 / q } else { -d1 / d2 }] {
                    if r.is_finite() && r > 0.0 && r < l {
                        cuts.push(r);
                    }
                }
            }
        } else if d1.abs() * l > 1e-15 * scale {
            let r = -d0 / d1;
            if r.is_finite() && r > 0.0 && r < l {
                cuts.push(r);
            }
        }
    }
    cuts.sort_by(|a, b| a.partial_cmp(b).expect("finite cuts"));
    let anti = |u: f64| d0 * u + 0.5 * d1 * u * u + d2 * u * u * u / 3.0;
    let mut acc = 0.0;
    for w in cuts.windows(2) {
        let (a, b) = (w[0], w[1]);
        if b <= a {
            continue;
        }
        let mid = 0.5 * (a + b);
        let sign = (d0 + d1 * mid + d2 * mid * mid).signum();
        acc += sign * (anti(b) - anti(a));
    }
    acc.abs().max(0.0)
}

/// Wasserstein-1 distance `∫ |F_a − F_b|`, exact for the step/quadratic
/// CDFs of empirical measures and grid densities.
pub fn w1_distance(a: MeasureRef<'_>, b: MeasureRef<'_>) -> Result<f64> {
    let pa = PiecewiseCdf::from_measure(a);
    let pb = PiecewiseCdf::from_measure(b);
    for (name, p) in [("first", &pa), ("second", &pb)] {
        if (p.total - 1.0).abs() > 1e-8 {
            return Err(Error::invalid(format!(
                "{name} measure must have unit mass, got {}",
                p.total
            )));
        }
    }
    let mut grid: Vec<f64> = pa.xs.iter().chain(pb.xs.iter()).copied().collect();
    grid.sort_by(|x, y| x.partial_cmp(y).expect("finite breakpoints"));
    grid.dedup();
    let mut acc = 0.0;
    for w in grid.windows(2) {
        let (u, v) = (w[0], w[1]);
        if v <= u {
            continue;
        }
        let (a0, a1, a2) = pa.local_at(u);
        let (b0, b1, b2) = pb.local_at(u);
        acc += integral_abs_quadratic(a0 - b0, a1 - b1, a2 - b2, v - u);
    }
    Ok(acc)
}

/// Quantile recovery points and a resolution flag.
#[derive(Debug, Clone, PartialEq)]
pub struct QuantileRecovery {
    /// The recovered configuration `x_i` with `F(x_i) = i/n`.
    pub config: WallConfiguration,
    /// Set when `n` exceeds ten points per grid cell (`n > 10·m`), where
    /// the within-cell quadratic inversion limits accuracy.
    pub resolution_warning: bool,
}

/// Places `n` walls at the `i/n` quantiles of `density`, `i = 1..n`: the
/// recovery configurations carrying equal mass between consecutive points.
pub fn quantile_points(density: &DensityGrid, n: usize) -> Result<QuantileRecovery> {
    if n == 0 {
        return Err(Error::invalid("quantile recovery needs n ≥ 1"));
    }
    let cdf = density.cdf();
    let mut xs = Vec::with_capacity(n);
    for i in 1..=n {
        xs.push(quantile_of(density, &cdf, i as f64 / n as f64));
    }
    let config = WallConfiguration::new(xs)?;
    Ok(QuantileRecovery { config, resolution_warning: n > 10 * density.len() })
}
