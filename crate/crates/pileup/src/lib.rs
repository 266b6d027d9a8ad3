//! Discrete dislocation-wall pile-ups and their continuum limits.
//!
//! A pile-up is a row of `n` dislocation walls on the half-line, pressed
//! against a pinned wall at the origin by a constant applied stress and kept
//! apart by the pairwise repulsion
//!
//! ```text
//! V(s) = (1/π) s coth(πs) − (1/π²) log(2 sinh(πs))
//!      = (2/π)|s| / (e^{2π|s|} − 1) − (1/π²) log(1 − e^{−2π|s|}).
//! ```
//!
//! After nondimensionalization the whole problem is controlled by a single
//! parameter `β = √(K/(nσh))`, and as `n → ∞` the rescaled energies converge
//! to one of five continuum functionals depending on how `β` scales with `n`.
//! This crate implements both sides of that story and the bridges between
//! them:
//!
//! * [`potential`]: `V`, its derivatives, its Fourier transform, the
//!   effective all-neighbour potential `V_eff(s) = Σ_{k≥1} V(ks)`, and
//!   certified tail bounds.
//! * [`discrete`]: physical parameters, `β`, regime rescalings, and the five
//!   rescaled discrete energies with analytic gradients.
//! * [`optimize`]: projected-gradient minimization over ordered
//!   configurations and the dissipative gradient flow.
//! * [`continuum`]: the five limit energies on densities, closed-form and
//!   numerical minimizers, internal stress fields, and Euler-Lagrange
//!   residuals.
//! * [`measures`]: empirical measures, the interior density estimator,
//!   Wasserstein-1 distances, and quantile configurations.
//! * [`experiment`]: JSON-specified convergence sweeps with deterministic
//!   CSV/JSON output.
//!
//! The `examples/` directory exercises each capability end to end; the
//! companion `pileup` binary wraps the experiment runner for shell use.

pub mod continuum;
pub mod discrete;
mod error;
pub mod experiment;
pub mod measures;
pub mod optimize;
pub mod potential;

pub use error::{Error, Result};
