//! The supercritical pile-up: a capped bulk with boundary layers.
//!
//! For very hard walls (`beta >> 1`) the rescaled minimizer approaches the
//! uniform density capped at 1: the bulk gaps all approach `1/n`. At finite
//! `beta` every gap still exceeds `1/n` (the cap binds only in the limit),
//! tightest against the obstacle and loosest at the free end, and the pile
//! extends beyond 1. The renormalization constant `alpha(beta)` sets the
//! supercritical energy scale.

use pileup::discrete::{supercritical_alpha, Regime};
use pileup::optimize::{minimize, SolveOptions};

fn main() {
    let n = 200usize;
    for beta in [1e3f64, 1e5] {
        let r = minimize(&Regime::Supercritical, beta, n, &SolveOptions::default()).unwrap();
        let x = r.config.positions();
        let gaps = r.config.gaps();
        let scaled: Vec<f64> = gaps.iter().map(|g| g * n as f64).collect();
        let min = scaled.iter().cloned().fold(f64::INFINITY, f64::min);
        let max = scaled.iter().cloned().fold(0.0f64, f64::max);
        let mid = scaled[n / 2];

        println!("beta = {beta:.0e}  (alpha = {:.6})", supercritical_alpha(beta).unwrap());
        println!("  extent x_n = {:.6}", x[n - 1]);
        println!("  gaps * n: min {min:.4}, bulk {mid:.4}, max {max:.4}");
        println!(
            "  first five gaps * n: {:?}",
            scaled.iter().take(5).map(|g| (g * 1e4).round() / 1e4).collect::<Vec<_>>()
        );
        println!(
            "  last five gaps * n:  {:?}\n",
            scaled
                .iter()
                .rev()
                .take(5)
                .rev()
                .map(|g| (g * 1e4).round() / 1e4)
                .collect::<Vec<_>>()
        );
    }
}
