//! Discrete pile-ups converging onto the triangular continuum density.
//!
//! In the intermediate regime (`beta = n^{-1/2}`) the minimizing wall
//! positions approach the triangular law `rho(x) = (lambda - x)/a` with
//! `lambda = sqrt(2/(3 pi))`. The 1-Wasserstein distance between the
//! empirical measure of the `n`-wall minimizer and that density shrinks as
//! `n` grows; this sweep prints the distances, the minimized energies, and
//! the continuum minimum they approach.

use pileup::continuum::{limit_energy, minimizer_closed_form, EnergyInput};
use pileup::discrete::Regime;
use pileup::measures::{empirical_from_config, w1_distance, MeasureRef};
use pileup::optimize::{minimize, SolveOptions};

fn main() {
    let triangle = minimizer_closed_form(3, 2001).unwrap();
    let e_star = limit_energy(3, EnergyInput::Density(&triangle), None).unwrap();

    println!("{:>6} {:>10} {:>12} {:>12} {:>8}", "n", "beta", "W1", "energy", "iters");
    for n in [25usize, 50, 100, 200] {
        let beta = 1.0 / (n as f64).sqrt();
        let r = minimize(&Regime::Intermediate, beta, n, &SolveOptions::default()).unwrap();
        let empirical = empirical_from_config(&r.config);
        let w1 =
            w1_distance(MeasureRef::Empirical(&empirical), MeasureRef::Density(&triangle)).unwrap();
        println!("{n:>6} {beta:>10.4} {w1:>12.5e} {:>12.8} {:>8}", r.energy, r.iterations);
    }
    println!("\ncontinuum minimum: {e_star:.8}");
}
