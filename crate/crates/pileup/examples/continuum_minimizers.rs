//! The five continuum limit densities side by side.
//!
//! Scalings 1, 3, and 5 have closed-form minimizers (inverse-square-root
//! law, triangular law, uniform cap); scalings 2 and 4 are solved on a grid.
//! For each one this prints the support, the density at a few stations, and
//! the minimum energy.

use pileup::continuum::{
    limit_energy, minimizer_closed_form, minimizer_numerical, DensityGrid, EnergyInput, GridSpec,
};

fn describe(k: usize, d: &DensityGrid, c: Option<f64>) {
    let rho = d.values();
    let m = rho.len();
    let h = d.l() / (m as f64 - 1.0);
    let peak = rho.iter().cloned().fold(0.0f64, f64::max);
    let support = rho
        .iter()
        .rposition(|&r| r > 1e-9 * peak)
        .map_or(0.0, |j| j as f64 * h);
    let e = limit_energy(k, EnergyInput::Density(d), c).unwrap();
    let c_label = c.map_or(String::from("-"), |v| format!("{v}"));
    println!("{k:>2} {c_label:>4} {support:>9.4} {peak:>10.3} {e:>12.8}");
}

fn main() {
    println!("{:>2} {:>4} {:>9} {:>10} {:>12}", "k", "c", "support", "peak", "energy");
    describe(1, &minimizer_closed_form(1, 2001).unwrap(), None);
    describe(
        2,
        &minimizer_numerical(2, Some(1.0), &GridSpec::new(0.25, 201).unwrap(), 1e-7).unwrap(),
        Some(1.0),
    );
    describe(3, &minimizer_closed_form(3, 2001).unwrap(), None);
    describe(
        4,
        &minimizer_numerical(4, Some(1.0), &GridSpec::new(1.5, 401).unwrap(), 1e-7).unwrap(),
        Some(1.0),
    );
    describe(5, &minimizer_closed_form(5, 2001).unwrap(), None);
    println!(
        "\nthe peaks of k = 1 and k = 2 are edge singularities: the printed values grow \
         with grid resolution while the energies stay put."
    );
}
