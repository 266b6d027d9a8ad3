//! Tabulates the wall-interaction potential and its companions.
//!
//! Prints `V`, `V'`, the summed-row potential `V_eff`, and the Fourier
//! transform `V_hat` on a log-spaced grid, then the certified truncation
//! radii for a few tail tolerances. Near zero `V` diverges like
//! `-(1/pi^2) log s`; beyond `s ~ 1` it decays like `s e^{-2 pi s}`, which
//! is why pair sums truncate so well.

use pileup::potential::{truncation_radius, v, v_eff, v_hat, v_prime, INTEGRAL_OF_V};

fn main() {
    println!("{:>10} {:>13} {:>13} {:>13} {:>13}", "s", "V", "V'", "V_eff", "V_hat");
    let mut s = 0.01f64;
    while s <= 10.0 + 1e-9 {
        println!(
            "{s:>10.4} {:>13.6e} {:>13.6e} {:>13.6e} {:>13.6e}",
            v(s).unwrap(),
            v_prime(s).unwrap(),
            v_eff(s, 1e-10).unwrap(),
            v_hat(s)
        );
        s *= 10f64.powf(0.25);
    }

    println!("\nfull-line integral of V: {INTEGRAL_OF_V:.12} (= 1/(3 pi))");

    println!("\ncertified tail cutoffs (V(s) <= eps for s >= s_cut):");
    for eps in [1e-6, 1e-9, 1e-12] {
        let bound = truncation_radius(eps).unwrap();
        println!("  eps = {eps:>7.0e}  ->  s_cut = {:.3}", bound.s_cut);
    }
}
