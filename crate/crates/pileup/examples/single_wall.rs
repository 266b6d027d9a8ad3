//! The one-wall pile-up, solved exactly enough to check by hand.
//!
//! A single wall in front of the locked obstacle wall balances the obstacle's
//! repulsion against the applied load. In the first-critical scaling the
//! energy is `c V(c x) + x`, so the minimizer solves `c^2 V'(c x*) = -1`; at
//! `c = 1` that is the classic `V'(x) = -1`. This example minimizes the
//! discrete energy for a few loads and verifies stationarity through the
//! gradient.

use pileup::discrete::{gradient, Regime};
use pileup::optimize::{minimize, SolveOptions};

fn main() {
    println!("{:>6} {:>12} {:>14} {:>12} {:>8}", "c", "x*", "energy", "|grad|", "iters");
    for c in [0.5f64, 1.0, 2.0, 5.0] {
        let regime = Regime::FirstCritical { c };
        let r = minimize(&regime, c, 1, &SolveOptions::default()).unwrap();
        let g = gradient(&regime, &r.config, c, 1).unwrap();
        println!(
            "{c:>6.1} {:>12.8} {:>14.10} {:>12.3e} {:>8}",
            r.config.positions()[0],
            r.energy,
            g[0].abs(),
            r.iterations
        );
    }
    println!(
        "\nx* is not monotone in c: the load pushes the wall in, but the interaction \
         length shrinks like 1/c, and the balance point c x* solves V'(s) = -1/c^2."
    );
}
