//! How the dimensionless ratio `beta` sorts pile-ups into five regimes.
//!
//! The classifier reads `beta` and `n beta` on a log scale: `beta >> 1` means
//! the walls jam against the unit-density cap (supercritical), `beta ~ 1` is
//! the second critical scaling, `n beta ~ 1` the first critical one,
//! `n beta << 1` the obstacle-dominated subcritical regime, and the wide band
//! between is the intermediate regime with its triangular density. The same
//! formula for `beta(n)` can land in different bands at different `n`, which
//! is the whole point of the sweep below.

use pileup::discrete::{classify, ClassifyThresholds, Regime};

fn name(r: &Regime) -> &'static str {
    match r {
        Regime::Subcritical => "subcritical",
        Regime::FirstCritical { .. } => "first critical",
        Regime::Intermediate => "intermediate",
        Regime::SecondCritical { .. } => "second critical",
        Regime::Supercritical => "supercritical",
    }
}

fn main() {
    let thresholds = ClassifyThresholds::default();
    let rules: [(&str, fn(f64) -> f64); 5] = [
        ("6 n^-3/2", |n| 6.0 / (n * n.sqrt())),
        ("5/n", |n| 5.0 / n),
        ("n^-1/2", |n| 1.0 / n.sqrt()),
        ("1", |_| 1.0),
        ("1e5", |_| 1e5),
    ];
    println!(
        "{:>10} {:>6} {:>10} {:>10}  {}",
        "beta rule", "n", "beta", "n beta", "suggested regime"
    );
    for (label, rule) in rules {
        for n in [30usize, 300, 30000] {
            let beta = rule(n as f64);
            let c = classify(beta, n, &thresholds).unwrap();
            println!(
                "{label:>10} {n:>6} {beta:>10.3e} {:>10.3e}  {}",
                c.n_beta,
                name(&c.suggestion)
            );
        }
        println!();
    }
}
