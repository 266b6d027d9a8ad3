//! Splitting the interaction into a convolution square: `V = W ∗ W`.
//!
//! The Fourier transform `V_hat` is strictly positive, so its pointwise
//! square root transforms back to a kernel `W` whose self-convolution
//! reproduces `V`. This is the spectral half of the first-critical limit:
//! `W` carries exactly half the interaction. The script prints transform
//! values, then checks `W ∗ W` against `V` and the integral of `W` against
//! `(3 pi)^{-1/2}`.

use pileup::potential::{v, v_hat, w_kernel, FourierGrid, INTEGRAL_OF_V};

fn main() {
    println!("{:>6} {:>14}", "xi", "V_hat");
    for xi in [0.0f64, 0.25, 1.0, 4.0] {
        println!("{xi:>6.2} {:>14.10}", v_hat(xi));
    }
    println!("(V_hat(0) = {INTEGRAL_OF_V:.10} = 1/(3 pi))");

    let grid = FourierGrid::new(32.0, 1 << 16).unwrap();
    let kernel = w_kernel(&grid).unwrap();

    let targets: Vec<f64> = (0..60).map(|i| 0.1 + 2.9 * i as f64 / 59.0).collect();
    let conv = kernel.self_convolution(&targets);
    let sup = targets
        .iter()
        .zip(&conv)
        .map(|(&s, &c)| (c - v(s).unwrap()).abs())
        .fold(0.0f64, f64::max);

    let w_integral = kernel.integral();
    let expected = (3.0 * std::f64::consts::PI).sqrt().recip();
    println!("\nsup |W*W - V| on [0.1, 3]: {sup:.3e}");
    println!("integral of W: {w_integral:.12}");
    println!("(3 pi)^-1/2:   {expected:.12}");
}
