//! Benchmark inputs shared by the criterion targets.

use formred_core::Complex64;

/// Roots of unity of order `n` scaled by `r` around `center`.
pub fn ring(n: usize, center: f64, r: f64) -> Vec<Complex64> {
    (0..n)
        .map(|k| Complex64::new(center, 0.0) + Complex64::from_polar(r, std::f64::consts::TAU * k as f64 / n as f64))
        .collect()
}

/// A conjugate-closed spread of `n` points, deterministic.
pub fn spread(n: usize) -> Vec<Complex64> {
    let mut out = Vec::with_capacity(n);
    let mut x = 0.37f64;
    while out.len() < n {
        x = (x * 7.31 + 0.13).fract();
        let re = 20.0 * x - 10.0;
        if n - out.len() >= 2 {
            let im = 1.0 + 5.0 * (x * 3.7).fract();
            out.push(Complex64::new(re, im));
            out.push(Complex64::new(re, -im));
        } else {
            out.push(Complex64::new(re, 0.0));
        }
    }
    out
}
