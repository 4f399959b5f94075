//! Simultaneous polynomial root iteration and conjugate pairing.

use num_complex::Complex64;
use std::f64::consts::PI;

use crate::error::{Error, Result};

pub const MAX_ITER: usize = 200;
pub const RESIDUAL_TOL: f64 = 1e-12;

/// Value, derivative and absolute-value scale `sum |c_i| |z|^(n-i)` of the
/// polynomial with coefficients `coeffs` (highest power first) at `z`.
fn horner(coeffs: &[f64], z: Complex64) -> (Complex64, Complex64, f64) {
    let mut p = Complex64::new(coeffs[0], 0.0);
    let mut dp = Complex64::new(0.0, 0.0);
    let mut scale = coeffs[0].abs();
    let az = z.norm();
    for &c in &coeffs[1..] {
        dp = dp * z + p;
        p = p * z + c;
        scale = scale * az + c.abs();
    }
    (p, dp, scale)
}

/// Residual of `z` relative to the coefficient scale at `z`.
pub fn scaled_residual(coeffs: &[f64], z: Complex64) -> f64 {
    let (p, _, scale) = horner(coeffs, z);
    if scale == 0.0 {
        0.0
    } else {
        p.norm() / scale
    }
}

/// Roots of `coeffs[0] x^n + ... + coeffs[n]` by Aberth-Ehrlich iteration.
pub fn aberth(coeffs: &[f64], max_iter: usize) -> Result<Vec<Complex64>> {
    let n = coeffs.len().saturating_sub(1);
    if coeffs.is_empty() || coeffs[0] == 0.0 {
        return Err(Error::ZeroLeadingCoefficient);
    }
    if coeffs.iter().any(|c| !c.is_finite()) {
        return Err(Error::MalformedInput("non-finite coefficient".into()));
    }
    if n == 0 {
        return Ok(Vec::new());
    }
    let monic: Vec<f64> = coeffs.iter().map(|c| c / coeffs[0]).collect();
    let radius = 1.0 + monic[1..].iter().fold(0.0f64, |m, c| m.max(c.abs()));
    let mut z: Vec<Complex64> = (0..n)
        .map(|k| Complex64::from_polar(radius, 2.0 * PI * k as f64 / n as f64 + 0.4))
        .collect();

    let done_tol = 4.0 * n as f64 * f64::EPSILON;
    for _ in 0..max_iter {
        let mut moved = false;
        let mut all_done = true;
        for i in 0..n {
            let (p, dp, scale) = horner(&monic, z[i]);
            if p.norm() <= done_tol * scale {
                continue;
            }
            all_done = false;
            let ratio = if dp.norm() > 0.0 { p / dp } else { p };
            let mut s = Complex64::new(0.0, 0.0);
            for j in 0..n {
                if j != i {
                    let diff = z[i] - z[j];
                    if diff.norm() > 0.0 {
                        s += diff.inv();
                    }
                }
            }
            let denom = Complex64::new(1.0, 0.0) - ratio * s;
            let w = if denom.norm() > 0.0 { ratio / denom } else { ratio };
            if !w.is_finite() {
                continue;
            }
            if w.norm() > f64::EPSILON * z[i].norm() {
                moved = true;
            }
            z[i] -= w;
        }
        if all_done || !moved {
            break;
        }
    }

    let worst = z
        .iter()
        .map(|&r| scaled_residual(&monic, r))
        .fold(0.0f64, f64::max);
    if !(worst <= RESIDUAL_TOL) {
        return Err(Error::NonConvergentRoots { residual: worst });
    }
    Ok(z)
}

/// Make a root list exactly closed under conjugation, in place.
///
/// Returns the largest adjustment made, relative to `1 + |alpha|`.
pub fn symmetrize(roots: &mut [Complex64]) -> f64 {
    let n = roots.len();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| roots[b].im.abs().total_cmp(&roots[a].im.abs()).then(a.cmp(&b)));
    let mut used = vec![false; n];
    let mut worst = 0.0f64;
    for &i in &order {
        if used[i] {
            continue;
        }
        used[i] = true;
        let target = roots[i].conj();
        let own_gap = 2.0 * roots[i].im.abs();
        let mut best: Option<(usize, f64)> = None;
        for j in 0..n {
            if used[j] {
                continue;
            }
            let d = (roots[j] - target).norm();
            if best.is_none_or(|(_, bd)| d < bd) {
                best = Some((j, d));
            }
        }
        match best {
            Some((j, d)) if d < own_gap => {
                used[j] = true;
                let upper = if roots[i].im >= 0.0 { roots[i] } else { roots[j] };
                let lower = if roots[i].im >= 0.0 { roots[j] } else { roots[i] };
                let avg = Complex64::new(0.5 * (upper.re + lower.re), 0.5 * (upper.im - lower.im));
                worst = worst.max(0.5 * d / (1.0 + avg.norm()));
                if roots[i].im >= 0.0 {
                    roots[i] = avg;
                    roots[j] = avg.conj();
                } else {
                    roots[i] = avg.conj();
                    roots[j] = avg;
                }
            }
            _ => {
                worst = worst.max(roots[i].im.abs() / (1.0 + roots[i].norm()));
                roots[i] = Complex64::new(roots[i].re, 0.0);
            }
        }
    }
    worst
}
