//! The covariant point of a root set and the sphere picture around it.
//!
//! The point `(t, u)` is the unique critical point of
//! `Phi(t, u) = sum log(|t - alpha|^2 + u^2) - n log u`, a sum of Busemann
//! functions of the roots. Its gradient in `(t, log u)` is
//! `(2 * sum (t - alpha)/D, 2 * sum u^2/D - n)`, which vanishes exactly when
//! both defining equations hold.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::forms::{BinaryForm, UnimodularMatrix};

/// A point `t + iu` of the upper half plane.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct UpperHalfPoint {
    pub t: f64,
    pub u: f64,
}

impl UpperHalfPoint {
    pub fn new(t: f64, u: f64) -> Result<Self> {
        if !(u > 0.0) || !u.is_finite() || !t.is_finite() {
            return Err(Error::NonPositiveU(u));
        }
        Ok(UpperHalfPoint { t, u })
    }

    pub fn as_complex(&self) -> Complex64 {
        Complex64::new(self.t, self.u)
    }

    pub fn from_complex(z: Complex64) -> Result<Self> {
        Self::new(z.re, z.im)
    }

    /// Image under the fractional linear map of `g`.
    pub fn moebius(&self, g: &UnimodularMatrix) -> Self {
        let w = g.moebius(self.as_complex());
        UpperHalfPoint { t: w.re, u: w.im }
    }

    pub fn abs(&self) -> f64 {
        self.t.hypot(self.u)
    }
}

/// Point on the unit sphere.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SpherePoint {
    pub m: f64,
    pub n: f64,
    pub p: f64,
}

impl SpherePoint {
    pub fn dot(&self, o: &SpherePoint) -> f64 {
        self.m * o.m + self.n * o.n + self.p * o.p
    }
}

/// Roots moved so that the covariant point sits at `(0, 1)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NormalizedForm {
    pub betas: Vec<Complex64>,
}

impl NormalizedForm {
    /// `(sum 1/(1+|b|^2) - n/2, |sum b/(1+|b|^2)|)`.
    pub fn residuals(&self) -> (f64, f64) {
        let mut mass = -(self.betas.len() as f64) / 2.0;
        let mut bal = Complex64::new(0.0, 0.0);
        for b in &self.betas {
            let w = 1.0 / (1.0 + b.norm_sqr());
            mass += w;
            bal += b * w;
        }
        (mass, bal.norm())
    }
}

/// Solver limits. `tol` is the per-root residual target.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SolverOptions {
    pub tol: f64,
    pub max_newton: usize,
    pub max_bisection: usize,
}

impl Default for SolverOptions {
    fn default() -> Self {
        SolverOptions { tol: 1e-11, max_newton: 100, max_bisection: 200 }
    }
}

/// Result of [`solve_covariant`] with diagnostics.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CovariantSolution {
    pub point: UpperHalfPoint,
    /// Real offset the final polish was done around; `point.t = shift + local_t`.
    pub shift: f64,
    pub local_t: f64,
    /// `max(|r_mass|, u |Re r_balance|)` evaluated in local coordinates.
    pub residual: f64,
    pub newton_steps: usize,
    pub used_bisection: bool,
}

impl CovariantSolution {
    /// Normalized roots `(t - alpha)/u`, computed without the rounding in `t`.
    pub fn normalized(&self, roots: &[Complex64]) -> NormalizedForm {
        let u = self.point.u;
        let betas = roots
            .iter()
            .map(|a| (Complex64::new(self.local_t, 0.0) - (a - self.shift)) / u)
            .collect();
        NormalizedForm { betas }
    }
}

/// `sum u^2/D - n/2`, accumulated as `1 - |w|^2/D` for roots closer than `u`
/// and `u^2/D` for the rest, so that no term cancels against `n/2`.
struct MassExcess {
    inside: isize,
    small: f64,
}

impl MassExcess {
    fn new(n: usize) -> Self {
        MassExcess { inside: -(n as isize), small: 0.0 }
    }

    fn add(&mut self, w2: f64, u2: f64, den: f64) {
        if w2 < u2 {
            self.inside += 2;
            self.small -= w2 / den;
        } else {
            self.small += u2 / den;
        }
    }

    fn value(&self) -> f64 {
        self.inside as f64 / 2.0 + self.small
    }
}

/// Raw residuals of the defining equations at `(t, u)`.
pub fn residuals(roots: &[Complex64], t: f64, u: f64) -> Result<(f64, Complex64)> {
    if !(u > 0.0) {
        return Err(Error::NonPositiveU(u));
    }
    let mut mass = MassExcess::new(roots.len());
    let mut bal = Complex64::new(0.0, 0.0);
    let u2 = u * u;
    for a in roots {
        let w = Complex64::new(t, 0.0) - a;
        let den = w.norm_sqr() + u2;
        mass.add(w.norm_sqr(), u2, den);
        bal += w / den;
    }
    Ok((mass.value(), bal))
}

/// `max(|r_mass|, u |Re r_balance|)`, the scale-free residual.
pub fn scaled_residual(roots: &[Complex64], z: &UpperHalfPoint) -> Result<f64> {
    let (m, b) = residuals(roots, z.t, z.u)?;
    Ok(m.abs().max(z.u * b.re.abs()))
}

/// `sum log((|t - alpha|^2 + u^2)/u)`; the covariant point is its minimizer.
pub fn busemann_potential(roots: &[Complex64], t: f64, u: f64) -> f64 {
    roots
        .iter()
        .map(|a| (((t - a.re).powi(2) + a.im * a.im + u * u) / u).ln())
        .sum()
}

/// Fails when some real point carries at least half of the roots.
pub fn check_multiplicity(roots: &[Complex64]) -> Result<()> {
    let n = roots.len();
    for a in roots {
        let tol = 1e-12 * (1.0 + a.norm());
        if a.im.abs() > tol {
            continue;
        }
        let k = roots.iter().filter(|b| (*b - a).norm() <= tol).count();
        if 2 * k >= n {
            return Err(Error::DegenerateCluster { multiplicity: k, degree: n });
        }
    }
    Ok(())
}

struct Local {
    x: Vec<f64>,
    y2: Vec<f64>,
    n: f64,
}

#[derive(Clone, Copy)]
struct Eval {
    phi: f64,
    g_t: f64,
    g_s: f64,
    h_tt: f64,
    h_ts: f64,
    h_ss: f64,
    residual: f64,
}

impl Local {
    fn new(roots: &[Complex64], shift: f64) -> Self {
        Local {
            x: roots.iter().map(|a| a.re - shift).collect(),
            y2: roots.iter().map(|a| a.im * a.im).collect(),
            n: roots.len() as f64,
        }
    }

    fn eval(&self, tau: f64, sigma: f64) -> Eval {
        let u = sigma.exp();
        let u2 = u * u;
        let mut mass = MassExcess::new(self.x.len());
        let (mut phi, mut g_t, mut h_tt, mut h_ts, mut h_ss) = (0.0, 0.0, 0.0, 0.0, 0.0);
        for (&x, &y2) in self.x.iter().zip(&self.y2) {
            let w = tau - x;
            let w2 = w * w;
            let den = w2 + y2 + u2;
            let den2 = den * den;
            phi += den.ln();
            g_t += 2.0 * w / den;
            mass.add(w2 + y2, u2, den);
            h_tt += 2.0 * (den - 2.0 * w2) / den2;
            h_ts -= 4.0 * w * u2 / den2;
            h_ss += 4.0 * u2 * (w2 + y2) / den2;
        }
        phi -= self.n * sigma;
        let excess = mass.value();
        let g_s = 2.0 * excess;
        let residual = excess.abs().max((0.5 * u * g_t).abs());
        Eval { phi, g_t, g_s, h_tt, h_ts, h_ss, residual }
    }

    fn sigma_for(&self, tau: f64, start: f64, max_bisection: usize) -> f64 {
        let mass = |s: f64| self.eval(tau, s).g_s;
        let (mut lo, mut hi) = (start - 1.0, start + 1.0);
        while mass(lo) >= 0.0 && lo > -700.0 {
            lo -= 2.0 * (start - lo).max(1.0);
        }
        while mass(hi) <= 0.0 && hi < 700.0 {
            hi += 2.0 * (hi - start).max(1.0);
        }
        for _ in 0..max_bisection {
            let mid = 0.5 * (lo + hi);
            if mid <= lo || mid >= hi {
                break;
            }
            if mass(mid) < 0.0 {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        0.5 * (lo + hi)
    }

    /// Damped Newton on the gradient of `Phi`. Returns the final iterate and step count.
    fn newton(&self, mut tau: f64, mut sigma: f64, max_steps: usize, target: f64) -> (f64, f64, usize) {
        let mut e = self.eval(tau, sigma);
        let mut steps = 0;
        while steps < max_steps && e.residual > target {
            steps += 1;
            let det = e.h_tt * e.h_ss - e.h_ts * e.h_ts;
            let (mut p_t, mut p_s) = if e.h_tt > 0.0 && e.h_ss > 0.0 && det > 0.0 {
                ((-e.h_ss * e.g_t + e.h_ts * e.g_s) / det, (e.h_ts * e.g_t - e.h_tt * e.g_s) / det)
            } else {
                (-e.g_t / e.h_tt.abs().max(1e-300), -e.g_s / e.h_ss.abs().max(1e-300))
            };
            if p_s.abs() > 4.0 {
                let k = 4.0 / p_s.abs();
                p_t *= k;
                p_s *= k;
            }
            let slope = e.g_t * p_t + e.g_s * p_s;
            let mut step = 1.0;
            let mut accepted = None;
            for _ in 0..60 {
                let cand = self.eval(tau + step * p_t, sigma + step * p_s);
                let armijo = slope < 0.0 && cand.phi <= e.phi + 1e-4 * step * slope;
                if cand.residual.is_finite() && (armijo || cand.residual < e.residual) {
                    accepted = Some(cand);
                    break;
                }
                step *= 0.5;
            }
            match accepted {
                Some(cand) => {
                    let moved = (step * p_t).abs() > f64::EPSILON * tau.abs().max(f64::MIN_POSITIVE)
                        || (step * p_s).abs() > f64::EPSILON * sigma.abs().max(1.0);
                    tau += step * p_t;
                    sigma += step * p_s;
                    e = cand;
                    if !moved {
                        break;
                    }
                }
                None => break,
            }
        }
        (tau, sigma, steps)
    }

    fn bisection(&self, sigma0: f64, max_bisection: usize) -> (f64, f64) {
        let lo0 = self.x.iter().copied().fold(f64::INFINITY, f64::min);
        let hi0 = self.x.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let pad = 1e-12 * (1.0 + hi0.abs().max(lo0.abs()));
        let (mut lo, mut hi) = (lo0 - pad, hi0 + pad);
        let bal = |tau: f64| {
            let s = self.sigma_for(tau, sigma0, max_bisection);
            (self.eval(tau, s).g_t, s)
        };
        for _ in 0..max_bisection {
            let mid = 0.5 * (lo + hi);
            if mid <= lo || mid >= hi {
                break;
            }
            if bal(mid).0 < 0.0 {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        let tau = 0.5 * (lo + hi);
        (tau, bal(tau).1)
    }
}

/// Covariant point with default solver options.
pub fn covariant_point(roots: &[Complex64]) -> Result<UpperHalfPoint> {
    solve_covariant(roots, &SolverOptions::default()).map(|s| s.point)
}

/// Covariant point with diagnostics.
pub fn solve_covariant(roots: &[Complex64], opts: &SolverOptions) -> Result<CovariantSolution> {
    let n = roots.len();
    if n < crate::forms::MIN_DEGREE {
        return Err(Error::DegreeTooLow(n));
    }
    if roots.iter().any(|a| !a.is_finite()) {
        return Err(Error::MalformedInput("non-finite root".into()));
    }
    check_multiplicity(roots)?;
    let nf = n as f64;
    let target = opts.tol * nf;
    let tight = 1e-15 * nf;

    let mean = roots.iter().map(|a| a.re).sum::<f64>() / nf;
    let centroid = roots.iter().sum::<Complex64>() / nf;
    let rms = (roots.iter().map(|a| (a - centroid).norm_sqr()).sum::<f64>() / nf).sqrt();
    let sigma0 = rms.max(1e-6).ln();

    let coarse = Local::new(roots, mean);
    let (mut tau, mut sigma, mut steps) = coarse.newton(0.0, sigma0, opts.max_newton, tight);
    let mut used_bisection = false;
    if !(coarse.eval(tau, sigma).residual <= target) {
        used_bisection = true;
        let (bt, bs) = coarse.bisection(sigma0, opts.max_bisection);
        tau = bt;
        sigma = bs;
    }

    // Polish around a shift next to t so that t - alpha keeps full precision.
    let shift = mean + tau;
    let fine = Local::new(roots, shift);
    let before = fine.eval(0.0, sigma).residual;
    let (lt, ls, more) = fine.newton(0.0, sigma, 20, tight);
    steps += more;
    let (local_t, sigma) = if fine.eval(lt, ls).residual <= before { (lt, ls) } else { (0.0, sigma) };
    let residual = fine.eval(local_t, sigma).residual;
    if !(residual <= target) {
        return Err(Error::NoConvergence { residual });
    }

    let u = sigma.exp();
    let mut im_bal = 0.0;
    for a in roots {
        let w = local_t - (a.re - shift);
        im_bal += a.im / (w * w + a.im * a.im + u * u);
    }
    if (u * im_bal).abs() > 1e-10 * nf {
        return Err(Error::ConjugacyViolation((u * im_bal).abs()));
    }
    let point = UpperHalfPoint::new(shift + local_t, u)?;
    Ok(CovariantSolution { point, shift, local_t, residual, newton_steps: steps, used_bisection })
}

/// Covariant point of a form, including forms with roots at infinity.
///
/// Those are solved in the chart `F h`, `h = [[k, -1], [1, 0]]`, where every
/// root is finite, and mapped back by `z(F) = h z(F h)`.
pub fn form_covariant(form: &BinaryForm, opts: &SolverOptions) -> Result<UpperHalfPoint> {
    if form.infinite_roots() == 0 {
        return solve_covariant(form.roots(), opts).map(|s| s.point);
    }
    let roots = form.roots();
    let mean = if roots.is_empty() { 0.0 } else { roots.iter().map(|a| a.re).sum::<f64>() / roots.len() as f64 };
    let reach = form.degree() as i64 + 1;
    let gap = |k: i64| roots.iter().map(|a| (a - k as f64).norm()).fold(f64::INFINITY, f64::min);
    let k = (-reach..=reach)
        .map(|j| mean.round() as i64 + j)
        .max_by(|&x, &y| gap(x).total_cmp(&gap(y)))
        .expect("nonempty range");
    let h = UnimodularMatrix::new(k, -1, 1, 0)?;
    let chart = form.act(&h)?;
    debug_assert_eq!(chart.infinite_roots(), 0);
    let z = solve_covariant(chart.roots(), opts)?.point;
    Ok(z.moebius(&h))
}

/// Normalized roots `(t - alpha)/u`, checked against the defining equations.
pub fn normalize(roots: &[Complex64], z: &UpperHalfPoint) -> Result<NormalizedForm> {
    let betas = roots.iter().map(|a| (Complex64::new(z.t, 0.0) - a) / z.u).collect();
    let g = NormalizedForm { betas };
    let (m, b) = g.residuals();
    let residual = m.abs().max(b);
    if !(residual <= 1e-8) {
        return Err(Error::BadCovariant { residual });
    }
    Ok(g)
}

/// Inverse stereographic projection from the north pole.
pub fn lift_to_sphere(beta: Complex64) -> SpherePoint {
    let r = beta.norm();
    if r == 0.0 {
        return SpherePoint { m: 0.0, n: 0.0, p: -1.0 };
    }
    if r <= 1.0 {
        let d = r * r + 1.0;
        SpherePoint { m: 2.0 * beta.re / d, n: 2.0 * beta.im / d, p: (r * r - 1.0) / d }
    } else {
        let s = r + 1.0 / r;
        SpherePoint { m: 2.0 * (beta.re / r) / s, n: 2.0 * (beta.im / r) / s, p: (r - 1.0 / r) / s }
    }
}

/// Both sides of the chord identity
/// `|b1 - b2|^2 = 2 (1 - cos theta) / ((1 - p1)(1 - p2))`.
pub fn chord_identity(b1: Complex64, b2: Complex64) -> (f64, f64) {
    let (m1, m2) = (lift_to_sphere(b1), lift_to_sphere(b2));
    let lhs = (b1 - b2).norm_sqr();
    let rhs = 2.0 * (1.0 - m1.dot(&m2)) / ((1.0 - m1.p) * (1.0 - m2.p));
    (lhs, rhs)
}

/// Sum of the sphere lifts of `(t - alpha)/u`.
pub fn tangent_sum(roots: &[Complex64], z: &UpperHalfPoint) -> Result<[f64; 3]> {
    if !(z.u > 0.0) {
        return Err(Error::NonPositiveU(z.u));
    }
    let mut s = [0.0; 3];
    for a in roots {
        let m = lift_to_sphere((Complex64::new(z.t, 0.0) - a) / z.u);
        s[0] += m.m;
        s[1] += m.n;
        s[2] += m.p;
    }
    Ok(s)
}

pub fn norm3(v: &[f64; 3]) -> f64 {
    (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use std::f64::consts::PI;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn unity(n: usize) -> Vec<Complex64> {
        (0..n).map(|k| Complex64::from_polar(1.0, 2.0 * PI * k as f64 / n as f64)).collect()
    }

    #[test]
    fn residuals_vanish_for_fourth_roots() {
        let r = [c(0.0, 1.0), c(0.0, -1.0), c(1.0, 0.0), c(-1.0, 0.0)];
        let (m, b) = residuals(&r, 0.0, 1.0).unwrap();
        assert!(m.abs() < 1e-15 && b.norm() < 1e-15);
    }

    #[test]
    fn residuals_vanish_for_double_pair() {
        let r = [c(1.5, 0.7), c(1.5, -0.7), c(1.5, 0.7), c(1.5, -0.7)];
        let (m, b) = residuals(&r, 1.5, 0.7).unwrap();
        assert!(m.abs() < 1e-15 && b.norm() < 1e-15);
    }

    #[test]
    fn residuals_reject_nonpositive_u() {
        assert_eq!(residuals(&[c(0.0, 0.0)], 0.0, 0.0), Err(Error::NonPositiveU(0.0)));
    }

    #[test]
    fn residuals_for_0_1_2() {
        // terms at (1, 0.5): D = 1.25, 0.25, 1.25
        let (m, b) = residuals(&[c(0.0, 0.0), c(1.0, 0.0), c(2.0, 0.0)], 1.0, 0.5).unwrap();
        let want_m = 0.25 / 1.25 + 1.0 + 0.25 / 1.25 - 1.5;
        assert!((m - want_m).abs() < 1e-15);
        assert!(b.norm() < 1e-15);
    }

    #[test]
    fn roots_of_unity_give_i() {
        for n in 3..=9 {
            let z = covariant_point(&unity(n)).unwrap();
            assert!(z.t.abs() < 1e-13 && (z.u - 1.0).abs() < 1e-13, "n={n} {z:?}");
        }
    }

    #[test]
    fn double_conjugate_pair() {
        let r = [c(0.5, 2.0), c(0.5, -2.0), c(0.5, 2.0), c(0.5, -2.0)];
        let z = covariant_point(&r).unwrap();
        assert!((z.t - 0.5).abs() < 1e-13 && (z.u - 2.0).abs() < 1e-12);
    }

    #[test]
    fn real_half_multiplicity_is_degenerate() {
        let r = [c(1.0, 0.0), c(1.0, 0.0), c(3.0, 0.0), c(4.0, 0.0)];
        assert!(matches!(covariant_point(&r), Err(Error::DegenerateCluster { multiplicity: 2, degree: 4 })));
    }

    #[test]
    fn symmetric_pair_clusters_have_closed_form() {
        // {±d, ±L}: t = 0, u = sqrt(d L); u is conditioned like L/d
        for (d, l) in [(1e-3, 1.0), (1e-9, 3.0), (2e-5, 1e5)] {
            let z = covariant_point(&[c(d, 0.0), c(-d, 0.0), c(l, 0.0), c(-l, 0.0)]).unwrap();
            assert!(z.t.abs() <= 1e-12 * d);
            let rel = (z.u / (d * l).sqrt() - 1.0).abs();
            assert!(rel < 1e-14 * l / d, "{z:?} {rel:e}");
        }
    }

    #[test]
    fn tiny_cluster_away_from_origin() {
        let center = 12.3;
        let r: Vec<Complex64> = [c(1e-8, 0.0), c(-1e-8, 0.0), c(0.0, 1e-8), c(0.0, -1e-8), c(40.0, 0.0)]
            .iter()
            .map(|z| z + center)
            .collect();
        let s = solve_covariant(&r, &SolverOptions::default()).unwrap();
        assert!(s.residual <= 1e-13);
        assert!((s.point.t - center).abs() < 1e-6);
        assert!(s.point.u < 1e-6);
    }

    #[test]
    fn normalize_fourth_roots() {
        let r = [c(0.0, 1.0), c(0.0, -1.0), c(1.0, 0.0), c(-1.0, 0.0)];
        let g = normalize(&r, &UpperHalfPoint::new(0.0, 1.0).unwrap()).unwrap();
        assert_eq!(g.betas, vec![c(0.0, -1.0), c(0.0, 1.0), c(-1.0, 0.0), c(1.0, 0.0)]);
    }

    #[test]
    fn normalize_rejects_wrong_point() {
        let r = [c(0.0, 1.0), c(0.0, -1.0), c(1.0, 0.0), c(-1.0, 0.0)];
        assert!(matches!(normalize(&r, &UpperHalfPoint::new(0.3, 1.0).unwrap()), Err(Error::BadCovariant { .. })));
    }

    #[test]
    fn normalize_0_1_2_4_matches_formula() {
        let r = [c(0.0, 0.0), c(1.0, 0.0), c(2.0, 0.0), c(4.0, 0.0)];
        let z = covariant_point(&r).unwrap();
        let g = normalize(&r, &z).unwrap();
        for (b, a) in g.betas.iter().zip(&r) {
            assert!((b - (z.t - a) / z.u).norm() < 1e-15);
        }
        let (m, bal) = g.residuals();
        assert!(m.abs() < 1e-12 && bal < 1e-12);
    }

    #[test]
    fn sphere_special_points() {
        assert_eq!(lift_to_sphere(c(0.0, 0.0)), SpherePoint { m: 0.0, n: 0.0, p: -1.0 });
        let e = lift_to_sphere(Complex64::from_polar(1.0, 0.7));
        assert!(e.p.abs() < 1e-15);
        let far = lift_to_sphere(c(1e200, -1e200));
        assert!((far.dot(&far) - 1.0).abs() < 1e-12 && far.p > 0.0);
    }

    #[test]
    fn tangent_sum_vanishes_at_symmetric_points() {
        let r = [c(0.0, 1.0), c(0.0, -1.0), c(1.0, 0.0), c(-1.0, 0.0)];
        assert!(norm3(&tangent_sum(&r, &UpperHalfPoint::new(0.0, 1.0).unwrap()).unwrap()) < 1e-15);
        let r = [c(0.5, 2.0), c(0.5, -2.0), c(0.5, 2.0), c(0.5, -2.0)];
        assert!(norm3(&tangent_sum(&r, &UpperHalfPoint::new(0.5, 2.0).unwrap()).unwrap()) < 1e-15);
    }

    #[test]
    fn tangent_sum_at_computed_point() {
        let r = [c(0.0, 0.0), c(1.0, 0.0), c(2.0, 0.0), c(4.0, 0.0)];
        let z = covariant_point(&r).unwrap();
        assert!(norm3(&tangent_sum(&r, &z).unwrap()) <= 4e-8);
    }

    fn root_set() -> impl Strategy<Value = Vec<Complex64>> {
        proptest::collection::vec((-5.0f64..5.0, -5.0f64..5.0), 2..5).prop_map(|v| {
            let mut r = Vec::new();
            for (x, y) in v {
                if y.abs() < 1.0 {
                    r.push(c(x, 0.0));
                } else {
                    r.push(c(x, y));
                    r.push(c(x, -y));
                }
            }
            r
        })
    }

    proptest! {
        #[test]
        fn chord_identity_holds(a in (-50.0f64..50.0, -50.0f64..50.0), b in (-50.0f64..50.0, -50.0f64..50.0)) {
            let (lhs, rhs) = chord_identity(c(a.0, a.1), c(b.0, b.1));
            prop_assert!((lhs - rhs).abs() <= 1e-10 * (1.0 + lhs));
        }

        #[test]
        fn lift_is_unit_and_projects_back(x in -1e3f64..1e3, y in -1e3f64..1e3) {
            let m = lift_to_sphere(c(x, y));
            prop_assert!((m.dot(&m) - 1.0).abs() <= 1e-12);
            let back = c(m.m / (1.0 - m.p), m.n / (1.0 - m.p));
            prop_assert!((back - c(x, y)).norm() <= 1e-9 * (1.0 + c(x, y).norm()));
        }

        #[test]
        fn translation_and_scaling_covariance(roots in root_set(), s in -20.0f64..20.0, l in 0.01f64..100.0) {
            prop_assume!(roots.len() >= 3);
            let z = covariant_point(&roots);
            prop_assume!(z.is_ok());
            let z = z.unwrap();
            let moved: Vec<Complex64> = roots.iter().map(|a| a + s).collect();
            let zm = covariant_point(&moved).unwrap();
            prop_assert!((zm.t - z.t - s).abs() <= 1e-9 * (1.0 + s.abs() + z.t.abs()));
            prop_assert!((zm.u - z.u).abs() <= 1e-9 * z.u.max(1.0));
            let scaled: Vec<Complex64> = roots.iter().map(|a| a * l).collect();
            let zs = covariant_point(&scaled).unwrap();
            prop_assert!((zs.t - l * z.t).abs() <= 1e-9 * l * (1.0 + z.t.abs()));
            prop_assert!((zs.u - l * z.u).abs() <= 1e-9 * l * z.u);
        }

        #[test]
        fn tangent_sum_small_at_solution(roots in root_set()) {
            prop_assume!(roots.len() >= 3);
            if let Ok(z) = covariant_point(&roots) {
                prop_assert!(norm3(&tangent_sum(&roots, &z).unwrap()) <= 1e-8 * roots.len() as f64);
            }
        }
    }

    #[test]
    fn covariant_with_root_at_infinity_follows_the_action() {
        let f = BinaryForm::from_roots(1.0, vec![c(1.0, 0.0), c(2.0, 0.0), c(3.5, 0.5), c(3.5, -0.5)]).unwrap();
        let g = UnimodularMatrix::new(1, 0, 1, 1).unwrap();
        let h = f.act(&g).unwrap();
        assert_eq!(h.infinite_roots(), 1);
        let z = covariant_point(f.roots()).unwrap();
        let moved = form_covariant(&h, &SolverOptions::default()).unwrap();
        let expect = z.moebius(&g.inverse());
        assert!((moved.t - expect.t).abs() < 1e-10 && (moved.u - expect.u).abs() < 1e-10, "{moved:?} vs {expect:?}");
    }
}
