//! Inequalities about the covariant point, as checkable predicates.
//!
//! Every report is phrased as `lhs <= rhs` (or `lhs < rhs` when `strict`).
//! Comparisons allow a relative slack of 1e-9 of the larger side.

use std::collections::BTreeMap;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{best_cluster_within, ClusterSplit, Disk};

pub const SLACK: f64 = 1e-9;

/// Outcome of one inequality on one instance.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoundReport {
    pub name: String,
    pub lhs: f64,
    pub rhs: f64,
    #[serde(default)]
    pub strict: bool,
    pub holds: bool,
    pub context: BTreeMap<String, f64>,
}

impl BoundReport {
    pub fn new(name: &str, lhs: f64, rhs: f64, strict: bool, context: BTreeMap<String, f64>) -> Self {
        let slack = SLACK * lhs.abs().max(rhs.abs());
        let holds = if strict { lhs < rhs + slack } else { lhs <= rhs + slack };
        BoundReport { name: name.to_string(), lhs, rhs, strict, holds, context }
    }

    pub fn margin(&self) -> f64 {
        self.rhs - self.lhs
    }
}

/// Context map builder.
#[derive(Clone, Default)]
pub struct Ctx(pub BTreeMap<String, f64>);

impl Ctx {
    pub fn new() -> Self {
        Ctx(BTreeMap::new())
    }
    pub fn with(mut self, key: &str, v: f64) -> Self {
        self.0.insert(key.to_string(), v);
        self
    }
    fn le(&self, name: &str, lhs: f64, rhs: f64) -> BoundReport {
        BoundReport::new(name, lhs, rhs, false, self.0.clone())
    }
    fn lt(&self, name: &str, lhs: f64, rhs: f64) -> BoundReport {
        BoundReport::new(name, lhs, rhs, true, self.0.clone())
    }
}

/// Upper limits on `eps` assumed by the smallness statements.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct EpsilonThresholds {
    pub n: usize,
    /// `1/(100 n^2 (2n+3))`, strict.
    pub two_cluster: f64,
    /// `1/(n (4n^2+1))`, strict.
    pub ratio: f64,
    /// `1/(100 n (2n+3)^2)`, strict.
    pub center: f64,
    /// `3/(104 n^2 (n+1))`.
    pub real_product: f64,
    /// `1/(32 (n+1))`.
    pub growth_majority: f64,
    /// `1/(4 n^2)`.
    pub growth_half: f64,
}

impl EpsilonThresholds {
    pub fn values(&self) -> [(&'static str, f64); 6] {
        [
            ("two_cluster", self.two_cluster),
            ("ratio", self.ratio),
            ("center", self.center),
            ("real_product", self.real_product),
            ("growth_majority", self.growth_majority),
            ("growth_half", self.growth_half),
        ]
    }

    pub fn min(&self) -> f64 {
        self.values().iter().map(|v| v.1).fold(f64::INFINITY, f64::min)
    }

    /// Largest double strictly below every threshold.
    pub fn default_eps(&self) -> f64 {
        f64::from_bits(self.min().to_bits() - 1)
    }

    /// Names of thresholds that `eps` fails (strict ones need `eps <` them).
    pub fn exceeded(&self, eps: f64) -> Vec<&'static str> {
        let strict = [true, true, true, false, false, false];
        self.values()
            .iter()
            .zip(strict)
            .filter(|((_, v), s)| if *s { eps >= *v } else { eps > *v })
            .map(|((k, _), _)| *k)
            .collect()
    }
}

pub fn thresholds(n: usize) -> EpsilonThresholds {
    let f = n as f64;
    EpsilonThresholds {
        n,
        two_cluster: 1.0 / (100.0 * f * f * (2.0 * f + 3.0)),
        ratio: 1.0 / (f * (4.0 * f * f + 1.0)),
        center: 1.0 / (100.0 * f * (2.0 * f + 3.0).powi(2)),
        real_product: 3.0 / (104.0 * f * f * (f + 1.0)),
        growth_majority: 1.0 / (32.0 * (f + 1.0)),
        growth_half: 1.0 / (4.0 * f * f),
    }
}

/// `(n/2)(1 - u^2/R^2) < k <= (n/2)(1 + R^2/u^2)` for the `k` roots within `R` of `t`.
pub fn count_bounds(n: usize, k: usize, radius: f64, u: f64) -> [BoundReport; 2] {
    let (h, kf) = (n as f64 / 2.0, k as f64);
    let ctx = Ctx::new().with("n", n as f64).with("k", kf).with("R", radius).with("u", u);
    [
        ctx.lt("count_lower", h * (1.0 - u * u / (radius * radius)), kf),
        ctx.le("count_upper", kf, h * (1.0 + radius * radius / (u * u))),
    ]
}

/// Upper bounds on `u` from a disk `(c, r)` holding `k > n/2` roots.
pub fn u_upper_majority(n: usize, k: usize, r: f64, t_minus_c: f64, u: f64) -> Result<Vec<BoundReport>> {
    if 2 * k <= n {
        return Err(Error::NotMajority { k, n });
    }
    let (nf, kf) = (n as f64, k as f64);
    let ctx = Ctx::new().with("n", nf).with("k", kf).with("r", r).with("u", u).with("t_minus_c", t_minus_c);
    let mut out = vec![ctx.le("majority_u_upper", u, 2.0 * r * nf.sqrt())];
    if t_minus_c > r {
        out.push(ctx.le("majority_u_upper_sharp", u, 4.0 * kf * r / (3.0 * nf * (2.0 * kf - nf)).sqrt()));
    }
    Ok(out)
}

/// Admissible `|c0|` for the normalized centre of a majority disk of radius `r0`.
pub fn c0_window(n: usize, r0: f64) -> (f64, f64) {
    let s = (n as f64).sqrt();
    (1.0 / s - r0, s + r0)
}

pub fn c0_window_reports(n: usize, c0_abs: f64, r0: f64) -> [BoundReport; 2] {
    let (lo, hi) = c0_window(n, r0);
    let ctx = Ctx::new().with("n", n as f64).with("c0", c0_abs).with("r0", r0);
    [ctx.le("majority_center_window_lower", lo, c0_abs), ctx.le("majority_center_window_upper", c0_abs, hi)]
}

/// `|t - c| <= (2n+3) r` for a majority disk.
pub fn t_center_majority(n: usize, r: f64, t_minus_c: f64) -> BoundReport {
    let ctx = Ctx::new().with("n", n as f64).with("r", r).with("t_minus_c", t_minus_c);
    ctx.le("majority_t_center", t_minus_c, (2.0 * n as f64 + 3.0) * r)
}

/// `|t - alpha| <= u (sqrt n + 2 r/u) <= (2n+2) r` over the roots of a majority disk.
pub fn majority_root_distance(n: usize, r: f64, u: f64, max_root_distance: f64) -> [BoundReport; 2] {
    let mid = u * (n as f64).sqrt() + 2.0 * r;
    let ctx = Ctx::new().with("n", n as f64).with("r", r).with("u", u).with("max_root_distance", max_root_distance);
    [
        ctx.le("majority_root_distance", max_root_distance, mid),
        ctx.le("majority_root_distance_radius", mid, (2.0 * n as f64 + 2.0) * r),
    ]
}

fn split_ctx(n: usize, split: &ClusterSplit, u: f64) -> Result<(Ctx, f64, f64)> {
    let (d1, d2) = split.distances()?;
    let ctx = Ctx::new()
        .with("n", n as f64)
        .with("u", u)
        .with("r1", split.r1())
        .with("r2", split.r2())
        .with("d1", d1)
        .with("d2", d2)
        .with("c_dist", split.center_distance());
    Ok((ctx, d1, d2))
}

/// Linear and product bounds on `u` for a half split.
pub fn half_split_u(n: usize, split: &ClusterSplit, u: f64) -> Result<Vec<BoundReport>> {
    let (ctx, d1, d2) = split_ctx(n, split, u)?;
    let (r1, r2) = (split.r1(), split.r2());
    let s = (n as f64).sqrt();
    Ok(vec![
        ctx.le("half_u_linear_cluster", u, s * (d1 + r1)),
        ctx.le("half_u_linear_complement", u, s * (d2 + r2)),
        ctx.le("half_u_product_lower", ((d1 - r1) * (d2 - r2)).abs(), u * u),
        ctx.le("half_u_product_upper", u * u, ((d1 + r1) * (d2 + r2)).abs()),
    ])
}

/// Lower bounds on the radius ratio when `t` lies outside a disk.
pub fn ratio_bounds(n: usize, split: &ClusterSplit, u: f64) -> Result<Vec<BoundReport>> {
    let (ctx, d1, d2) = split_ctx(n, split, u)?;
    let (r1, r2) = (split.r1(), split.r2());
    let k = 3.0 / n as f64;
    let u2 = u * u;
    let mut out = Vec::new();
    if d1 > r1 && r2 > 0.0 {
        let lhs = k * ((d1 - r1).powi(2) + u2) / ((d2 + r2).powi(2) + u2);
        out.push(ctx.le("ratio_lower_cluster", lhs, r1 / r2));
    }
    if d2 > r2 && r1 > 0.0 {
        let lhs = k * ((d2 - r2).powi(2) + u2) / ((d1 + r1).powi(2) + u2);
        out.push(ctx.le("ratio_lower_complement", lhs, r2 / r1));
    }
    if out.is_empty() {
        return Err(Error::NotApplicable);
    }
    Ok(out)
}

fn is_real(c: Complex64) -> bool {
    c.im.abs() <= 1e-9 * (1.0 + c.norm())
}

/// The gated statements for a half split with a small first disk.
///
/// Each statement is evaluated only when its hypotheses hold. All of them
/// also assume `r1 <= eps`. Statements that need `d1`/`d2` are skipped
/// when the split has no distances attached.
pub fn smallness_case_bounds(n: usize, eps: f64, split: &ClusterSplit, u: f64, c_dist: f64) -> Vec<BoundReport> {
    let th = thresholds(n);
    let nf = n as f64;
    let s = nf.sqrt();
    let (r1, r2) = (split.r1(), split.r2());
    let sq = eps.sqrt();
    let ratio_cap = 10.0 * nf * eps / 3.0;
    let ratio = if r2 > 0.0 { r1 / r2 } else { f64::NAN };
    let prod = r1 * r2;
    let dists = split.distances().ok();
    let mut ctx = Ctx::new()
        .with("n", nf)
        .with("eps", eps)
        .with("u", u)
        .with("r1", r1)
        .with("r2", r2)
        .with("c_dist", c_dist);
    if let Some((d1, d2)) = dists {
        ctx = ctx.with("d1", d1).with("d2", d2);
    }
    let mut out = Vec::new();
    if !(r1 <= eps) {
        return out;
    }
    let real_centers = is_real(split.c1()) && is_real(split.c2());

    if eps < th.ratio && u <= eps && ratio.is_finite() {
        if c_dist >= (4.0 * r2).max(4.0 * sq) {
            out.push(ctx.le("far_ratio", ratio, ratio_cap));
        }
        if r2 <= sq && c_dist > eps + sq + r1 + r2 {
            out.push(ctx.le("far_ratio_small_r2", ratio, ratio_cap));
        }
        if r2 > sq && c_dist >= 2.0 * r2 + r2 * sq + r1 {
            out.push(ctx.le("far_ratio_large_r2", ratio, ratio_cap));
        }
    }

    if let Some((d1, d2)) = dists {
        if eps < th.center && c_dist >= 2.0 * r2 && d1 > r1 && ratio < ratio_cap {
            out.push(ctx.le("far_complement_gap", r2 / 2.0, (d2 - r2).abs()));
            out.push(ctx.le("far_d1_near_u", d1, u + r1));
        }
        if eps < th.center && u <= eps {
            out.push(ctx.le("small_u_d1", d1, 0.5 / s + eps));
        }
        if eps < th.center
            && u <= eps
            && c_dist <= (r1 + r2 + eps + sq).max(2.0 * r2 + r2 * sq + r1)
            && (d1 - r1).abs() >= u / s
            && r2 > 0.0
            && (c_dist / r2 - 1.0).abs() >= 64.0 * nf * s * eps
        {
            out.push(ctx.le("close_product", prod, 1.0 / (64.0 * nf * nf)));
        }
        let far = c_dist >= 2.0 * r2 && ratio <= ratio_cap;
        let close_real = c_dist <= 2.0 * r2 && real_centers && prod <= 3.0 / (64.0 * nf * nf);
        if eps <= th.center && (far || close_real) {
            out.push(ctx.le("d1_bound", d1, 0.5 / s + r1));
        }
        if eps <= th.center && far {
            out.push(ctx.le("far_d1_bound", d1, 0.5 / s + r1));
        }
        if eps <= th.real_product && close_real {
            out.push(ctx.le("real_close_d1_bound", d1, 0.5 / s + r1));
        }
    }

    if eps < th.center && r2 <= sq && ratio < ratio_cap {
        out.push(ctx.lt("small_r2_u", u, 20.0 * nf * eps / 7.0));
    }
    if eps < th.center && r2 > sq && c_dist >= 2.0 * r2 && ratio <= ratio_cap {
        out.push(ctx.lt("large_r2_u", u, 8.0 * s * eps));
    }
    if eps < th.center && r2 > sq && c_dist < 2.0 * r2 && prod <= 3.0 / (64.0 * nf * nf) {
        out.push(ctx.le("close_product_u", u, 4.0 * (nf * prod).sqrt()));
        if prod <= eps * eps {
            out.push(ctx.le("close_product_u_eps", u, 4.0 * eps * s));
        }
    }
    if r2 <= sq && c_dist <= 2.0 * r2 {
        out.push(ctx.le("tight_u", u, 4.0 * (nf * eps).sqrt()));
    }
    out
}

/// Small u and a small first disk force one of: a majority in radius `2 eps`,
/// real centres, or mirror-image disks.
pub fn center_reality(n: usize, eps: f64, roots: &[Complex64], split: &ClusterSplit, u: f64) -> Option<BoundReport> {
    if !(u <= eps && split.r1() <= eps) {
        return None;
    }
    let (c1, c2, r1, r2) = (split.c1(), split.c2(), split.r1(), split.r2());
    let majority = best_cluster_within(roots, 2.0 * eps, n / 2 + 1).is_some();
    let real = is_real(c1) && is_real(c2);
    let mirror = (c1 - c2.conj()).norm() <= 1e-9 * (1.0 + c1.norm()) && (r1 - r2).abs() <= 1e-9 * (1.0 + r1);
    let ok = majority || real || mirror;
    let ctx = Ctx::new()
        .with("n", n as f64)
        .with("eps", eps)
        .with("u", u)
        .with("r1", r1)
        .with("r2", r2)
        .with("im_c1", c1.im)
        .with("im_c2", c2.im)
        .with("majority_2eps", majority as u8 as f64);
    Some(ctx.le("center_reality", if ok { 0.0 } else { 1.0 }, 0.0))
}

/// Optional: `d1 - r1 <= max(sqrt(16 n r1 r2 / 3), 16 n (n+1) eps / 3)` for
/// real centres with `|c1 - c2| <= 2 r2`. Not part of the default catalog.
pub fn real_close_d1_general(n: usize, eps: f64, split: &ClusterSplit) -> Option<BoundReport> {
    let (d1, _) = split.distances().ok()?;
    let (r1, r2) = (split.r1(), split.r2());
    let nf = n as f64;
    if !(r1 <= eps && is_real(split.c1()) && is_real(split.c2()) && split.center_distance() <= 2.0 * r2) {
        return None;
    }
    let rhs = (16.0 * nf * r1 * r2 / 3.0).sqrt().max(16.0 * nf * (nf + 1.0) * eps / 3.0);
    let ctx = Ctx::new().with("n", nf).with("eps", eps).with("r1", r1).with("r2", r2).with("d1", d1);
    Some(ctx.le("real_close_d1_general", d1 - r1, rhs))
}

/// Growth of `u` under the shift-and-invert step with `m = floor(Re c + 1/2)`.
///
/// Reported as `required <= factor` (strict for the majority case).
#[allow(clippy::too_many_arguments)]
pub fn u_growth_bound(
    n: usize,
    k: usize,
    eps: f64,
    t: f64,
    u: f64,
    m: i64,
    disk: &Disk,
    d1: Option<f64>,
) -> Result<BoundReport> {
    let th = thresholds(n);
    if !(disk.radius <= eps) {
        return Err(Error::HypothesesNotMet(format!("radius {} exceeds eps {}", disk.radius, eps)));
    }
    if m != (disk.center.re + 0.5).floor() as i64 {
        return Err(Error::HypothesesNotMet("m is not the integer nearest Re c".into()));
    }
    let factor = 1.0 / ((t - m as f64).powi(2) + u * u);
    let ctx = Ctx::new()
        .with("n", n as f64)
        .with("k", k as f64)
        .with("eps", eps)
        .with("t", t)
        .with("u", u)
        .with("m", m as f64)
        .with("r", disk.radius);
    if 2 * k > n {
        if eps > th.growth_majority {
            return Err(Error::HypothesesNotMet("eps above 1/(32(n+1))".into()));
        }
        return Ok(ctx.lt("u_growth_majority", 2.0, factor));
    }
    if 2 * k == n && k >= 2 {
        let d1 = d1.unwrap_or_else(|| (Complex64::new(t, 0.0) - disk.center).norm());
        if eps > th.growth_half {
            return Err(Error::HypothesesNotMet("eps above 1/(4n^2)".into()));
        }
        if d1 > 0.5 / (n as f64).sqrt() + eps {
            return Err(Error::HypothesesNotMet("d1 above 1/(2 sqrt n) + eps".into()));
        }
        return Ok(ctx.with("d1", d1).le("u_growth_half", 8.0 / 7.0, factor));
    }
    Err(Error::HypothesesNotMet(format!("k = {k} is below n/2")))
}
