//! Randomized instances and the all-bounds evaluation used by `selftest`.

use std::collections::BTreeMap;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bounds::{self, thresholds, BoundReport, Ctx};
use crate::covariant::{solve_covariant, SolverOptions, UpperHalfPoint};
use crate::error::Result;
use crate::geometry::{attach_covariant, smallest_disk_with_count, split_half};
use crate::reduction::{classify_roots, CaseTag};

/// Instance family drawn by the generator.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Family {
    TwoClusters,
    RandomBox,
    LargeProduct,
    MajorityCluster,
    NearMajority,
    MirrorClusters,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Instance {
    pub index: usize,
    pub family: Family,
    pub roots: Vec<Complex64>,
}

fn log_uniform<R: Rng>(rng: &mut R, lo: f64, hi: f64) -> f64 {
    (rng.gen_range(lo.ln()..=hi.ln())).exp()
}

/// `h` conjugate-closed points in the disk of radius `r` about the real `center`,
/// one of them on the boundary circle.
fn real_cluster<R: Rng>(rng: &mut R, h: usize, center: f64, r: f64) -> Vec<Complex64> {
    let mut out = Vec::with_capacity(h);
    if h % 2 == 1 {
        let x = if h == 1 { 0.0 } else { rng.gen_range(-r..=r) };
        out.push(Complex64::new(center + x, 0.0));
    }
    let mut first = true;
    while out.len() < h {
        let (rad, ang) = if first {
            (r, rng.gen_range(0.05..std::f64::consts::PI - 0.05))
        } else {
            (r * rng.gen::<f64>().sqrt(), rng.gen_range(0.0..std::f64::consts::PI))
        };
        first = false;
        let p = Complex64::from_polar(rad, ang);
        out.push(Complex64::new(center + p.re, p.im.abs().max(r * 1e-3)));
        out.push(Complex64::new(center + p.re, -p.im.abs().max(r * 1e-3)));
    }
    out
}

/// `h` points with nonzero imaginary part near `center`, plus their conjugates.
fn mirror_pair<R: Rng>(rng: &mut R, h: usize, center: Complex64, r: f64) -> Vec<Complex64> {
    let mut upper: Vec<Complex64> = (0..h)
        .map(|i| {
            let rad = if i == 0 { r } else { r * rng.gen::<f64>().sqrt() };
            center + Complex64::from_polar(rad, rng.gen_range(0.0..std::f64::consts::TAU))
        })
        .collect();
    let lower: Vec<Complex64> = upper.iter().map(|z| z.conj()).collect();
    upper.extend(lower);
    upper
}

fn box_roots<R: Rng>(rng: &mut R, count: usize, half: f64) -> Vec<Complex64> {
    let mut out = Vec::with_capacity(count);
    while out.len() < count {
        let x = rng.gen_range(-half..=half);
        if count - out.len() >= 2 && rng.gen_bool(0.5) {
            let y = rng.gen_range(0.0..=half).max(1e-6);
            out.push(Complex64::new(x, y));
            out.push(Complex64::new(x, -y));
        } else {
            out.push(Complex64::new(x, 0.0));
        }
    }
    out
}

/// Instance number `index` for `seed`; independent of evaluation order.
pub fn generate(seed: u64, index: usize) -> Instance {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index as u64);
    let n = [4usize, 6, 8, 10][rng.gen_range(0..4)];
    let h = n / 2;
    let eps = thresholds(n).default_eps();
    let pick: f64 = rng.gen();
    let sign = if rng.gen_bool(0.5) { 1.0 } else { -1.0 };
    let (family, roots) = if pick < 0.25 {
        let r1 = log_uniform(&mut rng, 1e-9, 1e-2);
        let r2 = log_uniform(&mut rng, r1, 10.0);
        let sep = log_uniform(&mut rng, r2 / 10.0, 100.0 * r2);
        let mut roots = real_cluster(&mut rng, h, 0.0, r1);
        roots.extend(real_cluster(&mut rng, h, sign * sep, r2));
        (Family::TwoClusters, roots)
    } else if pick < 0.5 {
        (Family::RandomBox, box_roots(&mut rng, n, 10.0))
    } else if pick < 0.625 {
        let r1 = log_uniform(&mut rng, 1e-3 * eps, eps);
        let r2 = log_uniform(&mut rng, 1e-2, 1e4);
        let sep = rng.gen_range(0.1 * r2..2.0 * r2);
        let mut roots = real_cluster(&mut rng, h, 0.0, r1);
        roots.extend(real_cluster(&mut rng, h, sign * sep, r2));
        (Family::LargeProduct, roots)
    } else if pick < 0.75 {
        let k = rng.gen_range(h + 1..=n);
        let r = eps * rng.gen_range(0.01..1.0);
        let center = rng.gen_range(-5.0..5.0);
        let mut roots = real_cluster(&mut rng, k, center, r);
        if n - k > 0 {
            roots.extend(box_roots(&mut rng, n - k, 10.0));
        }
        (Family::MajorityCluster, roots)
    } else if pick < 0.875 {
        let edge = 0.45 * eps;
        let mut roots = vec![Complex64::new(-edge, 0.0), Complex64::new(edge, 0.0)];
        if h > 2 {
            roots.extend(real_cluster(&mut rng, h - 2, 0.0, 0.4 * eps));
        }
        roots.push(Complex64::new(1.8 * eps, 0.0));
        let far = log_uniform(&mut rng, 0.1, 5.0);
        let rest = h - 1;
        if rest % 2 == 1 {
            roots.push(Complex64::new(sign * far, 0.0));
        }
        for _ in 0..rest / 2 {
            let x = rng.gen_range(-far..far);
            let y = rng.gen_range(0.1 * far..far);
            roots.push(Complex64::new(x, y));
            roots.push(Complex64::new(x, -y));
        }
        (Family::NearMajority, roots)
    } else {
        let r = eps * rng.gen_range(0.01..1.0);
        let center = Complex64::new(rng.gen_range(-3.0..3.0), log_uniform(&mut rng, eps, 1.0));
        (Family::MirrorClusters, mirror_pair(&mut rng, h, center, r))
    };
    debug_assert_eq!(roots.len(), n);
    Instance { index, family, roots }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct InstanceReport {
    pub n: usize,
    pub eps: f64,
    pub z: UpperHalfPoint,
    pub tag: CaseTag,
    pub reports: Vec<BoundReport>,
}

fn count_within(roots: &[Complex64], t: f64, radius: f64) -> usize {
    roots.iter().filter(|a| (**a - t).norm() <= radius).count()
}

/// Evaluate every statement whose hypotheses hold on this root set.
pub fn evaluate_instance(roots: &[Complex64], eps: f64, solver: &SolverOptions) -> Result<InstanceReport> {
    let n = roots.len();
    let nf = n as f64;
    let s = nf.sqrt();
    let z = solve_covariant(roots, solver)?.point;
    let (t, u) = (z.t, z.u);
    let mut reps = Vec::new();

    // counting around t at every root distance and at a few multiples of u
    let mut radii: Vec<f64> = roots.iter().map(|a| (a - t).norm()).filter(|r| *r > 0.0).collect();
    radii.extend([0.5 * u, u, 2.0 * u]);
    for &r in &radii {
        let k = count_within(roots, t, r * (1.0 + 1e-12));
        reps.extend(bounds::count_bounds(n, k, r, u));
    }
    let ctx = Ctx::new().with("n", nf).with("u", u).with("eps", eps);
    let wide = count_within(roots, t, u * s * (1.0 + 1e-9));
    reps.push(BoundReport::new("half_count_in_sqrt_n_disk", nf / 2.0, wide as f64, false, ctx.clone().with("k", wide as f64).0));
    let tight = count_within(roots, t, u / s * (1.0 - 1e-9));
    reps.push(BoundReport::new("at_most_half_in_small_disk", tight as f64, nf / 2.0, false, ctx.clone().with("k", tight as f64).0));
    if u < eps {
        let k = count_within(roots, t, eps * s * (1.0 + 1e-9));
        reps.push(BoundReport::new("half_count_in_eps_disk", nf / 2.0, k as f64, false, ctx.clone().with("k", k as f64).0));
    }
    if let Some(c) = smallest_disk_with_count(roots, n.div_ceil(2)) {
        reps.push(BoundReport::new("half_disk_radius", c.disk.radius, u * s, false, ctx.clone().with("r", c.disk.radius).0));
    }

    // any disk holding more than half of the roots
    if let Some(c) = smallest_disk_with_count(roots, n / 2 + 1) {
        let k = roots.iter().filter(|a| c.disk.contains_with(**a, 1e-12)).count().max(c.k());
        let r = c.disk.radius;
        let tc = (Complex64::new(t, 0.0) - c.disk.center).norm();
        reps.extend(bounds::u_upper_majority(n, k, r, tc, u)?);
        reps.extend(bounds::c0_window_reports(n, tc / u, r / u));
        reps.push(bounds::t_center_majority(n, r, tc));
        let far = c.indices.iter().map(|&i| (roots[i] - t).norm()).fold(0.0, f64::max);
        reps.extend(bounds::majority_root_distance(n, r, u, far));
    }

    if n.is_multiple_of(2) {
        if let Some(c) = smallest_disk_with_count(roots, n / 2) {
            let split = attach_covariant(&split_half(roots, &c.indices)?, roots, &z)?;
            reps.extend(bounds::half_split_u(n, &split, u)?);
            if let Ok(r) = bounds::ratio_bounds(n, &split, u) {
                reps.extend(r);
            }
            reps.extend(bounds::smallness_case_bounds(n, eps, &split, u, split.center_distance()));
            reps.extend(bounds::center_reality(n, eps, roots, &split, u));
        }
    }

    let class = classify_roots(roots, &z, eps);
    if class.fires() {
        if let (Some(c), Some(disk)) = (class.target, class.cluster) {
            let k = class.quantities.k.unwrap_or(0);
            let m = (c.re + 0.5).floor() as i64;
            let bound_disk = if 2 * k > n { disk } else { class.split.as_ref().map(|s| s.disk1).unwrap_or(disk) };
            let d1 = class.split.as_ref().and_then(|s| s.d1);
            if let Ok(r) = bounds::u_growth_bound(n, k, eps, t, u, m, &bound_disk, d1) {
                reps.push(r);
            }
        }
    }
    Ok(InstanceReport { n, eps, z, tag: class.tag, reports: reps })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Violation {
    pub index: usize,
    pub family: Family,
    pub roots: Vec<[f64; 2]>,
    pub report: BoundReport,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct SweepSummary {
    pub seed: u64,
    pub count: usize,
    pub evaluated: usize,
    pub skipped: BTreeMap<String, usize>,
    pub checked: BTreeMap<String, usize>,
    pub violations: BTreeMap<String, usize>,
    pub tags: BTreeMap<String, usize>,
    pub families: BTreeMap<String, usize>,
    /// First few violating instances, by index.
    pub examples: Vec<Violation>,
}

impl SweepSummary {
    pub fn total_violations(&self) -> usize {
        self.violations.values().sum()
    }
}

pub const MAX_EXAMPLES: usize = 20;

/// Generate and evaluate `count` instances in parallel; merged by index.
pub fn run_sweep(seed: u64, count: usize, solver: &SolverOptions) -> SweepSummary {
    let results: Vec<(Instance, Result<InstanceReport>)> = (0..count)
        .into_par_iter()
        .map(|i| {
            let inst = generate(seed, i);
            let eps = thresholds(inst.roots.len()).default_eps();
            let rep = evaluate_instance(&inst.roots, eps, solver);
            (inst, rep)
        })
        .collect();
    let mut out = SweepSummary { seed, count, ..Default::default() };
    for (inst, rep) in results {
        *out.families.entry(format!("{:?}", inst.family)).or_default() += 1;
        let rep = match rep {
            Ok(r) => r,
            Err(e) => {
                let key = format!("{e:?}").split(['(', ' ', '{']).next().unwrap_or("error").to_string();
                *out.skipped.entry(key).or_default() += 1;
                continue;
            }
        };
        out.evaluated += 1;
        *out.tags.entry(rep.tag.label().to_string()).or_default() += 1;
        for r in rep.reports {
            *out.checked.entry(r.name.clone()).or_default() += 1;
            if !r.holds {
                *out.violations.entry(r.name.clone()).or_default() += 1;
                if out.examples.len() < MAX_EXAMPLES {
                    out.examples.push(Violation {
                        index: inst.index,
                        family: inst.family,
                        roots: inst.roots.iter().map(|z| [z.re, z.im]).collect(),
                        report: r,
                    });
                }
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn generator_is_deterministic_and_conjugate_closed() {
        for i in 0..300 {
            let a = generate(7, i);
            assert_eq!(a, generate(7, i));
            let n = a.roots.len();
            assert!([4, 6, 8, 10].contains(&n), "{:?}", a.family);
            for z in &a.roots {
                let paired = a.roots.iter().filter(|w| **w == z.conj()).count();
                assert!(paired >= 1, "{:?} {z}", a.family);
            }
        }
    }

    #[test]
    fn all_families_appear() {
        let mut seen = std::collections::BTreeSet::new();
        for i in 0..200 {
            seen.insert(generate(1, i).family);
        }
        assert_eq!(seen.len(), 6);
    }

    #[test]
    fn near_majority_construction_hits_refined_case() {
        let mut hits = 0;
        let mut total = 0;
        for i in 0..400 {
            let inst = generate(3, i);
            if inst.family != Family::NearMajority {
                continue;
            }
            total += 1;
            let eps = thresholds(inst.roots.len()).default_eps();
            let z = crate::covariant::covariant_point(&inst.roots).unwrap();
            if classify_roots(&inst.roots, &z, eps).tag == CaseTag::CloseMajorityRefined {
                hits += 1;
            }
        }
        assert!(total > 0 && hits * 2 > total, "{hits}/{total}");
    }

    #[test]
    fn sweep_merges_in_index_order() {
        let opts = SolverOptions::default();
        let a = run_sweep(5, 40, &opts);
        let b = run_sweep(5, 40, &opts);
        assert_eq!(a, b);
        assert_eq!(a.evaluated + a.skipped.values().sum::<usize>(), 40);
    }

    #[test]
    fn evaluation_of_unity_roots() {
        let roots: Vec<Complex64> =
            (0..6).map(|k| Complex64::from_polar(1.0, std::f64::consts::PI * k as f64 / 3.0)).collect();
        let rep = evaluate_instance(&roots, thresholds(6).default_eps(), &SolverOptions::default()).unwrap();
        assert_eq!(rep.tag, CaseTag::NoCluster);
        assert!(rep.reports.iter().all(|r| r.holds), "{:?}", rep.reports.iter().find(|r| !r.holds));
    }
}
