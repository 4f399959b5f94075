//! Enclosing disks and root clusters.

use num_complex::Complex64;
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::covariant::UpperHalfPoint;
use crate::error::{Error, Result};

const SHUFFLE_SEED: u64 = 0x5eed_d15c;
const CONTAIN_SLACK: f64 = 1e-14;
const COVER_SLACK: f64 = 1e-12;

/// Closed disk in the complex plane.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Disk {
    pub center: Complex64,
    pub radius: f64,
}

impl Disk {
    pub fn new(center: Complex64, radius: f64) -> Self {
        Disk { center, radius: radius.max(0.0) }
    }

    /// Containment with a relative slack of `slack`, plus the rounding of the coordinates.
    pub fn contains_with(&self, p: Complex64, slack: f64) -> bool {
        let rounding = 4.0 * f64::EPSILON * self.center.norm().max(p.norm());
        (p - self.center).norm() <= self.radius * (1.0 + slack) + rounding
    }

    pub fn contains(&self, p: Complex64) -> bool {
        self.contains_with(p, CONTAIN_SLACK)
    }
}

/// A set of root indices with its smallest enclosing disk.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Cluster {
    pub indices: Vec<usize>,
    pub disk: Disk,
}

impl Cluster {
    pub fn k(&self) -> usize {
        self.indices.len()
    }
}

/// Half split of the roots into a cluster disk and a complement disk, `r1 <= r2`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ClusterSplit {
    pub cluster_indices: Vec<usize>,
    pub complement_indices: Vec<usize>,
    pub disk1: Disk,
    pub disk2: Disk,
    pub d1: Option<f64>,
    pub d2: Option<f64>,
}

impl ClusterSplit {
    pub fn r1(&self) -> f64 {
        self.disk1.radius
    }
    pub fn r2(&self) -> f64 {
        self.disk2.radius
    }
    pub fn c1(&self) -> Complex64 {
        self.disk1.center
    }
    pub fn c2(&self) -> Complex64 {
        self.disk2.center
    }
    pub fn center_distance(&self) -> f64 {
        (self.disk1.center - self.disk2.center).norm()
    }
    pub fn distances(&self) -> Result<(f64, f64)> {
        match (self.d1, self.d2) {
            (Some(a), Some(b)) => Ok((a, b)),
            _ => Err(Error::MissingDistances),
        }
    }
}

fn diameter(a: Complex64, b: Complex64) -> Disk {
    let center = (a + b) / 2.0;
    Disk::new(center, (a - center).norm().max((b - center).norm()))
}

fn circumcircle(a: Complex64, b: Complex64, c: Complex64) -> Option<Disk> {
    let ox = (a.re.min(b.re).min(c.re) + a.re.max(b.re).max(c.re)) / 2.0;
    let oy = (a.im.min(b.im).min(c.im) + a.im.max(b.im).max(c.im)) / 2.0;
    let o = Complex64::new(ox, oy);
    let (a, b, c) = (a - o, b - o, c - o);
    let d = 2.0 * (a.re * (b.im - c.im) + b.re * (c.im - a.im) + c.re * (a.im - b.im));
    if d == 0.0 {
        return None;
    }
    let (na, nb, nc) = (a.norm_sqr(), b.norm_sqr(), c.norm_sqr());
    let x = (na * (b.im - c.im) + nb * (c.im - a.im) + nc * (a.im - b.im)) / d;
    let y = (na * (c.re - b.re) + nb * (a.re - c.re) + nc * (b.re - a.re)) / d;
    let p = Complex64::new(x, y);
    let r = (p - a).norm().max((p - b).norm()).max((p - c).norm());
    Some(Disk::new(p + o, r))
}

fn cross(a: Complex64, b: Complex64, c: Complex64) -> f64 {
    (b.re - a.re) * (c.im - a.im) - (b.im - a.im) * (c.re - a.re)
}

fn with_two(points: &[Complex64], p: Complex64, q: Complex64) -> Disk {
    let circ = diameter(p, q);
    let mut left: Option<Disk> = None;
    let mut right: Option<Disk> = None;
    for &r in points {
        if circ.contains(r) {
            continue;
        }
        let cr = cross(p, q, r);
        let Some(c) = circumcircle(p, q, r) else { continue };
        if cr > 0.0 && left.is_none_or(|l| cross(p, q, c.center) > cross(p, q, l.center)) {
            left = Some(c);
        } else if cr < 0.0 && right.is_none_or(|l| cross(p, q, c.center) < cross(p, q, l.center)) {
            right = Some(c);
        }
    }
    match (left, right) {
        (None, None) => circ,
        (Some(l), None) => l,
        (None, Some(r)) => r,
        (Some(l), Some(r)) => {
            if l.radius <= r.radius {
                l
            } else {
                r
            }
        }
    }
}

/// Smallest disk with `p` on its boundary containing `points`.
fn with_one(points: &[Complex64], p: Complex64) -> Disk {
    let mut c = Disk::new(p, 0.0);
    for (i, &q) in points.iter().enumerate() {
        if !c.contains(q) {
            c = if c.radius == 0.0 { diameter(p, q) } else { with_two(&points[..i], p, q) };
        }
    }
    c
}

/// Smallest disk containing all points (Welzl with a fixed shuffle).
pub fn smallest_enclosing_disk(points: &[Complex64]) -> Result<Disk> {
    if points.is_empty() {
        return Err(Error::EmptyInput);
    }
    let mut pts = points.to_vec();
    pts.shuffle(&mut ChaCha8Rng::seed_from_u64(SHUFFLE_SEED));
    let mut c: Option<Disk> = None;
    for i in 0..pts.len() {
        if c.is_none_or(|d| !d.contains(pts[i])) {
            c = Some(with_one(&pts[..i], pts[i]));
        }
    }
    Ok(c.expect("nonempty"))
}

fn disk_of(roots: &[Complex64], idx: &[usize]) -> Disk {
    let pts: Vec<Complex64> = idx.iter().map(|&i| roots[i]).collect();
    smallest_enclosing_disk(&pts).expect("nonempty index set")
}

/// Per-root screen: the largest set of roots within `2 eps` of a single root,
/// if it holds at least half of them.
pub fn detect_majority_cluster(roots: &[Complex64], eps: f64) -> Option<Cluster> {
    let n = roots.len();
    let mut best: Option<Cluster> = None;
    for &a in roots {
        let idx: Vec<usize> = (0..n).filter(|&i| (roots[i] - a).norm() <= 2.0 * eps).collect();
        if 2 * idx.len() < n {
            continue;
        }
        let disk = disk_of(roots, &idx);
        let better = match &best {
            None => true,
            Some(b) => idx.len() > b.k() || (idx.len() == b.k() && disk.radius < b.disk.radius),
        };
        if better {
            best = Some(Cluster { indices: idx, disk });
        }
    }
    if let Some(b) = &best {
        let pairwise_close = b
            .indices
            .iter()
            .all(|&i| b.indices.iter().all(|&k| (roots[i] - roots[k]).norm() <= 2.0 * eps));
        if pairwise_close {
            debug_assert!(b.disk.radius <= 2.0 * eps / 3f64.sqrt() * (1.0 + 1e-12));
        }
    }
    best
}

fn covered(roots: &[Complex64], center: Complex64, radius: f64) -> Vec<usize> {
    (0..roots.len())
        .filter(|&i| Disk::new(center, radius).contains_with(roots[i], COVER_SLACK))
        .collect()
}

/// Largest set of roots fitting in a disk of radius `radius`, if it has at
/// least `min_count` members. Ties: smallest enclosing radius, then
/// lexicographically lowest index set.
pub fn best_cluster_within(roots: &[Complex64], radius: f64, min_count: usize) -> Option<Cluster> {
    let n = roots.len();
    let mut centers: Vec<Complex64> = roots.to_vec();
    for i in 0..n {
        for j in 0..i {
            let (a, b) = (roots[i], roots[j]);
            let d = (a - b).norm();
            if d == 0.0 || d > 2.0 * radius {
                continue;
            }
            let mid = (a + b) / 2.0;
            let h = (radius * radius - d * d / 4.0).max(0.0).sqrt();
            let perp = (b - a) * Complex64::new(0.0, 1.0) / d;
            centers.push(mid + perp * h);
            centers.push(mid - perp * h);
        }
    }
    let mut best: Option<Cluster> = None;
    let mut seen: Vec<Vec<usize>> = Vec::new();
    for c in centers {
        let idx = covered(roots, c, radius);
        if idx.len() < min_count.max(1) || seen.contains(&idx) {
            continue;
        }
        let disk = disk_of(roots, &idx);
        seen.push(idx.clone());
        if disk.radius > radius * (1.0 + COVER_SLACK) {
            continue;
        }
        let better = match &best {
            None => true,
            Some(b) => {
                idx.len() > b.k()
                    || (idx.len() == b.k()
                        && (disk.radius < b.disk.radius || (disk.radius == b.disk.radius && idx < b.indices)))
            }
        };
        if better {
            best = Some(Cluster { indices: idx, disk });
        }
    }
    best
}

/// Smallest disk holding at least `k` of the points, with `k` of them.
///
/// Exhaustive over the disks spanned by one, two or three points.
pub fn smallest_disk_with_count(points: &[Complex64], k: usize) -> Option<Cluster> {
    let n = points.len();
    if k == 0 || k > n {
        return None;
    }
    let mut cands: Vec<Disk> = points.iter().map(|&p| Disk::new(p, 0.0)).collect();
    for i in 0..n {
        for j in 0..i {
            cands.push(diameter(points[i], points[j]));
            for l in 0..j {
                if let Some(c) = circumcircle(points[i], points[j], points[l]) {
                    cands.push(c);
                }
            }
        }
    }
    let mut best: Option<(Disk, Vec<usize>)> = None;
    for d in cands {
        if best.as_ref().is_some_and(|(b, _)| d.radius >= b.radius) {
            continue;
        }
        let inside: Vec<usize> = (0..n).filter(|&i| d.contains_with(points[i], 1e-10)).collect();
        if inside.len() >= k {
            best = Some((d, inside));
        }
    }
    let (d, mut inside) = best?;
    inside.sort_by(|&a, &b| (points[a] - d.center).norm().total_cmp(&(points[b] - d.center).norm()).then(a.cmp(&b)));
    inside.truncate(k);
    inside.sort_unstable();
    let disk = disk_of(points, &inside);
    Some(Cluster { indices: inside, disk })
}

/// Split roots into `cluster_indices` and the rest, ordered so that `r1 <= r2`.
pub fn split_half(roots: &[Complex64], cluster_indices: &[usize]) -> Result<ClusterSplit> {
    let n = roots.len();
    if n % 2 == 1 {
        return Err(Error::OddDegree(n));
    }
    if cluster_indices.len() != n / 2 {
        return Err(Error::WrongClusterSize { expected: n / 2, got: cluster_indices.len() });
    }
    let mut mark = vec![false; n];
    for &i in cluster_indices {
        if i >= n || mark[i] {
            return Err(Error::BadIndex(i));
        }
        mark[i] = true;
    }
    let mut first: Vec<usize> = cluster_indices.to_vec();
    first.sort_unstable();
    let mut second: Vec<usize> = (0..n).filter(|&i| !mark[i]).collect();
    let mut disk1 = disk_of(roots, &first);
    let mut disk2 = disk_of(roots, &second);
    if disk2.radius < disk1.radius {
        std::mem::swap(&mut disk1, &mut disk2);
        std::mem::swap(&mut first, &mut second);
    }
    Ok(ClusterSplit { cluster_indices: first, complement_indices: second, disk1, disk2, d1: None, d2: None })
}

/// Fill in `d_i = |t - c_i|` and check `max(0, d_i - r_i) <= |t - alpha| <= d_i + r_i`.
pub fn attach_covariant(split: &ClusterSplit, roots: &[Complex64], z: &UpperHalfPoint) -> Result<ClusterSplit> {
    let t = Complex64::new(z.t, 0.0);
    let d1 = (t - split.c1()).norm();
    let d2 = (t - split.c2()).norm();
    for (idx, d, r) in [(&split.cluster_indices, d1, split.r1()), (&split.complement_indices, d2, split.r2())] {
        for &i in idx {
            let value = (t - roots[i]).norm();
            let slack = 1e-9 * (d + r) + 1e-15 * (1.0 + z.t.abs());
            let (lower, upper) = ((d - r).max(0.0), d + r);
            if value < lower - slack || value > upper + slack {
                return Err(Error::TriangleViolation { index: i, lower, value, upper });
            }
        }
    }
    let mut out = split.clone();
    out.d1 = Some(d1);
    out.d2 = Some(d2);
    Ok(out)
}
