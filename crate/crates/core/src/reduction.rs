//! Reduction loops: the classic translate/invert loop and the cluster-aware
//! variant that first moves a tight root cluster next to the origin.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::bounds::thresholds;
use crate::covariant::{form_covariant, SolverOptions, UpperHalfPoint};
use crate::error::{Error, Result};
use crate::forms::{BinaryForm, UnimodularMatrix};
use crate::geometry::{attach_covariant, best_cluster_within, split_half, ClusterSplit, Disk};

pub const DEFAULT_MAX_STEPS: usize = 64;
pub const DOMAIN_TOL: f64 = 1e-9;
const DRIFT_TOL: f64 = 1e-7;
const REAL_TOL: f64 = 1e-9;
const BOUNDARY_TOL: f64 = 1e-9;

/// Which side condition of the fundamental domain fails, and by how much.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum DomainViolation {
    Modulus { by: f64 },
    RealPart { by: f64 },
    Both { modulus_by: f64, real_part_by: f64 },
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct FundamentalDomainStatus {
    pub in_domain: bool,
    pub violation: Option<DomainViolation>,
}

pub fn fundamental_status(z: &UpperHalfPoint) -> FundamentalDomainStatus {
    let modulus_by = (1.0 - z.abs()).max(0.0);
    let real_part_by = (z.t.abs() - 0.5).max(0.0);
    let bad_mod = modulus_by > DOMAIN_TOL;
    let bad_re = real_part_by > DOMAIN_TOL;
    let violation = match (bad_mod, bad_re) {
        (false, false) => None,
        (true, false) => Some(DomainViolation::Modulus { by: modulus_by }),
        (false, true) => Some(DomainViolation::RealPart { by: real_part_by }),
        (true, true) => Some(DomainViolation::Both { modulus_by, real_part_by }),
    };
    FundamentalDomainStatus { in_domain: violation.is_none(), violation }
}

/// Branch of the cluster decision tree.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum CaseTag {
    Majority,
    AllTinyCluster,
    FarSmallRatioSmall,
    FarSmallRatioLarge,
    FarLargeRatioSmall,
    /// Far, large second disk, ratio not small: no certified step.
    FarLargeRatioLarge,
    CloseMajorityRefined,
    CloseGenericCenters,
    CloseConjugateEqual,
    CloseRealProductSmall,
    CloseRealProductLarge,
    NoCluster,
}

impl CaseTag {
    pub const ALL: [CaseTag; 12] = [
        CaseTag::Majority,
        CaseTag::AllTinyCluster,
        CaseTag::FarSmallRatioSmall,
        CaseTag::FarSmallRatioLarge,
        CaseTag::FarLargeRatioSmall,
        CaseTag::FarLargeRatioLarge,
        CaseTag::CloseMajorityRefined,
        CaseTag::CloseGenericCenters,
        CaseTag::CloseConjugateEqual,
        CaseTag::CloseRealProductSmall,
        CaseTag::CloseRealProductLarge,
        CaseTag::NoCluster,
    ];

    pub fn label(&self) -> &'static str {
        match self {
            CaseTag::Majority => "majority",
            CaseTag::AllTinyCluster => "3a",
            CaseTag::FarSmallRatioSmall => "3b-i",
            CaseTag::FarSmallRatioLarge => "3b-ii",
            CaseTag::FarLargeRatioSmall => "3c",
            CaseTag::FarLargeRatioLarge => "3c-ratio-large",
            CaseTag::CloseMajorityRefined => "3d-i",
            CaseTag::CloseGenericCenters => "3d-ii",
            CaseTag::CloseConjugateEqual => "3d-iii",
            CaseTag::CloseRealProductSmall => "3d-iv",
            CaseTag::CloseRealProductLarge => "3d-v",
            CaseTag::NoCluster => "none",
        }
    }

    /// Required growth of `u` when this case moves the cluster, if it ever does.
    pub fn required_growth(&self) -> Option<f64> {
        match self {
            CaseTag::Majority | CaseTag::CloseMajorityRefined | CaseTag::CloseConjugateEqual => Some(2.0),
            CaseTag::AllTinyCluster
            | CaseTag::FarSmallRatioSmall
            | CaseTag::FarLargeRatioSmall
            | CaseTag::CloseRealProductSmall
            | CaseTag::CloseRealProductLarge => Some(8.0 / 7.0),
            _ => None,
        }
    }
}

/// Quantities the decision tree looked at.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct DecisionQuantities {
    pub n: usize,
    pub eps: f64,
    pub u: f64,
    pub k: Option<usize>,
    pub r1: Option<f64>,
    pub r2: Option<f64>,
    pub center_distance: Option<f64>,
    pub ratio: Option<f64>,
    pub product: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Classification {
    pub tag: CaseTag,
    pub quantities: DecisionQuantities,
    /// Disk of the cluster found at radius eps (or 2 eps for the refined case).
    pub cluster: Option<Disk>,
    pub split: Option<ClusterSplit>,
    /// Centre to move next to the origin when the step is certified.
    pub target: Option<Complex64>,
    /// Certified bound on `|t - target|`.
    pub distance_bound: Option<f64>,
    /// A decision quantity sat within rounding of a branch boundary.
    pub ambiguous: bool,
    pub warnings: Vec<String>,
}

impl Classification {
    /// True when a cluster step is allowed.
    pub fn fires(&self) -> bool {
        self.target.is_some() && !self.ambiguous
    }
}

fn is_real(c: Complex64) -> bool {
    c.im.abs() <= REAL_TOL * (1.0 + c.norm())
}

fn near(a: f64, b: f64) -> bool {
    (a - b).abs() <= BOUNDARY_TOL * a.abs().max(b.abs())
}

/// Ratio `r1/r2` with `0/0 = 1`.
pub fn radius_ratio(r1: f64, r2: f64) -> f64 {
    if r2 == 0.0 {
        if r1 == 0.0 {
            1.0
        } else {
            f64::INFINITY
        }
    } else {
        r1 / r2
    }
}

/// Run the cluster decision tree on the roots of `form` at covariant point `z`.
/// Roots at infinity are outside every disk, so such forms never fire.
pub fn classify(form: &BinaryForm, z: &UpperHalfPoint, eps: f64) -> Classification {
    if form.infinite_roots() > 0 {
        let n = form.degree();
        return Classification {
            tag: CaseTag::NoCluster,
            quantities: DecisionQuantities { n, eps, u: z.u, ..Default::default() },
            cluster: None,
            split: None,
            target: None,
            distance_bound: None,
            ambiguous: false,
            warnings: vec![format!("{} root(s) at infinity, classic step used", form.infinite_roots())],
        };
    }
    classify_roots(form.roots(), z, eps)
}

pub fn classify_roots(roots: &[Complex64], z: &UpperHalfPoint, eps: f64) -> Classification {
    let n = roots.len();
    let nf = n as f64;
    let mut warnings = Vec::new();
    let over = thresholds(n).exceeded(eps);
    if !over.is_empty() {
        warnings.push(format!("eps {eps} exceeds thresholds: {}", over.join(", ")));
    }
    let mut out = Classification {
        tag: CaseTag::NoCluster,
        quantities: DecisionQuantities { n, eps, u: z.u, ..Default::default() },
        cluster: None,
        split: None,
        target: None,
        distance_bound: None,
        ambiguous: false,
        warnings,
    };
    let Some(cluster) = best_cluster_within(roots, eps, n.div_ceil(2)) else {
        return out;
    };
    let k = cluster.k();
    out.quantities.k = Some(k);
    out.cluster = Some(cluster.disk);
    if 2 * k > n {
        out.tag = CaseTag::Majority;
        out.target = Some(cluster.disk.center);
        out.distance_bound = Some((2.0 * nf + 3.0) * cluster.disk.radius);
        return out;
    }

    let split = match split_half(roots, &cluster.indices) {
        Ok(s) => attach_covariant(&s, roots, z).unwrap_or(s),
        Err(e) => {
            out.warnings.push(format!("half split failed: {e}"));
            return out;
        }
    };
    let (r1, r2, c1, c2) = (split.r1(), split.r2(), split.c1(), split.c2());
    let cd = split.center_distance();
    let ratio = radius_ratio(r1, r2);
    let product = r1 * r2;
    let sq = eps.sqrt();
    let ratio_cap = 10.0 * nf * eps / 3.0;
    let half_bound = 0.5 / nf.sqrt() + eps;
    out.quantities.r1 = Some(r1);
    out.quantities.r2 = Some(r2);
    out.quantities.center_distance = Some(cd);
    out.quantities.ratio = Some(ratio);
    out.quantities.product = Some(product);
    out.split = Some(split);

    let mut amb = near(r2, sq);
    if r2 <= sq {
        let reach = r1 + r2 + sq + eps;
        amb |= near(cd, reach);
        if cd <= reach {
            out.tag = CaseTag::AllTinyCluster;
            out.target = Some(c1);
            out.distance_bound = Some(5.0 * (2.0 * nf + 3.0) * sq);
        } else {
            amb |= near(ratio, ratio_cap);
            if ratio <= ratio_cap {
                out.tag = CaseTag::FarSmallRatioSmall;
                out.target = Some(c1);
                out.distance_bound = Some(half_bound);
            } else {
                out.tag = CaseTag::FarSmallRatioLarge;
            }
        }
    } else {
        amb |= near(cd, 2.0 * r2);
        if cd >= 2.0 * r2 {
            amb |= near(ratio, ratio_cap);
            if ratio < ratio_cap {
                out.tag = CaseTag::FarLargeRatioSmall;
                out.target = Some(c1);
                out.distance_bound = Some(half_bound);
            } else {
                out.tag = CaseTag::FarLargeRatioLarge;
            }
        } else if let Some(wide) = best_cluster_within(roots, 2.0 * eps, n / 2 + 1) {
            out.tag = CaseTag::CloseMajorityRefined;
            out.quantities.k = Some(wide.k());
            out.cluster = Some(wide.disk);
            out.target = Some(wide.disk.center);
            out.distance_bound = Some(2.0 * (2.0 * nf + 3.0) * eps);
        } else if is_real(c1) && is_real(c2) {
            let cap = 3.0 / (64.0 * nf * nf);
            amb |= near(product, cap);
            if product < cap {
                out.tag = CaseTag::CloseRealProductSmall;
                out.target = Some(c1);
                out.distance_bound = Some(half_bound);
            } else {
                out.tag = CaseTag::CloseRealProductLarge;
                amb |= near(z.u, eps);
                if z.u <= eps {
                    out.target = Some(c1);
                    out.distance_bound = Some(half_bound);
                }
            }
        } else if (c1 - c2.conj()).norm() <= REAL_TOL * (1.0 + c1.norm()) && (r1 - r2).abs() <= REAL_TOL * (1.0 + r1) {
            out.tag = CaseTag::CloseConjugateEqual;
            out.target = Some(Complex64::new(c1.re, 0.0));
            out.distance_bound = Some(2.0 * (2.0 * nf + 3.0) * eps);
        } else {
            out.tag = CaseTag::CloseGenericCenters;
        }
    }
    if amb && out.target.is_some() {
        out.ambiguous = true;
        out.warnings.push(format!("{}: decision quantity on a branch boundary, classic step used", out.tag.label()));
    }
    out
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum StepKind {
    Translate { m: i64 },
    Invert,
    ClusterTranslate { m: i64, case: CaseTag },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ReductionStep {
    pub kind: StepKind,
    pub matrix: UnimodularMatrix,
    pub z_before: UpperHalfPoint,
    pub z_after: UpperHalfPoint,
    pub u_growth: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ReductionTrace {
    pub steps: Vec<ReductionStep>,
    pub total: UnimodularMatrix,
    pub initial_z: UpperHalfPoint,
    pub final_z: UpperHalfPoint,
    /// Loop passes; each is one cluster step or one translate/invert round.
    pub iterations: usize,
    pub warnings: Vec<String>,
}

/// Options shared by both loops.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ReduceOptions {
    pub max_steps: usize,
    pub solver: SolverOptions,
}

impl Default for ReduceOptions {
    fn default() -> Self {
        ReduceOptions { max_steps: DEFAULT_MAX_STEPS, solver: SolverOptions::default() }
    }
}

struct State {
    form: BinaryForm,
    z: UpperHalfPoint,
    trace: ReductionTrace,
    solver: SolverOptions,
}

impl State {
    fn new(form: &BinaryForm, solver: SolverOptions) -> Result<Self> {
        let z = form_covariant(form, &solver)?;
        let trace = ReductionTrace {
            steps: Vec::new(),
            total: UnimodularMatrix::IDENTITY,
            initial_z: z,
            final_z: z,
            iterations: 0,
            warnings: Vec::new(),
        };
        Ok(State { form: form.clone(), z, trace, solver })
    }

    /// Act by `g`, recompute the covariant and compare with `g^-1 z`.
    fn apply(&mut self, kind: StepKind, g: UnimodularMatrix) -> Result<()> {
        let analytic = self.z.moebius(&g.inverse());
        let form = self.form.act(&g)?;
        let z = match form_covariant(&form, &self.solver) {
            Ok(z) => z,
            Err(Error::NoConvergence { residual }) => {
                let wide = SolverOptions { tol: self.solver.tol * 1e3, ..self.solver };
                self.trace.warnings.push(format!("solver residual {residual:e}, retried with tol {:e}", wide.tol));
                form_covariant(&form, &wide)?
            }
            Err(e) => return Err(e),
        };
        let scale = 1.0 + analytic.abs();
        if (z.t - analytic.t).abs() > DRIFT_TOL * scale || (z.u - analytic.u).abs() > DRIFT_TOL * scale {
            return Err(Error::CovariantDrift {
                analytic_t: analytic.t,
                analytic_u: analytic.u,
                recomputed_t: z.t,
                recomputed_u: z.u,
            });
        }
        self.trace.steps.push(ReductionStep { kind, matrix: g, z_before: self.z, z_after: z, u_growth: z.u / self.z.u });
        self.trace.total = self.trace.total.mul(&g);
        self.form = form;
        self.z = z;
        Ok(())
    }

    fn classic_round(&mut self) -> Result<()> {
        if self.z.t.abs() > 0.5 + DOMAIN_TOL {
            let m = (self.z.t + 0.5).floor() as i64;
            self.apply(StepKind::Translate { m }, UnimodularMatrix::translation(m))?;
        }
        if self.z.abs() < 1.0 - DOMAIN_TOL {
            self.apply(StepKind::Invert, UnimodularMatrix::inversion())?;
        }
        Ok(())
    }

    fn finish(mut self) -> (BinaryForm, ReductionTrace) {
        self.trace.final_z = self.z;
        (self.form, self.trace)
    }
}

/// The classic loop: translate by the nearest integer, invert when inside the unit circle.
pub fn classic_reduce(form: &BinaryForm, max_steps: usize) -> Result<(BinaryForm, ReductionTrace)> {
    classic_reduce_with(form, &ReduceOptions { max_steps, ..Default::default() })
}

pub fn classic_reduce_with(form: &BinaryForm, opts: &ReduceOptions) -> Result<(BinaryForm, ReductionTrace)> {
    let mut st = State::new(form, opts.solver)?;
    while !fundamental_status(&st.z).in_domain {
        if st.trace.iterations == opts.max_steps {
            return Err(Error::StepLimit(opts.max_steps));
        }
        st.classic_round()?;
        st.trace.iterations += 1;
    }
    Ok(st.finish())
}

/// The cluster-aware loop. Certified cluster cases shift the cluster centre to
/// the nearest integer and invert in one step; everything else is a classic round.
pub fn cluster_reduce(form: &BinaryForm, eps: f64, max_steps: usize) -> Result<(BinaryForm, ReductionTrace)> {
    cluster_reduce_with(form, eps, &ReduceOptions { max_steps, ..Default::default() })
}

pub fn cluster_reduce_with(form: &BinaryForm, eps: f64, opts: &ReduceOptions) -> Result<(BinaryForm, ReductionTrace)> {
    if !(eps > 0.0) {
        return Err(Error::MalformedInput(format!("eps must be positive, got {eps}")));
    }
    let mut st = State::new(form, opts.solver)?;
    while !fundamental_status(&st.z).in_domain {
        if st.trace.iterations == opts.max_steps {
            return Err(Error::StepLimit(opts.max_steps));
        }
        let class = classify(&st.form, &st.z, eps);
        for w in &class.warnings {
            if !st.trace.warnings.contains(w) {
                st.trace.warnings.push(w.clone());
            }
        }
        match (class.fires(), class.target, class.tag.required_growth()) {
            (true, Some(c), Some(required)) => {
                if let Some(bound) = class.distance_bound {
                    let dist = (Complex64::new(st.z.t, 0.0) - c).norm();
                    if !(dist <= bound * (1.0 + 1e-9)) {
                        return Err(Error::BoundViolated {
                            name: format!("{} distance to cluster centre", class.tag.label()),
                            lhs: dist,
                            rhs: bound,
                        });
                    }
                }
                let m = (c.re + 0.5).floor() as i64;
                let u0 = st.z.u;
                st.apply(StepKind::ClusterTranslate { m, case: class.tag }, UnimodularMatrix::shift_invert(m))?;
                let factor = st.z.u / u0;
                if !(factor >= required * (1.0 - 1e-9)) {
                    return Err(Error::GrowthAssertionFailed { case: class.tag.label().to_string(), factor, required });
                }
            }
            _ => st.classic_round()?,
        }
        st.trace.iterations += 1;
    }
    Ok(st.finish())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::covariant::covariant_point;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn form(roots: Vec<Complex64>) -> BinaryForm {
        BinaryForm::from_roots(1.0, roots).unwrap()
    }

    fn unity(n: usize, shift: f64) -> Vec<Complex64> {
        (0..n).map(|k| Complex64::from_polar(1.0, 2.0 * std::f64::consts::PI * k as f64 / n as f64) + shift).collect()
    }

    #[test]
    fn domain_examples() {
        assert!(fundamental_status(&UpperHalfPoint { t: 0.0, u: 1.0 }).in_domain);
        assert!(fundamental_status(&UpperHalfPoint { t: 0.5, u: 2.0 }).in_domain);
        let s = fundamental_status(&UpperHalfPoint { t: 0.7, u: 2.0 });
        assert!(!s.in_domain);
        match s.violation {
            Some(DomainViolation::RealPart { by }) => assert!((by - 0.2).abs() < 1e-15),
            v => panic!("{v:?}"),
        }
        let s = fundamental_status(&UpperHalfPoint { t: 0.0, u: 0.5 });
        assert!(matches!(s.violation, Some(DomainViolation::Modulus { .. })));
    }

    #[test]
    fn reduced_form_takes_no_steps() {
        let f = form(unity(4, 0.0));
        let (out, tr) = classic_reduce(&f, 64).unwrap();
        assert!(tr.steps.is_empty());
        assert_eq!(tr.total, UnimodularMatrix::IDENTITY);
        assert_eq!(out.roots(), f.roots());
    }

    #[test]
    fn shifted_unity_is_one_translation() {
        let f = form(unity(6, 7.0));
        let (_, tr) = classic_reduce(&f, 64).unwrap();
        assert_eq!(tr.steps.len(), 1);
        assert_eq!(tr.steps[0].kind, StepKind::Translate { m: 7 });
        assert_eq!(tr.total.entries(), [1, 7, 0, 1]);
        assert!(tr.final_z.t.abs() < 1e-12 && (tr.final_z.u - 1.0).abs() < 1e-12);
    }

    #[test]
    fn classic_reaches_domain_and_total_reproduces_output() {
        let f = BinaryForm::from_coeffs(&[3.0, -17.0, 5.0, 11.0, -2.0]).unwrap();
        let (out, tr) = classic_reduce(&f, 64).unwrap();
        assert!(fundamental_status(&tr.final_z).in_domain);
        let direct = f.act(&tr.total).unwrap().coeffs().unwrap();
        let got = out.coeffs().unwrap();
        let scale = got.iter().fold(0.0f64, |m, x| m.max(x.abs()));
        for (a, b) in direct.iter().zip(&got) {
            assert!((a - b).abs() <= 1e-8 * scale);
        }
    }

    #[test]
    fn majority_cluster_example() {
        let eps = thresholds(4).default_eps();
        let roots = vec![c(12.3 + 1e-8, 0.0), c(12.3 - 1e-8, 0.0), c(12.3, 1e-8), c(12.3, -1e-8)];
        let f = form(roots);
        let z = covariant_point(f.roots()).unwrap();
        assert_eq!(classify(&f, &z, eps).tag, CaseTag::Majority);
        let (_, tr) = cluster_reduce(&f, eps, 64).unwrap();
        match tr.steps[0].kind {
            StepKind::ClusterTranslate { m, case } => {
                assert_eq!(m, 12);
                assert_eq!(case, CaseTag::Majority);
            }
            k => panic!("{k:?}"),
        }
        assert!(tr.steps[0].u_growth > 2.0);
        assert!(fundamental_status(&tr.final_z).in_domain);
    }

    #[test]
    fn majority_within_half_eps() {
        let n = 5;
        let eps = thresholds(n).default_eps();
        let roots: Vec<Complex64> = unity(n, 0.0).iter().map(|w| 0.3 + w * (eps / 2.0)).collect();
        let mut roots = roots;
        crate::roots::symmetrize(&mut roots);
        let z = covariant_point(&roots).unwrap();
        assert_eq!(classify_roots(&roots, &z, eps).tag, CaseTag::Majority);
    }

    #[test]
    fn deep_domain_forms_agree() {
        let f = form(vec![c(0.0, 3.0), c(0.0, -3.0), c(0.1, 2.0), c(0.1, -2.0)]);
        let eps = thresholds(4).default_eps();
        let a = classic_reduce(&f, 64).unwrap();
        let b = cluster_reduce(&f, eps, 64).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn far_split_example() {
        let n = 4;
        let eps = thresholds(n).default_eps();
        // tiny pair near 5.2 and a wider real pair far away
        let roots = vec![c(5.2, 1e-9), c(5.2, -1e-9), c(-3.0, 0.0), c(-2.0, 0.0)];
        let z = covariant_point(&roots).unwrap();
        let cl = classify_roots(&roots, &z, eps);
        assert_eq!(cl.tag, CaseTag::FarLargeRatioSmall);
        let split = cl.split.as_ref().unwrap();
        assert!(split.d1.unwrap() <= 0.5 / 2.0 + eps);
        let (_, tr) = cluster_reduce(&form(roots), eps, 64).unwrap();
        assert_eq!(tr.steps[0].kind, StepKind::ClusterTranslate { m: 5, case: CaseTag::FarLargeRatioSmall });
        assert!(tr.steps[0].u_growth >= 8.0 / 7.0);
    }

    #[test]
    fn conjugate_tight_clusters_route_to_tiny_case() {
        let n = 4;
        let eps = thresholds(n).default_eps();
        let d = 1e-7;
        let roots = vec![c(0.2 - d, 0.001), c(0.2 + d, 0.001), c(0.2 - d, -0.001), c(0.2 + d, -0.001)];
        let z = covariant_point(&roots).unwrap();
        assert_eq!(classify_roots(&roots, &z, eps).tag, CaseTag::AllTinyCluster);
    }

    #[test]
    fn real_product_small_example() {
        let n = 4;
        let eps = thresholds(n).default_eps();
        let roots = vec![c(-1e-6, 0.0), c(1e-6, 0.0), c(-0.5, 0.0), c(1.0, 0.0)];
        let z = covariant_point(&roots).unwrap();
        let cl = classify_roots(&roots, &z, eps);
        assert_eq!(cl.tag, CaseTag::CloseRealProductSmall);
        assert!(cl.fires());
    }

    #[test]
    fn no_cluster_for_spread_roots() {
        let roots = unity(6, 0.0);
        let z = covariant_point(&roots).unwrap();
        let cl = classify_roots(&roots, &z, 1e-4);
        assert_eq!(cl.tag, CaseTag::NoCluster);
        assert!(!cl.fires());
    }

    #[test]
    fn warns_when_eps_too_large() {
        let roots = unity(4, 0.0);
        let z = covariant_point(&roots).unwrap();
        assert!(!classify_roots(&roots, &z, 0.1).warnings.is_empty());
    }

    #[test]
    fn step_limit() {
        let f = form(vec![c(1e-9, 0.0), c(-1e-9, 0.0), c(0.0, 1e-9), c(0.0, -1e-9)].into_iter().map(|r| r + 100.5).collect());
        assert_eq!(classic_reduce(&f, 1), Err(Error::StepLimit(1)));
    }

    #[test]
    fn trace_json_round_trip() {
        let f = form(unity(5, 3.0));
        let (_, tr) = classic_reduce(&f, 64).unwrap();
        let s = serde_json::to_string(&tr).unwrap();
        let back: ReductionTrace = serde_json::from_str(&s).unwrap();
        assert_eq!(back, tr);
    }

    #[test]
    fn ratio_conventions() {
        assert_eq!(radius_ratio(0.0, 0.0), 1.0);
        assert_eq!(radius_ratio(0.0, 2.0), 0.0);
        assert_eq!(radius_ratio(1.0, 4.0), 0.25);
    }

    #[test]
    fn rational_root_passes_through_infinity() {
        // X (13X^3 + 17X^2Z + 9XZ^2 - 8Z^3): the root 0 meets the inversion
        let coeffs = [13.0, 17.0, 9.0, -8.0, 0.0];
        let f = BinaryForm::from_coeffs(&coeffs).unwrap();
        for (out, trace) in [classic_reduce(&f, 64).unwrap(), cluster_reduce(&f, thresholds(4).default_eps(), 64).unwrap()] {
            assert!(fundamental_status(&trace.final_z).in_domain);
            assert_eq!(out.coeffs().unwrap(), crate::forms::act_coeffs(&coeffs, &trace.total));
            let z = form_covariant(&out, &SolverOptions::default()).unwrap();
            assert!((z.t - trace.final_z.t).abs() < 1e-9 && (z.u - trace.final_z.u).abs() < 1e-9);
        }
    }

    use proptest::prelude::*;

    fn integer_form() -> impl Strategy<Value = Vec<f64>> {
        (3usize..=6).prop_flat_map(|n| proptest::collection::vec(-9i32..=9, n + 1)).prop_map(|v| v.into_iter().map(f64::from).collect())
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(96))]

        #[test]
        fn reducers_keep_the_contract(coeffs in integer_form()) {
            let Ok(f) = BinaryForm::from_coeffs(&coeffs) else { return Ok(()) };
            // repeated roots come back from the root finder split by about sqrt(eps)
            let r = f.roots();
            if r.iter().enumerate().any(|(i, a)| r[..i].iter().any(|b| (a - b).norm() < 1e-6)) {
                return Ok(());
            }
            let eps = thresholds(f.degree()).default_eps();
            for (out, trace) in [classic_reduce(&f, 64).unwrap(), cluster_reduce(&f, eps, 64).unwrap()] {
                prop_assert!(fundamental_status(&trace.final_z).in_domain);
                prop_assert_eq!(out.coeffs().unwrap(), crate::forms::act_coeffs(&coeffs, &trace.total));
                let mut total = UnimodularMatrix::IDENTITY;
                for s in &trace.steps {
                    total = total.mul(&s.matrix);
                }
                prop_assert_eq!(total, trace.total);
            }
        }
    }
}
