//! Real binary forms, their roots, and the substitution action of SL2(Z).

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::roots;

/// Minimum supported degree.
pub const MIN_DEGREE: usize = 3;
const CONJ_TOL: f64 = 1e-9;
const DROP_TOL: f64 = 1e-12;

/// Integer 2x2 matrix `[[a, b], [c, d]]` with determinant 1.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "RawMatrix", into = "RawMatrix")]
pub struct UnimodularMatrix {
    a: i64,
    b: i64,
    c: i64,
    d: i64,
}

#[derive(Clone, Copy, Serialize, Deserialize)]
struct RawMatrix {
    a: i64,
    b: i64,
    c: i64,
    d: i64,
}

impl TryFrom<RawMatrix> for UnimodularMatrix {
    type Error = Error;
    fn try_from(m: RawMatrix) -> Result<Self> {
        UnimodularMatrix::new(m.a, m.b, m.c, m.d)
    }
}

impl From<UnimodularMatrix> for RawMatrix {
    fn from(m: UnimodularMatrix) -> Self {
        RawMatrix { a: m.a, b: m.b, c: m.c, d: m.d }
    }
}

impl UnimodularMatrix {
    pub fn new(a: i64, b: i64, c: i64, d: i64) -> Result<Self> {
        let det = a as i128 * d as i128 - b as i128 * c as i128;
        if det != 1 {
            return Err(Error::DeterminantNotOne(det.clamp(i64::MIN as i128, i64::MAX as i128) as i64));
        }
        Ok(UnimodularMatrix { a, b, c, d })
    }

    pub const IDENTITY: UnimodularMatrix = UnimodularMatrix { a: 1, b: 0, c: 0, d: 1 };

    /// `X -> X + mZ`; moves every root by `-m`.
    pub fn translation(m: i64) -> Self {
        UnimodularMatrix { a: 1, b: m, c: 0, d: 1 }
    }

    /// `F(X, Z) -> F(Z, -X)`; sends a root `alpha` to `-1/alpha`.
    pub fn inversion() -> Self {
        UnimodularMatrix { a: 0, b: 1, c: -1, d: 0 }
    }

    /// Translation by `m` followed by inversion: roots go to `-1/(alpha - m)`.
    pub fn shift_invert(m: i64) -> Self {
        Self::translation(m).mul(&Self::inversion())
    }

    pub fn entries(&self) -> [i64; 4] {
        [self.a, self.b, self.c, self.d]
    }

    pub fn mul(&self, o: &Self) -> Self {
        UnimodularMatrix {
            a: self.a * o.a + self.b * o.c,
            b: self.a * o.b + self.b * o.d,
            c: self.c * o.a + self.d * o.c,
            d: self.c * o.b + self.d * o.d,
        }
    }

    pub fn inverse(&self) -> Self {
        UnimodularMatrix { a: self.d, b: -self.b, c: -self.c, d: self.a }
    }

    /// Fractional linear map `z -> (a z + b) / (c z + d)`.
    pub fn moebius(&self, z: Complex64) -> Complex64 {
        (z * self.a as f64 + self.b as f64) / (z * self.c as f64 + self.d as f64)
    }
}

/// A real binary form `a0 * prod (X - alpha_i Z)` of degree at least 3.
///
/// Roots are canonical and exactly closed under conjugation. Coefficients are
/// kept alongside when the form came from coefficients, and are then updated
/// by exact substitution under the action. The action can move a root to
/// infinity; such roots are counted in `infinite` and the form is then
/// `leading * Z^infinite * prod (X - alpha Z)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "FormSpec", into = "FormSpec")]
pub struct BinaryForm {
    leading: f64,
    roots: Vec<Complex64>,
    infinite: usize,
    coeffs: Option<Vec<f64>>,
}

/// JSON shape of a form: `{"coeffs": [...]}` or `{"roots": [[re, im], ...], "leading": a0}`.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FormSpec {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub coeffs: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub roots: Option<Vec<[f64; 2]>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub leading: Option<f64>,
    /// Roots at infinity; `leading` is then the coefficient of `X^(n-m) Z^m`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub infinite: Option<usize>,
}

impl TryFrom<FormSpec> for BinaryForm {
    type Error = Error;
    fn try_from(spec: FormSpec) -> Result<Self> {
        let infinite = spec.infinite.unwrap_or(0);
        match (spec.coeffs, spec.roots) {
            (Some(_), None) if infinite > 0 => {
                Err(Error::MalformedInput("roots at infinity need an explicit root list".into()))
            }
            (Some(c), None) => {
                if spec.leading.is_some_and(|l| l != c.first().copied().unwrap_or(0.0)) {
                    return Err(Error::MalformedInput("leading disagrees with coeffs[0]".into()));
                }
                BinaryForm::from_coeffs(&c)
            }
            (coeffs, Some(r)) => {
                let leading = match (spec.leading, &coeffs) {
                    (Some(l), _) => l,
                    (None, Some(c)) if !c.is_empty() => c[0],
                    _ => return Err(Error::MalformedInput("roots need a leading coefficient".into())),
                };
                let roots = r.iter().map(|p| Complex64::new(p[0], p[1])).collect();
                let mut form = BinaryForm::projective(leading, roots, infinite)?;
                if let Some(c) = coeffs {
                    form = form.with_coeffs(c)?;
                }
                Ok(form)
            }
            (None, None) => Err(Error::MalformedInput("expected \"coeffs\" or \"roots\"".into())),
        }
    }
}

impl From<BinaryForm> for FormSpec {
    fn from(f: BinaryForm) -> Self {
        FormSpec {
            coeffs: f.coeffs,
            roots: Some(f.roots.iter().map(|z| [z.re, z.im]).collect()),
            leading: Some(f.leading),
            infinite: (f.infinite > 0).then_some(f.infinite),
        }
    }
}

fn check_degree(n: usize) -> Result<()> {
    if n < MIN_DEGREE {
        Err(Error::DegreeTooLow(n))
    } else {
        Ok(())
    }
}

impl BinaryForm {
    /// Form with the given coefficients, highest power of X first.
    pub fn from_coeffs(coeffs: &[f64]) -> Result<Self> {
        Self::from_coeffs_with(coeffs, roots::MAX_ITER)
    }

    /// As [`BinaryForm::from_coeffs`] with an explicit root iteration limit.
    pub fn from_coeffs_with(coeffs: &[f64], max_iter: usize) -> Result<Self> {
        if coeffs.is_empty() || coeffs[0] == 0.0 {
            return Err(Error::ZeroLeadingCoefficient);
        }
        check_degree(coeffs.len() - 1)?;
        let mut r = roots::aberth(coeffs, max_iter)?;
        roots::symmetrize(&mut r);
        Ok(BinaryForm { leading: coeffs[0], roots: r, infinite: 0, coeffs: Some(coeffs.to_vec()) })
    }

    /// Form `leading * prod (X - alpha Z)`; roots must be conjugation-closed
    /// within 1e-9 and are then made exactly closed.
    pub fn from_roots(leading: f64, roots: Vec<Complex64>) -> Result<Self> {
        Self::projective(leading, roots, 0)
    }

    /// Form `leading * Z^infinite * prod (X - alpha Z)`.
    pub fn projective(leading: f64, mut roots: Vec<Complex64>, infinite: usize) -> Result<Self> {
        if leading == 0.0 {
            return Err(Error::ZeroLeadingCoefficient);
        }
        check_degree(roots.len() + infinite)?;
        if !leading.is_finite() || roots.iter().any(|z| !z.is_finite()) {
            return Err(Error::MalformedInput("non-finite value".into()));
        }
        let dev = roots::symmetrize(&mut roots);
        if dev > CONJ_TOL {
            return Err(Error::ConjugacyViolation(dev));
        }
        Ok(BinaryForm { leading, roots, infinite, coeffs: None })
    }

    /// Attach exact coefficients to a root-defined form after checking they agree.
    pub fn with_coeffs(mut self, coeffs: Vec<f64>) -> Result<Self> {
        if coeffs.len() != self.degree() + 1 {
            return Err(Error::MalformedInput("coefficient count does not match root count".into()));
        }
        let expanded = self.expand()?;
        let scale = coeffs.iter().fold(0.0f64, |m, c| m.max(c.abs()));
        let gap = expanded.iter().zip(&coeffs).fold(0.0f64, |m, (a, b)| m.max((a - b).abs()));
        if gap > 1e-6 * scale {
            return Err(Error::MalformedInput("roots and coeffs describe different forms".into()));
        }
        self.leading = coeffs[self.infinite];
        self.coeffs = Some(coeffs);
        Ok(self)
    }

    pub fn degree(&self) -> usize {
        self.roots.len() + self.infinite
    }

    /// Number of roots at infinity.
    pub fn infinite_roots(&self) -> usize {
        self.infinite
    }

    /// Coefficient of `X^(n-m) Z^m`, `m` the number of roots at infinity.
    pub fn leading(&self) -> f64 {
        self.leading
    }

    pub fn roots(&self) -> &[Complex64] {
        &self.roots
    }

    /// Coefficients carried exactly from the input, if any.
    pub fn stored_coeffs(&self) -> Option<&[f64]> {
        self.coeffs.as_deref()
    }

    /// Stored coefficients, or the expansion of the roots.
    pub fn coeffs(&self) -> Result<Vec<f64>> {
        match &self.coeffs {
            Some(c) => Ok(c.clone()),
            None => self.expand(),
        }
    }

    /// Coefficients of `a0 * Z^m * prod (X - alpha Z)` computed from the roots.
    pub fn expand(&self) -> Result<Vec<f64>> {
        let mut c = vec![0.0; self.infinite];
        c.extend(expand_roots(self.leading, &self.roots)?);
        Ok(c)
    }

    /// The form `(Fg)(X, Z) = F(aX + bZ, cX + dZ)`.
    ///
    /// A root at `a/c` goes to infinity and roots at infinity come back as `-d/c`.
    pub fn act(&self, g: &UnimodularMatrix) -> Result<Self> {
        let [a, b, c, d] = g.entries().map(|v| v as f64);
        let mut new_roots = Vec::with_capacity(self.roots.len() + self.infinite);
        let mut infinite = 0;
        let mut lead = Complex64::new(self.leading, 0.0);
        // Z^m becomes (cX + dZ)^m
        if c == 0.0 {
            infinite += self.infinite;
            lead *= d.powi(self.infinite as i32);
        } else {
            lead *= c.powi(self.infinite as i32);
            new_roots.extend(std::iter::repeat_n(Complex64::new(-d / c, 0.0), self.infinite));
        }
        // (X - alpha Z) becomes (a - c alpha) X - (d alpha - b) Z
        for &alpha in &self.roots {
            let den = Complex64::new(a, 0.0) - alpha * c;
            let num = alpha * d - b;
            if c != 0.0 && (alpha - a / c).norm() <= DROP_TOL * (1.0 + alpha.norm()) {
                infinite += 1;
                lead *= -num;
            } else {
                lead *= den;
                new_roots.push(num / den);
            }
        }
        roots::symmetrize(&mut new_roots);
        let coeffs = self.coeffs.as_ref().map(|cs| act_coeffs(cs, g));
        let leading = match &coeffs {
            Some(cs) => cs[infinite],
            None => lead.re,
        };
        if leading == 0.0 {
            return Err(Error::DegreeDrop);
        }
        Ok(BinaryForm { leading, roots: new_roots, infinite, coeffs })
    }
}

/// Free-function form of [`BinaryForm::from_coeffs`].
pub fn from_coeffs(coeffs: &[f64]) -> Result<BinaryForm> {
    BinaryForm::from_coeffs(coeffs)
}

/// Free-function form of [`BinaryForm::act`].
pub fn act(form: &BinaryForm, g: &UnimodularMatrix) -> Result<BinaryForm> {
    form.act(g)
}

/// Free-function form of [`BinaryForm::expand`].
pub fn expand(form: &BinaryForm) -> Result<Vec<f64>> {
    form.expand()
}

/// Real coefficients of `leading * prod (X - alpha Z)`.
pub fn expand_roots(leading: f64, roots: &[Complex64]) -> Result<Vec<f64>> {
    let mut p = vec![Complex64::new(leading, 0.0)];
    for &alpha in roots {
        let mut next = vec![Complex64::new(0.0, 0.0); p.len() + 1];
        for (i, &c) in p.iter().enumerate() {
            next[i] += c;
            next[i + 1] -= c * alpha;
        }
        p = next;
    }
    let scale = p.iter().fold(0.0f64, |m, c| m.max(c.norm()));
    let worst_im = p.iter().fold(0.0f64, |m, c| m.max(c.im.abs()));
    if worst_im > 1e-8 * scale.max(f64::MIN_POSITIVE) {
        return Err(Error::ConjugacyViolation(worst_im / scale));
    }
    Ok(p.into_iter().map(|c| c.re).collect())
}

fn poly_mul(p: &[f64], q: &[f64]) -> Vec<f64> {
    let mut out = vec![0.0; p.len() + q.len() - 1];
    for (i, &x) in p.iter().enumerate() {
        for (j, &y) in q.iter().enumerate() {
            out[i + j] += x * y;
        }
    }
    out
}

/// Coefficients of `F(aX + bZ, cX + dZ)` by direct substitution; exact for
/// integer coefficients of moderate size.
pub fn act_coeffs(coeffs: &[f64], g: &UnimodularMatrix) -> Vec<f64> {
    let n = coeffs.len() - 1;
    let [a, b, c, d] = g.entries().map(|v| v as f64);
    let mut pow_x = vec![vec![1.0]];
    let mut pow_z = vec![vec![1.0]];
    for k in 0..n {
        pow_x.push(poly_mul(&pow_x[k], &[a, b]));
        pow_z.push(poly_mul(&pow_z[k], &[c, d]));
    }
    let mut out = vec![0.0; n + 1];
    for (i, &ci) in coeffs.iter().enumerate() {
        if ci == 0.0 {
            continue;
        }
        let term = poly_mul(&pow_x[n - i], &pow_z[i]);
        for (o, t) in out.iter_mut().zip(term) {
            *o += ci * t;
        }
    }
    out
}
