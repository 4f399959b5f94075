use thiserror::Error;

/// Errors raised by the library.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("leading coefficient is zero")]
    ZeroLeadingCoefficient,
    #[error("degree {0} is below the supported minimum of 3")]
    DegreeTooLow(usize),
    #[error("root iteration did not converge (worst scaled residual {residual:e})")]
    NonConvergentRoots { residual: f64 },
    #[error("matrix determinant is {0}, expected 1")]
    DeterminantNotOne(i64),
    #[error("a root is sent to infinity by the substitution")]
    DegreeDrop,
    #[error("roots are not closed under conjugation (residue {0:e})")]
    ConjugacyViolation(f64),
    #[error("u must be positive, got {0}")]
    NonPositiveU(f64),
    #[error("a real point carries {multiplicity} of {degree} roots; covariant point degenerates")]
    DegenerateCluster { multiplicity: usize, degree: usize },
    #[error("covariant solver did not converge (residual {residual:e})")]
    NoConvergence { residual: f64 },
    #[error("point is not the covariant point of these roots (residual {residual:e})")]
    BadCovariant { residual: f64 },
    #[error("empty point set")]
    EmptyInput,
    #[error("degree {0} is odd; a half split needs even degree")]
    OddDegree(usize),
    #[error("cluster has {got} roots, expected {expected}")]
    WrongClusterSize { expected: usize, got: usize },
    #[error("index {0} is out of range or repeated")]
    BadIndex(usize),
    #[error("triangle inequality fails for root {index}: {lower:e} <= {value:e} <= {upper:e}")]
    TriangleViolation { index: usize, lower: f64, value: f64, upper: f64 },
    #[error("cluster holds {k} of {n} roots; not a majority")]
    NotMajority { k: usize, n: usize },
    #[error("split has no covariant distances attached")]
    MissingDistances,
    #[error("neither d1 > r1 nor d2 > r2")]
    NotApplicable,
    #[error("hypotheses not met: {0}")]
    HypothesesNotMet(String),
    #[error("no reduced form within {0} steps")]
    StepLimit(usize),
    #[error("u grew by {factor} in case {case}, required {required}")]
    GrowthAssertionFailed { case: String, factor: f64, required: f64 },
    #[error("bound {name} violated: {lhs:e} vs {rhs:e}")]
    BoundViolated { name: String, lhs: f64, rhs: f64 },
    #[error("recomputed covariant ({recomputed_t}, {recomputed_u}) drifts from the analytic update ({analytic_t}, {analytic_u})")]
    CovariantDrift { analytic_t: f64, analytic_u: f64, recomputed_t: f64, recomputed_u: f64 },
    #[error("malformed input: {0}")]
    MalformedInput(String),
}

pub type Result<T> = std::result::Result<T, Error>;
