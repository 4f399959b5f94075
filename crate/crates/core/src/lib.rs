//! Reduction of real binary forms under SL2(Z).
//!
//! Forms are held by their roots. The covariant point of a form lives in the
//! upper half plane; reducing the form moves that point into the standard
//! fundamental domain. Tight root clusters are handled by a shift-and-invert
//! step that is certified by the inequalities in [`bounds`].

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod bounds;
pub mod covariant;
pub mod error;
pub mod forms;
pub mod geometry;
pub mod reduction;
pub mod roots;
pub mod sweep;

pub use bounds::{thresholds, BoundReport, EpsilonThresholds};
pub use covariant::{covariant_point, form_covariant, solve_covariant, CovariantSolution, SolverOptions, UpperHalfPoint};
pub use error::{Error, Result};
pub use forms::{BinaryForm, FormSpec, UnimodularMatrix};
pub use geometry::{ClusterSplit, Disk};
pub use num_complex::Complex64;
pub use reduction::{
    classic_reduce, classify, cluster_reduce, fundamental_status, CaseTag, Classification, ReductionTrace,
};
