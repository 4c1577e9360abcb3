//! Meshfree Galerkin solver for plane linear elasticity and viscoelasticity
//! with maximum-entropy basis functions.
//!
//! Stiffness, mass and force terms are integrated either at the nodes over
//! median-dual cells, with a projection-based stabilization, or by Gauss
//! quadrature on the background triangles. The [`benchmarks`] module holds
//! the verification problems and the convergence harness.

// Input checks are written as `!(x > 0.0)` so that NaN is rejected too.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod assembly;
pub mod benchmarks;
pub mod geometry;
pub mod materials;
pub mod maxent;
pub mod solvers;

pub use assembly::{CsrMatrix, GaussRule, TractionRule};
pub use benchmarks::{BenchmarkError, BenchmarkProblem, ConvergenceStudy, ErrorReport, MeshKind, Method, RunOptions};
pub use geometry::{BackgroundMesh, DomainSpec};
pub use materials::{ElasticModuli, MaxwellModel, PlaneCondition};
pub use maxent::{DualOptions, MaxentBasis, Prior, PriorKind};
pub use solvers::SolveConfig;

/// Crate version, echoed in every output header.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");
