//! Discrete operators and global assembly.
//!
//! Two integration schemes share the same maxent basis: nodal integration
//! over median-dual cells with a projection-based stabilization (NIVED), and
//! standard Gauss quadrature on the background triangles (MEM).

mod dirichlet;
mod global;
mod mem;
mod operators;
mod quadrature;
mod sparse;

pub use dirichlet::{apply_dirichlet, Constraints, ReducedSystem};
pub use global::{
    assemble_blocks, assemble_nived_mass, assemble_nived_stiffness, gauss_legendre_unit, nived_body_force, traction_force,
    TractionRule,
};
pub use mem::{assemble_mem_mass, assemble_mem_stiffness, mem_body_force, mem_triangle_stiffness};
pub use operators::{
    cell_body_force, cell_mass, cell_stiffness, compute_all_cell_operators, compute_cell_operators,
    evaluate_cell_operators, CellOperators, StiffnessParts,
};
pub use quadrature::GaussRule;
pub use sparse::{BlockAssembler, CsrMatrix};

use thiserror::Error;

use crate::geometry::GeometryError;
use crate::maxent::MaxentError;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum AssemblyError {
    #[error(transparent)]
    Basis(#[from] MaxentError),
    #[error(transparent)]
    Geometry(#[from] GeometryError),
    #[error("index {index} out of range for length {len}")]
    IndexOutOfRange { index: usize, len: usize },
    #[error("dof {dof} constrained to both {existing} and {requested}")]
    ConflictingConstraint { dof: usize, existing: f64, requested: f64 },
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("internal assembly error: {0}")]
    Internal(String),
}
