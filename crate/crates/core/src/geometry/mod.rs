//! Background triangulations, nodal integration cells and boundary segments.

mod cells;
mod generate;
mod mesh;

pub use cells::{build_neumann_segments, build_nodal_cells, CellEdge, CellPartition, HalfEdge, NeumannSegment, NodalCell};
pub use generate::{distort_mesh, generate_structured_mesh, generate_unstructured_mesh, DomainSpec};
pub use mesh::{BackgroundMesh, BoundaryEdge};

use nalgebra::Point2;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GeometryError {
    #[error("mesh parse error at line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("invalid mesh: {0}")]
    InvalidMesh(String),
    #[error("non-manifold node {node}: {reason}")]
    NonManifold { node: usize, reason: String },
    #[error("unknown boundary tag `{0}`")]
    UnknownTag(String),
    #[error("invalid domain specification: {0}")]
    InvalidDomain(String),
    #[error("mesh distortion produced inverted triangles after {attempts} attempts")]
    Distortion { attempts: usize },
    #[error("cannot read {path}: {message}")]
    Io { path: String, message: String },
}

/// Midpoint computed symmetrically, so `midpoint(a, b) == midpoint(b, a)`
/// bit for bit.
pub fn midpoint(a: &Point2<f64>, b: &Point2<f64>) -> Point2<f64> {
    Point2::from((a.coords + b.coords) * 0.5)
}

/// Signed area of the triangle `abc`, positive when counterclockwise.
pub fn signed_area(a: &Point2<f64>, b: &Point2<f64>, c: &Point2<f64>) -> f64 {
    0.5 * ((b.x - a.x) * (c.y - a.y) - (c.x - a.x) * (b.y - a.y))
}

pub(crate) fn edge_key(a: usize, b: usize) -> (usize, usize) {
    if a < b {
        (a, b)
    } else {
        (b, a)
    }
}
