use nalgebra::{DMatrix, DVector, Matrix3, Point2, Vector2, Vector3};
use rayon::prelude::*;

use super::AssemblyError;
use crate::geometry::{CellPartition, NodalCell};
use crate::maxent::{BasisEvaluation, MaxentBasis};

/// Per-cell matrices of the nodal virtual-element decomposition.
///
/// All matrices are `2m x 3` over the cell's contributor union with dof
/// order `(x_1, y_1, x_2, y_2, ...)`. With `(dx, dy) = x_a - x_E`:
/// * `H_a = [[dx, 0, dy/2], [0, dy, dx/2]]` maps a constant strain to nodal
///   displacements,
/// * `G_a = [[1, 0, dy/2], [0, 1, -dx/2]]` maps a translation and rotation,
/// * `W_a = [[q1, 0, q2], [0, q2, q1]]` with
///   `q_i = (1/|E|) sum_edges phi_a(midpoint) n_i length` gives the smoothed
///   strain `W^T d`,
/// * `R_a = [[phi_a(x_E), 0, q2], [0, phi_a(x_E), -q1]]` gives the value at
///   `x_E` and the mean rotation.
///
/// The projection onto linear fields is `P = H W^T + G R^T`.
#[derive(Clone, Debug, PartialEq)]
pub struct CellOperators {
    pub node_index: usize,
    pub center: Point2<f64>,
    pub area: f64,
    /// Sorted global node indices.
    pub contributors: Vec<usize>,
    pub h: DMatrix<f64>,
    pub g: DMatrix<f64>,
    pub w: DMatrix<f64>,
    pub r: DMatrix<f64>,
    /// `phi_a(x_E)` over the contributor union.
    pub phi_center: Vec<f64>,
}

/// Consistency and stability parts of a cell stiffness.
#[derive(Clone, Debug, PartialEq)]
pub struct StiffnessParts {
    pub consistency: DMatrix<f64>,
    pub stability: DMatrix<f64>,
}

impl StiffnessParts {
    pub fn total(&self) -> DMatrix<f64> {
        &self.consistency + &self.stability
    }
}

impl CellOperators {
    pub fn len(&self) -> usize {
        self.contributors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.contributors.is_empty()
    }

    pub fn projection(&self) -> DMatrix<f64> {
        &self.h * self.w.transpose() + &self.g * self.r.transpose()
    }

    /// Local dof vector gathered from a global one.
    pub fn gather(&self, global: &[f64]) -> DVector<f64> {
        DVector::from_iterator(
            2 * self.len(),
            self.contributors.iter().flat_map(|&a| [global[2 * a], global[2 * a + 1]]),
        )
    }

    /// Smoothed Voigt strain `W^T d` for a local dof vector.
    pub fn strain(&self, local: &DVector<f64>) -> Vector3<f64> {
        let s = self.w.transpose() * local;
        Vector3::new(s[0], s[1], s[2])
    }

    /// `N_E`, the `2 x 2m` interpolation matrix at the cell node.
    pub fn n_center(&self) -> DMatrix<f64> {
        let mut n = DMatrix::zeros(2, 2 * self.len());
        for (k, &p) in self.phi_center.iter().enumerate() {
            n[(0, 2 * k)] = p;
            n[(1, 2 * k + 1)] = p;
        }
        n
    }
}

/// Builds the operators from basis evaluations at the cell-edge midpoints
/// (in edge order) and at the cell node.
pub fn compute_cell_operators(
    cell: &NodalCell,
    edge_evals: &[BasisEvaluation],
    center: &BasisEvaluation,
    nodes: &[Point2<f64>],
) -> Result<CellOperators, AssemblyError> {
    if edge_evals.len() != cell.edges.len() {
        return Err(AssemblyError::Internal(format!(
            "cell {} has {} edges but {} evaluations",
            cell.node_index,
            cell.edges.len(),
            edge_evals.len()
        )));
    }
    let mut contributors: Vec<usize> = edge_evals
        .iter()
        .chain(std::iter::once(center))
        .flat_map(|e| e.contributors.iter().copied())
        .collect();
    contributors.sort_unstable();
    contributors.dedup();
    let m = contributors.len();
    let local = |a: usize| -> Result<usize, AssemblyError> {
        contributors
            .binary_search(&a)
            .map_err(|_| AssemblyError::Internal(format!("node {a} missing from cell contributor union")))
    };

    let mut q = vec![Vector2::zeros(); m];
    for (edge, eval) in cell.edges.iter().zip(edge_evals) {
        let scaled = edge.normal * (edge.length / cell.area);
        for (&a, &phi) in eval.contributors.iter().zip(&eval.values) {
            q[local(a)?] += scaled * phi;
        }
    }
    let mut phi_center = vec![0.0; m];
    for (&a, &phi) in center.contributors.iter().zip(&center.values) {
        phi_center[local(a)?] = phi;
    }

    let xe = cell.node_coords;
    let mut h = DMatrix::zeros(2 * m, 3);
    let mut g = DMatrix::zeros(2 * m, 3);
    let mut w = DMatrix::zeros(2 * m, 3);
    let mut r = DMatrix::zeros(2 * m, 3);
    for (k, &a) in contributors.iter().enumerate() {
        let d = nodes[a] - xe;
        let (i, j) = (2 * k, 2 * k + 1);
        h[(i, 0)] = d.x;
        h[(i, 2)] = 0.5 * d.y;
        h[(j, 1)] = d.y;
        h[(j, 2)] = 0.5 * d.x;
        g[(i, 0)] = 1.0;
        g[(i, 2)] = 0.5 * d.y;
        g[(j, 1)] = 1.0;
        g[(j, 2)] = -0.5 * d.x;
        w[(i, 0)] = q[k].x;
        w[(i, 2)] = q[k].y;
        w[(j, 1)] = q[k].y;
        w[(j, 2)] = q[k].x;
        r[(i, 0)] = phi_center[k];
        r[(i, 2)] = q[k].y;
        r[(j, 1)] = phi_center[k];
        r[(j, 2)] = -q[k].x;
    }
    Ok(CellOperators {
        node_index: cell.node_index,
        center: xe,
        area: cell.area,
        contributors,
        h,
        g,
        w,
        r,
        phi_center,
    })
}

/// Evaluates the basis on one cell and builds its operators.
pub fn evaluate_cell_operators(cell: &NodalCell, basis: &MaxentBasis) -> Result<CellOperators, AssemblyError> {
    let edge_evals = cell
        .edges
        .iter()
        .map(|e| basis.evaluate(&e.midpoint))
        .collect::<Result<Vec<_>, _>>()?;
    let center = basis.evaluate(&cell.node_coords)?;
    compute_cell_operators(cell, &edge_evals, &center, basis.nodes())
}

/// Operators for every cell, computed in parallel, in node order.
pub fn compute_all_cell_operators(
    partition: &CellPartition,
    basis: &MaxentBasis,
) -> Result<Vec<CellOperators>, AssemblyError> {
    partition
        .cells
        .par_iter()
        .map(|c| evaluate_cell_operators(c, basis))
        .collect()
}

fn symmetrize(a: &mut DMatrix<f64>) {
    let n = a.nrows();
    for i in 0..n {
        for j in i + 1..n {
            let v = 0.5 * (a[(i, j)] + a[(j, i)]);
            a[(i, j)] = v;
            a[(j, i)] = v;
        }
    }
}

/// `K^c = |E| W D W^T` and `K^s = (I - P)^T S (I - P)` with `S` the
/// diagonal of `K^c`.
///
/// `K^s` is formed through the rank-6 factorization `P = A B^T` with
/// `A = [H G]` and `B = [W R]`, which avoids building `P`.
pub fn cell_stiffness(ops: &CellOperators, d: &Matrix3<f64>) -> StiffnessParts {
    let n = 2 * ops.len();
    let wd = &ops.w * d;
    let mut kc = (wd * ops.w.transpose()) * ops.area;
    symmetrize(&mut kc);
    let s = kc.diagonal();

    let mut a = DMatrix::zeros(n, 6);
    a.columns_mut(0, 3).copy_from(&ops.h);
    a.columns_mut(3, 3).copy_from(&ops.g);
    let mut b = DMatrix::zeros(n, 6);
    b.columns_mut(0, 3).copy_from(&ops.w);
    b.columns_mut(3, 3).copy_from(&ops.r);

    let mut sa = a.clone();
    for i in 0..n {
        sa.row_mut(i).scale_mut(s[i]);
    }
    let core = a.transpose() * &sa;
    let x = &sa * b.transpose();
    let mut ks = (&b * core) * b.transpose() - &x - x.transpose();
    for i in 0..n {
        ks[(i, i)] += s[i];
    }
    symmetrize(&mut ks);
    StiffnessParts {
        consistency: kc,
        stability: ks,
    }
}

/// `M_E = rho |E| P^T N_E^T N_E P`.
pub fn cell_mass(ops: &CellOperators, rho: f64) -> DMatrix<f64> {
    let n = ops.n_center();
    let np = (&n * &ops.h) * ops.w.transpose() + (&n * &ops.g) * ops.r.transpose();
    let mut m = np.transpose() * np * (rho * ops.area);
    symmetrize(&mut m);
    m
}

/// `f_b = |E| N_E^T b(x_E)`.
pub fn cell_body_force(ops: &CellOperators, b: &Vector2<f64>) -> DVector<f64> {
    let mut f = DVector::zeros(2 * ops.len());
    for (k, &p) in ops.phi_center.iter().enumerate() {
        f[2 * k] = ops.area * p * b.x;
        f[2 * k + 1] = ops.area * p * b.y;
    }
    f
}
