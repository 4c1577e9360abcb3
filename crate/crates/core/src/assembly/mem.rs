use nalgebra::{DMatrix, Matrix3, Point2, Vector2};
use rayon::prelude::*;

use super::global::assemble_blocks;
use super::{AssemblyError, CsrMatrix, GaussRule};
use crate::geometry::BackgroundMesh;
use crate::maxent::{BasisEvaluation, MaxentBasis};

struct QuadPoint {
    weight: f64,
    eval: BasisEvaluation,
}

fn triangle_points(
    vertices: &[Point2<f64>; 3],
    basis: &MaxentBasis,
    rule: GaussRule,
    gradients: bool,
) -> Result<(Vec<usize>, Vec<QuadPoint>), AssemblyError> {
    let mut union = Vec::new();
    let mut pts = Vec::with_capacity(rule.points());
    for (p, weight) in rule.on_triangle(vertices) {
        let eval = if gradients {
            basis.evaluate_with_gradients(&p)?
        } else {
            basis.evaluate(&p)?
        };
        union.extend_from_slice(&eval.contributors);
        pts.push(QuadPoint { weight, eval });
    }
    union.sort_unstable();
    union.dedup();
    Ok((union, pts))
}

fn position(union: &[usize], a: usize) -> usize {
    union.binary_search(&a).expect("contributor belongs to the union")
}

/// Gauss-quadrature stiffness `sum_g w_g B^T D B` of one background
/// triangle, over the union of contributors of its Gauss points.
pub fn mem_triangle_stiffness(
    vertices: &[Point2<f64>; 3],
    basis: &MaxentBasis,
    d: &Matrix3<f64>,
    rule: GaussRule,
) -> Result<(Vec<usize>, DMatrix<f64>), AssemblyError> {
    let (union, pts) = triangle_points(vertices, basis, rule, true)?;
    let n = 2 * union.len();
    let mut k = DMatrix::zeros(n, n);
    for q in &pts {
        let grads = q.eval.gradients.as_ref().ok_or_else(|| AssemblyError::Internal("missing gradients".into()))?;
        let mut b = DMatrix::zeros(3, n);
        for (&a, g) in q.eval.contributors.iter().zip(grads) {
            let j = 2 * position(&union, a);
            b[(0, j)] = g.x;
            b[(1, j + 1)] = g.y;
            b[(2, j)] = g.y;
            b[(2, j + 1)] = g.x;
        }
        let db = d * &b;
        k += b.transpose() * db * q.weight;
    }
    Ok((union, k))
}

fn triangle_groups(mesh: &BackgroundMesh, basis: &MaxentBasis, rule: GaussRule) -> Result<Vec<Vec<usize>>, AssemblyError> {
    (0..mesh.triangles().len())
        .into_par_iter()
        .map(|t| {
            let mut u = Vec::new();
            for (p, _) in rule.on_triangle(&mesh.triangle_vertices(t)) {
                u.extend(basis.find_contributors(&p)?);
            }
            u.sort_unstable();
            u.dedup();
            Ok(u)
        })
        .collect()
}

pub fn assemble_mem_stiffness(
    mesh: &BackgroundMesh,
    basis: &MaxentBasis,
    d: &Matrix3<f64>,
    rule: GaussRule,
) -> Result<CsrMatrix, AssemblyError> {
    let groups = triangle_groups(mesh, basis, rule)?;
    assemble_blocks(mesh.node_count(), &groups, |t| {
        Ok(mem_triangle_stiffness(&mesh.triangle_vertices(t), basis, d, rule)?.1)
    })
}

/// Consistent mass `sum_g w_g rho N^T N`.
pub fn assemble_mem_mass(
    mesh: &BackgroundMesh,
    basis: &MaxentBasis,
    rho: f64,
    rule: GaussRule,
) -> Result<CsrMatrix, AssemblyError> {
    let groups = triangle_groups(mesh, basis, rule)?;
    assemble_blocks(mesh.node_count(), &groups, |t| {
        let (union, pts) = triangle_points(&mesh.triangle_vertices(t), basis, rule, false)?;
        let mut m = DMatrix::zeros(2 * union.len(), 2 * union.len());
        for q in &pts {
            for (&a, &pa) in q.eval.contributors.iter().zip(&q.eval.values) {
                let i = 2 * position(&union, a);
                for (&b, &pb) in q.eval.contributors.iter().zip(&q.eval.values) {
                    let j = 2 * position(&union, b);
                    let v = rho * q.weight * pa * pb;
                    m[(i, j)] += v;
                    m[(i + 1, j + 1)] += v;
                }
            }
        }
        Ok(m)
    })
}

pub fn mem_body_force<B>(mesh: &BackgroundMesh, basis: &MaxentBasis, rule: GaussRule, body: B) -> Result<Vec<f64>, AssemblyError>
where
    B: Fn(&Point2<f64>) -> Vector2<f64> + Sync,
{
    let per_triangle = (0..mesh.triangles().len())
        .into_par_iter()
        .map(|t| triangle_points(&mesh.triangle_vertices(t), basis, rule, false).map(|(_, p)| p))
        .collect::<Result<Vec<_>, _>>()?;
    let mut f = vec![0.0; 2 * mesh.node_count()];
    for q in per_triangle.iter().flatten() {
        let b = body(&q.eval.point) * q.weight;
        for (&a, &phi) in q.eval.contributors.iter().zip(&q.eval.values) {
            f[2 * a] += phi * b.x;
            f[2 * a + 1] += phi * b.y;
        }
    }
    Ok(f)
}
