use nalgebra::{DMatrix, Matrix3, Point2, Vector2};
use rayon::prelude::*;

use super::operators::{cell_body_force, cell_mass, cell_stiffness, CellOperators};
use super::{AssemblyError, BlockAssembler, CsrMatrix};
use crate::geometry::NeumannSegment;
use crate::maxent::MaxentBasis;

/// Contributions computed per parallel batch before the sequential scatter.
/// Bounds peak memory while keeping the summation order fixed.
const BATCH: usize = 256;

/// How a boundary traction is turned into nodal forces.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum TractionRule {
    /// `sum_e l_e N(m_e)^T t(m_e)` over the half-edges of each segment,
    /// which are the boundary edges of the nodal cells.
    #[default]
    HalfEdge,
    /// `|S| N(x_S)^T t(x_S)` at the segment node only.
    Nodal,
    /// Gauss-Legendre rule with the given number of points (1 to 5) on each
    /// half-edge, as used with Gauss quadrature on the background triangles.
    EdgeGauss(usize),
}

/// Gauss-Legendre points on `[0, 1]` with weights summing to one.
pub fn gauss_legendre_unit(n: usize) -> Option<Vec<(f64, f64)>> {
    let sym: &[(f64, f64)] = match n {
        1 => &[(0.0, 2.0)],
        2 => &[(0.577_350_269_189_625_8, 1.0)],
        3 => &[(0.0, 0.888_888_888_888_889), (0.774_596_669_241_483_4, 0.555_555_555_555_555_6)],
        4 => &[
            (0.339_981_043_584_856_3, 0.652_145_154_862_546_1),
            (0.861_136_311_594_052_6, 0.347_854_845_137_453_9),
        ],
        5 => &[
            (0.0, 0.568_888_888_888_888_9),
            (0.538_469_310_105_683_1, 0.478_628_670_499_366_5),
            (0.906_179_845_938_664, 0.236_926_885_056_189_1),
        ],
        _ => return None,
    };
    let mut out = Vec::with_capacity(n);
    for &(x, w) in sym {
        out.push((0.5 * (1.0 - x), 0.5 * w));
        if x != 0.0 {
            out.push((0.5 * (1.0 + x), 0.5 * w));
        }
    }
    out.sort_by(|a, b| a.0.total_cmp(&b.0));
    Some(out)
}

/// Assembles dense local blocks into a global matrix.
///
/// `local(i)` returns the node list and block of item `i`. Items are computed
/// in parallel batches and scattered in index order, so the result is
/// independent of the thread count.
pub fn assemble_blocks<F>(n_nodes: usize, groups: &[Vec<usize>], local: F) -> Result<CsrMatrix, AssemblyError>
where
    F: Fn(usize) -> Result<DMatrix<f64>, AssemblyError> + Sync,
{
    let mut asm = BlockAssembler::new(n_nodes, groups.iter().map(Vec::as_slice))?;
    for start in (0..groups.len()).step_by(BATCH) {
        let end = (start + BATCH).min(groups.len());
        let blocks = (start..end).into_par_iter().map(&local).collect::<Result<Vec<_>, _>>()?;
        for (i, block) in (start..end).zip(&blocks) {
            asm.add(&groups[i], block)?;
        }
    }
    Ok(asm.finish())
}

pub fn assemble_nived_stiffness(
    ops: &[CellOperators],
    n_nodes: usize,
    d: &Matrix3<f64>,
) -> Result<CsrMatrix, AssemblyError> {
    let groups: Vec<Vec<usize>> = ops.iter().map(|o| o.contributors.clone()).collect();
    assemble_blocks(n_nodes, &groups, |i| Ok(cell_stiffness(&ops[i], d).total()))
}

pub fn assemble_nived_mass(ops: &[CellOperators], n_nodes: usize, rho: f64) -> Result<CsrMatrix, AssemblyError> {
    let groups: Vec<Vec<usize>> = ops.iter().map(|o| o.contributors.clone()).collect();
    assemble_blocks(n_nodes, &groups, |i| Ok(cell_mass(&ops[i], rho)))
}

fn scatter(global: &mut [f64], nodes: &[usize], local: &[f64]) {
    for (k, &a) in nodes.iter().enumerate() {
        global[2 * a] += local[2 * k];
        global[2 * a + 1] += local[2 * k + 1];
    }
}

/// Body force vector with the body force sampled at each cell node.
pub fn nived_body_force<B>(ops: &[CellOperators], n_nodes: usize, body: B) -> Vec<f64>
where
    B: Fn(&Point2<f64>) -> Vector2<f64> + Sync,
{
    let locals: Vec<_> = ops.par_iter().map(|o| cell_body_force(o, &body(&o.center))).collect();
    let mut f = vec![0.0; 2 * n_nodes];
    for (o, l) in ops.iter().zip(&locals) {
        scatter(&mut f, &o.contributors, l.as_slice());
    }
    f
}

/// Nodal forces from a prescribed traction on boundary segments.
///
/// `EdgeGauss` integrates over the background edges that the segments were
/// built from: each half-edge is one half of such an edge, running from the
/// segment node to the edge midpoint.
pub fn traction_force<T>(
    segments: &[NeumannSegment],
    basis: &MaxentBasis,
    traction: T,
    rule: TractionRule,
) -> Result<Vec<f64>, AssemblyError>
where
    T: Fn(&Point2<f64>) -> Vector2<f64> + Sync,
{
    let points: Vec<(Point2<f64>, f64)> = match rule {
        TractionRule::HalfEdge => segments
            .iter()
            .flat_map(|s| s.half_edges.iter().map(|h| (h.midpoint, h.length)))
            .collect(),
        TractionRule::Nodal => segments.iter().map(|s| (s.coords, s.length)).collect(),
        TractionRule::EdgeGauss(n) => {
            let rule = gauss_legendre_unit(n)
                .ok_or_else(|| AssemblyError::Internal(format!("no {n}-point Gauss-Legendre rule")))?;
            // Each background edge appears as a half-edge of both end nodes;
            // integrating each half separately covers the edge once. A
            // half-edge runs from the node to twice its own midpoint.
            segments
                .iter()
                .flat_map(|s| {
                    s.half_edges.iter().flat_map(|h| {
                        let (a, span) = (s.coords, (h.midpoint - s.coords) * 2.0);
                        rule.iter().map(move |&(x, w)| (a + span * x, w * h.length))
                    })
                })
                .collect()
        }
    };
    let evals = points
        .par_iter()
        .map(|(p, _)| basis.evaluate(p))
        .collect::<Result<Vec<_>, _>>()?;
    let mut f = vec![0.0; 2 * basis.nodes().len()];
    for ((p, len), e) in points.iter().zip(&evals) {
        let t = traction(p) * *len;
        for (&a, &phi) in e.contributors.iter().zip(&e.values) {
            f[2 * a] += phi * t.x;
            f[2 * a + 1] += phi * t.y;
        }
    }
    Ok(f)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::assembly::compute_all_cell_operators;
    use crate::geometry::{build_nodal_cells, generate_structured_mesh, DomainSpec};
    use crate::materials::{d_matrix, PlaneCondition};
    use crate::maxent::{DualOptions, Prior};

    fn setup(n: usize) -> (crate::geometry::CellPartition, MaxentBasis, Vec<CellOperators>) {
        let mesh = generate_structured_mesh(&DomainSpec::unit_square(), n, Some(3)).unwrap();
        let p = build_nodal_cells(&mesh).unwrap();
        let b = MaxentBasis::new(mesh.nodes().to_vec(), p.h_a.clone(), Prior::gaussian(2.0), DualOptions::default())
            .unwrap();
        let ops = compute_all_cell_operators(&p, &b).unwrap();
        (p, b, ops)
    }

    #[test]
    fn global_stiffness_is_symmetric_with_three_rigid_modes() {
        let (_, b, ops) = setup(4);
        let d = d_matrix(1.0, 0.3, PlaneCondition::PlaneStrain).unwrap();
        let k = assemble_nived_stiffness(&ops, b.nodes().len(), &d).unwrap();
        assert!(k.asymmetry() <= 1e-15 * k.max_abs());
        let eig = k.to_dense().symmetric_eigenvalues();
        let max = eig.max();
        assert!(eig.iter().all(|&l| l > -1e-12 * max));
        assert_eq!(eig.iter().filter(|&&l| l.abs() < 1e-10 * max).count(), 3);
    }

    #[test]
    fn mass_total_and_body_force_total() {
        let (p, b, ops) = setup(4);
        let n = b.nodes().len();
        let m = assemble_nived_mass(&ops, n, 3.0).unwrap();
        let ones: Vec<f64> = (0..2 * n).map(|i| if i % 2 == 0 { 1.0 } else { 0.0 }).collect();
        let mass: f64 = m.matvec(&ones).iter().zip(&ones).map(|(a, b)| a * b).sum();
        assert!((mass - 3.0 * p.total_area()).abs() < 1e-12);
        let f = nived_body_force(&ops, n, |_| Vector2::new(2.0, -1.0));
        let fx: f64 = f.iter().step_by(2).sum();
        let fy: f64 = f.iter().skip(1).step_by(2).sum();
        assert!((fx - 2.0).abs() < 1e-13 && (fy + 1.0).abs() < 1e-13);
    }

    #[test]
    fn traction_rules_agree_on_resultant() {
        let (p, b, _) = setup(5);
        let segs = p.segments("top").unwrap();
        for rule in [TractionRule::HalfEdge, TractionRule::Nodal, TractionRule::EdgeGauss(3)] {
            let f = traction_force(segs, &b, |_| Vector2::new(0.5, 1.0), rule).unwrap();
            let fx: f64 = f.iter().step_by(2).sum();
            let fy: f64 = f.iter().skip(1).step_by(2).sum();
            assert!((fx - 0.5).abs() < 1e-13 && (fy - 1.0).abs() < 1e-13, "{rule:?}");
            // The moment of a uniform traction about x = 0.5 vanishes.
            let moment: f64 = b.nodes().iter().enumerate().map(|(a, x)| (x.x - 0.5) * f[2 * a + 1]).sum();
            assert!(moment.abs() < 1e-13, "{rule:?}");
        }
    }

    #[test]
    fn gauss_legendre_integrates_polynomials() {
        for n in 1..=5 {
            let rule = gauss_legendre_unit(n).unwrap();
            assert_eq!(rule.len(), n);
            for k in 0..2 * n {
                let q: f64 = rule.iter().map(|(x, w)| w * x.powi(k as i32)).sum();
                assert!((q - 1.0 / (k as f64 + 1.0)).abs() < 1e-15, "n={n} k={k}");
            }
        }
        assert!(gauss_legendre_unit(6).is_none());
    }

    #[test]
    fn assembly_is_independent_of_thread_count() {
        let (_, b, ops) = setup(4);
        let d = d_matrix(2.0, 0.25, PlaneCondition::PlaneStress).unwrap();
        let n = b.nodes().len();
        let serial = rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap();
        let k1 = serial.install(|| assemble_nived_stiffness(&ops, n, &d).unwrap());
        let k4 = rayon::ThreadPoolBuilder::new()
            .num_threads(4)
            .build()
            .unwrap()
            .install(|| assemble_nived_stiffness(&ops, n, &d).unwrap());
        assert_eq!(k1, k4);
    }
}
