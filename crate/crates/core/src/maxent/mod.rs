//! Linear maximum-entropy basis functions.
//!
//! At a point `x` with contributors `a` and shifted coordinates
//! `c_a = x_a - x`, the basis is `phi_a = w_a exp(-lambda . c_a) / Z`, where
//! `lambda` minimizes `ln Z`. This enforces partition of unity and linear
//! reproduction. When `x` lies on the boundary of the convex hull of its
//! contributors the minimum is attained only in a limit: the basis then
//! degenerates to a one-dimensional maxent basis on the hull edge, or to a
//! Kronecker delta at a hull vertex. Both limits are computed directly.

mod dual;
mod prior;

pub use dual::{DualOptions, DualState, Support};
pub use prior::{Prior, PriorKind};

use nalgebra::{Matrix2, Point2, Vector2};
use thiserror::Error;

use dual::{classify, solve_edge, solve_interior, DualFailure};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum MaxentError {
    #[error("degenerate support at ({x}, {y}) with {contributors} contributors: {reason}")]
    DegenerateSupport {
        x: f64,
        y: f64,
        contributors: usize,
        reason: String,
    },
    #[error("dual Newton did not converge at ({x}, {y}): residual {residual:e} after {iterations} iterations")]
    NonConvergence {
        x: f64,
        y: f64,
        residual: f64,
        iterations: usize,
    },
    #[error("invalid basis configuration: {0}")]
    InvalidConfig(String),
}

/// Basis values (and optionally gradients) at one point.
#[derive(Clone, Debug, PartialEq)]
pub struct BasisEvaluation {
    pub point: Point2<f64>,
    /// Sorted global node indices.
    pub contributors: Vec<usize>,
    pub values: Vec<f64>,
    pub gradients: Option<Vec<Vector2<f64>>>,
    pub support: Support,
    pub dual: DualState,
}

impl BasisEvaluation {
    /// `sum_a phi_a f_a` for nodal data `f`.
    pub fn interpolate<T>(&self, nodal: &[T]) -> T
    where
        T: Copy + std::ops::Mul<f64, Output = T> + std::iter::Sum,
    {
        self.contributors
            .iter()
            .zip(&self.values)
            .map(|(&a, &p)| nodal[a] * p)
            .sum()
    }
}

/// Uniform bucket grid over the nodes for radius queries.
#[derive(Clone, Debug)]
struct NodeGrid {
    origin: Point2<f64>,
    cell: f64,
    nx: usize,
    ny: usize,
    buckets: Vec<Vec<usize>>,
}

impl NodeGrid {
    fn new(nodes: &[Point2<f64>], cell: f64) -> Self {
        let (mut lo, mut hi) = (nodes[0], nodes[0]);
        for p in nodes {
            lo = Point2::new(lo.x.min(p.x), lo.y.min(p.y));
            hi = Point2::new(hi.x.max(p.x), hi.y.max(p.y));
        }
        let nx = ((hi.x - lo.x) / cell).floor() as usize + 1;
        let ny = ((hi.y - lo.y) / cell).floor() as usize + 1;
        let mut buckets = vec![Vec::new(); nx * ny];
        let grid = Self {
            origin: lo,
            cell,
            nx,
            ny,
            buckets: Vec::new(),
        };
        for (i, p) in nodes.iter().enumerate() {
            let (bx, by) = grid.bucket(p);
            buckets[by * nx + bx].push(i);
        }
        Self { buckets, ..grid }
    }

    fn bucket(&self, p: &Point2<f64>) -> (usize, usize) {
        let fx = ((p.x - self.origin.x) / self.cell).floor().max(0.0) as usize;
        let fy = ((p.y - self.origin.y) / self.cell).floor().max(0.0) as usize;
        (fx.min(self.nx - 1), fy.min(self.ny - 1))
    }

    /// Candidate nodes within one bucket of `p`.
    fn neighbours<'a>(&'a self, p: &Point2<f64>) -> impl Iterator<Item = usize> + 'a {
        let fx = ((p.x - self.origin.x) / self.cell).floor() as i64;
        let fy = ((p.y - self.origin.y) / self.cell).floor() as i64;
        let (nx, ny) = (self.nx as i64, self.ny as i64);
        (fy - 1..=fy + 1)
            .filter(move |&y| (0..ny).contains(&y))
            .flat_map(move |y| {
                (fx - 1..=fx + 1)
                    .filter(move |&x| (0..nx).contains(&x))
                    .map(move |x| (y * nx + x) as usize)
            })
            .flat_map(move |b| self.buckets[b].iter().copied())
    }
}

/// Maxent basis over a fixed node set.
#[derive(Clone, Debug)]
pub struct MaxentBasis {
    nodes: Vec<Point2<f64>>,
    spacing: Vec<f64>,
    prior: Prior,
    options: DualOptions,
    grid: NodeGrid,
}

impl MaxentBasis {
    /// `spacing[a]` is the characteristic length `h_a` scaling node `a`'s prior.
    pub fn new(
        nodes: Vec<Point2<f64>>,
        spacing: Vec<f64>,
        prior: Prior,
        options: DualOptions,
    ) -> Result<Self, MaxentError> {
        if nodes.is_empty() || nodes.len() != spacing.len() {
            return Err(MaxentError::InvalidConfig(
                "need one positive spacing per node and at least one node".into(),
            ));
        }
        if !(prior.gamma > 0.0) || spacing.iter().any(|h| !(*h > 0.0)) {
            return Err(MaxentError::InvalidConfig("gamma and nodal spacings must be positive".into()));
        }
        let reach = spacing.iter().map(|&h| prior.cutoff_radius(h)).fold(0.0, f64::max);
        let grid = NodeGrid::new(&nodes, reach);
        Ok(Self {
            nodes,
            spacing,
            prior,
            options,
            grid,
        })
    }

    pub fn nodes(&self) -> &[Point2<f64>] {
        &self.nodes
    }

    pub fn spacing(&self) -> &[f64] {
        &self.spacing
    }

    pub fn prior(&self) -> &Prior {
        &self.prior
    }

    pub fn options(&self) -> &DualOptions {
        &self.options
    }

    /// Nodes whose prior at `x` exceeds the support cutoff, sorted.
    pub fn find_contributors(&self, x: &Point2<f64>) -> Result<Vec<usize>, MaxentError> {
        let mut out: Vec<usize> = self
            .grid
            .neighbours(x)
            .filter(|&a| self.prior.contributes((self.nodes[a] - x).norm_squared(), self.spacing[a]))
            .collect();
        out.sort_unstable();
        self.check_spread(x, &out)?;
        Ok(out)
    }

    fn degenerate(&self, x: &Point2<f64>, m: usize, reason: impl Into<String>) -> MaxentError {
        MaxentError::DegenerateSupport {
            x: x.x,
            y: x.y,
            contributors: m,
            reason: reason.into(),
        }
    }

    /// Rejects fewer than three contributors or a collinear set.
    fn check_spread(&self, x: &Point2<f64>, contributors: &[usize]) -> Result<(), MaxentError> {
        if contributors.len() < 3 {
            return Err(self.degenerate(x, contributors.len(), "fewer than 3 contributors"));
        }
        let mut s = Matrix2::zeros();
        let mut max2: f64 = 0.0;
        for &a in contributors {
            let c = self.nodes[a] - x;
            s += c * c.transpose();
            max2 = max2.max(c.norm_squared());
        }
        let tr = s.trace();
        let det = s.determinant();
        let smallest = 0.5 * (tr - (tr * tr - 4.0 * det).max(0.0).sqrt());
        if smallest < 1e-14 * max2 {
            return Err(self.degenerate(x, contributors.len(), "contributors are collinear"));
        }
        Ok(())
    }

    pub fn evaluate(&self, x: &Point2<f64>) -> Result<BasisEvaluation, MaxentError> {
        let contributors = self.find_contributors(x)?;
        self.evaluate_with(x, contributors, false)
    }

    pub fn evaluate_with_gradients(&self, x: &Point2<f64>) -> Result<BasisEvaluation, MaxentError> {
        let contributors = self.find_contributors(x)?;
        self.evaluate_with(x, contributors, true)
    }

    /// Evaluates with an explicit contributor list.
    ///
    /// Gradients exist only where the point is interior to the hull of its
    /// contributors; on the hull boundary a degenerate-support error is
    /// returned when they are requested.
    pub fn evaluate_with(
        &self,
        x: &Point2<f64>,
        contributors: Vec<usize>,
        with_gradients: bool,
    ) -> Result<BasisEvaluation, MaxentError> {
        self.check_spread(x, &contributors)?;
        let m = contributors.len();
        let c: Vec<Vector2<f64>> = contributors.iter().map(|&a| self.nodes[a] - x).collect();
        let log_w: Vec<f64> = contributors
            .iter()
            .zip(&c)
            .map(|(&a, ca)| self.prior.log_weight(ca, self.spacing[a]))
            .collect();
        let scale = c.iter().map(|v| v.norm()).fold(0.0, f64::max);

        let support = classify(&c, self.options.hull_tolerance * scale)
            .map_err(|_| self.degenerate(x, m, "point lies outside the convex hull of its contributors"))?;
        let not_converged = |f: DualFailure| match f {
            DualFailure::NotConverged { residual, iterations } => MaxentError::NonConvergence {
                x: x.x,
                y: x.y,
                residual,
                iterations,
            },
            DualFailure::Outside => self.degenerate(x, m, "point lies outside the convex hull"),
        };
        let solution = match support {
            Support::Interior => solve_interior(&c, &log_w, scale, &self.options).map_err(not_converged)?,
            Support::Edge(dir) => solve_edge(&c, &log_w, dir, scale, &self.options).map_err(not_converged)?,
            Support::Vertex(k) => {
                let mut values = vec![0.0; m];
                values[k] = 1.0;
                dual::DualSolution {
                    values,
                    state: DualState {
                        lambda: Vector2::zeros(),
                        partition_value: 1.0,
                        gradient: Vector2::zeros(),
                        hessian: Matrix2::zeros(),
                        iterations: 0,
                    },
                    support,
                }
            }
        };

        let gradients = if with_gradients {
            if solution.support != Support::Interior {
                return Err(self.degenerate(x, m, "gradients are undefined on the boundary of the support hull"));
            }
            Some(self.gradients(&contributors, &c, &solution.values, &solution.state, x)?)
        } else {
            None
        };
        Ok(BasisEvaluation {
            point: *x,
            contributors,
            values: solution.values,
            gradients,
            support: solution.support,
            dual: solution.state,
        })
    }

    /// Implicit differentiation of the converged dual.
    ///
    /// With `g_a = grad ln w_a`, `gbar = sum phi g`, `cbar = sum phi c` and
    /// `A = sum phi_a c_a (g_a - gbar)^T`, the multiplier derivative is
    /// `dlambda/dx = J^{-1} (A - I)` and
    /// `grad phi_a = phi_a [(g_a - gbar) - (dlambda/dx)^T (c_a - cbar)]`.
    fn gradients(
        &self,
        contributors: &[usize],
        c: &[Vector2<f64>],
        phi: &[f64],
        state: &DualState,
        x: &Point2<f64>,
    ) -> Result<Vec<Vector2<f64>>, MaxentError> {
        let g: Vec<Vector2<f64>> = contributors
            .iter()
            .zip(c)
            .map(|(&a, ca)| self.prior.log_weight_gradient(ca, self.spacing[a]))
            .collect();
        let mut gbar = Vector2::zeros();
        let mut cbar = Vector2::zeros();
        for k in 0..c.len() {
            gbar += g[k] * phi[k];
            cbar += c[k] * phi[k];
        }
        let mut a = Matrix2::zeros();
        for k in 0..c.len() {
            a += c[k] * (g[k] - gbar).transpose() * phi[k];
        }
        let jinv = state
            .hessian
            .try_inverse()
            .ok_or_else(|| self.degenerate(x, c.len(), "singular dual Hessian"))?;
        let dlambda = jinv * (a - Matrix2::identity());
        Ok((0..c.len())
            .map(|k| ((g[k] - gbar) - dlambda.transpose() * (c[k] - cbar)) * phi[k])
            .collect())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{generate_structured_mesh, DomainSpec};

    fn grid_basis(prior: Prior, n: usize, seed: Option<u64>) -> MaxentBasis {
        let mesh = generate_structured_mesh(&DomainSpec::unit_square(), n, seed).unwrap();
        MaxentBasis::new(
            mesh.nodes().to_vec(),
            mesh.mean_incident_edge_length(),
            prior,
            DualOptions::default(),
        )
        .unwrap()
    }

    #[test]
    fn centroid_of_symmetric_triangle() {
        let nodes = vec![
            Point2::new(1.0, 0.0),
            Point2::new(-0.5, 3f64.sqrt() / 2.0),
            Point2::new(-0.5, -(3f64.sqrt()) / 2.0),
        ];
        let b = MaxentBasis::new(nodes, vec![1.0; 3], Prior::gaussian(2.0), DualOptions::default()).unwrap();
        let e = b.evaluate(&Point2::origin()).unwrap();
        for v in &e.values {
            assert!((v - 1.0 / 3.0).abs() < 1e-15);
        }
    }

    #[test]
    fn quartic_contributors_are_within_gamma_h() {
        let b = grid_basis(Prior::quartic(2.0), 10, None);
        let x = Point2::new(0.43, 0.51);
        let list = b.find_contributors(&x).unwrap();
        for a in 0..b.nodes().len() {
            let q = (b.nodes()[a] - x).norm() / (2.0 * b.spacing()[a]);
            assert_eq!(list.contains(&a), q < 1.0, "node {a} q={q}");
        }
    }

    #[test]
    fn node_is_its_own_contributor_with_unit_weight() {
        let b = grid_basis(Prior::quartic(2.0), 6, None);
        let x = b.nodes()[17];
        let list = b.find_contributors(&x).unwrap();
        assert!(list.contains(&17));
        assert_eq!(b.prior().weight(&Vector2::zeros(), b.spacing()[17]), 1.0);
        let e = b.evaluate(&x).unwrap();
        let s: f64 = e.values.iter().sum();
        assert!((s - 1.0).abs() < 1e-12);
    }

    #[test]
    fn boundary_points_use_edge_nodes_only() {
        let b = grid_basis(Prior::gaussian(2.0), 6, None);
        let e = b.evaluate(&Point2::new(0.37, 0.0)).unwrap();
        assert!(matches!(e.support, Support::Edge(_)));
        for (&a, &v) in e.contributors.iter().zip(&e.values) {
            if b.nodes()[a].y != 0.0 {
                assert_eq!(v, 0.0);
            }
        }
        let corner = b.evaluate(&Point2::new(1.0, 1.0)).unwrap();
        assert!(matches!(corner.support, Support::Vertex(_)));
        assert!(b.evaluate_with_gradients(&Point2::new(0.37, 0.0)).is_err());
    }

    #[test]
    fn isolated_point_is_degenerate() {
        let b = grid_basis(Prior::quartic(0.4), 4, None);
        assert!(matches!(
            b.find_contributors(&Point2::new(0.13, 0.13)),
            Err(MaxentError::DegenerateSupport { .. })
        ));
    }

    #[test]
    fn gradients_match_finite_differences() {
        for prior in [Prior::gaussian(2.0), Prior::quartic(2.0)] {
            let b = grid_basis(prior, 8, Some(5));
            let x = Point2::new(0.41, 0.57);
            let e = b.evaluate_with_gradients(&x).unwrap();
            let grads = e.gradients.as_ref().unwrap();
            let step = 1e-6 * 0.125;
            for k in 0..2 {
                let mut d = Vector2::zeros();
                d[k] = step;
                let p = b.evaluate_with(&(x + d), e.contributors.clone(), false).unwrap();
                let m = b.evaluate_with(&(x - d), e.contributors.clone(), false).unwrap();
                let gmax = grads.iter().map(|g| g.norm()).fold(0.0, f64::max);
                for ((vp, vm), g) in p.values.iter().zip(&m.values).zip(grads.iter()) {
                    let fd = (vp - vm) / (2.0 * step);
                    assert!((fd - g[k]).abs() <= 1e-6 * gmax, "{prior:?} {fd} {}", g[k]);
                }
            }
        }
    }
}
