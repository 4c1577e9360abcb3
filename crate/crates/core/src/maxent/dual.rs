//! Newton solver for the convex dual of the entropy maximization, plus the
//! convex-hull bookkeeping needed at points on the boundary of the support.

use nalgebra::{Matrix2, Vector2};

/// Dual variables and derived quantities at the last iterate.
#[derive(Clone, Debug, PartialEq)]
pub struct DualState {
    pub lambda: Vector2<f64>,
    /// Partition function `Z = sum_a w_a exp(-lambda . c_a)`.
    pub partition_value: f64,
    /// `r = -sum_a phi_a c_a`, the gradient of `ln Z`.
    pub gradient: Vector2<f64>,
    /// `J = sum_a phi_a c_a c_a^T - r r^T`.
    pub hessian: Matrix2<f64>,
    pub iterations: usize,
}

/// Where the evaluation point sits relative to the convex hull of its
/// contributors.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Support {
    Interior,
    /// On a hull edge with the given unit direction; only contributors on
    /// that line receive weight.
    Edge(Vector2<f64>),
    /// Coincides with the hull vertex at this local index; the basis is the
    /// Kronecker delta of that node.
    Vertex(usize),
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DualOptions {
    /// Convergence when `|r| <= tolerance * max |c_a|`.
    pub tolerance: f64,
    pub max_iterations: usize,
    /// Relative distance below which a point counts as lying on a hull edge.
    pub hull_tolerance: f64,
}

impl Default for DualOptions {
    fn default() -> Self {
        Self {
            tolerance: 1e-12,
            max_iterations: 100,
            hull_tolerance: 1e-10,
        }
    }
}

#[derive(Debug)]
pub(crate) enum DualFailure {
    Outside,
    NotConverged { residual: f64, iterations: usize },
}

pub(crate) struct DualSolution {
    pub values: Vec<f64>,
    pub state: DualState,
    pub support: Support,
}

/// Classifies the origin against the convex hull of `c`.
pub(crate) fn classify(c: &[Vector2<f64>], tol: f64) -> Result<Support, DualFailure> {
    let hull = convex_hull(c);
    for &i in &hull {
        if c[i].norm() <= tol {
            return Ok(Support::Vertex(i));
        }
    }
    let mut on_edge = None;
    for k in 0..hull.len() {
        let p = c[hull[k]];
        let q = c[hull[(k + 1) % hull.len()]];
        let e = q - p;
        let len = e.norm();
        // Positive when the origin is to the left of p -> q, i.e. inside.
        let d = (e.x * (-p.y) - e.y * (-p.x)) / len;
        if d < -tol {
            return Err(DualFailure::Outside);
        }
        if d <= tol {
            on_edge = Some(e / len);
        }
    }
    Ok(on_edge.map_or(Support::Interior, Support::Edge))
}

/// Indices of the counterclockwise convex hull with collinear points removed
/// (Andrew's monotone chain).
fn convex_hull(c: &[Vector2<f64>]) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..c.len()).collect();
    idx.sort_by(|&a, &b| c[a].x.total_cmp(&c[b].x).then(c[a].y.total_cmp(&c[b].y)));
    if idx.len() < 3 {
        return idx;
    }
    let cross = |o: usize, a: usize, b: usize| {
        let (u, v) = (c[a] - c[o], c[b] - c[o]);
        u.x * v.y - u.y * v.x
    };
    let mut hull: Vec<usize> = Vec::with_capacity(2 * idx.len());
    for pass in 0..2 {
        let start = hull.len();
        let iter: Box<dyn Iterator<Item = &usize>> = if pass == 0 {
            Box::new(idx.iter())
        } else {
            Box::new(idx.iter().rev())
        };
        for &p in iter {
            while hull.len() >= start + 2 && cross(hull[hull.len() - 2], hull[hull.len() - 1], p) <= 0.0 {
                hull.pop();
            }
            hull.push(p);
        }
        hull.pop();
    }
    hull
}

/// Solves the 2D dual for points strictly inside the hull.
pub(crate) fn solve_interior(
    c: &[Vector2<f64>],
    log_w: &[f64],
    scale: f64,
    opts: &DualOptions,
) -> Result<DualSolution, DualFailure> {
    let eval = |lambda: &Vector2<f64>, phi: &mut [f64]| -> f64 {
        let mut emax = f64::NEG_INFINITY;
        for (k, ca) in c.iter().enumerate() {
            phi[k] = log_w[k] - lambda.dot(ca);
            emax = emax.max(phi[k]);
        }
        let mut z = 0.0;
        for p in phi.iter_mut() {
            *p = (*p - emax).exp();
            z += *p;
        }
        for p in phi.iter_mut() {
            *p /= z;
        }
        emax + z.ln()
    };
    let moments = |phi: &[f64]| {
        let mut r = Vector2::zeros();
        let mut j = Matrix2::zeros();
        for (p, ca) in phi.iter().zip(c) {
            r -= ca * *p;
            j += ca * ca.transpose() * *p;
        }
        (r, j - r * r.transpose())
    };

    let tol = opts.tolerance * scale;
    let mut lambda = Vector2::zeros();
    let mut phi = vec![0.0; c.len()];
    let mut trial = vec![0.0; c.len()];
    let mut ln_z = eval(&lambda, &mut phi);
    let (mut r, mut j) = moments(&phi);
    let mut it = 0;
    while r.norm() > tol {
        if it == opts.max_iterations {
            return Err(DualFailure::NotConverged {
                residual: r.norm(),
                iterations: it,
            });
        }
        it += 1;
        let step = match j.try_inverse() {
            Some(inv) => -(inv * r),
            None => -r,
        };
        let mut t = 1.0;
        loop {
            let cand = lambda + step * t;
            let f = eval(&cand, &mut trial);
            if f <= ln_z + 4.0 * f64::EPSILON * ln_z.abs().max(1.0) || t < 1e-12 {
                lambda = cand;
                ln_z = f;
                std::mem::swap(&mut phi, &mut trial);
                break;
            }
            t *= 0.5;
        }
        (r, j) = moments(&phi);
    }
    // One extra full Newton step drives the residual to roundoff, which the
    // nodal-integration patch test needs.
    if let Some(inv) = j.try_inverse() {
        let cand = lambda - inv * r;
        let f = eval(&cand, &mut trial);
        let (r2, j2) = moments(&trial);
        if r2.norm() < r.norm() {
            lambda = cand;
            ln_z = f;
            std::mem::swap(&mut phi, &mut trial);
            (r, j) = (r2, j2);
        }
    }
    Ok(DualSolution {
        values: phi,
        state: DualState {
            lambda,
            partition_value: ln_z.exp(),
            gradient: r,
            hessian: j,
            iterations: it,
        },
        support: Support::Interior,
    })
}

/// Solves the one-dimensional dual along a hull edge. Contributors off the
/// edge line get zero weight.
pub(crate) fn solve_edge(
    c: &[Vector2<f64>],
    log_w: &[f64],
    direction: Vector2<f64>,
    scale: f64,
    opts: &DualOptions,
) -> Result<DualSolution, DualFailure> {
    let line_tol = opts.hull_tolerance * scale;
    let on_line: Vec<usize> = (0..c.len())
        .filter(|&k| (direction.x * c[k].y - direction.y * c[k].x).abs() <= line_tol)
        .collect();
    let s: Vec<f64> = on_line.iter().map(|&k| direction.dot(&c[k])).collect();
    let lw: Vec<f64> = on_line.iter().map(|&k| log_w[k]).collect();

    let eval = |lambda: f64, phi: &mut [f64]| -> f64 {
        let mut emax = f64::NEG_INFINITY;
        for k in 0..s.len() {
            phi[k] = lw[k] - lambda * s[k];
            emax = emax.max(phi[k]);
        }
        let mut z = 0.0;
        for p in phi.iter_mut() {
            *p = (*p - emax).exp();
            z += *p;
        }
        for p in phi.iter_mut() {
            *p /= z;
        }
        emax + z.ln()
    };
    let moments = |phi: &[f64]| {
        let r: f64 = -phi.iter().zip(&s).map(|(p, x)| p * x).sum::<f64>();
        let j: f64 = phi.iter().zip(&s).map(|(p, x)| p * x * x).sum::<f64>() - r * r;
        (r, j)
    };

    let tol = opts.tolerance * scale;
    let mut lambda = 0.0;
    let mut phi = vec![0.0; s.len()];
    let mut trial = vec![0.0; s.len()];
    let mut ln_z = eval(lambda, &mut phi);
    let (mut r, mut j) = moments(&phi);
    let mut it = 0;
    while r.abs() > tol {
        if it == opts.max_iterations {
            return Err(DualFailure::NotConverged {
                residual: r.abs(),
                iterations: it,
            });
        }
        it += 1;
        let step = if j > 0.0 { -r / j } else { -r };
        let mut t = 1.0;
        loop {
            let cand = lambda + t * step;
            let f = eval(cand, &mut trial);
            if f <= ln_z + 4.0 * f64::EPSILON * ln_z.abs().max(1.0) || t < 1e-12 {
                lambda = cand;
                ln_z = f;
                std::mem::swap(&mut phi, &mut trial);
                break;
            }
            t *= 0.5;
        }
        (r, j) = moments(&phi);
    }
    if j > 0.0 {
        let cand = lambda - r / j;
        let f = eval(cand, &mut trial);
        let (r2, j2) = moments(&trial);
        if r2.abs() < r.abs() {
            lambda = cand;
            ln_z = f;
            std::mem::swap(&mut phi, &mut trial);
            (r, j) = (r2, j2);
        }
    }

    let mut values = vec![0.0; c.len()];
    for (k, &i) in on_line.iter().enumerate() {
        values[i] = phi[k];
    }
    Ok(DualSolution {
        values,
        state: DualState {
            lambda: direction * lambda,
            partition_value: ln_z.exp(),
            gradient: direction * r,
            hessian: direction * direction.transpose() * j,
            iterations: it,
        },
        support: Support::Edge(direction),
    })
}
