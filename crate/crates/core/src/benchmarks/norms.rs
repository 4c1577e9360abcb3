use nalgebra::{Matrix2, Point2, Vector2};
use rayon::prelude::*;

use crate::assembly::{CsrMatrix, GaussRule};
use crate::geometry::BackgroundMesh;
use crate::maxent::{MaxentBasis, MaxentError};

/// Relative errors of a discrete solution against an exact field.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ErrorNorms {
    pub l2: f64,
    /// Relative error in the `H^1` seminorm (full displacement gradient).
    pub h1: f64,
}

/// Relative `L^2` and `H^1`-seminorm errors, integrated with the 3-point
/// rule on every background triangle. The exact norms use the same rule.
pub fn error_norms<U, G>(
    d: &[f64],
    exact_u: U,
    exact_grad: G,
    mesh: &BackgroundMesh,
    basis: &MaxentBasis,
) -> Result<ErrorNorms, MaxentError>
where
    U: Fn(&Point2<f64>) -> Vector2<f64> + Sync,
    G: Fn(&Point2<f64>) -> Matrix2<f64> + Sync,
{
    let sums = (0..mesh.triangles().len())
        .into_par_iter()
        .map(|t| {
            let mut acc = [0.0; 4];
            for (p, w) in GaussRule::Three.on_triangle(&mesh.triangle_vertices(t)) {
                let e = basis.evaluate_with_gradients(&p)?;
                let grads = e.gradients.as_ref().expect("gradients requested");
                let mut uh = Vector2::zeros();
                let mut gh = Matrix2::zeros();
                for ((&a, &phi), g) in e.contributors.iter().zip(&e.values).zip(grads) {
                    let da = Vector2::new(d[2 * a], d[2 * a + 1]);
                    uh += da * phi;
                    gh += da * g.transpose();
                }
                let (u, gu) = (exact_u(&p), exact_grad(&p));
                acc[0] += w * (uh - u).norm_squared();
                acc[1] += w * u.norm_squared();
                acc[2] += w * (gh - gu).norm_squared();
                acc[3] += w * gu.norm_squared();
            }
            Ok(acc)
        })
        .collect::<Result<Vec<_>, MaxentError>>()?;
    let mut total = [0.0; 4];
    for s in &sums {
        for k in 0..4 {
            total[k] += s[k];
        }
    }
    Ok(ErrorNorms {
        l2: (total[0] / total[1]).sqrt(),
        h1: (total[2] / total[3]).sqrt(),
    })
}

/// `U = d^T K d / 2`.
pub fn strain_energy(d: &[f64], k: &CsrMatrix) -> f64 {
    0.5 * k.matvec(d).iter().zip(d).map(|(a, b)| a * b).sum::<f64>()
}

/// Least-squares slope of `log(error)` against `log(h)`; `None` for fewer
/// than three points or non-positive data.
pub fn convergence_rate(h: &[f64], error: &[f64]) -> Option<f64> {
    if h.len() != error.len() || h.len() < 3 || h.iter().chain(error).any(|v| !(*v > 0.0)) {
        return None;
    }
    let x: Vec<f64> = h.iter().map(|v| v.ln()).collect();
    let y: Vec<f64> = error.iter().map(|v| v.ln()).collect();
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxy: f64 = x.iter().zip(&y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = x.iter().map(|a| (a - mx) * (a - mx)).sum();
    Some(sxy / sxx)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{build_nodal_cells, generate_structured_mesh, DomainSpec};
    use crate::maxent::{DualOptions, Prior};
    use nalgebra::DMatrix;

    #[test]
    fn rate_of_synthetic_power_law() {
        let h = [0.5, 0.25, 0.125, 0.0625];
        let e: Vec<f64> = h.iter().map(|x| 3.0 * x * x).collect();
        assert!((convergence_rate(&h, &e).unwrap() - 2.0).abs() < 1e-12);
        assert_eq!(convergence_rate(&h[..2], &e[..2]), None);
    }

    #[test]
    fn energy_of_zero_and_of_small_system() {
        let k = CsrMatrix::from_dense(&DMatrix::from_row_slice(2, 2, &[2.0, -1.0, -1.0, 3.0]));
        assert_eq!(strain_energy(&[0.0, 0.0], &k), 0.0);
        // (2 - 2 * 1 * 2 + 3 * 4) / 2
        assert_eq!(strain_energy(&[1.0, 2.0], &k), 5.0);
    }

    #[test]
    fn interpolated_linear_field_has_no_error() {
        let mesh = generate_structured_mesh(&DomainSpec::unit_square(), 4, Some(5)).unwrap();
        let p = build_nodal_cells(&mesh).unwrap();
        let b = MaxentBasis::new(mesh.nodes().to_vec(), p.h_a, Prior::gaussian(2.0), DualOptions::default()).unwrap();
        let u = |x: &Point2<f64>| Vector2::new(1.0 + 2.0 * x.x - x.y, 0.5 * x.x + 3.0 * x.y);
        let g = |_: &Point2<f64>| Matrix2::new(2.0, -1.0, 0.5, 3.0);
        let d: Vec<f64> = mesh.nodes().iter().flat_map(|x| {
            let v = u(x);
            [v.x, v.y]
        }).collect();
        let e = error_norms(&d, u, g, &mesh, &b).unwrap();
        assert!(e.l2 < 1e-12 && e.h1 < 1e-12);
    }
}
