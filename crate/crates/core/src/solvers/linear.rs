use faer::linalg::solvers::Solve;
use faer::sparse::linalg::solvers::Llt;
use faer::sparse::{SparseColMat, Triplet};
use faer::{Mat, Side};

use super::{norm, SolverError};
use crate::assembly::{CsrMatrix, ReducedSystem};

/// Sparse Cholesky factorization of a symmetric positive definite matrix.
pub struct SparseCholesky {
    n: usize,
    llt: Option<Llt<usize, f64>>,
}

impl std::fmt::Debug for SparseCholesky {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("SparseCholesky").field("n", &self.n).finish()
    }
}

impl SparseCholesky {
    pub fn new(k: &CsrMatrix) -> Result<Self, SolverError> {
        let n = k.nrows();
        if k.ncols() != n {
            return Err(SolverError::InvalidInput(format!("matrix is {}x{}", n, k.ncols())));
        }
        if n == 0 {
            return Ok(Self { n, llt: None });
        }
        let mut triplets = Vec::with_capacity(k.nnz() / 2 + n);
        for i in 0..n {
            let (cols, vals) = k.row(i);
            for (&j, &v) in cols.iter().zip(vals) {
                if j <= i {
                    triplets.push(Triplet::new(i, j, v));
                }
            }
        }
        let a = SparseColMat::<usize, f64>::try_new_from_triplets(n, n, &triplets)
            .map_err(|e| SolverError::InvalidInput(format!("{e:?}")))?;
        let llt = a
            .sp_cholesky(Side::Lower)
            .map_err(|e| SolverError::NotPositiveDefinite(format!("{e:?}")))?;
        Ok(Self { n, llt: Some(llt) })
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn solve(&self, rhs: &[f64]) -> Vec<f64> {
        assert_eq!(rhs.len(), self.n, "right-hand side length");
        match &self.llt {
            None => Vec::new(),
            Some(llt) => {
                let b = Mat::from_fn(self.n, 1, |i, _| rhs[i]);
                let x = llt.solve(&b);
                (0..self.n).map(|i| x[(i, 0)]).collect()
            }
        }
    }
}

fn check_residual(k: &CsrMatrix, x: &[f64], f: &[f64], tolerance: f64) -> Result<(), SolverError> {
    let fnorm = norm(f);
    if fnorm == 0.0 {
        return if x.iter().all(|v| *v == 0.0) {
            Ok(())
        } else {
            Err(SolverError::Residual {
                residual: f64::INFINITY,
                tolerance,
            })
        };
    }
    let kx = k.matvec(x);
    let r: Vec<f64> = kx.iter().zip(f).map(|(a, b)| a - b).collect();
    let residual = norm(&r) / fnorm;
    if residual.is_finite() && residual <= tolerance {
        Ok(())
    } else {
        Err(SolverError::Residual { residual, tolerance })
    }
}

/// Solves `K d = f` by sparse Cholesky, then checks the relative residual.
pub fn linear_solve(k: &CsrMatrix, f: &[f64], tolerance: f64) -> Result<Vec<f64>, SolverError> {
    let chol = SparseCholesky::new(k)?;
    let x = chol.solve(f);
    check_residual(k, &x, f, tolerance)?;
    Ok(x)
}

/// Solves a Dirichlet-reduced system and returns the full dof vector.
pub fn solve_reduced(system: &ReducedSystem, tolerance: f64) -> Result<Vec<f64>, SolverError> {
    let x = linear_solve(&system.matrix, &system.rhs, tolerance)?;
    Ok(system.expand(&x))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::assembly::{apply_dirichlet, Constraints};
    use nalgebra::{DMatrix, DVector};

    #[test]
    fn identity_returns_rhs() {
        let f = vec![1.0, -2.0, 3.5];
        assert_eq!(linear_solve(&CsrMatrix::identity(3), &f, 1e-14).unwrap(), f);
    }

    #[test]
    fn matches_dense_elimination() {
        let a = DMatrix::from_fn(6, 6, |i, j| 1.0 / (1.0 + i as f64 + j as f64)) + DMatrix::identity(6, 6);
        let f: Vec<f64> = (0..6).map(|i| (i as f64).sin()).collect();
        let x = linear_solve(&CsrMatrix::from_dense(&a), &f, 1e-13).unwrap();
        let oracle = a.lu().solve(&DVector::from_vec(f)).unwrap();
        for (p, q) in x.iter().zip(oracle.iter()) {
            assert!((p - q).abs() < 1e-14);
        }
    }

    #[test]
    fn singular_matrix_is_reported() {
        // A floating two-node spring.
        let a = DMatrix::from_row_slice(2, 2, &[1.0, -1.0, -1.0, 1.0]);
        assert!(linear_solve(&CsrMatrix::from_dense(&a), &[1.0, -1.0], 1e-12).is_err());
        let neg = DMatrix::from_row_slice(2, 2, &[1.0, 0.0, 0.0, -1.0]);
        assert!(matches!(
            linear_solve(&CsrMatrix::from_dense(&neg), &[1.0, 1.0], 1e-12),
            Err(SolverError::NotPositiveDefinite(_))
        ));
    }

    #[test]
    fn fully_constrained_system_returns_prescribed_values() {
        let k = CsrMatrix::identity(2);
        let mut c = Constraints::new();
        c.fix(0, 0.5).unwrap();
        c.fix(1, -1.5).unwrap();
        let r = apply_dirichlet(&k, &[0.0, 0.0], &c).unwrap();
        assert_eq!(r.matrix.nrows(), 0);
        assert_eq!(solve_reduced(&r, 1e-12).unwrap(), vec![0.5, -1.5]);
    }
}
