use nalgebra::{DVector, SymmetricEigen};

use super::SolverError;
use crate::assembly::CsrMatrix;

/// Eigenvalues at or below this fraction of the largest are counted as
/// rigid-body (zero-energy) modes.
pub const RIGID_MODE_THRESHOLD: f64 = 1e-10;

#[derive(Clone, Debug, PartialEq)]
pub struct EigenPair {
    pub value: f64,
    /// Unit Euclidean norm, largest-magnitude entry positive.
    pub vector: DVector<f64>,
}

/// The `count` smallest eigenpairs of a symmetric matrix, ascending, plus
/// the largest eigenvalue.
///
/// Uses a dense symmetric eigensolve; intended for the desk-scale stability
/// studies. Each pair is checked against `|K v - lambda v| <= 1e-8 |K|`.
pub fn eigen_smallest(k: &CsrMatrix, count: usize) -> Result<(Vec<EigenPair>, f64), SolverError> {
    let n = k.nrows();
    if count > n || k.ncols() != n {
        return Err(SolverError::InvalidInput(format!("{count} eigenpairs requested from a {n}x{} matrix", k.ncols())));
    }
    if n == 0 {
        return Ok((Vec::new(), 0.0));
    }
    let dense = k.to_dense();
    let eig = SymmetricEigen::new(dense.clone());
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let knorm = eig.eigenvalues.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
    let largest = eig.eigenvalues[order[n - 1]];
    let mut out = Vec::with_capacity(count);
    for (index, &i) in order.iter().take(count).enumerate() {
        let mut v = eig.eigenvectors.column(i).into_owned();
        v /= v.norm();
        let imax = v.iamax();
        if v[imax] < 0.0 {
            v = -v;
        }
        let value = eig.eigenvalues[i];
        let residual = (&dense * &v - &v * value).norm();
        if residual > 1e-8 * knorm {
            return Err(SolverError::EigenResidual { index, residual });
        }
        out.push(EigenPair { value, vector: v });
    }
    Ok((out, largest))
}

/// Number of eigenvalues at or below `RIGID_MODE_THRESHOLD * largest`.
pub fn count_rigid_modes(values: &[f64], largest: f64) -> usize {
    values.iter().filter(|&&l| l <= RIGID_MODE_THRESHOLD * largest).count()
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::DMatrix;

    #[test]
    fn diagonal_matrix_is_exact() {
        let n = 7;
        let d = DMatrix::from_diagonal(&DVector::from_fn(n, |i, _| (n - i) as f64));
        let (pairs, largest) = eigen_smallest(&CsrMatrix::from_dense(&d), n).unwrap();
        assert_eq!(largest, n as f64);
        for (k, p) in pairs.iter().enumerate() {
            assert_eq!(p.value, (k + 1) as f64);
            assert_eq!(p.vector[n - 1 - k], 1.0);
            assert_eq!(p.vector.norm(), 1.0);
        }
    }

    #[test]
    fn rigid_modes_are_counted_and_sign_is_fixed() {
        // Free-free chain of 4 unit springs: one zero mode.
        let mut a = DMatrix::zeros(4, 4);
        for e in 0..3 {
            a[(e, e)] += 1.0;
            a[(e + 1, e + 1)] += 1.0;
            a[(e, e + 1)] -= 1.0;
            a[(e + 1, e)] -= 1.0;
        }
        let (pairs, largest) = eigen_smallest(&CsrMatrix::from_dense(&a), 4).unwrap();
        let values: Vec<f64> = pairs.iter().map(|p| p.value).collect();
        assert_eq!(count_rigid_modes(&values, largest), 1);
        for p in &pairs {
            assert!(p.vector[p.vector.iamax()] > 0.0);
        }
        assert!(eigen_smallest(&CsrMatrix::from_dense(&a), 5).is_err());
    }
}
