//! Linear, eigenvalue, transient and viscoelastic solvers over assembled
//! systems.

mod eigen;
mod linear;
mod newmark;
mod visco;

pub use eigen::{count_rigid_modes, eigen_smallest, EigenPair, RIGID_MODE_THRESHOLD};
pub use linear::{linear_solve, solve_reduced, SparseCholesky};
pub use newmark::{DirichletSchedule, Newmark, NewmarkState, TimeHistory};
pub use visco::{viscoelastic_solve, ViscoHistory, ViscoProblem};

use thiserror::Error;

use crate::assembly::AssemblyError;
use crate::materials::MaterialError;

/// Tolerances and time-stepping parameters.
#[derive(Clone, Debug, PartialEq)]
pub struct SolveConfig {
    /// Bound on `|K d - f| / |f|` after a direct solve.
    pub linear_tolerance: f64,
    pub max_newton_iters: usize,
    /// Relative Newton tolerance on `|R| / |f_ext|`.
    pub newton_tolerance: f64,
    /// Absolute Newton tolerance, used when the external force vanishes.
    pub newton_abs_tolerance: f64,
    pub newmark_beta: f64,
    pub newmark_gamma: f64,
    pub dt: f64,
    pub n_steps: usize,
}

impl Default for SolveConfig {
    fn default() -> Self {
        Self {
            linear_tolerance: 1e-12,
            max_newton_iters: 20,
            newton_tolerance: 1e-10,
            newton_abs_tolerance: 1e-14,
            newmark_beta: 0.25,
            newmark_gamma: 0.5,
            dt: 1.0,
            n_steps: 20,
        }
    }
}

impl SolveConfig {
    pub fn validate(&self) -> Result<(), SolverError> {
        let positive = [
            ("linear_tolerance", self.linear_tolerance),
            ("newton_tolerance", self.newton_tolerance),
            ("newton_abs_tolerance", self.newton_abs_tolerance),
            ("newmark_beta", self.newmark_beta),
            ("newmark_gamma", self.newmark_gamma),
            ("dt", self.dt),
        ];
        for (name, v) in positive {
            if !(v > 0.0 && v.is_finite()) {
                return Err(SolverError::InvalidInput(format!("{name} must be positive, got {v}")));
            }
        }
        if self.max_newton_iters == 0 {
            return Err(SolverError::InvalidInput("max_newton_iters must be at least 1".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SolverError {
    #[error("matrix is singular or not positive definite: {0}")]
    NotPositiveDefinite(String),
    #[error("relative residual {residual:e} exceeds tolerance {tolerance:e}")]
    Residual { residual: f64, tolerance: f64 },
    #[error("eigenpair {index} has residual {residual:e}")]
    EigenResidual { index: usize, residual: f64 },
    #[error("Newton diverged at step {step} (iteration {iteration}, residual {residual:e})")]
    NewtonDivergence { step: usize, iteration: usize, residual: f64 },
    #[error("Newton did not converge at step {step}: residual {residual:e} after {iterations} iterations")]
    NewtonNotConverged { step: usize, iterations: usize, residual: f64 },
    #[error("invalid solver input: {0}")]
    InvalidInput(String),
    #[error(transparent)]
    Assembly(#[from] AssemblyError),
    #[error(transparent)]
    Material(#[from] MaterialError),
}

pub(crate) fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}
