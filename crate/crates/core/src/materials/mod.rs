//! Plane linear elasticity and the one-term Generalized Maxwell solid.
//!
//! Strains are Voigt vectors `(e11, e22, 2 e12)` (engineering shear).

use nalgebra::{Matrix3, Vector3};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum MaterialError {
    #[error("Poisson ratio {nu} is outside the admissible range for {condition:?}")]
    InvalidPoisson { nu: f64, condition: PlaneCondition },
    #[error("plane strain is singular at nu = 0.5 (incompressible)")]
    Incompressible,
    #[error("invalid material parameter: {0}")]
    InvalidParameter(String),
    #[error("time step must be positive, got {0}")]
    NonPositiveTimeStep(f64),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum PlaneCondition {
    PlaneStrain,
    PlaneStress,
}

/// Isotropic moduli with the matching plane constitutive matrix.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ElasticModuli {
    pub youngs: f64,
    pub poisson: f64,
    pub condition: PlaneCondition,
    pub d_matrix: Matrix3<f64>,
}

impl ElasticModuli {
    pub fn new(youngs: f64, poisson: f64, condition: PlaneCondition) -> Result<Self, MaterialError> {
        Ok(Self {
            youngs,
            poisson,
            condition,
            d_matrix: d_matrix(youngs, poisson, condition)?,
        })
    }

    pub fn shear_modulus(&self) -> f64 {
        self.youngs / (2.0 * (1.0 + self.poisson))
    }
}

/// Plane constitutive matrix.
///
/// Plane strain: `E/((1+nu)(1-2nu)) [[1-nu, nu, 0], [nu, 1-nu, 0], [0, 0, (1-2nu)/2]]`.
/// Plane stress: `E/(1-nu^2) [[1, nu, 0], [nu, 1, 0], [0, 0, (1-nu)/2]]`.
pub fn d_matrix(youngs: f64, nu: f64, condition: PlaneCondition) -> Result<Matrix3<f64>, MaterialError> {
    if !(youngs > 0.0) {
        return Err(MaterialError::InvalidParameter(format!("Young's modulus {youngs}")));
    }
    match condition {
        PlaneCondition::PlaneStrain => {
            if nu == 0.5 {
                return Err(MaterialError::Incompressible);
            }
            if !(nu > -1.0 && nu < 0.5) {
                return Err(MaterialError::InvalidPoisson { nu, condition });
            }
            let f = youngs / ((1.0 + nu) * (1.0 - 2.0 * nu));
            Ok(Matrix3::new(
                f * (1.0 - nu),
                f * nu,
                0.0,
                f * nu,
                f * (1.0 - nu),
                0.0,
                0.0,
                0.0,
                f * (1.0 - 2.0 * nu) / 2.0,
            ))
        }
        PlaneCondition::PlaneStress => {
            if !(nu > -1.0 && nu < 1.0) {
                return Err(MaterialError::InvalidPoisson { nu, condition });
            }
            let f = youngs / (1.0 - nu * nu);
            Ok(Matrix3::new(
                f,
                f * nu,
                0.0,
                f * nu,
                f,
                0.0,
                0.0,
                0.0,
                f * (1.0 - nu) / 2.0,
            ))
        }
    }
}

/// `m = (1, 1, 0)`: the Voigt trace selector.
pub fn m_vector() -> Vector3<f64> {
    Vector3::new(1.0, 1.0, 0.0)
}

/// Maps engineering shear strain to tensor shear so that
/// `s = 2G I0 e` is the deviatoric stress.
fn i0() -> Matrix3<f64> {
    Matrix3::from_diagonal(&Vector3::new(1.0, 1.0, 0.5))
}

/// One-term Prony series solid: `G(t) = G (mu0 + mu1 exp(-t/lambda1))`,
/// with a purely elastic bulk response `K`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MaxwellModel {
    pub shear: f64,
    pub bulk: f64,
    pub mu0: f64,
    pub mu1: f64,
    pub lambda1: f64,
}

impl MaxwellModel {
    /// Builds the model from `(E, nu)` with `G = E/(2(1+nu))` and the 3D bulk
    /// modulus `K = E/(3(1-2nu))`.
    pub fn from_youngs(youngs: f64, nu: f64, mu0: f64, mu1: f64, lambda1: f64) -> Result<Self, MaterialError> {
        if !(youngs > 0.0) || !(nu > -1.0 && nu < 0.5) {
            return Err(MaterialError::InvalidParameter(format!("E = {youngs}, nu = {nu}")));
        }
        Self::new(
            youngs / (2.0 * (1.0 + nu)),
            youngs / (3.0 * (1.0 - 2.0 * nu)),
            mu0,
            mu1,
            lambda1,
        )
    }

    pub fn new(shear: f64, bulk: f64, mu0: f64, mu1: f64, lambda1: f64) -> Result<Self, MaterialError> {
        if !(shear > 0.0 && bulk > 0.0 && lambda1 > 0.0) {
            return Err(MaterialError::InvalidParameter(
                "G, K and the relaxation time must be positive".into(),
            ));
        }
        if !(mu0 > 0.0 && mu1 >= 0.0) || ((mu0 + mu1) - 1.0).abs() > 1e-12 {
            return Err(MaterialError::InvalidParameter(format!(
                "Prony weights must satisfy mu0 > 0, mu1 >= 0, mu0 + mu1 = 1 (got {mu0}, {mu1})"
            )));
        }
        Ok(Self {
            shear,
            bulk,
            mu0,
            mu1,
            lambda1,
        })
    }

    /// Relaxation modulus `G(t)`.
    pub fn shear_at(&self, t: f64) -> f64 {
        self.shear * (self.mu0 + self.mu1 * (-t / self.lambda1).exp())
    }

    /// `(lambda1/dt)(1 - exp(-dt/lambda1))`, the weight of the current strain
    /// increment in the internal-variable recursion.
    pub fn viscous_factor(&self, dt: f64) -> f64 {
        let x = dt / self.lambda1;
        -(-x).exp_m1() / x
    }

    fn check_dt(dt: f64) -> Result<(), MaterialError> {
        if dt > 0.0 {
            Ok(())
        } else {
            Err(MaterialError::NonPositiveTimeStep(dt))
        }
    }
}

/// History carried by one integration cell.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct MaxwellState {
    pub strain: Vector3<f64>,
    pub deviatoric: Vector3<f64>,
    pub partial_deviatoric: Vector3<f64>,
    pub stress: Vector3<f64>,
}

/// Deviatoric part of a Voigt strain.
pub fn deviatoric_strain(strain: &Vector3<f64>) -> Vector3<f64> {
    let m = m_vector();
    strain - m * (m.dot(strain) / 3.0)
}

/// Advances the history by one step to total strain `strain`.
///
/// `q_{n+1} = exp(-dt/l) q_n + f (e_{n+1} - e_n)`, with `f` the viscous
/// factor; `s = 2G I0 (mu0 e + mu1 q)` and stress `= s + K m m^T strain`.
pub fn visco_stress_update(
    model: &MaxwellModel,
    state: &MaxwellState,
    strain: &Vector3<f64>,
    dt: f64,
) -> Result<(Vector3<f64>, MaxwellState), MaterialError> {
    MaxwellModel::check_dt(dt)?;
    let e = deviatoric_strain(strain);
    let decay = (-dt / model.lambda1).exp();
    let q = state.partial_deviatoric * decay + (e - state.deviatoric) * model.viscous_factor(dt);
    let s = i0() * (e * model.mu0 + q * model.mu1) * (2.0 * model.shear);
    let m = m_vector();
    let stress = s + m * (model.bulk * m.dot(strain));
    Ok((
        stress,
        MaxwellState {
            strain: *strain,
            deviatoric: e,
            partial_deviatoric: q,
            stress,
        },
    ))
}

/// Consistent tangent of [`visco_stress_update`]:
/// `2G (mu0 + mu1 f) I0 (I - m m^T / 3) + K m m^T`.
pub fn visco_tangent(model: &MaxwellModel, dt: f64) -> Result<Matrix3<f64>, MaterialError> {
    MaxwellModel::check_dt(dt)?;
    let m = m_vector();
    let mmt = m * m.transpose();
    let dev = i0() * (Matrix3::identity() - mmt / 3.0);
    Ok(dev * (2.0 * model.shear * (model.mu0 + model.mu1 * model.viscous_factor(dt))) + mmt * model.bulk)
}

/// `nu_eff(t) = (3K - 2G(t)) / (2 (3K + G(t)))`.
pub fn effective_poisson(model: &MaxwellModel, t: f64) -> f64 {
    let g = model.shear_at(t);
    (3.0 * model.bulk - 2.0 * g) / (2.0 * (3.0 * model.bulk + g))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn plane_stress_patch_material() {
        let d = d_matrix(3e7, 0.3, PlaneCondition::PlaneStress).unwrap();
        assert_relative_eq!(d[(0, 0)], 3e7 / 0.91, max_relative = 1e-15);
        assert!((d[(0, 0)] - 3.2967e7).abs() < 1e3);
        assert_relative_eq!(d[(0, 1)], 0.3 * 3e7 / 0.91, max_relative = 1e-15);
    }

    #[test]
    fn plane_strain_shear_entry() {
        let d = d_matrix(1e7, 0.3, PlaneCondition::PlaneStrain).unwrap();
        assert_relative_eq!(d[(2, 2)], 1e7 / 2.6, max_relative = 1e-14);
        assert!((d[(2, 2)] - 3.8462e6).abs() < 1e2);
    }

    #[test]
    fn zero_poisson_decouples() {
        for c in [PlaneCondition::PlaneStrain, PlaneCondition::PlaneStress] {
            let d = d_matrix(2.0, 0.0, c).unwrap();
            assert_eq!(d[(0, 1)], 0.0);
            assert_eq!(d[(0, 0)], 2.0);
        }
    }

    #[test]
    fn incompressible_plane_strain_rejected() {
        assert_eq!(
            d_matrix(1.0, 0.5, PlaneCondition::PlaneStrain),
            Err(MaterialError::Incompressible)
        );
        assert!(d_matrix(1.0, 0.7, PlaneCondition::PlaneStrain).is_err());
    }

    #[test]
    fn zero_strain_history_gives_zero_stress() {
        let m = MaxwellModel::from_youngs(1000.0, 0.3, 0.7, 0.3, 1.0).unwrap();
        let (s, _) = visco_stress_update(&m, &MaxwellState::default(), &Vector3::zeros(), 1.0).unwrap();
        assert_eq!(s, Vector3::zeros());
    }

    #[test]
    fn scalar_recursion_oracle() {
        // Component-by-component evaluation of the recursion for one step.
        let (e_y, nu, mu0, mu1, lam, dt) = (1000.0, 0.3, 0.7, 0.3, 1.0, 1.0);
        let m = MaxwellModel::from_youngs(e_y, nu, mu0, mu1, lam).unwrap();
        let (s, st) = visco_stress_update(&m, &MaxwellState::default(), &Vector3::new(0.01, 0.0, 0.0), dt).unwrap();
        let g = e_y / (2.0 * (1.0 + nu));
        let k = e_y / (3.0 * (1.0 - 2.0 * nu));
        let tr = 0.01;
        let e11 = 0.01 - tr / 3.0;
        let e22 = -tr / 3.0;
        let factor = (lam / dt) * (1.0 - (-dt / lam).exp());
        let q11 = factor * e11;
        let q22 = factor * e22;
        let s11 = 2.0 * g * (mu0 * e11 + mu1 * q11) + k * tr;
        let s22 = 2.0 * g * (mu0 * e22 + mu1 * q22) + k * tr;
        assert_relative_eq!(s[0], s11, max_relative = 1e-14);
        assert_relative_eq!(s[1], s22, max_relative = 1e-14);
        assert_eq!(s[2], 0.0);
        assert_relative_eq!(st.partial_deviatoric[0], q11, max_relative = 1e-14);
    }

    #[test]
    fn small_step_limit_is_instantaneous_elasticity() {
        let m = MaxwellModel::from_youngs(1000.0, 0.3, 0.3, 0.7, 1.0).unwrap();
        let eps = Vector3::new(1e-3, -4e-4, 2e-4);
        let (s, _) = visco_stress_update(&m, &MaxwellState::default(), &eps, 1e-12).unwrap();
        let d = visco_tangent(&m, 1e-12).unwrap();
        let elastic = d_matrix(1000.0, 0.3, PlaneCondition::PlaneStrain).unwrap();
        assert!((s - elastic * eps).norm() < 1e-9 * s.norm());
        assert!((d - elastic).norm() < 1e-9 * elastic.norm());
    }

    #[test]
    fn large_step_limit_is_long_term_stiffness() {
        let m = MaxwellModel::from_youngs(1000.0, 0.3, 0.7, 0.3, 1.0).unwrap();
        let d = visco_tangent(&m, 1e9).unwrap();
        let mm = m_vector() * m_vector().transpose();
        let expected = i0() * (Matrix3::identity() - mm / 3.0) * (2.0 * m.shear * 0.7) + mm * m.bulk;
        assert!((d - expected).norm() < 1e-6 * expected.norm());
    }

    #[test]
    fn tangent_matches_finite_differences() {
        let m = MaxwellModel::from_youngs(1000.0, 0.3, 0.3, 0.7, 2.0).unwrap();
        let hist = MaxwellState {
            deviatoric: Vector3::new(1e-3, -5e-4, 3e-4),
            partial_deviatoric: Vector3::new(2e-4, 1e-4, -1e-4),
            ..Default::default()
        };
        let eps = Vector3::new(2e-3, 1e-3, -7e-4);
        let dt = 0.37;
        let d = visco_tangent(&m, dt).unwrap();
        let delta = 1e-7;
        for i in 0..3 {
            let mut e = Vector3::zeros();
            e[i] = delta;
            let (sp, _) = visco_stress_update(&m, &hist, &(eps + e), dt).unwrap();
            let (sm, _) = visco_stress_update(&m, &hist, &(eps - e), dt).unwrap();
            let col = (sp - sm) / (2.0 * delta);
            assert!((col - d.column(i)).norm() <= 1e-6 * d.norm());
        }
    }

    #[test]
    fn effective_poisson_values() {
        let at = |mu0: f64, mu1: f64, t: f64| {
            let m = MaxwellModel::from_youngs(1000.0, 0.3, mu0, mu1, 1.0).unwrap();
            effective_poisson(&m, t)
        };
        assert!((at(0.7, 0.3, 0.0) - 0.3).abs() < 1e-14);
        assert!((at(0.7, 0.3, 20.0) - 0.3542).abs() < 5e-5);
        assert!((at(0.3, 0.7, 20.0) - 0.4338).abs() < 5e-5);
        assert!((at(0.01, 0.99, 20.0) - 0.4977).abs() < 5e-5);
    }

    #[test]
    fn rejects_bad_prony_weights_and_time_step() {
        assert!(MaxwellModel::from_youngs(1000.0, 0.3, 0.5, 0.6, 1.0).is_err());
        let m = MaxwellModel::from_youngs(1000.0, 0.3, 0.5, 0.5, 1.0).unwrap();
        assert_eq!(
            visco_tangent(&m, 0.0),
            Err(MaterialError::NonPositiveTimeStep(0.0))
        );
    }
}
