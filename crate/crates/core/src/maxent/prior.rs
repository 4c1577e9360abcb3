use nalgebra::Vector2;

/// Shape of the prior weight attached to each node.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum PriorKind {
    Gaussian,
    Quartic,
}

/// Prior weight function `w_a(x)` with support parameter `gamma`.
///
/// With `c = x_a - x` and nodal spacing `h`:
/// * Gaussian: `w = exp(-gamma |c|^2 / h^2)`, truncated where `w < cutoff`.
/// * Quartic: `w = 1 - 6q^2 + 8q^3 - 3q^4 = (1 - q)^3 (1 + 3q)` with
///   `q = |c| / (gamma h)`, zero for `q >= 1`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Prior {
    pub kind: PriorKind,
    pub gamma: f64,
    /// Truncation level of the Gaussian weight.
    pub gaussian_cutoff: f64,
}

impl Prior {
    pub const DEFAULT_GAMMA: f64 = 2.0;
    pub const DEFAULT_GAUSSIAN_CUTOFF: f64 = 1e-10;

    pub fn gaussian(gamma: f64) -> Self {
        Self {
            kind: PriorKind::Gaussian,
            gamma,
            gaussian_cutoff: Self::DEFAULT_GAUSSIAN_CUTOFF,
        }
    }

    pub fn quartic(gamma: f64) -> Self {
        Self {
            kind: PriorKind::Quartic,
            gamma,
            gaussian_cutoff: Self::DEFAULT_GAUSSIAN_CUTOFF,
        }
    }

    /// Radius beyond which a node with spacing `h` does not contribute.
    pub fn cutoff_radius(&self, h: f64) -> f64 {
        match self.kind {
            PriorKind::Gaussian => h * (-self.gaussian_cutoff.ln() / self.gamma).sqrt(),
            PriorKind::Quartic => self.gamma * h,
        }
    }

    /// Whether a node at squared distance `dist2` contributes.
    pub fn contributes(&self, dist2: f64, h: f64) -> bool {
        match self.kind {
            PriorKind::Gaussian => self.gamma * dist2 / (h * h) <= -self.gaussian_cutoff.ln(),
            PriorKind::Quartic => dist2 < (self.gamma * h).powi(2),
        }
    }

    pub fn weight(&self, c: &Vector2<f64>, h: f64) -> f64 {
        match self.kind {
            PriorKind::Gaussian => (-self.gamma * c.norm_squared() / (h * h)).exp(),
            PriorKind::Quartic => {
                let q = c.norm() / (self.gamma * h);
                if q >= 1.0 {
                    0.0
                } else {
                    (1.0 - q).powi(3) * (1.0 + 3.0 * q)
                }
            }
        }
    }

    /// `ln w`, finite on the open support.
    pub fn log_weight(&self, c: &Vector2<f64>, h: f64) -> f64 {
        match self.kind {
            PriorKind::Gaussian => -self.gamma * c.norm_squared() / (h * h),
            PriorKind::Quartic => {
                let q = c.norm() / (self.gamma * h);
                3.0 * (1.0 - q).ln() + (3.0 * q).ln_1p()
            }
        }
    }

    /// Gradient of `ln w_a` with respect to the evaluation point `x`.
    pub fn log_weight_gradient(&self, c: &Vector2<f64>, h: f64) -> Vector2<f64> {
        match self.kind {
            PriorKind::Gaussian => c * (2.0 * self.gamma / (h * h)),
            PriorKind::Quartic => {
                let gh = self.gamma * h;
                let q = c.norm() / gh;
                c * (12.0 / (gh * gh * (1.0 - q) * (1.0 + 3.0 * q)))
            }
        }
    }
}
