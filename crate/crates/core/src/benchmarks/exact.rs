//! Closed-form displacement, gradient and stress fields.
//!
//! Gradients are `grad[(i, j)] = d u_i / d x_j`; stresses are Voigt
//! `(s11, s22, s12)`.

use nalgebra::{Matrix2, Matrix3, Point2, Vector2, Vector3};

use crate::materials::PlaneCondition;

/// Linear field of the patch test: a uniaxial stress `s22 = 1` in plane
/// stress.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PatchField {
    pub youngs: f64,
    pub poisson: f64,
}

impl PatchField {
    pub fn displacement(&self, x: &Point2<f64>) -> Vector2<f64> {
        Vector2::new(self.poisson * (1.0 - x.x) / self.youngs, x.y / self.youngs)
    }

    pub fn gradient(&self, _x: &Point2<f64>) -> Matrix2<f64> {
        Matrix2::new(-self.poisson / self.youngs, 0.0, 0.0, 1.0 / self.youngs)
    }

    pub fn stress(&self, _x: &Point2<f64>) -> Vector3<f64> {
        Vector3::new(0.0, 1.0, 0.0)
    }
}

/// End-loaded cantilever with a parabolic shear traction, on
/// `[0, L] x [-D/2, D/2]`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CantileverField {
    pub load: f64,
    pub youngs: f64,
    pub poisson: f64,
    pub length: f64,
    pub depth: f64,
    pub condition: PlaneCondition,
}

impl CantileverField {
    /// Effective `(E, nu)` of the plane problem.
    fn effective(&self) -> (f64, f64) {
        match self.condition {
            PlaneCondition::PlaneStress => (self.youngs, self.poisson),
            PlaneCondition::PlaneStrain => (
                self.youngs / (1.0 - self.poisson * self.poisson),
                self.poisson / (1.0 - self.poisson),
            ),
        }
    }

    pub fn inertia(&self) -> f64 {
        self.depth.powi(3) / 12.0
    }

    fn scale(&self) -> f64 {
        let (e, _) = self.effective();
        self.load / (6.0 * e * self.inertia())
    }

    pub fn displacement(&self, p: &Point2<f64>) -> Vector2<f64> {
        let (_, nu) = self.effective();
        let (x, y, l, d) = (p.x, p.y, self.length, self.depth);
        let c = self.scale();
        Vector2::new(
            -c * y * ((6.0 * l - 3.0 * x) * x + (2.0 + nu) * y * y - 1.5 * d * d * (1.0 + nu)),
            c * (3.0 * nu * y * y * (l - x) + (3.0 * l - x) * x * x),
        )
    }

    pub fn gradient(&self, p: &Point2<f64>) -> Matrix2<f64> {
        let (_, nu) = self.effective();
        let (x, y, l, d) = (p.x, p.y, self.length, self.depth);
        let c = self.scale();
        Matrix2::new(
            -c * y * (6.0 * l - 6.0 * x),
            -c * ((6.0 * l - 3.0 * x) * x + 3.0 * (2.0 + nu) * y * y - 1.5 * d * d * (1.0 + nu)),
            c * (-3.0 * nu * y * y + 6.0 * l * x - 3.0 * x * x),
            c * 6.0 * nu * y * (l - x),
        )
    }

    pub fn stress(&self, p: &Point2<f64>) -> Vector3<f64> {
        let i = self.inertia();
        Vector3::new(
            -self.load * (self.length - p.x) * p.y / i,
            0.0,
            self.load / (2.0 * i) * (self.depth * self.depth / 4.0 - p.y * p.y),
        )
    }
}

/// Infinite plate with a circular hole of radius `r0` under remote uniaxial
/// tension `T` along `x`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PlateHoleField {
    pub traction: f64,
    pub hole_radius: f64,
    pub youngs: f64,
    pub poisson: f64,
}

impl PlateHoleField {
    fn shear(&self) -> f64 {
        self.youngs / (2.0 * (1.0 + self.poisson))
    }

    /// Plane-stress Kolosov constant.
    fn kappa(&self) -> f64 {
        (3.0 - self.poisson) / (1.0 + self.poisson)
    }

    pub fn displacement(&self, p: &Point2<f64>) -> Vector2<f64> {
        let (r, t) = (p.coords.norm(), p.y.atan2(p.x));
        let (k, a) = (self.kappa(), self.hole_radius);
        let c = self.traction / (4.0 * self.shear());
        let (a2, a4) = (a * a / r, a.powi(4) / r.powi(3));
        Vector2::new(
            c * (0.5 * (k + 1.0) * r * t.cos() + a2 * ((k + 1.0) * t.cos() + (3.0 * t).cos()) - a4 * (3.0 * t).cos()),
            c * (0.5 * (k - 3.0) * r * t.sin() + a2 * ((1.0 - k) * t.sin() + (3.0 * t).sin()) - a4 * (3.0 * t).sin()),
        )
    }

    pub fn gradient(&self, p: &Point2<f64>) -> Matrix2<f64> {
        let (r, t) = (p.coords.norm(), p.y.atan2(p.x));
        let (k, a) = (self.kappa(), self.hole_radius);
        let c = self.traction / (4.0 * self.shear());
        let (s1, c1, s3, c3) = (t.sin(), t.cos(), (3.0 * t).sin(), (3.0 * t).cos());
        let (q2, q4) = (a * a / (r * r), a.powi(4) / r.powi(4));
        // Radial derivative and (1/r) times the angular derivative.
        let dr1 = c * (0.5 * (k + 1.0) * c1 - q2 * ((k + 1.0) * c1 + c3) + 3.0 * q4 * c3);
        let dt1 = c * (-0.5 * (k + 1.0) * s1 + q2 * (-(k + 1.0) * s1 - 3.0 * s3) + 3.0 * q4 * s3);
        let dr2 = c * (0.5 * (k - 3.0) * s1 - q2 * ((1.0 - k) * s1 + s3) + 3.0 * q4 * s3);
        let dt2 = c * (0.5 * (k - 3.0) * c1 + q2 * ((1.0 - k) * c1 + 3.0 * c3) - 3.0 * q4 * c3);
        Matrix2::new(
            c1 * dr1 - s1 * dt1,
            s1 * dr1 + c1 * dt1,
            c1 * dr2 - s1 * dt2,
            s1 * dr2 + c1 * dt2,
        )
    }

    pub fn stress(&self, p: &Point2<f64>) -> Vector3<f64> {
        let (r, t) = (p.coords.norm(), p.y.atan2(p.x));
        let q2 = (self.hole_radius / r).powi(2);
        let q4 = 1.5 * q2 * q2;
        let tt = self.traction;
        Vector3::new(
            tt * (1.0 - q2 * (1.5 * (2.0 * t).cos() + (4.0 * t).cos()) + q4 * (4.0 * t).cos()),
            -tt * (q2 * (0.5 * (2.0 * t).cos() - (4.0 * t).cos()) + q4 * (4.0 * t).cos()),
            -tt * (q2 * (0.5 * (2.0 * t).sin() + (4.0 * t).sin()) - q4 * (4.0 * t).sin()),
        )
    }
}

/// Smooth static field `u = (sin x cos y, e^(x+y))` with the body force that
/// balances it for a given elasticity matrix.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ManufacturedStaticField {
    pub d: Matrix3<f64>,
}

impl ManufacturedStaticField {
    pub fn displacement(&self, p: &Point2<f64>) -> Vector2<f64> {
        Vector2::new(p.x.sin() * p.y.cos(), (p.x + p.y).exp())
    }

    pub fn gradient(&self, p: &Point2<f64>) -> Matrix2<f64> {
        let e = (p.x + p.y).exp();
        Matrix2::new(p.x.cos() * p.y.cos(), -p.x.sin() * p.y.sin(), e, e)
    }

    pub fn stress(&self, p: &Point2<f64>) -> Vector3<f64> {
        let g = self.gradient(p);
        self.d * Vector3::new(g[(0, 0)], g[(1, 1)], g[(0, 1)] + g[(1, 0)])
    }

    /// `b = -div(sigma)`.
    pub fn body_force(&self, p: &Point2<f64>) -> Vector2<f64> {
        let d = &self.d;
        let e = (p.x + p.y).exp();
        let sc = p.x.sin() * p.y.cos();
        let cs = p.x.cos() * p.y.sin();
        Vector2::new(
            d[(0, 0)] * sc - d[(0, 1)] * e - d[(2, 2)] * (e - sc),
            d[(1, 0)] * cs - d[(1, 1)] * e + d[(2, 2)] * (cs - e),
        )
    }
}

/// Time-dependent field `u = g(t) U(x)` on a square of side `L` centred at
/// the origin, with `g(t) = alpha (1 - exp(-beta t^2 / 2))`. Plane stress.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ManufacturedDynamicField {
    pub youngs: f64,
    pub poisson: f64,
    pub density: f64,
    pub side: f64,
    pub alpha: f64,
    pub beta: f64,
}

impl ManufacturedDynamicField {
    pub fn g(&self, t: f64) -> f64 {
        -self.alpha * (-0.5 * self.beta * t * t).exp_m1()
    }

    pub fn g_ddot(&self, t: f64) -> f64 {
        let bt2 = self.beta * t * t;
        self.alpha * self.beta * (-0.5 * bt2).exp() * (1.0 - bt2)
    }

    /// Spatial shape `U(x)`.
    pub fn shape(&self, p: &Point2<f64>) -> Vector2<f64> {
        let (nu, l2) = (self.poisson, self.side * self.side);
        Vector2::new(
            p.x * (-(1.0 + nu) * l2 + nu * p.y * p.y + p.x * p.x / 3.0),
            p.y * ((1.0 + nu) * l2 - nu * p.x * p.x - p.y * p.y / 3.0),
        )
    }

    pub fn shape_gradient(&self, p: &Point2<f64>) -> Matrix2<f64> {
        let (nu, l2) = (self.poisson, self.side * self.side);
        Matrix2::new(
            -(1.0 + nu) * l2 + nu * p.y * p.y + p.x * p.x,
            2.0 * nu * p.x * p.y,
            -2.0 * nu * p.x * p.y,
            (1.0 + nu) * l2 - nu * p.x * p.x - p.y * p.y,
        )
    }

    pub fn displacement(&self, p: &Point2<f64>, t: f64) -> Vector2<f64> {
        self.shape(p) * self.g(t)
    }

    pub fn gradient(&self, p: &Point2<f64>, t: f64) -> Matrix2<f64> {
        self.shape_gradient(p) * self.g(t)
    }

    pub fn acceleration(&self, p: &Point2<f64>, t: f64) -> Vector2<f64> {
        self.shape(p) * self.g_ddot(t)
    }

    pub fn stress(&self, p: &Point2<f64>, t: f64) -> Vector3<f64> {
        let l2 = self.side * self.side;
        Vector3::new(p.x * p.x - l2, l2 - p.y * p.y, 0.0) * (self.youngs * self.g(t))
    }

    /// Body force split as `g(t) b_static(x) + g''(t) b_inertial(x)`.
    pub fn body_force_parts(&self, p: &Point2<f64>) -> (Vector2<f64>, Vector2<f64>) {
        (
            Vector2::new(-2.0 * self.youngs * p.x, 2.0 * self.youngs * p.y),
            self.shape(p) * self.density,
        )
    }

    pub fn body_force(&self, p: &Point2<f64>, t: f64) -> Vector2<f64> {
        let (s, i) = self.body_force_parts(p);
        s * self.g(t) + i * self.g_ddot(t)
    }
}

/// Long-term radial displacement of a thick cylinder under internal
/// pressure, plane strain: `u = A r + B / r` with the given shear and bulk
/// moduli.
pub fn lame_radial_displacement(r: f64, inner: f64, outer: f64, pressure: f64, shear: f64, bulk: f64) -> f64 {
    let b = pressure / (2.0 * shear * (1.0 / (inner * inner) - 1.0 / (outer * outer)));
    let a = shear * b / ((bulk + shear / 3.0) * outer * outer);
    a * r + b / r
}
