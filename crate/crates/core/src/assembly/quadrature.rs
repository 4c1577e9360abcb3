use nalgebra::Point2;

/// Symmetric Gauss rules on triangles (Dunavant). Weights sum to one and
/// multiply the triangle area.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum GaussRule {
    /// Centroid, exact for degree 1.
    One,
    /// Exact for degree 2.
    Three,
    /// Exact for degree 4.
    Six,
    /// Exact for degree 6.
    Twelve,
}

impl GaussRule {
    pub fn from_points(n: usize) -> Option<Self> {
        match n {
            1 => Some(Self::One),
            3 => Some(Self::Three),
            6 => Some(Self::Six),
            12 => Some(Self::Twelve),
            _ => None,
        }
    }

    pub fn points(self) -> usize {
        match self {
            Self::One => 1,
            Self::Three => 3,
            Self::Six => 6,
            Self::Twelve => 12,
        }
    }

    /// Barycentric coordinates and weights.
    pub fn barycentric(self) -> Vec<([f64; 3], f64)> {
        let mut out = Vec::with_capacity(self.points());
        let mut orbit3 = |a: f64, w: f64| {
            let b = 1.0 - 2.0 * a;
            out.push(([b, a, a], w));
            out.push(([a, b, a], w));
            out.push(([a, a, b], w));
        };
        match self {
            Self::One => return vec![([1.0 / 3.0; 3], 1.0)],
            Self::Three => orbit3(1.0 / 6.0, 1.0 / 3.0),
            Self::Six => {
                orbit3(0.445_948_490_915_965, 0.223_381_589_678_011);
                orbit3(0.091_576_213_509_771, 0.109_951_743_655_322);
            }
            Self::Twelve => {
                orbit3(0.249_286_745_170_910, 0.116_786_275_726_379);
                orbit3(0.063_089_014_491_502, 0.050_844_906_370_207);
                let (a, b, w) = (0.053_145_049_844_817, 0.310_352_451_033_784, 0.082_851_075_618_374);
                let c = 1.0 - a - b;
                for p in [[a, b, c], [a, c, b], [b, a, c], [b, c, a], [c, a, b], [c, b, a]] {
                    out.push((p, w));
                }
            }
        }
        out
    }

    /// Physical points and weights (already multiplied by the area).
    pub fn on_triangle(self, v: &[Point2<f64>; 3]) -> Vec<(Point2<f64>, f64)> {
        let area = crate::geometry::signed_area(&v[0], &v[1], &v[2]);
        self.barycentric()
            .into_iter()
            .map(|(l, w)| {
                let p = v[0].coords * l[0] + v[1].coords * l[1] + v[2].coords * l[2];
                (Point2::from(p), w * area)
            })
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn factorial(n: u32) -> f64 {
        (1..=n).map(f64::from).product()
    }

    /// Exact integral of x^i y^j over the reference triangle (0,0),(1,0),(0,1).
    fn monomial(i: u32, j: u32) -> f64 {
        factorial(i) * factorial(j) / factorial(i + j + 2)
    }

    #[test]
    fn rules_integrate_to_their_degree() {
        let tri = [Point2::new(0.0, 0.0), Point2::new(1.0, 0.0), Point2::new(0.0, 1.0)];
        for (rule, degree) in [
            (GaussRule::One, 1),
            (GaussRule::Three, 2),
            (GaussRule::Six, 4),
            (GaussRule::Twelve, 6),
        ] {
            let pts = rule.on_triangle(&tri);
            assert_eq!(pts.len(), rule.points());
            for total in 0..=degree {
                for i in 0..=total {
                    let j = total - i;
                    let q: f64 = pts.iter().map(|(p, w)| w * p.x.powi(i as i32) * p.y.powi(j as i32)).sum();
                    let exact = monomial(i, j);
                    assert!((q - exact).abs() < 1e-14, "{rule:?} x^{i} y^{j}: {q} vs {exact}");
                }
            }
            // One degree higher is not integrated exactly by every monomial.
            let t = degree + 1;
            let worst = (0..=t)
                .map(|i| {
                    let j = t - i;
                    let q: f64 = pts.iter().map(|(p, w)| w * p.x.powi(i as i32) * p.y.powi(j as i32)).sum();
                    (q - monomial(i, j)).abs()
                })
                .fold(0.0, f64::max);
            assert!(worst > 1e-12, "{rule:?} unexpectedly exact at degree {t}");
        }
    }

    #[test]
    fn points_are_interior() {
        for rule in [GaussRule::One, GaussRule::Three, GaussRule::Six, GaussRule::Twelve] {
            for (l, _) in rule.barycentric() {
                assert!(l.iter().all(|&x| x > 0.0));
                assert!((l.iter().sum::<f64>() - 1.0).abs() < 1e-15);
            }
        }
    }
}
