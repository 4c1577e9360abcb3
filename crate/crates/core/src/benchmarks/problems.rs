use std::sync::Arc;

use nalgebra::{Point2, Vector2, Vector3};

use super::exact::{CantileverField, ManufacturedStaticField, PatchField, PlateHoleField};
use super::{BenchmarkError, BenchmarkProblem, DirichletSpec, ExactSolution, MeshKind, NeumannSpec, PointConstraint};
use crate::geometry::DomainSpec;
use crate::materials::{ElasticModuli, PlaneCondition};

/// Names accepted by [`benchmark`].
pub const BENCHMARK_NAMES: &[&str] = &[
    "patch",
    "patch-distorted",
    "patch-unstructured",
    "cantilever",
    "plate-hole",
    "lshape",
    "manufactured-static",
];

/// Richardson-extrapolated strain energy of the L-shaped domain.
pub const LSHAPE_REFERENCE_ENERGY: f64 = 15566.46;

/// Seed of every distorted and unstructured default mesh.
pub const MESH_SEED: u64 = 42;

fn dirichlet(tag: &str, components: [bool; 2]) -> DirichletSpec {
    DirichletSpec {
        tag: tag.into(),
        components,
    }
}

/// Traction `sigma n` from a Voigt stress field.
fn traction_from_stress<S>(stress: S, normal: Vector2<f64>) -> super::VectorField
where
    S: Fn(&Point2<f64>) -> Vector3<f64> + Send + Sync + 'static,
{
    Arc::new(move |x| {
        let s = stress(x);
        Vector2::new(s[0] * normal.x + s[2] * normal.y, s[2] * normal.x + s[1] * normal.y)
    })
}

fn constant(v: Vector2<f64>) -> super::VectorField {
    Arc::new(move |_| v)
}

/// Builds a named benchmark with its default refinement family.
pub fn benchmark(name: &str) -> Result<BenchmarkProblem, BenchmarkError> {
    match name {
        "patch" => patch_test(MeshKind::Structured),
        "patch-distorted" => patch_test(MeshKind::Distorted(MESH_SEED)),
        "patch-unstructured" => patch_test(MeshKind::Unstructured(MESH_SEED)),
        "cantilever" => cantilever(),
        "plate-hole" => plate_with_hole(),
        "lshape" => lshape(),
        "manufactured-static" => manufactured_static(),
        other => Err(BenchmarkError::UnknownBenchmark(other.into())),
    }
}

/// Unit square under uniform vertical tension: roller on the bottom, pin at
/// `(1, 0)`, unit traction on top. The exact field is linear.
pub fn patch_test(mesh_kind: MeshKind) -> Result<BenchmarkProblem, BenchmarkError> {
    let field = PatchField {
        youngs: 3e7,
        poisson: 0.3,
    };
    Ok(BenchmarkProblem {
        name: "patch".into(),
        domain: DomainSpec::unit_square(),
        mesh_kind,
        levels: vec![8],
        moduli: ElasticModuli::new(field.youngs, field.poisson, PlaneCondition::PlaneStress)?,
        dirichlet: vec![dirichlet("bottom", [false, true])],
        point_constraints: vec![PointConstraint {
            point: Point2::new(1.0, 0.0),
            components: [true, false],
        }],
        dirichlet_value: Arc::new(move |x| field.displacement(x)),
        neumann: vec![NeumannSpec {
            tag: "top".into(),
            traction: constant(Vector2::new(0.0, 1.0)),
        }],
        body_force: None,
        exact: Some(ExactSolution {
            displacement: Arc::new(move |x| field.displacement(x)),
            gradient: Arc::new(move |x| field.gradient(x)),
        }),
        reference_energy: None,
    })
}

pub fn cantilever() -> Result<BenchmarkProblem, BenchmarkError> {
    let field = CantileverField {
        load: -1000.0,
        youngs: 1e7,
        poisson: 0.3,
        length: 8.0,
        depth: 4.0,
        condition: PlaneCondition::PlaneStrain,
    };
    Ok(BenchmarkProblem {
        name: "cantilever".into(),
        domain: DomainSpec::Rectangle {
            origin: [0.0, -2.0],
            width: 8.0,
            height: 4.0,
        },
        mesh_kind: MeshKind::Unstructured(MESH_SEED),
        levels: vec![8, 16, 32, 64],
        moduli: ElasticModuli::new(field.youngs, field.poisson, field.condition)?,
        dirichlet: vec![dirichlet("left", [true, true])],
        point_constraints: Vec::new(),
        dirichlet_value: Arc::new(move |x| field.displacement(x)),
        neumann: vec![NeumannSpec {
            tag: "right".into(),
            traction: traction_from_stress(move |x| field.stress(x), Vector2::new(1.0, 0.0)),
        }],
        body_force: None,
        exact: Some(ExactSolution {
            displacement: Arc::new(move |x| field.displacement(x)),
            gradient: Arc::new(move |x| field.gradient(x)),
        }),
        reference_energy: None,
    })
}

pub fn plate_with_hole() -> Result<BenchmarkProblem, BenchmarkError> {
    let field = PlateHoleField {
        traction: 100.0,
        hole_radius: 1.0,
        youngs: 1e3,
        poisson: 0.3,
    };
    Ok(BenchmarkProblem {
        name: "plate-hole".into(),
        domain: DomainSpec::PlateWithHole {
            hole_radius: 1.0,
            side: 5.0,
        },
        mesh_kind: MeshKind::Unstructured(MESH_SEED),
        levels: vec![12, 16, 24, 32, 48, 64],
        moduli: ElasticModuli::new(field.youngs, field.poisson, PlaneCondition::PlaneStress)?,
        dirichlet: vec![dirichlet("left", [true, false]), dirichlet("bottom", [false, true])],
        point_constraints: Vec::new(),
        dirichlet_value: Arc::new(move |x| field.displacement(x)),
        neumann: vec![
            NeumannSpec {
                tag: "top".into(),
                traction: traction_from_stress(move |x| field.stress(x), Vector2::new(0.0, 1.0)),
            },
            NeumannSpec {
                tag: "right".into(),
                traction: traction_from_stress(move |x| field.stress(x), Vector2::new(1.0, 0.0)),
            },
        ],
        body_force: None,
        exact: Some(ExactSolution {
            displacement: Arc::new(move |x| field.displacement(x)),
            gradient: Arc::new(move |x| field.gradient(x)),
        }),
        reference_energy: None,
    })
}

/// L-shaped domain of leg `H = 100`, clamped along the bottom, with a unit
/// horizontal traction on the right end and a unit vertical traction on the
/// top end.
pub fn lshape() -> Result<BenchmarkProblem, BenchmarkError> {
    let p = 1.0;
    Ok(BenchmarkProblem {
        name: "lshape".into(),
        domain: DomainSpec::LShape { leg: 100.0 },
        mesh_kind: MeshKind::Structured,
        levels: vec![4, 8, 16, 32],
        moduli: ElasticModuli::new(1.0, 0.3, PlaneCondition::PlaneStress)?,
        dirichlet: vec![dirichlet("bottom", [true, true])],
        point_constraints: Vec::new(),
        dirichlet_value: constant(Vector2::zeros()),
        neumann: vec![
            NeumannSpec {
                tag: "right".into(),
                traction: constant(Vector2::new(p, 0.0)),
            },
            NeumannSpec {
                tag: "top".into(),
                traction: constant(Vector2::new(0.0, p)),
            },
        ],
        body_force: None,
        exact: None,
        reference_energy: Some(LSHAPE_REFERENCE_ENERGY),
    })
}

/// `u = (sin x cos y, e^(x+y))` on `[-1, 1]^2` with Dirichlet data on the
/// whole boundary.
pub fn manufactured_static() -> Result<BenchmarkProblem, BenchmarkError> {
    let moduli = ElasticModuli::new(1e5, 0.3, PlaneCondition::PlaneStress)?;
    let field = ManufacturedStaticField { d: moduli.d_matrix };
    Ok(BenchmarkProblem {
        name: "manufactured-static".into(),
        domain: DomainSpec::Rectangle {
            origin: [-1.0, -1.0],
            width: 2.0,
            height: 2.0,
        },
        mesh_kind: MeshKind::Unstructured(MESH_SEED),
        levels: vec![8, 16, 32, 64],
        moduli,
        dirichlet: ["bottom", "right", "top", "left"]
            .iter()
            .map(|t| dirichlet(t, [true, true]))
            .collect(),
        point_constraints: Vec::new(),
        dirichlet_value: Arc::new(move |x| field.displacement(x)),
        neumann: Vec::new(),
        body_force: Some(Arc::new(move |x| field.body_force(x))),
        exact: Some(ExactSolution {
            displacement: Arc::new(move |x| field.displacement(x)),
            gradient: Arc::new(move |x| field.gradient(x)),
        }),
        reference_energy: None,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unknown_name_is_rejected() {
        assert!(matches!(benchmark("nope"), Err(BenchmarkError::UnknownBenchmark(_))));
        for name in BENCHMARK_NAMES {
            assert!(benchmark(name).is_ok(), "{name}");
        }
    }

    #[test]
    fn exact_fields_match_their_dirichlet_data() {
        for name in BENCHMARK_NAMES {
            let p = benchmark(name).unwrap();
            let Some(ex) = &p.exact else { continue };
            let mesh = p.mesh(p.levels[0]).unwrap();
            let c = p.constraints(&mesh).unwrap();
            assert!(!c.is_empty());
            for (dof, v) in c.iter() {
                let u = (ex.displacement)(&mesh.nodes()[dof / 2]);
                assert!((u[dof % 2] - v).abs() <= 1e-12 * v.abs().max(1e-12), "{name} dof {dof}");
            }
        }
    }

    #[test]
    fn neumann_and_dirichlet_tags_are_disjoint() {
        for name in BENCHMARK_NAMES {
            let p = benchmark(name).unwrap();
            let tags = p.mesh(p.levels[0]).unwrap().tags();
            for n in &p.neumann {
                assert!(tags.contains(&n.tag));
                assert!(p.dirichlet.iter().all(|d| d.tag != n.tag), "{name}");
            }
        }
    }
}
