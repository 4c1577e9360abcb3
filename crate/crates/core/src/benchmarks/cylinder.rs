use nalgebra::{Point2, Vector2};

use super::{generate_mesh, nearest_node, BenchmarkError, Discretization, MeshKind, Method, RunOptions};
use crate::assembly::{traction_force, Constraints};
use crate::geometry::DomainSpec;
use crate::materials::MaxwellModel;
use crate::solvers::{viscoelastic_solve, SolveConfig, ViscoProblem};

/// Prony weights `(mu0, mu1)` of the three relaxation cases.
pub const PRONY_SETS: [(f64, f64); 3] = [(0.7, 0.3), (0.3, 0.7), (0.01, 0.99)];

/// Thick-walled viscoelastic cylinder under suddenly applied internal
/// pressure, modelled as a plane-strain quarter annulus with symmetry
/// rollers.
#[derive(Clone, Debug, PartialEq)]
pub struct CylinderConfig {
    /// Radial and angular divisions of the quarter annulus.
    pub divisions: usize,
    pub inner_radius: f64,
    pub outer_radius: f64,
    pub pressure: f64,
    pub youngs: f64,
    pub poisson: f64,
    pub relaxation_time: f64,
    pub prony_sets: Vec<(f64, f64)>,
    pub solve: SolveConfig,
}

impl Default for CylinderConfig {
    fn default() -> Self {
        Self {
            divisions: 60,
            inner_radius: 2.0,
            outer_radius: 4.0,
            pressure: 10.0,
            youngs: 1000.0,
            poisson: 0.3,
            relaxation_time: 1.0,
            prony_sets: PRONY_SETS.to_vec(),
            solve: SolveConfig::default(),
        }
    }
}

/// Radial displacement histories at the inner (A) and outer (B) points on
/// the x axis for one set of Prony weights.
#[derive(Clone, Debug, PartialEq)]
pub struct CylinderResult {
    pub mu0: f64,
    pub mu1: f64,
    pub times: Vec<f64>,
    pub u_a: Vec<f64>,
    pub u_b: Vec<f64>,
    pub iterations: Vec<usize>,
    pub displacement: Vec<f64>,
}

pub fn run_cylinder(
    config: &CylinderConfig,
    options: &RunOptions,
) -> Result<(Discretization, Vec<CylinderResult>), BenchmarkError> {
    if options.method != Method::Nived {
        return Err(BenchmarkError::InvalidConfig(
            "the viscoelastic cylinder is solved with nodal integration only".into(),
        ));
    }
    let domain = DomainSpec::QuarterAnnulus {
        inner_radius: config.inner_radius,
        outer_radius: config.outer_radius,
    };
    let disc = Discretization::new(generate_mesh(&domain, MeshKind::Structured, config.divisions)?, options)?;
    let mesh = &disc.mesh;
    let mut constraints = Constraints::new();
    constraints.fix_tagged(mesh, &["bottom"], [false, true], |_| Vector2::zeros())?;
    constraints.fix_tagged(mesh, &["left"], [true, false], |_| Vector2::zeros())?;
    let p = config.pressure;
    let force = traction_force(
        disc.partition.segments("inner")?,
        &disc.basis,
        |x| x.coords * (p / x.coords.norm()),
        options.resolved_traction_rule(),
    )?;
    let a = nearest_node(mesh, &Point2::new(config.inner_radius, 0.0))?;
    let b = nearest_node(mesh, &Point2::new(config.outer_radius, 0.0))?;
    let ops = disc.ops.as_deref().expect("NIVED discretization has cell operators");

    let mut results = Vec::with_capacity(config.prony_sets.len());
    for &(mu0, mu1) in &config.prony_sets {
        let model = MaxwellModel::from_youngs(config.youngs, config.poisson, mu0, mu1, config.relaxation_time)?;
        let problem = ViscoProblem {
            ops,
            n_nodes: mesh.node_count(),
            model,
            constraints: &constraints,
            external_force: force.clone(),
            probe_dofs: vec![2 * a, 2 * b],
        };
        let h = viscoelastic_solve(&problem, &config.solve)?;
        results.push(CylinderResult {
            mu0,
            mu1,
            u_a: h.probes.iter().map(|v| v[0]).collect(),
            u_b: h.probes.iter().map(|v| v[1]).collect(),
            times: h.times,
            iterations: h.iterations,
            displacement: h.displacement,
        });
    }
    Ok((disc, results))
}
