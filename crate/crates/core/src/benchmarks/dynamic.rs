use std::time::Instant;

use super::exact::ManufacturedDynamicField;
use super::{error_norms, strain_energy, generate_mesh, BenchmarkError, ConvergenceStudy, Discretization, ErrorReport, MeshKind, RunOptions};
use crate::geometry::DomainSpec;
use crate::materials::{d_matrix, PlaneCondition};
use crate::solvers::{DirichletSchedule, Newmark, SolveConfig};

/// Manufactured elastodynamic study on `[-1, 1]^2`.
#[derive(Clone, Debug, PartialEq)]
pub struct DynamicConfig {
    pub mesh_kind: MeshKind,
    pub levels: Vec<usize>,
    pub dt: f64,
    pub n_steps: usize,
    pub field: ManufacturedDynamicField,
}

impl Default for DynamicConfig {
    fn default() -> Self {
        Self {
            mesh_kind: MeshKind::Unstructured(super::MESH_SEED),
            levels: vec![8, 16, 32, 64],
            dt: 0.01,
            n_steps: 100,
            field: ManufacturedDynamicField {
                youngs: 1e5,
                poisson: 0.3,
                density: 800.0,
                side: 2.0,
                alpha: 1e-3,
                beta: 1e-3,
            },
        }
    }
}

impl DynamicConfig {
    /// The three coarsest levels.
    pub fn reduced() -> Self {
        Self {
            levels: vec![8, 16, 32],
            ..Self::default()
        }
    }
}

/// Solves one level and returns its errors, the discretization and the
/// displacement at the final time.
pub fn run_dynamic_level(
    config: &DynamicConfig,
    divisions: usize,
    options: &RunOptions,
) -> Result<(ErrorReport, Discretization, Vec<f64>), BenchmarkError> {
    let start = Instant::now();
    let field = config.field;
    let half = 0.5 * field.side;
    let domain = DomainSpec::Rectangle {
        origin: [-half, -half],
        width: field.side,
        height: field.side,
    };
    let disc = Discretization::new(generate_mesh(&domain, config.mesh_kind, divisions)?, options)?;
    let d = d_matrix(field.youngs, field.poisson, PlaneCondition::PlaneStress)?;
    let k = disc.stiffness(&d)?;
    let m = disc.mass(field.density)?;
    let f_static = disc.body_force(|x| field.body_force_parts(x).0)?;
    let f_inertial = disc.body_force(|x| field.body_force_parts(x).1)?;
    let force = |t: f64| -> Vec<f64> {
        let (g, gdd) = (field.g(t), field.g_ddot(t));
        f_static.iter().zip(&f_inertial).map(|(s, i)| g * s + gdd * i).collect()
    };

    let nodes = disc.mesh.nodes().to_vec();
    let boundary_dofs: Vec<usize> = disc
        .mesh
        .boundary_node_mask()
        .iter()
        .enumerate()
        .filter(|(_, &b)| b)
        .flat_map(|(a, _)| [2 * a, 2 * a + 1])
        .collect();
    let schedule = DirichletSchedule::new(
        boundary_dofs,
        |t, dof| field.displacement(&nodes[dof / 2], t)[dof % 2],
        |t, dof| field.acceleration(&nodes[dof / 2], t)[dof % 2],
    );
    let solve = SolveConfig {
        dt: config.dt,
        n_steps: config.n_steps,
        linear_tolerance: options.linear_tolerance,
        ..SolveConfig::default()
    };
    let n = disc.dofs();
    let nm = Newmark::new(m, k.clone(), schedule, &solve)?;
    let initial = nm.initial_state(0.0, vec![0.0; n], vec![0.0; n], &force(0.0))?;
    let (last, _) = nm.run(initial, config.n_steps, force, &[])?;
    let t = last.t;
    let e = error_norms(
        &last.d,
        |x| field.displacement(x, t),
        |x| field.gradient(x, t),
        &disc.mesh,
        &disc.basis,
    )?;
    let report = ErrorReport {
        level: divisions,
        h: disc.partition.h,
        dofs: n,
        l2: Some(e.l2),
        h1: Some(e.h1),
        energy: strain_energy(&last.d, &k),
        seconds: start.elapsed().as_secs_f64(),
    };
    Ok((report, disc, last.d))
}

/// Integrates every level to `n_steps * dt` with Newmark's average
/// acceleration scheme and reports the errors at the final time.
pub fn run_manufactured_dynamic(config: &DynamicConfig, options: &RunOptions) -> Result<ConvergenceStudy, BenchmarkError> {
    let reports = config
        .levels
        .iter()
        .map(|&n| run_dynamic_level(config, n, options).map(|(r, _, _)| r))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(ConvergenceStudy::from_reports(reports))
}
