//! Property checks shared by the property suite and the acceptance target.
#![allow(dead_code)]

use std::sync::OnceLock;

use nalgebra::{DMatrix, DVector, Matrix2, Point2, Vector2, Vector3};
use proptest::prelude::*;
use proptest::test_runner::{Config, TestCaseError, TestRunner};

use nived_core::assembly::{
    assemble_mem_mass, assemble_nived_mass, assemble_nived_stiffness, cell_stiffness, compute_all_cell_operators,
    evaluate_cell_operators, CsrMatrix, GaussRule,
};
use nived_core::geometry::{
    build_nodal_cells, generate_structured_mesh, generate_unstructured_mesh, BackgroundMesh, DomainSpec,
};
use nived_core::materials::{d_matrix, visco_stress_update, visco_tangent, MaxwellModel, MaxwellState, PlaneCondition};
use nived_core::maxent::{BasisEvaluation, DualOptions, MaxentBasis, Prior};
use nived_core::solvers::{DirichletSchedule, Newmark, SolveConfig};

pub const MAXENT_CASES: u32 = 1000;
pub const CELL_CASES: u32 = 500;
pub const VISCO_CASES: u32 = 200;
pub const MASS_CASES: u32 = 24;
pub const NEWMARK_CASES: u32 = 24;

pub type Check = Result<(), TestCaseError>;

pub fn config(cases: u32) -> Config {
    Config {
        cases,
        failure_persistence: None,
        ..Config::default()
    }
}

/// Runs `check` on `cases` inputs drawn from `strategy`.
pub fn run<S: Strategy>(cases: u32, strategy: S, check: impl Fn(S::Value) -> Check) -> Result<(), String> {
    TestRunner::new(config(cases)).run(&strategy, check).map_err(|e| e.to_string())
}

fn basis_on(mesh: &BackgroundMesh, prior: Prior) -> MaxentBasis {
    let cells = build_nodal_cells(mesh).unwrap();
    MaxentBasis::new(mesh.nodes().to_vec(), cells.h_a, prior, DualOptions::default()).unwrap()
}

fn prior(quartic: bool) -> Prior {
    if quartic {
        Prior::quartic(2.0)
    } else {
        Prior::gaussian(2.0)
    }
}

/// Distorted 10x10 unit square with the Gaussian and quartic priors.
fn shared_bases() -> &'static [MaxentBasis; 2] {
    static BASES: OnceLock<[MaxentBasis; 2]> = OnceLock::new();
    BASES.get_or_init(|| {
        let mesh = generate_structured_mesh(&DomainSpec::unit_square(), 10, Some(11)).unwrap();
        [basis_on(&mesh, prior(false)), basis_on(&mesh, prior(true))]
    })
}

/// Distorted (even seeds) or unstructured (odd seeds) mesh of a 2x1
/// rectangle away from the origin.
pub fn random_mesh(seed: u64, divisions: usize) -> BackgroundMesh {
    let domain = DomainSpec::Rectangle {
        origin: [-0.5, 0.25],
        width: 2.0,
        height: 1.0,
    };
    if seed % 2 == 0 {
        generate_structured_mesh(&domain, divisions, Some(seed)).unwrap()
    } else {
        generate_unstructured_mesh(&domain, divisions, seed).unwrap()
    }
}

pub fn maxent_point(lo: f64, hi: f64) -> impl Strategy<Value = (Point2<f64>, bool)> {
    (lo..=hi, lo..=hi, any::<bool>()).prop_map(|(x, y, q)| (Point2::new(x, y), q))
}

/// Partition of unity, non-negativity and linear reproduction anywhere in
/// the closed square.
pub fn check_maxent_reproduction((x, quartic): (Point2<f64>, bool)) -> Check {
    let basis = &shared_bases()[quartic as usize];
    let e = basis.evaluate(&x).unwrap();
    let sum: f64 = e.values.iter().sum();
    prop_assert!((sum - 1.0).abs() <= 1e-13, "sum {sum}");
    prop_assert!(e.values.iter().all(|&p| p >= 0.0));
    let nodes = basis.nodes();
    let lin: Vector2<f64> = e.contributors.iter().zip(&e.values).map(|(&a, &p)| nodes[a].coords * p).sum();
    prop_assert!((lin - x.coords).norm() <= 1e-12, "linear error {}", (lin - x.coords).norm());
    Ok(())
}

fn value_of(e: &BasisEvaluation, node: usize) -> f64 {
    e.contributors.binary_search(&node).map(|i| e.values[i]).unwrap_or(0.0)
}

/// Analytic gradients against central differences, plus the gradient
/// consistency conditions, at interior points.
pub fn check_maxent_gradients((x, quartic): (Point2<f64>, bool)) -> Check {
    let basis = &shared_bases()[quartic as usize];
    let e = basis.evaluate_with_gradients(&x).unwrap();
    let grads = e.gradients.as_ref().unwrap();
    let nodes = basis.nodes();
    let gsum: Vector2<f64> = grads.iter().sum();
    prop_assert!(gsum.norm() <= 1e-10);
    let glin = grads
        .iter()
        .zip(&e.contributors)
        .fold(Matrix2::zeros(), |m, (g, &a)| m + nodes[a].coords * g.transpose());
    prop_assert!((glin - Matrix2::identity()).norm() <= 1e-10);

    let step = 1e-6;
    let gmax = grads.iter().map(|g| g.norm()).fold(0.0, f64::max);
    for k in 0..2 {
        let mut dx = Vector2::zeros();
        dx[k] = step;
        let plus = basis.evaluate(&(x + dx)).unwrap();
        let minus = basis.evaluate(&(x - dx)).unwrap();
        for (i, &a) in e.contributors.iter().enumerate() {
            let fd = (value_of(&plus, a) - value_of(&minus, a)) / (2.0 * step);
            prop_assert!(
                (fd - grads[i][k]).abs() <= 1e-6 * gmax,
                "node {a} dir {k}: analytic {} fd {fd}",
                grads[i][k]
            );
        }
    }
    Ok(())
}

#[derive(Clone, Debug)]
pub struct CellCase {
    pub seed: u64,
    pub divisions: usize,
    pub which: f64,
    pub quartic: bool,
    pub coeffs: [f64; 6],
}

pub fn cell_case() -> impl Strategy<Value = CellCase> {
    (0u64..10_000, 3usize..7, 0.0f64..1.0, any::<bool>(), prop::array::uniform6(-2.0f64..2.0)).prop_map(
        |(seed, divisions, which, quartic, coeffs)| CellCase {
            seed,
            divisions,
            which,
            quartic,
            coeffs,
        },
    )
}

/// Rigid motions lie in the kernel of the cell stiffness, and the cell
/// projection reproduces linear fields and their strains.
pub fn check_cell(case: CellCase) -> Check {
    let mesh = random_mesh(case.seed, case.divisions);
    let cells = build_nodal_cells(&mesh).unwrap();
    let basis =
        MaxentBasis::new(mesh.nodes().to_vec(), cells.h_a.clone(), prior(case.quartic), DualOptions::default()).unwrap();
    let idx = ((case.which * cells.cells.len() as f64) as usize).min(cells.cells.len() - 1);
    let ops = evaluate_cell_operators(&cells.cells[idx], &basis).unwrap();
    let nodes = basis.nodes();
    let sample = |f: &dyn Fn(&Point2<f64>) -> Vector2<f64>| {
        DVector::from_iterator(
            2 * ops.len(),
            ops.contributors.iter().flat_map(|&a| {
                let v = f(&nodes[a]);
                [v.x, v.y]
            }),
        )
    };

    let d = d_matrix(1.0, 0.3, PlaneCondition::PlaneStrain).unwrap();
    let k = cell_stiffness(&ops, &d).total();
    let c = ops.center;
    for rigid in [
        sample(&|_| Vector2::new(1.0, 0.0)),
        sample(&|_| Vector2::new(0.0, 1.0)),
        sample(&|p| Vector2::new(-(p.y - c.y), p.x - c.x)),
    ] {
        prop_assert!((&k * &rigid).norm() <= 1e-12 * k.norm() * rigid.norm().max(1.0));
    }

    let cf = case.coeffs;
    let q = sample(&|p| Vector2::new(cf[0] + cf[1] * p.x + cf[2] * p.y, cf[3] + cf[4] * p.x + cf[5] * p.y));
    let p = ops.projection();
    prop_assert!((&p * &q - &q).norm() <= 1e-12 * q.norm().max(1.0));
    let exact = Vector3::new(cf[1], cf[5], cf[2] + cf[4]);
    prop_assert!((ops.strain(&q) - exact).norm() <= 1e-11 * exact.norm().max(1.0));
    let pp: DMatrix<f64> = &p * &p;
    prop_assert!((pp - &p).norm() <= 1e-11 * p.norm(), "projection is not idempotent");
    Ok(())
}

#[derive(Clone, Debug)]
pub struct ViscoCase {
    pub model: MaxwellModel,
    pub dt: f64,
    pub history: [Vector3<f64>; 3],
}

pub fn visco_case() -> impl Strategy<Value = ViscoCase> {
    let strain = || prop::array::uniform3(-1e-2f64..1e-2).prop_map(Vector3::from);
    (0.1f64..10.0, 0.1f64..10.0, 0.01f64..0.99, 0.1f64..5.0, 0.01f64..3.0, strain(), strain(), strain()).prop_map(
        |(g, k, mu0, l, dt, e0, e1, e2)| ViscoCase {
            model: MaxwellModel::new(g, k, mu0, 1.0 - mu0, l).unwrap(),
            dt,
            history: [e0, e1, e2],
        },
    )
}

/// The algorithmic tangent against central differences of the stress
/// update, from a state with two steps of history.
pub fn check_visco_tangent(case: ViscoCase) -> Check {
    let ViscoCase { model, dt, history } = case;
    let (_, s1) = visco_stress_update(&model, &MaxwellState::default(), &history[0], dt).unwrap();
    let (_, s2) = visco_stress_update(&model, &s1, &history[1], dt).unwrap();
    let tangent = visco_tangent(&model, dt).unwrap();
    let step = 1e-7;
    for j in 0..3 {
        let mut de = Vector3::zeros();
        de[j] = step;
        let (sp, _) = visco_stress_update(&model, &s2, &(history[2] + de), dt).unwrap();
        let (sm, _) = visco_stress_update(&model, &s2, &(history[2] - de), dt).unwrap();
        let fd = (sp - sm) / (2.0 * step);
        let col = tangent.column(j);
        prop_assert!((fd - col).norm() <= 1e-6 * tangent.norm(), "column {j}: {fd} vs {col}");
    }
    Ok(())
}

pub fn mass_case() -> impl Strategy<Value = (u64, usize, f64)> {
    (0u64..10_000, 2usize..7, 0.1f64..10.0)
}

fn total(m: &CsrMatrix) -> f64 {
    m.matvec(&vec![1.0; m.nrows()]).iter().sum()
}

/// Summing `q^T M q` over cells with `q` all ones gives twice the mass.
pub fn check_mass((seed, divisions, rho): (u64, usize, f64)) -> Check {
    let mesh = random_mesh(seed, divisions);
    let cells = build_nodal_cells(&mesh).unwrap();
    let basis = basis_on(&mesh, prior(false));
    let ops = compute_all_cell_operators(&cells, &basis).unwrap();
    let n = mesh.node_count();
    let expected = 2.0 * rho * mesh.area();
    let nived = total(&assemble_nived_mass(&ops, n, rho).unwrap());
    prop_assert!((nived - expected).abs() <= 1e-10 * expected, "nodal {nived} vs {expected}");
    let mem = total(&assemble_mem_mass(&mesh, &basis, rho, GaussRule::Three).unwrap());
    prop_assert!((mem - expected).abs() <= 1e-10 * expected, "gauss {mem} vs {expected}");
    Ok(())
}

pub fn newmark_case() -> impl Strategy<Value = (u64, Vec<f64>, Vec<f64>)> {
    (
        0u64..10_000,
        prop::collection::vec(-1e-2f64..1e-2, 256),
        prop::collection::vec(-1.0f64..1.0, 256),
    )
}

/// Force-free Newmark on the unconstrained nodal stiffness keeps the
/// discrete energy over 100 steps.
pub fn check_newmark_energy((seed, d0, v0): (u64, Vec<f64>, Vec<f64>)) -> Check {
    let mesh = random_mesh(seed, 4);
    let n = mesh.node_count();
    let cells = build_nodal_cells(&mesh).unwrap();
    let basis = basis_on(&mesh, prior(false));
    let ops = compute_all_cell_operators(&cells, &basis).unwrap();
    let d = d_matrix(100.0, 0.3, PlaneCondition::PlaneStress).unwrap();
    let k = assemble_nived_stiffness(&ops, n, &d).unwrap();
    let m = assemble_nived_mass(&ops, n, 2.0).unwrap();
    let config = SolveConfig {
        dt: 0.01,
        ..SolveConfig::default()
    };
    let newmark = Newmark::new(m, k, DirichletSchedule::none(), &config).unwrap();
    let zero = vec![0.0; 2 * n];
    let mut state = newmark.initial_state(0.0, d0[..2 * n].to_vec(), v0[..2 * n].to_vec(), &zero).unwrap();
    let e0 = newmark.energy(&state);
    for step in 0..100 {
        state = newmark.step(&state, &zero).unwrap();
        let e = newmark.energy(&state);
        prop_assert!((e - e0).abs() <= 1e-10 * e0, "step {step}: {e} vs {e0}");
    }
    Ok(())
}
