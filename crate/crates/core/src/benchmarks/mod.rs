//! Benchmark problems, error measures and convergence studies.

mod cylinder;
mod dynamic;
pub mod exact;
mod norms;
mod problems;

pub use cylinder::{run_cylinder, CylinderConfig, CylinderResult, PRONY_SETS};
pub use dynamic::{run_dynamic_level, run_manufactured_dynamic, DynamicConfig};
pub use norms::{convergence_rate, error_norms, strain_energy, ErrorNorms};
pub use problems::{benchmark, BENCHMARK_NAMES, LSHAPE_REFERENCE_ENERGY, MESH_SEED};

use std::sync::Arc;
use std::time::Instant;

use nalgebra::{Matrix2, Matrix3, Point2, Vector2};
use thiserror::Error;

use crate::assembly::{
    apply_dirichlet, assemble_mem_mass, assemble_mem_stiffness, assemble_nived_mass, assemble_nived_stiffness,
    compute_all_cell_operators, mem_body_force, nived_body_force, traction_force, AssemblyError, CellOperators,
    Constraints, CsrMatrix, GaussRule, TractionRule,
};
use crate::geometry::{
    build_nodal_cells, generate_structured_mesh, generate_unstructured_mesh, BackgroundMesh, CellPartition, DomainSpec,
    GeometryError,
};
use crate::materials::{ElasticModuli, MaterialError};
use crate::maxent::{DualOptions, MaxentBasis, MaxentError, Prior};
use crate::solvers::{count_rigid_modes, eigen_smallest, linear_solve, EigenPair, SolverError};

pub type VectorField = Arc<dyn Fn(&Point2<f64>) -> Vector2<f64> + Send + Sync>;
pub type GradientField = Arc<dyn Fn(&Point2<f64>) -> Matrix2<f64> + Send + Sync>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum BenchmarkError {
    #[error("unknown benchmark `{0}`")]
    UnknownBenchmark(String),
    #[error("invalid benchmark configuration: {0}")]
    InvalidConfig(String),
    #[error(transparent)]
    Geometry(#[from] GeometryError),
    #[error(transparent)]
    Basis(#[from] MaxentError),
    #[error(transparent)]
    Assembly(#[from] AssemblyError),
    #[error(transparent)]
    Solver(#[from] SolverError),
    #[error(transparent)]
    Material(#[from] MaterialError),
}

/// Integration scheme.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Method {
    Nived,
    Mem(GaussRule),
}

impl Method {
    pub fn label(&self) -> String {
        match self {
            Self::Nived => "nived".into(),
            Self::Mem(rule) => format!("mem-{}pt", rule.points()),
        }
    }
}

/// How the node set of a refinement level is generated.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum MeshKind {
    Structured,
    /// Structured, then interior nodes perturbed with the given seed.
    Distorted(u64),
    /// Structured nodes jittered with the given seed and retriangulated by
    /// constrained Delaunay.
    Unstructured(u64),
}

/// Dirichlet data on a boundary tag; values come from
/// `BenchmarkProblem::dirichlet_value`.
#[derive(Clone, Debug, PartialEq)]
pub struct DirichletSpec {
    pub tag: String,
    pub components: [bool; 2],
}

/// Dirichlet data at the node located at `point`.
#[derive(Clone, Debug, PartialEq)]
pub struct PointConstraint {
    pub point: Point2<f64>,
    pub components: [bool; 2],
}

#[derive(Clone)]
pub struct NeumannSpec {
    pub tag: String,
    pub traction: VectorField,
}

#[derive(Clone)]
pub struct ExactSolution {
    pub displacement: VectorField,
    pub gradient: GradientField,
}

/// A static elasticity benchmark and its refinement family.
#[derive(Clone)]
pub struct BenchmarkProblem {
    pub name: String,
    pub domain: DomainSpec,
    pub mesh_kind: MeshKind,
    /// Divisions per refinement level.
    pub levels: Vec<usize>,
    pub moduli: ElasticModuli,
    pub dirichlet: Vec<DirichletSpec>,
    pub point_constraints: Vec<PointConstraint>,
    pub dirichlet_value: VectorField,
    pub neumann: Vec<NeumannSpec>,
    pub body_force: Option<VectorField>,
    pub exact: Option<ExactSolution>,
    pub reference_energy: Option<f64>,
}

impl std::fmt::Debug for BenchmarkProblem {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("BenchmarkProblem")
            .field("name", &self.name)
            .field("domain", &self.domain)
            .field("mesh_kind", &self.mesh_kind)
            .field("levels", &self.levels)
            .finish_non_exhaustive()
    }
}

pub fn generate_mesh(domain: &DomainSpec, kind: MeshKind, divisions: usize) -> Result<BackgroundMesh, GeometryError> {
    match kind {
        MeshKind::Structured => generate_structured_mesh(domain, divisions, None),
        MeshKind::Distorted(seed) => generate_structured_mesh(domain, divisions, Some(seed)),
        MeshKind::Unstructured(seed) => generate_unstructured_mesh(domain, divisions, seed),
    }
}

impl BenchmarkProblem {
    pub fn mesh(&self, divisions: usize) -> Result<BackgroundMesh, GeometryError> {
        generate_mesh(&self.domain, self.mesh_kind, divisions)
    }

    pub fn constraints(&self, mesh: &BackgroundMesh) -> Result<Constraints, BenchmarkError> {
        let mut c = Constraints::new();
        for spec in &self.dirichlet {
            c.fix_tagged(mesh, &[spec.tag.as_str()], spec.components, |x| (self.dirichlet_value)(x))?;
        }
        for pc in &self.point_constraints {
            let a = nearest_node(mesh, &pc.point)?;
            let v = (self.dirichlet_value)(&mesh.nodes()[a]);
            for k in 0..2 {
                if pc.components[k] {
                    c.fix(2 * a + k, v[k])?;
                }
            }
        }
        Ok(c)
    }
}

/// Index of the node at `point` (within `1e-9` of the mesh extent).
pub fn nearest_node(mesh: &BackgroundMesh, point: &Point2<f64>) -> Result<usize, BenchmarkError> {
    let (mut best, mut dist) = (0, f64::INFINITY);
    for (a, x) in mesh.nodes().iter().enumerate() {
        let d = (x - point).norm();
        if d < dist {
            best = a;
            dist = d;
        }
    }
    let extent = mesh.nodes().iter().fold(0.0_f64, |m, x| m.max(x.coords.abs().max()));
    if dist <= 1e-9 * extent.max(1.0) {
        Ok(best)
    } else {
        Err(BenchmarkError::InvalidConfig(format!(
            "no node at ({}, {}); nearest is {dist:e} away",
            point.x, point.y
        )))
    }
}

/// Discretization choices shared by every run.
#[derive(Clone, Debug, PartialEq)]
pub struct RunOptions {
    pub method: Method,
    pub prior: Prior,
    pub dual: DualOptions,
    /// `None` picks the rule that matches the method: half-edges for NIVED,
    /// Gauss-Legendre on boundary edges of matching degree for MEM.
    pub traction_rule: Option<TractionRule>,
    pub linear_tolerance: f64,
}

impl RunOptions {
    pub fn resolved_traction_rule(&self) -> TractionRule {
        self.traction_rule.unwrap_or(match self.method {
            Method::Nived => TractionRule::HalfEdge,
            Method::Mem(rule) => TractionRule::EdgeGauss(match rule {
                GaussRule::One => 1,
                GaussRule::Three => 2,
                GaussRule::Six => 3,
                GaussRule::Twelve => 4,
            }),
        })
    }
}

impl Default for RunOptions {
    fn default() -> Self {
        Self {
            method: Method::Nived,
            prior: Prior::gaussian(Prior::DEFAULT_GAMMA),
            dual: DualOptions::default(),
            traction_rule: None,
            linear_tolerance: 1e-12,
        }
    }
}

/// Mesh, cells, basis and (for NIVED) per-cell operators.
pub struct Discretization {
    pub mesh: BackgroundMesh,
    pub partition: CellPartition,
    pub basis: MaxentBasis,
    pub ops: Option<Vec<CellOperators>>,
    pub method: Method,
}

impl Discretization {
    pub fn new(mesh: BackgroundMesh, options: &RunOptions) -> Result<Self, BenchmarkError> {
        let partition = build_nodal_cells(&mesh)?;
        let basis = MaxentBasis::new(mesh.nodes().to_vec(), partition.h_a.clone(), options.prior, options.dual)?;
        let ops = match options.method {
            Method::Nived => Some(compute_all_cell_operators(&partition, &basis)?),
            Method::Mem(_) => None,
        };
        Ok(Self {
            mesh,
            partition,
            basis,
            ops,
            method: options.method,
        })
    }

    pub fn n_nodes(&self) -> usize {
        self.mesh.node_count()
    }

    pub fn dofs(&self) -> usize {
        2 * self.n_nodes()
    }

    fn nived_ops(&self) -> Result<&[CellOperators], BenchmarkError> {
        self.ops
            .as_deref()
            .ok_or_else(|| BenchmarkError::InvalidConfig("cell operators are only built for NIVED".into()))
    }

    pub fn stiffness(&self, d: &Matrix3<f64>) -> Result<CsrMatrix, BenchmarkError> {
        Ok(match self.method {
            Method::Nived => assemble_nived_stiffness(self.nived_ops()?, self.n_nodes(), d)?,
            Method::Mem(rule) => assemble_mem_stiffness(&self.mesh, &self.basis, d, rule)?,
        })
    }

    /// Consistent mass; NIVED omits the stability part.
    pub fn mass(&self, rho: f64) -> Result<CsrMatrix, BenchmarkError> {
        Ok(match self.method {
            Method::Nived => assemble_nived_mass(self.nived_ops()?, self.n_nodes(), rho)?,
            Method::Mem(rule) => assemble_mem_mass(&self.mesh, &self.basis, rho, rule)?,
        })
    }

    pub fn body_force<B>(&self, body: B) -> Result<Vec<f64>, BenchmarkError>
    where
        B: Fn(&Point2<f64>) -> Vector2<f64> + Sync,
    {
        Ok(match self.method {
            Method::Nived => nived_body_force(self.nived_ops()?, self.n_nodes(), body),
            Method::Mem(rule) => mem_body_force(&self.mesh, &self.basis, rule, body)?,
        })
    }

    /// Nodal stresses `D W^T d` per cell (NIVED) or `D eps(x_a)` from the
    /// basis gradients at interior nodes (MEM; boundary nodes get zero).
    pub fn nodal_strains(&self, d: &[f64]) -> Result<Vec<nalgebra::Vector3<f64>>, BenchmarkError> {
        match &self.ops {
            Some(ops) => Ok(ops.iter().map(|o| o.strain(&o.gather(d))).collect()),
            None => {
                let boundary = self.mesh.boundary_node_mask();
                self.mesh
                    .nodes()
                    .iter()
                    .zip(boundary)
                    .map(|(x, on_boundary)| {
                        if on_boundary {
                            return Ok(nalgebra::Vector3::zeros());
                        }
                        let e = self.basis.evaluate_with_gradients(x)?;
                        let mut s = nalgebra::Vector3::zeros();
                        for (&a, g) in e.contributors.iter().zip(e.gradients.as_ref().expect("requested")) {
                            s += nalgebra::Vector3::new(g.x * d[2 * a], g.y * d[2 * a + 1], g.y * d[2 * a] + g.x * d[2 * a + 1]);
                        }
                        Ok(s)
                    })
                    .collect()
            }
        }
    }
}

/// Solution of one static run.
pub struct StaticSolution {
    pub disc: Discretization,
    pub stiffness: CsrMatrix,
    pub displacement: Vec<f64>,
    pub energy: f64,
    pub seconds: f64,
}

/// One row of a convergence study.
#[derive(Clone, Debug, PartialEq)]
pub struct ErrorReport {
    pub level: usize,
    /// Maximum nodal-cell diameter.
    pub h: f64,
    pub dofs: usize,
    pub l2: Option<f64>,
    pub h1: Option<f64>,
    pub energy: f64,
    pub seconds: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ConvergenceStudy {
    pub reports: Vec<ErrorReport>,
    pub l2_rate: Option<f64>,
    pub h1_rate: Option<f64>,
}

impl ConvergenceStudy {
    pub fn from_reports(reports: Vec<ErrorReport>) -> Self {
        let h: Vec<f64> = reports.iter().map(|r| r.h).collect();
        let rate = |f: fn(&ErrorReport) -> Option<f64>| {
            let e: Option<Vec<f64>> = reports.iter().map(f).collect();
            e.and_then(|e| convergence_rate(&h, &e))
        };
        Self {
            l2_rate: rate(|r| r.l2),
            h1_rate: rate(|r| r.h1),
            reports,
        }
    }
}

/// Assembles and solves one static problem on a given mesh.
pub fn solve_static(
    problem: &BenchmarkProblem,
    mesh: BackgroundMesh,
    options: &RunOptions,
) -> Result<StaticSolution, BenchmarkError> {
    let start = Instant::now();
    let disc = Discretization::new(mesh, options)?;
    let k = disc.stiffness(&problem.moduli.d_matrix)?;
    let mut f = match &problem.body_force {
        Some(b) => disc.body_force(|x| b(x))?,
        None => vec![0.0; disc.dofs()],
    };
    for spec in &problem.neumann {
        let segs = disc.partition.segments(&spec.tag)?;
        let ft = traction_force(segs, &disc.basis, |x| (spec.traction)(x), options.resolved_traction_rule())?;
        for (a, b) in f.iter_mut().zip(ft) {
            *a += b;
        }
    }
    let constraints = problem.constraints(&disc.mesh)?;
    let reduced = apply_dirichlet(&k, &f, &constraints)?;
    let x = linear_solve(&reduced.matrix, &reduced.rhs, options.linear_tolerance)?;
    let displacement = reduced.expand(&x);
    let energy = strain_energy(&displacement, &k);
    Ok(StaticSolution {
        disc,
        stiffness: k,
        displacement,
        energy,
        seconds: start.elapsed().as_secs_f64(),
    })
}

/// Errors and energy for a solved level.
pub fn report(problem: &BenchmarkProblem, level: usize, sol: &StaticSolution) -> Result<ErrorReport, BenchmarkError> {
    let (l2, h1) = match &problem.exact {
        Some(ex) => {
            let e = error_norms(
                &sol.displacement,
                |x| (ex.displacement)(x),
                |x| (ex.gradient)(x),
                &sol.disc.mesh,
                &sol.disc.basis,
            )?;
            (Some(e.l2), Some(e.h1))
        }
        None => (None, None),
    };
    Ok(ErrorReport {
        level,
        h: sol.disc.partition.h,
        dofs: sol.disc.dofs(),
        l2,
        h1,
        energy: sol.energy,
        seconds: sol.seconds,
    })
}

pub fn run_level(
    problem: &BenchmarkProblem,
    level: usize,
    options: &RunOptions,
) -> Result<(ErrorReport, StaticSolution), BenchmarkError> {
    let sol = solve_static(problem, problem.mesh(level)?, options)?;
    Ok((report(problem, level, &sol)?, sol))
}

/// Runs every level of the problem's family in order.
pub fn run_convergence(problem: &BenchmarkProblem, options: &RunOptions) -> Result<ConvergenceStudy, BenchmarkError> {
    let reports = problem
        .levels
        .iter()
        .map(|&n| run_level(problem, n, options).map(|(r, _)| r))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(ConvergenceStudy::from_reports(reports))
}

/// Smallest eigenpairs of the unconstrained stiffness and the number of
/// rigid-body modes among them.
pub struct StabilityReport {
    pub pairs: Vec<EigenPair>,
    pub largest: f64,
    pub rigid_modes: usize,
    pub disc: Discretization,
}

pub fn stability_spectrum(
    mesh: BackgroundMesh,
    moduli: &ElasticModuli,
    options: &RunOptions,
    count: usize,
) -> Result<StabilityReport, BenchmarkError> {
    let disc = Discretization::new(mesh, options)?;
    let k = disc.stiffness(&moduli.d_matrix)?;
    let (pairs, largest) = eigen_smallest(&k, count.min(k.nrows()))?;
    let values: Vec<f64> = pairs.iter().map(|p| p.value).collect();
    Ok(StabilityReport {
        rigid_modes: count_rigid_modes(&values, largest),
        pairs,
        largest,
        disc,
    })
}
