use std::path::{Path, PathBuf};

use clap::{Args, ValueEnum};
use serde::{Deserialize, Serialize};

use nived_core::benchmarks::{benchmark, CylinderConfig, DynamicConfig, BENCHMARK_NAMES, MESH_SEED, PRONY_SETS};
use nived_core::{BenchmarkProblem, DomainSpec, DualOptions, GaussRule, MeshKind, Method, Prior, RunOptions, SolveConfig};

/// Problems handled outside the static benchmark table.
pub const DYNAMIC: &str = "manufactured-dynamic";
pub const CYLINDER: &str = "cylinder";

#[derive(Debug, thiserror::Error)]
pub enum ConfigError {
    #[error("unknown benchmark `{0}`")]
    UnknownBenchmark(String),
    #[error("cannot read config {path}: {message}")]
    Read { path: String, message: String },
    #[error("invalid config {path}: {message}")]
    Parse { path: String, message: String },
    #[error("{0}")]
    Invalid(String),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum MethodName {
    Nived,
    Mem,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum PriorName {
    Gaussian,
    Quartic,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum MeshKindName {
    Structured,
    Distorted,
    Unstructured,
}

/// Settings shared by the config file and the command line. Every field is
/// optional; a flag overrides the file, which overrides the default.
#[derive(Clone, Debug, Default, Deserialize, Args)]
#[serde(deny_unknown_fields)]
pub struct Settings {
    /// Benchmark name
    #[arg(long, short)]
    pub benchmark: Option<String>,
    #[arg(long, value_enum)]
    pub method: Option<MethodName>,
    /// Points of the triangle rule for `mem`: 1, 3, 6 or 12
    #[arg(long)]
    pub gauss_rule: Option<usize>,
    #[arg(long, value_enum)]
    pub prior: Option<PriorName>,
    /// Support parameter of the prior
    #[arg(long)]
    pub gamma: Option<f64>,
    /// Background mesh file, replacing the generated mesh (`run` and `eigen`)
    #[arg(long)]
    pub mesh: Option<PathBuf>,
    /// Mesh generator; defaults to the benchmark's own
    #[arg(long, value_enum)]
    pub mesh_kind: Option<MeshKindName>,
    /// Divisions of a single generated mesh
    #[arg(long, short)]
    pub divisions: Option<usize>,
    /// Divisions of each refinement level, comma separated
    #[arg(long, value_delimiter = ',')]
    pub levels: Option<Vec<usize>>,
    /// Seed of distorted and unstructured meshes
    #[arg(long)]
    pub seed: Option<u64>,
    /// Output directory
    #[arg(long, short)]
    pub output: Option<PathBuf>,
    /// Relative residual accepted from the linear solver
    #[arg(long)]
    pub linear_tolerance: Option<f64>,
    /// Convergence tolerance of the maxent dual problem
    #[arg(long)]
    pub dual_tolerance: Option<f64>,
    /// Iteration cap of the maxent dual solve
    #[arg(long)]
    pub dual_max_iterations: Option<usize>,
    /// Residual tolerance of viscoelastic Newton steps
    #[arg(long)]
    pub newton_tolerance: Option<f64>,
    /// Iteration cap of viscoelastic Newton steps
    #[arg(long)]
    pub max_newton_iterations: Option<usize>,
    /// Time step of transient problems
    #[arg(long)]
    pub dt: Option<f64>,
    /// Number of time steps of transient problems
    #[arg(long)]
    pub steps: Option<usize>,
    /// Number of eigenpairs for `eigen`
    #[arg(long)]
    pub count: Option<usize>,
    /// Prony weights `(mu0, mu1)` for `cylinder`; config file only
    #[arg(skip)]
    pub prony_sets: Option<Vec<(f64, f64)>>,
    /// Write wall-clock seconds to CSV files; turn off for reproducible output
    #[arg(long)]
    pub record_timings: Option<bool>,
}

impl Settings {
    pub fn from_file(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|e| ConfigError::Read {
            path: path.display().to_string(),
            message: e.to_string(),
        })?;
        toml::from_str(&text).map_err(|e| ConfigError::Parse {
            path: path.display().to_string(),
            message: e.to_string(),
        })
    }

    /// Fields set in `self` win over `base`.
    pub fn over(self, base: Settings) -> Settings {
        Settings {
            benchmark: self.benchmark.or(base.benchmark),
            method: self.method.or(base.method),
            gauss_rule: self.gauss_rule.or(base.gauss_rule),
            prior: self.prior.or(base.prior),
            gamma: self.gamma.or(base.gamma),
            mesh: self.mesh.or(base.mesh),
            mesh_kind: self.mesh_kind.or(base.mesh_kind),
            divisions: self.divisions.or(base.divisions),
            levels: self.levels.or(base.levels),
            seed: self.seed.or(base.seed),
            output: self.output.or(base.output),
            linear_tolerance: self.linear_tolerance.or(base.linear_tolerance),
            dual_tolerance: self.dual_tolerance.or(base.dual_tolerance),
            dual_max_iterations: self.dual_max_iterations.or(base.dual_max_iterations),
            newton_tolerance: self.newton_tolerance.or(base.newton_tolerance),
            max_newton_iterations: self.max_newton_iterations.or(base.max_newton_iterations),
            dt: self.dt.or(base.dt),
            steps: self.steps.or(base.steps),
            count: self.count.or(base.count),
            prony_sets: self.prony_sets.or(base.prony_sets),
            record_timings: self.record_timings.or(base.record_timings),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Command {
    Run,
    Convergence,
    Eigen,
    Cylinder,
    MeshGen,
}

/// Fully resolved configuration, echoed in every output file.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RunConfig {
    pub command: Command,
    pub benchmark: String,
    pub method: MethodName,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub gauss_rule: Option<usize>,
    pub prior: PriorName,
    pub gamma: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub mesh: Option<PathBuf>,
    pub mesh_kind: MeshKindName,
    pub seed: u64,
    /// Divisions of every mesh the command builds, coarsest first.
    pub levels: Vec<usize>,
    pub output: PathBuf,
    pub linear_tolerance: f64,
    pub dual_tolerance: f64,
    pub dual_max_iterations: usize,
    pub newton_tolerance: f64,
    pub max_newton_iterations: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub dt: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub steps: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub count: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub prony_sets: Option<Vec<(f64, f64)>>,
    pub record_timings: bool,
}

fn kind_name(kind: MeshKind) -> (MeshKindName, Option<u64>) {
    match kind {
        MeshKind::Structured => (MeshKindName::Structured, None),
        MeshKind::Distorted(s) => (MeshKindName::Distorted, Some(s)),
        MeshKind::Unstructured(s) => (MeshKindName::Unstructured, Some(s)),
    }
}

/// Domain, default mesh kind and default levels of a named problem.
fn problem_defaults(name: &str) -> Result<(DomainSpec, MeshKind, Vec<usize>), ConfigError> {
    match name {
        DYNAMIC => {
            let c = DynamicConfig::default();
            let half = 0.5 * c.field.side;
            let domain = DomainSpec::Rectangle {
                origin: [-half, -half],
                width: c.field.side,
                height: c.field.side,
            };
            Ok((domain, c.mesh_kind, c.levels))
        }
        CYLINDER => {
            let c = CylinderConfig::default();
            let domain = DomainSpec::QuarterAnnulus {
                inner_radius: c.inner_radius,
                outer_radius: c.outer_radius,
            };
            Ok((domain, MeshKind::Structured, vec![c.divisions]))
        }
        _ => {
            let p = static_problem(name)?;
            Ok((p.domain, p.mesh_kind, p.levels))
        }
    }
}

pub fn static_problem(name: &str) -> Result<BenchmarkProblem, ConfigError> {
    benchmark(name).map_err(|_| ConfigError::UnknownBenchmark(name.into()))
}

/// Names accepted by each command.
pub fn accepted_benchmarks(command: Command) -> Vec<&'static str> {
    let mut names = BENCHMARK_NAMES.to_vec();
    match command {
        Command::Run | Command::Convergence => names.push(DYNAMIC),
        Command::Eigen => {}
        Command::Cylinder => names = vec![CYLINDER],
        Command::MeshGen => names.extend([DYNAMIC, CYLINDER]),
    }
    names
}

impl RunConfig {
    pub fn resolve(command: Command, s: Settings) -> Result<Self, ConfigError> {
        let benchmark = match (command, s.benchmark) {
            (Command::Cylinder, None) => CYLINDER.to_string(),
            (_, Some(b)) => b,
            (_, None) => return Err(ConfigError::Invalid("no benchmark given (use --benchmark)".into())),
        };
        if !accepted_benchmarks(command).contains(&benchmark.as_str()) {
            return Err(ConfigError::UnknownBenchmark(benchmark));
        }
        let (_, default_kind, default_levels) = problem_defaults(&benchmark)?;
        let (default_kind_name, default_seed) = kind_name(default_kind);

        let method = s.method.unwrap_or(MethodName::Nived);
        let gauss_rule = match method {
            MethodName::Nived => None,
            MethodName::Mem => match s.gauss_rule {
                Some(n) if GaussRule::from_points(n).is_some() => Some(n),
                Some(n) => return Err(ConfigError::Invalid(format!("gauss_rule must be 1, 3, 6 or 12, got {n}"))),
                None => return Err(ConfigError::Invalid("method `mem` requires gauss_rule".into())),
            },
        };
        if command == Command::Cylinder && method != MethodName::Nived {
            return Err(ConfigError::Invalid("the cylinder is solved with method `nived` only".into()));
        }
        let gamma = s.gamma.unwrap_or(Prior::DEFAULT_GAMMA);
        if !(gamma > 0.0 && gamma.is_finite()) {
            return Err(ConfigError::Invalid(format!("gamma must be positive, got {gamma}")));
        }

        let levels = match command {
            Command::Convergence => {
                if s.divisions.is_some() {
                    return Err(ConfigError::Invalid("convergence takes `levels`, not `divisions`".into()));
                }
                s.levels.unwrap_or(default_levels)
            }
            _ => {
                if s.levels.is_some() {
                    return Err(ConfigError::Invalid("`levels` applies to convergence only".into()));
                }
                vec![s.divisions.unwrap_or(default_levels[0])]
            }
        };
        if levels.is_empty() || levels.contains(&0) {
            return Err(ConfigError::Invalid("divisions must be positive".into()));
        }
        if command == Command::Convergence && levels.len() < 3 {
            return Err(ConfigError::Invalid("a convergence study needs at least three levels".into()));
        }
        if s.mesh.is_some() && !matches!(command, Command::Run | Command::Eigen) || s.mesh.is_some() && benchmark == DYNAMIC {
            return Err(ConfigError::Invalid("a mesh file applies to static `run` and `eigen` only".into()));
        }

        let defaults = SolveConfig::default();
        let dual = DualOptions::default();
        let transient = benchmark == DYNAMIC || command == Command::Cylinder;
        let (default_dt, default_steps) = if benchmark == DYNAMIC {
            let c = DynamicConfig::default();
            (c.dt, c.n_steps)
        } else {
            (defaults.dt, defaults.n_steps)
        };
        if !transient && (s.dt.is_some() || s.steps.is_some()) {
            return Err(ConfigError::Invalid("`dt` and `steps` apply to transient problems only".into()));
        }
        let dt = transient.then(|| s.dt.unwrap_or(default_dt));
        if dt.is_some_and(|dt| !(dt > 0.0 && dt.is_finite())) {
            return Err(ConfigError::Invalid("dt must be positive".into()));
        }
        let count = (command == Command::Eigen).then(|| s.count.unwrap_or(10));
        if count == Some(0) {
            return Err(ConfigError::Invalid("count must be positive".into()));
        }
        let prony_sets = (command == Command::Cylinder).then(|| s.prony_sets.unwrap_or_else(|| PRONY_SETS.to_vec()));

        Ok(Self {
            command,
            benchmark,
            method,
            gauss_rule,
            prior: s.prior.unwrap_or(PriorName::Gaussian),
            gamma,
            mesh: s.mesh,
            mesh_kind: s.mesh_kind.unwrap_or(default_kind_name),
            seed: s.seed.or(default_seed).unwrap_or(MESH_SEED),
            levels,
            output: s.output.unwrap_or_else(|| PathBuf::from("nived-out")),
            linear_tolerance: s.linear_tolerance.unwrap_or(defaults.linear_tolerance),
            dual_tolerance: s.dual_tolerance.unwrap_or(dual.tolerance),
            dual_max_iterations: s.dual_max_iterations.unwrap_or(dual.max_iterations),
            newton_tolerance: s.newton_tolerance.unwrap_or(defaults.newton_tolerance),
            max_newton_iterations: s.max_newton_iterations.unwrap_or(defaults.max_newton_iters),
            dt,
            steps: transient.then(|| s.steps.unwrap_or(default_steps)),
            count,
            prony_sets,
            record_timings: s.record_timings.unwrap_or(true),
        })
    }

    pub fn domain(&self) -> DomainSpec {
        problem_defaults(&self.benchmark).expect("benchmark validated on resolve").0
    }

    pub fn mesh_kind(&self) -> MeshKind {
        match self.mesh_kind {
            MeshKindName::Structured => MeshKind::Structured,
            MeshKindName::Distorted => MeshKind::Distorted(self.seed),
            MeshKindName::Unstructured => MeshKind::Unstructured(self.seed),
        }
    }

    pub fn method(&self) -> Method {
        match self.gauss_rule.and_then(GaussRule::from_points) {
            Some(rule) => Method::Mem(rule),
            None => Method::Nived,
        }
    }

    pub fn run_options(&self) -> RunOptions {
        let prior = match self.prior {
            PriorName::Gaussian => Prior::gaussian(self.gamma),
            PriorName::Quartic => Prior::quartic(self.gamma),
        };
        RunOptions {
            method: self.method(),
            prior,
            dual: DualOptions {
                tolerance: self.dual_tolerance,
                max_iterations: self.dual_max_iterations,
                ..DualOptions::default()
            },
            traction_rule: None,
            linear_tolerance: self.linear_tolerance,
        }
    }

    pub fn solve_config(&self) -> SolveConfig {
        let defaults = SolveConfig::default();
        SolveConfig {
            linear_tolerance: self.linear_tolerance,
            max_newton_iters: self.max_newton_iterations,
            newton_tolerance: self.newton_tolerance,
            dt: self.dt.unwrap_or(defaults.dt),
            n_steps: self.steps.unwrap_or(defaults.n_steps),
            ..defaults
        }
    }

    /// Static benchmark with the configured mesh kind and levels.
    pub fn static_problem(&self) -> Result<BenchmarkProblem, ConfigError> {
        let mut p = static_problem(&self.benchmark)?;
        p.mesh_kind = self.mesh_kind();
        p.levels = self.levels.clone();
        Ok(p)
    }

    pub fn dynamic_config(&self) -> DynamicConfig {
        DynamicConfig {
            mesh_kind: self.mesh_kind(),
            levels: self.levels.clone(),
            dt: self.dt.expect("transient"),
            n_steps: self.steps.expect("transient"),
            ..DynamicConfig::default()
        }
    }

    pub fn cylinder_config(&self) -> CylinderConfig {
        CylinderConfig {
            divisions: self.levels[0],
            prony_sets: self.prony_sets.clone().unwrap_or_else(|| PRONY_SETS.to_vec()),
            solve: self.solve_config(),
            ..CylinderConfig::default()
        }
    }

    /// TOML rendering used by the output headers.
    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes to TOML")
    }
}
