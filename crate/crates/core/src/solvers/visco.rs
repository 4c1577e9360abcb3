use rayon::prelude::*;

use super::linear::SparseCholesky;
use super::{norm, SolveConfig, SolverError};
use crate::assembly::{assemble_blocks, cell_stiffness, CellOperators, Constraints};
use crate::materials::{visco_stress_update, visco_tangent, MaxwellModel, MaxwellState};

/// A quasi-static viscoelastic problem discretized with nodal cells.
///
/// The external force is applied suddenly at `t = 0` and held constant.
pub struct ViscoProblem<'a> {
    pub ops: &'a [CellOperators],
    pub n_nodes: usize,
    pub model: MaxwellModel,
    pub constraints: &'a Constraints,
    pub external_force: Vec<f64>,
    /// Dofs whose displacement is recorded at every step.
    pub probe_dofs: Vec<usize>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ViscoHistory {
    pub times: Vec<f64>,
    pub probes: Vec<Vec<f64>>,
    /// Newton corrections taken at each step.
    pub iterations: Vec<usize>,
    pub displacement: Vec<f64>,
    /// Per-cell (per-node) material history after the last step.
    pub states: Vec<MaxwellState>,
}

/// Internal force `sum_E |E| W_E stress_E` for trial displacements `d`,
/// together with the trial states.
fn internal_force(
    problem: &ViscoProblem,
    states: &[MaxwellState],
    d: &[f64],
    dt: f64,
) -> Result<(Vec<f64>, Vec<MaxwellState>), SolverError> {
    let per_cell = problem
        .ops
        .par_iter()
        .zip(states)
        .map(|(o, s)| {
            let strain = o.strain(&o.gather(d));
            let (stress, next) = visco_stress_update(&problem.model, s, &strain, dt)?;
            Ok((&o.w * stress * o.area, next))
        })
        .collect::<Result<Vec<_>, SolverError>>()?;
    let mut f = vec![0.0; 2 * problem.n_nodes];
    let mut next_states = Vec::with_capacity(states.len());
    for (o, (local, next)) in problem.ops.iter().zip(per_cell) {
        for (k, &a) in o.contributors.iter().enumerate() {
            f[2 * a] += local[2 * k];
            f[2 * a + 1] += local[2 * k + 1];
        }
        next_states.push(next);
    }
    Ok((f, next_states))
}

/// Newton-Raphson time stepping with the consistent tangent.
///
/// The tangent `K_T = K_T^c + K_T^s` depends only on the time step, so it is
/// assembled and factorized once. The residual is
/// `sum_E |E| W stress(W^T d) + K_T^s d - f_ext` on the free dofs.
pub fn viscoelastic_solve(problem: &ViscoProblem, config: &SolveConfig) -> Result<ViscoHistory, SolverError> {
    config.validate()?;
    let n = 2 * problem.n_nodes;
    if problem.external_force.len() != n || problem.ops.len() != problem.n_nodes {
        return Err(SolverError::InvalidInput("force vector or cell count does not match the node count".into()));
    }
    let dt = config.dt;
    let d_t = visco_tangent(&problem.model, dt)?;
    let groups: Vec<Vec<usize>> = problem.ops.iter().map(|o| o.contributors.clone()).collect();
    let k_t = assemble_blocks(problem.n_nodes, &groups, |i| Ok(cell_stiffness(&problem.ops[i], &d_t).total()))?;
    let k_s = assemble_blocks(problem.n_nodes, &groups, |i| Ok(cell_stiffness(&problem.ops[i], &d_t).stability))?;

    let mut fixed = vec![false; n];
    let mut d = vec![0.0; n];
    for (dof, v) in problem.constraints.iter() {
        if dof >= n {
            return Err(SolverError::InvalidInput(format!("constrained dof {dof} out of range")));
        }
        fixed[dof] = true;
        d[dof] = v;
    }
    let free: Vec<usize> = (0..n).filter(|&i| !fixed[i]).collect();
    let chol = SparseCholesky::new(&k_t.submatrix(&free))?;
    let f_norm = norm(&free.iter().map(|&i| problem.external_force[i]).collect::<Vec<_>>());

    let mut states = vec![MaxwellState::default(); problem.n_nodes];
    let mut history = ViscoHistory {
        times: vec![0.0],
        probes: vec![problem.probe_dofs.iter().map(|&i| d[i]).collect()],
        iterations: Vec::new(),
        displacement: Vec::new(),
        states: Vec::new(),
    };
    for step in 1..=config.n_steps {
        let mut iterations = 0;
        let mut previous = f64::INFINITY;
        let mut increases = 0;
        let committed = loop {
            let (fc, trial) = internal_force(problem, &states, &d, dt)?;
            let fs = k_s.matvec(&d);
            let r: Vec<f64> = free.iter().map(|&i| fc[i] + fs[i] - problem.external_force[i]).collect();
            let rn = norm(&r);
            if rn <= config.newton_tolerance * f_norm || rn <= config.newton_abs_tolerance {
                break trial;
            }
            if rn > previous {
                increases += 1;
                if increases >= 3 {
                    return Err(SolverError::NewtonDivergence {
                        step,
                        iteration: iterations,
                        residual: rn,
                    });
                }
            } else {
                increases = 0;
            }
            if iterations == config.max_newton_iters {
                return Err(SolverError::NewtonNotConverged {
                    step,
                    iterations,
                    residual: rn,
                });
            }
            previous = rn;
            let delta = chol.solve(&r);
            for (&i, v) in free.iter().zip(delta) {
                d[i] -= v;
            }
            iterations += 1;
        };
        states = committed;
        history.times.push(step as f64 * dt);
        history.probes.push(problem.probe_dofs.iter().map(|&i| d[i]).collect());
        history.iterations.push(iterations);
    }
    history.displacement = d;
    history.states = states;
    Ok(history)
}
