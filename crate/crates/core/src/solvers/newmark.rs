use super::linear::SparseCholesky;
use super::{SolveConfig, SolverError};
use crate::assembly::CsrMatrix;

type DofFn<'a> = Box<dyn Fn(f64, usize) -> f64 + Sync + 'a>;

/// Time-dependent Dirichlet data: prescribed displacement and acceleration
/// of each constrained dof as functions of `(t, dof)`.
pub struct DirichletSchedule<'a> {
    pub dofs: Vec<usize>,
    pub displacement: DofFn<'a>,
    pub acceleration: DofFn<'a>,
}

impl<'a> DirichletSchedule<'a> {
    pub fn none() -> Self {
        Self::fixed(Vec::new())
    }

    /// Dofs held at zero for all time.
    pub fn fixed(dofs: Vec<usize>) -> Self {
        Self {
            dofs,
            displacement: Box::new(|_, _| 0.0),
            acceleration: Box::new(|_, _| 0.0),
        }
    }

    pub fn new(
        dofs: Vec<usize>,
        displacement: impl Fn(f64, usize) -> f64 + Sync + 'a,
        acceleration: impl Fn(f64, usize) -> f64 + Sync + 'a,
    ) -> Self {
        Self {
            dofs,
            displacement: Box::new(displacement),
            acceleration: Box::new(acceleration),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct NewmarkState {
    pub t: f64,
    pub d: Vec<f64>,
    pub v: Vec<f64>,
    pub a: Vec<f64>,
}

/// Selected dof values over time.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct TimeHistory {
    pub times: Vec<f64>,
    /// `probes[step][i]` is the value of the i-th probed dof.
    pub probes: Vec<Vec<f64>>,
}

/// Implicit Newmark integrator for `M a + K d = f(t)`.
///
/// The effective matrix `K + M / (beta dt^2)` restricted to the free dofs is
/// factorized once.
pub struct Newmark<'a> {
    m: CsrMatrix,
    k: CsrMatrix,
    schedule: DirichletSchedule<'a>,
    free: Vec<usize>,
    fixed_mask: Vec<bool>,
    keff: SparseCholesky,
    beta: f64,
    gamma: f64,
    dt: f64,
}

impl<'a> Newmark<'a> {
    pub fn new(m: CsrMatrix, k: CsrMatrix, schedule: DirichletSchedule<'a>, config: &SolveConfig) -> Result<Self, SolverError> {
        config.validate()?;
        let n = k.nrows();
        if m.nrows() != n {
            return Err(SolverError::InvalidInput(format!("mass is {}x{}, stiffness is {n}x{n}", m.nrows(), m.ncols())));
        }
        let mut fixed_mask = vec![false; n];
        for &d in &schedule.dofs {
            *fixed_mask
                .get_mut(d)
                .ok_or_else(|| SolverError::InvalidInput(format!("constrained dof {d} out of range")))? = true;
        }
        let free: Vec<usize> = (0..n).filter(|&i| !fixed_mask[i]).collect();
        let (beta, dt) = (config.newmark_beta, config.dt);
        let keff = k.linear_combination(1.0, &m, 1.0 / (beta * dt * dt))?.submatrix(&free);
        Ok(Self {
            keff: SparseCholesky::new(&keff)?,
            m,
            k,
            schedule,
            free,
            fixed_mask,
            beta,
            gamma: config.newmark_gamma,
            dt,
        })
    }

    pub fn dim(&self) -> usize {
        self.k.nrows()
    }

    fn prescribed(&self, t: f64, f: &DofFn<'a>) -> Vec<f64> {
        let mut out = vec![0.0; self.dim()];
        for &d in &self.schedule.dofs {
            out[d] = f(t, d);
        }
        out
    }

    /// Initial state with `M a_0 = f(0) - K d_0` on the free dofs. Constrained
    /// dofs take their scheduled displacement and acceleration.
    pub fn initial_state(&self, t0: f64, d0: Vec<f64>, v0: Vec<f64>, f0: &[f64]) -> Result<NewmarkState, SolverError> {
        let n = self.dim();
        if d0.len() != n || v0.len() != n || f0.len() != n {
            return Err(SolverError::InvalidInput("initial vectors have the wrong length".into()));
        }
        let mut d = d0;
        for &i in &self.schedule.dofs {
            d[i] = (self.schedule.displacement)(t0, i);
        }
        let ac = self.prescribed(t0, &self.schedule.acceleration);
        let kd = self.k.matvec(&d);
        let mac = self.m.matvec(&ac);
        let rhs: Vec<f64> = self.free.iter().map(|&i| f0[i] - kd[i] - mac[i]).collect();
        let af = SparseCholesky::new(&self.m.submatrix(&self.free))?.solve(&rhs);
        let mut a = ac;
        for (&i, v) in self.free.iter().zip(af) {
            a[i] = v;
        }
        Ok(NewmarkState { t: t0, d, v: v0, a })
    }

    /// Advances one step; `f_next` is the load at `t + dt`.
    pub fn step(&self, s: &NewmarkState, f_next: &[f64]) -> Result<NewmarkState, SolverError> {
        let (b, g, dt) = (self.beta, self.gamma, self.dt);
        let t = s.t + dt;
        let n = self.dim();
        let c = 1.0 / (b * dt * dt);
        let predictor: Vec<f64> = (0..n)
            .map(|i| s.d[i] + dt * s.v[i] + dt * dt * (0.5 - b) * s.a[i])
            .collect();
        let dc = self.prescribed(t, &self.schedule.displacement);
        let ac = self.prescribed(t, &self.schedule.acceleration);
        let mut inertia = ac.clone();
        for &i in &self.free {
            inertia[i] = -c * predictor[i];
        }
        let m_part = self.m.matvec(&inertia);
        let k_part = self.k.matvec(&dc);
        let rhs: Vec<f64> = self.free.iter().map(|&i| f_next[i] - m_part[i] - k_part[i]).collect();
        let df = self.keff.solve(&rhs);
        let mut d = dc;
        for (&i, v) in self.free.iter().zip(df) {
            d[i] = v;
        }
        let a: Vec<f64> = (0..n)
            .map(|i| if self.fixed_mask[i] { ac[i] } else { c * (d[i] - predictor[i]) })
            .collect();
        let v: Vec<f64> = (0..n).map(|i| s.v[i] + dt * ((1.0 - g) * s.a[i] + g * a[i])).collect();
        Ok(NewmarkState { t, d, v, a })
    }

    /// `v^T M v / 2 + d^T K d / 2`.
    pub fn energy(&self, s: &NewmarkState) -> f64 {
        let dot = |x: &[f64], y: &[f64]| x.iter().zip(y).map(|(p, q)| p * q).sum::<f64>();
        0.5 * dot(&s.v, &self.m.matvec(&s.v)) + 0.5 * dot(&s.d, &self.k.matvec(&s.d))
    }

    /// Runs `n_steps` from `initial`, recording `probe_dofs` of the
    /// displacement at every step (including the initial one).
    pub fn run<F>(
        &self,
        initial: NewmarkState,
        n_steps: usize,
        force: F,
        probe_dofs: &[usize],
    ) -> Result<(NewmarkState, TimeHistory), SolverError>
    where
        F: Fn(f64) -> Vec<f64>,
    {
        let mut history = TimeHistory::default();
        let record = |h: &mut TimeHistory, s: &NewmarkState| {
            h.times.push(s.t);
            h.probes.push(probe_dofs.iter().map(|&i| s.d[i]).collect());
        };
        record(&mut history, &initial);
        let mut state = initial;
        for _ in 0..n_steps {
            let f = force(state.t + self.dt);
            state = self.step(&state, &f)?;
            record(&mut history, &state);
        }
        Ok((state, history))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::DMatrix;

    fn config(dt: f64) -> SolveConfig {
        SolveConfig {
            dt,
            ..SolveConfig::default()
        }
    }

    #[test]
    fn zero_load_from_rest_stays_at_rest() {
        let k = CsrMatrix::from_dense(&DMatrix::from_row_slice(2, 2, &[2.0, -1.0, -1.0, 2.0]));
        let m = CsrMatrix::identity(2);
        let nm = Newmark::new(m, k, DirichletSchedule::none(), &config(0.1)).unwrap();
        let s0 = nm.initial_state(0.0, vec![0.0; 2], vec![0.0; 2], &[0.0; 2]).unwrap();
        let (s, h) = nm.run(s0, 10, |_| vec![0.0; 2], &[0, 1]).unwrap();
        assert!(s.d.iter().chain(&s.v).chain(&s.a).all(|&x| x == 0.0));
        assert_eq!(h.times.len(), 11);
    }

    #[test]
    fn single_oscillator_keeps_its_amplitude() {
        let omega: f64 = 2.0;
        let period = 2.0 * std::f64::consts::PI / omega;
        let k = CsrMatrix::from_dense(&DMatrix::from_element(1, 1, omega * omega));
        let nm = Newmark::new(CsrMatrix::identity(1), k, DirichletSchedule::none(), &config(period / 100.0)).unwrap();
        let s0 = nm.initial_state(0.0, vec![1.0], vec![0.0], &[0.0]).unwrap();
        let (s, _) = nm.run(s0, 100, |_| vec![0.0], &[]).unwrap();
        let amplitude = (s.d[0].powi(2) + (s.v[0] / omega).powi(2)).sqrt();
        assert!((amplitude - 1.0).abs() < 1e-6);
    }

    #[test]
    fn prescribed_motion_is_followed() {
        // Two masses; the first is driven by u(t) = t^2, the second is free
        // and linked by a spring. Constrained dofs must track the schedule.
        let k = CsrMatrix::from_dense(&DMatrix::from_row_slice(2, 2, &[1.0, -1.0, -1.0, 1.0]));
        let sched = DirichletSchedule::new(vec![0], |t, _| t * t, |_, _| 2.0);
        let nm = Newmark::new(CsrMatrix::identity(2), k, sched, &config(0.05)).unwrap();
        let s0 = nm.initial_state(0.0, vec![0.0; 2], vec![0.0; 2], &[0.0; 2]).unwrap();
        let (s, _) = nm.run(s0, 20, |_| vec![0.0; 2], &[]).unwrap();
        assert!((s.d[0] - 1.0).abs() < 1e-14);
        assert!((s.v[0] - 2.0).abs() < 1e-12);
        assert!(s.d[1] > 0.0 && s.d[1] < 1.0);
    }
}
