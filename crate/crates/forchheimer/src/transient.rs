//! Implicit-Euler time stepping: one semi-discrete solve per step, a full
//! time loop for homogeneous boundary data, and runtime monitors for the
//! a-priori bounds that the scheme is supposed to respect.

use std::sync::Arc;

use crate::assembly::{CoefficientField, MixedSystem};
use crate::error::{Error, Result};
use crate::grid::{BoundaryData, FluxField, Mesh, ScalarField};
use crate::kernel::{f_closure, sqrt_signed, ClosureParams};
use crate::stationary::{solve_with_schedule, ContinuationSchedule, SolveReport};

/// Uniform partition of [0, T] into K steps; dt is always derived.
#[derive(Debug, Clone, Copy)]
pub struct TimeGrid {
    pub horizon: f64,
    pub steps: usize,
}

impl TimeGrid {
    pub fn new(horizon: f64, steps: usize) -> Result<Self> {
        if !(horizon > 0.0) {
            return Err(Error::contract("time horizon must be positive"));
        }
        if steps == 0 {
            return Err(Error::contract("step count must be at least 1"));
        }
        Ok(Self { horizon, steps })
    }

    pub fn dt(&self) -> f64 {
        self.horizon / self.steps as f64
    }

    pub fn time(&self, k: usize) -> f64 {
        self.dt() * k as f64
    }
}

/// Time trajectory of a datum: either frozen or one value per grid node
/// t^0 .. t^K.
#[derive(Debug, Clone)]
pub enum Trajectory<T> {
    Constant(T),
    PerStep(Vec<T>),
}

impl<T> Trajectory<T> {
    pub fn at(&self, k: usize) -> &T {
        match self {
            Trajectory::Constant(v) => v,
            Trajectory::PerStep(vs) => &vs[k],
        }
    }
}

/// Declared temporal Lipschitz constants of the time-varying data.
#[derive(Debug, Clone, Copy, Default)]
pub struct LipschitzConstants {
    pub alpha: f64,
    pub beta: f64,
    pub gamma: f64,
    pub source: f64,
}

/// Full transient problem description. Validated once at construction:
/// trajectory lengths, per-step coefficient bounds (inside
/// CoefficientField), and the declared Lipschitz rates.
#[derive(Debug, Clone)]
pub struct TransientProblem {
    pub time_grid: TimeGrid,
    pub coeffs: Trajectory<CoefficientField>,
    pub lipschitz: LipschitzConstants,
    pub source: Trajectory<ScalarField>,
    pub boundary: Trajectory<BoundaryData>,
    pub initial: ScalarField,
}

impl TransientProblem {
    pub fn new(
        time_grid: TimeGrid,
        coeffs: Trajectory<CoefficientField>,
        lipschitz: LipschitzConstants,
        source: Trajectory<ScalarField>,
        boundary: Trajectory<BoundaryData>,
        initial: ScalarField,
    ) -> Result<Self> {
        let mesh = initial.mesh.clone();
        let k_nodes = time_grid.steps + 1;
        let check_len = |n: usize, what: &str| {
            if n != k_nodes {
                return Err(Error::contract(format!(
                    "{what} trajectory must have one entry per time node ({k_nodes}), got {n}"
                )));
            }
            Ok(())
        };
        if let Trajectory::PerStep(cs) = &coeffs {
            check_len(cs.len(), "coefficient")?;
            for c in cs {
                Mesh::check_same(&mesh, c.mesh(), "TransientProblem coefficients")?;
            }
        } else {
            Mesh::check_same(&mesh, coeffs.at(0).mesh(), "TransientProblem coefficients")?;
        }
        if let Trajectory::PerStep(fs) = &source {
            check_len(fs.len(), "source")?;
        }
        if let Trajectory::PerStep(bs) = &boundary {
            check_len(bs.len(), "boundary")?;
        }

        let problem = Self { time_grid, coeffs, lipschitz, source, boundary, initial };
        problem.validate_lipschitz()?;
        Ok(problem)
    }

    pub fn mesh(&self) -> &Arc<Mesh> {
        &self.initial.mesh
    }

    /// Consecutive-step data differences must respect the declared rates.
    fn validate_lipschitz(&self) -> Result<()> {
        let dt = self.time_grid.dt();
        let slack = 1.0 + 1e-12;
        let max_diff = |a: &ScalarField, b: &ScalarField| {
            a.values
                .iter()
                .zip(&b.values)
                .fold(0.0f64, |m, (x, y)| m.max((x - y).abs()))
        };
        if let Trajectory::PerStep(cs) = &self.coeffs {
            for w in cs.windows(2) {
                for (name, fa, fb, l) in [
                    ("alpha", &w[0].alpha, &w[1].alpha, self.lipschitz.alpha),
                    ("beta", &w[0].beta, &w[1].beta, self.lipschitz.beta),
                    ("gamma", &w[0].gamma, &w[1].gamma, self.lipschitz.gamma),
                ] {
                    let d = max_diff(fa, fb);
                    if d > l * dt * slack {
                        return Err(Error::Validation(format!(
                            "{name} changes by {d:.3e} per step, exceeding the declared \
                             Lipschitz rate L*dt = {:.3e}",
                            l * dt
                        )));
                    }
                }
            }
        }
        if let Trajectory::PerStep(fs) = &self.source {
            for w in fs.windows(2) {
                let d = max_diff(&w[0], &w[1]);
                if d > self.lipschitz.source * dt * slack {
                    return Err(Error::Validation(format!(
                        "source changes by {d:.3e} per step, exceeding the declared \
                         Lipschitz rate L*dt = {:.3e}",
                        self.lipschitz.source * dt
                    )));
                }
            }
        }
        Ok(())
    }

    /// Worst-case coefficient lower bounds over the whole trajectory.
    fn global_lower_bounds(&self) -> (f64, f64) {
        match &self.coeffs {
            Trajectory::Constant(c) => (c.phi_bounds.0, c.gamma_bounds.0),
            Trajectory::PerStep(cs) => cs.iter().fold((f64::INFINITY, f64::INFINITY), |acc, c| {
                (acc.0.min(c.phi_bounds.0), acc.1.min(c.gamma_bounds.0))
            }),
        }
    }
}

/// Step-size admissibility: the energy recursion needs
/// C dt < 1 with C = 2 (1/(phi_min gamma_min) + L(gamma)/gamma_min).
pub fn check_dt_admissible(problem: &TransientProblem) -> (bool, f64) {
    let (phi_min, gamma_min) = problem.global_lower_bounds();
    let c = 2.0 * (1.0 / (phi_min * gamma_min) + problem.lipschitz.gamma / gamma_min);
    let c_dt = c * problem.time_grid.dt();
    (c_dt < 1.0, c_dt)
}

/// Per-step record of the monitored quantities.
#[derive(Debug, Clone, Copy)]
pub struct StepRecord {
    pub step: usize,
    pub time: f64,
    /// Weighted energy: sum area phi gamma^k |S^k|^{3/2}.
    pub energy: f64,
    /// ||m^k||_{0,3} with centroid magnitudes.
    pub flux_norm: f64,
    /// dt * ||(S^k - S^{k-1})/dt||_{3/2}^{3/2}.
    pub increment: f64,
    /// Interior-jump surrogate for ||S^k||_{1,3/2}.
    pub jump_surrogate: f64,
    /// |sum area phi (rho^k - rho^{k-1}) + dt (outflux - sum area f^k)|.
    pub mass_defect: f64,
    /// Left and right sides of the per-step energy recursion.
    pub recursion_lhs: f64,
    pub recursion_rhs: f64,
}

/// Monitors filled by `run`, one record per step k = 1..K.
#[derive(Debug, Clone, Default)]
pub struct BoundMonitor {
    pub records: Vec<StepRecord>,
    /// Initial weighted energy at k = 0.
    pub initial_energy: f64,
    pub c_dt: f64,
}

impl BoundMonitor {
    pub fn increment_sum(&self) -> f64 {
        self.records.iter().map(|r| r.increment).sum()
    }

    pub fn max_mass_defect(&self) -> f64 {
        self.records.iter().fold(0.0f64, |m, r| m.max(r.mass_defect))
    }

    /// Steps whose energy recursion is violated beyond `rel_slack`.
    pub fn recursion_violations(&self, rel_slack: f64) -> Vec<usize> {
        self.records
            .iter()
            .filter(|r| r.recursion_lhs > r.recursion_rhs * (1.0 + rel_slack) + rel_slack)
            .map(|r| r.step)
            .collect()
    }
}

fn weighted_energy(coeffs: &CoefficientField, s: &ScalarField) -> f64 {
    s.mesh
        .cells
        .iter()
        .enumerate()
        .map(|(c, cell)| {
            cell.measure
                * coeffs.phi.values[c]
                * coeffs.gamma.values[c]
                * s.values[c].abs().powf(1.5)
        })
        .sum()
}

fn flux_l3_norm(m: &FluxField) -> f64 {
    m.mesh
        .cells
        .iter()
        .enumerate()
        .map(|(c, cell)| {
            let v = m.cell_vector(c);
            cell.measure * v[0].hypot(v[1]).powi(3)
        })
        .sum::<f64>()
        .cbrt()
}

fn jump_surrogate(s: &ScalarField) -> f64 {
    let mut sum = 0.0;
    for e in &s.mesh.edges {
        if e.cells.len() == 2 {
            let d = s.values[e.cells[0].0] - s.values[e.cells[1].0];
            sum += e.length * d.abs().powf(1.5);
        }
    }
    sum.powf(2.0 / 3.0)
}

/// One implicit-Euler step: solve the semi-discrete system at step `k`
/// with the lagged density from `prev_s`, regularized by d_eps only and
/// driven to eps = 0.
pub fn step(
    problem: &TransientProblem,
    k: usize,
    prev_s: &ScalarField,
    tol: f64,
) -> Result<((FluxField, ScalarField), SolveReport)> {
    step_from(problem, k, prev_s, None, tol)
}

/// Like `step`, with an optional warm-start flux (used by `run`).
pub fn step_from(
    problem: &TransientProblem,
    k: usize,
    prev_s: &ScalarField,
    warm_m: Option<&FluxField>,
    tol: f64,
) -> Result<((FluxField, ScalarField), SolveReport)> {
    if k == 0 || k > problem.time_grid.steps {
        return Err(Error::contract(format!(
            "step index {k} outside 1..={}",
            problem.time_grid.steps
        )));
    }
    Mesh::check_same(problem.mesh(), &prev_s.mesh, "transient step")?;
    let coeffs = problem.coeffs.at(k).clone();
    let prev_gamma = problem.coeffs.at(k - 1).gamma.clone();
    let sys = MixedSystem::semi_discrete(
        coeffs,
        problem.boundary.at(k).clone(),
        problem.source.at(k).clone(),
        problem.time_grid.dt(),
        prev_s.clone(),
        prev_gamma,
        0.0,
    )?;
    // The lagged-density term already makes the semi-discrete operator
    // uniformly monotone, so a long eps sweep is unnecessary: one damped
    // pre-solve at a small eps, then the exact polish.
    let schedule = ContinuationSchedule::new(1e-3, 0.25, 1, 1e30)?;
    let init_m = warm_m.cloned().unwrap_or_else(|| FluxField::zeros(&sys.mesh));
    solve_with_schedule(&sys, (init_m, prev_s.clone()), &schedule, tol)
}

/// Trajectory of a transient run with the step-function (pi) and
/// piecewise-linear (lambda) time interpolants.
#[derive(Debug)]
pub struct TransientSolution {
    pub time_grid: TimeGrid,
    /// States at t^0 .. t^K; index 0 holds (m^0, S^0) with the flux
    /// reconstructed from the initial scalar field.
    pub states: Vec<(FluxField, ScalarField)>,
    pub monitor: BoundMonitor,
}

impl TransientSolution {
    fn bracket(&self, t: f64) -> (usize, usize, f64) {
        let dt = self.time_grid.dt();
        let k = self.time_grid.steps;
        if t <= 0.0 {
            return (0, 0, 0.0);
        }
        if t >= self.time_grid.horizon {
            return (k, k, 0.0);
        }
        let lo = (t / dt).floor() as usize;
        let theta = (t - lo as f64 * dt) / dt;
        (lo, lo + 1, theta)
    }

    /// Step-function interpolant: the value of step k on (t^{k-1}, t^k].
    pub fn pi_s(&self, t: f64) -> &ScalarField {
        let (lo, hi, theta) = self.bracket(t);
        let k = if theta > 0.0 { hi } else { lo };
        &self.states[k].1
    }

    pub fn pi_m(&self, t: f64) -> &FluxField {
        let (lo, hi, theta) = self.bracket(t);
        let k = if theta > 0.0 { hi } else { lo };
        &self.states[k].0
    }

    /// Piecewise-linear interpolant in time.
    pub fn lambda_s(&self, t: f64) -> ScalarField {
        let (lo, hi, theta) = self.bracket(t);
        let a = &self.states[lo].1;
        let b = &self.states[hi].1;
        let values = a
            .values
            .iter()
            .zip(&b.values)
            .map(|(x, y)| (1.0 - theta) * x + theta * y)
            .collect();
        ScalarField { mesh: a.mesh.clone(), values }
    }

    pub fn final_state(&self) -> &(FluxField, ScalarField) {
        self.states.last().unwrap()
    }
}

/// Initial flux interpretation m^0 = -F^0(grad_h S^0): one-sided edge
/// differences of the initial scalar, boundary values taken from the
/// (homogeneous) trace.
pub fn initial_flux(problem: &TransientProblem) -> FluxField {
    let mesh = problem.mesh();
    let coeffs = problem.coeffs.at(0);
    let s0 = &problem.initial;
    let boundary = problem.boundary.at(0);
    let mut bvals = vec![0.0; mesh.n_edges()];
    let mut is_boundary = vec![false; mesh.n_edges()];
    for (b, v) in mesh.boundary.iter().zip(&boundary.values) {
        bvals[b.edge] = *v;
        is_boundary[b.edge] = true;
    }
    let mut fluxes = vec![0.0; mesh.n_edges()];
    for (eid, edge) in mesh.edges.iter().enumerate() {
        let h = if edge.normal[0] == 1.0 { mesh.hx() } else { mesh.hy() };
        // Cell on the positive/negative side of the edge normal.
        let mut s_neg = None;
        let mut s_pos = None;
        let mut cell_for_params = 0;
        for &(c, sign) in &edge.cells {
            cell_for_params = c;
            if sign > 0.0 {
                s_neg = Some(s0.values[c]);
            } else {
                s_pos = Some(s0.values[c]);
            }
        }
        let grad = match (s_neg, s_pos) {
            (Some(a), Some(b)) => (b - a) / h,
            (Some(a), None) => (bvals[eid] - a) / (0.5 * h),
            (None, Some(b)) => (b - bvals[eid]) / (0.5 * h),
            (None, None) => 0.0,
        };
        let params = ClosureParams::new(
            coeffs.alpha.values[cell_for_params],
            coeffs.beta.values[cell_for_params],
            coeffs.gamma.values[cell_for_params],
        )
        .expect("validated coefficients");
        let f1 = f_closure(&params, [grad, 0.0]).expect("finite gradient");
        fluxes[eid] = -f1[0] * edge.length;
    }
    FluxField { mesh: mesh.clone(), edge_fluxes: fluxes }
}

/// Run the full homogeneous time loop: K warm-started implicit-Euler
/// steps with every a-priori monitor recorded.
pub fn run(problem: &TransientProblem, tol: f64) -> Result<TransientSolution> {
    match &problem.boundary {
        Trajectory::Constant(b) if b.is_homogeneous() => {}
        Trajectory::PerStep(bs) if bs.iter().all(|b| b.is_homogeneous()) => {}
        _ => {
            return Err(Error::Validation(
                "the full time loop requires homogeneous boundary data; \
                 nonzero traces are only admitted in single-step mode"
                    .into(),
            ))
        }
    }
    let (admissible, c_dt) = check_dt_admissible(problem);
    if !admissible {
        return Err(Error::Validation(format!(
            "time step too large: C*dt = {c_dt:.6} >= 1; refine the time grid"
        )));
    }

    let dt = problem.time_grid.dt();
    let k_steps = problem.time_grid.steps;
    let mut monitor = BoundMonitor {
        records: Vec::with_capacity(k_steps),
        initial_energy: weighted_energy(problem.coeffs.at(0), &problem.initial),
        c_dt,
    };
    let m0 = initial_flux(problem);
    let mut states: Vec<(FluxField, ScalarField)> = vec![(m0, problem.initial.clone())];

    for k in 1..=k_steps {
        let (prev_m, prev_s) = states.last().unwrap().clone();
        let warm = if k == 1 { None } else { Some(&prev_m) };
        let ((m, s), _report) = step_from(problem, k, &prev_s, warm, tol)?;

        let coeffs_k = problem.coeffs.at(k);
        let coeffs_prev = problem.coeffs.at(k - 1);
        let energy = weighted_energy(coeffs_k, &s);
        let prev_energy = if k == 1 {
            monitor.initial_energy
        } else {
            monitor.records.last().unwrap().energy
        };
        let f_k = problem.source.at(k);
        let f_norm3 = f_k.lp_norm(3.0)?;
        let recursion_rhs = (prev_energy + dt * f_norm3.powi(3)) / (1.0 - c_dt);

        let ds = s.sub(&prev_s)?;
        let increment = dt * ds.lp_norm(1.5)?.powf(1.5) / dt.powf(1.5);

        let mut mass = 0.0;
        for (c, cell) in s.mesh.cells.iter().enumerate() {
            let rho_k = coeffs_k.gamma.values[c] * sqrt_signed(s.values[c]);
            let rho_prev = coeffs_prev.gamma.values[c] * sqrt_signed(prev_s.values[c]);
            mass += cell.measure * coeffs_k.phi.values[c] * (rho_k - rho_prev);
        }
        let source_total: f64 = s
            .mesh
            .cells
            .iter()
            .zip(&f_k.values)
            .map(|(cell, f)| cell.measure * f)
            .sum();
        let mass_defect = (mass + dt * (m.total_boundary_outflux() - source_total)).abs();

        monitor.records.push(StepRecord {
            step: k,
            time: problem.time_grid.time(k),
            energy,
            flux_norm: flux_l3_norm(&m),
            increment,
            jump_surrogate: jump_surrogate(&s),
            mass_defect,
            recursion_lhs: energy,
            recursion_rhs,
        });
        states.push((m, s));
    }

    Ok(TransientSolution { time_grid: problem.time_grid, states, monitor })
}
