//! Nonlinear solves of the stationary mixed problem: damped Newton with a
//! Picard fallback per regularization stage, an eps -> 0 continuation
//! driver, and a direct divergence-free path for homogeneous sources.

use std::time::Instant;

use nalgebra::{DMatrix, DVector};

use crate::assembly::{b_matrix, pack, unpack, MixedSystem};
use crate::error::{Error, Result};
use crate::grid::{FluxField, Mesh, ScalarField};
use std::sync::Arc;

/// Geometric eps schedule driving the regularization to zero.
#[derive(Debug, Clone)]
pub struct ContinuationSchedule {
    pub eps0: f64,
    pub factor: f64,
    pub max_stages: usize,
    /// Successive-stage distance in ||.||_{W^3(div)} + ||.||_{3/2} below
    /// which the continuation is declared settled.
    pub stage_tol: f64,
}

impl ContinuationSchedule {
    pub fn new(eps0: f64, factor: f64, max_stages: usize, stage_tol: f64) -> Result<Self> {
        if !(eps0 > 0.0) {
            return Err(Error::contract("eps0 must be positive"));
        }
        if !(factor > 0.0 && factor < 1.0) {
            return Err(Error::contract("continuation factor must lie in (0,1)"));
        }
        if max_stages == 0 {
            return Err(Error::contract("max_stages must be at least 1"));
        }
        if !(stage_tol > 0.0) {
            return Err(Error::contract("stage_tol must be positive"));
        }
        Ok(Self { eps0, factor, max_stages, stage_tol })
    }

    /// eps0 = 1, factor = 1/4, 12 stages, stage_tol scaled by the data norm.
    pub fn default_for(data_norm: f64) -> Self {
        Self {
            eps0: 1.0,
            factor: 0.25,
            max_stages: 12,
            stage_tol: 1e-6 * (1.0 + data_norm),
        }
    }
}

/// Record of one regularization stage.
#[derive(Debug, Clone)]
pub struct StageRecord {
    pub eps: f64,
    pub newton_iters: usize,
    pub final_residual: f64,
}

/// Norms tracked for the boundedness checks: flux, scalar, and the
/// divergence defect against the projected source.
#[derive(Debug, Clone, Copy, Default)]
pub struct MonitoredNorms {
    pub m_w3div: f64,
    pub s_l32: f64,
    pub div_defect: f64,
}

/// Per-solve diagnostics. Returned alongside every solution and embedded
/// in nonconvergence errors so a failed run still explains itself.
#[derive(Debug, Clone, Default)]
pub struct SolveReport {
    pub converged: bool,
    pub stages: Vec<StageRecord>,
    pub residual_history: Vec<f64>,
    pub monitored_norms: MonitoredNorms,
    pub picard_sweeps: usize,
    pub wall_time_secs: f64,
}

impl SolveReport {
    fn record_norms(&mut self, sys: &MixedSystem, m: &FluxField, s: &ScalarField) {
        let div = m.divergence();
        let mut defect = ScalarField::zeros(&sys.mesh);
        for c in 0..sys.mesh.n_cells() {
            defect.values[c] = div.values[c] - sys.source.values[c];
        }
        self.monitored_norms = MonitoredNorms {
            m_w3div: m.ws_div_norm(3.0).unwrap_or(f64::NAN),
            s_l32: s.lp_norm(1.5).unwrap_or(f64::NAN),
            div_defect: defect.lp_norm(1.5).unwrap_or(f64::NAN),
        };
    }
}

/// Scaled Euclidean surrogate for the dual-norm residual.
pub(crate) fn residual_norm(r: &DVector<f64>) -> f64 {
    r.norm() / (r.len() as f64).sqrt()
}

/// Combined state distance ||dm||_{W^3(div)} + ||dS||_{3/2}.
pub fn state_distance(
    m1: &FluxField,
    s1: &ScalarField,
    m2: &FluxField,
    s2: &ScalarField,
) -> Result<f64> {
    let dm = m1.sub(m2)?;
    let ds = s1.sub(s2)?;
    Ok(dm.ws_div_norm(3.0)? + ds.lp_norm(1.5)?)
}

fn lu_solve(j: &DMatrix<f64>, r: &DVector<f64>) -> Result<DVector<f64>> {
    let lu = j.clone().lu();
    match lu.solve(&(-r)) {
        Some(x) if x.iter().all(|v| v.is_finite()) => Ok(x),
        _ => Err(Error::Conditioning(
            "saddle Jacobian is singular to working precision".into(),
        )),
    }
}

const MAX_BACKTRACKS: usize = 40;
const PICARD_SWEEPS: usize = 5;
const MAX_PICARD_RESCUES: usize = 8;

/// Solve one fixed-eps (or one semi-discrete) instance by damped Newton.
///
/// The residual is driven below `tol` in the scaled Euclidean norm. When
/// the Armijo line search stalls, a few Picard sweeps with lagged
/// coefficients restart Newton from a better basin; uniform monotonicity
/// of the regularized operator makes that fallback globally safe.
pub fn solve_regularized(
    sys: &MixedSystem,
    initial: (FluxField, ScalarField),
    tol: f64,
    max_iter: usize,
) -> Result<((FluxField, ScalarField), SolveReport)> {
    if !(tol > 0.0) {
        return Err(Error::contract("tol must be positive"));
    }
    if !sys.is_semi_discrete() && sys.eps <= 0.0 {
        return Err(Error::contract("solve_regularized needs eps > 0 on stationary systems"));
    }
    let start = Instant::now();
    let mut report = SolveReport::default();
    let (state, iters, res) = newton_loop(sys, initial, tol, max_iter, &mut report)?;
    report.converged = true;
    report.stages.push(StageRecord { eps: sys.eps, newton_iters: iters, final_residual: res });
    report.record_norms(sys, &state.0, &state.1);
    report.wall_time_secs = start.elapsed().as_secs_f64();
    Ok((state, report))
}

/// Inner Newton iteration shared by all entry points. Returns the state,
/// the iteration count, and the final residual norm.
fn newton_loop(
    sys: &MixedSystem,
    initial: (FluxField, ScalarField),
    tol: f64,
    max_iter: usize,
    report: &mut SolveReport,
) -> Result<((FluxField, ScalarField), usize, f64)> {
    Mesh::check_same(&sys.mesh, &initial.0.mesh, "newton_loop")?;
    Mesh::check_same(&sys.mesh, &initial.1.mesh, "newton_loop")?;
    let mesh = sys.mesh.clone();
    let mut x = pack(&initial.0, &initial.1);
    let mut picard_rescues = 0usize;
    let mut stall_count = 0usize;

    let eval = |x: &DVector<f64>| -> Result<DVector<f64>> {
        let (m, s) = unpack(&mesh, x);
        sys.residual(&m, &s)
    };

    let mut r = eval(&x)?;
    let mut rn = residual_norm(&r);
    report.residual_history.push(rn);

    for iter in 0..max_iter {
        if rn <= tol {
            let (m, s) = unpack(&mesh, &x);
            return Ok(((m, s), iter, rn));
        }
        let (m, s) = unpack(&mesh, &x);
        // Residual-scaled smoothing: the square-root density has a
        // vertical tangent at S = 0, so far from the solution the exact
        // slope produces near-zero Newton steps. Softening the Jacobian
        // (never the residual) proportionally to the current residual
        // restores fast global progress and still collapses to the exact
        // linearization as rn -> 0.
        let mut lin_sys = sys.clone();
        lin_sys.smoothing_delta = sys.smoothing_delta.max(rn.min(0.1));
        let (j, _) = lin_sys.linearize(&m, &s)?;
        let dx = lu_solve(&j, &r)?;

        // Armijo backtracking on the residual norm.
        let rn_before = rn;
        let mut lambda = 1.0;
        let mut accepted = false;
        for _ in 0..MAX_BACKTRACKS {
            let xt = &x + lambda * &dx;
            let rt = eval(&xt)?;
            let rtn = residual_norm(&rt);
            if rtn.is_finite() && rtn <= (1.0 - 1e-4 * lambda) * rn {
                x = xt;
                r = rt;
                rn = rtn;
                accepted = true;
                break;
            }
            lambda *= 0.5;
        }
        // Fall back to Picard when the line search fails outright, or
        // when damped steps stop making real progress (the sqrt density
        // makes the residual landscape very flat around S = 0, where
        // Newton directions are near-orthogonal to the descent path while
        // the lagged-coefficient sweep cuts straight through).
        if accepted && rn > 0.99 * rn_before {
            stall_count += 1;
        } else if accepted {
            stall_count = 0;
        }
        if !accepted || stall_count >= 3 {
            stall_count = 0;
            if picard_rescues >= MAX_PICARD_RESCUES {
                return Err(Error::Nonconvergence {
                    final_residual: rn,
                    iterations: iter,
                    report: Box::new(std::mem::take(report)),
                });
            }
            picard_rescues += 1;
            for _ in 0..PICARD_SWEEPS {
                let (m, s) = unpack(&mesh, &x);
                let (k, rhs) = sys.picard_system(&m, &s)?;
                let lu = k.lu();
                match lu.solve(&rhs) {
                    Some(next) if next.iter().all(|v| v.is_finite()) => x = next,
                    _ => {
                        return Err(Error::Conditioning(
                            "Picard system singular to working precision".into(),
                        ))
                    }
                }
                report.picard_sweeps += 1;
            }
            r = eval(&x)?;
            rn = residual_norm(&r);
        }
        report.residual_history.push(rn);
    }

    if rn <= tol {
        let (m, s) = unpack(&mesh, &x);
        return Ok(((m, s), max_iter, rn));
    }
    Err(Error::Nonconvergence {
        final_residual: rn,
        iterations: max_iter,
        report: Box::new(std::mem::take(report)),
    })
}

const STAGE_MAX_ITER: usize = 60;

/// Norm of the problem data, used to scale stage tolerances.
pub fn data_norm(sys: &MixedSystem) -> f64 {
    let f = sys.source.lp_norm(3.0).unwrap_or(0.0);
    f + sys.boundary.max_abs()
}

/// Drive eps -> 0 by warm-started continuation, then polish at eps = 0.
///
/// Stops refining eps once two successive stage solutions are closer than
/// `schedule.stage_tol`; the final Newton polish removes the c_eps and
/// d_eps terms entirely, so the returned state satisfies the unregularized
/// equations to `tol`.
pub fn solve_stationary(
    sys: &MixedSystem,
    schedule: &ContinuationSchedule,
    tol: f64,
) -> Result<((FluxField, ScalarField), SolveReport)> {
    solve_with_schedule(sys, (FluxField::zeros(&sys.mesh), ScalarField::zeros(&sys.mesh)), schedule, tol)
}

/// Continuation from a caller-supplied start (used by the transient loop
/// for warm starts and by the multi-start uniqueness probes).
pub fn solve_with_schedule(
    sys: &MixedSystem,
    initial: (FluxField, ScalarField),
    schedule: &ContinuationSchedule,
    tol: f64,
) -> Result<((FluxField, ScalarField), SolveReport)> {
    if !(tol > 0.0) {
        return Err(Error::contract("tol must be positive"));
    }
    let start = Instant::now();
    let mut report = SolveReport::default();
    let mut state = initial;
    let mut prev_state: Option<(FluxField, ScalarField)> = None;
    let mut eps = schedule.eps0;
    let mut settled = false;
    let mut last_distance = f64::INFINITY;
    let mut unregularized = sys.clone();
    unregularized.eps = 0.0;

    for _stage in 0..schedule.max_stages {
        let mut stage_sys = sys.clone();
        stage_sys.eps = eps;
        let stage_tol = tol.max(0.1 * schedule.stage_tol);
        let (next, iters, res) =
            newton_loop(&stage_sys, state.clone(), stage_tol, STAGE_MAX_ITER, &mut report)?;
        report.stages.push(StageRecord { eps, newton_iters: iters, final_residual: res });
        if let Some((pm, ps)) = &prev_state {
            last_distance = state_distance(&next.0, &next.1, pm, ps)?;
            if last_distance <= schedule.stage_tol {
                state = next;
                settled = true;
                break;
            }
        }
        // If the regularization no longer matters (the exact residual is
        // already below the stage tolerance), continuing the eps sweep
        // only burns stages; jump to the polish.
        let exact_res = residual_norm(&unregularized.residual(&next.0, &next.1)?);
        if exact_res <= schedule.stage_tol {
            state = next;
            settled = true;
            break;
        }
        prev_state = Some(next.clone());
        state = next;
        eps *= schedule.factor;
    }

    if !settled && schedule.max_stages > 1 {
        report.record_norms(sys, &state.0, &state.1);
        report.wall_time_secs = start.elapsed().as_secs_f64();
        return Err(Error::ContinuationExhausted {
            stages: schedule.max_stages,
            last_distance,
            report: Box::new(report),
        });
    }

    // eps = 0 polish: the exact problem, warm started from the settled
    // continuation state.
    let mut final_sys = sys.clone();
    final_sys.eps = 0.0;
    let (polished, iters, res) = newton_loop(&final_sys, state, tol, STAGE_MAX_ITER, &mut report)?;
    report.stages.push(StageRecord { eps: 0.0, newton_iters: iters, final_residual: res });
    report.converged = true;
    report.record_norms(sys, &polished.0, &polished.1);
    report.wall_time_secs = start.elapsed().as_secs_f64();
    Ok((polished, report))
}

/// Homogeneous fast path: with f = 0 the flux lies in the divergence-free
/// subspace, so the problem reduces to an unconstrained monotone system on
/// a null-space basis of B; S is recovered from the momentum equation.
pub fn solve_homogeneous_divfree(
    sys: &MixedSystem,
    tol: f64,
) -> Result<((FluxField, ScalarField), SolveReport)> {
    if !sys.source.is_zero() {
        return Err(Error::contract("solve_homogeneous_divfree requires f = 0"));
    }
    if sys.is_semi_discrete() {
        return Err(Error::contract("divergence-free path is stationary only"));
    }
    if !(tol > 0.0) {
        return Err(Error::contract("tol must be positive"));
    }
    let start = Instant::now();
    let mesh = &sys.mesh;
    let z = divfree_basis(mesh);
    let nz = z.ncols();
    let mut report = SolveReport::default();

    // Momentum residual restricted to the subspace: Z^T (Avec(m) - gvec),
    // with m = Z y. The d- and c-terms vanish identically here.
    let mut df_sys = sys.clone();
    df_sys.eps = 0.0;
    let mom_residual = |m: &FluxField| -> Result<DVector<f64>> {
        let full = df_sys.residual(m, &ScalarField::zeros(mesh))?;
        Ok(full.rows(0, mesh.n_edges()).into_owned())
    };

    let mut y = DVector::zeros(nz);
    let flux_of = |y: &DVector<f64>| -> FluxField {
        let f = &z * y;
        FluxField { mesh: mesh.clone(), edge_fluxes: f.as_slice().to_vec() }
    };

    let mut m = flux_of(&y);
    let mut r_full = mom_residual(&m)?;
    let mut r = z.transpose() * &r_full;
    let mut rn = residual_norm(&r);
    report.residual_history.push(rn);
    let mut iters = 0;
    for iter in 0..STAGE_MAX_ITER {
        iters = iter;
        if rn <= tol {
            break;
        }
        let (j_full, _) = df_sys.linearize(&m, &ScalarField::zeros(mesh))?;
        let j_mm = j_full
            .view((0, 0), (mesh.n_edges(), mesh.n_edges()))
            .into_owned();
        let jr = z.transpose() * j_mm * &z;
        let dy = lu_solve(&jr, &r)?;
        let mut lambda = 1.0;
        let mut accepted = false;
        for _ in 0..MAX_BACKTRACKS {
            let yt = &y + lambda * &dy;
            let mt = flux_of(&yt);
            let rt_full = mom_residual(&mt)?;
            let rt = z.transpose() * &rt_full;
            let rtn = residual_norm(&rt);
            if rtn.is_finite() && rtn <= (1.0 - 1e-4 * lambda) * rn {
                y = yt;
                m = mt;
                r_full = rt_full;
                r = rt;
                rn = rtn;
                accepted = true;
                break;
            }
            lambda *= 0.5;
        }
        if !accepted {
            return Err(Error::Nonconvergence {
                final_residual: rn,
                iterations: iter,
                report: Box::new(report),
            });
        }
        report.residual_history.push(rn);
    }
    if rn > tol {
        return Err(Error::Nonconvergence {
            final_residual: rn,
            iterations: STAGE_MAX_ITER,
            report: Box::new(report),
        });
    }

    // Recover S from Avec(m) - B^T S = gvec in least squares:
    // (B B^T) S = B (Avec(m) - gvec). r_full is Avec(m) - gvec here.
    let b = b_matrix(mesh);
    let normal = &b * b.transpose();
    let rhs = &b * &r_full;
    let s_vec = lu_solve(&normal, &(-rhs))?;
    let s = ScalarField { mesh: mesh.clone(), values: s_vec.as_slice().to_vec() };

    report.converged = true;
    report.stages.push(StageRecord { eps: 0.0, newton_iters: iters, final_residual: rn });
    report.record_norms(sys, &m, &s);
    report.wall_time_secs = start.elapsed().as_secs_f64();
    Ok(((m, s), report))
}

/// Basis of ker(B): one discrete curl per mesh vertex, dropping the last
/// vertex (the curls sum to zero). Columns are exactly divergence free.
pub fn divfree_basis(mesh: &Arc<Mesh>) -> DMatrix<f64> {
    let nv = mesh.n_vertices();
    let mut z = DMatrix::zeros(mesh.n_edges(), nv - 1);
    for (eid, edge) in mesh.edges.iter().enumerate() {
        let [v0, v1] = edge.vertices;
        if edge.normal[0] == 1.0 {
            // vertical edge: v0 bottom, v1 top
            if v1 < nv - 1 {
                z[(eid, v1)] += 1.0;
            }
            if v0 < nv - 1 {
                z[(eid, v0)] -= 1.0;
            }
        } else {
            // horizontal edge: v0 west, v1 east
            if v0 < nv - 1 {
                z[(eid, v0)] += 1.0;
            }
            if v1 < nv - 1 {
                z[(eid, v1)] -= 1.0;
            }
        }
    }
    z
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::assembly::CoefficientField;
    use crate::grid::{BoundaryData, Rect};
    use rand::{Rng, SeedableRng};

    fn stationary_sys(
        nx: usize,
        ny: usize,
        alpha: f64,
        beta: f64,
        f: f64,
        sb: impl Fn(f64, f64) -> f64,
        eps: f64,
    ) -> MixedSystem {
        let mesh = Mesh::structured(nx, ny, Rect::unit_square()).unwrap();
        let coeffs = CoefficientField::constant(&mesh, alpha, beta, 1.0, 1.0).unwrap();
        MixedSystem::stationary(
            coeffs,
            BoundaryData::from_trace(&mesh, sb),
            ScalarField::constant(&mesh, f),
            eps,
        )
        .unwrap()
    }

    #[test]
    fn zero_data_returns_zero() {
        let sys = stationary_sys(2, 2, 1.0, 1.0, 0.0, |_, _| 0.0, 1e-2);
        let init = (FluxField::zeros(&sys.mesh), ScalarField::zeros(&sys.mesh));
        let ((m, s), report) = solve_regularized(&sys, init, 1e-12, 30).unwrap();
        assert!(report.converged);
        assert!(m.ws_div_norm(3.0).unwrap() < 1e-10);
        assert!(s.lp_norm(1.5).unwrap() < 1e-10);
    }

    #[test]
    fn divfree_basis_is_in_kernel() {
        for (nx, ny) in [(1, 1), (2, 2), (3, 2), (4, 4)] {
            let mesh = Mesh::structured(nx, ny, Rect::unit_square()).unwrap();
            let z = divfree_basis(&mesh);
            assert_eq!(z.ncols(), mesh.n_vertices() - 1);
            let b = b_matrix(&mesh);
            assert!((b * &z).amax() < 1e-14);
            // columns are linearly independent
            let gram = z.transpose() * &z;
            assert!(gram.lu().determinant().abs() > 1e-10);
        }
    }

    #[test]
    fn single_cell_bisection_oracle() {
        // 1x1 unit cell, alpha = beta = 1, eps = 1e-3, f = c, S_b = 0.
        // By symmetry each edge carries flux t outward, div m = 4t, and the
        // two equations collapse to a scalar root problem solved here by
        // bisection:
        //   momentum (per edge): t/2 + eps*|4t|*4t*1 - S = 0 is replaced by
        //   the exact assembled reduction below.
        let c = 2.0;
        let eps = 1e-3;
        let sys = stationary_sys(1, 1, 1.0, 1.0, c, |_, _| 0.0, eps);

        // Assembled single-cell equations with the symmetric ansatz
        // m = (-t, t, -t, t) (outflow t on every edge): the centroid
        // reconstruction vanishes, the alpha mass gives t/6 per edge pair
        // combination; reduce by testing with the symmetric direction.
        // Instead of re-deriving by hand, solve the 1D problem numerically:
        // momentum tested with the outward pattern gives
        //   A(t) - S * (sum of signs) = 0, mass: 4t + eps-term = c.
        // Use bisection on the scalar map t -> residual after eliminating S.
        let mesh = sys.mesh.clone();
        let outward = [-1.0, 1.0, -1.0, 1.0]; // [W,E,S,N] signed for outflow t
        let flux_of = |t: f64| {
            FluxField::from_fluxes(
                &mesh,
                outward.iter().map(|s| s * t).collect(),
            )
            .unwrap()
        };
        // scalar continuity: div m + eps * sqrt_signed(S) = c, div m = 4t
        // => S = sqrt_signed^{-1}((c - 4t)/eps) = x|x| with x=(c-4t)/eps.
        let s_of = |t: f64| {
            let x = (c - 4.0 * t) / eps;
            x * x.abs()
        };
        // momentum residual in the outward direction:
        let mom = |t: f64| {
            let m = flux_of(t);
            let s = ScalarField::constant(&mesh, s_of(t));
            let r = sys.residual(&m, &s).unwrap();
            (0..4).map(|e| outward[e] * r[e]).sum::<f64>()
        };
        let (mut lo, mut hi) = (0.0, c);
        assert!(mom(lo) < 0.0 && mom(hi) > 0.0);
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if mom(mid) > 0.0 {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        let t_star = 0.5 * (lo + hi);
        let exact_m = flux_of(t_star);
        let exact_s = ScalarField::constant(&mesh, s_of(t_star));

        // The exact reduced solution must be a residual zero of the full
        // system...
        let r = sys.residual(&exact_m, &exact_s).unwrap();
        assert!(residual_norm(&r) <= 1e-9);
        // ...and the Newton solver must find the same state.
        let init = (FluxField::zeros(&mesh), ScalarField::zeros(&mesh));
        let ((m, s), _) = solve_regularized(&sys, init, 1e-12, 60).unwrap();
        assert!(state_distance(&m, &s, &exact_m, &exact_s).unwrap() < 1e-7);
    }

    #[test]
    fn linear_darcy_matches_direct_solve() {
        let sys = stationary_sys(2, 2, 1.0, 0.0, 1.0, |x, y| x + y, 0.0);
        let schedule = ContinuationSchedule::default_for(data_norm(&sys));
        let ((m, s), report) = solve_stationary(&sys, &schedule, 1e-12).unwrap();
        assert!(report.converged);

        // direct solve of the linear saddle system
        let zero_m = FluxField::zeros(&sys.mesh);
        let zero_s = ScalarField::zeros(&sys.mesh);
        let mut lin = sys.clone();
        lin.eps = 0.0;
        let (j, r0) = lin.linearize(&zero_m, &zero_s).unwrap();
        let x = j.lu().solve(&(-r0)).unwrap();
        let (md, sd) = unpack(&sys.mesh, &x);
        assert!(state_distance(&m, &s, &md, &sd).unwrap() < 1e-10);
    }

    #[test]
    fn max_stages_one_degenerates_to_single_regularized_solve() {
        let sys = stationary_sys(2, 2, 1.0, 1.0, 1.0, |_, _| 0.0, 0.0);
        let schedule = ContinuationSchedule::new(1e-3, 0.5, 1, 1e30).unwrap();
        // With one stage the loop cannot measure a stage distance; the run
        // still polishes at eps = 0 and must satisfy the exact equations.
        let ((m, s), _) = solve_stationary(&sys, &schedule, 1e-11).unwrap();
        let mut exact = sys.clone();
        exact.eps = 0.0;
        let r = exact.residual(&m, &s).unwrap();
        assert!(residual_norm(&r) <= 1e-11);
    }

    #[test]
    fn multi_start_uniqueness() {
        let sys = stationary_sys(3, 3, 1.0, 1.0, 1.0, |x, _| x, 0.0);
        let tol = 1e-11;
        let schedule = ContinuationSchedule::default_for(data_norm(&sys));
        let ((m0, s0), _) = solve_stationary(&sys, &schedule, tol).unwrap();
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(42);
        let rm = FluxField::from_fluxes(
            &sys.mesh,
            (0..sys.mesh.n_edges()).map(|_| rng.random_range(-1.0..1.0)).collect(),
        )
        .unwrap();
        let rs = ScalarField::from_values(
            &sys.mesh,
            (0..sys.mesh.n_cells()).map(|_| rng.random_range(-1.0..1.0)).collect(),
        )
        .unwrap();
        let ((m1, s1), _) = solve_with_schedule(&sys, (rm, rs), &schedule, tol).unwrap();
        let scale = 1.0 + data_norm(&sys);
        assert!(state_distance(&m0, &s0, &m1, &s1).unwrap() <= 10.0 * tol * scale);
    }

    #[test]
    fn homogeneous_divfree_trivial_cases() {
        // S_b = 0 -> all zero
        let sys = stationary_sys(2, 2, 1.0, 1.0, 0.0, |_, _| 0.0, 0.0);
        let ((m, s), _) = solve_homogeneous_divfree(&sys, 1e-12).unwrap();
        assert!(m.ws_div_norm(3.0).unwrap() < 1e-10);
        assert!(s.lp_norm(1.5).unwrap() < 1e-10);

        // S_b = const -> no flow, S = const
        let sys = stationary_sys(2, 2, 1.0, 1.0, 0.0, |_, _| 3.0, 0.0);
        let ((m, s), _) = solve_homogeneous_divfree(&sys, 1e-12).unwrap();
        assert!(m.ws_div_norm(3.0).unwrap() < 1e-9);
        for v in &s.values {
            assert!((v - 3.0).abs() < 1e-9);
        }
    }

    #[test]
    fn homogeneous_divfree_matches_continuation() {
        let sys = stationary_sys(3, 3, 1.0, 1.0, 0.0, |x, _| x, 0.0);
        let tol = 1e-11;
        let ((m0, s0), _) = solve_homogeneous_divfree(&sys, tol).unwrap();
        let schedule = ContinuationSchedule::default_for(data_norm(&sys));
        let ((m1, s1), _) = solve_stationary(&sys, &schedule, tol).unwrap();
        let scale = 1.0 + data_norm(&sys);
        assert!(state_distance(&m0, &s0, &m1, &s1).unwrap() <= 10.0 * tol * scale);
    }

    #[test]
    fn divfree_rejects_nonzero_source() {
        let sys = stationary_sys(2, 2, 1.0, 1.0, 1.0, |_, _| 0.0, 0.0);
        assert!(matches!(
            solve_homogeneous_divfree(&sys, 1e-10),
            Err(Error::Contract(_))
        ));
    }

    #[test]
    fn residuals_decrease_within_newton_stage() {
        let sys = stationary_sys(3, 3, 1.0, 1.0, 2.0, |x, y| x - y, 1e-2);
        let init = (FluxField::zeros(&sys.mesh), ScalarField::zeros(&sys.mesh));
        let (_, report) = solve_regularized(&sys, init, 1e-11, 60).unwrap();
        for w in report.residual_history.windows(2) {
            assert!(w[1] < w[0], "residual not strictly decreasing: {:?}", w);
        }
    }
}
