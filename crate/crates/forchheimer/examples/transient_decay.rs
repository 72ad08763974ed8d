//! Implicit-Euler relaxation of an initial pressure bump with sealed
//! (homogeneous) boundary data and no source.
//!
//! Along the way the run records the quantities the discrete a-priori
//! bounds control: the weighted energy, the flux norm, the per-step
//! energy recursion, and the discrete mass balance. With zero boundary
//! trace and zero source, energy must decay and mass must be conserved
//! up to solver tolerance.

use forchheimer::assembly::CoefficientField;
use forchheimer::grid::{BoundaryData, Mesh, Rect, ScalarField};
use forchheimer::transient::{
    check_dt_admissible, run, LipschitzConstants, TimeGrid, Trajectory,
    TransientProblem,
};

fn main() -> forchheimer::Result<()> {
    let mesh = Mesh::structured(8, 8, Rect::unit_square())?;
    let coeffs = CoefficientField::constant(&mesh, 1.0, 1.0, 1.0, 1.0)?;
    let initial = ScalarField::from_fn(&mesh, |x, y| {
        let dx = x - 0.5;
        let dy = y - 0.5;
        2.0 * (-20.0 * (dx * dx + dy * dy)).exp()
    });

    let problem = TransientProblem::new(
        TimeGrid::new(2.0, 40)?,
        Trajectory::Constant(coeffs),
        LipschitzConstants::default(),
        Trajectory::Constant(ScalarField::zeros(&mesh)),
        Trajectory::Constant(BoundaryData::homogeneous(&mesh)),
        initial,
    )?;

    let (ok, c_dt) = check_dt_admissible(&problem);
    println!("C*dt = {c_dt:.4} (admissible: {ok})");

    let sol = run(&problem, 1e-11)?;

    println!("initial energy: {:.6}", sol.monitor.initial_energy);
    println!("  step    time      energy    flux norm   mass defect");
    for r in sol.monitor.records.iter().step_by(5) {
        println!(
            "  {:4}  {:6.3}  {:10.6}  {:10.6}   {:.3e}",
            r.step, r.time, r.energy, r.flux_norm, r.mass_defect
        );
    }

    let violations = sol.monitor.recursion_violations(1e-9);
    println!("energy recursion violations: {}", violations.len());
    println!("max mass defect: {:.3e}", sol.monitor.max_mass_defect());
    println!("increment sum: {:.6}", sol.monitor.increment_sum());

    // sample the two time interpolants halfway between two grid points
    let t = 1.025;
    let s_step = sol.pi_s(t);
    let s_lin = sol.lambda_s(t);
    println!(
        "at t = {t}: step interpolant |S| = {:.6}, linear interpolant |S| = {:.6}",
        s_step.lp_norm(1.5)?,
        s_lin.lp_norm(1.5)?
    );
    Ok(())
}
