//! Solve a nonlinear stationary flow problem on the unit square and write
//! the result to `stationary_flow.vtk`.
//!
//! The pressure-squared field is driven by an inhomogeneous boundary
//! trace; the quadratic drag makes the momentum equation nonlinear, so
//! the solve runs through the full regularization continuation.

use std::fs::File;

use forchheimer::assembly::{CoefficientField, MixedSystem};
use forchheimer::grid::{BoundaryData, Mesh, Rect, ScalarField};
use forchheimer::stationary::{data_norm, solve_stationary, ContinuationSchedule};
use forchheimer::vtk::write_vtk;

fn main() -> forchheimer::Result<()> {
    let mesh = Mesh::structured(16, 16, Rect::unit_square())?;

    // alpha: Darcy drag, beta: Forchheimer drag, gamma: compressibility
    // factor, phi: porosity
    let coeffs = CoefficientField::constant(&mesh, 1.0, 0.5, 1.0, 1.0)?;

    // high pressure on the left edge, falling off toward the right
    let boundary = BoundaryData::from_trace(&mesh, |x, _| 4.0 * (1.0 - x));
    let source = ScalarField::zeros(&mesh);

    let sys = MixedSystem::stationary(coeffs, boundary, source, 0.0)?;
    let schedule = ContinuationSchedule::default_for(data_norm(&sys));

    let ((m, s), report) = solve_stationary(&sys, &schedule, 1e-10)?;

    println!("converged: {}", report.converged);
    println!("continuation stages:");
    for st in &report.stages {
        println!(
            "  eps = {:9.3e}  newton iters = {:2}  residual = {:9.3e}",
            st.eps, st.newton_iters, st.final_residual
        );
    }
    let n = &report.monitored_norms;
    println!("||m||_W3(div) = {:.6}", n.m_w3div);
    println!("||S||_3/2     = {:.6}", n.s_l32);
    println!("div defect    = {:.3e}", n.div_defect);
    println!("picard sweeps = {}", report.picard_sweeps);

    let mut file = File::create("stationary_flow.vtk")?;
    write_vtk(&mut file, &mesh, "stationary flow", &[("S", &s)], &[("m", &m)])?;
    println!("wrote stationary_flow.vtk");
    Ok(())
}
