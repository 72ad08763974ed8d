//! Source-free flow driven purely by the boundary trace.
//!
//! When f = 0 the mass constraint forces the flux into the
//! divergence-free subspace, so the saddle problem collapses to an
//! unconstrained monotone system on a null-space basis of the divergence
//! operator. This example runs that fast path and cross-checks it against
//! the general continuation solver.

use forchheimer::assembly::{CoefficientField, MixedSystem};
use forchheimer::grid::{BoundaryData, Mesh, Rect, ScalarField};
use forchheimer::stationary::{
    data_norm, solve_homogeneous_divfree, solve_stationary, state_distance,
    ContinuationSchedule,
};

fn main() -> forchheimer::Result<()> {
    let mesh = Mesh::structured(12, 12, Rect::unit_square())?;
    let coeffs = CoefficientField::constant(&mesh, 1.0, 1.0, 1.0, 1.0)?;
    // a saddle-shaped trace: inflow on two opposite corners, outflow on
    // the other two
    let boundary = BoundaryData::from_trace(&mesh, |x, y| (x - 0.5) * (y - 0.5));
    let source = ScalarField::zeros(&mesh);
    let sys = MixedSystem::stationary(coeffs, boundary, source, 0.0)?;

    let ((m_fast, s_fast), report) = solve_homogeneous_divfree(&sys, 1e-11)?;
    println!(
        "divergence-free path: {} residual evaluations, converged = {}",
        report.residual_history.len(),
        report.converged
    );
    println!("||div m|| defect: {:.3e}", report.monitored_norms.div_defect);

    let schedule = ContinuationSchedule::default_for(data_norm(&sys));
    let ((m_full, s_full), _) = solve_stationary(&sys, &schedule, 1e-11)?;

    let dist = state_distance(&m_fast, &s_fast, &m_full, &s_full)?;
    println!("distance to the full saddle solve: {dist:.3e}");
    assert!(dist < 1e-8, "fast path disagrees with the full solver");

    // net boundary flux must vanish: whatever enters also leaves
    println!("net boundary outflux: {:.3e}", m_fast.total_boundary_outflux());
    Ok(())
}
