//! With beta = 0 the drag law is linear and the mixed problem becomes a
//! saddle-point linear system. This example solves it twice: once through
//! the nonlinear continuation driver and once by a single direct
//! factorization of the (state-independent) Jacobian, and checks that the
//! two answers agree to solver tolerance.

use forchheimer::assembly::{unpack, CoefficientField, MixedSystem};
use forchheimer::grid::{BoundaryData, FluxField, Mesh, Rect, ScalarField};
use forchheimer::stationary::{
    data_norm, solve_stationary, state_distance, ContinuationSchedule,
};

fn main() -> forchheimer::Result<()> {
    let mesh = Mesh::structured(8, 8, Rect::unit_square())?;
    let coeffs = CoefficientField::constant(&mesh, 2.0, 0.0, 1.0, 1.0)?;
    let boundary = BoundaryData::from_trace(&mesh, |x, y| x + y);
    let source = ScalarField::constant(&mesh, 1.0);

    let sys = MixedSystem::stationary(coeffs, boundary, source, 0.0)?;

    // path 1: the generic nonlinear driver
    let schedule = ContinuationSchedule::default_for(data_norm(&sys));
    let ((m, s), report) = solve_stationary(&sys, &schedule, 1e-12)?;
    println!(
        "continuation: {} stages, {} total residual evaluations",
        report.stages.len(),
        report.residual_history.len()
    );

    // path 2: one LU solve of the linear saddle system. The Jacobian of a
    // beta = 0 problem does not depend on the linearization point.
    let zero_m = FluxField::zeros(&mesh);
    let zero_s = ScalarField::zeros(&mesh);
    let (j, r0) = sys.linearize(&zero_m, &zero_s)?;
    let x = j
        .lu()
        .solve(&(-r0))
        .ok_or_else(|| forchheimer::Error::Conditioning("singular saddle system".into()))?;
    let (md, sd) = unpack(&mesh, &x);

    let dist = state_distance(&m, &s, &md, &sd)?;
    println!("distance between the two solutions: {dist:.3e}");
    assert!(dist < 1e-9, "solvers disagree");
    println!("direct solve and continuation agree");
    Ok(())
}
