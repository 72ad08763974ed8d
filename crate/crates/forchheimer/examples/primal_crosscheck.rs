//! Cross-validate the mixed solver against an independent primal oracle.
//!
//! The stationary problem is also the Euler-Lagrange equation of a convex
//! energy in S alone. Minimizing that energy with P1 elements on a
//! triangulated copy of the mesh gives a solution computed by a completely
//! different discretization and algorithm (gradient descent instead of
//! Newton on a saddle system). The two should agree to O(h).

use forchheimer::assembly::{CoefficientField, MixedSystem};
use forchheimer::grid::{BoundaryData, Mesh, Rect, ScalarField};
use forchheimer::stationary::{data_norm, solve_stationary, ContinuationSchedule};
use forchheimer::verify::{nodal_to_cell_averages, primal_oracle, PrimalProblem};

fn main() -> forchheimer::Result<()> {
    let alpha = 1.0;
    let beta = 0.7;
    let source = |x: f64, y: f64| {
        (std::f64::consts::PI * x).sin() * (std::f64::consts::PI * y).sin()
    };

    println!("   n       h     ||S_mixed - S_primal||_3/2");
    for n in [4usize, 8, 16] {
        let mesh = Mesh::structured(n, n, Rect::unit_square())?;

        // mixed solve
        let coeffs = CoefficientField::constant(&mesh, alpha, beta, 1.0, 1.0)?;
        let sys = MixedSystem::stationary(
            coeffs,
            BoundaryData::homogeneous(&mesh),
            ScalarField::from_fn(&mesh, source),
            0.0,
        )?;
        let schedule = ContinuationSchedule::default_for(data_norm(&sys));
        let ((_, s_mixed), _) = solve_stationary(&sys, &schedule, 1e-10)?;

        // primal oracle on the same mesh
        let primal = PrimalProblem::stationary(&mesh, alpha, beta, source);
        let nodal = primal_oracle(&primal, 1e-9)?;
        let s_primal = nodal_to_cell_averages(&mesh, &nodal);

        let diff = ScalarField::from_values(
            &mesh,
            s_mixed
                .values
                .iter()
                .zip(&s_primal.values)
                .map(|(a, b)| a - b)
                .collect(),
        )?;
        println!("  {:2}  {:.4}   {:.6e}", n, mesh.mesh_size(), diff.lp_norm(1.5)?);
    }
    println!("the gap shrinks roughly linearly in h, as expected");
    Ok(())
}
