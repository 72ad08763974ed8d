//! Randomized audit of the pointwise closure inequalities.
//!
//! The solver's convergence theory leans on a handful of algebraic facts
//! about the drag law and the square-root density: Lipschitz continuity,
//! vector monotonicity, a Holder-type bound, and strong monotonicity of
//! the drag. This sweep hammers them with random (and adversarially
//! chosen) vector pairs and reports the minimum slack seen for each; a
//! negative slack would falsify the inequality.

use forchheimer::verify::{closure_roundtrip_sweep, inequality_sweep};

fn main() -> forchheimer::Result<()> {
    let seed = 42;
    let samples = 200_000;

    let report = inequality_sweep(seed, samples)?;
    println!("seed = {}, samples = {}", report.seed, report.samples);
    println!("min slack, lipschitz:            {:.6e}", report.min_slack_lipschitz);
    println!("min slack, vector monotonicity:  {:.6e}", report.min_slack_vector_monotonicity);
    println!("min slack, holder bound:         {:.6e}", report.min_slack_holder);
    println!("min slack, sqrt monotonicity:    {:.6e}", report.min_slack_sqrt_monotonicity);
    println!("min slack, drag monotonicity:    {:.6e}", report.min_slack_drag_monotonicity);
    assert!(report.worst() >= -1e-12, "an inequality was violated");

    // the drag law and its inverse must round-trip to relative machine
    // precision across fourteen decades of magnitude
    let worst = closure_roundtrip_sweep(seed, 10_000)?;
    println!("worst relative round-trip defect: {worst:.3e}");
    assert!(worst <= 1e-10, "closure inversion drifted");

    println!("all inequalities hold on this sweep");
    Ok(())
}
