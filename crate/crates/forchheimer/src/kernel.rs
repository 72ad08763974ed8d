//! Pointwise nonlinear closures and the elementary inequalities behind
//! every monotonicity argument in the solver.
//!
//! The closures are the equation of state `rho(s) = gamma * s / sqrt(|s|)`,
//! the Darcy-Forchheimer drag `G(v) = (alpha + beta*|v|) v` and its inverse
//! `F = G^{-1}`. All of them are odd and monotone; the inequality helpers
//! expose the exact left/right hand sides so tests can assert slack.

use crate::error::{Error, Result};

/// Pointwise closure parameters.
///
/// `smoothing_delta` only affects Jacobian linearizations; residual
/// evaluations always use the exact (delta = 0) closures, so converged
/// solutions satisfy the unsmoothed equations.
#[derive(Debug, Clone, Copy)]
pub struct ClosureParams {
    pub alpha: f64,
    pub beta: f64,
    pub gamma: f64,
    pub smoothing_delta: f64,
}

impl ClosureParams {
    pub fn new(alpha: f64, beta: f64, gamma: f64) -> Result<Self> {
        Self::with_smoothing(alpha, beta, gamma, 0.0)
    }

    pub fn with_smoothing(alpha: f64, beta: f64, gamma: f64, smoothing_delta: f64) -> Result<Self> {
        if !(alpha > 0.0 && alpha.is_finite()) {
            return Err(Error::contract(format!("alpha must be positive, got {alpha}")));
        }
        // beta = 0 is admitted for the linear Darcy limit.
        if !(beta >= 0.0 && beta.is_finite()) {
            return Err(Error::contract(format!("beta must be nonnegative, got {beta}")));
        }
        if !(gamma > 0.0 && gamma.is_finite()) {
            return Err(Error::contract(format!("gamma must be positive, got {gamma}")));
        }
        if !(smoothing_delta >= 0.0 && smoothing_delta.is_finite()) {
            return Err(Error::contract(format!(
                "smoothing_delta must be nonnegative, got {smoothing_delta}"
            )));
        }
        Ok(Self { alpha, beta, gamma, smoothing_delta })
    }
}

/// `s / sqrt(|s|)` with the continuous limit value 0 at s = 0.
#[inline]
pub fn sqrt_signed(s: f64) -> f64 {
    if s == 0.0 {
        0.0
    } else {
        s / s.abs().sqrt()
    }
}

/// Smoothed slope of `sqrt_signed`, used in Newton linearizations.
/// Exact slope is `1/(2 sqrt(|s|))`, singular at 0.
#[inline]
pub fn sqrt_signed_slope(s: f64, delta: f64) -> f64 {
    0.5 * (s * s + delta * delta).powf(-0.25)
}

/// Smoothed magnitude `|v|_delta = sqrt(|v|^2 + delta^2)`.
#[inline]
pub fn smoothed_norm(v: [f64; 2], delta: f64) -> f64 {
    (v[0] * v[0] + v[1] * v[1] + delta * delta).sqrt()
}

#[inline]
fn check_finite_scalar(name: &str, s: f64) -> Result<()> {
    if !s.is_finite() {
        return Err(Error::domain(format!("{name} is not finite: {s}")));
    }
    Ok(())
}

#[inline]
fn check_finite_vec(name: &str, v: [f64; 2]) -> Result<()> {
    if !(v[0].is_finite() && v[1].is_finite()) {
        return Err(Error::domain(format!("{name} is not finite: {v:?}")));
    }
    Ok(())
}

#[inline]
fn norm(v: [f64; 2]) -> f64 {
    v[0].hypot(v[1])
}

#[inline]
fn dot(a: [f64; 2], b: [f64; 2]) -> f64 {
    a[0] * b[0] + a[1] * b[1]
}

/// Equation of state: `rho(s) = gamma * s / sqrt(|s|)`.
pub fn rho(params: &ClosureParams, s: f64) -> Result<f64> {
    check_finite_scalar("s", s)?;
    Ok(params.gamma * sqrt_signed(s))
}

/// Drag closure `G(v) = (alpha + beta |v|) v`.
pub fn g_closure(params: &ClosureParams, v: [f64; 2]) -> Result<[f64; 2]> {
    check_finite_vec("v", v)?;
    let c = params.alpha + params.beta * norm(v);
    Ok([c * v[0], c * v[1]])
}

/// Inverse drag closure `F = G^{-1}`: the vector `m` with
/// `(alpha + beta |m|) m = g`.
///
/// The magnitude solves `beta r^2 + alpha r = |g|`; we use the
/// rationalized root `r = 2|g| / (alpha + sqrt(alpha^2 + 4 beta |g|))`,
/// which is cancellation-free as `|g| -> 0` and degrades gracefully to
/// `|g|/alpha` when beta = 0. `F(0) = 0` exactly.
pub fn f_closure(params: &ClosureParams, g: [f64; 2]) -> Result<[f64; 2]> {
    check_finite_vec("g", g)?;
    let gn = norm(g);
    if gn == 0.0 {
        return Ok([0.0, 0.0]);
    }
    let a = params.alpha;
    let b = params.beta;
    let r = 2.0 * gn / (a + (a * a + 4.0 * b * gn).sqrt());
    let scale = r / gn;
    Ok([scale * g[0], scale * g[1]])
}

/// Left and right hand sides of `(|x|x - |y|y).(x - y) >= |x-y|^3 / 2`.
///
/// Callers assert `lhs >= rhs`.
pub fn check_vector_monotonicity(x: [f64; 2], y: [f64; 2]) -> Result<(f64, f64)> {
    check_finite_vec("x", x)?;
    check_finite_vec("y", y)?;
    let xx = [norm(x) * x[0], norm(x) * x[1]];
    let yy = [norm(y) * y[0], norm(y) * y[1]];
    let d = [x[0] - y[0], x[1] - y[1]];
    let lhs = dot([xx[0] - yy[0], xx[1] - yy[1]], d);
    let rhs = 0.5 * norm(d).powi(3);
    Ok((lhs, rhs))
}

/// Left and right hand sides of `| |x|x - |y|y | <= (|x| + |y|) |x-y|`.
///
/// Callers assert `lhs <= rhs`.
pub fn check_vector_lipschitz(x: [f64; 2], y: [f64; 2]) -> Result<(f64, f64)> {
    check_finite_vec("x", x)?;
    check_finite_vec("y", y)?;
    let xx = [norm(x) * x[0], norm(x) * x[1]];
    let yy = [norm(y) * y[0], norm(y) * y[1]];
    let lhs = norm([xx[0] - yy[0], xx[1] - yy[1]]);
    let rhs = (norm(x) + norm(y)) * norm([x[0] - y[0], x[1] - y[1]]);
    Ok((lhs, rhs))
}

/// Value pairs for the scalar map `x -> x/sqrt(|x|)`:
///
/// * Hoelder continuity: `|f(x) - f(y)| <= sqrt(2) |x-y|^{1/2}`
///   (assert `holder_lhs <= holder_rhs`), and
/// * monotonicity: `|x-y|^2 / (sqrt(|x|) + sqrt(|y|)) <= (f(x)-f(y))(x-y)`
///   (assert `mono_lhs <= mono_rhs`).
///
/// The monotonicity quotient is defined as 0 when x = y = 0; that is the
/// limit value and removes a removable singularity from test harnesses.
pub fn check_sqrt_monotonicity(x: f64, y: f64) -> Result<(f64, f64, f64, f64)> {
    check_finite_scalar("x", x)?;
    check_finite_scalar("y", y)?;
    let fx = sqrt_signed(x);
    let fy = sqrt_signed(y);
    let holder_lhs = (fx - fy).abs();
    let holder_rhs = 2f64.sqrt() * (x - y).abs().sqrt();
    let denom = x.abs().sqrt() + y.abs().sqrt();
    let mono_lhs = if denom == 0.0 { 0.0 } else { (x - y) * (x - y) / denom };
    let mono_rhs = (fx - fy) * (x - y);
    Ok((holder_lhs, holder_rhs, mono_lhs, mono_rhs))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn params(alpha: f64, beta: f64, gamma: f64) -> ClosureParams {
        ClosureParams::new(alpha, beta, gamma).unwrap()
    }

    #[test]
    fn rho_values() {
        let p = params(1.0, 1.0, 1.0);
        assert_eq!(rho(&p, 4.0).unwrap(), 2.0);
        assert_eq!(rho(&p, 0.0).unwrap(), 0.0);
        let p2 = params(1.0, 1.0, 2.0);
        assert_eq!(rho(&p2, -9.0).unwrap(), -6.0);
    }

    #[test]
    fn rho_rejects_non_finite() {
        let p = params(1.0, 1.0, 1.0);
        assert!(matches!(rho(&p, f64::NAN), Err(Error::Domain(_))));
    }

    #[test]
    fn g_closure_values() {
        let p = params(1.0, 1.0, 1.0);
        assert_eq!(g_closure(&p, [1.0, 0.0]).unwrap(), [2.0, 0.0]);
        assert_eq!(g_closure(&p, [0.0, 0.0]).unwrap(), [0.0, 0.0]);
        let p2 = params(2.0, 0.5, 1.0);
        assert_eq!(g_closure(&p2, [0.0, 4.0]).unwrap(), [0.0, 16.0]);
    }

    #[test]
    fn f_closure_values() {
        // Oracle: r = (-alpha + sqrt(alpha^2 + 4 beta |g|)) / (2 beta).
        let p = params(1.0, 1.0, 1.0);
        let m = f_closure(&p, [2.0, 0.0]).unwrap();
        assert!((m[0] - 1.0).abs() < 1e-15 && m[1] == 0.0);
        assert_eq!(f_closure(&p, [0.0, 0.0]).unwrap(), [0.0, 0.0]);
        let p2 = params(4.0, 1.0, 1.0);
        let m2 = f_closure(&p2, [0.0, 5.0]).unwrap();
        assert!(m2[0] == 0.0 && (m2[1] - 1.0).abs() < 1e-15);
    }

    #[test]
    fn f_closure_beta_zero_is_linear_darcy() {
        let p = params(2.0, 0.0, 1.0);
        let m = f_closure(&p, [3.0, -4.0]).unwrap();
        assert!((m[0] - 1.5).abs() < 1e-15);
        assert!((m[1] + 2.0).abs() < 1e-15);
    }

    #[test]
    fn vector_monotonicity_witnesses() {
        let (l, r) = check_vector_monotonicity([1.0, 0.0], [-1.0, 0.0]).unwrap();
        assert_eq!((l, r), (4.0, 4.0));
        let (l, r) = check_vector_monotonicity([1.0, 0.0], [0.0, 0.0]).unwrap();
        assert_eq!((l, r), (1.0, 0.5));
        let (l, r) = check_vector_monotonicity([3.0, 4.0], [3.0, 4.0]).unwrap();
        assert_eq!((l, r), (0.0, 0.0));
    }

    #[test]
    fn sqrt_monotonicity_witnesses() {
        let (hl, hr, _, _) = check_sqrt_monotonicity(1.0, -1.0).unwrap();
        assert!((hl - 2.0).abs() < 1e-15 && (hr - 2.0).abs() < 1e-15);
        let (hl, hr, ml, mr) = check_sqrt_monotonicity(1.0, 0.0).unwrap();
        assert_eq!(hl, 1.0);
        assert!((hr - 2f64.sqrt()).abs() < 1e-15);
        assert_eq!((ml, mr), (1.0, 1.0));
        let (_, _, ml, mr) = check_sqrt_monotonicity(4.0, 1.0).unwrap();
        assert!((ml - 3.0).abs() < 1e-15 && (mr - 3.0).abs() < 1e-15);
        let (_, _, ml, mr) = check_sqrt_monotonicity(0.0, 0.0).unwrap();
        assert_eq!((ml, mr), (0.0, 0.0));
    }

    proptest! {
        #[test]
        fn roundtrip_g_of_f(
            gx in -1e3f64..1e3, gy in -1e3f64..1e3,
            la in -2f64..2.0, lb in -2f64..2.0,
        ) {
            let p = params(10f64.powf(la), 10f64.powf(lb), 1.0);
            let g = [gx, gy];
            let m = f_closure(&p, g).unwrap();
            let back = g_closure(&p, m).unwrap();
            let gn = (gx * gx + gy * gy).sqrt();
            let err = ((back[0] - g[0]).powi(2) + (back[1] - g[1]).powi(2)).sqrt();
            prop_assert!(err <= 1e-10 * (1.0 + gn));
        }

        #[test]
        fn vector_inequalities_hold(
            x0 in -10f64..10.0, x1 in -10f64..10.0,
            y0 in -10f64..10.0, y1 in -10f64..10.0,
        ) {
            let (l2, r2) = check_vector_monotonicity([x0, x1], [y0, y1]).unwrap();
            let scale = 1f64.max(l2.abs()).max(r2.abs());
            prop_assert!((l2 - r2) / scale >= -1e-12);
            let (l1, r1) = check_vector_lipschitz([x0, x1], [y0, y1]).unwrap();
            let scale = 1f64.max(l1.abs()).max(r1.abs());
            prop_assert!((r1 - l1) / scale >= -1e-12);
        }

        #[test]
        fn scalar_inequalities_hold(x in -10f64..10.0, y in -10f64..10.0) {
            let (hl, hr, ml, mr) = check_sqrt_monotonicity(x, y).unwrap();
            let s = 1f64.max(hl).max(hr);
            prop_assert!((hr - hl) / s >= -1e-12);
            let s = 1f64.max(ml.abs()).max(mr.abs());
            prop_assert!((mr - ml) / s >= -1e-12);
        }

        #[test]
        fn g_closure_uniformly_monotone(
            u0 in -5f64..5.0, u1 in -5f64..5.0,
            v0 in -5f64..5.0, v1 in -5f64..5.0,
        ) {
            let p = params(1.0, 0.7, 1.0);
            let gu = g_closure(&p, [u0, u1]).unwrap();
            let gv = g_closure(&p, [v0, v1]).unwrap();
            let d = [u0 - v0, u1 - v1];
            let lhs = (gu[0] - gv[0]) * d[0] + (gu[1] - gv[1]) * d[1];
            let rhs = 0.5 * p.beta * (d[0].hypot(d[1])).powi(3);
            let s = 1f64.max(lhs.abs()).max(rhs.abs());
            prop_assert!((lhs - rhs) / s >= -1e-12);
        }

        #[test]
        fn rho_is_odd_and_monotone(x in -100f64..100.0, y in -100f64..100.0) {
            let p = params(1.0, 1.0, 1.3);
            let rx = rho(&p, x).unwrap();
            prop_assert!((rho(&p, -x).unwrap() + rx).abs() <= 1e-12 * (1.0 + rx.abs()));
            let ry = rho(&p, y).unwrap();
            prop_assert!((rx - ry) * (x - y) >= -1e-12);
        }
    }
}
