//! Forms of the mixed saddle-point problem and their Newton/Picard
//! linearizations.
//!
//! The unknown pair is (m, S): edge fluxes and cellwise pressure-squared.
//! The coupled equations read
//!
//!   a(m,v) + d_eps(m,v) - b(v,S) = g(v)      for all v,
//!   b(m,q) + c(S,q)              = f_tilde(q) for all q,
//!
//! where c carries either the regularization weight eps (stationary) or
//! the implicit-Euler weight phi*gamma/dt (semi-discrete), and f_tilde
//! picks up the lagged density term in the semi-discrete case.

use std::io::Write;
use std::sync::Arc;

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::grid::{BoundaryData, FluxField, Mesh, ScalarField, CELL_EDGE_SIGNS};
use crate::kernel::{sqrt_signed, sqrt_signed_slope};

/// Cellwise coefficients with their declared bounds.
///
/// The bounds are part of the data: they feed the time-step admissibility
/// constant and are validated against every cell value at construction.
#[derive(Debug, Clone)]
pub struct CoefficientField {
    pub alpha: ScalarField,
    pub beta: ScalarField,
    pub gamma: ScalarField,
    pub phi: ScalarField,
    pub alpha_bounds: (f64, f64),
    pub beta_bounds: (f64, f64),
    pub gamma_bounds: (f64, f64),
    pub phi_bounds: (f64, f64),
}

impl CoefficientField {
    /// Spatially constant coefficients; bounds collapse to the values.
    pub fn constant(mesh: &Arc<Mesh>, alpha: f64, beta: f64, gamma: f64, phi: f64) -> Result<Self> {
        Self::new(
            ScalarField::constant(mesh, alpha),
            ScalarField::constant(mesh, beta),
            ScalarField::constant(mesh, gamma),
            ScalarField::constant(mesh, phi),
            (alpha, alpha),
            (beta, beta),
            (gamma, gamma),
            (phi, phi),
        )
    }

    #[allow(clippy::too_many_arguments)]
    pub fn new(
        alpha: ScalarField,
        beta: ScalarField,
        gamma: ScalarField,
        phi: ScalarField,
        alpha_bounds: (f64, f64),
        beta_bounds: (f64, f64),
        gamma_bounds: (f64, f64),
        phi_bounds: (f64, f64),
    ) -> Result<Self> {
        Mesh::check_same(&alpha.mesh, &beta.mesh, "CoefficientField")?;
        Mesh::check_same(&alpha.mesh, &gamma.mesh, "CoefficientField")?;
        Mesh::check_same(&alpha.mesh, &phi.mesh, "CoefficientField")?;
        // beta = 0 is admitted to cover the linear Darcy limit; the other
        // coefficients must stay strictly positive.
        for (name, lo) in [
            ("alpha", alpha_bounds.0),
            ("gamma", gamma_bounds.0),
            ("phi", phi_bounds.0),
        ] {
            if !(lo > 0.0) {
                return Err(Error::contract(format!("{name} lower bound must be positive")));
            }
        }
        if beta_bounds.0 < 0.0 {
            return Err(Error::contract("beta lower bound must be nonnegative"));
        }
        for (name, field, (lo, hi)) in [
            ("alpha", &alpha, alpha_bounds),
            ("beta", &beta, beta_bounds),
            ("gamma", &gamma, gamma_bounds),
            ("phi", &phi, phi_bounds),
        ] {
            if lo > hi {
                return Err(Error::contract(format!("{name} bounds are inverted")));
            }
            for (c, v) in field.values.iter().enumerate() {
                if *v < lo - 1e-14 * lo.abs() || *v > hi + 1e-14 * hi.abs() {
                    return Err(Error::contract(format!(
                        "{name} value {v} in cell {c} violates declared bounds [{lo}, {hi}]"
                    )));
                }
            }
        }
        Ok(Self { alpha, beta, gamma, phi, alpha_bounds, beta_bounds, gamma_bounds, phi_bounds })
    }

    pub fn mesh(&self) -> &Arc<Mesh> {
        &self.alpha.mesh
    }
}

/// One assembled problem instance: mesh, data, and the scalar knobs that
/// select between the stationary regularized form and one implicit-Euler
/// step.
#[derive(Debug, Clone)]
pub struct MixedSystem {
    pub mesh: Arc<Mesh>,
    pub coeffs: CoefficientField,
    pub boundary: BoundaryData,
    pub source: ScalarField,
    /// Regularization weight of c_eps and d_eps.
    pub eps: f64,
    /// 1/dt for semi-discrete systems, 0 for stationary ones.
    pub time_weight: f64,
    /// Lagged state S^{k-1} (semi-discrete only).
    pub prev_s: Option<ScalarField>,
    /// Lagged gamma^{k-1} (semi-discrete only).
    pub prev_gamma: Option<ScalarField>,
    /// Jacobian smoothing radius; residuals never use it.
    pub smoothing_delta: f64,
}

impl MixedSystem {
    pub fn stationary(
        coeffs: CoefficientField,
        boundary: BoundaryData,
        source: ScalarField,
        eps: f64,
    ) -> Result<Self> {
        let mesh = coeffs.mesh().clone();
        Mesh::check_same(&mesh, &boundary.mesh, "MixedSystem")?;
        Mesh::check_same(&mesh, &source.mesh, "MixedSystem")?;
        if eps < 0.0 {
            return Err(Error::contract("eps must be nonnegative"));
        }
        Ok(Self {
            mesh,
            coeffs,
            boundary,
            source,
            eps,
            time_weight: 0.0,
            prev_s: None,
            prev_gamma: None,
            smoothing_delta: 1e-8,
        })
    }

    /// System of one implicit-Euler step with lagged density data.
    pub fn semi_discrete(
        coeffs: CoefficientField,
        boundary: BoundaryData,
        source: ScalarField,
        dt: f64,
        prev_s: ScalarField,
        prev_gamma: ScalarField,
        eps: f64,
    ) -> Result<Self> {
        let mut sys = Self::stationary(coeffs, boundary, source, eps)?;
        if !(dt > 0.0) {
            return Err(Error::contract("dt must be positive"));
        }
        Mesh::check_same(&sys.mesh, &prev_s.mesh, "MixedSystem")?;
        Mesh::check_same(&sys.mesh, &prev_gamma.mesh, "MixedSystem")?;
        sys.time_weight = 1.0 / dt;
        sys.prev_s = Some(prev_s);
        sys.prev_gamma = Some(prev_gamma);
        Ok(sys)
    }

    pub fn is_semi_discrete(&self) -> bool {
        self.time_weight > 0.0
    }

    pub fn n_dofs(&self) -> usize {
        self.mesh.n_edges() + self.mesh.n_cells()
    }

    /// Weight of the c-form in cell `c`: eps when stationary, phi*gamma/dt
    /// when semi-discrete.
    fn c_weight(&self, c: usize) -> f64 {
        if self.is_semi_discrete() {
            self.coeffs.phi.values[c] * self.coeffs.gamma.values[c] * self.time_weight
        } else {
            self.eps
        }
    }

    /// Lagged density contribution per cell: phi*gamma^{k-1}/dt * rho-like(S^{k-1}).
    fn lag_density(&self, c: usize) -> f64 {
        match (&self.prev_s, &self.prev_gamma) {
            (Some(ps), Some(pg)) => {
                self.coeffs.phi.values[c]
                    * pg.values[c]
                    * self.time_weight
                    * sqrt_signed(ps.values[c])
            }
            _ => 0.0,
        }
    }

    /// a(u,v) = integral (alpha + beta|u|) u.v. The alpha part uses the
    /// exact per-cell lowest-order mass matrix (keeps it positive definite
    /// even on 1xN meshes where centroid reconstruction has a null
    /// direction); the beta part uses the centroid rule.
    pub fn apply_a(&self, u: &FluxField, v: &FluxField) -> Result<f64> {
        Mesh::check_same(&self.mesh, &u.mesh, "apply_a")?;
        Mesh::check_same(&self.mesh, &v.mesh, "apply_a")?;
        let hx = self.mesh.hx();
        let hy = self.mesh.hy();
        let mut total = 0.0;
        for (c, cell) in self.mesh.cells.iter().enumerate() {
            let [w, e, s, n] = cell.edges;
            let a = self.coeffs.alpha.values[c];
            let uf = &u.edge_fluxes;
            let vf = &v.edge_fluxes;
            total += a * mass_pair(hx / hy, uf[w], uf[e], vf[w], vf[e]);
            total += a * mass_pair(hy / hx, uf[s], uf[n], vf[s], vf[n]);
            let b = self.coeffs.beta.values[c];
            if b != 0.0 {
                let uc = u.cell_vector(c);
                let vc = v.cell_vector(c);
                let mag = uc[0].hypot(uc[1]);
                total += b * mag * (uc[0] * vc[0] + uc[1] * vc[1]) * cell.measure;
            }
        }
        Ok(total)
    }

    /// b(v,q) = integral div(v) q; exact (signed flux sums).
    pub fn apply_b(&self, v: &FluxField, q: &ScalarField) -> Result<f64> {
        Mesh::check_same(&self.mesh, &v.mesh, "apply_b")?;
        Mesh::check_same(&self.mesh, &q.mesh, "apply_b")?;
        Ok((0..self.mesh.n_cells()).map(|c| v.cell_flux_sum(c) * q.values[c]).sum())
    }

    /// c(p,q) = integral w * p/sqrt|p| * q, with w selected by `eps_mode`.
    pub fn apply_c(&self, p: &ScalarField, q: &ScalarField, eps_mode: bool) -> Result<f64> {
        Mesh::check_same(&self.mesh, &p.mesh, "apply_c")?;
        Mesh::check_same(&self.mesh, &q.mesh, "apply_c")?;
        if eps_mode && self.eps == 0.0 {
            return Err(Error::contract("apply_c in eps mode with eps = 0"));
        }
        if !eps_mode && !self.is_semi_discrete() {
            return Err(Error::contract("apply_c in time mode on a stationary system"));
        }
        let mut total = 0.0;
        for (c, cell) in self.mesh.cells.iter().enumerate() {
            let w = if eps_mode {
                self.eps
            } else {
                self.coeffs.phi.values[c] * self.coeffs.gamma.values[c] * self.time_weight
            };
            total += cell.measure * w * sqrt_signed(p.values[c]) * q.values[c];
        }
        Ok(total)
    }

    /// d_eps(u,v) = eps * integral |div u| div u div v; exact.
    pub fn apply_d(&self, u: &FluxField, v: &FluxField) -> Result<f64> {
        Mesh::check_same(&self.mesh, &u.mesh, "apply_d")?;
        Mesh::check_same(&self.mesh, &v.mesh, "apply_d")?;
        if self.eps == 0.0 {
            return Ok(0.0);
        }
        let mut total = 0.0;
        for (c, cell) in self.mesh.cells.iter().enumerate() {
            let du = u.cell_flux_sum(c) / cell.measure;
            let dv = v.cell_flux_sum(c) / cell.measure;
            total += cell.measure * du.abs() * du * dv;
        }
        Ok(self.eps * total)
    }

    /// g(v) = -integral_boundary S_b (v.n); the Dirichlet datum enters
    /// only here, never as a dof constraint.
    pub fn rhs_g(&self, v: &FluxField) -> Result<f64> {
        Mesh::check_same(&self.mesh, &v.mesh, "rhs_g")?;
        let mut total = 0.0;
        for (b, sb) in self.mesh.boundary.iter().zip(&self.boundary.values) {
            total -= sb * b.outward_sign * v.edge_fluxes[b.edge];
        }
        Ok(total)
    }

    /// f_tilde(q): source integral, plus the lagged density term when the
    /// previous-step fields are supplied.
    pub fn rhs_f_tilde(
        &self,
        q: &ScalarField,
        prev_s: Option<&ScalarField>,
        prev_gamma: Option<&ScalarField>,
    ) -> Result<f64> {
        Mesh::check_same(&self.mesh, &q.mesh, "rhs_f_tilde")?;
        if self.is_semi_discrete() && (prev_s.is_none() || prev_gamma.is_none()) {
            return Err(Error::contract("semi-discrete f_tilde needs previous S and gamma"));
        }
        if !self.is_semi_discrete() && prev_s.is_some() {
            return Err(Error::contract("stationary f_tilde must not receive lagged fields"));
        }
        let mut total = 0.0;
        for (c, cell) in self.mesh.cells.iter().enumerate() {
            let mut val = self.source.values[c];
            if let (Some(ps), Some(pg)) = (prev_s, prev_gamma) {
                val += self.coeffs.phi.values[c]
                    * pg.values[c]
                    * self.time_weight
                    * sqrt_signed(ps.values[c]);
            }
            total += cell.measure * val * q.values[c];
        }
        Ok(total)
    }

    /// Residual of the coupled equations at `(m, s)` using the exact
    /// (unsmoothed) closures. Layout: edge block first, cell block after.
    pub fn residual(&self, m: &FluxField, s: &ScalarField) -> Result<DVector<f64>> {
        Mesh::check_same(&self.mesh, &m.mesh, "residual")?;
        Mesh::check_same(&self.mesh, &s.mesh, "residual")?;
        let ne = self.mesh.n_edges();
        let nc = self.mesh.n_cells();
        let mut r = DVector::zeros(ne + nc);
        let hx = self.mesh.hx();
        let hy = self.mesh.hy();

        for (c, cell) in self.mesh.cells.iter().enumerate() {
            let edges = cell.edges;
            let [w, e, so, n] = edges;
            let area = cell.measure;
            let alpha = self.coeffs.alpha.values[c];
            let beta = self.coeffs.beta.values[c];
            let f = &m.edge_fluxes;

            // alpha term: exact per-cell mass, split into the two axis pairs.
            let rx = hx / hy;
            r[w] += alpha * rx * (f[w] / 3.0 + f[e] / 6.0);
            r[e] += alpha * rx * (f[w] / 6.0 + f[e] / 3.0);
            let ry = hy / hx;
            r[so] += alpha * ry * (f[so] / 3.0 + f[n] / 6.0);
            r[n] += alpha * ry * (f[so] / 6.0 + f[n] / 3.0);

            // beta term at the centroid; basis reconstructions are
            // (1/(2hy), 0) for vertical-edge dofs, (0, 1/(2hx)) for
            // horizontal ones.
            if beta != 0.0 {
                let mc = m.cell_vector(c);
                let mag = mc[0].hypot(mc[1]);
                let kx = beta * mag * area * mc[0] / (2.0 * hy);
                let ky = beta * mag * area * mc[1] / (2.0 * hx);
                r[w] += kx;
                r[e] += kx;
                r[so] += ky;
                r[n] += ky;
            }

            // d_eps term and the -b(v,S) coupling.
            let flux_sum = m.cell_flux_sum(c);
            let div = flux_sum / area;
            for (i, &eid) in edges.iter().enumerate() {
                let sig = CELL_EDGE_SIGNS[i];
                if self.eps != 0.0 {
                    r[eid] += self.eps * div.abs() * div * sig;
                }
                r[eid] -= sig * s.values[c];
            }

            // cell block: b(m,q) + c(S,q) - f_tilde(q).
            let wc = self.c_weight(c);
            r[ne + c] = flux_sum + area * wc * sqrt_signed(s.values[c])
                - area * (self.source.values[c] + self.lag_density(c));
        }

        // -g(v): move the boundary functional to the left side.
        for (b, sb) in self.mesh.boundary.iter().zip(&self.boundary.values) {
            r[b.edge] += sb * b.outward_sign;
        }
        Ok(r)
    }

    /// Newton linearization at `(m, s)`: Jacobian (with the smoothing
    /// radius applied to the non-differentiable factors) and the exact
    /// residual.
    pub fn linearize(&self, m: &FluxField, s: &ScalarField) -> Result<(DMatrix<f64>, DVector<f64>)> {
        let r = self.residual(m, s)?;
        let ne = self.mesh.n_edges();
        let nc = self.mesh.n_cells();
        let mut j = DMatrix::zeros(ne + nc, ne + nc);
        let hx = self.mesh.hx();
        let hy = self.mesh.hy();
        let delta = self.smoothing_delta;

        for (c, cell) in self.mesh.cells.iter().enumerate() {
            let edges = cell.edges;
            let [w, e, so, n] = edges;
            let area = cell.measure;
            let alpha = self.coeffs.alpha.values[c];
            let beta = self.coeffs.beta.values[c];

            let rx = alpha * hx / hy;
            j[(w, w)] += rx / 3.0;
            j[(w, e)] += rx / 6.0;
            j[(e, w)] += rx / 6.0;
            j[(e, e)] += rx / 3.0;
            let ry = alpha * hy / hx;
            j[(so, so)] += ry / 3.0;
            j[(so, n)] += ry / 6.0;
            j[(n, so)] += ry / 6.0;
            j[(n, n)] += ry / 3.0;

            if beta != 0.0 {
                // d/dm [ |m| m ] = |m|_delta I + m m^T / |m|_delta, pushed
                // through the centroid reconstruction on both sides.
                let mc = m.cell_vector(c);
                let mag = (mc[0] * mc[0] + mc[1] * mc[1] + delta * delta).sqrt();
                let mut t = [[mag + mc[0] * mc[0] / mag, mc[0] * mc[1] / mag],
                             [mc[1] * mc[0] / mag, mag + mc[1] * mc[1] / mag]];
                for row in &mut t {
                    for v in row.iter_mut() {
                        *v *= beta * area;
                    }
                }
                // Reconstruction weights per dof: x-row then y-row.
                let rec = [
                    (w, 1.0 / (2.0 * hy), 0.0),
                    (e, 1.0 / (2.0 * hy), 0.0),
                    (so, 0.0, 1.0 / (2.0 * hx)),
                    (n, 0.0, 1.0 / (2.0 * hx)),
                ];
                for &(ei, xi, yi) in &rec {
                    for &(ej, xj, yj) in &rec {
                        j[(ei, ej)] += xi * (t[0][0] * xj + t[0][1] * yj)
                            + yi * (t[1][0] * xj + t[1][1] * yj);
                    }
                }
            }

            let div = m.cell_flux_sum(c) / area;
            let d_slope = if self.eps != 0.0 { 2.0 * self.eps * div.abs() / area } else { 0.0 };
            for (i, &ei) in edges.iter().enumerate() {
                let si = CELL_EDGE_SIGNS[i];
                if d_slope != 0.0 {
                    for (k, &ej) in edges.iter().enumerate() {
                        j[(ei, ej)] += d_slope * si * CELL_EDGE_SIGNS[k];
                    }
                }
                // coupling blocks: -B^T and B.
                j[(ei, ne + c)] -= si;
                j[(ne + c, ei)] += si;
            }

            let wc = self.c_weight(c);
            if wc != 0.0 {
                j[(ne + c, ne + c)] = area * wc * sqrt_signed_slope(s.values[c], delta);
            }
        }

        // Fail early on an exactly singular row (e.g. eps = 0 stationary
        // c-block rows are legitimately zero only in the S column, which
        // is covered by B having full row rank; a fully zero row is a bug).
        for i in 0..ne + nc {
            if j.row(i).iter().all(|v| *v == 0.0) {
                return Err(Error::Conditioning(format!("zero Jacobian row {i}")));
            }
        }
        Ok((j, r))
    }

    /// Fixed-point (Picard) system with lagged nonlinear factors:
    /// coefficients frozen at `(m, s)`, unknowns entering linearly.
    /// Returns the matrix and right-hand side of K x = F.
    pub fn picard_system(&self, m: &FluxField, s: &ScalarField) -> Result<(DMatrix<f64>, DVector<f64>)> {
        let ne = self.mesh.n_edges();
        let nc = self.mesh.n_cells();
        let mut k = DMatrix::zeros(ne + nc, ne + nc);
        let mut rhs = DVector::zeros(ne + nc);
        let hx = self.mesh.hx();
        let hy = self.mesh.hy();
        // Guard the 1/sqrt|s| lag against s = 0 (the true slope there is
        // infinite; a large finite surrogate keeps the sweep contractive).
        let guard = self.smoothing_delta.max(1e-10);

        for (c, cell) in self.mesh.cells.iter().enumerate() {
            let edges = cell.edges;
            let [w, e, so, n] = edges;
            let area = cell.measure;
            let alpha = self.coeffs.alpha.values[c];
            let beta = self.coeffs.beta.values[c];

            let rx = alpha * hx / hy;
            k[(w, w)] += rx / 3.0;
            k[(w, e)] += rx / 6.0;
            k[(e, w)] += rx / 6.0;
            k[(e, e)] += rx / 3.0;
            let ry = alpha * hy / hx;
            k[(so, so)] += ry / 3.0;
            k[(so, n)] += ry / 6.0;
            k[(n, so)] += ry / 6.0;
            k[(n, n)] += ry / 3.0;

            if beta != 0.0 {
                let mc = m.cell_vector(c);
                let lag = beta * mc[0].hypot(mc[1]) * area;
                let rec = [
                    (w, 1.0 / (2.0 * hy), 0.0),
                    (e, 1.0 / (2.0 * hy), 0.0),
                    (so, 0.0, 1.0 / (2.0 * hx)),
                    (n, 0.0, 1.0 / (2.0 * hx)),
                ];
                for &(ei, xi, yi) in &rec {
                    for &(ej, xj, yj) in &rec {
                        k[(ei, ej)] += lag * (xi * xj + yi * yj);
                    }
                }
            }

            let div = m.cell_flux_sum(c) / area;
            let d_lag = if self.eps != 0.0 { self.eps * div.abs() / area } else { 0.0 };
            for (i, &ei) in edges.iter().enumerate() {
                let si = CELL_EDGE_SIGNS[i];
                if d_lag != 0.0 {
                    for (kk, &ej) in edges.iter().enumerate() {
                        k[(ei, ej)] += d_lag * si * CELL_EDGE_SIGNS[kk];
                    }
                }
                k[(ei, ne + c)] -= si;
                k[(ne + c, ei)] += si;
            }

            let wc = self.c_weight(c);
            if wc != 0.0 {
                let sv = s.values[c];
                let denom = (sv * sv + guard * guard).sqrt().sqrt();
                k[(ne + c, ne + c)] = area * wc / denom;
            }
            rhs[ne + c] = area * (self.source.values[c] + self.lag_density(c));
        }

        for (b, sb) in self.mesh.boundary.iter().zip(&self.boundary.values) {
            rhs[b.edge] -= sb * b.outward_sign;
        }
        Ok((k, rhs))
    }

    /// B matrix alone (cells x edges, entries are the signed-sum weights).
    pub fn b_matrix(&self) -> DMatrix<f64> {
        b_matrix(&self.mesh)
    }
}

/// One axis pair of the exact lowest-order cell mass matrix:
/// ratio/3 on the diagonal, ratio/6 off it.
fn mass_pair(ratio: f64, u0: f64, u1: f64, v0: f64, v1: f64) -> f64 {
    ratio * ((u0 * v0 + u1 * v1) / 3.0 + (u0 * v1 + u1 * v0) / 6.0)
}

/// Divergence-pairing matrix of a mesh: row per cell, column per edge.
pub fn b_matrix(mesh: &Arc<Mesh>) -> DMatrix<f64> {
    let mut b = DMatrix::zeros(mesh.n_cells(), mesh.n_edges());
    for (c, cell) in mesh.cells.iter().enumerate() {
        for (i, &e) in cell.edges.iter().enumerate() {
            b[(c, e)] += CELL_EDGE_SIGNS[i];
        }
    }
    b
}

/// Split a stacked dof vector back into fields.
pub fn unpack(mesh: &Arc<Mesh>, x: &DVector<f64>) -> (FluxField, ScalarField) {
    let ne = mesh.n_edges();
    let m = FluxField { mesh: mesh.clone(), edge_fluxes: x.as_slice()[..ne].to_vec() };
    let s = ScalarField { mesh: mesh.clone(), values: x.as_slice()[ne..].to_vec() };
    (m, s)
}

/// Stack fields into one dof vector (edges first).
pub fn pack(m: &FluxField, s: &ScalarField) -> DVector<f64> {
    let mut x = DVector::zeros(m.edge_fluxes.len() + s.values.len());
    x.as_mut_slice()[..m.edge_fluxes.len()].copy_from_slice(&m.edge_fluxes);
    x.as_mut_slice()[m.edge_fluxes.len()..].copy_from_slice(&s.values);
    x
}

/// Write a matrix in MatrixMarket coordinate format (nonzeros only).
pub fn write_matrix_market(matrix: &DMatrix<f64>, out: &mut dyn Write) -> Result<()> {
    let nnz = matrix.iter().filter(|v| **v != 0.0).count();
    writeln!(out, "%%MatrixMarket matrix coordinate real general")?;
    writeln!(out, "{} {} {}", matrix.nrows(), matrix.ncols(), nnz)?;
    for j in 0..matrix.ncols() {
        for i in 0..matrix.nrows() {
            let v = matrix[(i, j)];
            if v != 0.0 {
                writeln!(out, "{} {} {:.17e}", i + 1, j + 1, v)?;
            }
        }
    }
    Ok(())
}
