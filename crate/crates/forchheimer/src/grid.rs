//! Structured 2D meshes and the lowest-order discrete spaces: edge-flux
//! fields (Raviart-Thomas style, approximating W^3(div)) paired with
//! cellwise-constant scalars (approximating L^{3/2}).
//!
//! Edge degrees of freedom are total normal fluxes with a fixed global
//! orientation: vertical edges carry flux in +x, horizontal edges in +y.
//! Divergence is then an exact signed sum of edge fluxes per cell.

use std::sync::Arc;

use crate::error::{Error, Result};

/// Axis-aligned rectangular domain.
#[derive(Debug, Clone, Copy)]
pub struct Rect {
    pub x0: f64,
    pub y0: f64,
    pub x1: f64,
    pub y1: f64,
}

impl Rect {
    pub fn new(x0: f64, y0: f64, x1: f64, y1: f64) -> Result<Self> {
        if !(x1 > x0 && y1 > y0) {
            return Err(Error::contract(format!(
                "degenerate rectangle [{x0},{x1}]x[{y0},{y1}]"
            )));
        }
        Ok(Self { x0, y0, x1, y1 })
    }

    pub fn unit_square() -> Self {
        Self { x0: 0.0, y0: 0.0, x1: 1.0, y1: 1.0 }
    }

    pub fn width(&self) -> f64 {
        self.x1 - self.x0
    }

    pub fn height(&self) -> f64 {
        self.y1 - self.y0
    }

    pub fn area(&self) -> f64 {
        self.width() * self.height()
    }
}

/// Oriented mesh edge. `cells` holds the adjacent cells together with the
/// sign this edge's flux contributes to that cell's outflow sum.
#[derive(Debug, Clone)]
pub struct Edge {
    pub vertices: [usize; 2],
    pub normal: [f64; 2],
    pub length: f64,
    pub midpoint: [f64; 2],
    pub cells: Vec<(usize, f64)>,
}

/// Boundary edge with the sign converting the stored flux into outflow
/// from the domain.
#[derive(Debug, Clone, Copy)]
pub struct BoundaryEdge {
    pub edge: usize,
    pub outward_sign: f64,
}

/// Quadrilateral cell. Local edge order is [west, east, south, north];
/// the matching outflow signs are [-1, +1, -1, +1].
#[derive(Debug, Clone)]
pub struct Cell {
    pub vertices: [usize; 4],
    pub edges: [usize; 4],
    pub centroid: [f64; 2],
    pub measure: f64,
}

pub const CELL_EDGE_SIGNS: [f64; 4] = [-1.0, 1.0, -1.0, 1.0];

/// Conforming structured quadrilateral mesh.
#[derive(Debug)]
pub struct Mesh {
    pub nx: usize,
    pub ny: usize,
    pub domain: Rect,
    pub vertices: Vec<[f64; 2]>,
    pub cells: Vec<Cell>,
    pub edges: Vec<Edge>,
    pub boundary: Vec<BoundaryEdge>,
    hx: f64,
    hy: f64,
}

impl Mesh {
    /// Build an `nx` x `ny` structured quadrilateral mesh on `domain`.
    pub fn structured(nx: usize, ny: usize, domain: Rect) -> Result<Arc<Mesh>> {
        if nx == 0 || ny == 0 {
            return Err(Error::contract("cell counts must be at least 1"));
        }
        let hx = domain.width() / nx as f64;
        let hy = domain.height() / ny as f64;

        let vid = |i: usize, j: usize| j * (nx + 1) + i;
        let cid = |i: usize, j: usize| j * nx + i;
        // Vertical edges (normal +x) come first, then horizontal (normal +y).
        let ve = |i: usize, j: usize| j * (nx + 1) + i;
        let n_vert_edges = (nx + 1) * ny;
        let he = |i: usize, j: usize| n_vert_edges + j * nx + i;

        let mut vertices = Vec::with_capacity((nx + 1) * (ny + 1));
        for j in 0..=ny {
            for i in 0..=nx {
                vertices.push([domain.x0 + i as f64 * hx, domain.y0 + j as f64 * hy]);
            }
        }

        let mut edges = Vec::with_capacity(n_vert_edges + nx * (ny + 1));
        for j in 0..ny {
            for i in 0..=nx {
                let mut cells = Vec::with_capacity(2);
                if i > 0 {
                    cells.push((cid(i - 1, j), 1.0)); // outflow from the west cell
                }
                if i < nx {
                    cells.push((cid(i, j), -1.0)); // inflow into the east cell
                }
                edges.push(Edge {
                    vertices: [vid(i, j), vid(i, j + 1)],
                    normal: [1.0, 0.0],
                    length: hy,
                    midpoint: [
                        domain.x0 + i as f64 * hx,
                        domain.y0 + (j as f64 + 0.5) * hy,
                    ],
                    cells,
                });
            }
        }
        for j in 0..=ny {
            for i in 0..nx {
                let mut cells = Vec::with_capacity(2);
                if j > 0 {
                    cells.push((cid(i, j - 1), 1.0));
                }
                if j < ny {
                    cells.push((cid(i, j), -1.0));
                }
                edges.push(Edge {
                    vertices: [vid(i, j), vid(i + 1, j)],
                    normal: [0.0, 1.0],
                    length: hx,
                    midpoint: [
                        domain.x0 + (i as f64 + 0.5) * hx,
                        domain.y0 + j as f64 * hy,
                    ],
                    cells,
                });
            }
        }

        let mut cells = Vec::with_capacity(nx * ny);
        for j in 0..ny {
            for i in 0..nx {
                cells.push(Cell {
                    vertices: [vid(i, j), vid(i + 1, j), vid(i + 1, j + 1), vid(i, j + 1)],
                    edges: [ve(i, j), ve(i + 1, j), he(i, j), he(i, j + 1)],
                    centroid: [
                        domain.x0 + (i as f64 + 0.5) * hx,
                        domain.y0 + (j as f64 + 0.5) * hy,
                    ],
                    measure: hx * hy,
                });
            }
        }

        let mut boundary = Vec::with_capacity(2 * (nx + ny));
        for j in 0..ny {
            boundary.push(BoundaryEdge { edge: ve(0, j), outward_sign: -1.0 });
            boundary.push(BoundaryEdge { edge: ve(nx, j), outward_sign: 1.0 });
        }
        for i in 0..nx {
            boundary.push(BoundaryEdge { edge: he(i, 0), outward_sign: -1.0 });
            boundary.push(BoundaryEdge { edge: he(i, ny), outward_sign: 1.0 });
        }

        Ok(Arc::new(Mesh { nx, ny, domain, vertices, cells, edges, boundary, hx, hy }))
    }

    pub fn n_cells(&self) -> usize {
        self.cells.len()
    }

    pub fn n_edges(&self) -> usize {
        self.edges.len()
    }

    pub fn n_vertices(&self) -> usize {
        self.vertices.len()
    }

    pub fn hx(&self) -> f64 {
        self.hx
    }

    pub fn hy(&self) -> f64 {
        self.hy
    }

    /// Longest cell diameter direction, used as the refinement parameter h.
    pub fn mesh_size(&self) -> f64 {
        self.hx.max(self.hy)
    }

    pub fn same_mesh(a: &Arc<Mesh>, b: &Arc<Mesh>) -> bool {
        Arc::ptr_eq(a, b)
    }

    pub(crate) fn check_same(a: &Arc<Mesh>, b: &Arc<Mesh>, what: &str) -> Result<()> {
        if !Mesh::same_mesh(a, b) {
            return Err(Error::contract(format!("{what}: fields live on different meshes")));
        }
        Ok(())
    }
}

/// Cellwise-constant scalar field.
#[derive(Debug, Clone)]
pub struct ScalarField {
    pub mesh: Arc<Mesh>,
    pub values: Vec<f64>,
}

impl ScalarField {
    pub fn zeros(mesh: &Arc<Mesh>) -> Self {
        Self { mesh: mesh.clone(), values: vec![0.0; mesh.n_cells()] }
    }

    pub fn constant(mesh: &Arc<Mesh>, value: f64) -> Self {
        Self { mesh: mesh.clone(), values: vec![value; mesh.n_cells()] }
    }

    /// Sample `f` at cell centroids.
    pub fn from_fn(mesh: &Arc<Mesh>, f: impl Fn(f64, f64) -> f64) -> Self {
        let values = mesh.cells.iter().map(|c| f(c.centroid[0], c.centroid[1])).collect();
        Self { mesh: mesh.clone(), values }
    }

    pub fn from_values(mesh: &Arc<Mesh>, values: Vec<f64>) -> Result<Self> {
        if values.len() != mesh.n_cells() {
            return Err(Error::contract(format!(
                "expected {} cell values, got {}",
                mesh.n_cells(),
                values.len()
            )));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::domain("scalar field contains non-finite values"));
        }
        Ok(Self { mesh: mesh.clone(), values })
    }

    /// `(sum_cells area |q|^p)^{1/p}`.
    pub fn lp_norm(&self, p: f64) -> Result<f64> {
        if p < 1.0 {
            return Err(Error::contract(format!("Lp exponent must be >= 1, got {p}")));
        }
        let sum: f64 = self
            .mesh
            .cells
            .iter()
            .zip(&self.values)
            .map(|(c, v)| c.measure * v.abs().powf(p))
            .sum();
        Ok(sum.powf(1.0 / p))
    }

    pub fn sub(&self, other: &ScalarField) -> Result<ScalarField> {
        Mesh::check_same(&self.mesh, &other.mesh, "ScalarField::sub")?;
        let values = self.values.iter().zip(&other.values).map(|(a, b)| a - b).collect();
        Ok(ScalarField { mesh: self.mesh.clone(), values })
    }

    pub fn is_zero(&self) -> bool {
        self.values.iter().all(|v| *v == 0.0)
    }
}

/// Edge-flux vector field; one signed normal-flux dof per edge.
#[derive(Debug, Clone)]
pub struct FluxField {
    pub mesh: Arc<Mesh>,
    pub edge_fluxes: Vec<f64>,
}

impl FluxField {
    pub fn zeros(mesh: &Arc<Mesh>) -> Self {
        Self { mesh: mesh.clone(), edge_fluxes: vec![0.0; mesh.n_edges()] }
    }

    pub fn from_fluxes(mesh: &Arc<Mesh>, edge_fluxes: Vec<f64>) -> Result<Self> {
        if edge_fluxes.len() != mesh.n_edges() {
            return Err(Error::contract(format!(
                "expected {} edge fluxes, got {}",
                mesh.n_edges(),
                edge_fluxes.len()
            )));
        }
        if edge_fluxes.iter().any(|v| !v.is_finite()) {
            return Err(Error::domain("flux field contains non-finite values"));
        }
        Ok(Self { mesh: mesh.clone(), edge_fluxes })
    }

    /// Interpolate a pointwise vector field: edge dof = v(midpoint).n * length.
    pub fn interpolate(mesh: &Arc<Mesh>, v: impl Fn(f64, f64) -> [f64; 2]) -> Self {
        let edge_fluxes = mesh
            .edges
            .iter()
            .map(|e| {
                let val = v(e.midpoint[0], e.midpoint[1]);
                (val[0] * e.normal[0] + val[1] * e.normal[1]) * e.length
            })
            .collect();
        Self { mesh: mesh.clone(), edge_fluxes }
    }

    /// Signed flux sum of `cell` (area times divergence).
    pub fn cell_flux_sum(&self, cell: usize) -> f64 {
        let c = &self.mesh.cells[cell];
        c.edges
            .iter()
            .zip(CELL_EDGE_SIGNS)
            .map(|(e, s)| s * self.edge_fluxes[*e])
            .sum()
    }

    /// Cellwise divergence; exact for the discrete space.
    pub fn divergence(&self) -> ScalarField {
        let values = (0..self.mesh.n_cells())
            .map(|c| self.cell_flux_sum(c) / self.mesh.cells[c].measure)
            .collect();
        ScalarField { mesh: self.mesh.clone(), values }
    }

    /// Centroid reconstruction of the vector value on `cell`: the average
    /// of the two opposing face normal velocities per axis.
    pub fn cell_vector(&self, cell: usize) -> [f64; 2] {
        let c = &self.mesh.cells[cell];
        let [w, e, s, n] = c.edges;
        let vx = (self.edge_fluxes[w] + self.edge_fluxes[e]) / (2.0 * self.mesh.hy);
        let vy = (self.edge_fluxes[s] + self.edge_fluxes[n]) / (2.0 * self.mesh.hx);
        [vx, vy]
    }

    /// W^s(div) norm with centroid-reconstructed cell magnitudes.
    pub fn ws_div_norm(&self, s: f64) -> Result<f64> {
        if s < 1.0 {
            return Err(Error::contract(format!("W^s(div) exponent must be >= 1, got {s}")));
        }
        let mut sum = 0.0;
        for (c, cell) in self.mesh.cells.iter().enumerate() {
            let v = self.cell_vector(c);
            let mag = v[0].hypot(v[1]);
            let div = self.cell_flux_sum(c) / cell.measure;
            sum += cell.measure * (mag.powf(s) + div.abs().powf(s));
        }
        Ok(sum.powf(1.0 / s))
    }

    /// Net outflow through the domain boundary.
    pub fn total_boundary_outflux(&self) -> f64 {
        self.mesh
            .boundary
            .iter()
            .map(|b| b.outward_sign * self.edge_fluxes[b.edge])
            .sum()
    }

    pub fn sub(&self, other: &FluxField) -> Result<FluxField> {
        Mesh::check_same(&self.mesh, &other.mesh, "FluxField::sub")?;
        let edge_fluxes =
            self.edge_fluxes.iter().zip(&other.edge_fluxes).map(|(a, b)| a - b).collect();
        Ok(FluxField { mesh: self.mesh.clone(), edge_fluxes })
    }
}

/// Scalar trace samples on boundary edges (midpoint values of S_b).
#[derive(Debug, Clone)]
pub struct BoundaryData {
    pub mesh: Arc<Mesh>,
    pub values: Vec<f64>,
}

impl BoundaryData {
    pub fn homogeneous(mesh: &Arc<Mesh>) -> Self {
        Self { mesh: mesh.clone(), values: vec![0.0; mesh.boundary.len()] }
    }

    pub fn constant(mesh: &Arc<Mesh>, value: f64) -> Self {
        Self { mesh: mesh.clone(), values: vec![value; mesh.boundary.len()] }
    }

    /// Sample a trace function at boundary-edge midpoints.
    pub fn from_trace(mesh: &Arc<Mesh>, f: impl Fn(f64, f64) -> f64) -> Self {
        let values = mesh
            .boundary
            .iter()
            .map(|b| {
                let m = mesh.edges[b.edge].midpoint;
                f(m[0], m[1])
            })
            .collect();
        Self { mesh: mesh.clone(), values }
    }

    pub fn from_values(mesh: &Arc<Mesh>, values: Vec<f64>) -> Result<Self> {
        if values.len() != mesh.boundary.len() {
            return Err(Error::contract(format!(
                "expected {} boundary values, got {}",
                mesh.boundary.len(),
                values.len()
            )));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::domain("boundary data contains non-finite values"));
        }
        Ok(Self { mesh: mesh.clone(), values })
    }

    pub fn is_homogeneous(&self) -> bool {
        self.values.iter().all(|v| *v == 0.0)
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0f64, |m, v| m.max(v.abs()))
    }
}
