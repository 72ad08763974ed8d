//! Legacy ASCII VTK output: one unstructured grid per file, scalar cell
//! data for pressure-squared fields and cell-centered vectors for fluxes.

use std::io::Write;

use crate::error::Result;
use crate::grid::{FluxField, Mesh, ScalarField};

/// Write mesh plus cell data. Scalars come first, then vectors; all
/// fields must live on `mesh`.
pub fn write_vtk(
    out: &mut dyn Write,
    mesh: &Mesh,
    title: &str,
    scalars: &[(&str, &ScalarField)],
    vectors: &[(&str, &FluxField)],
) -> Result<()> {
    writeln!(out, "# vtk DataFile Version 3.0")?;
    writeln!(out, "{title}")?;
    writeln!(out, "ASCII")?;
    writeln!(out, "DATASET UNSTRUCTURED_GRID")?;
    writeln!(out, "POINTS {} double", mesh.n_vertices())?;
    for v in &mesh.vertices {
        writeln!(out, "{:.12e} {:.12e} 0.0", v[0], v[1])?;
    }
    writeln!(out, "CELLS {} {}", mesh.n_cells(), mesh.n_cells() * 5)?;
    for c in &mesh.cells {
        let [a, b, cc, d] = c.vertices;
        writeln!(out, "4 {a} {b} {cc} {d}")?;
    }
    writeln!(out, "CELL_TYPES {}", mesh.n_cells())?;
    for _ in 0..mesh.n_cells() {
        writeln!(out, "9")?; // VTK_QUAD
    }
    if scalars.is_empty() && vectors.is_empty() {
        return Ok(());
    }
    writeln!(out, "CELL_DATA {}", mesh.n_cells())?;
    for (name, field) in scalars {
        writeln!(out, "SCALARS {name} double 1")?;
        writeln!(out, "LOOKUP_TABLE default")?;
        for v in &field.values {
            writeln!(out, "{v:.12e}")?;
        }
    }
    for (name, field) in vectors {
        writeln!(out, "VECTORS {name} double")?;
        for c in 0..mesh.n_cells() {
            let v = field.cell_vector(c);
            writeln!(out, "{:.12e} {:.12e} 0.0", v[0], v[1])?;
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::Rect;

    #[test]
    fn vtk_structure_is_well_formed() {
        let mesh = Mesh::structured(2, 1, Rect::unit_square()).unwrap();
        let s = ScalarField::from_fn(&mesh, |x, _| x);
        let m = FluxField::interpolate(&mesh, |_, _| [1.0, 0.0]);
        let mut buf = Vec::new();
        write_vtk(&mut buf, &mesh, "test", &[("S", &s)], &[("m", &m)]).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.starts_with("# vtk DataFile Version 3.0\n"));
        assert!(text.contains("POINTS 6 double"));
        assert!(text.contains("CELLS 2 10"));
        assert!(text.contains("CELL_DATA 2"));
        assert!(text.contains("SCALARS S double 1"));
        assert!(text.contains("VECTORS m double"));
        // byte-determinism: a second write is identical
        let mut buf2 = Vec::new();
        write_vtk(&mut buf2, &mesh, "test", &[("S", &s)], &[("m", &m)]).unwrap();
        assert_eq!(text.as_bytes(), &buf2[..]);
    }
}
