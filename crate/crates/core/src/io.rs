//! Legacy ASCII VTK output for meshes and cell data.

use crate::mesh::{Mesh, Subdomain};
use std::io::Write;

/// Write the mesh as an unstructured grid: triangles plus facet line cells.
/// Triangles carry the subdomain tag, lines the facet tag; extra per-cell
/// scalar fields (e.g. error indicators) are padded with -1 on line cells.
pub fn write_vtk<W: Write>(
    out: &mut W,
    mesh: &Mesh,
    cell_fields: &[(&str, &[f64])],
) -> std::io::Result<()> {
    writeln!(out, "# vtk DataFile Version 3.0")?;
    writeln!(out, "biot-hdiv mesh")?;
    writeln!(out, "ASCII")?;
    writeln!(out, "DATASET UNSTRUCTURED_GRID")?;
    writeln!(out, "POINTS {} double", mesh.n_vertices())?;
    for v in &mesh.vertices {
        writeln!(out, "{:.16e} {:.16e} 0.0", v[0], v[1])?;
    }
    let n_tri = mesh.n_cells();
    let n_lin = mesh.n_facets();
    writeln!(out, "CELLS {} {}", n_tri + n_lin, 4 * n_tri + 3 * n_lin)?;
    for c in &mesh.cells {
        writeln!(out, "3 {} {} {}", c[0], c[1], c[2])?;
    }
    for f in &mesh.facets {
        writeln!(out, "2 {} {}", f.v[0], f.v[1])?;
    }
    writeln!(out, "CELL_TYPES {}", n_tri + n_lin)?;
    for _ in 0..n_tri {
        writeln!(out, "5")?;
    }
    for _ in 0..n_lin {
        writeln!(out, "3")?;
    }
    writeln!(out, "CELL_DATA {}", n_tri + n_lin)?;
    writeln!(out, "SCALARS subdomain int 1")?;
    writeln!(out, "LOOKUP_TABLE default")?;
    for t in &mesh.cell_tag {
        writeln!(out, "{}", if *t == Subdomain::Elastic { 0 } else { 1 })?;
    }
    for _ in 0..n_lin {
        writeln!(out, "-1")?;
    }
    writeln!(out, "SCALARS facet_tag int 1")?;
    writeln!(out, "LOOKUP_TABLE default")?;
    for _ in 0..n_tri {
        writeln!(out, "-1")?;
    }
    for t in &mesh.facet_tag {
        writeln!(out, "{}", *t as i32)?;
    }
    for (name, values) in cell_fields {
        assert_eq!(values.len(), n_tri, "cell field {name} has wrong length");
        writeln!(out, "SCALARS {name} double 1")?;
        writeln!(out, "LOOKUP_TABLE default")?;
        for v in *values {
            writeln!(out, "{v:.9e}")?;
        }
        for _ in 0..n_lin {
            writeln!(out, "-1")?;
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::{build_mesh, GeometrySpec};

    #[test]
    fn vtk_export_has_expected_counts() {
        let mesh = build_mesh(&GeometrySpec::unit_square_split(), 2).unwrap();
        let mut buf = Vec::new();
        write_vtk(&mut buf, &mesh, &[("indicator", &vec![1.0; mesh.n_cells()])]).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.contains(&format!("POINTS {} double", mesh.n_vertices())));
        assert!(text.contains("SCALARS indicator double 1"));
        let cells_line = format!("CELLS {} {}", mesh.n_cells() + mesh.n_facets(), 4 * mesh.n_cells() + 3 * mesh.n_facets());
        assert!(text.contains(&cells_line));
    }
}
