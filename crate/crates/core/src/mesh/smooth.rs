//! Laplacian smoothing with fixed boundary and interface vertices.

use super::{FacetTag, Mesh};

/// Move every unconstrained vertex to the arithmetic mean of its edge
/// neighbours. Vertices on the domain boundary or on the interface stay put,
/// and any move that would produce a non-positive cell area is rejected for
/// that vertex. One Gauss-Seidel sweep in vertex order.
pub fn laplacian_smooth(mesh: &Mesh) -> Mesh {
    let n = mesh.n_vertices();
    let mut fixed = vec![false; n];
    let mut neighbors: Vec<Vec<usize>> = vec![Vec::new(); n];
    for (fi, f) in mesh.facets.iter().enumerate() {
        let [a, b] = f.v;
        neighbors[a].push(b);
        neighbors[b].push(a);
        let tag = mesh.facet_tag[fi];
        if tag.is_boundary() || tag == FacetTag::Sigma {
            fixed[a] = true;
            fixed[b] = true;
        }
    }
    let mut vertex_cells: Vec<Vec<usize>> = vec![Vec::new(); n];
    for (c, cell) in mesh.cells.iter().enumerate() {
        for &v in cell {
            vertex_cells[v].push(c);
        }
    }

    let mut out = mesh.clone();
    let area = |verts: &[[f64; 2]], cell: &[usize; 3]| -> f64 {
        let (a, b, c) = (verts[cell[0]], verts[cell[1]], verts[cell[2]]);
        0.5 * ((b[0] - a[0]) * (c[1] - a[1]) - (c[0] - a[0]) * (b[1] - a[1]))
    };
    for v in 0..n {
        if fixed[v] || neighbors[v].is_empty() {
            continue;
        }
        let mut mean = [0.0, 0.0];
        for &w in &neighbors[v] {
            mean[0] += out.vertices[w][0];
            mean[1] += out.vertices[w][1];
        }
        let count = neighbors[v].len() as f64;
        mean[0] /= count;
        mean[1] /= count;
        let old = out.vertices[v];
        out.vertices[v] = mean;
        let ok = vertex_cells[v].iter().all(|&c| {
            let a = area(&out.vertices, &out.cells[c]);
            a > 1e-12 * mesh.cell_area(c)
        });
        if !ok {
            out.vertices[v] = old;
        }
    }
    out
}

/// Inradius over circumradius, a scale-invariant triangle quality measure.
pub fn cell_quality(mesh: &Mesh, cell: usize) -> f64 {
    let [a, b, c] = mesh.cell_vertices(cell);
    let d = |p: [f64; 2], q: [f64; 2]| ((p[0] - q[0]).powi(2) + (p[1] - q[1]).powi(2)).sqrt();
    let (la, lb, lc) = (d(b, c), d(c, a), d(a, b));
    let s = 0.5 * (la + lb + lc);
    let area = mesh.cell_area(cell);
    let inradius = area / s;
    let circumradius = la * lb * lc / (4.0 * area);
    inradius / circumradius
}

#[cfg(test)]
mod tests {
    use super::super::{build_mesh, refine, GeometrySpec};
    use super::*;

    #[test]
    fn structured_mesh_is_a_fixed_point() {
        let mesh = build_mesh(&GeometrySpec::unit_square_split(), 4).unwrap();
        let out = laplacian_smooth(&mesh);
        for (a, b) in mesh.vertices.iter().zip(&out.vertices) {
            assert!((a[0] - b[0]).abs() < 1e-14 && (a[1] - b[1]).abs() < 1e-14);
        }
    }

    #[test]
    fn boundary_and_interface_vertices_stay_fixed() {
        let mesh = build_mesh(&GeometrySpec::unit_square_split(), 4).unwrap();
        // refine a corner to make the mesh non-uniform, then smooth
        let refined = refine(&mesh, &std::collections::BTreeSet::from([0, 1])).unwrap();
        let smoothed = laplacian_smooth(&refined);
        for (fi, f) in refined.facets.iter().enumerate() {
            let tag = refined.facet_tag[fi];
            if tag.is_boundary() || tag == FacetTag::Sigma {
                for &v in &f.v {
                    assert_eq!(refined.vertices[v], smoothed.vertices[v]);
                }
            }
        }
    }

    #[test]
    fn smoothing_does_not_reduce_min_quality_on_perturbed_grid() {
        let mut mesh = build_mesh(&GeometrySpec::unit_square_split(), 4).unwrap();
        // deterministic interior perturbation
        let n = mesh.n_vertices();
        let mut fixed = vec![false; n];
        for (fi, f) in mesh.facets.iter().enumerate() {
            let tag = mesh.facet_tag[fi];
            if tag.is_boundary() || tag == FacetTag::Sigma {
                fixed[f.v[0]] = true;
                fixed[f.v[1]] = true;
            }
        }
        for (i, v) in mesh.vertices.iter_mut().enumerate() {
            if !fixed[i] {
                let s = (i as f64 * 0.7).sin();
                v[0] += 0.05 * s / 4.0;
                v[1] -= 0.04 * (i as f64 * 1.3).cos() / 4.0;
            }
        }
        mesh.validate().unwrap();
        let before: f64 = (0..mesh.n_cells()).map(|c| cell_quality(&mesh, c)).fold(f64::INFINITY, f64::min);
        let smoothed = laplacian_smooth(&mesh);
        let after: f64 = (0..smoothed.n_cells()).map(|c| cell_quality(&smoothed, c)).fold(f64::INFINITY, f64::min);
        assert!(after >= before - 1e-12, "quality dropped: {before} -> {after}");
    }
}
