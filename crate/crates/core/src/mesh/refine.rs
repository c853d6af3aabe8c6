//! Newest-vertex bisection with closure.
//!
//! All three edges of a marked cell are marked for refinement; closure then
//! bisects through refinement edges until no cell carries a marked edge, so
//! the result is conforming. Children of a bisected cell take the two old
//! edges adjacent to the new vertex as their refinement edges.

use super::{build_facets, FacetTag, Mesh, Subdomain};
use crate::Result;
use std::collections::{BTreeMap, BTreeSet};

type EdgeKey = (usize, usize);

fn key(a: usize, b: usize) -> EdgeKey {
    (a.min(b), a.max(b))
}

struct WorkCell {
    v: [usize; 3],
    tag: Subdomain,
    refine_edge: u8,
    parent: usize,
}

impl WorkCell {
    fn edge(&self, l: usize) -> EdgeKey {
        key(self.v[(l + 1) % 3], self.v[(l + 2) % 3])
    }
}

/// Bisect every marked cell (and whatever closure requires), returning a new
/// conforming mesh. Tags are inherited; `parent_cell` maps each new cell to
/// its ancestor in `mesh`.
pub fn refine(mesh: &Mesh, marked: &BTreeSet<usize>) -> Result<Mesh> {
    for &c in marked {
        assert!(c < mesh.n_cells(), "marked cell {c} out of range");
    }
    if marked.is_empty() {
        return Ok(mesh.clone());
    }

    let mut vertices = mesh.vertices.clone();
    let mut cells: Vec<WorkCell> = mesh
        .cells
        .iter()
        .enumerate()
        .map(|(i, v)| WorkCell { v: *v, tag: mesh.cell_tag[i], refine_edge: mesh.refine_edge[i], parent: i })
        .collect();

    let mut marked_edges: BTreeSet<EdgeKey> = BTreeSet::new();
    for &c in marked {
        for l in 0..3 {
            marked_edges.insert(cells[c].edge(l));
        }
    }

    // midpoint vertex per split edge, and parent edge of each created half
    let mut midpoints: BTreeMap<EdgeKey, usize> = BTreeMap::new();
    let mut edge_parent: BTreeMap<EdgeKey, EdgeKey> = BTreeMap::new();

    loop {
        let mut changed = false;
        let mut ci = 0;
        while ci < cells.len() {
            let has_marked = (0..3).any(|l| marked_edges.contains(&cells[ci].edge(l)));
            if !has_marked {
                ci += 1;
                continue;
            }
            changed = true;
            let re = cells[ci].refine_edge as usize;
            let re_key = cells[ci].edge(re);
            marked_edges.insert(re_key);
            // bisect at the refinement edge
            let peak = cells[ci].v[re];
            let p = cells[ci].v[(re + 1) % 3];
            let q = cells[ci].v[(re + 2) % 3];
            let mid = *midpoints.entry(re_key).or_insert_with(|| {
                let a = vertices[re_key.0];
                let b = vertices[re_key.1];
                vertices.push([0.5 * (a[0] + b[0]), 0.5 * (a[1] + b[1])]);
                vertices.len() - 1
            });
            edge_parent.insert(key(p, mid), re_key);
            edge_parent.insert(key(q, mid), re_key);
            let tag = cells[ci].tag;
            let parent = cells[ci].parent;
            // children (peak, p, mid) and (peak, mid, q), CCW; the newest
            // vertex is mid, so the refinement edges are opposite it
            cells[ci] = WorkCell { v: [peak, p, mid], tag, refine_edge: 2, parent };
            cells.push(WorkCell { v: [peak, mid, q], tag, refine_edge: 1, parent });
            // do not advance: the replaced cell may still carry marks
        }
        if !changed {
            break;
        }
    }

    // resolve boundary tags through the edge ancestry
    let mut original: BTreeMap<EdgeKey, FacetTag> = BTreeMap::new();
    for (fi, f) in mesh.facets.iter().enumerate() {
        if mesh.facet_tag[fi].is_boundary() {
            original.insert(key(f.v[0], f.v[1]), mesh.facet_tag[fi]);
        }
    }
    let lookup_boundary = |mut e: EdgeKey| -> FacetTag {
        loop {
            if let Some(tag) = original.get(&e) {
                return *tag;
            }
            match edge_parent.get(&e) {
                Some(parent) => e = *parent,
                None => panic!("boundary edge {e:?} has no tagged ancestor"),
            }
        }
    };

    let new_cells: Vec<[usize; 3]> = cells.iter().map(|c| c.v).collect();
    let new_tags: Vec<Subdomain> = cells.iter().map(|c| c.tag).collect();
    let mut boundary_tag = |a: usize, b: usize| lookup_boundary(key(a, b));
    let (facets, facet_tag, cell_facets) = build_facets(&vertices, &new_cells, &new_tags, &mut boundary_tag);
    let refine_edge = cells.iter().map(|c| c.refine_edge).collect();
    let parent_cell = cells.iter().map(|c| mesh.parent_cell[c.parent]).collect();
    let out = Mesh {
        vertices,
        cells: new_cells,
        cell_tag: new_tags,
        facets,
        facet_tag,
        cell_facets,
        refine_edge,
        parent_cell,
    };
    out.validate()?;
    Ok(out)
}

/// Uniform refinement: every cell is marked.
pub fn refine_uniform(mesh: &Mesh) -> Result<Mesh> {
    refine(mesh, &(0..mesh.n_cells()).collect())
}

#[cfg(test)]
mod tests {
    use super::super::{build_mesh, GeometrySpec};
    use super::*;

    #[test]
    fn empty_marking_returns_mesh_unchanged() {
        let mesh = build_mesh(&GeometrySpec::unit_square_split(), 2).unwrap();
        let out = refine(&mesh, &BTreeSet::new()).unwrap();
        assert_eq!(out.n_cells(), mesh.n_cells());
        assert_eq!(out.vertices, mesh.vertices);
    }

    #[test]
    fn uniform_refinement_quadrisects() {
        let mesh = build_mesh(&GeometrySpec::unit_square_split(), 2).unwrap();
        let out = refine_uniform(&mesh).unwrap();
        assert_eq!(out.n_cells(), 4 * mesh.n_cells());
        assert!((out.total_area() - 1.0).abs() < 1e-12);
        assert!((out.max_diameter() - 0.5 * mesh.max_diameter()).abs() < 1e-12);
        out.validate().unwrap();
    }

    #[test]
    fn single_cell_closure_is_conforming() {
        let mesh = build_mesh(&GeometrySpec::unit_square_split(), 2).unwrap();
        // pick an interior-ish cell; closure must refine neighbours too
        let out = refine(&mesh, &BTreeSet::from([0])).unwrap();
        out.validate().unwrap();
        assert!(out.n_cells() > mesh.n_cells() + 2);
        assert!((out.total_area() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn tags_survive_refinement() {
        let mesh = build_mesh(&GeometrySpec::l_shape(), 2).unwrap();
        let out = refine(&mesh, &BTreeSet::from([1, 5, 9])).unwrap();
        out.validate().unwrap();
        // area of each subdomain preserved
        for tag in [Subdomain::Elastic, Subdomain::Poro] {
            assert!((out.subdomain_area(tag) - mesh.subdomain_area(tag)).abs() < 1e-12);
        }
        // sigma facets still form the interface, total length preserved
        let len = |m: &Mesh| -> f64 {
            (0..m.n_facets()).filter(|&f| m.facet_tag[f] == FacetTag::Sigma).map(|f| m.facet_length(f)).sum()
        };
        assert!((len(&out) - len(&mesh)).abs() < 1e-12);
    }

    #[test]
    fn parent_map_tracks_ancestors() {
        let mesh = build_mesh(&GeometrySpec::unit_square_split(), 2).unwrap();
        let out = refine_uniform(&mesh).unwrap();
        for (c, &p) in out.parent_cell.iter().enumerate() {
            // child centroid must lie inside the parent
            let [a, b, d] = out.cell_vertices(c);
            let cen = [(a[0] + b[0] + d[0]) / 3.0, (a[1] + b[1] + d[1]) / 3.0];
            let [pa, pb, pc] = mesh.cell_vertices(p);
            let sign = |p1: [f64; 2], p2: [f64; 2], x: [f64; 2]| {
                (p2[0] - p1[0]) * (x[1] - p1[1]) - (p2[1] - p1[1]) * (x[0] - p1[0])
            };
            assert!(sign(pa, pb, cen) > -1e-12 && sign(pb, pc, cen) > -1e-12 && sign(pc, pa, cen) > -1e-12);
        }
    }
}
