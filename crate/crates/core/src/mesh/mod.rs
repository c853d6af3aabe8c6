//! Conforming triangular meshes of a two-subdomain geometry.
//!
//! Every facet stores a fixed global normal: on the interface it points from
//! the poroelastic into the elastic subdomain, on the boundary it points
//! outward, and on remaining interior facets out of the lower-indexed cell.
//! Meshes are immutable; refinement and smoothing return new meshes.

mod geometry;
mod refine;
mod smooth;

pub use geometry::{build_mesh, BoundaryPreset, GeometrySpec, Shape};
pub use refine::{refine, refine_uniform};
pub use smooth::{cell_quality, laplacian_smooth};

use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Subdomain {
    Elastic,
    Poro,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FacetTag {
    /// Interior facet with both cells elastic.
    IntE,
    /// Interior facet with both cells poroelastic.
    IntP,
    /// Interface facet between the subdomains.
    Sigma,
    /// Dirichlet part of the elastic boundary.
    DirE,
    /// Neumann part of the elastic boundary.
    NeuE,
    /// Dirichlet part of the poroelastic boundary.
    DirP,
    /// Neumann part of the poroelastic boundary.
    NeuP,
}

impl FacetTag {
    pub fn is_boundary(self) -> bool {
        matches!(self, FacetTag::DirE | FacetTag::NeuE | FacetTag::DirP | FacetTag::NeuP)
    }

    pub fn is_interior(self) -> bool {
        !self.is_boundary()
    }

    /// Displacement Dirichlet facets (both subdomains).
    pub fn is_dirichlet(self) -> bool {
        matches!(self, FacetTag::DirE | FacetTag::DirP)
    }

    /// Facets where the fluid pressure is essential. Under the boundary
    /// matching convention the pressure vanishes where the traction does.
    pub fn is_pressure_dirichlet(self) -> bool {
        matches!(self, FacetTag::NeuP)
    }

    /// Facets carrying the natural (flux) condition for the fluid pressure.
    pub fn is_pressure_flux(self) -> bool {
        matches!(self, FacetTag::DirP)
    }
}

/// A mesh facet. The stored global normal is the right-hand normal of the
/// direction `v[0] -> v[1]` and points out of `cell_minus`.
#[derive(Debug, Clone)]
pub struct Facet {
    pub v: [usize; 2],
    pub cell_minus: usize,
    pub cell_plus: Option<usize>,
}

#[derive(Debug, Clone)]
pub struct Mesh {
    pub vertices: Vec<[f64; 2]>,
    /// Counter-clockwise vertex triples.
    pub cells: Vec<[usize; 3]>,
    pub cell_tag: Vec<Subdomain>,
    pub facets: Vec<Facet>,
    pub facet_tag: Vec<FacetTag>,
    /// Facet opposite local vertex `i` of each cell.
    pub cell_facets: Vec<[usize; 3]>,
    /// Local index of the newest-vertex-bisection refinement edge.
    pub refine_edge: Vec<u8>,
    /// Map to the cell of the mesh this one was refined from (identity for
    /// freshly built meshes).
    pub parent_cell: Vec<usize>,
}

impl Mesh {
    pub fn n_cells(&self) -> usize {
        self.cells.len()
    }

    pub fn n_vertices(&self) -> usize {
        self.vertices.len()
    }

    pub fn n_facets(&self) -> usize {
        self.facets.len()
    }

    pub fn cell_vertices(&self, cell: usize) -> [[f64; 2]; 3] {
        let c = self.cells[cell];
        [self.vertices[c[0]], self.vertices[c[1]], self.vertices[c[2]]]
    }

    pub fn cell_area(&self, cell: usize) -> f64 {
        let [a, b, c] = self.cell_vertices(cell);
        0.5 * ((b[0] - a[0]) * (c[1] - a[1]) - (c[0] - a[0]) * (b[1] - a[1]))
    }

    /// Longest edge length of a cell.
    pub fn cell_diameter(&self, cell: usize) -> f64 {
        let [a, b, c] = self.cell_vertices(cell);
        let d = |p: [f64; 2], q: [f64; 2]| ((p[0] - q[0]).powi(2) + (p[1] - q[1]).powi(2)).sqrt();
        d(a, b).max(d(b, c)).max(d(c, a))
    }

    pub fn max_diameter(&self) -> f64 {
        (0..self.n_cells()).map(|c| self.cell_diameter(c)).fold(0.0, f64::max)
    }

    pub fn facet_length(&self, facet: usize) -> f64 {
        let f = &self.facets[facet];
        let a = self.vertices[f.v[0]];
        let b = self.vertices[f.v[1]];
        ((b[0] - a[0]).powi(2) + (b[1] - a[1]).powi(2)).sqrt()
    }

    /// Unit global normal of a facet.
    pub fn facet_normal(&self, facet: usize) -> [f64; 2] {
        let f = &self.facets[facet];
        let a = self.vertices[f.v[0]];
        let b = self.vertices[f.v[1]];
        let t = [b[0] - a[0], b[1] - a[1]];
        let len = (t[0] * t[0] + t[1] * t[1]).sqrt();
        [t[1] / len, -t[0] / len]
    }

    pub fn facet_midpoint(&self, facet: usize) -> [f64; 2] {
        let f = &self.facets[facet];
        let a = self.vertices[f.v[0]];
        let b = self.vertices[f.v[1]];
        [0.5 * (a[0] + b[0]), 0.5 * (a[1] + b[1])]
    }

    /// Local edge index of `facet` within `cell`.
    pub fn local_facet_index(&self, cell: usize, facet: usize) -> usize {
        self.cell_facets[cell]
            .iter()
            .position(|&f| f == facet)
            .expect("facet does not belong to cell")
    }

    /// Vertices of local edge `l` (opposite local vertex l), in CCW order.
    pub fn local_edge_vertices(&self, cell: usize, l: usize) -> [usize; 2] {
        let c = self.cells[cell];
        [c[(l + 1) % 3], c[(l + 2) % 3]]
    }

    pub fn total_area(&self) -> f64 {
        (0..self.n_cells()).map(|c| self.cell_area(c)).sum()
    }

    pub fn subdomain_area(&self, tag: Subdomain) -> f64 {
        (0..self.n_cells()).filter(|&c| self.cell_tag[c] == tag).map(|c| self.cell_area(c)).sum()
    }

    /// Check the structural invariants; used by tests and after refinement.
    pub fn validate(&self) -> Result<()> {
        for c in 0..self.n_cells() {
            if self.cell_area(c) <= 0.0 {
                return Err(Error::InvalidGeometry(format!("cell {c} has non-positive area")));
            }
        }
        for (fi, f) in self.facets.iter().enumerate() {
            let tag = self.facet_tag[fi];
            match f.cell_plus {
                None => {
                    if !tag.is_boundary() {
                        return Err(Error::InvalidGeometry(format!("boundary facet {fi} tagged {tag:?}")));
                    }
                }
                Some(cp) => {
                    let tm = self.cell_tag[f.cell_minus];
                    let tp = self.cell_tag[cp];
                    let want = if tm != tp {
                        FacetTag::Sigma
                    } else if tm == Subdomain::Elastic {
                        FacetTag::IntE
                    } else {
                        FacetTag::IntP
                    };
                    if tag != want {
                        return Err(Error::InvalidGeometry(format!(
                            "interior facet {fi} tagged {tag:?}, expected {want:?}"
                        )));
                    }
                    if want == FacetTag::Sigma && tm != Subdomain::Poro {
                        return Err(Error::InvalidGeometry(format!(
                            "interface facet {fi} normal does not point from P to E"
                        )));
                    }
                }
            }
        }
        // conformity: every edge of every cell is one of its three facets,
        // and interior facets have exactly two incident cells
        let mut incidence = vec![0usize; self.n_facets()];
        for c in 0..self.n_cells() {
            for l in 0..3 {
                let fi = self.cell_facets[c][l];
                let ev = self.local_edge_vertices(c, l);
                let fv = self.facets[fi].v;
                let mut sorted_e = ev;
                sorted_e.sort_unstable();
                let mut sorted_f = fv;
                sorted_f.sort_unstable();
                if sorted_e != sorted_f {
                    return Err(Error::InvalidGeometry(format!("cell {c} edge {l} mismatches facet {fi}")));
                }
                incidence[fi] += 1;
            }
        }
        for (fi, f) in self.facets.iter().enumerate() {
            let expect = if f.cell_plus.is_some() { 2 } else { 1 };
            if incidence[fi] != expect {
                return Err(Error::InvalidGeometry(format!(
                    "facet {fi} has {} incident cells, expected {expect}",
                    incidence[fi]
                )));
            }
        }
        Ok(())
    }
}

/// Rebuild facet connectivity from the cell list. Boundary tags are assigned
/// by the `boundary_tag` callback (given the two vertex indices); interior
/// tags follow from the cell subdomain tags.
pub(crate) fn build_facets(
    vertices: &[[f64; 2]],
    cells: &[[usize; 3]],
    cell_tag: &[Subdomain],
    boundary_tag: &mut dyn FnMut(usize, usize) -> FacetTag,
) -> (Vec<Facet>, Vec<FacetTag>, Vec<[usize; 3]>) {
    use std::collections::BTreeMap;
    let mut edge_map: BTreeMap<(usize, usize), Vec<(usize, usize)>> = BTreeMap::new();
    for (c, cell) in cells.iter().enumerate() {
        for l in 0..3 {
            let a = cell[(l + 1) % 3];
            let b = cell[(l + 2) % 3];
            let key = (a.min(b), a.max(b));
            edge_map.entry(key).or_default().push((c, l));
        }
    }
    let mut facets = Vec::with_capacity(edge_map.len());
    let mut tags = Vec::with_capacity(edge_map.len());
    let mut cell_facets = vec![[usize::MAX; 3]; cells.len()];
    for (&(a, b), inc) in &edge_map {
        let fi = facets.len();
        assert!(inc.len() == 1 || inc.len() == 2, "non-manifold edge ({a},{b})");
        let (minus, plus) = if inc.len() == 1 {
            (inc[0].0, None)
        } else {
            let (c0, c1) = (inc[0].0, inc[1].0);
            let (t0, t1) = (cell_tag[c0], cell_tag[c1]);
            if t0 != t1 {
                // interface normal points from P into E
                if t0 == Subdomain::Poro {
                    (c0, Some(c1))
                } else {
                    (c1, Some(c0))
                }
            } else if c0 < c1 {
                (c0, Some(c1))
            } else {
                (c1, Some(c0))
            }
        };
        // orient (v0, v1) so the right-hand normal points out of cell_minus:
        // use the CCW traversal direction of the edge within cell_minus
        let lm = inc.iter().find(|&&(c, _)| c == minus).unwrap().1;
        let v0 = cells[minus][(lm + 1) % 3];
        let v1 = cells[minus][(lm + 2) % 3];
        debug_assert_eq!((v0.min(v1), v0.max(v1)), (a, b));
        let tag = match plus {
            None => boundary_tag(a, b),
            Some(cp) => {
                let (tm, tp) = (cell_tag[minus], cell_tag[cp]);
                if tm != tp {
                    FacetTag::Sigma
                } else if tm == Subdomain::Elastic {
                    FacetTag::IntE
                } else {
                    FacetTag::IntP
                }
            }
        };
        facets.push(Facet { v: [v0, v1], cell_minus: minus, cell_plus: plus });
        tags.push(tag);
        for &(c, l) in inc {
            cell_facets[c][l] = fi;
        }
    }
    let _ = vertices;
    (facets, tags, cell_facets)
}

/// Local index of the longest edge, used as the initial refinement edge.
pub(crate) fn longest_edge(vertices: &[[f64; 2]], cell: &[usize; 3]) -> u8 {
    let mut best = 0u8;
    let mut best_len = -1.0f64;
    for l in 0..3u8 {
        let a = vertices[cell[(l as usize + 1) % 3]];
        let b = vertices[cell[(l as usize + 2) % 3]];
        let len = (a[0] - b[0]).powi(2) + (a[1] - b[1]).powi(2);
        if len > best_len + 1e-14 * best_len.abs() {
            best_len = len;
            best = l;
        }
    }
    best
}
