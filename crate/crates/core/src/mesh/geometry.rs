//! Structured mesh generation for the three experiment geometries.

use super::{build_facets, longest_edge, FacetTag, Mesh, Subdomain};
use crate::{Error, Result};

/// Which boundary segments carry Dirichlet versus Neumann data (per
/// subdomain). `AllDirichlet` clamps the displacement on the whole outer
/// boundary, `TopNeumann` frees the top edge `y = ymax`, `AllNeumann` frees
/// everything (useful for kernel checks; the resulting operator is
/// singular without extra constraints).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BoundaryPreset {
    AllDirichlet,
    TopNeumann,
    AllNeumann,
}

#[derive(Debug, Clone)]
pub enum Shape {
    /// Unit square, elastic subdomain above the horizontal split line.
    UnitSquareSplit { split_y: f64 },
    /// Rectangle with a thin elastic stripe at the bottom; `resolution`
    /// passed to [`build_mesh`] is the number of cell layers in the stripe,
    /// and the target cell size is `0.05 / resolution`.
    RectangleStripe { x0: f64, x1: f64, y0: f64, y1: f64, stripe_top: f64 },
    /// L-shaped domain (-1,1)^2 minus the closed first quadrant square,
    /// with a zig-zag interface from the reentrant corner (0,0) to (-1,-1).
    /// The poroelastic subdomain lies above the interface.
    LShapeZigzag,
}

#[derive(Debug, Clone)]
pub struct GeometrySpec {
    pub shape: Shape,
    pub boundary: BoundaryPreset,
}

impl GeometrySpec {
    pub fn unit_square_split() -> Self {
        GeometrySpec { shape: Shape::UnitSquareSplit { split_y: 0.5 }, boundary: BoundaryPreset::AllDirichlet }
    }

    pub fn stripe() -> Self {
        GeometrySpec {
            shape: Shape::RectangleStripe { x0: 0.0, x1: 0.25, y0: 0.17, y1: 0.25, stripe_top: 0.1705 },
            boundary: BoundaryPreset::AllDirichlet,
        }
    }

    pub fn l_shape() -> Self {
        GeometrySpec { shape: Shape::LShapeZigzag, boundary: BoundaryPreset::AllDirichlet }
    }

    /// Analytic domain area, for the area-sum invariant.
    pub fn area(&self) -> f64 {
        match self.shape {
            Shape::UnitSquareSplit { .. } => 1.0,
            Shape::RectangleStripe { x0, x1, y0, y1, .. } => (x1 - x0) * (y1 - y0),
            Shape::LShapeZigzag => 3.0,
        }
    }
}

struct GridBuilder {
    vertices: Vec<[f64; 2]>,
    cells: Vec<[usize; 3]>,
    cell_tag: Vec<Subdomain>,
}

impl GridBuilder {
    fn new() -> Self {
        GridBuilder { vertices: Vec::new(), cells: Vec::new(), cell_tag: Vec::new() }
    }

    /// Split the square (a, b, d, c) = (SW, SE, NE, NW) along the rising
    /// diagonal a-d into two CCW triangles.
    fn push_square(&mut self, a: usize, b: usize, d: usize, c: usize, tag: Subdomain) {
        self.cells.push([a, b, d]);
        self.cell_tag.push(tag);
        self.cells.push([a, d, c]);
        self.cell_tag.push(tag);
    }
}

fn finish(
    spec: &GeometrySpec,
    builder: GridBuilder,
    bounds: ([f64; 2], [f64; 2]),
) -> Result<Mesh> {
    let GridBuilder { vertices, cells, cell_tag } = builder;
    let ((xmin, ymin), (xmax, ymax)) = ((bounds.0[0], bounds.0[1]), (bounds.1[0], bounds.1[1]));
    let tol = 1e-10 * (xmax - xmin).max(ymax - ymin);
    // boundary tag from the midpoint of the edge and the incident cell tag;
    // captured state: we need the incident subdomain, resolved afterwards
    let verts = vertices.clone();
    let cells_c = cells.clone();
    let tags_c = cell_tag.clone();
    let boundary = spec.boundary;
    let mut boundary_tag = move |a: usize, b: usize| -> FacetTag {
        let m = [0.5 * (verts[a][0] + verts[b][0]), 0.5 * (verts[a][1] + verts[b][1])];
        // find the single incident cell to know the subdomain
        let mut side = Subdomain::Poro;
        'outer: for (c, cell) in cells_c.iter().enumerate() {
            for l in 0..3 {
                let p = cell[(l + 1) % 3];
                let q = cell[(l + 2) % 3];
                if (p.min(q), p.max(q)) == (a.min(b), a.max(b)) {
                    side = tags_c[c];
                    break 'outer;
                }
            }
        }
        let neumann = match boundary {
            BoundaryPreset::AllDirichlet => false,
            BoundaryPreset::AllNeumann => true,
            BoundaryPreset::TopNeumann => (m[1] - ymax).abs() < tol,
        };
        match (side, neumann) {
            (Subdomain::Elastic, false) => FacetTag::DirE,
            (Subdomain::Elastic, true) => FacetTag::NeuE,
            (Subdomain::Poro, false) => FacetTag::DirP,
            (Subdomain::Poro, true) => FacetTag::NeuP,
        }
    };
    let (facets, facet_tag, cell_facets) = build_facets(&vertices, &cells, &cell_tag, &mut boundary_tag);
    let refine_edge = cells.iter().map(|c| longest_edge(&vertices, c)).collect();
    let parent_cell = (0..cells.len()).collect();
    let mesh = Mesh { vertices, cells, cell_tag, facets, facet_tag, cell_facets, refine_edge, parent_cell };
    mesh.validate()?;
    Ok(mesh)
}

/// Build a conforming mesh of the given geometry. `resolution` is the cell
/// count per unit direction for the square and L-shape, and the stripe layer
/// count for the stripe geometry.
pub fn build_mesh(spec: &GeometrySpec, resolution: usize) -> Result<Mesh> {
    if resolution < 1 {
        return Err(Error::InvalidGeometry("resolution must be >= 1".into()));
    }
    match spec.shape {
        Shape::UnitSquareSplit { split_y } => {
            let n = resolution;
            let split_row = split_y * n as f64;
            if (split_row - split_row.round()).abs() > 1e-9 || split_row.round() < 1.0 || split_row.round() > (n - 1).max(0) as f64 {
                return Err(Error::InvalidGeometry(format!(
                    "split line y = {split_y} is not resolvable on a {n}x{n} grid"
                )));
            }
            let split_row = split_row.round() as usize;
            let mut b = GridBuilder::new();
            let h = 1.0 / n as f64;
            for j in 0..=n {
                for i in 0..=n {
                    b.vertices.push([i as f64 * h, j as f64 * h]);
                }
            }
            let vid = |i: usize, j: usize| j * (n + 1) + i;
            for j in 0..n {
                let tag = if j < split_row { Subdomain::Poro } else { Subdomain::Elastic };
                for i in 0..n {
                    b.push_square(vid(i, j), vid(i + 1, j), vid(i + 1, j + 1), vid(i, j + 1), tag);
                }
            }
            finish(spec, b, ([0.0, 0.0], [1.0, 1.0]))
        }
        Shape::RectangleStripe { x0, x1, y0, y1, stripe_top } => {
            if !(y0 < stripe_top && stripe_top < y1) {
                return Err(Error::InvalidGeometry("stripe_top must lie strictly inside [y0, y1]".into()));
            }
            let ell = resolution;
            let h = 0.05 / ell as f64;
            let nx = ((x1 - x0) / h).round().max(1.0) as usize;
            let ny_top = (((y1 - stripe_top) / h).round()).max(1.0) as usize;
            let mut ys: Vec<f64> = Vec::new();
            for j in 0..=ell {
                ys.push(y0 + (stripe_top - y0) * j as f64 / ell as f64);
            }
            for j in 1..=ny_top {
                ys.push(stripe_top + (y1 - stripe_top) * j as f64 / ny_top as f64);
            }
            let mut b = GridBuilder::new();
            for &y in &ys {
                for i in 0..=nx {
                    b.vertices.push([x0 + (x1 - x0) * i as f64 / nx as f64, y]);
                }
            }
            let vid = |i: usize, j: usize| j * (nx + 1) + i;
            for j in 0..ys.len() - 1 {
                let tag = if j < ell { Subdomain::Elastic } else { Subdomain::Poro };
                for i in 0..nx {
                    b.push_square(vid(i, j), vid(i + 1, j), vid(i + 1, j + 1), vid(i, j + 1), tag);
                }
            }
            finish(spec, b, ([x0, y0], [x1, y1]))
        }
        Shape::LShapeZigzag => {
            let n = resolution;
            let h = 1.0 / n as f64;
            let mut b = GridBuilder::new();
            // vertex grid over (-1,1)^2 minus the open first quadrant
            use std::collections::BTreeMap;
            let mut index: BTreeMap<(i64, i64), usize> = BTreeMap::new();
            let mut vid = |b: &mut GridBuilder, i: i64, j: i64| -> usize {
                *index.entry((i, j)).or_insert_with(|| {
                    b.vertices.push([-1.0 + i as f64 * h, -1.0 + j as f64 * h]);
                    b.vertices.len() - 1
                })
            };
            for j in 0..(2 * n) as i64 {
                for i in 0..(2 * n) as i64 {
                    let in_q1 = i >= n as i64 && j >= n as i64;
                    if in_q1 {
                        continue;
                    }
                    // subdomain: Q2 (top-left) is P, Q4 (bottom-right) is E;
                    // in Q3 the staircase separates squares with j > i (P,
                    // above) from j <= i (E, below), and the corner square
                    // is split along its diagonal so the interface runs from
                    // the reentrant corner (0,0) all the way to (-1,-1)
                    let a = vid(&mut b, i, j);
                    let bb = vid(&mut b, i + 1, j);
                    let d = vid(&mut b, i + 1, j + 1);
                    let c = vid(&mut b, i, j + 1);
                    if i == 0 && j == 0 {
                        b.cells.push([a, bb, d]);
                        b.cell_tag.push(Subdomain::Elastic);
                        b.cells.push([a, d, c]);
                        b.cell_tag.push(Subdomain::Poro);
                        continue;
                    }
                    let tag = if i < n as i64 && j >= n as i64 {
                        Subdomain::Poro
                    } else if i >= n as i64 && j < n as i64 {
                        Subdomain::Elastic
                    } else if j > i {
                        Subdomain::Poro
                    } else {
                        Subdomain::Elastic
                    };
                    b.push_square(a, bb, d, c, tag);
                }
            }
            finish(spec, b, ([-1.0, -1.0], [1.0, 1.0]))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unit_square_split_resolution_two() {
        let spec = GeometrySpec::unit_square_split();
        let mesh = build_mesh(&spec, 2).unwrap();
        assert_eq!(mesh.n_cells(), 8);
        let n_e = mesh.cell_tag.iter().filter(|t| **t == Subdomain::Elastic).count();
        let n_p = mesh.cell_tag.iter().filter(|t| **t == Subdomain::Poro).count();
        assert_eq!(n_e, 4);
        assert_eq!(n_p, 4);
        let sigma = mesh.facet_tag.iter().filter(|t| **t == FacetTag::Sigma).count();
        assert_eq!(sigma, 2);
    }

    #[test]
    fn unit_square_split_unresolvable() {
        let spec = GeometrySpec::unit_square_split();
        assert!(matches!(build_mesh(&spec, 1), Err(crate::Error::InvalidGeometry(_))));
    }

    #[test]
    fn sigma_separates_subdomains_on_l_shape() {
        let mesh = build_mesh(&GeometrySpec::l_shape(), 3).unwrap();
        for (fi, f) in mesh.facets.iter().enumerate() {
            if mesh.facet_tag[fi] == FacetTag::Sigma {
                let cp = f.cell_plus.unwrap();
                assert_eq!(mesh.cell_tag[f.cell_minus], Subdomain::Poro);
                assert_eq!(mesh.cell_tag[cp], Subdomain::Elastic);
            }
        }
        // staircase (n-1 horizontal + n-1 vertical) plus the corner diagonal
        let sigma = mesh.facet_tag.iter().filter(|t| **t == FacetTag::Sigma).count();
        assert_eq!(sigma, 5);
        // the interface reaches both corners
        let touches = |x: f64, y: f64| {
            (0..mesh.n_facets()).any(|fi| {
                mesh.facet_tag[fi] == FacetTag::Sigma
                    && mesh.facets[fi].v.iter().any(|&v| {
                        (mesh.vertices[v][0] - x).abs() < 1e-14 && (mesh.vertices[v][1] - y).abs() < 1e-14
                    })
            })
        };
        assert!(touches(0.0, 0.0));
        assert!(touches(-1.0, -1.0));
    }

    #[test]
    fn areas_sum_to_domain_area() {
        for (spec, res) in [
            (GeometrySpec::unit_square_split(), 4),
            (GeometrySpec::l_shape(), 2),
            (GeometrySpec::stripe(), 2),
        ] {
            let mesh = build_mesh(&spec, res).unwrap();
            let total = mesh.total_area();
            assert!(
                (total - spec.area()).abs() <= 1e-12 * spec.area(),
                "{:?}: {total} vs {}",
                spec.shape,
                spec.area()
            );
        }
    }

    #[test]
    fn interface_normal_points_up_on_split_square() {
        let mesh = build_mesh(&GeometrySpec::unit_square_split(), 4).unwrap();
        for fi in 0..mesh.n_facets() {
            if mesh.facet_tag[fi] == FacetTag::Sigma {
                let n = mesh.facet_normal(fi);
                assert!((n[0]).abs() < 1e-14 && (n[1] - 1.0).abs() < 1e-14);
            }
        }
    }

    #[test]
    fn boundary_facets_have_outward_normals() {
        let mesh = build_mesh(&GeometrySpec::unit_square_split(), 2).unwrap();
        for fi in 0..mesh.n_facets() {
            if mesh.facet_tag[fi].is_boundary() {
                let n = mesh.facet_normal(fi);
                let m = mesh.facet_midpoint(fi);
                let centroid = {
                    let [a, b, c] = mesh.cell_vertices(mesh.facets[fi].cell_minus);
                    [(a[0] + b[0] + c[0]) / 3.0, (a[1] + b[1] + c[1]) / 3.0]
                };
                let outward = (m[0] - centroid[0]) * n[0] + (m[1] - centroid[1]) * n[1];
                assert!(outward > 0.0);
            }
        }
    }

    #[test]
    fn top_neumann_preset_tags_top_edge() {
        let spec = GeometrySpec { shape: Shape::UnitSquareSplit { split_y: 0.5 }, boundary: BoundaryPreset::TopNeumann };
        let mesh = build_mesh(&spec, 2).unwrap();
        let n_neu = mesh.facet_tag.iter().filter(|t| **t == FacetTag::NeuE).count();
        assert_eq!(n_neu, 2);
    }
}
