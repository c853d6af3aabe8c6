//! Global degree-of-freedom maps.
//!
//! BDM facet moments are shared between the two incident cells with a sign
//! that accounts for the global facet normal and, for odd Legendre moments,
//! the edge direction. Lagrange nodes are shared by entity; DG dofs are
//! cell-local. The constrained set holds the displacement normal-trace dofs
//! on Dirichlet facets resp. the pressure nodes on its essential boundary.

use super::{Family, SpaceSpec};
use crate::mesh::{Mesh, Subdomain};

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum DofEntity {
    Vertex(usize),
    /// Interior nodes of a facet (Lagrange) or its normal moments (BDM).
    Facet(usize),
    Cell(usize),
}

#[derive(Debug, Clone)]
pub struct DofMap {
    pub n_dofs: usize,
    /// Local-to-global map per cell; empty for cells outside the space's
    /// subdomain restriction.
    pub cell_dofs: Vec<Vec<usize>>,
    /// Per-cell, per-local-dof orientation signs (all +1 for Lagrange).
    pub cell_signs: Vec<Vec<f64>>,
    /// Sorted constrained global dofs.
    pub constrained: Vec<usize>,
    pub owner: Vec<DofEntity>,
}

impl DofMap {
    pub fn is_active(&self, cell: usize) -> bool {
        !self.cell_dofs[cell].is_empty()
    }
}

fn cell_in_restriction(spec: &SpaceSpec, mesh: &Mesh, cell: usize) -> bool {
    !spec.poro_only() || mesh.cell_tag[cell] == Subdomain::Poro
}

pub fn build_dofmap(spec: &SpaceSpec, mesh: &Mesh) -> DofMap {
    match spec.family {
        Family::BdmHdiv => build_bdm(spec, mesh),
        Family::LagrangeCg => build_cg(spec, mesh),
        Family::LagrangeDg => build_dg(spec, mesh),
    }
}

fn build_bdm(spec: &SpaceSpec, mesh: &Mesh) -> DofMap {
    let r = spec.degree;
    let per_facet = r + 1;
    let n_int = r * r - 1;
    let n_facet_dofs = mesh.n_facets() * per_facet;
    let n_dofs = n_facet_dofs + mesh.n_cells() * n_int;
    let mut owner = Vec::with_capacity(n_dofs);
    for f in 0..mesh.n_facets() {
        for _ in 0..per_facet {
            owner.push(DofEntity::Facet(f));
        }
    }
    for c in 0..mesh.n_cells() {
        for _ in 0..n_int {
            owner.push(DofEntity::Cell(c));
        }
    }
    let mut cell_dofs = Vec::with_capacity(mesh.n_cells());
    let mut cell_signs = Vec::with_capacity(mesh.n_cells());
    for c in 0..mesh.n_cells() {
        let mut dofs = Vec::with_capacity(3 * per_facet + n_int);
        let mut signs = Vec::with_capacity(3 * per_facet + n_int);
        for l in 0..3 {
            let f = mesh.cell_facets[c][l];
            let facet = &mesh.facets[f];
            let outward = facet.cell_minus == c;
            let local_start = mesh.local_edge_vertices(c, l)[0];
            let reversed = local_start != facet.v[0];
            for m in 0..per_facet {
                dofs.push(f * per_facet + m);
                let mut s = if outward { 1.0 } else { -1.0 };
                if reversed && m % 2 == 1 {
                    s = -s;
                }
                signs.push(s);
            }
        }
        for i in 0..n_int {
            dofs.push(n_facet_dofs + c * n_int + i);
            signs.push(1.0);
        }
        cell_dofs.push(dofs);
        cell_signs.push(signs);
    }
    let mut constrained = Vec::new();
    for f in 0..mesh.n_facets() {
        if mesh.facet_tag[f].is_dirichlet() {
            for m in 0..per_facet {
                constrained.push(f * per_facet + m);
            }
        }
    }
    constrained.sort_unstable();
    DofMap { n_dofs, cell_dofs, cell_signs, constrained, owner }
}

fn build_cg(spec: &SpaceSpec, mesh: &Mesh) -> DofMap {
    let d = spec.degree;
    assert!(d >= 1, "continuous Lagrange needs degree >= 1");
    let per_edge = d - 1;
    let per_cell = if d >= 3 { (d - 1) * (d - 2) / 2 } else { 0 };
    // active entities
    let mut vertex_id = vec![usize::MAX; mesh.n_vertices()];
    let mut facet_id = vec![usize::MAX; mesh.n_facets()];
    let mut cell_id = vec![usize::MAX; mesh.n_cells()];
    let mut n_dofs = 0;
    let mut owner = Vec::new();
    for c in 0..mesh.n_cells() {
        if !cell_in_restriction(spec, mesh, c) {
            continue;
        }
        for &v in &mesh.cells[c] {
            if vertex_id[v] == usize::MAX {
                vertex_id[v] = n_dofs;
                owner.push(DofEntity::Vertex(v));
                n_dofs += 1;
            }
        }
    }
    if per_edge > 0 {
        for c in 0..mesh.n_cells() {
            if !cell_in_restriction(spec, mesh, c) {
                continue;
            }
            for l in 0..3 {
                let f = mesh.cell_facets[c][l];
                if facet_id[f] == usize::MAX {
                    facet_id[f] = n_dofs;
                    for _ in 0..per_edge {
                        owner.push(DofEntity::Facet(f));
                    }
                    n_dofs += per_edge;
                }
            }
        }
    }
    if per_cell > 0 {
        for c in 0..mesh.n_cells() {
            if !cell_in_restriction(spec, mesh, c) {
                continue;
            }
            cell_id[c] = n_dofs;
            for _ in 0..per_cell {
                owner.push(DofEntity::Cell(c));
            }
            n_dofs += per_cell;
        }
    }
    // local node order: vertices, edge nodes (local CCW direction), interior
    let mut cell_dofs = Vec::with_capacity(mesh.n_cells());
    for c in 0..mesh.n_cells() {
        if !cell_in_restriction(spec, mesh, c) {
            cell_dofs.push(Vec::new());
            continue;
        }
        let mut dofs = Vec::new();
        for &v in &mesh.cells[c] {
            dofs.push(vertex_id[v]);
        }
        for l in 0..3 {
            let f = mesh.cell_facets[c][l];
            let facet = &mesh.facets[f];
            let local_start = mesh.local_edge_vertices(c, l)[0];
            let reversed = local_start != facet.v[0];
            for i in 0..per_edge {
                let slot = if reversed { per_edge - 1 - i } else { i };
                dofs.push(facet_id[f] + slot);
            }
        }
        for i in 0..per_cell {
            dofs.push(cell_id[c] + i);
        }
        cell_dofs.push(dofs);
    }
    // essential pressure boundary: nodes on pressure-Dirichlet facets
    let mut constrained_mask = vec![false; n_dofs];
    for f in 0..mesh.n_facets() {
        if mesh.facet_tag[f].is_pressure_dirichlet() {
            for &v in &mesh.facets[f].v {
                if vertex_id[v] != usize::MAX {
                    constrained_mask[vertex_id[v]] = true;
                }
            }
            if per_edge > 0 && facet_id[f] != usize::MAX {
                for i in 0..per_edge {
                    constrained_mask[facet_id[f] + i] = true;
                }
            }
        }
    }
    let constrained = (0..n_dofs).filter(|&i| constrained_mask[i]).collect();
    let cell_signs = cell_dofs.iter().map(|d| vec![1.0; d.len()]).collect();
    DofMap { n_dofs, cell_dofs, cell_signs, constrained, owner }
}

fn build_dg(spec: &SpaceSpec, mesh: &Mesh) -> DofMap {
    let d = spec.degree;
    let per_cell = (d + 1) * (d + 2) / 2;
    let mut cell_dofs = Vec::with_capacity(mesh.n_cells());
    let mut owner = Vec::new();
    let mut n_dofs = 0;
    for c in 0..mesh.n_cells() {
        if !cell_in_restriction(spec, mesh, c) {
            cell_dofs.push(Vec::new());
            continue;
        }
        let dofs: Vec<usize> = (n_dofs..n_dofs + per_cell).collect();
        for _ in 0..per_cell {
            owner.push(DofEntity::Cell(c));
        }
        n_dofs += per_cell;
        cell_dofs.push(dofs);
    }
    let cell_signs = cell_dofs.iter().map(|d| vec![1.0; d.len()]).collect();
    DofMap { n_dofs, cell_dofs, cell_signs, constrained: Vec::new(), owner }
}
