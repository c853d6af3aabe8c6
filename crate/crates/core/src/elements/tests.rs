use super::*;
use crate::mesh::{build_facets, build_mesh, FacetTag, GeometrySpec, Mesh, Subdomain};
use crate::quadrature::{edge_rule, triangle_rule};

/// Two CCW triangles sharing the diagonal of the unit square.
fn two_cell_mesh() -> Mesh {
    let vertices = vec![[0.0, 0.0], [1.0, 0.0], [1.0, 1.0], [0.0, 1.0]];
    let cells = vec![[0, 1, 2], [0, 2, 3]];
    let cell_tag = vec![Subdomain::Poro, Subdomain::Poro];
    let mut boundary = |_a: usize, _b: usize| FacetTag::DirP;
    let (facets, facet_tag, cell_facets) = build_facets(&vertices, &cells, &cell_tag, &mut boundary);
    let refine_edge = cells.iter().map(|c| crate::mesh::longest_edge(&vertices, c)).collect();
    let mesh = Mesh {
        vertices,
        cells,
        cell_tag,
        facets,
        facet_tag,
        cell_facets,
        refine_edge,
        parent_cell: vec![0, 1],
    };
    mesh.validate().unwrap();
    mesh
}

fn pseudo_random(n: usize, seed: u64) -> Vec<f64> {
    // xorshift, deterministic across runs
    let mut state = seed.max(1);
    (0..n)
        .map(|_| {
            state ^= state << 13;
            state ^= state >> 7;
            state ^= state << 17;
            (state % 10_000) as f64 / 5_000.0 - 1.0
        })
        .collect()
}

#[test]
fn dof_counts_match_closed_forms() {
    let mesh = build_mesh(&GeometrySpec::unit_square_split(), 2).unwrap();
    // DG P0 on an 8-cell mesh: one dof per cell
    let z = Space::new(SpaceSpec::total_pressure(0), &mesh);
    assert_eq!(z.n_dofs(), 8);
    // CG P1 restricted to the poroelastic half: one dof per subdomain vertex
    let q = Space::new(SpaceSpec::pressure_cg(0), &mesh);
    assert_eq!(q.n_dofs(), 6);
    // BDM1 on two cells sharing one facet: 5 facets x 2 moments
    let two = two_cell_mesh();
    let v = Space::new(SpaceSpec::displacement(0), &two);
    assert_eq!(v.n_dofs(), 10);
    assert_eq!(v.dofmap.cell_dofs[0].len(), 6);
    assert_eq!(v.dofmap.cell_dofs[1].len(), 6);
}

#[test]
fn bdm_reproduces_constant_field() {
    let mesh = build_mesh(&GeometrySpec::unit_square_split(), 2).unwrap();
    let v = Space::new(SpaceSpec::displacement(0), &mesh);
    let coeffs = interpolate_vector(&v, &mesh, &|_x| [1.0, 0.0]);
    let pts = triangle_rule(3).points;
    for cell in 0..mesh.n_cells() {
        for (val, grad) in eval_vector_field(&v, &mesh, cell, &pts, &coeffs) {
            assert!((val[0] - 1.0).abs() < 1e-13 && val[1].abs() < 1e-13);
            for row in grad {
                assert!(row[0].abs() < 1e-12 && row[1].abs() < 1e-12);
            }
        }
    }
}

#[test]
fn bdm_divergence_is_low_order_polynomial() {
    // div of every mapped BDM_{k+1} basis function lies in P_k on the cell
    let mesh = build_mesh(&GeometrySpec::unit_square_split(), 2).unwrap();
    for k in 0..=2usize {
        let v = Space::new(SpaceSpec::displacement(k), &mesh);
        let npts = (k + 3) * (k + 4) / 2;
        let rule = triangle_rule(2 * k + 4);
        let pts: Vec<[f64; 2]> = rule.points.iter().take(npts.max(rule.points.len())).copied().collect();
        let tab = v.tabulate_vector(&pts);
        let cell = 3;
        let geo = CellGeometry::new(&mesh, cell).unwrap();
        let mapped = map_vector(&tab, &geo, &v.dofmap.cell_signs[cell]);
        // least-squares fit of div against P_k monomials in physical
        // coordinates, centered and scaled by the cell for conditioning
        let exps = monomials(k);
        let phys: Vec<[f64; 2]> = pts.iter().map(|&xi| geo.to_physical(xi)).collect();
        let cen = [
            (geo.verts[0][0] + geo.verts[1][0] + geo.verts[2][0]) / 3.0,
            (geo.verts[0][1] + geo.verts[1][1] + geo.verts[2][1]) / 3.0,
        ];
        let h = geo.diameter;
        let mut a = nalgebra::DMatrix::<f64>::zeros(pts.len(), exps.len());
        for (i, p) in phys.iter().enumerate() {
            for (j, &(px, py)) in exps.iter().enumerate() {
                a[(i, j)] = ((p[0] - cen[0]) / h).powi(px as i32) * ((p[1] - cen[1]) / h).powi(py as i32);
            }
        }
        let svd = a.clone().svd(true, true);
        for dof in 0..mapped.n_dofs {
            let b = nalgebra::DVector::from_iterator(pts.len(), (0..pts.len()).map(|q| mapped.div[dof * pts.len() + q]));
            let coef = svd.solve(&b, 1e-12).unwrap();
            let res = (&a * coef - &b).norm() / b.norm().max(1.0);
            assert!(res < 1e-12, "k={k} dof={dof}: residual {res}");
        }
    }
}

#[test]
fn bdm_normal_trace_is_continuous() {
    let mesh = build_mesh(&GeometrySpec::l_shape(), 2).unwrap();
    for k in 0..=2usize {
        let v = Space::new(SpaceSpec::displacement(k), &mesh);
        let coeffs = pseudo_random(v.n_dofs(), 42 + k as u64);
        let (ts, _) = edge_rule(2 * (k + 1) + 1);
        for (fi, facet) in mesh.facets.iter().enumerate() {
            let Some(plus) = facet.cell_plus else { continue };
            let minus = facet.cell_minus;
            let a = mesh.vertices[facet.v[0]];
            let b = mesh.vertices[facet.v[1]];
            let n = mesh.facet_normal(fi);
            for &t in &ts {
                let x = [a[0] + t * (b[0] - a[0]), a[1] + t * (b[1] - a[1])];
                let eval = |cell: usize| {
                    let geo = CellGeometry::new(&mesh, cell).unwrap();
                    let xi = geo.to_reference(x);
                    let vals = eval_vector_field(&v, &mesh, cell, &[xi], &coeffs);
                    let m = vals[0].0[0].hypot(vals[0].0[1]);
                    (vals[0].0[0] * n[0] + vals[0].0[1] * n[1], m)
                };
                let (vn_m, mag_m) = eval(minus);
                let (vn_p, mag_p) = eval(plus);
                let jump = vn_m - vn_p;
                let scale = mag_m.max(mag_p).max(1.0);
                assert!(jump.abs() < 1e-12 * scale, "k={k} facet={fi}: jump {jump}");
            }
        }
    }
}

#[test]
fn interpolating_linear_field_gives_exact_divergence() {
    let mesh = build_mesh(&GeometrySpec::unit_square_split(), 4).unwrap();
    let v = Space::new(SpaceSpec::displacement(0), &mesh);
    let coeffs = interpolate_vector(&v, &mesh, &|x| [x[0], x[1]]);
    let pts = triangle_rule(2).points;
    for cell in 0..mesh.n_cells() {
        for (_, grad) in eval_vector_field(&v, &mesh, cell, &pts, &coeffs) {
            assert!((grad[0][0] + grad[1][1] - 2.0).abs() < 1e-12);
        }
    }
}

#[test]
fn fortin_commuting_property() {
    // b1(v - Pi v, psi) = 0 for all discrete psi
    let mesh = build_mesh(&GeometrySpec::unit_square_split(), 4).unwrap();
    for k in 0..=1usize {
        let v_space = Space::new(SpaceSpec::displacement(k), &mesh);
        let z_space = Space::new(SpaceSpec::total_pressure(k), &mesh);
        let f = |x: [f64; 2]| [f64::sin(std::f64::consts::PI * x[0]), 0.0];
        let div_f = |x: [f64; 2]| std::f64::consts::PI * f64::cos(std::f64::consts::PI * x[0]);
        let coeffs = interpolate_vector(&v_space, &mesh, &f);
        let rule = triangle_rule(2 * (k + 2) + 6);
        let mut residual = vec![0.0; z_space.n_dofs()];
        for cell in 0..mesh.n_cells() {
            let geo = CellGeometry::new(&mesh, cell).unwrap();
            let vals = eval_vector_field(&v_space, &mesh, cell, &rule.points, &coeffs);
            let psi_tab = z_space.tabulate_scalar(&rule.points);
            for (i, &g) in z_space.dofmap.cell_dofs[cell].iter().enumerate() {
                let mut acc = 0.0;
                for (q, (&xi, &w)) in rule.points.iter().zip(&rule.weights).enumerate() {
                    let x = geo.to_physical(xi);
                    let div_h = vals[q].1[0][0] + vals[q].1[1][1];
                    acc += w * geo.det * psi_tab.value[i * rule.points.len() + q] * (div_f(x) - div_h);
                }
                residual[g] += acc;
            }
        }
        let max_res = residual.iter().fold(0.0f64, |m, r| m.max(r.abs()));
        assert!(max_res < 1e-11, "k={k}: commuting residual {max_res}");
    }
}

#[test]
fn nodal_interpolation_of_linear_scalar() {
    let mesh = build_mesh(&GeometrySpec::unit_square_split(), 2).unwrap();
    let q = Space::new(SpaceSpec::pressure_cg(0), &mesh);
    let coeffs = interpolate_scalar(&q, &mesh, &|x| x[0] + x[1]);
    for (g, owner) in q.dofmap.owner.iter().enumerate() {
        if let DofEntity::Vertex(v) = owner {
            let p = mesh.vertices[*v];
            assert!((coeffs[g] - (p[0] + p[1])).abs() < 1e-14);
        }
    }
}

#[test]
fn equilibrium_property_projection_residual() {
    // the cellwise divergence of any BDM vector lies in the total pressure
    // space: projecting changes nothing
    let mesh = build_mesh(&GeometrySpec::l_shape(), 2).unwrap();
    for k in 0..=1usize {
        let v_space = Space::new(SpaceSpec::displacement(k), &mesh);
        let z_space = Space::new(SpaceSpec::total_pressure(k), &mesh);
        let coeffs = pseudo_random(v_space.n_dofs(), 7 + k as u64);
        let rule = triangle_rule(2 * (k + 2));
        let np = rule.points.len();
        let mut worst = 0.0f64;
        for cell in 0..mesh.n_cells() {
            let geo = CellGeometry::new(&mesh, cell).unwrap();
            let vals = eval_vector_field(&v_space, &mesh, cell, &rule.points, &coeffs);
            let tab = z_space.tabulate_scalar(&rule.points);
            let nz = z_space.dofmap.cell_dofs[cell].len();
            let mut mass = nalgebra::DMatrix::<f64>::zeros(nz, nz);
            let mut rhs = nalgebra::DVector::<f64>::zeros(nz);
            let mut norm2 = 0.0;
            for q in 0..np {
                let w = rule.weights[q] * geo.det;
                let div_h = vals[q].1[0][0] + vals[q].1[1][1];
                norm2 += w * div_h * div_h;
                for i in 0..nz {
                    rhs[i] += w * tab.value[i * np + q] * div_h;
                    for j in 0..nz {
                        mass[(i, j)] += w * tab.value[i * np + q] * tab.value[j * np + q];
                    }
                }
            }
            let proj = mass.lu().solve(&rhs).unwrap();
            let mut res2 = 0.0;
            for q in 0..np {
                let w = rule.weights[q] * geo.det;
                let div_h = vals[q].1[0][0] + vals[q].1[1][1];
                let mut p = 0.0;
                for i in 0..nz {
                    p += proj[i] * tab.value[i * np + q];
                }
                res2 += w * (div_h - p) * (div_h - p);
            }
            worst = worst.max(res2.sqrt() / norm2.sqrt().max(1e-30));
        }
        assert!(worst < 1e-12, "k={k}: equilibrium residual {worst}");
    }
}

#[test]
fn degenerate_cell_is_rejected() {
    let mut mesh = two_cell_mesh();
    mesh.vertices[3] = [0.5, 0.5000000000000001];
    // cell 1 = (0, 2, 3) is now nearly collinear
    match CellGeometry::new(&mesh, 1) {
        Err(crate::Error::DegenerateCell { .. }) => {}
        other => panic!("expected DegenerateCell, got {other:?}"),
    }
}
