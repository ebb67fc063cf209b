use std::f64::consts::PI;

use knn_scaling::manifold::DimensionSpec;
use knn_scaling::manifold::{Manifold, RandomStream};
use knn_scaling::mc::{estimate_moments_at, SampleConfig};
use knn_scaling::quadrature::{integrate, QuadOptions};
use knn_scaling::regge::*;
use knn_scaling::series::{flat_mean, MomentSpec};
use num_rational::Rational64;
use petgraph::algo::dijkstra;
use petgraph::graph::{NodeIndex, UnGraph};

#[test]
fn exact_deficit_sums_on_platonic_solids() {
    for p in [PolyhedralSurface::<f64>::cube(), PolyhedralSurface::tetrahedron()] {
        assert_eq!(p.exact_deficit_sum_over_pi(12), Some(Rational64::from_integer(4)));
        assert_eq!(p.euler_characteristic(), 2);
    }
    let (v, _) = PolyhedralSurface::<f64>::cube().deficit_and_euler().unwrap();
    assert_eq!(v.len(), 8);
    for d in v {
        assert_eq!(pi_fraction(d.theta, 12), Some(Rational64::new(3, 2)));
        assert_eq!(pi_fraction(d.deficit, 12), Some(Rational64::new(1, 2)));
    }
}

#[test]
fn flat_torus_mesh_deficits_vanish() {
    let t = PolyhedralSurface::<f64>::flat_torus_mesh(7).unwrap();
    assert_eq!(t.exact_deficit_sum_over_pi(8), Some(Rational64::from_integer(0)));
}

#[test]
fn euler_relation_on_random_meshes() {
    let mut rng = RandomStream::new(2718, 0);
    for i in 0..20 {
        let m = if i % 2 == 0 {
            PolyhedralSurface::<f64>::random_sphere_mesh(&mut rng, 1 + i % 3, 0.2).unwrap()
        } else {
            PolyhedralSurface::random_torus_mesh(&mut rng, 6 + i, 5 + i / 2, 0.3).unwrap()
        };
        let (_, chi) = m.deficit_and_euler().unwrap();
        assert!((chi - m.euler_characteristic() as f64).abs() < 1e-9, "mesh {i}: {chi}");
        assert!((m.total_area() - 1.0).abs() < 1e-12);
    }
}

/// Disc area on the unrolled sector, by bisecting for the far boundary along
/// each ray from the apex and integrating `ρ²/2` over the ray angle.
fn sector_area_oracle(deficit: f64, r: f64, l: f64) -> f64 {
    let beta = PI - deficit / 2.0;
    let far = |phi: f64| {
        let dist = |rho: f64| (r * r + rho * rho - 2.0 * r * rho * phi.cos()).sqrt();
        let (mut lo, mut hi) = (0.0, r + l);
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if dist(mid) <= l {
                lo = mid
            } else {
                hi = mid
            }
        }
        lo
    };
    2.0 * integrate(|phi: f64| 0.5 * far(phi).powi(2), 0.0, beta, &QuadOptions::rel(1e-12))
        .unwrap()
        .value
}

#[test]
fn cone_area_matches_sector_oracle() {
    for &(d, r) in &[(0.4, 0.03), (PI / 2.0, 0.05), (PI / 2.0, 0.09), (2.5, 0.02), (PI, 0.07)] {
        let a = cone_disc_area(d, r, 0.1).unwrap();
        let o = sector_area_oracle(d, r, 0.1);
        assert!((a - o).abs() < 1e-12, "Δ={d} r={r}: {a} vs {o}");
    }
}

#[test]
fn cone_correction_is_first_order_in_deficit() {
    let (r, l) = (0.04, 0.1);
    let slope = |d: f64| (cone_disc_area(d, r, l).unwrap() - PI * l * l) / d;
    let (s1, s2) = (slope(1e-3), slope(2e-3));
    assert!(s1 < 0.0 && s1.is_finite());
    // linear response: the slope changes only at O(Δ)
    assert!((s1 - s2).abs() < 2e-3 * s1.abs(), "{s1} vs {s2}");
    // centred at the apex the correction is exactly −Δl²/2
    assert!((cone_disc_area(0.3, 0.0, l).unwrap() - PI * l * l + 0.3 * l * l / 2.0).abs() < 1e-16);
}

fn cube_side() -> f64 {
    1.0 / 6f64.sqrt()
}

/// Shortest path through a dense set of points on every edge: the
/// true geodesic is approximated from above as the sampling refines.
fn edge_graph_distance(p: &PolyhedralSurface<f64>, a: &FacePoint<f64>, b: &FacePoint<f64>, per_edge: usize) -> f64 {
    let mut g = UnGraph::<(), f64>::new_undirected();
    let mut face_nodes: Vec<Vec<(NodeIndex, [f64; 3])>> = vec![Vec::new(); p.face_count()];
    let mut vertex_node = std::collections::HashMap::new();
    let mut edge_nodes = std::collections::HashMap::new();
    for (f, face) in p.faces.iter().enumerate() {
        for i in 0..face.len() {
            let (u, v) = (face[i], face[(i + 1) % face.len()]);
            let nu = *vertex_node.entry(u).or_insert_with(|| g.add_node(()));
            face_nodes[f].push((nu, p.vertices[u]));
            let key = (u.min(v), u.max(v));
            let nodes = edge_nodes
                .entry(key)
                .or_insert_with(|| (1..per_edge).map(|_| g.add_node(())).collect::<Vec<_>>())
                .clone();
            let (s, t) = (p.vertices[key.0], p.vertices[key.1]);
            for (j, n) in nodes.into_iter().enumerate() {
                let w = (j + 1) as f64 / per_edge as f64;
                face_nodes[f].push((
                    n,
                    [
                        s[0] + w * (t[0] - s[0]),
                        s[1] + w * (t[1] - s[1]),
                        s[2] + w * (t[2] - s[2]),
                    ],
                ));
            }
        }
    }
    let na = g.add_node(());
    let nb = g.add_node(());
    face_nodes[a.face].push((na, a.xyz));
    face_nodes[b.face].push((nb, b.xyz));
    let dist =
        |x: &[f64; 3], y: &[f64; 3]| ((x[0] - y[0]).powi(2) + (x[1] - y[1]).powi(2) + (x[2] - y[2]).powi(2)).sqrt();
    for nodes in &face_nodes {
        for i in 0..nodes.len() {
            for j in i + 1..nodes.len() {
                g.add_edge(nodes[i].0, nodes[j].0, dist(&nodes[i].1, &nodes[j].1));
            }
        }
    }
    dijkstra(&g, na, Some(nb), |e| *e.weight())[&nb]
}

#[test]
fn unfolding_matches_shortest_path_oracle() {
    let mut rng = RandomStream::new(31, 0);
    for p in [PolyhedralSurface::<f64>::cube(), PolyhedralSurface::tetrahedron()] {
        for _ in 0..40 {
            let a = p.sample_point(&mut rng);
            let b = p.sample_point(&mut rng);
            let d = p.unfolded_distance(&a, &b).unwrap();
            let o = edge_graph_distance(&p, &a, &b, 96);
            assert!(
                d <= o + 1e-12,
                "{:?}: unfolded {d} exceeds a realisable path {o}",
                p.kind
            );
            assert!(d >= o - 1e-3, "{:?}: unfolded {d} far below oracle {o}", p.kind);
        }
    }
}

#[test]
fn opposite_faces_near_edges() {
    // candidate routes here run through three or four intermediate faces
    let p = PolyhedralSurface::<f64>::cube();
    let h = cube_side() / 2.0;
    let a_xyz = [h, 0.0, h * 0.9];
    let b_xyz = [-h, 0.0, -h * 0.9];
    let a = FacePoint {
        face: p.locate(&a_xyz).unwrap(),
        xyz: a_xyz,
    };
    let b = FacePoint {
        face: p.locate(&b_xyz).unwrap(),
        xyz: b_xyz,
    };
    let d = p.unfolded_distance(&a, &b).unwrap();
    let o = edge_graph_distance(&p, &a, &b, 64);
    assert!(d <= o + 1e-12 && d >= o - 5e-4, "{d} vs {o}");
}

fn cube_symmetries() -> Vec<[[f64; 3]; 3]> {
    let perms = [[0, 1, 2], [0, 2, 1], [1, 0, 2], [1, 2, 0], [2, 0, 1], [2, 1, 0]];
    let mut out = Vec::new();
    for perm in perms {
        for signs in 0..8 {
            let mut m = [[0.0; 3]; 3];
            for (i, &j) in perm.iter().enumerate() {
                m[i][j] = if signs >> i & 1 == 1 { -1.0 } else { 1.0 };
            }
            out.push(m);
        }
    }
    out
}

#[test]
fn cube_distance_is_symmetric_and_isometry_invariant() {
    let p = PolyhedralSurface::<f64>::cube();
    let syms = cube_symmetries();
    assert_eq!(syms.len(), 48);
    let mut rng = RandomStream::new(77, 0);
    let map = |m: &[[f64; 3]; 3], x: &FacePoint<f64>| {
        let y = [
            m[0][0] * x.xyz[0] + m[0][1] * x.xyz[1] + m[0][2] * x.xyz[2],
            m[1][0] * x.xyz[0] + m[1][1] * x.xyz[1] + m[1][2] * x.xyz[2],
            m[2][0] * x.xyz[0] + m[2][1] * x.xyz[1] + m[2][2] * x.xyz[2],
        ];
        FacePoint {
            face: p.locate(&y).unwrap(),
            xyz: y,
        }
    };
    for i in 0..1000 {
        let a = p.sample_point(&mut rng);
        let b = p.sample_point(&mut rng);
        let d = p.unfolded_distance(&a, &b).unwrap();
        assert!((d - p.unfolded_distance(&b, &a).unwrap()).abs() < 1e-12);
        let chord =
            ((a.xyz[0] - b.xyz[0]).powi(2) + (a.xyz[1] - b.xyz[1]).powi(2) + (a.xyz[2] - b.xyz[2]).powi(2)).sqrt();
        assert!(d >= chord - 1e-15);
        let m = &syms[i % 48];
        let e = p.unfolded_distance(&map(m, &a), &map(m, &b)).unwrap();
        assert!((d - e).abs() < 1e-12, "pair {i}: {d} vs {e}");
    }
}

#[test]
fn tetrahedron_diameter_bounds_random_pairs() {
    let t = PolyhedralSurface::<f64>::tetrahedron();
    let mut rng = RandomStream::new(5, 5);
    let diam = Manifold::<f64>::diameter(&t);
    let mut far: f64 = 0.0;
    for _ in 0..3000 {
        let a = t.sample_point(&mut rng);
        let b = t.sample_point(&mut rng);
        far = far.max(t.unfolded_distance(&a, &b).unwrap());
    }
    assert!(far <= diam + 1e-12 && far > 0.9 * diam, "{far} vs {diam}");
}

#[test]
fn cube_disc_area_regimes() {
    let p = PolyhedralSurface::<f64>::cube();
    let h = cube_side() / 2.0;
    let centre = FacePoint {
        face: p.locate(&[0.0, 0.0, h]).unwrap(),
        xyz: [0.0, 0.0, h],
    };
    assert!((p.disc_area(&centre, 0.1).unwrap() - PI * 0.01).abs() < 1e-15);
    let corner = [h, h, h];
    let at_vertex = FacePoint {
        face: p.locate(&corner).unwrap(),
        xyz: corner,
    };
    assert!((p.disc_area(&at_vertex, 0.1).unwrap() - 0.75 * PI * 0.01).abs() < 1e-15);
    // radius reaching two vertices is outside the single-cone regime
    let edge_mid = [h, 0.0, h];
    let e = FacePoint {
        face: p.locate(&edge_mid).unwrap(),
        xyz: edge_mid,
    };
    assert!(p.disc_area(&e, 0.3).is_err());
}

#[test]
fn cube_far_from_vertices_is_flat() {
    let p = PolyhedralSurface::<f64>::cube();
    let h = cube_side() / 2.0;
    let x = FacePoint {
        face: p.locate(&[0.0, 0.0, h]).unwrap(),
        xyz: [0.0, 0.0, h],
    };
    let cfg = SampleConfig::new(200, 2, 1.0, 20_000, 4, 1).unwrap();
    let acc = estimate_moments_at(&p, &x, &cfg).unwrap();
    for k in 1..=2u32 {
        let want: f64 = flat_mean(DimensionSpec::TWO, &MomentSpec::first(k, 200).unwrap()).unwrap();
        let (m, s) = (acc.mean(k as usize), acc.stderr(k as usize));
        assert!((m - want).abs() < 3.0 * s, "k={k}: {m} ± {s} vs {want}");
    }
}
