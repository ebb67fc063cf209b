//! Built-in polyhedra and generated test meshes.

use std::collections::HashMap;

use crate::error::Result;
use crate::manifold::RandomStream;
use crate::scalar::Real;

use super::mesh::{PolyhedralSurface, PolyhedronKind};
use super::vec3::{add, dot, newell, norm, scale, sub, V3};

/// Reverses faces whose normal points towards the centroid (convex solids).
fn orient_outward<T: Real>(vertices: &[V3<T>], faces: &mut [Vec<usize>]) {
    let n = T::of_usize(vertices.len());
    let c = vertices.iter().fold([T::zero(); 3], |s, v| add(&s, v));
    let c = scale(&c, n.recip());
    for f in faces.iter_mut() {
        let pts: Vec<V3<T>> = f.iter().map(|&i| vertices[i]).collect();
        if dot(&newell(&pts), &sub(&pts[0], &c)) < T::zero() {
            f.reverse();
        }
    }
}

impl<T: Real> PolyhedralSurface<T> {
    /// Axis-aligned cube of side `1/√6` centred at the origin.
    pub fn cube() -> Self {
        let h = T::lit(0.5) / T::lit(6.0).sqrt();
        let vertices: Vec<V3<T>> = (0..8)
            .map(|i| {
                let s = |b: usize| if i >> b & 1 == 1 { h } else { -h };
                [s(0), s(1), s(2)]
            })
            .collect();
        let mut faces = vec![
            vec![0, 2, 6, 4],
            vec![1, 5, 7, 3],
            vec![0, 4, 5, 1],
            vec![2, 3, 7, 6],
            vec![0, 1, 3, 2],
            vec![4, 6, 7, 5],
        ];
        orient_outward(&vertices, &mut faces);
        Self::new(PolyhedronKind::Cube, vertices, faces).expect("cube is a valid mesh")
    }

    /// Regular tetrahedron of unit area centred at the origin.
    pub fn tetrahedron() -> Self {
        let one = T::one();
        let vertices = vec![[one, one, one], [one, -one, -one], [-one, one, -one], [-one, -one, one]];
        let mut faces = vec![vec![0, 1, 2], vec![0, 1, 3], vec![0, 2, 3], vec![1, 2, 3]];
        orient_outward(&vertices, &mut faces);
        Self::new(PolyhedronKind::Tetrahedron, vertices, faces).expect("tetrahedron is a valid mesh")
    }

    /// The unit square torus triangulated on an `m × m` grid in the plane
    /// `z = 0`, each cell split along its diagonal.
    pub fn flat_torus_mesh(m: usize) -> Result<Self> {
        let m = m.max(3);
        let step = T::of_usize(m).recip();
        let at = |i: usize, j: usize| [T::of_usize(i) * step, T::of_usize(j) * step, T::zero()];
        let id = |i: usize, j: usize| (i % m) * m + (j % m);
        let vertices = (0..m * m).map(|k| at(k / m, k % m)).collect();
        let mut faces = Vec::with_capacity(2 * m * m);
        let mut corners = Vec::with_capacity(2 * m * m);
        for i in 0..m {
            for j in 0..m {
                faces.push(vec![id(i, j), id(i + 1, j), id(i + 1, j + 1)]);
                corners.push(vec![at(i, j), at(i + 1, j), at(i + 1, j + 1)]);
                faces.push(vec![id(i, j), id(i + 1, j + 1), id(i, j + 1)]);
                corners.push(vec![at(i, j), at(i + 1, j + 1), at(i, j + 1)]);
            }
        }
        Self::with_corners(PolyhedronKind::FlatTorusMesh, vertices, faces, corners)
    }

    /// Octahedron subdivided `levels` times, with every vertex pushed to a
    /// random radius in `[1 − jitter, 1 + jitter]`. Star-shaped about the
    /// origin, hence embedded, with `χ = 2`.
    pub fn random_sphere_mesh(rng: &mut RandomStream, levels: usize, jitter: T) -> Result<Self> {
        let (o, z) = (T::one(), T::zero());
        let mut vertices: Vec<V3<T>> = vec![[o, z, z], [-o, z, z], [z, o, z], [z, -o, z], [z, z, o], [z, z, -o]];
        let mut tris: Vec<[usize; 3]> = vec![
            [0, 2, 4],
            [2, 1, 4],
            [1, 3, 4],
            [3, 0, 4],
            [2, 0, 5],
            [1, 2, 5],
            [3, 1, 5],
            [0, 3, 5],
        ];
        for _ in 0..levels {
            let mut mid: HashMap<(usize, usize), usize> = HashMap::new();
            let mut next = Vec::with_capacity(tris.len() * 4);
            for t in &tris {
                let mut m = [0usize; 3];
                for e in 0..3 {
                    let (a, b) = (t[e], t[(e + 1) % 3]);
                    let key = (a.min(b), a.max(b));
                    m[e] = *mid.entry(key).or_insert_with(|| {
                        let p = scale(&add(&vertices[a], &vertices[b]), T::lit(0.5));
                        vertices.push(scale(&p, norm(&p).recip()));
                        vertices.len() - 1
                    });
                }
                next.push([t[0], m[0], m[2]]);
                next.push([m[0], t[1], m[1]]);
                next.push([m[2], m[1], t[2]]);
                next.push([m[0], m[1], m[2]]);
            }
            tris = next;
        }
        for v in &mut vertices {
            let r = T::one() + jitter * (T::lit(2.0) * rng.uniform::<T>() - T::one());
            *v = scale(v, r);
        }
        let faces = tris.iter().map(|t| t.to_vec()).collect();
        Self::new(PolyhedronKind::Custom, vertices, faces)
    }

    /// Torus of revolution sampled on an `nu × nv` grid with random radii and
    /// jittered vertices, triangulated; `χ = 0`.
    pub fn random_torus_mesh(rng: &mut RandomStream, nu: usize, nv: usize, jitter: T) -> Result<Self> {
        let (nu, nv) = (nu.max(3), nv.max(3));
        let major = T::lit(2.0) + rng.uniform::<T>();
        let minor = T::lit(0.5) + T::lit(0.5) * rng.uniform::<T>();
        let tau = T::lit(2.0) * T::PI();
        let mut vertices = Vec::with_capacity(nu * nv);
        for i in 0..nu {
            for j in 0..nv {
                let a = tau * (T::of_usize(i) + jitter * (rng.uniform::<T>() - T::lit(0.5))) / T::of_usize(nu);
                let b = tau * (T::of_usize(j) + jitter * (rng.uniform::<T>() - T::lit(0.5))) / T::of_usize(nv);
                let rho = major + minor * b.cos();
                vertices.push([rho * a.cos(), rho * a.sin(), minor * b.sin()]);
            }
        }
        let id = |i: usize, j: usize| (i % nu) * nv + (j % nv);
        let mut faces = Vec::with_capacity(2 * nu * nv);
        for i in 0..nu {
            for j in 0..nv {
                faces.push(vec![id(i, j), id(i + 1, j), id(i + 1, j + 1)]);
                faces.push(vec![id(i, j), id(i + 1, j + 1), id(i, j + 1)]);
            }
        }
        Self::new(PolyhedronKind::Custom, vertices, faces)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn cube_has_right_angle_deficits() {
        let c = PolyhedralSurface::<f64>::cube();
        assert!((c.total_area() - 1.0).abs() < 1e-15);
        let (v, chi) = c.deficit_and_euler().unwrap();
        assert!(v.iter().all(|d| (d.deficit - PI / 2.0).abs() < 1e-14));
        assert!((chi - 2.0).abs() < 1e-14);
    }

    #[test]
    fn tetrahedron_has_pi_deficits() {
        let t = PolyhedralSurface::<f64>::tetrahedron();
        let (v, chi) = t.deficit_and_euler().unwrap();
        assert!(v.iter().all(|d| (d.deficit - PI).abs() < 1e-14));
        assert!((chi - 2.0).abs() < 1e-14);
    }

    #[test]
    fn flat_torus_mesh_is_flat() {
        let t = PolyhedralSurface::<f64>::flat_torus_mesh(5).unwrap();
        let (v, chi) = t.deficit_and_euler().unwrap();
        assert!(v.iter().all(|d| d.deficit.abs() < 1e-13));
        assert!(chi.abs() < 1e-12);
        assert_eq!(t.euler_characteristic(), 0);
    }
}
