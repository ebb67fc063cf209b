//! Shortest paths on convex polyhedra by unfolding face chains, and the
//! [`Manifold`] view of a polyhedral surface.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::manifold::{
    check_radius, torus_disc_area, FlatTorus2D, FlatnessThreshold, Manifold, ManifoldKind, ProximityOrder,
    RandomStream, SurfacePoint,
};
use crate::scalar::Real;
use crate::series::TopologyInfo;

use super::cone::cone_disc_area;
use super::mesh::{PolyhedralSurface, PolyhedronKind};
use super::vec3::{add, apply, cross, dot, matmul, norm, rotation, scale, sub, unit, V3};

/// Edge crossings explored per path. Shortest paths on the cube cross at
/// most four edges (the spider-and-fly configuration).
pub const UNFOLD_DEPTH: usize = 4;

/// A point on face `face`, in embedding coordinates.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FacePoint<T> {
    pub face: usize,
    pub xyz: V3<T>,
}

impl<T> From<FacePoint<T>> for SurfacePoint<T> {
    fn from(p: FacePoint<T>) -> Self {
        SurfacePoint::Face {
            face: p.face,
            xyz: p.xyz,
        }
    }
}

/// Rigid map `x ↦ R(x − o) + o'` placing one face in the plane of the first.
#[derive(Clone, Copy)]
struct Placement<T> {
    rot: [[T; 3]; 3],
    shift: V3<T>,
}

impl<T: Real> Placement<T> {
    fn identity() -> Self {
        let (o, z) = (T::one(), T::zero());
        Self {
            rot: [[o, z, z], [z, o, z], [z, z, o]],
            shift: [z; 3],
        }
    }

    fn map(&self, x: &V3<T>) -> V3<T> {
        add(&apply(&self.rot, x), &self.shift)
    }

    /// Hinges `next` (which shares the edge `p → q`, in original
    /// coordinates) open into the plane with normal `target`.
    fn unfold(&self, p: &V3<T>, q: &V3<T>, next_normal: &V3<T>, target: &V3<T>) -> Self {
        let (pp, qq) = (self.map(p), self.map(q));
        let axis = unit(&sub(&qq, &pp));
        let n = apply(&self.rot, next_normal);
        let psi = dot(&cross(&n, target), &axis).atan2(dot(&n, target));
        let r = rotation(&axis, psi);
        // x ↦ r(R x + s − P) + P
        let rot = matmul(&r, &self.rot);
        let shift = add(&apply(&r, &sub(&self.shift, &pp)), &pp);
        Self { rot, shift }
    }
}

/// Parameters `(s, t)` of the intersection `a + s(b−a) = p + t(q−p)` in the
/// plane with normal `n`, if the lines are not parallel.
fn intersect<T: Real>(a: &V3<T>, b: &V3<T>, p: &V3<T>, q: &V3<T>, n: &V3<T>) -> Option<(T, T)> {
    let d = sub(b, a);
    let e = sub(q, p);
    let den = dot(&cross(&d, &e), n);
    if den.abs() <= T::epsilon() * norm(&d) * norm(&e) {
        return None;
    }
    let w = sub(p, a);
    Some((dot(&cross(&w, &e), n) / den, dot(&cross(&w, &d), n) / den))
}

impl<T: Real> PolyhedralSurface<T> {
    fn check_point(&self, p: &FacePoint<T>) -> Result<()> {
        if p.face >= self.faces.len() {
            return Err(Error::Domain(format!("face {} does not exist", p.face)));
        }
        let c = &self.corners[p.face];
        if dot(&sub(&p.xyz, &c[0]), &self.normals[p.face]).abs() > T::lit(1e-9) {
            return Err(Error::Domain(format!("point is not on face {}", p.face)));
        }
        Ok(())
    }

    /// Exact geodesic distance on the cube or tetrahedron: the shortest
    /// straight segment over all face chains from `a.face` to `b.face` with
    /// at most [`UNFOLD_DEPTH`] edge crossings that the segment actually
    /// passes through, in order.
    pub fn unfolded_distance(&self, a: &FacePoint<T>, b: &FacePoint<T>) -> Result<T> {
        if !matches!(self.kind, PolyhedronKind::Cube | PolyhedronKind::Tetrahedron) {
            return Err(Error::Unsupported(format!(
                "unfolding geodesics on {:?} meshes",
                self.kind
            )));
        }
        self.check_point(a)?;
        self.check_point(b)?;
        if a.face == b.face {
            return Ok(norm(&sub(&a.xyz, &b.xyz)));
        }
        let mut best = T::infinity();
        let mut chain = vec![a.face];
        let mut edges: Vec<(V3<T>, V3<T>)> = Vec::with_capacity(UNFOLD_DEPTH);
        self.search(a, b, &Placement::identity(), &mut chain, &mut edges, &mut best);
        if best.is_finite() {
            Ok(best)
        } else {
            Err(Error::Unsupported(
                "no unfolding within depth reaches the target".into(),
            ))
        }
    }

    fn search(
        &self,
        a: &FacePoint<T>,
        b: &FacePoint<T>,
        place: &Placement<T>,
        chain: &mut Vec<usize>,
        edges: &mut Vec<(V3<T>, V3<T>)>,
        best: &mut T,
    ) {
        let f = *chain.last().unwrap();
        if f == b.face {
            let target = place.map(&b.xyz);
            let d = norm(&sub(&target, &a.xyz));
            if d < *best && self.segment_follows(&a.xyz, &target, edges, &self.normals[a.face]) {
                *best = d;
            }
            return;
        }
        if edges.len() == UNFOLD_DEPTH {
            return;
        }
        let c = &self.corners[f];
        for nb in &self.adjacency[f] {
            if chain.contains(&nb.face) {
                continue;
            }
            let (p, q) = (c[nb.edge], c[(nb.edge + 1) % c.len()]);
            let next = place.unfold(&p, &q, &self.normals[nb.face], &self.normals[a.face]);
            edges.push((place.map(&p), place.map(&q)));
            chain.push(nb.face);
            self.search(a, b, &next, chain, edges, best);
            chain.pop();
            edges.pop();
        }
    }

    /// The segment `a → b` crosses every hinge edge, in chain order.
    fn segment_follows(&self, a: &V3<T>, b: &V3<T>, edges: &[(V3<T>, V3<T>)], n: &V3<T>) -> bool {
        let tol = T::lit(1e-10);
        let mut last = -tol;
        for (p, q) in edges {
            let Some((s, t)) = intersect(a, b, p, q, n) else {
                return false;
            };
            if s < last - tol || s > T::one() + tol || t < -tol || t > T::one() + tol {
                return false;
            }
            last = s;
        }
        true
    }

    /// Uniform sampling: a face with probability ∝ area, then a fan triangle
    /// ∝ area, then uniform barycentric coordinates.
    pub fn sample_point(&self, rng: &mut RandomStream) -> FacePoint<T> {
        let pick = |weights: &mut dyn Iterator<Item = T>, total: T, u: T| -> usize {
            let mut acc = T::zero();
            let target = u * total;
            let mut last = 0;
            for (i, w) in weights.enumerate() {
                acc += w;
                last = i;
                if target < acc {
                    return i;
                }
            }
            last
        };
        let face = pick(&mut self.face_areas.iter().copied(), self.total_area(), rng.uniform());
        let c = &self.corners[face];
        let tri_area = |i: usize| norm(&cross(&sub(&c[i], &c[0]), &sub(&c[i + 1], &c[0]))) / T::lit(2.0);
        let i = 1 + pick(
            &mut (1..c.len() - 1).map(tri_area),
            self.face_areas[face],
            rng.uniform(),
        );
        let (r1, r2) = (rng.uniform::<T>().sqrt(), rng.uniform::<T>());
        let (wa, wb, wc) = (T::one() - r1, r1 * (T::one() - r2), r1 * r2);
        let xyz = add(&add(&scale(&c[0], wa), &scale(&c[i], wb)), &scale(&c[i + 1], wc));
        FacePoint { face, xyz }
    }

    fn torus_coords(p: &FacePoint<T>) -> [T; 2] {
        let w = |x: T| x - x.floor();
        [w(p.xyz[0]), w(p.xyz[1])]
    }

    /// Vertices within distance `l` of `x`, as `(vertex, distance)`.
    fn vertices_within(&self, x: &FacePoint<T>, l: T) -> Result<Vec<(usize, T)>> {
        let mut out = Vec::new();
        for (v, pos) in self.vertices.iter().enumerate() {
            if norm(&sub(pos, &x.xyz)) > l {
                continue;
            }
            let face = self.faces.iter().position(|f| f.contains(&v)).unwrap();
            let d = self.unfolded_distance(x, &FacePoint { face, xyz: *pos })?;
            if d < l {
                out.push((v, d));
            }
        }
        Ok(out)
    }
}

impl<T: Real> Manifold<T> for PolyhedralSurface<T> {
    type Point = FacePoint<T>;

    fn kind(&self) -> ManifoldKind {
        ManifoldKind::Polyhedron
    }

    fn flatness(&self) -> Option<FlatnessThreshold<T>> {
        (self.kind == PolyhedronKind::FlatTorusMesh).then(|| FlatnessThreshold {
            l0: T::lit(0.5),
            w0: T::FRAC_PI_4(),
        })
    }

    fn topology(&self) -> Option<TopologyInfo> {
        TopologyInfo::from_chi(self.euler_characteristic()).ok()
    }

    /// Exact for the built-ins; for other meshes the sum of all edge
    /// lengths, a crude upper bound.
    fn diameter(&self) -> T {
        match self.kind {
            // opposite corners: side · √5
            PolyhedronKind::Cube => (T::lit(5.0) / T::lit(6.0)).sqrt(),
            // vertex to the centre of the opposite face: (2/√3) · edge, edge = 3^{−1/4}
            PolyhedronKind::Tetrahedron => T::lit(2.0) / T::lit(3.0).sqrt() * T::lit(3.0).powf(T::lit(-0.25)),
            PolyhedronKind::FlatTorusMesh => T::FRAC_1_SQRT_2(),
            PolyhedronKind::Custom => {
                let mut s = T::zero();
                for c in &self.corners {
                    for i in 0..c.len() {
                        s += norm(&sub(&c[(i + 1) % c.len()], &c[i]));
                    }
                }
                s / T::lit(2.0)
            }
        }
    }

    fn sample(&self, rng: &mut RandomStream) -> Result<FacePoint<T>> {
        let mut p = self.sample_point(rng);
        if self.kind == PolyhedronKind::FlatTorusMesh {
            let [u, v] = Self::torus_coords(&p);
            p.xyz = [u, v, T::zero()];
        }
        Ok(p)
    }

    /// `NaN` where [`try_distance`](Manifold::try_distance) fails.
    fn distance(&self, a: &FacePoint<T>, b: &FacePoint<T>) -> T {
        Manifold::try_distance(self, a, b).unwrap_or_else(|_| T::nan())
    }

    fn try_distance(&self, a: &FacePoint<T>, b: &FacePoint<T>) -> Result<T> {
        match self.kind {
            PolyhedronKind::FlatTorusMesh => {
                Ok(FlatTorus2D::distance_sq(&Self::torus_coords(a), &Self::torus_coords(b)).sqrt())
            }
            _ => self.unfolded_distance(a, b),
        }
    }

    /// The embedding chord, a lower bound on the surface distance.
    fn proximity(&self, a: &FacePoint<T>, b: &FacePoint<T>) -> T {
        match self.kind {
            PolyhedronKind::FlatTorusMesh => FlatTorus2D::distance_sq(&Self::torus_coords(a), &Self::torus_coords(b)),
            _ => norm(&sub(&a.xyz, &b.xyz)),
        }
    }

    fn proximity_order(&self) -> ProximityOrder {
        match self.kind {
            PolyhedronKind::FlatTorusMesh => ProximityOrder::Monotone,
            _ => ProximityOrder::LowerBound,
        }
    }

    fn proximity_to_distance(&self, p: T) -> T {
        match self.kind {
            PolyhedronKind::FlatTorusMesh => p.sqrt(),
            _ => p,
        }
    }

    /// Flat-torus meshes are exact; on the cube and tetrahedron the disc may
    /// contain at most one vertex, whose cone then gives the exact area.
    fn disc_area(&self, x: &FacePoint<T>, l: T) -> Result<T> {
        check_radius(l)?;
        if l >= Manifold::<T>::diameter(self) {
            return Ok(T::one());
        }
        if self.kind == PolyhedronKind::FlatTorusMesh {
            return Ok(torus_disc_area(l));
        }
        let near = self.vertices_within(x, l)?;
        match near.as_slice() {
            [] => Ok(T::PI() * l * l),
            [(v, r)] => {
                let (data, _) = self.deficit_and_euler()?;
                cone_disc_area(data[*v].deficit, *r, l)
            }
            _ => Err(Error::Unsupported(format!(
                "disc of radius {l} contains {} vertices",
                near.len()
            ))),
        }
    }
}
