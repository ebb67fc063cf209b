//! Closed polyhedral surfaces and their deficit angles.

use std::collections::HashMap;

use num_rational::Rational64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Real;

use super::vec3::{cross, dot, newell, norm, scale, sub, unit, V3};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PolyhedronKind {
    Cube,
    Tetrahedron,
    FlatTorusMesh,
    /// Any other mesh (OFF input, generated test meshes).
    Custom,
}

/// Face adjacent across one edge.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Neighbor {
    pub face: usize,
    /// Position `i` of the shared edge `corners[i] → corners[i+1]` in the
    /// owning face.
    pub edge: usize,
    /// Position of the same edge in the neighbor.
    pub neighbor_edge: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct VertexData<T> {
    /// Sum of incident face angles.
    pub theta: T,
    /// `2π − θ`.
    pub deficit: T,
}

/// A closed, consistently oriented polyhedral surface of unit area.
///
/// `faces` hold vertex indices (combinatorics); `corners` hold the matching
/// corner positions (geometry). They differ only for periodic meshes, whose
/// corners are unwrapped copies of the identified vertices.
#[derive(Debug, Clone, PartialEq)]
pub struct PolyhedralSurface<T> {
    pub kind: PolyhedronKind,
    pub vertices: Vec<V3<T>>,
    pub faces: Vec<Vec<usize>>,
    pub corners: Vec<Vec<V3<T>>>,
    pub adjacency: Vec<Vec<Neighbor>>,
    /// Unit outward normals.
    pub normals: Vec<V3<T>>,
    pub face_areas: Vec<T>,
    edge_count: usize,
}

impl<T: Real> PolyhedralSurface<T> {
    /// Validates and rescales to unit total area.
    pub fn new(kind: PolyhedronKind, vertices: Vec<V3<T>>, faces: Vec<Vec<usize>>) -> Result<Self> {
        for f in &faces {
            if let Some(&i) = f.iter().find(|&&i| i >= vertices.len()) {
                return Err(Error::InvalidMesh(format!(
                    "face references vertex {i} of {}",
                    vertices.len()
                )));
            }
        }
        let corners = faces.iter().map(|f| f.iter().map(|&i| vertices[i]).collect()).collect();
        Self::with_corners(kind, vertices, faces, corners)
    }

    /// As [`new`](Self::new) with explicit corner positions per face.
    pub fn with_corners(
        kind: PolyhedronKind,
        vertices: Vec<V3<T>>,
        faces: Vec<Vec<usize>>,
        corners: Vec<Vec<V3<T>>>,
    ) -> Result<Self> {
        if faces.is_empty() {
            return Err(Error::InvalidMesh("no faces".into()));
        }
        if corners.len() != faces.len() || faces.iter().zip(&corners).any(|(f, c)| f.len() != c.len()) {
            return Err(Error::InvalidMesh("corner lists do not match faces".into()));
        }
        let mut edges: HashMap<(usize, usize), Vec<(usize, usize)>> = HashMap::new();
        for (fi, f) in faces.iter().enumerate() {
            if f.len() < 3 {
                return Err(Error::InvalidMesh(format!("face {fi} has {} corners", f.len())));
            }
            if let Some(&i) = f.iter().find(|&&i| i >= vertices.len()) {
                return Err(Error::InvalidMesh(format!("face {fi} references vertex {i}")));
            }
            for e in 0..f.len() {
                let (a, b) = (f[e], f[(e + 1) % f.len()]);
                if a == b {
                    return Err(Error::InvalidMesh(format!("face {fi} repeats vertex {a}")));
                }
                edges.entry((a, b)).or_default().push((fi, e));
            }
        }
        let mut adjacency = vec![Vec::new(); faces.len()];
        let mut edge_count = 0;
        for (&(a, b), uses) in &edges {
            if uses.len() > 1 {
                return Err(Error::InvalidMesh(format!(
                    "directed edge {a}→{b} used by {} faces: not consistently oriented",
                    uses.len()
                )));
            }
            let Some(back) = edges.get(&(b, a)) else {
                return Err(Error::InvalidMesh(format!(
                    "edge {a}–{b} has only one face: surface not closed"
                )));
            };
            let (f, e) = uses[0];
            let (g, ge) = back[0];
            if f == g {
                return Err(Error::InvalidMesh(format!("face {f} is glued to itself along {a}–{b}")));
            }
            adjacency[f].push(Neighbor {
                face: g,
                edge: e,
                neighbor_edge: ge,
            });
            if a < b {
                edge_count += 1;
            }
        }
        for a in &mut adjacency {
            a.sort_by_key(|n| n.edge);
        }

        let mut surf = Self {
            kind,
            vertices,
            faces,
            corners,
            adjacency,
            normals: Vec::new(),
            face_areas: Vec::new(),
            edge_count,
        };
        surf.refresh_geometry()?;
        let total = surf.face_areas.iter().fold(T::zero(), |s, &a| s + a);
        let k = total.sqrt().recip();
        for v in &mut surf.vertices {
            *v = scale(v, k);
        }
        for c in surf.corners.iter_mut().flatten() {
            *c = scale(c, k);
        }
        surf.refresh_geometry()?;
        Ok(surf)
    }

    fn refresh_geometry(&mut self) -> Result<()> {
        self.normals.clear();
        self.face_areas.clear();
        for (fi, c) in self.corners.iter().enumerate() {
            let n = newell(c);
            let a = norm(&n) / T::lit(2.0);
            let size = c.iter().map(|p| norm(&sub(p, &c[0]))).fold(T::zero(), T::max);
            if !(a > T::lit(1e-14) * size * size) {
                return Err(Error::InvalidMesh(format!("face {fi} is degenerate")));
            }
            let n = unit(&n);
            if c.iter().any(|p| dot(&sub(p, &c[0]), &n).abs() > T::lit(1e-9) * size) {
                return Err(Error::InvalidMesh(format!("face {fi} is not planar")));
            }
            self.normals.push(n);
            self.face_areas.push(a);
        }
        Ok(())
    }

    pub fn vertex_count(&self) -> usize {
        self.vertices.len()
    }

    pub fn edge_count(&self) -> usize {
        self.edge_count
    }

    pub fn face_count(&self) -> usize {
        self.faces.len()
    }

    /// `V − E + F`.
    pub fn euler_characteristic(&self) -> i64 {
        self.vertex_count() as i64 - self.edge_count as i64 + self.face_count() as i64
    }

    pub fn total_area(&self) -> T {
        self.face_areas.iter().fold(T::zero(), |s, &a| s + a)
    }

    /// Interior angle of face `f` at corner `i`.
    pub fn corner_angle(&self, f: usize, i: usize) -> T {
        let c = &self.corners[f];
        let n = c.len();
        let p = &c[i];
        let (a, b) = (sub(&c[(i + 1) % n], p), sub(&c[(i + n - 1) % n], p));
        // counter-clockwise about the outward normal, so reflex corners exceed π
        let t = dot(&cross(&a, &b), &self.normals[f]).atan2(dot(&a, &b));
        if t < T::zero() {
            t + T::lit(2.0) * T::PI()
        } else {
            t
        }
    }

    /// Angle sums and deficits per vertex, and `χ = ΣΔ/2π`.
    pub fn deficit_and_euler(&self) -> Result<(Vec<VertexData<T>>, T)> {
        let mut theta = vec![T::zero(); self.vertices.len()];
        for (f, face) in self.faces.iter().enumerate() {
            for (i, &v) in face.iter().enumerate() {
                theta[v] += self.corner_angle(f, i);
            }
        }
        if let Some(v) = theta.iter().position(|&t| t == T::zero()) {
            return Err(Error::InvalidMesh(format!("vertex {v} is not used by any face")));
        }
        let two_pi = T::lit(2.0) * T::PI();
        let data: Vec<VertexData<T>> = theta
            .into_iter()
            .map(|theta| VertexData {
                theta,
                deficit: two_pi - theta,
            })
            .collect();
        let chi = data.iter().fold(T::zero(), |s, d| s + d.deficit) / two_pi;
        let euler = T::from(self.euler_characteristic()).unwrap();
        if (chi - euler).abs() > T::lit(1e-8) * T::of_usize(self.vertices.len()) {
            return Err(Error::InvalidMesh(format!(
                "deficit sum gives χ = {chi} but V − E + F = {euler}; a vertex link is probably not a single disc"
            )));
        }
        Ok((data, chi))
    }

    /// `ΣΔ_i / π` as an exact fraction, when every face angle is a rational
    /// multiple of π with denominator at most `max_den`.
    pub fn exact_deficit_sum_over_pi(&self, max_den: i64) -> Option<Rational64> {
        let mut total = Rational64::from_integer(2 * self.vertices.len() as i64);
        for f in 0..self.faces.len() {
            for i in 0..self.faces[f].len() {
                total -= pi_fraction(self.corner_angle(f, i), max_den)?;
            }
        }
        Some(total)
    }

    /// Which face contains the embedded point `p`, if any.
    pub fn locate(&self, p: &V3<T>) -> Option<usize> {
        let tol = T::lit(1e-9);
        (0..self.faces.len()).find(|&f| {
            let c = &self.corners[f];
            let n = &self.normals[f];
            dot(&sub(p, &c[0]), n).abs() <= tol
                && (0..c.len()).all(|i| {
                    let e = sub(&c[(i + 1) % c.len()], &c[i]);
                    dot(&cross(&e, &sub(p, &c[i])), n) >= -tol
                })
        })
    }
}

/// `x/π` as `p/q` with `q ≤ max_den`, if it is one to 1e-12.
pub fn pi_fraction<T: Real>(x: T, max_den: i64) -> Option<Rational64> {
    let r = (x / T::PI()).to_f64_lossy();
    (1..=max_den).find_map(|q| {
        let p = (r * q as f64).round();
        ((r - p / q as f64).abs() < 1e-12).then(|| Rational64::new(p as i64, q))
    })
}

/// Reads an OFF mesh: `OFF`, then `V F E`, then `V` lines of coordinates
/// and `F` lines `n i₀ … i_{n−1}`. `#` starts a comment.
pub fn parse_off<T: Real>(text: &str) -> Result<PolyhedralSurface<T>> {
    let mut tokens = text
        .lines()
        .map(|l| l.split('#').next().unwrap_or(""))
        .flat_map(str::split_whitespace);
    let bad = |what: String| Error::Parse(format!("OFF: {what}"));
    if tokens.next() != Some("OFF") {
        return Err(bad("missing OFF header".into()));
    }
    let mut next = |what: &dyn Fn() -> String| -> Result<f64> {
        let t = tokens
            .next()
            .ok_or_else(|| bad(format!("unexpected end of input reading {}", what())))?;
        t.parse::<f64>()
            .map_err(|_| bad(format!("bad number {t:?} in {}", what())))
    };
    let mut count = |what: &'static str| -> Result<usize> {
        let x = next(&|| what.to_string())?;
        if x.fract() != 0.0 || x < 0.0 {
            return Err(bad(format!("{what} must be a nonnegative integer")));
        }
        Ok(x as usize)
    };
    let nv = count("vertex count")?;
    let nf = count("face count")?;
    let _edges = count("edge count")?;
    let mut vertices = Vec::with_capacity(nv);
    for i in 0..nv {
        let w = || format!("vertex {i}");
        vertices.push([T::lit(next(&w)?), T::lit(next(&w)?), T::lit(next(&w)?)]);
    }
    let mut faces = Vec::with_capacity(nf);
    for i in 0..nf {
        let w = || format!("face {i}");
        let n = next(&w)?;
        if n.fract() != 0.0 || n < 3.0 {
            return Err(bad(format!("face {i} has invalid size {n}")));
        }
        let mut f = Vec::with_capacity(n as usize);
        for _ in 0..n as usize {
            let x = next(&w)?;
            if x.fract() != 0.0 || x < 0.0 {
                return Err(bad(format!("face {i} has invalid index {x}")));
            }
            f.push(x as usize);
        }
        faces.push(f);
    }
    PolyhedralSurface::new(PolyhedronKind::Custom, vertices, faces)
}
