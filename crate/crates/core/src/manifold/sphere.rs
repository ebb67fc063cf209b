//! Round sphere of unit area, radius `R = 1/(2√π)`.

use super::{check_radius, FlatnessThreshold, Manifold, ManifoldKind, RandomStream, SurfacePoint};
use crate::error::Result;
use crate::scalar::Real;
use crate::series::TopologyInfo;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SphereMetric {
    /// Great-circle arc length.
    Geodesic,
    /// Straight-line distance through the ball.
    Chord,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Sphere {
    pub metric: SphereMetric,
}

impl Sphere {
    pub fn geodesic() -> Self {
        Self {
            metric: SphereMetric::Geodesic,
        }
    }

    pub fn chord() -> Self {
        Self {
            metric: SphereMetric::Chord,
        }
    }

    pub fn radius<T: Real>() -> T {
        T::lit(0.5) / T::PI().sqrt()
    }

    #[inline]
    pub fn chord_sq<T: Real>(a: &[T; 3], b: &[T; 3]) -> T {
        let dx = a[0] - b[0];
        let dy = a[1] - b[1];
        let dz = a[2] - b[2];
        dx * dx + dy * dy + dz * dz
    }

    /// Arc length from the chord, `2R asin(c/2R)`.
    #[inline]
    pub fn arc_from_chord<T: Real>(c: T) -> T {
        let r = Self::radius::<T>();
        let s = (c / (r + r)).min(T::one());
        (r + r) * s.asin()
    }

    /// Maps `(θ, φ)` (polar, azimuthal) to the embedded point.
    pub fn point<T: Real>(theta: T, phi: T) -> [T; 3] {
        let r = Self::radius::<T>();
        [
            r * theta.sin() * phi.cos(),
            r * theta.sin() * phi.sin(),
            r * theta.cos(),
        ]
    }
}

impl<T> From<[T; 3]> for SurfacePoint<T> {
    fn from(xyz: [T; 3]) -> Self {
        SurfacePoint::Embedded { xyz }
    }
}

impl<T: Real> Manifold<T> for Sphere {
    type Point = [T; 3];

    fn kind(&self) -> ManifoldKind {
        match self.metric {
            SphereMetric::Geodesic => ManifoldKind::SphereGeodesic,
            SphereMetric::Chord => ManifoldKind::SphereChord,
        }
    }

    fn flatness(&self) -> Option<FlatnessThreshold<T>> {
        match self.metric {
            SphereMetric::Geodesic => None,
            SphereMetric::Chord => Some(FlatnessThreshold {
                l0: T::lit(2.0) * Self::radius::<T>(),
                w0: T::one(),
            }),
        }
    }

    fn topology(&self) -> Option<TopologyInfo> {
        Some(TopologyInfo::from_genus(0))
    }

    fn diameter(&self) -> T {
        let r = Self::radius::<T>();
        match self.metric {
            SphereMetric::Geodesic => T::PI() * r,
            SphereMetric::Chord => r + r,
        }
    }

    /// Marsaglia's disc method: for `(a, b)` uniform in the unit disc with
    /// `s = a² + b²`, the point `(2a√(1−s), 2b√(1−s), 1−2s)` is uniform on the
    /// unit sphere (and `z` uniform on `[−1, 1]`, as Archimedes requires).
    fn sample(&self, rng: &mut RandomStream) -> Result<[T; 3]> {
        let r = Self::radius::<T>();
        let two = T::lit(2.0);
        loop {
            let a = two * rng.uniform::<T>() - T::one();
            let b = two * rng.uniform::<T>() - T::one();
            let s = a * a + b * b;
            if s < T::one() {
                let q = two * r * (T::one() - s).sqrt();
                return Ok([a * q, b * q, r * (T::one() - two * s)]);
            }
        }
    }

    fn distance(&self, a: &[T; 3], b: &[T; 3]) -> T {
        let c = Self::chord_sq(a, b).sqrt();
        match self.metric {
            SphereMetric::Chord => c,
            SphereMetric::Geodesic => Self::arc_from_chord(c),
        }
    }

    fn proximity(&self, a: &[T; 3], b: &[T; 3]) -> T {
        Self::chord_sq(a, b)
    }

    fn proximity_to_distance(&self, p: T) -> T {
        let c = p.sqrt();
        match self.metric {
            SphereMetric::Chord => c,
            SphereMetric::Geodesic => Self::arc_from_chord(c),
        }
    }

    fn disc_area(&self, _x: &[T; 3], l: T) -> Result<T> {
        check_radius(l)?;
        let d = Manifold::<T>::diameter(self);
        if l >= d {
            return Ok(T::one());
        }
        Ok(match self.metric {
            SphereMetric::Geodesic => {
                let s = (T::PI().sqrt() * l).sin();
                s * s
            }
            SphereMetric::Chord => T::PI() * l * l,
        })
    }
}
