//! Flat square tori of unit volume.

use super::{check_radius, DimensionSpec, FlatnessThreshold, Manifold, ManifoldKind, RandomStream, SurfacePoint};
use crate::error::Result;
use crate::quadrature::{integrate_with_breaks, QuadOptions};
use crate::scalar::Real;
use crate::series::TopologyInfo;
use crate::special::ln_gamma;

/// Volume of the Euclidean `d`-ball of radius `r`.
pub fn ball_volume<T: Real>(d: u32, r: T) -> T {
    let h = T::from_u32(d).unwrap() / T::lit(2.0);
    (h * T::PI().ln() - ln_gamma(h + T::one())).exp() * r.powi(d as i32)
}

/// Area of the radius-`l` disc on the unit square torus.
///
/// Below `l = 1/2` this is `πl²`; between `1/2` and `√2/2` the four caps
/// that leave the fundamental square are removed; beyond that the disc
/// covers the torus.
pub fn torus_disc_area<T: Real>(l: T) -> T {
    let half = T::lit(0.5);
    if l <= half {
        T::PI() * l * l
    } else if l < T::FRAC_1_SQRT_2() {
        let cap = l * l * (half / l).acos() - half * (l * l - half * half).sqrt();
        T::PI() * l * l - T::lit(4.0) * cap
    } else {
        T::one()
    }
}

/// Volume of `{|y| ≤ r} ∩ [−1/2, 1/2]^d`, by slicing along one axis and
/// integrating the `(d−1)`-dimensional section adaptively.
///
/// This is independent of the closed form used for `d = 2` and serves as its
/// cross-check.
pub fn cube_ball_volume<T: Real>(d: u32, r: T, opts: &QuadOptions<T>) -> Result<T> {
    let half = T::lit(0.5);
    if r <= T::zero() {
        return Ok(T::zero());
    }
    if d == 1 {
        return Ok((r + r).min(T::one()));
    }
    let top = r.min(half);
    // the section radius √(r²−t²) crosses √m/2, a kink of the lower-dimensional volume
    let mut breaks = vec![T::zero()];
    for m in 1..d {
        let s = r * r - T::from_u32(m).unwrap() / T::lit(4.0);
        if s > T::zero() && s.sqrt() < top {
            breaks.push(s.sqrt());
        }
    }
    breaks.push(top);
    breaks.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let mut failure = None;
    let res = integrate_with_breaks(
        |t| {
            let rr = (r * r - t * t).max(T::zero()).sqrt();
            match cube_ball_volume(d - 1, rr, opts) {
                Ok(v) => v,
                Err(e) => {
                    failure.get_or_insert(e);
                    T::zero()
                }
            }
        },
        &breaks,
        opts,
    );
    if let Some(e) = failure {
        return Err(e);
    }
    Ok(T::lit(2.0) * res?.value)
}

impl<T> From<[T; 2]> for SurfacePoint<T> {
    fn from(p: [T; 2]) -> Self {
        let [u, v] = p;
        SurfacePoint::Torus { coords: vec![u, v] }
    }
}

impl<T> From<Vec<T>> for SurfacePoint<T> {
    fn from(coords: Vec<T>) -> Self {
        SurfacePoint::Torus { coords }
    }
}

#[inline]
fn wrap_delta<T: Real>(a: T, b: T) -> T {
    let d = (a - b).abs();
    d.min(T::one() - d)
}

/// The unit square with opposite sides identified.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct FlatTorus2D;

impl FlatTorus2D {
    /// Squared minimum-image distance.
    #[inline]
    pub fn distance_sq<T: Real>(a: &[T; 2], b: &[T; 2]) -> T {
        let dx = wrap_delta(a[0], b[0]);
        let dy = wrap_delta(a[1], b[1]);
        dx * dx + dy * dy
    }
}

impl<T: Real> Manifold<T> for FlatTorus2D {
    type Point = [T; 2];

    fn kind(&self) -> ManifoldKind {
        ManifoldKind::FlatTorus2D
    }

    fn flatness(&self) -> Option<FlatnessThreshold<T>> {
        Some(FlatnessThreshold {
            l0: T::lit(0.5),
            w0: T::FRAC_PI_4(),
        })
    }

    fn topology(&self) -> Option<TopologyInfo> {
        Some(TopologyInfo::from_genus(1))
    }

    fn diameter(&self) -> T {
        T::FRAC_1_SQRT_2()
    }

    fn sample(&self, rng: &mut RandomStream) -> Result<[T; 2]> {
        let u = rng.uniform();
        let v = rng.uniform();
        Ok([u, v])
    }

    fn distance(&self, a: &[T; 2], b: &[T; 2]) -> T {
        Self::distance_sq(a, b).sqrt()
    }

    fn proximity(&self, a: &[T; 2], b: &[T; 2]) -> T {
        Self::distance_sq(a, b)
    }

    fn proximity_to_distance(&self, p: T) -> T {
        p.sqrt()
    }

    fn disc_area(&self, _x: &[T; 2], l: T) -> Result<T> {
        check_radius(l)?;
        Ok(torus_disc_area(l))
    }
}

/// The unit cube `[0,1)^d` with opposite faces identified.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct FlatTorusD {
    dim: DimensionSpec,
}

impl FlatTorusD {
    pub fn new(dim: DimensionSpec) -> Self {
        Self { dim }
    }
}

impl<T: Real> Manifold<T> for FlatTorusD {
    type Point = Vec<T>;

    fn kind(&self) -> ManifoldKind {
        ManifoldKind::FlatTorusD(self.dim.d())
    }

    fn dimension(&self) -> DimensionSpec {
        self.dim
    }

    fn flatness(&self) -> Option<FlatnessThreshold<T>> {
        let l0 = T::lit(0.5);
        Some(FlatnessThreshold {
            l0,
            w0: ball_volume(self.dim.d(), l0).min(T::one()),
        })
    }

    fn topology(&self) -> Option<TopologyInfo> {
        (self.dim.d() == 2).then(|| TopologyInfo::from_genus(1))
    }

    fn diameter(&self) -> T {
        T::from_u32(self.dim.d()).unwrap().sqrt() / T::lit(2.0)
    }

    fn sample(&self, rng: &mut RandomStream) -> Result<Vec<T>> {
        Ok((0..self.dim.d()).map(|_| rng.uniform()).collect())
    }

    fn distance(&self, a: &Vec<T>, b: &Vec<T>) -> T {
        self.proximity(a, b).sqrt()
    }

    fn proximity(&self, a: &Vec<T>, b: &Vec<T>) -> T {
        a.iter()
            .zip(b)
            .map(|(&x, &y)| {
                let d = wrap_delta(x, y);
                d * d
            })
            .fold(T::zero(), |s, v| s + v)
    }

    fn proximity_to_distance(&self, p: T) -> T {
        p.sqrt()
    }

    fn disc_area(&self, _x: &Vec<T>, l: T) -> Result<T> {
        check_radius(l)?;
        let d = self.dim.d();
        if l <= T::lit(0.5) {
            Ok(ball_volume(d, l))
        } else if l >= Manifold::<T>::diameter(self) {
            Ok(T::one())
        } else if d == 2 {
            Ok(torus_disc_area(l))
        } else {
            cube_ball_volume(d, l, &QuadOptions::rel(T::lit(1e-11)))
        }
    }
}
