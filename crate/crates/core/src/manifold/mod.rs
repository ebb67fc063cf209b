//! Closed unit-area manifolds: samplers, distances and disc areas.

mod flat;
mod sphere;

pub use flat::{ball_volume, cube_ball_volume, torus_disc_area, FlatTorus2D, FlatTorusD};
pub use sphere::{Sphere, SphereMetric};

use std::fmt::Debug;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Real;
use crate::series::TopologyInfo;

/// Dimension of a manifold, `d ≥ 1`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct DimensionSpec {
    d: u32,
}

impl DimensionSpec {
    pub const TWO: Self = Self { d: 2 };

    pub fn new(d: u32) -> Result<Self> {
        if d == 0 {
            return Err(Error::InvalidParameter("dimension must be ≥ 1".into()));
        }
        Ok(Self { d })
    }

    pub fn d(&self) -> u32 {
        self.d
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ManifoldKind {
    FlatTorus2D,
    SphereGeodesic,
    SphereChord,
    FlatTorusD(u32),
    ConformalPatchSet,
    Polyhedron,
}

/// Radius `l0` below which every disc is exactly Euclidean, and `w0 = A(l0)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FlatnessThreshold<T> {
    pub l0: T,
    pub w0: T,
}

impl<T: Real> FlatnessThreshold<T> {
    pub fn new(l0: T, w0: T) -> Result<Self> {
        if !(l0 > T::zero()) || !(w0 > T::zero() && w0 <= T::one()) {
            return Err(Error::InvalidParameter(format!(
                "flatness threshold needs l0 > 0 and w0 ∈ (0, 1], got ({l0}, {w0})"
            )));
        }
        Ok(Self { l0, w0 })
    }

    /// True when the flat formula holds for every disc (`w0 = 1`).
    pub fn is_global(&self) -> bool {
        self.w0 == T::one()
    }
}

/// A point on any built-in manifold, in the form shared by the CLI and
/// configuration layers.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "kebab-case")]
pub enum SurfacePoint<T> {
    /// Coordinates in `[0,1)^d` on a flat torus.
    Torus { coords: Vec<T> },
    /// Embedding coordinates (sphere).
    Embedded { xyz: [T; 3] },
    /// Chart coordinates on a conformal patch.
    Chart { chart_id: usize, u: T, v: T },
    /// A point on a polyhedron face, in embedding coordinates.
    Face { face: usize, xyz: [T; 3] },
}

/// How [`Manifold::proximity`] relates to the true distance.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ProximityOrder {
    /// A strictly increasing function of the distance; convert with
    /// [`Manifold::proximity_to_distance`].
    Monotone,
    /// A lower bound on the distance (same units); the exact distance must be
    /// computed for candidates that survive pruning.
    LowerBound,
}

/// A closed manifold of unit total area.
pub trait Manifold<T: Real>: Send + Sync {
    type Point: Clone + Debug + Send + Sync + Into<SurfacePoint<T>>;

    fn kind(&self) -> ManifoldKind;

    fn dimension(&self) -> DimensionSpec {
        DimensionSpec::TWO
    }

    fn total_area(&self) -> T {
        T::one()
    }

    /// `None` when no neighborhood is exactly flat.
    fn flatness(&self) -> Option<FlatnessThreshold<T>>;

    /// Topology of a closed surface; `None` outside `d = 2`.
    fn topology(&self) -> Option<TopologyInfo>;

    /// Largest distance between two points.
    fn diameter(&self) -> T;

    /// Leading behaviour `A⁻¹(w) ≈ c_0 w^γ` as `(γ, c_0)`.
    fn leading_inverse(&self) -> (T, T) {
        let d = T::from_u32(self.dimension().d()).unwrap();
        let c0 = (crate::special::ln_gamma(d / T::lit(2.0) + T::one()) / d).exp() / T::PI().sqrt();
        (d.recip(), c0)
    }

    fn sample(&self, rng: &mut RandomStream) -> Result<Self::Point>;

    fn distance(&self, a: &Self::Point, b: &Self::Point) -> T;

    /// Distance for metrics computed by an iterative solver that can fail.
    fn try_distance(&self, a: &Self::Point, b: &Self::Point) -> Result<T> {
        Ok(self.distance(a, b))
    }

    /// Cheap ordering key for neighbor search.
    fn proximity(&self, a: &Self::Point, b: &Self::Point) -> T {
        self.distance(a, b)
    }

    fn proximity_order(&self) -> ProximityOrder {
        ProximityOrder::Monotone
    }

    fn proximity_to_distance(&self, p: T) -> T {
        p
    }

    /// Area of the geodesic disc of radius `l` about `x`.
    fn disc_area(&self, x: &Self::Point, l: T) -> Result<T>;
}

pub(crate) fn check_radius<T: Real>(l: T) -> Result<()> {
    if l >= T::zero() {
        Ok(())
    } else {
        Err(Error::Domain(format!("disc radius {l} is negative")))
    }
}

/// Deterministic random stream identified by `(seed, stream)`.
///
/// Streams with the same seed and different indices are independent
/// ChaCha8 keystreams, so any unit of work can be regenerated in isolation.
#[derive(Debug, Clone)]
pub struct RandomStream {
    rng: ChaCha8Rng,
}

impl RandomStream {
    pub fn new(seed: u64, stream: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(stream);
        Self { rng }
    }

    /// Uniform on `[0, 1)`.
    pub fn uniform<T: Real>(&mut self) -> T {
        let x = T::lit(self.rng.random::<f64>());
        if x < T::one() {
            x
        } else {
            // f32 rounding of values just below one
            T::one() - T::epsilon() / T::lit(2.0)
        }
    }

    /// Uniform index in `0..n`.
    pub fn index(&mut self, n: usize) -> usize {
        self.rng.random_range(0..n)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn streams_are_reproducible_and_distinct() {
        let mut a = RandomStream::new(7, 3);
        let mut b = RandomStream::new(7, 3);
        let mut c = RandomStream::new(7, 4);
        let xa: Vec<f64> = (0..5).map(|_| a.uniform()).collect();
        let xb: Vec<f64> = (0..5).map(|_| b.uniform()).collect();
        let xc: Vec<f64> = (0..5).map(|_| c.uniform()).collect();
        assert_eq!(xa, xb);
        assert_ne!(xa, xc);
    }

    #[test]
    fn f32_uniform_stays_below_one() {
        let mut r = RandomStream::new(1, 0);
        for _ in 0..100_000 {
            let x: f32 = r.uniform();
            assert!((0.0..1.0).contains(&x));
        }
    }

    #[test]
    fn dimension_validation() {
        assert!(DimensionSpec::new(0).is_err());
        assert_eq!(DimensionSpec::new(3).unwrap().d(), 3);
    }

    #[test]
    fn threshold_validation() {
        assert!(FlatnessThreshold::new(0.0, 0.5).is_err());
        assert!(FlatnessThreshold::new(0.5, 1.5).is_err());
        assert!(FlatnessThreshold::new(0.5, 1.0).unwrap().is_global());
    }
}
