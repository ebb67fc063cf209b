//! Statistics of the distance from a point to its k-th nearest of N uniform
//! random sites on a closed manifold, computed three ways: exact and
//! asymptotic series, quadrature over the inverse disc-area function, and
//! Monte Carlo.

pub mod config;
pub mod curvature;
pub mod error;
pub mod fps;
pub mod manifold;
pub mod mc;
pub mod ode;
pub mod quadrature;
pub mod regge;
pub mod scalar;
pub mod series;
pub mod special;

pub use error::{Error, Result};
pub use scalar::{CompensatedSum, Field, Real};

pub type PowerSeries64 = series::PowerSeries<f64>;
pub type PowerSeries32 = series::PowerSeries<f32>;
pub type ExactPowerSeries = series::PowerSeries<num_rational::BigRational>;
pub type ExactReducedSeries = series::ReducedScalingSeries<num_rational::BigRational>;
pub type MomentSpec64 = series::MomentSpec<f64>;
pub type AreaInverse64 = quadrature::AreaInverseFn<f64>;
pub type Descriptor64 = config::ManifoldDescriptor<f64>;
pub type Descriptor32 = config::ManifoldDescriptor<f32>;
pub type ConformalSurface64 = curvature::ConformalSurface<f64>;
pub type CurvatureJet64 = curvature::CurvatureJet<f64>;
pub type Polyhedron64 = regge::PolyhedralSurface<f64>;
pub type SampleConfig64 = mc::SampleConfig<f64>;
pub type Accumulator64 = mc::Accumulator<f64>;
