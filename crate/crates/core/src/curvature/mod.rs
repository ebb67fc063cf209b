//! Conformal-metric geometry: curvature, geodesics, disc areas, series
//! inversion and surface averages.

mod area;
mod atlas;
mod geodesic;
mod geometry;
mod jet;
mod patch;

pub use area::{area_series_from_curvature, invert_area_series, invert_bracket, AreaPolynomial};
pub use atlas::{
    gauss_bonnet_chi, surface_average_pointwise_w2, surface_average_series, total_area, ChartPoint, ConformalSurface,
    GaussBonnet, SolverOptions,
};
pub use geodesic::{
    disc_area_numeric, geodesic_distance, geodesic_trace, DiscAreaOptions, GeodesicPath, GeodesicState, ShootingOptions,
};
pub use geometry::{curvature, gaussian_curvature, CurvatureJet, FdOptions};
pub use jet::{Jet2, Smooth};
pub use patch::{BuiltinFactor, ChartDomain, ChartWeight, ConformalFactor, ConformalPatch, Pole};
