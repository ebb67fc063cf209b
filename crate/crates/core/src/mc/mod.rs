//! Monte Carlo estimation of k-th nearest neighbor moments.

mod estimate;
mod fit;
mod knn;

pub use estimate::{
    estimate_moments, estimate_moments_at, summarize, Accumulator, MomentEstimate, SampleConfig, TRIAL_BLOCK,
};
pub use fit::{fit_subleading, FitModel, FittedCoefficient, ScalingEstimate, ScalingPoint};
pub use knn::{knn_distances, FlatTorusGrid};
