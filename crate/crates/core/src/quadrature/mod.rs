//! Numerical integration and the quadrature route to `⟨D_k^α(N)⟩`.

mod engine;
mod gauss_kronrod;
mod pchip;

pub use engine::{moment_from_area_inverse, remainder_bound, AreaInverseFn, ClosedForm, DEFAULT_REL_TOL};
pub use gauss_kronrod::{integrate, integrate_2d, integrate_with_breaks, QuadOptions, QuadResult};
pub use pchip::Pchip;
