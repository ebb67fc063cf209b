//! Polyhedral surfaces: deficit angles, Euler's relation, cone-vertex disc
//! areas and geodesics on the cube and tetrahedron.

mod builtin;
mod cone;
mod mesh;
mod unfold;
mod vec3;

pub use cone::cone_disc_area;
pub use mesh::{parse_off, pi_fraction, Neighbor, PolyhedralSurface, PolyhedronKind, VertexData};
pub use unfold::{FacePoint, UNFOLD_DEPTH};
