//! Geodesic discs on a cone with a single vertex.

use crate::error::{Error, Result};
use crate::scalar::Real;

/// Area of the geodesic disc of radius `l` whose centre lies at distance
/// `r` from the apex of a cone with deficit angle `deficit`.
///
/// Unrolling the cone gives a sector of half-angle `β = π − Δ/2` with the
/// centre on its bisector. Every point of the sector is reached by the
/// straight segment from the centre, so the disc is the part of the plane
/// disc that lies in the sector. With `S = r sin β'` this integrates to
///
/// * `r < l` (apex inside): `r² sin 2β / 2 + l² β + S√(l²−S²) + l² asin(S/l)`,
///   `β' = β`;
/// * `r ≥ l`: `2[S√(l²−S²) + l² asin(S/l)]`, `β' = min(β, asin(l/r))`, which
///   is `πl²` unless the sector edges cut the disc (only for `Δ > π`).
pub fn cone_disc_area<T: Real>(deficit: T, r_vertex: T, l: T) -> Result<T> {
    let two_pi = T::lit(2.0) * T::PI();
    if !(deficit >= T::zero() && deficit < two_pi) {
        return Err(Error::Domain(format!("deficit angle {deficit} outside [0, 2π)")));
    }
    if !(r_vertex >= T::zero()) || !(l >= T::zero()) {
        return Err(Error::Domain(format!(
            "distances must be nonnegative, got r = {r_vertex}, l = {l}"
        )));
    }
    if l == T::zero() {
        return Ok(T::zero());
    }
    let beta = T::PI() - deficit / T::lit(2.0);
    let cap = |s: T| s * (l * l - s * s).max(T::zero()).sqrt() + l * l * (s / l).min(T::one()).asin();
    if r_vertex < l {
        let r = r_vertex;
        let s = r * beta.sin();
        Ok(r * r * (T::lit(2.0) * beta).sin() / T::lit(2.0) + l * l * beta + cap(s))
    } else {
        let reach = (l / r_vertex).asin();
        if beta >= reach {
            return Ok(T::PI() * l * l);
        }
        Ok(T::lit(2.0) * cap(r_vertex * beta.sin()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn flat_cone_is_plane() {
        for r in [0.0, 0.05, 0.2] {
            assert!((cone_disc_area(0.0, r, 0.1).unwrap() - PI * 0.01).abs() < 1e-15);
        }
    }

    #[test]
    fn apex_centred() {
        let a = cone_disc_area(PI / 2.0, 0.0, 0.1).unwrap();
        assert!((a - 0.75 * PI * 0.01).abs() < 1e-16);
        assert!((a - 0.02356).abs() < 1e-5);
    }

    #[test]
    fn continuous_at_the_apex_boundary() {
        for d in [0.3f64, 1.0, 2.0, 3.5, 5.0] {
            let l = 0.1;
            let inside = cone_disc_area(d, l * (1.0 - 1e-12), l).unwrap();
            let outside = cone_disc_area(d, l, l).unwrap();
            assert!((inside - outside).abs() < 1e-12, "Δ = {d}: {inside} vs {outside}");
        }
    }

    #[test]
    fn rejects_bad_input() {
        assert!(cone_disc_area(-0.1, 0.0, 0.1).is_err());
        assert!(cone_disc_area(2.0 * PI, 0.0, 0.1).is_err());
        assert!(cone_disc_area(1.0, -1.0, 0.1).is_err());
    }
}
