//! Gaussian curvature and its covariant derivative scalars.

use crate::error::{Error, Result};
use crate::scalar::Real;

use super::patch::ConformalFactor;

/// `K` and the derivative invariants entering the disc-area expansion.
/// Derivatives are covariant: `∇²K = (K_uu + K_vv)/f`,
/// `(∇K)² = (K_u² + K_v²)/f`, `∇⁴K = ∇²(∇²K)`.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct CurvatureJet<T> {
    pub k: T,
    pub lap_k: T,
    pub grad_k_sq: T,
    pub bilap_k: T,
}

impl<T: Real> CurvatureJet<T> {
    pub fn constant(k: T) -> Self {
        Self {
            k,
            lap_k: T::zero(),
            grad_k_sq: T::zero(),
            bilap_k: T::zero(),
        }
    }
}

/// Step control for the Richardson-extrapolated central differences.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FdOptions<T> {
    /// Coarsest step for derivatives of `K`.
    pub step: T,
    /// Coarsest step for the inner Laplacian when forming `∇⁴K`.
    pub inner_step: T,
    /// Number of halvings in the Richardson table.
    pub levels: usize,
}

impl<T: Real> Default for FdOptions<T> {
    fn default() -> Self {
        Self {
            step: T::lit(0.15),
            inner_step: T::lit(0.1),
            levels: 3,
        }
    }
}

/// Pointwise `K = (f_u² + f_v² − f f_uu − f f_vv) / (2f³)`.
pub fn curvature<T: Real, P: ConformalFactor<T> + ?Sized>(p: &P, u: T, v: T) -> Result<T> {
    let j = p.jet(u, v);
    if !(j.v > T::zero()) {
        return Err(Error::Domain(format!("conformal factor {} ≤ 0 at ({u}, {v})", j.v)));
    }
    Ok((j.du * j.du + j.dv * j.dv - j.v * (j.duu + j.dvv)) / (T::lit(2.0) * j.v * j.v * j.v))
}

/// Richardson table over central differences with steps `h, h/2, …`;
/// returns `(g_u, g_v, g_uu + g_vv)`.
fn flat_derivatives<T: Real, G: FnMut(T, T) -> Result<T>>(
    mut g: G,
    u: T,
    v: T,
    h: T,
    levels: usize,
) -> Result<(T, T, T)> {
    let g0 = g(u, v)?;
    let mut tu = Vec::with_capacity(levels);
    let mut tv = Vec::with_capacity(levels);
    let mut tl = Vec::with_capacity(levels);
    let mut hh = h;
    for _ in 0..levels {
        let gp_u = g(u + hh, v)?;
        let gm_u = g(u - hh, v)?;
        let gp_v = g(u, v + hh)?;
        let gm_v = g(u, v - hh)?;
        tu.push((gp_u - gm_u) / (hh + hh));
        tv.push((gp_v - gm_v) / (hh + hh));
        tl.push((gp_u + gm_u + gp_v + gm_v - T::lit(4.0) * g0) / (hh * hh));
        hh /= T::lit(2.0);
    }
    Ok((richardson(tu), richardson(tv), richardson(tl)))
}

/// Extrapolates a sequence with error expansion in `h², h⁴, …` under halving.
fn richardson<T: Real>(mut row: Vec<T>) -> T {
    let mut factor = T::lit(4.0);
    while row.len() > 1 {
        row = row
            .windows(2)
            .map(|w| w[1] + (w[1] - w[0]) / (factor - T::one()))
            .collect();
        factor *= T::lit(4.0);
    }
    row[0]
}

/// `K` and its derivative scalars at `(u, v)`.
///
/// `K` itself is exact (second-order forward differentiation of `f`); its
/// derivatives come from extrapolated central differences of `K`.
pub fn gaussian_curvature<T: Real, P: ConformalFactor<T> + ?Sized>(
    p: &P,
    u: T,
    v: T,
    fd: &FdOptions<T>,
) -> Result<CurvatureJet<T>> {
    let k = curvature(p, u, v)?;
    let f = p.f(u, v);
    let (ku, kv, lap) = flat_derivatives(|a, b| curvature(p, a, b), u, v, fd.step, fd.levels)?;
    let inner = |a: T, b: T| -> Result<T> {
        let (_, _, l) = flat_derivatives(|x, y| curvature(p, x, y), a, b, fd.inner_step, fd.levels)?;
        Ok(l / p.f(a, b))
    };
    let (_, _, lap_of_lap) = flat_derivatives(inner, u, v, fd.step, fd.levels)?;
    Ok(CurvatureJet {
        k,
        lap_k: lap / f,
        grad_k_sq: (ku * ku + kv * kv) / f,
        bilap_k: lap_of_lap / f,
    })
}
