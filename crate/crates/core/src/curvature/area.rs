//! Small-disc area expansion and its inversion.

use crate::error::{Error, Result};
use crate::fps;
use crate::manifold::{ball_volume, DimensionSpec};
use crate::scalar::{Field, Real};
use crate::series::PowerSeries;

use super::geometry::CurvatureJet;

/// `A(l) = Σ_i a_i l^i`, exact through `l^order`.
#[derive(Debug, Clone, PartialEq)]
pub struct AreaPolynomial<T> {
    pub dimension: DimensionSpec,
    /// Coefficient of `l^i` at index `i`.
    pub coeffs: Vec<T>,
}

impl<T: Real> AreaPolynomial<T> {
    /// Flat ball volume `V_d l^d`.
    pub fn flat(dim: DimensionSpec) -> Self {
        let d = dim.d() as usize;
        let mut coeffs = vec![T::zero(); d + 1];
        coeffs[d] = ball_volume(dim.d(), T::one());
        Self { dimension: dim, coeffs }
    }

    pub fn order(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn eval(&self, l: T) -> T {
        self.coeffs.iter().rev().fold(T::zero(), |acc, &c| acc * l + c)
    }
}

/// Geodesic disc area through `l^order` (`order ∈ {2, 4, 6, 8}`):
///
/// ```text
/// A = πl² [1 − l²K/12 + l⁴(2K² − 3∇²K)/720
///          − l⁶(8K³ − 3[10(∇K)² + 14K∇²K − 5∇⁴K])/161280]
/// ```
pub fn area_series_from_curvature<T: Real>(j: &CurvatureJet<T>, order: usize) -> Result<AreaPolynomial<T>> {
    if !matches!(order, 2 | 4 | 6 | 8) {
        return Err(Error::InvalidParameter(format!(
            "area series order {order} not in {{2, 4, 6, 8}}"
        )));
    }
    let pi = T::PI();
    let k = j.k;
    let bracket = [
        T::one(),
        -k / T::lit(12.0),
        (T::lit(2.0) * k * k - T::lit(3.0) * j.lap_k) / T::lit(720.0),
        -(T::lit(8.0) * k * k * k
            - T::lit(3.0) * (T::lit(10.0) * j.grad_k_sq + T::lit(14.0) * k * j.lap_k - T::lit(5.0) * j.bilap_k))
            / T::lit(161_280.0),
    ];
    let mut coeffs = vec![T::zero(); order + 1];
    for (i, b) in bracket.iter().enumerate().take(order / 2) {
        coeffs[2 + 2 * i] = pi * *b;
    }
    Ok(AreaPolynomial {
        dimension: DimensionSpec::TWO,
        coeffs,
    })
}

/// Reverts `y = x(1 + a_1 x + a_2 x² + …)` and returns `e` with
/// `√x = √y Σ_j e_j y^j` through `y^order`.
///
/// With `x = l²` and `y = w/C` for `A = C l²[1 + a_1 l² + …]`, this is the
/// inverse disc area up to the factor `C^{−(j+½)}` on each term.
pub fn invert_bracket<F: Field>(bracket: &[F], order: usize) -> Result<Vec<F>> {
    if bracket.first() != Some(&F::one()) {
        return Err(Error::InvalidParameter("bracket must start with 1".into()));
    }
    let mut g = bracket.to_vec();
    g.resize((order + 1).max(g.len()), F::zero());
    // x = y·h(y) with h = Σ h_j y^j
    let h = fps::revert(&g, order);
    Ok(fps::pow(&h, &F::from_ratio(1, 2), order))
}

/// Series reversion of a disc-area polynomial into `A⁻¹(w) = w^γ Σ c_j w^j`.
///
/// In two dimensions the input must be even with leading term `C l²`; the
/// result has `γ = 1/2` and `c_j = e_j C^{−(j+1/2)}`. Other dimensions accept
/// only the flat leading term.
pub fn invert_area_series<T: Real>(poly: &AreaPolynomial<T>, order: usize) -> Result<PowerSeries<T>> {
    let d = poly.dimension.d() as usize;
    let lead = poly.coeffs.get(d).copied().unwrap_or_else(T::zero);
    if poly.coeffs.iter().take(d).any(|c| *c != T::zero()) || lead == T::zero() {
        return Err(Error::InvalidParameter(format!(
            "area polynomial must start at l^{d} with nonzero coefficient"
        )));
    }
    if d != 2 {
        if poly.coeffs.iter().skip(d + 1).any(|c| *c != T::zero()) {
            return Err(Error::Unsupported(
                "curved inversion is only implemented for d = 2".into(),
            ));
        }
        let dd = T::of_usize(d);
        return PowerSeries::new(dd.recip(), vec![lead.powf(-dd.recip())]);
    }
    if poly.coeffs.iter().skip(3).step_by(2).any(|c| *c != T::zero()) {
        return Err(Error::InvalidParameter("area polynomial must be even in l".into()));
    }
    let bracket: Vec<T> = poly.coeffs.iter().skip(2).step_by(2).map(|&c| c / lead).collect();
    let e = invert_bracket(&bracket, order)?;
    let coeffs = e
        .iter()
        .enumerate()
        .map(|(j, &ej)| ej * lead.powf(-(T::of_usize(j) + T::lit(0.5))))
        .collect();
    PowerSeries::new(T::lit(0.5), coeffs)
}
