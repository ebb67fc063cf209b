//! Exact and asymptotic formulas for `⟨D_k^α(N)⟩`.
//!
//! Everything here starts from the Beta-moment representation
//!
//! ```text
//! ⟨D_k(N)⟩ = Σ_j c_j · Γ(k+j+γ)/Γ(k) · Γ(N+1)/Γ(N+j+γ+1)
//! ```
//!
//! for an inverse disc-area function `A⁻¹(w) = w^γ Σ_j c_j w^j`, plus the
//! large-N expansion of the reduced variable `⟨D̃_k(N)⟩`.

use crate::error::{Error, Result};
use crate::fps;
use crate::manifold::DimensionSpec;
use crate::scalar::{CompensatedSum, Field, Real};
use crate::special::{bernoulli_numbers, bernoulli_polynomial, ln_gamma, ln_gamma_ratio};

/// Relative size below which the next term ends a convergent sum.
const TRUNCATION_REL: f64 = 1e-15;
/// Minimum number of terms before the truncation test applies.
const BURN_IN: usize = 10;
/// Default term budget for [`sphere_mean_exact`].
pub const DEFAULT_MAX_TERMS: usize = 10_000_000;

/// `A⁻¹(w) = w^γ Σ_{j≤J} c_j w^j`.
#[derive(Debug, Clone, PartialEq)]
pub struct PowerSeries<T> {
    gamma: T,
    coeffs: Vec<T>,
}

impl<T: Field + PartialOrd> PowerSeries<T> {
    pub fn new(gamma: T, coeffs: Vec<T>) -> Result<Self> {
        if gamma < T::zero() || gamma >= T::one() {
            return Err(Error::InvalidParameter(format!(
                "series exponent {gamma:?} outside [0, 1)"
            )));
        }
        match coeffs.first() {
            Some(c0) if *c0 > T::zero() => Ok(Self { gamma, coeffs }),
            _ => Err(Error::InvalidParameter(
                "leading series coefficient must be positive".into(),
            )),
        }
    }

    pub fn gamma(&self) -> &T {
        &self.gamma
    }

    pub fn coeffs(&self) -> &[T] {
        &self.coeffs
    }

    pub fn leading(&self) -> &T {
        &self.coeffs[0]
    }

    /// Index `J` of the last retained coefficient.
    pub fn truncation_order(&self) -> usize {
        self.coeffs.len() - 1
    }

    /// Coefficients divided by `c_0`.
    pub fn normalized(&self) -> Vec<T> {
        let c0 = self.coeffs[0].clone();
        self.coeffs.iter().map(|c| c.clone() / c0.clone()).collect()
    }
}

impl<T: Real> PowerSeries<T> {
    /// Flat `d`-dimensional inverse ball volume, `[(d/2)!]^{1/d} w^{1/d} / √π`.
    pub fn flat(dim: DimensionSpec) -> Self {
        let d = T::of_usize(dim.d() as usize);
        let c0 = (ln_gamma(d / T::lit(2.0) + T::one()) / d).exp() / T::PI().sqrt();
        Self {
            gamma: d.recip(),
            coeffs: vec![c0],
        }
    }

    /// Arcsine series of the unit-area sphere, `arcsin(√w)/√π`, through `w^J`.
    pub fn sphere_arcsin(order: usize) -> Self {
        let mut coeffs = Vec::with_capacity(order + 1);
        let inv_sqrt_pi = T::PI().sqrt().recip();
        // binom(2j, j) / 4^j, updated by the ratio (2j+1)/(2j+2)
        let mut central = T::one();
        for j in 0..=order {
            let jj = T::of_usize(j);
            coeffs.push(inv_sqrt_pi * central / (T::lit(2.0) * jj + T::one()));
            central = central * (T::lit(2.0) * jj + T::one()) / (T::lit(2.0) * jj + T::lit(2.0));
        }
        Self {
            gamma: T::lit(0.5),
            coeffs,
        }
    }

    pub fn eval(&self, w: T) -> T {
        let poly = self.coeffs.iter().rev().fold(T::zero(), |acc, &c| acc * w + c);
        w.powf(self.gamma) * poly
    }
}

/// Neighbor rank, site count and moment order.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MomentSpec<T> {
    pub k: u32,
    pub n: u64,
    pub alpha: T,
}

impl<T: Real> MomentSpec<T> {
    pub fn new(k: u32, n: u64, alpha: T) -> Result<Self> {
        if k == 0 {
            return Err(Error::InvalidParameter("neighbor rank k must be ≥ 1".into()));
        }
        if (k as u64) > n {
            return Err(Error::InvalidParameter(format!("k = {k} exceeds N = {n}")));
        }
        if !(alpha > T::zero()) {
            return Err(Error::InvalidParameter("moment order must be positive".into()));
        }
        Ok(Self { k, n, alpha })
    }

    pub fn first(k: u32, n: u64) -> Result<Self> {
        Self::new(k, n, T::one())
    }

    pub(crate) fn require_first_moment(&self) -> Result<()> {
        if self.alpha != T::one() {
            return Err(Error::Unsupported(
                "series formulas cover the first moment only; use quadrature for α ≠ 1".into(),
            ));
        }
        Ok(())
    }

    fn k_real(&self) -> T {
        T::from_u32(self.k).unwrap()
    }

    fn n_real(&self) -> T {
        T::of_u64(self.n)
    }
}

/// Result of summing a moment series.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SeriesMean<T> {
    pub value: T,
    pub terms: usize,
    /// Size of the last summed term relative to the total.
    pub residual: T,
    /// The truncated series had non-decreasing terms at its end, so the value
    /// may be far from the limit.
    pub tail_warning: bool,
}

/// `Γ(k+a)/Γ(k) · Γ(N+1)/Γ(N+1+a)` in log space.
fn ln_beta_moment<T: Real>(k: T, n: T, a: T) -> T {
    ln_gamma_ratio(k, a, T::zero()) + ln_gamma_ratio(n, T::one(), T::one() + a)
}

/// First moment from a truncated series for `A⁻¹`.
pub fn mean_from_series<T: Real>(s: &PowerSeries<T>, ms: &MomentSpec<T>) -> Result<SeriesMean<T>> {
    ms.require_first_moment()?;
    let k = ms.k_real();
    let n = ms.n_real();
    let mut acc = CompensatedSum::new();
    let mut last = T::zero();
    let mut prev = T::zero();
    for (j, &c) in s.coeffs.iter().enumerate() {
        if c == T::zero() {
            continue;
        }
        let a = T::of_usize(j) + s.gamma;
        let term = c * ln_beta_moment(k, n, a).exp();
        acc.add(term);
        prev = last;
        last = term;
    }
    let value = acc.value();
    let tail_warning = s.coeffs.len() > 1 && last.abs() >= prev.abs() && last != T::zero();
    Ok(SeriesMean {
        value,
        terms: s.coeffs.len(),
        residual: (last / value).abs(),
        tail_warning,
    })
}

/// Flat-space mean in `d` dimensions:
/// `[(d/2)!]^{1/d}/√π · Γ(k+1/d)/Γ(k) · Γ(N+1)/Γ(N+1+1/d)`.
pub fn flat_mean<T: Real>(dim: DimensionSpec, ms: &MomentSpec<T>) -> Result<T> {
    ms.require_first_moment()?;
    let series = PowerSeries::<T>::flat(dim);
    let g = series.gamma;
    Ok(series.coeffs[0] * ln_beta_moment(ms.k_real(), ms.n_real(), g).exp())
}

/// Geodesic unit-area sphere: the full arcsine series summed to convergence.
///
/// Terms are generated by their exact ratio; once the tail is in its
/// power-law regime `t_j ~ j^{-(N−k+5/2)}` the remainder is added
/// analytically.
pub fn sphere_mean_exact<T: Real>(ms: &MomentSpec<T>, max_terms: usize) -> Result<SeriesMean<T>> {
    ms.require_first_moment()?;
    let k = ms.k_real();
    let n = ms.n_real();
    let half = T::lit(0.5);
    let two = T::lit(2.0);
    let mut term = ln_beta_moment(k, n, half).exp() / T::PI().sqrt();
    let mut acc = CompensatedSum::new();
    let p = n - k + T::lit(2.5);
    let rel = T::lit(TRUNCATION_REL);
    for j in 0..max_terms {
        acc.add(term);
        let jj = T::of_usize(j);
        let odd = two * jj + T::one();
        let ratio =
            odd * odd / ((two * jj + T::lit(3.0)) * two * (jj + T::one())) * (k + jj + half) / (n + jj + T::lit(1.5));
        let next = term * ratio;
        if j > BURN_IN && next < rel * acc.value() {
            let jn = T::of_usize(j + 1);
            let tail = if jn > T::lit(10.0) * n {
                next * jn / (p - T::one())
            } else {
                next / (T::one() - ratio)
            };
            acc.add(next + tail);
            let value = acc.value();
            return Ok(SeriesMean {
                value,
                terms: j + 2,
                residual: next / value,
                tail_warning: false,
            });
        }
        term = next;
    }
    let value = acc.value();
    Err(Error::NotConverged {
        terms: max_terms,
        residual: (term / value).to_f64_lossy(),
    })
}

/// Multiplier turning `⟨D_k^α⟩` into the reduced variable:
/// `N^{αγ} Γ(k) / (c_0^α Γ(k+αγ))`.
pub fn reduced_normalizer<T: Real>(gamma: T, c0: T, k: u32, n: u64, alpha: T) -> T {
    let g = alpha * gamma;
    let kk = T::from_u32(k).unwrap();
    (g * T::of_u64(n).ln() - ln_gamma_ratio(kk, g, T::zero()) - alpha * c0.ln()).exp()
}

/// Large-N expansion of `⟨D̃_k(N)⟩` in powers of `1/N`.
#[derive(Debug, Clone, PartialEq)]
pub struct ReducedScalingSeries<F> {
    /// `None` for the bare Gamma-ratio expansion, which is k-independent.
    pub k: Option<u32>,
    pub gamma: F,
    /// Coefficients of `1, 1/N, 1/N², …`.
    pub coeffs: Vec<F>,
}

impl<F: Field> ReducedScalingSeries<F> {
    pub fn one_over_n(&self) -> F {
        self.coeffs.get(1).cloned().unwrap_or_else(F::zero)
    }
}

/// Highest `1/N` order supported by the expansions.
pub const MAX_REDUCED_ORDER: usize = 3;

/// `1/N` expansion of `N^γ Γ(N+1)/Γ(N+γ+1)`.
///
/// Uses `ln Γ(N+a) ~ (N+a−½)ln N − N + ½ln 2π + Σ (−1)^{n+1} B_{n+1}(a)/(n(n+1)N^n)`
/// at `a = 1` and `a = 1+γ`, then exponentiates the difference.
pub fn reduced_series<F: Field>(gamma: F, order: usize) -> Result<ReducedScalingSeries<F>> {
    check_order(order)?;
    Ok(ReducedScalingSeries {
        k: None,
        coeffs: gamma_ratio_expansion(&gamma, order),
        gamma,
    })
}

fn check_order(order: usize) -> Result<()> {
    if order > MAX_REDUCED_ORDER {
        return Err(Error::Unsupported(format!(
            "reduced expansion order {order} > {MAX_REDUCED_ORDER}"
        )));
    }
    Ok(())
}

fn gamma_ratio_expansion<F: Field>(gamma: &F, order: usize) -> Vec<F> {
    let b = bernoulli_numbers::<F>(order + 1);
    let one = F::one();
    let shifted = one.clone() + gamma.clone();
    let mut log = vec![F::zero(); order + 1];
    for (n, slot) in log.iter_mut().enumerate().skip(1) {
        let diff = bernoulli_polynomial(n + 1, &one, &b) - bernoulli_polynomial(n + 1, &shifted, &b);
        let v = diff / F::from_int((n * (n + 1)) as i64);
        *slot = if n % 2 == 1 { v } else { -v };
    }
    fps::exp(&log, order)
}

/// Combined expansion of `⟨D̃_k(N)⟩` for a full series
/// `A⁻¹ = w^γ Σ c_j w^j`:
///
/// ```text
/// ⟨D̃_k⟩ = Σ_j (c_j/c_0) (k+γ)_j N^{-j} · [N^{γ+j} Γ(N+1)/Γ(N+1+γ+j)]
/// ```
///
/// Coefficients missing from `s` are treated as zero, so the result is only
/// meaningful through order `min(order, J)` for a truncated series.
pub fn reduced_series_for<F: Field + PartialOrd>(
    s: &PowerSeries<F>,
    k: u32,
    order: usize,
) -> Result<ReducedScalingSeries<F>> {
    check_order(order)?;
    if k == 0 {
        return Err(Error::InvalidParameter("neighbor rank k must be ≥ 1".into()));
    }
    let c = s.normalized();
    let gamma = s.gamma().clone();
    let kg = F::from_int(k as i64) + gamma.clone();
    let mut total = vec![F::zero(); order + 1];
    let mut rising = F::one();
    for j in 0..=order.min(c.len() - 1) {
        if j > 0 {
            rising = rising * (kg.clone() + F::from_int(j as i64 - 1));
        }
        let weight = c[j].clone() * rising.clone();
        if weight.is_zero() {
            continue;
        }
        let g = gamma.clone() + F::from_int(j as i64);
        let e = gamma_ratio_expansion(&g, order - j);
        for (i, ei) in e.into_iter().enumerate() {
            total[i + j] = total[i + j].clone() + weight.clone() * ei;
        }
    }
    Ok(ReducedScalingSeries {
        k: Some(k),
        gamma,
        coeffs: total,
    })
}

/// Euler characteristic and genus of a closed orientable surface.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TopologyInfo {
    chi: i64,
    genus: u32,
}

impl TopologyInfo {
    pub fn from_genus(genus: u32) -> Self {
        Self {
            chi: 2 * (1 - genus as i64),
            genus,
        }
    }

    pub fn from_chi(chi: i64) -> Result<Self> {
        if chi > 2 || chi % 2 != 0 {
            return Err(Error::InvalidParameter(format!(
                "χ = {chi} is not the Euler characteristic of a closed orientable surface"
            )));
        }
        Ok(Self {
            chi,
            genus: (1 - chi / 2) as u32,
        })
    }

    pub fn chi(&self) -> i64 {
        self.chi
    }

    pub fn genus(&self) -> u32 {
        self.genus
    }
}

/// Surface-averaged `1/N` coefficient of `⟨D̃_k(N)⟩`: `(χ(2k+1) − 9)/24`.
pub fn subleading_coeff<F: Field>(k: u32, topo: TopologyInfo) -> F {
    F::from_ratio(topo.chi * (2 * k as i64 + 1) - 9, 24)
}

/// Leading terms of `A⁻¹` on a curved `d`-manifold with curvature scalar `K`:
/// returns `(γ, c_0, c_1)` for `A⁻¹ ≈ c_0 w^{1/d} [1 + c_1 w^{2/d}]`.
///
/// Only the leading correction is available in `d > 2`; it is a conjecture
/// beyond `d = 3`.
pub fn curved_inverse_leading<T: Real>(dim: DimensionSpec, curvature: T) -> (T, T, T) {
    let d = T::of_usize(dim.d() as usize);
    let c0 = ((ln_gamma(d / T::lit(2.0) + T::one()) - d / T::lit(2.0) * T::PI().ln()) / d).exp();
    let c1 = (d - T::one()) / (d + T::lit(2.0)) * curvature / T::lit(6.0) * c0 * c0;
    (d.recip(), c0, c1)
}
