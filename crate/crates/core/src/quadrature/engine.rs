//! `⟨D_k^α(N)⟩ = ∫₀¹ [A⁻¹(w)]^α w^{k−1}(1−w)^{N−k} dw / B(k, N−k+1)`.

use crate::error::{Error, Result};
use crate::manifold::{ball_volume, torus_disc_area, DimensionSpec, FlatnessThreshold};
use crate::scalar::Real;
use crate::series::{MomentSpec, PowerSeries};
use crate::special::{beta_reg_upper, ln_beta};

use super::gauss_kronrod::{integrate_with_breaks, QuadOptions, QuadResult};
use super::pchip::Pchip;

pub const DEFAULT_REL_TOL: f64 = 1e-12;

/// Inverse disc-area functions with a known closed form.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ClosedForm {
    /// `(w / V_d)^{1/d}`, the flat `d`-ball.
    FlatBall(DimensionSpec),
    /// `arcsin(√w)/√π`, the geodesic unit-area sphere.
    SphereArcsin,
    /// Exact inverse of the unit square torus disc area, including the
    /// clipped regime `w > π/4`.
    SquareTorus,
}

impl ClosedForm {
    pub fn from_name(name: &str) -> Result<Self> {
        match name {
            "flat" | "flat-2d" => Ok(Self::FlatBall(DimensionSpec::TWO)),
            "sphere-arcsin" | "sphere" => Ok(Self::SphereArcsin),
            "square-torus" | "torus" => Ok(Self::SquareTorus),
            other => match other.strip_prefix("flat-").and_then(|s| s.strip_suffix('d')) {
                Some(d) => {
                    let d = d
                        .parse()
                        .map_err(|_| Error::Parse(format!("bad dimension in {other:?}")))?;
                    Ok(Self::FlatBall(DimensionSpec::new(d)?))
                }
                None => Err(Error::Parse(format!("unknown closed form {other:?}"))),
            },
        }
    }

    fn eval<T: Real>(&self, w: T) -> T {
        match *self {
            ClosedForm::FlatBall(dim) => {
                let d = dim.d();
                (w / ball_volume::<T>(d, T::one())).powf(T::from_u32(d).unwrap().recip())
            }
            ClosedForm::SphereArcsin => w.sqrt().min(T::one()).asin() / T::PI().sqrt(),
            ClosedForm::SquareTorus => square_torus_inverse(w),
        }
    }
}

fn square_torus_inverse<T: Real>(w: T) -> T {
    if w <= T::FRAC_PI_4() {
        return (w / T::PI()).sqrt();
    }
    let (mut lo, mut hi) = (T::lit(0.5), T::FRAC_1_SQRT_2());
    if w >= T::one() {
        return hi;
    }
    let mut l = T::lit(0.5) * (lo + hi);
    for _ in 0..200 {
        let f = torus_disc_area(l) - w;
        if f > T::zero() {
            hi = l;
        } else {
            lo = l;
        }
        let slope = T::lit(2.0) * l * (T::PI() - T::lit(4.0) * (T::lit(0.5) / l).acos());
        let mut next = l - f / slope;
        if !(next > lo && next < hi) {
            next = T::lit(0.5) * (lo + hi);
        }
        if (next - l).abs() <= T::lit(4.0) * T::epsilon() * l {
            return next;
        }
        l = next;
    }
    l
}

#[derive(Debug, Clone, PartialEq)]
pub enum AreaInverseFn<T> {
    Series(PowerSeries<T>),
    Closed(ClosedForm),
    /// Shape-preserving interpolation of samples `(w_i, A⁻¹(w_i))`.
    Tabulated(Pchip<T>),
}

impl<T: Real> AreaInverseFn<T> {
    /// Builds a tabulated inverse; samples must start at `(0, 0)`, end at
    /// `w = 1` and be nondecreasing.
    pub fn tabulated(w: Vec<T>, l: Vec<T>) -> Result<Self> {
        if w.first() != Some(&T::zero()) || l.first() != Some(&T::zero()) {
            return Err(Error::InvalidParameter("table must start at A⁻¹(0) = 0".into()));
        }
        if w.last() != Some(&T::one()) {
            return Err(Error::InvalidParameter("table must end at w = 1".into()));
        }
        if l.windows(2).any(|p| p[1] < p[0]) {
            return Err(Error::InvalidParameter("tabulated A⁻¹ must be nondecreasing".into()));
        }
        Ok(Self::Tabulated(Pchip::new(w, l)?))
    }

    pub fn eval(&self, w: T) -> T {
        match self {
            AreaInverseFn::Series(s) => s.eval(w),
            AreaInverseFn::Closed(c) => c.eval(w),
            AreaInverseFn::Tabulated(p) => p.eval(w),
        }
    }
}

/// Quadrature for the Beta-weighted moment of `[A⁻¹]^α`.
///
/// The substitution `w = t/(t+m)`, `m = N−k+1`, turns the kernel into
/// `t^{k−1} (1+t/m)^{−m} (t+m)^{−k}`, whose bulk sits at `t = O(k)` for any
/// `N`. The range `t ≤ t_split` is integrated in `t`, the remainder of
/// `[0, 1]` directly in `w`.
pub fn moment_from_area_inverse<T: Real>(
    a: &AreaInverseFn<T>,
    ms: &MomentSpec<T>,
    rel_tol: T,
) -> Result<QuadResult<T>> {
    let k = T::from_u32(ms.k).unwrap();
    let n = T::of_u64(ms.n);
    let m = n - k + T::one();
    let alpha = ms.alpha;
    let ln_b = ln_beta(k, m);
    let km1 = k - T::one();
    let nmk = n - k;

    let in_t = |t: T| -> T {
        if t <= T::zero() {
            return T::zero();
        }
        let w = t / (t + m);
        let r = a.eval(w);
        if r <= T::zero() {
            return T::zero();
        }
        let mut ln = alpha * r.ln() - m * (t / m).ln_1p() - k * (t + m).ln() - ln_b;
        if km1 > T::zero() {
            ln += km1 * t.ln();
        }
        ln.exp()
    };
    let in_w = |w: T| -> T {
        let r = a.eval(w);
        if r <= T::zero() || w <= T::zero() {
            return T::zero();
        }
        let mut ln = alpha * r.ln() - ln_b;
        if km1 > T::zero() {
            ln += km1 * w.ln();
        }
        if nmk > T::zero() {
            if w >= T::one() {
                return T::zero();
            }
            ln += nmk * (-w).ln_1p();
        }
        ln.exp()
    };

    let t_split = k + T::lit(40.0) * k.sqrt() + T::lit(40.0);
    let mut breaks = vec![T::zero()];
    let mut s = k / T::lit(16.0);
    while s < t_split {
        breaks.push(s);
        s *= T::lit(2.0);
    }
    breaks.push(t_split);
    let opts = QuadOptions::rel(rel_tol).with_max_intervals(20_000);
    let bulk = integrate_with_breaks(in_t, &breaks, &opts)?;

    let w_split = t_split / (t_split + m);
    let tail_opts = QuadOptions::rel(rel_tol)
        .with_abs(T::lit(0.1) * rel_tol * bulk.value.abs())
        .with_max_intervals(20_000);
    let tail = integrate_with_breaks(in_w, &[w_split, T::one()], &tail_opts)?;
    Ok(QuadResult {
        value: bulk.value + tail.value,
        error: bulk.error + tail.error,
        evaluations: bulk.evaluations + tail.evaluations,
    })
}

/// Certificate for dropping everything beyond `w0`:
/// `A⁻¹(1)^α · I_{1−w0}(N−k+1, k)`, the largest possible `A⁻¹` times the
/// kernel mass above `w0`.
pub fn remainder_bound<T: Real>(a: &AreaInverseFn<T>, flat: &FlatnessThreshold<T>, ms: &MomentSpec<T>) -> T {
    if flat.w0 >= T::one() {
        return T::zero();
    }
    let k = T::from_u32(ms.k).unwrap();
    let m = T::of_u64(ms.n) - k + T::one();
    a.eval(T::one()).abs().powf(ms.alpha) * beta_reg_upper(flat.w0, k, m)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::series::{flat_mean, sphere_mean_exact, DEFAULT_MAX_TERMS};

    fn flat() -> AreaInverseFn<f64> {
        AreaInverseFn::Closed(ClosedForm::FlatBall(DimensionSpec::TWO))
    }

    #[test]
    fn flat_single_site() {
        let r = moment_from_area_inverse(&flat(), &MomentSpec::first(1, 1).unwrap(), 1e-13).unwrap();
        let want = 2.0 / (3.0 * std::f64::consts::PI.sqrt());
        assert!((r.value - want).abs() < 1e-13);
    }

    #[test]
    fn second_moment_is_beta_integral() {
        for n in [1u64, 7, 100, 10_000] {
            let ms = MomentSpec::new(1, n, 2.0).unwrap();
            let r = moment_from_area_inverse(&flat(), &ms, 1e-13).unwrap();
            let want = 1.0 / (std::f64::consts::PI * (n as f64 + 1.0));
            assert!((r.value / want - 1.0).abs() < 1e-12, "N={n}");
        }
    }

    #[test]
    fn sphere_matches_series_sum() {
        let ms = MomentSpec::<f64>::first(1, 50).unwrap();
        let r = moment_from_area_inverse(&AreaInverseFn::Closed(ClosedForm::SphereArcsin), &ms, 1e-13).unwrap();
        let s = sphere_mean_exact(&ms, DEFAULT_MAX_TERMS).unwrap();
        assert!((r.value - s.value).abs() < 1e-9);
    }

    #[test]
    fn large_n_flat() {
        for (k, n) in [(1u32, 100_000u64), (3, 1_000_000), (50, 200)] {
            let ms = MomentSpec::first(k, n).unwrap();
            let r = moment_from_area_inverse(&flat(), &ms, 1e-12).unwrap();
            let f = flat_mean(DimensionSpec::TWO, &ms).unwrap();
            assert!((r.value / f - 1.0).abs() < 1e-11, "k={k} N={n}");
        }
    }

    #[test]
    fn torus_inverse_round_trip() {
        for i in 1..100 {
            let w = i as f64 / 100.0;
            let l = square_torus_inverse(w);
            assert!((torus_disc_area(l) - w).abs() < 1e-14, "w={w}");
        }
        assert_eq!(square_torus_inverse(1.0), std::f64::consts::FRAC_1_SQRT_2);
    }

    #[test]
    fn remainder_bound_cases() {
        let torus = AreaInverseFn::Closed(ClosedForm::SquareTorus);
        let th = FlatnessThreshold::new(0.5, std::f64::consts::FRAC_PI_4).unwrap();
        let b = remainder_bound(&torus, &th, &MomentSpec::first(1, 100).unwrap());
        assert!(b > 0.0 && b < 1e-10);
        let chord = FlatnessThreshold::new(1.0, 1.0).unwrap();
        assert_eq!(
            remainder_bound(&torus, &chord, &MomentSpec::first(1, 100).unwrap()),
            0.0
        );
        let b1 = remainder_bound(&torus, &th, &MomentSpec::first(1, 1).unwrap());
        assert!(b1 > 0.1);
    }

    #[test]
    fn tabulated_validation() {
        assert!(AreaInverseFn::tabulated(vec![0.0, 0.5, 1.0], vec![0.0, 0.3, 0.2]).is_err());
        let t = AreaInverseFn::<f64>::tabulated(vec![0.0, 0.5, 1.0], vec![0.0, 0.3, 0.5]).unwrap();
        assert!((t.eval(0.5) - 0.3).abs() < 1e-15);
    }

    #[test]
    fn closed_form_names() {
        assert_eq!(
            ClosedForm::from_name("sphere-arcsin").unwrap(),
            ClosedForm::SphereArcsin
        );
        assert_eq!(
            ClosedForm::from_name("flat-3d").unwrap(),
            ClosedForm::FlatBall(DimensionSpec::new(3).unwrap())
        );
        assert!(ClosedForm::from_name("cone").is_err());
    }
}
