//! Conformal charts `ds² = f(u,v)(du² + dv²)` and the built-in factors.

use crate::error::{Error, Result};
use crate::scalar::Real;

use super::jet::{Jet2, Smooth};

/// A conformal factor written once for both plain and differentiated
/// evaluation.
pub trait ConformalFactor<T: Real>: Send + Sync {
    fn eval<S: Smooth<T>>(&self, u: S, v: S) -> S;

    fn f(&self, u: T, v: T) -> T {
        self.eval(u, v)
    }

    /// `f` with its first and second partial derivatives.
    fn jet(&self, u: T, v: T) -> Jet2<T> {
        self.eval(Jet2::var_u(u), Jet2::var_v(v))
    }
}

/// Which pole a stereographic chart is centred on.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Pole {
    /// Chart origin at the south pole, `z = R(ρ²−1)/(ρ²+1)`.
    South,
    North,
}

impl Pole {
    fn sign<T: Real>(self) -> T {
        match self {
            Pole::South => T::one(),
            Pole::North => -T::one(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum BuiltinFactor<T> {
    Constant {
        c: T,
    },
    /// Round sphere of radius `radius`, optionally reweighted by
    /// `exp(2ε z/R)` and renormalized to keep the total area.
    Stereographic {
        radius: T,
        epsilon: T,
        pole: Pole,
    },
    /// Torus of revolution with radii `major > minor`, in isothermal
    /// coordinates `(φ, ψ)`, scaled to unit area.
    TorusRevolution {
        major: T,
        minor: T,
    },
    /// Upper half-plane model `1/v²` (curvature −1); not part of any closed
    /// surface.
    Hyperbolic,
}

impl<T: Real> BuiltinFactor<T> {
    /// Normalization of the perturbed sphere: `∫ e^{2εζ} dμ = sinh(2ε)/2ε`
    /// for `ζ` uniform on `[−1, 1]`.
    pub(crate) fn perturbation_norm(epsilon: T) -> T {
        if epsilon == T::zero() {
            T::one()
        } else {
            let x = epsilon + epsilon;
            x / x.sinh()
        }
    }

    /// Torus parameters `(κ, c, σ²)`: `tan(θ/2) = c·tan(κψ)` and the area
    /// scale `σ² = 1/(4π² R r)`.
    pub(crate) fn torus_params(major: T, minor: T) -> (T, T, T) {
        let kappa = (major * major - minor * minor).sqrt() / (minor + minor);
        let c = ((major + minor) / (major - minor)).sqrt();
        let sigma2 = (T::lit(4.0) * T::PI() * T::PI() * major * minor).recip();
        (kappa, c, sigma2)
    }

    /// `(cos θ, sin θ)` of the meridian angle at isothermal coordinate `ψ`.
    pub(crate) fn torus_angle<S: Smooth<T>>(major: T, minor: T, psi: S) -> (S, S) {
        let (kappa, c, _) = Self::torus_params(major, minor);
        let x = psi.scale(kappa);
        let (s, co) = (x.sin(), x.cos());
        let c2 = S::cst(c * c);
        let den = co * co + c2 * s * s;
        ((co * co - c2 * s * s) / den, (s * co).scale(c + c) / den)
    }

    /// Period of the isothermal meridian coordinate, `2πr/√(R²−r²)`.
    pub fn torus_period(major: T, minor: T) -> T {
        T::lit(2.0) * T::PI() * minor / (major * major - minor * minor).sqrt()
    }

    /// An upper bound for `f` on the whole coordinate plane (or the
    /// half-plane `v ≥ v_min` for the hyperbolic factor).
    pub fn sup_bound(&self) -> Option<T> {
        match *self {
            BuiltinFactor::Constant { c } => Some(c),
            BuiltinFactor::Stereographic { radius, epsilon, .. } => Some(
                T::lit(4.0) * radius * radius * (T::lit(2.0) * epsilon.abs()).exp() * Self::perturbation_norm(epsilon),
            ),
            BuiltinFactor::TorusRevolution { major, minor } => {
                let (_, _, s2) = Self::torus_params(major, minor);
                Some(s2 * (major + minor) * (major + minor))
            }
            BuiltinFactor::Hyperbolic => None,
        }
    }

    /// A positive lower bound for `f` on the whole chart, where one exists.
    pub fn inf_bound(&self) -> Option<T> {
        match *self {
            BuiltinFactor::Constant { c } => Some(c),
            BuiltinFactor::TorusRevolution { major, minor } => {
                let (_, _, s2) = Self::torus_params(major, minor);
                Some(s2 * (major - minor) * (major - minor))
            }
            BuiltinFactor::Stereographic { .. } | BuiltinFactor::Hyperbolic => None,
        }
    }
}

impl<T: Real> ConformalFactor<T> for BuiltinFactor<T> {
    fn eval<S: Smooth<T>>(&self, u: S, v: S) -> S {
        match *self {
            BuiltinFactor::Constant { c } => S::cst(c),
            BuiltinFactor::Stereographic { radius, epsilon, pole } => {
                let one = S::cst(T::one());
                let rho2 = u * u + v * v;
                let base = S::cst(T::lit(4.0) * radius * radius) / (one + rho2).powi(2);
                if epsilon == T::zero() {
                    base
                } else {
                    let zeta = ((rho2 - one) / (rho2 + one)).scale(pole.sign::<T>());
                    base * zeta
                        .scale(epsilon + epsilon)
                        .exp()
                        .scale(Self::perturbation_norm(epsilon))
                }
            }
            BuiltinFactor::TorusRevolution { major, minor } => {
                let (_, _, s2) = Self::torus_params(major, minor);
                let (cos_t, _) = Self::torus_angle(major, minor, v);
                (S::cst(major) + cos_t.scale(minor)).powi(2).scale(s2)
            }
            BuiltinFactor::Hyperbolic => (v * v).powi(-1),
        }
    }
}

/// Coordinate rectangle of a chart, optionally periodic in each direction.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChartDomain<T> {
    pub u: (T, T),
    pub v: (T, T),
    pub periodic_u: bool,
    pub periodic_v: bool,
}

impl<T: Real> ChartDomain<T> {
    pub fn new(u: (T, T), v: (T, T)) -> Result<Self> {
        if !(u.1 > u.0 && v.1 > v.0) {
            return Err(Error::InvalidParameter("empty chart domain".into()));
        }
        Ok(Self {
            u,
            v,
            periodic_u: false,
            periodic_v: false,
        })
    }

    pub fn periodic(mut self, u: bool, v: bool) -> Self {
        self.periodic_u = u;
        self.periodic_v = v;
        self
    }

    pub fn contains(&self, u: T, v: T) -> bool {
        (self.periodic_u || (u >= self.u.0 && u <= self.u.1)) && (self.periodic_v || (v >= self.v.0 && v <= self.v.1))
    }

    pub fn area(&self) -> T {
        (self.u.1 - self.u.0) * (self.v.1 - self.v.0)
    }

    /// Reduces periodic coordinates into the fundamental rectangle.
    pub fn wrap(&self, u: T, v: T) -> (T, T) {
        let w = |x: T, (a, b): (T, T), p: bool| {
            if !p {
                return x;
            }
            let len = b - a;
            let y = a + (x - a) - ((x - a) / len).floor() * len;
            if y >= b {
                a
            } else {
                y
            }
        };
        (w(u, self.u, self.periodic_u), w(v, self.v, self.periodic_v))
    }

    /// Displacement `b − a`, using the nearest periodic image.
    pub fn delta(&self, a: (T, T), b: (T, T)) -> (T, T) {
        let d = |x: T, (lo, hi): (T, T), p: bool| {
            if !p {
                return x;
            }
            let len = hi - lo;
            x - (x / len).round() * len
        };
        (
            d(b.0 - a.0, self.u, self.periodic_u),
            d(b.1 - a.1, self.v, self.periodic_v),
        )
    }

    /// Distance from `(u, v)` to the nearest non-periodic edge.
    pub fn margin(&self, u: T, v: T) -> T {
        let mut m = T::infinity();
        if !self.periodic_u {
            m = m.min(u - self.u.0).min(self.u.1 - u);
        }
        if !self.periodic_v {
            m = m.min(v - self.v.0).min(self.v.1 - v);
        }
        m
    }
}

/// Partition-of-unity weight of a chart.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ChartWeight<T> {
    One,
    /// `s(ln ρ)` with a smooth step `s` equal to 1 for `ln ρ ≤ −a` and 0 for
    /// `ln ρ ≥ a`; satisfies `s(t) + s(−t) = 1`, so two charts related by
    /// inversion sum to one.
    Radial {
        a: T,
    },
}

fn bump<T: Real>(x: T) -> T {
    if x > T::zero() {
        (-x.recip()).exp()
    } else {
        T::zero()
    }
}

impl<T: Real> ChartWeight<T> {
    pub fn eval(&self, u: T, v: T) -> T {
        match *self {
            ChartWeight::One => T::one(),
            ChartWeight::Radial { a } => {
                let r2 = u * u + v * v;
                if r2 == T::zero() {
                    return T::one();
                }
                let t = T::lit(0.5) * r2.ln();
                let p = bump(a - t);
                let q = bump(a + t);
                p / (p + q)
            }
        }
    }
}

/// One chart of a conformal atlas.
#[derive(Debug, Clone, PartialEq)]
pub struct ConformalPatch<T> {
    pub chart_id: usize,
    pub factor: BuiltinFactor<T>,
    pub domain: ChartDomain<T>,
    pub weight: ChartWeight<T>,
    /// Upper bound for `f` on the domain, used by the rejection sampler.
    pub sup_f: T,
}

/// Grid resolution for validating `sup_f`.
const SUP_GRID: usize = 201;

impl<T: Real> ConformalPatch<T> {
    /// Builds a patch, checking `f > 0` and `f ≤ sup_f` on a grid.
    pub fn new(
        chart_id: usize,
        factor: BuiltinFactor<T>,
        domain: ChartDomain<T>,
        weight: ChartWeight<T>,
        sup_f: T,
    ) -> Result<Self> {
        for i in 0..SUP_GRID {
            for j in 0..SUP_GRID {
                let s = T::of_usize(i) / T::of_usize(SUP_GRID - 1);
                let t = T::of_usize(j) / T::of_usize(SUP_GRID - 1);
                let u = domain.u.0 + s * (domain.u.1 - domain.u.0);
                let v = domain.v.0 + t * (domain.v.1 - domain.v.0);
                let f = factor.f(u, v);
                if !(f > T::zero()) {
                    return Err(Error::Domain(format!("conformal factor {f} ≤ 0 at ({u}, {v})")));
                }
                // analytic bounds can sit an ulp or two under the evaluated f
                if f > sup_f * (T::one() + T::lit(64.0) * T::epsilon()) {
                    return Err(Error::SupBoundViolated {
                        value: f.to_f64_lossy(),
                        bound: sup_f.to_f64_lossy(),
                        u: u.to_f64_lossy(),
                        v: v.to_f64_lossy(),
                    });
                }
            }
        }
        Ok(Self {
            chart_id,
            factor,
            domain,
            weight,
            sup_f,
        })
    }

    pub fn f(&self, u: T, v: T) -> T {
        self.factor.f(u, v)
    }

    /// Whether geodesics may be traced through `(u, v)`. Stereographic
    /// coordinates are valid on the whole plane, so tracing may leave the
    /// sampling rectangle; it stops short of the far pole.
    pub fn traceable(&self, u: T, v: T) -> bool {
        match self.factor {
            BuiltinFactor::Stereographic { .. } => u * u + v * v <= T::lit(TRACE_RADIUS * TRACE_RADIUS),
            _ => self.domain.contains(u, v),
        }
    }
}

/// Coordinate radius up to which stereographic geodesics are traced.
const TRACE_RADIUS: f64 = 40.0;

impl<T: Real> ConformalFactor<T> for ConformalPatch<T> {
    fn eval<S: Smooth<T>>(&self, u: S, v: S) -> S {
        self.factor.eval(u, v)
    }
}
