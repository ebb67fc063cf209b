//! Second-order forward differentiation in two variables.

use std::ops::{Add, Div, Mul, Neg, Sub};

use crate::scalar::Real;

/// Scalar operations needed to write a conformal factor once and evaluate it
/// either on plain numbers or on [`Jet2`].
pub trait Smooth<T: Real>:
    Copy + Add<Output = Self> + Sub<Output = Self> + Mul<Output = Self> + Div<Output = Self> + Neg<Output = Self>
{
    fn cst(x: T) -> Self;
    fn value(&self) -> T;
    fn exp(self) -> Self;
    fn ln(self) -> Self;
    fn sqrt(self) -> Self;
    fn sin(self) -> Self;
    fn cos(self) -> Self;
    fn powi(self, n: i32) -> Self;

    fn scale(self, c: T) -> Self {
        self * Self::cst(c)
    }
}

impl<T: Real> Smooth<T> for T {
    fn cst(x: T) -> Self {
        x
    }
    fn value(&self) -> T {
        *self
    }
    fn exp(self) -> Self {
        num_traits::Float::exp(self)
    }
    fn ln(self) -> Self {
        num_traits::Float::ln(self)
    }
    fn sqrt(self) -> Self {
        num_traits::Float::sqrt(self)
    }
    fn sin(self) -> Self {
        num_traits::Float::sin(self)
    }
    fn cos(self) -> Self {
        num_traits::Float::cos(self)
    }
    fn powi(self, n: i32) -> Self {
        num_traits::Float::powi(self, n)
    }
}

/// Value, gradient and Hessian of a function of `(u, v)`.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Jet2<T> {
    pub v: T,
    pub du: T,
    pub dv: T,
    pub duu: T,
    pub duv: T,
    pub dvv: T,
}

impl<T: Real> Jet2<T> {
    pub fn constant(v: T) -> Self {
        Self { v, ..Self::zero() }
    }

    fn zero() -> Self {
        Self {
            v: T::zero(),
            du: T::zero(),
            dv: T::zero(),
            duu: T::zero(),
            duv: T::zero(),
            dvv: T::zero(),
        }
    }

    /// The coordinate function `u` at `u`.
    pub fn var_u(u: T) -> Self {
        Self {
            v: u,
            du: T::one(),
            ..Self::zero()
        }
    }

    pub fn var_v(v: T) -> Self {
        Self {
            v,
            dv: T::one(),
            ..Self::zero()
        }
    }

    /// Applies a scalar function with derivatives `g(x), g'(x), g''(x)`.
    #[inline]
    fn chain(self, g: T, g1: T, g2: T) -> Self {
        Self {
            v: g,
            du: g1 * self.du,
            dv: g1 * self.dv,
            duu: g2 * self.du * self.du + g1 * self.duu,
            duv: g2 * self.du * self.dv + g1 * self.duv,
            dvv: g2 * self.dv * self.dv + g1 * self.dvv,
        }
    }

    pub fn recip(self) -> Self {
        let r = self.v.recip();
        self.chain(r, -r * r, T::lit(2.0) * r * r * r)
    }
}

impl<T: Real> Add for Jet2<T> {
    type Output = Self;
    fn add(self, o: Self) -> Self {
        Self {
            v: self.v + o.v,
            du: self.du + o.du,
            dv: self.dv + o.dv,
            duu: self.duu + o.duu,
            duv: self.duv + o.duv,
            dvv: self.dvv + o.dvv,
        }
    }
}

impl<T: Real> Sub for Jet2<T> {
    type Output = Self;
    fn sub(self, o: Self) -> Self {
        self + (-o)
    }
}

impl<T: Real> Neg for Jet2<T> {
    type Output = Self;
    fn neg(self) -> Self {
        Self {
            v: -self.v,
            du: -self.du,
            dv: -self.dv,
            duu: -self.duu,
            duv: -self.duv,
            dvv: -self.dvv,
        }
    }
}

impl<T: Real> Mul for Jet2<T> {
    type Output = Self;
    fn mul(self, o: Self) -> Self {
        Self {
            v: self.v * o.v,
            du: self.du * o.v + self.v * o.du,
            dv: self.dv * o.v + self.v * o.dv,
            duu: self.duu * o.v + T::lit(2.0) * self.du * o.du + self.v * o.duu,
            duv: self.duv * o.v + self.du * o.dv + self.dv * o.du + self.v * o.duv,
            dvv: self.dvv * o.v + T::lit(2.0) * self.dv * o.dv + self.v * o.dvv,
        }
    }
}

impl<T: Real> Div for Jet2<T> {
    type Output = Self;
    #[allow(clippy::suspicious_arithmetic_impl)]
    fn div(self, o: Self) -> Self {
        self * o.recip()
    }
}

impl<T: Real> Smooth<T> for Jet2<T> {
    fn cst(x: T) -> Self {
        Self::constant(x)
    }
    fn value(&self) -> T {
        self.v
    }
    fn exp(self) -> Self {
        let e = self.v.exp();
        self.chain(e, e, e)
    }
    fn ln(self) -> Self {
        let r = self.v.recip();
        self.chain(self.v.ln(), r, -r * r)
    }
    fn sqrt(self) -> Self {
        let s = self.v.sqrt();
        let d1 = T::lit(0.5) / s;
        self.chain(s, d1, -d1 / (T::lit(2.0) * self.v))
    }
    fn sin(self) -> Self {
        let (s, c) = self.v.sin_cos();
        self.chain(s, c, -s)
    }
    fn cos(self) -> Self {
        let (s, c) = self.v.sin_cos();
        self.chain(c, -s, -c)
    }
    fn powi(self, n: i32) -> Self {
        match n {
            0 => Self::constant(T::one()),
            1 => self,
            2 => self * self,
            _ => {
                let nf = T::from_i32(n).unwrap();
                let p2 = self.v.powi(n - 2);
                let p1 = p2 * self.v;
                self.chain(p1 * self.v, nf * p1, nf * (nf - T::one()) * p2)
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample<S: Smooth<f64>>(u: S, v: S) -> S {
        (u * v).sin() * (u - v).exp() / (S::cst(1.0) + u * u + v * v).powi(2) + (u * u + S::cst(2.0)).sqrt().ln()
    }

    #[test]
    fn matches_finite_differences() {
        let (u, v) = (0.3, -0.7);
        let j = sample(Jet2::var_u(u), Jet2::var_v(v));
        let f = |a: f64, b: f64| sample(a, b);
        let h = 1e-4;
        let fu = (f(u + h, v) - f(u - h, v)) / (2.0 * h);
        let fv = (f(u, v + h) - f(u, v - h)) / (2.0 * h);
        let fuu = (f(u + h, v) - 2.0 * f(u, v) + f(u - h, v)) / (h * h);
        let fvv = (f(u, v + h) - 2.0 * f(u, v) + f(u, v - h)) / (h * h);
        let fuv = (f(u + h, v + h) - f(u + h, v - h) - f(u - h, v + h) + f(u - h, v - h)) / (4.0 * h * h);
        assert!((j.v - f(u, v)).abs() < 1e-15);
        for (a, b) in [(j.du, fu), (j.dv, fv), (j.duu, fuu), (j.duv, fuv), (j.dvv, fvv)] {
            assert!((a - b).abs() < 1e-6 * b.abs().max(1.0), "{a} vs {b}");
        }
    }
}
