//! Truncated formal power series over a [`Field`].
//!
//! Series are plain coefficient vectors, `s[j]` multiplying `x^j`.

use crate::scalar::Field;

/// Product truncated to `n + 1` coefficients.
pub fn mul<F: Field>(a: &[F], b: &[F], n: usize) -> Vec<F> {
    let mut out = vec![F::zero(); n + 1];
    for (i, ai) in a.iter().enumerate().take(n + 1) {
        if ai.is_zero() {
            continue;
        }
        for (j, bj) in b.iter().enumerate().take(n + 1 - i) {
            out[i + j] = out[i + j].clone() + ai.clone() * bj.clone();
        }
    }
    out
}

fn coeff<F: Field>(a: &[F], i: usize) -> F {
    a.get(i).cloned().unwrap_or_else(F::zero)
}

/// `a(x)^p` for a series with `a[0] = 1` and any field exponent `p`.
pub fn pow<F: Field>(a: &[F], p: &F, n: usize) -> Vec<F> {
    assert!(!a.is_empty() && a[0] == F::one(), "pow needs a unit constant term");
    let mut g = Vec::with_capacity(n + 1);
    g.push(F::one());
    let p1 = p.clone() + F::one();
    for m in 1..=n {
        // m g_m = Σ_{k=1}^{m} (k(p+1) − m) a_k g_{m−k}
        let mut acc = F::zero();
        for k in 1..=m {
            let ak = coeff(a, k);
            if ak.is_zero() {
                continue;
            }
            let w = F::from_int(k as i64) * p1.clone() - F::from_int(m as i64);
            acc = acc + w * ak * g[m - k].clone();
        }
        g.push(acc / F::from_int(m as i64));
    }
    g
}

/// `exp(l(x))` for a series with `l[0] = 0`.
pub fn exp<F: Field>(l: &[F], n: usize) -> Vec<F> {
    assert!(l.is_empty() || l[0].is_zero(), "exp needs a zero constant term");
    let mut e = Vec::with_capacity(n + 1);
    e.push(F::one());
    for m in 1..=n {
        let mut acc = F::zero();
        for j in 1..=m {
            let lj = coeff(l, j);
            if lj.is_zero() {
                continue;
            }
            acc = acc + F::from_int(j as i64) * lj * e[m - j].clone();
        }
        e.push(acc / F::from_int(m as i64));
    }
    e
}

/// `a(b(x))` for `b[0] = 0`.
pub fn compose<F: Field>(a: &[F], b: &[F], n: usize) -> Vec<F> {
    assert!(b.is_empty() || b[0].is_zero(), "inner series must vanish at 0");
    let mut out = vec![F::zero(); n + 1];
    let mut power = vec![F::zero(); n + 1];
    power[0] = F::one();
    for (i, ai) in a.iter().enumerate().take(n + 1) {
        if i > 0 {
            power = mul(&power, b, n);
        }
        if ai.is_zero() {
            continue;
        }
        for (o, pk) in out.iter_mut().zip(power.iter()) {
            *o = o.clone() + ai.clone() * pk.clone();
        }
    }
    out
}

/// Lagrange inversion.
///
/// Given `y = x·g(x)` with `g[0] = 1`, returns `h` with `x = y·h(y)`,
/// truncated to `h[0..=n]`. Uses `[y^{j+1}] x = [x^j] g(x)^{−(j+1)} / (j+1)`.
pub fn revert<F: Field>(g: &[F], n: usize) -> Vec<F> {
    let mut h = Vec::with_capacity(n + 1);
    for j in 0..=n {
        let e = -F::from_int(j as i64 + 1);
        let gp = pow(g, &e, j);
        h.push(gp[j].clone() / F::from_int(j as i64 + 1));
    }
    h
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_rational::BigRational;

    fn q(n: i64, d: i64) -> BigRational {
        BigRational::from_ratio(n, d)
    }

    #[test]
    fn pow_half_of_square_is_identity() {
        // (1 + x)^2 = 1 + 2x + x²; its square root is 1 + x exactly
        let a = vec![q(1, 1), q(2, 1), q(1, 1)];
        let r = pow(&a, &q(1, 2), 5);
        assert_eq!(r, vec![q(1, 1), q(1, 1), q(0, 1), q(0, 1), q(0, 1), q(0, 1)]);
    }

    #[test]
    fn exp_of_x_is_factorials() {
        let l = vec![q(0, 1), q(1, 1)];
        let e = exp(&l, 5);
        assert_eq!(e[5], q(1, 120));
    }

    #[test]
    fn reversion_of_x_over_one_plus_x() {
        // y = x/(1+x) ⇒ x = y/(1−y): h = 1 + y + y² + …
        let g = vec![q(1, 1), q(-1, 1), q(1, 1), q(-1, 1), q(1, 1), q(-1, 1)];
        let h = revert(&g, 5);
        assert!(h.iter().all(|c| *c == q(1, 1)));
    }

    #[test]
    fn reversion_round_trips() {
        let g = vec![q(1, 1), q(-1, 3), q(2, 45), q(-1, 315)];
        let n = 3;
        let h = revert(&g, n);
        // y(x) = x g(x), x(y) = y h(y); compose y∘x must be the identity
        let mut y_of_x = vec![q(0, 1)];
        y_of_x.extend(g.iter().cloned());
        let mut x_of_y = vec![q(0, 1)];
        x_of_y.extend(h.iter().cloned());
        let id = compose(&y_of_x, &x_of_y, n + 1);
        assert_eq!(id[1], q(1, 1));
        for c in &id[2..] {
            assert_eq!(*c, q(0, 1));
        }
    }
}
