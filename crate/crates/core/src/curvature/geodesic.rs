//! Geodesics of `f(du² + dv²)`, their Jacobi fields, and numeric disc areas.

use crate::error::{Error, Result};
use crate::ode::{dopri5, OdeOptions};
use crate::scalar::Real;

use super::patch::{ConformalFactor, ConformalPatch};

/// Position and unit-speed velocity along a geodesic.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GeodesicState<T> {
    pub s: T,
    pub u: T,
    pub v: T,
    pub du_ds: T,
    pub dv_ds: T,
}

impl<T: Real> GeodesicState<T> {
    /// Unit-speed start at `(u, v)` heading at coordinate angle `theta`.
    pub fn from_direction<P: ConformalFactor<T> + ?Sized>(p: &P, u: T, v: T, theta: T) -> Self {
        let r = p.f(u, v).sqrt().recip();
        Self {
            s: T::zero(),
            u,
            v,
            du_ds: r * theta.cos(),
            dv_ds: r * theta.sin(),
        }
    }

    /// `f·(u'² + v'²) − 1`.
    pub fn speed_defect<P: ConformalFactor<T> + ?Sized>(&self, p: &P) -> T {
        p.f(self.u, self.v) * (self.du_ds * self.du_ds + self.dv_ds * self.dv_ds) - T::one()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GeodesicPath<T> {
    /// Accepted integrator states, starting with the initial one.
    pub states: Vec<GeodesicState<T>>,
    /// The path left the chart domain and was truncated there.
    pub exited: bool,
    /// Largest `|f(u'² + v'²) − 1|` seen.
    pub max_speed_defect: T,
}

impl<T: Real> GeodesicPath<T> {
    pub fn end(&self) -> &GeodesicState<T> {
        self.states.last().expect("path has a start")
    }
}

/// Geodesic equations. The `v` equation is the `u ↔ v` image of the `u`
/// equation:
///
/// ```text
/// u'' = −(f_u/2f)(u'² − v'²) − (f_v/f) u'v'
/// v'' = −(f_v/2f)(v'² − u'²) − (f_u/f) u'v'
/// ```
#[inline]
fn accel<T: Real>(a: T, b: T, p: T, q: T) -> (T, T) {
    let two = T::lit(2.0);
    (
        -a * (p * p - q * q) - two * b * p * q,
        -b * (q * q - p * p) - two * a * p * q,
    )
}

fn rhs4<T: Real, P: ConformalFactor<T> + ?Sized>(patch: &P, y: &[T; 4]) -> [T; 4] {
    let j = patch.jet(y[0], y[1]);
    let inv = (j.v + j.v).recip();
    let (ap, aq) = accel(j.du * inv, j.dv * inv, y[2], y[3]);
    [y[2], y[3], ap, aq]
}

/// Geodesic plus the Jacobi field `∂/∂θ` of the geodesic family and the
/// accumulated area `∫ f J ds`, `J = u'·∂_θv − v'·∂_θu`.
fn rhs9<T: Real, P: ConformalFactor<T> + ?Sized>(patch: &P, y: &[T; 9]) -> [T; 9] {
    let j = patch.jet(y[0], y[1]);
    let (p, q) = (y[2], y[3]);
    let (du, dv, dp, dq) = (y[4], y[5], y[6], y[7]);
    let two = T::lit(2.0);
    let inv = (j.v + j.v).recip();
    let a = j.du * inv;
    let b = j.dv * inv;
    let inv2 = inv / j.v;
    // a = f_u/2f, b = f_v/2f and their partials
    let a_u = (j.duu * j.v - j.du * j.du) * inv2;
    let a_v = (j.duv * j.v - j.du * j.dv) * inv2;
    let b_u = a_v;
    let b_v = (j.dvv * j.v - j.dv * j.dv) * inv2;
    let da = a_u * du + a_v * dv;
    let db = b_u * du + b_v * dv;
    let (ap, aq) = accel(a, b, p, q);
    let pq = p * q;
    let d_pq = dp * q + p * dq;
    let d_p2q2 = two * (p * dp - q * dq);
    let ddp = -da * (p * p - q * q) - a * d_p2q2 - two * (db * pq + b * d_pq);
    let ddq = db * (p * p - q * q) + b * d_p2q2 - two * (da * pq + a * d_pq);
    let jac = p * dv - q * du;
    [p, q, ap, aq, dp, dq, ddp, ddq, j.v * jac]
}

/// Integrates a unit-speed geodesic for arc length `s_max`.
///
/// Stops early, with `exited` set, when a non-periodic chart edge is crossed.
pub fn geodesic_trace<T: Real>(
    patch: &ConformalPatch<T>,
    start: GeodesicState<T>,
    s_max: T,
    tol: T,
) -> Result<GeodesicPath<T>> {
    if start.speed_defect(patch).abs() > T::lit(1e-9) {
        return Err(Error::InvalidParameter("geodesic start is not unit speed".into()));
    }
    let opts = OdeOptions::with_tol(tol * T::lit(1e-2));
    let mut states = vec![start];
    let mut exited = false;
    let mut worst = start.speed_defect(patch).abs();
    let y0 = [start.u, start.v, start.du_ds, start.dv_ds];
    dopri5(
        |_, y| rhs4(patch, y),
        start.s,
        y0,
        start.s + s_max,
        &opts,
        |s, y| {
            let st = GeodesicState {
                s,
                u: y[0],
                v: y[1],
                du_ds: y[2],
                dv_ds: y[3],
            };
            worst = worst.max(st.speed_defect(patch).abs());
            states.push(st);
            if !patch.domain.contains(y[0], y[1]) {
                exited = true;
                return false;
            }
            true
        },
    )?;
    Ok(GeodesicPath {
        states,
        exited,
        max_speed_defect: worst,
    })
}

/// Integrates geodesic, Jacobi field and area integrand out to `s`.
fn trace_family<T: Real>(patch: &ConformalPatch<T>, u: T, v: T, theta: T, s: T, ode_tol: T) -> Result<[T; 9]> {
    let r = patch.f(u, v).sqrt().recip();
    let (sn, cs) = theta.sin_cos();
    let y0 = [u, v, r * cs, r * sn, T::zero(), T::zero(), -r * sn, r * cs, T::zero()];
    let mut fault: Option<Error> = None;
    let out = dopri5(
        |_, y| rhs9(patch, y),
        T::zero(),
        y0,
        s,
        &OdeOptions::with_tol(ode_tol),
        |t, y| {
            if !patch.traceable(y[0], y[1]) {
                fault = Some(Error::LeftDomain { s: t.to_f64_lossy() });
                return false;
            }
            if y[2] * y[5] - y[3] * y[4] <= T::zero() {
                fault = Some(Error::ConjugatePoint {
                    s: t.to_f64_lossy(),
                    radius: s.to_f64_lossy(),
                });
                return false;
            }
            true
        },
    )?;
    match fault {
        Some(e) => Err(e),
        None => Ok(out.y),
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DiscAreaOptions<T> {
    pub ode_rel_tol: T,
    /// Convergence target for the angular trapezoid rule.
    pub rel_tol: T,
    pub max_directions: usize,
}

impl<T: Real> Default for DiscAreaOptions<T> {
    fn default() -> Self {
        Self {
            ode_rel_tol: T::lit(1e-12),
            rel_tol: T::lit(1e-11),
            max_directions: 4096,
        }
    }
}

/// Area of the geodesic disc of radius `l` about `(u, v)` in geodesic polar
/// coordinates, `∫₀^{2π} dθ ∫₀^l f J ds`.
///
/// The shooting direction is parametrized by the coordinate angle `θ` of the
/// initial velocity. Relative to parametrizing by `u₀′ ∈ [−1/√f, 1/√f]`, the
/// half `θ ∈ (0, π)` is the branch `v₀′ > 0` and `θ ∈ (π, 2π)` the branch
/// `v₀′ < 0`; both are summed, each exactly once. The periodic integrand
/// makes the trapezoid rule spectrally accurate, so the direction count is
/// doubled until successive sums agree.
pub fn disc_area_numeric<T: Real>(
    patch: &ConformalPatch<T>,
    center: (T, T),
    l: T,
    opts: &DiscAreaOptions<T>,
) -> Result<T> {
    if l < T::zero() {
        return Err(Error::Domain(format!("disc radius {l} is negative")));
    }
    if l == T::zero() {
        return Ok(T::zero());
    }
    let tau = T::lit(2.0) * T::PI();
    let ray = |theta: T| -> Result<T> { Ok(trace_family(patch, center.0, center.1, theta, l, opts.ode_rel_tol)?[8]) };
    let mut m = 8usize;
    let mut sum = T::zero();
    for i in 0..m {
        sum += ray(tau * T::of_usize(i) / T::of_usize(m))?;
    }
    let mut prev = sum * tau / T::of_usize(m);
    while m < opts.max_directions {
        for i in 0..m {
            let theta = tau * (T::of_usize(2 * i + 1)) / T::of_usize(2 * m);
            sum += ray(theta)?;
        }
        m *= 2;
        let est = sum * tau / T::of_usize(m);
        if m >= 16 && (est - prev).abs() <= opts.rel_tol * est.abs() {
            return Ok(est);
        }
        prev = est;
    }
    Err(Error::NotConverged {
        terms: m,
        residual: prev.to_f64_lossy(),
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ShootingOptions<T> {
    pub ode_rel_tol: T,
    /// Target for the coordinate miss distance, relative to chart scale.
    pub tol: T,
    pub max_iter: usize,
}

impl<T: Real> Default for ShootingOptions<T> {
    fn default() -> Self {
        Self {
            ode_rel_tol: T::lit(1e-12),
            tol: T::lit(1e-11),
            max_iter: 40,
        }
    }
}

/// Geodesic distance between two chart points by Newton shooting on
/// `(length, angle)`.
///
/// Each shot starts from the straight chart segment with the metric at its
/// midpoint, so it finds the short geodesic when the points are well inside
/// the injectivity radius. On periodic charts the neighbouring images of `b`
/// are tried as well, skipping those that a lower bound on `f` already rules
/// out. Geodesics that pass a conjugate point are not minimizing and are
/// discarded.
pub fn geodesic_distance<T: Real>(
    patch: &ConformalPatch<T>,
    a: (T, T),
    b: (T, T),
    opts: &ShootingOptions<T>,
) -> Result<T> {
    let (dx, dy) = patch.domain.delta(a, b);
    if dx == T::zero() && dy == T::zero() {
        return Ok(T::zero());
    }
    let shifts = |periodic: bool, (lo, hi): (T, T)| -> Vec<T> {
        if periodic {
            vec![T::zero(), lo - hi, hi - lo]
        } else {
            vec![T::zero()]
        }
    };
    let mut images = Vec::new();
    for su in shifts(patch.domain.periodic_u, patch.domain.u) {
        for sv in shifts(patch.domain.periodic_v, patch.domain.v) {
            images.push((dx + su, dy + sv));
        }
    }
    let inf_f = patch.factor.inf_bound();
    let mut best: Option<T> = None;
    let mut first_err = None;
    for (i, &(ex, ey)) in images.iter().enumerate() {
        let gap = (ex * ex + ey * ey).sqrt();
        if let (Some(lo), Some(d)) = (inf_f, best) {
            if lo.sqrt() * gap >= d {
                continue;
            }
        }
        match shoot(patch, a, (ex, ey), opts) {
            Ok(d) => best = Some(best.map_or(d, |b| b.min(d))),
            // a failing far image does not matter once the near one is known
            Err(e) if i == 0 || best.is_none() => first_err = first_err.or(Some(e)),
            Err(_) => {}
        }
    }
    best.ok_or_else(|| first_err.expect("at least one image is shot"))
}

fn shoot<T: Real>(patch: &ConformalPatch<T>, a: (T, T), (dx, dy): (T, T), opts: &ShootingOptions<T>) -> Result<T> {
    let gap = (dx * dx + dy * dy).sqrt();
    let target = (a.0 + dx, a.1 + dy);
    let fm = patch.f(a.0 + dx / T::lit(2.0), a.1 + dy / T::lit(2.0));
    let mut s = fm.sqrt() * gap;
    let mut theta = dy.atan2(dx);
    let mut miss = T::infinity();
    for _ in 0..opts.max_iter {
        let y = trace_unbounded(patch, a, theta, s, opts.ode_rel_tol, false)?;
        let (ru, rv) = (y[0] - target.0, y[1] - target.1);
        miss = (ru * ru + rv * rv).sqrt();
        // ∂(u,v)/∂s = (p, q), ∂(u,v)/∂θ = (δu, δv)
        let (a11, a21, a12, a22) = (y[2], y[3], y[4], y[5]);
        let det = a11 * a22 - a12 * a21;
        if det == T::zero() {
            break;
        }
        let ds = (a22 * ru - a12 * rv) / det;
        let dth = (-a21 * ru + a11 * rv) / det;
        // damp steps that would more than halve or double the length
        let lim = s / T::lit(2.0);
        let scale = if ds.abs() > lim { lim / ds.abs() } else { T::one() };
        s -= ds * scale;
        theta -= dth * scale;
        if miss <= opts.tol * gap.max(T::lit(1e-3)) && scale == T::one() {
            let y = trace_unbounded(patch, a, theta, s, opts.ode_rel_tol, true)?;
            let m2 = ((y[0] - target.0).powi(2) + (y[1] - target.1).powi(2)).sqrt();
            if m2 <= miss {
                return Ok(s);
            }
        }
    }
    Err(Error::ShootingFailed {
        residual: miss.to_f64_lossy(),
    })
}

/// Like `trace_family`, but conjugate points only fail the trace when
/// `conjugate` is set (Newton iterates may overshoot temporarily).
fn trace_unbounded<T: Real>(
    patch: &ConformalPatch<T>,
    a: (T, T),
    theta: T,
    s: T,
    ode_tol: T,
    conjugate: bool,
) -> Result<[T; 9]> {
    let r = patch.f(a.0, a.1).sqrt().recip();
    let (sn, cs) = theta.sin_cos();
    let y0 = [
        a.0,
        a.1,
        r * cs,
        r * sn,
        T::zero(),
        T::zero(),
        -r * sn,
        r * cs,
        T::zero(),
    ];
    let mut fault = None;
    let out = dopri5(
        |_, y| rhs9(patch, y),
        T::zero(),
        y0,
        s,
        &OdeOptions::with_tol(ode_tol),
        |t, y| {
            if !patch.traceable(y[0], y[1]) {
                fault = Some(Error::LeftDomain { s: t.to_f64_lossy() });
                return false;
            }
            if conjugate && t > T::zero() && y[2] * y[5] - y[3] * y[4] <= T::zero() {
                fault = Some(Error::ConjugatePoint {
                    s: t.to_f64_lossy(),
                    radius: s.to_f64_lossy(),
                });
                return false;
            }
            true
        },
    )?;
    match fault {
        Some(e) => Err(e),
        None => Ok(out.y),
    }
}
