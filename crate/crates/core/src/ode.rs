//! Adaptive Dormand–Prince 5(4) integration of fixed-size first-order systems.

use crate::error::{Error, Result};
use crate::scalar::Real;

#[derive(Debug, Clone, Copy)]
pub struct OdeOptions<T> {
    pub rel_tol: T,
    pub abs_tol: T,
    /// First trial step; `None` picks one from the initial derivative.
    pub initial_step: Option<T>,
    pub max_steps: usize,
}

impl<T: Real> Default for OdeOptions<T> {
    fn default() -> Self {
        Self {
            rel_tol: T::lit(1e-10),
            abs_tol: T::lit(1e-12),
            initial_step: None,
            max_steps: 200_000,
        }
    }
}

impl<T: Real> OdeOptions<T> {
    pub fn with_tol(rel_tol: T) -> Self {
        Self {
            rel_tol,
            abs_tol: rel_tol * T::lit(1e-2),
            ..Self::default()
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OdeOutcome<T, const N: usize> {
    pub t: T,
    pub y: [T; N],
    pub steps: usize,
    /// The observer asked to stop before `t_end`.
    pub stopped: bool,
}

const C: [f64; 7] = [0.0, 0.2, 0.3, 0.8, 8.0 / 9.0, 1.0, 1.0];
const A: [[f64; 6]; 7] = [
    [0.0; 6],
    [0.2, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [
        19372.0 / 6561.0,
        -25360.0 / 2187.0,
        64448.0 / 6561.0,
        -212.0 / 729.0,
        0.0,
        0.0,
    ],
    [
        9017.0 / 3168.0,
        -355.0 / 33.0,
        46732.0 / 5247.0,
        49.0 / 176.0,
        -5103.0 / 18656.0,
        0.0,
    ],
    [
        35.0 / 384.0,
        0.0,
        500.0 / 1113.0,
        125.0 / 192.0,
        -2187.0 / 6784.0,
        11.0 / 84.0,
    ],
];
/// Fifth-order weights minus the embedded fourth-order weights.
const E: [f64; 7] = [
    71.0 / 57600.0,
    0.0,
    -71.0 / 16695.0,
    71.0 / 1920.0,
    -17253.0 / 339200.0,
    22.0 / 525.0,
    -1.0 / 40.0,
];

/// Integrates `y' = f(t, y)` from `t0` to `t_end` (either direction).
///
/// `observer` sees every accepted step and may return `false` to stop early;
/// the step it rejects is still returned as the final state.
pub fn dopri5<T, const N: usize, F, O>(
    mut f: F,
    t0: T,
    y0: [T; N],
    t_end: T,
    opts: &OdeOptions<T>,
    mut observer: O,
) -> Result<OdeOutcome<T, N>>
where
    T: Real,
    F: FnMut(T, &[T; N]) -> [T; N],
    O: FnMut(T, &[T; N]) -> bool,
{
    let span = t_end - t0;
    if span == T::zero() {
        return Ok(OdeOutcome {
            t: t0,
            y: y0,
            steps: 0,
            stopped: false,
        });
    }
    let dir = span.signum();
    let mut t = t0;
    let mut y = y0;
    let mut k0 = f(t, &y);
    let mut h = match opts.initial_step {
        Some(h) => h.abs(),
        None => {
            let scale = norm(&k0, &y, opts);
            let guess = if scale > T::zero() {
                T::lit(0.01) / scale
            } else {
                span.abs()
            };
            guess.min(span.abs())
        }
    };
    let mut steps = 0usize;
    let mut ks = [[T::zero(); N]; 7];
    loop {
        if steps >= opts.max_steps {
            return Err(Error::NotConverged {
                terms: steps,
                residual: (t_end - t).abs().to_f64_lossy(),
            });
        }
        let remaining = (t_end - t).abs();
        let last = h >= remaining;
        let hs = if last { remaining } else { h };
        let hd = hs * dir;
        ks[0] = k0;
        for s in 1..7 {
            let mut ys = y;
            for (i, yi) in ys.iter_mut().enumerate() {
                let mut acc = T::zero();
                for (j, kj) in ks.iter().enumerate().take(s) {
                    if A[s][j] != 0.0 {
                        acc += T::lit(A[s][j]) * kj[i];
                    }
                }
                *yi += hd * acc;
            }
            ks[s] = f(t + T::lit(C[s]) * hd, &ys);
        }
        // stage 7 is evaluated at the fifth-order solution (FSAL)
        let mut y_new = y;
        for (i, yi) in y_new.iter_mut().enumerate() {
            let mut acc = T::zero();
            for (j, kj) in ks.iter().enumerate().take(6) {
                acc += T::lit(A[6][j]) * kj[i];
            }
            *yi += hd * acc;
        }
        let k_new = f(t + hd, &y_new);
        ks[6] = k_new;
        let mut err = T::zero();
        for i in 0..N {
            let mut e = T::zero();
            for (j, kj) in ks.iter().enumerate() {
                e += T::lit(E[j]) * kj[i];
            }
            let sc = opts.abs_tol + opts.rel_tol * y[i].abs().max(y_new[i].abs());
            let r = hd * e / sc;
            err += r * r;
        }
        let err = (err / T::of_usize(N)).sqrt();
        steps += 1;
        if err <= T::one() || hs <= T::epsilon() * t.abs().max(T::one()) * T::lit(16.0) {
            t = if last { t_end } else { t + hd };
            y = y_new;
            k0 = k_new;
            if !observer(t, &y) {
                return Ok(OdeOutcome {
                    t,
                    y,
                    steps,
                    stopped: true,
                });
            }
            if last {
                return Ok(OdeOutcome {
                    t,
                    y,
                    steps,
                    stopped: false,
                });
            }
        }
        let factor = if err == T::zero() {
            T::lit(5.0)
        } else {
            (T::lit(0.9) * err.powf(T::lit(-0.2))).max(T::lit(0.2)).min(T::lit(5.0))
        };
        h = hs * factor;
    }
}

fn norm<T: Real, const N: usize>(d: &[T; N], y: &[T; N], opts: &OdeOptions<T>) -> T {
    let mut s = T::zero();
    for i in 0..N {
        let sc = opts.abs_tol + opts.rel_tol * y[i].abs();
        let r = d[i] * opts.rel_tol / sc;
        s += r * r;
    }
    (s / T::of_usize(N)).sqrt()
}
