use crate::scalar::Real;

pub(crate) type V3<T> = [T; 3];

#[inline]
pub(crate) fn sub<T: Real>(a: &V3<T>, b: &V3<T>) -> V3<T> {
    [a[0] - b[0], a[1] - b[1], a[2] - b[2]]
}

#[inline]
pub(crate) fn add<T: Real>(a: &V3<T>, b: &V3<T>) -> V3<T> {
    [a[0] + b[0], a[1] + b[1], a[2] + b[2]]
}

#[inline]
pub(crate) fn scale<T: Real>(a: &V3<T>, s: T) -> V3<T> {
    [a[0] * s, a[1] * s, a[2] * s]
}

#[inline]
pub(crate) fn dot<T: Real>(a: &V3<T>, b: &V3<T>) -> T {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

#[inline]
pub(crate) fn cross<T: Real>(a: &V3<T>, b: &V3<T>) -> V3<T> {
    [
        a[1] * b[2] - a[2] * b[1],
        a[2] * b[0] - a[0] * b[2],
        a[0] * b[1] - a[1] * b[0],
    ]
}

#[inline]
pub(crate) fn norm<T: Real>(a: &V3<T>) -> T {
    dot(a, a).sqrt()
}

pub(crate) fn unit<T: Real>(a: &V3<T>) -> V3<T> {
    scale(a, norm(a).recip())
}

/// Newell's area vector of a planar polygon: direction is the normal for
/// counter-clockwise corners, length is twice the area.
pub(crate) fn newell<T: Real>(corners: &[V3<T>]) -> V3<T> {
    let mut n = [T::zero(); 3];
    for i in 0..corners.len() {
        let a = &corners[i];
        let b = &corners[(i + 1) % corners.len()];
        n = add(&n, &cross(a, b));
    }
    n
}

/// Rotation matrix by `psi` about the unit axis `u` (Rodrigues).
pub(crate) fn rotation<T: Real>(u: &V3<T>, psi: T) -> [[T; 3]; 3] {
    let (s, c) = psi.sin_cos();
    let t = T::one() - c;
    [
        [
            c + t * u[0] * u[0],
            t * u[0] * u[1] - s * u[2],
            t * u[0] * u[2] + s * u[1],
        ],
        [
            t * u[1] * u[0] + s * u[2],
            c + t * u[1] * u[1],
            t * u[1] * u[2] - s * u[0],
        ],
        [
            t * u[2] * u[0] - s * u[1],
            t * u[2] * u[1] + s * u[0],
            c + t * u[2] * u[2],
        ],
    ]
}

#[inline]
pub(crate) fn apply<T: Real>(m: &[[T; 3]; 3], x: &V3<T>) -> V3<T> {
    [dot(&m[0], x), dot(&m[1], x), dot(&m[2], x)]
}

pub(crate) fn matmul<T: Real>(a: &[[T; 3]; 3], b: &[[T; 3]; 3]) -> [[T; 3]; 3] {
    let mut out = [[T::zero(); 3]; 3];
    for (i, row) in out.iter_mut().enumerate() {
        for (j, o) in row.iter_mut().enumerate() {
            *o = a[i][0] * b[0][j] + a[i][1] * b[1][j] + a[i][2] * b[2][j];
        }
    }
    out
}
