//! Tiny helpers for real 3-vectors stored as arrays.

pub(crate) type Vec3 = [f64; 3];

#[inline]
pub(crate) fn dot(u: &Vec3, v: &Vec3) -> f64 {
    u[0] * v[0] + u[1] * v[1] + u[2] * v[2]
}

#[inline]
pub(crate) fn norm(u: &Vec3) -> f64 {
    dot(u, u).sqrt()
}

#[inline]
pub(crate) fn scale(u: &Vec3, s: f64) -> Vec3 {
    [u[0] * s, u[1] * s, u[2] * s]
}

#[inline]
pub(crate) fn add(u: &Vec3, v: &Vec3) -> Vec3 {
    [u[0] + v[0], u[1] + v[1], u[2] + v[2]]
}

#[inline]
pub(crate) fn cross(u: &Vec3, v: &Vec3) -> Vec3 {
    [
        u[1] * v[2] - u[2] * v[1],
        u[2] * v[0] - u[0] * v[2],
        u[0] * v[1] - u[1] * v[0],
    ]
}

/// Two unit vectors completing `n` to a right-handed orthonormal frame.
pub(crate) fn orthonormal_frame(n: &Vec3) -> (Vec3, Vec3) {
    let helper = if n[0].abs() < 0.9 { [1.0, 0.0, 0.0] } else { [0.0, 1.0, 0.0] };
    let e1 = cross(&helper, n);
    let e1 = scale(&e1, 1.0 / norm(&e1));
    let e2 = cross(n, &e1);
    (e1, e2)
}
