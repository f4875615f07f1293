//! Small fixed-size vector helpers on `[T; 3]`.

use crate::Real;

pub type Vec3<T> = [T; 3];

#[inline]
pub fn add<T: Real>(a: Vec3<T>, b: Vec3<T>) -> Vec3<T> {
    [a[0] + b[0], a[1] + b[1], a[2] + b[2]]
}

#[inline]
pub fn sub<T: Real>(a: Vec3<T>, b: Vec3<T>) -> Vec3<T> {
    [a[0] - b[0], a[1] - b[1], a[2] - b[2]]
}

#[inline]
pub fn scale<T: Real>(a: Vec3<T>, k: T) -> Vec3<T> {
    [a[0] * k, a[1] * k, a[2] * k]
}

#[inline]
pub fn dot<T: Real>(a: Vec3<T>, b: Vec3<T>) -> T {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

#[inline]
pub fn cross<T: Real>(a: Vec3<T>, b: Vec3<T>) -> Vec3<T> {
    [
        a[1] * b[2] - a[2] * b[1],
        a[2] * b[0] - a[0] * b[2],
        a[0] * b[1] - a[1] * b[0],
    ]
}

#[inline]
pub fn norm<T: Real>(a: Vec3<T>) -> T {
    dot(a, a).sqrt()
}

/// Returns `None` when the norm is below `eps`.
#[inline]
pub fn normalize<T: Real>(a: Vec3<T>, eps: T) -> Option<Vec3<T>> {
    let n = norm(a);
    if n <= eps || !n.is_finite() {
        None
    } else {
        Some(scale(a, T::one() / n))
    }
}

#[inline]
pub fn cast<T: Real, U: Real>(a: Vec3<T>) -> Vec3<U> {
    [U::of(a[0].as_f64()), U::of(a[1].as_f64()), U::of(a[2].as_f64())]
}
