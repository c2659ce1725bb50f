//! Small fixed-size helpers on top of nalgebra for qubit algebra.

use nalgebra::{Matrix2, Vector2};
use num_complex::Complex64;

pub type CMat2 = Matrix2<Complex64>;
pub type CVec2 = Vector2<Complex64>;

pub const ZERO: Complex64 = Complex64::new(0.0, 0.0);
pub const ONE: Complex64 = Complex64::new(1.0, 0.0);
pub const I: Complex64 = Complex64::new(0.0, 1.0);

#[inline]
pub fn c64(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

pub fn identity() -> CMat2 {
    CMat2::new(ONE, ZERO, ZERO, ONE)
}

pub fn sigma_x() -> CMat2 {
    CMat2::new(ZERO, ONE, ONE, ZERO)
}

pub fn sigma_y() -> CMat2 {
    CMat2::new(ZERO, -I, I, ZERO)
}

pub fn sigma_z() -> CMat2 {
    CMat2::new(ONE, ZERO, ZERO, -ONE)
}

/// `n . sigma` for a real 3-vector.
pub fn pauli_dot(n: [f64; 3]) -> CMat2 {
    CMat2::new(
        c64(n[2], 0.0),
        c64(n[0], -n[1]),
        c64(n[0], n[1]),
        c64(-n[2], 0.0),
    )
}

/// Largest absolute entry.
pub fn max_abs(m: &CMat2) -> f64 {
    m.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

/// Outer product `|a><b|`.
pub fn outer(a: &CVec2, b: &CVec2) -> CMat2 {
    a * b.adjoint()
}

/// Eigenvalues (ascending) of a Hermitian 2x2 matrix, read from its
/// Hermitian part.
pub fn hermitian_eigenvalues(m: &CMat2) -> [f64; 2] {
    let a = m[(0, 0)].re;
    let d = m[(1, 1)].re;
    let b = 0.5 * (m[(0, 1)] + m[(1, 0)].conj());
    let mean = 0.5 * (a + d);
    let rad = (0.25 * (a - d) * (a - d) + b.norm_sqr()).sqrt();
    [mean - rad, mean + rad]
}

/// Trace norm (sum of singular values) of a complex 2x2 matrix.
///
/// Uses `s1^2 + s2^2 = ||A||_F^2` and `s1 s2 = |det A|`.
pub fn trace_norm(m: &CMat2) -> f64 {
    let frob2: f64 = m.iter().map(|z| z.norm_sqr()).sum();
    let det = (m[(0, 0)] * m[(1, 1)] - m[(0, 1)] * m[(1, 0)]).norm();
    (frob2 + 2.0 * det).max(0.0).sqrt()
}

/// Square root of a real symmetric positive semidefinite 2x2 matrix,
/// `sqrt(A) = (A + sqrt(det A) I) / sqrt(tr A + 2 sqrt(det A))`.
pub fn sym_sqrt(a: [[f64; 2]; 2]) -> Option<[[f64; 2]; 2]> {
    let det = a[0][0] * a[1][1] - a[0][1] * a[1][0];
    if det < 0.0 {
        return None;
    }
    let sd = det.sqrt();
    let t = a[0][0] + a[1][1] + 2.0 * sd;
    if t <= 0.0 {
        return None;
    }
    let k = 1.0 / t.sqrt();
    Some([
        [(a[0][0] + sd) * k, a[0][1] * k],
        [a[1][0] * k, (a[1][1] + sd) * k],
    ])
}

/// Eigen-decomposition of a real symmetric 2x2 matrix: eigenvalues
/// (ascending) with unit eigenvectors.
pub fn sym_eigen(a: [[f64; 2]; 2]) -> ([f64; 2], [[f64; 2]; 2]) {
    let (p, q, r) = (a[0][0], a[0][1], a[1][1]);
    let mean = 0.5 * (p + r);
    let rad = (0.25 * (p - r) * (p - r) + q * q).sqrt();
    let vals = [mean - rad, mean + rad];
    let angle = 0.5 * (2.0 * q).atan2(p - r);
    let (s, c) = angle.sin_cos();
    // `angle` rotates onto the larger eigenvalue's eigenvector.
    ([vals[0], vals[1]], [[-s, c], [c, s]])
}

/// Inverse square root of a Hermitian positive definite 2x2 matrix.
pub fn hermitian_inv_sqrt(m: &CMat2) -> Option<CMat2> {
    let det = (m[(0, 0)] * m[(1, 1)] - m[(0, 1)] * m[(1, 0)]).re;
    let tr = (m[(0, 0)] + m[(1, 1)]).re;
    if !(det > 0.0) || !(tr > 0.0) {
        return None;
    }
    let sd = det.sqrt();
    let sqrt = (m + identity() * c64(sd, 0.0)) / c64((tr + 2.0 * sd).sqrt(), 0.0);
    sqrt.try_inverse()
}
