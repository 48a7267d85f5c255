//! Small fixed-size complex matrix helpers.

use nalgebra::{Matrix2, Matrix4, Matrix4x2, SymmetricEigen, Vector4};
use num_complex::Complex64;

pub type C64 = Complex64;
pub type Mat2 = Matrix2<C64>;
pub type Mat4 = Matrix4<C64>;
pub type Frame = Matrix4x2<C64>;
pub type Vec4 = Vector4<C64>;

pub const I: C64 = C64::new(0.0, 1.0);

pub fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

/// `exp(-i H tau)` for Hermitian `H`, through its spectral decomposition.
pub fn expm_hermitian(h: &Mat4, tau: f64) -> Mat4 {
    let eig = SymmetricEigen::new(*h);
    let phases = eig
        .eigenvalues
        .map(|lambda| C64::from_polar(1.0, -lambda * tau));
    let v = eig.eigenvectors;
    v * Mat4::from_diagonal(&phases) * v.adjoint()
}

/// Largest entry modulus.
pub fn max_abs<R: nalgebra::Dim, K: nalgebra::Dim, S>(m: &nalgebra::Matrix<C64, R, K, S>) -> f64
where
    S: nalgebra::RawStorage<C64, R, K>,
{
    m.iter().fold(0.0_f64, |acc, z| acc.max(z.norm()))
}

/// `max |U^dagger U - 1|`.
pub fn unitarity_defect(u: &Mat4) -> f64 {
    max_abs(&(u.adjoint() * u - Mat4::identity()))
}

pub fn hermiticity_defect(h: &Mat4) -> f64 {
    max_abs(&(h - h.adjoint()))
}

/// Unitary polar factor of a 2x2 matrix together with its smallest singular value.
pub fn polar_unitary(m: &Mat2) -> (Mat2, f64) {
    let svd = m.svd(true, true);
    let u = svd.u.expect("svd u requested");
    let v_t = svd.v_t.expect("svd v_t requested");
    let smin = svd
        .singular_values
        .iter()
        .cloned()
        .fold(f64::INFINITY, f64::min);
    (u * v_t, smin)
}

/// Orthonormalize the two columns of a 4x2 frame (symmetric/Löwdin orthonormalization).
pub fn orthonormalize(frame: &Frame) -> Option<Frame> {
    let svd = frame.svd(true, true);
    let smin = svd
        .singular_values
        .iter()
        .cloned()
        .fold(f64::INFINITY, f64::min);
    if smin.is_nan() || smin <= 1e-8 {
        return None;
    }
    Some(svd.u? * svd.v_t?)
}

/// `exp(i phi sigma_y)` on (|a>, |b>) with `i sigma_y = |a><b| - |b><a|`.
pub fn exp_i_sigma_y(phi: f64) -> Mat2 {
    let (s, co) = phi.sin_cos();
    Mat2::new(c(co, 0.0), c(s, 0.0), c(-s, 0.0), c(co, 0.0))
}

/// Process overlap `|tr(A^dagger B)| / 2` of two 2x2 unitaries.
pub fn trace_overlap(a: &Mat2, b: &Mat2) -> f64 {
    (a.adjoint() * b).trace().norm() / 2.0
}
