//! Small dense complex/real matrix helpers on top of `nalgebra`.

use nalgebra::{ComplexField, DMatrix, DVector};

use crate::scalar::{cplx, creal, Cplx, Real};

pub type CMat<T> = DMatrix<Cplx<T>>;
pub type RMat<T> = DMatrix<T>;
pub type RVec<T> = DVector<T>;
pub type CVec<T> = DVector<Cplx<T>>;

pub fn identity<T: Real>(n: usize) -> CMat<T> {
    CMat::identity(n, n)
}

/// The Pauli matrices σ₁, σ₂, σ₃.
pub fn pauli<T: Real>() -> [CMat<T>; 3] {
    let (o, l) = (T::zero(), T::one());
    let s1 = CMat::from_row_slice(2, 2, &[creal(o), creal(l), creal(l), creal(o)]);
    let s2 = CMat::from_row_slice(2, 2, &[creal(o), cplx(o, -l), cplx(o, l), creal(o)]);
    let s3 = CMat::from_row_slice(2, 2, &[creal(l), creal(o), creal(o), creal(-l)]);
    [s1, s2, s3]
}

pub fn anticommutator<T: Real>(a: &CMat<T>, b: &CMat<T>) -> CMat<T> {
    a * b + b * a
}

/// Largest entry modulus.
pub fn max_abs<T: Real>(m: &CMat<T>) -> T {
    m.iter().fold(T::zero(), |acc, z| acc.max(z.modulus()))
}

pub fn max_abs_real<T: Real>(m: &RMat<T>) -> T {
    m.iter().fold(T::zero(), |acc, z| acc.max(z.abs()))
}

pub fn fro_norm<T: Real>(m: &CMat<T>) -> T {
    m.iter()
        .fold(T::zero(), |acc, z| acc + z.norm_sqr())
        .sqrt()
}

/// Frobenius inner product ⟨a, b⟩ = tr(a* b).
pub fn fro_inner<T: Real>(a: &CMat<T>, b: &CMat<T>) -> Cplx<T> {
    a.iter()
        .zip(b.iter())
        .fold(creal(T::zero()), |acc, (x, y)| acc + x.conj() * y)
}

/// max |U*U − 𝟙|.
pub fn unitarity_defect<T: Real>(u: &CMat<T>) -> T {
    let n = u.nrows();
    max_abs(&(u.adjoint() * u - identity::<T>(n)))
}

/// Nearest unitary matrix (unitary factor of the polar decomposition).
pub fn polar_unitary<T: Real>(u: &CMat<T>) -> CMat<T> {
    let svd = u.clone().svd(true, true);
    let w = svd.u.expect("left singular vectors requested");
    let v_t = svd.v_t.expect("right singular vectors requested");
    w * v_t
}

pub fn singular_values<T: Real>(m: &CMat<T>) -> Vec<T> {
    let mut s: Vec<T> = m.clone().singular_values().iter().copied().collect();
    s.sort_by(|a, b| b.partial_cmp(a).unwrap_or(std::cmp::Ordering::Equal));
    s
}

/// Spectral condition number; `+∞` for singular input.
pub fn condition_number<T: Real>(m: &CMat<T>) -> T {
    let s = singular_values(m);
    let (max, min) = (s[0], s[s.len() - 1]);
    if min <= T::zero() {
        T::max_value().unwrap_or_else(T::one)
    } else {
        max / min
    }
}

pub fn real_det<T: Real>(m: &RMat<T>) -> T {
    m.clone().lu().determinant()
}

pub fn to_complex<T: Real>(m: &RMat<T>) -> CMat<T> {
    m.map(creal)
}

pub fn scale<T: Real>(m: &CMat<T>, s: T) -> CMat<T> {
    m * creal(s)
}
