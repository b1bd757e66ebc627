//! Dirac matrices, the principal square root and the spectral projections
//! of the matrix symbol `α·ζ + α₀ + V`.

use nalgebra::ComplexField;

use crate::error::{Error, Result};
use crate::linalg::{anticommutator, identity, max_abs, pauli, CMat};
use crate::scalar::{cplx, creal, to_f64, Cplx, Real};

/// Hermitian matrices `α₀, …, α_d` obeying `{α_k, α_l} = 2δ_kl·𝟙`.
#[derive(Debug, Clone, PartialEq)]
pub struct DiracRep<T: Real> {
    d: usize,
    dstar: usize,
    /// `alphas[0]` is the mass matrix α₀, `alphas[j]` the j-th spatial one.
    alphas: Vec<CMat<T>>,
    /// γ₀ = α₀, γ_j = −α₀α_j.
    gammas: Vec<CMat<T>>,
}

/// Spinor dimension `2^⌊(d+1)/2⌋`.
pub fn spinor_dim(d: usize) -> usize {
    1 << ((d + 1) / 2)
}

fn kron<T: Real>(a: &CMat<T>, b: &CMat<T>) -> CMat<T> {
    a.kronecker(b)
}

impl<T: Real> DiracRep<T> {
    /// Minimal representation in `d ≥ 1` spatial dimensions.
    ///
    /// `d = 1, 2` use Pauli matrices (α₀ = σ₃). Higher dimensions are
    /// obtained by `α_j ↦ σ₁ ⊗ α_j` plus `σ₂ ⊗ 𝟙`, `σ₃ ⊗ 𝟙` for the two new
    /// indices. For `d = 3` the standard (Dirac) representation is used.
    pub fn new(d: usize) -> Result<Self> {
        if d == 0 {
            return Err(Error::domain("spatial dimension must be at least 1"));
        }
        let [s1, s2, s3] = pauli::<T>();
        let alphas = if d == 3 {
            let z = CMat::<T>::zeros(2, 2);
            let one = identity::<T>(2);
            let block = |a: &CMat<T>, b: &CMat<T>, c: &CMat<T>, e: &CMat<T>| {
                let mut m = CMat::<T>::zeros(4, 4);
                m.view_mut((0, 0), (2, 2)).copy_from(a);
                m.view_mut((0, 2), (2, 2)).copy_from(b);
                m.view_mut((2, 0), (2, 2)).copy_from(c);
                m.view_mut((2, 2), (2, 2)).copy_from(e);
                m
            };
            vec![
                block(&one, &z, &z, &(-one.clone())),
                block(&z, &s1, &s1, &z),
                block(&z, &s2, &s2, &z),
                block(&z, &s3, &s3, &z),
            ]
        } else {
            let mut cur = if d % 2 == 1 {
                vec![s3.clone(), s1.clone()]
            } else {
                vec![s3.clone(), s1.clone(), s2.clone()]
            };
            let mut dim = if d % 2 == 1 { 1 } else { 2 };
            while dim < d {
                let n = cur[0].nrows();
                let one = identity::<T>(n);
                let mut next: Vec<CMat<T>> = cur.iter().map(|a| kron(&s1, a)).collect();
                next.push(kron(&s2, &one));
                next.push(kron(&s3, &one));
                cur = next;
                dim += 2;
            }
            cur
        };
        Ok(Self::from_alphas(d, alphas))
    }

    fn from_alphas(d: usize, alphas: Vec<CMat<T>>) -> Self {
        let dstar = alphas[0].nrows();
        let a0 = alphas[0].clone();
        let mut gammas = vec![a0.clone()];
        gammas.extend(alphas[1..].iter().map(|a| -(&a0 * a)));
        DiracRep {
            d,
            dstar,
            alphas,
            gammas,
        }
    }

    /// The representation `α̃_k = −α_k`, also a solution of the Clifford relations.
    pub fn negated(&self) -> Self {
        Self::from_alphas(self.d, self.alphas.iter().map(|a| -a.clone()).collect())
    }

    /// Replaces `α_k` (test hook for fault-injection checks).
    #[doc(hidden)]
    pub fn with_perturbed_alpha(&self, k: usize, eps: T) -> Self {
        let mut alphas = self.alphas.clone();
        alphas[k][(0, 0)] += creal(eps);
        Self::from_alphas(self.d, alphas)
    }

    pub fn dim(&self) -> usize {
        self.d
    }

    pub fn dstar(&self) -> usize {
        self.dstar
    }

    pub fn alpha0(&self) -> &CMat<T> {
        &self.alphas[0]
    }

    /// Spatial Dirac matrix α_j, `1 ≤ j ≤ d`.
    pub fn alpha(&self, j: usize) -> &CMat<T> {
        &self.alphas[j]
    }

    pub fn alphas(&self) -> &[CMat<T>] {
        &self.alphas
    }

    pub fn gammas(&self) -> &[CMat<T>] {
        &self.gammas
    }

    pub fn identity(&self) -> CMat<T> {
        identity(self.dstar)
    }

    /// `α·ζ = Σ_j ζ_j α_j` for complex `ζ`.
    pub fn alpha_dot(&self, zeta: &[Cplx<T>]) -> CMat<T> {
        let mut m = CMat::zeros(self.dstar, self.dstar);
        for (j, z) in zeta.iter().enumerate() {
            m += &self.alphas[j + 1] * *z;
        }
        m
    }

    /// `α·v` for real `v`.
    pub fn alpha_dot_real(&self, v: &[T]) -> CMat<T> {
        let z: Vec<Cplx<T>> = v.iter().map(|x| creal(*x)).collect();
        self.alpha_dot(&z)
    }

    /// Symbol `α·ζ + α₀ + V·𝟙`.
    pub fn symbol(&self, zeta: &[Cplx<T>], v: T) -> CMat<T> {
        self.alpha_dot(zeta) + &self.alphas[0] + self.identity() * creal(v)
    }

    /// max |α_k − α_k*|.
    pub fn hermiticity_residual(&self) -> T {
        self.alphas
            .iter()
            .map(|a| max_abs(&(a - a.adjoint())))
            .fold(T::zero(), |m, r| m.max(r))
    }

    /// max over all pairs of |{α_k, α_l} − 2δ_kl 𝟙|.
    pub fn clifford_residual(&self) -> T {
        let id = self.identity();
        let mut worst = T::zero();
        for (k, a) in self.alphas.iter().enumerate() {
            for (l, b) in self.alphas.iter().enumerate() {
                let mut ac = anticommutator(a, b);
                if k == l {
                    ac -= &id * creal(T::one() + T::one());
                }
                worst = worst.max(max_abs(&ac));
            }
        }
        worst
    }

    /// Residual of γ₀² = 𝟙, γ_j² = −𝟙 and {γ_μ, γ_ν} = 0 (μ ≠ ν).
    pub fn gamma_residual(&self) -> T {
        let id = self.identity();
        let mut worst = T::zero();
        for (m, a) in self.gammas.iter().enumerate() {
            let target = if m == 0 { id.clone() } else { -id.clone() };
            worst = worst.max(max_abs(&(a * a - target)));
            for b in self.gammas.iter().skip(m + 1) {
                worst = worst.max(max_abs(&anticommutator(a, b)));
            }
        }
        worst
    }
}

/// Principal square root (slit along `(−∞, 0]`, `Re √z > 0`).
pub fn principal_sqrt<T: Real>(z: Cplx<T>) -> Result<Cplx<T>> {
    if z.im == T::zero() && z.re <= T::zero() {
        return Err(Error::domain(format!(
            "square root argument {} lies on the branch cut (-inf, 0]",
            to_f64(z.re)
        )));
    }
    let r = z.modulus();
    let two = T::one() + T::one();
    if z.re >= T::zero() {
        let t = ((r + z.re) / two).sqrt();
        Ok(cplx(t, z.im / (two * t)))
    } else {
        let t = ((r - z.re) / two).sqrt();
        let re = z.im.abs() / (two * t);
        Ok(cplx(re, if z.im < T::zero() { -t } else { t }))
    }
}

/// `ζ² = Σ ζ_j²` (bilinear, no conjugation).
pub fn zeta_sq<T: Real>(zeta: &[Cplx<T>]) -> Cplx<T> {
    zeta.iter().fold(creal(T::zero()), |acc, z| acc + z * z)
}

/// The eigenprojections `Λ±(ζ) = (𝟙 ± S(ζ))/2`.
#[derive(Debug, Clone, PartialEq)]
pub struct Projector<T: Real> {
    pub zeta: Vec<Cplx<T>>,
    /// `√(1 + ζ²)` on the principal branch.
    pub root: Cplx<T>,
    pub s_matrix: CMat<T>,
    pub lambda_plus: CMat<T>,
    pub lambda_minus: CMat<T>,
}

impl<T: Real> Projector<T> {
    /// Eigenvalues `λ± = ±√(1+ζ²) + V` of the symbol.
    pub fn eigenvalues(&self, v: T) -> (Cplx<T>, Cplx<T>) {
        (self.root + creal(v), -self.root + creal(v))
    }

    /// Largest residual of Λ⁺+Λ⁻=𝟙, (Λ±)²=Λ±, S²=𝟙, Λ⁺Λ⁻=0.
    pub fn algebra_residual(&self) -> T {
        let n = self.s_matrix.nrows();
        let id = identity::<T>(n);
        let lp = &self.lambda_plus;
        let lm = &self.lambda_minus;
        [
            max_abs(&(lp + lm - &id)),
            max_abs(&(lp * lp - lp)),
            max_abs(&(lm * lm - lm)),
            max_abs(&(&self.s_matrix * &self.s_matrix - &id)),
            max_abs(&(lp * lm)),
        ]
        .into_iter()
        .fold(T::zero(), |m, r| m.max(r))
    }

    /// max |D̂_V(ζ)Λ± − λ±Λ±| for the given potential value.
    pub fn eigen_residual(&self, rep: &DiracRep<T>, v: T) -> T {
        let sym = rep.symbol(&self.zeta, v);
        let (lp, lm) = self.eigenvalues(v);
        let rp = &sym * &self.lambda_plus - &self.lambda_plus * lp;
        let rm = &sym * &self.lambda_minus - &self.lambda_minus * lm;
        max_abs(&rp).max(max_abs(&rm))
    }
}

/// Builds `Λ±(ζ)` for `ζ ∈ ℂ^d` with `|Im ζ| < 1`.
pub fn projector<T: Real>(rep: &DiracRep<T>, zeta: &[Cplx<T>]) -> Result<Projector<T>> {
    if zeta.len() != rep.dim() {
        return Err(Error::domain(format!(
            "zeta has length {}, expected {}",
            zeta.len(),
            rep.dim()
        )));
    }
    let im_norm = zeta
        .iter()
        .fold(T::zero(), |acc, z| acc + z.im * z.im)
        .sqrt();
    if im_norm >= T::one() {
        return Err(Error::domain(format!(
            "|Im zeta| = {} must be < 1",
            to_f64(im_norm)
        )));
    }
    let root = principal_sqrt(creal(T::one()) + zeta_sq(zeta))?;
    let s_matrix = (rep.alpha_dot(zeta) + rep.alpha0()) / root;
    let half = creal(T::one() / (T::one() + T::one()));
    let id = rep.identity();
    let lambda_plus = (&id + &s_matrix) * half;
    let lambda_minus = (&id - &s_matrix) * half;
    Ok(Projector {
        zeta: zeta.to_vec(),
        root,
        s_matrix,
        lambda_plus,
        lambda_minus,
    })
}

/// `Λ±(i p)` for a real momentum `p`, the form used along trajectories.
pub fn projector_imag<T: Real>(rep: &DiracRep<T>, p: &[T]) -> Result<Projector<T>> {
    let zeta: Vec<Cplx<T>> = p.iter().map(|x| cplx(T::zero(), *x)).collect();
    projector(rep, &zeta)
}
