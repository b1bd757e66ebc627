//! Hamiltonian flow of `H(x, p) = −√(1 − |p|²) − V(x)` on its zero level set,
//! the Agmon geodesic boundary-value problem and the determinant factors of
//! the leading-order kernel.

mod expmap;
mod flow;
mod shooting;

pub use expmap::{exp_jacobian_fd, exp_map_oracle, exp_prime_fd, inverse_exp};
pub use flow::{integrate_flow, integrate_hamiltonian, Trajectory};
pub use shooting::{
    agmon_distance, agmon_distance_1d_quadrature, bordered_determinant, det_exp_prime,
    shoot_geodesic, shoot_geodesic_unchecked, Candidate, GeodesicSolution, ShootOptions,
    UniquenessReport,
};

use crate::error::{Error, Result};
use crate::potential::PotentialModel;
use crate::scalar::{to_f64, Real};

/// Phase-space point with `|p| < 1`.
#[derive(Debug, Clone, PartialEq)]
pub struct PhasePoint<T> {
    pub x: Vec<T>,
    pub p: Vec<T>,
}

pub(crate) fn norm_sq<T: Real>(v: &[T]) -> T {
    v.iter().fold(T::zero(), |acc, x| acc + *x * *x)
}

pub(crate) fn norm<T: Real>(v: &[T]) -> T {
    norm_sq(v).sqrt()
}

/// `√(1 − |p|²)`, failing on `|p| ≥ 1`.
pub(crate) fn kinetic_root<T: Real>(p: &[T]) -> Result<T> {
    let p2 = norm_sq(p);
    if !(p2 < T::one()) {
        return Err(Error::domain(format!(
            "|p| = {} is outside the unit ball",
            to_f64(p2.sqrt())
        )));
    }
    Ok((T::one() - p2).sqrt())
}

/// `H(x, p) = −√(1 − |p|²) − V(x)`.
pub fn hamiltonian<T: Real>(model: &PotentialModel<T>, x: &[T], p: &[T]) -> Result<T> {
    let s = kinetic_root(p)?;
    Ok(-s - model.value(x)?)
}

/// Momentum on the figuratrix `{p : H(x, p) = 0}`, a sphere of radius
/// `√(1 − V(x)²)`, pointing along `direction`.
pub fn figuratrix_momentum<T: Real>(
    model: &PotentialModel<T>,
    x: &[T],
    direction: &[T],
) -> Result<Vec<T>> {
    let n = norm(direction);
    if (n - T::one()).abs() > crate::scalar::lit(1e-12) {
        return Err(Error::domain("direction must be a unit vector"));
    }
    let v = model.value(x)?;
    let radius = (T::one() - v * v).sqrt();
    Ok(direction.iter().map(|u| radius * *u).collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn hamiltonian_examples() {
        let m = PotentialModel::<f64>::constant(2, -0.6).unwrap();
        assert!(hamiltonian(&m, &[0.0, 0.0], &[0.8, 0.0]).unwrap().abs() < 1e-15);
        let m5 = PotentialModel::<f64>::constant(2, -0.5).unwrap();
        let h = hamiltonian(&m5, &[0.3, 0.1], &[0.6, 0.0]).unwrap();
        assert!((h + 0.3).abs() < 1e-15);
        let h0 = hamiltonian(&m5, &[0.3, 0.1], &[0.0, 0.0]).unwrap();
        assert!((h0 - (-1.0 + 0.5)).abs() < 1e-15);
        assert!(hamiltonian(&m, &[0.0, 0.0], &[1.0, 0.0]).is_err());
    }

    #[test]
    fn figuratrix_examples() {
        let m = PotentialModel::<f64>::constant(2, -0.6).unwrap();
        let p = figuratrix_momentum(&m, &[0.0, 0.0], &[0.6, 0.8]).unwrap();
        assert!((norm(&p) - 0.8).abs() < 1e-15);
        let m = PotentialModel::<f64>::constant(3, -0.5).unwrap();
        let p = figuratrix_momentum(&m, &[0.0; 3], &[0.0, 0.0, 1.0]).unwrap();
        assert!((norm(&p) - 0.75f64.sqrt()).abs() < 1e-15);
        let b = PotentialModel::<f64>::bump_well(-0.5, -0.25, vec![0.0, 0.0], 2.0).unwrap();
        let p = figuratrix_momentum(&b, &[0.0, 0.0], &[1.0, 0.0]).unwrap();
        assert!((norm(&p) - (1.0f64 - 0.5625).sqrt()).abs() < 1e-15);
        assert!(hamiltonian(&b, &[0.0, 0.0], &p).unwrap().abs() < 1e-15);
        assert!(figuratrix_momentum(&b, &[0.0, 0.0], &[2.0, 0.0]).is_err());
    }
}
