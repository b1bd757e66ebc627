use crate::error::{Error, Result};
use crate::linalg::{real_det, RMat};
use crate::ode::{integrate, OdeOptions};
use crate::potential::PotentialModel;
use crate::scalar::{lit, Real};

use super::shooting::GeodesicSolution;
use super::{norm, norm_sq};

/// Tolerances used by the exponential-map oracle, tighter than the flow
/// defaults so that finite differences stay clean.
fn oracle_ode<T: Real>() -> OdeOptions<T> {
    OdeOptions::with_tolerances(lit(1e-13), lit(1e-15))
}

/// `exp_y(v)` for the conformal metric `(1 − V²)·δ`.
///
/// Integrates `q̈ = −2(∇f·q̇)q̇ + |q̇|²∇f`, `f = ½ log(1 − V²)`, to `t = 1`.
pub fn exp_map_oracle<T: Real>(model: &PotentialModel<T>, y: &[T], v: &[T]) -> Result<Vec<T>> {
    exp_map_with(model, y, v, &oracle_ode())
}

fn exp_map_with<T: Real>(
    model: &PotentialModel<T>,
    y: &[T],
    v: &[T],
    opts: &OdeOptions<T>,
) -> Result<Vec<T>> {
    let d = model.dim();
    if y.len() != d || v.len() != d {
        return Err(Error::domain("point or vector has the wrong dimension"));
    }
    let mut y0 = y.to_vec();
    y0.extend_from_slice(v);
    let rhs = |_t: T, s: &[T], ds: &mut [T]| -> Result<()> {
        let (q, qd) = s.split_at(d);
        let pot = model.evaluate(q)?;
        let g = T::one() - pot.value * pot.value;
        let grad_f: Vec<T> = pot.grad.iter().map(|dv| -pot.value * *dv / g).collect();
        let gf_qd = grad_f.iter().zip(qd).fold(T::zero(), |a, (x, y)| a + *x * *y);
        let speed2 = norm_sq(qd);
        let two: T = lit(2.0);
        for i in 0..d {
            ds[i] = qd[i];
            ds[d + i] = -two * gf_qd * qd[i] + speed2 * grad_f[i];
        }
        Ok(())
    };
    let sol = integrate(rhs, T::zero(), &y0, T::one(), opts)?;
    Ok(sol.y_end()[..d].to_vec())
}

/// Central-difference Jacobian of `v ↦ exp_y(v)` in Euclidean coordinates.
pub fn exp_jacobian_fd<T: Real>(
    model: &PotentialModel<T>,
    y: &[T],
    v: &[T],
    step: T,
) -> Result<RMat<T>> {
    let d = model.dim();
    let opts = oracle_ode();
    let mut jac = RMat::zeros(d, d);
    for j in 0..d {
        let mut vp = v.to_vec();
        let mut vm = v.to_vec();
        vp[j] += step;
        vm[j] -= step;
        let xp = exp_map_with(model, y, &vp, &opts)?;
        let xm = exp_map_with(model, y, &vm, &opts)?;
        for i in 0..d {
            jac[(i, j)] = (xp[i] - xm[i]) / (step + step);
        }
    }
    Ok(jac)
}

/// `det exp′_y(v)` in orthonormal frames at both ends, from finite
/// differences.
///
/// The Euclidean Jacobian determinant is multiplied by
/// `((1 − V²(x)) / (1 − V²(y)))^{d/2}`, `x = exp_y(v)`.
pub fn exp_prime_fd<T: Real>(model: &PotentialModel<T>, y: &[T], v: &[T]) -> Result<T> {
    let step = lit::<T>(1e-4) * norm(v).max(T::one());
    let jac = exp_jacobian_fd(model, y, v, step)?;
    let x = exp_map_oracle(model, y, v)?;
    let gy = T::one() - model.value(y)?.powi(2);
    let gx = T::one() - model.value(&x)?.powi(2);
    let d = model.dim();
    Ok(real_det(&jac) * (gx / gy).powf(lit(d as f64 / 2.0)))
}

/// `exp_y★⁻¹(x★) = d_A (1 − V²(y★))^{−1/2} p₀/|p₀|`.
pub fn inverse_exp<T: Real>(sol: &GeodesicSolution<T>) -> Result<Vec<T>> {
    let v = sol.model.value(&sol.y_star)?;
    let scale = sol.d_a / (T::one() - v * v).sqrt() / norm(&sol.p0);
    Ok(sol.p0.iter().map(|p| *p * scale).collect())
}
