//! Spinor transport `U′ = −(i/2)(α·∇V/V)U` along a geodesic, the
//! one-dimensional phase `ϑ` and the matrix factor `M(x★, y★)`.

use crate::clifford::{projector_imag, DiracRep};
use crate::error::{Error, Result};
use crate::geoflow::{GeodesicSolution, Trajectory};
use crate::linalg::{fro_norm, polar_unitary, unitarity_defect, CMat};
use crate::ode::{integrate, OdeOptions};
use crate::potential::PotentialModel;
use crate::quad;
use crate::scalar::{cplx, creal, lit, Real};

/// Defect above which `U(τ)` is projected back onto the unitary group.
pub const PROJECTION_THRESHOLD: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq)]
pub struct SpinorTransport<T: Real> {
    pub u_tau: CMat<T>,
    /// `‖U*U − 𝟙‖` of the raw integration result.
    pub pre_projection_defect: T,
    pub projected: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TransportResult<T: Real> {
    pub u_tau: CMat<T>,
    pub pre_projection_defect: T,
    /// `ϑ(τ)`, one dimension only.
    pub theta_tau: Option<T>,
    /// `M = U(τ)(−V(y★))Λ⁺(iω(0))`.
    pub m: CMat<T>,
    pub omega0: Vec<T>,
    pub omega_tau: Vec<T>,
    /// `‖M − (−V(x★))Λ⁺(iω(τ))α₀M‖_F`.
    pub projection_identity_residual: T,
}

fn pack<T: Real>(u: &CMat<T>, out: &mut [T]) {
    let n2 = u.len();
    for (k, z) in u.iter().enumerate() {
        out[k] = z.re;
        out[n2 + k] = z.im;
    }
}

fn unpack<T: Real>(n: usize, y: &[T]) -> CMat<T> {
    let n2 = n * n;
    CMat::from_iterator(n, n, (0..n2).map(|k| cplx(y[k], y[n2 + k])))
}

/// Integrates the transport equation along `traj` with default tolerances.
pub fn solve_spinor_transport<T: Real>(
    traj: &Trajectory<T>,
    model: &PotentialModel<T>,
    rep: &DiracRep<T>,
) -> Result<SpinorTransport<T>> {
    solve_spinor_transport_with(traj, model, rep, &OdeOptions::default())
}

pub fn solve_spinor_transport_with<T: Real>(
    traj: &Trajectory<T>,
    model: &PotentialModel<T>,
    rep: &DiracRep<T>,
    opts: &OdeOptions<T>,
) -> Result<SpinorTransport<T>> {
    if rep.dim() != traj.dim() {
        return Err(Error::domain("representation and trajectory dimensions differ"));
    }
    let n = rep.dstar();
    let mut y0 = vec![T::zero(); 2 * n * n];
    pack(&rep.identity(), &mut y0);
    let minus_half_i = cplx(T::zero(), -lit::<T>(0.5));
    let rhs = |t: T, y: &[T], dy: &mut [T]| -> Result<()> {
        let x = traj.position_at(t);
        let pot = model.evaluate(&x)?;
        let ratio: Vec<T> = pot.grad.iter().map(|g| *g / pot.value).collect();
        let gen = rep.alpha_dot_real(&ratio) * minus_half_i;
        pack(&(gen * unpack(n, y)), dy);
        Ok(())
    };
    let sol = integrate(rhs, T::zero(), &y0, traj.tau(), opts)?;
    let raw = unpack(n, sol.y_end());
    let defect = unitarity_defect(&raw);
    let projected = defect > lit(PROJECTION_THRESHOLD);
    let u_tau = if projected { polar_unitary(&raw) } else { raw };
    Ok(SpinorTransport {
        u_tau,
        pre_projection_defect: defect,
        projected,
    })
}

/// `ϑ(τ) = ∫₀^τ V′(γ(t)) / (2V(γ(t))) dt`, by quadrature over each step of
/// the dense output.
pub fn theta_1d<T: Real>(traj: &Trajectory<T>, model: &PotentialModel<T>) -> Result<T> {
    if traj.dim() != 1 {
        return Err(Error::domain("theta is defined in one dimension only"));
    }
    let times = traj.times();
    let mut failure = None;
    let mut total = T::zero();
    for w in times.windows(2) {
        let (part, _) = quad::integrate(
            |t: T| match model.evaluate(&traj.position_at(t)) {
                Ok(s) => s.grad[0] / (s.value + s.value),
                Err(e) => {
                    failure = Some(e);
                    T::zero()
                }
            },
            w[0],
            w[1],
            lit(1e-15),
            lit(1e-13),
        );
        total += part;
    }
    match failure {
        Some(e) => Err(e),
        None => Ok(total),
    }
}

/// `½·sign(x − y)·(arcsin V(y) − arcsin V(x))`, the substitution form of
/// `ϑ` used as a cross-check.
pub fn theta_1d_closed_form<T: Real>(model: &PotentialModel<T>, y: T, x: T) -> Result<T> {
    let vy = model.value(&[y])?;
    let vx = model.value(&[x])?;
    let sign = if x > y { T::one() } else { -T::one() };
    Ok(sign * (vy.asin() - vx.asin()) * lit(0.5))
}

/// Assembles `M(x★, y★)` and its diagnostics.
pub fn transport_matrix<T: Real>(
    sol: &GeodesicSolution<T>,
    rep: &DiracRep<T>,
) -> Result<TransportResult<T>> {
    transport_matrix_with(sol, rep, &OdeOptions::default())
}

pub fn transport_matrix_with<T: Real>(
    sol: &GeodesicSolution<T>,
    rep: &DiracRep<T>,
    opts: &OdeOptions<T>,
) -> Result<TransportResult<T>> {
    let model = &sol.model;
    let traj = &sol.trajectory;
    let spin = solve_spinor_transport_with(traj, model, rep, opts)?;
    let omega0 = traj.start().p.clone();
    let omega_tau = traj.end().p.clone();
    let vy = model.value(&sol.y_star)?;
    let vx = model.value(&sol.x_star)?;
    let lp0 = projector_imag(rep, &omega0)?.lambda_plus;
    let lpt = projector_imag(rep, &omega_tau)?.lambda_plus;
    let m = &spin.u_tau * &lp0 * creal(-vy);
    let rhs = lpt * creal(-vx) * rep.alpha0() * &m;
    let projection_identity_residual = fro_norm(&(&m - rhs));
    let theta_tau = if traj.dim() == 1 {
        Some(theta_1d(traj, model)?)
    } else {
        None
    };
    Ok(TransportResult {
        u_tau: spin.u_tau,
        pre_projection_defect: spin.pre_projection_defect,
        theta_tau,
        m,
        omega0,
        omega_tau,
        projection_identity_residual,
    })
}

/// `‖α₀Ũ(τ) − U(τ)*α₀‖_F` for a forward and a reversed transport.
pub fn reversal_residual<T: Real>(rep: &DiracRep<T>, forward: &CMat<T>, reversed: &CMat<T>) -> T {
    let a0 = rep.alpha0();
    fro_norm(&(a0 * reversed - forward.adjoint() * a0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geoflow::{shoot_geodesic, ShootOptions};
    use crate::linalg::{max_abs, singular_values};

    fn solve(model: &PotentialModel<f64>, y: &[f64], x: &[f64]) -> (GeodesicSolution<f64>, TransportResult<f64>) {
        let rep = DiracRep::new(model.dim()).unwrap();
        let sol = shoot_geodesic(model, y, x, &ShootOptions::default()).unwrap();
        let tr = transport_matrix(&sol, &rep).unwrap();
        (sol, tr)
    }

    #[test]
    fn constant_potential_is_trivial() {
        let m = PotentialModel::<f64>::constant(1, -0.6).unwrap();
        let (_, tr) = solve(&m, &[0.0], &[1.0]);
        let rep = DiracRep::<f64>::new(1).unwrap();
        assert!(max_abs(&(&tr.u_tau - rep.identity())) < 1e-14);
        assert_eq!(tr.theta_tau, Some(0.0));
        let want = CMat::from_row_slice(
            2,
            2,
            &[cplx(0.8, 0.0), cplx(0.0, 0.4), cplx(0.0, 0.4), cplx(-0.2, 0.0)],
        );
        assert!(max_abs(&(&tr.m - want)) < 1e-12, "{}", tr.m);
    }

    #[test]
    fn one_dimensional_rotation_and_closed_form_theta() {
        let m = PotentialModel::<f64>::tanh_step(-0.5, 0.2).unwrap();
        let (_, tr) = solve(&m, &[-1.0], &[1.0]);
        let theta = tr.theta_tau.unwrap();
        let closed = theta_1d_closed_form(&m, -1.0, 1.0).unwrap();
        assert!((theta - closed).abs() < 1e-8, "{theta} vs {closed}");
        let rep = DiracRep::<f64>::new(1).unwrap();
        let rot = rep.identity() * creal(theta.cos()) - rep.alpha(1) * cplx(0.0, theta.sin());
        assert!(max_abs(&(&tr.u_tau - rot)) < 1e-8);
        assert!(tr.pre_projection_defect < 1e-9);
        let (_, back) = solve(&m, &[1.0], &[-1.0]);
        // The integrand depends on position only, so reversal leaves ϑ unchanged.
        assert!((back.theta_tau.unwrap() - theta).abs() < 1e-8);
    }

    #[test]
    fn theta_example_value() {
        // Across the whole step V runs from −0.7 to −0.3.
        let m = PotentialModel::<f64>::tanh_step(-0.5, 0.2).unwrap();
        let closed = theta_1d_closed_form(&m, -9.9, 9.9).unwrap();
        assert!((closed + 0.2353524).abs() < 1e-6, "{closed}");
    }

    #[test]
    fn multid_identities() {
        let m = PotentialModel::<f64>::bump_well(-0.5, -0.25, vec![0.0, 0.0, 0.0], 2.0).unwrap();
        let y = [-1.0, 0.4, 0.2];
        let x = [1.2, -0.3, 0.5];
        let (_, fwd) = solve(&m, &y, &x);
        let (_, rev) = solve(&m, &x, &y);
        assert!(fwd.pre_projection_defect < 1e-9);
        assert!(fwd.projection_identity_residual < 1e-8);
        let rep = DiracRep::<f64>::new(3).unwrap();
        assert!(reversal_residual(&rep, &fwd.u_tau, &rev.u_tau) < 1e-8);
        let scale = fro_norm(&fwd.m);
        assert!(fro_norm(&(fwd.m.adjoint() - &rev.m)) < 1e-8 * scale);
        let sv = singular_values(&fwd.m);
        assert!(sv[1] / sv[2] > 1e6);
    }

    #[test]
    fn theta_requires_one_dimension() {
        let m = PotentialModel::<f64>::constant(2, -0.6).unwrap();
        let sol = shoot_geodesic(&m, &[0.0, 0.0], &[1.0, 0.0], &ShootOptions::default()).unwrap();
        assert!(theta_1d(&sol.trajectory, &m).is_err());
    }
}
