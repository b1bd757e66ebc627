//! Essentially exact one-dimensional Green kernel from matched decaying
//! (Jost) solutions of `−ihα₁u′ + (α₀ + V)u = 0`.
//!
//! Each solution is stored in a WKB gauge `u = e^{ℓ(x)} v(x)` with
//! `ℓ = ∓Φ/h`, `Φ′ = κ(x) = √(1 − V²)`, so `v` stays of order one while the
//! exponential growth lives in `ℓ`. Integration always runs from the
//! tail anchor inward, where the decaying solution is the dominant one.


use crate::clifford::DiracRep;
use crate::error::{Error, Result};
use crate::kernel::Scaled;
use crate::linalg::{condition_number, identity, max_abs, CMat, CVec};
use crate::ode::{integrate, DenseSolution, OdeOptions};
use crate::potential::PotentialModel;
use crate::scalar::{cplx, creal, lit, to_f64, Real};

/// Largest accepted condition number of the matching matrix.
pub const MAX_CONDITION: f64 = 1e12;
/// Largest `|V′|` tolerated at a box-edge anchor of a model without window.
pub const ANCHOR_SLOPE_TOL: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Side {
    /// Decays as `x → −∞`.
    Left,
    /// Decays as `x → +∞`.
    Right,
}

#[derive(Debug, Clone)]
pub struct JostSolution<T: Real> {
    pub side: Side,
    /// Point from which the exact tail takes over.
    pub anchor: T,
    pub h: T,
    /// `V` on the tail.
    pub tail_value: T,
    /// Normalized tail eigenvector.
    pub tail_vector: CVec<T>,
    model: PotentialModel<T>,
    rep: DiracRep<T>,
    dense: DenseSolution<T>,
}

fn tail_kappa<T: Real>(e: T) -> T {
    (T::one() - e * e).sqrt()
}

/// `−iα₁(α₀ + V)`, the generator of `h·u′`.
fn generator<T: Real>(rep: &DiracRep<T>, v: T) -> CMat<T> {
    (rep.alpha(1) * (rep.alpha0() + rep.identity() * creal(v))) * cplx(T::zero(), -T::one())
}

/// Unit vector spanning the kernel of `B − μ` for a 2×2 `B`.
fn null_vector<T: Real>(b: &CMat<T>, mu: T) -> CVec<T> {
    let m = creal(mu);
    let c1 = CVec::from_vec(vec![b[(0, 1)], m - b[(0, 0)]]);
    let c2 = CVec::from_vec(vec![m - b[(1, 1)], b[(1, 0)]]);
    let c = if c1.norm() >= c2.norm() { c1 } else { c2 };
    let n = c.norm();
    c / creal(n)
}

impl<T: Real> JostSolution<T> {
    fn sign(&self) -> T {
        match self.side {
            Side::Right => -T::one(),
            Side::Left => T::one(),
        }
    }

    fn beyond_anchor(&self, x: T) -> bool {
        match self.side {
            Side::Right => x >= self.anchor,
            Side::Left => x <= self.anchor,
        }
    }

    /// Gauge value `v(x)` and exponent `ℓ(x)` with `u(x) = e^{ℓ} v`.
    pub fn value(&self, x: T) -> Result<(CVec<T>, T)> {
        let reach = self.dense.t_end();
        let covered = match self.side {
            Side::Right => x >= reach,
            Side::Left => x <= reach,
        };
        if !covered {
            return Err(Error::domain(format!(
                "x = {} lies beyond the integrated range",
                to_f64(x)
            )));
        }
        if self.beyond_anchor(x) {
            let kappa = tail_kappa(self.tail_value);
            return Ok((self.tail_vector.clone(), self.sign() * kappa * x / self.h));
        }
        let y = self.dense.eval(x);
        let v = CVec::from_vec(vec![cplx(y[0], y[2]), cplx(y[1], y[3])]);
        Ok((v, self.sign() * y[4] / self.h))
    }

    /// `u(x)` itself; overflows for small `h` far from the anchor.
    pub fn value_unscaled(&self, x: T) -> Result<CVec<T>> {
        let (v, l) = self.value(x)?;
        Ok(v * creal(l.exp()))
    }

    /// `‖−ihα₁u′ + (α₀ + V)u‖ / ‖u‖` with `u′` from a five-point stencil of
    /// the gauge representation.
    pub fn ode_residual(&self, x: T, step: T) -> Result<T> {
        let (v0, _) = self.value(x)?;
        let mut dv = CVec::<T>::zeros(2);
        let w = [lit::<T>(1.0 / 12.0), lit(-8.0 / 12.0), lit(8.0 / 12.0), lit(-1.0 / 12.0)];
        for (k, off) in [-2.0, -1.0, 1.0, 2.0].iter().enumerate() {
            let (v, _) = self.value(x + step * lit(*off))?;
            dv += v * creal(w[k] / step);
        }
        let pot = self.model.value(&[x])?;
        let kappa = tail_kappa(pot);
        // u′ = e^ℓ(v′ + ℓ′v), ℓ′ = ∓κ/h.
        let du = dv + &v0 * creal(self.sign() * kappa / self.h);
        let a1 = self.rep.alpha(1);
        let op = a1 * &du * cplx(T::zero(), -self.h)
            + (self.rep.alpha0() + self.rep.identity() * creal(pot)) * &v0;
        Ok(op.norm() / v0.norm())
    }

    /// Smallest and largest `‖v‖` over the integration mesh.
    pub fn gauge_norm_range(&self) -> (T, T) {
        let mut lo = T::max_value().unwrap_or_else(T::one);
        let mut hi = T::zero();
        for i in 0..=self.dense.n_steps() {
            let y = self.dense.node(i);
            let n = (y[0] * y[0] + y[1] * y[1] + y[2] * y[2] + y[3] * y[3]).sqrt();
            lo = lo.min(n);
            hi = hi.max(n);
        }
        (lo, hi)
    }
}

fn oracle_ode<T: Real>() -> OdeOptions<T> {
    OdeOptions::with_tolerances(lit(1e-12), lit(1e-14))
}

/// Anchor distance: the window half-width, or the box edge for models
/// without one (then `|V′|` must be negligible there).
fn anchor_distance<T: Real>(model: &PotentialModel<T>) -> Result<T> {
    if model.dim() != 1 {
        return Err(Error::domain("the Jost oracle is one-dimensional"));
    }
    match model.window() {
        Some(w) => Ok(w.min(model.box_half_width())),
        None => {
            let b = model.box_half_width();
            for edge in [-b, b] {
                let s = model.evaluate(&[edge])?;
                if s.grad[0].abs() > lit(ANCHOR_SLOPE_TOL) {
                    return Err(Error::domain(
                        "model has no constant tail window and is not flat at the box edge",
                    ));
                }
            }
            Ok(b)
        }
    }
}

/// Decaying solution on `side`, integrated inward up to `reach`.
pub fn decaying_solution_to<T: Real>(
    model: &PotentialModel<T>,
    side: Side,
    h: T,
    reach: T,
) -> Result<JostSolution<T>> {
    if !(h > T::zero()) {
        return Err(Error::domain("h must be positive"));
    }
    let dist = anchor_distance(model)?;
    let anchor = match side {
        Side::Right => dist,
        Side::Left => -dist,
    };
    let e = model.value(&[anchor])?;
    if !(e.abs() > T::zero() && e.abs() < T::one()) {
        return Err(Error::domain("tail value must satisfy 0 < |E| < 1"));
    }
    let kappa = tail_kappa(e);
    let rep = DiracRep::new(1)?;
    let (mu, sign) = match side {
        Side::Right => (-kappa, -T::one()),
        Side::Left => (kappa, T::one()),
    };
    let w = null_vector(&generator(&rep, e), mu);

    // Integrate from the anchor to `reach` unless reach lies in the tail.
    let end = match side {
        Side::Right => reach.min(anchor),
        Side::Left => reach.max(anchor),
    };
    let y0 = vec![w[0].re, w[1].re, w[0].im, w[1].im, kappa * anchor];
    let inv_h = T::one() / h;
    let rhs = |x: T, y: &[T], dy: &mut [T]| -> Result<()> {
        let v = model.value(&[x])?;
        let k = tail_kappa(v);
        let g = generator(&rep, v);
        let z = [cplx(y[0], y[2]), cplx(y[1], y[3])];
        // v′ = (B ∓(−κ))v / h with the gauge shift −ℓ′ = −sign·κ/h.
        let shift = -sign * k;
        for r in 0..2 {
            let mut acc = g[(r, 0)] * z[0] + g[(r, 1)] * z[1];
            acc += z[r] * creal(shift);
            let acc = acc * creal(inv_h);
            dy[r] = acc.re;
            dy[2 + r] = acc.im;
        }
        dy[4] = k;
        Ok(())
    };
    let dense = integrate(rhs, anchor, &y0, end, &oracle_ode())?;
    Ok(JostSolution {
        side,
        anchor,
        h,
        tail_value: e,
        tail_vector: w,
        model: model.clone(),
        rep,
        dense,
    })
}

/// Decaying solution integrated across the whole domain box.
pub fn decaying_solution<T: Real>(model: &PotentialModel<T>, side: Side, h: T) -> Result<JostSolution<T>> {
    let b = model.box_half_width();
    let reach = match side {
        Side::Right => -b,
        Side::Left => b,
    };
    decaying_solution_to(model, side, h, reach)
}

/// `G(x, y)` as `e^{log_scale}·matrix`.
pub fn exact_green_kernel_1d_scaled<T: Real>(
    model: &PotentialModel<T>,
    x: T,
    y: T,
    h: T,
) -> Result<Scaled<T>> {
    if x == y {
        return Err(Error::domain("x and y coincide"));
    }
    model.value(&[x])?;
    model.value(&[y])?;
    let lo = x.min(y);
    let hi = x.max(y);
    let right = decaying_solution_to(model, Side::Right, h, lo)?;
    let left = decaying_solution_to(model, Side::Left, h, hi)?;
    let (vr, lr) = right.value(y)?;
    let (vl, ll) = left.value(y)?;
    let mut n = CMat::<T>::zeros(2, 2);
    n.set_column(0, &vr);
    n.set_column(1, &(-vl));
    let cond = condition_number(&n);
    if !(cond <= lit(MAX_CONDITION)) {
        return Err(Error::IllConditioned { cond: to_f64(cond) });
    }
    let inv = n
        .try_inverse()
        .ok_or(Error::IllConditioned { cond: f64::INFINITY })?;
    let rep = &right.rep;
    let coef = inv * rep.alpha(1) * cplx(T::zero(), T::one() / h);
    if x > y {
        let (vx, lx) = right.value(x)?;
        Ok(Scaled::new(&vx * coef.row(0), lx - lr))
    } else {
        let (vx, lx) = left.value(x)?;
        Ok(Scaled::new(&vx * coef.row(1), lx - ll))
    }
}

pub fn exact_green_kernel_1d<T: Real>(model: &PotentialModel<T>, x: T, y: T, h: T) -> Result<CMat<T>> {
    Ok(exact_green_kernel_1d_scaled(model, x, y, h)?.value())
}

/// Richardson-extrapolated residual of the jump condition
/// `−ihα₁(G(y+ε, y) − G(y−ε, y)) = 𝟙`.
pub fn jump_residual<T: Real>(model: &PotentialModel<T>, y: T, h: T, eps: T) -> Result<T> {
    let rep = DiracRep::<T>::new(1)?;
    let jump = |e: T| -> Result<CMat<T>> {
        let up = exact_green_kernel_1d(model, y + e, y, h)?;
        let dn = exact_green_kernel_1d(model, y - e, y, h)?;
        Ok(rep.alpha(1) * (up - dn) * cplx(T::zero(), -h))
    };
    let j1 = jump(eps)?;
    let j2 = jump(eps * lit(0.5))?;
    let extrap = j2 * creal(lit(2.0)) - j1;
    Ok(max_abs(&(extrap - identity::<T>(2))))
}


#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernel::constant_v_exact;

    fn rel(a: &CMat<f64>, b: &CMat<f64>) -> f64 {
        max_abs(&(a - b)) / max_abs(b)
    }

    #[test]
    fn constant_potential_matches_closed_form() {
        let m = PotentialModel::<f64>::constant(1, -0.6).unwrap();
        let rep = DiracRep::<f64>::new(1).unwrap();
        for h in [0.2, 0.1, 0.05, 0.025] {
            let g = exact_green_kernel_1d(&m, 1.0, 0.0, h).unwrap();
            let c = constant_v_exact(&rep, -0.6, &[1.0], &[0.0], h).unwrap();
            assert!(rel(&g, &c) < 1e-9, "h={h}");
            let g = exact_green_kernel_1d(&m, -0.5, 0.7, h).unwrap();
            let c = constant_v_exact(&rep, -0.6, &[-0.5], &[0.7], h).unwrap();
            assert!(rel(&g, &c) < 1e-9, "h={h}");
        }
    }

    #[test]
    fn constant_tail_formula_is_global() {
        let m = PotentialModel::<f64>::constant(1, -0.6).unwrap();
        let h = 0.1;
        let r = decaying_solution(&m, Side::Right, h).unwrap();
        for x in [-3.0, -0.5, 0.0, 2.0] {
            let (v, l) = r.value(x).unwrap();
            assert!((&v - &r.tail_vector).norm() < 1e-12);
            assert!((l + 0.8 * x / h).abs() < 1e-10);
        }
    }

    #[test]
    fn solution_satisfies_ode_inside_well() {
        let m = PotentialModel::<f64>::bump_well(-0.5, -0.25, vec![0.0], 2.0).unwrap();
        let r = decaying_solution_to(&m, Side::Right, 0.1, -3.0).unwrap();
        for x in [-1.0, -0.3, 0.4, 1.5] {
            let res = r.ode_residual(x, 1e-3).unwrap();
            assert!(res < 1e-10, "x={x} res={res}");
        }
        let (lo, hi) = r.gauge_norm_range();
        assert!(lo > 1e-2 && hi < 1e2);
    }

    #[test]
    fn decay_rate_scales_with_one_over_h() {
        let m = PotentialModel::<f64>::constant(1, -0.6).unwrap();
        let slope = |h: f64| {
            let r = decaying_solution(&m, Side::Right, h).unwrap();
            let (v1, l1) = r.value(1.0).unwrap();
            let (v2, l2) = r.value(1.5).unwrap();
            ((l2 + v2.norm().ln()) - (l1 + v1.norm().ln())) / 0.5
        };
        assert!((slope(0.05) / slope(0.1) - 2.0).abs() < 1e-10);
    }

    #[test]
    fn adjoint_symmetry_and_jump() {
        let m = PotentialModel::<f64>::bump_well(-0.5, -0.25, vec![0.0], 2.0).unwrap();
        let h = 0.1;
        let a = exact_green_kernel_1d(&m, 1.0, -0.6, h).unwrap();
        let b = exact_green_kernel_1d(&m, -0.6, 1.0, h).unwrap();
        assert!(rel(&a.adjoint(), &b) < 1e-8);
        let j = jump_residual(&m, 0.3, h, 1e-4).unwrap();
        assert!(j < 1e-6, "{j}");
    }

    #[test]
    fn windowless_step_uses_box_edge() {
        let m = PotentialModel::<f64>::tanh_step(-0.5, 0.2).unwrap();
        let r = decaying_solution_to(&m, Side::Right, 0.1, 0.0).unwrap();
        assert_eq!(r.anchor, 10.0);
        let g = exact_green_kernel_1d(&m, 1.0, -1.0, 0.1).unwrap();
        assert!(g.iter().all(|z| z.re.is_finite() && z.im.is_finite()));
    }

    #[test]
    fn rejects_multid_models() {
        let m = PotentialModel::<f64>::constant(2, -0.6).unwrap();
        assert!(decaying_solution(&m, Side::Left, 0.1).is_err());
    }
}
