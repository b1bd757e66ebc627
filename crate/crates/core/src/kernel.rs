//! Leading-order Green-kernel asymptotics and the exact constant-potential
//! kernel.

use nalgebra::ComplexField;

use crate::bessel::{bessel_k_prime_scaled, bessel_k_scaled};
use crate::clifford::{projector_imag, DiracRep};
use crate::error::{Error, Result};
use crate::geoflow::{shoot_geodesic, GeodesicSolution, ShootOptions};
use crate::linalg::{fro_inner, fro_norm, CMat};
use crate::potential::PotentialModel;
use crate::scalar::{cplx, creal, lit, to_f64, Cplx, Real};
use crate::transport::{transport_matrix, TransportResult};

/// `e^{log_scale}·matrix`, kept apart so that `e^{−d_A/h}` never
/// under- or overflows.
#[derive(Debug, Clone, PartialEq)]
pub struct Scaled<T: Real> {
    pub matrix: CMat<T>,
    pub log_scale: T,
}

impl<T: Real> Scaled<T> {
    pub fn new(matrix: CMat<T>, log_scale: T) -> Self {
        Scaled { matrix, log_scale }
    }

    pub fn value(&self) -> CMat<T> {
        &self.matrix * creal(self.log_scale.exp())
    }
}

impl<T: Real> From<CMat<T>> for Scaled<T> {
    fn from(matrix: CMat<T>) -> Self {
        Scaled {
            matrix,
            log_scale: T::zero(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct KernelEstimate<T: Real> {
    pub h: T,
    /// Scalar factor `Δ(x★, y★; h) > 0`.
    pub prefactor: T,
    pub log_prefactor: T,
    pub matrix: CMat<T>,
    /// `prefactor · matrix`.
    pub kernel: CMat<T>,
    pub d_a: T,
    pub det_exp_prime: Option<T>,
    pub theta: Option<T>,
}

impl<T: Real> KernelEstimate<T> {
    fn assemble(
        h: T,
        log_prefactor: T,
        matrix: CMat<T>,
        d_a: T,
        det_exp_prime: Option<T>,
        theta: Option<T>,
    ) -> Self {
        let prefactor = log_prefactor.exp();
        let kernel = &matrix * creal(prefactor);
        KernelEstimate {
            h,
            prefactor,
            log_prefactor,
            matrix,
            kernel,
            d_a,
            det_exp_prime,
            theta,
        }
    }

    pub fn scaled(&self) -> Scaled<T> {
        Scaled::new(self.matrix.clone(), self.log_prefactor)
    }

    fn negated(mut self) -> Self {
        self.matrix = -self.matrix;
        self.kernel = -self.kernel;
        self
    }
}

fn check_h<T: Real>(h: T) -> Result<()> {
    if h > T::zero() && h <= T::one() {
        Ok(())
    } else {
        Err(Error::domain(format!("h = {} must lie in (0, 1]", to_f64(h))))
    }
}

/// Leading term for `d ≥ 2`:
/// `h^{−d}(1−V²(x))^{(d−2)/4}(1−V²(y))^{(d−2)/4}(det exp′)^{−1/2}
/// e^{−d_A/h}(2πd_A/h)^{−(d−1)/2}·M`.
pub fn leading_kernel_multid<T: Real>(
    sol: &GeodesicSolution<T>,
    tr: &TransportResult<T>,
    h: T,
) -> Result<KernelEstimate<T>> {
    let d = sol.dim();
    if d < 2 {
        return Err(Error::domain("use leading_kernel_1d in one dimension"));
    }
    check_h(h)?;
    let det = sol.det_exp_prime.unwrap_or(T::zero());
    if sol.conjugate || det <= T::zero() {
        return Err(Error::NearConjugate {
            bordered_det: to_f64(sol.bordered_det),
            threshold: 0.0,
        });
    }
    let vx = sol.model.value(&sol.x_star)?;
    let vy = sol.model.value(&sol.y_star)?;
    let df: T = lit(d as f64);
    let quarter = (df - lit(2.0)) / lit(4.0);
    let log_pref = -df * h.ln()
        + quarter * (T::one() - vx * vx).ln()
        + quarter * (T::one() - vy * vy).ln()
        - det.ln() * lit(0.5)
        - sol.d_a / h
        - (df - T::one()) * lit(0.5) * (T::two_pi() * sol.d_a / h).ln();
    Ok(KernelEstimate::assemble(
        h,
        log_pref,
        tr.m.clone(),
        sol.d_a,
        Some(det),
        None,
    ))
}

/// Leading term for `d = 1`:
/// `h^{−1}e^{−d_A/h}(1−V²(x))^{−1/4}(1−V²(y))^{−1/4}
/// (cos ϑ − i sin ϑ α₁)(−V(y))Λ⁺(iω(0))`.
pub fn leading_kernel_1d<T: Real>(
    sol: &GeodesicSolution<T>,
    tr: &TransportResult<T>,
    rep: &DiracRep<T>,
    h: T,
) -> Result<KernelEstimate<T>> {
    if sol.dim() != 1 || rep.dim() != 1 {
        return Err(Error::domain("leading_kernel_1d needs d = 1"));
    }
    check_h(h)?;
    let theta = tr
        .theta_tau
        .ok_or_else(|| Error::domain("transport result carries no phase"))?;
    let vx = sol.model.value(&sol.x_star)?;
    let vy = sol.model.value(&sol.y_star)?;
    let quarter: T = lit(0.25);
    let log_pref = -h.ln() - sol.d_a / h
        - quarter * (T::one() - vx * vx).ln()
        - quarter * (T::one() - vy * vy).ln();
    let rot = rep.identity() * creal(theta.cos()) - rep.alpha(1) * cplx(T::zero(), theta.sin());
    let proj = projector_imag(rep, &tr.omega0)?.lambda_plus;
    let matrix = rot * proj * creal(-vy);
    Ok(KernelEstimate::assemble(
        h,
        log_pref,
        matrix,
        sol.d_a,
        None,
        Some(theta),
    ))
}

/// Dispatches on the dimension.
pub fn leading_kernel<T: Real>(
    sol: &GeodesicSolution<T>,
    tr: &TransportResult<T>,
    rep: &DiracRep<T>,
    h: T,
) -> Result<KernelEstimate<T>> {
    if sol.dim() == 1 {
        leading_kernel_1d(sol, tr, rep, h)
    } else {
        leading_kernel_multid(sol, tr, h)
    }
}

/// Kernel for a positive potential from a pipeline run on `−V` with the
/// flipped matrices `α̃ = −α`; the result is negated and the scalar factor
/// is reused unchanged.
pub fn positive_potential_kernel<T: Real>(
    sol: &GeodesicSolution<T>,
    tr: &TransportResult<T>,
    flipped_rep: &DiracRep<T>,
    h: T,
) -> Result<KernelEstimate<T>> {
    if !sol.model.is_negated() {
        return Err(Error::domain(
            "the solution must be computed for the negated potential",
        ));
    }
    Ok(leading_kernel(sol, tr, flipped_rep, h)?.negated())
}

/// Full positive-potential pipeline: checks `V > 0` at both ends, then
/// shoots and transports for `−V` with `−α`.
pub fn positive_potential_pipeline<T: Real>(
    model: &PotentialModel<T>,
    y_star: &[T],
    x_star: &[T],
    h: T,
    opts: &ShootOptions<T>,
) -> Result<KernelEstimate<T>> {
    if !(model.value(y_star)? > T::zero() && model.value(x_star)? > T::zero()) {
        return Err(Error::domain("potential must be positive at both endpoints"));
    }
    let neg = model.negated();
    let rep = DiracRep::new(model.dim())?.negated();
    let sol = shoot_geodesic(&neg, y_star, x_star, opts)?;
    let tr = transport_matrix(&sol, &rep)?;
    positive_potential_kernel(&sol, &tr, &rep, h)
}

/// Exact kernel of `α·(−ih∇) + α₀ + E` for constant `E ∈ (−1, 1)` in
/// `d ∈ {1, 2, 3}`, returned as `e^{−κr/h}·matrix`.
pub fn constant_v_exact_scaled<T: Real>(
    rep: &DiracRep<T>,
    e: T,
    x: &[T],
    y: &[T],
    h: T,
) -> Result<Scaled<T>> {
    let d = rep.dim();
    if !(1..=3).contains(&d) {
        return Err(Error::Unsupported(format!(
            "exact constant kernel in dimension {d}"
        )));
    }
    if !(e > -T::one() && e < T::one()) {
        return Err(Error::domain("constant potential must lie in (−1, 1)"));
    }
    if x.len() != d || y.len() != d {
        return Err(Error::domain("point has the wrong dimension"));
    }
    if !(h > T::zero()) {
        return Err(Error::domain("h must be positive"));
    }
    let rv: Vec<T> = x.iter().zip(y).map(|(a, b)| *a - *b).collect();
    let r = rv.iter().fold(T::zero(), |s, v| s + *v * *v).sqrt();
    if r == T::zero() {
        return Err(Error::domain("x and y coincide"));
    }
    let df: T = lit(d as f64);
    let nu = df * lit(0.5);
    let kappa = (T::one() - e * e).sqrt();
    let rho = kappa * r / h;
    let k = bessel_k_scaled(nu, rho)?;
    let kp = bessel_k_prime_scaled(nu, rho)?;
    let pref = (T::one() - e * e).powf(df / lit(4.0))
        * T::two_pi().powf(-nu)
        * h.powf(-df)
        * (r / h).powf(T::one() - nu);
    let rhat: Vec<T> = rv.iter().map(|v| *v / r).collect();
    let a_rhat = rep.alpha_dot_real(&rhat);
    let i = cplx(T::zero(), T::one());
    let first = &a_rhat * (-i * kp);
    let corr = &a_rhat * cplx(T::zero(), h * (nu - T::one()) / r);
    let second = (rep.alpha0() - rep.identity() * creal(e) + corr) * creal(k / kappa);
    Ok(Scaled::new((first + second) * creal(pref), -rho))
}

pub fn constant_v_exact<T: Real>(
    rep: &DiracRep<T>,
    e: T,
    x: &[T],
    y: &[T],
    h: T,
) -> Result<CMat<T>> {
    Ok(constant_v_exact_scaled(rep, e, x, y, h)?.value())
}

#[derive(Debug, Clone, PartialEq)]
pub struct RatioRow<T> {
    pub h: T,
    pub ratio: Cplx<T>,
    pub abs_ratio_minus_1: T,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RatioTable<T> {
    /// Sorted by decreasing `h`.
    pub rows: Vec<RatioRow<T>>,
    /// Least-squares slope of `log|R − 1|` against `log h`; `None` when
    /// fewer than two rows or some `R = 1` exactly.
    pub slope: Option<T>,
}

/// `R(h) = ⟨M, exact(h)⟩_F / ⟨M, asymptotic(h)⟩_F` for every `h`.
pub fn ratio_sweep<T, E, A>(m: &CMat<T>, exact: E, asymptotic: A, h_list: &[T]) -> Result<RatioTable<T>>
where
    T: Real,
    E: Fn(T) -> Result<Scaled<T>>,
    A: Fn(T) -> Result<Scaled<T>>,
{
    if fro_norm(m) < lit(1e-14) {
        return Err(Error::DegenerateProjection(format!(
            "‖M‖_F = {:e}",
            to_f64(fro_norm(m))
        )));
    }
    let mut rows = Vec::with_capacity(h_list.len());
    for &h in h_list {
        let ex = exact(h)?;
        let asy = asymptotic(h)?;
        let den = fro_inner(m, &asy.matrix);
        if den.modulus() == T::zero() {
            return Err(Error::DegenerateProjection(
                "asymptotic kernel is orthogonal to M".into(),
            ));
        }
        let ratio = fro_inner(m, &ex.matrix) / den * creal((ex.log_scale - asy.log_scale).exp());
        rows.push(RatioRow {
            h,
            ratio,
            abs_ratio_minus_1: (ratio - creal(T::one())).modulus(),
        });
    }
    rows.sort_by(|a, b| b.h.partial_cmp(&a.h).unwrap_or(std::cmp::Ordering::Equal));
    let hs: Vec<T> = rows.iter().map(|r| r.h).collect();
    let errs: Vec<T> = rows.iter().map(|r| r.abs_ratio_minus_1).collect();
    Ok(RatioTable {
        slope: loglog_slope(&hs, &errs),
        rows,
    })
}

/// Least-squares slope of `log y` against `log x`.
pub fn loglog_slope<T: Real>(x: &[T], y: &[T]) -> Option<T> {
    if x.len() < 2 || x.len() != y.len() || y.iter().any(|v| *v <= T::zero()) {
        return None;
    }
    let n: T = lit(x.len() as f64);
    let lx: Vec<T> = x.iter().map(|v| v.ln()).collect();
    let ly: Vec<T> = y.iter().map(|v| v.ln()).collect();
    let mx = lx.iter().fold(T::zero(), |s, v| s + *v) / n;
    let my = ly.iter().fold(T::zero(), |s, v| s + *v) / n;
    let mut sxy = T::zero();
    let mut sxx = T::zero();
    for (a, b) in lx.iter().zip(&ly) {
        sxy += (*a - mx) * (*b - my);
        sxx += (*a - mx) * (*a - mx);
    }
    if sxx == T::zero() {
        return None;
    }
    Some(sxy / sxx)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::max_abs;

    fn pipeline(model: &PotentialModel<f64>, y: &[f64], x: &[f64]) -> (DiracRep<f64>, GeodesicSolution<f64>, TransportResult<f64>) {
        let rep = DiracRep::new(model.dim()).unwrap();
        let sol = shoot_geodesic(model, y, x, &ShootOptions::default()).unwrap();
        let tr = transport_matrix(&sol, &rep).unwrap();
        (rep, sol, tr)
    }

    fn rel(a: &CMat<f64>, b: &CMat<f64>) -> f64 {
        max_abs(&(a - b)) / max_abs(b)
    }

    #[test]
    fn one_dimensional_constant_kernel_is_exact() {
        let m = PotentialModel::<f64>::constant(1, -0.6).unwrap();
        let (rep, sol, tr) = pipeline(&m, &[0.0], &[1.0]);
        for h in [0.2, 0.1, 0.05] {
            let k = leading_kernel_1d(&sol, &tr, &rep, h).unwrap();
            let exact = constant_v_exact(&rep, -0.6, &[1.0], &[0.0], h).unwrap();
            assert!(rel(&k.kernel, &exact) < 1e-12, "h={h}");
            let f = (-0.8 / h).exp() / (1.6 * h);
            let want = CMat::from_row_slice(
                2,
                2,
                &[cplx(1.6 * f, 0.0), cplx(0.0, 0.8 * f), cplx(0.0, 0.8 * f), cplx(-0.4 * f, 0.0)],
            );
            assert!(rel(&k.kernel, &want) < 1e-12);
        }
    }

    #[test]
    fn three_dimensional_prefactor_example() {
        let m = PotentialModel::<f64>::constant(3, -0.6).unwrap();
        let (rep, sol, tr) = pipeline(&m, &[0.0; 3], &[1.0, 0.0, 0.0]);
        let h = 0.1;
        let k = leading_kernel_multid(&sol, &tr, h).unwrap();
        let want = h.powi(-3) * 0.8 * (-0.8 / h).exp() / (2.0 * std::f64::consts::PI * 0.8 / h);
        assert!(((k.prefactor - want) / want).abs() < 1e-10);
        let proj = projector_imag(&rep, &[0.8, 0.0, 0.0]).unwrap().lambda_plus * creal(0.6);
        assert!(max_abs(&(&k.matrix - proj)) < 1e-10);
        let lm = projector_imag(&rep, &tr.omega0).unwrap().lambda_minus;
        assert!(max_abs(&(&k.matrix * lm)) < 1e-10);
    }

    #[test]
    fn scale_structure_is_h_independent() {
        let m = PotentialModel::<f64>::bump_well(-0.5, -0.25, vec![0.0, 0.0], 2.0).unwrap();
        let (_, sol, tr) = pipeline(&m, &[-1.0, 0.3], &[1.0, -0.2]);
        let inv = |h: f64| {
            let k = leading_kernel_multid(&sol, &tr, h).unwrap();
            k.log_prefactor + k.d_a / h + 2.0 * h.ln() + 0.5 * (2.0 * std::f64::consts::PI * k.d_a / h).ln()
        };
        let base = inv(0.2);
        for h in [0.1, 0.05, 0.025] {
            assert!((inv(h) - base).abs() < 1e-12);
        }
    }

    #[test]
    fn exact_kernel_is_hermitian_symmetric() {
        for d in 1..=3 {
            let rep = DiracRep::<f64>::new(d).unwrap();
            let x: Vec<f64> = (0..d).map(|i| 0.3 + 0.2 * i as f64).collect();
            let y: Vec<f64> = (0..d).map(|i| -0.4 * i as f64).collect();
            let a = constant_v_exact(&rep, -0.6, &x, &y, 0.1).unwrap();
            let b = constant_v_exact(&rep, -0.6, &y, &x, 0.1).unwrap();
            assert!(rel(&a.adjoint(), &b) < 1e-13, "d={d}");
        }
    }

    #[test]
    fn identical_sources_give_unit_ratio() {
        let rep = DiracRep::<f64>::new(3).unwrap();
        let m = projector_imag(&rep, &[0.8, 0.0, 0.0]).unwrap().lambda_plus;
        let src = |h: f64| constant_v_exact_scaled(&rep, -0.6, &[1.0, 0.0, 0.0], &[0.0; 3], h);
        let t = ratio_sweep(&m, src, src, &[0.1, 0.2]).unwrap();
        assert_eq!(t.rows[0].h, 0.2);
        assert!(t.rows.iter().all(|r| r.abs_ratio_minus_1 < 1e-15));
        assert!(t.slope.is_none());
        let zero = CMat::<f64>::zeros(4, 4);
        assert!(matches!(
            ratio_sweep(&zero, src, src, &[0.1]),
            Err(Error::DegenerateProjection(_))
        ));
    }

    #[test]
    fn positive_potential_matches_closed_form() {
        let m = PotentialModel::<f64>::constant(1, 0.6).unwrap();
        let h = 0.1;
        let k = positive_potential_pipeline(&m, &[0.0], &[1.0], h, &ShootOptions::default()).unwrap();
        let f = (-0.8 / h).exp() / (1.6 * h);
        let want = CMat::from_row_slice(
            2,
            2,
            &[cplx(0.4 * f, 0.0), cplx(0.0, 0.8 * f), cplx(0.0, 0.8 * f), cplx(-1.6 * f, 0.0)],
        );
        assert!(rel(&k.kernel, &want) < 1e-12, "{}", k.kernel);
        assert!(positive_potential_pipeline(&PotentialModel::constant(1, -0.6).unwrap(), &[0.0], &[1.0], h, &ShootOptions::default()).is_err());
    }

    #[test]
    fn refuses_bad_h_and_wrong_dimension() {
        let m = PotentialModel::<f64>::constant(2, -0.6).unwrap();
        let (rep, sol, tr) = pipeline(&m, &[0.0, 0.0], &[1.0, 0.0]);
        assert!(leading_kernel_multid(&sol, &tr, 1.5).is_err());
        assert!(leading_kernel_1d(&sol, &tr, &rep, 0.1).is_err());
    }

    #[test]
    fn slope_of_power_law() {
        let h = [0.2, 0.1, 0.05];
        let y: Vec<f64> = h.iter().map(|v| 3.0 * v * v).collect();
        assert!((loglog_slope(&h, &y).unwrap() - 2.0).abs() < 1e-12);
    }
}
