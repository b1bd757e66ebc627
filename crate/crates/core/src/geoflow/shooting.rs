use crate::error::{Error, Result};
use crate::linalg::{real_det, RMat, RVec};
use crate::ode::OdeOptions;
use crate::potential::PotentialModel;
use crate::quad;
use crate::scalar::{lit, to_f64, Real};

use super::flow::{integrate_hamiltonian, Trajectory};
use super::{norm, norm_sq};

/// Controls for [`shoot_geodesic`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ShootOptions<T> {
    /// Absolute tolerance on `|γ(τ) − x★|`.
    pub newton_tol: T,
    pub max_iter: usize,
    /// Number of initial directions; `None` picks the dimension default
    /// (1, 8, 26, 2d for d = 1, 2, 3, ≥ 4).
    pub multistart: Option<usize>,
    /// Conjugacy is flagged when `|bordered_det| < factor·d_A^{d−1}`.
    pub conjugacy_factor: T,
    /// Converged solutions closer than this (in `(p₀, τ)`) are merged.
    pub merge_tol: T,
    pub ode: OdeOptions<T>,
}

impl<T: Real> Default for ShootOptions<T> {
    fn default() -> Self {
        ShootOptions {
            newton_tol: lit(1e-11),
            max_iter: 50,
            multistart: None,
            conjugacy_factor: lit(1e-8),
            merge_tol: lit(1e-6),
            ode: OdeOptions::default(),
        }
    }
}

/// One converged shooting solution.
#[derive(Debug, Clone, PartialEq)]
pub struct Candidate<T> {
    pub p0: Vec<T>,
    pub tau: T,
    pub d_a: T,
    pub residual: T,
    pub iterations: usize,
}

/// Summary of the multistart search.
#[derive(Debug, Clone, PartialEq)]
pub struct UniquenessReport<T> {
    pub starts: usize,
    pub converged: usize,
    /// Distinct solutions sorted by increasing `d_A`.
    pub distinct: Vec<Candidate<T>>,
    pub warning: Option<String>,
}

impl<T> UniquenessReport<T> {
    pub fn is_unique(&self) -> bool {
        self.distinct.len() == 1
    }
}

#[derive(Debug, Clone)]
pub struct GeodesicSolution<T: Real> {
    pub model: PotentialModel<T>,
    pub y_star: Vec<T>,
    pub x_star: Vec<T>,
    pub trajectory: Trajectory<T>,
    pub tau: T,
    pub p0: Vec<T>,
    pub d_a: T,
    /// `|γ(τ) − x★|`.
    pub residual: T,
    pub bordered_det: T,
    /// `None` in one dimension.
    pub det_exp_prime: Option<T>,
    pub conjugate: bool,
    pub uniqueness: UniquenessReport<T>,
}

impl<T: Real> GeodesicSolution<T> {
    pub fn dim(&self) -> usize {
        self.y_star.len()
    }

    /// `ω(0)`.
    pub fn omega0(&self) -> &[T] {
        &self.trajectory.start().p
    }

    /// `ω(τ)`.
    pub fn omega_tau(&self) -> &[T] {
        &self.trajectory.end().p
    }
}

/// Orthonormal basis of the complement of the unit vector `c`.
fn complement<T: Real>(c: &[T]) -> Vec<Vec<T>> {
    let d = c.len();
    let mut basis: Vec<Vec<T>> = vec![c.to_vec()];
    let mut axes: Vec<usize> = (0..d).collect();
    // Axes least aligned with c first, for a well-conditioned sweep.
    axes.sort_by(|a, b| {
        c[*a].abs()
            .partial_cmp(&c[*b].abs())
            .unwrap_or(std::cmp::Ordering::Equal)
    });
    for k in axes {
        if basis.len() == d {
            break;
        }
        let mut v = vec![T::zero(); d];
        v[k] = T::one();
        for b in &basis {
            let dot = dot(&v, b);
            v.iter_mut().zip(b).for_each(|(vi, bi)| *vi -= dot * *bi);
        }
        let n = norm(&v);
        if n > lit(1e-8) {
            v.iter_mut().for_each(|vi| *vi /= n);
            basis.push(v);
        }
    }
    basis.remove(0);
    basis
}

fn dot<T: Real>(a: &[T], b: &[T]) -> T {
    a.iter().zip(b).fold(T::zero(), |acc, (x, y)| acc + *x * *y)
}

/// Inverse stereographic chart around `c`: `w ↦ ((1−|w|²)c + 2Σwᵢgᵢ)/(1+|w|²)`.
fn chart<T: Real>(c: &[T], frame: &[Vec<T>], w: &[T]) -> Vec<T> {
    let w2 = norm_sq(w);
    let two: T = lit(2.0);
    let mut u: Vec<T> = c.iter().map(|ci| (T::one() - w2) * *ci).collect();
    for (wi, g) in w.iter().zip(frame) {
        u.iter_mut().zip(g).for_each(|(ui, gi)| *ui += two * *wi * *gi);
    }
    let scale = T::one() + w2;
    let mut u: Vec<T> = u.into_iter().map(|ui| ui / scale).collect();
    let n = norm(&u);
    u.iter_mut().for_each(|ui| *ui /= n);
    u
}

/// Initial directions expressed in the frame `(e, f₁, …)`.
fn start_directions<T: Real>(e: &[T], frame: &[Vec<T>], count: usize) -> Vec<Vec<T>> {
    let d = e.len();
    let combine = |coef: &[f64]| -> Vec<T> {
        let mut u: Vec<T> = e.iter().map(|x| *x * lit(coef[0])).collect();
        for (k, f) in frame.iter().enumerate() {
            u.iter_mut()
                .zip(f)
                .for_each(|(ui, fi)| *ui += *fi * lit(coef[k + 1]));
        }
        let n = norm(&u);
        u.into_iter().map(|x| x / n).collect()
    };
    let mut coefs: Vec<Vec<f64>> = Vec::new();
    match d {
        1 => coefs.push(vec![1.0]),
        2 => {
            for k in 0..count {
                let a = 2.0 * std::f64::consts::PI * k as f64 / count as f64;
                coefs.push(vec![a.cos(), a.sin()]);
            }
        }
        3 if count == 26 => {
            for a in [1.0, 0.0, -1.0] {
                for b in [0.0, 1.0, -1.0] {
                    for c in [0.0, 1.0, -1.0] {
                        if a != 0.0 || b != 0.0 || c != 0.0 {
                            coefs.push(vec![a, b, c]);
                        }
                    }
                }
            }
        }
        3 => {
            // Fibonacci sphere, starting at e.
            coefs.push(vec![1.0, 0.0, 0.0]);
            let n = count.saturating_sub(1).max(1) as f64;
            let golden = std::f64::consts::PI * (3.0 - 5f64.sqrt());
            for k in 1..count {
                let z = 1.0 - 2.0 * (k as f64 - 0.5) / n;
                let r = (1.0 - z * z).max(0.0).sqrt();
                let phi = golden * k as f64;
                coefs.push(vec![z, r * phi.cos(), r * phi.sin()]);
            }
        }
        _ => {
            for k in 0..d {
                for s in [1.0, -1.0] {
                    let mut c = vec![0.0; d];
                    c[k] = s;
                    coefs.push(c);
                }
            }
        }
    }
    coefs.truncate(count.max(1));
    coefs.iter().map(|c| combine(c)).collect()
}

fn default_multistart(d: usize) -> usize {
    match d {
        1 => 1,
        2 => 8,
        3 => 26,
        _ => 2 * d,
    }
}

struct Iterate<T: Real> {
    u: Vec<T>,
    tau: T,
    traj: Trajectory<T>,
    residual: T,
}

fn evaluate_iterate<T: Real>(
    model: &PotentialModel<T>,
    y: &[T],
    x: &[T],
    rho: T,
    u: Vec<T>,
    tau: T,
    ode: &OdeOptions<T>,
) -> Result<Iterate<T>> {
    let p0: Vec<T> = u.iter().map(|ui| rho * *ui).collect();
    let traj = integrate_hamiltonian(model, y, &p0, tau, true, ode)?;
    let f: Vec<T> = traj.end().x.iter().zip(x).map(|(a, b)| *a - *b).collect();
    let residual = norm(&f);
    Ok(Iterate {
        u,
        tau,
        traj,
        residual,
    })
}

/// Damped Newton from one initial direction.
fn newton<T: Real>(
    model: &PotentialModel<T>,
    y: &[T],
    x: &[T],
    u0: Vec<T>,
    tau0: T,
    opts: &ShootOptions<T>,
) -> Result<(Iterate<T>, usize)> {
    let d = y.len();
    let rho = {
        let v = model.value(y)?;
        (T::one() - v * v).sqrt()
    };
    let mut it = evaluate_iterate(model, y, x, rho, u0, tau0, &opts.ode)?;
    for iter in 0..opts.max_iter {
        if it.residual <= opts.newton_tol {
            return Ok((it, iter));
        }
        let frame = complement(&it.u);
        let dpx = it.traj.dpx_end().expect("variational flow");
        let two: T = lit(2.0);
        let mut jac = RMat::<T>::zeros(d, d);
        for (k, g) in frame.iter().enumerate() {
            let col = dpx * RVec::from_column_slice(g) * (two * rho);
            jac.set_column(k, &col);
        }
        jac.set_column(d - 1, &RVec::from_column_slice(it.traj.velocity_end()));
        let f = RVec::from_iterator(
            d,
            it.traj.end().x.iter().zip(x).map(|(a, b)| *b - *a),
        );
        let step = jac
            .lu()
            .solve(&f)
            .ok_or_else(|| Error::Shooting("singular shooting Jacobian".into()))?;

        let mut lambda = T::one();
        let mut accepted = None;
        for _ in 0..30 {
            let w: Vec<T> = (0..d - 1).map(|k| step[k] * lambda).collect();
            let tau = it.tau + step[d - 1] * lambda;
            if tau > T::zero() {
                let u = chart(&it.u, &frame, &w);
                if let Ok(cand) = evaluate_iterate(model, y, x, rho, u, tau, &opts.ode) {
                    let sufficient = T::one() - lit::<T>(1e-4) * lambda;
                    if cand.residual < sufficient * it.residual
                        || cand.residual <= opts.newton_tol
                    {
                        accepted = Some(cand);
                        break;
                    }
                }
            }
            lambda *= lit(0.5);
        }
        match accepted {
            Some(next) => it = next,
            None if it.residual <= opts.newton_tol * lit(10.0) => return Ok((it, iter)),
            None => {
                return Err(Error::Shooting(format!(
                    "line search failed at residual {:e}",
                    to_f64(it.residual)
                )))
            }
        }
    }
    if it.residual <= opts.newton_tol {
        let n = opts.max_iter;
        return Ok((it, n));
    }
    Err(Error::Shooting(format!(
        "no convergence in {} iterations (residual {:e})",
        opts.max_iter,
        to_f64(it.residual)
    )))
}

/// Determinant of `[[0, −v_yᵀ], [v_x, d_pX(τ)]]`.
pub fn bordered_determinant<T: Real>(traj: &Trajectory<T>) -> T {
    let d = traj.dim();
    let dpx = traj.dpx_end().expect("trajectory carries variations");
    let mut m = RMat::<T>::zeros(d + 1, d + 1);
    for i in 0..d {
        m[(0, i + 1)] = -traj.velocity_start()[i];
        m[(i + 1, 0)] = traj.velocity_end()[i];
        for j in 0..d {
            m[(i + 1, j + 1)] = dpx[(i, j)];
        }
    }
    real_det(&m)
}

/// `det exp′` from the bordered determinant:
/// `bd·|V(x)||V(y)|(1−V²(x))^{(d−2)/2}(1−V²(y))^{(d−2)/2}/d_A^{d−1}`.
pub fn det_exp_prime<T: Real>(model: &PotentialModel<T>, traj: &Trajectory<T>) -> Result<T> {
    let d = traj.dim();
    if d < 2 {
        return Err(Error::Unsupported(
            "the exponential-map determinant is only defined for d ≥ 2".into(),
        ));
    }
    let vy = model.value(&traj.start().x)?;
    let vx = model.value(&traj.end().x)?;
    let d_a = traj.action();
    let e: T = lit((d as f64 - 2.0) / 2.0);
    let bd = bordered_determinant(traj);
    Ok(bd * vx.abs() * vy.abs() * (T::one() - vx * vx).powf(e) * (T::one() - vy * vy).powf(e)
        / d_a.powi(d as i32 - 1))
}

/// Agmon distance as the action `∫⟨ω, γ̇⟩ dt` of the solution.
pub fn agmon_distance<T: Real>(sol: &GeodesicSolution<T>) -> T {
    sol.trajectory.action()
}

/// `|∫_y^x √(1 − V²(s)) ds|` by adaptive quadrature (d = 1).
pub fn agmon_distance_1d_quadrature<T: Real>(model: &PotentialModel<T>, y: T, x: T) -> Result<T> {
    if model.dim() != 1 {
        return Err(Error::domain("quadrature distance is one-dimensional"));
    }
    model.value(&[y])?;
    model.value(&[x])?;
    let (val, _) = quad::integrate(
        |s: T| {
            let v = model.value(&[s]).unwrap_or(T::zero());
            (T::one() - v * v).sqrt()
        },
        y,
        x,
        lit(1e-14),
        lit(1e-13),
    );
    Ok(val.abs())
}

/// Solves the two-point problem without rejecting conjugate endpoints.
pub fn shoot_geodesic_unchecked<T: Real>(
    model: &PotentialModel<T>,
    y_star: &[T],
    x_star: &[T],
    opts: &ShootOptions<T>,
) -> Result<GeodesicSolution<T>> {
    let d = model.dim();
    if y_star.len() != d || x_star.len() != d {
        return Err(Error::domain("endpoint has the wrong dimension"));
    }
    let diff: Vec<T> = x_star.iter().zip(y_star).map(|(a, b)| *a - *b).collect();
    let r = norm(&diff);
    if r == T::zero() {
        return Err(Error::domain("endpoints coincide"));
    }
    model.value(y_star)?;
    model.value(x_star)?;
    let e: Vec<T> = diff.iter().map(|v| *v / r).collect();
    let mid: Vec<T> = x_star
        .iter()
        .zip(y_star)
        .map(|(a, b)| (*a + *b) * lit(0.5))
        .collect();
    let vm = model.value(&mid)?;
    let tau0 = -vm * r / (T::one() - vm * vm).sqrt();

    let count = opts.multistart.unwrap_or_else(|| default_multistart(d)).max(1);
    let frame = complement(&e);
    let starts = start_directions(&e, &frame, count);

    let mut found: Vec<(Candidate<T>, Trajectory<T>)> = Vec::new();
    let mut converged = 0;
    let mut last_err = None;
    for u0 in &starts {
        match newton(model, y_star, x_star, u0.clone(), tau0, opts) {
            Ok((it, iterations)) => {
                converged += 1;
                let p0 = it.traj.start().p.clone();
                let cand = Candidate {
                    p0,
                    tau: it.tau,
                    d_a: it.traj.action(),
                    residual: it.residual,
                    iterations,
                };
                let dup = found.iter().any(|(c, _)| {
                    let dp = c
                        .p0
                        .iter()
                        .zip(&cand.p0)
                        .fold(T::zero(), |m, (a, b)| m.max((*a - *b).abs()));
                    dp.max((c.tau - cand.tau).abs()) <= opts.merge_tol
                });
                if !dup {
                    found.push((cand, it.traj));
                }
            }
            Err(err) => last_err = Some(err),
        }
    }
    if found.is_empty() {
        return Err(match last_err {
            Some(Error::Shooting(msg)) => Error::Shooting(msg),
            Some(other) => Error::Shooting(other.to_string()),
            None => Error::Shooting("no start converged".into()),
        });
    }
    found.sort_by(|a, b| {
        a.0.d_a
            .partial_cmp(&b.0.d_a)
            .unwrap_or(std::cmp::Ordering::Equal)
    });
    let warning = (found.len() > 1).then(|| {
        format!(
            "{} distinct geodesics connect the endpoints; the minimizer is not unique in the search",
            found.len()
        )
    });
    let distinct: Vec<Candidate<T>> = found.iter().map(|(c, _)| c.clone()).collect();
    let (best, trajectory) = found.swap_remove(0);

    let bordered_det = bordered_determinant(&trajectory);
    let det_exp_prime = if d >= 2 {
        Some(det_exp_prime(model, &trajectory)?)
    } else {
        None
    };
    let threshold = opts.conjugacy_factor * best.d_a.powi(d as i32 - 1);
    let conjugate = bordered_det.abs() < threshold
        || det_exp_prime.map(|v| v <= T::zero()).unwrap_or(false);

    Ok(GeodesicSolution {
        model: model.clone(),
        y_star: y_star.to_vec(),
        x_star: x_star.to_vec(),
        tau: best.tau,
        p0: best.p0.clone(),
        d_a: best.d_a,
        residual: best.residual,
        trajectory,
        bordered_det,
        det_exp_prime,
        conjugate,
        uniqueness: UniquenessReport {
            starts: starts.len(),
            converged,
            distinct,
            warning,
        },
    })
}

/// Solves `X(τ, y★, p₀) = x★` with `H(y★, p₀) = 0` by multistart Newton and
/// returns the minimizing solution.
///
/// Fails with [`Error::NearConjugate`] when the endpoints are (nearly)
/// conjugate along it.
pub fn shoot_geodesic<T: Real>(
    model: &PotentialModel<T>,
    y_star: &[T],
    x_star: &[T],
    opts: &ShootOptions<T>,
) -> Result<GeodesicSolution<T>> {
    let sol = shoot_geodesic_unchecked(model, y_star, x_star, opts)?;
    if sol.conjugate {
        let d = sol.dim();
        return Err(Error::NearConjugate {
            bordered_det: to_f64(sol.bordered_det),
            threshold: to_f64(opts.conjugacy_factor * sol.d_a.powi(d as i32 - 1)),
        });
    }
    Ok(sol)
}
