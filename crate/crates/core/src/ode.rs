//! Adaptive Dormand–Prince 5(4) integrator with continuous (dense) output.
//!
//! Step-size control follows Hairer, Nørsett & Wanner (PI controller,
//! FSAL). The dense output is the standard fourth-order continuous
//! extension, so a finished [`DenseSolution`] can be evaluated anywhere in
//! the integration interval.

use crate::error::{Error, Result};
use crate::scalar::{lit, to_f64, Real};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OdeOptions<T> {
    pub rel_tol: T,
    pub abs_tol: T,
    /// Upper bound on |step|; `None` means the whole interval.
    pub max_step: Option<T>,
    pub max_steps: usize,
}

impl<T: Real> Default for OdeOptions<T> {
    fn default() -> Self {
        OdeOptions {
            rel_tol: lit(1e-10),
            abs_tol: lit(1e-12),
            max_step: None,
            max_steps: 200_000,
        }
    }
}

impl<T: Real> OdeOptions<T> {
    pub fn with_tolerances(rel_tol: T, abs_tol: T) -> Self {
        OdeOptions {
            rel_tol,
            abs_tol,
            ..Default::default()
        }
    }
}

// Butcher tableau.
const C2: f64 = 1.0 / 5.0;
const C3: f64 = 3.0 / 10.0;
const C4: f64 = 4.0 / 5.0;
const C5: f64 = 8.0 / 9.0;
const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const A71: f64 = 35.0 / 384.0;
const A73: f64 = 500.0 / 1113.0;
const A74: f64 = 125.0 / 192.0;
const A75: f64 = -2187.0 / 6784.0;
const A76: f64 = 11.0 / 84.0;
// Error coefficients (5th minus embedded 4th order weights).
const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;
// Dense output.
const D1: f64 = -12715105075.0 / 11282082432.0;
const D3: f64 = 87487479700.0 / 32700410799.0;
const D4: f64 = -10690763975.0 / 1880347072.0;
const D5: f64 = 701980252875.0 / 199316789632.0;
const D6: f64 = -1453857185.0 / 822651844.0;
const D7: f64 = 69997945.0 / 29380423.0;

#[derive(Debug, Clone)]
struct DenseStep<T> {
    t0: T,
    h: T,
    /// Five blocks of `dim` coefficients.
    coeffs: Vec<T>,
}

/// Accepted steps of an integration together with their interpolants.
#[derive(Debug, Clone)]
pub struct DenseSolution<T> {
    dim: usize,
    t_start: T,
    t_end: T,
    y_start: Vec<T>,
    y_end: Vec<T>,
    steps: Vec<DenseStep<T>>,
    rhs_evals: usize,
}

impl<T: Real> DenseSolution<T> {
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn t_start(&self) -> T {
        self.t_start
    }

    pub fn t_end(&self) -> T {
        self.t_end
    }

    pub fn y_end(&self) -> &[T] {
        &self.y_end
    }

    pub fn y_start(&self) -> &[T] {
        &self.y_start
    }

    pub fn n_steps(&self) -> usize {
        self.steps.len()
    }

    pub fn rhs_evals(&self) -> usize {
        self.rhs_evals
    }

    /// Mesh points `t_start = t_0, …, t_N = t_end`.
    pub fn mesh(&self) -> Vec<T> {
        let mut out: Vec<T> = self.steps.iter().map(|s| s.t0).collect();
        out.push(self.t_end);
        out
    }

    /// State at mesh point `i` (exact step values, not interpolated).
    pub fn node(&self, i: usize) -> Vec<T> {
        if i == self.steps.len() {
            return self.y_end.clone();
        }
        self.steps[i].coeffs[..self.dim].to_vec()
    }

    /// Dense evaluation; `t` is clamped to the integration interval.
    pub fn eval(&self, t: T) -> Vec<T> {
        let mut out = vec![T::zero(); self.dim];
        self.eval_into(t, &mut out);
        out
    }

    pub fn eval_into(&self, t: T, out: &mut [T]) {
        if self.steps.is_empty() {
            out.copy_from_slice(&self.y_start);
            return;
        }
        let forward = self.t_end >= self.t_start;
        // Locate the step containing t (steps are ordered along the direction).
        let idx = self
            .steps
            .partition_point(|s| if forward { s.t0 <= t } else { s.t0 >= t })
            .saturating_sub(1);
        let step = &self.steps[idx];
        let theta = ((t - step.t0) / step.h).max(T::zero()).min(T::one());
        let theta1 = T::one() - theta;
        let n = self.dim;
        let c = &step.coeffs;
        for i in 0..n {
            out[i] = c[i]
                + theta
                    * (c[n + i]
                        + theta1 * (c[2 * n + i] + theta * (c[3 * n + i] + theta1 * c[4 * n + i])));
        }
    }
}

fn err_norm<T: Real>(err: &[T], y0: &[T], y1: &[T], opts: &OdeOptions<T>) -> T {
    let n = err.len();
    let mut acc = T::zero();
    for i in 0..n {
        let sc = opts.abs_tol + opts.rel_tol * y0[i].abs().max(y1[i].abs());
        let r = err[i] / sc;
        acc += r * r;
    }
    (acc / lit::<T>(n as f64)).sqrt()
}

/// Integrates `y' = f(t, y)` from `t0` to `t1` (either direction).
///
/// The right-hand side may fail; a failure inside a trial step shrinks the
/// step, and a failure that persists down to the minimal step size is
/// reported as [`Error::Integration`].
pub fn integrate<T, F>(
    mut f: F,
    t0: T,
    y0: &[T],
    t1: T,
    opts: &OdeOptions<T>,
) -> Result<DenseSolution<T>>
where
    T: Real,
    F: FnMut(T, &[T], &mut [T]) -> Result<()>,
{
    let n = y0.len();
    let mut sol = DenseSolution {
        dim: n,
        t_start: t0,
        t_end: t1,
        y_start: y0.to_vec(),
        y_end: y0.to_vec(),
        steps: Vec::new(),
        rhs_evals: 0,
    };
    if t1 == t0 {
        return Ok(sol);
    }
    let dir = if t1 > t0 { T::one() } else { -T::one() };
    let span = (t1 - t0).abs();
    let hmax = opts.max_step.map(|m| m.min(span)).unwrap_or(span);
    let fail = |t: T, reason: String| Error::Integration {
        t: to_f64(t),
        reason,
    };

    let mut t = t0;
    let mut y = y0.to_vec();
    let mut k1 = vec![T::zero(); n];
    f(t, &y, &mut k1).map_err(|e| fail(t, e.to_string()))?;
    sol.rhs_evals += 1;

    let mut h = initial_step(&mut f, t, &y, &k1, dir, hmax, opts);
    let (mut k2, mut k3, mut k4, mut k5, mut k6, mut k7) = (
        vec![T::zero(); n],
        vec![T::zero(); n],
        vec![T::zero(); n],
        vec![T::zero(); n],
        vec![T::zero(); n],
        vec![T::zero(); n],
    );
    let mut ytmp = vec![T::zero(); n];
    let mut ynew = vec![T::zero(); n];
    let mut err = vec![T::zero(); n];

    let safety: T = lit(0.9);
    let fac_min: T = lit(0.2);
    let fac_max: T = lit(10.0);
    let beta: T = lit(0.04);
    let expo: T = lit::<T>(0.2) - beta * lit::<T>(0.75);
    let mut err_old: T = lit(1e-4);
    let mut last_rejected = false;
    let h_floor = lit::<T>(1e-14) * (t0.abs().max(t1.abs()).max(T::one()));

    loop {
        if sol.steps.len() >= opts.max_steps {
            return Err(fail(t, format!("exceeded {} steps", opts.max_steps)));
        }
        let remaining = (t1 - t).abs();
        let mut last = false;
        if h.abs() >= remaining {
            h = dir * remaining;
            last = true;
        }
        if h.abs() < h_floor {
            return Err(fail(t, "step size underflow".into()));
        }

        macro_rules! stage {
            ($out:expr, $c:expr, [$(($a:expr, $k:expr)),*]) => {{
                for i in 0..n {
                    ytmp[i] = y[i] $(+ h * lit::<T>($a) * $k[i])*;
                }
                f(t + lit::<T>($c) * h, &ytmp, &mut $out)
            }};
        }

        let trial: Result<()> = (|| {
            stage!(k2, C2, [(A21, k1)])?;
            stage!(k3, C3, [(A31, k1), (A32, k2)])?;
            stage!(k4, C4, [(A41, k1), (A42, k2), (A43, k3)])?;
            stage!(k5, C5, [(A51, k1), (A52, k2), (A53, k3), (A54, k4)])?;
            stage!(k6, 1.0, [(A61, k1), (A62, k2), (A63, k3), (A64, k4), (A65, k5)])?;
            for i in 0..n {
                ynew[i] = y[i]
                    + h * (lit::<T>(A71) * k1[i]
                        + lit::<T>(A73) * k3[i]
                        + lit::<T>(A74) * k4[i]
                        + lit::<T>(A75) * k5[i]
                        + lit::<T>(A76) * k6[i]);
            }
            f(t + h, &ynew, &mut k7)
        })();
        sol.rhs_evals += 6;

        if let Err(e) = trial {
            // Trial stage left the admissible region: shrink and retry.
            h = h * lit(0.25);
            last_rejected = true;
            if h.abs() < h_floor {
                return Err(fail(t, e.to_string()));
            }
            continue;
        }

        for i in 0..n {
            err[i] = h
                * (lit::<T>(E1) * k1[i]
                    + lit::<T>(E3) * k3[i]
                    + lit::<T>(E4) * k4[i]
                    + lit::<T>(E5) * k5[i]
                    + lit::<T>(E6) * k6[i]
                    + lit::<T>(E7) * k7[i]);
        }
        let en = err_norm(&err, &y, &ynew, opts);
        if !en.is_finite() {
            h = h * lit(0.25);
            last_rejected = true;
            continue;
        }

        if en <= T::one() {
            // Accept: build the continuous extension.
            let mut coeffs = vec![T::zero(); 5 * n];
            for i in 0..n {
                let ydiff = ynew[i] - y[i];
                let bspl = h * k1[i] - ydiff;
                coeffs[i] = y[i];
                coeffs[n + i] = ydiff;
                coeffs[2 * n + i] = bspl;
                coeffs[3 * n + i] = ydiff - h * k7[i] - bspl;
                coeffs[4 * n + i] = h
                    * (lit::<T>(D1) * k1[i]
                        + lit::<T>(D3) * k3[i]
                        + lit::<T>(D4) * k4[i]
                        + lit::<T>(D5) * k5[i]
                        + lit::<T>(D6) * k6[i]
                        + lit::<T>(D7) * k7[i]);
            }
            sol.steps.push(DenseStep { t0: t, h, coeffs });
            t = if last { t1 } else { t + h };
            std::mem::swap(&mut y, &mut ynew);
            std::mem::swap(&mut k1, &mut k7);
            if last {
                break;
            }
            let en_c = en.max(lit(1e-10));
            let mut fac = safety * en_c.powf(-expo) * err_old.powf(beta);
            fac = fac.max(fac_min).min(fac_max);
            if last_rejected {
                fac = fac.min(T::one());
            }
            err_old = en_c;
            h = dir * (h.abs() * fac).min(hmax);
            last_rejected = false;
        } else {
            let fac = (safety * en.powf(-lit::<T>(0.2))).max(fac_min);
            h = h * fac;
            last_rejected = true;
        }
    }
    sol.y_end = y;
    Ok(sol)
}

fn initial_step<T, F>(
    f: &mut F,
    t0: T,
    y0: &[T],
    f0: &[T],
    dir: T,
    hmax: T,
    opts: &OdeOptions<T>,
) -> T
where
    T: Real,
    F: FnMut(T, &[T], &mut [T]) -> Result<()>,
{
    let n = y0.len();
    let sc: Vec<T> = y0
        .iter()
        .map(|v| opts.abs_tol + opts.rel_tol * v.abs())
        .collect();
    let rms = |v: &[T]| -> T {
        let s = v
            .iter()
            .zip(&sc)
            .fold(T::zero(), |acc, (x, s)| acc + (*x / *s) * (*x / *s));
        (s / lit::<T>(n as f64)).sqrt()
    };
    let d0 = rms(y0);
    let d1 = rms(f0);
    let tiny: T = lit(1e-5);
    let mut h0 = if d0 < tiny || d1 < tiny {
        lit(1e-6)
    } else {
        lit::<T>(0.01) * d0 / d1
    };
    h0 = h0.min(hmax);
    let y1: Vec<T> = y0
        .iter()
        .zip(f0)
        .map(|(y, k)| *y + dir * h0 * *k)
        .collect();
    let mut f1 = vec![T::zero(); n];
    if f(t0 + dir * h0, &y1, &mut f1).is_err() {
        return dir * h0;
    }
    let diff: Vec<T> = f1.iter().zip(f0).map(|(a, b)| *a - *b).collect();
    let d2 = rms(&diff) / h0;
    let dm = d1.max(d2);
    let h1 = if dm <= lit(1e-15) {
        (h0 * lit(1e-3)).max(lit(1e-6))
    } else {
        (lit::<T>(0.01) / dm).powf(lit(0.2))
    };
    dir * (h0 * lit(100.0)).min(h1).min(hmax)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn harmonic_oscillator_matches_closed_form() {
        let opts = OdeOptions::<f64>::with_tolerances(1e-12, 1e-14);
        let sol = integrate(
            |_t, y, dy| {
                dy[0] = y[1];
                dy[1] = -y[0];
                Ok(())
            },
            0.0,
            &[1.0, 0.0],
            10.0,
            &opts,
        )
        .unwrap();
        let y = sol.y_end();
        assert!((y[0] - 10f64.cos()).abs() < 1e-10);
        assert!((y[1] + 10f64.sin()).abs() < 1e-10);
        // Dense output between mesh points.
        for &t in &[0.123, 3.3, 7.77, 9.999] {
            let v = sol.eval(t);
            assert!((v[0] - f64::cos(t)).abs() < 1e-9, "t={t}");
        }
    }

    #[test]
    fn backward_integration() {
        let opts = OdeOptions::<f64>::default();
        let sol = integrate(
            |_t, y, dy| {
                dy[0] = -2.0 * y[0];
                Ok(())
            },
            1.0,
            &[1.0],
            0.0,
            &opts,
        )
        .unwrap();
        assert!((sol.y_end()[0] - 2f64.exp()).abs() < 1e-8);
        assert!((sol.eval(0.5)[0] - 1f64.exp()).abs() < 1e-7);
    }

    #[test]
    fn rhs_failure_is_reported_with_time() {
        let opts = OdeOptions::<f64>::default();
        let res = integrate(
            |t, _y, dy| {
                if t > 0.5 {
                    return Err(Error::domain("left the admissible region"));
                }
                dy[0] = 1.0;
                Ok(())
            },
            0.0,
            &[0.0],
            1.0,
            &opts,
        );
        match res {
            Err(Error::Integration { t, .. }) => assert!((t - 0.5).abs() < 1e-6),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn zero_length_interval() {
        let sol = integrate(
            |_t, _y, dy: &mut [f64]| {
                dy[0] = 1.0;
                Ok(())
            },
            1.0,
            &[3.0],
            1.0,
            &OdeOptions::default(),
        )
        .unwrap();
        assert_eq!(sol.n_steps(), 0);
        assert_eq!(sol.eval(1.0), vec![3.0]);
    }
}
