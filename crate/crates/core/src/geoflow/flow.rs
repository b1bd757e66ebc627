use crate::error::{Error, Result};
use crate::linalg::RMat;
use crate::ode::{integrate, DenseSolution, OdeOptions};
use crate::potential::PotentialModel;
use crate::scalar::{lit, to_f64, Real};

use super::{hamiltonian, kinetic_root, norm_sq, PhasePoint};

/// Energy tolerance for the initial point of [`integrate_flow`].
const START_ENERGY_TOL: f64 = 1e-10;

/// Sampled Hamiltonian orbit with its Jacobi fields.
///
/// State layout of the underlying ODE: `x (d) | p (d) | action (1) |
/// d_pX (d², column-major) | d_pP (d²)`. The action is `∫⟨p, ẋ⟩ dt`.
#[derive(Debug, Clone)]
pub struct Trajectory<T: Real> {
    d: usize,
    tau: T,
    variational: bool,
    dense: DenseSolution<T>,
    times: Vec<T>,
    states: Vec<PhasePoint<T>>,
    dpx: Vec<RMat<T>>,
    dpp: Vec<RMat<T>>,
    v_start: Vec<T>,
    v_end: Vec<T>,
    max_energy_error: T,
}

fn velocity<T: Real>(p: &[T]) -> Result<Vec<T>> {
    let s = kinetic_root(p)?;
    Ok(p.iter().map(|v| *v / s).collect())
}

impl<T: Real> Trajectory<T> {
    pub fn dim(&self) -> usize {
        self.d
    }

    pub fn tau(&self) -> T {
        self.tau
    }

    pub fn has_variations(&self) -> bool {
        self.variational
    }

    /// Mesh times `0 = t_0 < … < t_N = τ`.
    pub fn times(&self) -> &[T] {
        &self.times
    }

    pub fn states(&self) -> &[PhasePoint<T>] {
        &self.states
    }

    /// `d_pX` at every mesh time (empty without variations).
    pub fn dpx(&self) -> &[RMat<T>] {
        &self.dpx
    }

    pub fn dpp(&self) -> &[RMat<T>] {
        &self.dpp
    }

    pub fn start(&self) -> &PhasePoint<T> {
        &self.states[0]
    }

    pub fn end(&self) -> &PhasePoint<T> {
        self.states.last().expect("trajectory has at least one sample")
    }

    /// `v_y = ∇_pH(γ(0), ω(0))`.
    pub fn velocity_start(&self) -> &[T] {
        &self.v_start
    }

    /// `v_x = ∇_pH(γ(τ), ω(τ))`.
    pub fn velocity_end(&self) -> &[T] {
        &self.v_end
    }

    /// `∫₀^τ ⟨ω, γ̇⟩ dt`.
    pub fn action(&self) -> T {
        self.dense.y_end()[2 * self.d]
    }

    pub fn dpx_end(&self) -> Option<&RMat<T>> {
        self.dpx.last()
    }

    pub fn dpp_end(&self) -> Option<&RMat<T>> {
        self.dpp.last()
    }

    /// `max_i |H(γ(t_i), ω(t_i))|` over the mesh.
    pub fn max_energy_error(&self) -> T {
        self.max_energy_error
    }

    /// Dense-output phase point at any `t ∈ [0, τ]`.
    pub fn state_at(&self, t: T) -> PhasePoint<T> {
        let y = self.dense.eval(t);
        PhasePoint {
            x: y[..self.d].to_vec(),
            p: y[self.d..2 * self.d].to_vec(),
        }
    }

    pub fn position_at(&self, t: T) -> Vec<T> {
        let y = self.dense.eval(t);
        y[..self.d].to_vec()
    }

    /// Cumulative action up to `t`.
    pub fn action_at(&self, t: T) -> T {
        self.dense.eval(t)[2 * self.d]
    }

    /// Number of accepted integrator steps.
    pub fn n_steps(&self) -> usize {
        self.dense.n_steps()
    }
}

/// Flow of `H` from `(x0, p0)` for time `tau`, without any energy
/// precondition. With `variational` set, `(d_pX, d_pP)` are carried from
/// `(0, 𝟙)`.
pub fn integrate_hamiltonian<T: Real>(
    model: &PotentialModel<T>,
    x0: &[T],
    p0: &[T],
    tau: T,
    variational: bool,
    opts: &OdeOptions<T>,
) -> Result<Trajectory<T>> {
    let d = model.dim();
    if x0.len() != d || p0.len() != d {
        return Err(Error::domain("initial point has the wrong dimension"));
    }
    if !(tau > T::zero()) {
        return Err(Error::domain("flow time must be positive"));
    }
    kinetic_root(p0)?;
    let n = if variational { 2 * d + 1 + 2 * d * d } else { 2 * d + 1 };
    let mut y0 = vec![T::zero(); n];
    y0[..d].copy_from_slice(x0);
    y0[d..2 * d].copy_from_slice(p0);
    if variational {
        let off = 2 * d + 1 + d * d;
        for i in 0..d {
            y0[off + i * d + i] = T::one();
        }
    }

    let mut hpp = vec![T::zero(); d * d];
    let rhs = |_t: T, y: &[T], dy: &mut [T]| -> Result<()> {
        let x = &y[..d];
        let p = &y[d..2 * d];
        let s = kinetic_root(p)?;
        let pot = model.evaluate(x)?;
        for i in 0..d {
            dy[i] = p[i] / s;
            dy[d + i] = pot.grad[i];
        }
        dy[2 * d] = norm_sq(p) / s;
        if variational {
            let s3 = s * s * s;
            for i in 0..d {
                for j in 0..d {
                    let mut v = p[i] * p[j] / s3;
                    if i == j {
                        v += T::one() / s;
                    }
                    hpp[i * d + j] = v;
                }
            }
            let ox = 2 * d + 1;
            let op = ox + d * d;
            // Column c of dpX / dpP.
            for c in 0..d {
                for i in 0..d {
                    let mut ax = T::zero();
                    let mut ap = T::zero();
                    for k in 0..d {
                        ax += hpp[i * d + k] * y[op + c * d + k];
                        ap += pot.hess[(i, k)] * y[ox + c * d + k];
                    }
                    dy[ox + c * d + i] = ax;
                    dy[op + c * d + i] = ap;
                }
            }
        }
        Ok(())
    };
    let dense = integrate(rhs, T::zero(), &y0, tau, opts)?;

    let mesh = dense.mesh();
    let mut states = Vec::with_capacity(mesh.len());
    let mut dpx = Vec::new();
    let mut dpp = Vec::new();
    let mut max_energy_error = T::zero();
    for i in 0..mesh.len() {
        let y = dense.node(i);
        let pt = PhasePoint {
            x: y[..d].to_vec(),
            p: y[d..2 * d].to_vec(),
        };
        let h = hamiltonian(model, &pt.x, &pt.p).map_err(|e| Error::Integration {
            t: to_f64(mesh[i]),
            reason: e.to_string(),
        })?;
        max_energy_error = max_energy_error.max(h.abs());
        if variational {
            let ox = 2 * d + 1;
            let op = ox + d * d;
            dpx.push(RMat::from_column_slice(d, d, &y[ox..ox + d * d]));
            dpp.push(RMat::from_column_slice(d, d, &y[op..op + d * d]));
        }
        states.push(pt);
    }
    let v_start = velocity(&states[0].p)?;
    let v_end = velocity(&states[states.len() - 1].p)?;
    Ok(Trajectory {
        d,
        tau,
        variational,
        dense,
        times: mesh,
        states,
        dpx,
        dpp,
        v_start,
        v_end,
        max_energy_error,
    })
}

/// Flow on the zero-energy surface with Jacobi fields.
///
/// Requires `|H(x0, p0)| ≤ 1e−10`.
pub fn integrate_flow<T: Real>(
    model: &PotentialModel<T>,
    x0: &[T],
    p0: &[T],
    tau: T,
    opts: &OdeOptions<T>,
) -> Result<Trajectory<T>> {
    let h = hamiltonian(model, x0, p0)?;
    if h.abs() > lit(START_ENERGY_TOL) {
        return Err(Error::domain(format!(
            "initial point is off the zero-energy surface (H = {:e})",
            to_f64(h)
        )));
    }
    integrate_hamiltonian(model, x0, p0, tau, true, opts)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn free_flow_is_straight_with_closed_form_jacobi_field() {
        let e = -0.6f64;
        let m = PotentialModel::<f64>::constant(3, e).unwrap();
        let p0 = [0.8, 0.0, 0.0];
        let tau = 0.75;
        let tr = integrate_flow(&m, &[0.0; 3], &p0, tau, &OdeOptions::default()).unwrap();
        let end = tr.end();
        assert!((end.x[0] - 1.0).abs() < 1e-12);
        assert!(end.x[1].abs() < 1e-14 && end.x[2].abs() < 1e-14);
        assert!(tr.max_energy_error() <= 1e-10);
        // dpX(τ) = τ[𝟙/(−E) + p pᵀ/(−E)³].
        let s = -e;
        let dpx = tr.dpx_end().unwrap();
        for i in 0..3 {
            for j in 0..3 {
                let mut want = p0[i] * p0[j] / (s * s * s);
                if i == j {
                    want += 1.0 / s;
                }
                want *= tau;
                assert!((dpx[(i, j)] - want).abs() < 1e-10, "({i},{j})");
            }
        }
        assert!((tr.action() - 0.8).abs() < 1e-12);
    }

    #[test]
    fn rejects_off_shell_start_and_bad_time() {
        let m = PotentialModel::<f64>::constant(2, -0.6).unwrap();
        assert!(integrate_flow(&m, &[0.0, 0.0], &[0.5, 0.0], 1.0, &OdeOptions::default()).is_err());
        assert!(integrate_flow(&m, &[0.0, 0.0], &[0.8, 0.0], -1.0, &OdeOptions::default()).is_err());
    }

    #[test]
    fn leaving_the_box_is_an_integration_error() {
        let m = PotentialModel::<f64>::constant(1, -0.6).unwrap();
        let r = integrate_flow(&m, &[9.0], &[0.8], 5.0, &OdeOptions::default());
        match r {
            Err(Error::Integration { t, .. }) => assert!((t - 0.75).abs() < 1e-3, "t={t}"),
            other => panic!("{other:?}"),
        }
    }
}
