//! Built-in consistency checks over a list of dimensions.

use dirac_semiclassical::bessel::{bessel_k, bessel_k_prime};
use dirac_semiclassical::bmt::{equivalence_check, solve_bmt_spin};
use dirac_semiclassical::clifford::{projector, projector_imag, DiracRep};
use dirac_semiclassical::geoflow::{
    agmon_distance_1d_quadrature, exp_prime_fd, inverse_exp, shoot_geodesic, GeodesicSolution,
    ShootOptions,
};
use dirac_semiclassical::kernel::{constant_v_exact_scaled, leading_kernel, ratio_sweep};
use dirac_semiclassical::linalg::{fro_norm, singular_values, unitarity_defect};
use dirac_semiclassical::oracle1d::{exact_green_kernel_1d_scaled, jump_residual};
use dirac_semiclassical::potential::PotentialModel;
use dirac_semiclassical::transport::{theta_1d, theta_1d_closed_form, transport_matrix};
use dirac_semiclassical::{DiracRep32, Error};
use num_complex::Complex;
use serde::Serialize;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Fault {
    Clifford,
}

#[derive(Debug, Clone, Serialize)]
pub struct Check {
    pub name: String,
    pub dimension: usize,
    pub value: Option<f64>,
    pub threshold: f64,
    pub pass: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

#[derive(Debug, Clone, Serialize)]
pub struct Report {
    pub dimensions: Vec<usize>,
    pub total: usize,
    pub failed: usize,
    pub checks: Vec<Check>,
}

impl Report {
    pub fn all_pass(&self) -> bool {
        self.failed == 0
    }
}

struct Runner {
    dim: usize,
    checks: Vec<Check>,
}

impl Runner {
    /// Passes when `f` returns a value at most `threshold`.
    fn check(&mut self, name: &str, threshold: f64, f: impl FnOnce() -> Result<f64, Error>) {
        let (value, error) = match f() {
            Ok(v) => (Some(v), None),
            Err(e) => (None, Some(e.to_string())),
        };
        let pass = value.map(|v| v <= threshold).unwrap_or(false);
        self.checks.push(Check {
            name: name.to_string(),
            dimension: self.dim,
            value,
            threshold,
            pass,
            error,
        });
    }
}

fn unit(d: usize, k: usize) -> Vec<f64> {
    let mut v = vec![0.0; d];
    v[k] = 1.0;
    v
}

fn bump(d: usize) -> Result<PotentialModel<f64>, Error> {
    PotentialModel::bump_well(-0.5, -0.25, vec![0.0; d], 2.0)
}

fn bump_endpoints(d: usize) -> (Vec<f64>, Vec<f64>) {
    let mut y = vec![0.0; d];
    let mut x = vec![0.0; d];
    y[0] = -1.0;
    x[0] = 1.0;
    if d > 1 {
        x[1] = 0.5;
    }
    (y, x)
}

fn constant_solution(d: usize) -> Result<GeodesicSolution<f64>, Error> {
    let model = PotentialModel::constant(d, -0.6)?;
    shoot_geodesic(&model, &vec![0.0; d], &unit(d, 0), &ShootOptions::default())
}

fn dimension_checks(d: usize, fault: Option<Fault>) -> Vec<Check> {
    let mut r = Runner { dim: d, checks: Vec::new() };
    let rep = match DiracRep::<f64>::new(d) {
        Ok(rep) => match fault {
            Some(Fault::Clifford) => rep.with_perturbed_alpha(0, 1e-3),
            None => rep,
        },
        Err(e) => {
            r.check("dirac_representation", 0.0, || Err(e));
            return r.checks;
        }
    };

    r.check("clifford_anticommutator", 1e-12, || Ok(rep.clifford_residual()));
    r.check("alpha_hermiticity", 1e-12, || Ok(rep.hermiticity_residual()));
    r.check("gamma_anticommutator", 1e-12, || Ok(rep.gamma_residual()));
    let zeta: Vec<Complex<f64>> = (0..d)
        .map(|j| Complex::new(0.3 + 0.1 * j as f64, -0.2 + 0.05 * j as f64))
        .collect();
    r.check("projector_algebra", 1e-11, || Ok(projector(&rep, &zeta)?.algebra_residual()));
    r.check("projector_eigenvectors", 1e-11, || {
        Ok(projector(&rep, &zeta)?.eigen_residual(&rep, -0.4))
    });
    r.check("projector_imag_trace", 1e-11, || {
        let p: Vec<f64> = (0..d).map(|j| 0.5 / (d as f64).sqrt() + 0.0 * j as f64).collect();
        let lp = projector_imag(&rep, &p)?.lambda_plus;
        Ok((lp.trace().re - rep.dstar() as f64 / 2.0).abs())
    });
    r.check("f32_clifford", 1e-5, || {
        Ok(f64::from(DiracRep32::new(d)?.clifford_residual()))
    });

    r.check("potential_hypothesis", 0.0, || {
        let report = bump(d)?.validate_hypothesis(3.0, 500, 7);
        Ok(if report.pass { 0.0 } else { 1.0 })
    });

    // Constant potential V = -0.6 with unit separation.
    let c = constant_solution(d);
    let with_c = |f: &dyn Fn(&GeodesicSolution<f64>) -> Result<f64, Error>| match &c {
        Ok(sol) => f(sol),
        Err(e) => Err(e.clone()),
    };
    r.check("constant_travel_time", 1e-9, || with_c(&|s| Ok((s.tau - 0.75).abs())));
    r.check("constant_agmon_distance", 1e-9, || with_c(&|s| Ok((s.d_a - 0.8).abs())));
    r.check("constant_energy_conservation", 1e-10, || {
        with_c(&|s| Ok(s.trajectory.max_energy_error()))
    });
    r.check("constant_unique_geodesic", 0.0, || {
        with_c(&|s| Ok(if s.uniqueness.is_unique() { 0.0 } else { 1.0 }))
    });
    if d >= 2 {
        r.check("constant_det_exp_prime", 1e-8, || {
            with_c(&|s| Ok((s.det_exp_prime.unwrap_or(f64::NAN) - 1.0).abs()))
        });
    } else {
        r.check("constant_agmon_quadrature", 1e-10, || {
            with_c(&|s| Ok((agmon_distance_1d_quadrature(&s.model, 0.0, 1.0)? - s.d_a).abs()))
        });
    }

    let ct = c.as_ref().map_err(|e| e.clone()).and_then(|s| transport_matrix(s, &rep));
    let with_t = |f: &dyn Fn(&dirac_semiclassical::TransportResult64) -> f64| match &ct {
        Ok(t) => Ok(f(t)),
        Err(e) => Err(e.clone()),
    };
    r.check("transport_unitarity", 1e-9, || with_t(&|t| unitarity_defect(&t.u_tau)));
    r.check("transport_projection_identity", 1e-8, || {
        with_t(&|t| t.projection_identity_residual)
    });
    r.check("transport_rank", 0.0, || {
        with_t(&|t| {
            let s = singular_values(&t.m);
            let top = s.iter().cloned().fold(0.0, f64::max);
            let rank = s.iter().filter(|v| **v > 1e-8 * top).count();
            (rank as f64 - rep.dstar() as f64 / 2.0).abs()
        })
    });

    if d <= 3 {
    r.check("constant_kernel_ratio", 0.1, || {
        let sol = c.as_ref().map_err(|e| e.clone())?;
        let tr = transport_matrix(sol, &rep)?;
        let h = 0.05;
        let est = leading_kernel(sol, &tr, &rep, h)?;
        let table = ratio_sweep(
            &est.matrix,
            |h| constant_v_exact_scaled(&rep, -0.6, &unit(d, 0), &vec![0.0; d], h),
            |h| Ok(leading_kernel(sol, &tr, &rep, h)?.scaled()),
            &[h],
        )?;
        Ok(table.rows[0].abs_ratio_minus_1)
    });
    }

    // Variable potential.
    let (y, x) = bump_endpoints(d);
    let model = bump(d);
    let b = model
        .as_ref()
        .map_err(|e| e.clone())
        .and_then(|m| shoot_geodesic(m, &y, &x, &ShootOptions::default()));
    r.check("bump_shooting_residual", 1e-9, || {
        b.as_ref().map(|s| s.residual).map_err(|e| e.clone())
    });
    r.check("bump_transport_reversal", 1e-8, || {
        let s = b.as_ref().map_err(|e| e.clone())?;
        let m = model.as_ref().map_err(|e| e.clone())?;
        let rev = shoot_geodesic(m, &x, &y, &ShootOptions::default())?;
        let fwd_u = transport_matrix(s, &rep)?.u_tau;
        let rev_u = transport_matrix(&rev, &rep)?.u_tau;
        Ok(dirac_semiclassical::transport::reversal_residual(&rep, &fwd_u, &rev_u))
    });
    if d >= 2 {
        r.check("bump_det_exp_prime_vs_fd", 1e-5, || {
            let s = b.as_ref().map_err(|e| e.clone())?;
            let v = inverse_exp(s)?;
            let fd = exp_prime_fd(&s.model, &y, &v)?;
            let an = s.det_exp_prime.unwrap_or(f64::NAN);
            Ok((an - fd).abs() / fd.abs())
        });
    } else {
        r.check("bump_theta_closed_form", 1e-8, || {
            let s = b.as_ref().map_err(|e| e.clone())?;
            let th = theta_1d(&s.trajectory, &s.model)?;
            Ok((th - theta_1d_closed_form(&s.model, y[0], x[0])?).abs())
        });
        r.check("oracle_jump", 1e-6, || {
            let m = model.as_ref().map_err(|e| e.clone())?;
            jump_residual(m, 0.3, 0.1, 1e-4)
        });
        r.check("oracle_adjoint_symmetry", 1e-8, || {
            let m = model.as_ref().map_err(|e| e.clone())?;
            let f = exact_green_kernel_1d_scaled(m, x[0], y[0], 0.1)?;
            let g = exact_green_kernel_1d_scaled(m, y[0], x[0], 0.1)?;
            let s = Complex::new((g.log_scale - f.log_scale).exp(), 0.0);
            Ok(fro_norm(&(f.matrix.adjoint() - &g.matrix * s)) / fro_norm(&f.matrix))
        });
    }
    if d == 3 {
        r.check("bmt_equivalence", 1e-6, || {
            let s = b.as_ref().map_err(|e| e.clone())?;
            let tr = transport_matrix(s, &rep)?;
            let u = [Complex::new(1.0, 0.0), Complex::new(0.0, 0.0)];
            let spin = solve_bmt_spin(&s.trajectory, &s.model, u, 50)?;
            Ok(equivalence_check(s, &tr, &spin)?.left_factor_residual)
        });
    }

    // Bessel reference values at 1.
    r.check("bessel_k0", 1e-14, || Ok((bessel_k(0.0f64, 1.0)? - 0.421_024_438_240_708_3).abs()));
    r.check("bessel_k1", 1e-14, || Ok((bessel_k(1.0f64, 1.0)? - 0.601_907_230_197_234_6).abs()));
    r.check("bessel_k0_derivative", 1e-14, || {
        Ok((bessel_k_prime(0.0f64, 1.5)? + bessel_k(1.0, 1.5)?).abs())
    });
    r.check("bessel_half_order", 1e-14, || {
        let rho: f64 = 2.5;
        let k = bessel_k(0.5, rho)?;
        Ok((k - (std::f64::consts::FRAC_PI_2 / rho).sqrt() * (-rho).exp()).abs())
    });
    r.checks
}

pub fn run(dims: &[usize], fault: Option<Fault>) -> Report {
    let checks: Vec<Check> = dims.iter().flat_map(|&d| dimension_checks(d, fault)).collect();
    let failed = checks.iter().filter(|c| !c.pass).count();
    Report {
        dimensions: dims.to_vec(),
        total: checks.len(),
        failed,
        checks,
    }
}
