//! The `geodesic`, `kernel`, `validate1d`, `constant` and `bmt` commands.

use std::collections::BTreeMap;

use dirac_semiclassical::bmt::{equivalence_check, solve_bmt_spin};
use dirac_semiclassical::clifford::DiracRep;
use dirac_semiclassical::geoflow::{
    agmon_distance_1d_quadrature, shoot_geodesic, GeodesicSolution,
};
use dirac_semiclassical::kernel::{
    constant_v_exact_scaled, leading_kernel, positive_potential_kernel, ratio_sweep,
    KernelEstimate, RatioTable, Scaled,
};
use dirac_semiclassical::linalg::{fro_norm, CMat};
use dirac_semiclassical::oracle1d::exact_green_kernel_1d_scaled;
use dirac_semiclassical::potential::{PotentialKind, PotentialModel};
use dirac_semiclassical::transport::{transport_matrix_with, TransportResult};
use num_complex::Complex;
use rayon::prelude::*;
use serde_json::json;

use crate::config::RunConfig;
use crate::csv;
use crate::error::CliError;

/// Geodesic and transport for the configured endpoints. Positive
/// potentials run on `−V` with flipped matrices.
pub struct Pipeline {
    pub model: PotentialModel<f64>,
    pub rep: DiracRep<f64>,
    pub sol: GeodesicSolution<f64>,
    pub tr: TransportResult<f64>,
    pub positive: bool,
}

impl Pipeline {
    pub fn run(cfg: &RunConfig) -> Result<Self, CliError> {
        let model = cfg.model()?;
        let vy = model.value(&cfg.y_star)?;
        let vx = model.value(&cfg.x_star)?;
        if (vy > 0.0) != (vx > 0.0) {
            return Err(CliError::Config(
                "the potential changes sign between the endpoints".into(),
            ));
        }
        let positive = vy > 0.0;
        let mut rep = DiracRep::new(cfg.dimension)?;
        let work = if positive {
            rep = rep.negated();
            model.negated()
        } else {
            model.clone()
        };
        let sol = shoot_geodesic(&work, &cfg.y_star, &cfg.x_star, &cfg.shoot_options())?;
        let tr = transport_matrix_with(&sol, &rep, &cfg.ode_options())?;
        Ok(Pipeline {
            model,
            rep,
            sol,
            tr,
            positive,
        })
    }

    pub fn estimate(&self, h: f64) -> Result<KernelEstimate<f64>, CliError> {
        Ok(if self.positive {
            positive_potential_kernel(&self.sol, &self.tr, &self.rep, h)?
        } else {
            leading_kernel(&self.sol, &self.tr, &self.rep, h)?
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum ExactSource {
    Bessel,
    Oracle1d,
}

fn constant_value(model: &PotentialModel<f64>) -> Option<f64> {
    match model.kind() {
        PotentialKind::Constant { value } => Some(*value),
        _ => None,
    }
}

fn exact(
    source: ExactSource,
    cfg: &RunConfig,
    model: &PotentialModel<f64>,
    h: f64,
) -> Result<Scaled<f64>, CliError> {
    Ok(match source {
        ExactSource::Bessel => {
            let rep = DiracRep::new(cfg.dimension)?;
            let e = constant_value(model).expect("constant model");
            constant_v_exact_scaled(&rep, e, &cfg.x_star, &cfg.y_star, h)?
        }
        ExactSource::Oracle1d => {
            exact_green_kernel_1d_scaled(model, cfg.x_star[0], cfg.y_star[0], h)?
        }
    })
}

struct Sweep {
    rows: Vec<(f64, KernelEstimate<f64>, Option<Scaled<f64>>)>,
    table: Option<RatioTable<f64>>,
}

fn sweep(
    cfg: &RunConfig,
    pipe: &Pipeline,
    source: Option<ExactSource>,
) -> Result<Sweep, CliError> {
    let hs = cfg.sorted_h();
    let rows: Vec<(f64, KernelEstimate<f64>, Option<Scaled<f64>>)> = hs
        .par_iter()
        .map(|&h| {
            let est = pipe.estimate(h)?;
            let ex = match source {
                Some(s) => Some(exact(s, cfg, &pipe.model, h)?),
                None => None,
            };
            Ok((h, est, ex))
        })
        .collect::<Result<_, CliError>>()?;
    let table = match source {
        Some(_) => {
            let lookup = |h: f64| rows.iter().find(|r| r.0 == h).expect("h from the list");
            let m = rows[0].1.matrix.clone();
            Some(ratio_sweep(
                &m,
                |h| Ok(lookup(h).2.clone().expect("exact computed")),
                |h| Ok(lookup(h).1.scaled()),
                &hs,
            )?)
        }
        None => None,
    };
    Ok(Sweep { rows, table })
}

fn kernel_csv(sw: &Sweep, use_exact_entries: bool) -> String {
    let n = sw.rows[0].1.matrix.nrows();
    let mut out = vec![csv::kernel_header(n)];
    for (k, (h, est, ex)) in sw.rows.iter().enumerate() {
        let matrix: CMat<f64> = if use_exact_entries {
            ex.as_ref().expect("exact entries").value()
        } else {
            est.kernel.clone()
        };
        let ratio = sw.table.as_ref().map(|t| &t.rows[k]);
        out.push(csv::kernel_row(*h, &matrix, est, ratio));
    }
    out.push(csv::slope_footer(sw.table.as_ref().and_then(|t| t.slope)));
    out.join("\n") + "\n"
}

/// Exact source available for the model, if any.
fn exact_source(cfg: &RunConfig, model: &PotentialModel<f64>) -> Option<ExactSource> {
    if constant_value(model).is_some() && cfg.dimension <= 3 {
        Some(ExactSource::Bessel)
    } else if cfg.dimension == 1 {
        Some(ExactSource::Oracle1d)
    } else {
        None
    }
}

pub fn geodesic(cfg: &RunConfig) -> Result<String, CliError> {
    let pipe = Pipeline::run(cfg)?;
    let s = &pipe.sol;
    let u = &s.uniqueness;
    let mut v = json!({
        "tau": s.tau,
        "p0": s.p0,
        "dA": s.d_a,
        "residual": s.residual,
        "bordered_det": s.bordered_det,
        "det_exp_prime": s.det_exp_prime,
        "conjugate": s.conjugate,
        "uniqueness": {
            "starts": u.starts,
            "converged": u.converged,
            "distinct": u.distinct.len(),
            "distinct_dA": u.distinct.iter().map(|c| c.d_a).collect::<Vec<_>>(),
            "unique": u.is_unique(),
            "warning": u.warning,
        },
    });
    if cfg.dimension == 1 {
        let q = agmon_distance_1d_quadrature(&pipe.model, cfg.y_star[0], cfg.x_star[0])?;
        v["dA_quadrature"] = json!(q);
    }
    Ok(serde_json::to_string_pretty(&v).expect("json") + "\n")
}

pub fn kernel(cfg: &RunConfig) -> Result<String, CliError> {
    let pipe = Pipeline::run(cfg)?;
    let source = exact_source(cfg, &pipe.model);
    // The 1D oracle needs an exactly or numerically constant tail.
    let source = match source {
        Some(ExactSource::Oracle1d) => exact(ExactSource::Oracle1d, cfg, &pipe.model, cfg.sorted_h()[0])
            .ok()
            .map(|_| ExactSource::Oracle1d),
        s => s,
    };
    Ok(kernel_csv(&sweep(cfg, &pipe, source)?, false))
}

pub fn constant(cfg: &RunConfig) -> Result<String, CliError> {
    let model = cfg.model()?;
    if constant_value(&model).is_none() || cfg.dimension > 3 {
        return Err(CliError::Config(
            "the constant command needs a constant potential in dimension 1, 2 or 3".into(),
        ));
    }
    let pipe = Pipeline::run(cfg)?;
    Ok(kernel_csv(&sweep(cfg, &pipe, Some(ExactSource::Bessel))?, true))
}

/// Returns the CSV and, if a convergence check failed, the reason.
pub fn validate1d(cfg: &RunConfig) -> Result<(String, Option<String>), CliError> {
    if cfg.dimension != 1 {
        return Err(CliError::Config("validate1d needs dimension 1".into()));
    }
    let pipe = Pipeline::run(cfg)?;
    let sw = sweep(cfg, &pipe, Some(ExactSource::Oracle1d))?;
    let mut text = kernel_csv(&sw, false);
    let table = sw.table.as_ref().expect("oracle ratios");
    let errs: Vec<f64> = table.rows.iter().map(|r| r.abs_ratio_minus_1).collect();

    // Symmetric-pair control at the smallest h.
    let h_min = *cfg.sorted_h().last().expect("non-empty");
    let (x, y) = (cfg.x_star[0], cfg.y_star[0]);
    let fwd = exact_green_kernel_1d_scaled(&pipe.model, x, y, h_min)?;
    let rev = exact_green_kernel_1d_scaled(&pipe.model, y, x, h_min)?;
    let scale = (rev.log_scale - fwd.log_scale).exp();
    let adj = fro_norm(&(fwd.matrix.adjoint() - &rev.matrix * Complex::new(scale, 0.0)))
        / fro_norm(&fwd.matrix);
    text.push_str(&format!("# adjoint_residual,{}\n", csv::fmt(adj)));

    let mut failures = Vec::new();
    let exact_case = constant_value(&pipe.model).is_some();
    if exact_case {
        if let Some(e) = errs.iter().find(|e| **e > 1e-9) {
            failures.push(format!("constant potential ratio deviates by {e:e}"));
        }
    } else {
        if errs.windows(2).any(|w| w[1] >= w[0]) {
            failures.push("|R-1| is not decreasing in h".to_string());
        }
        match table.slope {
            Some(s) if s >= 0.8 => {}
            Some(s) => failures.push(format!("fitted slope {s:.4} is below 0.8")),
            None => failures.push("no slope could be fitted".to_string()),
        }
        if errs.last().map(|e| *e > 0.1).unwrap_or(true) {
            failures.push("|R-1| at the smallest h exceeds 0.1".to_string());
        }
    }
    if adj > 1e-8 {
        failures.push(format!("adjoint residual {adj:e} exceeds 1e-8"));
    }
    let reason = (!failures.is_empty()).then(|| failures.join("; "));
    Ok((text, reason))
}

pub fn bmt(cfg: &RunConfig) -> Result<(String, Option<String>), CliError> {
    if cfg.dimension != 3 {
        return Err(CliError::Config("bmt needs dimension 3".into()));
    }
    let pipe = Pipeline::run(cfg)?;
    if pipe.positive {
        return Err(CliError::Config("bmt needs a negative potential".into()));
    }
    let opts = cfg.bmt.clone().unwrap_or_default();
    let u = [
        Complex::new(opts.u[0][0], opts.u[0][1]),
        Complex::new(opts.u[1][0], opts.u[1][1]),
    ];
    let spin = solve_bmt_spin(&pipe.sol.trajectory, &pipe.model, u, opts.samples)?;
    let eq = equivalence_check(&pipe.sol, &pipe.tr, &spin)?;

    let mut out = vec!["t,s1,s2,s3,|s|,bmt2_residual".to_string()];
    for p in &spin.bloch_path {
        out.push(
            [p.t, p.s[0], p.s[1], p.s[2], p.norm, p.bmt2_residual]
                .iter()
                .map(|v| csv::fmt(*v))
                .collect::<Vec<_>>()
                .join(","),
        );
    }
    let mut report = BTreeMap::new();
    report.insert("s_unitarity_defect", spin.unitarity_defect);
    report.insert("bloch_norm_drift", spin.bloch_norm_drift);
    report.insert("max_bmt2_residual", spin.max_bmt2_residual);
    report.insert("bloch_rate_scale", spin.bloch_rate_scale);
    report.insert("transpose_residual", eq.transpose_residual);
    report.insert("left_factor_residual", eq.left_factor_residual);
    report.insert("fitted_residual", eq.fitted_residual);
    for (k, v) in &report {
        out.push(format!("# {k},{}", csv::fmt(*v)));
    }
    out.push(format!(
        "# best_fit_scalar,{},{}",
        csv::fmt(eq.best_fit_scalar.re),
        csv::fmt(eq.best_fit_scalar.im)
    ));
    out.push(format!("# equivalence_pass,{}", eq.pass));

    let mut failures = Vec::new();
    if spin.unitarity_defect > 1e-9 {
        failures.push("spin matrix unitarity");
    }
    if spin.bloch_norm_drift > 1e-9 {
        failures.push("Bloch norm drift");
    }
    if spin.max_bmt2_residual > 1e-6 * spin.bloch_rate_scale {
        failures.push("Bloch precession residual");
    }
    if !eq.pass {
        failures.push("equivalence with U(tau) Lambda+");
    }
    let reason = (!failures.is_empty()).then(|| failures.join("; "));
    Ok((out.join("\n") + "\n", reason))
}
