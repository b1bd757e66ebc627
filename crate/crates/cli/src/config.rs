//! JSON run configuration.

use std::path::Path;

use dirac_semiclassical::geoflow::ShootOptions;
use dirac_semiclassical::ode::OdeOptions;
use dirac_semiclassical::potential::{PotentialConfig, PotentialModel};
use serde::{Deserialize, Serialize};

use crate::error::CliError;

fn default_h_list() -> Vec<f64> {
    vec![0.2, 0.1, 0.05, 0.025]
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OdeConfig {
    pub rel_tol: f64,
    pub abs_tol: f64,
    #[serde(default)]
    pub max_step: Option<f64>,
}

impl Default for OdeConfig {
    fn default() -> Self {
        OdeConfig {
            rel_tol: 1e-10,
            abs_tol: 1e-12,
            max_step: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ShootingConfig {
    pub newton_tol: f64,
    pub max_iter: usize,
    #[serde(default)]
    pub multistart: Option<usize>,
}

impl Default for ShootingConfig {
    fn default() -> Self {
        ShootingConfig {
            newton_tol: 1e-11,
            max_iter: 50,
            multistart: None,
        }
    }
}

/// Options of the `bmt` command.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BmtConfig {
    /// Initial spinor as `[[re, im], [re, im]]`.
    pub u: [[f64; 2]; 2],
    pub samples: usize,
}

impl Default for BmtConfig {
    fn default() -> Self {
        BmtConfig {
            u: [[1.0, 0.0], [0.0, 0.0]],
            samples: 100,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub dimension: usize,
    pub potential: PotentialConfig,
    pub x_star: Vec<f64>,
    pub y_star: Vec<f64>,
    #[serde(default = "default_h_list")]
    pub h_list: Vec<f64>,
    #[serde(default)]
    pub ode: OdeConfig,
    #[serde(default)]
    pub shooting: ShootingConfig,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub bmt: Option<BmtConfig>,
}

impl RunConfig {
    pub fn from_json(text: &str) -> Result<Self, CliError> {
        let cfg: RunConfig =
            serde_json::from_str(text).map_err(|e| CliError::Config(format!("invalid config: {e}")))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::from_json(&text)
    }

    #[cfg(test)]
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }

    pub fn validate(&self) -> Result<(), CliError> {
        let d = self.dimension;
        if d == 0 {
            return Err(CliError::Config("dimension must be positive".into()));
        }
        if self.x_star.len() != d || self.y_star.len() != d {
            return Err(CliError::Config(format!(
                "x_star and y_star must have length {d}"
            )));
        }
        if self.x_star == self.y_star {
            return Err(CliError::Config("x_star and y_star coincide".into()));
        }
        if self.h_list.is_empty() {
            return Err(CliError::Config("h_list is empty".into()));
        }
        if let Some(h) = self.h_list.iter().find(|h| !(**h > 0.0 && **h <= 1.0)) {
            return Err(CliError::Config(format!("h = {h} is outside (0, 1]")));
        }
        if !(self.ode.rel_tol > 0.0 && self.ode.abs_tol > 0.0) {
            return Err(CliError::Config("ODE tolerances must be positive".into()));
        }
        if !(self.shooting.newton_tol > 0.0) || self.shooting.max_iter == 0 {
            return Err(CliError::Config("invalid shooting options".into()));
        }
        Ok(())
    }

    /// `h_list` sorted by decreasing `h`.
    pub fn sorted_h(&self) -> Vec<f64> {
        let mut h = self.h_list.clone();
        h.sort_by(|a, b| b.partial_cmp(a).expect("validated h"));
        h.dedup();
        h
    }

    pub fn model(&self) -> Result<PotentialModel<f64>, CliError> {
        Ok(self.potential.build::<f64>(self.dimension)?)
    }

    pub fn ode_options(&self) -> OdeOptions<f64> {
        OdeOptions {
            rel_tol: self.ode.rel_tol,
            abs_tol: self.ode.abs_tol,
            max_step: self.ode.max_step,
            ..OdeOptions::default()
        }
    }

    pub fn shoot_options(&self) -> ShootOptions<f64> {
        ShootOptions {
            newton_tol: self.shooting.newton_tol,
            max_iter: self.shooting.max_iter,
            multistart: self.shooting.multistart,
            ode: self.ode_options(),
            ..ShootOptions::default()
        }
    }
}

/// Parses `"a,b,c"`.
pub fn parse_h_list(s: &str) -> Result<Vec<f64>, CliError> {
    s.split(',')
        .map(|t| {
            t.trim()
                .parse::<f64>()
                .map_err(|_| CliError::Config(format!("invalid h value '{t}'")))
        })
        .collect()
}
