//! Smooth scalar potentials with closed-form first and second derivatives.

use std::collections::BTreeMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::RMat;
use crate::scalar::{lit, to_f64, Real};

/// Default half-width of the cubic domain box `[−10, 10]^d`.
pub const DEFAULT_BOX_HALF_WIDTH: f64 = 10.0;

#[derive(Debug, Clone, PartialEq)]
pub enum PotentialKind<T> {
    Constant {
        value: T,
    },
    /// `base + depth·exp(1 − 1/(1 − |x−c|²/R²))` inside the ball, `base` outside.
    BumpWell {
        base: T,
        depth: T,
        center: Vec<T>,
        radius: T,
    },
    /// `base + depth·cos²(π|x−c|/(2R))·bump`, smoothly truncated by the
    /// same C^∞ bump factor as [`PotentialKind::BumpWell`].
    CosineWell {
        base: T,
        depth: T,
        center: Vec<T>,
        radius: T,
    },
    /// One-dimensional `base + amp·tanh((x − c)/w)`.
    TanhStep {
        base: T,
        amp: T,
        center: T,
        width: T,
    },
}

/// Value, gradient and Hessian of `V` at a point.
#[derive(Debug, Clone, PartialEq)]
pub struct PotentialSample<T: Real> {
    pub value: T,
    pub grad: Vec<T>,
    pub hess: RMat<T>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HypothesisReport<T> {
    pub delta_hat: T,
    pub pass: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PotentialModel<T: Real> {
    dim: usize,
    kind: PotentialKind<T>,
    delta: T,
    window: Option<T>,
    box_half: T,
    negated: bool,
}

impl<T: Real> PotentialModel<T> {
    pub fn new(dim: usize, kind: PotentialKind<T>, delta: T) -> Result<Self> {
        if dim == 0 {
            return Err(Error::domain("dimension must be positive"));
        }
        if !(delta > T::zero() && delta < T::one()) {
            return Err(Error::domain("delta must lie in (0, 1)"));
        }
        let window = match &kind {
            PotentialKind::Constant { .. } => Some(T::zero()),
            PotentialKind::BumpWell { center, radius, .. }
            | PotentialKind::CosineWell { center, radius, .. } => {
                if center.len() != dim {
                    return Err(Error::domain("center has wrong dimension"));
                }
                if *radius <= T::zero() {
                    return Err(Error::domain("radius must be positive"));
                }
                let c = center.iter().fold(T::zero(), |m, x| m.max(x.abs()));
                Some(c + *radius)
            }
            PotentialKind::TanhStep { width, .. } => {
                if dim != 1 {
                    return Err(Error::domain("tanh_step is one-dimensional"));
                }
                if *width <= T::zero() {
                    return Err(Error::domain("width must be positive"));
                }
                None
            }
        };
        Ok(PotentialModel {
            dim,
            kind,
            delta,
            window,
            box_half: lit(DEFAULT_BOX_HALF_WIDTH),
            negated: false,
        })
    }

    pub fn constant(dim: usize, value: T) -> Result<Self> {
        let delta = (-value).min(T::one() + value);
        let delta = if delta > T::zero() && delta < T::one() {
            delta
        } else {
            lit(0.5)
        };
        Self::new(dim, PotentialKind::Constant { value }, delta)
    }

    /// Radially symmetric well `base + depth·bump(|x − c|/radius)`.
    pub fn bump_well(base: T, depth: T, center: Vec<T>, radius: T) -> Result<Self> {
        let dim = center.len();
        let lo = base.min(base + depth);
        let hi = base.max(base + depth);
        let delta = (-hi).min(T::one() + lo);
        let delta = if delta > T::zero() { delta } else { lit(0.5) };
        Self::new(
            dim,
            PotentialKind::BumpWell {
                base,
                depth,
                center,
                radius,
            },
            delta,
        )
    }

    pub fn cosine_well(base: T, depth: T, center: Vec<T>, radius: T) -> Result<Self> {
        let dim = center.len();
        let lo = base.min(base + depth);
        let hi = base.max(base + depth);
        let delta = (-hi).min(T::one() + lo);
        let delta = if delta > T::zero() { delta } else { lit(0.5) };
        Self::new(
            dim,
            PotentialKind::CosineWell {
                base,
                depth,
                center,
                radius,
            },
            delta,
        )
    }

    pub fn tanh_step(base: T, amp: T) -> Result<Self> {
        let a = amp.abs();
        let delta = (-(base + a)).min(T::one() + base - a);
        let delta = if delta > T::zero() { delta } else { lit(0.5) };
        Self::new(
            1,
            PotentialKind::TanhStep {
                base,
                amp,
                center: T::zero(),
                width: T::one(),
            },
            delta,
        )
    }

    pub fn with_box_half_width(mut self, half: T) -> Self {
        self.box_half = half;
        self
    }

    pub fn with_delta(mut self, delta: T) -> Self {
        self.delta = delta;
        self
    }

    /// The model `−V` (same geometry, opposite sign).
    pub fn negated(&self) -> Self {
        let mut m = self.clone();
        m.negated = !m.negated;
        m
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn kind(&self) -> &PotentialKind<T> {
        &self.kind
    }

    pub fn delta(&self) -> T {
        self.delta
    }

    /// Half-width `L` beyond which `V` is exactly constant, if any.
    pub fn window(&self) -> Option<T> {
        self.window
    }

    pub fn box_half_width(&self) -> T {
        self.box_half
    }

    pub fn is_negated(&self) -> bool {
        self.negated
    }

    pub fn is_constant(&self) -> bool {
        matches!(self.kind, PotentialKind::Constant { .. })
    }

    /// Radially symmetric about `center` (constant models have no center).
    pub fn radial_center(&self) -> Option<&[T]> {
        match &self.kind {
            PotentialKind::BumpWell { center, .. } | PotentialKind::CosineWell { center, .. } => {
                Some(center)
            }
            _ => None,
        }
    }

    fn check_domain(&self, x: &[T]) -> Result<()> {
        if x.len() != self.dim {
            return Err(Error::domain(format!(
                "point has dimension {}, model has {}",
                x.len(),
                self.dim
            )));
        }
        if x.iter().any(|v| !(v.abs() <= self.box_half)) {
            return Err(Error::domain(format!(
                "point {:?} outside the domain box [-{}, {}]^{}",
                x.iter().map(|v| to_f64(*v)).collect::<Vec<_>>(),
                to_f64(self.box_half),
                to_f64(self.box_half),
                self.dim
            )));
        }
        Ok(())
    }

    pub fn value(&self, x: &[T]) -> Result<T> {
        Ok(self.evaluate(x)?.value)
    }

    /// `V`, `∇V` and `Hess V` in closed form.
    pub fn evaluate(&self, x: &[T]) -> Result<PotentialSample<T>> {
        self.check_domain(x)?;
        let d = self.dim;
        let mut s = match &self.kind {
            PotentialKind::Constant { value } => PotentialSample {
                value: *value,
                grad: vec![T::zero(); d],
                hess: RMat::zeros(d, d),
            },
            PotentialKind::BumpWell {
                base,
                depth,
                center,
                radius,
            } => radial_sample(x, center, *radius, *base, *depth, bump_profile),
            PotentialKind::CosineWell {
                base,
                depth,
                center,
                radius,
            } => radial_sample(x, center, *radius, *base, *depth, cosine_profile),
            PotentialKind::TanhStep {
                base,
                amp,
                center,
                width,
            } => {
                let z = (x[0] - *center) / *width;
                let th = z.tanh();
                let sech2 = T::one() - th * th;
                PotentialSample {
                    value: *base + *amp * th,
                    grad: vec![*amp / *width * sech2],
                    hess: RMat::from_element(
                        1,
                        1,
                        -(T::one() + T::one()) * *amp / (*width * *width) * th * sech2,
                    ),
                }
            }
        };
        if self.negated {
            s.value = -s.value;
            s.grad.iter_mut().for_each(|g| *g = -*g);
            s.hess = -s.hess;
        }
        Ok(s)
    }

    /// Samples `V` on the box `[−half, half]^d` and estimates δ.
    pub fn validate_hypothesis(&self, half: T, n_samples: usize, seed: u64) -> HypothesisReport<T> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let h = to_f64(half.min(self.box_half));
        let mut delta_hat = T::max_value().unwrap_or_else(T::one);
        let mut visit = |x: &[T]| {
            if let Ok(v) = self.value(x) {
                delta_hat = delta_hat.min(-v).min(T::one() + v);
            }
        };
        // Deterministic probes: origin, well centers, box corners.
        visit(&vec![T::zero(); self.dim]);
        if let Some(c) = self.radial_center() {
            visit(&c.to_vec());
        }
        for _ in 0..n_samples {
            let x: Vec<T> = (0..self.dim)
                .map(|_| lit(rng.gen_range(-h..=h)))
                .collect();
            visit(&x);
        }
        HypothesisReport {
            delta_hat,
            pass: delta_hat >= self.delta,
        }
    }
}

/// Profile `F(u)` and its first two derivatives in `u = |x−c|²/R²`.
type Profile<T> = fn(T) -> (T, T, T);

fn radial_sample<T: Real>(
    x: &[T],
    center: &[T],
    radius: T,
    base: T,
    depth: T,
    profile: Profile<T>,
) -> PotentialSample<T> {
    let d = x.len();
    let r2 = radius * radius;
    let diff: Vec<T> = x.iter().zip(center).map(|(a, b)| *a - *b).collect();
    let u = diff.iter().fold(T::zero(), |acc, v| acc + *v * *v) / r2;
    let (f, f1, f2) = profile(u);
    let two = T::one() + T::one();
    let grad: Vec<T> = diff.iter().map(|v| depth * f1 * two * *v / r2).collect();
    let mut hess = RMat::zeros(d, d);
    for i in 0..d {
        for j in 0..d {
            let mut h = depth * f2 * two * two * diff[i] * diff[j] / (r2 * r2);
            if i == j {
                h += depth * f1 * two / r2;
            }
            hess[(i, j)] = h;
        }
    }
    PotentialSample {
        value: base + depth * f,
        grad,
        hess,
    }
}

/// `g(u) = exp(1 − 1/(1−u))` for `u < 1`, zero otherwise.
fn bump_profile<T: Real>(u: T) -> (T, T, T) {
    if u >= T::one() {
        return (T::zero(), T::zero(), T::zero());
    }
    let q = T::one() / (T::one() - u);
    // exp(1 − q) underflows long before q⁴ overflows the products below.
    if q > lit(700.0) {
        return (T::zero(), T::zero(), T::zero());
    }
    let g = (T::one() - q).exp();
    let g1 = -g * q * q;
    let g2 = g * (q * q * q * q - (T::one() + T::one()) * q * q * q);
    (g, g1, g2)
}

/// `C(u)·g(u)` with `C(u) = cos²(π√u/2) = (1 + cos(π√u))/2`.
fn cosine_profile<T: Real>(u: T) -> (T, T, T) {
    if u >= T::one() {
        return (T::zero(), T::zero(), T::zero());
    }
    let (g, g1, g2) = bump_profile(u);
    let pi = T::pi();
    let s = u.max(T::zero()).sqrt();
    let x = pi * s;
    let half = lit::<T>(0.5);
    let c = half * (T::one() + x.cos());
    // sin(πs)/s and (πs·cos πs − sin πs)/s³, with series near s = 0.
    let (sinc, curv) = if s < lit(1e-2) {
        let x2 = x * x;
        (
            pi * (T::one() - x2 / lit(6.0) + x2 * x2 / lit(120.0) - x2 * x2 * x2 / lit(5040.0)),
            pi * pi
                * pi
                * (-T::one() / lit(3.0) + x2 / lit(30.0) - x2 * x2 / lit(840.0)
                    + x2 * x2 * x2 / lit(45360.0)),
        )
    } else {
        (x.sin() / s, (x * x.cos() - x.sin()) / (s * s * s))
    };
    let c1 = -pi / lit(4.0) * sinc;
    let c2 = -pi / lit(8.0) * curv;
    let two = T::one() + T::one();
    (c * g, c1 * g + c * g1, c2 * g + two * c1 * g1 + c * g2)
}

/// JSON form of a potential: `{"kind", "params", "delta", "window"}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PotentialConfig {
    pub kind: String,
    #[serde(default)]
    pub params: BTreeMap<String, ParamValue>,
    pub delta: f64,
    #[serde(default)]
    pub window: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ParamValue {
    Scalar(f64),
    Vector(Vec<f64>),
}

impl PotentialConfig {
    fn scalar(&self, key: &str) -> Result<f64> {
        match self.params.get(key) {
            Some(ParamValue::Scalar(v)) => Ok(*v),
            Some(ParamValue::Vector(_)) => Err(Error::Config(format!(
                "potential parameter '{key}' must be a number"
            ))),
            None => Err(Error::Config(format!(
                "missing potential parameter '{key}' for kind '{}'",
                self.kind
            ))),
        }
    }

    fn scalar_or(&self, key: &str, default: f64) -> Result<f64> {
        if self.params.contains_key(key) {
            self.scalar(key)
        } else {
            Ok(default)
        }
    }

    fn center(&self, dim: usize) -> Result<Vec<f64>> {
        match self.params.get("center") {
            None => Ok(vec![0.0; dim]),
            Some(ParamValue::Vector(v)) if v.len() == dim => Ok(v.clone()),
            Some(ParamValue::Scalar(v)) if dim == 1 => Ok(vec![*v]),
            Some(_) => Err(Error::Config(format!(
                "potential parameter 'center' must have length {dim}"
            ))),
        }
    }

    /// Builds the model in dimension `dim`, checking the window claim.
    pub fn build<T: Real>(&self, dim: usize) -> Result<PotentialModel<T>> {
        let model = match self.kind.as_str() {
            "constant" => PotentialModel::new(
                dim,
                PotentialKind::Constant {
                    value: lit(self.scalar("value")?),
                },
                lit(self.delta),
            ),
            "bump_well" | "cosine_well" => {
                let center: Vec<T> = self.center(dim)?.into_iter().map(lit).collect();
                let base = lit(self.scalar("base")?);
                let depth = lit(self.scalar("depth")?);
                let radius = lit(self.scalar("radius")?);
                let kind = if self.kind == "bump_well" {
                    PotentialKind::BumpWell {
                        base,
                        depth,
                        center,
                        radius,
                    }
                } else {
                    PotentialKind::CosineWell {
                        base,
                        depth,
                        center,
                        radius,
                    }
                };
                PotentialModel::new(dim, kind, lit(self.delta))
            }
            "tanh_step" => PotentialModel::new(
                dim,
                PotentialKind::TanhStep {
                    base: lit(self.scalar("base")?),
                    amp: lit(self.scalar("amp")?),
                    center: lit(self.scalar_or("center", 0.0)?),
                    width: lit(self.scalar_or("width", 1.0)?),
                },
                lit(self.delta),
            ),
            other => return Err(Error::Config(format!("unknown potential kind '{other}'"))),
        }
        .map_err(|e| match e {
            Error::Domain(m) => Error::Config(m),
            e => e,
        })?;
        if let Some(w) = self.window {
            match model.window() {
                Some(exact) if to_f64(exact) <= w => {}
                _ => {
                    return Err(Error::Config(format!(
                        "declared window {w} is not a region where '{}' is exactly constant",
                        self.kind
                    )))
                }
            }
        }
        let model = match self.params.get("box") {
            Some(ParamValue::Scalar(b)) => model.with_box_half_width(lit(*b)),
            _ => model,
        };
        Ok(model)
    }
}
