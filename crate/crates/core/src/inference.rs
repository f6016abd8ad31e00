//! Maximum-likelihood fitting of stopped-extreme models, information
//! criteria, likelihood-ratio tests and plug-in precursor cdfs.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use nalgebra::DMatrix;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use statrs::function::gamma::gamma_ur;

use crate::catalog::StoppingFamily;
use crate::dist::ContinuousModel;
use crate::error::{Error, Result};
use crate::optim::NelderMead;
use crate::pgf::Pgf;
use crate::simulation::{substream, uniform_open};
use crate::specs::{self, StoppingSpec};
use crate::transforms::{self, Flavor, MapOp, Step, TransformKind, TransformedModel};

/// Relative step of the finite-difference observed information.
pub const HESSIAN_REL_STEP: f64 = 1e-4;
/// Largest negative likelihood-ratio statistic attributed to rounding.
pub const LRT_NEGATIVE_SLACK: f64 = 1e-6;

/// Anything with a log density and a fixed support.
pub trait LogDensity {
    /// `ln f(y)`; `-inf` where the density vanishes or cannot be evaluated.
    fn log_density(&self, y: f64) -> f64;
    /// Closure of the support.
    fn support(&self) -> (f64, f64);
}

impl LogDensity for ContinuousModel {
    fn log_density(&self, y: f64) -> f64 {
        self.log_pdf(y)
    }
    fn support(&self) -> (f64, f64) {
        ContinuousModel::support(self)
    }
}

impl LogDensity for TransformedModel {
    fn log_density(&self, y: f64) -> f64 {
        match self.log_pdf(y) {
            Ok(v) if !v.is_nan() => v,
            _ => f64::NEG_INFINITY,
        }
    }
    fn support(&self) -> (f64, f64) {
        self.base().support()
    }
}

/// `Σ ln f(y_i)`. Points outside the support are an error naming the
/// index; a vanishing density inside the support gives `-inf`.
pub fn loglik<M: LogDensity + ?Sized>(model: &M, data: &[f64]) -> Result<f64> {
    let (lo, hi) = model.support();
    if let Some((i, &y)) = data.iter().enumerate().find(|(_, y)| !(lo..=hi).contains(*y)) {
        return Err(Error::Support { index: i, value: y });
    }
    Ok(data.iter().map(|&y| model.log_density(y)).sum())
}

fn loglik_value<M: LogDensity + ?Sized>(model: &M, data: &[f64]) -> f64 {
    let mut acc = 0.0;
    for &y in data {
        acc += model.log_density(y);
        if acc == f64::NEG_INFINITY {
            break;
        }
    }
    acc
}

/// `(AIC, BIC)` from a log-likelihood, `k` free parameters and `n` observations.
pub fn aic_bic(loglik: f64, k: usize, n: usize) -> (f64, f64) {
    let k = k as f64;
    (-2.0 * loglik + 2.0 * k, -2.0 * loglik + k * (n as f64).ln())
}

/// Domain of a free parameter and its map to the real line.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Constraint {
    Real,
    /// `(0, inf)`, through `ln`.
    Positive,
    /// `(0, 1)`, through the logit.
    Unit,
    /// `(-1, inf)`, through `ln(1 + x)`.
    AboveMinusOne,
}

impl Constraint {
    pub fn to_free(self, x: f64) -> f64 {
        match self {
            Constraint::Real => x,
            Constraint::Positive => x.ln(),
            Constraint::Unit => (x / (1.0 - x)).ln(),
            Constraint::AboveMinusOne => x.ln_1p(),
        }
    }

    pub fn from_free(self, z: f64) -> f64 {
        match self {
            Constraint::Real => z,
            Constraint::Positive => z.exp(),
            Constraint::Unit => 1.0 / (1.0 + (-z).exp()),
            Constraint::AboveMinusOne => z.exp_m1(),
        }
    }

    pub fn contains(self, x: f64) -> bool {
        x.is_finite()
            && match self {
                Constraint::Real => true,
                Constraint::Positive => x > 0.0,
                Constraint::Unit => x > 0.0 && x < 1.0,
                Constraint::AboveMinusOne => x > -1.0,
            }
    }
}

/// How the stopping model acts on the base in a fitted model.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ModelTransform {
    StoppedMax,
    StoppedMin,
    MaxPrecursor,
    MinPrecursor,
    /// Extension of a closed family at real `eta`, maximum side.
    CombinedMax,
    CombinedMin,
}

impl ModelTransform {
    fn parse(s: &str) -> Result<Self> {
        Ok(match s.trim() {
            "stopped_max" | "max" => Self::StoppedMax,
            "stopped_min" | "min" => Self::StoppedMin,
            "max_precursor" => Self::MaxPrecursor,
            "min_precursor" => Self::MinPrecursor,
            "combined_max" => Self::CombinedMax,
            "combined_min" => Self::CombinedMin,
            other => return Err(Error::Spec(format!("unknown transform '{other}'"))),
        })
    }

    fn op(self) -> Option<(MapOp, TransformKind)> {
        match self {
            Self::StoppedMax => Some((MapOp::Pgf, TransformKind::StoppedMax)),
            Self::StoppedMin => Some((MapOp::Conjugate, TransformKind::StoppedMin)),
            Self::MaxPrecursor => Some((MapOp::Inverse, TransformKind::MaxPrecursor)),
            Self::MinPrecursor => Some((MapOp::ConjugateInverse, TransformKind::MinPrecursor)),
            Self::CombinedMax | Self::CombinedMin => None,
        }
    }
}

fn default_transform() -> ModelTransform {
    ModelTransform::StoppedMax
}

/// A parametric model to fit. Stopping parameters named in `shape` or
/// `params` are held fixed; the remaining native parameters are free. A
/// model without `base` is a model for the stopping counts themselves.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelSpec {
    pub label: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub stopping: Option<StoppingSpec>,
    #[serde(default = "default_transform")]
    pub transform: ModelTransform,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub base: Option<String>,
}

impl ModelSpec {
    pub fn new(label: &str, stopping: Option<StoppingSpec>, base: &str) -> Self {
        ModelSpec {
            label: label.to_string(),
            stopping,
            transform: ModelTransform::StoppedMax,
            base: Some(base.to_string()),
        }
    }

    /// A model for stopping counts.
    pub fn counts(label: &str, stopping: StoppingSpec) -> Self {
        ModelSpec {
            label: label.to_string(),
            stopping: Some(stopping),
            transform: ModelTransform::StoppedMax,
            base: None,
        }
    }

    fn family(name: &str) -> StoppingSpec {
        StoppingSpec {
            family: name.to_string(),
            ..Default::default()
        }
    }

    /// Preset, JSON, JSON file, or `stopping/base[/transform]` with `none`
    /// for no stopping model.
    pub fn parse(s: &str) -> Result<Self> {
        if let Some(p) = preset(s) {
            return Ok(p);
        }
        if let Some(text) = specs::load_json_arg(s)? {
            return Ok(serde_json::from_str(&text)?);
        }
        let parts: Vec<&str> = s.split('/').map(str::trim).collect();
        if !(2..=3).contains(&parts.len()) {
            return Err(Error::Spec(format!(
                "model '{s}' is neither a preset, JSON, nor stopping/base[/transform]"
            )));
        }
        let stopping = match parts[0] {
            "none" | "" => None,
            other => Some(StoppingSpec::parse_inline(other)?),
        };
        specs::base_template(parts[1])?;
        let transform = match parts.get(2) {
            Some(t) => ModelTransform::parse(t)?,
            None => ModelTransform::StoppedMax,
        };
        let spec = ModelSpec {
            label: s.to_string(),
            stopping,
            transform,
            base: Some(parts[1].to_string()),
        };
        ParametricModel::compile(&spec)?;
        Ok(spec)
    }
}

/// The five models of the annual-maximum experiment, plus an exponential baseline.
pub fn preset(name: &str) -> Option<ModelSpec> {
    let key = name.trim().to_ascii_lowercase();
    Some(match key.as_str() {
        "lg-exp" => ModelSpec::new("Lg-Exp", Some(ModelSpec::family("logarithmic")), "exponential"),
        "etnb-exp" => ModelSpec::new("ETNB-Exp", Some(ModelSpec::family("etnb")), "exponential"),
        "tb2-exp" => ModelSpec::new(
            "TB2-Exp",
            Some(StoppingSpec::native("zt_binomial", &[("n", 2.0)])),
            "exponential",
        ),
        "pc-lgnor" => ModelSpec::new(
            "PC-LgNor",
            Some(ModelSpec::family("potential_conjugate")),
            "lognormal",
        ),
        "gev" => ModelSpec::new("GEV", None, "gev"),
        "exp" | "exponential" => ModelSpec::new("Exp", None, "exponential"),
        "lg" => ModelSpec::counts("Lg", ModelSpec::family("logarithmic")),
        _ => return None,
    })
}

/// Lg-Exp, ETNB-Exp, TB2-Exp, PC-LgNor and GEV.
pub fn experiment_specs() -> Vec<ModelSpec> {
    ["lg-exp", "etnb-exp", "tb2-exp", "pc-lgnor", "gev"]
        .iter()
        .filter_map(|n| preset(n))
        .collect()
}

#[derive(Debug, Clone)]
enum StopPart {
    None,
    Native {
        family: &'static str,
        fixed: BTreeMap<String, f64>,
        free: Vec<String>,
    },
    Combined {
        family: Box<StoppingFamily>,
        flavor: Flavor,
    },
}

fn native_constraint(family: &str, name: &str) -> Result<Constraint> {
    Ok(match (family, name) {
        (_, "p" | "b") => Constraint::Unit,
        (_, "r") => Constraint::AboveMinusOne,
        (_, "alpha" | "beta" | "eta") => Constraint::Positive,
        (_, other) => {
            return Err(Error::Spec(format!(
                "{family} parameter '{other}' is an integer and must be fixed"
            )))
        }
    })
}

fn base_constraint(dist: &str, name: &str) -> Constraint {
    match (dist, name) {
        (_, "rate" | "sigma" | "scale") => Constraint::Positive,
        _ => Constraint::Real,
    }
}

/// A [`ModelSpec`] resolved into free parameters and a model builder.
#[derive(Debug, Clone)]
pub struct ParametricModel {
    spec: ModelSpec,
    stop: StopPart,
    base: Option<ContinuousModel>,
    names: Vec<String>,
    constraints: Vec<Constraint>,
    n_stop: usize,
}

impl ParametricModel {
    pub fn compile(spec: &ModelSpec) -> Result<Self> {
        let mut names = Vec::new();
        let mut constraints = Vec::new();
        let stop = match (&spec.stopping, spec.transform) {
            (None, _) => StopPart::None,
            (Some(s), ModelTransform::CombinedMax | ModelTransform::CombinedMin) => {
                let mut shape = s.shape.clone();
                shape.extend(s.params.iter().map(|(k, v)| (k.clone(), *v)));
                let family = crate::catalog::make_family(specs::family_id(&s.family, &shape)?)?;
                if !family.is_closed() {
                    return Err(Error::NotClosed(family.family_id()));
                }
                names.push("eta".to_string());
                constraints.push(Constraint::Real);
                let flavor = if spec.transform == ModelTransform::CombinedMax {
                    Flavor::Max
                } else {
                    Flavor::Min
                };
                StopPart::Combined {
                    family: Box::new(family),
                    flavor,
                }
            }
            (Some(s), _) => {
                if s.eta.is_some() || !s.components.is_empty() {
                    return Err(Error::Spec(
                        "fitted stopping models take native parameters; use a combined transform for eta".into(),
                    ));
                }
                let family = specs::canonical_family(&s.family)
                    .ok_or_else(|| Error::Spec(format!("unknown stopping family '{}'", s.family)))?;
                let mut fixed = s.shape.clone();
                fixed.extend(s.params.iter().map(|(k, v)| (k.clone(), *v)));
                let all = specs::native_param_names(family)?;
                if let Some(k) = fixed.keys().find(|k| !all.contains(&k.as_str())) {
                    return Err(Error::Spec(format!("{family} has no parameter '{k}'")));
                }
                let mut free = Vec::new();
                for n in all.iter().filter(|n| !fixed.contains_key(**n)) {
                    constraints.push(native_constraint(family, n)?);
                    names.push(n.to_string());
                    free.push(n.to_string());
                }
                StopPart::Native { family, fixed, free }
            }
        };
        let n_stop = names.len();
        let base = match &spec.base {
            Some(b) => {
                let t = specs::base_template(b)?;
                for n in t.param_names() {
                    names.push(n.to_string());
                    constraints.push(base_constraint(t.dist_id(), n));
                }
                Some(t)
            }
            None => {
                if matches!(stop, StopPart::None) {
                    return Err(Error::Spec("a model needs a stopping model or a base".into()));
                }
                if matches!(stop, StopPart::Combined { .. }) {
                    return Err(Error::Spec("count models take native stopping parameters".into()));
                }
                None
            }
        };
        Ok(ParametricModel {
            spec: spec.clone(),
            stop,
            base,
            names,
            constraints,
            n_stop,
        })
    }

    pub fn spec(&self) -> &ModelSpec {
        &self.spec
    }

    pub fn param_names(&self) -> &[String] {
        &self.names
    }

    pub fn constraints(&self) -> &[Constraint] {
        &self.constraints
    }

    /// Number of free parameters.
    pub fn k(&self) -> usize {
        self.names.len()
    }

    pub fn is_count_model(&self) -> bool {
        self.base.is_none()
    }

    fn check_len(&self, theta: &[f64]) -> Result<()> {
        if theta.len() == self.k() {
            Ok(())
        } else {
            Err(Error::Spec(format!(
                "{} takes {} parameters, got {}",
                self.spec.label,
                self.k(),
                theta.len()
            )))
        }
    }

    /// The stopping pgf at `theta` (native parameters).
    pub fn build_pgf(&self, theta: &[f64]) -> Result<Pgf> {
        self.check_len(theta)?;
        match &self.stop {
            StopPart::None => Ok(Pgf::identity()),
            StopPart::Native { family, fixed, free } => {
                let mut all = fixed.clone();
                for (n, v) in free.iter().zip(theta) {
                    all.insert(n.clone(), *v);
                }
                specs::native_pgf(family, &all)
            }
            StopPart::Combined { family, .. } => family.member(theta[0].abs()),
        }
    }

    /// The model of the observations at `theta` (native parameters).
    pub fn build(&self, theta: &[f64]) -> Result<TransformedModel> {
        self.check_len(theta)?;
        let base = self
            .base
            .as_ref()
            .ok_or_else(|| Error::Precondition("count models have no continuous part".into()))?
            .with_params(&theta[self.n_stop..])?;
        match &self.stop {
            StopPart::None => Ok(TransformedModel::base_only(base)),
            StopPart::Combined { family, flavor } => {
                transforms::combined_extension(family, theta[0], &base, *flavor)
            }
            StopPart::Native { .. } => {
                let pgf = self.build_pgf(theta)?;
                let (op, kind) = self.spec.transform.op().expect("native transforms have a map");
                Ok(TransformedModel::from_steps(kind, vec![Step::new(op, pgf)], base))
            }
        }
    }

    /// Log-likelihood of continuous observations; `-inf` when `theta` is invalid.
    pub fn loglik_at(&self, theta: &[f64], data: &[f64]) -> f64 {
        match self.build(theta) {
            Ok(m) => loglik_value(&m, data),
            Err(_) => f64::NEG_INFINITY,
        }
    }

    /// Log-likelihood of stopping counts; `-inf` when `theta` is invalid.
    pub fn count_loglik_at(&self, theta: &[f64], counts: &[u64]) -> f64 {
        let pgf = match self.build_pgf(theta) {
            Ok(p) => p,
            Err(_) => return f64::NEG_INFINITY,
        };
        let mut cache: BTreeMap<u64, f64> = BTreeMap::new();
        let mut acc = 0.0;
        for &n in counts {
            let lp = *cache
                .entry(n)
                .or_insert_with(|| pgf.pmf(n).map(f64::ln).unwrap_or(f64::NEG_INFINITY));
            acc += lp;
            if acc == f64::NEG_INFINITY {
                break;
            }
        }
        acc
    }

    /// Data-driven starting values.
    pub fn default_init(&self, data: &[f64]) -> Vec<f64> {
        let mut theta: Vec<f64> = self.names[..self.n_stop]
            .iter()
            .map(|n| match n.as_str() {
                "p" | "b" => 0.5,
                "r" => 0.0,
                "eta" => 1.0,
                _ => 1.0,
            })
            .collect();
        if let Some(base) = &self.base {
            theta.extend(moment_init(base, data));
        }
        theta
    }
}

fn mean_sd(xs: &[f64]) -> (f64, f64) {
    let n = xs.len().max(1) as f64;
    let mean = xs.iter().sum::<f64>() / n;
    let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0).max(1.0);
    (mean, var.sqrt().max(1e-8))
}

const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;

fn moment_init(base: &ContinuousModel, data: &[f64]) -> Vec<f64> {
    let (mean, sd) = mean_sd(data);
    let pi = std::f64::consts::PI;
    match base {
        ContinuousModel::Exponential { .. } => vec![1.0 / mean.abs().max(1e-8)],
        ContinuousModel::Lognormal { .. } => {
            let logs: Vec<f64> = data.iter().filter(|&&y| y > 0.0).map(|y| y.ln()).collect();
            let (m, s) = mean_sd(&logs);
            vec![m, s]
        }
        ContinuousModel::Gumbel { .. } | ContinuousModel::Gev { .. } => {
            let scale = sd * 6f64.sqrt() / pi;
            let loc = mean - EULER_GAMMA * scale;
            if matches!(base, ContinuousModel::Gev { .. }) {
                vec![loc, scale, 0.0]
            } else {
                vec![loc, scale]
            }
        }
        ContinuousModel::Logistic { .. } => vec![mean, sd * 3f64.sqrt() / pi],
        ContinuousModel::Uniform { .. } => {
            let lo = data.iter().copied().fold(f64::INFINITY, f64::min);
            let hi = data.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            let pad = 1e-6 * (hi - lo).abs().max(1e-6);
            vec![lo - pad, hi + pad]
        }
    }
}

/// A value attached to a parameter name.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NamedValue {
    pub name: String,
    pub value: f64,
}

fn named(names: &[String], values: &[f64]) -> Vec<NamedValue> {
    names
        .iter()
        .zip(values)
        .map(|(n, v)| NamedValue {
            name: n.clone(),
            value: *v,
        })
        .collect()
}

/// Outcome of a maximum-likelihood fit.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitResult {
    pub model_spec: ModelSpec,
    pub estimates: Vec<NamedValue>,
    pub loglik: f64,
    pub aic: f64,
    pub bic: f64,
    pub n_obs: usize,
    /// Number of free parameters.
    pub k: usize,
    pub converged: bool,
    pub iterations: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub stderr_estimates: Option<Vec<NamedValue>>,
    /// Covariance of the native estimates, from the observed information.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub covariance: Option<Vec<Vec<f64>>>,
}

impl FitResult {
    pub fn values(&self) -> Vec<f64> {
        self.estimates.iter().map(|e| e.value).collect()
    }

    pub fn estimate(&self, name: &str) -> Option<f64> {
        self.estimates.iter().find(|e| e.name == name).map(|e| e.value)
    }

    pub fn stderr(&self, name: &str) -> Option<f64> {
        self.stderr_estimates
            .as_ref()?
            .iter()
            .find(|e| e.name == name)
            .map(|e| e.value)
    }

    /// The fitted model of the observations.
    pub fn model(&self) -> Result<TransformedModel> {
        ParametricModel::compile(&self.model_spec)?.build(&self.values())
    }

    fn covariance_matrix(&self) -> Option<DMatrix<f64>> {
        let c = self.covariance.as_ref()?;
        let k = c.len();
        Some(DMatrix::from_fn(k, k, |i, j| c[i][j]))
    }
}

/// `(AIC, BIC)` of a fit.
pub fn information_criteria(fit: &FitResult) -> (f64, f64) {
    aic_bic(fit.loglik, fit.k, fit.n_obs)
}

/// Optimizer settings for [`fit_mle`].
#[derive(Debug, Clone, PartialEq)]
pub struct FitOptions {
    pub starts: usize,
    /// Half-width of the uniform jitter applied to the free coordinates of later starts.
    pub jitter: f64,
    pub seed: u64,
    /// Optimize over the unconstrained reparametrization; otherwise over
    /// native coordinates rescaled by the starting point.
    pub reparametrize: bool,
    pub stderr: bool,
    pub simplex: NelderMead,
    /// Additional native starting points tried before the jittered ones.
    pub extra_starts: Vec<Vec<f64>>,
}

impl Default for FitOptions {
    fn default() -> Self {
        FitOptions {
            starts: 5,
            jitter: 1.0,
            seed: 0,
            reparametrize: true,
            stderr: true,
            simplex: NelderMead::default(),
            extra_starts: vec![],
        }
    }
}

struct Coordinates<'a> {
    constraints: &'a [Constraint],
    origin: Vec<f64>,
    scale: Vec<f64>,
    reparametrize: bool,
}

impl Coordinates<'_> {
    fn to_native(&self, z: &[f64]) -> Vec<f64> {
        if self.reparametrize {
            z.iter().zip(self.constraints).map(|(z, c)| c.from_free(*z)).collect()
        } else {
            z.iter()
                .zip(self.origin.iter().zip(&self.scale))
                .map(|(z, (o, s))| o + s * z)
                .collect()
        }
    }

    fn to_free(&self, x: &[f64]) -> Vec<f64> {
        if self.reparametrize {
            x.iter().zip(self.constraints).map(|(x, c)| c.to_free(*x)).collect()
        } else {
            x.iter()
                .zip(self.origin.iter().zip(&self.scale))
                .map(|(x, (o, s))| (x - o) / s)
                .collect()
        }
    }
}

fn validate_init(model: &ParametricModel, init: &[f64]) -> Result<()> {
    model.check_len(init)?;
    for ((n, c), v) in model.names.iter().zip(&model.constraints).zip(init) {
        if !c.contains(*v) {
            return Err(Error::Parameter {
                name: n.clone(),
                value: *v,
                reason: format!("initial value outside {c:?} domain"),
            });
        }
    }
    Ok(())
}

struct Optimum {
    theta: Vec<f64>,
    loglik: f64,
    converged: bool,
    iterations: usize,
}

fn maximize<F: Fn(&[f64]) -> f64>(
    model: &ParametricModel,
    objective: F,
    init: &[f64],
    options: &FitOptions,
) -> Result<Optimum> {
    validate_init(model, init)?;
    let coords = Coordinates {
        constraints: &model.constraints,
        origin: init.to_vec(),
        scale: init.iter().map(|v| 0.1 * v.abs().max(1e-3)).collect(),
        reparametrize: options.reparametrize,
    };
    let neg = |z: &[f64]| {
        let theta = coords.to_native(z);
        if theta.iter().zip(&model.constraints).any(|(v, c)| !c.contains(*v)) {
            return f64::INFINITY;
        }
        -objective(&theta)
    };

    let mut starts: Vec<Vec<f64>> = vec![coords.to_free(init)];
    for extra in &options.extra_starts {
        if validate_init(model, extra).is_ok() {
            starts.push(coords.to_free(extra));
        }
    }
    let z0 = starts[0].clone();
    for s in 1..options.starts.max(1) {
        let mut rng = substream(options.seed, s as u64);
        starts.push(
            z0.iter()
                .map(|z| z + options.jitter * (2.0 * uniform_open(&mut rng) - 1.0))
                .collect(),
        );
    }

    let mut iterations = 0;
    let mut best: Option<crate::optim::Minimum> = None;
    for z in &starts {
        let m = options.simplex.minimize(neg, z);
        iterations += m.iterations;
        if best.as_ref().is_none_or(|b| m.value < b.value) {
            best = Some(m);
        }
    }
    let mut best = best.expect("at least one start");
    // a fresh simplex at the optimum guards against premature collapse
    let polish = options.simplex.minimize(neg, &best.x);
    iterations += polish.iterations;
    if polish.value <= best.value {
        best = polish;
    } else {
        best.converged = best.converged && polish.converged;
    }
    Ok(Optimum {
        theta: coords.to_native(&best.x),
        loglik: -best.value,
        converged: best.converged && best.value.is_finite(),
        iterations,
    })
}

/// Observed information by central differences of the log-likelihood,
/// inverted with a pseudo-inverse. `None` when it cannot be evaluated or is
/// not positive definite on the diagonal of the inverse.
fn covariance<F: Fn(&[f64]) -> f64>(model: &ParametricModel, objective: F, theta: &[f64]) -> Option<DMatrix<f64>> {
    let k = theta.len();
    if k == 0 {
        return None;
    }
    let steps: Vec<f64> = theta.iter().map(|v| HESSIAN_REL_STEP * v.abs().max(1e-3)).collect();
    let f = |d: &[(usize, f64)]| {
        let mut t = theta.to_vec();
        for &(i, s) in d {
            t[i] += s;
        }
        if t.iter().zip(&model.constraints).any(|(v, c)| !c.contains(*v)) {
            return f64::NAN;
        }
        objective(&t)
    };
    let f0 = f(&[]);
    let mut h = DMatrix::<f64>::zeros(k, k);
    for i in 0..k {
        let hi = steps[i];
        h[(i, i)] = -(f(&[(i, hi)]) - 2.0 * f0 + f(&[(i, -hi)])) / (hi * hi);
        for j in 0..i {
            let hj = steps[j];
            let v = -(f(&[(i, hi), (j, hj)]) - f(&[(i, hi), (j, -hj)]) - f(&[(i, -hi), (j, hj)])
                + f(&[(i, -hi), (j, -hj)]))
                / (4.0 * hi * hj);
            h[(i, j)] = v;
            h[(j, i)] = v;
        }
    }
    if h.iter().any(|v| !v.is_finite()) {
        return None;
    }
    let scale = h.iter().fold(0.0f64, |a, v| a.max(v.abs()));
    let cov = h.pseudo_inverse(1e-12 * scale).ok()?;
    if (0..k).any(|i| cov[(i, i)].is_nan() || cov[(i, i)] <= 0.0) {
        return None;
    }
    Some(cov)
}

fn assemble(
    model: &ParametricModel,
    opt: Optimum,
    n_obs: usize,
    cov: Option<DMatrix<f64>>,
) -> FitResult {
    let (aic, bic) = aic_bic(opt.loglik, model.k(), n_obs);
    let stderr_estimates = cov.as_ref().map(|c| {
        let se: Vec<f64> = (0..model.k()).map(|i| c[(i, i)].sqrt()).collect();
        named(&model.names, &se)
    });
    FitResult {
        model_spec: model.spec.clone(),
        estimates: named(&model.names, &opt.theta),
        loglik: opt.loglik,
        aic,
        bic,
        n_obs,
        k: model.k(),
        converged: opt.converged,
        iterations: opt.iterations,
        stderr_estimates,
        covariance: cov.map(|c| (0..c.nrows()).map(|i| c.row(i).iter().copied().collect()).collect()),
    }
}

/// Maximum-likelihood fit of a model of continuous observations.
///
/// Best of `options.starts` simplex runs over the unconstrained
/// reparametrization. When no candidate attains a finite likelihood the
/// first observation outside the support at the best point is reported.
pub fn fit_mle(spec: &ModelSpec, data: &[f64], init: Option<&[f64]>, options: &FitOptions) -> Result<FitResult> {
    let model = ParametricModel::compile(spec)?;
    if model.is_count_model() {
        return Err(Error::Spec(format!("{} is a count model; use fit_counts", spec.label)));
    }
    if data.is_empty() {
        return Err(Error::Precondition("no observations to fit".into()));
    }
    if let Some((i, &y)) = data.iter().enumerate().find(|(_, y)| !y.is_finite()) {
        return Err(Error::Support { index: i, value: y });
    }
    let init = match init {
        Some(v) => v.to_vec(),
        None => model.default_init(data),
    };
    let objective = |theta: &[f64]| model.loglik_at(theta, data);
    let opt = maximize(&model, objective, &init, options)?;
    if !opt.loglik.is_finite() {
        let built = model.build(&opt.theta)?;
        if let Some((i, &y)) = data.iter().enumerate().find(|(_, &y)| !built.log_density(y).is_finite()) {
            return Err(Error::Support { index: i, value: y });
        }
    }
    let cov = if options.stderr && opt.loglik.is_finite() {
        covariance(&model, objective, &opt.theta)
    } else {
        None
    };
    Ok(assemble(&model, opt, data.len(), cov))
}

/// Maximum-likelihood fit of a stopping model to observed counts.
pub fn fit_counts(spec: &ModelSpec, counts: &[u64], init: Option<&[f64]>, options: &FitOptions) -> Result<FitResult> {
    let model = ParametricModel::compile(spec)?;
    if !model.is_count_model() {
        return Err(Error::Spec(format!("{} is not a count model", spec.label)));
    }
    if counts.is_empty() {
        return Err(Error::Precondition("no counts to fit".into()));
    }
    if let Some((i, &n)) = counts.iter().enumerate().find(|(_, &n)| n == 0) {
        return Err(Error::Support { index: i, value: n as f64 });
    }
    let init = match init {
        Some(v) => v.to_vec(),
        None => model.default_init(&[]),
    };
    let objective = |theta: &[f64]| model.count_loglik_at(theta, counts);
    let opt = maximize(&model, objective, &init, options)?;
    let cov = if options.stderr && opt.loglik.is_finite() {
        covariance(&model, objective, &opt.theta)
    } else {
        None
    };
    Ok(assemble(&model, opt, counts.len(), cov))
}

/// Likelihood-ratio test of a nested model against a larger one.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LrtResult {
    pub statistic: f64,
    pub df: usize,
    pub p_value: f64,
}

/// Upper tail of the chi-square distribution, through the regularized
/// upper incomplete gamma function.
pub fn chi_square_sf(x: f64, df: f64) -> f64 {
    if x <= 0.0 {
        return 1.0;
    }
    if x.is_infinite() {
        return 0.0;
    }
    gamma_ur(df / 2.0, x / 2.0)
}

/// LRT from two log-likelihoods and the difference in free parameters.
pub fn lrt_from_logliks(nested: f64, full: f64, df: usize) -> Result<LrtResult> {
    if df == 0 {
        return Err(Error::Precondition("the full model needs more free parameters".into()));
    }
    let mut statistic = 2.0 * (full - nested);
    if statistic.is_nan() {
        return Err(Error::Precondition("log-likelihoods must be comparable numbers".into()));
    }
    if statistic < -LRT_NEGATIVE_SLACK {
        return Err(Error::Precondition(format!(
            "negative likelihood-ratio statistic {statistic:.3e}: the full model was not fitted to its optimum"
        )));
    }
    statistic = statistic.max(0.0);
    Ok(LrtResult {
        statistic,
        df,
        p_value: chi_square_sf(statistic, df as f64),
    })
}

pub fn likelihood_ratio_test(nested: &FitResult, full: &FitResult) -> Result<LrtResult> {
    if nested.k >= full.k {
        return Err(Error::Precondition(format!(
            "nested model has {} parameters, full model {}",
            nested.k, full.k
        )));
    }
    if nested.n_obs != full.n_obs {
        return Err(Error::Precondition("models were fitted to different data".into()));
    }
    lrt_from_logliks(nested.loglik, full.loglik, full.k - nested.k)
}

/// One row of a model comparison.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComparisonRow {
    pub label: String,
    /// 1 for the smallest AIC; `None` for failed fits.
    pub rank: Option<usize>,
    pub fit: Option<FitResult>,
    pub error: Option<String>,
}

/// Fits ranked by AIC, failures last.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Comparison {
    pub rows: Vec<ComparisonRow>,
}

/// Starting point for `into` taken from a fit of a model it nests.
fn embed(from: &FitResult, into: &ParametricModel) -> Option<Vec<f64>> {
    let fs = &from.model_spec;
    let is = &into.spec;
    if fs.base != is.base || fs.transform != is.transform {
        return None;
    }
    let ff = fs.stopping.as_ref().map(|s| specs::canonical_family(&s.family));
    let inf = is.stopping.as_ref().map(|s| specs::canonical_family(&s.family));
    let mut theta = Vec::with_capacity(into.k());
    for name in &into.names {
        let v = match from.estimate(name) {
            Some(v) => v,
            None if ff == Some(Some("logarithmic")) && inf == Some(Some("etnb")) && name == "r" => 0.0,
            None => return None,
        };
        theta.push(v);
    }
    (from.k < into.k()).then_some(theta)
}

/// Fits every spec, ranks by AIC, and records failures without stopping.
///
/// A model that nests another is refitted from the smaller model's optimum
/// when that gives it a better likelihood.
pub fn compare_models(specs: &[ModelSpec], data: &[f64], options: &FitOptions) -> Comparison {
    let mut fits: Vec<Result<FitResult>> = specs.par_iter().map(|s| fit_mle(s, data, None, options)).collect();
    for i in 0..specs.len() {
        let Ok(model) = ParametricModel::compile(&specs[i]) else {
            continue;
        };
        let warm: Vec<Vec<f64>> = fits
            .iter()
            .enumerate()
            .filter(|(j, _)| *j != i)
            .filter_map(|(_, f)| f.as_ref().ok())
            .filter(|f| fits[i].as_ref().map_or(true, |own| f.loglik > own.loglik))
            .filter_map(|f| embed(f, &model))
            .collect();
        if warm.is_empty() {
            continue;
        }
        let mut opts = options.clone();
        opts.starts = 1;
        for w in warm {
            let Ok(refit) = fit_mle(&specs[i], data, Some(&w), &opts) else {
                continue;
            };
            let better = fits[i].as_ref().map_or(true, |own| refit.loglik > own.loglik);
            if better {
                fits[i] = Ok(refit);
            }
        }
    }
    let mut rows: Vec<ComparisonRow> = specs
        .iter()
        .zip(fits)
        .map(|(s, f)| match f {
            Ok(fit) if fit.loglik.is_finite() => ComparisonRow {
                label: s.label.clone(),
                rank: None,
                fit: Some(fit),
                error: None,
            },
            Ok(_) => ComparisonRow {
                label: s.label.clone(),
                rank: None,
                fit: None,
                error: Some("no finite likelihood found".into()),
            },
            Err(e) => ComparisonRow {
                label: s.label.clone(),
                rank: None,
                fit: None,
                error: Some(e.to_string()),
            },
        })
        .collect();
    rows.sort_by(|a, b| match (&a.fit, &b.fit) {
        (Some(x), Some(y)) => x.aic.total_cmp(&y.aic),
        (Some(_), None) => std::cmp::Ordering::Less,
        (None, Some(_)) => std::cmp::Ordering::Greater,
        (None, None) => std::cmp::Ordering::Equal,
    });
    let mut rank = 0;
    for r in &mut rows {
        if r.fit.is_some() {
            rank += 1;
            r.rank = Some(rank);
        }
    }
    Comparison { rows }
}

/// `x` to six significant digits without trailing zeros.
pub fn fmt_sig(x: f64) -> String {
    if x == 0.0 {
        return "0".into();
    }
    if !x.is_finite() {
        return format!("{x}");
    }
    let exp = x.abs().log10().floor() as i32;
    if !(-4..6).contains(&exp) {
        let s = format!("{:.5e}", x);
        let (mant, e) = s.split_once('e').unwrap_or((&s, "0"));
        let mant = mant.trim_end_matches('0').trim_end_matches('.');
        return format!("{mant}e{e}");
    }
    let decimals = (5 - exp).max(0) as usize;
    let s = format!("{:.*}", decimals, x);
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.').to_string()
    } else {
        s
    }
}

impl Comparison {
    pub fn fit(&self, label: &str) -> Option<&FitResult> {
        self.rows.iter().find(|r| r.label == label)?.fit.as_ref()
    }

    /// Aligned text table with columns Model, N.par, MLE, loglikel, AIC, BIC.
    pub fn to_table(&self) -> String {
        let header = ["Model", "N.par", "MLE", "loglikel", "AIC", "BIC"];
        let mut cells: Vec<[String; 6]> = vec![header.map(String::from)];
        for r in &self.rows {
            cells.push(match &r.fit {
                Some(f) => [
                    f.model_spec.label.clone(),
                    f.k.to_string(),
                    f.estimates
                        .iter()
                        .map(|e| format!("{}={}", e.name, fmt_sig(e.value)))
                        .collect::<Vec<_>>()
                        .join(", "),
                    fmt_sig(f.loglik),
                    fmt_sig(f.aic),
                    fmt_sig(f.bic),
                ],
                None => [
                    r.label.clone(),
                    "-".into(),
                    format!("failed: {}", r.error.as_deref().unwrap_or("unknown")),
                    "-".into(),
                    "-".into(),
                    "-".into(),
                ],
            });
        }
        let widths: Vec<usize> = (0..6)
            .map(|c| cells.iter().map(|row| row[c].chars().count()).max().unwrap_or(0))
            .collect();
        let mut out = String::new();
        for row in &cells {
            let mut line = String::new();
            for (c, cell) in row.iter().enumerate() {
                let pad = widths[c] - cell.chars().count();
                if c == 0 || c == 2 {
                    let _ = write!(line, "{cell}{}", " ".repeat(pad));
                } else {
                    let _ = write!(line, "{}{cell}", " ".repeat(pad));
                }
                if c < 5 {
                    line.push_str("  ");
                }
            }
            out.push_str(line.trim_end());
            out.push('\n');
        }
        out
    }
}

#[derive(Debug, Clone)]
enum Source<T> {
    Fixed(T),
    Fitted {
        model: ParametricModel,
        theta: Vec<f64>,
        cov: Option<DMatrix<f64>>,
    },
}

/// Plug-in estimate of the cdf of the variable whose stopped maximum was fitted.
#[derive(Debug, Clone)]
pub struct PrecursorCdf {
    stopping: Source<Pgf>,
    y_model: Source<TransformedModel>,
    /// Normal quantile of the pointwise bands.
    pub z: f64,
}

/// One evaluation of a [`PrecursorCdf`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PrecursorPoint {
    pub x: f64,
    pub estimate: f64,
    pub stderr: Option<f64>,
    pub lower: Option<f64>,
    pub upper: Option<f64>,
}

/// `F_X(x) = h^{-1}(F_Y(x))` from a fitted count model (or `N_I` when
/// absent) and a fitted model of the extremes. Delta-method bands are
/// available when both fits carry a covariance, or the missing one is fixed.
pub fn precursor_cdf_estimate(stopping_fit: Option<&FitResult>, y_fit: &FitResult) -> Result<PrecursorCdf> {
    let stopping = match stopping_fit {
        None => Source::Fixed(Pgf::identity()),
        Some(f) => {
            let model = ParametricModel::compile(&f.model_spec)?;
            if !model.is_count_model() {
                return Err(Error::Spec(format!("{} is not a count model", f.model_spec.label)));
            }
            Source::Fitted {
                theta: f.values(),
                cov: f.covariance_matrix(),
                model,
            }
        }
    };
    let model = ParametricModel::compile(&y_fit.model_spec)?;
    model.build(&y_fit.values())?;
    Ok(PrecursorCdf {
        stopping,
        y_model: Source::Fitted {
            theta: y_fit.values(),
            cov: y_fit.covariance_matrix(),
            model,
        },
        z: 1.959_963_984_540_054,
    })
}

impl PrecursorCdf {
    /// Point estimate only, from fixed models.
    pub fn fixed(stopping: &Pgf, y_model: &TransformedModel) -> Self {
        PrecursorCdf {
            stopping: Source::Fixed(stopping.clone()),
            y_model: Source::Fixed(y_model.clone()),
            z: 1.959_963_984_540_054,
        }
    }

    fn value(&self, stop_theta: Option<&[f64]>, y_theta: Option<&[f64]>, x: f64) -> Result<f64> {
        let fy = match (&self.y_model, y_theta) {
            (Source::Fixed(m), _) => m.cdf(x)?,
            (Source::Fitted { model, theta, .. }, t) => model.build(t.unwrap_or(theta))?.cdf(x)?,
        };
        let pgf = match (&self.stopping, stop_theta) {
            (Source::Fixed(p), _) => p.clone(),
            (Source::Fitted { model, theta, .. }, t) => model.build_pgf(t.unwrap_or(theta))?,
        };
        pgf.inverse_eval(fy)
    }

    fn gradient_part<T>(&self, source: &Source<T>, x: f64, stop_side: bool) -> Option<Result<f64>> {
        let Source::Fitted { model, theta, cov } = source else {
            return Some(Ok(0.0));
        };
        let cov = cov.as_ref()?;
        let k = theta.len();
        let mut grad = vec![0.0; k];
        for i in 0..k {
            let h = 1e-5 * theta[i].abs().max(1e-3);
            let shifted = |s: f64| {
                let mut t = theta.clone();
                t[i] += s;
                if !model.constraints[i].contains(t[i]) {
                    return Err(Error::Precondition("band step leaves the parameter domain".into()));
                }
                if stop_side {
                    self.value(Some(&t), None, x)
                } else {
                    self.value(None, Some(&t), x)
                }
            };
            let up = match shifted(h) {
                Ok(v) => v,
                Err(e) => return Some(Err(e)),
            };
            let down = match shifted(-h) {
                Ok(v) => v,
                Err(e) => return Some(Err(e)),
            };
            grad[i] = (up - down) / (2.0 * h);
        }
        let mut var = 0.0;
        for i in 0..k {
            for j in 0..k {
                var += grad[i] * cov[(i, j)] * grad[j];
            }
        }
        Some(Ok(var))
    }

    /// Estimate and, when covariances are known, pointwise bands clipped to `[0, 1]`.
    pub fn eval(&self, x: f64) -> Result<PrecursorPoint> {
        let estimate = self.value(None, None, x)?;
        let fitted = matches!(self.stopping, Source::Fitted { .. }) || matches!(self.y_model, Source::Fitted { .. });
        let var = match (
            self.gradient_part(&self.stopping, x, true),
            self.gradient_part(&self.y_model, x, false),
        ) {
            (Some(a), Some(b)) if fitted => Some(a? + b?),
            _ => None,
        };
        let stderr = var.map(|v| v.max(0.0).sqrt());
        Ok(PrecursorPoint {
            x,
            estimate,
            stderr,
            lower: stderr.map(|s| (estimate - self.z * s).clamp(0.0, 1.0)),
            upper: stderr.map(|s| (estimate + self.z * s).clamp(0.0, 1.0)),
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::simulation::simulate_stopped;

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol
    }

    #[test]
    fn loglik_examples() {
        let base = ContinuousModel::exponential(0.01).unwrap();
        let v = loglik(&base, &[100.0]).unwrap();
        assert!(close(v, (0.01f64 * (-1.0f64).exp()).ln(), 1e-12));
        assert!(close(v, -5.60517, 1e-5));
        let data = [3.0, 50.0, 400.0];
        let stopped = transforms::stopped_max(&Pgf::identity(), &base);
        assert_eq!(loglik(&stopped, &data).unwrap(), loglik(&base, &data).unwrap());
        let lgn = ContinuousModel::lognormal(0.0, 1.0).unwrap();
        assert_eq!(
            loglik(&lgn, &[1.0, -2.0]),
            Err(Error::Support { index: 1, value: -2.0 })
        );
    }

    #[test]
    fn criteria_arithmetic() {
        let (aic, bic) = aic_bic(-942.326, 2, 150);
        assert!(close(aic, 1888.65, 0.01) && close(bic, 1894.67, 0.01));
        let (aic, bic) = aic_bic(-954.256, 3, 150);
        assert!(close(aic, 1914.51, 0.01) && close(bic, 1923.54, 0.01));
        assert_eq!(aic_bic(0.0, 0, 150), (0.0, 0.0));
    }

    #[test]
    fn lrt_examples() {
        let r = lrt_from_logliks(-942.326, -942.172, 1).unwrap();
        assert!(close(r.statistic, 0.308, 1e-9));
        assert!(close(r.p_value, 0.579, 1e-3));
        // independent oracle: statrs' chi-square distribution
        use statrs::distribution::{ChiSquared, ContinuousCDF};
        let chi = ChiSquared::new(1.0).unwrap();
        assert!(close(r.p_value, 1.0 - chi.cdf(0.308), 1e-12));
        assert!(close(chi_square_sf(3.841, 1.0), 0.05, 1e-3));
        assert_eq!(lrt_from_logliks(-5.0, -5.0, 1).unwrap().p_value, 1.0);
        assert!(lrt_from_logliks(-5.0, -5.1, 1).is_err());
        assert!(lrt_from_logliks(-5.0, -5.0 - 1e-7, 1).is_ok());
    }

    #[test]
    fn constraints_round_trip() {
        for (c, x) in [
            (Constraint::Unit, 0.95),
            (Constraint::Positive, 0.01),
            (Constraint::AboveMinusOne, -0.3),
            (Constraint::Real, -2.0),
        ] {
            assert!(close(c.from_free(c.to_free(x)), x, 1e-15));
        }
    }

    #[test]
    fn presets_compile() {
        let ks: Vec<usize> = experiment_specs()
            .iter()
            .map(|s| ParametricModel::compile(s).unwrap().k())
            .collect();
        assert_eq!(ks, vec![2, 3, 2, 3, 3]);
        let m = ModelSpec::parse("zt_binomial:n=2/exponential").unwrap();
        assert_eq!(ParametricModel::compile(&m).unwrap().param_names(), ["p", "rate"]);
        assert!(ModelSpec::parse("zt_binomial/exponential").is_err());
        let c = ModelSpec::parse("ex63:alpha=1/exponential/combined_max").unwrap();
        assert_eq!(ParametricModel::compile(&c).unwrap().param_names(), ["eta", "rate"]);
    }

    #[test]
    fn exponential_fit_matches_closed_form() {
        let base = ContinuousModel::exponential(0.01).unwrap();
        let s = simulate_stopped(&Pgf::identity(), &base, 2000, Flavor::Max, 4).unwrap();
        let fit = fit_mle(&preset("exp").unwrap(), &s.values, None, &FitOptions::default()).unwrap();
        let mean = s.values.iter().sum::<f64>() / s.len() as f64;
        assert!(fit.converged);
        assert!(close(fit.estimate("rate").unwrap() * mean, 1.0, 1e-7));
        let se = fit.stderr("rate").unwrap();
        assert!(close(se, fit.estimate("rate").unwrap() / (s.len() as f64).sqrt(), 1e-6));
        assert!(close(fit.loglik, loglik(&fit.model().unwrap(), &s.values).unwrap(), 1e-9));
    }

    #[test]
    fn support_violation_names_row() {
        let data = [1.0, 2.0, -3.0, 4.0];
        let err = fit_mle(&ModelSpec::new("LgNor", None, "lognormal"), &data, None, &FitOptions::default());
        assert_eq!(err.unwrap_err(), Error::Support { index: 2, value: -3.0 });
    }

    #[test]
    fn comparison_isolates_failures() {
        let base = ContinuousModel::exponential(0.01).unwrap();
        let s = simulate_stopped(&Pgf::logarithmic(0.9).unwrap(), &base, 150, Flavor::Max, 8).unwrap();
        let bad = ModelSpec {
            label: "Bad".into(),
            stopping: Some(StoppingSpec::native("zt_binomial", &[("n", 0.5)])),
            transform: ModelTransform::StoppedMax,
            base: Some("exponential".into()),
        };
        let opts = FitOptions {
            starts: 2,
            ..Default::default()
        };
        let cmp = compare_models(&[preset("lg-exp").unwrap(), bad], &s.values, &opts);
        assert_eq!(cmp.rows[0].rank, Some(1));
        assert!(cmp.rows[1].error.is_some());
        let table = cmp.to_table();
        assert!(table.starts_with("Model"));
        assert!(table.contains("failed"));
    }

    #[test]
    fn formatting() {
        assert_eq!(fmt_sig(-942.326), "-942.326");
        assert_eq!(fmt_sig(1888.652), "1888.65");
        assert_eq!(fmt_sig(0.95), "0.95");
        assert_eq!(fmt_sig(0.00981234567), "0.00981235");
        assert_eq!(fmt_sig(1234567.0), "1.23457e6");
    }

    #[test]
    fn precursor_with_identity_is_y_cdf() {
        let base = ContinuousModel::exponential(0.02).unwrap();
        let s = simulate_stopped(&Pgf::identity(), &base, 500, Flavor::Max, 3).unwrap();
        let fit = fit_mle(&preset("exp").unwrap(), &s.values, None, &FitOptions::default()).unwrap();
        let est = precursor_cdf_estimate(None, &fit).unwrap();
        let y = fit.model().unwrap();
        for x in [5.0, 40.0, 120.0] {
            let p = est.eval(x).unwrap();
            assert_eq!(p.estimate, y.cdf(x).unwrap());
            assert!(p.lower.unwrap() <= p.estimate && p.estimate <= p.upper.unwrap());
        }
    }
}
