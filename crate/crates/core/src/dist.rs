//! Continuous base models.
//!
//! The GEV follows the convention `F(x) = exp(-z^{1/k})` with
//! `z = 1 - k (x - location) / scale`, so a negative shape gives a heavy
//! upper tail. This is the opposite sign of the more common parametrization.

use std::f64::consts::SQRT_2;
use std::fmt;

use rand::RngCore;
use serde::{Deserialize, Serialize};
use statrs::function::erf::{erfc, erfc_inv};

use crate::error::{Error, Result};

/// Below this `|shape|` the GEV is evaluated as its Gumbel limit.
pub const GEV_GUMBEL_WINDOW: f64 = 1e-8;

/// A continuous distribution on the real line.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "dist", rename_all = "snake_case")]
pub enum ContinuousModel {
    Exponential { rate: f64 },
    /// `ln X ~ Normal(mu, sigma^2)`.
    Lognormal { mu: f64, sigma: f64 },
    /// Maximum-type Gumbel, `exp(-exp(-(x - location) / scale))`.
    Gumbel { location: f64, scale: f64 },
    Logistic { location: f64, scale: f64 },
    Uniform { lower: f64, upper: f64 },
    Gev { location: f64, scale: f64, shape: f64 },
}

fn positive(name: &str, v: f64) -> Result<()> {
    if v.is_finite() && v > 0.0 {
        Ok(())
    } else {
        Err(Error::param(name, v, "must be positive and finite"))
    }
}

fn finite(name: &str, v: f64) -> Result<()> {
    if v.is_finite() {
        Ok(())
    } else {
        Err(Error::param(name, v, "must be finite"))
    }
}

fn std_normal_cdf(z: f64) -> f64 {
    0.5 * erfc(-z / SQRT_2)
}

fn std_normal_quantile(u: f64) -> f64 {
    let mut z = -SQRT_2 * erfc_inv(2.0 * u);
    // Newton polish, with the residual taken on the nearer tail
    for _ in 0..2 {
        let density = (-0.5 * z * z).exp() / (2.0 * std::f64::consts::PI).sqrt();
        if density <= 0.0 {
            break;
        }
        let resid = if z < 0.0 {
            std_normal_cdf(z) - u
        } else {
            (1.0 - u) - std_normal_cdf(-z)
        };
        z -= resid / density;
    }
    z
}

impl ContinuousModel {
    pub fn exponential(rate: f64) -> Result<Self> {
        Self::Exponential { rate }.validated()
    }

    pub fn lognormal(mu: f64, sigma: f64) -> Result<Self> {
        Self::Lognormal { mu, sigma }.validated()
    }

    pub fn gumbel(location: f64, scale: f64) -> Result<Self> {
        Self::Gumbel { location, scale }.validated()
    }

    pub fn logistic(location: f64, scale: f64) -> Result<Self> {
        Self::Logistic { location, scale }.validated()
    }

    pub fn uniform(lower: f64, upper: f64) -> Result<Self> {
        Self::Uniform { lower, upper }.validated()
    }

    pub fn gev(location: f64, scale: f64, shape: f64) -> Result<Self> {
        Self::Gev {
            location,
            scale,
            shape,
        }
        .validated()
    }

    /// Checks parameter domains, returning the model unchanged.
    pub fn validated(self) -> Result<Self> {
        match self {
            Self::Exponential { rate } => positive("rate", rate)?,
            Self::Lognormal { mu, sigma } => {
                finite("mu", mu)?;
                positive("sigma", sigma)?;
            }
            Self::Gumbel { location, scale } | Self::Logistic { location, scale } => {
                finite("location", location)?;
                positive("scale", scale)?;
            }
            Self::Uniform { lower, upper } => {
                finite("lower", lower)?;
                finite("upper", upper)?;
                if upper <= lower {
                    return Err(Error::param("upper", upper, "must exceed lower"));
                }
            }
            Self::Gev {
                location,
                scale,
                shape,
            } => {
                finite("location", location)?;
                positive("scale", scale)?;
                finite("shape", shape)?;
            }
        }
        Ok(self)
    }

    pub fn dist_id(&self) -> &'static str {
        match self {
            Self::Exponential { .. } => "exponential",
            Self::Lognormal { .. } => "lognormal",
            Self::Gumbel { .. } => "gumbel",
            Self::Logistic { .. } => "logistic",
            Self::Uniform { .. } => "uniform",
            Self::Gev { .. } => "gev",
        }
    }

    pub fn param_names(&self) -> &'static [&'static str] {
        match self {
            Self::Exponential { .. } => &["rate"],
            Self::Lognormal { .. } => &["mu", "sigma"],
            Self::Gumbel { .. } | Self::Logistic { .. } => &["location", "scale"],
            Self::Uniform { .. } => &["lower", "upper"],
            Self::Gev { .. } => &["location", "scale", "shape"],
        }
    }

    pub fn params(&self) -> Vec<f64> {
        match *self {
            Self::Exponential { rate } => vec![rate],
            Self::Lognormal { mu, sigma } => vec![mu, sigma],
            Self::Gumbel { location, scale } | Self::Logistic { location, scale } => {
                vec![location, scale]
            }
            Self::Uniform { lower, upper } => vec![lower, upper],
            Self::Gev {
                location,
                scale,
                shape,
            } => vec![location, scale, shape],
        }
    }

    /// Same distribution type with new parameters, validated.
    pub fn with_params(&self, p: &[f64]) -> Result<Self> {
        if p.len() != self.param_names().len() {
            return Err(Error::Spec(format!(
                "{} takes {} parameters, got {}",
                self.dist_id(),
                self.param_names().len(),
                p.len()
            )));
        }
        match self {
            Self::Exponential { .. } => Self::exponential(p[0]),
            Self::Lognormal { .. } => Self::lognormal(p[0], p[1]),
            Self::Gumbel { .. } => Self::gumbel(p[0], p[1]),
            Self::Logistic { .. } => Self::logistic(p[0], p[1]),
            Self::Uniform { .. } => Self::uniform(p[0], p[1]),
            Self::Gev { .. } => Self::gev(p[0], p[1], p[2]),
        }
    }

    /// Closure of the support as `(lower, upper)`, possibly infinite.
    pub fn support(&self) -> (f64, f64) {
        match *self {
            Self::Exponential { .. } | Self::Lognormal { .. } => (0.0, f64::INFINITY),
            Self::Gumbel { .. } | Self::Logistic { .. } => (f64::NEG_INFINITY, f64::INFINITY),
            Self::Uniform { lower, upper } => (lower, upper),
            Self::Gev {
                location,
                scale,
                shape,
            } => {
                if shape.abs() < GEV_GUMBEL_WINDOW {
                    (f64::NEG_INFINITY, f64::INFINITY)
                } else if shape > 0.0 {
                    (f64::NEG_INFINITY, location + scale / shape)
                } else {
                    (location + scale / shape, f64::INFINITY)
                }
            }
        }
    }

    /// Error unless `x` lies in the open support where the density is positive.
    pub fn check_support(&self, x: f64) -> Result<()> {
        if self.log_pdf(x).is_finite() {
            Ok(())
        } else {
            Err(Error::Support { index: 0, value: x })
        }
    }

    pub fn cdf(&self, x: f64) -> f64 {
        match *self {
            Self::Exponential { rate } => {
                if x <= 0.0 {
                    0.0
                } else {
                    -(-rate * x).exp_m1()
                }
            }
            Self::Lognormal { mu, sigma } => {
                if x <= 0.0 {
                    0.0
                } else {
                    std_normal_cdf((x.ln() - mu) / sigma)
                }
            }
            Self::Gumbel { location, scale } => (-(-(x - location) / scale).exp()).exp(),
            Self::Logistic { location, scale } => 1.0 / (1.0 + (-(x - location) / scale).exp()),
            Self::Uniform { lower, upper } => ((x - lower) / (upper - lower)).clamp(0.0, 1.0),
            Self::Gev {
                location,
                scale,
                shape,
            } => {
                if shape.abs() < GEV_GUMBEL_WINDOW {
                    return (-(-(x - location) / scale).exp()).exp();
                }
                let z = 1.0 - shape * (x - location) / scale;
                if z <= 0.0 {
                    if shape > 0.0 {
                        1.0
                    } else {
                        0.0
                    }
                } else {
                    (-(z.ln() / shape).exp()).exp()
                }
            }
        }
    }

    /// `1 - cdf(x)`, accurate in the upper tail.
    pub fn sf(&self, x: f64) -> f64 {
        match *self {
            Self::Exponential { rate } => {
                if x <= 0.0 {
                    1.0
                } else {
                    (-rate * x).exp()
                }
            }
            Self::Lognormal { mu, sigma } => {
                if x <= 0.0 {
                    1.0
                } else {
                    std_normal_cdf(-(x.ln() - mu) / sigma)
                }
            }
            Self::Logistic { location, scale } => 1.0 / (1.0 + ((x - location) / scale).exp()),
            Self::Gumbel { location, scale } => -(-(-(x - location) / scale).exp()).exp_m1(),
            Self::Gev {
                location,
                scale,
                shape,
            } if shape.abs() < GEV_GUMBEL_WINDOW => -(-(-(x - location) / scale).exp()).exp_m1(),
            Self::Gev {
                location,
                scale,
                shape,
            } => {
                let z = 1.0 - shape * (x - location) / scale;
                if z <= 0.0 {
                    if shape > 0.0 {
                        0.0
                    } else {
                        1.0
                    }
                } else {
                    -(-(z.ln() / shape).exp()).exp_m1()
                }
            }
            Self::Uniform { .. } => 1.0 - self.cdf(x),
        }
    }

    pub fn pdf(&self, x: f64) -> f64 {
        self.log_pdf(x).exp()
    }

    /// Log density; `-inf` outside the support.
    pub fn log_pdf(&self, x: f64) -> f64 {
        match *self {
            Self::Exponential { rate } => {
                if x < 0.0 {
                    f64::NEG_INFINITY
                } else {
                    rate.ln() - rate * x
                }
            }
            Self::Lognormal { mu, sigma } => {
                if x <= 0.0 {
                    f64::NEG_INFINITY
                } else {
                    let z = (x.ln() - mu) / sigma;
                    -0.5 * z * z - x.ln() - sigma.ln() - 0.5 * (2.0 * std::f64::consts::PI).ln()
                }
            }
            Self::Gumbel { location, scale } => gumbel_log_pdf(x, location, scale),
            Self::Logistic { location, scale } => {
                let z = -(x - location).abs() / scale;
                z - scale.ln() - 2.0 * z.exp().ln_1p()
            }
            Self::Uniform { lower, upper } => {
                if x < lower || x > upper {
                    f64::NEG_INFINITY
                } else {
                    -(upper - lower).ln()
                }
            }
            Self::Gev {
                location,
                scale,
                shape,
            } => {
                if shape.abs() < GEV_GUMBEL_WINDOW {
                    return gumbel_log_pdf(x, location, scale);
                }
                let z = 1.0 - shape * (x - location) / scale;
                if z <= 0.0 {
                    f64::NEG_INFINITY
                } else {
                    let lz = z.ln();
                    -(lz / shape).exp() + (1.0 / shape - 1.0) * lz - scale.ln()
                }
            }
        }
    }

    /// Inverse cdf for `u` in `[0, 1]`.
    pub fn quantile(&self, u: f64) -> Result<f64> {
        if !(0.0..=1.0).contains(&u) {
            return Err(Error::Domain {
                what: "u",
                value: u,
                domain: "[0, 1]",
            });
        }
        let (lo, hi) = self.support();
        if u == 0.0 {
            return Ok(lo);
        }
        if u == 1.0 {
            return Ok(hi);
        }
        Ok(match *self {
            Self::Exponential { rate } => -(-u).ln_1p() / rate,
            Self::Lognormal { mu, sigma } => (mu + sigma * std_normal_quantile(u)).exp(),
            Self::Gumbel { location, scale } => location - scale * (-u.ln()).ln(),
            Self::Logistic { location, scale } => location + scale * (u / (1.0 - u)).ln(),
            Self::Uniform { lower, upper } => lower + u * (upper - lower),
            Self::Gev {
                location,
                scale,
                shape,
            } => {
                if shape.abs() < GEV_GUMBEL_WINDOW {
                    location - scale * (-u.ln()).ln()
                } else {
                    // (-ln u)^k - 1 = expm1(k ln(-ln u))
                    location - scale * (shape * (-u.ln()).ln()).exp_m1() / shape
                }
            }
        })
    }

    /// One draw by the quantile transform.
    pub fn sample<R: RngCore + ?Sized>(&self, rng: &mut R) -> f64 {
        let u = crate::simulation::uniform_open(rng);
        self.quantile(u).expect("uniform draw lies in (0, 1)")
    }
}

fn gumbel_log_pdf(x: f64, location: f64, scale: f64) -> f64 {
    let z = (x - location) / scale;
    -z - (-z).exp() - scale.ln()
}

impl fmt::Display for ContinuousModel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self
            .param_names()
            .iter()
            .zip(self.params())
            .map(|(n, v)| format!("{n}={v}"))
            .collect();
        write!(f, "{}({})", self.dist_id(), parts.join(","))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn models() -> Vec<ContinuousModel> {
        vec![
            ContinuousModel::exponential(0.01).unwrap(),
            ContinuousModel::lognormal(4.9109, 1.1475).unwrap(),
            ContinuousModel::gumbel(1.0, 2.0).unwrap(),
            ContinuousModel::logistic(-1.0, 0.5).unwrap(),
            ContinuousModel::uniform(2.0, 5.0).unwrap(),
            ContinuousModel::gev(100.0, 50.0, -0.3).unwrap(),
            ContinuousModel::gev(100.0, 50.0, 0.4).unwrap(),
            ContinuousModel::gev(100.0, 50.0, 0.0).unwrap(),
        ]
    }

    #[test]
    fn exponential_cdf_and_quantile() {
        let m = ContinuousModel::exponential(0.01).unwrap();
        assert!((m.cdf(100.0) - 0.632_120_558_828_557_7).abs() < 1e-15);
        // six-digit input: dx = du / f(100) is about 1.2e-4
        assert!((m.quantile(0.632121).unwrap() - 100.0).abs() < 2e-4);
        assert!((m.quantile(m.cdf(100.0)).unwrap() - 100.0).abs() < 1e-9);
    }

    #[test]
    fn gev_gumbel_limit_at_location() {
        let m = ContinuousModel::gev(3.0, 2.0, 0.0).unwrap();
        assert!((m.cdf(3.0) - (-1.0f64).exp()).abs() < 1e-15);
        let g = ContinuousModel::gumbel(3.0, 2.0).unwrap();
        let near = ContinuousModel::gev(3.0, 2.0, 1e-9).unwrap();
        for i in 0..=100 {
            let x = -5.0 + 0.2 * i as f64;
            assert!((near.cdf(x) - g.cdf(x)).abs() < 1e-6);
        }
    }

    #[test]
    fn gev_sign_convention() {
        // negative shape: lower endpoint, unbounded upper tail
        let m = ContinuousModel::gev(0.0, 1.0, -0.5).unwrap();
        assert_eq!(m.support(), (-2.0, f64::INFINITY));
        assert_eq!(m.cdf(-2.5), 0.0);
        assert!(m.check_support(-2.5).is_err());
        assert!(m.check_support(1.0).is_ok());
        let z: f64 = 1.0 + 0.5 * 1.0;
        assert!((m.cdf(1.0) - (-z.powf(-2.0)).exp()).abs() < 1e-15);
    }

    #[test]
    fn quantile_round_trip() {
        for m in models() {
            for i in 1..=99 {
                let u = i as f64 / 100.0;
                let x = m.quantile(u).unwrap();
                assert!((m.cdf(x) - u).abs() < 1e-12, "{m} u={u}");
                let back = m.quantile(m.cdf(x)).unwrap();
                assert!((back - x).abs() <= 1e-8 * x.abs().max(1.0), "{m} x={x}");
            }
        }
    }

    #[test]
    fn pdf_integrates_to_cdf() {
        for m in models() {
            let a = m.quantile(1e-4).unwrap();
            for u in [0.1, 0.5, 0.9] {
                let b = m.quantile(u).unwrap();
                let n = 4000;
                let h = (b - a) / n as f64;
                let mut s = m.pdf(a) + m.pdf(b);
                for i in 1..n {
                    s += m.pdf(a + i as f64 * h) * if i % 2 == 1 { 4.0 } else { 2.0 };
                }
                let integral = s * h / 3.0;
                assert!((integral - (m.cdf(b) - m.cdf(a))).abs() < 1e-6, "{m} u={u}");
            }
        }
    }

    #[test]
    fn survival_complements_cdf() {
        for m in models() {
            for i in 1..20 {
                let x = m.quantile(i as f64 / 20.0).unwrap();
                assert!((m.sf(x) + m.cdf(x) - 1.0).abs() < 1e-14);
            }
        }
    }

    #[test]
    fn invalid_parameters() {
        assert!(ContinuousModel::exponential(0.0).is_err());
        assert!(ContinuousModel::lognormal(0.0, -1.0).is_err());
        assert!(ContinuousModel::gev(0.0, 0.0, 0.1).is_err());
        assert!(ContinuousModel::uniform(1.0, 1.0).is_err());
    }

    #[test]
    fn json_shape() {
        let m = ContinuousModel::exponential(0.5).unwrap();
        let s = serde_json::to_string(&m).unwrap();
        assert_eq!(s, r#"{"dist":"exponential","rate":0.5}"#);
    }
}
