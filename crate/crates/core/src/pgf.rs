//! Probability generating functions of positive integer random variables.
//!
//! Every [`Pgf`] satisfies `h(0) = 0` and `h(1) = 1`: the stopping variable
//! never takes the value zero. Parameters are validated at construction, so
//! evaluation never fails for `t` in `[0, 1]`.

use std::fmt;
use std::sync::Arc;

use rand::RngCore;

use crate::error::{Error, Result};
use crate::roots;
use crate::series;

/// Tolerance allowed on the `[0, 1]` domain before an argument is rejected.
pub const DOMAIN_TOL: f64 = 1e-12;

/// Highest pmf order extracted from series-based families by [`Pgf::pmf`].
pub const PMF_SERIES_CAP: usize = 64;

/// Window around `r = 0` in which the ETNB pgf switches to its logarithmic limit.
pub const ETNB_LOG_WINDOW: f64 = 1e-6;

/// Family tag of a [`Pgf`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum PgfFamily {
    /// `N_I`, with `h(t) = t`.
    Identity,
    /// `h(t) = t^m`.
    Deterministic,
    /// Zero-truncated geometric, `pt / (1 - (1-p)t)`.
    Geometric,
    /// Zero-truncated Poisson, `(e^{at} - 1) / (e^a - 1)`.
    ZtPoisson,
    /// Logarithmic, `ln(1 - pt) / ln(1 - p)`.
    Logarithmic,
    /// Potential conjugate (Sibuya), `1 - (1 - t)^b`.
    PotentialConjugate,
    /// Zero-truncated binomial.
    ZtBinomial,
    /// Extended truncated negative binomial; zero-truncated negative binomial for `r > 0`.
    Etnb,
    /// Geometric sandwiched between zero-truncated Poisson and logarithmic.
    Ex63,
    /// Geometric sandwiched between zero-truncated and extended truncated negative binomials.
    Ex64,
    /// Geometric sandwiched between zero-truncated binomial and negative binomial.
    Ex65,
    /// Family interpolating potential conjugate and geometric.
    Ex66,
    /// `(h(t^k))^{1/k}`.
    Dilated,
    /// `outer(inner(t))`.
    Composite,
}

impl PgfFamily {
    pub fn name(self) -> &'static str {
        match self {
            PgfFamily::Identity => "degenerate",
            PgfFamily::Deterministic => "deterministic",
            PgfFamily::Geometric => "zt_geometric",
            PgfFamily::ZtPoisson => "zt_poisson",
            PgfFamily::Logarithmic => "logarithmic",
            PgfFamily::PotentialConjugate => "potential_conjugate",
            PgfFamily::ZtBinomial => "zt_binomial",
            PgfFamily::Etnb => "etnb",
            PgfFamily::Ex63 => "ex63",
            PgfFamily::Ex64 => "ex64",
            PgfFamily::Ex65 => "ex65",
            PgfFamily::Ex66 => "ex66",
            PgfFamily::Dilated => "dilated",
            PgfFamily::Composite => "composite",
        }
    }
}

impl fmt::Display for PgfFamily {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, PartialEq)]
enum Repr {
    Identity,
    Deterministic { m: u32 },
    Geometric { p: f64 },
    ZtPoisson { alpha: f64 },
    Logarithmic { p: f64 },
    PotentialConjugate { b: f64 },
    ZtBinomial { n: u32, p: f64 },
    Etnb { r: f64, p: f64 },
    Ex63 { alpha: f64, eta: f64 },
    Ex64 { alpha: f64, beta: f64, eta: f64 },
    Ex65 { alpha: f64, n: u32, eta: f64 },
    Ex66 { alpha: f64, p: f64 },
    Dilated { k: u32, base: Arc<Pgf> },
    Composite {
        outer: Arc<Pgf>,
        inner: Arc<Pgf>,
        auto_reversible: bool,
    },
}

/// The pgf of a positive integer random variable.
#[derive(Debug, Clone, PartialEq)]
pub struct Pgf {
    repr: Repr,
}

fn check_unit(name: &str, v: f64, allow_one: bool) -> Result<()> {
    let ok = v.is_finite() && v > 0.0 && (v < 1.0 || (allow_one && v == 1.0));
    if ok {
        Ok(())
    } else {
        let dom = if allow_one { "(0, 1]" } else { "(0, 1)" };
        Err(Error::param(name, v, format!("must lie in {dom}")))
    }
}

fn check_positive(name: &str, v: f64) -> Result<()> {
    if v.is_finite() && v > 0.0 {
        Ok(())
    } else {
        Err(Error::param(name, v, "must be positive and finite"))
    }
}

fn check_eta(eta: f64, eta0: f64) -> Result<f64> {
    if !eta.is_finite() || eta < eta0 - DOMAIN_TOL {
        return Err(Error::Domain {
            what: "eta",
            value: eta,
            domain: "[eta0, inf)",
        });
    }
    Ok(eta.max(eta0))
}

fn ln_factorial(n: u64) -> f64 {
    statrs::function::gamma::ln_gamma(n as f64 + 1.0)
}

impl Pgf {
    fn from_repr(repr: Repr) -> Self {
        Pgf { repr }
    }

    /// The degenerate stopping variable `N_I` with `Pr(N = 1) = 1`.
    pub fn identity() -> Self {
        Self::from_repr(Repr::Identity)
    }

    /// `h(t) = t^m`, for `m >= 1`.
    pub fn deterministic(m: u32) -> Result<Self> {
        if m == 0 {
            return Err(Error::param("m", 0.0, "must be a positive integer"));
        }
        Ok(if m == 1 {
            Self::identity()
        } else {
            Self::from_repr(Repr::Deterministic { m })
        })
    }

    /// Zero-truncated geometric with success probability `p` in `(0, 1]`.
    pub fn geometric(p: f64) -> Result<Self> {
        check_unit("p", p, true)?;
        Ok(Self::from_repr(Repr::Geometric { p }))
    }

    /// Zero-truncated Poisson with rate `alpha > 0`.
    pub fn zt_poisson(alpha: f64) -> Result<Self> {
        check_positive("alpha", alpha)?;
        Ok(Self::from_repr(Repr::ZtPoisson { alpha }))
    }

    /// Logarithmic series distribution with `p` in `(0, 1)`.
    pub fn logarithmic(p: f64) -> Result<Self> {
        check_unit("p", p, false)?;
        Ok(Self::from_repr(Repr::Logarithmic { p }))
    }

    /// Potential conjugate `1 - (1 - t)^b` with `b` in `(0, 1]`.
    pub fn potential_conjugate(b: f64) -> Result<Self> {
        check_unit("b", b, true)?;
        Ok(Self::from_repr(Repr::PotentialConjugate { b }))
    }

    /// Zero-truncated binomial with `n >= 1` trials and `p` in `(0, 1]`.
    pub fn zt_binomial(n: u32, p: f64) -> Result<Self> {
        if n == 0 {
            return Err(Error::param("n", 0.0, "must be a positive integer"));
        }
        check_unit("p", p, true)?;
        Ok(Self::from_repr(Repr::ZtBinomial { n, p }))
    }

    /// Extended truncated negative binomial
    /// `((1 - pt)^{-r} - 1) / ((1 - p)^{-r} - 1)` with `r > -1` and `p` in `(0, 1)`.
    ///
    /// `r = 0` is the logarithmic limit. The pgf printed with an outer `log`
    /// in some sources does not have that limit; this is the form that does.
    pub fn etnb(r: f64, p: f64) -> Result<Self> {
        if !r.is_finite() || r <= -1.0 {
            return Err(Error::param("r", r, "must be greater than -1"));
        }
        check_unit("p", p, false)?;
        Ok(Self::from_repr(Repr::Etnb { r, p }))
    }

    /// Member `eta >= alpha` of the closed family built from zero-truncated
    /// Poisson, geometric and logarithmic pgfs.
    pub fn ex63(alpha: f64, eta: f64) -> Result<Self> {
        check_positive("alpha", alpha)?;
        let eta = check_eta(eta, alpha)?;
        Ok(Self::from_repr(Repr::Ex63 { alpha, eta }))
    }

    /// Member `eta >= alpha` of the closed family built from negative binomials, `beta >= 1`.
    pub fn ex64(alpha: f64, beta: f64, eta: f64) -> Result<Self> {
        check_positive("alpha", alpha)?;
        if !beta.is_finite() || beta < 1.0 {
            return Err(Error::param("beta", beta, "must be at least 1"));
        }
        let eta = check_eta(eta, alpha)?;
        Ok(Self::from_repr(Repr::Ex64 { alpha, beta, eta }))
    }

    /// Member `eta >= alpha` of the closed family built from a zero-truncated
    /// binomial with `n` trials.
    pub fn ex65(alpha: f64, n: u32, eta: f64) -> Result<Self> {
        check_positive("alpha", alpha)?;
        if n == 0 {
            return Err(Error::param("n", 0.0, "must be a positive integer"));
        }
        let eta = check_eta(eta, alpha)?;
        Ok(Self::from_repr(Repr::Ex65 { alpha, n, eta }))
    }

    /// `1 - (1 - t) / (p + (1 - p)(1 - t)^alpha)^{1/alpha}` with `alpha` in `(0, 1)`.
    pub fn ex66(alpha: f64, p: f64) -> Result<Self> {
        check_unit("alpha", alpha, false)?;
        check_unit("p", p, true)?;
        Ok(Self::from_repr(Repr::Ex66 { alpha, p }))
    }

    /// `(h(t^k))^{1/k}`, supported on `{1, k+1, 2k+1, ...}`.
    pub fn dilated(base: &Pgf, k: u32) -> Result<Self> {
        if k == 0 {
            return Err(Error::param("k", 0.0, "must be a positive integer"));
        }
        Ok(if k == 1 {
            base.clone()
        } else {
            Self::from_repr(Repr::Dilated {
                k,
                base: Arc::new(base.clone()),
            })
        })
    }

    /// Generic `outer ∘ inner` without fast-path simplification.
    pub fn composite(outer: &Pgf, inner: &Pgf) -> Self {
        Self::from_repr(Repr::Composite {
            outer: Arc::new(outer.clone()),
            inner: Arc::new(inner.clone()),
            auto_reversible: false,
        })
    }

    pub(crate) fn mark_auto_reversible(self) -> Self {
        match self.repr {
            Repr::Composite { outer, inner, .. } => Self::from_repr(Repr::Composite {
                outer,
                inner,
                auto_reversible: true,
            }),
            other => Self::from_repr(other),
        }
    }

    pub fn family(&self) -> PgfFamily {
        match &self.repr {
            Repr::Identity => PgfFamily::Identity,
            Repr::Deterministic { .. } => PgfFamily::Deterministic,
            Repr::Geometric { .. } => PgfFamily::Geometric,
            Repr::ZtPoisson { .. } => PgfFamily::ZtPoisson,
            Repr::Logarithmic { .. } => PgfFamily::Logarithmic,
            Repr::PotentialConjugate { .. } => PgfFamily::PotentialConjugate,
            Repr::ZtBinomial { .. } => PgfFamily::ZtBinomial,
            Repr::Etnb { .. } => PgfFamily::Etnb,
            Repr::Ex63 { .. } => PgfFamily::Ex63,
            Repr::Ex64 { .. } => PgfFamily::Ex64,
            Repr::Ex65 { .. } => PgfFamily::Ex65,
            Repr::Ex66 { .. } => PgfFamily::Ex66,
            Repr::Dilated { .. } => PgfFamily::Dilated,
            Repr::Composite { .. } => PgfFamily::Composite,
        }
    }

    /// Native parameters in declaration order. Composite and dilated pgfs
    /// report only their own scalar parameters.
    pub fn params(&self) -> Vec<f64> {
        match &self.repr {
            Repr::Identity | Repr::Composite { .. } => vec![],
            Repr::Deterministic { m } => vec![*m as f64],
            Repr::Geometric { p } | Repr::Logarithmic { p } => vec![*p],
            Repr::ZtPoisson { alpha } => vec![*alpha],
            Repr::PotentialConjugate { b } => vec![*b],
            Repr::ZtBinomial { n, p } => vec![*n as f64, *p],
            Repr::Etnb { r, p } => vec![*r, *p],
            Repr::Ex63 { alpha, eta } => vec![*alpha, *eta],
            Repr::Ex64 { alpha, beta, eta } => vec![*alpha, *beta, *eta],
            Repr::Ex65 { alpha, n, eta } => vec![*alpha, *n as f64, *eta],
            Repr::Ex66 { alpha, p } => vec![*alpha, *p],
            Repr::Dilated { k, .. } => vec![*k as f64],
        }
    }

    /// Names of [`Pgf::params`], in the same order.
    pub fn param_names(&self) -> &'static [&'static str] {
        match &self.repr {
            Repr::Identity | Repr::Composite { .. } => &[],
            Repr::Deterministic { .. } => &["m"],
            Repr::Geometric { .. } | Repr::Logarithmic { .. } => &["p"],
            Repr::ZtPoisson { .. } => &["alpha"],
            Repr::PotentialConjugate { .. } => &["b"],
            Repr::ZtBinomial { .. } => &["n", "p"],
            Repr::Etnb { .. } => &["r", "p"],
            Repr::Ex63 { .. } => &["alpha", "eta"],
            Repr::Ex64 { .. } => &["alpha", "beta", "eta"],
            Repr::Ex65 { .. } => &["alpha", "n", "eta"],
            Repr::Ex66 { .. } => &["alpha", "p"],
            Repr::Dilated { .. } => &["k"],
        }
    }

    /// Component pgfs: `[outer, inner]` for a composite, `[base]` for a dilation.
    pub fn components(&self) -> Vec<&Pgf> {
        match &self.repr {
            Repr::Composite { outer, inner, .. } => vec![outer.as_ref(), inner.as_ref()],
            Repr::Dilated { base, .. } => vec![base.as_ref()],
            _ => vec![],
        }
    }

    /// Whether the inverse is evaluated in closed form rather than by root finding.
    pub fn has_closed_form_inverse(&self) -> bool {
        match &self.repr {
            Repr::Ex63 { .. } | Repr::Ex64 { .. } | Repr::Ex65 { .. } => false,
            Repr::Etnb { r, .. } => r.abs() >= ETNB_LOG_WINDOW,
            Repr::Dilated { base, .. } => base.has_closed_form_inverse(),
            Repr::Composite { outer, inner, .. } => {
                outer.has_closed_form_inverse() && inner.has_closed_form_inverse()
            }
            _ => true,
        }
    }

    /// Whether the pgf was built by a construction known to be extreme auto-reversible.
    pub fn declared_auto_reversible(&self) -> bool {
        match &self.repr {
            Repr::Identity | Repr::Geometric { .. } | Repr::Ex63 { .. } => true,
            Repr::Composite {
                auto_reversible, ..
            } => *auto_reversible,
            _ => false,
        }
    }

    fn check_t(t: f64, what: &'static str) -> Result<f64> {
        if t.is_nan() || !(-DOMAIN_TOL..=1.0 + DOMAIN_TOL).contains(&t) {
            return Err(Error::Domain {
                what,
                value: t,
                domain: "[0, 1]",
            });
        }
        Ok(t.clamp(0.0, 1.0))
    }

    /// `h(t)`.
    pub fn eval(&self, t: f64) -> Result<f64> {
        let t = Self::check_t(t, "t")?;
        Ok(self.eval_unchecked(t))
    }

    /// `h(t)` for `t` already known to lie in `[0, 1]`.
    pub fn eval_unchecked(&self, t: f64) -> f64 {
        if t <= 0.0 {
            return 0.0;
        }
        if t >= 1.0 {
            return 1.0;
        }
        let v = match &self.repr {
            Repr::Identity => t,
            Repr::Deterministic { m } => t.powi(*m as i32),
            Repr::Geometric { p } => p * t / (1.0 - (1.0 - p) * t),
            Repr::ZtPoisson { alpha } => (alpha * t).exp_m1() / alpha.exp_m1(),
            Repr::Logarithmic { p } => (-p * t).ln_1p() / (-p).ln_1p(),
            Repr::PotentialConjugate { b } => -(b * (-t).ln_1p()).exp_m1(),
            Repr::ZtBinomial { n, p } => {
                let q = 1.0 - p;
                let n = *n as f64;
                if q > 0.0 {
                    (n * (p * t / q).ln_1p()).exp_m1() * q.powf(n) / -(n * q.ln()).exp_m1()
                } else {
                    t.powf(n)
                }
            }
            Repr::Etnb { r, p } => etnb_eval(*r, *p, t),
            Repr::Ex63 { alpha, eta } => ex63_eval(*alpha, *eta, t),
            Repr::Ex64 { alpha, beta, eta } => ex64_eval(*alpha, *beta, *eta, t),
            Repr::Ex65 { alpha, n, eta } => ex65_eval(*alpha, *n as f64, *eta, t),
            Repr::Ex66 { alpha, p } => {
                let s = 1.0 - t;
                let q = p + (1.0 - p) * s.powf(*alpha);
                1.0 - s * q.powf(-1.0 / alpha)
            }
            Repr::Dilated { k, base } => {
                let kf = *k as f64;
                let inner = base.eval_unchecked(t.powi(*k as i32));
                if inner <= 0.0 {
                    0.0
                } else {
                    (inner.ln() / kf).exp()
                }
            }
            Repr::Composite { outer, inner, .. } => outer.eval_unchecked(inner.eval_unchecked(t)),
        };
        v.clamp(0.0, 1.0)
    }

    /// The conjugate view `1 - h(1 - t)`.
    pub fn conjugate(&self) -> Conjugate<'_> {
        Conjugate { base: self }
    }

    /// `1 - h(1 - t)`.
    pub fn conjugate_eval(&self, t: f64) -> Result<f64> {
        self.conjugate().eval(t)
    }

    /// `h^{-1}(u)`.
    pub fn inverse_eval(&self, u: f64) -> Result<f64> {
        let u = Self::check_t(u, "u")?;
        self.inverse_unchecked(u)
    }

    /// `1 - h^{-1}(1 - u)`, the inverse of the conjugate.
    pub fn conjugate_inverse_eval(&self, u: f64) -> Result<f64> {
        self.conjugate().inverse_eval(u)
    }

    pub(crate) fn inverse_unchecked(&self, u: f64) -> Result<f64> {
        if u <= 0.0 {
            return Ok(0.0);
        }
        if u >= 1.0 {
            return Ok(1.0);
        }
        let t = match &self.repr {
            Repr::Identity => u,
            Repr::Deterministic { m } => u.powf(1.0 / *m as f64),
            Repr::Geometric { p } => u / (p + (1.0 - p) * u),
            Repr::ZtPoisson { alpha } => (u * alpha.exp_m1()).ln_1p() / alpha,
            Repr::Logarithmic { p } => -(u * (-p).ln_1p()).exp_m1() / p,
            Repr::PotentialConjugate { b } => -((-u).ln_1p() / b).exp_m1(),
            Repr::ZtBinomial { n, p } => {
                let q = 1.0 - p;
                let n = *n as f64;
                if q > 0.0 {
                    // (q + pt)^n = q^n + u (1 - q^n)
                    let qn = q.powf(n);
                    let rhs = qn + u * (1.0 - qn);
                    (rhs.powf(1.0 / n) - q) / p
                } else {
                    u.powf(1.0 / n)
                }
            }
            Repr::Etnb { r, p } if r.abs() >= ETNB_LOG_WINDOW => {
                let d = (-r * (-p).ln_1p()).exp_m1();
                -(-(u * d).ln_1p() / r).exp_m1() / p
            }
            Repr::Ex66 { alpha, p } => {
                // closed-form inverse of the conjugate t (p + (1-p) t^a)^{-1/a}
                let v = 1.0 - u;
                let va = v.powf(*alpha);
                let w = v * p.powf(1.0 / alpha) * (1.0 - (1.0 - p) * va).powf(-1.0 / alpha);
                1.0 - w
            }
            Repr::Dilated { k, base } => {
                let kf = *k as f64;
                let inner = base.inverse_unchecked(u.powi(*k as i32))?;
                inner.powf(1.0 / kf)
            }
            Repr::Composite { outer, inner, .. } => {
                inner.inverse_unchecked(outer.inverse_unchecked(u)?)?
            }
            _ => self.inverse_numeric(u)?,
        };
        Ok(t.clamp(0.0, 1.0))
    }

    /// `h^{-1}(u)` by safeguarded Newton/bisection, regardless of closed forms.
    pub fn inverse_numeric(&self, u: f64) -> Result<f64> {
        let u = Self::check_t(u, "u")?;
        roots::invert_increasing(
            |t| self.eval_unchecked(t),
            Some(|t: f64| self.derivative_unchecked(t, 1)),
            u,
            0.0,
            1.0,
        )
    }

    /// Derivative of order `order` at `t` in `[0, 1]`.
    ///
    /// Orders 1 and 2 are analytic. Higher orders use `k! pmf(k)` at `t = 0`
    /// and repeated central differences of the second derivative elsewhere.
    /// Infinite-mean families report `+inf` at `t = 1`.
    pub fn derivative(&self, t: f64, order: u32) -> Result<f64> {
        let t = Self::check_t(t, "t")?;
        match order {
            0 => Ok(self.eval_unchecked(t)),
            1 | 2 => Ok(self.derivative_unchecked(t, order)),
            k => {
                if t == 0.0 {
                    let kf = k as usize;
                    return Ok(self.pmf(kf as u64)? * (ln_factorial(k as u64)).exp());
                }
                let step = 1e-3_f64.min(t.min(1.0 - t) / (k as f64)).max(1e-6);
                Ok(self.finite_difference(t, k, step))
            }
        }
    }

    fn finite_difference(&self, t: f64, order: u32, step: f64) -> f64 {
        if order == 2 {
            return self.derivative_unchecked(t, 2);
        }
        let lo = (t - step).max(0.0);
        let hi = (t + step).min(1.0);
        (self.finite_difference(hi, order - 1, step) - self.finite_difference(lo, order - 1, step))
            / (hi - lo)
    }

    /// Analytic first or second derivative.
    pub(crate) fn derivative_unchecked(&self, t: f64, order: u32) -> f64 {
        debug_assert!(order == 1 || order == 2);
        let first = order == 1;
        match &self.repr {
            Repr::Identity => {
                if first {
                    1.0
                } else {
                    0.0
                }
            }
            Repr::Deterministic { m } => {
                let m = *m as f64;
                if first {
                    m * t.powf(m - 1.0)
                } else {
                    m * (m - 1.0) * t.powf(m - 2.0)
                }
            }
            Repr::Geometric { p } => {
                let q = 1.0 - p;
                let d = 1.0 - q * t;
                if first {
                    p / (d * d)
                } else {
                    2.0 * p * q / (d * d * d)
                }
            }
            Repr::ZtPoisson { alpha } => {
                let base = (alpha * t).exp() / alpha.exp_m1();
                if first {
                    alpha * base
                } else {
                    alpha * alpha * base
                }
            }
            Repr::Logarithmic { p } => {
                let l = -(-p).ln_1p();
                let d = 1.0 - p * t;
                if first {
                    p / (d * l)
                } else {
                    p * p / (d * d * l)
                }
            }
            Repr::PotentialConjugate { b } => {
                let s = 1.0 - t;
                if *b == 1.0 {
                    return if first { 1.0 } else { 0.0 };
                }
                if first {
                    b * s.powf(b - 1.0)
                } else {
                    b * (1.0 - b) * s.powf(b - 2.0)
                }
            }
            Repr::ZtBinomial { n, p } => {
                let q = 1.0 - p;
                let nf = *n as f64;
                let norm = if q > 0.0 { -(nf * q.ln()).exp_m1() } else { 1.0 };
                let base = q + p * t;
                if first {
                    nf * p * base.powf(nf - 1.0) / norm
                } else if *n == 1 {
                    0.0
                } else {
                    nf * (nf - 1.0) * p * p * base.powf(nf - 2.0) / norm
                }
            }
            Repr::Etnb { r, p } => etnb_derivative(*r, *p, t, first),
            Repr::Ex66 { alpha, p } => {
                let s = 1.0 - t;
                let sa = s.powf(*alpha);
                let q = p + (1.0 - p) * sa;
                if first {
                    p * q.powf(-(1.0 + alpha) / alpha)
                } else if s == 0.0 {
                    f64::INFINITY
                } else {
                    p * (1.0 + alpha) * (1.0 - p) * (sa / s) * q.powf(-(1.0 + 2.0 * alpha) / alpha)
                }
            }
            Repr::Ex63 { .. } | Repr::Ex64 { .. } | Repr::Ex65 { .. } => self
                .sandwich()
                .expect("sandwich families decompose")
                .derivative_unchecked(t, order),
            Repr::Dilated { k, base } => dilated_derivative(base, *k, t, first),
            Repr::Composite { outer, inner, .. } => {
                let it = inner.eval_unchecked(t);
                let i1 = inner.derivative_unchecked(t, 1);
                let o1 = outer.derivative_unchecked(it, 1);
                if first {
                    o1 * i1
                } else {
                    let i2 = inner.derivative_unchecked(t, 2);
                    let o2 = outer.derivative_unchecked(it, 2);
                    let a = if i1 == 0.0 { 0.0 } else { o2 * i1 * i1 };
                    let b = if i2 == 0.0 { 0.0 } else { o1 * i2 };
                    a + b
                }
            }
        }
    }

    /// Decomposition `outer ∘ geometric ∘ inner` of the sandwich families.
    pub fn sandwich(&self) -> Option<Pgf> {
        let (outer, inner, alpha, eta) = match &self.repr {
            Repr::Ex63 { alpha, eta } => (
                Pgf::logarithmic(-(-alpha).exp_m1()).ok()?,
                Pgf::zt_poisson(*alpha).ok()?,
                *alpha,
                *eta,
            ),
            Repr::Ex64 { alpha, beta, eta } => {
                let outer = if *beta == 1.0 {
                    Pgf::identity()
                } else {
                    Pgf::etnb(-1.0 / beta, -(-alpha).exp_m1()).ok()?
                };
                let inner = Pgf::etnb(*beta, -(-alpha / beta).exp_m1()).ok()?;
                (outer, inner, *alpha, *eta)
            }
            Repr::Ex65 { alpha, n, eta } => {
                let nf = *n as f64;
                (
                    Pgf::etnb(1.0 / nf, -(-alpha).exp_m1()).ok()?,
                    Pgf::zt_binomial(*n, -(-alpha / nf).exp_m1()).ok()?,
                    *alpha,
                    *eta,
                )
            }
            _ => return None,
        };
        let middle = Pgf::geometric((-(eta - alpha)).exp()).ok()?;
        Some(Pgf::composite(&outer, &Pgf::composite(&middle, &inner)))
    }

    /// `E[N] = h'(1)`, infinite for heavy-tailed families.
    pub fn mean(&self) -> f64 {
        self.derivative_unchecked(1.0, 1)
    }

    /// `-ln Pr(N = 1)`.
    pub fn eta(&self) -> f64 {
        -self.derivative_unchecked(0.0, 1).ln()
    }

    /// `Pr(N = n)` for `n >= 1`.
    pub fn pmf(&self, n: u64) -> Result<f64> {
        if n == 0 {
            return Ok(0.0);
        }
        let nf = n as f64;
        let v = match &self.repr {
            Repr::Identity => {
                if n == 1 {
                    1.0
                } else {
                    0.0
                }
            }
            Repr::Deterministic { m } => {
                if n == *m as u64 {
                    1.0
                } else {
                    0.0
                }
            }
            Repr::Geometric { p } => {
                if *p == 1.0 {
                    if n == 1 {
                        1.0
                    } else {
                        0.0
                    }
                } else {
                    p * (1.0 - p).powf(nf - 1.0)
                }
            }
            Repr::ZtPoisson { alpha } => {
                (nf * alpha.ln() - ln_factorial(n) - alpha.exp_m1().ln()).exp()
            }
            Repr::Logarithmic { p } => (nf * p.ln()).exp() / (nf * -(-p).ln_1p()),
            Repr::PotentialConjugate { b } => {
                let mut pn = *b;
                for k in 1..n {
                    pn *= (k as f64 - b) / (k as f64 + 1.0);
                }
                pn
            }
            Repr::ZtBinomial { n: trials, p } => {
                if n > *trials as u64 {
                    0.0
                } else {
                    let tf = *trials as f64;
                    let q = 1.0 - p;
                    let norm = if q > 0.0 { -(tf * q.ln()).exp_m1() } else { 1.0 };
                    let ln_choose = ln_factorial(*trials as u64) - ln_factorial(n) - ln_factorial(*trials as u64 - n);
                    let lq = if q > 0.0 { (tf - nf) * q.ln() } else if n == *trials as u64 { 0.0 } else { f64::NEG_INFINITY };
                    (ln_choose + nf * p.ln() + lq).exp() / norm
                }
            }
            Repr::Etnb { r, p } => {
                let mut pn = self.derivative_unchecked(0.0, 1);
                for k in 1..n {
                    let kf = k as f64;
                    pn *= p * (r + kf) / (kf + 1.0);
                }
                pn
            }
            _ => {
                if n as usize > PMF_SERIES_CAP {
                    return Err(Error::Domain {
                        what: "n",
                        value: nf,
                        domain: "[1, series order cap]",
                    });
                }
                self.pmf_series(n as usize)[n as usize]
            }
        };
        Ok(v.max(0.0))
    }

    /// `[0, Pr(N=1), ..., Pr(N=order)]`.
    pub fn pmf_series(&self, order: usize) -> Vec<f64> {
        let mut out = vec![0.0; order + 1];
        match &self.repr {
            Repr::PotentialConjugate { b } => {
                if order >= 1 {
                    out[1] = *b;
                }
                for n in 1..order {
                    out[n + 1] = out[n] * (n as f64 - b) / (n as f64 + 1.0);
                }
            }
            Repr::Etnb { r, p } => {
                if order >= 1 {
                    out[1] = self.derivative_unchecked(0.0, 1);
                }
                for n in 1..order {
                    let nf = n as f64;
                    out[n + 1] = out[n] * p * (r + nf) / (nf + 1.0);
                }
            }
            Repr::Ex66 { alpha, p } => {
                // q = p + (1-p)(1-t)^alpha, g = q^{-1/alpha}, pmf_n = g_{n-1} - g_n
                let mut q = vec![0.0; order + 1];
                let mut c = 1.0;
                q[0] = 1.0;
                for (n, qn) in q.iter_mut().enumerate().skip(1) {
                    c *= (n as f64 - 1.0 - alpha) / n as f64;
                    *qn = (1.0 - p) * c;
                }
                let g = series::pow(&q, -1.0 / alpha, order);
                for n in 1..=order {
                    out[n] = g[n - 1] - g[n];
                }
            }
            Repr::Ex63 { .. } | Repr::Ex64 { .. } | Repr::Ex65 { .. } => {
                return self.sandwich().expect("sandwich").pmf_series(order);
            }
            Repr::Dilated { k, base } => {
                let k = *k as usize;
                if order == 0 {
                    return out;
                }
                let m = (order - 1) / k;
                let b = base.pmf_series(m + 1);
                let g: Vec<f64> = b[1..].to_vec();
                let e = series::pow(&g, 1.0 / k as f64, m);
                for (j, ej) in e.iter().enumerate() {
                    out[1 + k * j] = *ej;
                }
            }
            Repr::Composite { outer, inner, .. } => {
                let o = outer.pmf_series(order);
                let i = inner.pmf_series(order);
                out = series::compose(&o, &i, order);
            }
            _ => {
                for (n, slot) in out.iter_mut().enumerate().skip(1) {
                    *slot = self.pmf(n as u64).unwrap_or(0.0);
                }
            }
        }
        for v in out.iter_mut() {
            if *v < 0.0 {
                *v = 0.0;
            }
        }
        out
    }

    /// `self ∘ inner`, collapsing to a family member when both operands share
    /// a composition-closed family (parameters combine additively in `eta`).
    pub fn compose(&self, inner: &Pgf) -> Pgf {
        use Repr::*;
        match (&self.repr, &inner.repr) {
            (Identity, _) => inner.clone(),
            (_, Identity) => self.clone(),
            (Deterministic { m: a }, Deterministic { m: b }) => {
                Pgf::from_repr(Deterministic { m: a * b })
            }
            (Geometric { p: a }, Geometric { p: b }) => Pgf::from_repr(Geometric { p: a * b }),
            (PotentialConjugate { b: a }, PotentialConjugate { b }) => {
                Pgf::from_repr(PotentialConjugate { b: a * b })
            }
            (Ex66 { alpha: a1, p: p1 }, Ex66 { alpha: a2, p: p2 }) if a1 == a2 => {
                Pgf::from_repr(Ex66 { alpha: *a1, p: p1 * p2 })
            }
            (Ex63 { alpha: a1, eta: e1 }, Ex63 { alpha: a2, eta: e2 }) if a1 == a2 => {
                Pgf::from_repr(Ex63 { alpha: *a1, eta: e1 + e2 })
            }
            (
                Ex64 { alpha: a1, beta: b1, eta: e1 },
                Ex64 { alpha: a2, beta: b2, eta: e2 },
            ) if a1 == a2 && b1 == b2 => Pgf::from_repr(Ex64 {
                alpha: *a1,
                beta: *b1,
                eta: e1 + e2,
            }),
            (Ex65 { alpha: a1, n: n1, eta: e1 }, Ex65 { alpha: a2, n: n2, eta: e2 })
                if a1 == a2 && n1 == n2 =>
            {
                Pgf::from_repr(Ex65 {
                    alpha: *a1,
                    n: *n1,
                    eta: e1 + e2,
                })
            }
            (Dilated { k: k1, base: b1 }, Dilated { k: k2, base: b2 }) if k1 == k2 => {
                Pgf::from_repr(Dilated {
                    k: *k1,
                    base: Arc::new(b1.compose(b2)),
                })
            }
            // h ∘ h inherits auto-reversibility from h
            _ if self == inner && self.declared_auto_reversible() => {
                Pgf::composite(self, inner).mark_auto_reversible()
            }
            _ => Pgf::composite(self, inner),
        }
    }

    /// An inverse-cdf sampler with lazily extended support.
    pub fn sampler(&self) -> PgfSampler {
        PgfSampler::new(self.clone())
    }
}

fn etnb_eval(r: f64, p: f64, t: f64) -> f64 {
    let a = -(-p * t).ln_1p();
    let big_a = -(-p).ln_1p();
    if r.abs() < ETNB_LOG_WINDOW {
        // first-order expansion around the logarithmic limit
        (a / big_a) * (1.0 + 0.5 * r * (a - big_a))
    } else {
        (r * a).exp_m1() / (r * big_a).exp_m1()
    }
}

fn etnb_derivative(r: f64, p: f64, t: f64, first: bool) -> f64 {
    let d = 1.0 - p * t;
    let a1 = p / d;
    let big_a = -(-p).ln_1p();
    if r.abs() < ETNB_LOG_WINDOW {
        let a = -(-p * t).ln_1p();
        let corr = 1.0 + 0.5 * r * (2.0 * a - big_a);
        if first {
            a1 / big_a * corr
        } else {
            a1 * a1 / big_a * (corr + r)
        }
    } else {
        let norm = (r * big_a).exp_m1();
        let base = (-(r + 1.0) * d.ln()).exp();
        if first {
            r * p * base / norm
        } else {
            r * (r + 1.0) * p * p * base / (d * norm)
        }
    }
}

fn ex63_eval(alpha: f64, eta: f64, t: f64) -> f64 {
    let e_t = (alpha * t).exp_m1();
    let e_a = alpha.exp_m1();
    // e^alpha - e^{alpha t}
    let gap = -alpha.exp() * (alpha * (t - 1.0)).exp_m1();
    let den = eta.exp_m1() * gap + e_a;
    (e_t * e_a / den).ln_1p() / alpha
}

fn ex64_eval(alpha: f64, beta: f64, eta: f64, t: f64) -> f64 {
    let c = -(-alpha / beta).exp_m1();
    let log_w = beta * (-t * c).ln_1p();
    let w = log_w.exp();
    let w_m1 = log_w.exp_m1();
    let en = (-eta).exp();
    let ea = alpha.exp();
    // denominator of the printed ratio, divided by e^eta
    let b = (ea * en - ea) * w + 1.0 - ea * en;
    let delta = en * (-alpha.exp_m1()) * w_m1 / b;
    -((delta.ln_1p()) / beta).exp_m1() / c
}

fn ex65_eval(alpha: f64, n: f64, eta: f64, t: f64) -> f64 {
    let c = (alpha / n).exp_m1();
    let log_v = n * (t * c).ln_1p();
    let v = log_v.exp();
    let v_m1 = log_v.exp_m1();
    let en = (-eta).exp();
    let ea = alpha.exp();
    let b = (1.0 - ea * en) * v + ea * en - ea;
    let delta = en * alpha.exp_m1() * v_m1 / b;
    (-(delta.ln_1p()) / n).exp_m1() / c
}

fn dilated_derivative(base: &Pgf, k: u32, t: f64, first: bool) -> f64 {
    let kf = k as f64;
    let p1 = base.derivative_unchecked(0.0, 1);
    if t == 0.0 {
        return if first {
            p1.powf(1.0 / kf)
        } else if k == 1 {
            base.derivative_unchecked(0.0, 2)
        } else {
            0.0
        };
    }
    let s = t.powi(k as i32);
    let hs = base.eval_unchecked(s);
    let h1 = base.derivative_unchecked(s, 1);
    if hs <= 0.0 {
        return if first { p1.powf(1.0 / kf) } else { 0.0 };
    }
    let value = (hs.ln() / kf).exp();
    // d/dt ln value = t^{k-1} h'(s) / h(s)
    let l = t.powi(k as i32 - 1) * h1 / hs;
    let d1 = value * l;
    if first {
        return d1;
    }
    let h2 = base.derivative_unchecked(s, 2);
    let dl = (kf - 1.0) * t.powi(k as i32 - 2) * h1 / hs
        + t.powi(2 * k as i32 - 2) * kf * (h2 * hs - h1 * h1) / (hs * hs);
    d1 * l + value * dl
}

/// View of `1 - h(1 - t)` for a borrowed pgf.
#[derive(Debug, Clone, Copy)]
pub struct Conjugate<'a> {
    base: &'a Pgf,
}

impl Conjugate<'_> {
    pub fn base(&self) -> &Pgf {
        self.base
    }

    pub fn eval(&self, t: f64) -> Result<f64> {
        let t = Pgf::check_t(t, "t")?;
        Ok(self.eval_unchecked(t))
    }

    pub fn eval_unchecked(&self, t: f64) -> f64 {
        // exact forms avoid the cancellation in 1 - h(1 - t)
        match self.base.repr {
            Repr::Identity => t,
            Repr::PotentialConjugate { b } => t.powf(b),
            Repr::Deterministic { m } => -(m as f64 * (-t).ln_1p()).exp_m1(),
            Repr::Geometric { p } => t / (p + (1.0 - p) * t),
            _ => 1.0 - self.base.eval_unchecked(1.0 - t),
        }
    }

    pub fn inverse_eval(&self, u: f64) -> Result<f64> {
        let u = Pgf::check_t(u, "u")?;
        self.inverse_unchecked(u)
    }

    pub(crate) fn inverse_unchecked(&self, u: f64) -> Result<f64> {
        let u = u.clamp(0.0, 1.0);
        Ok(match self.base.repr {
            Repr::Identity => u,
            Repr::PotentialConjugate { b } => u.powf(1.0 / b),
            Repr::Deterministic { m } => -((-u).ln_1p() / m as f64).exp_m1(),
            Repr::Geometric { .. } => self.base.eval_unchecked(u),
            _ => 1.0 - self.base.inverse_unchecked(1.0 - u)?,
        })
    }

    /// Derivatives alternate sign: `(-1)^{k+1} h^{(k)}(1 - t)`.
    pub fn derivative(&self, t: f64, order: u32) -> Result<f64> {
        let t = Pgf::check_t(t, "t")?;
        if order == 0 {
            return Ok(self.eval_unchecked(t));
        }
        let d = self.base.derivative(1.0 - t, order)?;
        Ok(if order % 2 == 1 { d } else { -d })
    }
}

/// What a sampler does when a draw falls beyond its term cap.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TailPolicy {
    /// Return the cap index and count a tail warning.
    Clamp,
    /// Fail with [`Error::Tail`].
    Fail,
}

/// Inverse-cdf table over the cumulative pmf, extended on demand.
#[derive(Debug, Clone)]
struct Table {
    pgf: Pgf,
    cdf: Vec<f64>,
    exhausted: bool,
}

impl Table {
    fn new(pgf: Pgf, cap: usize) -> Self {
        let mut t = Table {
            pgf,
            cdf: vec![0.0],
            exhausted: false,
        };
        t.extend_to(PgfSampler::BLOCK, cap);
        t
    }

    fn extend_to(&mut self, order: usize, cap: usize) {
        let order = order.min(cap);
        let have = self.cdf.len() - 1;
        if order <= have {
            return;
        }
        let pmf = self.pgf.pmf_series(order);
        let before = *self.cdf.last().unwrap();
        let mut acc = before;
        for v in &pmf[have + 1..] {
            acc += v;
            self.cdf.push(acc.min(1.0));
        }
        // Rounding can leave the total a few ulps short of 1; once no new mass
        // arrives the table is as complete as it can be.
        if acc >= 1.0 - 1e-12 && acc - before < 1e-17 {
            self.exhausted = true;
        }
    }

    fn lookup(&mut self, u: f64, cap: usize) -> Option<u64> {
        loop {
            let last = *self.cdf.last().unwrap();
            if u < last {
                return Some(self.cdf.partition_point(|&c| c <= u) as u64);
            }
            let have = self.cdf.len() - 1;
            if self.exhausted {
                let idx = self.cdf.iter().rposition(|&c| c < last).map_or(have, |i| i + 1);
                return Some(idx as u64);
            }
            if have >= cap {
                return None;
            }
            // grow geometrically in whole blocks so that series-based pmfs stay cheap
            let next = (2 * have).max(have + PgfSampler::BLOCK);
            self.extend_to(next.div_ceil(PgfSampler::BLOCK) * PgfSampler::BLOCK, cap);
        }
    }
}

#[derive(Debug, Clone)]
enum Method {
    Table(Table),
    /// `outer ∘ inner` is the pgf of a sum of `M ~ outer` independent copies of `inner`.
    RandomSum {
        outer: Box<PgfSampler>,
        inner: Box<PgfSampler>,
    },
}

/// Sampler for the stopping variable of a [`Pgf`].
///
/// Primitive and dilated pgfs are sampled by inverse cdf over a lazily
/// extended pmf table. Composites, including the sandwich families, are
/// sampled as random sums, which needs no pmf of the composite.
#[derive(Debug, Clone)]
pub struct PgfSampler {
    pgf: Pgf,
    method: Method,
    cap: usize,
    policy: TailPolicy,
    tail_warnings: u64,
}

impl PgfSampler {
    pub const DEFAULT_CAP: usize = 10_000_000;
    pub const BLOCK: usize = 256;

    pub fn new(pgf: Pgf) -> Self {
        Self::build(pgf, Self::DEFAULT_CAP, TailPolicy::Clamp)
    }

    fn build(pgf: Pgf, cap: usize, policy: TailPolicy) -> Self {
        let parts = match &pgf.repr {
            Repr::Composite { outer, inner, .. } => Some(((**outer).clone(), (**inner).clone())),
            Repr::Ex63 { .. } | Repr::Ex64 { .. } | Repr::Ex65 { .. } => match pgf.sandwich() {
                Some(Pgf {
                    repr: Repr::Composite { outer, inner, .. },
                }) => Some(((*outer).clone(), (*inner).clone())),
                _ => None,
            },
            _ => None,
        };
        let method = match parts {
            Some((o, i)) => Method::RandomSum {
                outer: Box::new(Self::build(o, cap, policy)),
                inner: Box::new(Self::build(i, cap, policy)),
            },
            None => Method::Table(Table::new(pgf.clone(), cap)),
        };
        PgfSampler {
            pgf,
            method,
            cap,
            policy,
            tail_warnings: 0,
        }
    }

    pub fn with_cap(self, cap: usize) -> Self {
        Self::build(self.pgf, cap.max(1), self.policy)
    }

    pub fn with_policy(self, policy: TailPolicy) -> Self {
        Self::build(self.pgf, self.cap, policy)
    }

    pub fn pgf(&self) -> &Pgf {
        &self.pgf
    }

    /// Number of draws (including nested ones) that landed beyond the cap.
    pub fn tail_warnings(&self) -> u64 {
        match &self.method {
            Method::Table(_) => self.tail_warnings,
            Method::RandomSum { outer, inner } => outer.tail_warnings() + inner.tail_warnings(),
        }
    }

    /// Draws one value of `N`.
    pub fn sample<R: RngCore + ?Sized>(&mut self, rng: &mut R) -> Result<u64> {
        match &mut self.method {
            Method::Table(_) => {
                let u = crate::simulation::uniform_open(rng);
                self.sample_from_uniform(u)
            }
            Method::RandomSum { outer, inner } => {
                let m = outer.sample(rng)?;
                let mut total = 0u64;
                for _ in 0..m {
                    total = total.saturating_add(inner.sample(rng)?);
                }
                Ok(total)
            }
        }
    }

    /// Inverse cdf at `u` in `(0, 1)`.
    ///
    /// Composite samplers consume several uniforms per draw and reject this call.
    pub fn sample_from_uniform(&mut self, u: f64) -> Result<u64> {
        let cap = self.cap;
        match &mut self.method {
            Method::Table(table) => match table.lookup(u, cap) {
                Some(n) => Ok(n),
                None => match self.policy {
                    TailPolicy::Clamp => {
                        self.tail_warnings += 1;
                        Ok(cap as u64)
                    }
                    TailPolicy::Fail => Err(Error::Tail { cap }),
                },
            },
            Method::RandomSum { .. } => Err(Error::Precondition(
                "composite samplers need a random stream, not a single uniform".into(),
            )),
        }
    }
}

/// Free-function form of [`Pgf::eval`].
pub fn pgf_eval(pgf: &Pgf, t: f64) -> Result<f64> {
    pgf.eval(t)
}

/// Free-function form of [`Pgf::compose`].
pub fn pgf_compose(outer: &Pgf, inner: &Pgf) -> Pgf {
    outer.compose(inner)
}
