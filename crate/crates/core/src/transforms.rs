//! Stopped-extreme transformations of continuous models.
//!
//! A [`TransformedModel`] is a base model followed by a chain of maps on
//! `[0, 1]`, each one of `h`, `1 - h(1 - t)`, `h^{-1}` or `1 - h^{-1}(1 - t)`
//! for some pgf `h`. Its cdf is the chain applied to the base cdf.

use std::fmt;

use rand::RngCore;
use serde::{Deserialize, Serialize};

use crate::catalog::StoppingFamily;
use crate::dist::ContinuousModel;
use crate::error::{Error, Result};
use crate::pgf::{Pgf, PgfFamily};

/// One of the four maps a pgf induces on distribution functions.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MapOp {
    /// `h(t)`: the cdf of the maximum of `N` draws.
    Pgf,
    /// `1 - h(1 - t)`: the cdf of the minimum.
    Conjugate,
    /// `h^{-1}(t)`: the cdf of the max-precursor.
    Inverse,
    /// `1 - h^{-1}(1 - t)`: the cdf of the min-precursor.
    ConjugateInverse,
}

impl MapOp {
    /// The op whose map inverts this one.
    pub fn inverse(self) -> MapOp {
        match self {
            MapOp::Pgf => MapOp::Inverse,
            MapOp::Inverse => MapOp::Pgf,
            MapOp::Conjugate => MapOp::ConjugateInverse,
            MapOp::ConjugateInverse => MapOp::Conjugate,
        }
    }
}

/// A pgf together with the map it contributes.
#[derive(Debug, Clone, PartialEq)]
pub struct Step {
    pub op: MapOp,
    pub pgf: Pgf,
}

impl Step {
    pub fn new(op: MapOp, pgf: Pgf) -> Self {
        Step { op, pgf }
    }

    /// The map applied to `u` in `[0, 1]`.
    pub fn apply(&self, u: f64) -> Result<f64> {
        let u = u.clamp(0.0, 1.0);
        if self.pgf.family() == PgfFamily::Identity {
            return Ok(u);
        }
        Ok(match self.op {
            MapOp::Pgf => self.pgf.eval_unchecked(u),
            MapOp::Conjugate => self.pgf.conjugate().eval_unchecked(u),
            MapOp::Inverse => self.pgf.inverse_unchecked(u)?,
            MapOp::ConjugateInverse => self.pgf.conjugate().inverse_unchecked(u)?,
        })
    }

    /// The inverse map applied to `v`.
    pub fn unapply(&self, v: f64) -> Result<f64> {
        Step {
            op: self.op.inverse(),
            pgf: self.pgf.clone(),
        }
        .apply(v)
    }

    /// Log of the derivative of the map at `u`.
    pub fn log_slope(&self, u: f64) -> Result<f64> {
        let u = u.clamp(0.0, 1.0);
        Ok(match self.op {
            MapOp::Pgf => self.pgf.derivative_unchecked(u, 1).ln(),
            MapOp::Conjugate => self.pgf.derivative_unchecked(1.0 - u, 1).ln(),
            MapOp::Inverse => {
                let t = self.pgf.inverse_unchecked(u)?;
                -self.pgf.derivative_unchecked(t, 1).ln()
            }
            MapOp::ConjugateInverse => {
                let t = self.pgf.inverse_unchecked(1.0 - u)?;
                -self.pgf.derivative_unchecked(t, 1).ln()
            }
        })
    }
}

/// Label of a transformed model.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TransformKind {
    StoppedMax,
    StoppedMin,
    MaxPrecursor,
    MinPrecursor,
    CombinedMax,
    CombinedMin,
    /// Base model without any map.
    Base,
    /// A chain assembled step by step.
    Chain,
}

impl TransformKind {
    pub fn name(self) -> &'static str {
        match self {
            TransformKind::StoppedMax => "stopped_max",
            TransformKind::StoppedMin => "stopped_min",
            TransformKind::MaxPrecursor => "max_precursor",
            TransformKind::MinPrecursor => "min_precursor",
            TransformKind::CombinedMax => "combined_max",
            TransformKind::CombinedMin => "combined_min",
            TransformKind::Base => "base",
            TransformKind::Chain => "chain",
        }
    }
}

/// Which side of the extreme a combined extension acts on.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Flavor {
    Max,
    Min,
}

/// The four two-pgf combinations of a stopped extreme and a precursor.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TwoParamForm {
    /// `h2 ∘ h1^{-1}`.
    MaxOfMaxPrecursor,
    /// `h2^{-1} ∘ h1`.
    MaxPrecursorOfMax,
    /// `h̄2 ∘ h̄1^{-1}`.
    MinOfMinPrecursor,
    /// `h̄2^{-1} ∘ h̄1`.
    MinPrecursorOfMin,
}

/// A base model pushed through a chain of pgf maps.
#[derive(Debug, Clone, PartialEq)]
pub struct TransformedModel {
    kind: TransformKind,
    steps: Vec<Step>,
    base: ContinuousModel,
}

impl fmt::Display for TransformedModel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}[", self.kind.name())?;
        for (i, s) in self.steps.iter().enumerate() {
            if i > 0 {
                write!(f, " -> ")?;
            }
            write!(f, "{:?}:{}{:?}", s.op, s.pgf.family(), s.pgf.params())?;
        }
        write!(f, "]({})", self.base)
    }
}

impl TransformedModel {
    /// The base model itself.
    pub fn base_only(base: ContinuousModel) -> Self {
        TransformedModel {
            kind: TransformKind::Base,
            steps: vec![],
            base,
        }
    }

    /// A model from an explicit chain; steps apply in order to the base cdf.
    pub fn from_steps(kind: TransformKind, steps: Vec<Step>, base: ContinuousModel) -> Self {
        TransformedModel { kind, steps, base }
    }

    /// This model followed by one more map.
    pub fn then(&self, op: MapOp, pgf: &Pgf) -> Self {
        let mut steps = self.steps.clone();
        steps.push(Step::new(op, pgf.clone()));
        TransformedModel {
            kind: TransformKind::Chain,
            steps,
            base: self.base,
        }
    }

    pub fn kind(&self) -> TransformKind {
        self.kind
    }

    pub fn base(&self) -> &ContinuousModel {
        &self.base
    }

    pub fn steps(&self) -> &[Step] {
        &self.steps
    }

    /// The composed map `[0, 1] -> [0, 1]` at `u`.
    pub fn map(&self, u: f64) -> Result<f64> {
        let mut v = u;
        for s in &self.steps {
            v = s.apply(v)?;
        }
        Ok(v)
    }

    /// Inverse of the composed map.
    pub fn unmap(&self, v: f64) -> Result<f64> {
        let mut u = v;
        for s in self.steps.iter().rev() {
            u = s.unapply(u)?;
        }
        Ok(u)
    }

    pub fn cdf(&self, y: f64) -> Result<f64> {
        self.map(self.base.cdf(y))
    }

    /// Log density by the chain rule through every map.
    pub fn log_pdf(&self, y: f64) -> Result<f64> {
        let lf = self.base.log_pdf(y);
        if lf == f64::NEG_INFINITY {
            return Ok(lf);
        }
        let mut u = self.base.cdf(y);
        let mut acc = lf;
        for s in &self.steps {
            acc += s.log_slope(u)?;
            u = s.apply(u)?;
        }
        Ok(acc)
    }

    pub fn pdf(&self, y: f64) -> Result<f64> {
        Ok(self.log_pdf(y)?.exp())
    }

    /// `base.quantile(unmap(u))`.
    pub fn quantile(&self, u: f64) -> Result<f64> {
        if !(0.0..=1.0).contains(&u) {
            return Err(Error::Domain {
                what: "u",
                value: u,
                domain: "[0, 1]",
            });
        }
        self.base.quantile(self.unmap(u)?.clamp(0.0, 1.0))
    }

    /// One draw by the quantile transform.
    pub fn sample<R: RngCore + ?Sized>(&self, rng: &mut R) -> Result<f64> {
        self.quantile(crate::simulation::uniform_open(rng))
    }
}

fn single(kind: TransformKind, op: MapOp, stopping: &Pgf, base: &ContinuousModel) -> TransformedModel {
    TransformedModel::from_steps(kind, vec![Step::new(op, stopping.clone())], *base)
}

/// `cdf = h(F)`: the maximum of `N` independent draws of the base.
pub fn stopped_max(stopping: &Pgf, base: &ContinuousModel) -> TransformedModel {
    single(TransformKind::StoppedMax, MapOp::Pgf, stopping, base)
}

/// `cdf = 1 - h(1 - F)`: the minimum of `N` independent draws.
pub fn stopped_min(stopping: &Pgf, base: &ContinuousModel) -> TransformedModel {
    single(TransformKind::StoppedMin, MapOp::Conjugate, stopping, base)
}

/// `cdf = h^{-1}(F)`: the variable whose stopped maximum is the base.
pub fn max_precursor(stopping: &Pgf, base: &ContinuousModel) -> TransformedModel {
    single(TransformKind::MaxPrecursor, MapOp::Inverse, stopping, base)
}

/// `cdf = 1 - h^{-1}(1 - F)`: the variable whose stopped minimum is the base.
pub fn min_precursor(stopping: &Pgf, base: &ContinuousModel) -> TransformedModel {
    single(TransformKind::MinPrecursor, MapOp::ConjugateInverse, stopping, base)
}

/// Anchor used by [`combined_extension`].
pub fn default_anchor(family: &StoppingFamily, eta: f64) -> f64 {
    family.eta0() + eta.abs() + 1.0
}

/// Maps realizing the extension of a closed family at real `eta`.
///
/// `H_eta = member(b + eta⁺) ∘ member(b + eta⁻)^{-1}` for an anchor `b`; the
/// result does not depend on `b` for closed families.
pub fn combined_steps(family: &StoppingFamily, eta: f64, flavor: Flavor, anchor: f64) -> Result<Vec<Step>> {
    if !family.is_closed() {
        return Err(Error::NotClosed(family.family_id()));
    }
    if !eta.is_finite() {
        return Err(Error::Domain {
            what: "eta",
            value: eta,
            domain: "finite reals",
        });
    }
    if eta == 0.0 {
        return Ok(vec![]);
    }
    if anchor < family.eta0() + eta.abs() - crate::pgf::DOMAIN_TOL {
        return Err(Error::Precondition(format!(
            "anchor {anchor} must be at least eta0 + |eta|"
        )));
    }
    let outer = family.member(anchor + eta.max(0.0))?;
    let inner = family.member(anchor + (-eta).max(0.0))?;
    Ok(match flavor {
        Flavor::Max => vec![Step::new(MapOp::Inverse, inner), Step::new(MapOp::Pgf, outer)],
        Flavor::Min => vec![
            Step::new(MapOp::ConjugateInverse, inner),
            Step::new(MapOp::Conjugate, outer),
        ],
    })
}

/// The extension of a base model by a closed family at any real `eta`.
///
/// `eta = 0` returns the base; `eta >= eta0` is the stopped extreme of
/// `member(eta)` and `eta <= -eta0` the precursor of `member(-eta)`. Only
/// `|eta| < eta0` goes through an anchor, since large anchors push
/// intermediate values to the ends of `[0, 1]` and lose precision.
pub fn combined_extension(
    family: &StoppingFamily,
    eta: f64,
    base: &ContinuousModel,
    flavor: Flavor,
) -> Result<TransformedModel> {
    if !family.is_closed() {
        return Err(Error::NotClosed(family.family_id()));
    }
    if eta != 0.0 && eta.abs() >= family.eta0() {
        let member = family.member(eta.abs())?;
        let op = match (flavor, eta > 0.0) {
            (Flavor::Max, true) => MapOp::Pgf,
            (Flavor::Max, false) => MapOp::Inverse,
            (Flavor::Min, true) => MapOp::Conjugate,
            (Flavor::Min, false) => MapOp::ConjugateInverse,
        };
        let kind = match flavor {
            Flavor::Max => TransformKind::CombinedMax,
            Flavor::Min => TransformKind::CombinedMin,
        };
        return Ok(TransformedModel::from_steps(kind, vec![Step::new(op, member)], *base));
    }
    combined_extension_with_anchor(family, eta, base, flavor, default_anchor(family, eta))
}

/// [`combined_extension`] with an explicit anchor `b >= eta0 + |eta|`.
pub fn combined_extension_with_anchor(
    family: &StoppingFamily,
    eta: f64,
    base: &ContinuousModel,
    flavor: Flavor,
    anchor: f64,
) -> Result<TransformedModel> {
    let steps = combined_steps(family, eta, flavor, anchor)?;
    let kind = match flavor {
        Flavor::Max => TransformKind::CombinedMax,
        Flavor::Min => TransformKind::CombinedMin,
    };
    Ok(TransformedModel::from_steps(kind, steps, *base))
}

/// Two-pgf extension; `first` is applied to the base cdf before `second`.
pub fn two_param_combined(first: &Pgf, second: &Pgf, base: &ContinuousModel, form: TwoParamForm) -> TransformedModel {
    let (op1, op2, kind) = match form {
        TwoParamForm::MaxOfMaxPrecursor => (MapOp::Inverse, MapOp::Pgf, TransformKind::CombinedMax),
        TwoParamForm::MaxPrecursorOfMax => (MapOp::Pgf, MapOp::Inverse, TransformKind::CombinedMax),
        TwoParamForm::MinOfMinPrecursor => {
            (MapOp::ConjugateInverse, MapOp::Conjugate, TransformKind::CombinedMin)
        }
        TwoParamForm::MinPrecursorOfMin => {
            (MapOp::Conjugate, MapOp::ConjugateInverse, TransformKind::CombinedMin)
        }
    };
    TransformedModel::from_steps(
        kind,
        vec![Step::new(op1, first.clone()), Step::new(op2, second.clone())],
        *base,
    )
}

/// `h_{eta2} ∘ h_{eta1}^{-1}` (or its minimum counterpart) from two members of one family.
pub fn two_param_from_family(
    family: &StoppingFamily,
    eta1: f64,
    eta2: f64,
    base: &ContinuousModel,
    flavor: Flavor,
) -> Result<TransformedModel> {
    let first = family.member(eta1)?;
    let second = family.member(eta2)?;
    let form = match flavor {
        Flavor::Max => TwoParamForm::MaxOfMaxPrecursor,
        Flavor::Min => TwoParamForm::MinOfMinPrecursor,
    };
    Ok(two_param_combined(&first, &second, base, form))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalog::{make_family, FamilyId};

    fn exp_base() -> ContinuousModel {
        ContinuousModel::exponential(0.01).unwrap()
    }

    fn uniform() -> ContinuousModel {
        ContinuousModel::uniform(0.0, 1.0).unwrap()
    }

    #[test]
    fn log_exp_values() {
        let lg = Pgf::logarithmic(0.95).unwrap();
        let mx = stopped_max(&lg, &exp_base()).cdf(100.0).unwrap();
        let expected = (0.05 + 0.95 * (-1.0f64).exp()).ln() / 0.05f64.ln();
        assert!((mx - expected).abs() < 1e-14);
        assert!((mx - 0.306_295_023_497_683_6).abs() < 1e-13);
        let mn = stopped_min(&lg, &exp_base()).cdf(100.0).unwrap();
        assert!((mn - 0.856_465_263_252_288_1).abs() < 1e-13);
        assert!((mn - (1.0 - (1.0 - 0.95 * (-1.0f64).exp()).ln() / 0.05f64.ln())).abs() < 1e-14);
    }

    #[test]
    fn identity_leaves_base() {
        let id = Pgf::identity();
        let b = exp_base();
        for f in [stopped_max, stopped_min, max_precursor, min_precursor] {
            let m = f(&id, &b);
            for y in [1.0, 50.0, 300.0] {
                assert!((m.cdf(y).unwrap() - b.cdf(y)).abs() < 1e-15);
            }
        }
    }

    #[test]
    fn poisson_closed_forms() {
        let a = 1.3;
        let zp = Pgf::zt_poisson(a).unwrap();
        let b = uniform();
        for i in 0..=50 {
            let f = i as f64 / 50.0;
            let mn = stopped_min(&zp, &b).cdf(f).unwrap();
            assert!((mn - a.exp() * (1.0 - (-a * f).exp()) / a.exp_m1()).abs() < 1e-12);
            let mp = max_precursor(&zp, &b).cdf(f).unwrap();
            assert!((mp - (1.0 + a.exp_m1() * f).ln() / a).abs() < 1e-12);
            let np = min_precursor(&zp, &b).cdf(f).unwrap();
            assert!((np - (1.0 - (1.0 + a.exp_m1() * (1.0 - f)).ln() / a)).abs() < 1e-12);
        }
    }

    #[test]
    fn geometric_combined_value() {
        let geo = make_family(FamilyId::ZtGeometric).unwrap();
        let m = combined_extension(&geo, -std::f64::consts::LN_2, &uniform(), Flavor::Max).unwrap();
        assert!((m.cdf(0.5).unwrap() - 2.0 / 3.0).abs() < 1e-12);
        let z = combined_extension(&geo, 0.0, &uniform(), Flavor::Max).unwrap();
        assert_eq!(z.cdf(0.3).unwrap(), 0.3);
    }

    #[test]
    fn potential_conjugate_extension() {
        let pc = make_family(FamilyId::PotentialConjugate).unwrap();
        let b = exp_base();
        for eta in [-1.5, -0.3, 0.4, 2.0] {
            let m = combined_extension(&pc, eta, &b, Flavor::Max).unwrap();
            for y in [10.0, 100.0, 400.0] {
                let f = b.cdf(y);
                let expected = 1.0 - (1.0 - f).powf((-eta).exp());
                assert!((m.cdf(y).unwrap() - expected).abs() < 1e-9, "eta={eta} y={y}");
            }
        }
    }

    #[test]
    fn anchor_invariance() {
        let fam = make_family(FamilyId::Ex63 { alpha: 0.8 }).unwrap();
        let b = uniform();
        for eta in [-2.0, -0.5, 0.5, 2.0] {
            for flavor in [Flavor::Max, Flavor::Min] {
                let a = combined_extension(&fam, eta, &b, flavor).unwrap();
                let c = combined_extension_with_anchor(&fam, eta, &b, flavor, default_anchor(&fam, eta) + 2.5).unwrap();
                for i in 0..=100 {
                    let u = i as f64 / 100.0;
                    assert!((a.cdf(u).unwrap() - c.cdf(u).unwrap()).abs() < 1e-9);
                }
            }
        }
    }

    #[test]
    fn two_param_poisson() {
        let (a1, a2) = (0.7, 1.9);
        let m = two_param_combined(&Pgf::zt_poisson(a1).unwrap(), &Pgf::zt_poisson(a2).unwrap(), &uniform(), TwoParamForm::MaxOfMaxPrecursor);
        for i in 0..=50 {
            let f = i as f64 / 50.0;
            let expected = ((1.0 + a1.exp_m1() * f).powf(a2 / a1) - 1.0) / a2.exp_m1();
            assert!((m.cdf(f).unwrap() - expected).abs() < 1e-12);
        }
    }

    #[test]
    fn precursor_round_trip_and_quantile() {
        let lg = Pgf::logarithmic(0.9).unwrap();
        let b = exp_base();
        let inner = max_precursor(&lg, &b);
        let both = inner.then(MapOp::Pgf, &lg);
        for y in [5.0, 80.0, 500.0] {
            assert!((both.cdf(y).unwrap() - b.cdf(y)).abs() < 1e-12);
        }
        for u in [0.01, 0.3, 0.99] {
            let y = inner.quantile(u).unwrap();
            assert!((inner.cdf(y).unwrap() - u).abs() < 1e-10);
        }
    }

    #[test]
    fn density_matches_cdf_slope() {
        let b = exp_base();
        let models = [
            stopped_max(&Pgf::logarithmic(0.95).unwrap(), &b),
            stopped_min(&Pgf::geometric(0.3).unwrap(), &b),
            max_precursor(&Pgf::potential_conjugate(0.4).unwrap(), &b),
            min_precursor(&Pgf::zt_poisson(2.0).unwrap(), &b),
            combined_extension(&make_family(FamilyId::Ex63 { alpha: 0.5 }).unwrap(), -1.2, &b, Flavor::Max).unwrap(),
        ];
        for m in &models {
            for y in [20.0, 100.0, 250.0] {
                let h = 1e-3;
                let fd = (m.cdf(y + h).unwrap() - m.cdf(y - h).unwrap()) / (2.0 * h);
                let pdf = m.pdf(y).unwrap();
                assert!(((fd - pdf) / pdf).abs() < 1e-5, "{m} y={y}: {fd} vs {pdf}");
            }
        }
    }

    #[test]
    fn not_closed_rejected() {
        let zp = make_family(FamilyId::ZtPoisson).unwrap();
        assert!(matches!(combined_extension(&zp, 1.0, &uniform(), Flavor::Max), Err(Error::NotClosed(_))));
    }
}
