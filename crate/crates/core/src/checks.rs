//! Numerical certification of pgf identities and model-family properties.
//!
//! Every check evaluates a sup-norm discrepancy on an explicit grid and
//! compares it with a tolerance. Reports are deterministic functions of
//! their operands and grid.

use serde::{Deserialize, Serialize};

use crate::catalog::StoppingFamily;
use crate::dist::ContinuousModel;
use crate::error::{Error, Result};
use crate::pgf::Pgf;
use crate::transforms::{self, Flavor, MapOp, Step, TransformKind, TransformedModel};

/// Default number of points on `[0, 1]`.
pub const DEFAULT_UNIT_POINTS: usize = 1001;
/// Default number of probability points for y-grids.
pub const DEFAULT_PROB_POINTS: usize = 201;
/// Slack allowed on stochastic-order inequalities.
pub const ORDER_SLACK: f64 = 1e-12;
/// Below this reference ratio the closure screen uses an absolute spread.
pub const RATIO_ABS_FALLBACK: f64 = 1e-8;

/// Evaluation points of a check, stored so reports can be replayed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum GridSpec {
    /// `points` equally spaced values in `[0, 1]`, endpoints included.
    Unit { points: usize },
    /// Base quantiles at `points` equally spaced probabilities in `[lo, hi]`.
    Probability { lo: f64, hi: f64, points: usize },
    /// Explicit `eta` values.
    Eta { values: Vec<f64> },
    /// `eta` pairs, each evaluated on a unit grid.
    EtaPairs { pairs: Vec<(f64, f64)>, points: usize },
}

impl GridSpec {
    pub fn unit() -> Self {
        GridSpec::Unit {
            points: DEFAULT_UNIT_POINTS,
        }
    }

    pub fn probability() -> Self {
        GridSpec::Probability {
            lo: 0.005,
            hi: 0.995,
            points: DEFAULT_PROB_POINTS,
        }
    }

    fn linspace(lo: f64, hi: f64, n: usize) -> Vec<f64> {
        if n == 1 {
            return vec![lo];
        }
        (0..n).map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64).collect()
    }

    /// Points on `[0, 1]` for unit grids and pair grids.
    pub fn unit_points(&self) -> Vec<f64> {
        match self {
            GridSpec::Unit { points } | GridSpec::EtaPairs { points, .. } => Self::linspace(0.0, 1.0, *points),
            GridSpec::Probability { lo, hi, points } => Self::linspace(*lo, *hi, *points),
            GridSpec::Eta { .. } => vec![],
        }
    }

    /// y-values for a base model.
    pub fn y_points(&self, base: &ContinuousModel) -> Result<Vec<f64>> {
        self.unit_points().into_iter().map(|u| base.quantile(u)).collect()
    }
}

/// Outcome of one property check.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckReport {
    pub check_id: String,
    pub operands: Vec<String>,
    pub grid: GridSpec,
    pub sup_discrepancy: f64,
    pub tolerance: f64,
    pub passed: bool,
    pub notes: String,
}

impl CheckReport {
    fn new(check_id: &str, operands: Vec<String>, grid: GridSpec, sup: f64, tolerance: f64, notes: impl Into<String>) -> Self {
        // NaN discrepancies never pass
        let passed = sup <= tolerance;
        CheckReport {
            check_id: check_id.to_string(),
            operands,
            grid,
            sup_discrepancy: sup,
            tolerance,
            passed,
            notes: notes.into(),
        }
    }
}

fn describe(p: &Pgf) -> String {
    format!("{}{:?}", p.family(), p.params())
}

fn sup_over<F: FnMut(f64) -> Result<f64>>(points: &[f64], mut f: F) -> Result<f64> {
    let mut sup = 0.0f64;
    for &t in points {
        let d = f(t)?;
        if d.is_nan() {
            return Ok(f64::NAN);
        }
        sup = sup.max(d);
    }
    Ok(sup)
}

/// `sup |h_{N*}(h̄_N(t)) - t|` together with `sup |h̄_{N*}(h_N(t)) - t|`.
pub fn check_reversible_pair(n: &Pgf, n_star: &Pgf, grid: &GridSpec, tolerance: f64) -> CheckReport {
    let pts = grid.unit_points();
    let sup = pts
        .iter()
        .map(|&t| {
            let a = n_star.eval_unchecked(n.conjugate().eval_unchecked(t)) - t;
            let b = n_star.conjugate().eval_unchecked(n.eval_unchecked(t)) - t;
            a.abs().max(b.abs())
        })
        .fold(0.0, f64::max);
    CheckReport::new(
        "reversible_pair",
        vec![describe(n), describe(n_star)],
        grid.clone(),
        sup,
        tolerance,
        "",
    )
}

/// `sup |h_N(h̄_N(t)) - t|`.
pub fn check_auto_reversible(n: &Pgf, grid: &GridSpec, tolerance: f64) -> CheckReport {
    let pts = grid.unit_points();
    let sup = pts
        .iter()
        .map(|&t| (n.eval_unchecked(n.conjugate().eval_unchecked(t)) - t).abs())
        .fold(0.0, f64::max);
    CheckReport::new("auto_reversible", vec![describe(n)], grid.clone(), sup, tolerance, "")
}

/// `Pr(N = 2) / (Pr(N = 1)(1 - Pr(N = 1)))`, constant in `eta` for closed families.
pub fn closure_ratio(p: &Pgf) -> Result<f64> {
    let p1 = p.pmf(1)?;
    let p2 = p.pmf(2)?;
    Ok(p2 / (p1 * (1.0 - p1)))
}

/// Spread of [`closure_ratio`] across members at `etas`, relative to the first.
///
/// A necessary condition only: a constant ratio does not prove closure.
pub fn check_closure_necessary(family: &StoppingFamily, etas: &[f64], tolerance: f64) -> Result<CheckReport> {
    if etas.is_empty() {
        return Err(Error::Precondition("eta grid is empty".into()));
    }
    let ratios: Vec<f64> = etas
        .iter()
        .map(|&e| closure_ratio(&family.member(e)?))
        .collect::<Result<_>>()?;
    let reference = ratios[0];
    let absolute = reference.abs() < RATIO_ABS_FALLBACK;
    let spread = ratios
        .iter()
        .map(|r| {
            let d = (r - reference).abs();
            if absolute {
                d
            } else {
                d / reference.abs()
            }
        })
        .fold(0.0, f64::max);
    let mut notes = format!(
        "ratios {:?}; {} spread",
        ratios,
        if absolute { "absolute" } else { "relative" }
    );
    if spread <= tolerance {
        notes.push_str("; necessary condition only");
    }
    Ok(CheckReport::new(
        "closure_necessary",
        vec![family.family_id()],
        GridSpec::Eta { values: etas.to_vec() },
        spread,
        tolerance,
        notes,
    ))
}

/// Same screen for an explicit list of pgfs, e.g. one standalone family over its native parameter.
pub fn check_closure_necessary_members(label: &str, members: &[Pgf], tolerance: f64) -> Result<CheckReport> {
    let etas: Vec<f64> = members.iter().map(Pgf::eta).collect();
    let ratios: Vec<f64> = members.iter().map(closure_ratio).collect::<Result<_>>()?;
    let reference = ratios[0];
    let absolute = reference.abs() < RATIO_ABS_FALLBACK;
    let spread = ratios
        .iter()
        .map(|r| if absolute { (r - reference).abs() } else { (r - reference).abs() / reference.abs() })
        .fold(0.0, f64::max);
    Ok(CheckReport::new(
        "closure_necessary",
        vec![label.to_string()],
        GridSpec::Eta { values: etas },
        spread,
        tolerance,
        format!("ratios {ratios:?}"),
    ))
}

/// `member(a) ∘ member(b)` against `member(a + b)`, with the conjugate,
/// inverse and conjugate-inverse forms of the same identity.
pub fn check_composition_closure(family: &StoppingFamily, pairs: &[(f64, f64)], points: usize, tolerance: f64) -> Result<CheckReport> {
    let grid = GridSpec::EtaPairs {
        pairs: pairs.to_vec(),
        points,
    };
    let pts = grid.unit_points();
    let mut sup = 0.0f64;
    for &(a, b) in pairs {
        let ma = family.member(a)?;
        let mb = family.member(b)?;
        let mab = family.member(a + b)?;
        let s = sup_over(&pts, |t| {
            let direct = (ma.eval_unchecked(mb.eval_unchecked(t)) - mab.eval_unchecked(t)).abs();
            let conj = (ma.conjugate().eval_unchecked(mb.conjugate().eval_unchecked(t))
                - mab.conjugate().eval_unchecked(t))
            .abs();
            let inv = (mb.inverse_unchecked(ma.inverse_unchecked(t)?)? - mab.inverse_unchecked(t)?).abs();
            let cinv = (mb.conjugate().inverse_eval(ma.conjugate().inverse_eval(t)?)?
                - mab.conjugate().inverse_eval(t)?)
            .abs();
            Ok(direct.max(conj).max(inv).max(cinv))
        })?;
        sup = if s.is_nan() { f64::NAN } else { sup.max(s) };
    }
    Ok(CheckReport::new(
        "composition_closure",
        vec![family.family_id()],
        grid,
        sup,
        tolerance,
        "",
    ))
}

/// Composition check for explicit members `(a, b, expected)` of a family
/// that is not indexed additively, e.g. Poisson in its rate.
pub fn check_composition_members(label: &str, triples: &[(Pgf, Pgf, Pgf)], points: usize, tolerance: f64) -> CheckReport {
    let pts = GridSpec::Unit { points }.unit_points();
    let sup = triples
        .iter()
        .flat_map(|(a, b, ab)| {
            pts.iter()
                .map(move |&t| (a.eval_unchecked(b.eval_unchecked(t)) - ab.eval_unchecked(t)).abs())
        })
        .fold(0.0, f64::max);
    CheckReport::new(
        "composition_closure",
        vec![label.to_string()],
        GridSpec::Unit { points },
        sup,
        tolerance,
        "",
    )
}

/// The transform applied twice by a stability check.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StabilityKind {
    /// One of the four single-pgf maps at `eta >= eta0`.
    Stopped(MapOp),
    /// The two-sided extension at any real `eta`.
    Combined(Flavor),
}

fn extension_steps(family: &StoppingFamily, kind: StabilityKind, eta: f64, base: &ContinuousModel) -> Result<Vec<Step>> {
    Ok(match kind {
        StabilityKind::Stopped(op) => vec![Step::new(op, family.member(eta)?)],
        StabilityKind::Combined(flavor) => transforms::combined_extension(family, eta, base, flavor)?
            .steps()
            .to_vec(),
    })
}

/// Transform twice at `(a, b)` against once at `a + b`, on base quantile grids.
///
/// For families with `eta0 > 0` the notes flag the contraction regime: the
/// doubly transformed model sits at `eta >= 2 eta0`.
pub fn check_stability(
    family: &StoppingFamily,
    base: &ContinuousModel,
    kind: StabilityKind,
    pairs: &[(f64, f64)],
    grid: &GridSpec,
    tolerance: f64,
) -> Result<CheckReport> {
    let ys = grid.y_points(base)?;
    let mut sup = 0.0f64;
    let mut contraction = false;
    let mut min_effective = f64::INFINITY;
    for &(a, b) in pairs {
        let mut steps = extension_steps(family, kind, a, base)?;
        steps.extend(extension_steps(family, kind, b, base)?);
        let twice = TransformedModel::from_steps(TransformKind::Chain, steps, *base);
        let once = TransformedModel::from_steps(TransformKind::Chain, extension_steps(family, kind, a + b, base)?, *base);
        let s = sup_over(&ys, |y| Ok((twice.cdf(y)? - once.cdf(y)?).abs()))?;
        sup = if s.is_nan() { f64::NAN } else { sup.max(s) };
        if family.eta0() > 0.0 {
            if let StabilityKind::Stopped(_) = kind {
                let effective = family.member(a)?.compose(&family.member(b)?).eta();
                min_effective = min_effective.min(effective);
                contraction = true;
            }
        }
    }
    let notes = if contraction {
        let ok = min_effective >= 2.0 * family.eta0() - 1e-9;
        format!(
            "contraction regime: smallest effective eta {min_effective} {} 2*eta0 = {}",
            if ok { ">=" } else { "<" },
            2.0 * family.eta0()
        )
    } else {
        String::new()
    };
    let mut report = CheckReport::new(
        "stability",
        vec![family.family_id(), base.to_string(), format!("{kind:?}")],
        grid.clone(),
        sup,
        tolerance,
        notes,
    );
    if contraction && min_effective < 2.0 * family.eta0() - 1e-9 {
        report.passed = false;
    }
    Ok(report)
}

/// The four first-order stochastic dominance relations of stopped extremes
/// and precursors against the base, as the largest violation.
pub fn check_stochastic_order(stopping: &Pgf, base: &ContinuousModel, grid: &GridSpec) -> Result<CheckReport> {
    let ys = grid.y_points(base)?;
    let mx = transforms::stopped_max(stopping, base);
    let mn = transforms::stopped_min(stopping, base);
    let xp = transforms::max_precursor(stopping, base);
    let np = transforms::min_precursor(stopping, base);
    let sup = sup_over(&ys, |y| {
        let f = base.cdf(y);
        let v = [
            mx.cdf(y)? - f,
            f - mn.cdf(y)?,
            np.cdf(y)? - f,
            f - xp.cdf(y)?,
        ];
        Ok(v.into_iter().fold(0.0, f64::max))
    })?;
    Ok(CheckReport::new(
        "stochastic_order",
        vec![describe(stopping), base.to_string()],
        grid.clone(),
        sup,
        ORDER_SLACK,
        "max <= base <= min and min-precursor <= base <= max-precursor",
    ))
}

/// Two-pgf extensions of a closed family collapse to the one-parameter
/// extension at `eta2 - eta1`.
pub fn check_two_param_collapse(
    family: &StoppingFamily,
    base: &ContinuousModel,
    pairs: &[(f64, f64)],
    grid: &GridSpec,
    tolerance: f64,
) -> Result<CheckReport> {
    let ys = grid.y_points(base)?;
    let mut sup = 0.0f64;
    for &(e1, e2) in pairs {
        for flavor in [Flavor::Max, Flavor::Min] {
            let two = transforms::two_param_from_family(family, e1, e2, base, flavor)?;
            let one = transforms::combined_extension(family, e2 - e1, base, flavor)?;
            sup = sup.max(sup_over(&ys, |y| Ok((two.cdf(y)? - one.cdf(y)?).abs()))?);
        }
    }
    Ok(CheckReport::new(
        "two_param_collapse",
        vec![family.family_id(), base.to_string()],
        grid.clone(),
        sup,
        tolerance,
        "",
    ))
}

/// For `eta0 = 0` families: stopped extremes and precursors are the
/// extension at `eta` and `-eta`.
pub fn check_extension_inclusion(family: &StoppingFamily, base: &ContinuousModel, etas: &[f64], grid: &GridSpec, tolerance: f64) -> Result<CheckReport> {
    let ys = grid.y_points(base)?;
    let mut sup = 0.0f64;
    for &eta in etas {
        let m = family.member(eta)?;
        let anchor = transforms::default_anchor(family, eta);
        let pairs = [
            (transforms::stopped_max(&m, base), eta, Flavor::Max),
            (transforms::max_precursor(&m, base), -eta, Flavor::Max),
            (transforms::stopped_min(&m, base), eta, Flavor::Min),
            (transforms::min_precursor(&m, base), -eta, Flavor::Min),
        ];
        for (direct, e, flavor) in pairs {
            let ext = transforms::combined_extension_with_anchor(family, e, base, flavor, anchor)?;
            sup = sup.max(sup_over(&ys, |y| Ok((direct.cdf(y)? - ext.cdf(y)?).abs()))?);
        }
    }
    Ok(CheckReport::new(
        "extension_inclusion",
        vec![family.family_id(), base.to_string()],
        grid.clone(),
        sup,
        tolerance,
        "anchored two-member form against the direct transforms",
    ))
}
