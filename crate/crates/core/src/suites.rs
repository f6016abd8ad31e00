//! Catalog-wide batteries of property checks.
//!
//! Each item pairs a [`CheckReport`] with the outcome the catalog declares,
//! so a suite confirms flags in both directions: closed families must pass
//! the closure checks and non-closed ones must fail them.

use serde::{Deserialize, Serialize};

use crate::catalog::{dilation_family, make_family, sandwich_family, FamilyId, StoppingFamily};
use crate::checks::{self, CheckReport, GridSpec, StabilityKind};
use crate::dist::ContinuousModel;
use crate::error::{Error, Result};
use crate::pgf::Pgf;
use crate::specs::StoppingSpec;
use crate::transforms::{Flavor, MapOp, Step, TransformKind, TransformedModel};

/// Tolerance for identities evaluated through closed forms.
pub const CLOSED_FORM_TOL: f64 = 1e-10;
/// Tolerance for identities that go through numeric inversion.
pub const NUMERIC_TOL: f64 = 1e-9;
/// Tolerance for composition closure.
pub const CLOSURE_TOL: f64 = 1e-8;
/// Tolerance on the relative spread of the pmf ratio screen.
pub const RATIO_SPREAD_TOL: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Suite {
    Identities,
    Reversibility,
    AutoReversibility,
    Closure,
    Stability,
    Order,
    All,
}

impl Suite {
    pub fn parse(s: &str) -> Result<Self> {
        Ok(match s.trim() {
            "identities" | "identity" => Suite::Identities,
            "reversibility" => Suite::Reversibility,
            "auto" | "auto-reversibility" => Suite::AutoReversibility,
            "closure" => Suite::Closure,
            "stability" => Suite::Stability,
            "order" => Suite::Order,
            "all" => Suite::All,
            other => return Err(Error::Spec(format!("unknown check suite '{other}'"))),
        })
    }

    pub fn name(self) -> &'static str {
        match self {
            Suite::Identities => "identities",
            Suite::Reversibility => "reversibility",
            Suite::AutoReversibility => "auto-reversibility",
            Suite::Closure => "closure",
            Suite::Stability => "stability",
            Suite::Order => "order",
            Suite::All => "all",
        }
    }
}

/// Overrides applied to every check of a run.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct SuiteConfig {
    /// Restricts family-level suites to one stopping family.
    pub family: Option<StoppingSpec>,
    pub tolerance: Option<f64>,
    /// Points of unit and probability grids.
    pub grid_points: Option<usize>,
}

/// A report and the outcome the catalog declares for it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SuiteItem {
    pub suite: Suite,
    pub expect_pass: bool,
    pub report: CheckReport,
}

impl SuiteItem {
    pub fn confirmed(&self) -> bool {
        self.report.passed == self.expect_pass
    }
}

impl SuiteConfig {
    fn tol(&self, default: f64) -> f64 {
        self.tolerance.unwrap_or(default)
    }

    fn unit(&self) -> GridSpec {
        GridSpec::Unit {
            points: self.grid_points.unwrap_or(checks::DEFAULT_UNIT_POINTS),
        }
    }

    fn probability(&self) -> GridSpec {
        match GridSpec::probability() {
            GridSpec::Probability { lo, hi, points } => GridSpec::Probability {
                lo,
                hi,
                points: self.grid_points.unwrap_or(points),
            },
            g => g,
        }
    }
}

/// Families closed under composition: the six catalog entries plus one
/// sandwich-derived and two dilation-derived families.
pub fn closed_families() -> Result<Vec<StoppingFamily>> {
    let geo = make_family(FamilyId::ZtGeometric)?;
    let pc = make_family(FamilyId::PotentialConjugate)?;
    let alpha = 0.7;
    let sandwich = sandwich_family(
        &geo,
        &Pgf::zt_poisson(alpha)?,
        &Pgf::logarithmic(-(-alpha).exp_m1())?,
        alpha,
    )?;
    Ok(vec![
        geo.clone(),
        pc.clone(),
        make_family(FamilyId::Ex63 { alpha: 1.0 })?,
        make_family(FamilyId::Ex64 { alpha: 1.0, beta: 2.0 })?,
        make_family(FamilyId::Ex65 { alpha: 1.0, n: 2 })?,
        make_family(FamilyId::Ex66 { alpha: 0.5 })?,
        sandwich,
        dilation_family(&geo, 2)?,
        dilation_family(&pc, 3)?,
    ])
}

/// Standalone families indexed by `eta` but not closed.
pub fn open_families() -> Result<Vec<StoppingFamily>> {
    Ok(vec![
        make_family(FamilyId::ZtPoisson)?,
        make_family(FamilyId::Logarithmic)?,
        make_family(FamilyId::ZtBinomial { n: 2 })?,
        make_family(FamilyId::Etnb { r: 0.5 })?,
    ])
}

/// One or more members of every pgf family in the crate.
pub fn catalog_members() -> Result<Vec<Pgf>> {
    let log = Pgf::logarithmic(0.5)?;
    let ztp = Pgf::zt_poisson(1.0)?;
    Ok(vec![
        Pgf::identity(),
        Pgf::deterministic(3)?,
        Pgf::geometric(0.3)?,
        ztp.clone(),
        Pgf::zt_poisson(2.5)?,
        Pgf::logarithmic(0.8)?,
        Pgf::potential_conjugate(0.4)?,
        Pgf::zt_binomial(3, 0.4)?,
        Pgf::etnb(0.5, 0.6)?,
        Pgf::etnb(-0.4, 0.7)?,
        Pgf::etnb(1e-8, 0.6)?,
        Pgf::ex63(1.0, 2.0)?,
        Pgf::ex64(1.0, 2.0, 1.7)?,
        Pgf::ex65(1.0, 2, 1.7)?,
        Pgf::ex66(0.5, 0.3)?,
        Pgf::dilated(&Pgf::geometric(0.4)?, 2)?,
        Pgf::composite(&log, &ztp),
    ])
}

fn eta_grid(family: &StoppingFamily) -> Vec<f64> {
    let e0 = family.eta0();
    [0.25, 0.5, 1.0, 2.0, 3.0].iter().map(|d| e0 + d).collect()
}

fn eta_pairs(family: &StoppingFamily) -> Vec<(f64, f64)> {
    let e0 = family.eta0();
    [(0.2, 0.3), (0.5, 0.5), (1.0, 0.25), (0.1, 2.0), (1.5, 1.5), (0.7, 1.3)]
        .iter()
        .map(|(a, b)| (e0 + a, e0 + b))
        .collect()
}

fn item(suite: Suite, expect_pass: bool, report: CheckReport) -> SuiteItem {
    SuiteItem {
        suite,
        expect_pass,
        report,
    }
}

fn sup_unit<F: Fn(f64) -> Result<f64>>(points: &[f64], f: F) -> Result<f64> {
    let mut sup = 0.0f64;
    for &u in points {
        let d = f(u)?;
        if d.is_nan() {
            return Ok(f64::NAN);
        }
        sup = sup.max(d);
    }
    Ok(sup)
}

fn report(id: &str, operand: String, grid: GridSpec, sup: f64, tol: f64, notes: &str) -> CheckReport {
    CheckReport {
        check_id: id.to_string(),
        operands: vec![operand],
        grid,
        sup_discrepancy: sup,
        tolerance: tol,
        passed: sup <= tol,
        notes: notes.to_string(),
    }
}

/// Conjugation, inversion and precursor/extreme round trips of one pgf.
pub fn identity_checks(pgf: &Pgf, grid: &GridSpec, tolerance: Option<f64>) -> Result<Vec<CheckReport>> {
    let pts = grid.unit_points();
    let closed = pgf.has_closed_form_inverse();
    let tol = tolerance.unwrap_or(if closed { CLOSED_FORM_TOL } else { NUMERIC_TOL });
    let path = if closed { "closed form" } else { "numeric inversion" };
    let name = format!("{}{:?}", pgf.family(), pgf.params());
    let conj = pgf.conjugate();

    let involution = sup_unit(&pts, |t| {
        let twice = 1.0 - conj.eval_unchecked(1.0 - t);
        Ok((twice - pgf.eval_unchecked(t)).abs())
    })?;
    let inverse = sup_unit(&pts, |u| Ok((pgf.eval(pgf.inverse_eval(u)?)? - u).abs()))?;
    let conj_inverse = sup_unit(&pts, |u| Ok((conj.eval(conj.inverse_eval(u)?)? - u).abs()))?;

    let base = ContinuousModel::exponential(1.0)?;
    let y_grid = probability_like(grid);
    let ys = y_grid.y_points(&base)?;
    let chain = |a: MapOp, b: MapOp| {
        TransformedModel::from_steps(
            TransformKind::Chain,
            vec![Step::new(a, pgf.clone()), Step::new(b, pgf.clone())],
            base,
        )
    };
    let round_trips = [
        chain(MapOp::Inverse, MapOp::Pgf),
        chain(MapOp::Pgf, MapOp::Inverse),
        chain(MapOp::ConjugateInverse, MapOp::Conjugate),
        chain(MapOp::Conjugate, MapOp::ConjugateInverse),
    ];
    let mut extreme = 0.0f64;
    for m in &round_trips {
        extreme = extreme.max(sup_unit(&ys, |y| Ok((m.cdf(y)? - base.cdf(y)).abs()))?);
    }
    Ok(vec![
        report("conjugate_involution", name.clone(), grid.clone(), involution, tol, path),
        report("inverse_round_trip", name.clone(), grid.clone(), inverse, tol, path),
        report("conjugate_inverse_round_trip", name.clone(), grid.clone(), conj_inverse, tol, path),
        report(
            "precursor_extreme_round_trip",
            name,
            y_grid,
            extreme,
            tol,
            path,
        ),
    ])
}

/// Probability grid with as many points as `grid`.
fn probability_like(grid: &GridSpec) -> GridSpec {
    let points = match grid {
        GridSpec::Unit { points } | GridSpec::Probability { points, .. } => *points,
        _ => checks::DEFAULT_PROB_POINTS,
    };
    match GridSpec::probability() {
        GridSpec::Probability { lo, hi, .. } => GridSpec::Probability { lo, hi, points },
        g => g,
    }
}

fn member_set(config: &SuiteConfig) -> Result<Vec<Pgf>> {
    match &config.family {
        None => catalog_members(),
        Some(spec) => {
            if spec.eta.is_some() || !spec.params.is_empty() || !spec.components.is_empty() {
                return Ok(vec![spec.to_pgf()?]);
            }
            let fam = spec.family()?;
            eta_grid(&fam).iter().map(|&e| fam.member(e)).collect()
        }
    }
}

fn identities(config: &SuiteConfig) -> Result<Vec<SuiteItem>> {
    let grid = config.unit();
    let mut out = Vec::new();
    for p in member_set(config)? {
        for r in identity_checks(&p, &grid, config.tolerance)? {
            out.push(item(Suite::Identities, true, r));
        }
    }
    Ok(out)
}

fn reversibility(config: &SuiteConfig) -> Result<Vec<SuiteItem>> {
    let grid = config.unit();
    let tol = config.tol(NUMERIC_TOL);
    let mut out = Vec::new();
    if config.family.is_some() {
        for p in member_set(config)? {
            match crate::catalog::reversal_partner(&p) {
                Some(q) => out.push(item(Suite::Reversibility, true, checks::check_reversible_pair(&p, &q, &grid, tol))),
                None => out.push(item(
                    Suite::Reversibility,
                    true,
                    report(
                        "reversible_pair",
                        format!("{}{:?}", p.family(), p.params()),
                        grid.clone(),
                        f64::NAN,
                        tol,
                        "no reversal partner in the catalog",
                    ),
                )),
            }
        }
        return Ok(out);
    }
    for alpha in [0.5, 1.0, 2.0] {
        let n = Pgf::zt_poisson(alpha)?;
        let partner = Pgf::logarithmic(-(-alpha).exp_m1())?;
        out.push(item(Suite::Reversibility, true, checks::check_reversible_pair(&n, &partner, &grid, tol)));
    }
    for m in [2u32, 3, 5] {
        let n = Pgf::potential_conjugate(1.0 / m as f64)?;
        out.push(item(
            Suite::Reversibility,
            true,
            checks::check_reversible_pair(&n, &Pgf::deterministic(m)?, &grid, tol),
        ));
    }
    for (alpha, n, eta) in [(1.0, 2u32, 1.7), (0.5, 3, 1.2), (2.0, 2, 3.0)] {
        let a = Pgf::ex65(alpha, n, eta)?;
        let b = Pgf::ex64(alpha, n as f64, eta)?;
        out.push(item(Suite::Reversibility, true, checks::check_reversible_pair(&a, &b, &grid, tol)));
    }
    // a mismatched pair must be rejected
    out.push(item(
        Suite::Reversibility,
        false,
        checks::check_reversible_pair(&Pgf::zt_poisson(1.0)?, &Pgf::logarithmic(0.3)?, &grid, tol),
    ));
    Ok(out)
}

fn auto_reversibility(config: &SuiteConfig) -> Result<Vec<SuiteItem>> {
    let grid = config.unit();
    let tol = config.tol(CLOSED_FORM_TOL);
    let mut out = Vec::new();
    if config.family.is_some() {
        for p in member_set(config)? {
            out.push(item(Suite::AutoReversibility, true, checks::check_auto_reversible(&p, &grid, tol)));
        }
        return Ok(out);
    }
    for p in [0.2, 0.5, 0.9] {
        out.push(item(
            Suite::AutoReversibility,
            true,
            checks::check_auto_reversible(&Pgf::geometric(p)?, &grid, tol),
        ));
    }
    for eta in [1.5, 3.0] {
        out.push(item(
            Suite::AutoReversibility,
            true,
            checks::check_auto_reversible(&Pgf::ex63(1.0, eta)?, &grid, tol),
        ));
    }
    let n = Pgf::zt_poisson(1.0)?;
    let partner = Pgf::logarithmic(-(-1.0f64).exp_m1())?;
    let (a, b) = crate::catalog::auto_reversible_from_pair(&n, &partner)?;
    for h in [a, b] {
        out.push(item(
            Suite::AutoReversibility,
            true,
            checks::check_auto_reversible(&h, &grid, config.tol(NUMERIC_TOL)),
        ));
    }
    for alpha in [0.5, 1.0, 2.0] {
        out.push(item(
            Suite::AutoReversibility,
            false,
            checks::check_auto_reversible(&Pgf::zt_poisson(alpha)?, &grid, tol),
        ));
    }
    Ok(out)
}

fn zt_poisson_etas() -> Vec<f64> {
    [0.5f64, 1.0, 2.0].iter().map(|a| (a.exp_m1() / a).ln()).collect()
}

fn closure(config: &SuiteConfig) -> Result<Vec<SuiteItem>> {
    let points = config.grid_points.unwrap_or(checks::DEFAULT_UNIT_POINTS);
    let mut out = Vec::new();
    let mut add = |fam: &StoppingFamily, expect: bool, composition: bool| -> Result<()> {
        let etas = if fam.catalog_id() == Some(FamilyId::ZtPoisson) {
            zt_poisson_etas()
        } else {
            eta_grid(fam)
        };
        out.push(item(
            Suite::Closure,
            expect,
            checks::check_closure_necessary(fam, &etas, config.tol(RATIO_SPREAD_TOL))?,
        ));
        if composition {
            out.push(item(
                Suite::Closure,
                expect,
                checks::check_composition_closure(fam, &eta_pairs(fam), points, config.tol(CLOSURE_TOL))?,
            ));
        }
        Ok(())
    };
    if let Some(spec) = &config.family {
        add(&spec.family()?, true, true)?;
        return Ok(out);
    }
    for fam in closed_families()? {
        add(&fam, true, true)?;
    }
    for fam in open_families()? {
        let composition = fam.catalog_id() == Some(FamilyId::ZtPoisson);
        add(&fam, false, composition)?;
    }
    Ok(out)
}

fn stability(config: &SuiteConfig) -> Result<Vec<SuiteItem>> {
    let grid = config.probability();
    let tol = config.tol(NUMERIC_TOL);
    let bases = [ContinuousModel::exponential(1.0)?, ContinuousModel::logistic(0.0, 1.0)?];
    let families = match &config.family {
        Some(spec) => vec![spec.family()?],
        None => {
            let mut f: Vec<StoppingFamily> = closed_families()?.into_iter().filter(|f| f.eta0() == 0.0).collect();
            f.push(make_family(FamilyId::Ex63 { alpha: 1.0 })?);
            f
        }
    };
    let signed = [(0.5, 0.7), (-0.4, 1.0), (1.2, -0.3), (-0.5, -0.6)];
    let mut out = Vec::new();
    for fam in &families {
        for base in &bases {
            if fam.eta0() == 0.0 {
                for flavor in [Flavor::Max, Flavor::Min] {
                    out.push(item(
                        Suite::Stability,
                        true,
                        checks::check_stability(fam, base, StabilityKind::Combined(flavor), &signed, &grid, tol)?,
                    ));
                }
            }
            let pairs: Vec<(f64, f64)> = eta_pairs(fam).into_iter().take(3).collect();
            for op in [MapOp::Pgf, MapOp::Conjugate] {
                out.push(item(
                    Suite::Stability,
                    true,
                    checks::check_stability(fam, base, StabilityKind::Stopped(op), &pairs, &grid, tol)?,
                ));
            }
        }
    }
    Ok(out)
}

fn order(config: &SuiteConfig) -> Result<Vec<SuiteItem>> {
    let grid = config.probability();
    let bases = [
        ContinuousModel::exponential(1.0)?,
        ContinuousModel::logistic(0.0, 1.0)?,
        ContinuousModel::lognormal(0.0, 1.0)?,
    ];
    let mut out = Vec::new();
    for p in member_set(config)? {
        for b in &bases {
            out.push(item(Suite::Order, true, checks::check_stochastic_order(&p, b, &grid)?));
        }
    }
    Ok(out)
}

/// Runs one suite; [`Suite::All`] runs every other suite in order.
pub fn run_suite(suite: Suite, config: &SuiteConfig) -> Result<Vec<SuiteItem>> {
    match suite {
        Suite::Identities => identities(config),
        Suite::Reversibility => reversibility(config),
        Suite::AutoReversibility => auto_reversibility(config),
        Suite::Closure => closure(config),
        Suite::Stability => stability(config),
        Suite::Order => order(config),
        Suite::All => {
            let mut out = Vec::new();
            for s in [
                Suite::Identities,
                Suite::Reversibility,
                Suite::AutoReversibility,
                Suite::Closure,
                Suite::Stability,
                Suite::Order,
            ] {
                out.extend(run_suite(s, config)?);
            }
            Ok(out)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn unconfirmed(items: &[SuiteItem]) -> Vec<String> {
        items
            .iter()
            .filter(|i| !i.confirmed())
            .map(|i| format!("{} {:?} sup={:e} {}", i.report.check_id, i.report.operands, i.report.sup_discrepancy, i.report.notes))
            .collect()
    }

    #[test]
    fn default_suites_confirm_catalog_flags() {
        for s in [
            Suite::Identities,
            Suite::Reversibility,
            Suite::AutoReversibility,
            Suite::Closure,
            Suite::Stability,
            Suite::Order,
        ] {
            let items = run_suite(s, &SuiteConfig::default()).unwrap();
            assert!(!items.is_empty());
            let bad = unconfirmed(&items);
            assert!(bad.is_empty(), "{s:?}: {bad:#?}");
        }
    }

    #[test]
    fn zt_poisson_closure_fails_when_asked() {
        let config = SuiteConfig {
            family: Some(StoppingSpec::parse_inline("zt_poisson").unwrap()),
            ..Default::default()
        };
        let items = run_suite(Suite::Closure, &config).unwrap();
        assert!(items.iter().any(|i| !i.report.passed && i.report.sup_discrepancy > 0.1));
    }
}
