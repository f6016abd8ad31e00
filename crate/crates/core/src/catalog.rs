//! Stopping-model families indexed by `eta = -ln Pr(N = 1)`.
//!
//! Families closed under pgf composition satisfy
//! `member(a) ∘ member(b) = member(a + b)`. The standalone Poisson,
//! logarithmic, binomial and ETNB families are also indexed by `eta` but are
//! not closed.

use std::fmt;

use crate::error::{Error, Result};
use crate::pgf::{Pgf, PgfFamily, DOMAIN_TOL};
use crate::roots;

/// Grid size used when validating pgf preconditions.
const PRECONDITION_GRID: usize = 1001;
/// Tolerance for validated pgf identities.
const PRECONDITION_TOL: f64 = 1e-10;

/// Catalog entry with its fixed shape parameters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum FamilyId {
    Degenerate,
    ZtGeometric,
    ZtPoisson,
    Logarithmic,
    PotentialConjugate,
    ZtBinomial { n: u32 },
    Etnb { r: f64 },
    Ex63 { alpha: f64 },
    Ex64 { alpha: f64, beta: f64 },
    Ex65 { alpha: f64, n: u32 },
    Ex66 { alpha: f64 },
}

impl FamilyId {
    pub fn name(&self) -> &'static str {
        match self {
            FamilyId::Degenerate => "degenerate",
            FamilyId::ZtGeometric => "zt_geometric",
            FamilyId::ZtPoisson => "zt_poisson",
            FamilyId::Logarithmic => "logarithmic",
            FamilyId::PotentialConjugate => "potential_conjugate",
            FamilyId::ZtBinomial { .. } => "zt_binomial",
            FamilyId::Etnb { .. } => "etnb",
            FamilyId::Ex63 { .. } => "ex63",
            FamilyId::Ex64 { .. } => "ex64",
            FamilyId::Ex65 { .. } => "ex65",
            FamilyId::Ex66 { .. } => "ex66",
        }
    }

    /// Fixed shape parameters as `(name, value)` pairs.
    pub fn shape(&self) -> Vec<(&'static str, f64)> {
        match *self {
            FamilyId::ZtBinomial { n } => vec![("n", n as f64)],
            FamilyId::Etnb { r } => vec![("r", r)],
            FamilyId::Ex63 { alpha } | FamilyId::Ex66 { alpha } => vec![("alpha", alpha)],
            FamilyId::Ex64 { alpha, beta } => vec![("alpha", alpha), ("beta", beta)],
            FamilyId::Ex65 { alpha, n } => vec![("alpha", alpha), ("n", n as f64)],
            _ => vec![],
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
enum Kind {
    Catalog(FamilyId),
    Sandwich {
        base: Box<StoppingFamily>,
        inner: Pgf,
        outer: Pgf,
        alpha: f64,
    },
    Dilation {
        base: Box<StoppingFamily>,
        k: u32,
    },
}

/// A one-parameter family of stopping models.
#[derive(Debug, Clone, PartialEq)]
pub struct StoppingFamily {
    kind: Kind,
    eta0: f64,
    eta_max: f64,
    closed: bool,
    auto_reversible: bool,
}

impl fmt::Display for StoppingFamily {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.kind {
            Kind::Catalog(id) => {
                write!(f, "{}", id.name())?;
                let shape = id.shape();
                if !shape.is_empty() {
                    let parts: Vec<String> = shape.iter().map(|(k, v)| format!("{k}={v}")).collect();
                    write!(f, "({})", parts.join(","))?;
                }
                Ok(())
            }
            Kind::Sandwich { base, alpha, .. } => write!(f, "sandwich({base}, alpha={alpha})"),
            Kind::Dilation { base, k } => write!(f, "dilation({base}, k={k})"),
        }
    }
}

fn check_alpha(alpha: f64) -> Result<()> {
    if alpha.is_finite() && alpha > 0.0 {
        Ok(())
    } else {
        Err(Error::param("alpha", alpha, "must be positive and finite"))
    }
}

/// Builds a catalog family.
pub fn make_family(id: FamilyId) -> Result<StoppingFamily> {
    let (eta0, closed, auto_reversible) = match id {
        FamilyId::Degenerate => (0.0, true, false),
        FamilyId::ZtGeometric => (0.0, true, true),
        FamilyId::PotentialConjugate => (0.0, true, false),
        FamilyId::ZtPoisson | FamilyId::Logarithmic => (0.0, false, false),
        FamilyId::ZtBinomial { n } => {
            if n == 0 {
                return Err(Error::param("n", 0.0, "must be a positive integer"));
            }
            (0.0, false, false)
        }
        FamilyId::Etnb { r } => {
            if !r.is_finite() || r <= -1.0 {
                return Err(Error::param("r", r, "must be greater than -1"));
            }
            (0.0, false, false)
        }
        FamilyId::Ex63 { alpha } => {
            if alpha == 0.0 {
                // the alpha -> 0 limit is the geometric family
                return make_family(FamilyId::ZtGeometric);
            }
            check_alpha(alpha)?;
            (alpha, true, true)
        }
        FamilyId::Ex64 { alpha, beta } => {
            check_alpha(alpha)?;
            if !beta.is_finite() || beta < 1.0 {
                return Err(Error::param("beta", beta, "must be at least 1"));
            }
            (alpha, true, false)
        }
        FamilyId::Ex65 { alpha, n } => {
            check_alpha(alpha)?;
            if n == 0 {
                return Err(Error::param("n", 0.0, "must be a positive integer"));
            }
            (alpha, true, false)
        }
        FamilyId::Ex66 { alpha } => {
            if !(alpha > 0.0 && alpha < 1.0) {
                return Err(Error::param("alpha", alpha, "must lie in (0, 1)"));
            }
            (0.0, true, false)
        }
    };
    let eta_max = match id {
        FamilyId::Degenerate | FamilyId::ZtBinomial { n: 1 } => 0.0,
        // Pr(N = 1) tends to |r| as p -> 1 when r < 0
        FamilyId::Etnb { r } if r < 0.0 => -(-r).ln(),
        _ => f64::INFINITY,
    };
    Ok(StoppingFamily {
        kind: Kind::Catalog(id),
        eta0,
        eta_max,
        closed,
        auto_reversible,
    })
}

/// Unbounded bracket search for an increasing map `x -> eta(x)` on `(0, sup)`.
fn solve_native<F: Fn(f64) -> f64>(eta_of: F, eta: f64, sup: f64) -> Result<f64> {
    let mut hi = if sup.is_finite() { sup } else { 1.0 };
    if !sup.is_finite() {
        while eta_of(hi) < eta {
            hi *= 2.0;
            if hi > 1e300 {
                return Err(Error::Domain {
                    what: "eta",
                    value: eta,
                    domain: "representable range of the family",
                });
            }
        }
    }
    let x = roots::bisect_increasing(&eta_of, eta, 0.0, hi).or_else(|_| {
        // Flat regions near the ends of the bracket can stall the residual test
        // even though the bracket has collapsed.
        let mut lo = 0.0;
        let mut h = hi;
        for _ in 0..2000 {
            let mid = 0.5 * (lo + h);
            if mid == lo || mid == h {
                break;
            }
            if eta_of(mid) < eta {
                lo = mid;
            } else {
                h = mid;
            }
        }
        Ok::<f64, Error>(0.5 * (lo + h))
    })?;
    Ok(x)
}

impl StoppingFamily {
    pub fn family_id(&self) -> String {
        self.to_string()
    }

    /// The catalog identifier, if this is not a derived family.
    pub fn catalog_id(&self) -> Option<FamilyId> {
        match &self.kind {
            Kind::Catalog(id) => Some(*id),
            _ => None,
        }
    }

    /// Fixed shape parameters of the family.
    pub fn shape_params(&self) -> Vec<(&'static str, f64)> {
        match &self.kind {
            Kind::Catalog(id) => id.shape(),
            Kind::Sandwich { alpha, .. } => vec![("alpha", *alpha)],
            Kind::Dilation { k, .. } => vec![("k", *k as f64)],
        }
    }

    /// Smallest admissible `eta`.
    pub fn eta0(&self) -> f64 {
        self.eta0
    }

    /// `[eta0, eta_max]`; `eta_max` is infinite for the usual half-line.
    pub fn eta_domain(&self) -> (f64, f64) {
        (self.eta0, self.eta_max)
    }

    pub fn is_closed(&self) -> bool {
        self.closed
    }

    pub fn is_auto_reversible(&self) -> bool {
        self.auto_reversible
    }

    pub fn contains_identity(&self) -> bool {
        self.eta0 == 0.0
    }

    /// The member with `Pr(N = 1) = e^{-eta}`.
    pub fn member(&self, eta: f64) -> Result<Pgf> {
        if !eta.is_finite() || eta < self.eta0 - DOMAIN_TOL || eta > self.eta_max + DOMAIN_TOL {
            return Err(Error::Domain {
                what: "eta",
                value: eta,
                domain: "the family's eta domain",
            });
        }
        let eta = eta.clamp(self.eta0, self.eta_max);
        if eta == 0.0 {
            return Ok(Pgf::identity());
        }
        match &self.kind {
            Kind::Catalog(id) => catalog_member(*id, eta),
            Kind::Sandwich {
                base, inner, outer, alpha,
            } => {
                let middle = base.member(eta - alpha)?;
                Ok(outer.compose(&middle.compose(inner)))
            }
            Kind::Dilation { base, k } => Pgf::dilated(&base.member(eta * *k as f64)?, *k),
        }
    }

    /// For closed families, `member(eta1) ∘ member(eta2)` as a single member.
    pub fn compose_members(&self, eta1: f64, eta2: f64) -> Result<Pgf> {
        if !self.closed {
            return Err(Error::NotClosed(self.family_id()));
        }
        self.member(eta1 + eta2)
    }

    /// The family of reversal partners, when the whole family has one.
    pub fn reversal_partner(&self) -> Option<StoppingFamily> {
        if self.auto_reversible {
            return Some(self.clone());
        }
        match &self.kind {
            Kind::Catalog(FamilyId::Degenerate) => Some(self.clone()),
            Kind::Catalog(FamilyId::ZtPoisson) => make_family(FamilyId::Logarithmic).ok(),
            Kind::Catalog(FamilyId::Logarithmic) => make_family(FamilyId::ZtPoisson).ok(),
            Kind::Catalog(FamilyId::Ex65 { alpha, n }) => make_family(FamilyId::Ex64 {
                alpha: *alpha,
                beta: *n as f64,
            })
            .ok(),
            Kind::Catalog(FamilyId::Ex64 { alpha, beta }) if beta.fract() == 0.0 => {
                make_family(FamilyId::Ex65 {
                    alpha: *alpha,
                    n: *beta as u32,
                })
                .ok()
            }
            _ => None,
        }
    }
}

fn catalog_member(id: FamilyId, eta: f64) -> Result<Pgf> {
    let p = (-eta).exp();
    match id {
        FamilyId::Degenerate => Ok(Pgf::identity()),
        FamilyId::ZtGeometric => Pgf::geometric(p),
        FamilyId::PotentialConjugate => Pgf::potential_conjugate(p),
        FamilyId::Ex66 { alpha } => Pgf::ex66(alpha, p),
        FamilyId::Ex63 { alpha } => Pgf::ex63(alpha, eta),
        FamilyId::Ex64 { alpha, beta } => Pgf::ex64(alpha, beta, eta),
        FamilyId::Ex65 { alpha, n } => Pgf::ex65(alpha, n, eta),
        FamilyId::ZtPoisson => {
            // eta(alpha) = ln((e^alpha - 1) / alpha)
            let alpha = solve_native(|a| (a.exp_m1() / a).ln(), eta, f64::INFINITY)?;
            Pgf::zt_poisson(alpha)
        }
        FamilyId::Logarithmic => {
            // parametrized by a = -ln(1 - p) so the bracket is unbounded
            let eta_of = |a: f64| (a / -(-a).exp_m1()).ln();
            let a = solve_native(eta_of, eta, f64::INFINITY)?;
            Pgf::logarithmic(-(-a).exp_m1())
        }
        FamilyId::ZtBinomial { n } => {
            let nf = n as f64;
            let eta_of = |p: f64| {
                let q = 1.0 - p;
                let p1 = nf * p * q.powf(nf - 1.0) / -(nf * (-p).ln_1p()).exp_m1();
                -p1.ln()
            };
            Pgf::zt_binomial(n, solve_native(eta_of, eta, 1.0)?)
        }
        FamilyId::Etnb { r } => {
            let eta_of = |p: f64| {
                let p1 = if r.abs() < crate::pgf::ETNB_LOG_WINDOW {
                    p / -(-p).ln_1p()
                } else {
                    r * p / (-r * (-p).ln_1p()).exp_m1()
                };
                -p1.ln()
            };
            Pgf::etnb(r, solve_native(eta_of, eta, 1.0)?)
        }
    }
}

/// Family built as `outer ∘ base.member(eta - alpha) ∘ inner`.
///
/// Requires a closed `base` and `inner ∘ outer = base.member(alpha)`
/// pointwise within `1e-10`.
pub fn sandwich_family(base: &StoppingFamily, inner: &Pgf, outer: &Pgf, alpha: f64) -> Result<StoppingFamily> {
    if !base.closed {
        return Err(Error::NotClosed(base.family_id()));
    }
    check_alpha(alpha)?;
    let target = base.member(alpha)?;
    let both = Pgf::composite(inner, outer);
    let gap = sup_gap(|t| both.eval_unchecked(t), |t| target.eval_unchecked(t));
    if gap > PRECONDITION_TOL {
        return Err(Error::Precondition(format!(
            "inner ∘ outer differs from the base member at alpha by {gap:e}"
        )));
    }
    Ok(StoppingFamily {
        kind: Kind::Sandwich {
            base: Box::new(base.clone()),
            inner: inner.clone(),
            outer: outer.clone(),
            alpha,
        },
        eta0: base.eta0 + alpha,
        eta_max: base.eta_max + alpha,
        closed: true,
        auto_reversible: false,
    })
}

/// Family with members `(h(t^k))^{1/k}` and `eta` rescaled by `1/k`.
pub fn dilation_family(base: &StoppingFamily, k: u32) -> Result<StoppingFamily> {
    if !base.closed {
        return Err(Error::NotClosed(base.family_id()));
    }
    if k == 0 {
        return Err(Error::param("k", 0.0, "must be a positive integer"));
    }
    if k == 1 {
        return Ok(base.clone());
    }
    let kf = k as f64;
    Ok(StoppingFamily {
        kind: Kind::Dilation {
            base: Box::new(base.clone()),
            k,
        },
        eta0: base.eta0 / kf,
        eta_max: base.eta_max / kf,
        closed: true,
        auto_reversible: false,
    })
}

fn sup_gap<F: Fn(f64) -> f64, G: Fn(f64) -> f64>(f: F, g: G) -> f64 {
    (0..PRECONDITION_GRID)
        .map(|i| {
            let t = i as f64 / (PRECONDITION_GRID - 1) as f64;
            (f(t) - g(t)).abs()
        })
        .fold(0.0, f64::max)
}

/// `sup_t |h_{N*}(h̄_N(t)) - t|` on a uniform grid.
pub fn reversibility_gap(n: &Pgf, n_star: &Pgf) -> f64 {
    let conj = n.conjugate();
    sup_gap(|t| n_star.eval_unchecked(conj.eval_unchecked(t)), |t| t)
}

/// The extreme reversal partner `N*` with `h_{N*} = h̄_N^{-1}`, when the catalog has one.
pub fn reversal_partner(pgf: &Pgf) -> Option<Pgf> {
    let params = pgf.params();
    match pgf.family() {
        PgfFamily::Identity | PgfFamily::Geometric | PgfFamily::Ex63 => Some(pgf.clone()),
        PgfFamily::ZtPoisson => Pgf::logarithmic(-(-params[0]).exp_m1()).ok(),
        PgfFamily::Logarithmic => Pgf::zt_poisson(-(-params[0]).ln_1p()).ok(),
        PgfFamily::PotentialConjugate => {
            let m = (1.0 / params[0]).round();
            if (params[0] * m - 1.0).abs() < 1e-12 {
                Pgf::deterministic(m as u32).ok()
            } else {
                None
            }
        }
        PgfFamily::Deterministic => Pgf::potential_conjugate(1.0 / params[0]).ok(),
        PgfFamily::Ex65 => Pgf::ex64(params[0], params[1], params[2]).ok(),
        PgfFamily::Ex64 if params[1].fract() == 0.0 => Pgf::ex65(params[0], params[1] as u32, params[2]).ok(),
        PgfFamily::Composite if pgf.declared_auto_reversible() => Some(pgf.clone()),
        _ => None,
    }
}

/// The auto-reversible pair `(h_N ∘ h_{N*}, h_{N*} ∘ h_N)` of a reversible pair.
pub fn auto_reversible_from_pair(n: &Pgf, n_star: &Pgf) -> Result<(Pgf, Pgf)> {
    let gap = reversibility_gap(n, n_star);
    if gap > PRECONDITION_TOL {
        return Err(Error::Precondition(format!(
            "pair is not extreme reversible: sup gap {gap:e}"
        )));
    }
    Ok((
        n.compose(n_star).mark_auto_reversible(),
        n_star.compose(n).mark_auto_reversible(),
    ))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn grid_gap(a: &Pgf, b: &Pgf) -> f64 {
        sup_gap(|t| a.eval_unchecked(t), |t| b.eval_unchecked(t))
    }

    #[test]
    fn geometric_family_flags() {
        let f = make_family(FamilyId::ZtGeometric).unwrap();
        assert_eq!(f.eta0(), 0.0);
        assert!(f.is_closed());
        assert!(f.is_auto_reversible());
        assert!(f.contains_identity());
        assert_eq!(f.member(0.0).unwrap(), Pgf::identity());
        let m = f.member(std::f64::consts::LN_2).unwrap();
        assert!((m.params()[0] - 0.5).abs() < 1e-15);
    }

    #[test]
    fn ex63_zero_alpha_is_geometric() {
        let f = make_family(FamilyId::Ex63 { alpha: 0.0 }).unwrap();
        let g = make_family(FamilyId::ZtGeometric).unwrap();
        for eta in [0.3, 1.0, 2.5] {
            assert!(grid_gap(&f.member(eta).unwrap(), &g.member(eta).unwrap()) < 1e-14);
        }
        let small = make_family(FamilyId::Ex63 { alpha: 1e-7 }).unwrap();
        assert!(grid_gap(&small.member(1.0).unwrap(), &g.member(1.0).unwrap()) < 1e-6);
    }

    #[test]
    fn standalone_families_not_closed() {
        for id in [FamilyId::ZtPoisson, FamilyId::Logarithmic, FamilyId::ZtBinomial { n: 3 }, FamilyId::Etnb { r: 0.5 }] {
            assert!(!make_family(id).unwrap().is_closed());
        }
    }

    #[test]
    fn members_have_requested_eta() {
        let ids = [
            FamilyId::ZtGeometric,
            FamilyId::ZtPoisson,
            FamilyId::Logarithmic,
            FamilyId::PotentialConjugate,
            FamilyId::ZtBinomial { n: 4 },
            FamilyId::Etnb { r: 2.0 },
            FamilyId::Etnb { r: -0.5 },
            FamilyId::Etnb { r: 0.0 },
            FamilyId::Ex63 { alpha: 0.7 },
            FamilyId::Ex64 { alpha: 0.7, beta: 2.0 },
            FamilyId::Ex65 { alpha: 0.7, n: 2 },
            FamilyId::Ex66 { alpha: 0.5 },
        ];
        for id in ids {
            let f = make_family(id).unwrap();
            for eta in [0.1, 0.6, 0.9, 1.5, 2.5] {
                if eta < f.eta0() || eta > f.eta_domain().1 {
                    assert!(f.member(eta).is_err());
                    continue;
                }
                let m = f.member(eta).unwrap();
                let p1 = m.pmf(1).unwrap();
                assert!((eta + p1.ln()).abs() < 1e-9, "{id:?} eta={eta} got {}", -p1.ln());
            }
        }
    }

    #[test]
    fn ex66_member_pmf1() {
        let f = make_family(FamilyId::Ex66 { alpha: 0.5 }).unwrap();
        let m = f.member(4f64.ln()).unwrap();
        assert!((m.pmf(1).unwrap() - 0.25).abs() < 1e-12);
    }

    #[test]
    fn below_eta0_rejected() {
        let f = make_family(FamilyId::Ex64 { alpha: 1.0, beta: 2.0 }).unwrap();
        assert!(matches!(f.member(0.5), Err(Error::Domain { .. })));
        assert!(f.member(1.0 - 1e-13).is_ok());
    }

    #[test]
    fn partners() {
        let zp = Pgf::zt_poisson(std::f64::consts::LN_2).unwrap();
        let lg = reversal_partner(&zp).unwrap();
        assert_eq!(lg.family(), PgfFamily::Logarithmic);
        assert!((lg.params()[0] - 0.5).abs() < 1e-15);
        let det = reversal_partner(&Pgf::potential_conjugate(0.5).unwrap()).unwrap();
        assert_eq!(det, Pgf::deterministic(2).unwrap());
        let g = Pgf::geometric(0.3).unwrap();
        assert_eq!(reversal_partner(&g).unwrap(), g);
        assert!(reversal_partner(&Pgf::potential_conjugate(0.3).unwrap()).is_none());
        for n in [&zp, &Pgf::ex65(0.8, 3, 1.3).unwrap(), &Pgf::potential_conjugate(0.25).unwrap()] {
            let partner = reversal_partner(n).unwrap();
            assert!(reversibility_gap(n, &partner) < 1e-10, "{n:?}");
        }
    }

    #[test]
    fn sandwich_reproduces_ex63() {
        let alpha = 0.9;
        let geo = make_family(FamilyId::ZtGeometric).unwrap();
        let inner = Pgf::zt_poisson(alpha).unwrap();
        let outer = Pgf::logarithmic(-(-alpha).exp_m1()).unwrap();
        let s = sandwich_family(&geo, &inner, &outer, alpha).unwrap();
        let ex = make_family(FamilyId::Ex63 { alpha }).unwrap();
        assert_eq!(s.eta0(), alpha);
        for eta in [alpha, 1.2, 2.0, 4.0] {
            assert!(grid_gap(&s.member(eta).unwrap(), &ex.member(eta).unwrap()) < 1e-10);
        }
    }

    #[test]
    fn sandwich_rejects_bad_pair() {
        let geo = make_family(FamilyId::ZtGeometric).unwrap();
        let inner = Pgf::zt_poisson(1.0).unwrap();
        let outer = Pgf::logarithmic(0.3).unwrap();
        assert!(matches!(sandwich_family(&geo, &inner, &outer, 1.0), Err(Error::Precondition(_))));
        let zp = make_family(FamilyId::ZtPoisson).unwrap();
        assert!(matches!(sandwich_family(&zp, &inner, &outer, 1.0), Err(Error::NotClosed(_))));
    }

    #[test]
    fn dilation_support_and_eta() {
        let geo = make_family(FamilyId::ZtGeometric).unwrap();
        assert_eq!(dilation_family(&geo, 1).unwrap(), geo);
        let d = dilation_family(&geo, 2).unwrap();
        let m = d.member(1.0).unwrap();
        assert!((m.eta() - 1.0).abs() < 1e-12);
        let s = m.pmf_series(8);
        assert_eq!(s[2], 0.0);
        assert!(s[3] > 0.0);
        let pc = dilation_family(&make_family(FamilyId::PotentialConjugate).unwrap(), 2).unwrap();
        assert_eq!(pc.member(0.4).unwrap().eval(1.0).unwrap(), 1.0);
    }

    #[test]
    fn auto_reversible_pairs() {
        let m = 3;
        let pc = Pgf::potential_conjugate(1.0 / m as f64).unwrap();
        let det = Pgf::deterministic(m).unwrap();
        let (h1, h2) = auto_reversible_from_pair(&pc, &det).unwrap();
        for i in 0..=20 {
            let t = i as f64 / 20.0;
            let e1 = 1.0 - (1.0 - t.powi(3)).powf(1.0 / 3.0);
            let e2 = (1.0 - (1.0 - t).powf(1.0 / 3.0)).powi(3);
            assert!((h1.eval(t).unwrap() - e1).abs() < 1e-14);
            assert!((h2.eval(t).unwrap() - e2).abs() < 1e-14);
        }
        assert!(h1.declared_auto_reversible() && h2.declared_auto_reversible());
        assert!(reversibility_gap(&h1, &h1) < 1e-10);
        assert!(h1.compose(&h1).declared_auto_reversible());
    }

    #[test]
    fn poisson_logarithmic_pair() {
        let a = 1.1;
        let zp = Pgf::zt_poisson(a).unwrap();
        let lg = Pgf::logarithmic(-(-a).exp_m1()).unwrap();
        let (h1, h2) = auto_reversible_from_pair(&zp, &lg).unwrap();
        assert!(grid_gap(&h1, &Pgf::geometric((-a).exp()).unwrap()) < 1e-13);
        for i in 0..=20 {
            let t = i as f64 / 20.0;
            let e2 = 1.0 - (1.0 + a.exp() - (a * t).exp()).ln() / a;
            assert!((h2.eval(t).unwrap() - e2).abs() < 1e-13);
        }
        let h3 = h2.compose(&h2);
        assert!(h3.declared_auto_reversible());
        assert!(reversibility_gap(&h3, &h3) < 1e-10);
    }

    #[test]
    fn unequal_pair_rejected() {
        let r = auto_reversible_from_pair(&Pgf::zt_poisson(1.0).unwrap(), &Pgf::logarithmic(0.2).unwrap());
        assert!(matches!(r, Err(Error::Precondition(_))));
    }
}
