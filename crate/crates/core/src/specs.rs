//! Textual descriptions of stopping models and base distributions.
//!
//! JSON is the canonical form. The inline grammar `family:key=val,key=val`
//! maps one-to-one onto it:
//!
//! ```text
//! logarithmic:p=0.95         {"family":"logarithmic","params":{"p":0.95}}
//! ex63:alpha=1,eta=2         {"family":"ex63","shape":{"alpha":1.0},"eta":2.0}
//! exponential:rate=0.01      {"dist":"exponential","rate":0.01}
//! ```

use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::catalog::{make_family, FamilyId, StoppingFamily};
use crate::dist::ContinuousModel;
use crate::error::{Error, Result};
use crate::pgf::Pgf;

/// A stopping model, either by native parameters or as a catalog member at `eta`.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct StoppingSpec {
    pub family: String,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub shape: BTreeMap<String, f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub eta: Option<f64>,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub params: BTreeMap<String, f64>,
    /// Operands of `composite` (outer, inner) and `dilated` (base).
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub components: Vec<StoppingSpec>,
}

/// Canonical family name for a user-facing alias.
pub fn canonical_family(name: &str) -> Option<&'static str> {
    let n = name.trim().to_ascii_lowercase().replace('-', "_");
    Some(match n.as_str() {
        "degenerate" | "identity" | "none" | "n_i" => "degenerate",
        "deterministic" => "deterministic",
        "zt_geometric" | "geometric" | "geo" => "zt_geometric",
        "zt_poisson" | "poisson" => "zt_poisson",
        "logarithmic" | "log" => "logarithmic",
        "potential_conjugate" | "potconj" | "sibuya" => "potential_conjugate",
        "zt_binomial" | "binomial" => "zt_binomial",
        "etnb" => "etnb",
        "ex63" => "ex63",
        "ex64" => "ex64",
        "ex65" => "ex65",
        "ex66" => "ex66",
        "dilated" => "dilated",
        "composite" => "composite",
        _ => return None,
    })
}

/// Native parameter names of a family, in constructor order.
pub fn native_param_names(family: &str) -> Result<&'static [&'static str]> {
    Ok(match canonical(family)? {
        "degenerate" | "composite" => &[],
        "deterministic" => &["m"],
        "zt_geometric" | "logarithmic" => &["p"],
        "zt_poisson" => &["alpha"],
        "potential_conjugate" => &["b"],
        "zt_binomial" => &["n", "p"],
        "etnb" => &["r", "p"],
        "ex63" => &["alpha", "eta"],
        "ex64" => &["alpha", "beta", "eta"],
        "ex65" => &["alpha", "n", "eta"],
        "ex66" => &["alpha", "p"],
        "dilated" => &["k"],
        _ => unreachable!(),
    })
}

/// Shape parameters that fix a catalog family before `eta` is chosen.
pub fn shape_param_names(family: &str) -> Result<&'static [&'static str]> {
    Ok(match canonical(family)? {
        "zt_binomial" => &["n"],
        "etnb" => &["r"],
        "ex63" | "ex66" => &["alpha"],
        "ex64" => &["alpha", "beta"],
        "ex65" => &["alpha", "n"],
        "deterministic" => &["m"],
        "dilated" => &["k"],
        _ => &[],
    })
}

fn canonical(name: &str) -> Result<&'static str> {
    canonical_family(name).ok_or_else(|| Error::Spec(format!("unknown stopping family '{name}'")))
}

fn positive_int(name: &str, v: f64) -> Result<u32> {
    if v.is_finite() && v >= 1.0 && v.fract() == 0.0 && v <= u32::MAX as f64 {
        Ok(v as u32)
    } else {
        Err(Error::param(name, v, "must be a positive integer"))
    }
}

fn lookup(values: &BTreeMap<String, f64>, family: &str, key: &str) -> Result<f64> {
    values
        .get(key)
        .copied()
        .ok_or_else(|| Error::Spec(format!("{family} needs parameter '{key}'")))
}

/// Builds a pgf from a family name and its full set of native parameters.
pub fn native_pgf(family: &str, values: &BTreeMap<String, f64>) -> Result<Pgf> {
    let fam = canonical(family)?;
    let names = native_param_names(fam)?;
    if let Some(extra) = values.keys().find(|k| !names.contains(&k.as_str())) {
        return Err(Error::Spec(format!(
            "{fam} has no parameter '{extra}' (expected {})",
            if names.is_empty() { "none".to_string() } else { names.join(", ") }
        )));
    }
    let g = |k: &str| lookup(values, fam, k);
    match fam {
        "degenerate" => Ok(Pgf::identity()),
        "deterministic" => Pgf::deterministic(positive_int("m", g("m")?)?),
        "zt_geometric" => Pgf::geometric(g("p")?),
        "zt_poisson" => Pgf::zt_poisson(g("alpha")?),
        "logarithmic" => Pgf::logarithmic(g("p")?),
        "potential_conjugate" => Pgf::potential_conjugate(g("b")?),
        "zt_binomial" => Pgf::zt_binomial(positive_int("n", g("n")?)?, g("p")?),
        "etnb" => Pgf::etnb(g("r")?, g("p")?),
        "ex63" => Pgf::ex63(g("alpha")?, g("eta")?),
        "ex64" => Pgf::ex64(g("alpha")?, g("beta")?, g("eta")?),
        "ex65" => Pgf::ex65(g("alpha")?, positive_int("n", g("n")?)?, g("eta")?),
        "ex66" => Pgf::ex66(g("alpha")?, g("p")?),
        _ => Err(Error::Spec(format!("{fam} needs components"))),
    }
}

/// The catalog entry named by a family and its shape parameters.
pub fn family_id(family: &str, shape: &BTreeMap<String, f64>) -> Result<FamilyId> {
    let fam = canonical(family)?;
    let allowed = shape_param_names(fam)?;
    if let Some(extra) = shape.keys().find(|k| !allowed.contains(&k.as_str())) {
        return Err(Error::Spec(format!("{fam} has no shape parameter '{extra}'")));
    }
    let g = |k: &str| lookup(shape, fam, k);
    Ok(match fam {
        "degenerate" => FamilyId::Degenerate,
        "zt_geometric" => FamilyId::ZtGeometric,
        "zt_poisson" => FamilyId::ZtPoisson,
        "logarithmic" => FamilyId::Logarithmic,
        "potential_conjugate" => FamilyId::PotentialConjugate,
        "zt_binomial" => FamilyId::ZtBinomial {
            n: positive_int("n", g("n")?)?,
        },
        "etnb" => FamilyId::Etnb { r: g("r")? },
        "ex63" => FamilyId::Ex63 { alpha: g("alpha")? },
        "ex64" => FamilyId::Ex64 {
            alpha: g("alpha")?,
            beta: g("beta")?,
        },
        "ex65" => FamilyId::Ex65 {
            alpha: g("alpha")?,
            n: positive_int("n", g("n")?)?,
        },
        "ex66" => FamilyId::Ex66 { alpha: g("alpha")? },
        other => return Err(Error::Spec(format!("{other} is not an eta-indexed catalog family"))),
    })
}

fn parse_pairs(body: &str, what: &str) -> Result<Vec<(String, f64)>> {
    let mut out = Vec::new();
    for part in body.split(',').map(str::trim).filter(|s| !s.is_empty()) {
        let (k, v) = part
            .split_once('=')
            .ok_or_else(|| Error::Spec(format!("expected key=value in {what}, got '{part}'")))?;
        let v: f64 = v
            .trim()
            .parse()
            .map_err(|_| Error::Spec(format!("'{}' is not a number in {what}", v.trim())))?;
        let k = k.trim().to_string();
        if out.iter().any(|(seen, _): &(String, f64)| *seen == k) {
            return Err(Error::Spec(format!("duplicate key '{k}' in {what}")));
        }
        out.push((k, v));
    }
    Ok(out)
}

fn split_inline(s: &str) -> (&str, &str) {
    match s.split_once(':') {
        Some((a, b)) => (a.trim(), b),
        None => (s.trim(), ""),
    }
}

impl StoppingSpec {
    /// A spec by native parameters.
    pub fn native(family: &str, params: &[(&str, f64)]) -> Self {
        StoppingSpec {
            family: family.to_string(),
            params: params.iter().map(|(k, v)| (k.to_string(), *v)).collect(),
            ..Default::default()
        }
    }

    /// A catalog member at `eta`.
    pub fn member(family: &str, shape: &[(&str, f64)], eta: f64) -> Self {
        StoppingSpec {
            family: family.to_string(),
            shape: shape.iter().map(|(k, v)| (k.to_string(), *v)).collect(),
            eta: Some(eta),
            ..Default::default()
        }
    }

    /// Parses the inline grammar. A key `eta` selects the catalog form, in
    /// which the remaining keys are shape parameters.
    pub fn parse_inline(s: &str) -> Result<Self> {
        let (fam, body) = split_inline(s);
        let family = canonical(fam)?.to_string();
        if family == "composite" || family == "dilated" {
            return Err(Error::Spec(format!("{family} stopping models need the JSON form")));
        }
        let pairs = parse_pairs(body, s)?;
        let mut spec = StoppingSpec {
            family,
            ..Default::default()
        };
        if let Some((_, eta)) = pairs.iter().find(|(k, _)| k == "eta") {
            spec.eta = Some(*eta);
            spec.shape = pairs.into_iter().filter(|(k, _)| k != "eta").collect();
        } else {
            spec.params = pairs.into_iter().collect();
        }
        Ok(spec)
    }

    /// Parses JSON, a path to a JSON file, or the inline grammar.
    pub fn parse(s: &str) -> Result<Self> {
        match load_json_arg(s)? {
            Some(text) => Ok(serde_json::from_str(&text)?),
            None => Self::parse_inline(s),
        }
    }

    /// Inline rendering; JSON-only forms fall back to JSON.
    pub fn to_inline(&self) -> String {
        if !self.components.is_empty() {
            return serde_json::to_string(self).unwrap_or_default();
        }
        let mut parts: Vec<String> = Vec::new();
        if let Some(eta) = self.eta {
            parts.extend(self.shape.iter().map(|(k, v)| format!("{k}={v}")));
            parts.push(format!("eta={eta}"));
        } else {
            parts.extend(self.params.iter().map(|(k, v)| format!("{k}={v}")));
        }
        if parts.is_empty() {
            self.family.clone()
        } else {
            format!("{}:{}", self.family, parts.join(","))
        }
    }

    /// The catalog family this spec indexes by `eta`.
    pub fn family(&self) -> Result<StoppingFamily> {
        make_family(family_id(&self.family, &self.shape)?)
    }

    pub fn to_pgf(&self) -> Result<Pgf> {
        let fam = canonical(&self.family)?;
        match fam {
            "composite" => {
                if self.components.len() != 2 {
                    return Err(Error::Spec("composite needs [outer, inner] components".into()));
                }
                let outer = self.components[0].to_pgf()?;
                let inner = self.components[1].to_pgf()?;
                Ok(Pgf::composite(&outer, &inner))
            }
            "dilated" => {
                if self.components.len() != 1 {
                    return Err(Error::Spec("dilated needs one base component".into()));
                }
                let k = positive_int("k", lookup(&self.params, fam, "k")?)?;
                Pgf::dilated(&self.components[0].to_pgf()?, k)
            }
            _ => match self.eta {
                Some(eta) => {
                    if !self.params.is_empty() {
                        return Err(Error::Spec("give either eta or native params, not both".into()));
                    }
                    self.family()?.member(eta)
                }
                None => {
                    let mut all = self.shape.clone();
                    for (k, v) in &self.params {
                        all.insert(k.clone(), *v);
                    }
                    native_pgf(fam, &all)
                }
            },
        }
    }

    /// Native-parameter description of a pgf; inverse of [`StoppingSpec::to_pgf`].
    pub fn from_pgf(pgf: &Pgf) -> Self {
        let params = pgf
            .param_names()
            .iter()
            .zip(pgf.params())
            .map(|(k, v)| (k.to_string(), v))
            .collect();
        StoppingSpec {
            family: pgf.family().name().to_string(),
            params,
            components: pgf.components().into_iter().map(Self::from_pgf).collect(),
            ..Default::default()
        }
    }
}

/// Base distribution from JSON, a JSON file, or `dist:key=val,...`.
pub fn parse_base(s: &str) -> Result<ContinuousModel> {
    if let Some(text) = load_json_arg(s)? {
        let m: ContinuousModel = serde_json::from_str(&text)?;
        return m.validated();
    }
    let (dist, body) = split_inline(s);
    let pairs = parse_pairs(body, s)?;
    let template = base_template(dist)?;
    let names = template.param_names();
    let mut values = vec![f64::NAN; names.len()];
    for (k, v) in pairs {
        let key = base_alias(template.dist_id(), &k);
        let i = names
            .iter()
            .position(|n| *n == key)
            .ok_or_else(|| Error::Spec(format!("{} has no parameter '{k}'", template.dist_id())))?;
        values[i] = v;
    }
    if let Some(i) = values.iter().position(|v| v.is_nan()) {
        return Err(Error::Spec(format!("{} needs parameter '{}'", template.dist_id(), names[i])));
    }
    template.with_params(&values)
}

/// A distribution of the named type with placeholder parameters.
pub fn base_template(dist: &str) -> Result<ContinuousModel> {
    let d = dist.trim().to_ascii_lowercase();
    Ok(match d.as_str() {
        "exponential" | "exp" => ContinuousModel::Exponential { rate: 1.0 },
        "lognormal" | "lgnor" => ContinuousModel::Lognormal { mu: 0.0, sigma: 1.0 },
        "gumbel" => ContinuousModel::Gumbel {
            location: 0.0,
            scale: 1.0,
        },
        "logistic" => ContinuousModel::Logistic {
            location: 0.0,
            scale: 1.0,
        },
        "uniform" => ContinuousModel::Uniform { lower: 0.0, upper: 1.0 },
        "gev" => ContinuousModel::Gev {
            location: 0.0,
            scale: 1.0,
            shape: 0.1,
        },
        _ => return Err(Error::Spec(format!("unknown base distribution '{dist}'"))),
    })
}

fn base_alias<'a>(dist: &str, key: &'a str) -> &'a str {
    match (dist, key) {
        ("exponential", "lambda") => "rate",
        ("gev", "eta") | (_, "loc") => "location",
        ("gev", "theta") => "scale",
        ("gev", "kappa") => "shape",
        ("gumbel" | "logistic", "mu") => "location",
        ("gumbel" | "logistic", "beta" | "s") => "scale",
        ("uniform", "a") => "lower",
        ("uniform", "b") => "upper",
        _ => key,
    }
}

/// JSON text behind an argument, if the argument is JSON or names a `.json` file.
pub(crate) fn load_json_arg(s: &str) -> Result<Option<String>> {
    let t = s.trim();
    if t.starts_with('{') {
        return Ok(Some(t.to_string()));
    }
    if t.ends_with(".json") {
        let path = Path::new(t);
        return std::fs::read_to_string(path)
            .map(Some)
            .map_err(|e| Error::Io(format!("{}: {e}", path.display())));
    }
    Ok(None)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn inline_native_and_member_forms() {
        let s = StoppingSpec::parse_inline("logarithmic:p=0.95").unwrap();
        assert_eq!(s.params["p"], 0.95);
        assert_eq!(s.to_pgf().unwrap(), Pgf::logarithmic(0.95).unwrap());

        let m = StoppingSpec::parse_inline("ex63:alpha=1,eta=2").unwrap();
        assert_eq!(m.eta, Some(2.0));
        assert_eq!(m.shape["alpha"], 1.0);
        let direct = Pgf::ex63(1.0, 2.0).unwrap();
        assert!((m.to_pgf().unwrap().eval(0.3).unwrap() - direct.eval(0.3).unwrap()).abs() < 1e-14);
        assert_eq!(StoppingSpec::parse_inline("geometric:eta=0.5").unwrap().family, "zt_geometric");
    }

    #[test]
    fn inline_mirrors_json() {
        for text in ["logarithmic:p=0.95", "ex65:alpha=1,n=2,eta=1.5", "degenerate"] {
            let spec = StoppingSpec::parse_inline(text).unwrap();
            let json = serde_json::to_string(&spec).unwrap();
            assert_eq!(StoppingSpec::parse(&json).unwrap(), spec);
            assert_eq!(StoppingSpec::parse_inline(&spec.to_inline()).unwrap(), spec);
        }
    }

    #[test]
    fn bad_specs_are_rejected() {
        assert!(matches!(StoppingSpec::parse_inline("nosuch:p=1"), Err(Error::Spec(_))));
        assert!(matches!(StoppingSpec::parse_inline("logarithmic:q=0.5").unwrap().to_pgf(), Err(Error::Spec(_))));
        assert!(matches!(StoppingSpec::parse_inline("logarithmic:p=x"), Err(Error::Spec(_))));
        assert!(StoppingSpec::parse_inline("logarithmic:p=1.5").unwrap().to_pgf().is_err());
        assert!(parse_base("exponential:rate=-1").is_err());
        assert!(parse_base("exponential").is_err());
    }

    #[test]
    fn pgf_round_trip_through_spec() {
        let inner = Pgf::zt_poisson(1.0).unwrap();
        let outer = Pgf::logarithmic(0.4).unwrap();
        let pgfs = [
            Pgf::identity(),
            Pgf::zt_binomial(2, 0.3).unwrap(),
            Pgf::etnb(-0.2, 0.7).unwrap(),
            Pgf::ex64(1.0, 2.0, 1.5).unwrap(),
            Pgf::composite(&outer, &inner),
            Pgf::dilated(&Pgf::geometric(0.4).unwrap(), 3).unwrap(),
        ];
        for p in pgfs {
            let spec = StoppingSpec::from_pgf(&p);
            let json = serde_json::to_string(&spec).unwrap();
            let back = StoppingSpec::parse(&json).unwrap().to_pgf().unwrap();
            for t in [0.1, 0.5, 0.9] {
                assert_eq!(back.eval(t).unwrap(), p.eval(t).unwrap());
            }
        }
    }

    #[test]
    fn base_aliases() {
        assert_eq!(parse_base("exponential:lambda=0.01").unwrap(), ContinuousModel::exponential(0.01).unwrap());
        assert_eq!(
            parse_base("gev:eta=1,theta=2,kappa=0.1").unwrap(),
            ContinuousModel::gev(1.0, 2.0, 0.1).unwrap()
        );
        let json = r#"{"dist":"lognormal","mu":1.0,"sigma":0.5}"#;
        assert_eq!(parse_base(json).unwrap(), ContinuousModel::lognormal(1.0, 0.5).unwrap());
    }
}
