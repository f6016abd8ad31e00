//! Acceptance run: one PASS/FAIL line per criterion, nonzero exit on any failure.

use std::time::Instant;

use stopped_extremes::catalog::{make_family, FamilyId};
use stopped_extremes::cli::{self, RunConfig};
use stopped_extremes::dist::ContinuousModel;
use stopped_extremes::inference::{self, FitOptions};
use stopped_extremes::pgf::Pgf;
use stopped_extremes::simulation;
use stopped_extremes::suites::{self, Suite, SuiteConfig, SuiteItem};
use stopped_extremes::transforms::{self, Flavor, TransformedModel, TwoParamForm};

const CRITERION_TOL: f64 = 0.01;
const CLOSED_FORM_REGRESSION_TOL: f64 = 1e-9;
const KS_SEEDS: u64 = 100;
const KS_REQUIRED: usize = 98;
const MLE_SEEDS: u64 = 100;
const MLE_REQUIRED: usize = 95;
const MLE_M: usize = 20_000;
const P_BAND: f64 = 0.01;
const RATE_REL_BAND: f64 = 0.10;
const LRT_EXPECTED_P: f64 = 0.579;
const LRT_TOL: f64 = 0.001;

type Outcome = Result<String, String>;

fn unexpected(items: &[SuiteItem]) -> Vec<String> {
    items
        .iter()
        .filter(|i| !i.confirmed())
        .map(|i| format!("{} {:?} sup={:e}", i.report.check_id, i.report.operands, i.report.sup_discrepancy))
        .collect()
}

fn max_sup(items: &[SuiteItem], pred: impl Fn(&SuiteItem) -> bool) -> f64 {
    items.iter().filter(|i| pred(i)).map(|i| i.report.sup_discrepancy).fold(0.0, f64::max)
}

fn criterion_arithmetic() -> Outcome {
    let printed = [
        (1888.65, 1894.67),
        (1890.34, 1899.38),
        (1894.39, 1900.41),
        (1911.16, 1920.19),
        (1914.51, 1923.54),
    ];
    let mut worst = 0.0f64;
    for ((label, k, ll), (aic, bic)) in cli::REFERENCE_LOGLIKS.iter().zip(printed) {
        let (a, b) = inference::aic_bic(*ll, *k, 150);
        let d = (a - aic).abs().max((b - bic).abs());
        if d > CRITERION_TOL {
            return Err(format!("{label}: AIC {a} BIC {b} vs printed {aic} {bic}"));
        }
        worst = worst.max(d);
    }
    Ok(format!("10 values, max deviation {worst:.4}"))
}

fn criterion_identities() -> Outcome {
    let items = suites::run_suite(Suite::Identities, &SuiteConfig::default()).map_err(|e| e.to_string())?;
    let bad = unexpected(&items);
    if !bad.is_empty() {
        return Err(bad.join("; "));
    }
    if items.iter().any(|i| i.report.grid.unit_points().len() < 1001) {
        return Err("grid smaller than 1001 points".into());
    }
    let closed = max_sup(&items, |i| i.report.tolerance <= suites::CLOSED_FORM_TOL);
    let numeric = max_sup(&items, |i| i.report.tolerance > suites::CLOSED_FORM_TOL);
    Ok(format!("{} checks; sup closed-form {closed:.2e}, numeric {numeric:.2e}", items.len()))
}

fn criterion_closure() -> Outcome {
    let items = suites::run_suite(Suite::Closure, &SuiteConfig::default()).map_err(|e| e.to_string())?;
    let bad = unexpected(&items);
    if !bad.is_empty() {
        return Err(bad.join("; "));
    }
    let composition = max_sup(&items, |i| i.expect_pass && i.report.check_id.contains("composition"));
    let spread = max_sup(&items, |i| i.expect_pass && i.report.check_id == "closure_necessary");
    let poisson = items
        .iter()
        .filter(|i| i.report.check_id == "closure_necessary" && i.report.operands.iter().any(|o| o.contains("zt_poisson")))
        .map(|i| i.report.sup_discrepancy)
        .fold(f64::NAN, f64::max);
    if !(poisson > 0.1) {
        return Err(format!("zt_poisson ratio spread {poisson}"));
    }
    Ok(format!(
        "{} checks; closed composition sup {composition:.2e}, ratio spread {spread:.2e}; zt_poisson spread {poisson:.3}",
        items.len()
    ))
}

fn criterion_reversibility() -> Outcome {
    let config = SuiteConfig::default();
    let mut items = suites::run_suite(Suite::Reversibility, &config).map_err(|e| e.to_string())?;
    items.extend(suites::run_suite(Suite::AutoReversibility, &config).map_err(|e| e.to_string())?);
    let bad = unexpected(&items);
    if !bad.is_empty() {
        return Err(bad.join("; "));
    }
    let pairs = max_sup(&items, |i| i.expect_pass && i.suite == Suite::Reversibility);
    let auto = max_sup(&items, |i| i.expect_pass && i.suite == Suite::AutoReversibility);
    let poisson = items
        .iter()
        .filter(|i| i.suite == Suite::AutoReversibility && !i.expect_pass)
        .map(|i| i.report.sup_discrepancy)
        .fold(f64::INFINITY, f64::min);
    if pairs >= 1e-9 || auto >= 1e-10 || !(poisson > 1e-3) {
        return Err(format!("pairs {pairs:e}, auto {auto:e}, zt_poisson {poisson:e}"));
    }
    Ok(format!("pairs sup {pairs:.2e}, auto sup {auto:.2e}, zt_poisson auto gap {poisson:.3e}"))
}

fn sweep(model: &TransformedModel, formula: impl Fn(f64) -> f64) -> Result<f64, String> {
    let mut sup = 0.0f64;
    for i in 0..=200 {
        let f = i as f64 / 200.0;
        let got = model.cdf(f).map_err(|e| format!("{model}: {e}"))?;
        let d = (got - formula(f)).abs();
        if !(d <= sup) {
            sup = if d.is_nan() { f64::INFINITY } else { d };
        }
    }
    Ok(sup)
}

fn criterion_closed_forms() -> Outcome {
    let unif = ContinuousModel::uniform(0.0, 1.0).unwrap();
    let mut sup = 0.0f64;
    let mut count = 0;
    let mut record = |name: &str, s: Result<f64, String>| -> Result<(), String> {
        let s = s?;
        count += 1;
        if s > CLOSED_FORM_REGRESSION_TOL {
            return Err(format!("{name}: sup {s:e}"));
        }
        sup = sup.max(s);
        Ok(())
    };
    let e = |x: f64| x.exp();

    // zero-truncated Poisson: four single maps and four two-pgf combinations
    for &a in &[0.5, 1.0, 2.0, 4.0] {
        let n = Pgf::zt_poisson(a).unwrap();
        record("max", sweep(&transforms::stopped_max(&n, &unif), |f| (e(a * f) - 1.0) / (e(a) - 1.0)))?;
        record("max-precursor", sweep(&transforms::max_precursor(&n, &unif), |f| (1.0 + (e(a) - 1.0) * f).ln() / a))?;
        record("min", sweep(&transforms::stopped_min(&n, &unif), |f| e(a) * (1.0 - e(-a * f)) / (e(a) - 1.0)))?;
        record(
            "min-precursor",
            sweep(&transforms::min_precursor(&n, &unif), |f| 1.0 - (1.0 + (e(a) - 1.0) * (1.0 - f)).ln() / a),
        )?;
        // logarithmic with p = 1 - e^{-a} swaps max with min-precursor and min with max-precursor
        let lg = Pgf::logarithmic(-(-a).exp_m1()).unwrap();
        record("lg max", sweep(&transforms::stopped_max(&lg, &unif), |f| 1.0 - (1.0 + (e(a) - 1.0) * (1.0 - f)).ln() / a))?;
        record("lg min", sweep(&transforms::stopped_min(&lg, &unif), |f| (1.0 + (e(a) - 1.0) * f).ln() / a))?;
    }
    for &(a1, a2) in &[(0.5, 2.0), (1.0, 1.0), (2.0, 0.7), (3.0, 1.5)] {
        let n1 = Pgf::zt_poisson(a1).unwrap();
        let n2 = Pgf::zt_poisson(a2).unwrap();
        let two = |form| transforms::two_param_combined(&n1, &n2, &unif, form);
        record(
            "max of max-precursor",
            sweep(&two(TwoParamForm::MaxOfMaxPrecursor), |f| {
                ((1.0 + (e(a1) - 1.0) * f).powf(a2 / a1) - 1.0) / (e(a2) - 1.0)
            }),
        )?;
        record(
            "max-precursor of max",
            sweep(&two(TwoParamForm::MaxPrecursorOfMax), |f| {
                (1.0 + (e(a2) - 1.0) * (e(a1 * f) - 1.0) / (e(a1) - 1.0)).ln() / a2
            }),
        )?;
        record(
            "min of min-precursor",
            sweep(&two(TwoParamForm::MinOfMinPrecursor), |f| {
                e(a2) / (e(a2) - 1.0) * (1.0 - (1.0 - (1.0 - e(-a1)) * f).powf(a2 / a1))
            }),
        )?;
        record(
            "min-precursor of min",
            sweep(&two(TwoParamForm::MinPrecursorOfMin), |f| {
                1.0 - ((e(a2) - 1.0) * (e(a1 * (1.0 - f)) - 1.0) / (e(a1) - 1.0) + 1.0).ln() / a2
            }),
        )?;
    }

    let etas = [-2.5, -0.8, -0.3, 0.4, 1.0, 3.0];
    let ext = |id: FamilyId, eta: f64, flavor: Flavor| {
        transforms::combined_extension(&make_family(id).unwrap(), eta, &unif, flavor).map_err(|e| e.to_string())
    };

    // potential conjugate: max and min forms
    for &eta in &etas {
        let w = e(-eta);
        record("potconj max", sweep(&ext(FamilyId::PotentialConjugate, eta, Flavor::Max)?, |f| 1.0 - (1.0 - f).powf(w)))?;
        record("potconj min", sweep(&ext(FamilyId::PotentialConjugate, eta, Flavor::Min)?, |f| f.powf(w)))?;
    }
    // auto-reversible families: one form for both flavors, the min flavor at -eta
    for &eta in &etas {
        let mo = |eta: f64| move |f: f64| f / ((1.0 - f) * e(eta) + f);
        record("geometric max", sweep(&ext(FamilyId::ZtGeometric, eta, Flavor::Max)?, mo(eta)))?;
        record("geometric min", sweep(&ext(FamilyId::ZtGeometric, eta, Flavor::Min)?, mo(-eta)))?;
    }
    for &a in &[0.25, 1.0, 2.0] {
        for &eta in &etas {
            let form = |eta: f64| {
                move |f: f64| {
                    (1.0 + (e(a * f) - 1.0) * (e(a) - 1.0) / ((e(eta) - 1.0) * (e(a) - e(a * f)) + e(a) - 1.0)).ln() / a
                }
            };
            record("ex63 max", sweep(&ext(FamilyId::Ex63 { alpha: a }, eta, Flavor::Max)?, form(eta)))?;
            record("ex63 min", sweep(&ext(FamilyId::Ex63 { alpha: a }, eta, Flavor::Min)?, form(-eta)))?;
        }
    }
    // ex64: distinct max and min forms
    for &(a, b) in &[(0.5, 1.0), (1.0, 2.0), (2.0, 3.5)] {
        for &eta in &etas {
            let c = 1.0 - e(-a / b);
            let max_form = |f: f64| {
                let w = (1.0 - f * c).powf(b);
                let inner = ((1.0 - e(a + eta)) * w + e(eta) - 1.0) / ((e(a) - e(a + eta)) * w + e(eta) - e(a));
                (1.0 - inner.powf(1.0 / b)) / c
            };
            let d = 1.0 - e(a / b);
            // the printed min form is indexed by -eta
            let min_form = |f: f64| {
                let eta = -eta;
                let w = (1.0 + f * (e(a / b) - 1.0)).powf(b);
                let inner = ((e(eta) - e(a)) * w + e(a) - e(a + eta)) / ((e(eta) - 1.0) * w - e(eta + a) + 1.0);
                (1.0 - inner.powf(1.0 / b)) / d
            };
            let id = FamilyId::Ex64 { alpha: a, beta: b };
            record("ex64 max", sweep(&ext(id, eta, Flavor::Max)?, max_form))?;
            record("ex64 min", sweep(&ext(id, eta, Flavor::Min)?, min_form))?;
        }
    }
    Ok(format!("{count} sweeps of 201 points, sup {sup:.2e}"))
}

fn criterion_ks() -> Outcome {
    let stopping = Pgf::logarithmic(0.95).unwrap();
    let base = ContinuousModel::exponential(0.01).unwrap();
    let model = transforms::stopped_max(&stopping, &base);
    let m = 20_000;
    let crit = simulation::ks_critical_1pct(m);
    let mut passes = 0;
    let mut worst = 0.0f64;
    for seed in 0..KS_SEEDS {
        let s = simulation::simulate_stopped(&stopping, &base, m, Flavor::Max, seed).map_err(|e| e.to_string())?;
        let d = simulation::ks_distance(&s.values, |y| model.cdf(y).unwrap());
        worst = worst.max(d);
        passes += (d < crit) as usize;
    }
    let line = format!("{passes}/{KS_SEEDS} below {crit:.5} (max distance {worst:.5})");
    if passes >= KS_REQUIRED {
        Ok(line)
    } else {
        Err(line)
    }
}

fn criterion_mle() -> Outcome {
    let (stopping, base) = cli::experiment_generator().map_err(|e| e.to_string())?;
    let spec = inference::preset("lg-exp").unwrap();
    let mut passes = 0;
    let mut ps = Vec::new();
    let mut rates = Vec::new();
    for seed in 0..MLE_SEEDS {
        let s = simulation::simulate_stopped(&stopping, &base, MLE_M, Flavor::Max, 10_000 + seed).map_err(|e| e.to_string())?;
        let opts = FitOptions {
            seed,
            stderr: false,
            ..Default::default()
        };
        let fit = inference::fit_mle(&spec, &s.values, None, &opts).map_err(|e| e.to_string())?;
        let p = fit.estimate("p").unwrap();
        let rate = fit.estimate("rate").unwrap();
        passes += ((p - 0.95).abs() <= P_BAND && (rate / 0.01 - 1.0).abs() <= RATE_REL_BAND) as usize;
        ps.push(p);
        rates.push(rate);
    }
    // replication spread, the calibration of the frozen bands
    let sd = |v: &[f64]| {
        let mean = v.iter().sum::<f64>() / v.len() as f64;
        (mean, (v.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (v.len() - 1) as f64).sqrt())
    };
    let (pm, psd) = sd(&ps);
    let (rm, rsd) = sd(&rates);
    let line = format!(
        "{passes}/{MLE_SEEDS} inside bands; replication p {pm:.4} sd {psd:.4} (band {:.1} sd), rate {rm:.5} sd {rsd:.2e} (band {:.1} sd)",
        P_BAND / psd,
        RATE_REL_BAND * 0.01 / rsd
    );
    if passes >= MLE_REQUIRED {
        Ok(line)
    } else {
        Err(line)
    }
}

fn criterion_stability() -> Outcome {
    let items = suites::run_suite(Suite::Stability, &SuiteConfig::default()).map_err(|e| e.to_string())?;
    let bad = unexpected(&items);
    if !bad.is_empty() {
        return Err(bad.join("; "));
    }
    let sup = max_sup(&items, |i| i.report.notes.is_empty());
    if sup >= 1e-9 {
        return Err(format!("sup {sup:e}"));
    }
    let contraction = items.iter().filter(|i| i.report.notes.contains("contraction regime")).count();
    if contraction == 0 {
        return Err("no contraction regime reported for ex63".into());
    }
    Ok(format!("{} checks, sup {sup:.2e}; contraction regime reported in {contraction}", items.len()))
}

fn criterion_lrt() -> Outcome {
    let lrt = inference::lrt_from_logliks(-942.326, -942.172, 1).map_err(|e| e.to_string())?;
    let line = format!("statistic {:.3}, p {:.4} (printed value {})", lrt.statistic, lrt.p_value, cli::REFERENCE_LRT_P);
    if (lrt.statistic - 0.308).abs() < 1e-9 && (lrt.p_value - LRT_EXPECTED_P).abs() <= LRT_TOL {
        Ok(line)
    } else {
        Err(line)
    }
}

fn criterion_determinism() -> Outcome {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let config = |out: &str| RunConfig::ReproduceExperiment {
        m: 150,
        seed: cli::DEFAULT_SEED,
        replications: 1,
        starts: 5,
        out: dir.path().join(out),
    };
    let a = cli::execute(&config("a")).map_err(|e| e.to_string())?;
    cli::execute(&config("b")).map_err(|e| e.to_string())?;
    let read = |p: std::path::PathBuf| std::fs::read(&p).map_err(|e| format!("{}: {e}", p.display()));
    if read(dir.path().join("a/table.txt"))? != read(dir.path().join("b/table.txt"))? {
        return Err("table.txt differs between runs".into());
    }
    let manifest_text = String::from_utf8(read(dir.path().join("a/manifest.json"))?).unwrap();
    let manifest: cli::Manifest = serde_json::from_str(&manifest_text).map_err(|e| e.to_string())?;
    if serde_json::to_string_pretty(&manifest).unwrap() + "\n" != manifest_text {
        return Err("manifest does not round-trip".into());
    }
    let mut replay = manifest.config.clone();
    if let RunConfig::ReproduceExperiment { out, .. } = &mut replay {
        *out = dir.path().join("c");
    }
    cli::execute(&replay).map_err(|e| e.to_string())?;
    let mut files = 0;
    for p in &a.outputs {
        let name = p.file_name().unwrap();
        if name == "manifest.json" {
            continue;
        }
        if read(p.clone())? != read(dir.path().join("c").join(name))? {
            return Err(format!("{} differs after replay", name.to_string_lossy()));
        }
        files += 1;
    }
    Ok(format!("table.txt identical across runs; manifest round-trips; {files} outputs identical on replay"))
}

fn main() {
    let criteria: [(&str, fn() -> Outcome); 10] = [
        ("criterion arithmetic", criterion_arithmetic),
        ("identity suite", criterion_identities),
        ("closure suite", criterion_closure),
        ("reversibility suite", criterion_reversibility),
        ("closed-form extension cdfs", criterion_closed_forms),
        ("simulation vs analytic cdf", criterion_ks),
        ("MLE consistency", criterion_mle),
        ("stability", criterion_stability),
        ("LRT machinery", criterion_lrt),
        ("determinism", criterion_determinism),
    ];
    let mut failed = 0;
    for (i, (name, run)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let outcome = run();
        let secs = start.elapsed().as_secs_f64();
        match outcome {
            Ok(detail) => println!("criterion {:>2} PASS {name}: {detail} [{secs:.1}s]", i + 1),
            Err(detail) => {
                failed += 1;
                println!("criterion {:>2} FAIL {name}: {detail} [{secs:.1}s]", i + 1);
            }
        }
    }
    println!("acceptance: {} passed, {failed} failed", criteria.len() - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
