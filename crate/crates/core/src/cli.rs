//! The `stopx` command line: reproducible batch runs over the library.
//!
//! Every run resolves its arguments into a [`RunConfig`] and writes it to
//! `manifest.json` in the output directory; `stopx replay` reruns a manifest.
//! Exit codes: 0 success, 1 failed check, 2 invalid configuration, 3 I/O.

use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};
use serde_json::json;

use crate::dist::ContinuousModel;
use crate::error::{Error, Result};
use crate::inference::{self, Comparison, FitOptions, FitResult, ModelSpec};
use crate::simulation::{self, StoppedSample};
use crate::specs::{self, StoppingSpec};
use crate::suites::{self, Suite, SuiteConfig, SuiteItem};
use crate::transforms::Flavor;

/// Seed used when neither `--seed` nor `STOPX_SEED` is given.
pub const DEFAULT_SEED: u64 = 150;

pub const EXIT_OK: i32 = 0;
pub const EXIT_CHECK_FAILED: i32 = 1;
pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_IO: i32 = 3;

#[derive(Debug, Parser)]
#[command(name = "stopx", version, about = "Randomly stopped extremes: simulate, fit, compare and check")]
pub struct Cli {
    /// Seed for commands that draw random numbers.
    #[arg(long, env = "STOPX_SEED", global = true, default_value_t = DEFAULT_SEED)]
    pub seed: u64,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ModeArg {
    Max,
    Min,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Draw stopped extremes and write them as CSV with a JSON sidecar.
    Simulate {
        /// Stopping model, e.g. `logarithmic:p=0.95` or JSON.
        #[arg(long)]
        stopping: String,
        /// Base distribution, e.g. `exponential:lambda=0.01` or JSON.
        #[arg(long)]
        base: String,
        /// Number of stopped extremes.
        #[arg(long)]
        m: usize,
        #[arg(long, value_enum, default_value_t = ModeArg::Max)]
        mode: ModeArg,
        /// Also write the stopping counts.
        #[arg(long)]
        counts: bool,
        #[arg(long, default_value = "stopx-out")]
        out: PathBuf,
    },
    /// Fit models by maximum likelihood.
    Fit {
        /// Preset (lg-exp, etnb-exp, tb2-exp, pc-lgnor, gev, exp), JSON, or stopping/base[/transform].
        #[arg(long = "model", required = true)]
        models: Vec<String>,
        /// One observation per line, or CSV with a `y` column.
        #[arg(long)]
        data: PathBuf,
        #[arg(long, default_value_t = 5)]
        starts: usize,
        #[arg(long, default_value = "stopx-out")]
        out: PathBuf,
    },
    /// Fit models and rank them by AIC.
    Compare {
        /// Models to compare; defaults to the five experiment models.
        #[arg(long = "model")]
        models: Vec<String>,
        #[arg(long)]
        data: PathBuf,
        #[arg(long, default_value_t = 5)]
        starts: usize,
        #[arg(long, default_value = "stopx-out")]
        out: PathBuf,
    },
    /// Run property checks over the catalog.
    Check {
        /// identities, reversibility, auto, closure, stability, order or all.
        #[arg(long, default_value = "all")]
        suite: Vec<String>,
        /// Restrict to one stopping family, e.g. `zt_poisson` or `ex63:alpha=1`.
        #[arg(long)]
        family: Option<String>,
        /// Override every check tolerance.
        #[arg(long)]
        tolerance: Option<f64>,
        /// Points per grid.
        #[arg(long)]
        grid: Option<usize>,
        #[arg(long, default_value = "stopx-out")]
        out: PathBuf,
    },
    /// Simulate the annual-maximum experiment, fit the five models and test Lg against ETNB.
    ReproduceExperiment {
        #[arg(long, default_value_t = 150)]
        m: usize,
        /// With more than one, also summarize model ranks over seeds `seed, seed+1, ...`.
        #[arg(long, default_value_t = 1)]
        replications: usize,
        #[arg(long, default_value_t = 5)]
        starts: usize,
        #[arg(long, default_value = "stopx-out")]
        out: PathBuf,
    },
    /// Rerun the configuration recorded in a manifest.
    Replay {
        manifest: PathBuf,
        /// Write to this directory instead of the recorded one.
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

/// A fully resolved run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "command", rename_all = "kebab-case")]
pub enum RunConfig {
    Simulate {
        stopping: StoppingSpec,
        base: ContinuousModel,
        m: usize,
        mode: Flavor,
        seed: u64,
        counts: bool,
        out: PathBuf,
    },
    Fit {
        models: Vec<ModelSpec>,
        data: PathBuf,
        seed: u64,
        starts: usize,
        out: PathBuf,
    },
    Compare {
        models: Vec<ModelSpec>,
        data: PathBuf,
        seed: u64,
        starts: usize,
        out: PathBuf,
    },
    Check {
        suites: Vec<Suite>,
        config: SuiteConfig,
        out: PathBuf,
    },
    ReproduceExperiment {
        m: usize,
        seed: u64,
        replications: usize,
        starts: usize,
        out: PathBuf,
    },
}

impl RunConfig {
    pub fn out(&self) -> &Path {
        match self {
            RunConfig::Simulate { out, .. }
            | RunConfig::Fit { out, .. }
            | RunConfig::Compare { out, .. }
            | RunConfig::Check { out, .. }
            | RunConfig::ReproduceExperiment { out, .. } => out,
        }
    }

    fn set_out(&mut self, dir: PathBuf) {
        match self {
            RunConfig::Simulate { out, .. }
            | RunConfig::Fit { out, .. }
            | RunConfig::Compare { out, .. }
            | RunConfig::Check { out, .. }
            | RunConfig::ReproduceExperiment { out, .. } => *out = dir,
        }
    }
}

/// Self-description written next to every run's outputs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub tool: String,
    pub version: String,
    pub config: RunConfig,
    pub outputs: Vec<String>,
    #[serde(default)]
    pub results: serde_json::Value,
}

/// What a run produced.
#[derive(Debug, Clone, PartialEq)]
pub struct Outcome {
    pub exit_code: i32,
    pub message: String,
    pub outputs: Vec<PathBuf>,
}

/// Exit code for an error.
pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::Io(_) => EXIT_IO,
        _ => EXIT_CONFIG,
    }
}

fn model_list(models: &[String], default: bool) -> Result<Vec<ModelSpec>> {
    if models.is_empty() && default {
        return Ok(inference::experiment_specs());
    }
    models.iter().map(|m| ModelSpec::parse(m)).collect()
}

/// Resolves parsed arguments. `Replay` reads its manifest here.
pub fn resolve(cli: Cli) -> Result<RunConfig> {
    let seed = cli.seed;
    Ok(match cli.command {
        Command::Simulate {
            stopping,
            base,
            m,
            mode,
            counts,
            out,
        } => {
            if m == 0 {
                return Err(Error::Spec("--m must be at least 1".into()));
            }
            let stopping = StoppingSpec::parse(&stopping)?;
            stopping.to_pgf()?;
            RunConfig::Simulate {
                stopping,
                base: specs::parse_base(&base)?,
                m,
                mode: match mode {
                    ModeArg::Max => Flavor::Max,
                    ModeArg::Min => Flavor::Min,
                },
                seed,
                counts,
                out,
            }
        }
        Command::Fit {
            models,
            data,
            starts,
            out,
        } => RunConfig::Fit {
            models: model_list(&models, false)?,
            data,
            seed,
            starts: check_starts(starts)?,
            out,
        },
        Command::Compare {
            models,
            data,
            starts,
            out,
        } => RunConfig::Compare {
            models: model_list(&models, true)?,
            data,
            seed,
            starts: check_starts(starts)?,
            out,
        },
        Command::Check {
            suite,
            family,
            tolerance,
            grid,
            out,
        } => {
            if let Some(t) = tolerance {
                if !(t.is_finite() && t > 0.0) {
                    return Err(Error::Spec(format!("--tolerance must be positive, got {t}")));
                }
            }
            if let Some(g) = grid {
                if g < 2 {
                    return Err(Error::Spec("--grid needs at least 2 points".into()));
                }
            }
            RunConfig::Check {
                suites: suite.iter().map(|s| Suite::parse(s)).collect::<Result<_>>()?,
                config: SuiteConfig {
                    family: family.as_deref().map(StoppingSpec::parse).transpose()?,
                    tolerance,
                    grid_points: grid,
                },
                out,
            }
        }
        Command::ReproduceExperiment {
            m,
            replications,
            starts,
            out,
        } => {
            if m == 0 || replications == 0 {
                return Err(Error::Spec("--m and --replications must be at least 1".into()));
            }
            RunConfig::ReproduceExperiment {
                m,
                seed,
                replications,
                starts: check_starts(starts)?,
                out,
            }
        }
        Command::Replay { manifest, out } => {
            let text = std::fs::read_to_string(&manifest)
                .map_err(|e| Error::Io(format!("{}: {e}", manifest.display())))?;
            let mut config = serde_json::from_str::<Manifest>(&text)?.config;
            if let Some(dir) = out {
                config.set_out(dir);
            }
            config
        }
    })
}

fn check_starts(starts: usize) -> Result<usize> {
    if starts == 0 {
        Err(Error::Spec("--starts must be at least 1".into()))
    } else {
        Ok(starts)
    }
}

fn io_err(path: &Path, e: impl std::fmt::Display) -> Error {
    Error::Io(format!("{}: {e}", path.display()))
}

fn write(path: &Path, text: &str) -> Result<()> {
    std::fs::write(path, text).map_err(|e| io_err(path, e))
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    write(path, &(serde_json::to_string_pretty(value)? + "\n"))
}

fn fit_options(seed: u64, starts: usize) -> FitOptions {
    FitOptions {
        seed,
        starts,
        ..Default::default()
    }
}

fn file_name(p: &Path) -> String {
    p.file_name().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default()
}

/// Executes a resolved run and writes its manifest.
pub fn execute(config: &RunConfig) -> Result<Outcome> {
    let out = config.out();
    std::fs::create_dir_all(out).map_err(|e| io_err(out, e))?;
    let (mut outcome, results) = match config {
        RunConfig::Simulate {
            stopping,
            base,
            m,
            mode,
            seed,
            counts,
            out,
        } => run_simulate(stopping, base, *m, *mode, *seed, *counts, out)?,
        RunConfig::Fit {
            models,
            data,
            seed,
            starts,
            out,
        } => run_fit(models, data, *seed, *starts, out)?,
        RunConfig::Compare {
            models,
            data,
            seed,
            starts,
            out,
        } => run_compare(models, data, *seed, *starts, out)?,
        RunConfig::Check { suites, config, out } => run_check(suites, config, out)?,
        RunConfig::ReproduceExperiment {
            m,
            seed,
            replications,
            starts,
            out,
        } => run_reproduce(*m, *seed, *replications, *starts, out)?,
    };
    let manifest_path = out.join("manifest.json");
    let manifest = Manifest {
        tool: "stopx".into(),
        version: env!("CARGO_PKG_VERSION").into(),
        config: config.clone(),
        outputs: outcome.outputs.iter().map(|p| file_name(p)).collect(),
        results,
    };
    write_json(&manifest_path, &manifest)?;
    outcome.outputs.push(manifest_path);
    Ok(outcome)
}

type RunResult = Result<(Outcome, serde_json::Value)>;

fn run_simulate(
    stopping: &StoppingSpec,
    base: &ContinuousModel,
    m: usize,
    mode: Flavor,
    seed: u64,
    counts: bool,
    out: &Path,
) -> RunResult {
    let pgf = stopping.to_pgf()?;
    let sample = simulation::simulate_stopped(&pgf, base, m, mode, seed)?;
    let csv = out.join("sample.csv");
    let side = out.join("sample.json");
    sample.write_csv(&csv, counts)?;
    sample.write_sidecar(&side, counts)?;
    let mean = sample.values.iter().sum::<f64>() / m as f64;
    Ok((
        Outcome {
            exit_code: EXIT_OK,
            message: format!("wrote {m} stopped {} to {}", mode_word(mode), csv.display()),
            outputs: vec![csv, side],
        },
        json!({ "m": m, "mean": mean }),
    ))
}

fn mode_word(mode: Flavor) -> &'static str {
    match mode {
        Flavor::Max => "maxima",
        Flavor::Min => "minima",
    }
}

fn support_message(e: Error, label: &str) -> Error {
    match e {
        Error::Support { index, value } => Error::Spec(format!(
            "{label}: data row {} (value {value}) lies outside the model support",
            index + 1
        )),
        other => other,
    }
}

fn wald(fit: &FitResult) -> serde_json::Value {
    let rows: Vec<serde_json::Value> = fit
        .estimates
        .iter()
        .map(|e| {
            let se = fit.stderr(&e.name);
            json!({
                "name": e.name,
                "value": e.value,
                "stderr": se,
                "lower95": se.map(|s| e.value - 1.959_963_984_540_054 * s),
                "upper95": se.map(|s| e.value + 1.959_963_984_540_054 * s),
            })
        })
        .collect();
    json!({ "model": fit.model_spec.label, "loglik": fit.loglik, "converged": fit.converged, "estimates": rows })
}

fn run_fit(models: &[ModelSpec], data: &Path, seed: u64, starts: usize, out: &Path) -> RunResult {
    let ys = simulation::read_values(data)?;
    let opts = fit_options(seed, starts);
    let mut fits = Vec::new();
    for spec in models {
        let fit = inference::fit_mle(spec, &ys, None, &opts).map_err(|e| support_message(e, &spec.label))?;
        fits.push(fit);
    }
    let table = Comparison {
        rows: fits
            .iter()
            .map(|f| inference::ComparisonRow {
                label: f.model_spec.label.clone(),
                rank: None,
                fit: Some(f.clone()),
                error: None,
            })
            .collect(),
    }
    .to_table();
    let fits_path = out.join("fits.json");
    let table_path = out.join("table.txt");
    write_json(&fits_path, &fits)?;
    write(&table_path, &table)?;
    let results: Vec<serde_json::Value> = fits.iter().map(wald).collect();
    Ok((
        Outcome {
            exit_code: EXIT_OK,
            message: table,
            outputs: vec![fits_path, table_path],
        },
        json!({ "fits": results }),
    ))
}

fn run_compare(models: &[ModelSpec], data: &Path, seed: u64, starts: usize, out: &Path) -> RunResult {
    let ys = simulation::read_values(data)?;
    let cmp = inference::compare_models(models, &ys, &fit_options(seed, starts));
    let table = cmp.to_table();
    let cmp_path = out.join("comparison.json");
    let table_path = out.join("table.txt");
    write_json(&cmp_path, &cmp)?;
    write(&table_path, &table)?;
    let ok = cmp.rows.iter().any(|r| r.fit.is_some());
    let ranking: Vec<&str> = cmp
        .rows
        .iter()
        .filter(|r| r.fit.is_some())
        .map(|r| r.label.as_str())
        .collect();
    Ok((
        Outcome {
            exit_code: if ok { EXIT_OK } else { EXIT_CONFIG },
            message: table,
            outputs: vec![cmp_path, table_path],
        },
        json!({ "ranking": ranking }),
    ))
}

fn summary_line(i: &SuiteItem) -> String {
    format!(
        "{:<10} {:<19} {:<30} {:<34} sup={:<12.3e} tol={:<8.1e} {}{}",
        if i.confirmed() { "confirmed" } else { "UNEXPECTED" },
        i.suite.name(),
        i.report.check_id,
        i.report.operands.join(" "),
        i.report.sup_discrepancy,
        i.report.tolerance,
        if i.report.passed { "pass" } else { "fail" },
        if i.report.notes.starts_with("contraction") {
            format!(" ({})", i.report.notes)
        } else {
            String::new()
        }
    )
}

fn run_check(suite_list: &[Suite], config: &SuiteConfig, out: &Path) -> RunResult {
    let mut items = Vec::new();
    for s in suite_list {
        items.extend(suites::run_suite(*s, config)?);
    }
    let mut jsonl = String::new();
    for i in &items {
        jsonl.push_str(&serde_json::to_string(i)?);
        jsonl.push('\n');
    }
    let summary: String = items.iter().map(|i| summary_line(i) + "\n").collect();
    let unconfirmed = items.iter().filter(|i| !i.confirmed()).count();
    let reports = out.join("reports.jsonl");
    let summary_path = out.join("summary.txt");
    write(&reports, &jsonl)?;
    write(&summary_path, &summary)?;
    let tail = format!("{} checks, {} unexpected\n", items.len(), unconfirmed);
    Ok((
        Outcome {
            exit_code: if unconfirmed == 0 { EXIT_OK } else { EXIT_CHECK_FAILED },
            message: summary + &tail,
            outputs: vec![reports, summary_path],
        },
        json!({ "checks": items.len(), "unexpected": unconfirmed }),
    ))
}

/// Generating model of the experiment: logarithmic(0.95) stopping, exponential(0.01) base.
pub fn experiment_generator() -> Result<(crate::pgf::Pgf, ContinuousModel)> {
    Ok((crate::pgf::Pgf::logarithmic(0.95)?, ContinuousModel::exponential(0.01)?))
}

/// Published log-likelihoods for the five models on a 150-year sample.
pub const REFERENCE_LOGLIKS: [(&str, usize, f64); 5] = [
    ("Lg-Exp", 2, -942.326),
    ("ETNB-Exp", 3, -942.172),
    ("TB2-Exp", 2, -945.196),
    ("PC-LgNor", 3, -952.578),
    ("GEV", 3, -954.256),
];

/// Likelihood-ratio p-value printed alongside the reference table.
pub const REFERENCE_LRT_P: f64 = 0.758;

struct ExperimentRun {
    sample: StoppedSample,
    comparison: Comparison,
    lrt: Result<inference::LrtResult>,
}

fn experiment(m: usize, seed: u64, starts: usize) -> Result<ExperimentRun> {
    let (pgf, base) = experiment_generator()?;
    let sample = simulation::simulate_stopped(&pgf, &base, m, Flavor::Max, seed)?;
    let comparison = inference::compare_models(&inference::experiment_specs(), &sample.values, &fit_options(seed, starts));
    let lrt = match (comparison.fit("Lg-Exp"), comparison.fit("ETNB-Exp")) {
        (Some(lg), Some(etnb)) => inference::likelihood_ratio_test(lg, etnb),
        _ => Err(Error::Precondition("Lg-Exp or ETNB-Exp fit failed".into())),
    };
    Ok(ExperimentRun {
        sample,
        comparison,
        lrt,
    })
}

fn narrative(run: &ExperimentRun, m: usize, seed: u64) -> String {
    let mut s = String::new();
    s.push_str("# Annual-maximum experiment\n\n");
    s.push_str(&format!(
        "A sample of m = {m} annual maxima was simulated with seed {seed}: each year has a\n\
         logarithmic(p = 0.95) number of events and each event an exponential(rate = 0.01)\n\
         magnitude. Five models were fitted by maximum likelihood and ranked by AIC.\n\n"
    ));
    s.push_str("## Fitted models\n\n```\n");
    s.push_str(&run.comparison.to_table());
    s.push_str("```\n\n## Published reference values\n\n");
    s.push_str("These come from a different, unseeded sample of the same design, so only the\n");
    s.push_str("pattern (stopped exponential models ahead of GEV) is expected to carry over;\n");
    s.push_str("the numbers themselves depend on the sample.\n\n```\n");
    s.push_str("Model     N.par  loglikel     AIC      BIC     this run loglikel\n");
    for (label, k, ll) in REFERENCE_LOGLIKS {
        let (aic, bic) = inference::aic_bic(ll, k, 150);
        let here = run
            .comparison
            .fit(label)
            .map(|f| inference::fmt_sig(f.loglik))
            .unwrap_or_else(|| "failed".into());
        s.push_str(&format!(
            "{label:<9} {k:>5}  {:>8}  {:>7}  {:>7}   {here}\n",
            inference::fmt_sig(ll),
            inference::fmt_sig(aic),
            inference::fmt_sig(bic)
        ));
    }
    s.push_str("```\n\n## Likelihood-ratio test, Lg-Exp within ETNB-Exp\n\n");
    match &run.lrt {
        Ok(l) => s.push_str(&format!(
            "Statistic {} on {} degree of freedom, chi-square p-value {}.\n",
            inference::fmt_sig(l.statistic),
            l.df,
            inference::fmt_sig(l.p_value)
        )),
        Err(e) => s.push_str(&format!("Not available: {e}.\n")),
    }
    let ref_lrt = inference::lrt_from_logliks(REFERENCE_LOGLIKS[0].2, REFERENCE_LOGLIKS[1].2, 1);
    if let Ok(l) = ref_lrt {
        s.push_str(&format!(
            "\nFrom the published log-likelihoods the statistic is {} and the chi-square(1)\n\
             p-value {}; the published p-value is {REFERENCE_LRT_P}. The difference is not\n\
             explained by the rounded log-likelihoods alone.\n",
            inference::fmt_sig(l.statistic),
            inference::fmt_sig(l.p_value)
        ));
    }
    s
}

fn run_reproduce(m: usize, seed: u64, replications: usize, starts: usize, out: &Path) -> RunResult {
    let run = experiment(m, seed, starts)?;
    let data = out.join("data.csv");
    let side = out.join("data.json");
    run.sample.write_csv(&data, true)?;
    run.sample.write_sidecar(&side, true)?;
    let table = run.comparison.to_table();
    let table_path = out.join("table.txt");
    let fits_path = out.join("fits.json");
    let lrt_path = out.join("lrt.json");
    let readme = out.join("README.md");
    write(&table_path, &table)?;
    write_json(&fits_path, &run.comparison)?;
    let lrt_json = match &run.lrt {
        Ok(l) => json!({ "nested": "Lg-Exp", "full": "ETNB-Exp", "statistic": l.statistic, "df": l.df, "p_value": l.p_value }),
        Err(e) => json!({ "nested": "Lg-Exp", "full": "ETNB-Exp", "error": e.to_string() }),
    };
    write_json(&lrt_path, &lrt_json)?;
    write(&readme, &narrative(&run, m, seed))?;
    let mut outputs = vec![data, side, table_path, fits_path, lrt_path, readme];
    let mut results = json!({
        "ranking": run.comparison.rows.iter().filter(|r| r.fit.is_some()).map(|r| r.label.clone()).collect::<Vec<_>>(),
        "lrt": lrt_json,
    });
    let mut message = table;

    if replications > 1 {
        let mut reps = Vec::new();
        let mut lg_wins = 0;
        for r in 0..replications as u64 {
            let s = seed.wrapping_add(r);
            let rr = if r == 0 { None } else { Some(experiment(m, s, starts)?) };
            let cmp = rr.as_ref().map_or(&run.comparison, |x| &x.comparison);
            let aic = |label: &str| cmp.fit(label).map(|f| f.aic);
            let lg_beats_gev = match (aic("Lg-Exp"), aic("GEV")) {
                (Some(a), Some(b)) => a < b,
                (Some(_), None) => true,
                _ => false,
            };
            lg_wins += lg_beats_gev as usize;
            let best = cmp.rows.first().filter(|r| r.fit.is_some()).map(|r| r.label.clone());
            reps.push(json!({ "seed": s, "best": best, "lg_exp_aic": aic("Lg-Exp"), "gev_aic": aic("GEV"), "lg_beats_gev": lg_beats_gev }));
        }
        let summary = json!({
            "replications": replications,
            "m": m,
            "lg_exp_beats_gev": lg_wins,
            "majority": lg_wins * 2 > replications,
            "runs": reps,
        });
        let sj = out.join("replications.json");
        let st = out.join("replications.txt");
        write_json(&sj, &summary)?;
        let text = format!(
            "Lg-Exp has smaller AIC than GEV in {lg_wins} of {replications} replications (m = {m}, seeds {seed}..{}).\n",
            seed.wrapping_add(replications as u64 - 1)
        );
        write(&st, &text)?;
        message.push_str(&text);
        results["replications"] = json!({ "lg_exp_beats_gev": lg_wins, "of": replications });
        outputs.push(sj);
        outputs.push(st);
    }
    Ok((
        Outcome {
            exit_code: EXIT_OK,
            message,
            outputs,
        },
        results,
    ))
}

/// Parses `args`, runs, prints, and returns the process exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_CONFIG } else { EXIT_OK };
        }
    };
    let result = resolve(cli).and_then(|config| execute(&config));
    match result {
        Ok(o) => {
            print!("{}", o.message);
            if !o.message.ends_with('\n') {
                println!();
            }
            o.exit_code
        }
        Err(e) => {
            eprintln!("stopx: {e}");
            exit_code(&e)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn run(args: &[&str]) -> i32 {
        let mut v = vec!["stopx"];
        v.extend_from_slice(args);
        main_with_args(v)
    }

    #[test]
    fn exit_codes() {
        let dir = tempfile::tempdir().unwrap();
        let out = dir.path().to_str().unwrap();
        assert_eq!(run(&["simulate", "--stopping", "logarithmic:p=0.95", "--base", "exponential:lambda=0.01", "--m", "0", "--out", out]), EXIT_CONFIG);
        assert_eq!(run(&["simulate", "--stopping", "nosuch", "--base", "exponential:lambda=0.01", "--m", "5", "--out", out]), EXIT_CONFIG);
        assert_eq!(run(&["fit", "--model", "exp", "--data", "/nonexistent/data.csv", "--out", out]), EXIT_IO);
        assert_eq!(run(&["check", "--suite", "closure", "--family", "zt_poisson", "--out", out]), EXIT_CHECK_FAILED);
        assert_eq!(run(&["check", "--suite", "reversibility", "--out", out]), EXIT_OK);
        assert_eq!(run(&["bogus"]), EXIT_CONFIG);
    }

    #[test]
    fn simulate_writes_rows_and_manifest() {
        let dir = tempfile::tempdir().unwrap();
        let out = dir.path().to_str().unwrap();
        let code = run(&[
            "simulate", "--stopping", "logarithmic:p=0.95", "--base", "exponential:lambda=0.01", "--m", "150", "--seed", "7", "--out", out,
        ]);
        assert_eq!(code, EXIT_OK);
        let ys = simulation::read_values(&dir.path().join("sample.csv")).unwrap();
        assert_eq!(ys.len(), 150);
        let man: Manifest = serde_json::from_str(&std::fs::read_to_string(dir.path().join("manifest.json")).unwrap()).unwrap();
        assert!(matches!(man.config, RunConfig::Simulate { seed: 7, m: 150, .. }));
    }

    #[test]
    fn support_error_names_row() {
        let dir = tempfile::tempdir().unwrap();
        let data = dir.path().join("d.txt");
        std::fs::write(&data, "1.0\n2.0\n-0.5\n").unwrap();
        let config = RunConfig::Fit {
            models: vec![ModelSpec::new("LgNor", None, "lognormal")],
            data,
            seed: 1,
            starts: 1,
            out: dir.path().join("o"),
        };
        let e = execute(&config).unwrap_err();
        assert!(e.to_string().contains("data row 3"), "{e}");
    }
}
