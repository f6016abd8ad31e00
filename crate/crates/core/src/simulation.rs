//! Seeded simulation of stopped extremes.
//!
//! Draws use ChaCha8 with one stream per observation index: observation `i`
//! of a run with seed `s` comes from `ChaCha8Rng::seed_from_u64(s)` switched
//! to stream `i`. Samples are therefore identical whatever the thread count.
//! Uniforms take the top 53 bits of a `u64` and are shifted off zero.
//!
//! Each `y_i` is the extreme of `n_i` explicit base draws, so this path never
//! touches the transformed cdfs it is used to check.

use std::path::Path;

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dist::ContinuousModel;
use crate::error::{Error, Result};
use crate::pgf::{Pgf, PgfSampler};
use crate::specs::StoppingSpec;
use crate::transforms::Flavor;

/// Name recorded in sidecars for the generator scheme.
pub const RNG_NAME: &str = "chacha8-stream-per-index";

/// Uniform draw on the open interval `(0, 1)` from the top 53 bits of a `u64`.
pub fn uniform_open<R: RngCore + ?Sized>(rng: &mut R) -> f64 {
    ((rng.next_u64() >> 11) as f64 + 0.5) * (1.0 / (1u64 << 53) as f64)
}

/// The generator for observation `index` of a run seeded with `seed`.
pub fn substream(seed: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

/// What produced a sample.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GeneratorSpec {
    pub stopping: StoppingSpec,
    pub base: ContinuousModel,
    pub rng: String,
}

/// Simulated stopped extremes `y_i` with their stopping counts `n_i`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StoppedSample {
    pub values: Vec<f64>,
    pub counts: Option<Vec<u64>>,
    pub mode: Flavor,
    pub seed: u64,
    pub generator_spec: GeneratorSpec,
}

/// JSON written next to a sample CSV.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Sidecar {
    pub seed: u64,
    pub m: usize,
    pub mode: Flavor,
    pub generator_spec: GeneratorSpec,
    pub columns: Vec<String>,
}

/// Draws `m` stopped extremes: `n_i` from the stopping pgf, then the max
/// (or min) of `n_i` base draws.
pub fn simulate_stopped(
    stopping: &Pgf,
    base: &ContinuousModel,
    m: usize,
    mode: Flavor,
    seed: u64,
) -> Result<StoppedSample> {
    simulate_with_sampler(PgfSampler::new(stopping.clone()), base, m, mode, seed)
}

/// [`simulate_stopped`] with a configured sampler (cap, tail policy).
pub fn simulate_with_sampler(
    sampler: PgfSampler,
    base: &ContinuousModel,
    m: usize,
    mode: Flavor,
    seed: u64,
) -> Result<StoppedSample> {
    if m == 0 {
        return Err(Error::param("m", 0.0, "sample size must be at least 1"));
    }
    let base = base.validated()?;
    let draws: Vec<(f64, u64)> = (0..m as u64)
        .into_par_iter()
        .map_init(
            || sampler.clone(),
            |s, i| -> Result<(f64, u64)> {
                let mut rng = substream(seed, i);
                let n = s.sample(&mut rng)?;
                let mut y = base.sample(&mut rng);
                for _ in 1..n {
                    let x = base.sample(&mut rng);
                    y = match mode {
                        Flavor::Max => y.max(x),
                        Flavor::Min => y.min(x),
                    };
                }
                Ok((y, n))
            },
        )
        .collect::<Result<_>>()?;
    let (values, counts) = draws.into_iter().unzip();
    Ok(StoppedSample {
        values,
        counts: Some(counts),
        mode,
        seed,
        generator_spec: GeneratorSpec {
            stopping: StoppingSpec::from_pgf(sampler.pgf()),
            base,
            rng: RNG_NAME.to_string(),
        },
    })
}

impl StoppedSample {
    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Draws the sample again from its seed and generator description.
    pub fn regenerate(&self) -> Result<StoppedSample> {
        regenerate(&self.sidecar(self.counts.is_some()))
    }

    pub fn sidecar(&self, with_counts: bool) -> Sidecar {
        let mut columns = vec!["y".to_string()];
        if with_counts && self.counts.is_some() {
            columns.push("n".to_string());
        }
        Sidecar {
            seed: self.seed,
            m: self.values.len(),
            mode: self.mode,
            generator_spec: self.generator_spec.clone(),
            columns,
        }
    }

    /// Writes `y[,n]` columns; values use shortest round-trip formatting.
    pub fn write_csv(&self, path: &Path, with_counts: bool) -> Result<()> {
        let io = |e: csv::Error| Error::Io(format!("{}: {e}", path.display()));
        let mut w = csv::Writer::from_path(path).map_err(io)?;
        let counts = self.counts.as_ref().filter(|_| with_counts);
        if counts.is_some() {
            w.write_record(["y", "n"]).map_err(io)?;
        } else {
            w.write_record(["y"]).map_err(io)?;
        }
        for (i, y) in self.values.iter().enumerate() {
            match counts {
                Some(c) => w.write_record([y.to_string(), c[i].to_string()]).map_err(io)?,
                None => w.write_record([y.to_string()]).map_err(io)?,
            }
        }
        w.flush()?;
        Ok(())
    }

    pub fn write_sidecar(&self, path: &Path, with_counts: bool) -> Result<()> {
        let text = serde_json::to_string_pretty(&self.sidecar(with_counts))?;
        std::fs::write(path, text + "\n").map_err(|e| Error::Io(format!("{}: {e}", path.display())))
    }
}

/// Rebuilds a sample from a sidecar.
pub fn regenerate(sidecar: &Sidecar) -> Result<StoppedSample> {
    let g = &sidecar.generator_spec;
    if g.rng != RNG_NAME {
        return Err(Error::Spec(format!("unsupported generator '{}'", g.rng)));
    }
    let pgf = g.stopping.to_pgf()?;
    let mut s = simulate_stopped(&pgf, &g.base, sidecar.m, sidecar.mode, sidecar.seed)?;
    if !sidecar.columns.iter().any(|c| c == "n") {
        s.counts = None;
    }
    s.generator_spec = g.clone();
    Ok(s)
}

/// Reads a column of observations: one number per line, or a CSV with a `y` column.
pub fn read_values(path: &Path) -> Result<Vec<f64>> {
    read_column(path, "y")
}

/// Reads stopping counts from the `n` column of a CSV.
pub fn read_counts(path: &Path) -> Result<Vec<u64>> {
    read_column(path, "n")?
        .into_iter()
        .enumerate()
        .map(|(i, v)| {
            if v >= 1.0 && v.fract() == 0.0 {
                Ok(v as u64)
            } else {
                Err(Error::Support { index: i, value: v })
            }
        })
        .collect()
}

fn read_column(path: &Path, column: &str) -> Result<Vec<f64>> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .trim(csv::Trim::All)
        .flexible(true)
        .from_reader(text.as_bytes());
    let mut col: Option<usize> = None;
    let mut out = Vec::new();
    for (line, rec) in reader.records().enumerate() {
        let rec = rec.map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
        if rec.iter().all(|f| f.is_empty()) {
            continue;
        }
        let idx = match col {
            Some(c) => c,
            None => {
                let header = rec.iter().any(|f| f.parse::<f64>().is_err());
                let c = if header {
                    rec.iter().position(|f| f == column).ok_or_else(|| {
                        Error::Spec(format!("{}: no column named '{column}'", path.display()))
                    })?
                } else if rec.len() == 1 || column == "y" {
                    0
                } else {
                    return Err(Error::Spec(format!("{}: headerless file has no '{column}' column", path.display())));
                };
                col = Some(c);
                if header {
                    continue;
                }
                c
            }
        };
        let field = rec.get(idx).unwrap_or("");
        let v: f64 = field
            .parse()
            .map_err(|_| Error::Spec(format!("{} line {}: '{field}' is not a number", path.display(), line + 1)))?;
        out.push(v);
    }
    if out.is_empty() {
        return Err(Error::Spec(format!("{}: no observations", path.display())));
    }
    Ok(out)
}

/// Kolmogorov-Smirnov distance between a sample and a cdf; 0 for an empty sample.
pub fn ks_distance<F: Fn(f64) -> f64>(sample: &[f64], cdf: F) -> f64 {
    let mut s = sample.to_vec();
    s.sort_by(f64::total_cmp);
    let n = s.len() as f64;
    s.iter()
        .enumerate()
        .map(|(i, &y)| {
            let f = cdf(y);
            ((i as f64 + 1.0) / n - f).abs().max((f - i as f64 / n).abs())
        })
        .fold(0.0, f64::max)
}

/// Asymptotic 1% critical value of the KS distance, `1.63 / sqrt(n)`.
pub fn ks_critical_1pct(n: usize) -> f64 {
    1.63 / (n as f64).sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::transforms;

    fn exp_base() -> ContinuousModel {
        ContinuousModel::exponential(0.01).unwrap()
    }

    #[test]
    fn ks_examples() {
        assert_eq!(ks_distance(&[1.0], |_| 0.5), 0.5);
        let base = exp_base();
        let mut rng = substream(3, 0);
        let xs: Vec<f64> = (0..5000).map(|_| base.sample(&mut rng)).collect();
        let stopped = transforms::stopped_max(&Pgf::logarithmic(0.95).unwrap(), &base);
        assert!(ks_distance(&xs, |y| stopped.cdf(y).unwrap()) > 0.2);
        assert!(ks_distance(&xs, |y| base.cdf(y)) < ks_critical_1pct(xs.len()));
    }

    #[test]
    fn identity_stopping_gives_base_draws() {
        let base = exp_base();
        let s = simulate_stopped(&Pgf::identity(), &base, 50, Flavor::Max, 11).unwrap();
        assert!(s.counts.as_ref().unwrap().iter().all(|&n| n == 1));
        for (i, y) in s.values.iter().enumerate() {
            let mut rng = substream(11, i as u64);
            let _ = rng.next_u64();
            assert_eq!(*y, base.sample(&mut rng));
        }
    }

    #[test]
    fn seed_determinism_across_thread_counts() {
        let pgf = Pgf::logarithmic(0.95).unwrap();
        let a = simulate_stopped(&pgf, &exp_base(), 500, Flavor::Max, 9).unwrap();
        let pool = rayon::ThreadPoolBuilder::new().num_threads(3).build().unwrap();
        let b = pool.install(|| simulate_stopped(&pgf, &exp_base(), 500, Flavor::Max, 9).unwrap());
        assert_eq!(a, b);
        assert_eq!(a.regenerate().unwrap(), a);
    }

    #[test]
    fn min_mode_matches_conjugate_cdf() {
        let pgf = Pgf::geometric(0.3).unwrap();
        let s = simulate_stopped(&pgf, &exp_base(), 20000, Flavor::Min, 5).unwrap();
        let model = transforms::stopped_min(&pgf, &exp_base());
        let d = ks_distance(&s.values, |y| model.cdf(y).unwrap());
        assert!(d < ks_critical_1pct(s.len()), "ks {d}");
    }

    #[test]
    fn counts_match_pmf() {
        let pgf = Pgf::logarithmic(0.95).unwrap();
        let m = 20000;
        let s = simulate_stopped(&pgf, &exp_base(), m, Flavor::Max, 21).unwrap();
        let counts = s.counts.unwrap();
        for n in 1..=10u64 {
            let p = pgf.pmf(n).unwrap();
            let freq = counts.iter().filter(|&&c| c == n).count() as f64 / m as f64;
            let se = (p * (1.0 - p) / m as f64).sqrt();
            assert!((freq - p).abs() < 3.0 * se + 1e-12, "n={n} freq={freq} p={p}");
        }
    }

    #[test]
    fn zero_size_is_rejected() {
        assert!(simulate_stopped(&Pgf::identity(), &exp_base(), 0, Flavor::Max, 1).is_err());
    }

    #[test]
    fn csv_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let pgf = Pgf::zt_binomial(2, 0.4).unwrap();
        let s = simulate_stopped(&pgf, &exp_base(), 40, Flavor::Max, 2).unwrap();
        let path = dir.path().join("sample.csv");
        s.write_csv(&path, true).unwrap();
        assert_eq!(read_values(&path).unwrap(), s.values);
        assert_eq!(read_counts(&path).unwrap(), s.counts.clone().unwrap());
        let side = dir.path().join("sample.json");
        s.write_sidecar(&side, true).unwrap();
        let sc: Sidecar = serde_json::from_str(&std::fs::read_to_string(side).unwrap()).unwrap();
        assert_eq!(regenerate(&sc).unwrap(), s);

        let plain = dir.path().join("plain.txt");
        std::fs::write(&plain, "1.5\n2.5\n\n3\n").unwrap();
        assert_eq!(read_values(&plain).unwrap(), vec![1.5, 2.5, 3.0]);
        std::fs::write(&plain, "1.5\nabc\n").unwrap();
        assert!(matches!(read_values(&plain), Err(Error::Spec(_))));
    }
}
