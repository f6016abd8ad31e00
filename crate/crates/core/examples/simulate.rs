//! Simulate stopped maxima, write CSV with a sidecar, and check them against the analytic cdf.

use stopped_extremes::simulation;
use stopped_extremes::transforms::{self, Flavor};
use stopped_extremes::{ContinuousModel, Pgf};

fn main() -> stopped_extremes::Result<()> {
    let n = Pgf::logarithmic(0.95)?;
    let x = ContinuousModel::exponential(0.01)?;
    let sample = simulation::simulate_stopped(&n, &x, 20_000, Flavor::Max, 7)?;

    let model = transforms::stopped_max(&n, &x);
    let d = simulation::ks_distance(&sample.values, |y| model.cdf(y).unwrap());
    let crit = simulation::ks_critical_1pct(sample.len());
    println!("KS distance {d:.5} vs 1% critical value {crit:.5}");

    let counts = sample.counts.as_ref().expect("counts are kept");
    let mean_n = counts.iter().sum::<u64>() as f64 / counts.len() as f64;
    println!("mean stopping count {mean_n:.3}, pgf mean {:.3}", n.mean());

    let dir = std::env::temp_dir().join("stopx-simulate-example");
    std::fs::create_dir_all(&dir).map_err(|e| stopped_extremes::Error::Io(e.to_string()))?;
    sample.write_csv(&dir.join("sample.csv"), true)?;
    sample.write_sidecar(&dir.join("sample.json"), true)?;
    let again = simulation::regenerate(&sample.sidecar(true))?;
    println!("wrote {} rows to {}; regenerated identically: {}", sample.len(), dir.display(), again.values == sample.values);
    Ok(())
}
