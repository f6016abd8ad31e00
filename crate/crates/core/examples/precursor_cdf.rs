//! Estimate the cdf of the underlying events from annual maxima and observed counts.

use stopped_extremes::inference::{self, FitOptions};
use stopped_extremes::simulation;
use stopped_extremes::transforms::Flavor;
use stopped_extremes::{ContinuousModel, Pgf};

fn main() -> stopped_extremes::Result<()> {
    let x = ContinuousModel::exponential(0.01)?;
    let sample = simulation::simulate_stopped(&Pgf::logarithmic(0.95)?, &x, 2_000, Flavor::Max, 3)?;
    let opts = FitOptions::default();

    let counts = sample.counts.as_ref().expect("counts are kept");
    let n_fit = inference::fit_counts(&inference::preset("lg").unwrap(), counts, None, &opts)?;
    let y_fit = inference::fit_mle(&inference::preset("lg-exp").unwrap(), &sample.values, None, &opts)?;
    let est = inference::precursor_cdf_estimate(Some(&n_fit), &y_fit)?;

    println!("{:>8} {:>9} {:>9} {:>9} {:>9}", "x", "true", "estimate", "lower", "upper");
    for u in [0.1, 0.25, 0.5, 0.75, 0.9] {
        let q = x.quantile(u)?;
        let p = est.eval(q)?;
        println!(
            "{q:>8.2} {u:>9.4} {:>9.4} {:>9.4} {:>9.4}",
            p.estimate,
            p.lower.unwrap_or(f64::NAN),
            p.upper.unwrap_or(f64::NAN)
        );
    }
    Ok(())
}
