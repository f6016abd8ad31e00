//! Stopped extremes, precursors and the two-sided extension of a base model.

use stopped_extremes::catalog::{make_family, FamilyId};
use stopped_extremes::transforms::{self, Flavor};
use stopped_extremes::{ContinuousModel, Pgf};

fn main() -> stopped_extremes::Result<()> {
    let x = ContinuousModel::exponential(0.01)?;
    let n = Pgf::logarithmic(0.95)?;
    let models = [
        transforms::stopped_max(&n, &x),
        transforms::stopped_min(&n, &x),
        transforms::max_precursor(&n, &x),
        transforms::min_precursor(&n, &x),
    ];
    for y in [50.0, 100.0, 300.0] {
        let row: Vec<String> = models.iter().map(|m| format!("{:.5}", m.cdf(y).unwrap())).collect();
        println!("y = {y:>5}: base {:.5} | max min max-prec min-prec {}", x.cdf(y), row.join(" "));
    }
    println!("median of the stopped maximum: {:.3}", models[0].quantile(0.5)?);

    // Marshall-Olkin: geometric stopping, any real eta
    let geo = make_family(FamilyId::ZtGeometric)?;
    let logistic = ContinuousModel::logistic(0.0, 1.0)?;
    for eta in [-2.0, -0.5, 0.0, 0.5, 2.0] {
        let y = transforms::combined_extension(&geo, eta, &logistic, Flavor::Max)?;
        println!("eta {eta:>4}: F(0) = {:.6}, density at 0 = {:.6}", y.cdf(0.0)?, y.pdf(0.0)?);
    }
    Ok(())
}
