//! Continuous base models: cdf, density, quantile and sampling.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use stopped_extremes::ContinuousModel;

fn main() -> stopped_extremes::Result<()> {
    let models = [
        ContinuousModel::exponential(0.01)?,
        ContinuousModel::lognormal(4.0, 1.0)?,
        ContinuousModel::gumbel(100.0, 30.0)?,
        ContinuousModel::logistic(0.0, 1.0)?,
        ContinuousModel::gev(100.0, 30.0, 0.1)?,
    ];
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    for m in &models {
        let median = m.quantile(0.5)?;
        let draws: Vec<String> = (0..3).map(|_| format!("{:.2}", m.sample(&mut rng))).collect();
        println!(
            "{m}: median {median:.3}, F(median) {:.6}, f(median) {:.5}, draws {}",
            m.cdf(median),
            m.pdf(median),
            draws.join(" ")
        );
    }
    Ok(())
}
