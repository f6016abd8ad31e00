//! Evaluate a stopping pgf, its conjugate and inverses, and its probabilities.

use stopped_extremes::Pgf;

fn main() -> stopped_extremes::Result<()> {
    let h = Pgf::logarithmic(0.95)?;
    println!("{} with eta = -ln Pr(N=1) = {:.6}, mean {:.4}", h.family(), h.eta(), h.mean());

    println!("{:>6} {:>10} {:>10} {:>10} {:>10}", "t", "h", "conj", "inverse", "conj inv");
    for t in [0.1, 0.25, 0.5, 0.75, 0.9] {
        println!(
            "{t:>6} {:>10.6} {:>10.6} {:>10.6} {:>10.6}",
            h.eval(t)?,
            h.conjugate_eval(t)?,
            h.inverse_eval(t)?,
            h.conjugate_inverse_eval(t)?
        );
    }

    let pmf: Vec<String> = (1..=6).map(|n| format!("{:.4}", h.pmf(n).unwrap())).collect();
    println!("Pr(N = 1..6): {}", pmf.join(" "));

    // composing zero-truncated Poisson with the matching logarithmic gives a geometric
    let alpha: f64 = 1.3;
    let outer = Pgf::zt_poisson(alpha)?;
    let inner = Pgf::logarithmic(1.0 - (-alpha).exp())?;
    let g = outer.compose(&inner);
    let geo = Pgf::geometric((-alpha).exp())?;
    let gap = (0..=100)
        .map(|i| i as f64 / 100.0)
        .map(|t| (g.eval(t).unwrap() - geo.eval(t).unwrap()).abs())
        .fold(0.0, f64::max);
    println!("ztP(1.3) o Log(1 - e^-1.3) vs geometric(e^-1.3): max gap {gap:.2e}");
    Ok(())
}
