//! Run the property suites over the catalog and summarize them.

use stopped_extremes::suites::{self, Suite, SuiteConfig};

fn main() -> stopped_extremes::Result<()> {
    let config = SuiteConfig::default();
    for suite in [Suite::Identities, Suite::Reversibility, Suite::AutoReversibility, Suite::Closure, Suite::Stability, Suite::Order] {
        let items = suites::run_suite(suite, &config)?;
        let passed = items.iter().filter(|i| i.report.passed).count();
        let confirmed = items.iter().filter(|i| i.confirmed()).count();
        let worst = items
            .iter()
            .filter(|i| i.expect_pass)
            .map(|i| i.report.sup_discrepancy)
            .fold(0.0, f64::max);
        println!(
            "{:<18} {:>3} checks, {:>3} pass, {:>3} as declared, worst expected-pass sup {worst:.2e}",
            suite.name(),
            items.len(),
            passed,
            confirmed
        );
    }
    Ok(())
}
