//! Drive a batch run programmatically, then replay it from its manifest.

use stopped_extremes::cli::{self, Manifest, RunConfig};

fn main() -> stopped_extremes::Result<()> {
    let root = std::env::temp_dir().join("stopx-reproducible-example");
    let config = RunConfig::ReproduceExperiment {
        m: 150,
        seed: cli::DEFAULT_SEED,
        replications: 20,
        starts: 5,
        out: root.join("first"),
    };
    let outcome = cli::execute(&config)?;
    print!("{}", outcome.message);

    let text = std::fs::read_to_string(root.join("first/manifest.json")).map_err(|e| stopped_extremes::Error::Io(e.to_string()))?;
    let manifest: Manifest = serde_json::from_str(&text)?;
    let mut replay = manifest.config.clone();
    if let RunConfig::ReproduceExperiment { out, .. } = &mut replay {
        *out = root.join("replay");
    }
    cli::execute(&replay)?;
    let same = std::fs::read(root.join("first/table.txt")).ok() == std::fs::read(root.join("replay/table.txt")).ok();
    println!("replayed table identical: {same}");
    Ok(())
}
