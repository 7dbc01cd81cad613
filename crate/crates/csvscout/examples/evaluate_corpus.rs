//! Generate a labeled corpus, then measure detection accuracy on it for
//! two detector variants: the full scorer and the pattern-only ablation.
//!
//! Run with: cargo run --example evaluate_corpus

use csvscout::evalgen::{evaluate, generate,EvalOptions, GeneratorSpec};
use csvscout::DetectorVariant;

fn main() -> anyhow::Result<()> {
    let dir = std::env::temp_dir().join("csvscout_example_eval");
    std::fs::create_dir_all(&dir)?;

    let spec = GeneratorSpec { seed: 7, count: 40, ..Default::default() };
    let files = generate(&dir, &spec)?;
    let labels: Vec<_> = files.into_iter().map(|f| f.record).collect();
    println!("corpus: {} files in {}\n", labels.len(), dir.display());

    for variant in [DetectorVariant::Full, DetectorVariant::PatternOnly] {
        let opts = EvalOptions { variant, ..Default::default() };
        let report = evaluate(&dir, &labels, &opts)?;
        println!("{}", report.render_table());
    }

    Ok(())
}
