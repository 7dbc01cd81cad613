//! Generate a small labeled corpus of synthetic CSV files. Every file is
//! parsed back and round-tripped during generation, so the labels are true
//! by construction.
//!
//! Run with: cargo run --example generate_corpus

use csvscout::evalgen::{generate, GeneratorSpec};

fn main() -> anyhow::Result<()> {
    let dir = std::env::temp_dir().join("csvscout_example_corpus");
    std::fs::create_dir_all(&dir)?;

    let spec = GeneratorSpec { seed: 42, count: 10, ..Default::default() };
    let files = generate(&dir, &spec)?;

    println!("wrote {} files to {}\n", files.len(), dir.display());
    println!("{:<16} {:<22} mess", "file", "dialect");
    for f in &files {
        let mess = if f.mess.any() { "yes" } else { "no" };
        println!("{:<16} {:<22} {}", f.record.filename, f.record.dialect.to_string(), mess);
    }

    let sample = &files[0];
    let text = std::fs::read_to_string(dir.join(&sample.record.filename))?;
    println!("\n{} ({}):", sample.record.filename, sample.record.dialect);
    print!("{text}");

    Ok(())
}
