//! Detect the dialect of a small messy file and print the outcome.
//!
//! Run with: cargo run --example detect_basic

use csvscout::{detect, DetectorVariant};

fn main() {
    let text = "name;age;quote\n\
                Ada;36;\"so-called \"\"analytical\"\" engine\"\n\
                Noether;53;emmy@example.org\n";

    let outcome = detect(text, DetectorVariant::Full, &Default::default());

    println!("status:  {}", outcome.status);
    if let Some(dialect) = outcome.dialect {
        println!("dialect: {dialect}");
    }
    println!(
        "ranked {} candidates, pruned {} more",
        outcome.breakdowns.len(),
        outcome.pruned.len()
    );
    println!("\nfull JSON outcome:");
    println!("{}", serde_json::to_string_pretty(&outcome.to_json()).unwrap());
}
