//! Parse a file under its detected dialect, inspect cells, warnings, and row
//! patterns, then re-emit the table as standard comma/double-quote CSV.
//!
//! Run with: cargo run --example parse_and_normalize

use csvscout::{detect, format, parse, DetectorVariant, Dialect, FormatOptions};

fn main() {
    let text = "name|motto\n\
                Ada|~first, programmer~\n\
                Grace|~ship in port ~~safe~~~\n\
                Linus|talk is cheap";

    let outcome = detect(text, DetectorVariant::Full, &Default::default());
    let dialect = outcome.dialect.expect("example input detects cleanly");
    println!("detected dialect: {dialect}");

    let parsed = parse(text, &dialect);
    for warning in &parsed.warnings {
        eprintln!("warning: {warning}");
    }
    println!("\ncells:");
    for row in &parsed.table.rows {
        println!("  {row:?}");
    }
    println!("\nrow patterns (C = cell, D = delimiter):");
    for (pattern, count) in parsed.pattern_table().counts() {
        println!("  {pattern:?} x{count}");
    }

    let standard = Dialect::new(Some(','), Some('"'), None).unwrap();
    let normalized = format(&parsed.table, &standard, &FormatOptions::default())
        .expect("dialect has delimiter and quote");
    println!("\nnormalized to {standard}:\n{normalized}");
}
