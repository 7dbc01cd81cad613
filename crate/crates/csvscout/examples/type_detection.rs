//! Run the cell type registry over sample strings. Order matters: the first
//! matching grammar wins, which is why "nan" comes out alphanumeric rather
//! than a missing-value marker.
//!
//! Run with: cargo run --example type_detection

use csvscout::typeinfer::registry;
use csvscout::{detect_type, is_known_type};

fn main() {
    let samples = [
        "",
        "1,234.56",
        "123e10",
        "1,234e5",
        "16:45",
        "3 degrees",
        "NW1 2DB",
        "nan",
        "n/a",
        "2021-03-04",
        "2021-03-04T16:45+01:00",
        "€12.50",
        "12.5%",
        "user@example.com",
        "https://example.com/data",
        "??~",
    ];

    println!("{:<24} {:<16} known", "cell", "type");
    for cell in samples {
        println!("{:<24} {:<16} {}", format!("{cell:?}"), detect_type(cell).to_string(), is_known_type(cell));
    }

    let dump = registry().to_json();
    let types = dump["types"].as_array().unwrap();
    println!("\nregistry: {} type grammars, unicode {}", types.len(), dump["unicode_version"]);
    for t in types {
        println!("  {:<16} {} pattern(s)", t["name"].as_str().unwrap(), t["patterns"].as_array().unwrap().len());
    }
}
