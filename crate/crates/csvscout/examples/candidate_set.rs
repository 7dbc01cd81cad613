//! Walk through how the candidate dialect set for a file is constructed:
//! URLs are masked first, then delimiters and quote chars are enumerated
//! from the remaining text, then escapes and collision rules shape the
//! final product.
//!
//! Run with: cargo run --example candidate_set

use csvscout::dialect::{filter_urls, get_delimiters, get_quotechars};
use csvscout::{get_dialects, CharacterPolicy};

fn show(label: &str, chars: &std::collections::BTreeSet<Option<char>>) {
    let rendered: Vec<String> = chars
        .iter()
        .map(|c| match c {
            Some(c) => format!("{c:?}"),
            None => "ε".into(),
        })
        .collect();
    println!("{label}: {{{}}}", rendered.join(", "));
}

fn main() {
    let text = "id,note,link\n1,\"fine; mostly\",https://example.com/a?x=1;2\n2,ok,https://example.com/b\n";
    let policy = CharacterPolicy::default();

    println!("input:\n{text}");

    // the ';' inside the URL query would be a spurious delimiter candidate;
    // the ';' inside the quoted cell is real text and survives
    let filtered = filter_urls(text);
    println!("url-filtered:\n{filtered}");

    show("delimiter candidates", &get_delimiters(&filtered, &policy));
    show("quote char candidates", &get_quotechars(&filtered, &policy));

    let candidates = get_dialects(text, &policy);
    println!("\n{} candidate dialects (delimiter, quote, escape):", candidates.len());
    for dialect in &candidates {
        println!("  {dialect}");
    }
}
