//! Score every candidate dialect of a file by hand and print the pattern,
//! type, and combined consistency components side by side.
//!
//! Run with: cargo run --example score_breakdown

use csvscout::scoring::consistency;
use csvscout::{get_dialects, CharacterPolicy, ScoreConstants};

fn main() {
    let text = "date,low,high\n2021-01-02,-3.5,4\n2021-01-03,0,7\n2021-01-04,2,11\n";
    let policy = CharacterPolicy::default();
    let constants = ScoreConstants::default();

    println!("input:\n{text}");
    println!(
        "{:<22} {:>9} {:>9} {:>12} {:>9}",
        "dialect", "pattern", "type", "type(clamp)", "q"
    );

    let mut scored: Vec<_> = get_dialects(text, &policy)
        .iter()
        .map(|d| {
            let b = consistency(text, d, &constants).expect("non-empty input");
            (*d, b)
        })
        .collect();
    scored.sort_by(|a, b| b.1.q.total_cmp(&a.1.q));

    for (dialect, b) in &scored {
        println!(
            "{:<22} {:>9.4} {:>9.4} {:>12.4e} {:>9.4}",
            dialect.to_string(),
            b.pattern,
            b.type_raw,
            b.type_clamped,
            b.q
        );
    }

    let (winner, best) = &scored[0];
    println!(
        "\nwinner {winner}: {} rows, {} cells, {} distinct row pattern(s)",
        best.rows_total, best.cells_total, best.patterns_distinct
    );
}
