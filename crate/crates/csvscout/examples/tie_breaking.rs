//! Exact score ties and how they resolve. A tie is spurious when the tied
//! dialects parse the file into the very same table and differ only by one
//! component that never fires; the simpler dialect then wins. Ties that
//! survive that test are reported, not guessed at.
//!
//! Run with: cargo run --example tie_breaking

use csvscout::{detect, DetectorVariant};

fn report(label: &str, text: &str, variant: DetectorVariant) {
    let outcome = detect(text, variant, &Default::default());
    println!("{label} [{variant}]");
    println!("  input:  {text:?}");
    println!("  status: {}", outcome.status);
    match (&outcome.dialect, &outcome.tie_set) {
        (Some(d), _) => println!("  winner: {d}"),
        (None, Some(ties)) => {
            let rendered: Vec<String> = ties.iter().map(|d| d.to_string()).collect();
            println!("  tied:   {}", rendered.join(" vs "));
        }
        _ => {}
    }
    println!();
}

fn main() {
    // the apostrophe never actually quotes anything here, so the quoted and
    // unquoted readings produce identical tables
    let spurious = "it's,b\n1,2";
    report("spurious tie", spurious, DetectorVariant::NoTieBreak);
    report("spurious tie", spurious, DetectorVariant::Full);

    // comma and semicolon each split exactly one row: perfectly symmetric,
    // no honest way to pick one
    let real = "a,b\n1;2";
    report("real tie", real, DetectorVariant::Full);
}
