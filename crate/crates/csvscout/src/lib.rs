//! Detect the dialect of messy CSV files.
//!
//! A dialect is the triple (delimiter, quote character, escape character),
//! any of which may be absent. `csvscout` enumerates every plausible dialect
//! for a file, parses the file under each one, and keeps the dialect whose
//! parse is most self-consistent: rows collapse to few distinct shape
//! patterns and cells look like known data types (numbers, dates, URLs, ...).
//!
//! # Quick start
//!
//! ```
//! use csvscout::{detect, DetectorVariant, Dialect};
//!
//! let text = "a;b;c\n1;2;3\n4;5;6\n";
//! let outcome = detect(text, DetectorVariant::Full, &Default::default());
//! assert_eq!(outcome.dialect, Some(Dialect::new(Some(';'), None, None).unwrap()));
//! ```
//!
//! # Examples
//!
//! The `examples/` directory is the guided tour; each file is runnable with
//! `cargo run --example NAME`:
//!
//! - `detect_basic` — detect a dialect and print the JSON outcome
//! - `candidate_set` — how the candidate dialects for a file are built
//! - `score_breakdown` — per-candidate pattern/type/consistency scores
//! - `parse_and_normalize` — parse a messy file, re-emit normalized CSV
//! - `type_detection` — the cell type registry on sample strings
//! - `tie_breaking` — a tied detection and how it resolves
//! - `generate_corpus` — write a labeled synthetic corpus
//! - `evaluate_corpus` — score detection accuracy against labels
//!
//! The same capabilities are reachable from the thin `csvscout` binary
//! (`detect`, `parse`, `evaluate`, `generate`, `dump-types` subcommands).

pub mod cli;
pub mod detector;
pub mod dialect;
pub mod evalgen;
pub mod parser;
pub mod scoring;
pub mod typeinfer;

pub use detector::{detect, DetectionOutcome, DetectionStatus, DetectorVariant};
pub use dialect::{get_dialects, CandidateSet, CharacterPolicy, Dialect};
pub use parser::{abstract_rows, format, parse, CellTable, FormatOptions, RowPatternTable};
pub use scoring::{consistency, ScoreBreakdown, ScoreConstants};
pub use typeinfer::{detect_type, is_known_type, DataType};
