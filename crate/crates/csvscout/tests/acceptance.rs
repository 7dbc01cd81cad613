//! Acceptance gate: one test per release criterion, each printing a single
//! PASS/FAIL line (visible with `cargo test --test acceptance -- --nocapture`).
//!
//! The corpus-level criteria share one seeded 500-file synthetic corpus.

use std::collections::BTreeSet;
use std::panic::{catch_unwind, resume_unwind};
use std::time::{Duration, Instant};

use once_cell::sync::Lazy;
use rand::{RngExt, SeedableRng};
use rand_chacha::ChaCha8Rng;
use tempfile::TempDir;

use csvscout::detector::{break_ties, DetectParams};
use csvscout::evalgen::{evaluate, generate, EvalOptions, GeneratedFile, GeneratorSpec};
use csvscout::parser::ParseWarning;
use csvscout::scoring::consistency;
use csvscout::{
    detect, detect_type, format, get_dialects, parse, CellTable, CharacterPolicy, DataType,
    DetectionStatus, DetectorVariant, Dialect, FormatOptions, ScoreConstants,
};

/// Runs a criterion body and prints exactly one status line for it.
fn criterion(number: u32, name: &str, body: impl FnOnce() + std::panic::UnwindSafe) {
    let result = catch_unwind(body);
    let status = if result.is_ok() { "PASS" } else { "FAIL" };
    println!("criterion {number} ({name}): {status}");
    if let Err(panic) = result {
        resume_unwind(panic);
    }
}

struct Corpus {
    dir: TempDir,
    files: Vec<GeneratedFile>,
}

static CORPUS: Lazy<Corpus> = Lazy::new(|| {
    let dir = TempDir::new().expect("create corpus dir");
    let spec = GeneratorSpec { seed: 0x5EED_2026, count: 500, ..Default::default() };
    let files = generate(dir.path(), &spec).expect("corpus generation");
    Corpus { dir, files }
});

fn corpus_text(c: &Corpus, file: &GeneratedFile) -> String {
    std::fs::read_to_string(c.dir.path().join(&file.record.filename)).expect("corpus file")
}

#[test]
fn criterion_1_pattern_score_oracle() {
    criterion(1, "pattern score matches hand-computed values", || {
        let start = Instant::now();
        let cases: [(&[(&str, u64)], f64); 3] = [
            // one pattern, three rows, two delimiters per row
            (&[("CDC", 3)], 1.5),
            // single-column file exercises the floor term
            (&[("C", 5)], 0.005),
            // mixed widths: (4 * 4/5 + 1 * 2/3) / 2
            (&[("CDCDC", 4), ("CDC", 1)], 19.0 / 12.0),
        ];
        for (counts, want) in cases {
            let table = csvscout::RowPatternTable::from_patterns(
                counts
                    .iter()
                    .flat_map(|(p, n)| std::iter::repeat_n(p.to_string(), *n as usize)),
            );
            let got =
                csvscout::scoring::pattern_score(&table, &ScoreConstants::default()).unwrap();
            assert!(
                (got - want).abs() < 1e-12,
                "pattern score for {counts:?}: got {got}, want {want}"
            );
        }
        assert!(start.elapsed() < Duration::from_secs(1), "unit suite must be fast");
    });
}

#[test]
fn criterion_2_type_clamp_is_exact() {
    criterion(2, "all-unknown table clamps type score to 1e-10 exactly", || {
        let dialect = Dialect::new(Some(','), None, None).unwrap();
        let out =
            consistency("a-b,x_y\n#t,%%\n", &dialect, &ScoreConstants::default()).unwrap();
        assert_eq!(out.type_raw, 0.0);
        assert_eq!(out.type_clamped.to_bits(), 1e-10f64.to_bits());
        assert_eq!(out.q.to_bits(), (out.pattern * 1e-10).to_bits());
    });
}

#[test]
fn criterion_3_pruning_matches_exhaustive_scoring() {
    criterion(3, "pruned detection equals exhaustive argmax on 200 files", || {
        let start = Instant::now();
        let corpus = &*CORPUS;
        let params = DetectParams::default();
        let constants = ScoreConstants::default();
        let policy = CharacterPolicy::default();

        for file in corpus.files.iter().take(200) {
            let text = corpus_text(corpus, file);
            let outcome = detect(&text, DetectorVariant::Full, &params);

            // exhaustive oracle: score every candidate, no skipping
            let candidates = get_dialects(&text, &policy);
            let scored: Vec<(Dialect, f64)> = candidates
                .iter()
                .map(|d| (*d, consistency(&text, d, &constants).unwrap().q))
                .collect();
            let best = scored.iter().map(|(_, q)| *q).fold(f64::MIN, f64::max);
            let tied: Vec<Dialect> =
                scored.iter().filter(|(_, q)| *q == best).map(|(d, _)| *d).collect();
            let survivors =
                if tied.len() > 1 { break_ties(&text, &tied) } else { tied.clone() };

            let name = &file.record.filename;
            if survivors.len() == 1 {
                assert_eq!(outcome.status, DetectionStatus::Detected, "{name}");
                assert_eq!(outcome.dialect, Some(survivors[0]), "{name}");
            } else {
                assert_eq!(outcome.status, DetectionStatus::TieUnbroken, "{name}");
                assert_eq!(outcome.tie_set.as_deref(), Some(&survivors[..]), "{name}");
            }

            // every evaluated candidate agrees bitwise with the oracle, and
            // evaluated + pruned partition the candidate set
            for (dialect, q) in &scored {
                if let Some(s) = outcome.breakdowns.get(dialect) {
                    assert_eq!(s.score.to_bits(), q.to_bits(), "{name} {dialect}");
                } else {
                    assert!(outcome.pruned.contains(dialect), "{name} {dialect} unaccounted");
                    assert!(*q < best, "{name} {dialect} pruned but tied for best");
                }
            }
            assert_eq!(
                outcome.breakdowns.len() + outcome.pruned.len(),
                candidates.len(),
                "{name}"
            );
        }
        assert!(start.elapsed() < Duration::from_secs(120), "200-file oracle run too slow");
    });
}

#[test]
fn criterion_4_format_parse_round_trip() {
    criterion(4, "1000 random tables round-trip through format and parse", || {
        let mut rng = ChaCha8Rng::seed_from_u64(41);
        let delimiters = [',', ';', '\t', '|', '^', ':'];
        let quotes = [None, Some('"'), Some('\''), Some('~')];
        let escapes = [None, Some('\\'), Some('/')];

        for case in 0..1000 {
            // draw a well-formed dialect (components distinct unless absent)
            let (dialect, quote, escape) = loop {
                let d = delimiters[rng.random_range(0..delimiters.len())];
                let q = quotes[rng.random_range(0..quotes.len())];
                let e = escapes[rng.random_range(0..escapes.len())];
                if let Ok(dia) = Dialect::new(Some(d), q, e) {
                    break (dia, q, e);
                }
            };

            // cells draw from plain text, plus the dialect's own special
            // characters and newlines when the quote char can protect them
            let mut pool = vec!['a', 'b', 'z', '1', '9', '.', ' ', 'é'];
            if let Some(q) = quote {
                pool.extend([dialect.delimiter().unwrap(), q, '\n']);
            }
            if let Some(e) = escape {
                pool.push(e);
            }

            let rows = rng.random_range(1..=6);
            let table = CellTable::new(
                (0..rows)
                    .map(|_| {
                        let cols = rng.random_range(1..=5);
                        (0..cols)
                            .map(|_| {
                                let len = rng.random_range(0..=8);
                                (0..len)
                                    .map(|_| pool[rng.random_range(0..pool.len())])
                                    .collect()
                            })
                            .collect()
                    })
                    .collect(),
            );

            let text = format(&table, &dialect, &FormatOptions::default())
                .unwrap_or_else(|e| panic!("case {case}: format refused: {e}"));
            let parsed = parse(&text, &dialect);
            assert_eq!(parsed.table, table, "case {case} under {dialect}:\n{text:?}");
            assert!(
                !parsed
                    .warnings
                    .iter()
                    .any(|w| matches!(w, ParseWarning::UnterminatedQuote { .. })),
                "case {case}: clean output reparsed with warnings"
            );
        }
    });
}

#[test]
fn criterion_5_type_golden_suite() {
    criterion(5, "cell type golden suite classifies 100% as pinned", || {
        let golden = [
            ("", DataType::Empty),
            ("1,234.56", DataType::NumberGrouped),
            ("1.234,56", DataType::NumberGrouped),
            ("123e10", DataType::NumberPlain),
            ("16:45", DataType::Time),
            ("16:45:10", DataType::Time),
            ("3 degrees", DataType::Alphanumeric),
            ("NW1 2DB", DataType::Alphanumeric),
            ("n/a", DataType::Na),
            ("N/A", DataType::Na),
            ("€12.50", DataType::Currency),
            ("12.5%", DataType::Percentage),
            ("2021-03-04T16:45", DataType::DateTime),
            // ordering effect: the alphanumeric grammar runs first
            ("nan", DataType::Alphanumeric),
            ("NaN", DataType::Alphanumeric),
        ];
        let failures: Vec<String> = golden
            .iter()
            .filter(|(cell, want)| detect_type(cell) != *want)
            .map(|(cell, want)| format!("{cell:?} => {} (want {want:?})", detect_type(cell)))
            .collect();
        assert!(failures.is_empty(), "misclassified: {failures:?}");
    });
}

#[test]
fn criterion_6_synthetic_corpus_accuracy() {
    criterion(6, "full detector clears accuracy targets on 500-file corpus", || {
        let start = Instant::now();
        let corpus = &*CORPUS;
        let labels: Vec<_> = corpus.files.iter().map(|f| f.record.clone()).collect();

        // the corpus must actually span the advertised dialect space
        let delims: BTreeSet<_> =
            labels.iter().filter_map(|l| l.dialect.delimiter()).collect();
        let quotes: BTreeSet<_> = labels.iter().map(|l| l.dialect.quote_char()).collect();
        let escapes: BTreeSet<_> = labels.iter().map(|l| l.dialect.escape_char()).collect();
        assert!(delims.len() >= 8, "corpus spans only {delims:?}");
        assert_eq!(quotes.len(), 4, "corpus spans only {quotes:?}");
        assert_eq!(escapes.len(), 2, "corpus must mix escaped and unescaped files");

        let run = |variant| {
            let opts = EvalOptions { variant, ..Default::default() };
            evaluate(corpus.dir.path(), &labels, &opts).expect("evaluation")
        };
        let full = run(DetectorVariant::Full);
        let pattern_only = run(DetectorVariant::PatternOnly);
        let type_only = run(DetectorVariant::TypeOnly);
        let no_tie_break = run(DetectorVariant::NoTieBreak);

        let clean_labels: Vec<_> = corpus
            .files
            .iter()
            .filter(|f| !f.mess.any())
            .map(|f| f.record.clone())
            .collect();
        assert!(clean_labels.len() >= 50, "too few mess-free files to judge");
        let clean = evaluate(
            corpus.dir.path(),
            &clean_labels,
            &EvalOptions { variant: DetectorVariant::Full, ..Default::default() },
        )
        .expect("clean-subset evaluation");

        let acc = full.overall.full_accuracy();
        assert!(acc >= 0.95, "full-dialect accuracy {acc:.4} below 0.95");
        let clean_acc = clean.overall.full_accuracy();
        assert!(clean_acc >= 0.99, "mess-free accuracy {clean_acc:.4} below 0.99");
        assert!(
            acc >= pattern_only.overall.full_accuracy(),
            "pattern-only beat the full scorer: {acc:.4} < {:.4}",
            pattern_only.overall.full_accuracy()
        );
        assert!(
            acc >= type_only.overall.full_accuracy(),
            "type-only beat the full scorer: {acc:.4} < {:.4}",
            type_only.overall.full_accuracy()
        );
        let miss = |r: &csvscout::evalgen::AccuracyReport| r.overall.files - r.overall.full;
        assert!(
            miss(&no_tie_break) >= miss(&full),
            "tie-breaking made things worse: {} vs {}",
            miss(&no_tie_break),
            miss(&full)
        );
        assert!(start.elapsed() < Duration::from_secs(600), "corpus evaluation too slow");
    });
}

#[test]
fn criterion_7_quote_masking_and_unusual_dialects() {
    criterion(7, "masked dialect excluded; caret/tilde dialect detected", || {
        // every comma sits inside quotes, so the comma+quote reading is
        // never even a candidate
        let fully_quoted = "\"a,b\"\n\"c,d\"\n";
        let masked = Dialect::new(Some(','), Some('"'), None).unwrap();
        let candidates = get_dialects(fully_quoted, &CharacterPolicy::default());
        assert!(!candidates.contains(&masked), "masked dialect still offered");

        let caret = "a^b^c\n1^2^3\n~x^y~^z^w";
        let outcome = detect(caret, DetectorVariant::Full, &DetectParams::default());
        assert_eq!(outcome.dialect, Some(Dialect::new(Some('^'), Some('~'), None).unwrap()));
    });
}

#[test]
fn criterion_8_detection_speed_and_scaling() {
    criterion(8, "sub-second mean detection; ~linear growth in file size", || {
        let corpus = &*CORPUS;
        let labels: Vec<_> =
            corpus.files.iter().take(100).map(|f| f.record.clone()).collect();
        for label in &labels {
            let len = std::fs::metadata(corpus.dir.path().join(&label.filename))
                .expect("corpus file")
                .len();
            assert!(len <= 100 * 1024, "{} exceeds 100 KB", label.filename);
        }
        let opts = EvalOptions { parallel: false, timing: true, ..Default::default() };
        let report = evaluate(corpus.dir.path(), &labels, &opts).expect("timed evaluation");
        let timing = report.timing.expect("timing requested");
        assert!(
            timing.mean_ms < 1000.0,
            "mean detection time {:.1} ms is not sub-second",
            timing.mean_ms
        );

        // doubling the input at a fixed candidate set should roughly double
        // the cost; allow 2.5x plus scheduler noise, best of three attempts
        let row = "alpha,beta,gamma,delta,epsilon\n";
        let base = row.repeat(75 * 1024 / row.len());
        let double = row.repeat(2 * 75 * 1024 / row.len());
        assert_eq!(
            get_dialects(&base, &CharacterPolicy::default()).len(),
            get_dialects(&double, &CharacterPolicy::default()).len()
        );
        let median_ms = |text: &str| {
            let mut runs: Vec<f64> = (0..9)
                .map(|_| {
                    let t = Instant::now();
                    let out = detect(text, DetectorVariant::Full, &DetectParams::default());
                    assert!(out.is_detected());
                    t.elapsed().as_secs_f64() * 1e3
                })
                .collect();
            runs.sort_by(f64::total_cmp);
            runs[runs.len() / 2]
        };
        let ok = (0..3).any(|_| {
            let small = median_ms(&base);
            let large = median_ms(&double);
            large <= 2.5 * small
        });
        assert!(ok, "doubling input more than 2.5x'd the median detection time");
    });
}

#[test]
fn criterion_9_byte_identical_outputs() {
    criterion(9, "detect and evaluate emit byte-identical JSON across runs", || {
        let corpus = &*CORPUS;
        let text = corpus_text(corpus, &corpus.files[0]);
        let a = detect(&text, DetectorVariant::Full, &DetectParams::default());
        let b = detect(&text, DetectorVariant::Full, &DetectParams::default());
        assert_eq!(a.to_json().to_string(), b.to_json().to_string());

        let labels: Vec<_> =
            corpus.files.iter().take(60).map(|f| f.record.clone()).collect();
        let render = |parallel: bool| {
            let opts = EvalOptions { parallel, ..Default::default() };
            evaluate(corpus.dir.path(), &labels, &opts)
                .expect("evaluation")
                .to_json()
                .to_string()
        };
        let parallel_once = render(true);
        let parallel_again = render(true);
        let sequential = render(false);
        assert_eq!(parallel_once, parallel_again, "parallel run not reproducible");
        assert_eq!(parallel_once, sequential, "parallel and sequential reports differ");
    });
}
