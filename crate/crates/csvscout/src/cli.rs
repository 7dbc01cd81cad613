//! Command-line interface: `detect`, `parse`, `evaluate`, `generate`, and
//! `dump-types` subcommands over the library.
//!
//! Machine-readable results go to stdout (JSON, one line per file for
//! `detect`); diagnostics and human-oriented detail go to stderr. Exit codes:
//! 0 when everything succeeded, 1 when detection ended in a tie or on empty
//! input, 2 on I/O or decoding errors.

use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use rayon::prelude::*;
use serde_json::json;

use crate::detector::{detect, DetectParams, DetectionStatus, DetectorVariant};
use crate::dialect::{CharacterPolicy, Dialect, DialectError};
use crate::evalgen::{self, evaluate, generate, EvalOptions, GeneratorSpec, MessSpec, Origin};
use crate::parser::{self, format, FormatOptions};
use crate::scoring::ScoreConstants;
use crate::typeinfer;

#[derive(Debug, Parser)]
#[command(
    name = "csvscout",
    version,
    about = "Detect the dialect of messy CSV files",
    propagate_version = true
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Detect the dialect of one or more files
    Detect(DetectArgs),
    /// Parse a file into rows under a given or detected dialect
    Parse(ParseArgs),
    /// Measure detection accuracy against a labeled corpus
    Evaluate(EvaluateArgs),
    /// Generate a labeled corpus of synthetic messy CSV files
    Generate(GenerateArgs),
    /// Print the type-detection registry as JSON
    DumpTypes,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Encoding {
    #[value(name = "utf-8")]
    Utf8,
    #[value(name = "latin-1")]
    Latin1,
}

#[derive(Debug, Args)]
pub struct DetectArgs {
    /// Files to detect
    #[arg(required = true)]
    pub files: Vec<PathBuf>,
    /// Scoring rule: full, pattern-only, type-only, no-tie-break, wrangler
    #[arg(long, default_value = "full", value_parser = parse_variant)]
    pub variant: DetectorVariant,
    /// Floor on a row pattern's contribution
    #[arg(long, default_value_t = 1e-3)]
    pub alpha: f64,
    /// Floor on the type score
    #[arg(long, default_value_t = 1e-10)]
    pub beta: f64,
    /// Input encoding
    #[arg(long, value_enum, default_value = "utf-8")]
    pub encoding: Encoding,
    /// Decode as latin-1 when UTF-8 decoding fails
    #[arg(long, alias = "latin-1-fallback")]
    pub latin1_fallback: bool,
    /// Print per-candidate scores to stderr
    #[arg(long, short = 'v')]
    pub verbose: bool,
    /// Omit wall-clock timings so output is byte-stable
    #[arg(long)]
    pub no_timing: bool,
    /// JSON file overriding the character policy
    #[arg(long)]
    pub policy: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ParseFormat {
    Json,
    Csv,
    Table,
}

#[derive(Debug, Args)]
pub struct ParseArgs {
    pub file: PathBuf,
    /// Delimiter ("" for none); omit all three components to auto-detect
    #[arg(long)]
    pub delimiter: Option<String>,
    /// Quote character ("" for none)
    #[arg(long)]
    pub quotechar: Option<String>,
    /// Escape character ("" for none)
    #[arg(long)]
    pub escapechar: Option<String>,
    /// Output format: json, csv (normalized to comma/double-quote), table
    #[arg(long, value_enum, default_value = "json")]
    pub output: ParseFormat,
    /// Input encoding
    #[arg(long, value_enum, default_value = "utf-8")]
    pub encoding: Encoding,
    /// Decode as latin-1 when UTF-8 decoding fails
    #[arg(long, alias = "latin-1-fallback")]
    pub latin1_fallback: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ReportFormat {
    Json,
    Table,
}

#[derive(Debug, Args)]
pub struct EvaluateArgs {
    /// Directory holding the corpus files
    #[arg(long)]
    pub corpus: PathBuf,
    /// JSON-lines label file (default: labels.jsonl inside the corpus)
    #[arg(long)]
    pub labels: Option<PathBuf>,
    /// Scoring rule: full, pattern-only, type-only, no-tie-break, wrangler
    #[arg(long, default_value = "full", value_parser = parse_variant)]
    pub variant: DetectorVariant,
    #[arg(long, value_enum, default_value = "json")]
    pub output: ReportFormat,
    /// Omit wall-clock timings so output is byte-stable
    #[arg(long)]
    pub no_timing: bool,
    /// Evaluate files one at a time instead of in parallel
    #[arg(long)]
    pub sequential: bool,
    #[arg(long, default_value_t = 1e-3)]
    pub alpha: f64,
    #[arg(long, default_value_t = 1e-10)]
    pub beta: f64,
}

#[derive(Debug, Args)]
pub struct GenerateArgs {
    /// Output directory for the corpus and its labels.jsonl
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    #[arg(long, default_value_t = 100)]
    pub count: usize,
    /// Delimiters to draw from, as one string (use \t for tab)
    #[arg(long, default_value = ",;\\t|^ :#")]
    pub delimiters: String,
    /// Quote characters to draw from; unquoted files are always possible
    #[arg(long, default_value = "\"'~")]
    pub quotes: String,
    #[arg(long, default_value_t = 0.25)]
    pub escape_prob: f64,
    #[arg(long, default_value_t = 8)]
    pub min_rows: usize,
    #[arg(long, default_value_t = 30)]
    pub max_rows: usize,
    #[arg(long, default_value_t = 2)]
    pub min_cols: usize,
    #[arg(long, default_value_t = 6)]
    pub max_cols: usize,
    /// Probability of leading non-tabular title lines
    #[arg(long, default_value_t = 0.08)]
    pub junk: f64,
    #[arg(long, default_value_t = 0.15)]
    pub comments: f64,
    #[arg(long, default_value_t = 0.15)]
    pub multiline: f64,
    #[arg(long, default_value_t = 0.2)]
    pub nested_quotes: f64,
    #[arg(long, default_value_t = 0.15)]
    pub ragged: f64,
    #[arg(long, default_value_t = 0.25)]
    pub empty_cells: f64,
    #[arg(long, default_value_t = 0.2)]
    pub stray_quotes: f64,
}

fn parse_variant(s: &str) -> Result<DetectorVariant, String> {
    s.parse()
}

// Decode bytes 1:1; every byte value is a valid latin-1 code point.
fn latin1(bytes: &[u8]) -> String {
    bytes.iter().map(|&b| b as char).collect()
}

fn decode(bytes: Vec<u8>, encoding: Encoding, latin1_fallback: bool) -> Result<String> {
    match encoding {
        Encoding::Latin1 => Ok(latin1(&bytes)),
        Encoding::Utf8 => match String::from_utf8(bytes) {
            Ok(s) => Ok(s),
            Err(err) if latin1_fallback => Ok(latin1(err.as_bytes())),
            Err(err) => anyhow::bail!(
                "invalid UTF-8 at byte {} (try --latin1-fallback or --encoding latin-1)",
                err.utf8_error().valid_up_to()
            ),
        },
    }
}

fn read_decoded(path: &Path, encoding: Encoding, latin1_fallback: bool) -> Result<String> {
    let bytes = fs::read(path).with_context(|| format!("reading {}", path.display()))?;
    decode(bytes, encoding, latin1_fallback)
        .with_context(|| format!("decoding {}", path.display()))
}

fn load_policy(path: Option<&Path>) -> Result<CharacterPolicy> {
    match path {
        None => Ok(CharacterPolicy::default()),
        Some(p) => {
            let text = fs::read_to_string(p)
                .with_context(|| format!("reading policy {}", p.display()))?;
            serde_json::from_str(&text).with_context(|| format!("parsing policy {}", p.display()))
        }
    }
}

// A dialect component given on the command line: "" means absent, otherwise
// exactly one character (with \t accepted for tab).
fn parse_component(value: &str) -> Result<Option<char>, DialectError> {
    let value = match value {
        "\\t" => "\t",
        other => other,
    };
    let mut chars = value.chars();
    match (chars.next(), chars.next()) {
        (None, _) => Ok(None),
        (Some(c), None) => Ok(Some(c)),
        _ => Err(DialectError::NotSingleChar(value.to_string())),
    }
}

// Characters from a CLI string, honoring \t and \\ escapes.
fn unescape_chars(s: &str) -> Vec<char> {
    let mut out = Vec::new();
    let mut chars = s.chars().peekable();
    while let Some(c) = chars.next() {
        if c == '\\' {
            match chars.peek() {
                Some('t') => {
                    chars.next();
                    out.push('\t');
                }
                Some('\\') => {
                    chars.next();
                    out.push('\\');
                }
                _ => out.push('\\'),
            }
        } else {
            out.push(c);
        }
    }
    out
}

// Everything one input file contributes to the terminal: a result line for
// stdout plus optional diagnostics for stderr, emitted together so parallel
// processing never interleaves output.
struct DetectReport {
    line: String,
    diagnostics: Vec<String>,
    detected: bool,
}

fn detect_one(file: &Path, args: &DetectArgs, params: &DetectParams) -> Result<DetectReport> {
    let text = read_decoded(file, args.encoding, args.latin1_fallback)?;
    let start = Instant::now();
    let outcome = detect(&text, args.variant, params);
    let runtime_ms = start.elapsed().as_secs_f64() * 1e3;

    let mut line = json!({
        "file": file.display().to_string(),
        "status": outcome.status,
        "dialect": outcome.dialect,
        "ties": outcome.tie_set,
    });
    if !args.no_timing {
        line["runtime_ms"] = json!(runtime_ms);
    }

    let mut diagnostics = Vec::new();
    if args.verbose {
        diagnostics.push(format!(
            "{}: {} candidates, {} pruned",
            file.display(),
            outcome.breakdowns.len() + outcome.pruned.len(),
            outcome.pruned.len()
        ));
        for (d, s) in &outcome.breakdowns {
            diagnostics.push(format!(
                "  {d}  score={:.6}  pattern={:.6}  type={:.6}",
                s.score, s.breakdown.pattern, s.breakdown.type_clamped
            ));
        }
    }
    match outcome.status {
        DetectionStatus::Detected => {}
        DetectionStatus::TieUnbroken => {
            let ties = outcome
                .tie_set
                .unwrap_or_default()
                .iter()
                .map(Dialect::to_string)
                .collect::<Vec<_>>()
                .join(", ");
            diagnostics.push(format!("{}: unbroken tie between {ties}", file.display()));
        }
        DetectionStatus::EmptyInput => {
            diagnostics.push(format!("{}: empty input", file.display()));
        }
    }
    Ok(DetectReport {
        line: line.to_string(),
        diagnostics,
        detected: outcome.status == DetectionStatus::Detected,
    })
}

fn run_detect(args: DetectArgs) -> Result<i32> {
    let params = DetectParams {
        constants: ScoreConstants { alpha: args.alpha, beta: args.beta },
        policy: load_policy(args.policy.as_deref())?,
    };
    // detect files in parallel, then emit reports whole, in input order
    let reports: Vec<Result<DetectReport>> =
        args.files.par_iter().map(|file| detect_one(file, &args, &params)).collect();
    let mut all_detected = true;
    for report in reports {
        let report = report?;
        println!("{}", report.line);
        for diagnostic in &report.diagnostics {
            eprintln!("{diagnostic}");
        }
        all_detected &= report.detected;
    }
    Ok(if all_detected { 0 } else { 1 })
}

fn run_parse(args: ParseArgs) -> Result<i32> {
    let text = read_decoded(&args.file, args.encoding, args.latin1_fallback)?;
    let explicit =
        args.delimiter.is_some() || args.quotechar.is_some() || args.escapechar.is_some();
    let dialect = if explicit {
        Dialect::new(
            parse_component(args.delimiter.as_deref().unwrap_or(""))?,
            parse_component(args.quotechar.as_deref().unwrap_or(""))?,
            parse_component(args.escapechar.as_deref().unwrap_or(""))?,
        )?
    } else {
        let outcome = detect(&text, DetectorVariant::Full, &DetectParams::default());
        match outcome.dialect {
            Some(d) => {
                eprintln!("{}: detected dialect {d}", args.file.display());
                d
            }
            None => {
                eprintln!(
                    "{}: no dialect detected ({}), pass --delimiter/--quotechar/--escapechar",
                    args.file.display(),
                    outcome.status
                );
                return Ok(1);
            }
        }
    };

    let out = parser::parse(&text, &dialect);
    for w in &out.warnings {
        eprintln!("{}: warning: {w}", args.file.display());
    }
    match args.output {
        ParseFormat::Json => {
            let v = json!({
                "dialect": dialect,
                "rows": out.table.rows,
                "patterns": out.patterns,
                "warnings": out.warnings,
            });
            println!("{v}");
        }
        ParseFormat::Csv => {
            let normalized = Dialect::new(Some(','), Some('"'), None).expect("valid dialect");
            print!("{}", format(&out.table, &normalized, &FormatOptions::default())?);
        }
        ParseFormat::Table => {
            let width = out.table.rows.iter().map(Vec::len).max().unwrap_or(0);
            let mut col_w = vec![0usize; width];
            for row in &out.table.rows {
                for (c, cell) in row.iter().enumerate() {
                    col_w[c] = col_w[c].max(cell.chars().count());
                }
            }
            for row in &out.table.rows {
                let line: Vec<String> = row
                    .iter()
                    .enumerate()
                    .map(|(c, cell)| format!("{:<w$}", cell.replace('\n', "\\n"), w = col_w[c]))
                    .collect();
                println!("{}", line.join(" | "));
            }
        }
    }
    Ok(0)
}

fn run_evaluate(args: EvaluateArgs) -> Result<i32> {
    let labels_path = args.labels.unwrap_or_else(|| args.corpus.join("labels.jsonl"));
    let labels = evalgen::read_labels(&labels_path)?;
    let opts = EvalOptions {
        variant: args.variant,
        parallel: !args.sequential,
        timing: !args.no_timing,
        params: DetectParams {
            constants: ScoreConstants { alpha: args.alpha, beta: args.beta },
            policy: CharacterPolicy::default(),
        },
    };
    let report = evaluate(&args.corpus, &labels, &opts)?;
    match args.output {
        ReportFormat::Json => println!("{}", report.to_json()),
        ReportFormat::Table => print!("{}", report.render_table()),
    }
    Ok(0)
}

fn run_generate(args: GenerateArgs) -> Result<i32> {
    let mut quotes: Vec<Option<char>> = vec![None];
    quotes.extend(unescape_chars(&args.quotes).into_iter().map(Some));
    let spec = GeneratorSpec {
        seed: args.seed,
        count: args.count,
        delimiters: unescape_chars(&args.delimiters),
        quotes,
        escape: '\\',
        escape_probability: args.escape_prob,
        rows: (args.min_rows, args.max_rows),
        cols: (args.min_cols, args.max_cols),
        junk_fraction: args.junk,
        mess: MessSpec {
            comments: args.comments,
            multiline: args.multiline,
            nested_quotes: args.nested_quotes,
            ragged: args.ragged,
            empty_cells: args.empty_cells,
            stray_quotes: args.stray_quotes,
        },
    };
    let generated = generate(&args.out, &spec)?;
    let by_origin = generated.iter().filter(|g| g.record.origin == Origin::Synthetic).count();
    let messy = generated.iter().filter(|g| g.mess.any()).count();
    println!(
        "{}",
        json!({
            "dir": args.out.display().to_string(),
            "files": generated.len(),
            "synthetic": by_origin,
            "messy": messy,
            "labels": args.out.join("labels.jsonl").display().to_string(),
        })
    );
    Ok(0)
}

/// Execute a parsed command line, returning the process exit code.
pub fn run(cli: Cli) -> i32 {
    let result = match cli.command {
        Command::Detect(args) => run_detect(args),
        Command::Parse(args) => run_parse(args),
        Command::Evaluate(args) => run_evaluate(args),
        Command::Generate(args) => run_generate(args),
        Command::DumpTypes => {
            println!(
                "{}",
                serde_json::to_string_pretty(&typeinfer::registry().to_json())
                    .expect("registry serializes")
            );
            Ok(0)
        }
    };
    match result {
        Ok(code) => code,
        Err(err) => {
            eprintln!("csvscout: {err:#}");
            2
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use clap::CommandFactory;

    #[test]
    fn cli_definition_is_consistent() {
        Cli::command().debug_assert();
    }

    #[test]
    fn decoding_rules() {
        assert_eq!(decode(b"ab".to_vec(), Encoding::Utf8, false).unwrap(), "ab");
        assert_eq!(decode(vec![0xe9], Encoding::Latin1, false).unwrap(), "é");
        assert_eq!(decode(vec![b'a', 0xe9], Encoding::Utf8, true).unwrap(), "aé");
        let err = decode(vec![b'a', 0xe9], Encoding::Utf8, false).unwrap_err();
        assert!(err.to_string().contains("byte 1"), "{err}");
    }

    #[test]
    fn component_strings() {
        assert_eq!(parse_component("").unwrap(), None);
        assert_eq!(parse_component(",").unwrap(), Some(','));
        assert_eq!(parse_component("\\t").unwrap(), Some('\t'));
        assert!(parse_component(";;").is_err());
    }

    #[test]
    fn char_list_unescaping() {
        assert_eq!(unescape_chars(",;\\t|"), vec![',', ';', '\t', '|']);
        assert_eq!(unescape_chars("\\\\"), vec!['\\']);
        assert_eq!(unescape_chars("ab\\"), vec!['a', 'b', '\\']);
    }

    #[test]
    fn variant_parser_is_wired_to_the_detector() {
        assert_eq!(parse_variant("wrangler").unwrap(), DetectorVariant::Wrangler);
        assert!(parse_variant("nope").is_err());
    }
}
