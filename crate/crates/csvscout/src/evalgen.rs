//! Labeled-corpus tooling: generate synthetic messy CSV files with known
//! dialects, read and write label files, derive labels for pristine files,
//! and measure detection accuracy against labels.
//!
//! Labels live in a JSON-lines file, one object per CSV file:
//! `{"filename": ..., "delimiter": ..., "quotechar": ..., "escapechar": ...,
//! "origin": ...}` with `""` for an absent dialect component.
//!
//! The generator is seeded and fully deterministic: the same spec always
//! produces byte-identical corpora. Every generated file is verified before
//! it is written: parsing it under its own label must reproduce the intended
//! table exactly, and the parsed table must survive a format round-trip.

use std::collections::BTreeSet;
use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use anyhow::{ensure, Context, Result};
use rand::{RngExt, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_json::json;

use crate::detector::{detect, DetectParams, DetectorVariant};
use crate::dialect::{get_dialects, CharacterPolicy, Dialect};
use crate::parser::{self, format, FormatOptions};

/// Where a label came from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Origin {
    /// Labeled by a person.
    Human,
    /// Derived mechanically from a pristine file.
    Automatic,
    /// Produced by the corpus generator.
    Synthetic,
}

impl Origin {
    pub const ALL: [Origin; 3] = [Origin::Human, Origin::Automatic, Origin::Synthetic];

    pub fn as_str(&self) -> &'static str {
        match self {
            Origin::Human => "human",
            Origin::Automatic => "automatic",
            Origin::Synthetic => "synthetic",
        }
    }
}

impl std::fmt::Display for Origin {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

/// One labeled file: its name, its true dialect, and the label's origin.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LabeledRecord {
    pub filename: String,
    #[serde(flatten)]
    pub dialect: Dialect,
    pub origin: Origin,
}

impl LabeledRecord {
    /// A "standard" file is comma-delimited, quoted with `"` or nothing, and
    /// escape-free; everything else counts as messy.
    pub fn standard(&self) -> bool {
        self.dialect.delimiter() == Some(',')
            && matches!(self.dialect.quote_char(), None | Some('"'))
            && self.dialect.escape_char().is_none()
    }
}

/// Read a JSON-lines label file. Blank lines are ignored.
pub fn read_labels(path: &Path) -> Result<Vec<LabeledRecord>> {
    let text = fs::read_to_string(path)
        .with_context(|| format!("reading labels from {}", path.display()))?;
    let mut out = Vec::new();
    for (i, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let rec: LabeledRecord = serde_json::from_str(line)
            .with_context(|| format!("bad label on line {} of {}", i + 1, path.display()))?;
        out.push(rec);
    }
    Ok(out)
}

/// Write labels as JSON lines.
pub fn write_labels(path: &Path, records: &[LabeledRecord]) -> Result<()> {
    let mut text = String::new();
    for rec in records {
        text.push_str(&serde_json::to_string(rec).expect("labels always serialize"));
        text.push('\n');
    }
    fs::write(path, text).with_context(|| format!("writing labels to {}", path.display()))
}

/// Per-file knobs for how messy generated files get. Each rate is the
/// probability that a generated file exhibits the feature at all.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MessSpec {
    /// `#`-prefixed comment lines between records.
    pub comments: f64,
    /// Quoted cells containing record separators.
    pub multiline: f64,
    /// Cells containing the quote char itself.
    pub nested_quotes: f64,
    /// Rows with a deviating cell count.
    pub ragged: f64,
    /// Empty cells sprinkled through the table.
    pub empty_cells: f64,
    /// Quote-ish characters used as plain data.
    pub stray_quotes: f64,
}

impl Default for MessSpec {
    fn default() -> Self {
        MessSpec {
            comments: 0.15,
            multiline: 0.15,
            nested_quotes: 0.2,
            ragged: 0.15,
            empty_cells: 0.25,
            stray_quotes: 0.2,
        }
    }
}

/// Full recipe for a synthetic corpus.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GeneratorSpec {
    pub seed: u64,
    pub count: usize,
    /// Delimiters drawn uniformly per file.
    pub delimiters: Vec<char>,
    /// Quote chars drawn uniformly per file; `None` for unquoted files.
    pub quotes: Vec<Option<char>>,
    /// The escape character used when a file rolls an escape.
    pub escape: char,
    /// Probability a file uses the escape character.
    pub escape_probability: f64,
    /// Inclusive range of data rows per file.
    pub rows: (usize, usize),
    /// Inclusive range of columns per file.
    pub cols: (usize, usize),
    /// Probability a file starts with non-tabular title lines.
    pub junk_fraction: f64,
    pub mess: MessSpec,
}

impl Default for GeneratorSpec {
    fn default() -> Self {
        GeneratorSpec {
            seed: 1,
            count: 100,
            delimiters: vec![',', ';', '\t', '|', '^', ' ', ':', '#'],
            quotes: vec![None, Some('"'), Some('\''), Some('~')],
            escape: '\\',
            escape_probability: 0.25,
            rows: (8, 30),
            cols: (2, 6),
            junk_fraction: 0.08,
            mess: MessSpec::default(),
        }
    }
}

/// Which mess features a particular generated file actually has.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize)]
pub struct MessFlags {
    pub comments: bool,
    pub multiline: bool,
    pub nested_quotes: bool,
    pub ragged: bool,
    pub empty_cells: bool,
    pub stray_quotes: bool,
    pub junk: bool,
}

impl MessFlags {
    pub fn any(&self) -> bool {
        self.comments
            || self.multiline
            || self.nested_quotes
            || self.ragged
            || self.empty_cells
            || self.stray_quotes
            || self.junk
    }
}

/// A generated file's label plus the mess features it carries.
#[derive(Debug, Clone, PartialEq)]
pub struct GeneratedFile {
    pub record: LabeledRecord,
    pub mess: MessFlags,
}

const WORDS: [&str; 32] = [
    "alpha", "beta", "gamma", "delta", "omega", "north", "south", "east", "west", "red",
    "green", "blue", "amber", "crystal", "ember", "falcon", "harbor", "island", "juniper",
    "kestrel", "lumen", "meadow", "nectar", "opal", "prairie", "quartz", "river", "summit",
    "timber", "umber", "violet", "willow",
];
const HEADERS: [&str; 12] = [
    "id", "name", "value", "count", "date", "time", "price", "city", "state", "code", "note",
    "total",
];
const STRAYS: [char; 3] = ['\'', '"', '~'];

#[derive(Debug, Clone, Copy, PartialEq)]
enum Kind {
    Int,
    Float,
    Grouped,
    Word,
    Phrase,
    Date,
    Time,
    DateTime,
    Currency,
    Percentage,
    Email,
    Url,
}

// Characters a kind's values may contain that could collide with a delimiter.
fn kind_risk(kind: Kind) -> &'static [char] {
    match kind {
        Kind::Int => &['-'],
        Kind::Float | Kind::Currency | Kind::Percentage => &['-', '.'],
        Kind::Grouped => &[',', '.'],
        Kind::Word => &[],
        Kind::Phrase => &[' '],
        Kind::Date => &['-', '.'],
        Kind::Time => &[':'],
        Kind::DateTime => &['-', ' ', ':'],
        Kind::Email => &['.', '@'],
        Kind::Url => &[':', '/', '.'],
    }
}

fn pick_kind(rng: &mut ChaCha8Rng, dialect: &Dialect) -> Kind {
    const POOL: [Kind; 16] = [
        Kind::Int,
        Kind::Int,
        Kind::Float,
        Kind::Float,
        Kind::Word,
        Kind::Word,
        Kind::Word,
        Kind::Phrase,
        Kind::Phrase,
        Kind::Date,
        Kind::Time,
        Kind::DateTime,
        Kind::Grouped,
        Kind::Currency,
        Kind::Percentage,
        Kind::Email,
    ];
    // a cell whose value contains the delimiter needs quoting or escaping
    let unprotected = dialect.quote_char().is_none() && dialect.escape_char().is_none();
    let d = dialect.delimiter().expect("generator dialects always split");
    for _ in 0..16 {
        let kind = if rng.random_bool(0.04) {
            Kind::Url
        } else {
            POOL[rng.random_range(0..POOL.len())]
        };
        if unprotected && kind_risk(kind).contains(&d) {
            continue;
        }
        return kind;
    }
    Kind::Word
}

fn word(rng: &mut ChaCha8Rng) -> String {
    WORDS[rng.random_range(0..WORDS.len())].to_string()
}

fn gen_cell(rng: &mut ChaCha8Rng, kind: Kind) -> String {
    match kind {
        Kind::Int => rng.random_range(-500i64..100_000).to_string(),
        Kind::Float => format!("{:.2}", rng.random_range(-100.0f64..10_000.0)),
        Kind::Grouped => {
            let mut s = rng.random_range(1i64..=999).to_string();
            for _ in 0..rng.random_range(1..=2) {
                s.push_str(&format!(",{:03}", rng.random_range(0i64..=999)));
            }
            if rng.random_bool(0.3) {
                s.push_str(&format!(".{:02}", rng.random_range(0i64..=99)));
            }
            s
        }
        Kind::Word => {
            let mut w = word(rng);
            if rng.random_bool(0.2) {
                w = format!("{}{}", w, rng.random_range(0..100));
            }
            if rng.random_bool(0.2) {
                let mut c = w.chars();
                w = c.next().unwrap().to_uppercase().collect::<String>() + c.as_str();
            }
            w
        }
        Kind::Phrase => {
            let n = rng.random_range(2..=3);
            (0..n).map(|_| word(rng)).collect::<Vec<_>>().join(" ")
        }
        Kind::Date => {
            let (y, m, d) =
                (rng.random_range(1995..=2030), rng.random_range(1..=12), rng.random_range(1..=28));
            match rng.random_range(0..3) {
                0 => format!("{y:04}-{m:02}-{d:02}"),
                1 => format!("{d:02}.{m:02}.{y:04}"),
                _ => format!("{m:02}-{d:02}-{y:04}"),
            }
        }
        Kind::Time => {
            let (h, m) = (rng.random_range(0..24), rng.random_range(0..60));
            if (1..=9).contains(&h) && rng.random_bool(0.5) {
                format!("{h}:{m:02}")
            } else {
                format!("{h:02}:{m:02}")
            }
        }
        Kind::DateTime => {
            let (y, m, d) =
                (rng.random_range(1995..=2030), rng.random_range(1..=12), rng.random_range(1..=28));
            let (hh, mm, ss) =
                (rng.random_range(0..24), rng.random_range(0..60), rng.random_range(0..60));
            format!("{y:04}-{m:02}-{d:02} {hh:02}:{mm:02}:{ss:02}")
        }
        Kind::Currency => {
            let sym = ['$', '€', '£'][rng.random_range(0..3)];
            format!("{sym}{}", rng.random_range(1i64..=9_999))
        }
        Kind::Percentage => {
            if rng.random_bool(0.5) {
                format!("{}%", rng.random_range(0i64..=100))
            } else {
                format!("{:.1}%", rng.random_range(0.0f64..100.0))
            }
        }
        Kind::Email => {
            let tld = ["com", "org", "io"][rng.random_range(0..3)];
            format!("{}{}@{}.{tld}", word(rng), rng.random_range(1..100), word(rng))
        }
        Kind::Url => {
            let scheme = ["https://", "http://", "www."][rng.random_range(0..3)];
            format!("{scheme}{}.example.com/{}", word(rng), word(rng))
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum Strategy {
    Plain,
    Quoted,
    Escaped,
}

fn plan(cell: &str, dialect: &Dialect, force_escape: bool, rng: &mut ChaCha8Rng) -> Result<Strategy> {
    let (d, q, e) = (dialect.delimiter(), dialect.quote_char(), dialect.escape_char());
    let has_d = d.is_some_and(|c| cell.contains(c));
    let has_nl = cell.contains('\n') || cell.contains('\r');
    let has_q = q.is_some_and(|c| cell.contains(c));
    let has_e = e.is_some_and(|c| cell.contains(c));
    let opens_section = q.is_some() && cell.chars().next() == q;
    if force_escape {
        ensure!(e.is_some() && !has_nl, "cell {cell:?} cannot be escape-serialized");
        return Ok(Strategy::Escaped);
    }
    if has_nl || opens_section {
        ensure!(q.is_some(), "cell {cell:?} needs a quote char");
        return Ok(Strategy::Quoted);
    }
    if has_d || has_q || has_e {
        if q.is_some() {
            return Ok(Strategy::Quoted);
        }
        ensure!(e.is_some(), "cell {cell:?} cannot be serialized under {dialect}");
        return Ok(Strategy::Escaped);
    }
    if q.is_some() && rng.random_bool(0.15) {
        return Ok(Strategy::Quoted); // gratuitous quoting is common in the wild
    }
    Ok(Strategy::Plain)
}

fn serialize_cell(cell: &str, dialect: &Dialect, strategy: Strategy, rng: &mut ChaCha8Rng) -> String {
    match strategy {
        Strategy::Plain => cell.to_string(),
        Strategy::Escaped => {
            let e = dialect.escape_char().expect("escaped strategy needs an escape char");
            let specials: Vec<char> =
                [dialect.delimiter(), dialect.quote_char(), Some(e)].into_iter().flatten().collect();
            let mut s = String::new();
            for c in cell.chars() {
                if specials.contains(&c) {
                    s.push(e);
                }
                s.push(c);
            }
            s
        }
        Strategy::Quoted => {
            let q = dialect.quote_char().expect("quoted strategy needs a quote char");
            let e = dialect.escape_char();
            let mut body = match e {
                Some(e) => cell.replace(e, &format!("{e}{e}")),
                None => cell.to_string(),
            };
            body = match e {
                Some(e) if rng.random_bool(0.5) => body.replace(q, &format!("{e}{q}")),
                _ => body.replace(q, &format!("{q}{q}")),
            };
            format!("{q}{body}{q}")
        }
    }
}

fn comment_line(rng: &mut ChaCha8Rng, delimiter: char) -> String {
    let sep = if delimiter == ' ' { "_" } else { " " };
    format!("#{}{}{}{}", sep, word(rng), sep, word(rng))
}

fn junk_line(rng: &mut ChaCha8Rng, delimiter: char) -> String {
    let year = rng.random_range(2000..=2030);
    if delimiter == ' ' {
        format!("{}{year}", word(rng))
    } else {
        format!("{} {} {year}", word(rng), word(rng))
    }
}

fn synthesize(rng: &mut ChaCha8Rng, spec: &GeneratorSpec) -> Result<(String, Dialect, MessFlags)> {
    let d = spec.delimiters[rng.random_range(0..spec.delimiters.len())];
    let mut q = spec.quotes[rng.random_range(0..spec.quotes.len())];
    let e = if rng.random_bool(spec.escape_probability.clamp(0.0, 1.0)) {
        Some(spec.escape)
    } else {
        None
    };
    if e.is_some() && q.is_none() {
        // files that escape also quote, otherwise the escape never earns its keep
        let real: Vec<char> = spec.quotes.iter().flatten().copied().collect();
        ensure!(!real.is_empty(), "escape generation needs a non-empty quote char pool");
        q = Some(real[rng.random_range(0..real.len())]);
    }
    let dialect = Dialect::new(Some(d), q, e)
        .with_context(|| format!("generator drew colliding components {d:?} {q:?} {e:?}"))?;

    let m = &spec.mess;
    let flags = MessFlags {
        comments: d != '#' && rng.random_bool(m.comments.clamp(0.0, 1.0)),
        multiline: q.is_some() && rng.random_bool(m.multiline.clamp(0.0, 1.0)),
        nested_quotes: q.is_some() && rng.random_bool(m.nested_quotes.clamp(0.0, 1.0)),
        ragged: rng.random_bool(m.ragged.clamp(0.0, 1.0)),
        empty_cells: rng.random_bool(m.empty_cells.clamp(0.0, 1.0)),
        stray_quotes: rng.random_bool(m.stray_quotes.clamp(0.0, 1.0)),
        junk: rng.random_bool(spec.junk_fraction.clamp(0.0, 1.0)),
    };

    ensure!(spec.rows.0 >= 1 && spec.rows.0 <= spec.rows.1, "bad row range");
    ensure!(spec.cols.0 >= 1 && spec.cols.0 <= spec.cols.1, "bad column range");
    let n_rows = rng.random_range(spec.rows.0..=spec.rows.1);
    let n_cols = rng.random_range(spec.cols.0..=spec.cols.1);
    let kinds: Vec<Kind> = (0..n_cols).map(|_| pick_kind(rng, &dialect)).collect();

    let header = rng.random_bool(0.7);
    let mut data: Vec<Vec<String>> = Vec::new();
    if header {
        data.push((0..n_cols).map(|_| HEADERS[rng.random_range(0..HEADERS.len())].to_string()).collect());
    }
    for _ in 0..n_rows {
        let mut row: Vec<String> = kinds.iter().map(|&k| gen_cell(rng, k)).collect();
        for cell in &mut row {
            if rng.random_bool(0.02) {
                *cell = if rng.random_bool(0.5) { "n/a" } else { "N/A" }.to_string();
            }
        }
        data.push(row);
    }
    let first_data = usize::from(header);

    // pick distinct data cells for the features that need one
    let mut reserved: BTreeSet<(usize, usize)> = BTreeSet::new();
    let pick_cell = |rng: &mut ChaCha8Rng, reserved: &mut BTreeSet<(usize, usize)>| {
        for _ in 0..32 {
            let r = rng.random_range(first_data..first_data + n_rows);
            let c = rng.random_range(0..n_cols);
            if reserved.insert((r, c)) {
                return Some((r, c));
            }
        }
        None
    };

    let mut forced_escape: BTreeSet<(usize, usize)> = BTreeSet::new();
    if e.is_some() {
        // at least one escape that provably fires: a delimiter escaped outside quotes
        if let Some((r, c)) = pick_cell(rng, &mut reserved) {
            data[r][c] = format!("{}{}{}", word(rng), d, word(rng));
            forced_escape.insert((r, c));
        }
    }
    if q.is_some() {
        // at least one quoted cell that earns its quotes
        if let Some((r, c)) = pick_cell(rng, &mut reserved) {
            data[r][c] = format!("{}{}{}", word(rng), d, word(rng));
        }
    }
    if flags.multiline {
        for _ in 0..rng.random_range(1..=2) {
            if let Some((r, c)) = pick_cell(rng, &mut reserved) {
                data[r][c] = format!("{}\n{}", word(rng), word(rng));
            }
        }
    }
    if flags.nested_quotes {
        let qc = q.expect("flag only set for quoted dialects");
        for _ in 0..rng.random_range(1..=2) {
            if let Some((r, c)) = pick_cell(rng, &mut reserved) {
                let sep = if d == ' ' { "" } else { " " };
                data[r][c] = format!("{}{sep}{qc}{}{qc}", word(rng), word(rng));
            }
        }
    }
    if flags.stray_quotes {
        let choices: Vec<char> =
            STRAYS.iter().copied().filter(|&s| Some(s) != q && s != d && Some(s) != e).collect();
        for _ in 0..rng.random_range(1..=3) {
            if let (Some((r, c)), false) = (pick_cell(rng, &mut reserved), choices.is_empty()) {
                let stray = choices[rng.random_range(0..choices.len())];
                let mut chars: Vec<char> = data[r][c].chars().collect();
                if chars.is_empty() {
                    chars.push('x');
                }
                let at = rng.random_range(1..=chars.len());
                chars.insert(at, stray);
                data[r][c] = chars.into_iter().collect();
            }
        }
    }
    if flags.empty_cells {
        for (r, row) in data.iter_mut().enumerate().skip(first_data) {
            for (c, cell) in row.iter_mut().enumerate() {
                if !reserved.contains(&(r, c)) && rng.random_bool(0.12) {
                    cell.clear();
                }
            }
        }
    }
    if flags.ragged {
        for _ in 0..rng.random_range(1..=2) {
            let r = rng.random_range(first_data..data.len());
            if data[r].iter().enumerate().any(|(c, _)| reserved.contains(&(r, c))) {
                continue; // keep guarantee cells intact
            }
            if rng.random_bool(0.5) && data[r].len() > 1 {
                data[r].pop();
            } else {
                let extra = gen_cell(rng, Kind::Word);
                data[r].push(extra);
            }
        }
    }

    // serialize records, interleaving comment and junk lines
    let mut records: Vec<(String, Vec<String>)> = Vec::new();
    if flags.junk {
        for _ in 0..rng.random_range(1..=2) {
            let line = junk_line(rng, d);
            records.push((line.clone(), vec![line]));
        }
    }
    let comment_slots: BTreeSet<usize> = if flags.comments {
        let n = rng.random_range(1..=2);
        let mut s = BTreeSet::new();
        while s.len() < n {
            s.insert(rng.random_range(0..=data.len()));
        }
        s
    } else {
        BTreeSet::new()
    };
    for (r, row) in data.iter().enumerate() {
        if comment_slots.contains(&r) {
            let line = comment_line(rng, d);
            records.push((line.clone(), vec![line]));
        }
        let mut cells = Vec::with_capacity(row.len());
        for (c, cell) in row.iter().enumerate() {
            let strategy = plan(cell, &dialect, forced_escape.contains(&(r, c)), rng)?;
            cells.push(serialize_cell(cell, &dialect, strategy, rng));
        }
        records.push((cells.join(&d.to_string()), row.clone()));
    }
    if comment_slots.contains(&data.len()) {
        let line = comment_line(rng, d);
        records.push((line.clone(), vec![line]));
    }

    let newline = if rng.random_bool(0.2) { "\r\n" } else { "\n" };
    let mut text = String::new();
    for (line, _) in &records {
        text.push_str(line);
        text.push_str(newline);
    }
    let last_nonempty = records.last().is_some_and(|(line, _)| !line.is_empty());
    if last_nonempty && rng.random_bool(0.1) {
        text.truncate(text.len() - newline.len());
    }
    let expected: Vec<Vec<String>> = records.into_iter().map(|(_, row)| row).collect();

    // a generated file must parse back to its intended table under its label,
    // and that table must survive a format round-trip
    let parsed = parser::parse(&text, &dialect);
    ensure!(
        parsed.table.rows == expected,
        "generated file does not parse back to its intended table under {dialect}"
    );
    let reformatted = format(&parsed.table, &dialect, &FormatOptions::default())
        .context("reformatting a generated table")?;
    ensure!(
        parser::parse(&reformatted, &dialect).table == parsed.table,
        "format round-trip failed under {dialect}"
    );
    // the label must be discoverable from the file's own characters, or no
    // candidate-based detector can ever be scored fairly on it (URL filtering
    // can swallow the only escape occurrence, for example)
    ensure!(
        get_dialects(&text, &CharacterPolicy::default()).contains(&dialect),
        "label dialect is not a candidate for its own file under {dialect}"
    );

    Ok((text, dialect, flags))
}

/// Generate `spec.count` labeled files plus `labels.jsonl` into `dir`. Files
/// are named `file_000000.csv` onward. If any write fails, everything written
/// so far is removed so a half-written corpus never looks valid.
pub fn generate(dir: &Path, spec: &GeneratorSpec) -> Result<Vec<GeneratedFile>> {
    ensure!(spec.count > 0, "spec.count must be positive");
    ensure!(!spec.delimiters.is_empty(), "spec.delimiters must not be empty");
    ensure!(!spec.quotes.is_empty(), "spec.quotes must not be empty");
    fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;

    let mut out = Vec::with_capacity(spec.count);
    let mut files: Vec<(String, String)> = Vec::with_capacity(spec.count);
    for i in 0..spec.count {
        // a draw can be rejected by the self-checks (e.g. the label not being
        // recoverable from the file); redraw deterministically, a few times
        let mut result = None;
        for attempt in 0..32u64 {
            let mut rng = ChaCha8Rng::seed_from_u64(
                spec.seed
                    ^ (i as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15).wrapping_add(i as u64)
                    ^ attempt.wrapping_mul(0xD1B5_4A32_D192_ED03),
            );
            result = Some(synthesize(&mut rng, spec));
            if matches!(result, Some(Ok(_))) {
                break;
            }
        }
        let (text, dialect, mess) = result
            .expect("at least one attempt")
            .with_context(|| format!("generating file {i}"))?;
        let filename = format!("file_{i:06}.csv");
        files.push((filename.clone(), text));
        out.push(GeneratedFile {
            record: LabeledRecord { filename, dialect, origin: Origin::Synthetic },
            mess,
        });
    }

    let labels: Vec<LabeledRecord> = out.iter().map(|g| g.record.clone()).collect();
    let mut written: Vec<PathBuf> = Vec::new();
    if let Err(err) = write_corpus(dir, &files, &labels, &mut written) {
        // never leave a half-written corpus looking valid
        for path in &written {
            let _ = fs::remove_file(path);
        }
        return Err(err);
    }
    Ok(out)
}

fn write_corpus(
    dir: &Path,
    files: &[(String, String)],
    labels: &[LabeledRecord],
    written: &mut Vec<PathBuf>,
) -> Result<()> {
    for (name, text) in files {
        let path = dir.join(name);
        fs::write(&path, text).with_context(|| format!("writing {}", path.display()))?;
        written.push(path);
    }
    let labels_path = dir.join("labels.jsonl");
    written.push(labels_path.clone());
    write_labels(&labels_path, labels)
}

/// Structural requirements a file must meet, under exactly one candidate
/// dialect, for that dialect to count as its mechanically derived label.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct StrictTests {
    pub min_rows: usize,
    pub min_cols: usize,
    pub constant_width: bool,
    pub no_empty_cells: bool,
    pub no_quote_chars: bool,
    pub no_warnings: bool,
}

impl Default for StrictTests {
    fn default() -> Self {
        StrictTests {
            min_rows: 2,
            min_cols: 2,
            constant_width: true,
            no_empty_cells: true,
            no_quote_chars: true,
            no_warnings: true,
        }
    }
}

/// Derive a label for a pristine file: the dialect under which the file is a
/// clean constant-width table. Returns `None` unless exactly one candidate
/// qualifies, so ambiguous files are never auto-labeled.
pub fn auto_ground_truth(
    text: &str,
    policy: &CharacterPolicy,
    strict: &StrictTests,
) -> Option<Dialect> {
    let mut passer = None;
    for &dialect in &get_dialects(text, policy) {
        let out = parser::parse(text, &dialect);
        let rows = &out.table.rows;
        if rows.len() < strict.min_rows {
            continue;
        }
        let width = rows[0].len();
        if width < strict.min_cols {
            continue;
        }
        if strict.constant_width && rows.iter().any(|r| r.len() != width) {
            continue;
        }
        if strict.no_empty_cells && rows.iter().flatten().any(|c| c.is_empty()) {
            continue;
        }
        if strict.no_quote_chars && rows.iter().flatten().any(|c| c.contains(['\'', '"', '~'])) {
            continue;
        }
        if strict.no_warnings && !out.warnings.is_empty() {
            continue;
        }
        match passer {
            None => passer = Some(dialect),
            Some(_) => return None, // ambiguous: more than one clean reading
        }
    }
    passer
}

/// Correct/incorrect tallies for one slice of a corpus. A file counts toward
/// a component when the detected dialect got that component right; a file
/// with no detected dialect (tie, empty, unreadable) counts wrong everywhere.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize)]
pub struct BucketStats {
    pub files: u64,
    pub failures: u64,
    pub delimiter: u64,
    pub quotechar: u64,
    pub escapechar: u64,
    pub full: u64,
}

impl BucketStats {
    fn add(&mut self, r: &FileResult) {
        self.files += 1;
        if r.failed {
            self.failures += 1;
        }
        self.delimiter += u64::from(r.correct[0]);
        self.quotechar += u64::from(r.correct[1]);
        self.escapechar += u64::from(r.correct[2]);
        self.full += u64::from(r.correct.iter().all(|&b| b));
    }

    fn ratio(num: u64, den: u64) -> f64 {
        if den == 0 {
            0.0
        } else {
            num as f64 / den as f64
        }
    }

    pub fn delimiter_accuracy(&self) -> f64 {
        Self::ratio(self.delimiter, self.files)
    }
    pub fn quotechar_accuracy(&self) -> f64 {
        Self::ratio(self.quotechar, self.files)
    }
    pub fn escapechar_accuracy(&self) -> f64 {
        Self::ratio(self.escapechar, self.files)
    }
    pub fn full_accuracy(&self) -> f64 {
        Self::ratio(self.full, self.files)
    }
    pub fn failure_rate(&self) -> f64 {
        Self::ratio(self.failures, self.files)
    }

    fn to_json(self) -> serde_json::Value {
        json!({
            "files": self.files,
            "failures": self.failures,
            "failure_rate": self.failure_rate(),
            "accuracy": {
                "delimiter": self.delimiter_accuracy(),
                "quotechar": self.quotechar_accuracy(),
                "escapechar": self.escapechar_accuracy(),
                "full": self.full_accuracy(),
            },
        })
    }
}

/// Wall-clock statistics over per-file detection calls.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TimingStats {
    pub files: u64,
    pub total_ms: f64,
    pub mean_ms: f64,
    pub max_ms: f64,
}

impl TimingStats {
    fn from_millis(ms: impl Iterator<Item = f64>) -> TimingStats {
        let mut files = 0u64;
        let mut total = 0.0f64;
        let mut max = 0.0f64;
        for v in ms {
            files += 1;
            total += v;
            max = max.max(v);
        }
        TimingStats {
            files,
            total_ms: total,
            mean_ms: if files == 0 { 0.0 } else { total / files as f64 },
            max_ms: max,
        }
    }
}

/// Detection accuracy of one variant over a labeled corpus.
#[derive(Debug, Clone, PartialEq)]
pub struct AccuracyReport {
    pub variant: DetectorVariant,
    pub overall: BucketStats,
    /// Comma-delimited, `"`-or-unquoted, escape-free files.
    pub standard: BucketStats,
    /// Everything else.
    pub messy: BucketStats,
    pub origins: std::collections::BTreeMap<Origin, BucketStats>,
    /// Present only when timing was requested; excluded from the JSON view's
    /// determinism guarantees.
    pub timing: Option<TimingStats>,
}

impl AccuracyReport {
    /// Stable JSON view: byte-identical for identical corpora and labels as
    /// long as timing is off.
    pub fn to_json(&self) -> serde_json::Value {
        let origins: serde_json::Map<String, serde_json::Value> = self
            .origins
            .iter()
            .map(|(o, b)| (o.as_str().to_string(), b.to_json()))
            .collect();
        json!({
            "variant": self.variant,
            "files": self.overall.files,
            "overall": self.overall.to_json(),
            "standard": self.standard.to_json(),
            "messy": self.messy.to_json(),
            "origins": origins,
            "timing": self.timing,
        })
    }

    /// Fixed-width text table for human eyes.
    pub fn render_table(&self) -> String {
        let mut out = String::new();
        out.push_str(&format!(
            "variant: {}    files: {}    failures: {}\n",
            self.variant, self.overall.files, self.overall.failures
        ));
        out.push_str(&format!(
            "{:<12} {:>6} {:>6} {:>10} {:>10} {:>10} {:>8}\n",
            "bucket", "files", "fail", "delimiter", "quotechar", "escapechar", "full"
        ));
        let mut line = |name: &str, b: &BucketStats| {
            out.push_str(&format!(
                "{:<12} {:>6} {:>6} {:>10.4} {:>10.4} {:>10.4} {:>8.4}\n",
                name,
                b.files,
                b.failures,
                b.delimiter_accuracy(),
                b.quotechar_accuracy(),
                b.escapechar_accuracy(),
                b.full_accuracy()
            ));
        };
        line("overall", &self.overall);
        line("standard", &self.standard);
        line("messy", &self.messy);
        for (origin, bucket) in &self.origins {
            line(origin.as_str(), bucket);
        }
        if let Some(t) = &self.timing {
            out.push_str(&format!(
                "timing: mean {:.3} ms, max {:.3} ms, total {:.1} ms\n",
                t.mean_ms, t.max_ms, t.total_ms
            ));
        }
        out
    }
}

struct FileResult {
    correct: [bool; 3],
    failed: bool,
    standard: bool,
    origin: Origin,
    ms: f64,
}

/// How to run an evaluation.
#[derive(Debug, Clone)]
pub struct EvalOptions {
    pub variant: DetectorVariant,
    /// Evaluate files on all cores. The report is identical either way.
    pub parallel: bool,
    /// Collect wall-clock timing (makes the JSON view nondeterministic).
    pub timing: bool,
    pub params: DetectParams,
}

impl Default for EvalOptions {
    fn default() -> Self {
        EvalOptions {
            variant: DetectorVariant::Full,
            parallel: true,
            timing: false,
            params: DetectParams::default(),
        }
    }
}

fn assess(corpus: &Path, rec: &LabeledRecord, opts: &EvalOptions) -> Result<FileResult> {
    let path = corpus.join(&rec.filename);
    let bytes = fs::read(&path).with_context(|| format!("reading {}", path.display()))?;
    let start = Instant::now();
    // undecodable bytes are a detection failure, not an evaluation error
    let detected = match String::from_utf8(bytes) {
        Ok(text) => detect(&text, opts.variant, &opts.params).dialect,
        Err(_) => None,
    };
    let ms = start.elapsed().as_secs_f64() * 1e3;
    let (correct, failed) = match detected {
        Some(d) => (
            [
                d.delimiter() == rec.dialect.delimiter(),
                d.quote_char() == rec.dialect.quote_char(),
                d.escape_char() == rec.dialect.escape_char(),
            ],
            false,
        ),
        None => ([false; 3], true),
    };
    Ok(FileResult { correct, failed, standard: rec.standard(), origin: rec.origin, ms })
}

/// Measure detection accuracy of `opts.variant` over `labels`, reading each
/// file from `corpus`. Results are accumulated in label order, so parallel
/// and sequential runs produce identical reports.
pub fn evaluate(corpus: &Path, labels: &[LabeledRecord], opts: &EvalOptions) -> Result<AccuracyReport> {
    let results: Vec<FileResult> = if opts.parallel {
        labels.par_iter().map(|rec| assess(corpus, rec, opts)).collect::<Result<Vec<_>>>()?
    } else {
        labels.iter().map(|rec| assess(corpus, rec, opts)).collect::<Result<Vec<_>>>()?
    };
    let mut report = AccuracyReport {
        variant: opts.variant,
        overall: BucketStats::default(),
        standard: BucketStats::default(),
        messy: BucketStats::default(),
        origins: Default::default(),
        timing: None,
    };
    for r in &results {
        report.overall.add(r);
        if r.standard {
            report.standard.add(r);
        } else {
            report.messy.add(r);
        }
        report.origins.entry(r.origin).or_default().add(r);
    }
    if opts.timing {
        report.timing = Some(TimingStats::from_millis(results.iter().map(|r| r.ms)));
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn dialect(d: Option<char>, q: Option<char>, e: Option<char>) -> Dialect {
        Dialect::new(d, q, e).unwrap()
    }

    #[test]
    fn label_wire_format() {
        let rec = LabeledRecord {
            filename: "a.csv".into(),
            dialect: dialect(Some(','), Some('"'), None),
            origin: Origin::Human,
        };
        let line = serde_json::to_string(&rec).unwrap();
        assert_eq!(
            line,
            r#"{"filename":"a.csv","delimiter":",","quotechar":"\"","escapechar":"","origin":"human"}"#
        );
        let back: LabeledRecord = serde_json::from_str(&line).unwrap();
        assert_eq!(back, rec);
    }

    #[test]
    fn standard_means_comma_plain_quote_no_escape() {
        let rec = |d, q, e| LabeledRecord {
            filename: String::new(),
            dialect: dialect(d, q, e),
            origin: Origin::Synthetic,
        };
        assert!(rec(Some(','), None, None).standard());
        assert!(rec(Some(','), Some('"'), None).standard());
        assert!(!rec(Some(';'), Some('"'), None).standard());
        assert!(!rec(Some(','), Some('~'), None).standard());
        assert!(!rec(Some(','), Some('"'), Some('\\')).standard());
    }

    #[test]
    fn labels_round_trip_through_jsonl() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("labels.jsonl");
        let recs = vec![
            LabeledRecord {
                filename: "x.csv".into(),
                dialect: dialect(Some('\t'), None, Some('\\')),
                origin: Origin::Automatic,
            },
            LabeledRecord {
                filename: "y.csv".into(),
                dialect: dialect(Some(','), Some('\''), None),
                origin: Origin::Synthetic,
            },
        ];
        write_labels(&path, &recs).unwrap();
        assert_eq!(read_labels(&path).unwrap(), recs);
    }

    #[test]
    fn generation_is_deterministic() {
        let spec = GeneratorSpec { count: 6, ..Default::default() };
        let a = tempfile::tempdir().unwrap();
        let b = tempfile::tempdir().unwrap();
        let ga = generate(a.path(), &spec).unwrap();
        let gb = generate(b.path(), &spec).unwrap();
        assert_eq!(ga, gb);
        for g in &ga {
            let fa = fs::read(a.path().join(&g.record.filename)).unwrap();
            let fb = fs::read(b.path().join(&g.record.filename)).unwrap();
            assert_eq!(fa, fb, "{}", g.record.filename);
        }
        assert_eq!(
            fs::read(a.path().join("labels.jsonl")).unwrap(),
            fs::read(b.path().join("labels.jsonl")).unwrap()
        );
        let other = generate(a.path(), &GeneratorSpec { seed: 99, count: 6, ..Default::default() })
            .unwrap();
        assert_ne!(ga, other);
    }

    #[test]
    fn generated_files_carry_their_advertised_features() {
        let dir = tempfile::tempdir().unwrap();
        let spec = GeneratorSpec {
            count: 8,
            escape_probability: 1.0,
            mess: MessSpec {
                comments: 1.0,
                multiline: 1.0,
                nested_quotes: 1.0,
                ragged: 1.0,
                empty_cells: 1.0,
                stray_quotes: 1.0,
            },
            junk_fraction: 1.0,
            ..Default::default()
        };
        let generated = generate(dir.path(), &spec).unwrap();
        for g in &generated {
            let d = &g.record.dialect;
            assert!(d.escape_char().is_some(), "{}", g.record.filename);
            assert!(d.quote_char().is_some(), "escapes imply quotes");
            let text = fs::read_to_string(dir.path().join(&g.record.filename)).unwrap();
            assert!(text.contains('\\'), "escape char must appear in {}", g.record.filename);
            assert!(g.mess.any());
            assert!(g.mess.multiline && g.mess.ragged && g.mess.empty_cells);
            assert_eq!(g.mess.comments, d.delimiter() != Some('#'));
        }
    }

    #[test]
    fn quiet_spec_generates_mess_free_files() {
        let dir = tempfile::tempdir().unwrap();
        let spec = GeneratorSpec {
            count: 6,
            escape_probability: 0.0,
            junk_fraction: 0.0,
            mess: MessSpec {
                comments: 0.0,
                multiline: 0.0,
                nested_quotes: 0.0,
                ragged: 0.0,
                empty_cells: 0.0,
                stray_quotes: 0.0,
            },
            ..Default::default()
        };
        for g in generate(dir.path(), &spec).unwrap() {
            assert!(!g.mess.any());
        }
    }

    #[test]
    fn evaluation_matches_labels_on_a_small_corpus() {
        let dir = tempfile::tempdir().unwrap();
        let spec = GeneratorSpec { count: 24, seed: 7, ..Default::default() };
        generate(dir.path(), &spec).unwrap();
        let labels = read_labels(&dir.path().join("labels.jsonl")).unwrap();
        assert_eq!(labels.len(), 24);
        let report = evaluate(dir.path(), &labels, &EvalOptions::default()).unwrap();
        assert_eq!(report.overall.files, 24);
        assert_eq!(report.standard.files + report.messy.files, 24);
        assert!(report.overall.full_accuracy() >= 0.8, "{}", report.render_table());
        assert!(report.timing.is_none());
        assert_eq!(report.origins[&Origin::Synthetic].files, 24);
    }

    #[test]
    fn parallel_and_sequential_reports_are_identical() {
        let dir = tempfile::tempdir().unwrap();
        let spec = GeneratorSpec { count: 10, seed: 3, ..Default::default() };
        generate(dir.path(), &spec).unwrap();
        let labels = read_labels(&dir.path().join("labels.jsonl")).unwrap();
        let par = evaluate(dir.path(), &labels, &EvalOptions { parallel: true, ..Default::default() })
            .unwrap();
        let seq =
            evaluate(dir.path(), &labels, &EvalOptions { parallel: false, ..Default::default() })
                .unwrap();
        assert_eq!(
            serde_json::to_string(&par.to_json()).unwrap(),
            serde_json::to_string(&seq.to_json()).unwrap()
        );
    }

    #[test]
    fn unreadable_files_count_as_failures() {
        let dir = tempfile::tempdir().unwrap();
        fs::write(dir.path().join("bad.csv"), [0xff, 0xfe, 0x00, 0x41]).unwrap();
        let labels = vec![LabeledRecord {
            filename: "bad.csv".into(),
            dialect: dialect(Some(','), None, None),
            origin: Origin::Human,
        }];
        let report = evaluate(dir.path(), &labels, &EvalOptions::default()).unwrap();
        assert_eq!(report.overall.failures, 1);
        assert_eq!(report.overall.full, 0);
        assert_eq!(report.overall.delimiter, 0);
    }

    #[test]
    fn missing_files_are_an_error_not_a_failure() {
        let dir = tempfile::tempdir().unwrap();
        let labels = vec![LabeledRecord {
            filename: "nope.csv".into(),
            dialect: dialect(Some(','), None, None),
            origin: Origin::Human,
        }];
        assert!(evaluate(dir.path(), &labels, &EvalOptions::default()).is_err());
    }

    #[test]
    fn empty_buckets_report_zero_accuracy() {
        let b = BucketStats::default();
        assert_eq!(b.full_accuracy(), 0.0);
        assert_eq!(b.failure_rate(), 0.0);
        let v = b.to_json();
        assert_eq!(v["accuracy"]["full"], 0.0);
    }

    #[test]
    fn auto_labeling_accepts_exactly_one_clean_reading() {
        let policy = CharacterPolicy::default();
        let strict = StrictTests::default();
        assert_eq!(
            auto_ground_truth("a,b\n1,2\n", &policy, &strict),
            Some(dialect(Some(','), None, None))
        );
        // ragged under every candidate: no label
        assert_eq!(auto_ground_truth("a,b\n1;2\n", &policy, &strict), None);
        // too small
        assert_eq!(auto_ground_truth("a,b\n", &policy, &strict), None);
        // an empty cell disqualifies the only wide reading
        assert_eq!(auto_ground_truth("a,,b\n1,,2\n", &policy, &strict), None);
        // quote chars in cells disqualify the unquoted reading, the quoted
        // reading qualifies
        assert_eq!(
            auto_ground_truth("\"a\",\"b\"\n\"1\",\"2\"\n", &policy, &strict),
            Some(dialect(Some(','), Some('"'), None))
        );
    }

    #[test]
    fn report_table_renders_every_bucket() {
        let dir = tempfile::tempdir().unwrap();
        let spec = GeneratorSpec { count: 4, seed: 11, ..Default::default() };
        generate(dir.path(), &spec).unwrap();
        let labels = read_labels(&dir.path().join("labels.jsonl")).unwrap();
        let opts = EvalOptions { timing: true, ..Default::default() };
        let report = evaluate(dir.path(), &labels, &opts).unwrap();
        let table = report.render_table();
        assert!(table.contains("overall"));
        assert!(table.contains("standard"));
        assert!(table.contains("messy"));
        assert!(table.contains("synthetic"));
        assert!(table.contains("timing:"));
        assert!(report.to_json()["timing"]["files"].as_u64().unwrap() == 4);
    }
}
