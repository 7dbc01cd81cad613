//! Parsing, formatting, and row-pattern abstraction under a fixed dialect.
//!
//! One scan drives everything: [`parse`] yields the cell table plus warnings,
//! [`abstract_rows`] yields the row-pattern table, and the scan also records
//! where delimiter characters sat relative to quoted sections (which backs
//! quote masking). All three views of a file always come from identical
//! parser semantics.
//!
//! Parser rules:
//!
//! - Records split on LF, CRLF, or lone CR outside quoted sections; a final
//!   newline does not create an empty last row.
//! - Cells split on the delimiter outside quoted sections.
//! - A quoted section starts only when the quote char is the first character
//!   of a cell. Inside it, delimiters and newlines are data, a doubled quote
//!   char is one literal quote char, and the section ends at a lone quote.
//! - The escape char is interpreted only immediately before the delimiter,
//!   the quote char, or itself; anywhere else it is literal data.
//! - Quotes are stripped only when they surround the entire cell. A cell that
//!   continues past its closing quote keeps every character, and a quote char
//!   in the middle of an unquoted cell is literal data.
//! - An unterminated quoted section is closed at end of input, keeps its raw
//!   text, and is flagged with a warning rather than an error.
//!
//! Row patterns abstract each record over a three-letter alphabet: `C` for a
//! cell (an empty cell included), `D` for each cell boundary, and `Q` for
//! each stray quote-ish character (`'`, `"`, `~`) that reached the parser
//! unescaped, unquoted, and unconsumed. "CDCQCDC" and "CDCDC" are distinct
//! patterns.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::dialect::Dialect;

/// Characters treated as quote-ish when marking stray quotes in row
/// patterns, independent of the dialect under consideration.
const QUOTE_LIKE: [char; 3] = ['\'', '"', '~'];

/// A parsed table: rows of cells. Rows may be ragged.
#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(transparent)]
pub struct CellTable {
    pub rows: Vec<Vec<String>>,
}

impl CellTable {
    pub fn new(rows: Vec<Vec<String>>) -> Self {
        CellTable { rows }
    }

    pub fn from_strs(rows: &[&[&str]]) -> Self {
        CellTable {
            rows: rows
                .iter()
                .map(|r| r.iter().map(|c| c.to_string()).collect())
                .collect(),
        }
    }

    pub fn cell_count(&self) -> usize {
        self.rows.iter().map(Vec::len).sum()
    }
}

impl From<Vec<Vec<String>>> for CellTable {
    fn from(rows: Vec<Vec<String>>) -> Self {
        CellTable { rows }
    }
}

/// Multiset of row patterns, keyed in canonical (lexicographic) order.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct RowPatternTable {
    counts: BTreeMap<String, u64>,
}

impl RowPatternTable {
    pub fn from_patterns<I: IntoIterator<Item = String>>(patterns: I) -> Self {
        let mut counts = BTreeMap::new();
        for p in patterns {
            *counts.entry(p).or_insert(0) += 1;
        }
        RowPatternTable { counts }
    }

    /// Pattern strings with their multiplicities, canonically ordered.
    pub fn counts(&self) -> &BTreeMap<String, u64> {
        &self.counts
    }

    /// Number of distinct patterns.
    pub fn distinct(&self) -> usize {
        self.counts.len()
    }

    /// Total number of rows represented.
    pub fn total_rows(&self) -> u64 {
        self.counts.values().sum()
    }

    /// Row length implied by a pattern: one more than its `D` count.
    pub fn row_len(pattern: &str) -> u64 {
        pattern.chars().filter(|&c| c == 'D').count() as u64 + 1
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ParseWarning {
    /// A quoted section was still open at end of input.
    UnterminatedQuote { record: usize },
    /// A lone carriage return acted as a record terminator.
    BareCarriageReturn { record: usize },
}

impl std::fmt::Display for ParseWarning {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            ParseWarning::UnterminatedQuote { record } => {
                write!(f, "unterminated quote in record {record}, closed at end of input")
            }
            ParseWarning::BareCarriageReturn { record } => {
                write!(f, "lone carriage return terminates record {record}")
            }
        }
    }
}

/// Everything one scan of the input produces.
#[derive(Debug, Clone, PartialEq)]
pub struct ParseOutput {
    pub table: CellTable,
    pub warnings: Vec<ParseWarning>,
    /// One pattern string per record, in row order.
    pub patterns: Vec<String>,
    /// Delimiter characters that sat outside any quoted section (cell
    /// boundaries and escaped literals alike).
    pub delimiters_outside_quotes: usize,
    /// Delimiter characters consumed as data inside quoted sections.
    pub delimiters_inside_quotes: usize,
}

impl ParseOutput {
    pub fn pattern_table(&self) -> RowPatternTable {
        RowPatternTable::from_patterns(self.patterns.iter().cloned())
    }
}

// Accumulates one cell: its processed text, its pattern tokens, and enough
// bookkeeping to decide whether surrounding quotes get stripped.
struct CellBuf {
    buf: String,
    tokens: String,
    opened: bool,
    closed: bool,
    trailing: bool,
}

impl CellBuf {
    fn new() -> Self {
        CellBuf { buf: String::new(), tokens: String::new(), opened: false, closed: false, trailing: false }
    }

    fn at_start(&self) -> bool {
        self.buf.is_empty() && !self.opened
    }

    fn push_content(&mut self, c: char) {
        if self.closed {
            self.trailing = true;
        }
        self.buf.push(c);
        if !self.tokens.ends_with('C') {
            self.tokens.push('C');
        }
    }

    fn push_stray(&mut self, c: char) {
        if self.closed {
            self.trailing = true;
        }
        self.buf.push(c);
        self.tokens.push('Q');
    }

    fn open_section(&mut self, q: char) {
        self.opened = true;
        self.buf.push(q);
    }

    fn close_section(&mut self, q: char) {
        self.closed = true;
        self.buf.push(q);
    }

    fn finish(self) -> (String, String) {
        let content = if self.opened && self.closed && !self.trailing {
            // quotes surround the entire cell: strip them
            let mut chars = self.buf.chars();
            chars.next();
            chars.next_back();
            chars.as_str().to_string()
        } else {
            self.buf
        };
        let pattern = if self.tokens.is_empty() { "C".to_string() } else { self.tokens };
        (content, pattern)
    }
}

/// Parse `text` under `dialect`. Infallible: malformed input degrades to
/// warnings, never errors.
pub fn parse(text: &str, dialect: &Dialect) -> ParseOutput {
    let chars: Vec<char> = text.chars().collect();
    let n = chars.len();
    let delim = dialect.delimiter();
    let quote = dialect.quote_char();
    let escape = dialect.escape_char();

    let mut rows: Vec<Vec<String>> = Vec::new();
    let mut patterns: Vec<String> = Vec::new();
    let mut warnings: Vec<ParseWarning> = Vec::new();
    let mut delim_outside = 0usize;
    let mut delim_inside = 0usize;

    let mut row: Vec<String> = Vec::new();
    let mut row_pattern = String::new();
    let mut cell = CellBuf::new();
    let mut in_quotes = false;
    let mut pending = false; // chars consumed since the last record terminator
    let mut warned_bare_cr = false;

    macro_rules! end_cell {
        () => {{
            let (content, pat) = std::mem::replace(&mut cell, CellBuf::new()).finish();
            row.push(content);
            if !row_pattern.is_empty() {
                row_pattern.push('D');
            }
            row_pattern.push_str(&pat);
        }};
    }
    macro_rules! end_record {
        () => {{
            end_cell!();
            rows.push(std::mem::take(&mut row));
            patterns.push(std::mem::take(&mut row_pattern));
        }};
    }

    let escape_target = |c: char| Some(c) == delim || Some(c) == quote || Some(c) == escape;

    let mut i = 0;
    while i < n {
        let c = chars[i];
        if in_quotes {
            if Some(c) == escape && i + 1 < n && escape_target(chars[i + 1]) {
                if Some(chars[i + 1]) == delim {
                    delim_inside += 1;
                }
                cell.push_content(chars[i + 1]);
                i += 2;
                continue;
            }
            if Some(c) == quote {
                if i + 1 < n && Some(chars[i + 1]) == quote {
                    // doubled quote: one literal quote char
                    cell.push_content(c);
                    i += 2;
                    continue;
                }
                in_quotes = false;
                cell.close_section(c);
                i += 1;
                continue;
            }
            if Some(c) == delim {
                delim_inside += 1;
            }
            cell.push_content(c);
            i += 1;
            continue;
        }
        if Some(c) == escape && i + 1 < n && escape_target(chars[i + 1]) {
            if Some(chars[i + 1]) == delim {
                delim_outside += 1;
            }
            cell.push_content(chars[i + 1]);
            pending = true;
            i += 2;
            continue;
        }
        if Some(c) == delim {
            delim_outside += 1;
            end_cell!();
            pending = true;
            i += 1;
            continue;
        }
        if c == '\n' || c == '\r' {
            let crlf = c == '\r' && i + 1 < n && chars[i + 1] == '\n';
            if c == '\r' && !crlf && !warned_bare_cr {
                warnings.push(ParseWarning::BareCarriageReturn { record: rows.len() });
                warned_bare_cr = true;
            }
            end_record!();
            pending = false;
            i += if crlf { 2 } else { 1 };
            continue;
        }
        if Some(c) == quote && cell.at_start() {
            in_quotes = true;
            cell.open_section(c);
            pending = true;
            i += 1;
            continue;
        }
        if QUOTE_LIKE.contains(&c) {
            cell.push_stray(c);
            pending = true;
            i += 1;
            continue;
        }
        cell.push_content(c);
        pending = true;
        i += 1;
    }

    if in_quotes {
        warnings.push(ParseWarning::UnterminatedQuote { record: rows.len() });
    }
    if pending {
        end_record!();
    }

    ParseOutput {
        table: CellTable { rows },
        warnings,
        patterns,
        delimiters_outside_quotes: delim_outside,
        delimiters_inside_quotes: delim_inside,
    }
}

/// Row-pattern multiset of `text` under `dialect`.
pub fn abstract_rows(text: &str, dialect: &Dialect) -> RowPatternTable {
    parse(text, dialect).pattern_table()
}

#[derive(Debug, Clone, Copy, Default)]
pub struct FormatOptions {
    /// Protect embedded quote chars with the escape char instead of doubling
    /// them. Ignored when the dialect has no escape char.
    pub escape_quotes: bool,
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum FormatError {
    #[error("row {row} has {cells} cells but the dialect has no delimiter")]
    DelimiterRequired { row: usize, cells: usize },
    #[error("cell at row {row}, column {col} needs quoting but the dialect has no quote char")]
    QuoteRequired { row: usize, col: usize },
}

/// Serialize a table under `dialect` such that [`parse`] recovers it exactly.
/// Every record, the last included, is LF-terminated. Cells containing the
/// delimiter, a newline, or the quote char are quoted; embedded quote chars
/// are doubled (or escaped, per `opts`); embedded escape chars are doubled
/// with the escape char itself.
pub fn format(
    table: &CellTable,
    dialect: &Dialect,
    opts: &FormatOptions,
) -> Result<String, FormatError> {
    let delim = dialect.delimiter();
    let quote = dialect.quote_char();
    let escape = dialect.escape_char();
    let mut out = String::new();
    for (r, row) in table.rows.iter().enumerate() {
        if row.len() > 1 && delim.is_none() {
            return Err(FormatError::DelimiterRequired { row: r, cells: row.len() });
        }
        for (c, cell) in row.iter().enumerate() {
            if c > 0 {
                out.push(delim.expect("checked above"));
            }
            let mut s = cell.clone();
            if let Some(e) = escape {
                s = s.replace(e, &format!("{e}{e}"));
            }
            let needs_quote = delim.is_some_and(|d| s.contains(d))
                || s.contains('\n')
                || s.contains('\r')
                || quote.is_some_and(|q| s.contains(q));
            if needs_quote {
                let Some(q) = quote else {
                    return Err(FormatError::QuoteRequired { row: r, col: c });
                };
                let protected = match escape {
                    Some(e) if opts.escape_quotes => s.replace(q, &format!("{e}{q}")),
                    _ => s.replace(q, &format!("{q}{q}")),
                };
                out.push(q);
                out.push_str(&protected);
                out.push(q);
            } else {
                out.push_str(&s);
            }
        }
        out.push('\n');
    }
    Ok(out)
}
