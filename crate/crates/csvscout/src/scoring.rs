//! Consistency scoring of a parse under one candidate dialect.
//!
//! The score is the product of two signals:
//!
//! - **Pattern score**: rewards few distinct row patterns, each covering many
//!   rows and implying wide rows. For pattern k with N_k rows and implied row
//!   length L_k, the score is the mean over distinct patterns of
//!   `N_k * max(alpha, L_k - 1) / L_k`. Single-cell patterns (L = 1) would
//!   contribute zero, so `alpha` keeps them barely alive instead of tied
//!   with garbage.
//! - **Type score**: the fraction of cells whose content matches a known
//!   data type, clamped below by `beta` so a table of free text still ranks
//!   candidates by pattern.
//!
//! Summation runs in canonical pattern order with Kahan compensation, so a
//! score is a pure function of the pattern multiset: byte-identical across
//! runs, platforms, and iteration orders.

use std::collections::HashMap;

use serde::Serialize;
use thiserror::Error;

use crate::dialect::Dialect;
use crate::parser::{self, ParseOutput, RowPatternTable};
use crate::typeinfer::is_known_type;

/// Tunable floors for the two score components.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ScoreConstants {
    /// Floor on a pattern's per-row contribution (default 1e-3).
    pub alpha: f64,
    /// Floor on the type score (default 1e-10).
    pub beta: f64,
}

impl Default for ScoreConstants {
    fn default() -> Self {
        ScoreConstants { alpha: 1e-3, beta: 1e-10 }
    }
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum ScoreError {
    #[error("cannot score an empty table")]
    EmptyTable,
}

/// Both score components for one candidate, kept for reporting.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ScoreBreakdown {
    /// Row-pattern consistency.
    pub pattern: f64,
    /// Fraction of cells with a recognized data type.
    pub type_raw: f64,
    /// `max(beta, type_raw)`.
    pub type_clamped: f64,
    /// `pattern * type_clamped`.
    pub q: f64,
    pub rows_total: u64,
    pub cells_total: u64,
    pub patterns_distinct: u64,
}

// Kahan-compensated sum; `terms` must come in a deterministic order.
fn kahan_sum<I: IntoIterator<Item = f64>>(terms: I) -> f64 {
    let mut sum = 0.0;
    let mut c = 0.0;
    for t in terms {
        let y = t - c;
        let s = sum + y;
        c = (s - sum) - y;
        sum = s;
    }
    sum
}

/// Pattern score of a row-pattern multiset. Errors on an empty table.
pub fn pattern_score(
    patterns: &RowPatternTable,
    constants: &ScoreConstants,
) -> Result<f64, ScoreError> {
    let k = patterns.distinct();
    if k == 0 {
        return Err(ScoreError::EmptyTable);
    }
    let total = kahan_sum(patterns.counts().iter().map(|(pat, &n)| {
        let len = RowPatternTable::row_len(pat) as f64;
        n as f64 * ((len - 1.0).max(constants.alpha)) / len
    }));
    Ok(total / k as f64)
}

/// Fraction of cells matching a known data type. Errors on an empty table.
/// Distinct cell contents are classified once, so wide tables with repeated
/// values cost one regex pass per distinct string.
pub fn type_score(table: &parser::CellTable) -> Result<f64, ScoreError> {
    let mut cells = 0u64;
    let mut known = 0u64;
    let mut memo: HashMap<&str, bool> = HashMap::new();
    for row in &table.rows {
        for cell in row {
            cells += 1;
            if *memo.entry(cell.as_str()).or_insert_with(|| is_known_type(cell)) {
                known += 1;
            }
        }
    }
    if cells == 0 {
        return Err(ScoreError::EmptyTable);
    }
    Ok(known as f64 / cells as f64)
}

/// Score an already-parsed candidate.
pub fn consistency_of(
    parsed: &ParseOutput,
    constants: &ScoreConstants,
) -> Result<ScoreBreakdown, ScoreError> {
    let patterns = parsed.pattern_table();
    let pattern = pattern_score(&patterns, constants)?;
    let type_raw = type_score(&parsed.table)?;
    let type_clamped = type_raw.max(constants.beta);
    Ok(ScoreBreakdown {
        pattern,
        type_raw,
        type_clamped,
        q: pattern * type_clamped,
        rows_total: patterns.total_rows(),
        cells_total: parsed.table.cell_count() as u64,
        patterns_distinct: patterns.distinct() as u64,
    })
}

/// Parse `text` under `dialect` and score the result.
pub fn consistency(
    text: &str,
    dialect: &Dialect,
    constants: &ScoreConstants,
) -> Result<ScoreBreakdown, ScoreError> {
    consistency_of(&parser::parse(text, dialect), constants)
}
