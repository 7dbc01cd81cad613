//! Dialect detection: score every candidate dialect, keep the argmax, break
//! exact ties toward simpler dialects.
//!
//! The detection loop walks candidates in canonical order, parses the file
//! once per candidate, and scores the parse. Under the consistency-based
//! variants the loop prunes: the type factor never exceeds 1, so a candidate
//! whose pattern score is already below the best full score seen so far
//! cannot win and its (regex-heavy) type scoring is skipped.
//!
//! Ties are exact float equality. A tie between two dialects that differ in
//! exactly one component, where one side lacks that component and both parse
//! the file into the very same table, is spurious: the extra component never
//! fired. Tie-breaking drops such redundant members until a fixed point;
//! whatever tie remains is real and is reported instead of guessed at.

use std::collections::{BTreeMap, BTreeSet, HashMap};

use serde::Serialize;
use serde_json::json;

use crate::dialect::{filter_urls, get_delimiters, get_dialects, CharacterPolicy, Dialect};
use crate::parser::{self, CellTable};
use crate::scoring::{consistency_of, pattern_score, ScoreBreakdown, ScoreConstants, ScoreError};
use crate::typeinfer::detect_type;

/// Which scoring rule drives detection.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum DetectorVariant {
    /// Pattern score times type score, with pruning and tie-breaking.
    Full,
    /// Pattern score alone.
    PatternOnly,
    /// Type score alone.
    TypeOnly,
    /// Like [`DetectorVariant::Full`] but ties are reported, never broken.
    NoTieBreak,
    /// Column-homogeneity baseline: mean squared type-share per column,
    /// penalized by empty cells and by cells containing rival delimiters.
    Wrangler,
}

impl DetectorVariant {
    pub const ALL: [DetectorVariant; 5] = [
        DetectorVariant::Full,
        DetectorVariant::PatternOnly,
        DetectorVariant::TypeOnly,
        DetectorVariant::NoTieBreak,
        DetectorVariant::Wrangler,
    ];

    pub fn as_str(&self) -> &'static str {
        match self {
            DetectorVariant::Full => "full",
            DetectorVariant::PatternOnly => "pattern-only",
            DetectorVariant::TypeOnly => "type-only",
            DetectorVariant::NoTieBreak => "no-tie-break",
            DetectorVariant::Wrangler => "wrangler",
        }
    }
}

impl std::fmt::Display for DetectorVariant {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

impl std::str::FromStr for DetectorVariant {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        DetectorVariant::ALL
            .into_iter()
            .find(|v| v.as_str() == s)
            .ok_or_else(|| {
                let names: Vec<_> = DetectorVariant::ALL.iter().map(|v| v.as_str()).collect();
                format!("unknown variant {s:?}, expected one of {}", names.join(", "))
            })
    }
}

/// How a detection run ended.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum DetectionStatus {
    Detected,
    TieUnbroken,
    EmptyInput,
}

impl DetectionStatus {
    pub fn as_str(&self) -> &'static str {
        match self {
            DetectionStatus::Detected => "detected",
            DetectionStatus::TieUnbroken => "tie_unbroken",
            DetectionStatus::EmptyInput => "empty_input",
        }
    }
}

impl std::fmt::Display for DetectionStatus {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Knobs for a detection run.
#[derive(Debug, Clone, Default)]
pub struct DetectParams {
    pub constants: ScoreConstants,
    pub policy: CharacterPolicy,
}

/// Per-candidate result: the score the active variant ranked by, plus the
/// full consistency breakdown for reporting.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CandidateScore {
    pub score: f64,
    pub breakdown: ScoreBreakdown,
}

/// Everything a detection run learned.
#[derive(Debug, Clone, PartialEq)]
pub struct DetectionOutcome {
    pub status: DetectionStatus,
    /// The winning dialect, absent unless `status` is `Detected`.
    pub dialect: Option<Dialect>,
    /// The surviving tied dialects when `status` is `TieUnbroken`.
    pub tie_set: Option<Vec<Dialect>>,
    /// Scores for every candidate that was fully evaluated.
    pub breakdowns: BTreeMap<Dialect, CandidateScore>,
    /// Candidates skipped because their pattern score could not beat the
    /// best full score already seen.
    pub pruned: BTreeSet<Dialect>,
}

impl DetectionOutcome {
    pub fn is_detected(&self) -> bool {
        self.status == DetectionStatus::Detected
    }

    /// Stable JSON view. Candidates appear in canonical dialect order, so the
    /// output is byte-identical for identical inputs.
    pub fn to_json(&self) -> serde_json::Value {
        let scores: Vec<_> = self
            .breakdowns
            .iter()
            .map(|(d, s)| json!({ "dialect": d, "score": s.score, "breakdown": s.breakdown }))
            .collect();
        json!({
            "status": self.status,
            "dialect": self.dialect,
            "ties": self.tie_set,
            "scores": scores,
            "pruned": self.pruned,
        })
    }

    fn empty_input() -> Self {
        DetectionOutcome {
            status: DetectionStatus::EmptyInput,
            dialect: None,
            tie_set: None,
            breakdowns: BTreeMap::new(),
            pruned: BTreeSet::new(),
        }
    }
}

/// Detect the dialect of `text`.
pub fn detect(text: &str, variant: DetectorVariant, params: &DetectParams) -> DetectionOutcome {
    if text.is_empty() {
        return DetectionOutcome::empty_input();
    }
    let candidates = get_dialects(text, &params.policy);
    let prune = matches!(variant, DetectorVariant::Full | DetectorVariant::NoTieBreak);
    // the type factor lies in [beta, max(1, beta)]
    let type_ceiling = params.constants.beta.max(1.0);
    let rival_delims: BTreeSet<char> = if variant == DetectorVariant::Wrangler {
        get_delimiters(&filter_urls(text), &params.policy)
            .into_iter()
            .flatten()
            .collect()
    } else {
        BTreeSet::new()
    };

    let mut breakdowns: BTreeMap<Dialect, CandidateScore> = BTreeMap::new();
    let mut pruned: BTreeSet<Dialect> = BTreeSet::new();
    let mut best = f64::NEG_INFINITY;
    for &d in &candidates {
        let parsed = parser::parse(text, &d);
        if prune {
            let p = pattern_score(&parsed.pattern_table(), &params.constants)
                .expect("non-empty input always yields rows");
            if p * type_ceiling < best {
                pruned.insert(d);
                continue;
            }
        }
        let breakdown = consistency_of(&parsed, &params.constants)
            .expect("non-empty input always yields cells");
        let score = match variant {
            DetectorVariant::Full | DetectorVariant::NoTieBreak => breakdown.q,
            DetectorVariant::PatternOnly => breakdown.pattern,
            DetectorVariant::TypeOnly => breakdown.type_clamped,
            DetectorVariant::Wrangler => {
                let mut rivals = rival_delims.clone();
                if let Some(own) = d.delimiter() {
                    rivals.remove(&own);
                }
                column_homogeneity_score(&parsed.table, &rivals)
                    .expect("non-empty input always yields cells")
            }
        };
        if score > best {
            best = score;
        }
        breakdowns.insert(d, CandidateScore { score, breakdown });
    }

    let ties: Vec<Dialect> = breakdowns
        .iter()
        .filter(|(_, s)| s.score == best)
        .map(|(&d, _)| d)
        .collect();
    let (status, dialect, tie_set) = if ties.len() == 1 {
        (DetectionStatus::Detected, Some(ties[0]), None)
    } else if matches!(
        variant,
        DetectorVariant::Full | DetectorVariant::PatternOnly | DetectorVariant::TypeOnly
    ) {
        let survivors = break_ties(text, &ties);
        if survivors.len() == 1 {
            (DetectionStatus::Detected, Some(survivors[0]), None)
        } else {
            (DetectionStatus::TieUnbroken, None, Some(survivors))
        }
    } else {
        (DetectionStatus::TieUnbroken, None, Some(ties))
    };
    DetectionOutcome { status, dialect, tie_set, breakdowns, pruned }
}

// If `a` and `b` differ in exactly one component and one of them lacks that
// component, return the member whose extra component is redundant.
fn reducible(a: Dialect, b: Dialect) -> Option<Dialect> {
    let pairs = [
        (a.delimiter(), b.delimiter()),
        (a.quote_char(), b.quote_char()),
        (a.escape_char(), b.escape_char()),
    ];
    let mut diff = None;
    for (x, y) in pairs {
        if x != y {
            if diff.is_some() {
                return None;
            }
            diff = Some((x, y));
        }
    }
    match diff? {
        (Some(_), None) => Some(a),
        (None, Some(_)) => Some(b),
        _ => None,
    }
}

/// Drop tied dialects whose extra component provably never fired: the member
/// differing from another tied dialect only by one added component, parsing
/// the file into the identical table. Runs to a fixed point; each round drops
/// every redundant member at once, so the result does not depend on scan
/// order. At least one dialect always survives.
pub fn break_ties(text: &str, ties: &[Dialect]) -> Vec<Dialect> {
    let tables: HashMap<Dialect, CellTable> = ties
        .iter()
        .map(|&d| (d, parser::parse(text, &d).table))
        .collect();
    let mut survivors: Vec<Dialect> = ties.to_vec();
    loop {
        let mut drop: BTreeSet<Dialect> = BTreeSet::new();
        for (i, &a) in survivors.iter().enumerate() {
            for &b in &survivors[i + 1..] {
                if let Some(redundant) = reducible(a, b) {
                    if tables[&a] == tables[&b] {
                        drop.insert(redundant);
                    }
                }
            }
        }
        if drop.is_empty() {
            return survivors;
        }
        survivors.retain(|d| !drop.contains(d));
    }
}

// Mean over columns of the summed squared type shares (a column whose cells
// all share one type contributes 1), minus the fraction of the padded grid
// that is empty or padding, minus the fraction holding a rival delimiter.
fn column_homogeneity_score(
    table: &CellTable,
    rival_delims: &BTreeSet<char>,
) -> Result<f64, ScoreError> {
    let rows = table.rows.len();
    let width = table.rows.iter().map(Vec::len).max().unwrap_or(0);
    if rows == 0 || width == 0 {
        return Err(ScoreError::EmptyTable);
    }
    let grid = (rows * width) as f64;

    let mut homogeneity_total = 0.0;
    for col in 0..width {
        let mut buckets: BTreeMap<crate::typeinfer::DataType, u64> = BTreeMap::new();
        let mut real = 0u64;
        for row in &table.rows {
            if let Some(cell) = row.get(col) {
                real += 1;
                *buckets.entry(detect_type(cell)).or_insert(0) += 1;
            }
        }
        // every column up to the max width has at least one real cell
        let share_sq: f64 = buckets
            .values()
            .map(|&n| {
                let p = n as f64 / real as f64;
                p * p
            })
            .sum();
        homogeneity_total += share_sq;
    }
    let homogeneity = homogeneity_total / width as f64;

    let mut empties = 0u64;
    let mut rival_cells = 0u64;
    let mut padding = 0u64;
    for row in &table.rows {
        padding += (width - row.len()) as u64;
        for cell in row {
            if cell.is_empty() {
                empties += 1;
            }
            if cell.chars().any(|c| rival_delims.contains(&c)) {
                rival_cells += 1;
            }
        }
    }
    let empty_frac = (empties + padding) as f64 / grid;
    let rival_frac = rival_cells as f64 / grid;
    Ok(homogeneity - empty_frac - rival_frac)
}

/// Score one dialect under the column-homogeneity baseline. Rival delimiters
/// are the other delimiter candidates enumerated from the URL-filtered text.
pub fn wrangler_score(
    text: &str,
    dialect: &Dialect,
    policy: &CharacterPolicy,
) -> Result<f64, ScoreError> {
    let mut rivals: BTreeSet<char> = get_delimiters(&filter_urls(text), policy)
        .into_iter()
        .flatten()
        .collect();
    if let Some(own) = dialect.delimiter() {
        rivals.remove(&own);
    }
    column_homogeneity_score(&parser::parse(text, dialect).table, &rivals)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scoring::consistency;

    fn dialect(d: Option<char>, q: Option<char>, e: Option<char>) -> Dialect {
        Dialect::new(d, q, e).unwrap()
    }

    fn full(text: &str) -> DetectionOutcome {
        detect(text, DetectorVariant::Full, &DetectParams::default())
    }

    #[test]
    fn empty_input_is_reported_not_guessed() {
        let out = full("");
        assert_eq!(out.status, DetectionStatus::EmptyInput);
        assert_eq!(out.dialect, None);
        assert!(out.breakdowns.is_empty());
    }

    #[test]
    fn detects_semicolon_file() {
        let out = full("a;b;c\n1;2;3\n4;5;6\n");
        assert_eq!(out.status, DetectionStatus::Detected);
        assert_eq!(out.dialect, Some(dialect(Some(';'), None, None)));
        let win = &out.breakdowns[&out.dialect.unwrap()];
        assert_eq!(win.breakdown.pattern, 2.0);
        // every cell is a known type (letters are alphanumeric), so the
        // type score contributes a clean 1.0
        assert_eq!(win.score, 2.0);
    }

    #[test]
    fn detects_caret_delimiter_with_tilde_quote() {
        let out = full("a^b^c\n1^2^3\n~x^y~^z^w");
        assert_eq!(out.dialect, Some(dialect(Some('^'), Some('~'), None)));
        let win = &out.breakdowns[&out.dialect.unwrap()];
        assert!((win.score - 16.0 / 9.0).abs() < 1e-12);
        // the runner-up reads the quoted caret as structure and pays for it
        let runner_up = &out.breakdowns[&dialect(Some('^'), None, None)];
        assert!((runner_up.score - 5.0 / 6.0).abs() < 1e-12);
    }

    #[test]
    fn fully_quoted_file_does_not_see_the_masked_dialect() {
        let out = full("\"a,b\"\n\"c,d\"");
        let masked = dialect(Some(','), Some('"'), None);
        assert!(!out.breakdowns.contains_key(&masked));
        assert!(!out.pruned.contains(&masked));
        assert_eq!(out.status, DetectionStatus::Detected);
    }

    #[test]
    fn spurious_quote_tie_breaks_toward_no_quote() {
        // the apostrophe never quotes anything, so both candidates parse
        // identically and the simpler dialect wins
        let text = "it's,b\n1,2";
        let out = full(text);
        assert_eq!(out.status, DetectionStatus::Detected);
        assert_eq!(out.dialect, Some(dialect(Some(','), None, None)));
        assert_eq!(out.tie_set, None);

        let raw = detect(text, DetectorVariant::NoTieBreak, &DetectParams::default());
        assert_eq!(raw.status, DetectionStatus::TieUnbroken);
        assert_eq!(
            raw.tie_set,
            Some(vec![
                dialect(Some(','), None, None),
                dialect(Some(','), Some('\''), None),
            ])
        );
    }

    #[test]
    fn real_ties_stay_ties() {
        // comma and semicolon split one row each, perfectly symmetric
        let out = full("a,b\n1;2");
        assert_eq!(out.status, DetectionStatus::TieUnbroken);
        assert_eq!(out.dialect, None);
        assert_eq!(
            out.tie_set,
            Some(vec![dialect(Some(','), None, None), dialect(Some(';'), None, None)])
        );
        let a = out.breakdowns[&dialect(Some(','), None, None)].score;
        let b = out.breakdowns[&dialect(Some(';'), None, None)].score;
        assert_eq!(a.to_bits(), b.to_bits());
    }

    #[test]
    fn tie_breaking_collapses_chains() {
        // (',', ε, ε) <- (',', q, ε) <- (',', q, e) must collapse to the first
        // when all three parse identically
        let ties = [
            dialect(Some(','), None, None),
            dialect(Some(','), Some('\''), None),
            dialect(Some(','), Some('\''), Some('\\')),
        ];
        let survivors = break_ties("a,b\n1,2", &ties);
        assert_eq!(survivors, vec![dialect(Some(','), None, None)]);
    }

    #[test]
    fn tie_breaking_requires_identical_tables() {
        let ties = [dialect(Some(','), None, None), dialect(Some(','), Some('\''), None)];
        // here the quote fires ('a' is quoted), tables differ, tie stands
        let survivors = break_ties("'a',b\n1,2", &ties);
        assert_eq!(survivors, ties.to_vec());
    }

    #[test]
    fn pruning_skips_hopeless_candidates_without_changing_the_answer() {
        let text = "1,5;2;3\n4;5,5;6|x";
        let out = full(text);
        assert_eq!(out.dialect, Some(dialect(Some(';'), None, None)));
        assert!(out.pruned.contains(&dialect(Some('|'), None, None)));

        // pruned and evaluated candidates partition the candidate set
        let candidates = get_dialects(text, &CharacterPolicy::default());
        let mut seen: Vec<Dialect> = out.breakdowns.keys().copied().collect();
        seen.extend(out.pruned.iter().copied());
        seen.sort();
        assert_eq!(seen, candidates.as_slice());

        // exhaustive rescoring agrees with the pruned run
        let constants = ScoreConstants::default();
        let best = candidates
            .iter()
            .map(|d| (d, consistency(text, d, &constants).unwrap().q))
            .max_by(|a, b| a.1.total_cmp(&b.1))
            .unwrap();
        assert_eq!(Some(*best.0), out.dialect);
    }

    #[test]
    fn effective_score_tracks_the_variant() {
        let text = "a,b\n1,2\nx,y\n";
        for variant in DetectorVariant::ALL {
            let out = detect(text, variant, &DetectParams::default());
            for cs in out.breakdowns.values() {
                let b = cs.breakdown;
                assert_eq!(b.q, b.pattern * b.type_clamped);
                match variant {
                    DetectorVariant::Full | DetectorVariant::NoTieBreak => {
                        assert_eq!(cs.score, b.q)
                    }
                    DetectorVariant::PatternOnly => assert_eq!(cs.score, b.pattern),
                    DetectorVariant::TypeOnly => assert_eq!(cs.score, b.type_clamped),
                    DetectorVariant::Wrangler => {}
                }
            }
        }
    }

    #[test]
    fn wrangler_prefers_homogeneous_columns() {
        let out = detect("a,b\n1,2", DetectorVariant::Wrangler, &DetectParams::default());
        assert_eq!(out.status, DetectionStatus::Detected);
        assert_eq!(out.dialect, Some(dialect(Some(','), None, None)));
        let win = out.breakdowns[&out.dialect.unwrap()].score;
        // two columns, each split half alphanumeric half number: 2 * 0.5^2
        assert!((win - 0.5).abs() < 1e-12);
        // the single-column reading pays the rival-delimiter penalty
        let eps = out.breakdowns[&Dialect::empty()].score;
        assert!((eps - (0.5 - 1.0)).abs() < 1e-12);
    }

    #[test]
    fn wrangler_counts_padding_as_empty() {
        let table = CellTable::from_strs(&[&["1", "2"], &["3"]]);
        let score = column_homogeneity_score(&table, &BTreeSet::new()).unwrap();
        // columns fully numeric (1.0 each), one padding slot in a 2x2 grid
        assert!((score - (1.0 - 0.25)).abs() < 1e-12);
    }

    #[test]
    fn wrangler_score_matches_detect() {
        let text = "a,b\n1,2";
        let policy = CharacterPolicy::default();
        let out = detect(text, DetectorVariant::Wrangler, &DetectParams::default());
        for (d, cs) in &out.breakdowns {
            assert_eq!(wrangler_score(text, d, &policy).unwrap(), cs.score);
        }
    }

    #[test]
    fn variant_names_round_trip() {
        for v in DetectorVariant::ALL {
            assert_eq!(v.as_str().parse::<DetectorVariant>().unwrap(), v);
        }
        assert!("bogus".parse::<DetectorVariant>().is_err());
        assert_eq!(serde_json::to_string(&DetectorVariant::PatternOnly).unwrap(), "\"pattern-only\"");
    }

    #[test]
    fn json_view_is_stable() {
        let text = "a;b;c\n1;2;3\n\"x\";y;z\n";
        let a = serde_json::to_string(&full(text).to_json()).unwrap();
        let b = serde_json::to_string(&full(text).to_json()).unwrap();
        assert_eq!(a, b);
        let v = full(text).to_json();
        assert_eq!(v["status"], "detected");
        assert_eq!(v["dialect"]["delimiter"], ";");
        assert!(v["ties"].is_null());
        assert!(v["scores"].as_array().unwrap().len() >= 2);
        assert!(v["pruned"].is_array());
    }
}
