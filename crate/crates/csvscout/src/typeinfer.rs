//! Cell type inference over a fixed, ordered registry of type grammars.
//!
//! Every grammar is anchored to the whole cell and cells are never trimmed;
//! surrounding whitespace is data. The first matching type wins, so the
//! registry order below is part of the contract (e.g. "nan" is alphanumeric
//! because the alphanumeric grammar runs before the N/A literals).

use once_cell::sync::Lazy;
use regex::Regex;
use serde::Serialize;

/// Cell types in registry evaluation order. `Unknown` is the fallback for
/// cells no grammar matches.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum DataType {
    Empty,
    Url,
    Email,
    NumberGrouped,
    NumberPlain,
    Time,
    Percentage,
    Currency,
    Alphanumeric,
    Na,
    Date,
    #[serde(rename = "datetime")]
    DateTime,
    Unknown,
}

impl DataType {
    pub fn as_str(&self) -> &'static str {
        match self {
            DataType::Empty => "empty",
            DataType::Url => "url",
            DataType::Email => "email",
            DataType::NumberGrouped => "number_grouped",
            DataType::NumberPlain => "number_plain",
            DataType::Time => "time",
            DataType::Percentage => "percentage",
            DataType::Currency => "currency",
            DataType::Alphanumeric => "alphanumeric",
            DataType::Na => "na",
            DataType::Date => "date",
            DataType::DateTime => "datetime",
            DataType::Unknown => "unknown",
        }
    }
}

impl std::fmt::Display for DataType {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

/// One registry entry: a type plus the pattern strings whose union defines it.
pub struct TypeEntry {
    pub data_type: DataType,
    pub patterns: Vec<String>,
    regex: Regex,
}

/// The ordered registry of type grammars. Compiled once per process; use
/// [`registry`] for the shared instance.
pub struct TypeRegistry {
    entries: Vec<TypeEntry>,
}

// Grouped numbers use 3-digit groups with the opposite char as radix point
// and never carry an exponent.
const NUMBER_GROUPED: &str =
    r"[+-]?(?:\d{1,3}(?:,\d{3})+(?:\.\d+)?|\d{1,3}(?:\.\d{3})+(?:,\d+)?)";
// Plain numbers accept either comma or period as radix point; E-notation is
// allowed only with a period radix so digit-grouped forms like "1,234e5"
// stay unmatched.
const NUMBER_PLAIN: &str =
    r"[+-]?(?:(?:\d+(?:\.\d+)?|\.\d+)(?:[eE][+-]?\d+)?|\d+,\d+|,\d+)";
// Exactly HH:MM:SS, HH:MM, H:MM. No AM/PM, no one-digit hour with seconds.
const TIME: &str = r"(?:(?:[01]\d|2[0-3]):[0-5]\d(?::[0-5]\d)?|\d:[0-5]\d)";
// Specials permitted inside alphanumerics: space . ! ? ( ) and their
// full-width counterparts.
const ALNUM_SPECIAL: &str = r" .!?()！？（）．";

fn number_core() -> String {
    format!("(?:{NUMBER_GROUPED}|{NUMBER_PLAIN})")
}

fn alphanumeric_patterns() -> Vec<String> {
    let sp = ALNUM_SPECIAL.replace('.', r"\.");
    vec![
        // digits, then letters, with specials allowed as glue ("3 degrees")
        format!(r"^\p{{N}}+[{sp}]*\p{{L}}+[\p{{N}}\p{{L}}{sp}]*$"),
        format!(r"^\p{{L}}+[\p{{N}}\p{{L}}{sp}]*$"),
    ]
}

// 36 separated date formats: {YMD, DMY, MDY} x {4-, 2-digit year} x
// {zero-padded, unpadded} x {-, ., space}; plus 4 East Asian forms
// ({Chinese/Japanese, Korean} x {4-, 2-digit year}). 40 in total, and the
// golden test pins that count. Slash is deliberately not a separator.
fn date_patterns() -> Vec<String> {
    let mut out = Vec::new();
    let years = [r"\d{4}", r"\d{2}"];
    let months = [r"(?:0[1-9]|1[0-2])", r"(?:[1-9]|1[0-2])"];
    let days = [r"(?:0[1-9]|[12]\d|3[01])", r"(?:[1-9]|[12]\d|3[01])"];
    let seps = ["-", r"\.", " "];
    for year in years {
        for pad in 0..2 {
            let (m, d) = (months[pad], days[pad]);
            for sep in seps {
                out.push(format!("^{year}{sep}{m}{sep}{d}$"));
                out.push(format!("^{d}{sep}{m}{sep}{year}$"));
                out.push(format!("^{m}{sep}{d}{sep}{year}$"));
            }
        }
    }
    for year in years {
        let (m, d) = (r"(?:0?[1-9]|1[0-2])", r"(?:0?[1-9]|[12]\d|3[01])");
        out.push(format!("^{year}年{m}月{d}日$"));
        out.push(format!("^{year}년{m}월{d}일$"));
    }
    out
}

fn datetime_patterns() -> Vec<String> {
    let tz = r"(?:[+-](?:[01]\d|2[0-3]):?[0-5]\d)?";
    date_patterns()
        .iter()
        .map(|d| {
            let core = d.trim_start_matches('^').trim_end_matches('$');
            format!("^{core}[T ]{TIME}{tz}$")
        })
        .collect()
}

impl TypeRegistry {
    fn build() -> Self {
        let number = number_core();
        let specs: Vec<(DataType, Vec<String>)> = vec![
            (DataType::Empty, vec!["^$".into()]),
            (
                DataType::Url,
                vec![r"^(?:[A-Za-z][A-Za-z0-9+.-]*://\S+|www\.\S+)$".into()],
            ),
            (
                DataType::Email,
                vec![r"^[A-Za-z0-9._%+-]+@[A-Za-z0-9.-]+\.[A-Za-z]{2,}$".into()],
            ),
            (DataType::NumberGrouped, vec![format!("^{NUMBER_GROUPED}$")]),
            (DataType::NumberPlain, vec![format!("^{NUMBER_PLAIN}$")]),
            (DataType::Time, vec![format!("^{TIME}$")]),
            (DataType::Percentage, vec![format!("^{number}%$")]),
            (DataType::Currency, vec![format!(r"^\p{{Sc}}{number}$")]),
            (DataType::Alphanumeric, alphanumeric_patterns()),
            (DataType::Na, vec!["^(?:n/a|N/A)$".into()]),
            (DataType::Date, date_patterns()),
            (DataType::DateTime, datetime_patterns()),
        ];
        let entries = specs
            .into_iter()
            .map(|(data_type, patterns)| {
                let union = patterns.join("|");
                let regex = Regex::new(&union).expect("registry pattern must compile");
                TypeEntry { data_type, patterns, regex }
            })
            .collect();
        TypeRegistry { entries }
    }

    pub fn entries(&self) -> &[TypeEntry] {
        &self.entries
    }

    /// First matching type in registry order, or `Unknown`.
    pub fn detect(&self, cell: &str) -> DataType {
        for entry in &self.entries {
            if entry.regex.is_match(cell) {
                return entry.data_type;
            }
        }
        DataType::Unknown
    }

    /// Version of the Unicode tables backing character classification.
    pub fn unicode_version() -> String {
        let (major, minor, patch) = unicode_properties::UNICODE_VERSION;
        format!("{major}.{minor}.{patch}")
    }

    /// Dump of the registry (type names plus pattern strings) for the CLI
    /// `dump-types` command. `Unknown` is the fallback and carries no grammar.
    pub fn to_json(&self) -> serde_json::Value {
        serde_json::json!({
            "unicode_version": Self::unicode_version(),
            "types": self
                .entries
                .iter()
                .map(|e| serde_json::json!({"name": e.data_type.as_str(), "patterns": e.patterns}))
                .collect::<Vec<_>>(),
        })
    }
}

static REGISTRY: Lazy<TypeRegistry> = Lazy::new(TypeRegistry::build);

/// The shared, lazily compiled registry.
pub fn registry() -> &'static TypeRegistry {
    &REGISTRY
}

/// Type of a single cell. Whole-cell anchored; whitespace is significant.
pub fn detect_type(cell: &str) -> DataType {
    registry().detect(cell)
}

/// Whether the cell matches any registered type.
pub fn is_known_type(cell: &str) -> bool {
    detect_type(cell) != DataType::Unknown
}
