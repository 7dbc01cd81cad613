//! Dialects, character policies, and candidate dialect enumeration.
//!
//! A candidate dialect only ever uses characters that actually occur in the
//! file (URLs excepted, which are filtered out first so their punctuation
//! does not masquerade as structure). Which characters qualify is governed by
//! a [`CharacterPolicy`]: blocked delimiter characters, blocked Unicode
//! general categories, the allowed quote characters, and characters barred
//! from acting as escapes.

use std::collections::{BTreeMap, BTreeSet};

use once_cell::sync::Lazy;
use regex::Regex;
use serde::de::Error as _;
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;
use unicode_properties::{GeneralCategory, UnicodeGeneralCategory};

use crate::parser;

/// A dialect: delimiter, quote char, escape char. `None` means the component
/// is absent. Components are pairwise distinct unless absent.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Dialect {
    delimiter: Option<char>,
    quote_char: Option<char>,
    escape_char: Option<char>,
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum DialectError {
    #[error("dialect components must be pairwise distinct: {0:?} used twice")]
    ComponentsNotDistinct(char),
    #[error("dialect component {0:?} must be a single character or empty")]
    NotSingleChar(String),
}

impl Dialect {
    pub fn new(
        delimiter: Option<char>,
        quote_char: Option<char>,
        escape_char: Option<char>,
    ) -> Result<Self, DialectError> {
        for (a, b) in [
            (delimiter, quote_char),
            (delimiter, escape_char),
            (quote_char, escape_char),
        ] {
            if let (Some(x), Some(y)) = (a, b) {
                if x == y {
                    return Err(DialectError::ComponentsNotDistinct(x));
                }
            }
        }
        Ok(Dialect { delimiter, quote_char, escape_char })
    }

    /// The dialect with every component absent: no splitting, no quoting.
    pub fn empty() -> Self {
        Dialect { delimiter: None, quote_char: None, escape_char: None }
    }

    pub fn delimiter(&self) -> Option<char> {
        self.delimiter
    }

    pub fn quote_char(&self) -> Option<char> {
        self.quote_char
    }

    pub fn escape_char(&self) -> Option<char> {
        self.escape_char
    }

    pub fn with_delimiter(&self, delimiter: Option<char>) -> Result<Self, DialectError> {
        Dialect::new(delimiter, self.quote_char, self.escape_char)
    }

    pub fn with_quote_char(&self, quote_char: Option<char>) -> Result<Self, DialectError> {
        Dialect::new(self.delimiter, quote_char, self.escape_char)
    }

    pub fn with_escape_char(&self, escape_char: Option<char>) -> Result<Self, DialectError> {
        Dialect::new(self.delimiter, self.quote_char, escape_char)
    }
}

impl std::fmt::Display for Dialect {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        fn part(c: Option<char>) -> String {
            match c {
                Some(c) => format!("{c:?}"),
                None => "ε".to_string(),
            }
        }
        write!(
            f,
            "({}, {}, {})",
            part(self.delimiter),
            part(self.quote_char),
            part(self.escape_char)
        )
    }
}

// On the wire a dialect is {"delimiter": ",", "quotechar": "", "escapechar":
// ""} with "" for an absent component.
#[derive(Serialize, Deserialize)]
struct DialectWire {
    delimiter: String,
    quotechar: String,
    escapechar: String,
}

fn char_to_wire(c: Option<char>) -> String {
    c.map(String::from).unwrap_or_default()
}

fn wire_to_char(s: &str) -> Result<Option<char>, DialectError> {
    let mut chars = s.chars();
    match (chars.next(), chars.next()) {
        (None, _) => Ok(None),
        (Some(c), None) => Ok(Some(c)),
        _ => Err(DialectError::NotSingleChar(s.to_string())),
    }
}

impl Serialize for Dialect {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        DialectWire {
            delimiter: char_to_wire(self.delimiter),
            quotechar: char_to_wire(self.quote_char),
            escapechar: char_to_wire(self.escape_char),
        }
        .serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for Dialect {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let wire = DialectWire::deserialize(deserializer)?;
        let build = || -> Result<Dialect, DialectError> {
            Dialect::new(
                wire_to_char(&wire.delimiter)?,
                wire_to_char(&wire.quotechar)?,
                wire_to_char(&wire.escapechar)?,
            )
        };
        build().map_err(D::Error::custom)
    }
}

/// Character-class sets steering candidate enumeration, serializable so a
/// policy file can override them.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CharacterPolicy {
    /// Characters never allowed as delimiters, regardless of category.
    pub blocked_delimiters: BTreeSet<char>,
    /// Unicode general categories (two-letter abbreviations) whose characters
    /// cannot be delimiters. Tab bypasses this check.
    pub blocked_categories: BTreeSet<String>,
    /// The only characters that may act as quotes.
    pub allowed_quotes: BTreeSet<char>,
    /// Punctuation characters barred from acting as escapes.
    pub blocked_escapes: BTreeSet<char>,
}

impl Default for CharacterPolicy {
    fn default() -> Self {
        CharacterPolicy {
            blocked_delimiters: ['.', '/', '"', '\''].into(),
            blocked_categories: ["Lu", "Ll", "Lt", "Lm", "Lo", "Nd", "Nl", "No", "Ps", "Pe", "Cc", "Co"]
                .map(String::from)
                .into(),
            allowed_quotes: ['\'', '"', '~'].into(),
            blocked_escapes: ['!', '?', '"', '\'', '.', ',', ';', ':', '%', '*', '&', '#'].into(),
        }
    }
}

/// Two-letter abbreviation of a character's Unicode general category.
pub fn general_category(c: char) -> &'static str {
    match c.general_category() {
        GeneralCategory::UppercaseLetter => "Lu",
        GeneralCategory::LowercaseLetter => "Ll",
        GeneralCategory::TitlecaseLetter => "Lt",
        GeneralCategory::ModifierLetter => "Lm",
        GeneralCategory::OtherLetter => "Lo",
        GeneralCategory::NonspacingMark => "Mn",
        GeneralCategory::SpacingMark => "Mc",
        GeneralCategory::EnclosingMark => "Me",
        GeneralCategory::DecimalNumber => "Nd",
        GeneralCategory::LetterNumber => "Nl",
        GeneralCategory::OtherNumber => "No",
        GeneralCategory::ConnectorPunctuation => "Pc",
        GeneralCategory::DashPunctuation => "Pd",
        GeneralCategory::OpenPunctuation => "Ps",
        GeneralCategory::ClosePunctuation => "Pe",
        GeneralCategory::InitialPunctuation => "Pi",
        GeneralCategory::FinalPunctuation => "Pf",
        GeneralCategory::OtherPunctuation => "Po",
        GeneralCategory::MathSymbol => "Sm",
        GeneralCategory::CurrencySymbol => "Sc",
        GeneralCategory::ModifierSymbol => "Sk",
        GeneralCategory::OtherSymbol => "So",
        GeneralCategory::SpaceSeparator => "Zs",
        GeneralCategory::LineSeparator => "Zl",
        GeneralCategory::ParagraphSeparator => "Zp",
        GeneralCategory::Control => "Cc",
        GeneralCategory::Format => "Cf",
        GeneralCategory::Surrogate => "Cs",
        GeneralCategory::PrivateUse => "Co",
        GeneralCategory::Unassigned => "Cn",
    }
}

static URL_RE: Lazy<Regex> = Lazy::new(|| {
    // scheme:// or a www. prefix, then greedily to the next whitespace
    Regex::new(r"\b(?:[A-Za-z][A-Za-z0-9+.-]*://|www\.)\S+").expect("URL regex compiles")
});

/// Replace every URL with the single letter `U` so URL punctuation cannot
/// pollute delimiter or escape enumeration.
pub fn filter_urls(text: &str) -> String {
    URL_RE.replace_all(text, "U").into_owned()
}

/// Potential delimiters occurring in `text` (assumed URL-filtered), plus the
/// absent delimiter. Tab always qualifies; every other character must clear
/// the blocked-character and blocked-category sets.
pub fn get_delimiters(text: &str, policy: &CharacterPolicy) -> BTreeSet<Option<char>> {
    let mut out: BTreeSet<Option<char>> = [None].into();
    let mut seen = BTreeSet::new();
    for c in text.chars() {
        if !seen.insert(c) {
            continue;
        }
        let allowed = c == '\t'
            || (!policy.blocked_delimiters.contains(&c)
                && !policy.blocked_categories.contains(general_category(c)));
        if allowed {
            out.insert(Some(c));
        }
    }
    out
}

/// Allowed quote characters occurring in `text`, plus the absent quote.
pub fn get_quotechars(text: &str, policy: &CharacterPolicy) -> BTreeSet<Option<char>> {
    let mut out: BTreeSet<Option<char>> = [None].into();
    for c in text.chars() {
        if policy.allowed_quotes.contains(&c) {
            out.insert(Some(c));
        }
    }
    out
}

/// Whether `c` may act as an escape character: other-punctuation (Po) and not
/// on the policy's blocklist.
pub fn is_potential_escape(c: char, policy: &CharacterPolicy) -> bool {
    !policy.blocked_escapes.contains(&c) && general_category(c) == "Po"
}

/// True iff every occurrence of the dialect's delimiter in `text` lies
/// strictly inside a quoted section under the dialect's quote and escape
/// rules. Zero occurrences count as masked. A dialect without a delimiter is
/// never masked.
pub fn masked_by_quote(text: &str, dialect: &Dialect) -> bool {
    if dialect.delimiter().is_none() {
        return false;
    }
    let out = parser::parse(text, dialect);
    out.delimiters_outside_quotes == 0
}

/// The candidate dialects for a file, in canonical order (by delimiter with ε
/// first, then quote char, then escape char). Never empty: the all-absent
/// dialect is always a member.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(transparent)]
pub struct CandidateSet {
    dialects: Vec<Dialect>,
}

impl CandidateSet {
    fn from_sorted_set(set: BTreeSet<Dialect>) -> Self {
        CandidateSet { dialects: set.into_iter().collect() }
    }

    pub fn iter(&self) -> std::slice::Iter<'_, Dialect> {
        self.dialects.iter()
    }

    pub fn len(&self) -> usize {
        self.dialects.len()
    }

    pub fn is_empty(&self) -> bool {
        self.dialects.is_empty()
    }

    pub fn contains(&self, d: &Dialect) -> bool {
        self.dialects.binary_search(d).is_ok()
    }

    pub fn as_slice(&self) -> &[Dialect] {
        &self.dialects
    }
}

impl<'a> IntoIterator for &'a CandidateSet {
    type Item = &'a Dialect;
    type IntoIter = std::slice::Iter<'a, Dialect>;
    fn into_iter(self) -> Self::IntoIter {
        self.dialects.iter()
    }
}

/// Build the candidate dialect set for `text`.
///
/// Pipeline: filter URLs; enumerate delimiters and quote chars from the
/// filtered text; for each (delimiter, quote) pair collect as escapes the
/// potential-escape characters that immediately precede an occurrence of
/// either, plus the absent escape; emit the product, dropping combinations
/// that reuse a character and dialects whose delimiter is fully masked by
/// quoting (checked against the original text, and only for dialects that
/// have a delimiter).
pub fn get_dialects(text: &str, policy: &CharacterPolicy) -> CandidateSet {
    let filtered = filter_urls(text);
    let delimiters = get_delimiters(&filtered, policy);
    let quotes = get_quotechars(&filtered, policy);

    // potential escapes keyed by the special character they precede
    let mut preceders: BTreeMap<char, BTreeSet<char>> = BTreeMap::new();
    let chars: Vec<char> = filtered.chars().collect();
    for pair in chars.windows(2) {
        let (u, v) = (pair[0], pair[1]);
        if is_potential_escape(u, policy) {
            preceders.entry(v).or_default().insert(u);
        }
    }

    let mut out = BTreeSet::new();
    for &d in &delimiters {
        for &q in &quotes {
            if d.is_some() && d == q {
                continue;
            }
            let mut escapes: BTreeSet<Option<char>> = [None].into();
            for v in [d, q].into_iter().flatten() {
                if let Some(us) = preceders.get(&v) {
                    escapes.extend(us.iter().map(|&u| Some(u)));
                }
            }
            for e in escapes {
                if e.is_some() && (e == d || e == q) {
                    continue;
                }
                let candidate =
                    Dialect::new(d, q, e).expect("distinctness enforced by construction");
                if d.is_some() && masked_by_quote(text, &candidate) {
                    continue;
                }
                out.insert(candidate);
            }
        }
    }
    CandidateSet::from_sorted_set(out)
}
