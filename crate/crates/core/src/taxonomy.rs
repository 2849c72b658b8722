//! Error-label scheme for Estonian learner text.
//!
//! Twelve base labels cover missing, unnecessary and replaced words and
//! punctuation; replacements are split further into orthography,
//! capitalisation, compounding, nominal and verb form, word choice and word
//! order. An edit whose token carries several errors at once is tagged with a
//! compound label such as `R:SPELL+R:NOM-FORM`.
//!
//! The published corpora are not guaranteed to use these literal codes, so a
//! [`Taxonomy`] can carry a tag remapping table (`corpus-tag<TAB>canonical`)
//! and an optional compound allowlist.

use std::collections::{HashMap, HashSet};
use std::fmt;
use std::str::FromStr;

use thiserror::Error;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum BaseLabel {
    /// Missing word.
    MissingWord,
    /// Unnecessary word.
    UnnecessaryWord,
    MissingPunct,
    UnnecessaryPunct,
    ReplacePunct,
    /// Letter orthography.
    Spell,
    /// Capitalisation.
    Cap,
    /// Writing together or apart.
    Compound,
    NominalForm,
    VerbForm,
    /// Word choice.
    Lexical,
    /// Word order; a multi-word replacement.
    WordOrder,
}

impl BaseLabel {
    pub const ALL: [BaseLabel; 12] = [
        BaseLabel::MissingWord,
        BaseLabel::UnnecessaryWord,
        BaseLabel::MissingPunct,
        BaseLabel::UnnecessaryPunct,
        BaseLabel::ReplacePunct,
        BaseLabel::Spell,
        BaseLabel::Cap,
        BaseLabel::Compound,
        BaseLabel::NominalForm,
        BaseLabel::VerbForm,
        BaseLabel::Lexical,
        BaseLabel::WordOrder,
    ];

    pub fn code(self) -> &'static str {
        match self {
            BaseLabel::MissingWord => "M:WORD",
            BaseLabel::UnnecessaryWord => "U:WORD",
            BaseLabel::MissingPunct => "M:PUNCT",
            BaseLabel::UnnecessaryPunct => "U:PUNCT",
            BaseLabel::ReplacePunct => "R:PUNCT",
            BaseLabel::Spell => "R:SPELL",
            BaseLabel::Cap => "R:CAP",
            BaseLabel::Compound => "R:CMP",
            BaseLabel::NominalForm => "R:NOM-FORM",
            BaseLabel::VerbForm => "R:VERB-FORM",
            BaseLabel::Lexical => "R:LEX",
            BaseLabel::WordOrder => "R:WO",
        }
    }

    pub fn from_code(code: &str) -> Option<BaseLabel> {
        BaseLabel::ALL.iter().copied().find(|l| l.code() == code)
    }

    /// Replacement-family labels (`R:*`) are the only ones allowed in compounds.
    pub fn is_replacement(self) -> bool {
        self.code().starts_with("R:")
    }
}

impl fmt::Display for BaseLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.code())
    }
}

/// Label attached to an [`Edit`](crate::corpusio::Edit).
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum ErrorLabel {
    /// One base label, or an ordered compound of up to three.
    Typed(Vec<BaseLabel>),
    /// A tag outside the scheme, kept verbatim so third-party files stay scorable.
    Opaque(String),
    /// The `noop` sentinel: the annotator made no corrections.
    Noop,
    /// Hypothesis edits derived from alignment carry no label.
    Unlabeled,
}

pub const MAX_COMPOUND: usize = 3;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum LabelError {
    #[error("unknown error label `{0}`")]
    UnknownLabel(String),
    #[error("invalid compound label `{label}`: {reason}")]
    InvalidCompound { label: String, reason: String },
}

impl ErrorLabel {
    pub fn simple(label: BaseLabel) -> Self {
        ErrorLabel::Typed(vec![label])
    }

    pub fn is_word_order(&self) -> bool {
        matches!(self, ErrorLabel::Typed(c) if c.as_slice() == [BaseLabel::WordOrder])
    }

    pub fn contains(&self, label: BaseLabel) -> bool {
        matches!(self, ErrorLabel::Typed(c) if c.contains(&label))
    }
}

impl fmt::Display for ErrorLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ErrorLabel::Typed(components) => {
                for (i, c) in components.iter().enumerate() {
                    if i > 0 {
                        f.write_str("+")?;
                    }
                    f.write_str(c.code())?;
                }
                Ok(())
            }
            ErrorLabel::Opaque(text) => f.write_str(text),
            ErrorLabel::Noop => f.write_str("noop"),
            ErrorLabel::Unlabeled => f.write_str("-NONE-"),
        }
    }
}

impl FromStr for ErrorLabel {
    type Err = LabelError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        parse_label(s)
    }
}

/// Parses a label against the default scheme.
pub fn parse_label(text: &str) -> Result<ErrorLabel, LabelError> {
    Taxonomy::default().parse_label(text)
}

/// Components credited by per-type statistics. Empty for sentinel and opaque labels.
pub fn base_components(label: &ErrorLabel) -> Vec<BaseLabel> {
    match label {
        ErrorLabel::Typed(c) => c.clone(),
        _ => Vec::new(),
    }
}

fn check_compound(text: &str, components: &[BaseLabel]) -> Result<(), LabelError> {
    let invalid = |reason: &str| LabelError::InvalidCompound {
        label: text.to_string(),
        reason: reason.to_string(),
    };
    if components.len() > MAX_COMPOUND {
        return Err(invalid("more than three components"));
    }
    let mut seen = HashSet::new();
    for c in components {
        if !seen.insert(*c) {
            return Err(invalid("duplicate component"));
        }
        if *c == BaseLabel::WordOrder {
            return Err(invalid("R:WO cannot be compounded"));
        }
        if !c.is_replacement() {
            return Err(invalid("only R:* components may be compounded"));
        }
    }
    Ok(())
}

/// Label parsing configuration: tag remapping and compound allowlist.
#[derive(Debug, Clone, Default)]
pub struct Taxonomy {
    mapping: HashMap<String, String>,
    /// `None` accepts every structurally valid compound.
    compound_allowlist: Option<HashSet<Vec<BaseLabel>>>,
}

impl Taxonomy {
    /// Reads a `corpus-tag<TAB>canonical-code` mapping file. Blank lines and
    /// `#` comments are ignored.
    pub fn with_mapping_text(mut self, text: &str) -> Result<Self, MappingError> {
        for (idx, raw) in text.lines().enumerate() {
            let line = raw.trim_end_matches('\r');
            if line.trim().is_empty() || line.starts_with('#') {
                continue;
            }
            let mut parts = line.split('\t');
            match (parts.next(), parts.next(), parts.next()) {
                (Some(from), Some(to), None) if !from.is_empty() && !to.is_empty() => {
                    self.mapping.insert(from.to_string(), to.to_string());
                }
                _ => {
                    return Err(MappingError {
                        line: idx + 1,
                        text: line.to_string(),
                    })
                }
            }
        }
        Ok(self)
    }

    pub fn with_compound_allowlist<I>(mut self, compounds: I) -> Self
    where
        I: IntoIterator<Item = Vec<BaseLabel>>,
    {
        self.compound_allowlist = Some(compounds.into_iter().collect());
        self
    }

    fn remap<'a>(&'a self, tag: &'a str) -> &'a str {
        self.mapping.get(tag).map(String::as_str).unwrap_or(tag)
    }

    pub fn parse_label(&self, text: &str) -> Result<ErrorLabel, LabelError> {
        let text = self.remap(text.trim());
        if text == "noop" {
            return Ok(ErrorLabel::Noop);
        }
        let mut components = Vec::new();
        for part in text.split('+') {
            let part = self.remap(part);
            match BaseLabel::from_code(part) {
                Some(l) => components.push(l),
                None => return Err(LabelError::UnknownLabel(text.to_string())),
            }
        }
        if components.len() > 1 {
            check_compound(text, &components)?;
            if let Some(allow) = &self.compound_allowlist {
                if !allow.contains(&components) {
                    return Err(LabelError::InvalidCompound {
                        label: text.to_string(),
                        reason: "not in the compound allowlist".to_string(),
                    });
                }
            }
        }
        Ok(ErrorLabel::Typed(components))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("label mapping line {line}: expected `corpus-tag<TAB>canonical-code`, got `{text}`")]
pub struct MappingError {
    pub line: usize,
    pub text: String,
}

/// Every compound the default scheme accepts: ordered, duplicate-free
/// combinations of two or three non-WO replacement labels.
pub fn default_compounds() -> Vec<Vec<BaseLabel>> {
    let r: Vec<BaseLabel> = BaseLabel::ALL
        .iter()
        .copied()
        .filter(|l| l.is_replacement() && *l != BaseLabel::WordOrder)
        .collect();
    let mut out = Vec::new();
    for &a in &r {
        for &b in &r {
            if a == b {
                continue;
            }
            out.push(vec![a, b]);
            for &c in &r {
                if c != a && c != b {
                    out.push(vec![a, b, c]);
                }
            }
        }
    }
    out
}
