//! Corpus types and the three text formats the toolkit reads and writes:
//! M2 annotation files, a CoNLL-U subset (ID, FORM, UPOS) and pre-tokenised
//! plain text.

mod conllu;
mod m2;

use std::collections::BTreeMap;
use std::fmt;

use thiserror::Error;

use crate::taxonomy::ErrorLabel;

pub use conllu::{parse_conllu, TaggedSentence};
pub(crate) use m2::write_sentence;
pub use m2::{parse_m2, parse_m2_with, serialize_m2};

/// Annotator identifier as written in the last M2 field.
pub type AnnotatorId = u32;

/// One annotated correction over a half-open token span.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Edit {
    pub start: usize,
    pub end: usize,
    pub label: ErrorLabel,
    /// Replacement tokens; empty means deletion.
    pub correction: Vec<String>,
    pub annotator: AnnotatorId,
}

impl Edit {
    pub fn new(
        start: usize,
        end: usize,
        label: ErrorLabel,
        correction: Vec<String>,
        annotator: AnnotatorId,
    ) -> Self {
        Edit {
            start,
            end,
            label,
            correction,
            annotator,
        }
    }

    pub fn is_insertion(&self) -> bool {
        self.start == self.end
    }

    pub fn is_word_order(&self) -> bool {
        self.label.is_word_order()
    }

    /// Token-count change caused by applying this edit.
    pub fn length_delta(&self) -> isize {
        self.correction.len() as isize - (self.end - self.start) as isize
    }

    /// True if `other` lies inside this edit's span and the two overlap.
    pub fn nests(&self, other: &Edit) -> bool {
        spans_overlap((self.start, self.end), (other.start, other.end))
            && self.start <= other.start
            && other.end <= self.end
    }
}

impl fmt::Display for Edit {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let correction = if self.correction.is_empty() {
            "-NONE-".to_string()
        } else {
            self.correction.join(" ")
        };
        write!(
            f,
            "{} {}|||{}|||{}",
            self.start, self.end, self.label, correction
        )
    }
}

/// Overlap as used by the one-edit-per-region invariant. Two insertions at the
/// same boundary overlap; an insertion at the boundary of a span does not.
pub fn spans_overlap(a: (usize, usize), b: (usize, usize)) -> bool {
    if a.0 == a.1 && b.0 == b.1 {
        return a.0 == b.0;
    }
    a.0 < b.1 && b.0 < a.1
}

/// Intersection as used by detection scoring: like overlap, but a pure
/// insertion also intersects any span that touches its boundary.
pub fn spans_intersect(a: (usize, usize), b: (usize, usize)) -> bool {
    if a.0 == a.1 || b.0 == b.1 {
        a.0 <= b.1 && b.0 <= a.1
    } else {
        a.0 < b.1 && b.0 < a.1
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct AnnotatedSentence {
    pub source: Vec<String>,
    /// Edits per annotator, sorted by `(start, end)`. An empty list is an
    /// explicit "no corrections needed" annotation.
    pub annotations: BTreeMap<AnnotatorId, Vec<Edit>>,
}

impl AnnotatedSentence {
    pub fn new(source: Vec<String>) -> Self {
        AnnotatedSentence {
            source,
            annotations: BTreeMap::new(),
        }
    }

    pub fn with_annotator(mut self, annotator: AnnotatorId, mut edits: Vec<Edit>) -> Self {
        for e in &mut edits {
            e.annotator = annotator;
        }
        edits.sort_by_key(|e| (e.start, e.end));
        self.annotations.insert(annotator, edits);
        self
    }

    /// Checks span bounds and the overlap rules for every annotator.
    pub fn validate(&self) -> Result<(), EditError> {
        for edits in self.annotations.values() {
            validate_edits(self.source.len(), edits)?;
        }
        Ok(())
    }

    /// The corrected sentence of one annotator.
    pub fn corrected(&self, annotator: AnnotatorId) -> Option<Result<Vec<String>, EditError>> {
        self.annotations
            .get(&annotator)
            .map(|edits| apply_edits(&self.source, edits))
    }
}

pub type Corpus = Vec<AnnotatedSentence>;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum EditError {
    #[error("edit `{edit}` is out of bounds for a sentence of {len} tokens")]
    OutOfBounds { edit: String, len: usize },
    #[error("edits `{first}` and `{second}` overlap")]
    Overlap { first: String, second: String },
}

/// Enforces `start <= end <= len` and the overlap rules: edits of the same
/// kind never overlap, and a non-word-order edit may only overlap a word-order
/// edit by being fully nested inside it.
pub fn validate_edits(len: usize, edits: &[Edit]) -> Result<(), EditError> {
    for e in edits {
        if e.start > e.end || e.end > len {
            return Err(EditError::OutOfBounds {
                edit: e.to_string(),
                len,
            });
        }
    }
    for (i, a) in edits.iter().enumerate() {
        for b in &edits[i + 1..] {
            if !spans_overlap((a.start, a.end), (b.start, b.end)) {
                continue;
            }
            let ok = match (a.is_word_order(), b.is_word_order()) {
                (true, false) => a.nests(b),
                (false, true) => b.nests(a),
                _ => false,
            };
            if !ok {
                return Err(EditError::Overlap {
                    first: a.to_string(),
                    second: b.to_string(),
                });
            }
        }
    }
    Ok(())
}

/// Applies one annotator's edits to `source`.
///
/// Word-order edits already carry the fully corrected text, so edits nested
/// inside them are skipped. Everything else is spliced right to left.
pub fn apply_edits(source: &[String], edits: &[Edit]) -> Result<Vec<String>, EditError> {
    validate_edits(source.len(), edits)?;
    let mut applied: Vec<&Edit> = applicable_edits(edits).collect();
    applied.sort_by_key(|e| std::cmp::Reverse((e.start, e.end)));
    let mut out = source.to_vec();
    for e in applied {
        out.splice(e.start..e.end, e.correction.iter().cloned());
    }
    Ok(out)
}

/// The edits `apply_edits` actually splices: all except those nested in a
/// word-order edit.
pub fn applicable_edits(edits: &[Edit]) -> impl Iterator<Item = &Edit> {
    edits.iter().filter(move |e| {
        e.is_word_order() || !edits.iter().any(|w| w.is_word_order() && w.nests(e))
    })
}

/// Splits pre-tokenised plain text into sentences, one per line.
pub fn parse_plain(text: &str) -> Vec<Vec<String>> {
    text.lines()
        .map(|line| tokenize_line(line.trim_end_matches('\r')))
        .collect()
}

pub fn tokenize_line(line: &str) -> Vec<String> {
    line.split_whitespace().map(str::to_string).collect()
}

pub fn serialize_plain(sentences: &[Vec<String>]) -> String {
    let mut out = String::new();
    for s in sentences {
        out.push_str(&s.join(" "));
        out.push('\n');
    }
    out
}

/// Non-fatal findings reported by the lenient parts of the parsers.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Warning {
    pub line: usize,
    pub message: String,
}

impl fmt::Display for Warning {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "line {}: {}", self.line, self.message)
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum CorpusError {
    #[error("line {line}: {message}: `{text}`")]
    Parse {
        line: usize,
        text: String,
        message: String,
    },
    #[error("sentence starting at line {line}: {source}")]
    Validation {
        line: usize,
        #[source]
        source: EditError,
    },
}
