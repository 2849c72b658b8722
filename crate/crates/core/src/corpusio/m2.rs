use std::collections::BTreeMap;
use std::fmt::Write as _;

use super::{AnnotatedSentence, AnnotatorId, Corpus, CorpusError, Edit, Warning};
use crate::taxonomy::{ErrorLabel, LabelError, Taxonomy};

const SEP: &str = "|||";
const NONE: &str = "-NONE-";
const REQUIRED: &str = "REQUIRED";

/// Soft limit on annotation versions per sentence; more are accepted with a warning.
pub const MAX_ANNOTATORS: usize = 3;

/// Parses M2 text with the default label scheme.
pub fn parse_m2(text: &str) -> Result<(Corpus, Vec<Warning>), CorpusError> {
    parse_m2_with(text, &Taxonomy::default())
}

pub fn parse_m2_with(
    text: &str,
    taxonomy: &Taxonomy,
) -> Result<(Corpus, Vec<Warning>), CorpusError> {
    let mut corpus = Vec::new();
    let mut warnings = Vec::new();
    let mut current: Option<(usize, AnnotatedSentence)> = None;

    let finish = |block: Option<(usize, AnnotatedSentence)>,
                  corpus: &mut Corpus,
                  warnings: &mut Vec<Warning>|
     -> Result<(), CorpusError> {
        if let Some((line, mut sentence)) = block {
            for edits in sentence.annotations.values_mut() {
                edits.sort_by_key(|e| (e.start, e.end));
            }
            sentence
                .validate()
                .map_err(|source| CorpusError::Validation { line, source })?;
            if sentence.annotations.len() > MAX_ANNOTATORS {
                warnings.push(Warning {
                    line,
                    message: format!(
                        "{} annotators (at most {} expected)",
                        sentence.annotations.len(),
                        MAX_ANNOTATORS
                    ),
                });
            }
            corpus.push(sentence);
        }
        Ok(())
    };

    for (idx, raw) in text.lines().enumerate() {
        let lineno = idx + 1;
        let line = raw.trim_end_matches('\r');
        let perr = |message: &str| CorpusError::Parse {
            line: lineno,
            text: line.to_string(),
            message: message.to_string(),
        };
        if line.trim().is_empty() {
            finish(current.take(), &mut corpus, &mut warnings)?;
            continue;
        }
        if line == "S" || line.starts_with("S ") {
            if current.is_some() {
                return Err(perr("`S` line inside a block (missing blank line)"));
            }
            let tokens = line[1..].split(' ').filter(|t| !t.is_empty());
            current = Some((
                lineno,
                AnnotatedSentence::new(tokens.map(str::to_string).collect()),
            ));
        } else if let Some(rest) = line.strip_prefix("A ") {
            let Some((_, sentence)) = current.as_mut() else {
                return Err(perr("`A` line before any `S` line"));
            };
            let fields: Vec<&str> = rest.split(SEP).collect();
            if fields.len() != 6 {
                return Err(perr("expected 6 `|||`-separated fields"));
            }
            if fields[3] != REQUIRED || fields[4] != NONE {
                return Err(perr("fields 4 and 5 must be `REQUIRED|||-NONE-`"));
            }
            let annotator: AnnotatorId = fields[5]
                .trim()
                .parse()
                .map_err(|_| perr("annotator id is not a non-negative integer"))?;
            let mut span = fields[0].split(' ');
            let (start, end) = match (span.next(), span.next(), span.next()) {
                (Some(s), Some(e), None) => (s, e),
                _ => return Err(perr("span must be `<start> <end>`")),
            };
            if start == "-1" && end == "-1" {
                if fields[1] != "noop" {
                    return Err(perr("span -1 -1 is reserved for `noop`"));
                }
                sentence.annotations.entry(annotator).or_default();
                continue;
            }
            let start: usize = start
                .parse()
                .map_err(|_| perr("span start is not a non-negative integer"))?;
            let end: usize = end
                .parse()
                .map_err(|_| perr("span end is not a non-negative integer"))?;
            if end < start {
                return Err(perr("span end precedes start"));
            }
            let label = match taxonomy.parse_label(fields[1]) {
                Ok(ErrorLabel::Noop) => return Err(perr("`noop` requires span -1 -1")),
                Ok(label) => label,
                Err(LabelError::UnknownLabel(tag)) => {
                    warnings.push(Warning {
                        line: lineno,
                        message: format!("unknown label `{tag}` kept as opaque"),
                    });
                    ErrorLabel::Opaque(tag)
                }
                Err(e @ LabelError::InvalidCompound { .. }) => return Err(perr(&e.to_string())),
            };
            let correction = if fields[2] == NONE {
                Vec::new()
            } else {
                fields[2]
                    .split(' ')
                    .filter(|t| !t.is_empty())
                    .map(str::to_string)
                    .collect()
            };
            sentence
                .annotations
                .entry(annotator)
                .or_default()
                .push(Edit::new(start, end, label, correction, annotator));
        } else {
            return Err(perr("expected an `S` or `A` line"));
        }
    }
    finish(current.take(), &mut corpus, &mut warnings)?;
    Ok((corpus, warnings))
}

/// Writes a corpus as M2. Edits go out sorted by annotator, then span;
/// annotators without edits are written as `noop` lines.
pub fn serialize_m2(corpus: &[AnnotatedSentence]) -> String {
    let mut out = String::new();
    for (i, sentence) in corpus.iter().enumerate() {
        if i > 0 {
            out.push('\n');
        }
        write_sentence(&mut out, &sentence.source, &sentence.annotations);
    }
    out
}

pub(crate) fn write_sentence(
    out: &mut String,
    source: &[String],
    annotations: &BTreeMap<AnnotatorId, Vec<Edit>>,
) {
    out.push('S');
    for t in source {
        out.push(' ');
        out.push_str(t);
    }
    out.push('\n');
    for (annotator, edits) in annotations {
        if edits.is_empty() {
            let _ = writeln!(
                out,
                "A -1 -1|||noop|||{NONE}|||{REQUIRED}|||{NONE}|||{annotator}"
            );
            continue;
        }
        let mut sorted: Vec<&Edit> = edits.iter().collect();
        sorted.sort_by_key(|e| (e.start, e.end));
        for e in sorted {
            let _ = writeln!(out, "A {e}|||{REQUIRED}|||{NONE}|||{annotator}");
        }
    }
}
