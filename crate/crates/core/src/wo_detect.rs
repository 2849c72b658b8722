//! Flags POS trigrams that appear in an unusual context.
//!
//! For a trigram `(t1, t2, t3)` with neighbours `prev` and `next` (sentence
//! boundaries become sentinel tags), the context probability is
//! `count(prev, t1, t2, t3, next) / count(t1, t2, t3)`.

use std::collections::{BTreeMap, HashMap, HashSet};
use std::fmt;
use std::str::FromStr;

use thiserror::Error;

use crate::corpusio::{spans_intersect, AnnotatedSentence, TaggedSentence};
use crate::scorer::f_beta;

pub const BOS_TAG: &str = "<s>";
pub const EOS_TAG: &str = "</s>";
pub const DEFAULT_MIN_SUPPORT: u64 = 10;
pub const DEFAULT_THRESHOLD: f64 = 0.05;

pub type Trigram = [String; 3];
/// `(prev, t1, t2, t3, next)`.
pub type Context = [String; 5];

#[derive(Debug, Error, PartialEq, Eq)]
pub enum WoError {
    #[error("no tagged sentences to train on")]
    EmptyInput,
    #[error("{flags} flagged sentences but {gold} gold sentences")]
    LengthMismatch { flags: usize, gold: usize },
    #[error("model line {line}: {message}")]
    Parse { line: usize, message: String },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PosContextModel {
    pub trigram_counts: HashMap<Trigram, u64>,
    pub context_counts: HashMap<Context, u64>,
    pub min_support: u64,
}

fn padded(tags: &[String]) -> Vec<&str> {
    let mut v = Vec::with_capacity(tags.len() + 2);
    v.push(BOS_TAG);
    v.extend(tags.iter().map(String::as_str));
    v.push(EOS_TAG);
    v
}

fn context_at(p: &[&str], i: usize) -> Context {
    // `i` indexes the unpadded sentence, so the window starts at p[i]
    std::array::from_fn(|k| p[i + k].to_string())
}

fn trigram_of(c: &Context) -> Trigram {
    [c[1].clone(), c[2].clone(), c[3].clone()]
}

pub fn train_pos_model(tagged: &[TaggedSentence]) -> Result<PosContextModel, WoError> {
    if tagged.is_empty() {
        return Err(WoError::EmptyInput);
    }
    let mut model = PosContextModel {
        trigram_counts: HashMap::new(),
        context_counts: HashMap::new(),
        min_support: DEFAULT_MIN_SUPPORT,
    };
    for s in tagged {
        let p = padded(&s.pos);
        for i in 0..s.pos.len().saturating_sub(2) {
            let c = context_at(&p, i);
            *model.trigram_counts.entry(trigram_of(&c)).or_default() += 1;
            *model.context_counts.entry(c).or_default() += 1;
        }
    }
    Ok(model)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum FlagReason {
    RareContext,
    UnseenTrigram,
}

impl fmt::Display for FlagReason {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            FlagReason::RareContext => "rare-context",
            FlagReason::UnseenTrigram => "unseen-trigram",
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FlaggedSpan {
    pub start: usize,
    pub end: usize,
    pub probability: f64,
    pub reason: FlagReason,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ProbabilityMode {
    /// Context count over trigram count.
    #[default]
    Conditional,
    /// Context count over all contexts seen in training.
    Joint,
}

impl FromStr for ProbabilityMode {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "conditional" => Ok(ProbabilityMode::Conditional),
            "joint" => Ok(ProbabilityMode::Joint),
            _ => Err(format!(
                "unknown probability mode '{s}' (conditional|joint)"
            )),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DetectOptions {
    pub threshold: f64,
    pub mode: ProbabilityMode,
    /// Contexts that are never flagged.
    pub allowlist: HashSet<Context>,
}

impl Default for DetectOptions {
    fn default() -> Self {
        DetectOptions {
            threshold: DEFAULT_THRESHOLD,
            mode: ProbabilityMode::Conditional,
            allowlist: HashSet::new(),
        }
    }
}

impl PosContextModel {
    pub fn with_min_support(mut self, min_support: u64) -> Self {
        self.min_support = min_support;
        self
    }

    pub fn trigram_count(&self, t: &Trigram) -> u64 {
        self.trigram_counts.get(t).copied().unwrap_or(0)
    }

    pub fn context_count(&self, c: &Context) -> u64 {
        self.context_counts.get(c).copied().unwrap_or(0)
    }

    fn total_contexts(&self) -> u64 {
        self.context_counts.values().sum()
    }

    pub fn probability(&self, c: &Context, mode: ProbabilityMode) -> f64 {
        let num = self.context_count(c) as f64;
        let den = match mode {
            ProbabilityMode::Conditional => self.trigram_count(&trigram_of(c)),
            ProbabilityMode::Joint => self.total_contexts(),
        };
        if den == 0 {
            0.0
        } else {
            num / den as f64
        }
    }

    pub fn detect_with(&self, tags: &[String], opts: &DetectOptions) -> Vec<FlaggedSpan> {
        let p = padded(tags);
        let mut out = Vec::new();
        for i in 0..tags.len().saturating_sub(2) {
            let c = context_at(&p, i);
            if opts.allowlist.contains(&c) {
                continue;
            }
            let support = self.trigram_count(&trigram_of(&c));
            let probability = self.probability(&c, opts.mode);
            let reason = if support < self.min_support {
                Some(FlagReason::UnseenTrigram)
            } else if probability < opts.threshold {
                Some(FlagReason::RareContext)
            } else {
                None
            };
            if let Some(reason) = reason {
                out.push(FlaggedSpan {
                    start: i,
                    end: i + 3,
                    probability,
                    reason,
                });
            }
        }
        out
    }

    /// Text model: a `min_support` line, then `T` trigram and `C` context
    /// rows, tab-separated and sorted.
    pub fn to_text(&self) -> String {
        let mut out = format!("min_support\t{}\n", self.min_support);
        let tri: BTreeMap<&Trigram, &u64> = self.trigram_counts.iter().collect();
        for (t, n) in tri {
            out.push_str(&format!("T\t{}\t{n}\n", t.join("\t")));
        }
        let ctx: BTreeMap<&Context, &u64> = self.context_counts.iter().collect();
        for (c, n) in ctx {
            out.push_str(&format!("C\t{}\t{n}\n", c.join("\t")));
        }
        out
    }

    pub fn from_text(text: &str) -> Result<PosContextModel, WoError> {
        let mut model = PosContextModel {
            trigram_counts: HashMap::new(),
            context_counts: HashMap::new(),
            min_support: DEFAULT_MIN_SUPPORT,
        };
        for (k, raw) in text.lines().enumerate() {
            let line = k + 1;
            let err = |message: String| WoError::Parse { line, message };
            let raw = raw.strip_suffix('\r').unwrap_or(raw);
            if raw.trim().is_empty() || raw.starts_with('#') {
                continue;
            }
            let f: Vec<&str> = raw.split('\t').collect();
            let count = |s: &str| {
                s.parse::<u64>()
                    .map_err(|_| err(format!("bad count '{s}'")))
            };
            match (f[0], f.len()) {
                ("min_support", 2) => model.min_support = count(f[1])?,
                ("T", 5) => {
                    let t = std::array::from_fn(|i| f[1 + i].to_string());
                    model.trigram_counts.insert(t, count(f[4])?);
                }
                ("C", 7) => {
                    let c = std::array::from_fn(|i| f[1 + i].to_string());
                    model.context_counts.insert(c, count(f[6])?);
                }
                _ => return Err(err(format!("unrecognised row '{raw}'"))),
            }
        }
        Ok(model)
    }
}

/// Flags with default options apart from the threshold.
pub fn detect(
    model: &PosContextModel,
    sentence: &TaggedSentence,
    threshold: f64,
) -> Vec<FlaggedSpan> {
    let opts = DetectOptions {
        threshold,
        ..DetectOptions::default()
    };
    model.detect_with(&sentence.pos, &opts)
}

/// Reads an allowlist of contexts: five tab-separated tags per line.
pub fn parse_allowlist(text: &str) -> Result<HashSet<Context>, WoError> {
    let mut out = HashSet::new();
    for (k, raw) in text.lines().enumerate() {
        let raw = raw.trim_end_matches('\r');
        if raw.trim().is_empty() || raw.starts_with('#') {
            continue;
        }
        let f: Vec<&str> = raw.split('\t').collect();
        if f.len() != 5 {
            return Err(WoError::Parse {
                line: k + 1,
                message: format!("expected 5 tags, found {}", f.len()),
            });
        }
        out.insert(std::array::from_fn(|i| f[i].to_string()));
    }
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DetectorScore {
    pub flags: u64,
    pub true_flags: u64,
    pub gold: u64,
    pub recalled: u64,
    pub precision: f64,
    pub recall: f64,
    pub f05: f64,
}

/// Scores flags against gold edits by span intersection. Each sentence is
/// judged against the annotator giving the most true flags (lowest id on ties).
pub fn evaluate_detector(
    flags: &[Vec<FlaggedSpan>],
    gold: &[AnnotatedSentence],
) -> Result<DetectorScore, WoError> {
    if flags.len() != gold.len() {
        return Err(WoError::LengthMismatch {
            flags: flags.len(),
            gold: gold.len(),
        });
    }
    let (mut n_flags, mut true_flags, mut n_gold, mut recalled) = (0u64, 0u64, 0u64, 0u64);
    for (fs, s) in flags.iter().zip(gold) {
        n_flags += fs.len() as u64;
        let mut best: Option<(u64, u64, u64)> = None;
        for edits in s.annotations.values() {
            let tp = fs
                .iter()
                .filter(|f| {
                    edits
                        .iter()
                        .any(|e| spans_intersect((f.start, f.end), (e.start, e.end)))
                })
                .count() as u64;
            let hit = edits
                .iter()
                .filter(|e| {
                    fs.iter()
                        .any(|f| spans_intersect((f.start, f.end), (e.start, e.end)))
                })
                .count() as u64;
            if best.is_none_or(|(b, _, _)| tp > b) {
                best = Some((tp, hit, edits.len() as u64));
            }
        }
        if let Some((tp, hit, total)) = best {
            true_flags += tp;
            recalled += hit;
            n_gold += total;
        }
    }
    let precision = if n_flags == 0 {
        1.0
    } else {
        true_flags as f64 / n_flags as f64
    };
    let recall = if n_gold == 0 {
        1.0
    } else {
        recalled as f64 / n_gold as f64
    };
    Ok(DetectorScore {
        flags: n_flags,
        true_flags,
        gold: n_gold,
        recalled,
        precision,
        recall,
        f05: f_beta(precision, recall, 0.5),
    })
}
