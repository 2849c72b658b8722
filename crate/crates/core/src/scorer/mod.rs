//! MaxMatch-style evaluation of corrector output against M2 gold.
//!
//! Each hypothesis is aligned to its source, the resulting edit lattice is
//! searched per annotator for the reading that matches the most gold edits,
//! and the annotator that maximises corpus-level F-beta is kept. Word-order
//! edits are judged by their own rule so that nested form or spelling fixes
//! inside a wrongly ordered phrase are credited on their own.

pub mod align;
mod report;

use std::collections::{BTreeMap, HashMap};
use std::str::FromStr;

use rayon::prelude::*;
use thiserror::Error;
use unicode_normalization::UnicodeNormalization;

use crate::corpusio::{spans_intersect, AnnotatedSentence, AnnotatorId, Edit};
use crate::taxonomy::{base_components, BaseLabel, ErrorLabel};

pub use align::{extract_edits, AlignConfig, Alignment, EditArc, EditLattice};
pub use report::{LabelTally, ScoreReport, SentenceScore};

/// F-beta from precision and recall; 0 when both are 0.
pub fn f_beta(p: f64, r: f64, beta: f64) -> f64 {
    let b2 = beta * beta;
    let den = b2 * p + r;
    if den == 0.0 {
        0.0
    } else {
        (1.0 + b2) * p * r / den
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct Counts {
    pub tp: u64,
    pub fp: u64,
    pub fn_: u64,
}

impl Counts {
    pub fn new(tp: u64, fp: u64, fn_: u64) -> Self {
        Counts { tp, fp, fn_ }
    }

    /// 1.0 when nothing was proposed.
    pub fn precision(&self) -> f64 {
        if self.tp + self.fp == 0 {
            1.0
        } else {
            self.tp as f64 / (self.tp + self.fp) as f64
        }
    }

    /// 1.0 when there was nothing to find.
    pub fn recall(&self) -> f64 {
        if self.tp + self.fn_ == 0 {
            1.0
        } else {
            self.tp as f64 / (self.tp + self.fn_) as f64
        }
    }

    pub fn f(&self, beta: f64) -> f64 {
        f_beta(self.precision(), self.recall(), beta)
    }

    /// F-beta as `num / den` in count form, for exact comparisons.
    fn f_ratio(&self, beta: f64) -> (f64, f64) {
        if self.tp + self.fp + self.fn_ == 0 {
            return (1.0, 1.0);
        }
        let b2 = beta * beta;
        let num = (1.0 + b2) * self.tp as f64;
        (num, num + b2 * self.fn_ as f64 + self.fp as f64)
    }

    /// Compares F-beta without rounding through precision and recall.
    pub fn cmp_f(&self, other: &Counts, beta: f64) -> std::cmp::Ordering {
        let (a, b) = self.f_ratio(beta);
        let (c, d) = other.f_ratio(beta);
        (a * d).total_cmp(&(c * b))
    }
}

impl std::ops::Add for Counts {
    type Output = Counts;
    fn add(self, o: Counts) -> Counts {
        Counts::new(self.tp + o.tp, self.fp + o.fp, self.fn_ + o.fn_)
    }
}

impl std::ops::AddAssign for Counts {
    fn add_assign(&mut self, o: Counts) {
        *self = *self + o;
    }
}

impl std::iter::Sum for Counts {
    fn sum<I: Iterator<Item = Counts>>(iter: I) -> Counts {
        iter.fold(Counts::default(), |a, b| a + b)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Selection {
    /// Pick the annotator maximising F over running corpus counts.
    #[default]
    Running,
    /// Pick the annotator maximising F of the sentence alone.
    PerSentence,
}

impl FromStr for Selection {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "running" => Ok(Selection::Running),
            "sentence" | "per-sentence" => Ok(Selection::PerSentence),
            other => Err(format!(
                "unknown selection mode `{other}` (expected `running` or `sentence`)"
            )),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScorerConfig {
    pub beta: f64,
    pub align: AlignConfig,
    pub selection: Selection,
}

impl Default for ScorerConfig {
    fn default() -> Self {
        ScorerConfig {
            beta: 0.5,
            align: AlignConfig::default(),
            selection: Selection::Running,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ScoreError {
    #[error("{hyps} hypothesis sentences for {gold} gold sentences")]
    LengthMismatch { gold: usize, hyps: usize },
}

/// What happened to one gold edit under the chosen reading of the hypothesis.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GoldOutcome {
    pub label: ErrorLabel,
    pub span: (usize, usize),
    /// Corrected exactly (or, for word order, by the word-order rule).
    pub matched: bool,
    /// Some hypothesis edit touched the span.
    pub detected: bool,
}

/// Result of matching a hypothesis against one annotator.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AnnotatorMatch {
    pub annotator: AnnotatorId,
    pub counts: Counts,
    pub outcomes: Vec<GoldOutcome>,
    /// The hypothesis edits of the chosen lattice path.
    pub hyp_edits: Vec<Edit>,
}

/// Token-for-token equivalences a word-order edit accepts: each single-token
/// nested fix may appear in either its original or its corrected form.
fn nested_equivalents(source: &[String], nested: &[&Edit]) -> Vec<(String, String)> {
    nested
        .iter()
        .filter(|e| e.end - e.start == 1 && e.correction.len() == 1)
        .map(|e| (source[e.start].clone(), e.correction[0].clone()))
        .collect()
}

/// Hypothesis region `[hs, he)` that realises a word-order edit, if any.
///
/// Candidate boundaries are the hypothesis positions aligned to the edit's
/// source boundaries on some optimal path. Each position must equal the gold
/// token, or be the original/corrected counterpart of a nested fix.
pub fn wo_match_region(
    gold: &Edit,
    nested: &[&Edit],
    source: &[String],
    hyp: &[String],
    alignment: &Alignment,
) -> Option<(usize, usize)> {
    let pairs = nested_equivalents(source, nested);
    let same = |h: &String, g: &String| {
        h == g
            || pairs
                .iter()
                .any(|(o, c)| (h == o && g == c) || (h == c && g == o))
    };
    let starts = alignment.boundary_positions(gold.start);
    let mut ends = alignment.boundary_positions(gold.end);
    ends.reverse();
    for &hs in &starts {
        for &he in &ends {
            if he < hs || he - hs != gold.correction.len() {
                continue;
            }
            if hyp[hs..he]
                .iter()
                .zip(&gold.correction)
                .all(|(h, g)| same(h, g))
            {
                return Some((hs, he));
            }
        }
    }
    None
}

/// Whether the hypothesis realises the gold word-order edit.
pub fn wo_match(
    gold: &Edit,
    nested: &[&Edit],
    source: &[String],
    hyp: &[String],
    alignment: &Alignment,
) -> bool {
    wo_match_region(gold, nested, source, hyp, alignment).is_some()
}

/// True iff some hypothesis edit's span intersects the gold span.
pub fn detection_overlap(gold: &Edit, hyp_edits: &[Edit]) -> bool {
    hyp_edits
        .iter()
        .any(|h| spans_intersect((gold.start, gold.end), (h.start, h.end)))
}

fn nfc(tokens: &[String]) -> Vec<String> {
    tokens.iter().map(|t| t.nfc().collect()).collect()
}

fn nfc_sentence(sentence: &AnnotatedSentence) -> AnnotatedSentence {
    let mut s = sentence.clone();
    s.source = nfc(&s.source);
    for edits in s.annotations.values_mut() {
        for e in edits.iter_mut() {
            e.correction = nfc(&e.correction);
        }
    }
    s
}

/// Matches one annotator's gold edits against the lattice.
pub fn match_annotator(
    annotator: AnnotatorId,
    gold: &[Edit],
    source: &[String],
    hyp: &[String],
    lattice: &EditLattice,
) -> AnnotatorMatch {
    let gold: Vec<&Edit> = gold
        .iter()
        .filter(|e| e.label != ErrorLabel::Noop)
        .collect();
    let mut matched = vec![false; gold.len()];

    // word-order edits first; their regions absorb hypothesis edits
    let mut regions: Vec<(usize, usize, usize, usize)> = Vec::new();
    for (k, g) in gold.iter().enumerate() {
        if !g.is_word_order() {
            continue;
        }
        let nested: Vec<&Edit> = gold
            .iter()
            .filter(|n| !n.is_word_order() && g.nests(n))
            .copied()
            .collect();
        if let Some((hs, he)) = wo_match_region(g, &nested, source, hyp, &lattice.alignment) {
            matched[k] = true;
            regions.push((g.start, g.end, hs, he));
        }
    }

    let exact: HashMap<(usize, usize, &[String]), usize> = gold
        .iter()
        .enumerate()
        .filter(|(_, g)| !g.is_word_order())
        .map(|(k, g)| ((g.start, g.end, g.correction.as_slice()), k))
        .collect();
    let vertices = &lattice.alignment.vertices;
    let absorbed = |arc: &EditArc| {
        let (ui, uj) = vertices[arc.from];
        let (vi, vj) = vertices[arc.to];
        regions
            .iter()
            .any(|&(s, e, hs, he)| s <= ui && vi <= e && hs <= uj && vj <= he)
    };
    let ((_, _), path) = lattice.best_path(|arc| {
        let e = &arc.edit;
        if exact.contains_key(&(e.start, e.end, e.correction.as_slice())) {
            (1, 0)
        } else if absorbed(arc) {
            (0, 0)
        } else {
            (0, 1)
        }
    });

    let mut fp = 0;
    let mut hyp_edits = Vec::with_capacity(path.len());
    for &k in &path {
        let arc = &lattice.edit_arcs[k];
        let e = &arc.edit;
        match exact.get(&(e.start, e.end, e.correction.as_slice())) {
            Some(&g) => matched[g] = true,
            None if absorbed(arc) => {}
            None => fp += 1,
        }
        hyp_edits.push(e.clone());
    }

    let outcomes: Vec<GoldOutcome> = gold
        .iter()
        .zip(&matched)
        .map(|(g, &m)| GoldOutcome {
            label: g.label.clone(),
            span: (g.start, g.end),
            matched: m,
            detected: m || detection_overlap(g, &hyp_edits),
        })
        .collect();
    let tp = matched.iter().filter(|&&m| m).count() as u64;
    AnnotatorMatch {
        annotator,
        counts: Counts::new(tp, fp, gold.len() as u64 - tp),
        outcomes,
        hyp_edits,
    }
}

/// Matches the hypothesis against every annotator of the sentence. A sentence
/// without annotations is treated as annotator 0 with no edits.
pub fn match_sentence(
    sentence: &AnnotatedSentence,
    hyp: &[String],
    cfg: &AlignConfig,
) -> Vec<AnnotatorMatch> {
    let sentence = nfc_sentence(sentence);
    let hyp = nfc(hyp);
    let lattice = extract_edits(&sentence.source, &hyp, cfg);
    if sentence.annotations.is_empty() {
        return vec![match_annotator(0, &[], &sentence.source, &hyp, &lattice)];
    }
    sentence
        .annotations
        .iter()
        .map(|(&a, edits)| match_annotator(a, edits, &sentence.source, &hyp, &lattice))
        .collect()
}

/// Index of the annotator to credit; ties go to the lowest id.
pub fn select_annotator(
    candidates: &[AnnotatorMatch],
    running: Counts,
    beta: f64,
    mode: Selection,
) -> usize {
    let key = |c: &AnnotatorMatch| match mode {
        Selection::Running => running + c.counts,
        Selection::PerSentence => c.counts,
    };
    let mut best = 0;
    for k in 1..candidates.len() {
        let ord = key(&candidates[k]).cmp_f(&key(&candidates[best]), beta);
        if ord == std::cmp::Ordering::Greater
            || (ord == std::cmp::Ordering::Equal
                && candidates[k].annotator < candidates[best].annotator)
        {
            best = k;
        }
    }
    best
}

/// Scores one sentence given the counts accumulated so far.
pub fn max_match_sentence(
    sentence: &AnnotatedSentence,
    hyp: &[String],
    running: Counts,
    cfg: &ScorerConfig,
) -> AnnotatorMatch {
    let mut candidates = match_sentence(sentence, hyp, &cfg.align);
    let k = select_annotator(&candidates, running, cfg.beta, cfg.selection);
    candidates.swap_remove(k)
}

/// Scores a whole corpus. Alignment and per-annotator matching run in
/// parallel; annotator selection then runs in corpus order.
pub fn score_corpus(
    gold: &[AnnotatedSentence],
    hyps: &[Vec<String>],
    cfg: &ScorerConfig,
) -> Result<ScoreReport, ScoreError> {
    if gold.len() != hyps.len() {
        return Err(ScoreError::LengthMismatch {
            gold: gold.len(),
            hyps: hyps.len(),
        });
    }
    let matched: Vec<Vec<AnnotatorMatch>> = gold
        .par_iter()
        .zip(hyps.par_iter())
        .map(|(s, h)| match_sentence(s, h, &cfg.align))
        .collect();

    let mut running = Counts::default();
    let mut per_label: BTreeMap<BaseLabel, LabelTally> = BTreeMap::new();
    let mut per_sentence = Vec::with_capacity(matched.len());
    for candidates in matched {
        let k = select_annotator(&candidates, running, cfg.beta, cfg.selection);
        let chosen = &candidates[k];
        running += chosen.counts;
        for o in &chosen.outcomes {
            for label in base_components(&o.label) {
                let t = per_label.entry(label).or_default();
                t.total += 1;
                t.corrected += u64::from(o.matched);
                t.detected += u64::from(o.detected);
            }
        }
        per_sentence.push(SentenceScore {
            annotator: chosen.annotator,
            counts: chosen.counts,
        });
    }
    Ok(ScoreReport::new(cfg.beta, per_sentence, per_label))
}
