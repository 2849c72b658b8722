use std::collections::BTreeMap;
use std::fmt::Write as _;

use super::Counts;
use crate::corpusio::AnnotatorId;
use crate::taxonomy::BaseLabel;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct LabelTally {
    pub total: u64,
    pub corrected: u64,
    pub detected: u64,
}

impl LabelTally {
    pub fn correction_recall(&self) -> f64 {
        ratio(self.corrected, self.total)
    }

    pub fn detection_recall(&self) -> f64 {
        ratio(self.detected, self.total)
    }
}

fn ratio(a: u64, b: u64) -> f64 {
    if b == 0 {
        1.0
    } else {
        a as f64 / b as f64
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SentenceScore {
    pub annotator: AnnotatorId,
    pub counts: Counts,
}

/// Corpus-level result. Overall metrics are derived from the summed
/// per-sentence counts; per-label tables report recall only, since
/// hypothesis edits carry no labels.
#[derive(Debug, Clone, PartialEq)]
pub struct ScoreReport {
    pub beta: f64,
    pub counts: Counts,
    pub precision: f64,
    pub recall: f64,
    pub f: f64,
    pub per_label: BTreeMap<BaseLabel, LabelTally>,
    pub per_sentence: Vec<SentenceScore>,
}

impl ScoreReport {
    pub fn new(
        beta: f64,
        per_sentence: Vec<SentenceScore>,
        per_label: BTreeMap<BaseLabel, LabelTally>,
    ) -> Self {
        let counts: Counts = per_sentence.iter().map(|s| s.counts).sum();
        ScoreReport {
            beta,
            counts,
            precision: counts.precision(),
            recall: counts.recall(),
            f: counts.f(beta),
            per_label,
            per_sentence,
        }
    }

    pub fn correction_recall(&self, label: BaseLabel) -> Option<f64> {
        self.per_label
            .get(&label)
            .map(LabelTally::correction_recall)
    }

    pub fn detection_recall(&self, label: BaseLabel) -> Option<f64> {
        self.per_label.get(&label).map(LabelTally::detection_recall)
    }

    fn f_key(&self) -> String {
        if self.beta == 0.5 {
            "f05".to_string()
        } else {
            format!("f{}", self.beta)
        }
    }

    /// `key=value` lines with four decimals.
    pub fn to_kv(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "precision={:.4}", self.precision);
        let _ = writeln!(out, "recall={:.4}", self.recall);
        let _ = writeln!(out, "{}={:.4}", self.f_key(), self.f);
        for (label, t) in &self.per_label {
            let _ = writeln!(out, "recall[{label}]={:.4}", t.correction_recall());
        }
        for (label, t) in &self.per_label {
            let _ = writeln!(out, "detection[{label}]={:.4}", t.detection_recall());
        }
        let _ = writeln!(out, "tp={}", self.counts.tp);
        let _ = writeln!(out, "fp={}", self.counts.fp);
        let _ = writeln!(out, "fn={}", self.counts.fn_);
        out
    }

    pub fn to_table(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(
            out,
            "TP {}  FP {}  FN {}",
            self.counts.tp, self.counts.fp, self.counts.fn_
        );
        let _ = writeln!(out, "Precision   {:.4}", self.precision);
        let _ = writeln!(out, "Recall      {:.4}", self.recall);
        let _ = writeln!(out, "F{:<10} {:.4}", self.beta, self.f);
        if !self.per_label.is_empty() {
            let _ = writeln!(out);
            let _ = writeln!(
                out,
                "{:<14}{:>7}{:>12}{:>12}",
                "label", "gold", "corr.rec", "det.rec"
            );
            for (label, t) in &self.per_label {
                let _ = writeln!(
                    out,
                    "{:<14}{:>7}{:>12.4}{:>12.4}",
                    label.code(),
                    t.total,
                    t.correction_recall(),
                    t.detection_recall()
                );
            }
        }
        out
    }
}
