//! Synthetic error generation.
//!
//! A [`NoiseProfile`] holds one probability per noise operation. Each
//! operation has a unit it is tried on:
//!
//! | operation       | tried once per                                      |
//! |-----------------|-----------------------------------------------------|
//! | word_delete     | non-punctuation token                               |
//! | punct_delete    | punctuation token                                   |
//! | word_insert     | gap between surviving tokens (including both ends)  |
//! | word_transpose  | adjacent pair of distinct original words, scanned left to right, non-overlapping |
//! | char_delete     | character of an untouched word                      |
//! | char_insert     | character of an untouched word (inserted before it) |
//! | char_transpose  | adjacent pair of distinct characters, non-overlapping |
//!
//! Sentence `i` draws from stream `i` of a ChaCha8 generator keyed by the
//! master seed, so output does not depend on scheduling.

use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::ops::{Add, AddAssign};

use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use thiserror::Error;
use unicode_general_category::get_general_category;

use crate::corpusio::{apply_edits, AnnotatedSentence, Edit};
use crate::taxonomy::{BaseLabel, ErrorLabel};

pub const MAX_RATE: f64 = 0.5;

/// A token is punctuation iff every character is in a Unicode `P*` category.
pub fn is_punct(token: &str) -> bool {
    !token.is_empty()
        && token
            .chars()
            .all(|c| get_general_category(c).abbreviation().starts_with('P'))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum NoiseOp {
    CharDelete,
    CharInsert,
    CharTranspose,
    WordDelete,
    WordInsert,
    WordTranspose,
    PunctDelete,
}

impl NoiseOp {
    pub const ALL: [NoiseOp; 7] = [
        NoiseOp::CharDelete,
        NoiseOp::CharInsert,
        NoiseOp::CharTranspose,
        NoiseOp::WordDelete,
        NoiseOp::WordInsert,
        NoiseOp::WordTranspose,
        NoiseOp::PunctDelete,
    ];

    pub fn name(self) -> &'static str {
        match self {
            NoiseOp::CharDelete => "char_delete",
            NoiseOp::CharInsert => "char_insert",
            NoiseOp::CharTranspose => "char_transpose",
            NoiseOp::WordDelete => "word_delete",
            NoiseOp::WordInsert => "word_insert",
            NoiseOp::WordTranspose => "word_transpose",
            NoiseOp::PunctDelete => "punct_delete",
        }
    }

    pub fn from_name(name: &str) -> Option<NoiseOp> {
        Self::ALL.into_iter().find(|op| op.name() == name)
    }

    fn slot(self) -> usize {
        self as usize
    }
}

impl fmt::Display for NoiseOp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Error, PartialEq)]
pub enum SynthError {
    #[error("corpus is empty")]
    EmptyCorpus,
    #[error("{op} rate {value} is outside [0, {MAX_RATE}]")]
    Rate { op: NoiseOp, value: f64 },
    #[error("{table} is empty but {op} rate is positive")]
    EmptyTable { table: &'static str, op: NoiseOp },
    #[error("profile line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("gold edits do not apply: {0}")]
    Edits(String),
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct NoiseProfile {
    rates: [f64; 7],
    pub char_alphabet: BTreeMap<char, u64>,
    pub word_unigrams: BTreeMap<String, u64>,
}

impl NoiseProfile {
    pub fn rate(&self, op: NoiseOp) -> f64 {
        self.rates[op.slot()]
    }

    pub fn set_rate(&mut self, op: NoiseOp, value: f64) {
        self.rates[op.slot()] = value;
    }

    pub fn with_rate(mut self, op: NoiseOp, value: f64) -> Self {
        self.set_rate(op, value);
        self
    }

    pub fn validate(&self) -> Result<(), SynthError> {
        for op in NoiseOp::ALL {
            let value = self.rate(op);
            if !(0.0..=MAX_RATE).contains(&value) {
                return Err(SynthError::Rate { op, value });
            }
        }
        if self.rate(NoiseOp::CharInsert) > 0.0 && self.char_alphabet.values().all(|&n| n == 0) {
            return Err(SynthError::EmptyTable {
                table: "char_alphabet",
                op: NoiseOp::CharInsert,
            });
        }
        if self.rate(NoiseOp::WordInsert) > 0.0 && self.word_unigrams.values().all(|&n| n == 0) {
            return Err(SynthError::EmptyTable {
                table: "word_unigrams",
                op: NoiseOp::WordInsert,
            });
        }
        Ok(())
    }

    /// Multiplies every rate by `factor`, capping at the maximum. Returns the
    /// operations that were capped.
    pub fn scaled(&self, factor: f64) -> (NoiseProfile, Vec<NoiseOp>) {
        let mut p = self.clone();
        let mut capped = Vec::new();
        for op in NoiseOp::ALL {
            let v = self.rate(op) * factor;
            if v > MAX_RATE {
                capped.push(op);
            }
            p.set_rate(op, v.clamp(0.0, MAX_RATE));
        }
        (p, capped)
    }

    /// Flat `key=value` text. Table entries repeat their key, one
    /// `entry<TAB>count` per line.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for op in NoiseOp::ALL {
            out.push_str(&format!("{}={}\n", op.name(), self.rate(op)));
        }
        for (c, n) in &self.char_alphabet {
            out.push_str(&format!("char_alphabet={c}\t{n}\n"));
        }
        for (w, n) in &self.word_unigrams {
            out.push_str(&format!("word_unigrams={w}\t{n}\n"));
        }
        out
    }

    pub fn from_text(text: &str) -> Result<NoiseProfile, SynthError> {
        let mut p = NoiseProfile::default();
        let err = |line: usize, message: String| SynthError::Parse { line, message };
        for (k, raw) in text.lines().enumerate() {
            let line_no = k + 1;
            let line = raw.strip_suffix('\r').unwrap_or(raw);
            if line.trim().is_empty() || line.starts_with('#') {
                continue;
            }
            let Some((key, value)) = line.split_once('=') else {
                return Err(err(line_no, "expected key=value".into()));
            };
            let key = key.trim();
            if let Some(op) = NoiseOp::from_name(key) {
                let v: f64 = value
                    .trim()
                    .parse()
                    .map_err(|_| err(line_no, format!("bad rate '{value}'")))?;
                p.set_rate(op, v);
                continue;
            }
            let (entry, count) = value
                .rsplit_once('\t')
                .ok_or_else(|| err(line_no, "expected entry<TAB>count".into()))?;
            let count: u64 = count
                .trim()
                .parse()
                .map_err(|_| err(line_no, format!("bad count '{count}'")))?;
            match key {
                "char_alphabet" => {
                    let mut chars = entry.chars();
                    match (chars.next(), chars.next()) {
                        (Some(c), None) => *p.char_alphabet.entry(c).or_default() += count,
                        _ => return Err(err(line_no, format!("not one character: '{entry}'"))),
                    }
                }
                "word_unigrams" => {
                    if entry.is_empty() || entry.chars().any(char::is_whitespace) {
                        return Err(err(line_no, format!("bad token '{entry}'")));
                    }
                    *p.word_unigrams.entry(entry.to_string()).or_default() += count;
                }
                _ => return Err(err(line_no, format!("unknown key '{key}'"))),
            }
        }
        p.validate()?;
        Ok(p)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct OpStat {
    pub attempts: u64,
    pub applied: u64,
}

impl OpStat {
    pub fn frequency(&self) -> f64 {
        if self.attempts == 0 {
            0.0
        } else {
            self.applied as f64 / self.attempts as f64
        }
    }
}

/// Attempt and application counts per operation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct SynthStats {
    ops: [OpStat; 7],
}

impl SynthStats {
    pub fn get(&self, op: NoiseOp) -> OpStat {
        self.ops[op.slot()]
    }

    fn try_op<R: Rng>(&mut self, op: NoiseOp, rate: f64, rng: &mut R) -> bool {
        let hit = rng.random_bool(rate);
        let s = &mut self.ops[op.slot()];
        s.attempts += 1;
        s.applied += u64::from(hit);
        hit
    }
}

impl Add for SynthStats {
    type Output = SynthStats;
    fn add(mut self, rhs: SynthStats) -> SynthStats {
        self += rhs;
        self
    }
}

impl AddAssign for SynthStats {
    fn add_assign(&mut self, rhs: SynthStats) {
        for (a, b) in self.ops.iter_mut().zip(rhs.ops) {
            a.attempts += b.attempts;
            a.applied += b.applied;
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SynthRecord {
    pub noised: Vec<String>,
    pub gold_edits: Vec<Edit>,
    /// RNG stream the sentence was drawn from.
    pub seed: u64,
}

/// A single character-level change, by character index.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CharOp {
    Delete(usize),
    Insert(usize, char),
    /// Swap characters `i` and `i + 1`.
    Transpose(usize),
}

/// Applies one character op, or `None` if the index is out of range.
pub fn apply_char_op(word: &str, op: CharOp) -> Option<String> {
    let mut chars: Vec<char> = word.chars().collect();
    match op {
        CharOp::Delete(i) if i < chars.len() => {
            chars.remove(i);
        }
        CharOp::Insert(i, c) if i <= chars.len() => chars.insert(i, c),
        CharOp::Transpose(i) if i + 1 < chars.len() => chars.swap(i, i + 1),
        _ => return None,
    }
    Some(chars.into_iter().collect())
}

fn sentence_rng(master_seed: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(master_seed);
    rng.set_stream(index);
    rng
}

#[derive(Debug, Clone)]
struct Unit {
    /// Clean-sentence index, or `None` for an inserted token.
    origin: Option<usize>,
    text: String,
    /// Clean tokens deleted directly before this unit.
    deleted_before: Vec<String>,
    /// First of a transposed pair.
    swapped: bool,
    touched: bool,
}

struct Samplers {
    chars: Option<(Vec<char>, WeightedIndex<u64>)>,
    words: Option<(Vec<String>, WeightedIndex<u64>)>,
}

impl Samplers {
    fn new(profile: &NoiseProfile) -> Samplers {
        let chars = WeightedIndex::new(profile.char_alphabet.values().copied())
            .ok()
            .map(|d| (profile.char_alphabet.keys().copied().collect(), d));
        let words = WeightedIndex::new(profile.word_unigrams.values().copied())
            .ok()
            .map(|d| (profile.word_unigrams.keys().cloned().collect(), d));
        Samplers { chars, words }
    }
}

fn noise_word<R: Rng>(
    word: &str,
    profile: &NoiseProfile,
    samplers: &Samplers,
    stats: &mut SynthStats,
    rng: &mut R,
) -> String {
    let mut chars: Vec<char> = word.chars().collect();

    let rate = profile.rate(NoiseOp::CharDelete);
    let mut keep: Vec<bool> = chars
        .iter()
        .map(|_| !stats.try_op(NoiseOp::CharDelete, rate, rng))
        .collect();
    if !keep.iter().any(|&k| k) {
        if let Some(last) = keep.last_mut() {
            *last = true;
            stats.ops[NoiseOp::CharDelete.slot()].applied -= 1;
        }
    }
    chars = chars
        .into_iter()
        .zip(keep)
        .filter_map(|(c, k)| k.then_some(c))
        .collect();

    let rate = profile.rate(NoiseOp::CharInsert);
    let mut with_ins = Vec::with_capacity(chars.len() + 2);
    for c in chars {
        if stats.try_op(NoiseOp::CharInsert, rate, rng) {
            if let Some((alphabet, dist)) = &samplers.chars {
                with_ins.push(alphabet[dist.sample(rng)]);
            }
        }
        with_ins.push(c);
    }
    chars = with_ins;

    let rate = profile.rate(NoiseOp::CharTranspose);
    let mut i = 0;
    while i + 1 < chars.len() {
        if chars[i] != chars[i + 1] && stats.try_op(NoiseOp::CharTranspose, rate, rng) {
            chars.swap(i, i + 1);
            i += 2;
        } else {
            i += 1;
        }
    }
    chars.into_iter().collect()
}

fn deletion_label(tokens: &[String]) -> ErrorLabel {
    if tokens.iter().all(|t| is_punct(t)) {
        ErrorLabel::simple(BaseLabel::MissingPunct)
    } else {
        ErrorLabel::simple(BaseLabel::MissingWord)
    }
}

/// Noises one sentence. The profile is assumed valid.
pub fn synthesize_sentence(
    clean: &[String],
    profile: &NoiseProfile,
    master_seed: u64,
    index: u64,
) -> (SynthRecord, SynthStats) {
    let samplers = Samplers::new(profile);
    synthesize_one(clean, profile, &samplers, master_seed, index)
}

fn synthesize_one(
    clean: &[String],
    profile: &NoiseProfile,
    samplers: &Samplers,
    master_seed: u64,
    index: u64,
) -> (SynthRecord, SynthStats) {
    let mut rng = sentence_rng(master_seed, index);
    let mut stats = SynthStats::default();
    if clean.is_empty() {
        let record = SynthRecord {
            noised: Vec::new(),
            gold_edits: Vec::new(),
            seed: index,
        };
        return (record, stats);
    }

    // word deletion
    let mut deleted: Vec<bool> = clean
        .iter()
        .map(|t| {
            let op = if is_punct(t) {
                NoiseOp::PunctDelete
            } else {
                NoiseOp::WordDelete
            };
            stats.try_op(op, profile.rate(op), &mut rng)
        })
        .collect();
    if !clean.is_empty() && deleted.iter().all(|&d| d) {
        let last = clean.len() - 1;
        deleted[last] = false;
        let op = if is_punct(&clean[last]) {
            NoiseOp::PunctDelete
        } else {
            NoiseOp::WordDelete
        };
        stats.ops[op.slot()].applied -= 1;
    }
    let mut units: Vec<Unit> = Vec::with_capacity(clean.len() + 4);
    let mut pending: Vec<String> = Vec::new();
    for (i, t) in clean.iter().enumerate() {
        if deleted[i] {
            pending.push(t.clone());
        } else {
            units.push(Unit {
                origin: Some(i),
                text: t.clone(),
                deleted_before: std::mem::take(&mut pending),
                swapped: false,
                touched: false,
            });
        }
    }
    let tail_deleted = pending;

    // word insertion, one chance per gap
    let rate = profile.rate(NoiseOp::WordInsert);
    let mut with_ins: Vec<Unit> = Vec::with_capacity(units.len() * 2 + 1);
    let gaps = units.len() + 1;
    let mut rest = units.into_iter();
    for g in 0..gaps {
        if stats.try_op(NoiseOp::WordInsert, rate, &mut rng) {
            if let Some((vocab, dist)) = &samplers.words {
                with_ins.push(Unit {
                    origin: None,
                    text: vocab[dist.sample(&mut rng)].clone(),
                    deleted_before: Vec::new(),
                    swapped: false,
                    touched: true,
                });
            }
        }
        if g + 1 < gaps {
            with_ins.extend(rest.next());
        }
    }
    let mut units = with_ins;

    // adjacent transposition of original, consecutive, distinct words
    let rate = profile.rate(NoiseOp::WordTranspose);
    let mut i = 0;
    while i + 1 < units.len() {
        let (a, b) = (&units[i], &units[i + 1]);
        let eligible = matches!((a.origin, b.origin), (Some(x), Some(y)) if y == x + 1)
            && !is_punct(&a.text)
            && !is_punct(&b.text)
            && a.text != b.text;
        if eligible && stats.try_op(NoiseOp::WordTranspose, rate, &mut rng) {
            units.swap(i, i + 1);
            let moved = std::mem::take(&mut units[i + 1].deleted_before);
            units[i].deleted_before = moved;
            units[i].swapped = true;
            units[i].touched = true;
            units[i + 1].touched = true;
            i += 2;
        } else {
            i += 1;
        }
    }

    // character noise inside untouched words
    for u in units.iter_mut() {
        if !u.touched && !is_punct(&u.text) {
            u.text = noise_word(&u.text, profile, samplers, &mut stats, &mut rng);
        }
    }

    let mut gold = Vec::new();
    let mut k = 0;
    while k < units.len() {
        let u = &units[k];
        if !u.deleted_before.is_empty() {
            gold.push(Edit::new(
                k,
                k,
                deletion_label(&u.deleted_before),
                u.deleted_before.clone(),
                0,
            ));
        }
        match u.origin {
            None => gold.push(Edit::new(
                k,
                k + 1,
                ErrorLabel::simple(BaseLabel::UnnecessaryWord),
                Vec::new(),
                0,
            )),
            Some(_) if u.swapped => {
                let second = &units[k + 1];
                let orig = vec![second.text.clone(), u.text.clone()];
                gold.push(Edit::new(
                    k,
                    k + 2,
                    ErrorLabel::simple(BaseLabel::WordOrder),
                    orig,
                    0,
                ));
                k += 2;
                continue;
            }
            Some(ci) => {
                if u.text != clean[ci] {
                    gold.push(Edit::new(
                        k,
                        k + 1,
                        ErrorLabel::simple(BaseLabel::Spell),
                        vec![clean[ci].clone()],
                        0,
                    ));
                }
            }
        }
        k += 1;
    }
    if !tail_deleted.is_empty() {
        gold.push(Edit::new(
            units.len(),
            units.len(),
            deletion_label(&tail_deleted),
            tail_deleted,
            0,
        ));
    }
    let record = SynthRecord {
        noised: units.into_iter().map(|u| u.text).collect(),
        gold_edits: gold,
        seed: index,
    };
    (record, stats)
}

/// Noises every sentence; record `i` uses stream `i`.
pub fn synthesize(
    clean: &[Vec<String>],
    profile: &NoiseProfile,
    master_seed: u64,
) -> Result<(Vec<SynthRecord>, SynthStats), SynthError> {
    profile.validate()?;
    let samplers = Samplers::new(profile);
    let out: Vec<(SynthRecord, SynthStats)> = clean
        .par_iter()
        .enumerate()
        .map(|(i, s)| synthesize_one(s, profile, &samplers, master_seed, i as u64))
        .collect();
    let mut stats = SynthStats::default();
    let records = out
        .into_iter()
        .map(|(r, s)| {
            stats += s;
            r
        })
        .collect();
    Ok((records, stats))
}

/// M2 text with the noised sentences as sources and the restoring edits as
/// annotator 0.
pub fn write_synth_m2(records: &[SynthRecord]) -> String {
    let mut out = String::new();
    for (i, r) in records.iter().enumerate() {
        if i > 0 {
            out.push('\n');
        }
        let mut ann = BTreeMap::new();
        ann.insert(0, r.gold_edits.clone());
        crate::corpusio::write_sentence(&mut out, &r.noised, &ann);
    }
    out
}

/// Character operations turning `clean` into `noisy`, from an optimal-string-
/// alignment backtrace. Substitutions are reported as `(delete, insert)`.
fn char_diff(clean: &str, noisy: &str) -> [f64; 3] {
    let a: Vec<char> = clean.chars().collect();
    let b: Vec<char> = noisy.chars().collect();
    let (n, m) = (a.len(), b.len());
    let mut d = vec![vec![0usize; m + 1]; n + 1];
    for (i, row) in d.iter_mut().enumerate() {
        row[0] = i;
    }
    for (j, cell) in d[0].iter_mut().enumerate() {
        *cell = j;
    }
    for i in 1..=n {
        for j in 1..=m {
            let sub = usize::from(a[i - 1] != b[j - 1]);
            let mut v = (d[i - 1][j] + 1)
                .min(d[i][j - 1] + 1)
                .min(d[i - 1][j - 1] + sub);
            if i > 1 && j > 1 && a[i - 1] == b[j - 2] && a[i - 2] == b[j - 1] {
                v = v.min(d[i - 2][j - 2] + 1);
            }
            d[i][j] = v;
        }
    }
    // [delete, insert, transpose] in the noising direction
    let mut out = [0.0; 3];
    let (mut i, mut j) = (n, m);
    while i > 0 || j > 0 {
        if i > 1
            && j > 1
            && a[i - 1] == b[j - 2]
            && a[i - 2] == b[j - 1]
            && a[i - 1] != b[j - 1]
            && d[i][j] == d[i - 2][j - 2] + 1
        {
            out[2] += 1.0;
            i -= 2;
            j -= 2;
        } else if i > 0 && j > 0 && d[i][j] == d[i - 1][j - 1] + usize::from(a[i - 1] != b[j - 1]) {
            if a[i - 1] != b[j - 1] {
                out[0] += 0.5;
                out[1] += 0.5;
            }
            i -= 1;
            j -= 1;
        } else if i > 0 && d[i][j] == d[i - 1][j] + 1 {
            out[0] += 1.0;
            i -= 1;
        } else {
            out[1] += 1.0;
            j -= 1;
        }
    }
    out
}

/// Estimates noise rates from human annotations (annotator 0, or the lowest
/// id present). Counts are divided by the unit totals of the corrected text.
/// Returns the profile and warnings for capped rates.
pub fn derive_noise_profile(
    gold: &[AnnotatedSentence],
) -> Result<(NoiseProfile, Vec<String>), SynthError> {
    if gold.is_empty() {
        return Err(SynthError::EmptyCorpus);
    }
    let mut hits: HashMap<NoiseOp, f64> = HashMap::new();
    let mut units: HashMap<NoiseOp, u64> = HashMap::new();
    let mut profile = NoiseProfile::default();

    for s in gold {
        let edits: &[Edit] = s
            .annotations
            .get(&0)
            .or_else(|| s.annotations.values().next())
            .map_or(&[], Vec::as_slice);
        let corrected =
            apply_edits(&s.source, edits).map_err(|e| SynthError::Edits(e.to_string()))?;

        let words: Vec<&String> = corrected.iter().filter(|t| !is_punct(t)).collect();
        let n_punct = (corrected.len() - words.len()) as u64;
        let chars: u64 = words.iter().map(|w| w.chars().count() as u64).sum();
        // transposition units skip identical neighbours, as the noiser does
        let pairs: u64 = words
            .iter()
            .map(|w| {
                let cs: Vec<char> = w.chars().collect();
                cs.windows(2).filter(|p| p[0] != p[1]).count() as u64
            })
            .sum();
        let word_pairs = corrected
            .windows(2)
            .filter(|p| !is_punct(&p[0]) && !is_punct(&p[1]) && p[0] != p[1])
            .count() as u64;
        *units.entry(NoiseOp::WordDelete).or_default() += words.len() as u64;
        *units.entry(NoiseOp::PunctDelete).or_default() += n_punct;
        *units.entry(NoiseOp::WordInsert).or_default() += corrected.len() as u64 + 1;
        *units.entry(NoiseOp::WordTranspose).or_default() += word_pairs;
        *units.entry(NoiseOp::CharDelete).or_default() += chars;
        *units.entry(NoiseOp::CharInsert).or_default() += chars;
        *units.entry(NoiseOp::CharTranspose).or_default() += pairs;
        for w in &words {
            for c in w.chars().filter(|c| !c.is_whitespace()) {
                *profile.char_alphabet.entry(c).or_default() += 1;
            }
            *profile.word_unigrams.entry((*w).clone()).or_default() += 1;
        }

        for e in edits {
            let mut add = |op: NoiseOp, v: f64| *hits.entry(op).or_default() += v;
            let source_span = &s.source[e.start.min(e.end)..e.end];
            if e.label.contains(BaseLabel::Spell) {
                let diff = if source_span.len() == 1 && e.correction.len() == 1 {
                    char_diff(&e.correction[0], &source_span[0])
                } else {
                    [0.0; 3]
                };
                if diff.iter().sum::<f64>() > 0.0 {
                    add(NoiseOp::CharDelete, diff[0]);
                    add(NoiseOp::CharInsert, diff[1]);
                    add(NoiseOp::CharTranspose, diff[2]);
                } else {
                    for op in [
                        NoiseOp::CharDelete,
                        NoiseOp::CharInsert,
                        NoiseOp::CharTranspose,
                    ] {
                        add(op, 1.0 / 3.0);
                    }
                }
            }
            if e.label.contains(BaseLabel::MissingWord) || e.label.contains(BaseLabel::MissingPunct)
            {
                for t in &e.correction {
                    if is_punct(t) {
                        add(NoiseOp::PunctDelete, 1.0);
                    } else {
                        add(NoiseOp::WordDelete, 1.0);
                    }
                }
            }
            if e.label.contains(BaseLabel::UnnecessaryWord) {
                add(NoiseOp::WordInsert, source_span.len().max(1) as f64);
            }
            if e.label.contains(BaseLabel::WordOrder) {
                add(NoiseOp::WordTranspose, 1.0);
            }
        }
    }

    let mut warnings = Vec::new();
    for op in NoiseOp::ALL {
        let n = units.get(&op).copied().unwrap_or(0);
        let h = hits.get(&op).copied().unwrap_or(0.0);
        let mut rate = if n == 0 { 0.0 } else { h / n as f64 };
        if rate > MAX_RATE {
            warnings.push(format!("{op} rate {rate:.4} capped at {MAX_RATE}"));
            rate = MAX_RATE;
        }
        profile.set_rate(op, rate);
    }
    Ok((profile, warnings))
}
