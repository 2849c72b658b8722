//! Statistical spelling correction in context, plus deterministic
//! replacement lists applied as preprocessing.
//!
//! Candidates come from a symmetric-delete index: every vocabulary word is
//! stored under all strings reachable by removing up to two characters, and a
//! query looks up its own deletion variants. Hits are verified with the exact
//! Damerau-Levenshtein distance.

use std::collections::{BTreeSet, HashMap, HashSet};

use thiserror::Error;

use crate::corpusio::{Edit, Warning};
use crate::ngram_lm::NGramModel;
use crate::taxonomy::{BaseLabel, ErrorLabel};

/// Deletion depth stored in the index; the largest supported search distance.
pub const INDEX_DEPTH: usize = 2;

pub fn edit_distance(a: &str, b: &str) -> usize {
    strsim::damerau_levenshtein(a, b)
}

/// Strings obtained from `word` by removing up to `depth` characters,
/// including `word` itself.
fn deletion_variants(word: &str, depth: usize) -> HashSet<String> {
    let mut all = HashSet::new();
    all.insert(word.to_string());
    let mut frontier = vec![word.to_string()];
    for _ in 0..depth {
        let mut next = Vec::new();
        for w in &frontier {
            let chars: Vec<char> = w.chars().collect();
            for skip in 0..chars.len() {
                let v: String = chars
                    .iter()
                    .enumerate()
                    .filter(|&(k, _)| k != skip)
                    .map(|(_, c)| *c)
                    .collect();
                if all.insert(v.clone()) {
                    next.push(v);
                }
            }
        }
        frontier = next;
    }
    all
}

#[derive(Debug, Clone, Default)]
pub struct CandidateIndex {
    words: Vec<String>,
    deletes: HashMap<String, Vec<u32>>,
}

impl CandidateIndex {
    pub fn new<I, S>(words: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        let mut words: Vec<String> = words.into_iter().map(Into::into).collect();
        words.sort_unstable();
        words.dedup();
        let mut deletes: HashMap<String, Vec<u32>> = HashMap::new();
        for (id, w) in words.iter().enumerate() {
            for v in deletion_variants(w, INDEX_DEPTH) {
                deletes.entry(v).or_default().push(id as u32);
            }
        }
        CandidateIndex { words, deletes }
    }

    pub fn from_model(model: &NGramModel) -> Self {
        Self::new(model.words())
    }

    pub fn len(&self) -> usize {
        self.words.len()
    }

    pub fn is_empty(&self) -> bool {
        self.words.is_empty()
    }

    pub fn word(&self, id: u32) -> &str {
        &self.words[id as usize]
    }

    /// All indexed words within `max_dist` of `word`, as `(id, distance)`
    /// sorted by distance then id. Distances above the index depth are clamped.
    pub fn candidates(&self, word: &str, max_dist: usize) -> Vec<(u32, usize)> {
        let max_dist = max_dist.min(INDEX_DEPTH);
        let mut ids = BTreeSet::new();
        for v in deletion_variants(word, max_dist) {
            if let Some(hits) = self.deletes.get(&v) {
                ids.extend(hits.iter().copied());
            }
        }
        let mut out: Vec<(u32, usize)> = ids
            .into_iter()
            .filter_map(|id| {
                let d = edit_distance(word, self.word(id));
                (d <= max_dist).then_some((id, d))
            })
            .collect();
        out.sort_unstable_by_key(|&(id, d)| (d, id));
        out
    }
}

/// Lower- and upper-case Estonian letters and the hyphen.
pub fn estonian_alphabet() -> HashSet<char> {
    let lower = "abcdefghijklmnopqrstuvwxyzõäöüšž";
    lower
        .chars()
        .chain(lower.chars().flat_map(char::to_uppercase))
        .chain(std::iter::once('-'))
        .collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct CorrectionPolicy {
    pub max_edit_distance_oov: usize,
    pub max_edit_distance_vocab: usize,
    /// Log-probability charged per unit of edit distance.
    pub distance_penalty: f64,
    /// Extra log-probability an in-vocabulary word must be beaten by.
    pub margin: f64,
    /// Tokens with characters outside this set are left alone, and candidates
    /// must stay inside it.
    pub alphabet: HashSet<char>,
    /// Skip tokens with digits, all-caps tokens and capitalised tokens that
    /// are not sentence-initial.
    pub protect_names: bool,
    /// Largest relative length change allowed between token and candidate.
    pub max_length_ratio: f64,
}

impl Default for CorrectionPolicy {
    fn default() -> Self {
        CorrectionPolicy {
            max_edit_distance_oov: 2,
            max_edit_distance_vocab: 1,
            distance_penalty: 4.0,
            margin: 2.0,
            alphabet: estonian_alphabet(),
            protect_names: true,
            max_length_ratio: 0.4,
        }
    }
}

impl CorrectionPolicy {
    fn in_alphabet(&self, word: &str) -> bool {
        word.chars().all(|c| self.alphabet.contains(&c))
    }

    /// Whether the token at `position` is exempt from correction.
    pub fn is_protected(&self, token: &str, position: usize) -> bool {
        if token.is_empty() || !self.in_alphabet(token) {
            return true;
        }
        if !self.protect_names {
            return false;
        }
        if token.chars().any(|c| c.is_numeric()) {
            return true;
        }
        let letters: Vec<char> = token.chars().filter(|c| c.is_alphabetic()).collect();
        if letters.len() > 1 && letters.iter().all(|c| c.is_uppercase()) {
            return true;
        }
        position > 0 && token.chars().next().is_some_and(char::is_uppercase)
    }

    fn length_ok(&self, token: &str, cand: &str) -> bool {
        let a = token.chars().count() as f64;
        let b = cand.chars().count() as f64;
        (a - b).abs() <= self.max_length_ratio * a
    }
}

/// One change made by [`correct_sentence`].
#[derive(Debug, Clone, PartialEq)]
pub struct Replacement {
    pub position: usize,
    pub original: String,
    pub replacement: String,
    pub distance: usize,
}

impl Replacement {
    pub fn to_edit(&self) -> Edit {
        Edit::new(
            self.position,
            self.position + 1,
            ErrorLabel::simple(BaseLabel::Spell),
            vec![self.replacement.clone()],
            0,
        )
    }
}

/// Log-probability of the n-grams that see position `i`, which is the part
/// of the sentence score that changes when token `i` is replaced.
fn local_logprob(model: &NGramModel, tokens: &[String], i: usize) -> f64 {
    let k = model.order() - 1;
    let last = (i + k).min(tokens.len());
    let mut lp = 0.0;
    for pos in i..=last {
        let ctx = &tokens[pos.saturating_sub(k)..pos];
        lp += if pos == tokens.len() {
            model.end_prob(ctx)
        } else {
            model.prob(ctx, &tokens[pos])
        }
        .ln();
    }
    lp
}

/// Corrects left to right; each decision sees the already corrected left
/// context and the original right context.
pub fn correct_sentence(
    tokens: &[String],
    model: &NGramModel,
    index: &CandidateIndex,
    policy: &CorrectionPolicy,
) -> (Vec<String>, Vec<Replacement>) {
    let mut out = tokens.to_vec();
    let mut applied = Vec::new();
    if model.order() < 2 {
        return (out, applied);
    }
    for i in 0..out.len() {
        let token = out[i].clone();
        if policy.is_protected(&token, i) {
            continue;
        }
        let in_vocab = model.contains(&token);
        let max_dist = if in_vocab {
            policy.max_edit_distance_vocab
        } else {
            policy.max_edit_distance_oov
        };
        if max_dist == 0 {
            continue;
        }
        let original = local_logprob(model, &out, i);
        let mut best: Option<(f64, u32, usize)> = None;
        for (id, dist) in index.candidates(&token, max_dist) {
            let cand = index.word(id);
            if dist == 0 || !policy.length_ok(&token, cand) || !policy.in_alphabet(cand) {
                continue;
            }
            out[i] = cand.to_string();
            let score = local_logprob(model, &out, i) - policy.distance_penalty * dist as f64;
            // candidates arrive by (distance, id), so strict > keeps the first on ties
            if best.is_none_or(|(b, _, _)| score > b) {
                best = Some((score, id, dist));
            }
        }
        out[i] = token.clone();
        let needed = if in_vocab {
            original + policy.margin
        } else {
            original
        };
        if let Some((score, id, distance)) = best {
            if score > needed {
                out[i] = index.word(id).to_string();
                applied.push(Replacement {
                    position: i,
                    original: token,
                    replacement: out[i].clone(),
                    distance,
                });
            }
        }
    }
    (out, applied)
}

#[derive(Debug, Error, PartialEq, Eq)]
#[error("replacement list line {line}: {message}")]
pub struct ReplistError {
    pub line: usize,
    pub message: String,
}

/// Token-sequence substitutions applied longest match first.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ReplacementList {
    map: HashMap<Vec<String>, Vec<String>>,
    /// Distinct key lengths, longest first.
    lengths: Vec<usize>,
}

impl ReplacementList {
    pub fn new<I>(entries: I) -> Self
    where
        I: IntoIterator<Item = (Vec<String>, Vec<String>)>,
    {
        let map: HashMap<Vec<String>, Vec<String>> =
            entries.into_iter().filter(|(k, _)| !k.is_empty()).collect();
        let mut lengths: Vec<usize> = map.keys().map(Vec::len).collect();
        lengths.sort_unstable_by(|a, b| b.cmp(a));
        lengths.dedup();
        ReplacementList { map, lengths }
    }

    pub fn len(&self) -> usize {
        self.map.len()
    }

    pub fn is_empty(&self) -> bool {
        self.map.is_empty()
    }

    pub fn get(&self, key: &[String]) -> Option<&[String]> {
        self.map.get(key).map(Vec::as_slice)
    }

    /// Entries ordered longest key first, then by key.
    pub fn entries(&self) -> Vec<(&[String], &[String])> {
        let mut v: Vec<(&[String], &[String])> = self
            .map
            .iter()
            .map(|(k, v)| (k.as_slice(), v.as_slice()))
            .collect();
        v.sort_by(|a, b| b.0.len().cmp(&a.0.len()).then_with(|| a.0.cmp(b.0)));
        v
    }

    pub fn apply(&self, tokens: &[String]) -> Vec<String> {
        self.apply_with_edits(tokens).0
    }

    /// Applies the list and reports each match as an edit over the input.
    pub fn apply_with_edits(&self, tokens: &[String]) -> (Vec<String>, Vec<Edit>) {
        let mut out = Vec::with_capacity(tokens.len());
        let mut edits = Vec::new();
        let mut i = 0;
        'outer: while i < tokens.len() {
            for &n in &self.lengths {
                if i + n > tokens.len() {
                    continue;
                }
                if let Some(value) = self.map.get(&tokens[i..i + n]) {
                    out.extend(value.iter().cloned());
                    edits.push(Edit::new(i, i + n, ErrorLabel::Unlabeled, value.clone(), 0));
                    i += n;
                    continue 'outer;
                }
            }
            out.push(tokens[i].clone());
            i += 1;
        }
        (out, edits)
    }
}

pub fn apply_replacement_list(tokens: &[String], list: &ReplacementList) -> Vec<String> {
    list.apply(tokens)
}

/// Parses `wrong<TAB>correct` lines. Blank lines and lines starting with `#`
/// are skipped. A repeated key keeps the later value.
pub fn load_replacement_list(text: &str) -> Result<(ReplacementList, Vec<Warning>), ReplistError> {
    let mut entries: Vec<(Vec<String>, Vec<String>)> = Vec::new();
    let mut seen: HashMap<Vec<String>, usize> = HashMap::new();
    let mut warnings = Vec::new();
    for (k, raw) in text.lines().enumerate() {
        let line_no = k + 1;
        let line = raw.strip_suffix('\r').unwrap_or(raw);
        if line.trim().is_empty() || line.trim_start().starts_with('#') {
            continue;
        }
        let fields: Vec<&str> = line.split('\t').collect();
        if fields.len() != 2 {
            return Err(ReplistError {
                line: line_no,
                message: format!("expected 2 tab-separated fields, found {}", fields.len()),
            });
        }
        let key: Vec<String> = fields[0].split_whitespace().map(String::from).collect();
        let value: Vec<String> = fields[1].split_whitespace().map(String::from).collect();
        if key.is_empty() || value.is_empty() {
            return Err(ReplistError {
                line: line_no,
                message: "empty side".into(),
            });
        }
        if let Some(&prev) = seen.get(&key) {
            warnings.push(Warning {
                line: line_no,
                message: format!(
                    "duplicate key '{}' (first on line {prev}); keeping this entry",
                    key.join(" ")
                ),
            });
        }
        seen.insert(key.clone(), line_no);
        entries.push((key, value));
    }
    Ok((ReplacementList::new(entries), warnings))
}
