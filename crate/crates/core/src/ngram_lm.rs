//! Interpolated additive-smoothing n-gram models over token sequences.
//!
//! Sentences are padded with `order - 1` begin markers and one end marker.
//! An n-gram is counted at every predicted position (each real token and the
//! end marker), so the count of a history always equals the sum of the counts
//! of its continuations. Histories made only of begin markers occur once per
//! sentence and are derived from the end-marker count.
//!
//! ```text
//! P(w | h) = sum_n  lambda_n * (c(h_n, w) + d) / (c(h_n) + d * |V|)
//! ```
//!
//! with `d = 0.01`, `h_n` the last `n - 1` history tokens and `V` the
//! predictable outcomes (vocabulary, end marker and the unknown token).

use std::collections::HashMap;
use std::io::{Read, Write};

use thiserror::Error;

pub const MAX_ORDER: usize = 5;
/// Additive smoothing constant.
pub const DELTA: f64 = 0.01;

pub const UNK: u32 = 0;
pub const BOS: u32 = 1;
pub const EOS: u32 = 2;
const RESERVED: [&str; 3] = ["<unk>", "<s>", "</s>"];

const MAGIC: &[u8; 4] = b"ETLM";
pub const FORMAT_VERSION: u32 = 1;

#[derive(Debug, Error)]
pub enum LmError {
    #[error("order must be between 1 and {MAX_ORDER}, got {0}")]
    Order(usize),
    #[error("training data has no non-empty sentence")]
    EmptyInput,
    #[error("expected {expected} interpolation weights, got {got}")]
    WeightCount { expected: usize, got: usize },
    #[error("interpolation weights must be non-negative and sum to 1 (sum {0})")]
    WeightSum(f64),
    #[error("not a model file (bad magic)")]
    Magic,
    #[error("unsupported model format version {0}")]
    Version(u32),
    #[error("model file checksum mismatch (truncated or corrupt)")]
    Checksum,
    #[error("malformed model file: {0}")]
    Malformed(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TrainOptions {
    /// Map tokens seen once to the unknown token.
    pub hapax_to_unk: bool,
}

#[allow(clippy::derivable_impls)]
impl Default for TrainOptions {
    fn default() -> Self {
        TrainOptions {
            hapax_to_unk: false,
        }
    }
}

/// Default interpolation weights, lowest order first.
pub fn default_weights(order: usize) -> Vec<f64> {
    if order == 3 {
        vec![0.1, 0.3, 0.6]
    } else {
        vec![1.0 / order as f64; order]
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct NGramModel {
    order: usize,
    /// Id to token; the first three ids are reserved.
    vocab: Vec<String>,
    index: HashMap<String, u32>,
    /// `counts[n - 1]` holds n-gram counts.
    counts: Vec<HashMap<Box<[u32]>, u64>>,
    weights: Vec<f64>,
}

fn check_weights(order: usize, weights: &[f64]) -> Result<(), LmError> {
    if weights.len() != order {
        return Err(LmError::WeightCount {
            expected: order,
            got: weights.len(),
        });
    }
    let sum: f64 = weights.iter().sum();
    if weights.iter().any(|w| w.is_nan() || *w < 0.0) || (sum - 1.0).abs() > 1e-9 {
        return Err(LmError::WeightSum(sum));
    }
    Ok(())
}

/// Trains a model with default weights and options.
pub fn train<S: AsRef<[String]>>(sentences: &[S], order: usize) -> Result<NGramModel, LmError> {
    NGramModel::train(sentences, order, TrainOptions::default())
}

impl NGramModel {
    pub fn train<S: AsRef<[String]>>(
        sentences: &[S],
        order: usize,
        opts: TrainOptions,
    ) -> Result<NGramModel, LmError> {
        if !(1..=MAX_ORDER).contains(&order) {
            return Err(LmError::Order(order));
        }
        if sentences.iter().all(|s| s.as_ref().is_empty()) {
            return Err(LmError::EmptyInput);
        }
        let mut freq: HashMap<&str, u64> = HashMap::new();
        for s in sentences {
            for t in s.as_ref() {
                *freq.entry(t.as_str()).or_default() += 1;
            }
        }
        let mut words: Vec<&str> = freq
            .iter()
            .filter(|(_, &c)| !(opts.hapax_to_unk && c == 1))
            .map(|(w, _)| *w)
            .collect();
        words.sort_unstable();
        let mut vocab: Vec<String> = RESERVED.iter().map(|s| s.to_string()).collect();
        vocab.extend(words.iter().map(|w| w.to_string()));
        let index: HashMap<String, u32> = vocab
            .iter()
            .enumerate()
            .skip(RESERVED.len())
            .map(|(i, w)| (w.clone(), i as u32))
            .collect();

        let mut counts: Vec<HashMap<Box<[u32]>, u64>> = vec![HashMap::new(); order];
        let mut padded: Vec<u32> = Vec::new();
        for s in sentences {
            padded.clear();
            padded.extend(std::iter::repeat_n(BOS, order - 1));
            padded.extend(
                s.as_ref()
                    .iter()
                    .map(|t| index.get(t.as_str()).copied().unwrap_or(UNK)),
            );
            padded.push(EOS);
            for pos in order - 1..padded.len() {
                for n in 1..=order {
                    let gram = &padded[pos + 1 - n..=pos];
                    *counts[n - 1].entry(gram.into()).or_default() += 1;
                }
            }
        }
        Ok(NGramModel {
            order,
            vocab,
            index,
            counts,
            weights: default_weights(order),
        })
    }

    pub fn with_weights(mut self, weights: Vec<f64>) -> Result<Self, LmError> {
        check_weights(self.order, &weights)?;
        self.weights = weights;
        Ok(self)
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// Real vocabulary tokens, without the reserved entries.
    pub fn words(&self) -> impl Iterator<Item = &str> {
        self.vocab[RESERVED.len()..].iter().map(String::as_str)
    }

    pub fn contains(&self, token: &str) -> bool {
        self.index.contains_key(token)
    }

    pub fn id(&self, token: &str) -> u32 {
        self.index.get(token).copied().unwrap_or(UNK)
    }

    /// Number of predictable outcomes: vocabulary plus end marker and unknown.
    pub fn outcome_count(&self) -> usize {
        self.vocab.len() - 1
    }

    /// Predicted positions seen in training (tokens plus end markers).
    pub fn total_tokens(&self) -> u64 {
        self.counts[0].values().sum()
    }

    pub fn sentence_count(&self) -> u64 {
        self.count(&[EOS])
    }

    pub fn ngram_count(&self, n: usize) -> usize {
        self.counts.get(n.wrapping_sub(1)).map_or(0, HashMap::len)
    }

    /// Raw count of an id n-gram.
    pub fn count(&self, gram: &[u32]) -> u64 {
        if gram.is_empty() || gram.len() > self.order {
            return 0;
        }
        self.counts[gram.len() - 1].get(gram).copied().unwrap_or(0)
    }

    /// How often `history` was followed by a predicted token.
    pub fn history_count(&self, history: &[u32]) -> u64 {
        if history.is_empty() {
            self.total_tokens()
        } else if history.iter().all(|&t| t == BOS) {
            self.sentence_count()
        } else {
            self.count(history)
        }
    }

    /// `history` must hold exactly `order - 1` ids.
    fn prob_ids(&self, history: &[u32], token: u32) -> f64 {
        debug_assert_eq!(history.len(), self.order - 1);
        let v = self.outcome_count() as f64;
        let mut gram = [0u32; MAX_ORDER];
        let mut p = 0.0;
        for n in 1..=self.order {
            let h = &history[history.len() + 1 - n..];
            gram[..n - 1].copy_from_slice(h);
            gram[n - 1] = token;
            let c = self.count(&gram[..n]) as f64;
            let ch = self.history_count(h) as f64;
            p += self.weights[n - 1] * (c + DELTA) / (ch + DELTA * v);
        }
        p
    }

    fn history_ids<S: AsRef<str>>(&self, context: &[S]) -> Vec<u32> {
        let k = self.order - 1;
        let tail = &context[context.len().saturating_sub(k)..];
        let mut h = vec![BOS; k - tail.len()];
        h.extend(tail.iter().map(|t| self.id(t.as_ref())));
        h
    }

    /// `P(token | context)`. Contexts shorter than `order - 1` are treated as
    /// sentence-initial; longer ones are truncated to their last tokens.
    pub fn prob<S: AsRef<str>>(&self, context: &[S], token: &str) -> f64 {
        self.prob_ids(&self.history_ids(context), self.id(token))
    }

    /// Probability of the end marker after `context`.
    pub fn end_prob<S: AsRef<str>>(&self, context: &[S]) -> f64 {
        self.prob_ids(&self.history_ids(context), EOS)
    }

    /// Probability of an outcome id, including `UNK` and `EOS`.
    pub fn prob_of_id<S: AsRef<str>>(&self, context: &[S], id: u32) -> f64 {
        self.prob_ids(&self.history_ids(context), id)
    }

    /// Natural-log probability of a whole padded sentence.
    pub fn sentence_logprob<S: AsRef<str>>(&self, tokens: &[S]) -> f64 {
        let k = self.order - 1;
        let mut ids = vec![BOS; k];
        ids.extend(tokens.iter().map(|t| self.id(t.as_ref())));
        ids.push(EOS);
        (k..ids.len())
            .map(|pos| self.prob_ids(&ids[pos - k..pos], ids[pos]).ln())
            .sum()
    }

    /// Writes the binary model format. Output is deterministic.
    pub fn save<W: Write>(&self, mut sink: W) -> Result<(), LmError> {
        sink.write_all(&self.to_bytes())?;
        Ok(())
    }

    pub fn to_bytes(&self) -> Vec<u8> {
        let mut buf = Vec::new();
        buf.extend_from_slice(MAGIC);
        buf.extend_from_slice(&FORMAT_VERSION.to_le_bytes());
        buf.push(self.order as u8);
        for w in &self.weights {
            buf.extend_from_slice(&w.to_le_bytes());
        }
        buf.extend_from_slice(&(self.vocab.len() as u32).to_le_bytes());
        for w in &self.vocab {
            buf.extend_from_slice(&(w.len() as u32).to_le_bytes());
            buf.extend_from_slice(w.as_bytes());
        }
        for table in &self.counts {
            let mut entries: Vec<(&Box<[u32]>, &u64)> = table.iter().collect();
            entries.sort_unstable();
            buf.extend_from_slice(&(entries.len() as u64).to_le_bytes());
            for (gram, count) in entries {
                for id in gram.iter() {
                    buf.extend_from_slice(&id.to_le_bytes());
                }
                buf.extend_from_slice(&count.to_le_bytes());
            }
        }
        let sum = fnv1a64(&buf);
        buf.extend_from_slice(&sum.to_le_bytes());
        buf
    }

    pub fn load<R: Read>(mut source: R) -> Result<NGramModel, LmError> {
        let mut bytes = Vec::new();
        source.read_to_end(&mut bytes)?;
        Self::from_bytes(&bytes)
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<NGramModel, LmError> {
        if bytes.len() < 8 || &bytes[..4] != MAGIC {
            return Err(LmError::Magic);
        }
        let version = u32::from_le_bytes(bytes[4..8].try_into().unwrap());
        if version != FORMAT_VERSION {
            return Err(LmError::Version(version));
        }
        if bytes.len() < 16 {
            return Err(LmError::Checksum);
        }
        let (body, tail) = bytes.split_at(bytes.len() - 8);
        if fnv1a64(body) != u64::from_le_bytes(tail.try_into().unwrap()) {
            return Err(LmError::Checksum);
        }
        let mut r = Reader { buf: body, pos: 8 };
        let order = r.u8()? as usize;
        if !(1..=MAX_ORDER).contains(&order) {
            return Err(LmError::Order(order));
        }
        let weights = (0..order).map(|_| r.f64()).collect::<Result<Vec<_>, _>>()?;
        check_weights(order, &weights)?;
        let nvocab = r.u32()? as usize;
        if nvocab < RESERVED.len() {
            return Err(LmError::Malformed(
                "vocabulary lacks reserved entries".into(),
            ));
        }
        let mut vocab = Vec::with_capacity(nvocab);
        for _ in 0..nvocab {
            let len = r.u32()? as usize;
            let raw = r.take(len)?;
            let word = std::str::from_utf8(raw)
                .map_err(|_| LmError::Malformed("vocabulary entry is not UTF-8".into()))?;
            vocab.push(word.to_string());
        }
        let index = vocab
            .iter()
            .enumerate()
            .skip(RESERVED.len())
            .map(|(i, w)| (w.clone(), i as u32))
            .collect();
        let mut counts = Vec::with_capacity(order);
        for n in 1..=order {
            let entries = r.u64()? as usize;
            let mut table = HashMap::with_capacity(entries.min(1 << 20));
            for _ in 0..entries {
                let gram = (0..n)
                    .map(|_| r.u32())
                    .collect::<Result<Vec<_>, _>>()?
                    .into_boxed_slice();
                if gram.iter().any(|&id| id as usize >= nvocab) {
                    return Err(LmError::Malformed("n-gram id outside vocabulary".into()));
                }
                table.insert(gram, r.u64()?);
            }
            counts.push(table);
        }
        if r.pos != body.len() {
            return Err(LmError::Malformed("trailing bytes".into()));
        }
        Ok(NGramModel {
            order,
            vocab,
            index,
            counts,
            weights,
        })
    }

    /// Checks that every (n+1)-gram count is bounded by its history count.
    pub fn prefix_counts_consistent(&self) -> bool {
        self.counts.iter().skip(1).all(|table| {
            table
                .iter()
                .all(|(gram, &c)| self.history_count(&gram[..gram.len() - 1]) >= c)
        })
    }
}

struct Reader<'a> {
    buf: &'a [u8],
    pos: usize,
}

impl<'a> Reader<'a> {
    fn take(&mut self, n: usize) -> Result<&'a [u8], LmError> {
        let end = self
            .pos
            .checked_add(n)
            .filter(|&e| e <= self.buf.len())
            .ok_or_else(|| LmError::Malformed("unexpected end of data".into()))?;
        let s = &self.buf[self.pos..end];
        self.pos = end;
        Ok(s)
    }
    fn u8(&mut self) -> Result<u8, LmError> {
        Ok(self.take(1)?[0])
    }
    fn u32(&mut self) -> Result<u32, LmError> {
        Ok(u32::from_le_bytes(self.take(4)?.try_into().unwrap()))
    }
    fn u64(&mut self) -> Result<u64, LmError> {
        Ok(u64::from_le_bytes(self.take(8)?.try_into().unwrap()))
    }
    fn f64(&mut self) -> Result<f64, LmError> {
        Ok(f64::from_le_bytes(self.take(8)?.try_into().unwrap()))
    }
}

/// 64-bit FNV-1a (offset basis 0xcbf29ce484222325, prime 0x100000001b3).
pub fn fnv1a64(bytes: &[u8]) -> u64 {
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for &b in bytes {
        h ^= u64::from(b);
        h = h.wrapping_mul(0x0000_0100_0000_01b3);
    }
    h
}
