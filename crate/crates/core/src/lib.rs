//! Tooling for evaluating and performing text correction.
//!
//! - [`corpusio`]: M2, CoNLL-U and plain-text formats; applying gold edits.
//! - [`taxonomy`]: the error-label scheme.
//! - [`scorer`]: MaxMatch scoring with word-order and detection recall.
//! - [`ngram_lm`]: interpolated n-gram language models.
//! - [`spellkit`]: context-aware spelling correction and replacement lists.
//! - [`synth`]: noise profiles and synthetic error generation.
//! - [`wo_detect`]: improbable POS-trigram context detection.

pub mod corpusio;
pub mod ngram_lm;
pub mod scorer;
pub mod spellkit;
pub mod synth;
pub mod taxonomy;
pub mod wo_detect;
