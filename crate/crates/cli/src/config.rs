//! Flat `key=value` run configuration. Command-line flags override it.

use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use gecw_core::scorer::Selection;
use gecw_core::wo_detect::{ProbabilityMode, DEFAULT_MIN_SUPPORT, DEFAULT_THRESHOLD};

#[derive(Debug, Clone, PartialEq)]
pub struct Config {
    pub beta: f64,
    pub max_merge_span: usize,
    pub selection: Selection,
    pub label_map: Option<PathBuf>,

    pub lm_model: Option<PathBuf>,
    pub lm_order: usize,
    pub replacement_list: Option<PathBuf>,
    pub max_edit_distance_oov: usize,
    pub max_edit_distance_vocab: usize,
    pub distance_penalty: f64,
    pub margin: f64,
    pub protect_names: bool,
    pub max_length_ratio: f64,

    pub synth_profile: Option<PathBuf>,
    pub intensity: f64,
    pub seed: u64,

    pub wo_model: Option<PathBuf>,
    pub wo_threshold: f64,
    pub wo_min_support: u64,
    pub wo_mode: ProbabilityMode,
    pub wo_allowlist: Option<PathBuf>,

    pub jobs: usize,
}

impl Default for Config {
    fn default() -> Self {
        Config {
            beta: 0.5,
            max_merge_span: 4,
            selection: Selection::Running,
            label_map: None,
            lm_model: None,
            lm_order: 3,
            replacement_list: None,
            max_edit_distance_oov: 2,
            max_edit_distance_vocab: 1,
            distance_penalty: 4.0,
            margin: 2.0,
            protect_names: true,
            max_length_ratio: 0.4,
            synth_profile: None,
            intensity: 1.0,
            seed: 0,
            wo_model: None,
            wo_threshold: DEFAULT_THRESHOLD,
            wo_min_support: DEFAULT_MIN_SUPPORT,
            wo_mode: ProbabilityMode::Conditional,
            wo_allowlist: None,
            jobs: 1,
        }
    }
}

/// Every accepted key, in file order.
pub const KEYS: [&str; 22] = [
    "beta",
    "max_merge_span",
    "selection",
    "label_map",
    "lm_model",
    "lm_order",
    "replacement_list",
    "max_edit_distance_oov",
    "max_edit_distance_vocab",
    "distance_penalty",
    "margin",
    "protect_names",
    "max_length_ratio",
    "synth_profile",
    "intensity",
    "seed",
    "wo_model",
    "wo_threshold",
    "wo_min_support",
    "wo_mode",
    "wo_allowlist",
    "jobs",
];

#[derive(Debug, Clone, PartialEq)]
pub struct ConfigError {
    pub line: usize,
    pub message: String,
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "config line {}: {}", self.line, self.message)
    }
}

impl std::error::Error for ConfigError {}

fn parse<T: FromStr>(key: &str, value: &str) -> Result<T, String> {
    value
        .parse()
        .map_err(|_| format!("bad value '{value}' for {key}"))
}

fn path(value: &str) -> Option<PathBuf> {
    (!value.is_empty()).then(|| PathBuf::from(value))
}

impl Config {
    /// Reads `key=value` lines. Blank lines and `#` comments are skipped;
    /// unknown keys and repeated keys are errors.
    pub fn parse(text: &str) -> Result<Config, ConfigError> {
        let mut c = Config::default();
        let mut seen = std::collections::HashSet::new();
        for (k, raw) in text.lines().enumerate() {
            let line = k + 1;
            let err = |message: String| ConfigError { line, message };
            let trimmed = raw.trim();
            if trimmed.is_empty() || trimmed.starts_with('#') {
                continue;
            }
            let (key, value) = trimmed
                .split_once('=')
                .ok_or_else(|| err("expected key=value".into()))?;
            let (key, value) = (key.trim(), value.trim());
            if !KEYS.contains(&key) {
                return Err(err(format!("unknown key '{key}'")));
            }
            if !seen.insert(key.to_string()) {
                return Err(err(format!("repeated key '{key}'")));
            }
            c.set(key, value).map_err(err)?;
        }
        c.check()
            .map_err(|message| ConfigError { line: 0, message })?;
        Ok(c)
    }

    fn set(&mut self, key: &str, v: &str) -> Result<(), String> {
        match key {
            "beta" => self.beta = parse(key, v)?,
            "max_merge_span" => self.max_merge_span = parse(key, v)?,
            "selection" => self.selection = v.parse()?,
            "label_map" => self.label_map = path(v),
            "lm_model" => self.lm_model = path(v),
            "lm_order" => self.lm_order = parse(key, v)?,
            "replacement_list" => self.replacement_list = path(v),
            "max_edit_distance_oov" => self.max_edit_distance_oov = parse(key, v)?,
            "max_edit_distance_vocab" => self.max_edit_distance_vocab = parse(key, v)?,
            "distance_penalty" => self.distance_penalty = parse(key, v)?,
            "margin" => self.margin = parse(key, v)?,
            "protect_names" => self.protect_names = parse(key, v)?,
            "max_length_ratio" => self.max_length_ratio = parse(key, v)?,
            "synth_profile" => self.synth_profile = path(v),
            "intensity" => self.intensity = parse(key, v)?,
            "seed" => self.seed = parse(key, v)?,
            "wo_model" => self.wo_model = path(v),
            "wo_threshold" => self.wo_threshold = parse(key, v)?,
            "wo_min_support" => self.wo_min_support = parse(key, v)?,
            "wo_mode" => self.wo_mode = v.parse()?,
            "wo_allowlist" => self.wo_allowlist = path(v),
            "jobs" => self.jobs = parse(key, v)?,
            _ => unreachable!("key list and setter disagree"),
        }
        Ok(())
    }

    /// Range checks shared by the file and the flags.
    pub fn check(&self) -> Result<(), String> {
        if !(self.beta > 0.0 && self.beta.is_finite()) {
            return Err(format!("beta must be positive, got {}", self.beta));
        }
        if self.max_merge_span == 0 {
            return Err("max_merge_span must be at least 1".into());
        }
        if !(1..=5).contains(&self.lm_order) {
            return Err(format!("lm_order must be in 1..=5, got {}", self.lm_order));
        }
        if self.distance_penalty < 0.0 || self.margin < 0.0 || self.max_length_ratio < 0.0 {
            return Err(
                "distance_penalty, margin and max_length_ratio must be non-negative".into(),
            );
        }
        if !(self.intensity >= 0.0 && self.intensity.is_finite()) {
            return Err(format!(
                "intensity must be non-negative, got {}",
                self.intensity
            ));
        }
        if !(0.0..=1.0).contains(&self.wo_threshold) {
            return Err(format!(
                "wo_threshold must be in [0, 1], got {}",
                self.wo_threshold
            ));
        }
        if self.jobs == 0 {
            return Err("jobs must be at least 1".into());
        }
        Ok(())
    }
}
