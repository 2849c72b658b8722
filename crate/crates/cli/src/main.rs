//! `gecw`: scoring, spelling correction, error synthesis and word-order
//! detection from the command line.
//!
//! Exit status is 0 on success, 1 for usage and configuration errors and 2
//! when input data is missing, malformed or inconsistent.

mod config;

use std::fmt;
use std::io::{Read, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{Context as _, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use rayon::prelude::*;

use gecw_core::corpusio::{
    parse_conllu, parse_m2_with, parse_plain, serialize_m2, serialize_plain, AnnotatedSentence,
    Corpus, Edit,
};
use gecw_core::ngram_lm::{NGramModel, TrainOptions};
use gecw_core::scorer::{score_corpus, AlignConfig, ScorerConfig};
use gecw_core::spellkit::{
    correct_sentence, load_replacement_list, CandidateIndex, CorrectionPolicy, Replacement,
    ReplacementList,
};
use gecw_core::synth::{derive_noise_profile, synthesize, write_synth_m2, NoiseOp, NoiseProfile};
use gecw_core::taxonomy::{BaseLabel, ErrorLabel, Taxonomy};
use gecw_core::wo_detect::{
    evaluate_detector, parse_allowlist, train_pos_model, DetectOptions, PosContextModel,
};

use config::Config;

#[derive(Parser, Debug)]
#[command(
    name = "gecw",
    version,
    about = "Error correction tooling for Estonian text"
)]
struct Cli {
    #[command(flatten)]
    common: Common,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Args, Debug)]
struct Common {
    /// Run configuration file of key=value lines [default: $GECW_CONFIG, else none]
    #[arg(long, global = true, value_name = "FILE")]
    config: Option<PathBuf>,
    /// Worker threads for per-sentence work; output order never changes [default: 1]
    #[arg(long, global = true, value_name = "N")]
    jobs: Option<usize>,
    /// Seed for random generation [default: 0]
    #[arg(long, global = true, value_name = "N")]
    seed: Option<u64>,
    /// Write data to this file [default: standard output]
    #[arg(long, global = true, value_name = "FILE")]
    out: Option<PathBuf>,
}

#[derive(Subcommand, Debug)]
enum Cmd {
    /// Score hypotheses against M2 gold
    Score(ScoreArgs),
    /// Context-aware spelling correction
    Spell {
        #[command(subcommand)]
        cmd: SpellCmd,
    },
    /// Deterministic replacement lists
    Replist {
        #[command(subcommand)]
        cmd: ReplistCmd,
    },
    /// Noise profiles and synthetic errors
    Synth {
        #[command(subcommand)]
        cmd: SynthCmd,
    },
    /// Rare POS-context detection
    Wo {
        #[command(subcommand)]
        cmd: WoCmd,
    },
    /// N-gram language models
    Lm {
        #[command(subcommand)]
        cmd: LmCmd,
    },
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
enum Format {
    Table,
    Kv,
}

#[derive(Args, Debug)]
struct ScoreArgs {
    /// Gold M2 file (required)
    #[arg(long, value_name = "FILE")]
    gold: PathBuf,
    /// Hypotheses, one tokenized sentence per line (required)
    #[arg(long, value_name = "FILE")]
    hyp: PathBuf,
    /// F-measure beta [default: 0.5]
    #[arg(long)]
    beta: Option<f64>,
    /// Longest source span a merged hypothesis edit may cover [default: 4]
    #[arg(long, value_name = "N")]
    max_merge_span: Option<usize>,
    /// Annotator selection: running or sentence [default: running]
    #[arg(long, value_name = "MODE")]
    selection: Option<String>,
    /// Tag mapping file, corpus-tag<TAB>code per line [default: none]
    #[arg(long, value_name = "FILE")]
    label_map: Option<PathBuf>,
    /// Report layout
    #[arg(long, value_enum, default_value = "table")]
    format: Format,
}

#[derive(Args, Debug)]
struct LmTrainArgs {
    /// Training text, one tokenized sentence per line, `-` for stdin (required)
    #[arg(long = "in", value_name = "FILE")]
    input: PathBuf,
    /// N-gram order, 1 to 5 [default: 3]
    #[arg(long)]
    order: Option<usize>,
    /// Map words seen once to the unknown-word id [default: off]
    #[arg(long)]
    hapax_unk: bool,
    /// Comma-separated interpolation weights, lowest order first [default: 0.1,0.3,0.6 for order 3, else uniform]
    #[arg(long, value_name = "W,..")]
    weights: Option<String>,
}

#[derive(Subcommand, Debug)]
enum LmCmd {
    /// Train a model and write it in binary form
    Train(LmTrainArgs),
    /// Print model statistics, and sentence log-probabilities with --in
    Inspect {
        /// Binary model [default: lm_model from the config]
        #[arg(long, value_name = "FILE")]
        model: Option<PathBuf>,
        /// Sentences to score [default: none]
        #[arg(long = "in", value_name = "FILE")]
        input: Option<PathBuf>,
    },
}

#[derive(Args, Debug)]
struct PolicyArgs {
    /// Largest edit distance for unknown tokens [default: 2]
    #[arg(long, value_name = "N")]
    max_edit_distance_oov: Option<usize>,
    /// Largest edit distance for known tokens [default: 1]
    #[arg(long, value_name = "N")]
    max_edit_distance_vocab: Option<usize>,
    /// Log-probability charged per unit of edit distance [default: 4]
    #[arg(long, value_name = "X")]
    distance_penalty: Option<f64>,
    /// Extra log-probability needed to replace a known token [default: 2]
    #[arg(long, value_name = "X")]
    margin: Option<f64>,
    /// Skip digits, all-caps and non-initial capitalized tokens [default: true]
    #[arg(long, value_name = "BOOL")]
    protect_names: Option<bool>,
    /// Largest length change relative to the token [default: 0.4]
    #[arg(long, value_name = "X")]
    max_length_ratio: Option<f64>,
}

#[derive(Subcommand, Debug)]
enum SpellCmd {
    /// Train the corrector's language model
    Train(LmTrainArgs),
    /// Apply the replacement list, then statistical correction
    Correct {
        /// Binary language model [default: lm_model from the config]
        #[arg(long, value_name = "FILE")]
        model: Option<PathBuf>,
        /// Replacement list TSV [default: replacement_list from the config, else none]
        #[arg(long, value_name = "FILE")]
        list: Option<PathBuf>,
        /// Input, one tokenized sentence per line, `-` for stdin (required)
        #[arg(long = "in", value_name = "FILE")]
        input: PathBuf,
        /// Also log applied changes as M2 [default: none]
        #[arg(long, value_name = "FILE")]
        edits: Option<PathBuf>,
        #[command(flatten)]
        policy: PolicyArgs,
    },
}

#[derive(Subcommand, Debug)]
enum ReplistCmd {
    /// Apply a replacement list
    Apply {
        /// Replacement list TSV [default: replacement_list from the config]
        #[arg(long, value_name = "FILE")]
        list: Option<PathBuf>,
        /// Input, one tokenized sentence per line, `-` for stdin (required)
        #[arg(long = "in", value_name = "FILE")]
        input: PathBuf,
        /// Also log applied changes as M2 [default: none]
        #[arg(long, value_name = "FILE")]
        edits: Option<PathBuf>,
    },
}

#[derive(Subcommand, Debug)]
enum SynthCmd {
    /// Estimate a noise profile from annotated M2
    Profile {
        /// Annotated M2 corpus (required)
        #[arg(long, value_name = "FILE")]
        gold: PathBuf,
    },
    /// Noise clean text and write M2 with restoring edits
    Generate {
        /// Noise profile [default: synth_profile from the config]
        #[arg(long, value_name = "FILE")]
        profile: Option<PathBuf>,
        /// Clean text, one tokenized sentence per line, `-` for stdin (required)
        #[arg(long = "in", value_name = "FILE")]
        input: PathBuf,
        /// Multiplier on every rate, capped at 0.5 [default: 1]
        #[arg(long, value_name = "X")]
        intensity: Option<f64>,
    },
}

#[derive(Subcommand, Debug)]
enum WoCmd {
    /// Count POS trigrams and their contexts
    Train {
        /// Tagged corpus in CoNLL-U (required)
        #[arg(long, value_name = "FILE")]
        conllu: PathBuf,
    },
    /// Flag rare contexts as TSV: sentence, start, end, probability, reason
    Detect {
        /// Context model [default: wo_model from the config]
        #[arg(long, value_name = "FILE")]
        model: Option<PathBuf>,
        /// Tagged input in CoNLL-U (required)
        #[arg(long, value_name = "FILE")]
        conllu: PathBuf,
        /// Flag contexts below this probability [default: 0.05]
        #[arg(long, value_name = "X")]
        threshold: Option<f64>,
        /// Contexts never flagged, five tags per line [default: none]
        #[arg(long, value_name = "FILE")]
        allowlist: Option<PathBuf>,
        /// Probability: conditional or joint [default: conditional]
        #[arg(long, value_name = "MODE")]
        mode: Option<String>,
        /// Trigrams seen fewer times are flagged as unseen [default: 10]
        #[arg(long, value_name = "N")]
        min_support: Option<u64>,
        /// Score the flags against this M2 gold and report on stderr [default: none]
        #[arg(long, value_name = "FILE")]
        gold: Option<PathBuf>,
    },
}

/// Bad invocation or configuration, as opposed to bad data.
#[derive(Debug)]
struct UsageError(String);

impl fmt::Display for UsageError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for UsageError {}

fn usage(msg: impl Into<String>) -> anyhow::Error {
    UsageError(msg.into()).into()
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(1)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            if e.downcast_ref::<UsageError>().is_some() {
                ExitCode::from(1)
            } else {
                ExitCode::from(2)
            }
        }
    }
}

fn load_config(flag: Option<&Path>) -> Result<Config> {
    let path = match flag {
        Some(p) => Some(p.to_path_buf()),
        None => std::env::var_os("GECW_CONFIG")
            .filter(|v| !v.is_empty())
            .map(PathBuf::from),
    };
    let Some(path) = path else {
        return Ok(Config::default());
    };
    let text = std::fs::read_to_string(&path)
        .map_err(|e| usage(format!("cannot read config {}: {e}", path.display())))?;
    Config::parse(&text).map_err(|e| usage(format!("{}: {e}", path.display())))
}

fn run(cli: Cli) -> Result<()> {
    let mut cfg = load_config(cli.common.config.as_deref())?;
    if let Some(j) = cli.common.jobs {
        cfg.jobs = j;
    }
    if let Some(s) = cli.common.seed {
        cfg.seed = s;
    }
    apply_flags(&mut cfg, &cli.cmd)?;
    cfg.check().map_err(usage)?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cfg.jobs)
        .build()
        .context("starting worker threads")?;
    let out = cli.common.out.as_deref();
    pool.install(|| dispatch(&cli.cmd, &cfg, out))
}

/// Folds subcommand flags into the configuration.
fn apply_flags(cfg: &mut Config, cmd: &Cmd) -> Result<()> {
    fn set<T: Clone>(slot: &mut T, v: &Option<T>) {
        if let Some(v) = v {
            *slot = v.clone();
        }
    }
    match cmd {
        Cmd::Score(a) => {
            set(&mut cfg.beta, &a.beta);
            set(&mut cfg.max_merge_span, &a.max_merge_span);
            if let Some(s) = &a.selection {
                cfg.selection = s.parse().map_err(usage)?;
            }
            if a.label_map.is_some() {
                cfg.label_map = a.label_map.clone();
            }
        }
        Cmd::Lm {
            cmd: LmCmd::Train(a),
        }
        | Cmd::Spell {
            cmd: SpellCmd::Train(a),
        } => {
            set(&mut cfg.lm_order, &a.order);
        }
        Cmd::Lm {
            cmd: LmCmd::Inspect { model, .. },
        } => {
            if model.is_some() {
                cfg.lm_model = model.clone();
            }
        }
        Cmd::Spell {
            cmd:
                SpellCmd::Correct {
                    model,
                    list,
                    policy,
                    ..
                },
        } => {
            if model.is_some() {
                cfg.lm_model = model.clone();
            }
            if list.is_some() {
                cfg.replacement_list = list.clone();
            }
            set(
                &mut cfg.max_edit_distance_oov,
                &policy.max_edit_distance_oov,
            );
            set(
                &mut cfg.max_edit_distance_vocab,
                &policy.max_edit_distance_vocab,
            );
            set(&mut cfg.distance_penalty, &policy.distance_penalty);
            set(&mut cfg.margin, &policy.margin);
            set(&mut cfg.protect_names, &policy.protect_names);
            set(&mut cfg.max_length_ratio, &policy.max_length_ratio);
        }
        Cmd::Replist {
            cmd: ReplistCmd::Apply { list, .. },
        } => {
            if list.is_some() {
                cfg.replacement_list = list.clone();
            }
        }
        Cmd::Synth {
            cmd: SynthCmd::Generate {
                profile, intensity, ..
            },
        } => {
            if profile.is_some() {
                cfg.synth_profile = profile.clone();
            }
            set(&mut cfg.intensity, intensity);
        }
        Cmd::Synth {
            cmd: SynthCmd::Profile { .. },
        }
        | Cmd::Wo {
            cmd: WoCmd::Train { .. },
        } => {}
        Cmd::Wo {
            cmd:
                WoCmd::Detect {
                    model,
                    threshold,
                    allowlist,
                    mode,
                    min_support,
                    ..
                },
        } => {
            if model.is_some() {
                cfg.wo_model = model.clone();
            }
            if allowlist.is_some() {
                cfg.wo_allowlist = allowlist.clone();
            }
            set(&mut cfg.wo_threshold, threshold);
            set(&mut cfg.wo_min_support, min_support);
            if let Some(m) = mode {
                cfg.wo_mode = m.parse().map_err(usage)?;
            }
        }
    }
    Ok(())
}

fn dispatch(cmd: &Cmd, cfg: &Config, out: Option<&Path>) -> Result<()> {
    match cmd {
        Cmd::Score(a) => score(a, cfg, out),
        Cmd::Lm {
            cmd: LmCmd::Train(a),
        }
        | Cmd::Spell {
            cmd: SpellCmd::Train(a),
        } => lm_train(a, cfg, out),
        Cmd::Lm {
            cmd: LmCmd::Inspect { input, .. },
        } => lm_inspect(input.as_deref(), cfg, out),
        Cmd::Spell {
            cmd: SpellCmd::Correct { input, edits, .. },
        } => spell_correct(input, edits.as_deref(), cfg, out),
        Cmd::Replist {
            cmd: ReplistCmd::Apply { input, edits, .. },
        } => replist_apply(input, edits.as_deref(), cfg, out),
        Cmd::Synth {
            cmd: SynthCmd::Profile { gold },
        } => synth_profile(gold, out),
        Cmd::Synth {
            cmd: SynthCmd::Generate { input, .. },
        } => synth_generate(input, cfg, out),
        Cmd::Wo {
            cmd: WoCmd::Train { conllu },
        } => wo_train(conllu, out),
        Cmd::Wo {
            cmd: WoCmd::Detect { conllu, gold, .. },
        } => wo_detect(conllu, gold.as_deref(), cfg, out),
    }
}

// io ------------------------------------------------------------------------

fn read_bytes(path: &Path) -> Result<Vec<u8>> {
    if path == Path::new("-") {
        let mut buf = Vec::new();
        std::io::stdin()
            .read_to_end(&mut buf)
            .context("reading stdin")?;
        return Ok(buf);
    }
    std::fs::read(path).with_context(|| format!("reading {}", path.display()))
}

fn read_text(path: &Path) -> Result<String> {
    String::from_utf8(read_bytes(path)?).with_context(|| format!("{} is not UTF-8", path.display()))
}

fn write_to(path: &Path, bytes: &[u8]) -> Result<()> {
    std::fs::write(path, bytes).with_context(|| format!("writing {}", path.display()))
}

fn emit(out: Option<&Path>, bytes: &[u8]) -> Result<()> {
    match out {
        Some(p) => write_to(p, bytes),
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout.write_all(bytes)?;
            stdout.flush()?;
            Ok(())
        }
    }
}

fn required<'a>(path: &'a Option<PathBuf>, what: &str, key: &str) -> Result<&'a Path> {
    path.as_deref().ok_or_else(|| {
        usage(format!(
            "no {what} given: pass --{} or set {key} in the config",
            key.replace('_', "-")
        ))
    })
}

fn read_m2(path: &Path, taxonomy: &Taxonomy) -> Result<Corpus> {
    let (corpus, warnings) = parse_m2_with(&read_text(path)?, taxonomy)
        .with_context(|| format!("parsing {}", path.display()))?;
    for w in warnings {
        eprintln!("warning: {}: {w}", path.display());
    }
    Ok(corpus)
}

// score ---------------------------------------------------------------------

fn score(a: &ScoreArgs, cfg: &Config, out: Option<&Path>) -> Result<()> {
    let taxonomy = match &cfg.label_map {
        Some(p) => Taxonomy::default()
            .with_mapping_text(&read_text(p)?)
            .with_context(|| format!("label map {}", p.display()))?,
        None => Taxonomy::default(),
    };
    let gold = read_m2(&a.gold, &taxonomy)?;
    let hyps = parse_plain(&read_text(&a.hyp)?);
    let sc = ScorerConfig {
        beta: cfg.beta,
        align: AlignConfig {
            max_merge_span: cfg.max_merge_span,
            ..AlignConfig::default()
        },
        selection: cfg.selection,
    };
    let report = score_corpus(&gold, &hyps, &sc)?;
    let text = match a.format {
        Format::Table => report.to_table(),
        Format::Kv => report.to_kv(),
    };
    emit(out, text.as_bytes())
}

// lm ------------------------------------------------------------------------

fn lm_train(a: &LmTrainArgs, cfg: &Config, out: Option<&Path>) -> Result<()> {
    let sentences = parse_plain(&read_text(&a.input)?);
    let mut model = NGramModel::train(
        &sentences,
        cfg.lm_order,
        TrainOptions {
            hapax_to_unk: a.hapax_unk,
        },
    )?;
    if let Some(w) = &a.weights {
        let weights: Vec<f64> = w
            .split(',')
            .map(|x| x.trim().parse::<f64>())
            .collect::<Result<_, _>>()
            .map_err(|_| usage(format!("bad --weights '{w}'")))?;
        model = model
            .with_weights(weights)
            .map_err(|e| usage(e.to_string()))?;
    }
    emit(out, &model.to_bytes())
}

fn load_lm(cfg: &Config) -> Result<NGramModel> {
    let path = required(&cfg.lm_model, "language model", "lm_model")?;
    NGramModel::from_bytes(&read_bytes(path)?)
        .with_context(|| format!("loading {}", path.display()))
}

fn lm_inspect(input: Option<&Path>, cfg: &Config, out: Option<&Path>) -> Result<()> {
    use std::fmt::Write as _;
    let m = load_lm(cfg)?;
    let mut text = String::new();
    let weights: Vec<String> = m.weights().iter().map(f64::to_string).collect();
    writeln!(text, "order={}", m.order())?;
    writeln!(text, "weights={}", weights.join(","))?;
    writeln!(text, "words={}", m.words().count())?;
    writeln!(text, "outcomes={}", m.outcome_count())?;
    writeln!(text, "sentences={}", m.sentence_count())?;
    writeln!(text, "tokens={}", m.total_tokens())?;
    for n in 1..=m.order() {
        writeln!(text, "ngrams[{n}]={}", m.ngram_count(n))?;
    }
    if let Some(p) = input {
        let sentences = parse_plain(&read_text(p)?);
        let scores: Vec<f64> = sentences
            .par_iter()
            .map(|s| m.sentence_logprob(s))
            .collect();
        for s in scores {
            writeln!(text, "{s:.6}")?;
        }
    }
    emit(out, text.as_bytes())
}

// spelling ------------------------------------------------------------------

fn load_list(path: &Path) -> Result<ReplacementList> {
    let (list, warnings) = load_replacement_list(&read_text(path)?)
        .with_context(|| format!("parsing {}", path.display()))?;
    for w in warnings {
        eprintln!("warning: {}: {w}", path.display());
    }
    Ok(list)
}

/// Replacement-list edits (source positions) combined with spelling fixes
/// made afterwards (positions in the list-corrected sentence), all in source
/// coordinates. A fix landing inside a list replacement rewrites it.
fn compose_edits(list_edits: &[Edit], fixes: &[Replacement]) -> Vec<Edit> {
    let spell = || ErrorLabel::simple(BaseLabel::Spell);
    let mut edits: Vec<Edit> = list_edits
        .iter()
        .map(|e| Edit::new(e.start, e.end, spell(), e.correction.clone(), 0))
        .collect();
    let mut extra = Vec::new();
    for r in fixes {
        let mut offset = 0isize;
        let mut inside = None;
        for (k, e) in edits.iter().enumerate() {
            let start = (e.start as isize + offset) as usize;
            if r.position < start {
                break;
            }
            if r.position < start + e.correction.len() {
                inside = Some((k, r.position - start));
                break;
            }
            offset += e.length_delta();
        }
        match inside {
            Some((k, i)) => edits[k].correction[i] = r.replacement.clone(),
            None => {
                let p = (r.position as isize - offset) as usize;
                extra.push(Edit::new(p, p + 1, spell(), vec![r.replacement.clone()], 0));
            }
        }
    }
    edits.extend(extra);
    edits.sort_by_key(|e| (e.start, e.end));
    edits
}

fn write_edit_log(path: &Path, sources: &[Vec<String>], edits: Vec<Vec<Edit>>) -> Result<()> {
    let corpus: Vec<AnnotatedSentence> = sources
        .iter()
        .zip(edits)
        .map(|(s, e)| AnnotatedSentence::new(s.clone()).with_annotator(0, e))
        .collect();
    write_to(path, serialize_m2(&corpus).as_bytes())
}

fn spell_correct(
    input: &Path,
    edits: Option<&Path>,
    cfg: &Config,
    out: Option<&Path>,
) -> Result<()> {
    let model = load_lm(cfg)?;
    let list = cfg.replacement_list.as_deref().map(load_list).transpose()?;
    let index = CandidateIndex::from_model(&model);
    let policy = CorrectionPolicy {
        max_edit_distance_oov: cfg.max_edit_distance_oov,
        max_edit_distance_vocab: cfg.max_edit_distance_vocab,
        distance_penalty: cfg.distance_penalty,
        margin: cfg.margin,
        protect_names: cfg.protect_names,
        max_length_ratio: cfg.max_length_ratio,
        ..CorrectionPolicy::default()
    };
    let sentences = parse_plain(&read_text(input)?);
    let results: Vec<(Vec<String>, Vec<Edit>)> = sentences
        .par_iter()
        .map(|s| {
            let (listed, list_edits) = match &list {
                Some(l) => l.apply_with_edits(s),
                None => (s.clone(), Vec::new()),
            };
            let (fixed, fixes) = correct_sentence(&listed, &model, &index, &policy);
            (fixed, compose_edits(&list_edits, &fixes))
        })
        .collect();
    let (fixed, logged): (Vec<_>, Vec<_>) = results.into_iter().unzip();
    if let Some(p) = edits {
        write_edit_log(p, &sentences, logged)?;
    }
    emit(out, serialize_plain(&fixed).as_bytes())
}

fn replist_apply(
    input: &Path,
    edits: Option<&Path>,
    cfg: &Config,
    out: Option<&Path>,
) -> Result<()> {
    let list = load_list(required(&cfg.replacement_list, "replacement list", "list")?)?;
    let sentences = parse_plain(&read_text(input)?);
    let results: Vec<(Vec<String>, Vec<Edit>)> = sentences
        .par_iter()
        .map(|s| {
            let (t, e) = list.apply_with_edits(s);
            (t, compose_edits(&e, &[]))
        })
        .collect();
    let (fixed, logged): (Vec<_>, Vec<_>) = results.into_iter().unzip();
    if let Some(p) = edits {
        write_edit_log(p, &sentences, logged)?;
    }
    emit(out, serialize_plain(&fixed).as_bytes())
}

// synthesis -----------------------------------------------------------------

fn synth_profile(gold: &Path, out: Option<&Path>) -> Result<()> {
    let corpus = read_m2(gold, &Taxonomy::default())?;
    let (profile, warnings) = derive_noise_profile(&corpus)?;
    for w in warnings {
        eprintln!("warning: {w}");
    }
    emit(out, profile.to_text().as_bytes())
}

fn synth_generate(input: &Path, cfg: &Config, out: Option<&Path>) -> Result<()> {
    let path = required(&cfg.synth_profile, "noise profile", "profile")?;
    let base = NoiseProfile::from_text(&read_text(path)?)
        .with_context(|| format!("loading {}", path.display()))?;
    let (profile, capped) = base.scaled(cfg.intensity);
    for op in capped {
        eprintln!("warning: {op} rate capped at 0.5 after scaling");
    }
    let clean = parse_plain(&read_text(input)?);
    let (records, stats) = synthesize(&clean, &profile, cfg.seed)?;
    for op in NoiseOp::ALL {
        let s = stats.get(op);
        eprintln!("{op}: {} of {} attempts", s.applied, s.attempts);
    }
    emit(out, write_synth_m2(&records).as_bytes())
}

// word order ----------------------------------------------------------------

fn wo_train(conllu: &Path, out: Option<&Path>) -> Result<()> {
    let tagged = parse_conllu(&read_text(conllu)?)
        .with_context(|| format!("parsing {}", conllu.display()))?;
    let model = train_pos_model(&tagged)?;
    emit(out, model.to_text().as_bytes())
}

fn wo_detect(conllu: &Path, gold: Option<&Path>, cfg: &Config, out: Option<&Path>) -> Result<()> {
    use std::fmt::Write as _;
    let path = required(&cfg.wo_model, "context model", "wo_model")?;
    let model = PosContextModel::from_text(&read_text(path)?)
        .with_context(|| format!("loading {}", path.display()))?
        .with_min_support(cfg.wo_min_support);
    let allowlist = match &cfg.wo_allowlist {
        Some(p) => {
            parse_allowlist(&read_text(p)?).with_context(|| format!("parsing {}", p.display()))?
        }
        None => Default::default(),
    };
    let opts = DetectOptions {
        threshold: cfg.wo_threshold,
        mode: cfg.wo_mode,
        allowlist,
    };
    let tagged = parse_conllu(&read_text(conllu)?)
        .with_context(|| format!("parsing {}", conllu.display()))?;
    let flags: Vec<_> = tagged
        .par_iter()
        .map(|s| model.detect_with(&s.pos, &opts))
        .collect();
    let mut text = String::new();
    for (i, fs) in flags.iter().enumerate() {
        for f in fs {
            writeln!(
                text,
                "{i}\t{}\t{}\t{:.6}\t{}",
                f.start, f.end, f.probability, f.reason
            )?;
        }
    }
    if let Some(g) = gold {
        let corpus = read_m2(g, &Taxonomy::default())?;
        let s = evaluate_detector(&flags, &corpus)?;
        eprintln!(
            "flags={} true_flags={} gold={} recalled={}",
            s.flags, s.true_flags, s.gold, s.recalled
        );
        eprintln!(
            "precision={:.4}\nrecall={:.4}\nf05={:.4}",
            s.precision, s.recall, s.f05
        );
    }
    emit(out, text.as_bytes())
}
