//! Command-line front end: one subcommand per pipeline stage.
//!
//! Every command reads its inputs from files, writes its outputs atomically,
//! and takes all randomness from `--seed`, so reruns are byte-identical.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use chrono::{DateTime, NaiveDate, Utc};
use clap::{Args, Parser, Subcommand, ValueEnum};
use log::{info, warn};
use rayon::prelude::*;
use serde::Serialize;

use crate::c45::{self, Dataset, TrainParams, TreeModel};
use crate::discretize::{compute_thresholds, ClassLabel, LabelTable, Mode, ThresholdSet};
use crate::emotion::{self, EmotionModel, DEFAULT_BOOST, DEFAULT_SMOOTHING};
use crate::eval::{self, CvOutcome, MetricsRow};
use crate::features::{self, FeatureVector, SCHEMA_VERSION};
use crate::inventory::{self, Dimension, ScoredParticipant};
use crate::synth::{self, CohortConfig};
use crate::{io, Error, Result};

pub const DEFAULT_REFERENCE: &str = "2012-03-01";

#[derive(Debug, Parser)]
#[command(name = "persona", version, about = "Big Five personality prediction from social-network behavior logs")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Generate a synthetic cohort (records, inventories, emotion corpus).
    Synth(SynthArgs),
    /// Train the Naive Bayes emotion classifier.
    TrainEmotion(TrainEmotionArgs),
    /// Score BFI-44 inventories into trait scores.
    Score(ScoreArgs),
    /// Extract the behavior feature vector of every user record.
    Features(FeaturesArgs),
    /// Discretize trait scores into class labels.
    Discretize(DiscretizeArgs),
    /// Train one decision tree for one dimension.
    Train(TrainArgs),
    /// Cross-validate decision trees per dimension.
    Cv(CvArgs),
    /// Predict a class with its decision path.
    Predict(PredictArgs),
    /// List the root and second-level features of trained models.
    Report(ReportArgs),
    /// Print the feature schema as JSON.
    Schema,
}

#[derive(Debug, Args)]
pub struct SynthArgs {
    /// Cohort configuration (JSON or TOML); defaults apply otherwise.
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub n: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Output directory.
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct TrainEmotionArgs {
    /// JSONL corpus of {text, label}.
    #[arg(long)]
    pub corpus: PathBuf,
    /// Emotion lexicon, one token per line.
    #[arg(long)]
    pub lexicon: PathBuf,
    #[arg(long, default_value_t = DEFAULT_BOOST)]
    pub boost: f64,
    #[arg(long, default_value_t = DEFAULT_SMOOTHING)]
    pub smoothing: f64,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct ScoreArgs {
    #[arg(long)]
    pub inventories: PathBuf,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct FeaturesArgs {
    #[arg(long)]
    pub records: PathBuf,
    #[arg(long)]
    pub emotion_model: PathBuf,
    /// Reference date (UTC midnight) or RFC 3339 instant.
    #[arg(long, default_value = DEFAULT_REFERENCE)]
    pub reference: String,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ModeArg {
    #[value(name = "3class")]
    ThreeClass,
    #[value(name = "2class")]
    TwoClass,
}

impl From<ModeArg> for Mode {
    fn from(m: ModeArg) -> Self {
        match m {
            ModeArg::ThreeClass => Mode::ThreeClass,
            ModeArg::TwoClass => Mode::TwoClass,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ThresholdScope {
    Global,
    PerFold,
}

#[derive(Debug, Args)]
pub struct DiscretizeArgs {
    #[arg(long)]
    pub scores: PathBuf,
    #[arg(long, value_enum, default_value = "3class")]
    pub mode: ModeArg,
    /// Output directory for labels.csv and thresholds.json.
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Clone, Args)]
pub struct TreeArgs {
    #[arg(long, default_value_t = 2)]
    pub min_leaf: usize,
    #[arg(long, default_value_t = 0.25)]
    pub cf: f64,
    #[arg(long)]
    pub max_depth: Option<usize>,
    #[arg(long)]
    pub no_prune: bool,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

impl TreeArgs {
    pub fn params(&self) -> TrainParams {
        TrainParams {
            min_leaf: self.min_leaf,
            cf: self.cf,
            max_depth: self.max_depth,
            prune: !self.no_prune,
            gain_floor: true,
            seed: self.seed,
        }
    }
}

#[derive(Debug, Args)]
pub struct TrainArgs {
    #[arg(long)]
    pub features: PathBuf,
    #[arg(long)]
    pub labels: PathBuf,
    /// Dimension letter: E, A, C, N or O.
    #[arg(long)]
    pub dim: Dimension,
    #[arg(long, value_enum, default_value = "3class")]
    pub mode: ModeArg,
    #[command(flatten)]
    pub tree: TreeArgs,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct CvArgs {
    #[arg(long)]
    pub features: PathBuf,
    #[arg(long)]
    pub labels: PathBuf,
    /// Trait scores, required with --thresholds per-fold.
    #[arg(long)]
    pub scores: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "3class")]
    pub mode: ModeArg,
    /// Comma-separated dimension letters.
    #[arg(long, value_delimiter = ',', default_value = "E,A,C,N,O")]
    pub dims: Vec<Dimension>,
    #[arg(long, default_value_t = 10)]
    pub folds: usize,
    #[arg(long, value_enum, default_value = "global")]
    pub thresholds: ThresholdScope,
    #[command(flatten)]
    pub tree: TreeArgs,
    /// Output directory for metrics.csv and confusion.json.
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct PredictArgs {
    #[arg(long)]
    pub model: PathBuf,
    /// Feature CSV to predict from.
    #[arg(long, conflicts_with = "records", required_unless_present = "records")]
    pub features: Option<PathBuf>,
    /// User records to extract features from; needs --emotion-model.
    #[arg(long, requires = "emotion_model")]
    pub records: Option<PathBuf>,
    #[arg(long)]
    pub emotion_model: Option<PathBuf>,
    #[arg(long, default_value = DEFAULT_REFERENCE)]
    pub reference: String,
    /// Only predict this user.
    #[arg(long)]
    pub user: Option<String>,
    /// Write predictions as JSONL here instead of stdout.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct ReportArgs {
    /// Model JSON files.
    #[arg(long, num_args = 1.., required = true)]
    pub models: Vec<PathBuf>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

/// Settings shared by cross-validation runs.
#[derive(Debug, Clone, PartialEq)]
pub struct PipelineConfig {
    pub mode: Mode,
    pub dims: Vec<Dimension>,
    pub folds: usize,
    pub seed: u64,
    pub params: TrainParams,
    pub thresholds: ThresholdScope,
}

impl PipelineConfig {
    pub fn validate(&self) -> Result<()> {
        if self.folds < 2 {
            return Err(Error::validation("folds", format!("need at least 2 folds, got {}", self.folds)));
        }
        if self.dims.is_empty() {
            return Err(Error::validation("dims", "no dimensions selected"));
        }
        self.params.validate()
    }
}

pub fn parse_reference(s: &str) -> Result<DateTime<Utc>> {
    if let Ok(t) = DateTime::parse_from_rfc3339(s) {
        return Ok(t.with_timezone(&Utc));
    }
    NaiveDate::parse_from_str(s, "%Y-%m-%d")
        .map(|d| d.and_hms_opt(0, 0, 0).expect("midnight exists").and_utc())
        .map_err(|_| Error::validation("reference", format!("{s:?} is neither a date nor an RFC 3339 instant")))
}

/// Joins feature vectors with the labels of one dimension.
///
/// Three-class mode needs a label for every vector. Two-class mode keeps
/// only low and high samples. Returns the dataset and, per row, the index
/// of the vector it came from.
pub fn labeled_dataset(
    vectors: &[FeatureVector],
    table: &LabelTable,
    dim: Dimension,
    mode: Mode,
) -> Result<(Dataset, Vec<usize>)> {
    let index: BTreeMap<&str, usize> = table.ids.iter().enumerate().map(|(i, id)| (id.as_str(), i)).collect();
    let mut rows = Vec::new();
    let mut labels = Vec::new();
    let mut kept = Vec::new();
    for (i, v) in vectors.iter().enumerate() {
        let Some(&j) = index.get(v.user_id.as_str()) else {
            return Err(Error::validation(
                format!("labels.{}", v.user_id),
                "user has features but no label row",
            ));
        };
        let label = table.labels[j][dim.index()];
        let class = match (mode, label) {
            (Mode::ThreeClass, None) => {
                return Err(Error::validation(
                    format!("labels.{}.{dim}", v.user_id),
                    "missing label; two-class label files cannot be used in three-class mode",
                ))
            }
            (Mode::TwoClass, None | Some(ClassLabel::Mid)) => continue,
            (_, Some(l)) => mode.classes().iter().position(|&c| c == l).expect("label in mode"),
        };
        rows.push(v.to_row());
        labels.push(class);
        kept.push(i);
    }
    let data = Dataset::new(features::dataset_columns(), rows, labels, mode.class_names())?;
    Ok((data, kept))
}

fn score_lookup(scores: &[ScoredParticipant]) -> BTreeMap<&str, &ScoredParticipant> {
    scores.iter().map(|s| (s.participant_id.as_str(), s)).collect()
}

/// Cross-validates every configured dimension in order.
pub fn run_cv(
    vectors: &[FeatureVector],
    table: &LabelTable,
    scores: Option<&[ScoredParticipant]>,
    cfg: &PipelineConfig,
) -> Result<Vec<CvOutcome>> {
    cfg.validate()?;
    cfg.dims
        .iter()
        .map(|&dim| {
            info!("cross-validating {dim}");
            match cfg.thresholds {
                ThresholdScope::Global => {
                    let (data, _) = labeled_dataset(vectors, table, dim, cfg.mode)?;
                    eval::cross_validate(&data, dim.letter(), cfg.folds, &cfg.params, cfg.seed)
                }
                ThresholdScope::PerFold => {
                    let scores = scores.ok_or_else(|| {
                        Error::validation("scores", "--thresholds per-fold needs --scores")
                    })?;
                    let lookup = score_lookup(scores);
                    // Stratify on three-class labels; each fold re-bins its own samples.
                    let (data, kept) = labeled_dataset(vectors, table, dim, Mode::ThreeClass)?;
                    let dim_scores = kept
                        .iter()
                        .map(|&i| {
                            let id = &vectors[i].user_id;
                            lookup.get(id.as_str()).map(|s| s.score.get(dim)).ok_or_else(|| {
                                Error::validation(format!("scores.{id}"), "user has features but no score row")
                            })
                        })
                        .collect::<Result<Vec<f64>>>()?;
                    eval::cross_validate_per_fold(&data, &dim_scores, dim, cfg.mode, cfg.folds, &cfg.params, cfg.seed)
                }
            }
        })
        .collect()
}

pub fn train_model(data: &Dataset, dim: Dimension, mode: Mode, params: &TrainParams) -> Result<TreeModel> {
    let mut model = c45::train(data, params)?;
    model.schema_version = Some(SCHEMA_VERSION.to_owned());
    model.dimension = Some(dim.letter().to_owned());
    model.mode = Some(mode.as_str().to_owned());
    Ok(model)
}

/// Root and second-level split features of each model, one block per
/// model.
pub fn report_table(models: &[TreeModel]) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "{:<4} {:<9} FEATURES", "D.", "LEVEL");
    for m in models {
        let top = c45::top_features(&m.root, 2);
        let at = |depth: usize| {
            let names: Vec<&str> = top.iter().filter(|(d, _)| *d == depth).map(|(_, n)| n.as_str()).collect();
            if names.is_empty() {
                "-".to_owned()
            } else {
                names.join(", ")
            }
        };
        let dim = m.dimension.as_deref().unwrap_or("?");
        let _ = writeln!(s, "{:<4} {:<9} {}", dim, "Root", at(0));
        let _ = writeln!(s, "{:<4} {:<9} {}", "", "2nd Root", at(1));
    }
    s
}

pub fn load_cohort_config(path: Option<&Path>) -> Result<CohortConfig> {
    let Some(path) = path else {
        return Ok(CohortConfig::default());
    };
    let text = io::read_to_string(path)?;
    let is_toml = path.extension().is_some_and(|e| e == "toml");
    if is_toml {
        toml::from_str(&text).map_err(|e| Error::validation(path.display().to_string(), e.to_string()))
    } else {
        Ok(serde_json::from_str(&text)?)
    }
}

/// File names written by `synth` inside its output directory.
pub mod cohort_files {
    pub const RECORDS: &str = "records.jsonl";
    pub const INVENTORIES: &str = "inventories.csv";
    pub const LATENT: &str = "latent_scores.csv";
    pub const CORPUS: &str = "emotion_corpus.jsonl";
    pub const LEXICON: &str = "emotion_lexicon.txt";
    pub const CONFIG: &str = "cohort_config.json";
    pub const REPORT: &str = "cohort_report.json";
}

pub fn cmd_synth(args: &SynthArgs) -> Result<()> {
    let mut cfg = load_cohort_config(args.config.as_deref())?;
    if let Some(n) = args.n {
        cfg.n = n;
    }
    if let Some(seed) = args.seed {
        cfg.seed = seed;
    }
    let cohort = synth::generate_cohort(&cfg)?;
    let corpus = synth::emotion_corpus(cfg.seed);
    let lexicon = synth::lexicon();
    let model = emotion::train_emotion_model(&corpus, &lexicon, DEFAULT_BOOST, DEFAULT_SMOOTHING)?;
    let report = synth::cohort_report(&cfg, &cohort, &model)?;

    let out = &args.out;
    let records: Vec<_> = cohort.iter().map(|p| p.record.clone()).collect();
    io::write_atomic(&out.join(cohort_files::RECORDS), &io::to_jsonl(&records)?)?;
    let inventories: Vec<_> = cohort
        .iter()
        .map(|p| inventory::ParticipantResponse {
            participant_id: p.record.user_id.clone(),
            answers: p.inventory.clone(),
        })
        .collect();
    io::write_atomic(&out.join(cohort_files::INVENTORIES), &inventory::inventories_csv(&inventories)?)?;
    let latent: Vec<_> = cohort
        .iter()
        .map(|p| ScoredParticipant {
            participant_id: p.record.user_id.clone(),
            score: p.latent,
        })
        .collect();
    io::write_atomic(&out.join(cohort_files::LATENT), &inventory::scores_csv(&latent)?)?;
    io::write_atomic(&out.join(cohort_files::CORPUS), &io::to_jsonl(&corpus)?)?;
    let lexicon_text: String = lexicon.iter().map(|t| format!("{t}\n")).collect();
    io::write_atomic(&out.join(cohort_files::LEXICON), lexicon_text.as_bytes())?;
    io::write_atomic(&out.join(cohort_files::CONFIG), &io::to_pretty_json(&cfg)?)?;
    io::write_atomic(&out.join(cohort_files::REPORT), &io::to_pretty_json(&report)?)?;
    println!("wrote {} participants to {}", cfg.n, out.display());
    Ok(())
}

pub fn cmd_train_emotion(args: &TrainEmotionArgs) -> Result<()> {
    let corpus = emotion::read_corpus(&args.corpus)?;
    let lexicon = emotion::read_lexicon(&args.lexicon)?;
    let model = emotion::train_emotion_model(&corpus, &lexicon, args.boost, args.smoothing)?;
    model.save(&args.out)
}

pub fn cmd_score(args: &ScoreArgs) -> Result<()> {
    let scored: Vec<ScoredParticipant> = inventory::read_inventories(&args.inventories)?
        .into_iter()
        .map(|p| ScoredParticipant {
            score: inventory::score_bfi(&p.answers),
            participant_id: p.participant_id,
        })
        .collect();
    io::write_atomic(&args.out, &inventory::scores_csv(&scored)?)
}

fn extract_all(records: &[features::UserRecord], reference: DateTime<Utc>, model: &EmotionModel) -> Result<Vec<FeatureVector>> {
    records
        .par_iter()
        .map(|r| features::extract_features(r, reference, model))
        .collect()
}

pub fn cmd_features(args: &FeaturesArgs) -> Result<()> {
    let reference = parse_reference(&args.reference)?;
    let model = EmotionModel::load(&args.emotion_model)?;
    let records = features::read_records(&args.records)?;
    let vectors = extract_all(&records, reference, &model)?;
    features::write_features(&args.out, &vectors)
}

pub fn cmd_discretize(args: &DiscretizeArgs) -> Result<()> {
    let scores = inventory::read_scores(&args.scores)?;
    let mode = Mode::from(args.mode);
    let thresholds = Dimension::ALL
        .iter()
        .map(|&d| compute_thresholds(d, &scores.iter().map(|s| s.score.get(d)).collect::<Vec<_>>()))
        .collect::<Result<Vec<_>>>()?;
    let table = LabelTable::from_scores(&scores, &thresholds, mode);
    io::write_atomic(&args.out.join("labels.csv"), &table.to_csv()?)?;
    io::write_atomic(&args.out.join("thresholds.json"), &io::to_pretty_json(&ThresholdSet { mode, thresholds })?)
}

pub fn cmd_train(args: &TrainArgs) -> Result<()> {
    let vectors = features::read_features(&args.features)?;
    let table = LabelTable::read(&args.labels)?;
    warn_unused_labels(&table, &vectors);
    let mode = Mode::from(args.mode);
    let (data, _) = labeled_dataset(&vectors, &table, args.dim, mode)?;
    let model = train_model(&data, args.dim, mode, &args.tree.params())?;
    model.save(&args.out)
}

pub fn cmd_cv(args: &CvArgs) -> Result<()> {
    let cfg = PipelineConfig {
        mode: args.mode.into(),
        dims: args.dims.clone(),
        folds: args.folds,
        seed: args.tree.seed,
        params: args.tree.params(),
        thresholds: args.thresholds,
    };
    let vectors = features::read_features(&args.features)?;
    let table = LabelTable::read(&args.labels)?;
    warn_unused_labels(&table, &vectors);
    let scores = args.scores.as_deref().map(inventory::read_scores).transpose()?;
    let outcomes = run_cv(&vectors, &table, scores.as_deref(), &cfg)?;
    let rows: Vec<MetricsRow> = outcomes.iter().map(|o| o.metrics.clone()).collect();
    let confusion: BTreeMap<String, eval::ConfusionMatrix> =
        outcomes.iter().map(|o| (o.metrics.dimension.clone(), o.confusion.clone())).collect();
    io::write_atomic(&args.out.join("metrics.csv"), &eval::metrics_csv(&rows)?)?;
    io::write_atomic(&args.out.join("confusion.json"), &eval::confusion_json(&confusion)?)?;
    print!("{}", eval::metrics_table(&rows));
    Ok(())
}

#[derive(Debug, Serialize)]
struct PredictionLine<'a> {
    user_id: &'a str,
    label: &'a str,
    path: &'a [c45::PathStep],
}

pub fn cmd_predict(args: &PredictArgs) -> Result<()> {
    let model = TreeModel::load(&args.model)?;
    if let Some(v) = &model.schema_version {
        if v != SCHEMA_VERSION {
            return Err(Error::SchemaMismatch {
                expected: SCHEMA_VERSION.to_owned(),
                found: v.clone(),
            });
        }
    }
    let vectors = match (&args.features, &args.records, &args.emotion_model) {
        (Some(path), _, _) => features::read_features(path)?,
        (None, Some(records), Some(em)) => {
            let reference = parse_reference(&args.reference)?;
            extract_all(&features::read_records(records)?, reference, &EmotionModel::load(em)?)?
        }
        _ => return Err(Error::validation("input", "give --features or --records with --emotion-model")),
    };
    let selected: Vec<&FeatureVector> = vectors
        .iter()
        .filter(|v| args.user.as_ref().is_none_or(|u| &v.user_id == u))
        .collect();
    if let (Some(u), true) = (&args.user, selected.is_empty()) {
        return Err(Error::validation("user", format!("no user {u:?} in the input")));
    }
    let mut lines = Vec::new();
    for v in selected {
        let p = model.predict(&v.to_row())?;
        let line = PredictionLine {
            user_id: &v.user_id,
            label: &p.label,
            path: &p.path,
        };
        lines.extend(serde_json::to_vec(&line)?);
        lines.push(b'\n');
    }
    match &args.out {
        Some(out) => io::write_atomic(out, &lines),
        None => {
            print!("{}", String::from_utf8_lossy(&lines));
            Ok(())
        }
    }
}

pub fn cmd_report(args: &ReportArgs) -> Result<()> {
    let models = args.models.iter().map(|p| TreeModel::load(p)).collect::<Result<Vec<_>>>()?;
    let table = report_table(&models);
    if let Some(out) = &args.out {
        io::write_atomic(out, table.as_bytes())?;
    }
    print!("{table}");
    Ok(())
}

pub fn run(cli: &Cli) -> Result<()> {
    match &cli.command {
        Command::Synth(a) => cmd_synth(a),
        Command::TrainEmotion(a) => cmd_train_emotion(a),
        Command::Score(a) => cmd_score(a),
        Command::Features(a) => cmd_features(a),
        Command::Discretize(a) => cmd_discretize(a),
        Command::Train(a) => cmd_train(a),
        Command::Cv(a) => cmd_cv(a),
        Command::Predict(a) => cmd_predict(a),
        Command::Report(a) => cmd_report(a),
        Command::Schema => {
            print!("{}", features::schema_json());
            Ok(())
        }
    }
}

/// Process exit code for a command result: 0 on success, 1 for input
/// problems, 2 for internal failures.
pub fn exit_code(result: &Result<()>) -> i32 {
    match result {
        Ok(()) => 0,
        Err(e) if e.is_input_error() => 1,
        Err(_) => 2,
    }
}

fn warn_unused_labels(table: &LabelTable, vectors: &[FeatureVector]) {
    let ids: std::collections::BTreeSet<&str> = vectors.iter().map(|v| v.user_id.as_str()).collect();
    let extra = table.ids.iter().filter(|id| !ids.contains(id.as_str())).count();
    if extra > 0 {
        warn!("{extra} label rows have no matching feature row");
    }
}
