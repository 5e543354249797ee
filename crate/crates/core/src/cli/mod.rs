//! The `cwi` command-line tool.
//!
//! Settings come from flags, optionally layered over a TOML file given with
//! `--config`. The resolved [`RunConfig`] is written into every artifact.

mod commands;
pub mod io;

use std::ffi::OsString;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use serde::{Deserialize, Serialize};

use crate::corpus::Task;
use crate::error::{Error, Result};
use crate::features::{FeatureConfig, FeatureFamily, Scaling};
use crate::kernel::KernelKind;
use crate::metrics::F1Mode;

#[derive(Debug, Parser)]
#[command(
    name = "cwi",
    version,
    about = "Complex word identification with kernel SVMs"
)]
pub struct Cli {
    /// Worker threads for feature extraction, Gram blocks and grid cells.
    #[arg(long, global = true)]
    pub jobs: Option<usize>,

    /// TOML file with default settings; flags take precedence.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Extract features and write them to a feature file.
    Featurize(FeaturizeArgs),
    /// Fit a model with fixed hyperparameters.
    Train(TrainArgs),
    /// Grid-search C (and r) on a validation split, then fit the best model.
    Tune(TuneArgs),
    /// Score a dataset with a trained model.
    Predict(PredictArgs),
    /// Compare a predictions file with gold labels.
    Evaluate(EvaluateArgs),
}

#[derive(Debug, Clone, Default, Args)]
pub struct ResourceArgs {
    /// WordNet 3.0 database directory (index.* and data.* files).
    #[arg(long)]
    pub wordnet: Option<PathBuf>,
    /// Embeddings for similarity and sense features.
    #[arg(long = "context-emb")]
    pub context_emb: Option<PathBuf>,
    /// Embeddings for the PCA grid; defaults to the context embeddings.
    #[arg(long = "grid-emb")]
    pub grid_emb: Option<PathBuf>,
}

#[derive(Debug, Clone, Default, Args)]
pub struct FeatureArgs {
    /// Comma-separated feature families, or `all`.
    #[arg(long)]
    pub features: Option<String>,
    /// Skip min-max scaling of the dense block.
    #[arg(long)]
    pub no_scaling: bool,
    /// Directory for cached feature vectors.
    #[arg(long = "cache-dir")]
    pub cache_dir: Option<PathBuf>,
}

#[derive(Debug, Clone, Default, Args)]
pub struct ModelArgs {
    /// `classify` (default) or `regress`.
    #[arg(long)]
    pub task: Option<Task>,
    /// `rbf` (default) or `linear`.
    #[arg(long)]
    pub kernel: Option<KernelKind>,
    /// Soft-margin penalty (default 10).
    #[arg(short = 'C')]
    pub c: Option<f64>,
    /// RBF width (default 1).
    #[arg(short = 'r')]
    pub r: Option<f64>,
    /// nu for regression (default 0.5).
    #[arg(long)]
    pub nu: Option<f64>,
}

#[derive(Debug, Args)]
pub struct FeaturizeArgs {
    /// Training TSV; fits the grid map and scaler.
    #[arg(long)]
    pub train: PathBuf,
    /// Validation TSV.
    #[arg(long)]
    pub valid: Option<PathBuf>,
    /// Test TSV.
    #[arg(long)]
    pub test: Option<PathBuf>,
    #[command(flatten)]
    pub resources: ResourceArgs,
    #[command(flatten)]
    pub features: FeatureArgs,
    /// Output feature file (JSON).
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct TrainArgs {
    /// Labeled training TSV.
    #[arg(long)]
    pub train: PathBuf,
    /// Validation TSV, used with --refit-with-validation.
    #[arg(long)]
    pub valid: Option<PathBuf>,
    /// Fit on train plus validation.
    #[arg(long)]
    pub refit_with_validation: bool,
    #[command(flatten)]
    pub resources: ResourceArgs,
    #[command(flatten)]
    pub features: FeatureArgs,
    #[command(flatten)]
    pub model: ModelArgs,
    /// Output model file.
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct TuneArgs {
    /// Labeled training TSV.
    #[arg(long)]
    pub train: PathBuf,
    /// Labeled validation TSV scored for each grid point.
    #[arg(long)]
    pub valid: PathBuf,
    /// Fit the selected model on train plus validation.
    #[arg(long)]
    pub refit_with_validation: bool,
    #[command(flatten)]
    pub resources: ResourceArgs,
    #[command(flatten)]
    pub features: FeatureArgs,
    #[command(flatten)]
    pub model: ModelArgs,
    /// Validation F1 used for classification: `macro` or `positive`.
    #[arg(long, default_value = "macro")]
    pub f1: F1Mode,
    /// Output model file for the selected grid point.
    #[arg(long)]
    pub out: PathBuf,
    /// Tuning report; defaults to the model path with `.tune.txt` appended.
    #[arg(long)]
    pub report: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct PredictArgs {
    /// Model file written by train or tune.
    #[arg(long)]
    pub model: PathBuf,
    /// TSV to score; labels are optional.
    #[arg(long)]
    pub test: PathBuf,
    #[command(flatten)]
    pub resources: ResourceArgs,
    /// Clamp regression outputs to [0, 1].
    #[arg(long)]
    pub clamp: bool,
    /// Predictions TSV (`id<TAB>value`).
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct EvaluateArgs {
    /// Predictions TSV written by predict.
    #[arg(long)]
    pub predictions: PathBuf,
    /// Labeled TSV with the same ids.
    #[arg(long)]
    pub gold: PathBuf,
    /// Task of the predictions (default classify).
    #[arg(long)]
    pub task: Option<Task>,
    /// Key-value report file; the aligned table always goes to stdout.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

/// Keys accepted in the `--config` TOML file.
#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FileConfig {
    pub wordnet_dir: Option<PathBuf>,
    pub context_embeddings: Option<PathBuf>,
    pub grid_embeddings: Option<PathBuf>,
    pub task: Option<String>,
    pub kernel: Option<String>,
    #[serde(rename = "C", alias = "c")]
    pub c: Option<f64>,
    pub r: Option<f64>,
    pub nu: Option<f64>,
    pub features: Option<String>,
    pub scaling: Option<bool>,
    pub cache_dir: Option<PathBuf>,
}

impl FileConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        toml::from_str(&text)
            .map_err(|e| Error::InvalidArgument(format!("{}: {e}", path.display())))
    }
}

/// Fully resolved settings of one run.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RunConfig {
    pub command: String,
    pub train: Option<PathBuf>,
    pub valid: Option<PathBuf>,
    pub test: Option<PathBuf>,
    pub model: Option<PathBuf>,
    pub wordnet_dir: Option<PathBuf>,
    pub context_embeddings: Option<PathBuf>,
    pub grid_embeddings: Option<PathBuf>,
    pub task: Task,
    pub kernel: KernelKind,
    #[serde(rename = "C")]
    pub c: f64,
    pub r: f64,
    pub nu: f64,
    pub features: FeatureConfig,
    pub refit_with_validation: bool,
    pub clamp: bool,
    pub f1: F1Mode,
    pub out: Option<PathBuf>,
    #[serde(skip)]
    pub cache_dir: Option<PathBuf>,
}

impl RunConfig {
    fn base(command: &str, file: &FileConfig) -> Result<Self> {
        let mut features = FeatureConfig::default();
        if let Some(list) = &file.features {
            features.families = FeatureFamily::parse_list(list)?;
        }
        if file.scaling == Some(false) {
            features.scaling = Scaling::None;
        }
        Ok(RunConfig {
            command: command.into(),
            train: None,
            valid: None,
            test: None,
            model: None,
            wordnet_dir: file.wordnet_dir.clone(),
            context_embeddings: file.context_embeddings.clone(),
            grid_embeddings: file.grid_embeddings.clone(),
            task: file
                .task
                .as_deref()
                .map(str::parse)
                .transpose()?
                .unwrap_or(Task::Classify),
            kernel: file
                .kernel
                .as_deref()
                .map(str::parse)
                .transpose()?
                .unwrap_or(KernelKind::Rbf),
            c: file.c.unwrap_or(10.0),
            r: file.r.unwrap_or(1.0),
            nu: file.nu.unwrap_or(0.5),
            features,
            refit_with_validation: false,
            clamp: false,
            f1: F1Mode::Macro,
            out: None,
            cache_dir: file.cache_dir.clone(),
        })
    }

    fn apply_resources(&mut self, r: &ResourceArgs) {
        if let Some(p) = &r.wordnet {
            self.wordnet_dir = Some(p.clone());
        }
        if let Some(p) = &r.context_emb {
            self.context_embeddings = Some(p.clone());
        }
        if let Some(p) = &r.grid_emb {
            self.grid_embeddings = Some(p.clone());
        }
        if self.grid_embeddings.is_none() {
            self.grid_embeddings = self.context_embeddings.clone();
        }
    }

    fn apply_features(&mut self, f: &FeatureArgs) -> Result<()> {
        if let Some(list) = &f.features {
            self.features.families = FeatureFamily::parse_list(list)?;
        }
        if f.no_scaling {
            self.features.scaling = Scaling::None;
        }
        if let Some(d) = &f.cache_dir {
            self.cache_dir = Some(d.clone());
        }
        self.features.validate()
    }

    fn apply_model(&mut self, m: &ModelArgs) -> Result<()> {
        if let Some(t) = m.task {
            self.task = t;
        }
        if let Some(k) = m.kernel {
            self.kernel = k;
        }
        if let Some(c) = m.c {
            self.c = c;
        }
        if let Some(r) = m.r {
            self.r = r;
        }
        if let Some(nu) = m.nu {
            self.nu = nu;
        }
        if !(self.c > 0.0 && self.c.is_finite()) {
            return Err(Error::InvalidArgument(format!(
                "C must be positive, got {}",
                self.c
            )));
        }
        if !(self.r > 0.0 && self.r.is_finite()) {
            return Err(Error::InvalidArgument(format!(
                "r must be positive, got {}",
                self.r
            )));
        }
        if !(self.nu > 0.0 && self.nu <= 1.0) {
            return Err(Error::InvalidArgument(format!(
                "nu must be in (0, 1], got {}",
                self.nu
            )));
        }
        Ok(())
    }

    pub fn to_json(&self) -> serde_json::Value {
        serde_json::to_value(self).unwrap_or(serde_json::Value::Null)
    }
}

/// Parses `args` (including the program name) and runs the command.
/// Returns the process exit code.
pub fn main_with<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    match run(cli) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("cwi: {e}");
            e.exit_code()
        }
    }
}

pub fn run(cli: Cli) -> Result<()> {
    if let Some(n) = cli.jobs {
        configure_threads(n)?;
    }
    let file = match &cli.config {
        Some(p) => FileConfig::load(p)?,
        None => FileConfig::default(),
    };
    match cli.command {
        Command::Featurize(a) => {
            let mut cfg = RunConfig::base("featurize", &file)?;
            cfg.train = Some(a.train.clone());
            cfg.valid = a.valid.clone();
            cfg.test = a.test.clone();
            cfg.out = Some(a.out.clone());
            cfg.apply_resources(&a.resources);
            cfg.apply_features(&a.features)?;
            commands::featurize(&cfg)
        }
        Command::Train(a) => {
            let mut cfg = RunConfig::base("train", &file)?;
            cfg.train = Some(a.train.clone());
            cfg.valid = a.valid.clone();
            cfg.refit_with_validation = a.refit_with_validation;
            cfg.out = Some(a.out.clone());
            cfg.apply_resources(&a.resources);
            cfg.apply_features(&a.features)?;
            cfg.apply_model(&a.model)?;
            if cfg.refit_with_validation && cfg.valid.is_none() {
                return Err(Error::InvalidArgument(
                    "--refit-with-validation needs --valid".into(),
                ));
            }
            commands::train(&cfg)
        }
        Command::Tune(a) => {
            let mut cfg = RunConfig::base("tune", &file)?;
            cfg.train = Some(a.train.clone());
            cfg.valid = Some(a.valid.clone());
            cfg.refit_with_validation = a.refit_with_validation;
            cfg.f1 = a.f1;
            cfg.out = Some(a.out.clone());
            cfg.apply_resources(&a.resources);
            cfg.apply_features(&a.features)?;
            cfg.apply_model(&a.model)?;
            let report = a
                .report
                .clone()
                .unwrap_or_else(|| suffixed(&a.out, ".tune.txt"));
            commands::tune(&cfg, &report)
        }
        Command::Predict(a) => {
            let mut cfg = RunConfig::base("predict", &file)?;
            cfg.model = Some(a.model.clone());
            cfg.test = Some(a.test.clone());
            cfg.clamp = a.clamp;
            cfg.out = Some(a.out.clone());
            cfg.apply_resources(&a.resources);
            commands::predict(&cfg)
        }
        Command::Evaluate(a) => {
            let mut cfg = RunConfig::base("evaluate", &file)?;
            if let Some(t) = a.task {
                cfg.task = t;
            }
            cfg.test = Some(a.gold.clone());
            cfg.out = a.out.clone();
            commands::evaluate(&cfg, &a.predictions)
        }
    }
}

/// `path` with `suffix` appended to its file name.
pub fn suffixed(path: &Path, suffix: &str) -> PathBuf {
    let mut s = path.as_os_str().to_owned();
    s.push(suffix);
    PathBuf::from(s)
}

fn configure_threads(n: usize) -> Result<()> {
    if n == 0 {
        return Err(Error::InvalidArgument("--jobs must be at least 1".into()));
    }
    #[cfg(feature = "parallel")]
    {
        // A second call in the same process keeps the existing pool.
        let _ = rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global();
    }
    Ok(())
}
