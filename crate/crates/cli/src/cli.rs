use clap::{Args, Parser, Subcommand};

/// Discriminative normalization flows and linear back-ends for embedding vectors.
///
/// Every setting can also come from a flat `key = value` file given with
/// `--config`; keys are the long flag names with `-` or `_`. Flags win.
#[derive(Debug, Parser)]
#[command(name = "dnf")]
pub struct Cli {
    /// Run configuration file.
    #[arg(long, global = true)]
    pub config: Option<String>,

    /// JSON-lines run log, appended to.
    #[arg(long, global = true, default_value = "dnf-runs.jsonl")]
    pub run_log: String,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Generate a synthetic labeled vector set.
    Synth(SynthArgs),
    /// Split a vector set into class-disjoint train and eval sets.
    Split(SplitArgs),
    /// Build a trial list from a labeled vector set.
    MakeTrials(MakeTrialsArgs),
    /// Homogeneity and Gaussianity statistics of one or more vector sets.
    Stats(StatsArgs),
    /// Statistics per group of projected dimensions.
    SubgroupStats(SubgroupArgs),
    /// Train a flow with a single standard normal prior.
    TrainNf(TrainArgs),
    /// Train a flow with class-conditional priors.
    TrainDnf(TrainArgs),
    /// Fit LDA.
    FitLda(FitLdaArgs),
    /// Fit within-class whitening (LDA/N).
    FitLdan(FitArgs),
    /// Fit PCA whitening.
    FitWhiten(FitArgs),
    /// Fit a two-covariance PLDA model.
    FitPlda(FitPldaArgs),
    /// Apply a chain of transforms and flows to a vector set.
    Transform(TransformArgs),
    /// Score a trial list.
    Score(ScoreArgs),
    /// Equal error rate of a score file.
    Eval(EvalArgs),
    /// Fit and evaluate a whole front-end plus back-end chain.
    Pipeline {
        #[command(subcommand)]
        action: PipelineAction,
    },
}

#[derive(Debug, Subcommand)]
pub enum PipelineAction {
    /// Run the chain described by the configuration.
    Run(PipelineArgs),
}

#[derive(Debug, Args)]
pub struct SynthArgs {
    /// Output vectors (`.bin` for binary, text otherwise).
    #[arg(long)]
    pub out: Option<String>,
    #[arg(long)]
    pub classes: Option<usize>,
    #[arg(long)]
    pub samples_per_class: Option<usize>,
    #[arg(long)]
    pub dim: Option<usize>,
    #[arg(long)]
    pub mean_spread: Option<f64>,
    #[arg(long)]
    pub cov_scale_min: Option<f64>,
    #[arg(long)]
    pub cov_scale_max: Option<f64>,
    #[arg(long)]
    pub skew_strength: Option<f64>,
    #[arg(long)]
    pub tail_strength: Option<f64>,
    /// Push Gaussian classes through a random flow of this many blocks
    /// instead of the per-class warp generator.
    #[arg(long)]
    pub warp_blocks: Option<usize>,
    #[arg(long)]
    pub warp_scale: Option<f64>,
    #[arg(long)]
    pub seed: Option<u64>,
}

#[derive(Debug, Args)]
pub struct SplitArgs {
    #[arg(long)]
    pub input: Option<String>,
    #[arg(long)]
    pub train_out: Option<String>,
    #[arg(long)]
    pub eval_out: Option<String>,
    #[arg(long)]
    pub train_fraction: Option<f64>,
    #[arg(long)]
    pub seed: Option<u64>,
}

#[derive(Debug, Args)]
pub struct MakeTrialsArgs {
    #[arg(long)]
    pub input: Option<String>,
    #[arg(long)]
    pub out: Option<String>,
    /// Imposter trials drawn per target trial; 0 keeps every cross-class pair.
    #[arg(long)]
    pub max_imposters: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
}

#[derive(Debug, Args)]
pub struct StatsArgs {
    /// Vector set; repeat to compare several side by side.
    #[arg(long)]
    pub input: Vec<String>,
    /// Number of leading principal components.
    #[arg(long)]
    pub k: Option<usize>,
    #[arg(long)]
    pub min_class_samples: Option<usize>,
    /// CSV report.
    #[arg(long)]
    pub out: Option<String>,
}

#[derive(Debug, Args)]
pub struct SubgroupArgs {
    #[arg(long)]
    pub input: Option<String>,
    /// Linear transform whose rows are ranked, e.g. from `fit-lda`.
    #[arg(long)]
    pub transform: Option<String>,
    #[arg(long)]
    pub group_size: Option<usize>,
    #[arg(long)]
    pub k: Option<usize>,
    #[arg(long)]
    pub min_class_samples: Option<usize>,
    #[arg(long)]
    pub out: Option<String>,
}

#[derive(Debug, Args)]
pub struct TrainArgs {
    #[arg(long)]
    pub input: Option<String>,
    /// Checkpoint (flow plus prior means).
    #[arg(long)]
    pub out: Option<String>,
    /// Per-epoch diagnostic CSV.
    #[arg(long)]
    pub trace: Option<String>,
    #[arg(long)]
    pub epochs: Option<usize>,
    #[arg(long)]
    pub batch_size: Option<usize>,
    #[arg(long)]
    pub lr: Option<f64>,
    #[arg(long)]
    pub blocks: Option<usize>,
    /// Conditioner hidden widths, `a,b,c`.
    #[arg(long)]
    pub hidden: Option<String>,
    /// `gradient` or `closed-form`.
    #[arg(long)]
    pub prior_update: Option<String>,
    #[arg(long)]
    pub early_stop_tol: Option<f64>,
    #[arg(long)]
    pub patience: Option<usize>,
    #[arg(long)]
    pub probe_classes: Option<usize>,
    #[arg(long)]
    pub probe_samples: Option<usize>,
    #[arg(long)]
    pub diagnostics: Option<bool>,
    #[arg(long)]
    pub diag_k: Option<usize>,
    #[arg(long)]
    pub diag_min_class_samples: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
}

#[derive(Debug, Args)]
pub struct FitArgs {
    #[arg(long)]
    pub input: Option<String>,
    #[arg(long)]
    pub out: Option<String>,
}

#[derive(Debug, Args)]
pub struct FitLdaArgs {
    #[arg(long)]
    pub input: Option<String>,
    #[arg(long)]
    pub out: Option<String>,
    /// Retained dimensions; defaults to the input dimension.
    #[arg(long)]
    pub out_dim: Option<usize>,
    /// Weight of S_b in the denominator (0.1 for cosine, 0 for PLDA).
    #[arg(long)]
    pub lambda: Option<f64>,
}

#[derive(Debug, Args)]
pub struct FitPldaArgs {
    #[arg(long)]
    pub input: Option<String>,
    #[arg(long)]
    pub out: Option<String>,
    #[arg(long)]
    pub iters: Option<usize>,
}

#[derive(Debug, Args)]
pub struct TransformArgs {
    #[arg(long)]
    pub input: Option<String>,
    #[arg(long)]
    pub out: Option<String>,
    /// Stage, applied in order: a `.lin` transform, a flow checkpoint, a
    /// pipeline manifest, or the word `lengthnorm`.
    #[arg(long)]
    pub model: Vec<String>,
}

#[derive(Debug, Args)]
pub struct ScoreArgs {
    /// Vectors the trial ids refer to.
    #[arg(long)]
    pub input: Option<String>,
    #[arg(long)]
    pub trials: Option<String>,
    #[arg(long)]
    pub out: Option<String>,
    /// `cosine` or `plda`.
    #[arg(long)]
    pub method: Option<String>,
    /// PLDA model, required for `--method plda`.
    #[arg(long)]
    pub plda: Option<String>,
}

#[derive(Debug, Args)]
pub struct EvalArgs {
    #[arg(long)]
    pub trials: Option<String>,
    #[arg(long)]
    pub scores: Option<String>,
}

#[derive(Debug, Args)]
pub struct PipelineArgs {
    /// Training vectors (front end and back end are fitted here).
    #[arg(long)]
    pub train: Option<String>,
    /// Evaluation vectors the trials refer to.
    #[arg(long)]
    pub eval: Option<String>,
    #[arg(long)]
    pub trials: Option<String>,
    /// Directory for the manifest, stage files, back-end model and scores.
    #[arg(long)]
    pub out_dir: Option<String>,
    /// Comma-separated front end from `lengthnorm`, `whiten`, `ldan`,
    /// `lda`, `nf`, `dnf`.
    #[arg(long)]
    pub stages: Option<String>,
    /// `plda` or `cosine`.
    #[arg(long)]
    pub backend: Option<String>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub lda_dim: Option<usize>,
    #[arg(long)]
    pub lda_lambda: Option<f64>,
    #[arg(long)]
    pub plda_iters: Option<usize>,
    #[arg(long)]
    pub epochs: Option<usize>,
    #[arg(long)]
    pub batch_size: Option<usize>,
    #[arg(long)]
    pub lr: Option<f64>,
    #[arg(long)]
    pub blocks: Option<usize>,
    #[arg(long)]
    pub hidden: Option<String>,
    #[arg(long)]
    pub prior_update: Option<String>,
    #[arg(long)]
    pub early_stop_tol: Option<f64>,
    #[arg(long)]
    pub patience: Option<usize>,
}
