use std::path::PathBuf;

use advisory_miner::classifiers::{LearnerSpec, TreeParams, DEFAULT_K};
use advisory_miner::evaluation::{RankBy, DEFAULT_FOLDS};
use advisory_miner::inferential::DEFAULT_ALPHA;
use clap::{Args, Parser, Subcommand, ValueEnum};

pub const SEED_ENV: &str = "ADVISORY_MINER_SEED";

fn count_at_least(s: &str, min: usize) -> Result<usize, String> {
    let n: usize = s.parse().map_err(|e| format!("{e}"))?;
    if n < min {
        return Err(format!("must be at least {min}"));
    }
    Ok(n)
}

fn positive(s: &str) -> Result<usize, String> {
    count_at_least(s, 1)
}

fn at_least_two(s: &str) -> Result<usize, String> {
    count_at_least(s, 2)
}

/// Risk mining and advising reports for student cohorts.
#[derive(Debug, Parser)]
#[command(name = "advisory-miner", version)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Generate a seeded synthetic cohort.
    Generate(GenerateArgs),
    /// Descriptive statistics per group.
    Describe(DescribeArgs),
    /// Composition, descriptive grid, ANOVA and t-test for a cohort.
    Analyze(AnalyzeArgs),
    /// One-way ANOVA on a cohort or from sums of squares.
    Anova(AnovaArgs),
    /// Two-sample equal-variance t-test on a cohort or from group summaries.
    Ttest(TtestArgs),
    /// Fit a classifier and write it as JSON.
    Train(TrainArgs),
    /// Stratified cross-validation of one or more classifiers.
    Crossval(CrossvalArgs),
    /// Predict the risk class of each student with a saved model.
    Predict(PredictArgs),
    /// Extract IF-THEN advising rules from a C4.5 tree.
    Rules(RulesArgs),
    /// Render the advising report for one student.
    Report(ReportArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Algo {
    C45,
    Nb,
    Knn,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Text,
    Csv,
    Json,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum RankKey {
    Accuracy,
    Kappa,
    Mae,
    Rmse,
    Rae,
    Rrse,
    #[value(name = "f-measure")]
    FMeasure,
}

impl From<RankKey> for RankBy {
    fn from(k: RankKey) -> Self {
        match k {
            RankKey::Accuracy => RankBy::Accuracy,
            RankKey::Kappa => RankBy::Kappa,
            RankKey::Mae => RankBy::Mae,
            RankKey::Rmse => RankBy::Rmse,
            RankKey::Rae => RankBy::Rae,
            RankKey::Rrse => RankBy::Rrse,
            RankKey::FMeasure => RankBy::WeightedF,
        }
    }
}

#[derive(Debug, Args)]
pub struct Output {
    /// Output format.
    #[arg(long, value_enum)]
    pub format: Option<Format>,
    /// Write to this file instead of stdout. The file appears only on success.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct DataInput {
    /// Cohort CSV or dataset JSON; `-` reads stdin.
    #[arg(long)]
    pub data: String,
    /// Comma-separated feature columns to drop before modelling.
    #[arg(long, value_delimiter = ',')]
    pub exclude: Vec<String>,
}

#[derive(Debug, Args)]
pub struct Hyper {
    /// Neighbours for kNN.
    #[arg(long, default_value_t = DEFAULT_K, value_parser = positive)]
    pub k: usize,
    /// Disable min-max normalization for kNN.
    #[arg(long)]
    pub no_normalize: bool,
    /// Minimum instances in at least two branches of a C4.5 split.
    #[arg(long, default_value_t = TreeParams::default().min_leaf, value_parser = positive)]
    pub min_leaf: usize,
    /// C4.5 pruning confidence factor in (0, 0.5].
    #[arg(long, default_value_t = TreeParams::default().cf)]
    pub cf: f64,
    /// Grow the C4.5 tree without pruning.
    #[arg(long)]
    pub no_prune: bool,
}

impl Hyper {
    pub fn tree(&self) -> TreeParams {
        TreeParams {
            min_leaf: self.min_leaf,
            cf: self.cf,
            prune: !self.no_prune,
        }
    }

    pub fn learner(&self, algo: Algo) -> LearnerSpec {
        match algo {
            Algo::C45 => LearnerSpec::C45(self.tree()),
            Algo::Nb => LearnerSpec::NaiveBayes,
            Algo::Knn => LearnerSpec::Knn {
                k: self.k,
                normalize: !self.no_normalize,
            },
        }
    }
}

#[derive(Debug, Args)]
pub struct Alpha {
    /// Significance level for critical values.
    #[arg(long, default_value_t = DEFAULT_ALPHA)]
    pub alpha: f64,
}

#[derive(Debug, Args)]
pub struct GenerateArgs {
    /// Seed for the generator; falls back to ADVISORY_MINER_SEED.
    #[arg(long, env = SEED_ENV, required = true)]
    pub seed: u64,
    /// Number of students (overrides the parameter file).
    #[arg(long)]
    pub n: Option<usize>,
    /// JSON generator parameters; omitted fields keep their defaults.
    #[arg(long)]
    pub params: Option<PathBuf>,
    #[command(flatten)]
    pub output: Output,
}

#[derive(Debug, Args)]
pub struct DescribeArgs {
    #[command(flatten)]
    pub input: DataInput,
    /// Grouping column.
    #[arg(long, default_value = advisory_miner::data::cohort::L_STATUS)]
    pub group_by: String,
    /// Comma-separated numeric columns to summarize.
    #[arg(long, value_delimiter = ',')]
    pub columns: Vec<String>,
    #[command(flatten)]
    pub output: Output,
}

#[derive(Debug, Args)]
pub struct AnalyzeArgs {
    #[command(flatten)]
    pub input: DataInput,
    #[command(flatten)]
    pub alpha: Alpha,
    #[command(flatten)]
    pub output: Output,
}

#[derive(Debug, Args)]
#[command(group(clap::ArgGroup::new("source").required(true).args(["data", "ss_between"])))]
pub struct AnovaArgs {
    /// Cohort to test: Diff_G_R_C_H by gender among students expected to graduate.
    #[arg(long)]
    pub data: Option<String>,
    /// Between-groups sum of squares.
    #[arg(long, requires_all = ["ss_within", "groups", "observations"])]
    pub ss_between: Option<f64>,
    /// Within-groups sum of squares.
    #[arg(long, requires = "ss_between")]
    pub ss_within: Option<f64>,
    /// Number of groups.
    #[arg(long, requires = "ss_between")]
    pub groups: Option<usize>,
    /// Total number of observations.
    #[arg(long, requires = "ss_between")]
    pub observations: Option<usize>,
    #[command(flatten)]
    pub alpha: Alpha,
    #[command(flatten)]
    pub output: Output,
}

#[derive(Debug, Args)]
#[command(group(clap::ArgGroup::new("source").required(true).args(["data", "n1"])))]
pub struct TtestArgs {
    /// Cohort to test: Diff_G_R_C_H of Good against Poor GPA bands.
    #[arg(long)]
    pub data: Option<String>,
    #[arg(long, requires_all = ["mean1", "var1", "n2", "mean2", "var2"])]
    pub n1: Option<usize>,
    #[arg(long, requires = "n1", allow_negative_numbers = true)]
    pub mean1: Option<f64>,
    #[arg(long, requires = "n1")]
    pub var1: Option<f64>,
    #[arg(long, requires = "n1")]
    pub n2: Option<usize>,
    #[arg(long, requires = "n1", allow_negative_numbers = true)]
    pub mean2: Option<f64>,
    #[arg(long, requires = "n1")]
    pub var2: Option<f64>,
    /// Hypothesized mean difference.
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
    pub hypothesized_diff: f64,
    #[command(flatten)]
    pub alpha: Alpha,
    #[command(flatten)]
    pub output: Output,
}

#[derive(Debug, Args)]
pub struct TrainArgs {
    #[command(flatten)]
    pub input: DataInput,
    #[arg(long, value_enum, default_value = "c45")]
    pub algo: Algo,
    #[command(flatten)]
    pub hyper: Hyper,
    /// Model file to write; stdout when omitted.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct CrossvalArgs {
    #[command(flatten)]
    pub input: DataInput,
    /// Comma-separated algorithms.
    #[arg(long, value_enum, value_delimiter = ',', default_value = "c45,nb,knn")]
    pub algo: Vec<Algo>,
    #[command(flatten)]
    pub hyper: Hyper,
    #[arg(long, default_value_t = DEFAULT_FOLDS, value_parser = at_least_two)]
    pub folds: usize,
    /// Seed for fold assignment; falls back to ADVISORY_MINER_SEED.
    #[arg(long, env = SEED_ENV, required = true)]
    pub seed: u64,
    /// Order the reports by this measure, best first.
    #[arg(long, value_enum)]
    pub rank_by: Option<RankKey>,
    /// Evaluate folds on worker threads; output is unchanged.
    #[arg(long)]
    pub parallel: bool,
    #[command(flatten)]
    pub output: Output,
}

#[derive(Debug, Args)]
pub struct PredictArgs {
    #[arg(long)]
    pub model: PathBuf,
    /// Cohort CSV or dataset JSON; `-` reads stdin.
    #[arg(long)]
    pub data: String,
    #[command(flatten)]
    pub output: Output,
}

#[derive(Debug, Args)]
#[command(group(clap::ArgGroup::new("source").required(true).args(["data", "model"])))]
pub struct RulesArgs {
    /// Train a tree on this data first.
    #[arg(long)]
    pub data: Option<String>,
    /// Use a saved C4.5 model instead.
    #[arg(long, conflicts_with = "data")]
    pub model: Option<PathBuf>,
    #[arg(long, value_delimiter = ',')]
    pub exclude: Vec<String>,
    #[command(flatten)]
    pub hyper: Hyper,
    #[command(flatten)]
    pub output: Output,
}

#[derive(Debug, Args)]
pub struct ReportArgs {
    #[arg(long)]
    pub model: PathBuf,
    /// Cohort CSV holding the student; `-` reads stdin.
    #[arg(long)]
    pub data: String,
    /// Student id; may be omitted when the data holds one student.
    #[arg(long)]
    pub sid: Option<String>,
    /// JSON with the advisor-entered semester rows and signature.
    #[arg(long)]
    pub narrative: Option<PathBuf>,
    /// Diff_G_R_C_H flag threshold; defaults to mean + sd of the data.
    #[arg(long)]
    pub diff_threshold: Option<f64>,
    #[command(flatten)]
    pub output: Output,
}
