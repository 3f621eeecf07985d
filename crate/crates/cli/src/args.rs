use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use confsel_core::scoring::{Bandwidth, LaplacianParams, Method};
use confsel_core::{DelimitedOptions, LabelColumn};

/// Filter feature selection: confidence-machine scores, baseline scorers and
/// a KNN evaluation harness.
#[derive(Debug, Parser)]
#[command(name = "confsel", version)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Score every feature and print them in rank order.
    Rank(RankArgs),
    /// Print the top-m features of a ranking.
    Select(SelectArgs),
    /// Run the repeated-split feature-count sweep on one dataset.
    Evaluate(EvaluateArgs),
    /// Compare methods by low-dimension mean accuracy across datasets.
    Bench(BenchArgs),
    /// Emit test-split scatter data for the top two features of a method.
    Viz(VizArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum MethodArg {
    Cm,
    Pearson,
    Laplacian,
    Pca,
}

impl From<MethodArg> for Method {
    fn from(m: MethodArg) -> Self {
        match m {
            MethodArg::Cm => Method::ConfidenceMachine,
            MethodArg::Pearson => Method::Pearson,
            MethodArg::Laplacian => Method::LaplacianScore,
            MethodArg::Pca => Method::Pca,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum DelimiterArg {
    Comma,
    Tab,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, ValueEnum)]
pub enum Format {
    /// Aligned human-readable table, 6 decimals.
    #[default]
    Table,
    /// Comma-separated records, full precision.
    Delimited,
    /// Self-describing JSON document.
    Structured,
}

#[derive(Debug, Clone, Args)]
pub struct ParseArgs {
    /// Label column: zero-based index, header name, or "last".
    #[arg(long, default_value = "last")]
    pub label: String,
    /// The input has no header row.
    #[arg(long)]
    pub no_header: bool,
    /// Field delimiter (default: tab if the first line has one, else comma).
    #[arg(long, value_enum)]
    pub delimiter: Option<DelimiterArg>,
}

impl ParseArgs {
    pub fn options(&self) -> DelimitedOptions {
        DelimitedOptions {
            delimiter: self.delimiter.map(|d| match d {
                DelimiterArg::Comma => b',',
                DelimiterArg::Tab => b'\t',
            }),
            has_header: !self.no_header,
            label: self.label.parse::<LabelColumn>().unwrap_or_default(),
        }
    }
}

#[derive(Debug, Clone, Args)]
pub struct InputArgs {
    /// Dataset file in delimited text form.
    #[arg(required_unless_present = "stdin")]
    pub path: Option<PathBuf>,
    /// Read the dataset from standard input instead of a file.
    #[arg(long, conflicts_with = "path")]
    pub stdin: bool,
    #[command(flatten)]
    pub parse: ParseArgs,
}

#[derive(Debug, Clone, Args)]
pub struct ScorerArgs {
    /// Neighbours in the Laplacian-score graph.
    #[arg(long, default_value_t = 5)]
    pub lap_k: usize,
    /// Heat-kernel bandwidth for the Laplacian score: "auto" or a positive number.
    #[arg(long, default_value = "auto", value_parser = parse_bandwidth)]
    pub bandwidth: Bandwidth,
}

impl ScorerArgs {
    pub fn laplacian(&self) -> LaplacianParams {
        LaplacianParams {
            k_neighbors: self.lap_k,
            bandwidth: self.bandwidth,
        }
    }
}

fn parse_bandwidth(s: &str) -> Result<Bandwidth, String> {
    if s.eq_ignore_ascii_case("auto") {
        return Ok(Bandwidth::Auto);
    }
    match s.parse::<f64>() {
        Ok(t) if t > 0.0 && t.is_finite() => Ok(Bandwidth::Fixed(t)),
        _ => Err(format!("expected \"auto\" or a positive number, got {s:?}")),
    }
}

pub fn bandwidth_label(b: Bandwidth) -> String {
    match b {
        Bandwidth::Auto => "auto".into(),
        Bandwidth::Fixed(t) => t.to_string(),
    }
}

#[derive(Debug, Clone, Args)]
pub struct OutputArgs {
    #[arg(long, value_enum, default_value_t = Format::Table)]
    pub format: Format,
    /// Write to this file instead of standard output.
    #[arg(long, short = 'o')]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct ProtocolArgs {
    /// Base seed; repetition r uses seed + r.
    #[arg(long, env = "CONFSEL_SEED", default_value_t = 1)]
    pub seed: u64,
    #[arg(long, default_value_t = 5)]
    pub repetitions: usize,
    /// Neighbours used by the KNN classifier.
    #[arg(long, short = 'k', default_value_t = 5)]
    pub k: usize,
    #[arg(long, default_value_t = 0.5)]
    pub train_fraction: f64,
    /// Largest selected-feature count, as a fraction of all features.
    #[arg(long, default_value_t = 0.8)]
    pub sweep_max: f64,
    /// Upper end of the low-dimension average, as a fraction of all features.
    #[arg(long, default_value_t = 0.4)]
    pub lowdim: f64,
    /// Methods to compare (comma separated).
    #[arg(long, value_enum, value_delimiter = ',', default_values = ["cm", "pearson", "laplacian", "pca"])]
    pub methods: Vec<MethodArg>,
}

#[derive(Debug, Clone, Args)]
pub struct RankArgs {
    #[command(flatten)]
    pub input: InputArgs,
    #[arg(long, value_enum, default_value_t = MethodArg::Cm)]
    pub method: MethodArg,
    /// Score raw values instead of standardized ones.
    #[arg(long)]
    pub no_standardize: bool,
    #[command(flatten)]
    pub scorer: ScorerArgs,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Clone, Args)]
pub struct SelectArgs {
    #[command(flatten)]
    pub rank: RankArgs,
    /// Number of features to keep.
    #[arg(long, short = 'm')]
    pub count: usize,
}

#[derive(Debug, Clone, Args)]
pub struct EvaluateArgs {
    #[command(flatten)]
    pub input: InputArgs,
    #[command(flatten)]
    pub protocol: ProtocolArgs,
    #[command(flatten)]
    pub scorer: ScorerArgs,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Clone, Args)]
pub struct BenchArgs {
    /// One or more dataset files.
    #[arg(required = true, num_args = 1..)]
    pub paths: Vec<PathBuf>,
    #[command(flatten)]
    pub parse: ParseArgs,
    #[command(flatten)]
    pub protocol: ProtocolArgs,
    #[command(flatten)]
    pub scorer: ScorerArgs,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Clone, Args)]
pub struct VizArgs {
    #[command(flatten)]
    pub input: InputArgs,
    #[arg(long, value_enum)]
    pub method: MethodArg,
    /// Seed of the train/test split.
    #[arg(long, env = "CONFSEL_SEED", default_value_t = 1)]
    pub seed: u64,
    #[arg(long, default_value_t = 0.5)]
    pub train_fraction: f64,
    #[command(flatten)]
    pub scorer: ScorerArgs,
    #[command(flatten)]
    pub output: OutputArgs,
}
