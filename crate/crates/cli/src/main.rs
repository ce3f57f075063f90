//! `iwa` — accident-record ingestion, regression fitting, and model
//! selection from the command line.
//!
//! Exit codes: 0 success, 2 I/O, 3 parse, 4 no usable model, 5 bad model
//! schema. Anything else maps to 1.

mod commands;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use iwa_core::selection::SelectionPolicy;

#[derive(Parser)]
#[command(name = "iwa", version, about = "Inland waterway accident analysis toolkit")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand)]
pub enum Command {
    /// District and hourly histograms from an accident-record CSV
    Histogram(HistogramArgs),
    /// Fit the full regression model to a cause-year matrix CSV
    Fit(FitArgs),
    /// Collinearity, relevancy, and residual diagnostics
    Diagnose(DiagnoseArgs),
    /// Exhaustive subset selection with F gating and ranking
    Select(SelectArgs),
    /// Evaluate a saved model on new values or held-out years
    Predict(PredictArgs),
    /// Run everything against a record CSV into one output directory
    Report(ReportArgs),
}

#[derive(Copy, Clone, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
    Both,
}

impl Format {
    fn csv(self) -> bool {
        matches!(self, Format::Csv | Format::Both)
    }

    fn json(self) -> bool {
        matches!(self, Format::Json | Format::Both)
    }
}

#[derive(Copy, Clone, PartialEq, Eq, ValueEnum)]
pub enum Policy {
    /// Highest R², full precision
    MaxR2,
    /// Adjusted R², then MSE, Cp distance, and standard error
    Balanced,
}

impl From<Policy> for SelectionPolicy {
    fn from(p: Policy) -> SelectionPolicy {
        match p {
            Policy::MaxR2 => SelectionPolicy::MaxR2Full,
            Policy::Balanced => SelectionPolicy::BalancedCriteria,
        }
    }
}

#[derive(Args)]
pub struct HistogramArgs {
    /// Accident-record CSV (year,district,hour,cause,casualties)
    #[arg(long)]
    pub input: PathBuf,
    /// Optional cause-alias CSV (alias,canonical)
    #[arg(long)]
    pub aliases: Option<PathBuf>,
    /// Output directory, created if missing
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long, value_enum, default_value_t = Format::Both)]
    pub format: Format,
}

#[derive(Args)]
pub struct FitArgs {
    /// Cause-year matrix CSV (year,<causes...>,total)
    #[arg(long)]
    pub input: PathBuf,
    #[arg(long)]
    pub from_year: Option<u16>,
    #[arg(long)]
    pub to_year: Option<u16>,
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long, value_enum, default_value_t = Format::Both)]
    pub format: Format,
}

#[derive(Args)]
pub struct DiagnoseArgs {
    /// Cause-year matrix CSV (year,<causes...>,total)
    #[arg(long)]
    pub input: PathBuf,
    #[arg(long)]
    pub from_year: Option<u16>,
    #[arg(long)]
    pub to_year: Option<u16>,
    /// Variance-inflation flag threshold
    #[arg(long, default_value_t = 5.0)]
    pub vif_threshold: f64,
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long, value_enum, default_value_t = Format::Both)]
    pub format: Format,
}

#[derive(Args)]
pub struct SelectArgs {
    /// Cause-year matrix CSV (year,<causes...>,total)
    #[arg(long)]
    pub input: PathBuf,
    #[arg(long)]
    pub from_year: Option<u16>,
    #[arg(long)]
    pub to_year: Option<u16>,
    /// Significance level for the F gate
    #[arg(long, default_value_t = 0.05)]
    pub alpha: f64,
    /// Variance-inflation exclusion threshold
    #[arg(long, default_value_t = 5.0)]
    pub vif_threshold: f64,
    #[arg(long, value_enum, default_value_t = Policy::MaxR2)]
    pub policy: Policy,
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long, value_enum, default_value_t = Format::Both)]
    pub format: Format,
}

#[derive(Args)]
pub struct PredictArgs {
    /// Saved model JSON (as written by `fit` or `select`)
    #[arg(long)]
    pub model: PathBuf,
    /// Comma-separated predictor values, e.g. `C=10,SW=2` or `collision=10`
    #[arg(long)]
    pub values: Option<String>,
    /// Cause-year matrix CSV for held-out evaluation
    #[arg(long)]
    pub input: Option<PathBuf>,
    /// Number of trailing years to hold out when `--input` is given
    #[arg(long, default_value_t = 3)]
    pub holdout: usize,
}

#[derive(Args)]
pub struct ReportArgs {
    /// Accident-record CSV (year,district,hour,cause,casualties)
    #[arg(long)]
    pub input: PathBuf,
    /// Optional cause-alias CSV (alias,canonical)
    #[arg(long)]
    pub aliases: Option<PathBuf>,
    #[arg(long)]
    pub from_year: Option<u16>,
    #[arg(long)]
    pub to_year: Option<u16>,
    /// Significance level for the F gate
    #[arg(long, default_value_t = 0.05)]
    pub alpha: f64,
    /// Variance-inflation exclusion threshold
    #[arg(long, default_value_t = 5.0)]
    pub vif_threshold: f64,
    #[arg(long, value_enum, default_value_t = Policy::MaxR2)]
    pub policy: Policy,
    /// Trailing years held out for the prediction-error check
    #[arg(long, default_value_t = 3)]
    pub holdout: usize,
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long, value_enum, default_value_t = Format::Both)]
    pub format: Format,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match commands::run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {}", e.message);
            ExitCode::from(e.code)
        }
    }
}
