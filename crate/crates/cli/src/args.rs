//! Command-line grammar.

use std::path::PathBuf;

use chrono::NaiveDate;
use clap::{Args, Parser, Subcommand, ValueEnum};
use volcast::evaluation::{FutureExogPolicy, WindowPolicy};
use volcast::ingest::Granularity;

#[derive(Debug, Parser)]
#[command(name = "volcast", version, about = "Trading-volume forecasting and backtesting pipelines")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Clean a bar file: window, trading calendar and session hours.
    Ingest(IngestArgs),
    /// Rolling-origin backtest of one forecaster.
    Backtest(BacktestArgs),
    /// Forward stepwise selection of indicator covariates.
    Select(SelectArgs),
    /// Choose the number of harmonics for frequency-domain regression.
    Spectral(SpectralArgs),
    /// VWAP tracking error of model forecasts against naive baselines.
    VwapReport(VwapArgs),
    /// Correlograms and moving-average decomposition.
    Diagnose(DiagnoseArgs),
    /// Full pipeline: backtest, covariate selection, harmonic selection and VWAP report.
    Replicate(ReplicateArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum GranularityArg {
    Intraday,
    Daily,
}

impl From<GranularityArg> for Granularity {
    fn from(g: GranularityArg) -> Self {
        match g {
            GranularityArg::Intraday => Granularity::Intraday,
            GranularityArg::Daily => Granularity::Daily,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum WindowArg {
    Expanding,
    Sliding,
}

impl From<WindowArg> for WindowPolicy {
    fn from(w: WindowArg) -> Self {
        match w {
            WindowArg::Expanding => WindowPolicy::Expanding,
            WindowArg::Sliding => WindowPolicy::Sliding,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ExogPolicyArg {
    Freeze,
    LagByHorizon,
}

impl From<ExogPolicyArg> for FutureExogPolicy {
    fn from(p: ExogPolicyArg) -> Self {
        match p {
            ExogPolicyArg::Freeze => FutureExogPolicy::Freeze,
            ExogPolicyArg::LagByHorizon => FutureExogPolicy::LagByHorizon,
        }
    }
}

/// Input data, cleaning and output options shared by every command.
#[derive(Debug, Clone, Args)]
pub struct DataArgs {
    /// OHLCV CSV with a header row.
    #[arg(long)]
    pub data: PathBuf,
    /// Holiday list, one YYYY-MM-DD per line.
    #[arg(long)]
    pub calendar: Option<PathBuf>,
    /// First date kept (inclusive).
    #[arg(long)]
    pub from: Option<NaiveDate>,
    /// Last date kept (inclusive).
    #[arg(long)]
    pub to: Option<NaiveDate>,
    /// Overrides the granularity detected from the timestamps.
    #[arg(long, value_enum)]
    pub granularity: Option<GranularityArg>,
    /// Seasonal period (default 8 for intraday data, 1 for daily).
    #[arg(long)]
    pub period: Option<usize>,
    /// Output directory.
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long, default_value_t = 0x5eed)]
    pub seed: u64,
    /// Leave the generation time out of reports so reruns are byte-identical.
    #[arg(long)]
    pub no_timestamp: bool,
}

#[derive(Debug, Clone, Args)]
pub struct CvArgs {
    /// Forecast horizon (default: the seasonal period for intraday data, 1 for daily).
    #[arg(long)]
    pub horizon: Option<usize>,
    /// Observations in the first training window (default: half the series).
    #[arg(long)]
    pub initial_window: Option<usize>,
    #[arg(long, value_enum, default_value_t = WindowArg::Expanding)]
    pub window_policy: WindowArg,
    /// Distance between forecast origins (default: the horizon).
    #[arg(long)]
    pub step: Option<usize>,
}

#[derive(Debug, Clone, Args)]
pub struct ModelArgs {
    /// `(p,d,q)(P,D,Q)[s]`, `(p,d,q)` or `auto`.
    #[arg(long, default_value = "auto")]
    pub model: String,
    /// Estimate a constant (mean or drift) in a fixed-order model.
    #[arg(long)]
    pub drift: bool,
    /// With `--model auto`, search orders again at every forecast origin.
    #[arg(long)]
    pub per_fold: bool,
    /// Covariate values used over the forecast horizon.
    #[arg(long, value_enum, default_value_t = ExogPolicyArg::Freeze)]
    pub exog_policy: ExogPolicyArg,
}

#[derive(Debug, Clone, Args)]
pub struct IngestArgs {
    #[command(flatten)]
    pub data: DataArgs,
    /// Fail instead of dropping sessions with an unexpected number of bars.
    #[arg(long)]
    pub strict: bool,
}

#[derive(Debug, Clone, Args)]
pub struct BacktestArgs {
    #[command(flatten)]
    pub data: DataArgs,
    #[command(flatten)]
    pub cv: CvArgs,
    #[command(flatten)]
    pub model: ModelArgs,
    /// Indicator covariates, e.g. `adx:14,ema:10,mom`.
    #[arg(long)]
    pub indicators: Option<String>,
    /// Forecast with the realized values (self-test: every error is zero).
    #[arg(long)]
    pub oracle: bool,
}

#[derive(Debug, Clone, Args)]
pub struct SelectArgs {
    #[command(flatten)]
    pub data: DataArgs,
    #[command(flatten)]
    pub cv: CvArgs,
    #[command(flatten)]
    pub model: ModelArgs,
    /// Candidate covariates (default: all six indicators at their default windows).
    #[arg(long)]
    pub indicators: Option<String>,
}

#[derive(Debug, Clone, Args)]
pub struct SpectralArgs {
    #[command(flatten)]
    pub data: DataArgs,
    #[command(flatten)]
    pub cv: CvArgs,
    /// Candidate harmonic counts (default 2,3,5,10,25,100 intraday; 2,3,5,10,25,40,50,100 daily).
    #[arg(long, value_delimiter = ',')]
    pub m_grid: Option<Vec<usize>>,
}

#[derive(Debug, Clone, Args)]
pub struct VwapArgs {
    #[command(flatten)]
    pub data: DataArgs,
    #[command(flatten)]
    pub cv: CvArgs,
    #[command(flatten)]
    pub model: ModelArgs,
    /// Covariates for the SARIMAX model.
    #[arg(long)]
    pub indicators: Option<String>,
    /// Also report harmonic regression with this many frequencies.
    #[arg(long)]
    pub m: Option<usize>,
    /// Periods averaged by the rolling baseline.
    #[arg(long, default_value_t = 3)]
    pub rolling: usize,
    /// Use the realized volumes as the model forecast (self-test).
    #[arg(long)]
    pub oracle: bool,
}

#[derive(Debug, Clone, Args)]
pub struct DiagnoseArgs {
    #[command(flatten)]
    pub data: DataArgs,
    /// Largest correlogram lag (default 40, capped at n - 1).
    #[arg(long)]
    pub max_lag: Option<usize>,
}

#[derive(Debug, Clone, Args)]
pub struct ReplicateArgs {
    #[command(flatten)]
    pub data: DataArgs,
    #[command(flatten)]
    pub cv: CvArgs,
    #[command(flatten)]
    pub model: ModelArgs,
    /// Candidate covariates for the selection stage.
    #[arg(long)]
    pub indicators: Option<String>,
    #[arg(long, value_delimiter = ',')]
    pub m_grid: Option<Vec<usize>>,
}
