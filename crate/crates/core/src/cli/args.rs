use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use super::sweep::SweepSpec;

const UNITS: &str = "Units: times are in seconds, prices in $/hour. A cost integrates an \
hourly price over seconds, so the `objective` and `*_cost` fields are in $/hour x s; \
`cost_usd` fields divide by 3600 to give dollars.";

/// Bidding portfolios for deadline-bound cloud jobs.
#[derive(Debug, Parser)]
#[command(name = "spotfolio", version, after_help = UNITS)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Fit a price model to a spot-price history
    Fit(FitArgs),
    /// Compute the optimal on-demand share and spot bid
    #[command(after_help = UNITS)]
    Solve(SolveArgs),
    /// Monte Carlo evaluation of a portfolio
    #[command(after_help = UNITS)]
    Simulate(SimulateArgs),
    /// Every mechanism against the baselines on built-in scenarios
    #[command(after_help = UNITS)]
    Compare(CompareArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Mechanism {
    /// one-time request, deadline met in expectation
    #[value(name = "otr_eg")]
    OtrEg,
    /// one-time request with penalties, solved by SCA
    #[value(name = "otr_p")]
    OtrP,
    /// persistent request
    Pr,
    /// everything on demand
    Baseline1,
    /// everything on spot
    Baseline2,
    /// otr_eg, otr_p and pr
    All,
}

impl Mechanism {
    pub const SOLVERS: [Mechanism; 3] = [Mechanism::OtrEg, Mechanism::OtrP, Mechanism::Pr];
    pub const EVERY: [Mechanism; 5] = [
        Mechanism::Baseline1,
        Mechanism::Baseline2,
        Mechanism::OtrEg,
        Mechanism::OtrP,
        Mechanism::Pr,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Mechanism::OtrEg => "otr_eg",
            Mechanism::OtrP => "otr_p",
            Mechanism::Pr => "pr",
            Mechanism::Baseline1 => "baseline1",
            Mechanism::Baseline2 => "baseline2",
            Mechanism::All => "all",
        }
    }

    pub(crate) fn expand(list: &[Mechanism]) -> Vec<Mechanism> {
        let mut out = Vec::new();
        for m in list {
            let add: &[Mechanism] = if *m == Mechanism::All {
                &Self::SOLVERS
            } else {
                std::slice::from_ref(m)
            };
            for a in add {
                if !out.contains(a) {
                    out.push(*a);
                }
            }
        }
        out
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, ValueEnum)]
pub enum OutputFormat {
    #[default]
    Json,
    Csv,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Family {
    Pareto,
    Exponential,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum HistoryFormatArg {
    #[value(name = "two_column")]
    TwoColumn,
    #[value(name = "aws_describe")]
    AwsDescribe,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum WeightingArg {
    Count,
    Duration,
}

/// Where the price model comes from. The first of `--model`, `--history`,
/// `--family` and `--scenario` that is given wins.
#[derive(Debug, Clone, Args)]
pub struct ModelArgs {
    /// price model JSON, as written by `fit --out`
    #[arg(long, value_name = "FILE")]
    pub model: Option<PathBuf>,
    /// parametric family, with --pi-min/--pi-max and its shape flags
    #[arg(long, value_enum)]
    pub family: Option<Family>,
    #[arg(long, allow_negative_numbers = true)]
    pub pi_min: Option<f64>,
    /// on-demand price, $/hour
    #[arg(long, allow_negative_numbers = true)]
    pub pi_max: Option<f64>,
    #[arg(long)]
    pub alpha: Option<f64>,
    #[arg(long)]
    pub theta: Option<f64>,
    #[arg(long)]
    pub a: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    pub b: Option<f64>,
    /// built-in parameter set (model, job and penalties)
    #[arg(long)]
    pub scenario: Option<String>,
    /// fit the model from a price history first
    #[arg(long, value_name = "FILE")]
    pub history: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "two_column")]
    pub history_format: HistoryFormatArg,
    #[arg(long, value_enum, default_value = "count")]
    pub weighting: WeightingArg,
    /// histogram bins (default: Freedman-Diaconis)
    #[arg(long)]
    pub bins: Option<usize>,
}

/// Job parameters; unset values come from the scenario, else 3600/2000/300/10.
#[derive(Debug, Clone, Args)]
pub struct JobArgs {
    /// execution time t_e, s
    #[arg(long)]
    pub te: Option<f64>,
    /// deadline t_s, s
    #[arg(long)]
    pub ts: Option<f64>,
    /// slot length t_k, s
    #[arg(long)]
    pub tk: Option<f64>,
    /// recovery time t_r, s
    #[arg(long)]
    pub tr: Option<f64>,
    /// penalty per incomplete second, $/hour (default pi_max/3)
    #[arg(long)]
    pub ci: Option<f64>,
    /// penalty per late second, $/hour (default pi_max/10)
    #[arg(long)]
    pub cs: Option<f64>,
}

#[derive(Debug, Clone, Args)]
pub struct ScaArgs {
    /// restart SCA from 8 extra jittered points
    #[arg(long)]
    pub multi_start: bool,
    #[arg(long, default_value_t = 1000)]
    pub max_iter: usize,
    /// write the SCA iterates as CSV
    #[arg(long, value_name = "FILE")]
    pub sca_trace: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct FitArgs {
    #[arg(long, value_name = "FILE", required = true)]
    pub history: PathBuf,
    #[arg(long, value_enum, default_value = "exponential")]
    pub family: Family,
    #[arg(long, value_enum, default_value = "two_column")]
    pub history_format: HistoryFormatArg,
    #[arg(long, value_enum, default_value = "count")]
    pub weighting: WeightingArg,
    #[arg(long)]
    pub bins: Option<usize>,
    /// histogram lower bound (default: lowest observed price)
    #[arg(long)]
    pub pi_min: Option<f64>,
    /// histogram upper bound, normally the on-demand price
    #[arg(long)]
    pub pi_max: Option<f64>,
    /// fixed Pareto scale to report instead of the normalising one
    #[arg(long)]
    pub theta: Option<f64>,
    /// CSV of bin centre, empirical and fitted density
    #[arg(long, value_name = "FILE")]
    pub plot_data: Option<PathBuf>,
    /// also write the fitted model JSON, usable with --model
    #[arg(long, value_name = "FILE")]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct SolveArgs {
    #[command(flatten)]
    pub model: ModelArgs,
    #[command(flatten)]
    pub job: JobArgs,
    #[arg(long, value_enum, value_delimiter = ',', default_value = "otr_eg")]
    pub mechanism: Vec<Mechanism>,
    /// PARAM:FROM:TO:STEP with PARAM one of t_s, t_r, c_I, c_s
    #[arg(long)]
    pub sweep: Option<SweepSpec>,
    #[command(flatten)]
    pub sca: ScaArgs,
    /// defaults to csv for sweeps and json otherwise
    #[arg(long, value_enum)]
    pub format: Option<OutputFormat>,
}

#[derive(Debug, Clone, Args)]
pub struct SimArgs {
    #[arg(long, default_value_t = 1000)]
    pub runs: usize,
    #[arg(long, env = "SPOTFOLIO_SEED", default_value_t = 1)]
    pub seed: u64,
}

#[derive(Debug, Clone, Args)]
pub struct SimulateArgs {
    #[command(flatten)]
    pub model: ModelArgs,
    #[command(flatten)]
    pub job: JobArgs,
    #[arg(long, value_enum, value_delimiter = ',', default_value = "otr_eg")]
    pub mechanism: Vec<Mechanism>,
    #[command(flatten)]
    pub sim: SimArgs,
    /// bid to simulate instead of the solver's (needs --q too)
    #[arg(long, requires = "q")]
    pub p: Option<f64>,
    /// on-demand share to simulate instead of the solver's
    #[arg(long, requires = "p")]
    pub q: Option<f64>,
    #[arg(long)]
    pub sweep: Option<SweepSpec>,
    /// per-run CSV (single mechanism, no sweep)
    #[arg(long, value_name = "FILE")]
    pub trace_csv: Option<PathBuf>,
    #[command(flatten)]
    pub sca: ScaArgs,
    #[arg(long, value_enum)]
    pub format: Option<OutputFormat>,
}

#[derive(Debug, Clone, Args)]
pub struct CompareArgs {
    /// scenarios to compare (default: r3large_2000, r4_2000, d2_2000)
    #[arg(long = "scenario", value_delimiter = ',')]
    pub scenarios: Vec<String>,
    #[command(flatten)]
    pub job: JobArgs,
    #[command(flatten)]
    pub sim: SimArgs,
    #[command(flatten)]
    pub sca: ScaArgs,
    #[arg(long, value_enum, default_value = "json")]
    pub format: OutputFormat,
}
