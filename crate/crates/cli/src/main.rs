//! `modelprior`: objective model priors and Bayesian variable selection from the command line.
use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Duration;

use clap::{Args, Parser, Subcommand, ValueEnum};

use modelprior::{GibbsOptions, LoadOptions, PriorFamily, SearchOptions, SyntheticSpec};

mod cache;
mod commands;

const FIGURE_K: usize = 49;

#[derive(Parser, Debug)]
#[command(name = "modelprior", version, about = "Objective model priors for Bayesian variable selection")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Posterior inclusion probabilities, HPM and MPM for a CSV dataset
    Analyze(AnalyzeArgs),
    /// Log per-model prior and dimension mass for every family at one k
    PriorsTable(PriorsTableArgs),
    /// Plot data at k = 49: per-model log prior and dimension mass for the eight plotted families
    Figure1(OutputArgs),
    /// Prior inclusion probabilities, exact and approximate, over a list of k
    InclusionTable(InclusionTableArgs),
    /// Log posterior ratio to the null model of the best model of each dimension
    Profile(ProfileArgs),
    /// Write a seeded Gaussian regression fixture as CSV
    Synthesize(SynthesizeArgs),
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
enum Format {
    Csv,
    Json,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
enum MethodArg {
    Auto,
    Exact,
    Gibbs,
    Bnb,
}

#[derive(Args, Debug)]
struct OutputArgs {
    /// Output file; standard output when omitted
    #[arg(short, long)]
    output: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    format: Format,
}

#[derive(Args, Debug)]
struct DataArgs {
    /// CSV file with a header row
    data: PathBuf,
    /// Response column (name or 0-based index)
    #[arg(long, default_value = "y")]
    response: String,
    /// Columns kept in every model; an intercept is added unless one is constant
    #[arg(long, value_delimiter = ',')]
    fixed: Vec<String>,
    /// Candidate columns; defaults to every remaining column
    #[arg(long, value_delimiter = ',')]
    candidates: Option<Vec<String>>,
    /// Center the candidate columns
    #[arg(long)]
    center: bool,
}

#[derive(Args, Debug)]
struct SearchArgs {
    /// Largest k for exact enumeration
    #[arg(long, default_value_t = modelprior::model_space::DEFAULT_ENUMERATION_CAP)]
    enumeration_cap: usize,
    /// Largest k for branch and bound
    #[arg(long, default_value_t = modelprior::search::DEFAULT_BNB_CAP)]
    bnb_cap: usize,
    /// Wall-clock limit for branch and bound, in seconds
    #[arg(long)]
    bnb_timeout: Option<f64>,
    /// Give exact fits an infinite Bayes factor instead of failing
    #[arg(long)]
    perfect_fit_infinite: bool,
}

#[derive(Args, Debug)]
struct AnalyzeArgs {
    #[command(flatten)]
    data: DataArgs,
    /// Prior family: uniform, jeffreys, harmonic, cmg, half-p, half-k, hier-beta, beta-binomial:a:b, exp:c
    #[arg(long, default_value = "cmg")]
    prior: String,
    #[arg(long, value_enum, default_value_t = MethodArg::Auto)]
    method: MethodArg,
    /// Gibbs sweeps per chain, including burn-in
    #[arg(long, default_value_t = 20_000)]
    iterations: usize,
    #[arg(long, default_value_t = 2_000)]
    burn_in: usize,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    #[arg(long, default_value_t = 1)]
    chains: usize,
    #[command(flatten)]
    search: SearchArgs,
    #[arg(short, long)]
    output: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Format::Json)]
    format: Format,
}

#[derive(Args, Debug)]
struct PriorsTableArgs {
    #[arg(short, long, default_value_t = FIGURE_K)]
    k: usize,
    /// Families to tabulate; all nine by default
    #[arg(long, value_delimiter = ',')]
    priors: Option<Vec<String>>,
    #[command(flatten)]
    out: OutputArgs,
}

#[derive(Args, Debug)]
struct InclusionTableArgs {
    #[arg(long, value_delimiter = ',', default_values_t = [1usize, 3, 5, 7, 9, 20, 200])]
    ks: Vec<usize>,
    #[arg(long, value_delimiter = ',')]
    priors: Option<Vec<String>>,
    #[command(flatten)]
    out: OutputArgs,
}

#[derive(Args, Debug)]
struct ProfileArgs {
    #[command(flatten)]
    data: DataArgs,
    /// Families to profile; the eight plotted families by default
    #[arg(long, value_delimiter = ',')]
    priors: Option<Vec<String>>,
    #[command(flatten)]
    search: SearchArgs,
    #[command(flatten)]
    out: OutputArgs,
}

#[derive(Args, Debug)]
struct SynthesizeArgs {
    #[arg(short, long)]
    n: usize,
    #[arg(short, long)]
    k: usize,
    /// True variables, 1-based
    #[arg(long, value_delimiter = ',')]
    support: Vec<usize>,
    #[arg(long, default_value_t = 1.0)]
    coefficient: f64,
    #[arg(long, default_value_t = 1.0)]
    noise_sd: f64,
    #[arg(long, default_value_t = 0.0)]
    correlation: f64,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    #[arg(short, long)]
    output: PathBuf,
}

/// A library error tagged with the stage that raised it.
#[derive(Debug)]
pub struct Failure {
    stage: &'static str,
    error: modelprior::Error,
}

impl Failure {
    fn exit_code(&self) -> u8 {
        if self.error.is_data_error() {
            2
        } else {
            3
        }
    }
}

pub trait Stage<T> {
    fn stage(self, stage: &'static str) -> Result<T, Failure>;
}

impl<T> Stage<T> for modelprior::Result<T> {
    fn stage(self, stage: &'static str) -> Result<T, Failure> {
        self.map_err(|error| Failure { stage, error })
    }
}

impl<T> Stage<T> for io::Result<T> {
    fn stage(self, stage: &'static str) -> Result<T, Failure> {
        self.map_err(|e| Failure { stage, error: modelprior::Error::Io(e.to_string()) })
    }
}

fn parse_families(list: &Option<Vec<String>>, default: Vec<PriorFamily<f64>>) -> Result<Vec<PriorFamily<f64>>, Failure> {
    match list {
        None => Ok(default),
        Some(names) => names.iter().map(|s| s.parse::<PriorFamily<f64>>()).collect::<modelprior::Result<_>>().stage("parsing priors"),
    }
}

fn load_options(a: &DataArgs) -> LoadOptions {
    let col = |s: &String| -> modelprior::ColumnRef {
        s.parse::<usize>().map(Into::into).unwrap_or_else(|_| s.as_str().into())
    };
    LoadOptions {
        response: col(&a.response),
        fixed: a.fixed.iter().map(col).collect(),
        candidates: a.candidates.as_ref().map(|v| v.iter().map(col).collect()),
        center: a.center,
    }
}

fn search_options(a: &SearchArgs) -> Result<SearchOptions<f64>, Failure> {
    let deadline = match a.bnb_timeout {
        Some(s) if !(s.is_finite() && s >= 0.0) => {
            return Err(modelprior::Error::InvalidArgument(format!("bad --bnb-timeout {s}"))).stage("parsing options")
        }
        Some(s) => Some(Duration::from_secs_f64(s)),
        None => None,
    };
    Ok(SearchOptions {
        enumeration_cap: a.enumeration_cap,
        bnb_cap: a.bnb_cap,
        perfect_fit_is_infinite: a.perfect_fit_infinite,
        bnb_deadline: deadline,
        ..SearchOptions::default()
    })
}

fn open_output(path: &Option<PathBuf>) -> Result<Box<dyn Write>, Failure> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(File::create(p).stage("opening output")?)),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    })
}

fn run(cli: Cli) -> Result<(), Failure> {
    match cli.command {
        Command::Analyze(a) => {
            let data = modelprior::load_csv::<f64>(&a.data.data, &load_options(&a.data)).stage("loading data")?;
            let family = a.prior.parse::<PriorFamily<f64>>().stage("parsing priors")?;
            let gibbs = GibbsOptions { iterations: a.iterations, burn_in: a.burn_in, seed: a.seed, chains: a.chains };
            let opts = search_options(&a.search)?;
            let report = commands::analyze(&data, &family, a.method, &gibbs, &opts)?;
            let mut out = open_output(&a.output)?;
            commands::write_analysis(&mut out, &report, a.format)?;
            out.flush().stage("writing output")
        }
        Command::PriorsTable(a) => {
            let families = parse_families(&a.priors, PriorFamily::all_families())?;
            let mut out = open_output(&a.out.output)?;
            commands::priors_table(&mut out, &families, a.k, a.out.format)
        }
        Command::Figure1(a) => {
            let mut out = open_output(&a.output)?;
            commands::priors_table(&mut out, &PriorFamily::figure_families(), FIGURE_K, a.format)
        }
        Command::InclusionTable(a) => {
            let families = parse_families(&a.priors, PriorFamily::all_families())?;
            let mut out = open_output(&a.out.output)?;
            commands::inclusion_table(&mut out, &families, &a.ks, a.out.format)
        }
        Command::Profile(a) => {
            let data = modelprior::load_csv::<f64>(&a.data.data, &load_options(&a.data)).stage("loading data")?;
            let families = parse_families(&a.priors, PriorFamily::figure_families())?;
            let opts = search_options(&a.search)?;
            let mut out = open_output(&a.out.output)?;
            commands::profile(&mut out, &data, &families, &opts, a.out.format)
        }
        Command::Synthesize(a) => {
            if a.support.contains(&0) {
                return Err(modelprior::Error::InvalidArgument("support indices are 1-based".into())).stage("synthesizing");
            }
            let spec = SyntheticSpec::new(a.n, a.k, a.support.iter().map(|j| j - 1).collect(), a.seed)
                .with_coefficient(a.coefficient)
                .with_noise_sd(a.noise_sd)
                .with_correlation(a.correlation);
            spec.write_csv(&a.output).stage("synthesizing")
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("modelprior: {} failed: {}", f.stage, f.error);
            ExitCode::from(f.exit_code())
        }
    }
}
