//! Command-line front end.
//!
//! Six subcommands tie the pipeline together; all stochastic commands take
//! an explicit `--seed` and re-running with the same seed reproduces every
//! output byte for byte.
//!
//! - `simulate`: generate a ground-truth stream (CSV) and truth sidecar
//!   (JSON).
//! - `estimate`: per-prefix estimate series (CSV + JSON), with an optional
//!   streaker-correction pre-pass.
//! - `replay`: the same series streamed row by row to stdout.
//! - `paygo`: expected new uniques for each requested `m`, by coverage
//!   reasoning and by spline extrapolation.
//! - `detect-lists`: list-walking report (JSON) plus affected-HIT series
//!   (CSV).
//! - `streaker-study`: Chao92 error versus worker count.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::error::{Error, Result};
use crate::estimators::{
    estimate_series_with_heuristic, series_csv_header, series_csv_row, series_row, EstimatorKind,
};
use crate::heuristics::{HeuristicConfig, HeuristicKind};
use crate::listwalk::{affected_series, scan, ListWalkConfig};
use crate::paygo::{shen_predict, PaygoPrediction, SplineModel};
use crate::simulator::{
    simulate, streaker_impact_study, AnswersPerWorker, Interleaving, ItemDistribution,
    ListOrder, ListWalkerSpec, WorkerModel,
};
use crate::stream::{AnswerStream, FrequencyStatistics};

#[derive(Debug, Parser)]
#[command(
    name = "crowdest",
    about = "Completeness estimation for open-world set enumeration",
    version
)]
pub struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Generate a synthetic answer stream with known ground truth.
    Simulate(SimulateArgs),
    /// Compute estimate series over growing prefixes of a stream.
    Estimate(EstimateArgs),
    /// Stream estimate rows to stdout as prefixes are processed.
    Replay(ReplayArgs),
    /// Predict new unique answers from additional HITs.
    Paygo(PaygoArgs),
    /// Detect shared answer sequences (list walking).
    DetectLists(DetectListsArgs),
    /// Measure Chao92 error as a function of worker count.
    StreakerStudy(StreakerStudyArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum DistChoice {
    Uniform,
    Zipf,
    Selfsimilar,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum HeuristicChoice {
    None,
    Cluster,
    F1,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum WorkerSkewChoice {
    /// Every worker contributes the same number of answers.
    Fixed,
    /// Power-law worker loads (a few streakers, many samplers).
    Powerlaw,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum InterleavingChoice {
    RoundRobin,
    Random,
}

#[derive(Debug, Args)]
struct DistArgs {
    /// Item distribution shape.
    #[arg(long, value_enum, default_value = "uniform")]
    dist: DistChoice,
    /// True number of items N.
    #[arg(long)]
    n_items: usize,
    /// Zipf exponent (with --dist zipf).
    #[arg(long, default_value_t = 1.0)]
    zipf_s: f64,
    /// Self-similar skew parameter (with --dist selfsimilar).
    #[arg(long, default_value_t = 0.2)]
    h: f64,
}

impl DistArgs {
    fn build(&self) -> Result<ItemDistribution> {
        match self.dist {
            DistChoice::Uniform => ItemDistribution::uniform(self.n_items),
            DistChoice::Zipf => ItemDistribution::zipf(self.n_items, self.zipf_s),
            DistChoice::Selfsimilar => ItemDistribution::self_similar(self.n_items, self.h),
        }
    }
}

#[derive(Debug, Args)]
struct HeuristicArgs {
    /// Streaker correction applied before estimation.
    #[arg(long, value_enum, default_value = "none")]
    heuristic: HeuristicChoice,
    /// Top-worker count defining the truncation quota.
    #[arg(long, default_value_t = 10)]
    t: usize,
    /// Maximum removable fraction of a worker's answers.
    #[arg(long, default_value_t = 0.40)]
    r: f64,
    /// Truncation resamples to average over.
    #[arg(long, default_value_t = 1)]
    repetitions: usize,
}

impl HeuristicArgs {
    fn build(&self, seed: Option<u64>) -> Result<Option<HeuristicConfig>> {
        let kind = match self.heuristic {
            HeuristicChoice::None => return Ok(None),
            HeuristicChoice::Cluster => HeuristicKind::Cluster,
            HeuristicChoice::F1 => HeuristicKind::F1,
        };
        let seed = seed.ok_or_else(|| {
            Error::InvalidConfig("--seed is required when a heuristic is enabled".into())
        })?;
        let cfg = HeuristicConfig {
            kind,
            t: self.t,
            r: self.r,
            seed,
            repetitions: self.repetitions,
        };
        cfg.validate()?;
        Ok(Some(cfg))
    }
}

#[derive(Debug, Args)]
struct SimulateArgs {
    #[command(flatten)]
    dist: DistArgs,
    /// Output directory (stream.csv + truth.json).
    #[arg(long)]
    output: PathBuf,
    /// Number of sampling workers.
    #[arg(long, default_value_t = 10)]
    workers: usize,
    /// Total answers to generate across sampling workers.
    #[arg(long)]
    hits: usize,
    /// Shape of per-worker contribution counts.
    #[arg(long, value_enum, default_value = "powerlaw")]
    worker_skew: WorkerSkewChoice,
    /// Power-law exponent for worker loads.
    #[arg(long, default_value_t = 1.5)]
    streaker_exponent: f64,
    /// Let workers repeat answers (samples with replacement).
    #[arg(long, default_value_t = false)]
    with_replacement: bool,
    /// Arrival-order policy.
    #[arg(long, value_enum, default_value = "random")]
    interleaving: InterleavingChoice,
    /// Extra list-walking workers copying the same list.
    #[arg(long, default_value_t = 0)]
    list_walkers: usize,
    /// Answers each list walker transcribes.
    #[arg(long, default_value_t = 10)]
    list_items: usize,
    /// List offset each walker starts from.
    #[arg(long, default_value_t = 0)]
    list_offset: usize,
    #[arg(long)]
    seed: u64,
}

#[derive(Debug, Args)]
struct EstimateArgs {
    /// Input stream CSV.
    #[arg(long)]
    input: PathBuf,
    /// Output directory (series.csv + series.json).
    #[arg(long)]
    output: PathBuf,
    /// Evaluate estimators every this many HITs.
    #[arg(long, default_value_t = 10)]
    step: usize,
    /// Comma-separated estimators: uniform, chao84, chao92.
    #[arg(long, value_delimiter = ',', value_parser = parse_estimator,
          default_value = "uniform,chao84,chao92")]
    estimators: Vec<EstimatorKind>,
    #[command(flatten)]
    heuristic: HeuristicArgs,
    /// Seed for the heuristic's subsampling.
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Debug, Args)]
struct ReplayArgs {
    #[arg(long)]
    input: PathBuf,
    #[arg(long, default_value_t = 10)]
    step: usize,
    #[arg(long, value_delimiter = ',', value_parser = parse_estimator,
          default_value = "uniform,chao84,chao92")]
    estimators: Vec<EstimatorKind>,
    #[command(flatten)]
    heuristic: HeuristicArgs,
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Debug, Args)]
struct PaygoArgs {
    #[arg(long)]
    input: PathBuf,
    /// Output directory (paygo.csv + paygo.json).
    #[arg(long)]
    output: PathBuf,
    /// Additional-HIT horizons to predict for.
    #[arg(long, value_delimiter = ',', default_values_t = [10usize, 20, 50, 100, 200])]
    m: Vec<usize>,
    /// Permutations behind the mean accumulation curve.
    #[arg(long, default_value_t = 100)]
    permutations: usize,
    /// Opt-in streaker correction before prediction (tends to make the
    /// coverage method under-predict; off by default).
    #[command(flatten)]
    heuristic: HeuristicArgs,
    #[arg(long)]
    seed: u64,
}

#[derive(Debug, Args)]
struct DetectListsArgs {
    #[arg(long)]
    input: PathBuf,
    /// Output directory (listwalk.json + affected.csv).
    #[arg(long)]
    output: PathBuf,
    /// Smoothing between observed frequencies (1.0) and the skewed prior
    /// (0.0).
    #[arg(long, default_value_t = 0.5)]
    beta: f64,
    /// Self-similar prior parameter.
    #[arg(long, default_value_t = 0.2)]
    h: f64,
    /// Detection threshold on the tail probability.
    #[arg(long, default_value_t = 0.01)]
    threshold: f64,
    /// Minimum window length.
    #[arg(long, default_value_t = 5)]
    s_min: usize,
    /// Prefix step for the affected-HIT series.
    #[arg(long, default_value_t = 50)]
    step: usize,
}

#[derive(Debug, Args)]
struct StreakerStudyArgs {
    #[command(flatten)]
    dist: DistArgs,
    /// Output directory (streaker_study.csv).
    #[arg(long)]
    output: PathBuf,
    /// Worker counts to compare (hits are split evenly).
    #[arg(long, value_delimiter = ',', default_values_t = [1usize, 2, 5, 10, 15, 20])]
    workers: Vec<usize>,
    /// Total answers per simulated run.
    #[arg(long)]
    hits: usize,
    /// Simulated runs per worker count.
    #[arg(long, default_value_t = 10)]
    runs: usize,
    #[arg(long)]
    seed: u64,
}

fn parse_estimator(token: &str) -> std::result::Result<EstimatorKind, String> {
    token.parse().map_err(|e: Error| e.to_string())
}

/// Parses the argument vector (first element is the program name).
pub fn parse<I, T>(args: I) -> clap::error::Result<Cli>
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    Cli::try_parse_from(args)
}

/// Executes a parsed invocation. Writes files under the command's output
/// directory; only `replay` prints to stdout.
pub fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Simulate(args) => run_simulate(args),
        Command::Estimate(args) => run_estimate(args),
        Command::Replay(args) => run_replay(args),
        Command::Paygo(args) => run_paygo(args),
        Command::DetectLists(args) => run_detect_lists(args),
        Command::StreakerStudy(args) => run_streaker_study(args),
    }
}

fn read_stream(path: &Path) -> Result<AnswerStream> {
    let text = fs::read_to_string(path)
        .map_err(|e| Error::InvalidConfig(format!("cannot read {}: {e}", path.display())))?;
    AnswerStream::from_csv(&text)
}

fn write_file(dir: &Path, name: &str, contents: &str) -> Result<()> {
    fs::create_dir_all(dir)?;
    fs::write(dir.join(name), contents)?;
    Ok(())
}

fn run_simulate(args: SimulateArgs) -> Result<()> {
    let dist = args.dist.build()?;
    let answers_per_worker = match args.worker_skew {
        WorkerSkewChoice::Fixed => {
            if !args.hits.is_multiple_of(args.workers) {
                return Err(Error::InvalidConfig(
                    "--hits must be a multiple of --workers for fixed skew".into(),
                ));
            }
            AnswersPerWorker::Fixed(args.hits / args.workers)
        }
        WorkerSkewChoice::Powerlaw => AnswersPerWorker::PowerLaw {
            exponent: args.streaker_exponent,
            total_hits: args.hits,
        },
    };
    let workers = WorkerModel {
        num_workers: args.workers,
        answers_per_worker,
        without_replacement: !args.with_replacement,
        interleaving: match args.interleaving {
            InterleavingChoice::RoundRobin => Interleaving::RoundRobin,
            InterleavingChoice::Random => Interleaving::Random,
        },
    };
    let lists = (args.list_walkers > 0).then(|| ListWalkerSpec {
        count: args.list_walkers,
        list_order: ListOrder::Alphabetical,
        start_offsets: vec![args.list_offset; args.list_walkers],
        answers_each: args.list_items,
    });
    let output = simulate(&dist, &workers, lists.as_ref(), args.seed)?;
    write_file(&args.output, "stream.csv", &output.stream.to_csv())?;
    write_file(&args.output, "truth.json", &output.truth_json()?)?;
    Ok(())
}

fn run_estimate(args: EstimateArgs) -> Result<()> {
    let stream = read_stream(&args.input)?;
    let heuristic = args.heuristic.build(args.seed)?;
    let series =
        estimate_series_with_heuristic(&stream, args.step, &args.estimators, heuristic.as_ref())?;
    write_file(&args.output, "series.csv", &series.to_csv())?;
    write_file(&args.output, "series.json", &serde_json::to_string_pretty(&series)?)?;
    Ok(())
}

fn run_replay(args: ReplayArgs) -> Result<()> {
    let stream = read_stream(&args.input)?;
    let heuristic = args.heuristic.build(args.seed)?;
    let stdout = std::io::stdout();
    let mut out = stdout.lock();
    writeln!(out, "{}", series_csv_header(&args.estimators))?;
    let n = stream.len();
    if args.step < 1 {
        return Err(Error::InvalidConfig("step must be >= 1".into()));
    }
    let mut points: Vec<usize> = (1..=n / args.step).map(|k| k * args.step).collect();
    if n > 0 && points.last() != Some(&n) {
        points.push(n);
    }
    for hits in points {
        let row = series_row(&stream.prefix(hits)?, &args.estimators, heuristic.as_ref())?;
        writeln!(out, "{}", series_csv_row(&args.estimators, &row))?;
    }
    Ok(())
}

fn run_paygo(args: PaygoArgs) -> Result<()> {
    let raw = read_stream(&args.input)?;
    let heuristic = args.heuristic.build(Some(args.seed))?;
    let stream = match &heuristic {
        Some(cfg) => crate::heuristics::apply(&raw, cfg)?,
        None => raw,
    };
    let fstat = FrequencyStatistics::from_stream(&stream)?;
    let model = SplineModel::fit_mean_sac(&stream, args.permutations, args.seed)?;

    let mut predictions: Vec<PaygoPrediction> = Vec::new();
    for &m in &args.m {
        predictions.push(shen_predict(&fstat, m)?);
        predictions.push(model.predict(m));
    }

    let mut csv = String::from("m,method,expected_new_uniques\n");
    for p in &predictions {
        csv.push_str(&format!("{},{},{}\n", p.m, p.method, p.expected_new_uniques));
    }
    write_file(&args.output, "paygo.csv", &csv)?;

    #[derive(serde::Serialize)]
    struct PaygoDocument<'a> {
        hits: usize,
        unique: usize,
        permutations: usize,
        predictions: &'a [PaygoPrediction],
    }
    let doc = PaygoDocument {
        hits: stream.len(),
        unique: fstat.c(),
        permutations: args.permutations,
        predictions: &predictions,
    };
    write_file(&args.output, "paygo.json", &serde_json::to_string_pretty(&doc)?)?;
    Ok(())
}

fn run_detect_lists(args: DetectListsArgs) -> Result<()> {
    let stream = read_stream(&args.input)?;
    let cfg = ListWalkConfig {
        s_min: args.s_min,
        beta: args.beta,
        h: args.h,
        threshold: args.threshold,
    };
    let mut report = scan(&stream, &cfg)?;
    report.affected_series = affected_series(&stream, &cfg, args.step)?;

    let mut csv = String::from("hits,affected\n");
    for p in &report.affected_series {
        csv.push_str(&format!("{},{}\n", p.hits, p.affected));
    }
    write_file(&args.output, "affected.csv", &csv)?;
    write_file(&args.output, "listwalk.json", &serde_json::to_string_pretty(&report)?)?;
    Ok(())
}

fn run_streaker_study(args: StreakerStudyArgs) -> Result<()> {
    let dist = args.dist.build()?;
    let rows = streaker_impact_study(&dist, &args.workers, args.hits, args.runs, args.seed)?;
    let mut csv = String::from("num_workers,mean_error\n");
    for row in &rows {
        csv.push_str(&format!("{},{}\n", row.num_workers, row.mean_error));
    }
    write_file(&args.output, "streaker_study.csv", &csv)?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn estimator_tokens_parse() {
        assert_eq!(parse_estimator("uniform").unwrap(), EstimatorKind::UniformMle);
        assert_eq!(parse_estimator("chao92").unwrap(), EstimatorKind::Chao92);
        assert!(parse_estimator("nope").is_err());
    }

    #[test]
    fn heuristic_requires_seed() {
        let args = HeuristicArgs {
            heuristic: HeuristicChoice::F1,
            t: 10,
            r: 0.4,
            repetitions: 1,
        };
        assert!(args.build(None).is_err());
        assert!(args.build(Some(1)).unwrap().is_some());
        let none = HeuristicArgs {
            heuristic: HeuristicChoice::None,
            t: 10,
            r: 0.4,
            repetitions: 1,
        };
        assert!(none.build(None).unwrap().is_none());
    }

    #[test]
    fn cli_parses_each_subcommand() {
        for argv in [
            vec![
                "crowdest", "simulate", "--output", "/tmp/x", "--n-items", "50", "--hits",
                "200", "--seed", "1",
            ],
            vec!["crowdest", "estimate", "--input", "a.csv", "--output", "/tmp/x"],
            vec!["crowdest", "replay", "--input", "a.csv", "--step", "50"],
            vec![
                "crowdest", "paygo", "--input", "a.csv", "--output", "/tmp/x", "--seed", "3",
            ],
            vec!["crowdest", "detect-lists", "--input", "a.csv", "--output", "/tmp/x"],
            vec![
                "crowdest",
                "streaker-study",
                "--output",
                "/tmp/x",
                "--n-items",
                "60",
                "--hits",
                "120",
                "--seed",
                "5",
            ],
        ] {
            parse(argv.clone()).unwrap_or_else(|e| panic!("{argv:?}: {e}"));
        }
    }

    #[test]
    fn cli_rejects_unknown_estimator() {
        let argv = vec![
            "crowdest", "estimate", "--input", "a.csv", "--output", "/tmp/x", "--estimators",
            "uniform,bogus",
        ];
        assert!(parse(argv).is_err());
    }
}
