//! `sumeval`: evaluate automatic video summaries against user summaries.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use log::info;

use sumeval_core::fixture::{make_fixture, FixtureKind};
use sumeval_core::pipeline::build_feature_cache;
use sumeval_core::report::{format_float, to_csv, to_json};
use sumeval_core::similarity::DEFAULT_THRESHOLD;
use sumeval_core::{evaluate, load_manifest, Aggregation, Error, MatchMode, RunOptions};

/// Exit codes; clap itself exits with 2 on usage errors.
mod exit {
    pub const INTERNAL: u8 = 1;
    pub const MANIFEST: u8 = 3;
    pub const IMAGE: u8 = 4;
    pub const CACHE: u8 = 5;
    pub const IO: u8 = 6;
    pub const CONFIG: u8 = 7;
}

fn exit_code(err: &Error) -> u8 {
    match err {
        Error::ManifestNotFound(_)
        | Error::SchemaViolation { .. }
        | Error::EmptySummaryDirectory(_)
        | Error::SummaryDirectoryNotFound(_)
        | Error::DuplicateFrameId { .. } => exit::MANIFEST,
        Error::UnsupportedFormat(_) | Error::CorruptImage { .. } | Error::EmptyImage => exit::IMAGE,
        Error::Cache { .. } => exit::CACHE,
        Error::Io { .. } => exit::IO,
        Error::InvalidThreshold(_) => exit::CONFIG,
        Error::WrongDimensions { .. }
        | Error::HsvOutOfRange { .. }
        | Error::LengthMismatch(..)
        | Error::NonNormalized { .. }
        | Error::EmptySummary(_)
        | Error::EmptyAggregation => exit::INTERNAL,
    }
}

#[derive(Parser, Debug)]
#[command(name = "sumeval", version)]
#[command(about = "Score automatic video summaries against user summaries by keyframe matching")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Evaluate every (automatic, user) summary pair listed in a manifest
    Evaluate(EvaluateArgs),
    /// Precompute the features of one summary directory into a cache file
    Features {
        #[arg(long)]
        dir: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        jobs: Option<usize>,
    },
    /// Write a synthetic dataset with a ready-to-use manifest
    MakeFixture {
        /// shuffle_collision, identical or disjoint
        #[arg(long, value_parser = parse_kind)]
        kind: FixtureKind,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
}

#[derive(clap::Args, Debug)]
struct EvaluateArgs {
    #[arg(long)]
    manifest: PathBuf,

    /// Color similarity must be strictly greater than this to match
    #[arg(long, default_value_t = DEFAULT_THRESHOLD)]
    color_threshold: f64,

    /// Texture similarity must be strictly greater than this to match
    #[arg(long, default_value_t = DEFAULT_THRESHOLD)]
    texture_threshold: f64,

    /// color_and_texture, color_only, texture_only or color_or_texture
    #[arg(long, default_value = "color_and_texture", value_parser = parse_mode)]
    match_mode: MatchMode,

    /// per-video (mean of per-video means) or flat (mean over all pairs)
    #[arg(long, default_value = "per-video", value_parser = parse_aggregation)]
    aggregation: Aggregation,

    /// Write the JSON report here instead of stdout
    #[arg(long)]
    report_json: Option<PathBuf>,

    #[arg(long)]
    report_csv: Option<PathBuf>,

    /// Feature cache file; reused when fingerprints match, updated after the run
    #[arg(long)]
    cache: Option<PathBuf>,

    /// Worker threads (default: all processors)
    #[arg(long)]
    jobs: Option<usize>,
}

fn parse_mode(s: &str) -> Result<MatchMode, String> {
    s.parse()
}

fn parse_aggregation(s: &str) -> Result<Aggregation, String> {
    s.parse()
}

fn parse_kind(s: &str) -> Result<FixtureKind, String> {
    s.parse()
}

fn write_file(path: &Path, contents: &str) -> Result<(), Error> {
    fs::write(path, contents).map_err(|source| Error::Io {
        context: format!("writing {}", path.display()),
        source,
    })
}

fn run_evaluate(args: EvaluateArgs) -> Result<(), Error> {
    let mut job = load_manifest(&args.manifest)?;
    job.config.color_threshold = args.color_threshold;
    job.config.texture_threshold = args.texture_threshold;
    job.config.match_mode = args.match_mode;
    info!("{} videos, {} pairs", job.videos.len(), job.pair_count());

    let opts = RunOptions {
        aggregation: args.aggregation,
        jobs: args.jobs,
        cache: args.cache,
    };
    // warnings reach stderr through the logger
    let run = evaluate(&job, &opts)?;

    let json = to_json(&run.report);
    match &args.report_json {
        Some(path) => write_file(path, &json)?,
        None => print!("{json}"),
    }
    if let Some(path) = &args.report_csv {
        write_file(path, &to_csv(&run.report)?)?;
    }
    eprintln!(
        "{} pairs, mean F-measure {}",
        run.report.pairs.len(),
        format_float(run.report.overall_mean_f)
    );
    Ok(())
}

fn run(cli: Cli) -> Result<(), Error> {
    match cli.command {
        Command::Evaluate(args) => run_evaluate(args),
        Command::Features { dir, out, jobs } => {
            let cache = build_feature_cache(&dir, jobs)?;
            cache.save(&out)?;
            eprintln!(
                "{} frames written to {}",
                cache.record_count(),
                out.display()
            );
            Ok(())
        }
        Command::MakeFixture { kind, out, seed } => {
            let fixture = make_fixture(kind, &out, seed)?;
            if let Some(s) = fixture.seed {
                if s != seed {
                    eprintln!("seed {seed} gave no usable permutation; used {s}");
                }
            }
            println!("{}", fixture.manifest.display());
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}
