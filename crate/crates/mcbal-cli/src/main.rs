//! `mcbal`: white balance and multi-color balance correction for PNG/PPM
//! images, with region-based evaluation and a synthetic scene renderer.

mod config;
mod report;
mod run;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use config::Method;

#[derive(Parser)]
#[command(
    name = "mcbal",
    version,
    about = "Color correction via 3x3 transforms: white balance and exact three-color balance",
    after_help = "Exit codes: 0 success, 1 configuration or I/O error, 2 numerical degeneracy \
                  (colinear target colors, degenerate white point)."
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct CommonArgs {
    /// Job configuration (TOML)
    #[arg(long, value_name = "PATH")]
    config: PathBuf,
    /// Write a JSON report here in addition to the stdout table
    #[arg(long, value_name = "PATH")]
    report: Option<PathBuf>,
    /// Report angular errors in degrees instead of radians
    #[arg(long)]
    degrees: bool,
}

#[derive(Args)]
struct CorrectArgs {
    #[command(flatten)]
    common: CommonArgs,
    /// Correction method (overrides the config)
    #[arg(long, value_name = "METHOD")]
    method: Option<Method>,
    /// Output image path (overrides the config)
    #[arg(long, value_name = "PATH")]
    out: Option<PathBuf>,
    /// Output quantization depth
    #[arg(long, value_name = "BITS", value_parser = ["8", "16"])]
    bit_depth: Option<String>,
    /// Condition-number threshold for rejecting colinear target colors
    #[arg(long, value_name = "REAL")]
    cond_threshold: Option<f64>,
}

#[derive(Args)]
struct PairArgs {
    /// Job configuration for the first image (TOML)
    #[arg(value_name = "CONFIG1")]
    config1: PathBuf,
    /// Job configuration for the second image (TOML)
    #[arg(value_name = "CONFIG2")]
    config2: PathBuf,
    /// Write a combined JSON report here
    #[arg(long, value_name = "PATH")]
    report: Option<PathBuf>,
    /// Correction method (overrides both configs)
    #[arg(long, value_name = "METHOD")]
    method: Option<Method>,
    /// Report angular errors in degrees instead of radians
    #[arg(long)]
    degrees: bool,
    /// Output quantization depth
    #[arg(long, value_name = "BITS", value_parser = ["8", "16"])]
    bit_depth: Option<String>,
    /// Condition-number threshold for rejecting colinear target colors
    #[arg(long, value_name = "REAL")]
    cond_threshold: Option<f64>,
}

#[derive(Args)]
struct SynthArgs {
    /// Scene configuration (TOML)
    #[arg(long, value_name = "PATH")]
    config: PathBuf,
    /// Output image path (.png or .ppm)
    #[arg(long, value_name = "PATH")]
    out: PathBuf,
    /// Noise seed (overrides the config)
    #[arg(long, value_name = "INT")]
    seed: Option<u64>,
    /// Output quantization depth
    #[arg(long, value_name = "BITS", value_parser = ["8", "16"], default_value = "16")]
    bit_depth: String,
}

#[derive(Subcommand)]
enum Command {
    /// Correct one image (white balance or multi-color balance)
    Correct(CorrectArgs),
    /// Correct two images of one scene against a shared benchmark set
    CorrectPair(PairArgs),
    /// Evaluate an already-corrected image against benchmark colors
    Eval(CommonArgs),
    /// Render a synthetic patch scene under an illuminant cast
    Synth(SynthArgs),
}

fn parse_depth_flag(raw: Option<&str>) -> Option<u8> {
    raw.map(|s| if s == "8" { 8 } else { 16 })
}

fn dispatch(cli: Cli) -> anyhow::Result<()> {
    let stdout = std::io::stdout();
    let mut out = stdout.lock();
    match cli.command {
        Command::Correct(args) => {
            let overrides = run::overrides_from(
                args.method,
                args.out,
                args.common.degrees,
                parse_depth_flag(args.bit_depth.as_deref()),
                args.cond_threshold,
            );
            let job = config::load_job(&args.common.config, &overrides, true)?;
            run::correct(&job, args.common.report.as_deref(), &mut out)
        }
        Command::CorrectPair(args) => {
            let overrides = run::overrides_from(
                args.method,
                None,
                args.degrees,
                parse_depth_flag(args.bit_depth.as_deref()),
                args.cond_threshold,
            );
            let job1 = config::load_job(&args.config1, &overrides, true)?;
            let job2 = config::load_job(&args.config2, &overrides, true)?;
            run::correct_pair(&job1, &job2, args.report.as_deref(), &mut out)
        }
        Command::Eval(args) => {
            let overrides = run::overrides_from(None, None, args.degrees, None, None);
            let job = config::load_job(&args.config, &overrides, false)?;
            run::eval(&job, args.report.as_deref(), &mut out)
        }
        Command::Synth(args) => {
            let scene_job = config::load_scene(&args.config, args.seed)?;
            let depth = match args.bit_depth.as_str() {
                "8" => mcbal_core::BitDepth::Eight,
                _ => mcbal_core::BitDepth::Sixteen,
            };
            run::synth(&scene_job, &args.out, depth, &mut out)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::from(run::exit_code_for(&err))
        }
    }
}
