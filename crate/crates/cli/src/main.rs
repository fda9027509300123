//! `layoutir` command line tool.
//!
//! Every subcommand reads JSONL or plain lines, writes its output in input
//! order, and drops a `<out>.manifest.json` beside the output. Exit status is
//! 0 on success, 1 on data errors, 2 on usage errors.

mod commands;
mod io;

use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use layoutir::Domain;
use serde::Serialize;

use crate::io::CliError;

#[derive(Debug, Parser)]
#[command(name = "layoutir", version, about = "Layout IR toolkit: synthesis, sequence codecs, placement, metrics")]
struct Cli {
    /// Seed for every random choice.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Worker threads; defaults to the available cores.
    #[arg(long, global = true)]
    jobs: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum DomainArg {
    Webui,
    Rico,
}

impl From<DomainArg> for Domain {
    fn from(d: DomainArg) -> Domain {
        match d {
            DomainArg::Webui => Domain::WebUi,
            DomainArg::Rico => Domain::Rico,
        }
    }
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Check IR lines and print them in canonical form.
    ValidateIr(ValidateIrArgs),
    /// Build (IR, layout sequence) training pairs from a layout corpus.
    Synth(SynthArgs),
    /// IR to constraint sequences.
    Compile(CompileArgs),
    /// Layout documents to layout sequences.
    Encode(EncodeArgs),
    /// Layout sequences to layout documents.
    Decode(DecodeArgs),
    /// Place constraint sequences.
    Place(PlaceArgs),
    /// Score generated layouts.
    Eval(EvalArgs),
    /// SVG wireframes, one per record.
    Render(RenderArgs),
    /// Per-type size, position, and co-occurrence statistics.
    Stats(StatsArgs),
}

#[derive(Debug, Args, Serialize)]
pub struct ValidateIrArgs {
    /// One IR per line, or JSONL with an `ir` field.
    #[arg(long = "in", conflicts_with = "ir", required_unless_present = "ir")]
    pub input: Option<PathBuf>,
    /// A single IR string.
    #[arg(long)]
    pub ir: Option<String>,
    #[arg(long, value_enum, default_value = "webui")]
    pub domain: DomainArg,
    #[arg(long, default_value = "-")]
    pub out: PathBuf,
}

#[derive(Debug, Args, Serialize)]
pub struct SynthArgs {
    #[arg(long = "in")]
    pub input: PathBuf,
    #[arg(long)]
    pub out: PathBuf,
    /// Discard rate.
    #[arg(long = "r", default_value_t = 0.1)]
    pub discard_rate: f64,
    #[arg(long, default_value_t = 0.5)]
    pub pos_prob: f64,
    #[arg(long, default_value_t = 0.3)]
    pub size_prob: f64,
    #[arg(long, default_value_t = 0.8)]
    pub hier_prob: f64,
    #[arg(long, default_value_t = io::CHUNK)]
    pub chunk_size: usize,
}

#[derive(Debug, Args, Serialize)]
pub struct CompileArgs {
    /// One IR per line, or JSONL with an `ir` field.
    #[arg(long = "in")]
    pub input: PathBuf,
    #[arg(long, default_value = "-")]
    pub out: PathBuf,
    #[arg(long, value_enum, default_value = "webui")]
    pub domain: DomainArg,
}

#[derive(Debug, Args, Serialize)]
pub struct EncodeArgs {
    /// Layout documents, JSONL.
    #[arg(long = "in")]
    pub input: PathBuf,
    #[arg(long, default_value = "-")]
    pub out: PathBuf,
}

#[derive(Debug, Args, Serialize)]
pub struct DecodeArgs {
    /// One layout sequence per line, or JSONL with a `layout_seq` field.
    #[arg(long = "in")]
    pub input: PathBuf,
    #[arg(long, default_value = "-")]
    pub out: PathBuf,
    #[arg(long, value_enum, default_value = "webui")]
    pub domain: DomainArg,
    /// Canvas as WxH; defaults to 1200x1200 (webui) or 1440x2560 (rico).
    #[arg(long)]
    pub canvas: Option<String>,
}

#[derive(Debug, Args, Serialize)]
pub struct PlaceArgs {
    /// One constraint sequence per line, or JSONL with a `constraint_seq` field.
    #[arg(long)]
    pub constraints: PathBuf,
    /// Corpus statistics from `stats`.
    #[arg(long)]
    pub stats: Option<PathBuf>,
    #[arg(long, default_value_t = 5)]
    pub k: usize,
    #[arg(long, default_value_t = 4)]
    pub samples: usize,
    #[arg(long)]
    pub no_completion: bool,
    #[arg(long, value_enum, default_value = "webui")]
    pub domain: DomainArg,
    #[arg(long, default_value = "-")]
    pub out: PathBuf,
}

#[derive(Debug, Args, Serialize)]
pub struct EvalArgs {
    /// `place` output, or layout documents carrying an `ir` field.
    #[arg(long = "in")]
    pub input: PathBuf,
    /// Real layouts aligned with the generated ones, for maximum IoU.
    #[arg(long)]
    pub references: Option<PathBuf>,
    /// Training layouts, for unique match.
    #[arg(long)]
    pub train: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "webui")]
    pub domain: DomainArg,
    #[arg(long)]
    pub canvas: Option<String>,
    #[arg(long, default_value = "-")]
    pub out: PathBuf,
    /// Also write the report as a one-row CSV.
    #[arg(long)]
    pub csv: Option<PathBuf>,
}

#[derive(Debug, Args, Serialize)]
pub struct RenderArgs {
    #[arg(long = "in")]
    pub input: PathBuf,
    #[arg(long)]
    pub out_dir: PathBuf,
}

#[derive(Debug, Args, Serialize)]
pub struct StatsArgs {
    #[arg(long = "in")]
    pub input: PathBuf,
    #[arg(long, value_enum, default_value = "webui")]
    pub domain: DomainArg,
    #[arg(long, default_value = "-")]
    pub out: PathBuf,
}

fn init_logging() {
    env_logger::Builder::from_env(env_logger::Env::new().filter_or("LAYOUTIR_LOG", "warn"))
        .format(|buf, record| writeln!(buf, "{}: {}", record.level().as_str().to_lowercase(), record.args()))
        .init();
}

fn run(cli: Cli) -> Result<(), CliError> {
    if let Some(jobs) = cli.jobs {
        if jobs == 0 {
            return Err(CliError::Usage("--jobs must be at least 1".into()));
        }
        rayon::ThreadPoolBuilder::new().num_threads(jobs).build_global().map_err(|e| CliError::Usage(e.to_string()))?;
    }
    let seed = cli.seed;
    match cli.command {
        Command::ValidateIr(a) => commands::validate_ir(&a, seed),
        Command::Synth(a) => commands::synth(&a, seed),
        Command::Compile(a) => commands::compile(&a, seed),
        Command::Encode(a) => commands::encode(&a, seed),
        Command::Decode(a) => commands::decode(&a, seed),
        Command::Place(a) => commands::place(&a, seed),
        Command::Eval(a) => commands::eval(&a, seed),
        Command::Render(a) => commands::render(&a, seed),
        Command::Stats(a) => commands::stats(&a, seed),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    init_logging();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
