use std::fs::{self, File};
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use optbeam::{ScoringModel, Strategy};
use optbeam_harness::compare::write_compare_csv;
use optbeam_harness::records::write_jsonl;
use optbeam_harness::runspec::{parse_sources, random_sources, Source};
use optbeam_harness::tune::write_tune_csv;
use optbeam_harness::verify::Fault;
use optbeam_harness::{
    cmd_compare, cmd_decode, cmd_make_model, cmd_tune, cmd_verify, load_model, RunSpec,
    VerifyOptions,
};

#[derive(Parser)]
#[command(
    name = "optbeam",
    version,
    about = "Beam search with certified optimal stopping"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Decode every source line; one JSON object per line.
    Decode(RunArgs),
    /// Aggregate decodes over a strategy x beam size x reward grid.
    Compare(RunArgs),
    /// Sweep reward and beam size for a bounded-reward strategy.
    Tune(RunArgs),
    /// Check the stopping rules against brute-force oracles on random models.
    Verify(VerifyArgs),
    /// Write a table-model JSON file.
    MakeModel(MakeModelArgs),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Format {
    Csv,
    Jsonl,
}

#[derive(Args)]
struct RunArgs {
    /// Table-model JSON path, or a seeded:/copy:/ngram: spec.
    #[arg(long)]
    model: String,
    /// One whitespace-tokenized source per line.
    #[arg(long, conflicts_with = "random_sources")]
    source: Option<PathBuf>,
    /// Generate this many random sources from --seed instead of reading a file.
    #[arg(long)]
    random_sources: Option<usize>,
    /// Repeatable; defaults to optimal (tune: optimal_bounded_simplified).
    #[arg(long = "strategy", value_parser = parse_strategy)]
    strategies: Vec<Strategy>,
    /// Repeatable; defaults to 5.
    #[arg(long = "beam-size")]
    beam_sizes: Vec<usize>,
    /// Repeatable; defaults to 0.
    #[arg(long = "reward")]
    rewards: Vec<f64>,
    #[arg(long, default_value_t = 1.0)]
    length_ratio: f64,
    #[arg(long, default_value_t = 50)]
    max_steps: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Output file (stdout when absent).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Compare output format; defaults to csv.
    #[arg(long, value_enum)]
    format: Option<Format>,
}

#[derive(Args)]
struct VerifyArgs {
    #[arg(long, default_value_t = 500)]
    trials: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 3)]
    min_vocab: usize,
    #[arg(long, default_value_t = 6)]
    max_vocab: usize,
    #[arg(long, default_value_t = 6)]
    min_steps: usize,
    #[arg(long, default_value_t = 10)]
    max_steps: usize,
    #[arg(long, default_value_t = 8)]
    max_beam: usize,
    /// Verdict JSONL destination (stdout when absent).
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, hide = true)]
    fault: Option<String>,
}

#[derive(Args)]
struct MakeModelArgs {
    /// table:stationary,p1,..,pn | table:uniform,n | seeded:... | copy:...
    spec: String,
    #[arg(long)]
    out: PathBuf,
    /// Prefix depth stored when materializing a seeded or copy model.
    #[arg(long, default_value_t = 2)]
    depth: usize,
}

fn pick<T: Clone>(given: &[T], default: &[T]) -> Vec<T> {
    if given.is_empty() {
        default.to_vec()
    } else {
        given.to_vec()
    }
}

fn parse_strategy(s: &str) -> Result<Strategy, String> {
    s.parse().map_err(|e: optbeam::Error| e.to_string())
}

/// Usage and I/O problems exit 2; a failed invariant exits 1.
enum Failure {
    Usage(anyhow::Error),
    Invariant,
}

impl From<anyhow::Error> for Failure {
    fn from(e: anyhow::Error) -> Self {
        Failure::Usage(e)
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Invariant) => ExitCode::from(1),
        Err(Failure::Usage(e)) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}

fn output(path: &Option<PathBuf>) -> Result<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(
            File::create(p).with_context(|| format!("cannot create {}", p.display()))?,
        )),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    })
}

fn prepare(
    args: &RunArgs,
    default_strategy: Strategy,
) -> Result<(Box<dyn ScoringModel>, Vec<Source>, RunSpec)> {
    let model = load_model(&args.model)?;
    let sources = match (&args.source, args.random_sources) {
        (Some(path), _) => {
            let text = fs::read_to_string(path)
                .with_context(|| format!("cannot read source file {}", path.display()))?;
            parse_sources(model.as_ref(), &text)?
        }
        (None, Some(n)) => random_sources(model.as_ref(), n, args.seed),
        (None, None) => bail!("one of --source or --random-sources is required"),
    };
    let defaults = RunSpec::default();
    let spec = RunSpec {
        strategies: pick(&args.strategies, &[default_strategy]),
        beam_sizes: pick(&args.beam_sizes, &defaults.beam_sizes),
        rewards: pick(&args.rewards, &defaults.rewards),
        length_ratio: args.length_ratio,
        max_steps: args.max_steps,
        seed: args.seed,
    };
    for (s, b, r) in spec.grid() {
        for w in spec.config(s, b, r).validate()? {
            eprintln!("warning: {w}");
        }
    }
    Ok((model, sources, spec))
}

fn run(command: Command) -> Result<(), Failure> {
    match command {
        Command::Decode(args) => {
            let (model, sources, spec) = prepare(&args, Strategy::Optimal)?;
            if spec.strategies.len() != 1 || spec.beam_sizes.len() != 1 || spec.rewards.len() != 1 {
                return Err(anyhow::anyhow!(
                    "decode takes a single --strategy, --beam-size and --reward"
                )
                .into());
            }
            let config = spec.config(spec.strategies[0], spec.beam_sizes[0], spec.rewards[0]);
            let records = cmd_decode(model.as_ref(), &sources, &config)?;
            let mut out = output(&args.out)?;
            write_jsonl(&mut out, &records)?;
            out.flush().map_err(anyhow::Error::from)?;
        }
        Command::Compare(args) => {
            let (model, sources, spec) = prepare(&args, Strategy::Optimal)?;
            let cells = cmd_compare(model.as_ref(), &sources, &spec)?;
            let mut out = output(&args.out)?;
            let rows: Vec<_> = cells.into_iter().map(|(row, _)| row).collect();
            match args.format.unwrap_or(Format::Csv) {
                Format::Csv => write_compare_csv(&mut out, &rows)?,
                Format::Jsonl => write_jsonl(&mut out, &rows)?,
            }
            out.flush().map_err(anyhow::Error::from)?;
        }
        Command::Tune(args) => {
            let (model, sources, spec) = prepare(&args, Strategy::OptimalBoundedSimplified)?;
            let rows = cmd_tune(model.as_ref(), &sources, &spec)?;
            let mut out = output(&args.out)?;
            write_tune_csv(&mut out, &rows)?;
            out.flush().map_err(anyhow::Error::from)?;
        }
        Command::Verify(args) => {
            let fault = match args.fault.as_deref() {
                None => None,
                Some("flip-certificate") => Some(Fault::FlipCertificate),
                Some(other) => return Err(anyhow::anyhow!("unknown fault {other:?}").into()),
            };
            if args.min_vocab < 2
                || args.min_vocab > args.max_vocab
                || args.min_steps > args.max_steps
                || args.max_beam == 0
            {
                return Err(anyhow::anyhow!("invalid verify bounds").into());
            }
            let opts = VerifyOptions {
                trials: args.trials,
                seed: args.seed,
                vocab: (args.min_vocab, args.max_vocab),
                steps: (args.min_steps.max(1), args.max_steps),
                beam: (1, args.max_beam),
                fault,
                ..VerifyOptions::default()
            };
            let (records, summary) = cmd_verify(&opts)?;
            let mut out = output(&args.out)?;
            write_jsonl(&mut out, &records)?;
            out.flush().map_err(anyhow::Error::from)?;
            eprintln!("{summary}");
            if summary.exit_code() != 0 {
                return Err(Failure::Invariant);
            }
        }
        Command::MakeModel(args) => {
            let model = cmd_make_model(&args.spec, args.depth)?;
            fs::write(&args.out, model.to_json() + "\n")
                .with_context(|| format!("cannot write {}", args.out.display()))?;
        }
    }
    Ok(())
}
