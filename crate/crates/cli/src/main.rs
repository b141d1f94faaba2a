use std::path::PathBuf;
use std::process::ExitCode;

use clap::{ArgGroup, Args, Parser, Subcommand};
use lessonkit_cli::{corpus, CliError, LessonInput};
use lessonkit_core::separation::SeparatorConfig;
use lessonkit_server::ServerConfig;

/// Practice-lesson analysis: segmentation, note extraction, scoring.
#[derive(Debug, Parser)]
#[command(name = "lessonkit", version)]
struct Cli {
    /// Server-style TOML config; only `[analysis]` and `[separator]` matter
    /// outside `serve`.
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Segment a lesson, extract region notes and write it to a directory.
    Preprocess(PreprocessArgs),
    /// Score a recording against a reference; prints the report as JSON.
    Score(ScoreArgs),
    /// Evaluate segmentation over a labelled corpus against two baselines.
    Eval(EvalArgs),
    /// Write a corpus of synthetic lessons with ground truth.
    SynthCorpus(SynthArgs),
    /// Run the HTTP server.
    Serve(ServeArgs),
}

#[derive(Debug, Args)]
#[command(group(ArgGroup::new("input").required(true).args(["mix", "voice"])))]
struct PreprocessArgs {
    /// Full mix; separated with --separator-cmd when given.
    #[arg(long, conflicts_with_all = ["voice", "instrument"])]
    mix: Option<PathBuf>,
    #[arg(long, requires = "instrument")]
    voice: Option<PathBuf>,
    #[arg(long, requires = "voice")]
    instrument: Option<PathBuf>,
    /// Separator command with {input} and {outdir} placeholders.
    #[arg(long)]
    separator_cmd: Option<String>,
    /// Playback media to store with the lesson (defaults to a WAV mixdown).
    #[arg(long)]
    media: Option<PathBuf>,
    /// Output directory; its name is the lesson id.
    #[arg(long)]
    out: PathBuf,
}

#[derive(Debug, Args)]
struct ScoreArgs {
    #[arg(long)]
    reference: PathBuf,
    #[arg(long)]
    recording: PathBuf,
}

#[derive(Debug, Args)]
struct EvalArgs {
    #[arg(long)]
    corpus: PathBuf,
    /// Seed for the random baseline.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Where report.json and report.txt go (defaults to the corpus).
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct SynthArgs {
    #[arg(long)]
    out: PathBuf,
    #[arg(long, default_value_t = 10)]
    count: usize,
    /// Seconds per lesson.
    #[arg(long, default_value_t = 120.0)]
    duration: f64,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    /// Write mixes instead of stem pairs.
    #[arg(long)]
    mix: bool,
}

#[derive(Debug, Args)]
struct ServeArgs {
    #[arg(long)]
    listen: Option<String>,
    #[arg(long)]
    storage: Option<PathBuf>,
    #[arg(long)]
    static_dir: Option<PathBuf>,
}

fn print_json(value: &impl serde::Serialize) {
    println!("{}", serde_json::to_string_pretty(value).expect("output serializes"));
}

fn run(cli: Cli) -> Result<(), CliError> {
    let mut config = ServerConfig::load(cli.config.as_deref())?;
    match cli.command {
        Command::Preprocess(args) => {
            let input = match (args.mix, args.voice, args.instrument) {
                (Some(mix), _, _) => LessonInput::Mix(mix),
                (None, Some(voice), Some(instrument)) => LessonInput::Stems { voice, instrument },
                _ => unreachable!("clap enforces one input mode"),
            };
            if let Some(cmd) = args.separator_cmd {
                let sep = SeparatorConfig {
                    command_template: cmd,
                    ..config.separator.take().unwrap_or_default()
                };
                sep.validate()?;
                config.separator = Some(sep);
            }
            let summary = lessonkit_cli::preprocess(
                &input,
                &args.out,
                args.media.as_deref(),
                &config.analysis,
                config.separator.as_ref(),
            )?;
            eprintln!(
                "{}: {} voice regions, {} instrument regions",
                summary.lesson_id, summary.voice_regions, summary.instrument_regions
            );
            print_json(&summary);
        }
        Command::Score(args) => {
            let report = lessonkit_cli::score_files(&args.reference, &args.recording, &config.analysis)?;
            print_json(&report);
        }
        Command::Eval(args) => {
            let report = lessonkit_cli::evaluate(&args.corpus, args.seed, &config.analysis, config.separator.as_ref())?;
            let out = args.out.unwrap_or_else(|| args.corpus.clone());
            lessonkit_cli::write_report(&report, &out)?;
            eprint!("{}", report.to_table());
            print_json(&report);
        }
        Command::SynthCorpus(args) => {
            if !(args.duration.is_finite() && args.duration > 0.0) {
                return Err(CliError::Invalid(format!("invalid duration {}", args.duration)));
            }
            let written = corpus::write_synthetic_corpus(&args.out, args.count, args.duration, args.seed, args.mix)?;
            eprintln!("wrote {} lessons to {}", written.len(), args.out.display());
            print_json(&written);
        }
        Command::Serve(args) => {
            if let Some(listen) = args.listen {
                config.listen = listen;
            }
            if let Some(storage) = args.storage {
                config.storage_root = storage;
            }
            if args.static_dir.is_some() {
                config.static_dir = args.static_dir;
            }
            let runtime = tokio::runtime::Runtime::new().map_err(|source| CliError::Io {
                path: PathBuf::from("<runtime>"),
                source,
            })?;
            runtime
                .block_on(lessonkit_server::serve(config.clone()))
                .map_err(|source| CliError::Io {
                    path: config.storage_root,
                    source,
                })?;
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let default_level = if matches!(cli.command, Command::Serve(_)) { "info" } else { "warn" };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(default_level)).init();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}
