use std::fs;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand};
use ssr_forge::bench::{
    assemble_dataset, evaluate, parse_predictions, random_baseline, read_manifest, verify_manifest,
    AssembleOptions, Corpus, DatasetConfig, PredictionSet, ScoreMode, ScoreReport,
};
use ssr_forge::frame::{write_png, Fps, FrameSequence};
use ssr_forge::rewards::protocol::serve;
use ssr_forge::rewards::vectors::{golden_vectors, GOLDEN_COUNT, GOLDEN_SEED};
use ssr_forge::synth::{synth_video, SynthSpec};
use ssr_forge::taskgen::{permutation_text, AnswerValue};
use ssr_forge::transcoder::TranscoderConfig;
use ssr_forge::Error;

mod sheet;

#[derive(Parser)]
#[command(name = "ssr-forge", version, about = "Verifiable video pretext tasks: generate, score, verify")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Build a manifest and its videos from a corpus.
    Generate(GenerateArgs),
    /// Score a predictions file against a manifest.
    Evaluate(EvaluateArgs),
    /// Run the random-guess agent and score it.
    Baseline(BaselineArgs),
    /// Re-check every record against its source video.
    Verify(ManifestArgs),
    /// Print one record, optionally with a contact sheet of its frames.
    Inspect(InspectArgs),
    /// Score JSONL requests from stdin, one response line per request.
    Score,
    /// Write procedural videos usable as a corpus.
    SynthCorpus(SynthArgs),
    /// Write the golden scoring vectors.
    TestVectors(VectorArgs),
}

#[derive(Args)]
struct GenerateArgs {
    /// Config file, or the name of a built-in preset (viubench, videossr30k).
    #[arg(long)]
    config: String,
    /// Corpus directory; overrides the config's.
    #[arg(long)]
    corpus: Option<PathBuf>,
    #[arg(long)]
    out: PathBuf,
    #[arg(long)]
    seed: u64,
    /// Worker threads, 0 for all cores.
    #[arg(long, default_value_t = 0)]
    jobs: usize,
    /// Where decoded container videos are cached.
    #[arg(long)]
    cache: Option<PathBuf>,
}

#[derive(Args)]
struct ManifestArgs {
    /// Manifest file or the directory holding manifest.jsonl.
    #[arg(long)]
    manifest: PathBuf,
}

#[derive(Args)]
struct EvaluateArgs {
    #[arg(long)]
    manifest: PathBuf,
    #[arg(long)]
    predictions: PathBuf,
    #[arg(long, default_value = "strict")]
    mode: ScoreMode,
    /// Report directory; defaults to the manifest's.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct BaselineArgs {
    #[arg(long)]
    manifest: PathBuf,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value = "strict")]
    mode: ScoreMode,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct InspectArgs {
    #[arg(long)]
    manifest: PathBuf,
    #[arg(long)]
    record: String,
    /// Write a PNG grid of the frames a model would see.
    #[arg(long)]
    contact_sheet: Option<PathBuf>,
}

#[derive(Args)]
struct SynthArgs {
    #[arg(long)]
    out: PathBuf,
    #[arg(long, default_value_t = 10)]
    count: usize,
    #[arg(long, default_value_t = 30.0)]
    seconds: f64,
    #[arg(long, default_value = "2")]
    fps: Fps,
    #[arg(long, default_value_t = 256)]
    width: u32,
    #[arg(long, default_value_t = 256)]
    height: u32,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

#[derive(Args)]
struct VectorArgs {
    #[arg(long)]
    out: PathBuf,
    #[arg(long, default_value_t = GOLDEN_COUNT)]
    count: usize,
    #[arg(long, default_value_t = GOLDEN_SEED)]
    seed: u64,
}

/// Exit 1 for validation failures, 2 for I/O and configuration errors.
enum Failure {
    Validation(String),
    Setup(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::Io { .. }
            | Error::Json { .. }
            | Error::Config(_)
            | Error::Corpus(_)
            | Error::Transcoder(_)
            | Error::Image { .. }
            | Error::NoFrames(_)
            | Error::VideoTooShort { .. }
            | Error::PlacementFailed { .. } => Failure::Setup(e.to_string()),
            other => Failure::Validation(other.to_string()),
        }
    }
}

fn io_failure(path: &Path, e: io::Error) -> Failure {
    Failure::Setup(format!("{}: {e}", path.display()))
}

type CmdResult = Result<(), Failure>;

fn write_file(path: &Path, text: &str) -> CmdResult {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).map_err(|e| io_failure(dir, e))?;
    }
    fs::write(path, text).map_err(|e| io_failure(path, e))
}

fn load_config(spec: &str) -> Result<DatasetConfig, Failure> {
    let path = Path::new(spec);
    if path.exists() {
        return Ok(DatasetConfig::load(path)?);
    }
    DatasetConfig::preset(spec)
        .ok_or_else(|| Failure::Setup(format!("config {spec}: no such file or preset")))
}

fn cmd_generate(args: GenerateArgs) -> CmdResult {
    let started = Instant::now();
    let mut config = load_config(&args.config)?;
    config.master_seed = args.seed;
    let corpus_dir = args
        .corpus
        .or_else(|| config.corpus.clone())
        .ok_or_else(|| Failure::Setup("no corpus given (--corpus or the config's corpus field)".into()))?;
    if !corpus_dir.is_dir() {
        return Err(Failure::Setup(format!("corpus {} is not a directory", corpus_dir.display())));
    }
    let cache = args.cache.unwrap_or_else(|| args.out.join(".source-frames"));
    let corpus = Corpus::scan(&corpus_dir, config.fps, &TranscoderConfig::from_env(), &cache)?;
    let summary = assemble_dataset(
        &config,
        &corpus,
        &AssembleOptions {
            out_dir: args.out.clone(),
            jobs: args.jobs,
        },
    )?;
    println!("{} records from {} videos -> {}", summary.records, corpus.len(), summary.manifest.display());
    for (cell, n) in &summary.cells {
        println!("  {cell:<28} {n:>6}");
    }
    if summary.retried > 0 {
        println!("  {} records moved to another video after a precondition failure", summary.retried);
    }
    println!("elapsed {:.1}s", started.elapsed().as_secs_f64());
    Ok(())
}

fn report_dir(manifest: &Path, out: Option<PathBuf>) -> PathBuf {
    out.unwrap_or_else(|| {
        let m = ssr_forge::bench::manifest::manifest_path(manifest);
        m.parent().map(Path::to_path_buf).unwrap_or_default()
    })
}

fn write_report(report: &ScoreReport, dir: &Path) -> CmdResult {
    write_file(&dir.join("report.json"), &(report.to_json_pretty() + "\n"))?;
    write_file(&dir.join("report.txt"), &report.to_table())
}

fn cmd_evaluate(args: EvaluateArgs) -> CmdResult {
    let records = read_manifest(&args.manifest)?;
    let text = fs::read_to_string(&args.predictions).map_err(|e| io_failure(&args.predictions, e))?;
    let preds = parse_predictions(&text);
    let report = evaluate(&records, &preds, args.mode);
    for d in &report.diagnostics {
        eprintln!("warning: {d}");
    }
    write_report(&report, &report_dir(&args.manifest, args.out))?;
    print!("{}", report.to_table());
    Ok(())
}

fn cmd_baseline(args: BaselineArgs) -> CmdResult {
    let records = read_manifest(&args.manifest)?;
    let preds = random_baseline(&records, args.seed);
    let dir = report_dir(&args.manifest, args.out);
    let lines: String = preds.iter().map(|p| p.to_json_line() + "\n").collect();
    write_file(&dir.join("baseline_predictions.jsonl"), &lines)?;
    let report = evaluate(&records, &PredictionSet::from_predictions(preds), args.mode);
    write_report(&report, &dir)?;
    println!("random guess, seed {}", args.seed);
    print!("{}", report.to_table());
    Ok(())
}

fn cmd_verify(args: ManifestArgs) -> CmdResult {
    let report = verify_manifest(&args.manifest)?;
    if report.records.is_empty() {
        return Err(Failure::Validation("no records".into()));
    }
    for check in report.failed() {
        println!("FAIL {}", check.record_id);
        for p in &check.problems {
            println!("  {p}");
        }
    }
    println!("{} of {} records pass", report.passed(), report.records.len());
    if report.all_ok() {
        Ok(())
    } else {
        Err(Failure::Validation(format!(
            "{} record(s) failed verification",
            report.records.len() - report.passed()
        )))
    }
}

fn cmd_inspect(args: InspectArgs) -> CmdResult {
    let records = read_manifest(&args.manifest)?;
    let rec = records
        .iter()
        .find(|r| r.id == args.record)
        .ok_or_else(|| Failure::Validation(format!("unknown record id {}", args.record)))?;
    println!("id:       {}", rec.id);
    println!("task:     {} / {}", rec.task, rec.subtype);
    println!("video:    {} @ {} fps", rec.video_dir, rec.fps);
    match &rec.answer {
        AnswerValue::Interval { start, end } => {
            let kind = rec.gen_params.get("kind").and_then(|k| k.as_str()).unwrap_or("?");
            println!("answer:   {start:.3}s - {end:.3}s ({kind})");
        }
        AnswerValue::Counts { values } => println!("answer:   counts {values:?}"),
        AnswerValue::Permutation { order } => {
            println!("answer:   {order:?} = {}", permutation_text(order))
        }
    }
    println!("seed:     {}", rec.seed);
    println!("\nprompt:\n{}\n", rec.prompt);
    println!(
        "gen_params:\n{}",
        serde_json::to_string_pretty(&rec.gen_params).unwrap_or_default()
    );
    if let Some(path) = args.contact_sheet {
        let root = ssr_forge::bench::manifest::manifest_root(&args.manifest);
        let seq = FrameSequence::load_dir(&root.join(&rec.video_dir), Some(rec.fps))?;
        let sheet = sheet::contact_sheet(&seq);
        write_png(&path, &sheet)?;
        println!("contact sheet -> {}", path.display());
    }
    Ok(())
}

fn cmd_score() -> CmdResult {
    let stdin = io::stdin();
    let stdout = io::stdout();
    serve(stdin.lock(), BufWriter::new(stdout.lock())).map_err(|e| Failure::Setup(format!("stdio: {e}")))?;
    Ok(())
}

fn cmd_synth(args: SynthArgs) -> CmdResult {
    let frames = (args.seconds * args.fps.as_f64()).round().max(1.0) as usize;
    for i in 0..args.count {
        let id = format!("synth{i:03}");
        let seq = synth_video(&SynthSpec {
            id: id.clone(),
            width: args.width,
            height: args.height,
            fps: args.fps,
            num_frames: frames,
            seed: args.seed.wrapping_add(i as u64),
        });
        seq.save(&args.out.join(&id))?;
    }
    println!(
        "{} videos of {frames} frames at {} fps -> {}",
        args.count,
        args.fps,
        args.out.display()
    );
    Ok(())
}

fn cmd_vectors(args: VectorArgs) -> CmdResult {
    let mut out = String::new();
    for v in golden_vectors(args.count, args.seed) {
        out += &serde_json::to_string(&v).map_err(|e| Failure::Setup(e.to_string()))?;
        out.push('\n');
    }
    write_file(&args.out, &out)?;
    println!("{} vectors -> {}", args.count, args.out.display());
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Generate(a) => cmd_generate(a),
        Command::Evaluate(a) => cmd_evaluate(a),
        Command::Baseline(a) => cmd_baseline(a),
        Command::Verify(a) => cmd_verify(a),
        Command::Inspect(a) => cmd_inspect(a),
        Command::Score => cmd_score(),
        Command::SynthCorpus(a) => cmd_synth(a),
        Command::TestVectors(a) => cmd_vectors(a),
    };
    let _ = io::stdout().flush();
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Validation(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
        Err(Failure::Setup(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
    }
}
