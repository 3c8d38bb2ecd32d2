//! `grover`: command-line front end for generation, analysis, simulation,
//! tokenization, benchmarking and scoring.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs;
use std::io::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{anyhow, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use grover_symbolic::analyzer::{analyze_text, render_results, render_trace, round_result};
use grover_symbolic::bench::{self, BenchConfig, Label};
use grover_symbolic::bits::Bitstring;
use grover_symbolic::circuits::Mode;
use grover_symbolic::metrics::{classical_fidelity, search_accuracy, truncate_topk, DEFAULT_TOPK};
use grover_symbolic::qasm::parse_program;
use grover_symbolic::simulator::{simulate, Backend};
use grover_symbolic::tokenizer::{
    build_vocabulary, char_count_baseline, corpus_stats, program_stats, CharCountBaseline,
    QuantumTokenizer, TokenizerOptions,
};
use grover_symbolic::{Distribution, Error};

const EXIT_USAGE: u8 = 1;
const EXIT_INPUT: u8 = 2;
const EXIT_INTERNAL: u8 = 3;

#[derive(Parser)]
#[command(
    name = "grover",
    version,
    about = "Symbolic analysis and simulation of Grover circuits"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Sample Grover circuits and write QASM, labels, traces and a manifest.
    Generate(GenerateArgs),
    /// Recover marked states and the output distribution of a QASM file.
    Analyze(AnalyzeArgs),
    /// Simulate a QASM file exactly.
    Simulate(SimulateArgs),
    /// Quantum-native tokenization of a file, or corpus statistics for a directory.
    Tokenize(TokenizeArgs),
    /// Evaluate and time methods as described by a JSON config.
    Bench(BenchArgs),
    /// Score a predicted distribution against a label.
    Metrics(MetricsArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum ModeArg {
    Full,
    #[value(alias = "oracle-only")]
    OracleOnly,
}

impl From<ModeArg> for Mode {
    fn from(m: ModeArg) -> Self {
        match m {
            ModeArg::Full => Mode::Full,
            ModeArg::OracleOnly => Mode::OracleOnly,
        }
    }
}

#[derive(Args)]
struct GenerateArgs {
    #[arg(long, default_value_t = 2)]
    n_min: usize,
    #[arg(long, default_value_t = 5)]
    n_max: usize,
    #[arg(long, default_value_t = 3)]
    t_max: usize,
    /// Samples per (n, t); default max(100, 2^n), capped.
    #[arg(long)]
    samples: Option<usize>,
    #[arg(long, default_value_t = bench::DEFAULT_SAMPLE_CAP)]
    sample_cap: usize,
    /// Master seed; overrides GROVER_SEED.
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long, value_enum, default_value = "full")]
    mode: ModeArg,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct AnalyzeArgs {
    file: PathBuf,
    #[arg(long)]
    oracle_only: bool,
    /// Print the full reasoning trace.
    #[arg(long, conflicts_with = "json")]
    trace: bool,
    /// Print the trace as JSON.
    #[arg(long)]
    json: bool,
}

#[derive(Clone, Copy, ValueEnum)]
enum BackendArg {
    Sv,
    Unitary,
    Dm,
}

impl From<BackendArg> for Backend {
    fn from(b: BackendArg) -> Self {
        match b {
            BackendArg::Sv => Backend::Sv,
            BackendArg::Unitary => Backend::Unitary,
            BackendArg::Dm => Backend::Dm,
        }
    }
}

#[derive(Args)]
struct SimulateArgs {
    file: PathBuf,
    #[arg(long, value_enum, default_value = "sv")]
    method: BackendArg,
    /// Print the full distribution as JSON.
    #[arg(long)]
    json: bool,
}

#[derive(Args)]
struct TokenizeArgs {
    /// A QASM file, or a directory searched recursively for `.qasm` files.
    path: PathBuf,
    /// Write the vocabulary as JSON to this path.
    #[arg(long)]
    vocab: Option<PathBuf>,
    /// Print length statistics instead of tokens.
    #[arg(long)]
    stats: bool,
    /// Keep numeric suffixes of internal names.
    #[arg(long)]
    preserve_indices: bool,
}

#[derive(Args)]
struct BenchArgs {
    #[arg(long)]
    config: PathBuf,
    #[arg(long)]
    csv: PathBuf,
    /// Also write the report as JSON.
    #[arg(long)]
    json: Option<PathBuf>,
}

#[derive(Args)]
struct MetricsArgs {
    /// Distribution JSON, or any JSON object with a `results` or
    /// `distribution` field holding one.
    #[arg(long)]
    pred: PathBuf,
    /// Label JSON as written by `generate`.
    #[arg(long)]
    truth: PathBuf,
    #[arg(long, default_value_t = 0.3)]
    tau: f64,
}

fn read(path: &Path) -> Result<String> {
    fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))
}

fn generate(args: GenerateArgs, out: &mut String) -> Result<()> {
    let seed = match args.seed {
        Some(s) => s,
        None => bench::seed_from_env(bench::DEFAULT_SEED)?,
    };
    let config = BenchConfig {
        n_min: args.n_min,
        n_max: args.n_max,
        t_max: args.t_max,
        samples: args.samples,
        sample_cap: args.sample_cap,
        seed,
        mode: args.mode.into(),
        ..BenchConfig::default()
    };
    let manifest = bench::generate_dataset(&config, &args.out)?;
    writeln!(
        out,
        "wrote {} circuits ({} artifacts) to {}",
        manifest.items,
        manifest.artifacts.len(),
        args.out.display()
    )?;
    Ok(())
}

fn analyze(args: AnalyzeArgs, out: &mut String) -> Result<()> {
    let mode = if args.oracle_only {
        Mode::OracleOnly
    } else {
        Mode::Full
    };
    let trace = analyze_text(&read(&args.file)?, mode)?;
    if args.json {
        writeln!(out, "{}", serde_json::to_string_pretty(&trace.to_json())?)?;
    } else if args.trace {
        out.push_str(&render_trace(&trace));
    } else {
        for state in &trace.marked {
            writeln!(out, "{state}")?;
        }
        writeln!(out, "{}", render_results(&trace.results))?;
    }
    Ok(())
}

fn simulate_cmd(args: SimulateArgs, out: &mut String) -> Result<()> {
    let program = parse_program(&read(&args.file)?)?;
    let dist: Distribution<f64> = simulate(&program, args.method.into())?;
    if args.json {
        writeln!(out, "{}", serde_json::to_string_pretty(&dist)?)?;
    } else {
        let rounded = Distribution::from_entries(
            dist.n(),
            dist.iter().map(|(s, p)| (s, round_result(p))),
            false,
        );
        writeln!(
            out,
            "{}",
            render_results(&truncate_topk(&rounded, DEFAULT_TOPK))
        )?;
    }
    Ok(())
}

fn qasm_files(dir: &Path, out: &mut Vec<PathBuf>) -> Result<()> {
    let mut entries: Vec<_> = fs::read_dir(dir)
        .with_context(|| format!("reading {}", dir.display()))?
        .collect::<Result<_, _>>()?;
    entries.sort_by_key(|e| e.path());
    for entry in entries {
        let path = entry.path();
        if path.is_dir() {
            qasm_files(&path, out)?;
        } else if path.extension().is_some_and(|e| e == "qasm") {
            out.push(path);
        }
    }
    Ok(())
}

/// Register width, or the oracle arity for oracle-only programs.
fn program_width(text: &str, path: &Path) -> Result<usize> {
    let program = parse_program(text).with_context(|| format!("parsing {}", path.display()))?;
    program
        .num_qubits()
        .or_else(|| program.gate_defs.last().map(|d| d.arity()))
        .ok_or_else(|| anyhow!("{}: cannot determine qubit count", path.display()))
}

fn tokenize(args: TokenizeArgs, out: &mut String) -> Result<()> {
    let tokenizer = QuantumTokenizer::new(TokenizerOptions {
        preserve_indices: args.preserve_indices,
    });
    if args.path.is_dir() {
        let mut files = Vec::new();
        qasm_files(&args.path, &mut files)?;
        let mut corpus: BTreeMap<usize, Vec<String>> = BTreeMap::new();
        for path in &files {
            let text = read(path)?;
            corpus
                .entry(program_width(&text, path)?)
                .or_default()
                .push(text);
        }
        if let Some(vocab_path) = &args.vocab {
            let lists = corpus
                .values()
                .flatten()
                .map(|text| tokenizer.tokenize_program(text))
                .collect::<Result<Vec<_>, _>>()?;
            write_vocab(vocab_path, &build_vocabulary(&lists))?;
        }
        let stats = corpus_stats(&corpus, &CharCountBaseline, &tokenizer)?;
        let mut buf = Vec::new();
        stats.write_csv(&mut buf)?;
        out.push_str(&String::from_utf8(buf)?);
        return Ok(());
    }

    let text = read(&args.path)?;
    let tokens = tokenizer.tokenize_program(&text)?;
    if let Some(vocab_path) = &args.vocab {
        write_vocab(vocab_path, &build_vocabulary(std::slice::from_ref(&tokens)))?;
    }
    if args.stats {
        let stats = program_stats(&text, &CharCountBaseline, &tokenizer)?;
        writeln!(out, "base_length: {}", char_count_baseline(&text))?;
        writeln!(out, "quantum_length: {}", tokens.len())?;
        writeln!(out, "compression_ratio: {:.6}", stats.compression_ratio())?;
        writeln!(
            out,
            "sequence_reduction_ratio: {:.6}",
            stats.sequence_reduction_ratio()
        )?;
    } else {
        for token in &tokens {
            writeln!(out, "{}", token.as_str())?;
        }
    }
    Ok(())
}

fn write_vocab(path: &Path, vocab: &grover_symbolic::tokenizer::Vocabulary) -> Result<()> {
    let text = serde_json::to_string_pretty(vocab)?;
    fs::write(path, text + "\n").with_context(|| format!("writing {}", path.display()))
}

fn bench_cmd(args: BenchArgs, out: &mut String) -> Result<()> {
    let config = BenchConfig::load(&args.config)?.with_env_seed()?;
    let report = bench::run_bench(&config)?;
    bench::emit_report(&report, &args.csv, args.json.as_deref())?;
    for ev in &report.evaluations {
        for f in &ev.failures {
            eprintln!("{} failed on {}: {}", f.method, f.id, f.message);
        }
    }
    writeln!(
        out,
        "wrote {} report rows to {}",
        report.rows().len(),
        args.csv.display()
    )?;
    Ok(())
}

fn load_distribution(path: &Path) -> Result<Distribution<f64>> {
    let value: serde_json::Value = serde_json::from_str(&read(path)?)
        .with_context(|| format!("parsing {}", path.display()))?;
    let inner = ["results", "distribution"]
        .iter()
        .find_map(|k| value.get(*k).cloned())
        .unwrap_or(value);
    let dist: Distribution<f64> = serde_json::from_value(inner)
        .with_context(|| format!("{}: not a distribution", path.display()))?;
    Ok(dist)
}

fn metrics_cmd(args: MetricsArgs, out: &mut String) -> Result<()> {
    let pred = load_distribution(&args.pred)?;
    let label: Label = serde_json::from_str(&read(&args.truth)?)
        .with_context(|| format!("{}: not a label", args.truth.display()))?;
    let marked: Vec<Bitstring> = label.marked.clone();
    let sa = search_accuracy(&pred, &marked, args.tau)?;
    let cf = classical_fidelity(&pred, &label.distribution)?;
    writeln!(
        out,
        "{}",
        serde_json::json!({ "sa": sa, "cf": cf, "tau": args.tau })
    )?;
    Ok(())
}

fn run(cli: Cli) -> Result<String> {
    let mut out = String::new();
    match cli.command {
        Command::Generate(a) => generate(a, &mut out),
        Command::Analyze(a) => analyze(a, &mut out),
        Command::Simulate(a) => simulate_cmd(a, &mut out),
        Command::Tokenize(a) => tokenize(a, &mut out),
        Command::Bench(a) => bench_cmd(a, &mut out),
        Command::Metrics(a) => metrics_cmd(a, &mut out),
    }?;
    Ok(out)
}

/// Writes `text` to stdout; a closed pipe is not an error.
fn emit(text: &str) -> std::io::Result<()> {
    let mut stdout = std::io::stdout().lock();
    match stdout
        .write_all(text.as_bytes())
        .and_then(|()| stdout.flush())
    {
        Err(e) if e.kind() == std::io::ErrorKind::BrokenPipe => Ok(()),
        other => other,
    }
}

/// 3 for internal failures, 2 for anything traceable to the input.
fn exit_code(err: &anyhow::Error) -> u8 {
    for cause in err.chain() {
        if let Some(e) = cause.downcast_ref::<Error>() {
            return if e.is_input_error() {
                EXIT_INPUT
            } else {
                EXIT_INTERNAL
            };
        }
        if let Some(e) = cause.downcast_ref::<bench::BenchError>() {
            return if e.is_input_error() {
                EXIT_INPUT
            } else {
                EXIT_INTERNAL
            };
        }
    }
    EXIT_INPUT
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match std::panic::catch_unwind(|| run(cli)) {
        Ok(Ok(text)) => match emit(&text) {
            Ok(()) => ExitCode::SUCCESS,
            Err(e) => {
                eprintln!("error: writing output: {e}");
                ExitCode::from(EXIT_INTERNAL)
            }
        },
        Ok(Err(err)) => {
            eprintln!("error: {err:#}");
            ExitCode::from(exit_code(&err))
        }
        Err(_) => ExitCode::from(EXIT_INTERNAL),
    }
}
