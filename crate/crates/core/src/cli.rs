//! Command-line front end.
//!
//! Exit status 0 on success, 1 when the input is rejected, 2 when a valid
//! request fails at runtime. Errors go to stderr as
//! `{"error": {"code": .., "message": ..}}`.

use crate::config::parse_search_space;
use crate::llm::{
    collect_samples, HttpTransport, LlmError, RecordTransport, ReplayTransport, SampleBatch,
    SampleOptions, Transport, DEFAULT_MODEL,
};
use crate::objectives::{ExternalCommand, Objective, ObjectiveError, Surrogate, SurrogateParams};
use crate::optimizer::{run_optimization, Algo, OptimizerError, TpeParams};
use crate::prompting::{render_usecase_prompt, PromptError, PromptSpec};
use crate::runner::{emit_reports, run_experiment, ExperimentPlan, RunnerError};
use crate::stats::{build_reports, StatsError, TestKind};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::json;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

pub const EXIT_OK: i32 = 0;
pub const EXIT_INVALID: i32 = 1;
pub const EXIT_RUNTIME: i32 = 2;

#[derive(Debug, Parser)]
#[command(name = "llmhpo", version, about = "LLM-seeded hyperparameter search and response-variability analysis")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Print the chat messages for a use case as JSON
    PromptRender(PromptRenderArgs),
    /// Query the LLM repeatedly and store the replies as a JSONL sample batch
    Suggest(SuggestArgs),
    /// Dispersion of every attribute within one sample batch
    AnalyzeVariability(AnalyzeVariabilityArgs),
    /// Compare two sample batches attribute by attribute
    AnalyzeCompare(AnalyzeCompareArgs),
    /// Run one optimization and write its trial log
    Optimize(OptimizeArgs),
    /// Run every arm of an experiment plan and write the report tree
    ExperimentRun(ExperimentRunArgs),
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Strategy {
    /// Expert persona system prompt plus labeled instruction sections
    ImitationInstruction,
}

#[derive(Debug, Args)]
struct PromptRenderArgs {
    /// Use-case prompt spec (JSON)
    #[arg(long, value_name = "FILE")]
    usecase: PathBuf,
    #[arg(long, value_enum, default_value = "imitation-instruction")]
    strategy: Strategy,
    /// Ask for a search space instead of a single configuration
    #[arg(long)]
    search_space: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum TransportKind {
    /// Chat-completions endpoint from LLMHPO_API_URL with key LLMHPO_API_KEY
    Http,
    /// Stored replies response_NNNN.txt from --replay-dir
    Replay,
    /// HTTP, storing every reply into --replay-dir
    Record,
}

#[derive(Debug, Args)]
struct LlmArgs {
    /// Model name sent with every request
    #[arg(long, value_name = "NAME", default_value = DEFAULT_MODEL)]
    model: String,
    /// Sampling temperature
    #[arg(long, value_name = "T", default_value_t = 0.0)]
    temperature: f64,
}

#[derive(Debug, Args)]
struct SuggestArgs {
    /// Use-case prompt spec (JSON)
    #[arg(long, value_name = "FILE")]
    usecase: PathBuf,
    /// Number of independent queries
    #[arg(short = 'n', value_name = "N")]
    n: usize,
    #[arg(long, value_enum)]
    transport: TransportKind,
    /// Fixture directory for replay and record
    #[arg(long, value_name = "DIR")]
    replay_dir: Option<PathBuf>,
    /// Output sample batch (JSONL)
    #[arg(long, value_name = "FILE")]
    out: PathBuf,
    /// Maximum concurrent requests
    #[arg(long, value_name = "P", default_value_t = 1)]
    parallel: usize,
    #[command(flatten)]
    llm: LlmArgs,
}

#[derive(Debug, Args)]
struct AnalyzeVariabilityArgs {
    /// Sample batch (JSONL)
    #[arg(long, value_name = "FILE")]
    samples: PathBuf,
    /// Output report (JSON)
    #[arg(long, value_name = "FILE")]
    out: PathBuf,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum TestArg {
    Anova,
    Kruskal,
    Both,
}

impl From<TestArg> for TestKind {
    fn from(t: TestArg) -> TestKind {
        match t {
            TestArg::Anova => TestKind::Anova,
            TestArg::Kruskal => TestKind::Kruskal,
            TestArg::Both => TestKind::Both,
        }
    }
}

#[derive(Debug, Args)]
struct AnalyzeCompareArgs {
    /// First sample batch (JSONL)
    #[arg(long, value_name = "FILE")]
    samples_a: PathBuf,
    /// Second sample batch (JSONL)
    #[arg(long, value_name = "FILE")]
    samples_b: PathBuf,
    #[arg(long, value_enum, default_value = "anova")]
    test: TestArg,
    /// Output report (JSON)
    #[arg(long, value_name = "FILE")]
    out: PathBuf,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum ObjectiveArg {
    /// Analytic stand-in for fine-tuning loss
    Surrogate,
    /// Trainer command reading the config on stdin
    External,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum AlgoArg {
    Tpe,
    Random,
}

#[derive(Debug, Args)]
struct OptimizeArgs {
    /// Search space (JSON)
    #[arg(long, value_name = "FILE")]
    space: PathBuf,
    #[arg(long, value_enum)]
    objective: ObjectiveArg,
    /// Trainer command for the external objective, run with sh -c
    #[arg(long, value_name = "C")]
    cmd: Option<String>,
    #[arg(long, value_enum, default_value = "tpe")]
    algo: AlgoArg,
    /// Sampler seed
    #[arg(long, value_name = "K", default_value_t = 0)]
    seed: u64,
    /// Noise seed of the surrogate objective
    #[arg(long, value_name = "S", default_value_t = 0)]
    objective_seed: u64,
    /// Noise bound of the surrogate objective at one epoch
    #[arg(long, value_name = "A", default_value_t = 0.05)]
    noise_amplitude: f64,
    /// Arm label written into the trial log
    #[arg(long, value_name = "NAME", default_value = "optimize")]
    arm: String,
    /// Output trial log (CSV)
    #[arg(long, value_name = "FILE")]
    out: PathBuf,
}

#[derive(Debug, Args)]
struct ExperimentRunArgs {
    /// Experiment plan (JSON)
    #[arg(long, value_name = "FILE")]
    config: PathBuf,
    /// Report directory; overrides the plan's output_dir
    #[arg(long, value_name = "DIR")]
    out_dir: Option<PathBuf>,
    /// LLM transport for llm_suggested and llm_refined arms
    #[arg(long, value_enum)]
    transport: Option<TransportKind>,
    /// Fixture directory for replay and record
    #[arg(long, value_name = "DIR")]
    replay_dir: Option<PathBuf>,
}

#[derive(Debug)]
struct CliError {
    exit: i32,
    code: String,
    message: String,
}

impl CliError {
    fn invalid(code: &str, message: impl Into<String>) -> CliError {
        CliError {
            exit: EXIT_INVALID,
            code: code.to_owned(),
            message: message.into(),
        }
    }

    fn runtime(code: &str, message: impl Into<String>) -> CliError {
        CliError {
            exit: EXIT_RUNTIME,
            code: code.to_owned(),
            message: message.into(),
        }
    }

    fn to_json(&self) -> String {
        json!({"error": {"code": self.code, "message": self.message}}).to_string()
    }
}

impl From<LlmError> for CliError {
    fn from(e: LlmError) -> CliError {
        let invalid = e.is_fatal() || matches!(e, LlmError::MalformedBatch(_));
        let exit = if invalid { EXIT_INVALID } else { EXIT_RUNTIME };
        CliError {
            exit,
            code: e.code().to_owned(),
            message: e.to_string(),
        }
    }
}

impl From<PromptError> for CliError {
    fn from(e: PromptError) -> CliError {
        CliError::invalid(e.code(), e.to_string())
    }
}

impl From<StatsError> for CliError {
    fn from(e: StatsError) -> CliError {
        CliError::invalid(e.code(), e.to_string())
    }
}

impl From<ObjectiveError> for CliError {
    fn from(e: ObjectiveError) -> CliError {
        CliError::runtime(e.code(), e.to_string())
    }
}

impl From<OptimizerError> for CliError {
    fn from(e: OptimizerError) -> CliError {
        match e {
            OptimizerError::ObjectiveFailure { .. } => CliError::runtime(e.code(), e.to_string()),
            _ => CliError::invalid(e.code(), e.to_string()),
        }
    }
}

impl From<RunnerError> for CliError {
    fn from(e: RunnerError) -> CliError {
        if e.is_validation() {
            CliError::invalid(e.code(), e.to_string())
        } else {
            CliError::runtime(e.code(), e.to_string())
        }
    }
}

fn read_input(path: &Path) -> Result<String, CliError> {
    fs::read_to_string(path).map_err(|e| CliError::invalid("IoFailure", format!("{}: {e}", path.display())))
}

/// Writes through a sibling temporary file so a failed write leaves no
/// partial output behind.
fn write_output(path: &Path, contents: &str) -> Result<(), CliError> {
    let fail = |e: std::io::Error| CliError::runtime("IoFailure", format!("{}: {e}", path.display()));
    let file_name = path
        .file_name()
        .ok_or_else(|| CliError::invalid("IoFailure", format!("{}: not a file path", path.display())))?;
    let mut tmp_name = std::ffi::OsString::from(".");
    tmp_name.push(file_name);
    tmp_name.push(".tmp");
    let tmp = path.with_file_name(tmp_name);
    fs::write(&tmp, contents).map_err(fail)?;
    fs::rename(&tmp, path).map_err(|e| {
        let _ = fs::remove_file(&tmp);
        fail(e)
    })
}

fn load_usecase(path: &Path) -> Result<PromptSpec, CliError> {
    Ok(PromptSpec::from_json(&read_input(path)?)?)
}

fn load_batch(path: &Path) -> Result<SampleBatch, CliError> {
    Ok(SampleBatch::from_jsonl(&read_input(path)?)?)
}

fn pretty(value: &impl serde::Serialize) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("report serialization is infallible");
    s.push('\n');
    s
}

fn open_transport(kind: TransportKind, replay_dir: Option<&Path>) -> Result<Box<dyn Transport>, CliError> {
    let dir = || {
        replay_dir.ok_or_else(|| CliError::invalid("UsageError", "--replay-dir is required for this transport"))
    };
    Ok(match kind {
        TransportKind::Http => Box::new(HttpTransport::from_env()?),
        TransportKind::Replay => Box::new(ReplayTransport::from_dir(dir()?)?),
        TransportKind::Record => {
            let dir = dir()?;
            Box::new(RecordTransport::new(HttpTransport::from_env()?, dir)?)
        }
    })
}

fn prompt_render(args: PromptRenderArgs, out: &mut dyn Write) -> Result<(), CliError> {
    let spec = load_usecase(&args.usecase)?;
    let Strategy::ImitationInstruction = args.strategy;
    let spec = if args.search_space { spec.for_search_space() } else { spec };
    let messages = render_usecase_prompt(&spec)?;
    out.write_all(pretty(&messages).as_bytes())
        .map_err(|e| CliError::runtime("IoFailure", e.to_string()))
}

fn suggest(args: SuggestArgs, out: &mut dyn Write) -> Result<(), CliError> {
    let spec = load_usecase(&args.usecase)?;
    if args.n == 0 {
        return Err(CliError::invalid("UsageError", "-n must be at least 1"));
    }
    if args.parallel == 0 {
        return Err(CliError::invalid("UsageError", "--parallel must be at least 1"));
    }
    let options = SampleOptions {
        model_name: args.llm.model,
        temperature: args.llm.temperature,
        parallel: args.parallel,
    };
    let transport = open_transport(args.transport, args.replay_dir.as_deref())?;
    let batch = collect_samples(transport.as_ref(), &spec, args.n, &options)?;
    write_output(&args.out, &batch.to_jsonl())?;
    let summary = json!({
        "samples": batch.samples.len(),
        "parsed": batch.configs().len(),
        "failures": batch.failure_count(),
    });
    writeln!(out, "{summary}").map_err(|e| CliError::runtime("IoFailure", e.to_string()))
}

fn analyze_variability(args: AnalyzeVariabilityArgs) -> Result<(), CliError> {
    let batch = load_batch(&args.samples)?;
    let reports = build_reports(&batch, None, TestKind::Anova)?;
    write_output(&args.out, &pretty(&reports.variability))
}

fn analyze_compare(args: AnalyzeCompareArgs) -> Result<(), CliError> {
    let a = load_batch(&args.samples_a)?;
    let b = load_batch(&args.samples_b)?;
    let reports = build_reports(&a, Some(&b), args.test.into())?;
    write_output(&args.out, &pretty(&reports))
}

fn optimize(args: OptimizeArgs) -> Result<(), CliError> {
    let space = parse_search_space(&read_input(&args.space)?)
        .map_err(|e| CliError::invalid(e.code(), e.to_string()))?
        .value;
    let objective: Box<dyn Objective> = match args.objective {
        ObjectiveArg::Surrogate => {
            if !(args.noise_amplitude >= 0.0 && args.noise_amplitude.is_finite()) {
                return Err(CliError::invalid("UsageError", "--noise-amplitude must be a non-negative number"));
            }
            Box::new(Surrogate(SurrogateParams {
                noise_amplitude: args.noise_amplitude,
                seed: args.objective_seed,
                ..SurrogateParams::default()
            }))
        }
        ObjectiveArg::External => match args.cmd.as_deref().map(str::trim) {
            Some(cmd) if !cmd.is_empty() => Box::new(ExternalCommand(cmd.to_owned())),
            _ => return Err(CliError::invalid("UsageError", "--cmd is required with --objective external")),
        },
    };
    let algo = match args.algo {
        AlgoArg::Tpe => Algo::Tpe,
        AlgoArg::Random => Algo::Random,
    };
    let run = run_optimization(&space, objective.as_ref(), algo, args.seed, &TpeParams::default())?;
    write_output(&args.out, &run.to_csv(&args.arm))
}

fn experiment_run(args: ExperimentRunArgs) -> Result<(), CliError> {
    let plan = ExperimentPlan::from_json(&read_input(&args.config)?)?;
    plan.validate()?;
    let out_dir = args
        .out_dir
        .or_else(|| plan.output_dir.clone())
        .ok_or_else(|| CliError::invalid("UsageError", "--out-dir is required when the plan has no output_dir"))?;
    let transport = args
        .transport
        .map(|kind| open_transport(kind, args.replay_dir.as_deref()))
        .transpose()?;
    let outcome = run_experiment(&plan, transport.as_deref())?;
    emit_reports(&outcome, &out_dir)?;
    Ok(())
}

/// Parses `argv` (program name first) and runs the subcommand, writing to
/// the given streams. Returns the exit status.
pub fn run(argv: &[String], out: &mut dyn Write, err: &mut dyn Write) -> i32 {
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                let _ = write!(out, "{e}");
                return EXIT_OK;
            }
            let error = CliError::invalid("UsageError", e.to_string().trim_end());
            let _ = writeln!(err, "{}", error.to_json());
            return error.exit;
        }
    };
    let result = match cli.command {
        Command::PromptRender(a) => prompt_render(a, out),
        Command::Suggest(a) => suggest(a, out),
        Command::AnalyzeVariability(a) => analyze_variability(a),
        Command::AnalyzeCompare(a) => analyze_compare(a),
        Command::Optimize(a) => optimize(a),
        Command::ExperimentRun(a) => experiment_run(a),
    };
    match result {
        Ok(()) => EXIT_OK,
        Err(e) => {
            let _ = writeln!(err, "{}", e.to_json());
            e.exit
        }
    }
}

/// [`run`] on the process's standard streams.
pub fn dispatch(argv: &[String]) -> i32 {
    let stdout = std::io::stdout();
    let stderr = std::io::stderr();
    run(argv, &mut stdout.lock(), &mut stderr.lock())
}
