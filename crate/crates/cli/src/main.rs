//! Operator surface for the description pipeline: slice, generate, inspect.

use std::path::PathBuf;
use std::process::ExitCode;
use std::sync::Mutex;

use clap::{Args, Parser, Subcommand};

use trustdesc_core::config::ServerConfig;
use trustdesc_core::descgen::DescMode;
use trustdesc_core::error::Error;
use trustdesc_core::gateway::{Gateway, GatewayMode, HttpBackend, DEFAULT_MODEL_ID};
use trustdesc_core::pipeline::{self, ExecutorKind, GenerateOutcome, SliceOptions};

const EXIT_USAGE: u8 = 2;
const EXIT_RESOLUTION: u8 = 3;
const EXIT_GATEWAY: u8 = 4;
const EXIT_VERIFY_FAILURES: u8 = 5;

#[derive(Parser)]
#[command(
    name = "trustdesc",
    version,
    about = "Generate implementation-faithful MCP tool descriptions from source code"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct CommonArgs {
    /// Server config file (JSON).
    config: PathBuf,

    /// Tool to process; repeatable. Defaults to every tool the config names
    /// or the registration scan discovers.
    #[arg(long = "tool")]
    tools: Vec<String>,

    /// Model backend mode.
    #[arg(long = "llm", default_value = "replay")]
    llm: String,

    /// Cassette directory for record/replay modes.
    #[arg(long, default_value = "cassettes")]
    cassette_dir: PathBuf,

    /// Model id sent to the backend and recorded in cassette keys.
    #[arg(long, env = "TRUSTDESC_LLM_MODEL", default_value = DEFAULT_MODEL_ID)]
    model: String,

    /// Output directory for artifacts.
    #[arg(long, default_value = "trustdesc-out")]
    out_dir: PathBuf,
}

#[derive(Subcommand)]
enum Command {
    /// Build the (optionally debloated, sanitized) code slice for tools.
    Slice {
        #[command(flatten)]
        common: CommonArgs,
        /// Prune unreachable logic with model-proposed, validated edits.
        #[arg(long)]
        debloat: bool,
        /// Strip comments/docstrings, normalize and filter identifiers.
        #[arg(long)]
        sanitize: bool,
    },
    /// Run the full pipeline and emit structured descriptions.
    Generate {
        #[command(flatten)]
        common: CommonArgs,
        /// Description mode.
        #[arg(long, default_value = "full")]
        mode: String,
        /// Refine the description through execution-based verification.
        #[arg(long)]
        verify: bool,
        /// Task executor for verification; defaults to the llm mode.
        #[arg(long)]
        executor: Option<String>,
        /// Process this many tools concurrently.
        #[arg(long, default_value_t = 1)]
        jobs: usize,
    },
    /// Print entry resolution, graph stats, and slice sizes per tool.
    Inspect {
        #[command(flatten)]
        common: CommonArgs,
    },
}

fn exit_code_for(err: &Error) -> u8 {
    match err {
        Error::Config(_) | Error::EmptyCodebase { .. } | Error::InvalidOperation(_) => EXIT_USAGE,
        Error::NotFound(_)
        | Error::Conflict { .. }
        | Error::UnresolvedHandler { .. }
        | Error::ResolutionFailed { .. } => EXIT_RESOLUTION,
        Error::CassetteMiss { .. } | Error::Backend(_) => EXIT_GATEWAY,
        _ => 1,
    }
}

fn build_gateway(common: &CommonArgs) -> Result<Gateway, Error> {
    let mode: GatewayMode = common.llm.parse().map_err(|e: String| Error::Config(e))?;
    Ok(match mode {
        GatewayMode::Live => Gateway::live(HttpBackend::from_env()?, common.model.clone()),
        GatewayMode::Record => Gateway::record(
            Box::new(HttpBackend::from_env()?),
            &common.cassette_dir,
            common.model.clone(),
        ),
        GatewayMode::Replay => Gateway::replay(&common.cassette_dir, common.model.clone()),
    })
}

fn emit_diagnostics(tool: &str, diagnostics: &[trustdesc_core::diag::Diagnostic]) {
    for d in diagnostics {
        let line = serde_json::json!({
            "tool": tool,
            "kind": d.kind,
            "message": d.message,
            "locus": d.locus,
        });
        eprintln!("{line}");
    }
}

fn run() -> Result<u8, (Error, u8)> {
    let cli = Cli::parse();
    match cli.command {
        Command::Slice {
            common,
            debloat,
            sanitize,
        } => run_slice(common, debloat, sanitize),
        Command::Generate {
            common,
            mode,
            verify,
            executor,
            jobs,
        } => run_generate(common, mode, verify, executor, jobs),
        Command::Inspect { common } => run_inspect(common),
    }
}

type LoadedServer = (
    ServerConfig,
    trustdesc_core::source_model::SourceModel,
    Gateway,
    Vec<String>,
);

fn load(common: &CommonArgs) -> Result<LoadedServer, (Error, u8)> {
    let config = ServerConfig::load(&common.config).map_err(|e| (e, EXIT_USAGE))?;
    let model = pipeline::load_model(&config).map_err(classify)?;
    let gateway = build_gateway(common).map_err(classify)?;
    let tools = if common.tools.is_empty() {
        pipeline::resolve_tools(&config, &model)
    } else {
        common.tools.clone()
    };
    if tools.is_empty() {
        return Err((
            Error::Config("no tools named in config and none discovered".into()),
            EXIT_USAGE,
        ));
    }
    Ok((config, model, gateway, tools))
}

fn classify(e: Error) -> (Error, u8) {
    let code = exit_code_for(&e);
    (e, code)
}

fn run_slice(common: CommonArgs, debloat: bool, sanitize: bool) -> Result<u8, (Error, u8)> {
    let (config, model, gateway, tools) = load(&common)?;
    let options = SliceOptions { debloat, sanitize };
    for tool in &tools {
        let outcome =
            pipeline::slice_tool(&model, &config, tool, &gateway, &options).map_err(classify)?;
        emit_diagnostics(tool, &outcome.diagnostics);
        let written =
            pipeline::write_slice_artifacts(&common.out_dir, tool, &outcome).map_err(classify)?;
        println!(
            "sliced {tool}: entry {} via {}, {} nodes, {} bytes -> {}",
            outcome.entry.entry,
            outcome.entry.pattern,
            outcome.final_graph.nodes.len(),
            outcome.slice.total_bytes,
            written.files[0].display(),
        );
    }
    Ok(0)
}

fn run_generate(
    common: CommonArgs,
    mode: String,
    verify: bool,
    executor: Option<String>,
    jobs: usize,
) -> Result<u8, (Error, u8)> {
    let (config, model, gateway, tools) = load(&common)?;
    let mode: DescMode = mode
        .parse()
        .map_err(|e: String| (Error::Config(e), EXIT_USAGE))?;
    let llm_mode: GatewayMode = common
        .llm
        .parse()
        .map_err(|e: String| (Error::Config(e), EXIT_USAGE))?;
    let executor_kind: ExecutorKind = match executor {
        Some(text) => text
            .parse()
            .map_err(|e: String| (Error::Config(e), EXIT_USAGE))?,
        None => match llm_mode {
            GatewayMode::Replay => ExecutorKind::Replay,
            _ => ExecutorKind::Live,
        },
    };

    let results: Vec<(String, Result<GenerateOutcome, Error>)> = if jobs <= 1 {
        tools
            .iter()
            .map(|tool| {
                (
                    tool.clone(),
                    pipeline::generate_tool(
                        &model,
                        &config,
                        tool,
                        &gateway,
                        mode,
                        verify,
                        executor_kind,
                        Some(&common.cassette_dir),
                        &common.out_dir,
                    ),
                )
            })
            .collect()
    } else {
        let pending = Mutex::new(tools.to_vec());
        let done: Mutex<Vec<(String, Result<GenerateOutcome, Error>)>> = Mutex::new(Vec::new());
        std::thread::scope(|scope| {
            for _ in 0..jobs.min(tools.len()) {
                scope.spawn(|| loop {
                    let Some(tool) = pending.lock().expect("queue").pop() else {
                        break;
                    };
                    let outcome = pipeline::generate_tool(
                        &model,
                        &config,
                        &tool,
                        &gateway,
                        mode,
                        verify,
                        executor_kind,
                        Some(&common.cassette_dir),
                        &common.out_dir,
                    );
                    done.lock().expect("results").push((tool, outcome));
                });
            }
        });
        let mut results = done.into_inner().expect("results");
        results.sort_by(|a, b| {
            let pos = |t: &str| tools.iter().position(|x| x == t).unwrap_or(usize::MAX);
            pos(&a.0).cmp(&pos(&b.0))
        });
        results
    };

    let mut saw_failures = false;
    for (tool, result) in results {
        let outcome = result.map_err(classify)?;
        emit_diagnostics(&tool, &outcome.slice.diagnostics);
        pipeline::write_generate_artifacts(&common.out_dir, &tool, &outcome).map_err(classify)?;
        let verdict_note = match &outcome.report {
            Some(report) if report.any_failures() => {
                saw_failures = true;
                format!(
                    ", verification removed {} failing statement(s)",
                    report
                        .verdicts
                        .iter()
                        .filter(|v| v.outcome == trustdesc_core::dynver::VerdictOutcome::Fail)
                        .count()
                )
            }
            Some(_) => ", verification passed".to_string(),
            None => String::new(),
        };
        println!(
            "generated {tool}: {} mode, {} args{}",
            common_mode_label(mode),
            outcome.description.args.len(),
            verdict_note,
        );
    }
    Ok(if saw_failures {
        EXIT_VERIFY_FAILURES
    } else {
        0
    })
}

fn common_mode_label(mode: DescMode) -> &'static str {
    match mode {
        DescMode::Full => "full",
        DescMode::Lite => "lite",
    }
}

fn run_inspect(common: CommonArgs) -> Result<u8, (Error, u8)> {
    let (config, model, gateway, mut tools) = load(&common)?;
    tools.sort();
    for tool in &tools {
        let report = pipeline::inspect_tool(&model, &config, tool, &gateway, &common.out_dir)
            .map_err(classify)?;
        print!("{report}");
        println!();
    }
    Ok(0)
}

fn main() -> ExitCode {
    match run() {
        Ok(code) => ExitCode::from(code),
        Err((err, code)) => {
            eprintln!("error: {err}");
            ExitCode::from(code)
        }
    }
}
