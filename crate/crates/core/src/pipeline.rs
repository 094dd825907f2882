//! End-to-end orchestration per tool: source model, entry resolution, call
//! graph, optional debloating and sanitization, description generation,
//! optional dynamic verification, and deterministic artifact output.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use serde::Serialize;
use serde_json::json;

use crate::call_graph::{build_call_graph, emit_slice, CallGraph, CodeSlice};
use crate::config::ServerConfig;
use crate::debloater::debloat_graph;
use crate::descgen::{generate_description, slice_hash, DescMode, ToolDescription};
use crate::diag::Diagnostic;
use crate::dynver::{
    run_verification, LiveExecutor, ReplayExecutor, TaskExecutor, VerificationReport,
};
use crate::entry_finder::{exposed_params, find_entry, EntryResolution, ExposedParam};
use crate::error::{Error, Result};
use crate::gateway::{Gateway, ToolScopedGateway};
use crate::sanitizer::{sanitize_slice, RenameMap};
use crate::source_model::{parse_codebase, SourceModel};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExecutorKind {
    Live,
    Replay,
}

impl std::str::FromStr for ExecutorKind {
    type Err = String;
    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "live" => Ok(ExecutorKind::Live),
            "replay" => Ok(ExecutorKind::Replay),
            other => Err(format!("unknown executor: {other} (expected live|replay)")),
        }
    }
}

#[derive(Debug, Clone)]
pub struct SliceOptions {
    pub debloat: bool,
    pub sanitize: bool,
}

pub struct SliceOutcome {
    pub entry: EntryResolution,
    pub exposed: Vec<ExposedParam>,
    pub initial_graph: CallGraph,
    pub final_graph: CallGraph,
    pub initial_slice: CodeSlice,
    pub slice: CodeSlice,
    pub renames: RenameMap,
    pub diagnostics: Vec<Diagnostic>,
}

pub struct GenerateOutcome {
    pub slice: SliceOutcome,
    pub description: ToolDescription,
    pub report: Option<VerificationReport>,
}

pub fn load_model(config: &ServerConfig) -> Result<SourceModel> {
    parse_codebase(&config.root, config.language, &config.ignore)
}

/// The tool list: explicit when configured, otherwise every registration
/// discovered in the codebase.
pub fn resolve_tools(config: &ServerConfig, model: &SourceModel) -> Vec<String> {
    match &config.tools {
        Some(tools) => tools.clone(),
        None => crate::entry_finder::discover_tools(model, &config.registration_aliases)
            .into_iter()
            .map(|(name, _)| name)
            .collect(),
    }
}

/// Stage 1: entry resolution, call graph, optional debloating/sanitization.
pub fn slice_tool(
    model: &SourceModel,
    config: &ServerConfig,
    tool: &str,
    gateway: &Gateway,
    options: &SliceOptions,
) -> Result<SliceOutcome> {
    let scoped = ToolScopedGateway::new(gateway, format!("{}/{tool}", config.name));
    let mut diagnostics = Vec::new();
    let entry = find_entry(
        model,
        tool,
        &config.registration_aliases,
        &scoped,
        gateway.model(),
        &mut diagnostics,
    )?;
    let exposed = exposed_params(model, &entry);
    let initial_graph = build_call_graph(model, &entry.entry)?;
    let initial_slice = emit_slice(&initial_graph, tool);

    let final_graph = if options.debloat {
        debloat_graph(
            &initial_graph,
            model,
            &exposed,
            &scoped,
            gateway.model(),
            &mut diagnostics,
        )?
    } else {
        initial_graph.clone()
    };

    let raw_slice = emit_slice(&final_graph, tool);
    let (slice, renames) = if options.sanitize {
        sanitize_slice(&raw_slice, &scoped, gateway.model(), &mut diagnostics)?
    } else {
        (raw_slice, RenameMap::default())
    };

    Ok(SliceOutcome {
        entry,
        exposed,
        initial_graph,
        final_graph,
        initial_slice,
        slice,
        renames,
        diagnostics,
    })
}

/// Prepare the verification sandbox: a scratch working directory seeded with
/// the config's setup files.
fn prepare_sandbox(config: &ServerConfig, out_dir: &Path, tool: &str) -> Result<PathBuf> {
    let sandbox = out_dir.join(".sandbox").join(safe_file_stem(tool));
    if sandbox.exists() {
        std::fs::remove_dir_all(&sandbox)?;
    }
    std::fs::create_dir_all(&sandbox)?;
    for f in &config.setup_files {
        let dest = sandbox.join(&f.dest);
        if let Some(parent) = dest.parent() {
            std::fs::create_dir_all(parent)?;
        }
        std::fs::copy(&f.source, &dest)?;
    }
    Ok(sandbox)
}

/// Stage 2: full pipeline through description generation, with optional
/// dynamic verification.
#[allow(clippy::too_many_arguments)]
pub fn generate_tool(
    model: &SourceModel,
    config: &ServerConfig,
    tool: &str,
    gateway: &Gateway,
    mode: DescMode,
    verify: bool,
    executor_kind: ExecutorKind,
    cassette_dir: Option<&Path>,
    out_dir: &Path,
) -> Result<GenerateOutcome> {
    let options = SliceOptions {
        debloat: true,
        sanitize: true,
    };
    let mut slice_outcome = slice_tool(model, config, tool, gateway, &options)?;
    let scoped = ToolScopedGateway::new(gateway, format!("{}/{tool}", config.name));
    let mut description = generate_description(
        &slice_outcome.slice,
        tool,
        mode,
        &slice_outcome.exposed,
        &scoped,
        gateway.model(),
        &mut slice_outcome.diagnostics,
    )?;

    let report = if verify {
        let mut executor: Box<dyn TaskExecutor> = match executor_kind {
            ExecutorKind::Replay => {
                let dir = cassette_dir.ok_or_else(|| {
                    Error::Config("replay executor requires a cassette directory".into())
                })?;
                let script = dir.join(&config.name).join(tool).join("executor.json");
                Box::new(ReplayExecutor::from_file(&script, true)?)
            }
            ExecutorKind::Live => {
                let mut launch = config.launch.clone().ok_or_else(|| {
                    Error::Config(format!(
                        "server '{}' has no launch command; cannot verify live",
                        config.name
                    ))
                })?;
                let sandbox = prepare_sandbox(config, out_dir, tool)?;
                launch.cwd = Some(sandbox);
                Box::new(LiveExecutor::new(&launch, &scoped, gateway.model())?)
            }
        };
        let report = run_verification(
            &description,
            &scoped,
            gateway.model(),
            executor.as_mut(),
            &mut slice_outcome.diagnostics,
        )?;
        description = report.refined.clone();
        Some(report)
    } else {
        None
    };

    Ok(GenerateOutcome {
        slice: slice_outcome,
        description,
        report,
    })
}

/// JSON with sorted keys and a trailing newline, for golden-file testing.
pub fn canonical_json<T: Serialize>(value: &T) -> Result<String> {
    let value = serde_json::to_value(value)?;
    let mut text = serde_json::to_string_pretty(&value)?;
    text.push('\n');
    Ok(text)
}

/// Artifact file stem for a tool name. Tool names come from analyzed
/// codebases, so anything that could traverse out of the output directory is
/// neutralized.
fn safe_file_stem(tool: &str) -> String {
    let cleaned: String = tool
        .chars()
        .map(|c| {
            if c.is_ascii_alphanumeric() || matches!(c, '-' | '_' | '.') {
                c
            } else {
                '_'
            }
        })
        .collect();
    let trimmed = cleaned.trim_start_matches('.');
    if trimmed.is_empty() {
        "_tool".to_string()
    } else {
        trimmed.replace("..", "_")
    }
}

pub struct WrittenArtifacts {
    pub files: Vec<PathBuf>,
}

/// Write slice artifacts: `<tool>.slice.txt`, `<tool>.graph.json`, and the
/// rename audit.
pub fn write_slice_artifacts(
    out_dir: &Path,
    tool: &str,
    outcome: &SliceOutcome,
) -> Result<WrittenArtifacts> {
    std::fs::create_dir_all(out_dir)?;
    let stem = safe_file_stem(tool);
    let mut files = Vec::new();

    let slice_path = out_dir.join(format!("{stem}.slice.txt"));
    std::fs::write(&slice_path, outcome.slice.text())?;
    files.push(slice_path);

    let graph_path = out_dir.join(format!("{stem}.graph.json"));
    std::fs::write(&graph_path, canonical_json(&outcome.final_graph.to_json())?)?;
    files.push(graph_path);

    let dot_path = out_dir.join(format!("{stem}.graph.dot"));
    std::fs::write(&dot_path, outcome.final_graph.to_dot())?;
    files.push(dot_path);

    let renames_path = out_dir.join(format!("{stem}.renames.json"));
    std::fs::write(&renames_path, canonical_json(&outcome.renames)?)?;
    files.push(renames_path);

    Ok(WrittenArtifacts { files })
}

/// Write description artifacts and refresh the manifest.
pub fn write_generate_artifacts(
    out_dir: &Path,
    tool: &str,
    outcome: &GenerateOutcome,
) -> Result<WrittenArtifacts> {
    let mut written = write_slice_artifacts(out_dir, tool, &outcome.slice)?;
    let stem = safe_file_stem(tool);

    let desc_path = out_dir.join(format!("{stem}.trustdesc.json"));
    std::fs::write(&desc_path, canonical_json(&outcome.description)?)?;
    written.files.push(desc_path);

    if let Some(report) = &outcome.report {
        let report_path = out_dir.join(format!("{stem}.verify.json"));
        std::fs::write(&report_path, canonical_json(report)?)?;
        written.files.push(report_path);
    }

    update_manifest(out_dir, tool, outcome)?;
    written.files.push(out_dir.join("trustdesc.manifest.json"));
    Ok(written)
}

/// The manifest lists every generated tool with its slice hash so consumers
/// can invalidate caches; entries upsert deterministically.
fn update_manifest(out_dir: &Path, tool: &str, outcome: &GenerateOutcome) -> Result<()> {
    let path = out_dir.join("trustdesc.manifest.json");
    let mut tools: BTreeMap<String, serde_json::Value> = if path.exists() {
        let text = std::fs::read_to_string(&path)?;
        serde_json::from_str::<serde_json::Value>(&text)
            .ok()
            .and_then(|v| {
                v.get("tools")
                    .and_then(|t| serde_json::from_value(t.clone()).ok())
            })
            .unwrap_or_default()
    } else {
        BTreeMap::new()
    };
    let stem = safe_file_stem(tool);
    tools.insert(
        tool.to_string(),
        json!({
            "description_file": format!("{stem}.trustdesc.json"),
            "slice_hash": slice_hash(&outcome.slice.slice),
            "mode": outcome.description.mode,
            "verified": outcome.report.is_some(),
        }),
    );
    let manifest = json!({
        "protocol_version": crate::mcp::PROTOCOL_VERSION,
        "prompt_version": crate::gateway::prompts::PROMPT_VERSION,
        "tools": tools,
    });
    std::fs::write(&path, canonical_json(&manifest)?)?;
    Ok(())
}

/// Human-readable `inspect` report for one tool: entry resolution, graph
/// stats, slice sizes, and the generated-vs-original description diff when a
/// generated artifact exists and the server is launchable.
pub fn inspect_tool(
    model: &SourceModel,
    config: &ServerConfig,
    tool: &str,
    gateway: &Gateway,
    out_dir: &Path,
) -> Result<String> {
    let options = SliceOptions {
        debloat: true,
        sanitize: true,
    };
    let outcome = slice_tool(model, config, tool, gateway, &options)?;
    let mut out = String::new();
    out.push_str(&format!("== {tool} ==\n"));
    out.push_str(&format!(
        "entry: {} (pattern: {}, evidence: {})\n",
        outcome.entry.entry,
        outcome.entry.pattern,
        outcome.entry.evidence.locus()
    ));
    out.push_str(&format!(
        "graph: {} nodes, {} edges ({} nodes after debloating)\n",
        outcome.initial_graph.nodes.len(),
        outcome.initial_graph.edges.len(),
        outcome.final_graph.nodes.len(),
    ));
    out.push_str(&format!(
        "slice bytes: {} initial, {} after debloat+sanitize\n",
        outcome.initial_slice.total_bytes, outcome.slice.total_bytes,
    ));
    if !outcome.renames.entries.is_empty() {
        out.push_str(&format!("renames: {}\n", outcome.renames.entries.len()));
    }
    for d in &outcome.diagnostics {
        out.push_str(&format!("diagnostic[{}]: {}\n", d.kind, d.message));
    }

    // generated side of the diff, from a previous generate run
    let stem = safe_file_stem(tool);
    let desc_path = out_dir.join(format!("{stem}.trustdesc.json"));
    match std::fs::read_to_string(&desc_path)
        .ok()
        .and_then(|text| serde_json::from_str::<crate::descgen::ToolDescription>(&text).ok())
    {
        Some(desc) => out.push_str(&format!("generated summary: {:?}\n", desc.summary)),
        None => out.push_str(&format!(
            "generated summary: none (run `generate` to produce {})\n",
            desc_path.display()
        )),
    }

    // original description diff requires a launchable server
    match &config.launch {
        Some(launch) => match crate::mcp::launch_and_initialize(launch) {
            Ok(mut handle) => {
                if let Ok(tools) = handle.list_tools() {
                    if let Some(info) = tools.iter().find(|t| t.name == tool) {
                        out.push_str(&format!("original description: {:?}\n", info.description));
                    } else {
                        out.push_str("original description: tool not advertised by server\n");
                    }
                }
                let _ = handle.shutdown();
            }
            Err(e) => {
                out.push_str(&format!(
                    "original description: unavailable (server launch failed: {e})\n"
                ));
            }
        },
        None => {
            out.push_str("original description: unavailable (server not launchable)\n");
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests;
