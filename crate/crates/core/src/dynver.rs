//! Dynamic verification: decompose a description into statements, synthesize
//! one checking task per verifiable statement, execute against the real tool,
//! judge each outcome from the logs, and refine the description. Failed
//! claims are removed; passes and inconclusives survive verbatim.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use serde_json::json;

use crate::descgen::ToolDescription;
use crate::diag::Diagnostic;
use crate::error::{Error, Result};
use crate::gateway::{prompts, LlmGateway, LlmPurpose, LlmRequest};
use crate::mcp::{ServerHandle, ServerLaunch, ToolCallRecord};

/// Call attempts the live executor may spend per task.
const MAX_CALL_ATTEMPTS: usize = 3;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum StatementSource {
    Summary { sentence: usize },
    Functionality { index: usize },
    ArgDescription { arg: String },
    ArgConstraint { arg: String, index: usize },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Statement {
    pub id: String,
    pub text: String,
    pub source: StatementSource,
    pub verifiable: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub discard_reason: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct VerificationTask {
    pub statement_id: String,
    pub instruction: String,
    pub expected_observable: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum VerdictOutcome {
    Pass,
    Fail,
    Inconclusive,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConstraintSuggestion {
    pub arg: String,
    pub text: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Verdict {
    pub statement_id: String,
    pub outcome: VerdictOutcome,
    pub rationale: String,
    /// Indices into the task's execution log; nonempty whenever outcome=fail.
    pub evidence: Vec<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub constraint: Option<ConstraintSuggestion>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ReportIdentifiers {
    pub protocol_version: String,
    pub generator_model: String,
    pub prompt_version: String,
    /// `live-single-shot` (one proposed call per attempt, no agent loop) or
    /// `replay`.
    pub executor: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerificationReport {
    pub tool_name: String,
    pub statements: Vec<Statement>,
    pub tasks: Vec<VerificationTask>,
    /// Execution logs keyed by statement id.
    pub logs: BTreeMap<String, Vec<ToolCallRecord>>,
    pub verdicts: Vec<Verdict>,
    pub inconclusive_statement_ids: Vec<String>,
    pub initial: ToolDescription,
    pub refined: ToolDescription,
    pub identifiers: ReportIdentifiers,
}

impl VerificationReport {
    pub fn any_failures(&self) -> bool {
        self.verdicts
            .iter()
            .any(|v| v.outcome == VerdictOutcome::Fail)
    }
}

/// Deterministic sentence split on `.`, `!`, `?` followed by whitespace/EOL.
pub fn split_sentences(text: &str) -> Vec<String> {
    let mut out = Vec::new();
    let mut current = String::new();
    let chars: Vec<char> = text.chars().collect();
    for (i, c) in chars.iter().enumerate() {
        current.push(*c);
        if matches!(c, '.' | '!' | '?') {
            let next = chars.get(i + 1);
            if next.is_none() || next.map(|n| n.is_whitespace()).unwrap_or(false) {
                let s = current.trim().to_string();
                if !s.is_empty() {
                    out.push(s);
                }
                current.clear();
            }
        }
    }
    let tail = current.trim().to_string();
    if !tail.is_empty() {
        out.push(tail);
    }
    out
}

fn seed_statements(desc: &ToolDescription) -> Vec<Statement> {
    let mut out = Vec::new();
    for (i, sentence) in split_sentences(&desc.summary).into_iter().enumerate() {
        out.push(Statement {
            id: format!("sum-{i}"),
            text: sentence,
            source: StatementSource::Summary { sentence: i },
            verifiable: true,
            discard_reason: None,
        });
    }
    if let Some(functionalities) = &desc.functionalities {
        for (i, text) in functionalities.iter().enumerate() {
            out.push(Statement {
                id: format!("fun-{i}"),
                text: text.clone(),
                source: StatementSource::Functionality { index: i },
                verifiable: true,
                discard_reason: None,
            });
        }
    }
    for arg in &desc.args {
        if !arg.description.trim().is_empty() {
            out.push(Statement {
                id: format!("arg-{}-desc", arg.name),
                text: arg.description.clone(),
                source: StatementSource::ArgDescription {
                    arg: arg.name.clone(),
                },
                verifiable: true,
                discard_reason: None,
            });
        }
        for (i, c) in arg.constraints.iter().enumerate() {
            out.push(Statement {
                id: format!("arg-{}-con-{i}", arg.name),
                text: c.clone(),
                source: StatementSource::ArgConstraint {
                    arg: arg.name.clone(),
                    index: i,
                },
                verifiable: true,
                discard_reason: None,
            });
        }
    }
    out
}

#[derive(Debug, Deserialize)]
struct WireTriage {
    statements: Vec<WireTriageItem>,
}

#[derive(Debug, Deserialize)]
struct WireTriageItem {
    id: String,
    verifiable: bool,
    #[serde(default)]
    discard_reason: Option<String>,
}

/// Decompose the description into statements and have the model mark which
/// are verifiable through execution. A gateway failure leaves every statement
/// unverifiable (nothing is refined) rather than aborting the pipeline.
pub fn extract_statements(
    desc: &ToolDescription,
    llm: &dyn LlmGateway,
    model_id: &str,
    diagnostics: &mut Vec<Diagnostic>,
) -> Vec<Statement> {
    let mut statements = seed_statements(desc);
    if statements.is_empty() {
        return statements;
    }
    let listing = serde_json::to_string_pretty(
        &statements
            .iter()
            .map(|s| json!({"id": s.id, "text": s.text, "source": s.source}))
            .collect::<Vec<_>>(),
    )
    .expect("statements serialize");
    let prompt = prompts::stmt_extract(&desc.tool_name, &listing);
    let req = LlmRequest::new(
        LlmPurpose::StmtExtract,
        prompt.system,
        prompt.user,
        prompts::stmt_extract_schema(),
        model_id,
    );
    let completion = match llm.complete(&req) {
        Ok(c) => c,
        Err(e) => {
            diagnostics.push(Diagnostic::new(
                "stmt-extract-unavailable",
                format!("verifiability triage failed; continuing without refinement: {e}"),
            ));
            for s in &mut statements {
                s.verifiable = false;
                s.discard_reason = Some("verifiability unknown: triage unavailable".into());
            }
            return statements;
        }
    };
    match serde_json::from_str::<WireTriage>(&completion.text) {
        Ok(wire) => {
            let by_id: BTreeMap<&str, &WireTriageItem> =
                wire.statements.iter().map(|i| (i.id.as_str(), i)).collect();
            for s in &mut statements {
                if let Some(item) = by_id.get(s.id.as_str()) {
                    s.verifiable = item.verifiable;
                    if !item.verifiable {
                        s.discard_reason = Some(
                            item.discard_reason
                                .clone()
                                .unwrap_or_else(|| "not verifiable at runtime".into()),
                        );
                    }
                }
            }
        }
        Err(e) => {
            diagnostics.push(Diagnostic::new(
                "stmt-extract-unparsable",
                format!("triage answer ignored; treating all statements as verifiable: {e}"),
            ));
        }
    }
    statements
}

/// Synthesize the single checking task for one verifiable statement. Returns
/// `None` (statement becomes inconclusive) when the gateway fails.
pub fn synthesize_task(
    stmt: &Statement,
    desc: &ToolDescription,
    llm: &dyn LlmGateway,
    model_id: &str,
    diagnostics: &mut Vec<Diagnostic>,
) -> Option<VerificationTask> {
    let desc_json = serde_json::to_string_pretty(desc).ok()?;
    let prompt = prompts::task_synth(&desc.tool_name, &desc_json, &stmt.id, &stmt.text);
    let req = LlmRequest::new(
        LlmPurpose::TaskSynth,
        prompt.system,
        prompt.user,
        prompts::task_synth_schema(),
        model_id,
    );
    let completion = match llm.complete(&req) {
        Ok(c) => c,
        Err(e) => {
            diagnostics.push(Diagnostic::new(
                "task-synth-unavailable",
                format!("{}: {e}", stmt.id),
            ));
            return None;
        }
    };
    #[derive(Deserialize)]
    struct WireTask {
        instruction: String,
        expected_observable: String,
    }
    match serde_json::from_str::<WireTask>(&completion.text) {
        Ok(w) => Some(VerificationTask {
            statement_id: stmt.id.clone(),
            instruction: w.instruction,
            expected_observable: w.expected_observable,
        }),
        Err(e) => {
            diagnostics.push(Diagnostic::new(
                "task-synth-unparsable",
                format!("{}: {e}", stmt.id),
            ));
            None
        }
    }
}

/// Runs one task's tool calls and returns the ordered log.
pub trait TaskExecutor {
    fn execute(
        &mut self,
        task: &VerificationTask,
        desc: &ToolDescription,
    ) -> Result<Vec<ToolCallRecord>>;
    fn kind(&self) -> &'static str;
}

/// Executes tasks against a live server: the model proposes one tool call at
/// a time from the instruction and description, up to three calls per task.
/// A deliberate simplification of a full planning agent.
pub struct LiveExecutor<'a> {
    handle: ServerHandle,
    llm: &'a dyn LlmGateway,
    model_id: String,
}

impl<'a> LiveExecutor<'a> {
    pub fn new(launch: &ServerLaunch, llm: &'a dyn LlmGateway, model_id: &str) -> Result<Self> {
        let handle = crate::mcp::launch_and_initialize(launch)?;
        Ok(Self {
            handle,
            llm,
            model_id: model_id.to_string(),
        })
    }

    pub fn with_handle(handle: ServerHandle, llm: &'a dyn LlmGateway, model_id: &str) -> Self {
        Self {
            handle,
            llm,
            model_id: model_id.to_string(),
        }
    }

    pub fn into_handle(self) -> ServerHandle {
        self.handle
    }
}

#[derive(Debug, Deserialize)]
struct WireCall {
    #[serde(default)]
    tool_name: Option<String>,
    #[serde(default)]
    arguments: Option<serde_json::Value>,
    #[serde(default)]
    done: bool,
    #[serde(default)]
    #[allow(dead_code)]
    reason: Option<String>,
}

impl TaskExecutor for LiveExecutor<'_> {
    fn execute(
        &mut self,
        task: &VerificationTask,
        desc: &ToolDescription,
    ) -> Result<Vec<ToolCallRecord>> {
        let desc_json = serde_json::to_string_pretty(desc)?;
        let mut records: Vec<ToolCallRecord> = Vec::new();
        for _ in 0..MAX_CALL_ATTEMPTS {
            let attempts = if records.is_empty() {
                "(none)".to_string()
            } else {
                serde_json::to_string_pretty(&records)?
            };
            let prompt = prompts::tool_call_synth(&task.instruction, &desc_json, &attempts);
            let req = LlmRequest::new(
                LlmPurpose::ToolCallSynth,
                prompt.system,
                prompt.user,
                prompts::tool_call_synth_schema(),
                &self.model_id,
            );
            let completion = self.llm.complete(&req)?;
            let wire: WireCall = match serde_json::from_str(&completion.text) {
                Ok(w) => w,
                Err(_) => break,
            };
            if wire.done {
                break;
            }
            let (Some(tool_name), Some(arguments)) = (wire.tool_name, wire.arguments) else {
                break;
            };
            let record = self.handle.call_tool(&tool_name, arguments)?;
            records.push(record);
        }
        Ok(records)
    }

    fn kind(&self) -> &'static str {
        "live-single-shot"
    }
}

/// Replays scripted logs keyed by statement id, for offline testing.
pub struct ReplayExecutor {
    scripts: BTreeMap<String, Vec<ToolCallRecord>>,
    strict: bool,
}

impl ReplayExecutor {
    pub fn new(scripts: BTreeMap<String, Vec<ToolCallRecord>>, strict: bool) -> Self {
        Self { scripts, strict }
    }

    pub fn from_file(path: &std::path::Path, strict: bool) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        #[derive(Deserialize)]
        struct ScriptFile {
            tasks: BTreeMap<String, Vec<ToolCallRecord>>,
        }
        let file: ScriptFile = serde_json::from_str(&text)?;
        Ok(Self::new(file.tasks, strict))
    }

    pub fn to_script_json(logs: &BTreeMap<String, Vec<ToolCallRecord>>) -> serde_json::Value {
        json!({"tasks": logs})
    }
}

impl TaskExecutor for ReplayExecutor {
    fn execute(
        &mut self,
        task: &VerificationTask,
        _desc: &ToolDescription,
    ) -> Result<Vec<ToolCallRecord>> {
        match self.scripts.get(&task.statement_id) {
            Some(log) => Ok(log.clone()),
            None if self.strict => Err(Error::NotFound(format!(
                "no scripted log for task {}",
                task.statement_id
            ))),
            None => Ok(Vec::new()),
        }
    }

    fn kind(&self) -> &'static str {
        "replay"
    }
}

/// Judge one statement against its execution log. Empty logs force
/// inconclusive; unparsable judge output is retried once, then inconclusive.
pub fn judge(
    stmt: &Statement,
    task: &VerificationTask,
    log: &[ToolCallRecord],
    llm: &dyn LlmGateway,
    model_id: &str,
    diagnostics: &mut Vec<Diagnostic>,
) -> Verdict {
    if log.is_empty() {
        return Verdict {
            statement_id: stmt.id.clone(),
            outcome: VerdictOutcome::Inconclusive,
            rationale: "no execution records to judge".into(),
            evidence: Vec::new(),
            constraint: None,
        };
    }
    let log_json = serde_json::to_string_pretty(log).unwrap_or_default();
    let prompt = prompts::judge(
        &stmt.id,
        &stmt.text,
        &task.instruction,
        &task.expected_observable,
        &log_json,
    );
    let base_req = LlmRequest::new(
        LlmPurpose::Judge,
        prompt.system.clone(),
        prompt.user.clone(),
        prompts::judge_schema(),
        model_id,
    );

    #[derive(Deserialize)]
    struct WireVerdict {
        outcome: String,
        #[serde(default)]
        rationale: String,
        #[serde(default)]
        evidence: Vec<usize>,
        #[serde(default)]
        constraint: Option<ConstraintSuggestion>,
    }

    let mut parsed: Option<WireVerdict> = None;
    for attempt in 0..2 {
        let req = if attempt == 0 {
            base_req.clone()
        } else {
            LlmRequest::new(
                LlmPurpose::Judge,
                prompt.system.clone(),
                format!(
                    "{}\n\nThe previous answer was not valid JSON for the schema. Answer again with strictly valid JSON only.",
                    prompt.user
                ),
                prompts::judge_schema(),
                model_id,
            )
        };
        match llm.complete(&req) {
            Ok(completion) => match serde_json::from_str::<WireVerdict>(&completion.text) {
                Ok(w) => {
                    parsed = Some(w);
                    break;
                }
                Err(e) => diagnostics.push(Diagnostic::new(
                    "judge-unparsable",
                    format!("{} attempt {attempt}: {e}", stmt.id),
                )),
            },
            Err(e) => {
                diagnostics.push(Diagnostic::new(
                    "judge-unavailable",
                    format!("{}: {e}", stmt.id),
                ));
                break;
            }
        }
    }
    let Some(wire) = parsed else {
        return Verdict {
            statement_id: stmt.id.clone(),
            outcome: VerdictOutcome::Inconclusive,
            rationale: "judge output unusable".into(),
            evidence: Vec::new(),
            constraint: None,
        };
    };
    let outcome = match wire.outcome.as_str() {
        "pass" => VerdictOutcome::Pass,
        "fail" => VerdictOutcome::Fail,
        _ => VerdictOutcome::Inconclusive,
    };
    let mut evidence: Vec<usize> = wire
        .evidence
        .into_iter()
        .filter(|i| *i < log.len())
        .collect();
    if outcome == VerdictOutcome::Fail && evidence.is_empty() {
        // a failing verdict must point at the log; default to all records
        evidence = (0..log.len()).collect();
    }
    Verdict {
        statement_id: stmt.id.clone(),
        outcome,
        rationale: wire.rationale,
        evidence,
        constraint: wire.constraint,
    }
}

/// Remove failed statements from their source fields, add constraints the
/// failures revealed, and leave passing and inconclusive text verbatim. The
/// summary is rebuilt only when one of its own sentences failed, by dropping
/// exactly the failed sentences.
pub fn refine_description(
    desc: &ToolDescription,
    statements: &[Statement],
    verdicts: &[Verdict],
) -> ToolDescription {
    let mut out = desc.clone();
    let failed: BTreeMap<&str, &Statement> = verdicts
        .iter()
        .filter(|v| v.outcome == VerdictOutcome::Fail)
        .filter_map(|v| {
            statements
                .iter()
                .find(|s| s.id == v.statement_id)
                .map(|s| (s.id.as_str(), s))
        })
        .collect();

    if !failed.is_empty() {
        // summary: drop failed sentences, keep the rest verbatim
        let failed_sentences: Vec<usize> = failed
            .values()
            .filter_map(|s| match s.source {
                StatementSource::Summary { sentence } => Some(sentence),
                _ => None,
            })
            .collect();
        if !failed_sentences.is_empty() {
            let kept: Vec<String> = split_sentences(&desc.summary)
                .into_iter()
                .enumerate()
                .filter(|(i, _)| !failed_sentences.contains(i))
                .map(|(_, s)| s)
                .collect();
            out.summary = kept.join(" ");
        }

        if let Some(functionalities) = &mut out.functionalities {
            let failed_bullets: Vec<usize> = failed
                .values()
                .filter_map(|s| match s.source {
                    StatementSource::Functionality { index } => Some(index),
                    _ => None,
                })
                .collect();
            let mut idx = 0usize;
            functionalities.retain(|_| {
                let keep = !failed_bullets.contains(&idx);
                idx += 1;
                keep
            });
        }

        for stmt in failed.values() {
            match &stmt.source {
                StatementSource::ArgDescription { arg } => {
                    if let Some(a) = out.args.iter_mut().find(|a| &a.name == arg) {
                        a.description.clear();
                    }
                }
                StatementSource::ArgConstraint { arg, index } => {
                    if let Some(a) = out.args.iter_mut().find(|a| &a.name == arg) {
                        if *index < a.constraints.len() {
                            a.constraints.remove(*index);
                        }
                    }
                }
                _ => {}
            }
        }
    }

    // constraints surfaced by failing executions
    for v in verdicts {
        if v.outcome != VerdictOutcome::Fail {
            continue;
        }
        if let Some(c) = &v.constraint {
            if let Some(a) = out.args.iter_mut().find(|a| a.name == c.arg) {
                if !a.constraints.iter().any(|existing| existing == &c.text) {
                    a.constraints.push(c.text.clone());
                }
            }
        }
    }
    out
}

/// One extract -> synthesize -> execute -> judge -> refine cycle.
pub fn run_verification(
    desc: &ToolDescription,
    llm: &dyn LlmGateway,
    model_id: &str,
    executor: &mut dyn TaskExecutor,
    diagnostics: &mut Vec<Diagnostic>,
) -> Result<VerificationReport> {
    let statements = extract_statements(desc, llm, model_id, diagnostics);

    let mut tasks: Vec<VerificationTask> = Vec::new();
    let mut logs: BTreeMap<String, Vec<ToolCallRecord>> = BTreeMap::new();
    let mut verdicts: Vec<Verdict> = Vec::new();

    for stmt in statements.iter().filter(|s| s.verifiable) {
        let Some(task) = synthesize_task(stmt, desc, llm, model_id, diagnostics) else {
            verdicts.push(Verdict {
                statement_id: stmt.id.clone(),
                outcome: VerdictOutcome::Inconclusive,
                rationale: "task synthesis unavailable".into(),
                evidence: Vec::new(),
                constraint: None,
            });
            continue;
        };
        let log = match executor.execute(&task, desc) {
            Ok(log) => log,
            Err(e) => {
                diagnostics.push(Diagnostic::new(
                    "executor-unavailable",
                    format!("{}: {e}", stmt.id),
                ));
                tasks.push(task);
                verdicts.push(Verdict {
                    statement_id: stmt.id.clone(),
                    outcome: VerdictOutcome::Inconclusive,
                    rationale: "executor unavailable".into(),
                    evidence: Vec::new(),
                    constraint: None,
                });
                continue;
            }
        };
        let verdict = judge(stmt, &task, &log, llm, model_id, diagnostics);
        logs.insert(stmt.id.clone(), log);
        tasks.push(task);
        verdicts.push(verdict);
    }

    let refined = refine_description(desc, &statements, &verdicts);
    let inconclusive_statement_ids = verdicts
        .iter()
        .filter(|v| v.outcome == VerdictOutcome::Inconclusive)
        .map(|v| v.statement_id.clone())
        .collect();

    Ok(VerificationReport {
        tool_name: desc.tool_name.clone(),
        statements,
        tasks,
        logs,
        verdicts,
        inconclusive_statement_ids,
        initial: desc.clone(),
        refined,
        identifiers: ReportIdentifiers {
            protocol_version: crate::mcp::PROTOCOL_VERSION.to_string(),
            generator_model: model_id.to_string(),
            prompt_version: prompts::PROMPT_VERSION.to_string(),
            executor: executor.kind().to_string(),
        },
    })
}
