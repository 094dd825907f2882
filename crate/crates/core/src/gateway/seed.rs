//! Deterministic scripted responder used to seed and refresh the committed
//! fixture cassettes offline. It plays the role of the recorded model for the
//! fixture corpus only: responses are derived from the request text with
//! fixed rules, so re-seeding is reproducible. Production runs use the live
//! backend; tests replay the cassettes this produces.

use serde_json::{json, Value};

use crate::error::{Error, Result};

use super::{BackendResponse, LlmBackend, LlmPurpose, LlmRequest};

/// Superlative/promotional tokens the scripted bias classifier flags.
pub const BIASED_TOKENS: &[&str] = &[
    "best",
    "optimal",
    "perfect",
    "ultimate",
    "superior",
    "premium",
    "greatest",
    "highest",
    "freshest",
    "finest",
    "unbeatable",
    "worldclass",
    "topnotch",
];

#[derive(Default)]
pub struct SeedBackend;

impl SeedBackend {
    pub fn new() -> Self {
        Self
    }

    fn answer(&self, req: &LlmRequest) -> Result<Value> {
        match req.purpose {
            LlmPurpose::EntryFallback => seed_entry_fallback(&req.user),
            LlmPurpose::Debloat => seed_debloat(&req.user),
            LlmPurpose::BiasFilter => seed_bias_filter(&req.user),
            LlmPurpose::Descgen => seed_descgen(&req.user),
            LlmPurpose::StmtExtract => seed_stmt_extract(&req.user),
            LlmPurpose::TaskSynth => seed_task_synth(&req.user),
            LlmPurpose::ToolCallSynth => seed_tool_call_synth(&req.user),
            LlmPurpose::Judge => seed_judge(&req.user),
        }
    }
}

impl LlmBackend for SeedBackend {
    fn complete(&self, req: &LlmRequest) -> Result<BackendResponse> {
        let value = self.answer(req)?;
        let text = serde_json::to_string(&value)?;
        Ok(BackendResponse {
            prompt_tokens: (req.system.len() + req.user.len()) as u64 / 4,
            completion_tokens: text.len() as u64 / 4,
            text,
        })
    }
}

fn field<'a>(user: &'a str, label: &str) -> Option<&'a str> {
    user.lines()
        .find_map(|l| l.strip_prefix(label))
        .map(|s| s.trim())
}

/// Extract the numbered source listing that follows `Function \`name\`:`.
fn numbered_listing(user: &str) -> Vec<(u32, String)> {
    let mut out = Vec::new();
    for line in user.lines() {
        let trimmed = line.trim_start();
        if let Some((num, rest)) = trimmed.split_once('|') {
            if let Ok(n) = num.trim().parse::<u32>() {
                out.push((n, rest.strip_prefix(' ').unwrap_or(rest).to_string()));
            }
        }
    }
    out
}

fn seed_entry_fallback(user: &str) -> Result<Value> {
    let tool = field(user, "Tool name:").unwrap_or_default();
    // scan the context for a registration-table binding `"<tool>": <fn>` or
    // `"<tool>", <fn>`; fall back to a context function named like the tool
    let mut entry: Option<String> = None;
    for line in user.lines() {
        for quote in ['"', '\''] {
            let needle = format!("{quote}{tool}{quote}");
            if let Some(pos) = line.find(&needle) {
                let after = &line[pos + needle.len()..];
                let after = after.trim_start_matches([':', ',', ' ', '\t']);
                let ident: String = after
                    .chars()
                    .take_while(|c| c.is_alphanumeric() || *c == '_')
                    .collect();
                if !ident.is_empty() && ident != "args" {
                    entry = Some(ident);
                }
            }
        }
    }
    let Some(short) = entry else {
        return Err(Error::Backend(format!(
            "seed responder: no registration binding found for tool {tool}"
        )));
    };
    // prefer the qualified name from the known-function list
    let qualified = user
        .lines()
        .map(|l| l.trim().trim_start_matches("- "))
        .find(|l| l.ends_with(&format!("::{short}")) || l.ends_with(&format!(".{short}")))
        .unwrap_or(&short);
    Ok(json!({"entry_function": qualified}))
}

fn seed_debloat(user: &str) -> Result<Value> {
    let listing = numbered_listing(user);
    let find_line = |pred: &dyn Fn(&str) -> bool| -> Option<u32> {
        listing
            .iter()
            .find(|(_, text)| pred(text.trim()))
            .map(|(n, _)| *n)
    };
    let mut edits = Vec::new();

    // year-filter pruning: entry never forwards `year`, so the guard block is
    // dead when no inbound site mentions it
    let sites_mention_year = user
        .split("call site")
        .nth(1)
        .map(|s| s.contains("year"))
        .unwrap_or(false);
    if let Some(start) = find_line(&|t: &str| t.starts_with("if year is not None")) {
        if !sites_mention_year {
            let mut end = start;
            for (n, text) in &listing {
                if *n > start {
                    let indent = text.len() - text.trim_start().len();
                    if text.trim().is_empty() || indent > 4 {
                        end = *n;
                    } else {
                        break;
                    }
                }
            }
            edits.push(json!({
                "action": "delete",
                "start_line": start,
                "end_line": end,
                "rationale": "no call site supplies year, so the filter never runs"
            }));
        }
    }

    // unused optional `style` pruning: parameter removed, branches collapsed
    // to the default assignment
    let sites_mention_style = user
        .split("call site")
        .nth(1)
        .map(|s| s.contains("style"))
        .unwrap_or(false);
    if !sites_mention_style {
        if let Some(param_line) =
            find_line(&|t: &str| t.starts_with("style:") && t.contains("None"))
        {
            edits.push(json!({
                "action": "delete",
                "start_line": param_line,
                "end_line": param_line,
                "rationale": "style is never supplied at any call site"
            }));
        }
        if let Some(start) = find_line(&|t: &str| t.starts_with("if style is None")) {
            let mut end = start;
            let base_indent = listing
                .iter()
                .find(|(n, _)| *n == start)
                .map(|(_, t)| t.len() - t.trim_start().len())
                .unwrap_or(4);
            for (n, text) in &listing {
                if *n > start {
                    let indent = text.len() - text.trim_start().len();
                    if text.trim().is_empty()
                        || indent > base_indent
                        || text.trim_start().starts_with("else")
                    {
                        end = *n;
                    } else {
                        break;
                    }
                }
            }
            let indent = " ".repeat(base_indent);
            edits.push(json!({
                "action": "replace",
                "start_line": start,
                "end_line": end,
                "replacement": format!("{indent}style = {{\"show_data_labels\": True}}"),
                "rationale": "style is always absent, so only the default branch is live"
            }));
        }
        if let Some(start) = find_line(&|t: &str| t.starts_with("if style.get(\"grid_lines\"")) {
            let mut end = start;
            let base_indent = listing
                .iter()
                .find(|(n, _)| *n == start)
                .map(|(_, t)| t.len() - t.trim_start().len())
                .unwrap_or(4);
            for (n, text) in &listing {
                if *n > start {
                    let indent = text.len() - text.trim_start().len();
                    if text.trim().is_empty() || indent > base_indent {
                        end = *n;
                    } else {
                        break;
                    }
                }
            }
            edits.push(json!({
                "action": "delete",
                "start_line": start,
                "end_line": end,
                "rationale": "grid_lines can never be set on the default style"
            }));
        }
    }

    Ok(json!({"unreachable": false, "edits": edits}))
}

fn seed_bias_filter(user: &str) -> Result<Value> {
    let mut verdicts = Vec::new();
    let mut in_list = false;
    for line in user.lines() {
        if line.starts_with("Identifiers to classify:") {
            in_list = true;
            continue;
        }
        if line.starts_with("Surrounding code") {
            break;
        }
        if in_list {
            let ident = line.trim().trim_start_matches("- ").trim();
            if ident.is_empty() {
                continue;
            }
            let biased: Vec<String> = split_identifier_tokens(ident)
                .into_iter()
                .filter(|t| BIASED_TOKENS.contains(&t.to_ascii_lowercase().as_str()))
                .collect();
            verdicts.push(json!({"identifier": ident, "biased_tokens": biased}));
        }
    }
    Ok(json!({"verdicts": verdicts}))
}

pub use crate::sanitizer::split_identifier_tokens;

fn seed_descgen(user: &str) -> Result<Value> {
    let tool = field(user, "Tool name:").unwrap_or_default().to_string();
    let mode = field(user, "Mode:").unwrap_or("full");
    let exposed = field(user, "Exposed parameters:").unwrap_or("");
    let slice = user.split("Code slice:").nth(1).unwrap_or("");

    let args: Vec<Value> = exposed
        .split(',')
        .map(|p| p.trim())
        .filter(|p| !p.is_empty())
        .map(|p| {
            let (name, required) = match p.strip_suffix('?') {
                Some(n) => (n, false),
                None => (p, true),
            };
            json!({
                "name": name,
                "type": "string",
                "required": required,
                "description": format!("The {} value.", name.replace('_', " ")),
                "constraints": []
            })
        })
        .collect();

    let (summary, functionalities) = scripted_description(&tool, slice);
    let mut out = json!({"summary": summary, "args": args});
    if mode == "full" {
        out["functionalities"] = json!(functionalities);
    }
    Ok(out)
}

/// Fixture-corpus descriptions. The apply_formula flaw is intentional: the
/// initial description must carry the incorrect auto-prepend claim so the
/// verification stage has something real to falsify.
fn scripted_description(tool: &str, slice: &str) -> (String, Vec<String>) {
    if tool == "apply_formula" {
        return (
            "Writes a formula into a worksheet cell after validating it, storing the result in the workbook file.".to_string(),
            vec![
                "Writes a formula to the addressed cell of the named sheet".to_string(),
                "Automatically prepends '=' to formulas if not already present".to_string(),
                "Rejects unsafe formula functions before writing".to_string(),
            ],
        );
    }
    if tool == "create_chart" {
        if slice.contains("grid_lines") {
            return (
                "Creates a chart in a worksheet from a data range. Allows customization of chart style such as grid lines.".to_string(),
                vec![
                    "Builds a chart of the requested type over the data range".to_string(),
                    "Allows customization of chart style such as grid lines".to_string(),
                ],
            );
        }
        return (
            "Creates a chart in a worksheet from a data range. Applies default styling with data labels showing values.".to_string(),
            vec![
                "Builds a chart of the requested type over the data range".to_string(),
                "Applies default styling with data labels showing values".to_string(),
            ],
        );
    }
    if tool == "write_data_to_excel" {
        return (
            "Writes a value into a worksheet cell without validation.".to_string(),
            vec!["Stores the given value at the addressed cell".to_string()],
        );
    }
    if tool == "search_arxiv" {
        if slice.contains("year") {
            return (
                "Searches the paper index for a query and returns formatted results. Supports year-based filtering of results.".to_string(),
                vec![
                    "Searches papers matching the query up to max_results".to_string(),
                    "Supports year-based filtering of results".to_string(),
                    "Formats results with title and year".to_string(),
                ],
            );
        }
        return (
            "Searches the paper index for a query and returns formatted results.".to_string(),
            vec![
                "Searches papers matching the query up to max_results".to_string(),
                "Formats results with title and year".to_string(),
            ],
        );
    }
    if tool == "upload_file" {
        return (
            "Uploads a file with an optional note and returns a download link.".to_string(),
            vec![
                "Uploads the file at the given path".to_string(),
                "Attaches the note to the upload record".to_string(),
                "Returns a download link for the stored file".to_string(),
            ],
        );
    }
    if tool == "get_code_context" {
        return (
            "Retrieves documentation context for a code library query.".to_string(),
            vec![
                "Looks up documentation for the named library".to_string(),
                "Returns matching snippets for the query".to_string(),
            ],
        );
    }
    // generic fallback keyed on the entry function's visible behavior
    let verb = if slice.contains("return") {
        "Computes and returns"
    } else {
        "Performs"
    };
    (
        format!(
            "{verb} the {} operation over its inputs.",
            tool.replace(['_', '-'], " ")
        ),
        vec![format!(
            "Handles the {} request",
            tool.replace(['_', '-'], " ")
        )],
    )
}

fn seed_stmt_extract(user: &str) -> Result<Value> {
    let statements: Value = user
        .split("Statements:")
        .nth(1)
        .and_then(|s| serde_json::from_str(s.trim()).ok())
        .unwrap_or(json!([]));
    let mut out = Vec::new();
    if let Some(list) = statements.as_array() {
        for stmt in list {
            let id = stmt["id"].as_str().unwrap_or_default();
            let text = stmt["text"]
                .as_str()
                .unwrap_or_default()
                .to_ascii_lowercase();
            let non_verifiable = text.contains("internal")
                || text.contains("caching")
                || text.contains("efficient")
                || text.contains("implementation detail");
            if non_verifiable {
                out.push(json!({
                    "id": id,
                    "verifiable": false,
                    "discard_reason": "internal implementation detail not observable at the call boundary"
                }));
            } else {
                out.push(json!({"id": id, "verifiable": true}));
            }
        }
    }
    Ok(json!({"statements": out}))
}

fn seed_task_synth(user: &str) -> Result<Value> {
    let text = user
        .lines()
        .find(|l| l.contains("Statement under test"))
        .and_then(|l| l.split("): ").nth(1))
        .unwrap_or_default();
    let lower = text.to_ascii_lowercase();
    if lower.contains("prepends '='")
        || lower.contains("prepends \"=\"")
        || lower.contains("prepends =")
    {
        return Ok(json!({
            "instruction": "Write the formula SUM(A1:A5), without any leading character, into cell A6 of sheet Sheet1 in workbook test.xlsx.",
            "expected_observable": "The call succeeds and the stored formula is =SUM(A1:A5)."
        }));
    }
    if lower.contains("year-based filtering") {
        return Ok(json!({
            "instruction": "Search for papers about transformers published in 2020 only, limiting results to 5.",
            "expected_observable": "Returned papers are restricted to the year 2020."
        }));
    }
    if lower.contains("rejects unsafe") {
        return Ok(json!({
            "instruction": "Write the formula =INDIRECT(\"A1\") into cell B1 of sheet Sheet1 in workbook test.xlsx.",
            "expected_observable": "The call is rejected with an error naming the unsafe function."
        }));
    }
    if lower.contains("writes a formula") {
        return Ok(json!({
            "instruction": "Write the formula =SUM(A1:A5) into cell A6 of sheet Sheet1 in workbook test.xlsx.",
            "expected_observable": "The call succeeds and reports the stored formula =SUM(A1:A5) at A6."
        }));
    }
    if lower.contains("without validation") || lower.contains("stores the given value") {
        return Ok(json!({
            "instruction": "Write the value 42 into cell C1 of sheet Sheet1 in workbook test.xlsx.",
            "expected_observable": "The call succeeds and reports the stored value at C1."
        }));
    }
    Ok(json!({
        "instruction": format!("Invoke the tool so that the following holds and report the outcome: {text}"),
        "expected_observable": "The call result is consistent with the statement."
    }))
}

fn seed_tool_call_synth(user: &str) -> Result<Value> {
    let instruction = field(user, "Task:").unwrap_or_default().to_string();
    let attempts = user.split("Previous attempts:").nth(1).unwrap_or("").trim();
    let lower = instruction.to_ascii_lowercase();

    if attempts != "(none)" && !attempts.is_empty() {
        // one attempt is determinative for the fixture tasks
        return Ok(json!({"done": true, "reason": "previous attempt already decides the task"}));
    }
    if lower.contains("formula") {
        let formula = if lower.contains("without any leading character") {
            "SUM(A1:A5)"
        } else if lower.contains("indirect") {
            "=INDIRECT(\"A1\")"
        } else {
            "=SUM(A1:A5)"
        };
        let cell = instruction
            .split("cell ")
            .nth(1)
            .and_then(|s| s.split_whitespace().next())
            .unwrap_or("A6")
            .trim_end_matches(',');
        return Ok(json!({
            "tool_name": "apply_formula",
            "arguments": {
                "filepath": "test.xlsx",
                "sheet_name": "Sheet1",
                "cell": cell,
                "formula": formula
            }
        }));
    }
    if lower.contains("value 42") {
        return Ok(json!({
            "tool_name": "write_data_to_excel",
            "arguments": {
                "filepath": "test.xlsx",
                "sheet_name": "Sheet1",
                "cell": "C1",
                "value": "42"
            }
        }));
    }
    // generic probe keyed on the described tool
    let described_tool = user
        .split("\"tool_name\": \"")
        .nth(1)
        .and_then(|s| s.split('"').next())
        .unwrap_or_default();
    match described_tool {
        "apply_formula" => Ok(json!({
            "tool_name": "apply_formula",
            "arguments": {
                "filepath": "test.xlsx",
                "sheet_name": "Sheet1",
                "cell": "A6",
                "formula": "=SUM(A1:A5)"
            }
        })),
        "write_data_to_excel" => Ok(json!({
            "tool_name": "write_data_to_excel",
            "arguments": {
                "filepath": "test.xlsx",
                "sheet_name": "Sheet1",
                "cell": "C1",
                "value": "42"
            }
        })),
        _ => Err(Error::Backend(format!(
            "seed responder: no scripted call for task: {instruction}"
        ))),
    }
}

fn seed_judge(user: &str) -> Result<Value> {
    let statement = user
        .lines()
        .find(|l| l.starts_with("Statement ("))
        .and_then(|l| l.split("): ").nth(1))
        .unwrap_or_default()
        .to_ascii_lowercase();
    let log = user.split("Execution log:").nth(1).unwrap_or("");
    let log_has_error = log.contains("\"error\"");

    if statement.contains("prepends") {
        if log_has_error {
            return Ok(json!({
                "outcome": "fail",
                "rationale": "The tool rejected a formula without a leading '=' instead of prepending one; the claim is inconsistent with the observed behavior.",
                "evidence": [0],
                "constraint": {"arg": "formula", "text": "must begin with '='"}
            }));
        }
        return Ok(json!({
            "outcome": "pass",
            "rationale": "The formula was accepted and normalized.",
            "evidence": [0]
        }));
    }
    if log.trim().is_empty() || log.contains("timed out") {
        return Ok(json!({
            "outcome": "inconclusive",
            "rationale": "No decisive observation in the log.",
            "evidence": []
        }));
    }
    if statement.contains("rejects unsafe") {
        if log_has_error {
            return Ok(json!({
                "outcome": "pass",
                "rationale": "The unsafe formula was rejected with an error.",
                "evidence": [0]
            }));
        }
        return Ok(json!({
            "outcome": "fail",
            "rationale": "The unsafe formula was accepted.",
            "evidence": [0]
        }));
    }
    if log_has_error {
        return Ok(json!({
            "outcome": "inconclusive",
            "rationale": "The call errored for reasons unrelated to the statement.",
            "evidence": []
        }));
    }
    Ok(json!({
        "outcome": "pass",
        "rationale": "The successful call is consistent with the statement.",
        "evidence": [0]
    }))
}
