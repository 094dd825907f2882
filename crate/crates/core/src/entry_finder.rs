//! Maps a tool name to its entry function via the three registration
//! patterns (decorator, explicit register call, dispatch branch), falling
//! back to LLM-assisted identification when none match.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use tree_sitter::Node;

use crate::diag::Diagnostic;
use crate::error::{Error, Result};
use crate::gateway::{prompts, LlmGateway, LlmPurpose, LlmRequest};
use crate::source_model::{CallSite, FunctionDef, SourceModel, Span};
use crate::syntax::{self, node_text, string_literal_value, Language};

/// Decorator / register-call name suffixes recognized by default; servers add
/// their own via `registration_aliases`.
pub const DEFAULT_REGISTRATION_ALIASES: &[&str] = &["tool", "registerTool"];

const FALLBACK_CONTEXT_LINES: usize = 40;
const FALLBACK_MAX_OCCURRENCES: usize = 200;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum EntryPattern {
    Decorator,
    ExplicitRegister,
    Dispatch,
    LlmFallback,
}

impl std::fmt::Display for EntryPattern {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            EntryPattern::Decorator => "decorator",
            EntryPattern::ExplicitRegister => "explicit-register",
            EntryPattern::Dispatch => "dispatch",
            EntryPattern::LlmFallback => "llm-fallback",
        };
        f.write_str(s)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EntryResolution {
    pub tool_name: String,
    pub entry: String,
    pub pattern: EntryPattern,
    pub evidence: Span,
}

fn alias_match(name_path: &str, aliases: &[String]) -> bool {
    let last = name_path.rsplit('.').next().unwrap_or(name_path);
    DEFAULT_REGISTRATION_ALIASES.contains(&last) || aliases.iter().any(|a| a == last)
}

/// Source text of a string-literal argument, unquoted; `None` when the
/// argument is not a plain literal.
fn literal_arg(text: &str) -> Option<String> {
    let t = text.trim();
    for quote in ['"', '\''] {
        if t.len() >= 2 && t.starts_with(quote) && t.ends_with(quote) {
            let inner = &t[1..t.len() - 1];
            if !inner.contains(quote) {
                return Some(inner.to_string());
            }
        }
    }
    None
}

/// A function registered under a tool name via decorator.
fn decorator_registrations<'m>(
    model: &'m SourceModel,
    aliases: &[String],
) -> Vec<(String, &'m FunctionDef, Span)> {
    let mut out = Vec::new();
    for f in model.functions.values() {
        for d in &f.decorators {
            if !alias_match(&d.name_path, aliases) {
                continue;
            }
            let name = d
                .args
                .iter()
                .find(|(k, _)| k.as_deref() == Some("name"))
                .and_then(|(_, v)| literal_arg(v))
                .unwrap_or_else(|| f.short_name().to_string());
            out.push((name, f, d.span.clone()));
        }
    }
    out
}

pub fn match_decorator(
    model: &SourceModel,
    tool_name: &str,
    aliases: &[String],
) -> Result<Option<EntryResolution>> {
    let mut hits: Vec<(&FunctionDef, Span)> = decorator_registrations(model, aliases)
        .into_iter()
        .filter(|(name, _, _)| name == tool_name)
        .map(|(_, f, span)| (f, span))
        .collect();
    hits.dedup_by(|a, b| a.0.qualified_name == b.0.qualified_name);
    match hits.len() {
        0 => Ok(None),
        1 => Ok(Some(EntryResolution {
            tool_name: tool_name.to_string(),
            entry: hits[0].0.qualified_name.clone(),
            pattern: EntryPattern::Decorator,
            evidence: hits[0].1.clone(),
        })),
        _ => Err(Error::Conflict {
            tool: tool_name.to_string(),
            details: hits
                .iter()
                .map(|(f, s)| format!("{} at {}", f.qualified_name, s.locus()))
                .collect::<Vec<_>>()
                .join(", "),
        }),
    }
}

/// Resolve a bare identifier (as written in source) to a function in the
/// model, using the same import/same-file/global rules as call resolution.
fn resolve_name_ref(model: &SourceModel, file: &str, text: &str) -> Option<String> {
    let probe = CallSite {
        caller: format!("{file}::_probe"),
        callee_text: text.trim().to_string(),
        positional_args: Vec::new(),
        keyword_args: Vec::new(),
        span: Span {
            file: file.to_string(),
            start: 0,
            end: 0,
            start_line: 1,
            end_line: 1,
        },
    };
    model.resolve_callee(&probe).as_function().map(String::from)
}

pub fn match_register_call(
    model: &SourceModel,
    tool_name: &str,
    aliases: &[String],
    diagnostics: &mut Vec<Diagnostic>,
) -> Result<Option<EntryResolution>> {
    let mut hits: Vec<EntryResolution> = Vec::new();
    for site in model.module_calls.iter().chain(model.calls.iter()) {
        let last = site
            .callee_text
            .rsplit('.')
            .next()
            .unwrap_or(&site.callee_text);
        if last != "registerTool" && !aliases.iter().any(|a| a == last) {
            continue;
        }
        let Some(first) = site.positional_args.first() else {
            continue;
        };
        let Some(name) = literal_arg(first) else {
            if site.positional_args.len() >= 2 {
                diagnostics.push(
                    Diagnostic::new(
                        "register-call-nonliteral",
                        format!(
                            "first argument of {} is not a string literal",
                            site.callee_text
                        ),
                    )
                    .at(site.span.locus()),
                );
            }
            continue;
        };
        if name != tool_name {
            continue;
        }
        let file = site.span.file.as_str();
        let handler = site
            .positional_args
            .iter()
            .rev()
            .find_map(|arg| resolve_name_ref(model, file, arg));
        match handler {
            Some(entry) => hits.push(EntryResolution {
                tool_name: tool_name.to_string(),
                entry,
                pattern: EntryPattern::ExplicitRegister,
                evidence: site.span.clone(),
            }),
            None => {
                return Err(Error::UnresolvedHandler {
                    tool: tool_name.to_string(),
                })
            }
        }
    }
    hits.dedup_by(|a, b| a.entry == b.entry);
    match hits.len() {
        0 => Ok(None),
        1 => Ok(Some(hits.remove(0))),
        _ => Err(Error::Conflict {
            tool: tool_name.to_string(),
            details: hits
                .iter()
                .map(|h| format!("{} at {}", h.entry, h.evidence.locus()))
                .collect::<Vec<_>>()
                .join(", "),
        }),
    }
}

/// A literal-guarded branch inside a dispatcher function.
#[derive(Debug, Clone)]
pub struct DispatchArm {
    pub dispatcher: String,
    pub literal: String,
    pub condition_range: std::ops::Range<usize>,
    pub branch_range: Option<std::ops::Range<usize>>,
    pub branch_has_call: bool,
}

/// All `param == "literal"` branches (if/elif, match, switch) across the
/// model, attributed to their enclosing functions.
pub fn dispatch_arms(model: &SourceModel) -> Vec<DispatchArm> {
    let mut arms = Vec::new();
    for (path, src) in &model.files {
        let Some(tree) = syntax::parse(src, model.language) else {
            continue;
        };
        // functions of this file sorted by span start, for containment lookup
        let functions: Vec<&FunctionDef> = model
            .functions
            .values()
            .filter(|f| f.file() == path)
            .collect();
        let enclosing = |range: &std::ops::Range<usize>| -> Option<&FunctionDef> {
            functions
                .iter()
                .filter(|f| f.full_span.start <= range.start && range.end <= f.full_span.end)
                .min_by_key(|f| f.full_span.end - f.full_span.start)
                .copied()
        };
        syntax::walk(tree.root_node(), &mut |node| {
            let found = match model.language {
                Language::Python => python_arm(node, src),
                Language::Typescript => typescript_arm(node, src),
            };
            if let Some((param_text, literal, cond_range, branch)) = found {
                let range = cond_range.clone();
                if let Some(f) = enclosing(&range) {
                    let base = param_text
                        .split(['.', '['])
                        .next()
                        .unwrap_or(&param_text)
                        .trim();
                    let is_param = f.params.iter().any(|p| p.name == base);
                    if is_param {
                        let has_call = branch
                            .map(|b| contains_call(b, model.language))
                            .unwrap_or(false);
                        arms.push(DispatchArm {
                            dispatcher: f.qualified_name.clone(),
                            literal,
                            condition_range: range,
                            branch_range: branch.map(|b| b.byte_range()),
                            branch_has_call: has_call,
                        });
                    }
                }
            }
        });
    }
    arms
}

fn contains_call(node: Node<'_>, language: Language) -> bool {
    let call_kind = match language {
        Language::Python => "call",
        Language::Typescript => "call_expression",
    };
    let mut found = false;
    syntax::walk(node, &mut |n| {
        if n.kind() == call_kind || n.kind() == "new_expression" {
            found = true;
        }
    });
    found
}

type ArmMatch<'t> = (String, String, std::ops::Range<usize>, Option<Node<'t>>);

fn python_arm<'t>(node: Node<'t>, src: &str) -> Option<ArmMatch<'t>> {
    match node.kind() {
        "if_statement" | "elif_clause" => {
            let cond = node.child_by_field_name("condition")?;
            let (param, literal) = literal_equality(cond, src, Language::Python)?;
            let branch = node.child_by_field_name("consequence");
            Some((param, literal, cond.byte_range(), branch))
        }
        "case_clause" => {
            let subject = node
                .parent() // block
                .and_then(|b| b.parent()) // match_statement
                .filter(|m| m.kind() == "match_statement")
                .and_then(|m| m.child_by_field_name("subject"))?;
            let pattern = node
                .named_children(&mut node.walk())
                .find(|c| c.kind() == "case_pattern")?;
            let literal = pattern
                .named_child(0)
                .and_then(|v| string_literal_value(v, src))?;
            let branch = node.child_by_field_name("consequence");
            Some((
                node_text(subject, src).to_string(),
                literal,
                pattern.byte_range(),
                branch,
            ))
        }
        _ => None,
    }
}

fn typescript_arm<'t>(node: Node<'t>, src: &str) -> Option<ArmMatch<'t>> {
    match node.kind() {
        "if_statement" => {
            let cond = node.child_by_field_name("condition")?;
            let inner = if cond.kind() == "parenthesized_expression" {
                cond.named_child(0)?
            } else {
                cond
            };
            let (param, literal) = literal_equality(inner, src, Language::Typescript)?;
            let branch = node.child_by_field_name("consequence");
            Some((param, literal, inner.byte_range(), branch))
        }
        "switch_case" => {
            let value = node.child_by_field_name("value")?;
            let literal = string_literal_value(value, src)?;
            let switch = node.parent().and_then(|b| b.parent())?;
            let subject = switch.child_by_field_name("value")?;
            let subject_inner = if subject.kind() == "parenthesized_expression" {
                subject.named_child(0).unwrap_or(subject)
            } else {
                subject
            };
            Some((
                node_text(subject_inner, src).to_string(),
                literal,
                value.byte_range(),
                Some(node),
            ))
        }
        _ => None,
    }
}

/// `x == "lit"` / `"lit" == x` (Python comparison, TS binary with ==/===).
fn literal_equality(node: Node<'_>, src: &str, language: Language) -> Option<(String, String)> {
    match language {
        Language::Python => {
            if node.kind() != "comparison_operator" {
                return None;
            }
            let op = node
                .children(&mut node.walk())
                .find(|c| !c.is_named())
                .map(|c| node_text(c, src).to_string())?;
            if op != "==" {
                return None;
            }
            let operands: Vec<Node<'_>> = node.named_children(&mut node.walk()).collect();
            if operands.len() != 2 {
                return None;
            }
            pair_param_literal(operands[0], operands[1], src)
        }
        Language::Typescript => {
            if node.kind() != "binary_expression" {
                return None;
            }
            let op = node.child_by_field_name("operator")?;
            let op_text = node_text(op, src);
            if op_text != "===" && op_text != "==" {
                return None;
            }
            let left = node.child_by_field_name("left")?;
            let right = node.child_by_field_name("right")?;
            pair_param_literal(left, right, src)
        }
    }
}

fn pair_param_literal(a: Node<'_>, b: Node<'_>, src: &str) -> Option<(String, String)> {
    if let Some(lit) = string_literal_value(b, src) {
        return Some((node_text(a, src).to_string(), lit));
    }
    if let Some(lit) = string_literal_value(a, src) {
        return Some((node_text(b, src).to_string(), lit));
    }
    None
}

pub fn match_dispatch(
    model: &SourceModel,
    tool_name: &str,
    diagnostics: &mut Vec<Diagnostic>,
) -> Result<Option<EntryResolution>> {
    let arms = dispatch_arms(model);
    let mut best: Option<EntryResolution> = None;
    for arm in arms {
        if arm.literal != tool_name {
            continue;
        }
        if !arm.branch_has_call {
            diagnostics.push(Diagnostic::new(
                "empty-dispatch-branch",
                format!(
                    "branch for '{tool_name}' in {} contains no call",
                    arm.dispatcher
                ),
            ));
            continue;
        }
        let file = arm
            .dispatcher
            .split_once("::")
            .map(|(f, _)| f)
            .unwrap_or(&arm.dispatcher)
            .to_string();
        let src = &model.files[&file];
        let index = crate::source_model::line_index(src);
        let resolution = EntryResolution {
            tool_name: tool_name.to_string(),
            entry: arm.dispatcher.clone(),
            pattern: EntryPattern::Dispatch,
            evidence: index.span(&file, arm.condition_range.clone()),
        };
        match &best {
            Some(prev) if prev.entry != resolution.entry => {
                return Err(Error::Conflict {
                    tool: tool_name.to_string(),
                    details: format!(
                        "dispatch branches in both {} and {}",
                        prev.entry, resolution.entry
                    ),
                });
            }
            Some(_) => {}
            None => best = Some(resolution),
        }
    }
    Ok(best)
}

/// ±40-line context windows around every occurrence of the tool name.
fn occurrence_contexts(model: &SourceModel, tool_name: &str) -> Vec<String> {
    let mut contexts = Vec::new();
    for (path, src) in &model.files {
        let lines: Vec<&str> = src.lines().collect();
        for (i, line) in lines.iter().enumerate() {
            if !line.contains(tool_name) {
                continue;
            }
            let start = i.saturating_sub(FALLBACK_CONTEXT_LINES);
            let end = (i + FALLBACK_CONTEXT_LINES + 1).min(lines.len());
            contexts.push(format!(
                "--- {path}:{}-{} ---\n{}",
                start + 1,
                end,
                lines[start..end].join("\n")
            ));
            if contexts.len() >= FALLBACK_MAX_OCCURRENCES {
                return contexts;
            }
        }
    }
    contexts
}

/// Resolve the tool's entry function, trying the three pattern matchers in
/// precedence order, then the LLM fallback over tool-name occurrences.
/// Conflicting resolutions across patterns are a hard error.
pub fn find_entry(
    model: &SourceModel,
    tool_name: &str,
    aliases: &[String],
    llm: &dyn LlmGateway,
    model_id: &str,
    diagnostics: &mut Vec<Diagnostic>,
) -> Result<EntryResolution> {
    if tool_name.is_empty() {
        return Err(Error::Config("tool name must be nonempty".into()));
    }
    let by_decorator = match_decorator(model, tool_name, aliases)?;
    let by_register = match_register_call(model, tool_name, aliases, diagnostics)?;
    let by_dispatch = match_dispatch(model, tool_name, diagnostics)?;

    let matched: Vec<&EntryResolution> = [&by_decorator, &by_register, &by_dispatch]
        .into_iter()
        .flatten()
        .collect();
    let mut entries: Vec<&str> = matched.iter().map(|r| r.entry.as_str()).collect();
    entries.dedup();
    if entries.len() > 1 {
        return Err(Error::Conflict {
            tool: tool_name.to_string(),
            details: matched
                .iter()
                .map(|r| format!("{} via {}", r.entry, r.pattern))
                .collect::<Vec<_>>()
                .join(", "),
        });
    }
    if let Some(first) = matched.first() {
        return Ok((*first).clone());
    }

    let contexts = occurrence_contexts(model, tool_name);
    if contexts.is_empty() {
        return Err(Error::NotFound(format!(
            "tool name '{tool_name}' does not occur in the codebase"
        )));
    }
    let function_list = model
        .functions
        .keys()
        .map(|k| format!("- {k}"))
        .collect::<Vec<_>>()
        .join("\n");
    let prompt = prompts::entry_fallback(tool_name, &function_list, &contexts.join("\n\n"));
    let req = LlmRequest::new(
        LlmPurpose::EntryFallback,
        prompt.system,
        prompt.user,
        prompts::entry_fallback_schema(),
        model_id,
    );
    let completion = llm.complete(&req)?;
    let parsed: serde_json::Value =
        serde_json::from_str(&completion.text).map_err(|e| Error::ResolutionFailed {
            tool: tool_name.to_string(),
            reason: format!("fallback answer is not valid JSON: {e}"),
        })?;
    let answer = parsed["entry_function"].as_str().unwrap_or_default().trim();

    let entry = if model.functions.contains_key(answer) {
        answer.to_string()
    } else {
        let short_matches: Vec<&String> = model
            .functions
            .keys()
            .filter(|k| model.functions[*k].short_name() == answer)
            .collect();
        match short_matches.len() {
            1 => short_matches[0].clone(),
            _ => {
                return Err(Error::ResolutionFailed {
                    tool: tool_name.to_string(),
                    reason: format!("fallback named unknown or ambiguous function '{answer}'"),
                })
            }
        }
    };
    let f = &model.functions[&entry];
    Ok(EntryResolution {
        tool_name: tool_name.to_string(),
        entry,
        pattern: EntryPattern::LlmFallback,
        evidence: f.full_span.clone(),
    })
}

/// A parameter the registration construct exposes to tool callers.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExposedParam {
    pub name: String,
    pub required: bool,
}

fn is_receiver_param(name: &str) -> bool {
    name == "self" || name == "cls" || name == "this"
}

fn entry_function_params(model: &SourceModel, entry: &str) -> Vec<ExposedParam> {
    let Some(f) = model.functions.get(entry) else {
        return Vec::new();
    };
    f.params
        .iter()
        .filter(|p| !is_receiver_param(&p.name))
        .filter(|p| {
            !matches!(
                p.kind,
                crate::source_model::ParamKind::VariadicPositional
                    | crate::source_model::ParamKind::VariadicKeyword
            )
        })
        .map(|p| ExposedParam {
            name: p.name.clone(),
            required: !p.has_default,
        })
        .collect()
}

/// Keys of an object-literal schema argument, e.g. `{ url: "string" }`.
fn object_literal_keys(text: &str, language: Language) -> Vec<String> {
    let wrapped = match language {
        Language::Typescript => format!("const __schema = {text};"),
        Language::Python => format!("__schema = {text}"),
    };
    let Some(tree) = syntax::parse(&wrapped, language) else {
        return Vec::new();
    };
    if syntax::tree_has_errors(&tree) {
        return Vec::new();
    }
    let mut keys = Vec::new();
    syntax::walk(tree.root_node(), &mut |node| {
        if node.kind() == "pair" {
            if let Some(key) = node.child_by_field_name("key") {
                let raw = node_text(key, &wrapped);
                let key = string_literal_value(key, &wrapped).unwrap_or_else(|| raw.to_string());
                keys.push(key);
            }
        }
    });
    keys
}

/// The parameters a tool's registration construct advertises: the schema the
/// host would expose. Decorator registrations derive the schema from the
/// entry signature; explicit registrations from the schema argument when it
/// is a parseable object literal; dispatchers from the branch's argument
/// unpacking. Anything unparseable falls back to the entry's own parameters.
pub fn exposed_params(model: &SourceModel, resolution: &EntryResolution) -> Vec<ExposedParam> {
    match resolution.pattern {
        EntryPattern::Decorator | EntryPattern::LlmFallback => {
            entry_function_params(model, &resolution.entry)
        }
        EntryPattern::ExplicitRegister => {
            let site = model
                .module_calls
                .iter()
                .chain(model.calls.iter())
                .find(|s| s.span == resolution.evidence);
            if let Some(site) = site {
                for arg in site.positional_args.iter().skip(1) {
                    let keys = object_literal_keys(arg, model.language);
                    if !keys.is_empty() {
                        return keys
                            .into_iter()
                            .map(|k| match k.strip_suffix('?') {
                                Some(name) => ExposedParam {
                                    name: name.to_string(),
                                    required: false,
                                },
                                None => ExposedParam {
                                    name: k,
                                    required: true,
                                },
                            })
                            .collect();
                    }
                }
            }
            entry_function_params(model, &resolution.entry)
        }
        EntryPattern::Dispatch => {
            let arm = dispatch_arms(model)
                .into_iter()
                .find(|a| a.dispatcher == resolution.entry && a.literal == resolution.tool_name);
            let (Some(arm), Some(branch)) = (
                arm.as_ref(),
                arm.as_ref().and_then(|a| a.branch_range.clone()),
            ) else {
                return entry_function_params(model, &resolution.entry);
            };
            let file = resolution.evidence.file.as_str();
            let Some(src) = model.files.get(file) else {
                return entry_function_params(model, &resolution.entry);
            };
            let params: Vec<String> = model.functions[&arm.dispatcher]
                .params
                .iter()
                .map(|p| p.name.clone())
                .collect();
            let mut found = unpacked_keys(&src[branch], model.language, &params);
            found.dedup();
            if found.is_empty() {
                entry_function_params(model, &resolution.entry)
            } else {
                found
            }
        }
    }
}

/// `args["k"]` (required) and `args.get("k")` (optional) accesses where the
/// receiver is one of the dispatcher's parameters.
fn unpacked_keys(branch_src: &str, language: Language, params: &[String]) -> Vec<ExposedParam> {
    let Some(tree) = syntax::parse(&syntax::dedent(branch_src), language) else {
        return Vec::new();
    };
    let src = syntax::dedent(branch_src);
    let mut out: Vec<ExposedParam> = Vec::new();
    let mut push = |name: String, required: bool| {
        if let Some(existing) = out.iter_mut().find(|e| e.name == name) {
            existing.required = existing.required || required;
        } else {
            out.push(ExposedParam { name, required });
        }
    };
    syntax::walk(tree.root_node(), &mut |node| {
        match node.kind() {
            "subscript" | "subscript_expression" => {
                let value = node
                    .child_by_field_name("value")
                    .or_else(|| node.child_by_field_name("object"));
                let sub = node
                    .child_by_field_name("subscript")
                    .or_else(|| node.child_by_field_name("index"));
                if let (Some(value), Some(sub)) = (value, sub) {
                    let recv = node_text(value, &src);
                    if params.iter().any(|p| p == recv) {
                        if let Some(key) = string_literal_value(sub, &src) {
                            push(key, true);
                        }
                    }
                }
            }
            "call" => {
                // args.get("k") / args.get("k", default)
                if let Some(func) = node.child_by_field_name("function") {
                    if func.kind() == "attribute" {
                        let obj = func.child_by_field_name("object");
                        let attr = func.child_by_field_name("attribute");
                        if let (Some(obj), Some(attr)) = (obj, attr) {
                            let recv = node_text(obj, &src);
                            if node_text(attr, &src) == "get" && params.iter().any(|p| p == recv) {
                                if let Some(args) = node.child_by_field_name("arguments") {
                                    if let Some(first) = args.named_child(0) {
                                        if let Some(key) = string_literal_value(first, &src) {
                                            push(key, false);
                                        }
                                    }
                                }
                            }
                        }
                    }
                }
            }
            _ => {}
        }
    });
    out
}

/// Enumerate every registration visible in the codebase, for server configs
/// that auto-discover their tool list. Sorted by tool name.
pub fn discover_tools(model: &SourceModel, aliases: &[String]) -> Vec<(String, EntryPattern)> {
    let mut found: BTreeMap<String, EntryPattern> = BTreeMap::new();
    for (name, _, _) in decorator_registrations(model, aliases) {
        found.entry(name).or_insert(EntryPattern::Decorator);
    }
    for site in model.module_calls.iter().chain(model.calls.iter()) {
        let last = site
            .callee_text
            .rsplit('.')
            .next()
            .unwrap_or(&site.callee_text);
        if last != "registerTool" && !aliases.iter().any(|a| a == last) {
            continue;
        }
        if let Some(name) = site.positional_args.first().and_then(|a| literal_arg(a)) {
            found.entry(name).or_insert(EntryPattern::ExplicitRegister);
        }
    }
    for arm in dispatch_arms(model) {
        if arm.branch_has_call {
            found.entry(arm.literal).or_insert(EntryPattern::Dispatch);
        }
    }
    found.into_iter().collect()
}
