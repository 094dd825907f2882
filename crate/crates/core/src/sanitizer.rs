//! Slice sanitization before any description prompt: strip comments and
//! docstrings, cap identifier length at 20 characters, and drop biased or
//! promotional identifier tokens flagged by an auxiliary classifier. The
//! composition order is fixed: strip, normalize, filter.

use std::collections::{BTreeMap, BTreeSet};
use std::ops::Range;

use serde::{Deserialize, Serialize};

use crate::call_graph::CodeSlice;
use crate::diag::Diagnostic;
use crate::error::Result;
use crate::gateway::{prompts, LlmGateway, LlmPurpose, LlmRequest};
use crate::syntax::{self, Language};

pub const MAX_IDENTIFIER_LEN: usize = 20;
const BIAS_BATCH_SIZE: usize = 50;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum IdentRole {
    Function,
    Param,
    Local,
}

impl IdentRole {
    fn positional_prefix(self) -> &'static str {
        match self {
            IdentRole::Function => "fn",
            IdentRole::Param => "arg",
            IdentRole::Local => "var",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RenameEntry {
    pub original: String,
    pub emitted: String,
    /// Which pass renamed it and what the binding is.
    pub scope: String,
}

/// Audit record serialized beside the slice as `<tool>.renames.json`.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct RenameMap {
    pub entries: Vec<RenameEntry>,
}

impl RenameMap {
    pub fn record(&mut self, original: &str, emitted: &str, scope: &str) {
        self.entries.push(RenameEntry {
            original: original.to_string(),
            emitted: emitted.to_string(),
            scope: scope.to_string(),
        });
    }

    pub fn as_flat_map(&self) -> BTreeMap<String, String> {
        self.entries
            .iter()
            .map(|e| (e.original.clone(), e.emitted.clone()))
            .collect()
    }
}

// ---------------------------------------------------------------------------
// comment / docstring stripping
// ---------------------------------------------------------------------------

/// Remove one comment/docstring range from `text`, taking the whole line when
/// nothing else lives on it, or the trailing segment otherwise.
fn excise(text: &mut String, range: Range<usize>) {
    let line_start = text[..range.start].rfind('\n').map(|i| i + 1).unwrap_or(0);
    let line_end = text[range.end..]
        .find('\n')
        .map(|i| range.end + i + 1)
        .unwrap_or(text.len());
    let before_blank = text[line_start..range.start].trim().is_empty();
    let after_blank = text[range.end..line_end].trim().is_empty();
    if before_blank && after_blank {
        text.replace_range(line_start..line_end, "");
    } else {
        // trailing comment: drop it plus the spaces that separated it
        let mut start = range.start;
        while start > line_start && text.as_bytes()[start - 1] == b' ' {
            start -= 1;
        }
        text.replace_range(start..range.end, "");
    }
}

const BLOCK_KEYWORDS: &[&str] = &[
    "def ", "class ", "if ", "elif ", "else", "for ", "while ", "with ", "try", "except",
    "finally", "match ", "case ", "async ",
];

/// Insert `pass` into blocks a docstring removal emptied. The parser accepts
/// empty blocks that real Python rejects, so this runs on every stripped
/// Python function.
fn repair_empty_blocks(text: &str) -> String {
    let lines: Vec<&str> = text.split('\n').collect();
    let mut out: Vec<String> = Vec::new();
    for (i, line) in lines.iter().enumerate() {
        out.push(line.to_string());
        let trimmed = line.trim_end();
        let head = trimmed.trim_start();
        if !trimmed.ends_with(':') || !BLOCK_KEYWORDS.iter().any(|k| head.starts_with(k)) {
            continue;
        }
        let indent = line.len() - line.trim_start().len();
        let next_code_indent = lines[i + 1..]
            .iter()
            .find(|l| !l.trim().is_empty())
            .map(|l| l.len() - l.trim_start().len());
        let empty_block = match next_code_indent {
            Some(n) => n <= indent,
            None => true,
        };
        if empty_block {
            out.push(format!("{}pass", " ".repeat(indent + 4)));
        }
    }
    out.join("\n")
}

/// Strip every comment and docstring from the slice. Token streams are
/// otherwise preserved; a Python body left empty gains a lone `pass`.
pub fn strip_comments_and_docstrings(
    slice: &CodeSlice,
    diagnostics: &mut Vec<Diagnostic>,
) -> CodeSlice {
    let mut out = slice.clone();
    for (name, text) in &mut out.functions {
        let ranges = syntax::comment_and_docstring_ranges(text, out.language);
        if ranges.is_empty() {
            continue;
        }
        let mut stripped = text.clone();
        let had_docstring = ranges
            .iter()
            .any(|(_, kind)| *kind == syntax::CommentKind::Docstring);
        for (range, _) in ranges.iter().rev() {
            excise(&mut stripped, range.clone());
        }
        if out.language == Language::Python && had_docstring {
            stripped = repair_empty_blocks(&stripped);
        }
        if !syntax::reparses_as_single_function(&stripped, out.language) {
            diagnostics.push(Diagnostic::new(
                "strip-failed",
                format!("{name}: stripped text does not re-parse; keeping original"),
            ));
            continue;
        }
        *text = stripped;
    }
    out.recount();
    out
}

// ---------------------------------------------------------------------------
// identifier collection and rewriting
// ---------------------------------------------------------------------------

/// Identifiers the slice itself defines, with their syntactic roles, in
/// first-definition order.
pub fn defined_identifiers(text: &str, language: Language) -> Vec<(String, IdentRole)> {
    let deindented = syntax::dedent(text);
    let Some(tree) = syntax::parse(&deindented, language) else {
        return Vec::new();
    };
    let src = deindented.as_str();
    let mut seen: BTreeSet<String> = BTreeSet::new();
    let mut out: Vec<(String, IdentRole)> = Vec::new();
    let mut push = |name: &str, role: IdentRole, seen: &mut BTreeSet<String>| {
        if !name.is_empty() && seen.insert(name.to_string()) {
            out.push((name.to_string(), role));
        }
    };
    syntax::walk(tree.root_node(), &mut |node| match node.kind() {
        "function_definition" | "function_declaration" => {
            if let Some(name) = node.child_by_field_name("name") {
                push(syntax::node_text(name, src), IdentRole::Function, &mut seen);
            }
        }
        "method_definition" => {
            if let Some(name) = node.child_by_field_name("name") {
                push(syntax::node_text(name, src), IdentRole::Function, &mut seen);
            }
        }
        "parameters" | "formal_parameters" => {
            let mut cursor = node.walk();
            for child in node.children(&mut cursor) {
                if !child.is_named() || child.kind() == "comment" {
                    continue;
                }
                let mut first: Option<String> = None;
                syntax::walk(child, &mut |n| {
                    if first.is_none() && n.kind() == "identifier" {
                        first = Some(syntax::node_text(n, src).to_string());
                    }
                });
                if let Some(name) = first {
                    push(&name, IdentRole::Param, &mut seen);
                }
            }
        }
        "assignment" | "augmented_assignment" => {
            if let Some(left) = node.child_by_field_name("left") {
                collect_target_identifiers(left, src, &mut |name| {
                    push(name, IdentRole::Local, &mut seen)
                });
            }
        }
        "variable_declarator" => {
            if let Some(name) = node.child_by_field_name("name") {
                if name.kind() == "identifier" {
                    let role = match node.child_by_field_name("value").map(|v| v.kind()) {
                        Some("arrow_function") | Some("function_expression") | Some("function") => {
                            IdentRole::Function
                        }
                        _ => IdentRole::Local,
                    };
                    push(syntax::node_text(name, src), role, &mut seen);
                }
            }
        }
        "for_statement" | "for_in_clause" => {
            if let Some(left) = node.child_by_field_name("left") {
                collect_target_identifiers(left, src, &mut |name| {
                    push(name, IdentRole::Local, &mut seen)
                });
            }
        }
        "as_pattern_target" => {
            if let Some(id) = node.named_child(0) {
                if id.kind() == "identifier" {
                    push(syntax::node_text(id, src), IdentRole::Local, &mut seen);
                }
            }
        }
        "catch_clause" => {
            if let Some(param) = node.child_by_field_name("parameter") {
                if param.kind() == "identifier" {
                    push(syntax::node_text(param, src), IdentRole::Local, &mut seen);
                }
            }
        }
        _ => {}
    });
    out
}

fn collect_target_identifiers(node: tree_sitter::Node<'_>, src: &str, push: &mut dyn FnMut(&str)) {
    match node.kind() {
        "identifier" => push(syntax::node_text(node, src)),
        "pattern_list" | "tuple_pattern" | "list_pattern" | "array_pattern" | "object_pattern" => {
            syntax::walk(node, &mut |n| {
                if n.kind() == "identifier" || n.kind() == "shorthand_property_identifier_pattern" {
                    push(syntax::node_text(n, src));
                }
            });
        }
        // attribute/subscript targets mutate existing bindings, nothing new
        _ => {}
    }
}

fn identifier_token_kinds(language: Language) -> &'static [&'static str] {
    match language {
        Language::Python => &["identifier"],
        Language::Typescript => &[
            "identifier",
            "property_identifier",
            "shorthand_property_identifier",
            "shorthand_property_identifier_pattern",
        ],
    }
}

/// Apply a rename map to every matching identifier token in `text`.
fn rename_in_text(text: &str, language: Language, map: &BTreeMap<String, String>) -> String {
    if map.is_empty() {
        return text.to_string();
    }
    let Some(tree) = syntax::parse(text, language) else {
        return text.to_string();
    };
    let kinds = identifier_token_kinds(language);
    let mut hits: Vec<(Range<usize>, String)> = Vec::new();
    syntax::walk(tree.root_node(), &mut |node| {
        if kinds.contains(&node.kind()) {
            let name = syntax::node_text(node, text);
            if let Some(new) = map.get(name) {
                hits.push((node.byte_range(), new.clone()));
            }
        }
    });
    let mut out = text.to_string();
    for (range, new) in hits.into_iter().rev() {
        out.replace_range(range, &new);
    }
    out
}

/// Pick an emitted name for `original` within the length budget, resolving
/// collisions with a stable numeric suffix.
fn truncate_unique(original: &str, used: &BTreeSet<String>) -> String {
    let base: String = original.chars().take(MAX_IDENTIFIER_LEN).collect();
    if !used.contains(&base) {
        return base;
    }
    for n in 2u32.. {
        let suffix = format!("_{n}");
        let keep = MAX_IDENTIFIER_LEN.saturating_sub(suffix.len());
        let candidate: String = original.chars().take(keep).collect::<String>() + &suffix;
        if !used.contains(&candidate) {
            return candidate;
        }
    }
    unreachable!("suffix search is unbounded")
}

/// Truncate every user-defined identifier to at most 20 characters,
/// prefix-keeping, with stable numeric suffixes on collision. The rename is
/// applied at every use site across the slice.
pub fn normalize_identifiers(slice: &CodeSlice) -> (CodeSlice, RenameMap) {
    let mut renames = RenameMap::default();
    let language = slice.language;

    // collected across the whole slice so call sites rename with definitions
    let mut defined: Vec<(String, IdentRole)> = Vec::new();
    let mut seen = BTreeSet::new();
    for (_, text) in &slice.functions {
        for (name, role) in defined_identifiers(text, language) {
            if seen.insert(name.clone()) {
                defined.push((name, role));
            }
        }
    }

    let mut used: BTreeSet<String> = defined.iter().map(|(n, _)| n.clone()).collect();
    let mut map: BTreeMap<String, String> = BTreeMap::new();
    for (name, _) in &defined {
        if name.chars().count() <= MAX_IDENTIFIER_LEN {
            continue;
        }
        let emitted = truncate_unique(name, &used);
        used.insert(emitted.clone());
        renames.record(name, &emitted, "slice-wide length normalization");
        map.insert(name.clone(), emitted);
    }

    let mut out = slice.clone();
    if !map.is_empty() {
        for (_, text) in &mut out.functions {
            *text = rename_in_text(text, language, &map);
        }
        out.rename_map.extend(map);
        out.recount();
    }
    (out, renames)
}

// ---------------------------------------------------------------------------
// bias filtering
// ---------------------------------------------------------------------------

#[derive(Debug, Deserialize)]
struct WireVerdicts {
    verdicts: Vec<WireVerdict>,
}

#[derive(Debug, Deserialize)]
struct WireVerdict {
    identifier: String,
    biased_tokens: Vec<String>,
}

/// Split an identifier into word tokens on `_` and camelCase boundaries.
pub fn split_identifier_tokens(ident: &str) -> Vec<String> {
    let mut tokens = Vec::new();
    for part in ident.split('_') {
        if part.is_empty() {
            continue;
        }
        let mut current = String::new();
        for c in part.chars() {
            if c.is_uppercase() && !current.is_empty() {
                tokens.push(current.clone());
                current.clear();
            }
            current.push(c);
        }
        if !current.is_empty() {
            tokens.push(current);
        }
    }
    tokens
}

fn rebuild_identifier(original: &str, biased: &[String]) -> String {
    let tokens = split_identifier_tokens(original);
    let kept: Vec<&String> = tokens
        .iter()
        .filter(|t| !biased.iter().any(|b| b.eq_ignore_ascii_case(t)))
        .collect();
    if kept.is_empty() {
        return String::new();
    }
    if original.contains('_') {
        kept.iter()
            .map(|t| t.to_lowercase())
            .collect::<Vec<_>>()
            .join("_")
    } else {
        // camelCase: keep token casing, lowercase the new first token's head
        let mut joined = String::new();
        for (i, t) in kept.iter().enumerate() {
            if i == 0 {
                let mut chars = t.chars();
                if let Some(c) = chars.next() {
                    joined.push(c.to_ascii_lowercase());
                    joined.extend(chars);
                }
            } else {
                joined.push_str(t);
            }
        }
        joined
    }
}

/// Classify user-defined identifiers with the auxiliary model and drop the
/// biased tokens; emptied identifiers get positional names by role. A gateway
/// failure leaves names untouched (dynamic verification still guards claims).
pub fn filter_biased_identifiers(
    slice: &CodeSlice,
    llm: &dyn LlmGateway,
    model_id: &str,
    diagnostics: &mut Vec<Diagnostic>,
) -> Result<(CodeSlice, RenameMap)> {
    let language = slice.language;
    let mut defined: Vec<(String, IdentRole)> = Vec::new();
    let mut seen = BTreeSet::new();
    for (_, text) in &slice.functions {
        for (name, role) in defined_identifiers(text, language) {
            if seen.insert(name.clone()) {
                defined.push((name, role));
            }
        }
    }
    if defined.is_empty() {
        return Ok((slice.clone(), RenameMap::default()));
    }

    let context = slice.text();
    let mut verdicts: BTreeMap<String, Vec<String>> = BTreeMap::new();
    for batch in defined.chunks(BIAS_BATCH_SIZE) {
        let listing = batch
            .iter()
            .map(|(n, _)| format!("- {n}"))
            .collect::<Vec<_>>()
            .join("\n");
        let prompt = prompts::bias_filter(&listing, &context);
        let req = LlmRequest::new(
            LlmPurpose::BiasFilter,
            prompt.system,
            prompt.user,
            prompts::bias_filter_schema(),
            model_id,
        );
        let completion = match llm.complete(&req) {
            Ok(c) => c,
            Err(e) => {
                diagnostics.push(Diagnostic::new(
                    "bias-filter-unavailable",
                    format!("classifier failed, identifiers left as-is: {e}"),
                ));
                return Ok((slice.clone(), RenameMap::default()));
            }
        };
        match serde_json::from_str::<WireVerdicts>(&completion.text) {
            Ok(wire) => {
                for v in wire.verdicts {
                    verdicts.insert(v.identifier, v.biased_tokens);
                }
            }
            Err(e) => {
                diagnostics.push(Diagnostic::new(
                    "bias-filter-unparsable",
                    format!("classifier answer ignored: {e}"),
                ));
            }
        }
    }

    let mut used: BTreeSet<String> = defined.iter().map(|(n, _)| n.clone()).collect();
    let mut map: BTreeMap<String, String> = BTreeMap::new();
    let mut renames = RenameMap::default();
    let mut positional: BTreeMap<&'static str, u32> = BTreeMap::new();
    for (name, role) in &defined {
        let Some(biased) = verdicts.get(name) else {
            continue;
        };
        if biased.is_empty() {
            continue;
        }
        let mut emitted = rebuild_identifier(name, biased);
        if emitted.is_empty() {
            let prefix = role.positional_prefix();
            let counter = positional.entry(prefix).or_insert(0);
            loop {
                *counter += 1;
                emitted = format!("{prefix}_{counter}");
                if !used.contains(&emitted) {
                    break;
                }
            }
        } else if used.contains(&emitted) {
            emitted = truncate_unique(&emitted, &used);
        }
        used.insert(emitted.clone());
        renames.record(name, &emitted, "biased-token filtering");
        map.insert(name.clone(), emitted);
    }

    let mut out = slice.clone();
    if !map.is_empty() {
        for (_, text) in &mut out.functions {
            *text = rename_in_text(text, language, &map);
        }
        // chain through earlier renames so the flat map reads original->final
        for target in out.rename_map.values_mut() {
            if let Some(newer) = map.get(target) {
                *target = newer.clone();
            }
        }
        for (k, v) in &map {
            out.rename_map.entry(k.clone()).or_insert_with(|| v.clone());
        }
        out.recount();
    }
    Ok((out, renames))
}

/// Fixed sanitization pipeline: strip, then normalize, then filter.
pub fn sanitize_slice(
    slice: &CodeSlice,
    llm: &dyn LlmGateway,
    model_id: &str,
    diagnostics: &mut Vec<Diagnostic>,
) -> Result<(CodeSlice, RenameMap)> {
    let stripped = strip_comments_and_docstrings(slice, diagnostics);
    let (normalized, mut renames) = normalize_identifiers(&stripped);
    let (filtered, bias_renames) =
        filter_biased_identifiers(&normalized, llm, model_id, diagnostics)?;
    renames.entries.extend(bias_renames.entries);
    Ok((filtered, renames))
}
