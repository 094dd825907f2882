//! Per-node, callsite-conditioned pruning. The model proposes structured span
//! edits for one function at a time; every proposal is validated before it
//! touches the graph, and anything suspicious leaves the original code in
//! place. Code is authoritative; model output is not.

use serde::{Deserialize, Serialize};

use crate::call_graph::{CallGraph, Edge, GraphCallSite};
use crate::diag::Diagnostic;
use crate::entry_finder::ExposedParam;
use crate::error::{Error, Result};
use crate::gateway::{prompts, LlmGateway, LlmPurpose, LlmRequest};
use crate::source_model::{SourceModel, Span};
use crate::syntax::{self};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EditKind {
    Delete,
    Replace,
}

/// One span edit within a node's current text.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Edit {
    pub kind: EditKind,
    /// Byte range within the node text, covering whole lines.
    pub start: usize,
    pub end: usize,
    pub start_line: u32,
    pub end_line: u32,
    pub replacement: String,
    pub rationale: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct NodeEdit {
    pub node: String,
    /// Sorted by start offset, pairwise disjoint.
    pub edits: Vec<Edit>,
    pub node_unreachable: bool,
}

impl NodeEdit {
    pub fn empty(node: &str) -> Self {
        Self {
            node: node.to_string(),
            edits: Vec::new(),
            node_unreachable: false,
        }
    }

    pub fn is_empty(&self) -> bool {
        self.edits.is_empty() && !self.node_unreachable
    }
}

fn numbered(text: &str) -> String {
    text.lines()
        .enumerate()
        .map(|(i, l)| format!("{:>4} | {l}", i + 1))
        .collect::<Vec<_>>()
        .join("\n")
}

/// Byte offsets of each line start, plus the text length as a sentinel.
fn line_offsets(text: &str) -> Vec<usize> {
    let mut offsets = vec![0];
    for (i, b) in text.bytes().enumerate() {
        if b == b'\n' {
            offsets.push(i + 1);
        }
    }
    if *offsets.last().unwrap() != text.len() {
        offsets.push(text.len());
    }
    offsets
}

#[derive(Debug, Deserialize)]
struct WireEdit {
    action: String,
    start_line: u32,
    end_line: u32,
    #[serde(default)]
    replacement: String,
    #[serde(default)]
    rationale: String,
}

#[derive(Debug, Deserialize)]
struct WireNodeEdit {
    unreachable: bool,
    #[serde(default)]
    edits: Vec<WireEdit>,
}

/// Ask the model which regions of one node are unreachable under its concrete
/// call sites, and parse the answer into span edits. Unparsable or
/// out-of-span answers degrade to the empty edit with a diagnostic.
pub fn propose_node_edit(
    graph: &CallGraph,
    node_id: &str,
    llm: &dyn LlmGateway,
    model_id: &str,
    diagnostics: &mut Vec<Diagnostic>,
) -> Result<NodeEdit> {
    let node = graph
        .nodes
        .get(node_id)
        .ok_or_else(|| Error::NotFound(format!("graph node {node_id}")))?;

    let call_site_section = if node_id == graph.entry {
        "This function is the tool's externally invoked interface; it has no internal call sites. Its parameters form the tool's input schema.".to_string()
    } else {
        let mut s = String::from("Concrete inbound call sites:\n");
        for site in &node.inbound_sites {
            s.push_str(&format!("- (from {}) {}\n", site.caller, site.text));
        }
        s
    };
    let short_name = node_id.rsplit([':', '.']).next().unwrap_or(node_id);
    let prompt = prompts::debloat(short_name, &numbered(&node.text), &call_site_section);
    let req = LlmRequest::new(
        LlmPurpose::Debloat,
        prompt.system,
        prompt.user,
        prompts::debloat_schema(),
        model_id,
    );
    let completion = llm.complete(&req)?;

    let wire: WireNodeEdit = match serde_json::from_str(&completion.text) {
        Ok(w) => w,
        Err(e) => {
            diagnostics.push(Diagnostic::new(
                "unparsable-edit",
                format!("{node_id}: keeping original text ({e})"),
            ));
            return Ok(NodeEdit::empty(node_id));
        }
    };
    if wire.unreachable {
        return Ok(NodeEdit {
            node: node_id.to_string(),
            edits: Vec::new(),
            node_unreachable: true,
        });
    }

    let offsets = line_offsets(&node.text);
    let line_count = node.text.lines().count() as u32;
    let mut edits = Vec::new();
    for w in wire.edits {
        if w.start_line == 0 || w.end_line < w.start_line || w.end_line > line_count {
            diagnostics.push(Diagnostic::new(
                "out-of-span-edit",
                format!(
                    "{node_id}: lines {}-{} outside 1-{line_count}; keeping original text",
                    w.start_line, w.end_line
                ),
            ));
            return Ok(NodeEdit::empty(node_id));
        }
        let start = offsets[(w.start_line - 1) as usize];
        let end = offsets
            .get(w.end_line as usize)
            .copied()
            .unwrap_or(node.text.len());
        let kind = match w.action.as_str() {
            "delete" => EditKind::Delete,
            "replace" => EditKind::Replace,
            other => {
                diagnostics.push(Diagnostic::new(
                    "unparsable-edit",
                    format!("{node_id}: unknown action '{other}'; keeping original text"),
                ));
                return Ok(NodeEdit::empty(node_id));
            }
        };
        let mut replacement = w.replacement;
        if kind == EditKind::Delete {
            replacement.clear();
        } else if !replacement.is_empty() && !replacement.ends_with('\n') {
            replacement.push('\n');
        }
        edits.push(Edit {
            kind,
            start,
            end,
            start_line: w.start_line,
            end_line: w.end_line,
            replacement,
            rationale: w.rationale,
        });
    }
    edits.sort_by_key(|e| e.start);
    Ok(NodeEdit {
        node: node_id.to_string(),
        edits,
        node_unreachable: false,
    })
}

/// Apply `edits` (sorted, disjoint) to `text`, back to front.
pub fn apply_edits(text: &str, edits: &[Edit]) -> String {
    let mut out = text.to_string();
    for e in edits.iter().rev() {
        out.replace_range(e.start..e.end, &e.replacement);
    }
    out
}

/// Reasons an edit cannot be applied; empty means ok.
pub fn validate_edit(
    graph: &CallGraph,
    node_edit: &NodeEdit,
    exposed: &[ExposedParam],
) -> Vec<String> {
    let mut reasons = Vec::new();
    let Some(node) = graph.nodes.get(&node_edit.node) else {
        return vec![format!("unknown node {}", node_edit.node)];
    };
    if node_edit.node_unreachable {
        if !node_edit.edits.is_empty() {
            reasons.push("unreachable node must carry no edits".to_string());
        }
        return reasons;
    }
    if node_edit.edits.is_empty() {
        return reasons;
    }

    for e in &node_edit.edits {
        if e.start > e.end || e.end > node.text.len() {
            reasons.push(format!(
                "edit span {}..{} out of bounds (text is {} bytes)",
                e.start,
                e.end,
                node.text.len()
            ));
        }
    }
    for pair in node_edit.edits.windows(2) {
        if pair[1].start < pair[0].end {
            reasons.push(format!(
                "overlap: edits at lines {}-{} and {}-{}",
                pair[0].start_line, pair[0].end_line, pair[1].start_line, pair[1].end_line
            ));
        }
    }
    if !reasons.is_empty() {
        return reasons;
    }

    let language = graph.language;
    let new_text = apply_edits(&node.text, &node_edit.edits);
    if !syntax::reparses_as_single_function(&new_text, language) {
        reasons.push("edited text does not re-parse as a single function".to_string());
        return reasons;
    }
    let old_name = syntax::standalone_function_name(&node.text, language);
    let new_name = syntax::standalone_function_name(&new_text, language);
    if old_name != new_name {
        reasons.push(format!(
            "function name changed: {:?} -> {:?}",
            old_name, new_name
        ));
    }
    let before = syntax::callee_name_set(&node.text, language);
    let after = syntax::callee_name_set(&new_text, language);
    let introduced: Vec<&String> = after.difference(&before).collect();
    if !introduced.is_empty() {
        reasons.push(format!(
            "new call targets introduced: {}",
            introduced
                .iter()
                .map(|s| s.as_str())
                .collect::<Vec<_>>()
                .join(", ")
        ));
    }
    // exposed entry parameters are the tool's advertised schema
    if node_edit.node == graph.entry {
        let before_params = syntax::function_param_names(&node.text, language);
        let after_params = syntax::function_param_names(&new_text, language);
        for exposed_param in exposed {
            if before_params.contains(&exposed_param.name)
                && !after_params.contains(&exposed_param.name)
            {
                reasons.push(format!(
                    "exposed entry parameter '{}' deleted",
                    exposed_param.name
                ));
            }
        }
    }
    reasons
}

/// Rewrite the node per a validated edit (or remove it when unreachable),
/// re-extract its outgoing call sites, drop edges to callees it no longer
/// calls, and clean up anything left unreachable.
pub fn apply_node_edit(
    graph: &mut CallGraph,
    model: &SourceModel,
    node_edit: &NodeEdit,
) -> Result<()> {
    if node_edit.node_unreachable {
        return graph.remove_node(&node_edit.node);
    }
    if node_edit.edits.is_empty() {
        return Ok(());
    }
    let node = graph
        .nodes
        .get(&node_edit.node)
        .ok_or_else(|| Error::NotFound(format!("graph node {}", node_edit.node)))?;
    let new_text = apply_edits(&node.text, &node_edit.edits);
    rewrite_node_text(graph, model, &node_edit.node, new_text)
}

/// Replace a node's text and reconcile the graph around it.
pub fn rewrite_node_text(
    graph: &mut CallGraph,
    model: &SourceModel,
    node_id: &str,
    new_text: String,
) -> Result<()> {
    let language = graph.language;
    let file = node_id.split_once("::").map(|(f, _)| f).unwrap_or(node_id);
    let base_span = model
        .functions
        .get(node_id)
        .map(|f| f.full_span.clone())
        .unwrap_or(Span {
            file: file.to_string(),
            start: 0,
            end: 0,
            start_line: 1,
            end_line: 1,
        });

    let snippet_calls = syntax::calls_in_snippet(&new_text, language);
    let mut outgoing: Vec<Edge> = Vec::new();
    let mut externals: Vec<GraphCallSite> = Vec::new();
    for call in snippet_calls {
        let probe = crate::source_model::CallSite {
            caller: node_id.to_string(),
            callee_text: call.callee_text.clone(),
            positional_args: call.positional_args.clone(),
            keyword_args: call.keyword_args.clone(),
            span: base_span.clone(),
        };
        let site = GraphCallSite {
            caller: node_id.to_string(),
            callee_text: call.callee_text.clone(),
            positional_args: call.positional_args,
            keyword_args: call.keyword_args,
            text: new_text[call.range.clone()].to_string(),
            span: base_span.clone(),
        };
        match model.resolve_callee(&probe) {
            crate::source_model::CalleeResolution::Function(callee)
                if graph.nodes.contains_key(&callee) =>
            {
                outgoing.push(Edge {
                    caller: node_id.to_string(),
                    callee,
                    site,
                });
            }
            _ => externals.push(site),
        }
    }

    // swap in the new text and outgoing sites
    let entry = graph.entry.clone();
    {
        let node = graph
            .nodes
            .get_mut(node_id)
            .ok_or_else(|| Error::NotFound(format!("graph node {node_id}")))?;
        node.text = new_text;
        node.external_calls = externals;
    }
    graph.edges.retain(|e| e.caller != node_id);
    graph.edges.extend(outgoing.clone());

    // refresh callee bookkeeping for this caller
    let callees_now: std::collections::BTreeSet<String> =
        outgoing.iter().map(|e| e.callee.clone()).collect();
    let all_ids: Vec<String> = graph.nodes.keys().cloned().collect();
    for id in all_ids {
        if id == node_id {
            continue;
        }
        let node = graph.nodes.get_mut(&id).expect("iterating live ids");
        node.inbound_sites.retain(|s| s.caller != node_id);
        if callees_now.contains(&id) && id != entry {
            for e in outgoing.iter().filter(|e| e.callee == id) {
                node.inbound_sites.push(e.site.clone());
            }
            node.callers.insert(node_id.to_string());
        } else {
            node.callers.remove(node_id);
        }
    }
    graph.prune_unreachable();
    Ok(())
}

/// One debloating pass in caller-first DFS order: propose, validate, apply
/// per node, then reconnect. Rejected or unparsable edits leave the node
/// untouched and the pass continues; gateway errors abort it.
pub fn debloat_graph(
    graph: &CallGraph,
    model: &SourceModel,
    exposed: &[ExposedParam],
    llm: &dyn LlmGateway,
    model_id: &str,
    diagnostics: &mut Vec<Diagnostic>,
) -> Result<CallGraph> {
    let mut out = graph.clone();
    let visit_order = out.order.clone();
    for node_id in visit_order {
        if !out.nodes.contains_key(&node_id) {
            continue; // pruned by an earlier edit
        }
        let proposal = propose_node_edit(&out, &node_id, llm, model_id, diagnostics)?;
        if proposal.is_empty() {
            continue;
        }
        let reasons = validate_edit(&out, &proposal, exposed);
        if reasons.is_empty() {
            apply_node_edit(&mut out, model, &proposal)?;
        } else {
            diagnostics.push(Diagnostic::new(
                "rejected-edit",
                serde_json::json!({
                    "node": node_id,
                    "reasons": reasons,
                })
                .to_string(),
            ));
        }
    }
    out.prune_unreachable();
    Ok(out)
}
