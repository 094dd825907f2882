//! Tool-specific call graph: DFS from the entry function over the source
//! model, external calls recorded but not expanded. Slices are emitted from
//! the graph in first-visit order; the debloater rewrites node texts and
//! prunes through [`CallGraph::remove_node`].

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use crate::diag::Diagnostic;
use crate::error::{Error, Result};
use crate::source_model::{CallSite, SourceModel, Span};
use crate::syntax::{self, Language};

/// Recursion guard; callees past this depth are treated as external.
const MAX_DEPTH: usize = 64;

/// A call reaching a graph node, with enough text to show in prompts.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GraphCallSite {
    pub caller: String,
    pub callee_text: String,
    pub positional_args: Vec<String>,
    pub keyword_args: Vec<(String, String)>,
    /// Verbatim call expression. Spans are file-accurate for sites taken from
    /// the initial parse and approximate after a caller has been rewritten.
    pub text: String,
    pub span: Span,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GraphNode {
    pub id: String,
    /// Current function text, dedented so it parses standalone. The debloater
    /// may rewrite it; the source model keeps the original.
    pub text: String,
    pub callers: BTreeSet<String>,
    pub inbound_sites: Vec<GraphCallSite>,
    pub external_calls: Vec<GraphCallSite>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Edge {
    pub caller: String,
    pub callee: String,
    pub site: GraphCallSite,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CallGraph {
    pub entry: String,
    pub language: Language,
    pub nodes: BTreeMap<String, GraphNode>,
    pub edges: Vec<Edge>,
    /// DFS first-visit order; entry first. Fixes slice ordering.
    pub order: Vec<String>,
    pub diagnostics: Vec<Diagnostic>,
}

/// Ordered, debloated, sanitized source text of all reachable functions.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CodeSlice {
    pub tool_name: String,
    pub language: Language,
    /// (qualified name, standalone text) in DFS first-visit order.
    pub functions: Vec<(String, String)>,
    /// Original identifier -> emitted identifier, filled by the sanitizer.
    pub rename_map: BTreeMap<String, String>,
    pub entry: String,
    pub node_count: usize,
    pub total_bytes: usize,
}

impl CodeSlice {
    /// Concatenated slice text, one blank line between functions.
    pub fn text(&self) -> String {
        let mut out = String::new();
        for (i, (_, text)) in self.functions.iter().enumerate() {
            if i > 0 {
                out.push_str("\n\n");
            }
            out.push_str(text.trim_end());
            out.push('\n');
        }
        out
    }

    pub fn recount(&mut self) {
        self.node_count = self.functions.len();
        self.total_bytes = self.text().len();
    }
}

fn graph_site(model: &SourceModel, site: &CallSite) -> GraphCallSite {
    let text = model
        .files
        .get(&site.span.file)
        .map(|src| src[site.span.start..site.span.end].to_string())
        .unwrap_or_else(|| site.callee_text.clone());
    GraphCallSite {
        caller: site.caller.clone(),
        callee_text: site.callee_text.clone(),
        positional_args: site.positional_args.clone(),
        keyword_args: site.keyword_args.clone(),
        text,
        span: site.span.clone(),
    }
}

/// Build the over-approximate call graph rooted at `entry`. Each codebase
/// callee becomes a node visited at most once; repeat encounters append the
/// caller and call site to the existing node. External callees are recorded
/// on the calling node and never expanded.
pub fn build_call_graph(model: &SourceModel, entry: &str) -> Result<CallGraph> {
    let entry_def = model
        .functions
        .get(entry)
        .ok_or_else(|| Error::NotFound(format!("entry function {entry}")))?;

    let mut graph = CallGraph {
        entry: entry.to_string(),
        language: model.language,
        nodes: BTreeMap::new(),
        edges: Vec::new(),
        order: Vec::new(),
        diagnostics: Vec::new(),
    };
    graph.nodes.insert(
        entry.to_string(),
        GraphNode {
            id: entry.to_string(),
            text: syntax::dedent(&entry_def.source_text),
            callers: BTreeSet::new(),
            inbound_sites: Vec::new(),
            external_calls: Vec::new(),
        },
    );
    graph.order.push(entry.to_string());

    // sites grouped by caller, already in source order from the model
    let mut sites_by_caller: BTreeMap<&str, Vec<&CallSite>> = BTreeMap::new();
    for site in &model.calls {
        sites_by_caller
            .entry(site.caller.as_str())
            .or_default()
            .push(site);
    }

    let mut stack: Vec<(String, usize)> = vec![(entry.to_string(), 0)];
    while let Some((current, depth)) = stack.pop() {
        let sites = sites_by_caller
            .get(current.as_str())
            .cloned()
            .unwrap_or_default();
        let mut discovered: Vec<String> = Vec::new();
        for site in sites {
            match model.resolve_callee(site) {
                crate::source_model::CalleeResolution::Function(callee) => {
                    if depth + 1 > MAX_DEPTH {
                        graph.diagnostics.push(Diagnostic::new(
                            "depth-cap",
                            format!("treating {callee} as external at depth {depth}"),
                        ));
                        let node = graph.nodes.get_mut(&current).expect("caller visited");
                        node.external_calls.push(graph_site(model, site));
                        continue;
                    }
                    let gsite = graph_site(model, site);
                    graph.edges.push(Edge {
                        caller: current.clone(),
                        callee: callee.clone(),
                        site: gsite.clone(),
                    });
                    if let Some(existing) = graph.nodes.get_mut(&callee) {
                        // entry keeps empty callers: it is the externally
                        // invoked interface even when recursion reaches it
                        if callee != graph.entry {
                            existing.callers.insert(current.clone());
                            existing.inbound_sites.push(gsite);
                        }
                    } else {
                        let def = &model.functions[&callee];
                        let mut node = GraphNode {
                            id: callee.clone(),
                            text: syntax::dedent(&def.source_text),
                            callers: BTreeSet::new(),
                            inbound_sites: Vec::new(),
                            external_calls: Vec::new(),
                        };
                        node.callers.insert(current.clone());
                        node.inbound_sites.push(gsite);
                        graph.nodes.insert(callee.clone(), node);
                        graph.order.push(callee.clone());
                        discovered.push(callee);
                    }
                }
                crate::source_model::CalleeResolution::External => {
                    let node = graph.nodes.get_mut(&current).expect("caller visited");
                    node.external_calls.push(graph_site(model, site));
                }
                crate::source_model::CalleeResolution::Ambiguous(candidates) => {
                    graph.diagnostics.push(
                        Diagnostic::new(
                            "ambiguous-callee",
                            format!(
                                "{} could be any of [{}]; treating as external",
                                site.callee_text,
                                candidates.join(", ")
                            ),
                        )
                        .at(site.span.locus()),
                    );
                    let node = graph.nodes.get_mut(&current).expect("caller visited");
                    node.external_calls.push(graph_site(model, site));
                }
            }
        }
        // push in reverse so the first-discovered callee is expanded first
        for callee in discovered.into_iter().rev() {
            stack.push((callee, depth + 1));
        }
    }

    Ok(graph)
}

impl CallGraph {
    /// Node ids reachable from the entry via current edges.
    pub fn reachable(&self) -> BTreeSet<String> {
        let mut adjacency: BTreeMap<&str, Vec<&str>> = BTreeMap::new();
        for e in &self.edges {
            adjacency
                .entry(e.caller.as_str())
                .or_default()
                .push(e.callee.as_str());
        }
        let mut seen: BTreeSet<String> = BTreeSet::new();
        let mut queue = vec![self.entry.as_str()];
        while let Some(id) = queue.pop() {
            if !seen.insert(id.to_string()) {
                continue;
            }
            for next in adjacency.get(id).into_iter().flatten() {
                if !seen.contains(*next) {
                    queue.push(next);
                }
            }
        }
        seen
    }

    /// Remove a node (never the entry) along with its edges, then drop any
    /// nodes left unreachable, transitively.
    pub fn remove_node(&mut self, id: &str) -> Result<()> {
        if id == self.entry {
            return Err(Error::InvalidOperation(
                "the entry node cannot be removed".into(),
            ));
        }
        if !self.nodes.contains_key(id) {
            return Err(Error::NotFound(format!("graph node {id}")));
        }
        self.nodes.remove(id);
        self.edges.retain(|e| e.caller != id && e.callee != id);
        self.prune_unreachable();
        Ok(())
    }

    /// Drop nodes unreachable from the entry and scrub dangling references.
    pub fn prune_unreachable(&mut self) {
        loop {
            let reachable = self.reachable();
            let before = self.nodes.len();
            self.nodes.retain(|id, _| reachable.contains(id));
            self.edges
                .retain(|e| reachable.contains(&e.caller) && reachable.contains(&e.callee));
            if self.nodes.len() == before {
                break;
            }
        }
        let live: BTreeSet<&String> = self.nodes.keys().collect();
        self.order.retain(|id| live.contains(id));
        let caller_live: BTreeSet<String> = self.nodes.keys().cloned().collect();
        for node in self.nodes.values_mut() {
            node.callers.retain(|c| caller_live.contains(c));
            node.inbound_sites
                .retain(|s| caller_live.contains(&s.caller));
        }
    }

    /// Deterministic JSON document for `inspect` output and golden tests.
    pub fn to_json(&self) -> serde_json::Value {
        serde_json::json!({
            "entry": self.entry,
            "language": self.language,
            "nodes": self.order.iter().map(|id| {
                let n = &self.nodes[id];
                serde_json::json!({
                    "id": n.id,
                    "callers": n.callers,
                    "inbound_sites": n.inbound_sites.iter().map(|s| s.text.clone()).collect::<Vec<_>>(),
                    "external_calls": n.external_calls.iter().map(|s| s.callee_text.clone()).collect::<Vec<_>>(),
                })
            }).collect::<Vec<_>>(),
            "edges": self.edges.iter().map(|e| {
                serde_json::json!({
                    "caller": e.caller,
                    "callee": e.callee,
                    "line": e.site.span.start_line,
                })
            }).collect::<Vec<_>>(),
        })
    }

    /// DOT text for visualization.
    pub fn to_dot(&self) -> String {
        let mut out = String::from("digraph call_graph {\n");
        for id in &self.order {
            let shape = if *id == self.entry { "box" } else { "ellipse" };
            out.push_str(&format!("  \"{id}\" [shape={shape}];\n"));
        }
        for e in &self.edges {
            out.push_str(&format!(
                "  \"{}\" -> \"{}\" [label=\"L{}\"];\n",
                e.caller, e.callee, e.site.span.start_line
            ));
        }
        out.push_str("}\n");
        out
    }
}

/// Emit the code slice for a graph: node texts in DFS first-visit order, the
/// entry first. The rename map stays empty until sanitization.
pub fn emit_slice(graph: &CallGraph, tool_name: &str) -> CodeSlice {
    let functions: Vec<(String, String)> = graph
        .order
        .iter()
        .map(|id| (id.clone(), graph.nodes[id].text.clone()))
        .collect();
    let mut slice = CodeSlice {
        tool_name: tool_name.to_string(),
        language: graph.language,
        functions,
        rename_map: BTreeMap::new(),
        entry: graph.entry.clone(),
        node_count: 0,
        total_bytes: 0,
    };
    slice.recount();
    slice
}
