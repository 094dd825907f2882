//! Initial description generation from a sanitized minimal slice: a concise
//! summary, a functionality list (full mode only), and an input schema
//! cross-checked against the parameters the registration construct exposes.

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::call_graph::CodeSlice;
use crate::diag::Diagnostic;
use crate::entry_finder::ExposedParam;
use crate::error::{Error, Result};
use crate::gateway::{prompts, LlmGateway, LlmPurpose, LlmRequest};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DescMode {
    Full,
    Lite,
}

impl std::str::FromStr for DescMode {
    type Err = String;
    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "full" => Ok(DescMode::Full),
            "lite" => Ok(DescMode::Lite),
            other => Err(format!("unknown mode: {other} (expected full|lite)")),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ArgSpec {
    pub name: String,
    #[serde(rename = "type")]
    pub type_text: String,
    pub required: bool,
    pub description: String,
    #[serde(default)]
    pub constraints: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Provenance {
    pub slice_hash: String,
    pub generator: String,
    pub timestamp: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ToolDescription {
    pub tool_name: String,
    pub summary: String,
    /// Present iff mode is full.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub functionalities: Option<Vec<String>>,
    pub args: Vec<ArgSpec>,
    pub mode: DescMode,
    pub provenance: Provenance,
}

pub fn slice_hash(slice: &CodeSlice) -> String {
    let mut hasher = Sha256::new();
    hasher.update(slice.text().as_bytes());
    hex::encode(hasher.finalize())
}

#[derive(Debug, Deserialize)]
struct WireArg {
    name: String,
    #[serde(rename = "type", default)]
    type_text: Option<String>,
    #[serde(default)]
    description: String,
    #[serde(default)]
    constraints: Vec<String>,
}

#[derive(Debug, Deserialize)]
struct WireDescription {
    summary: String,
    #[serde(default)]
    functionalities: Option<Vec<String>>,
    #[serde(default)]
    args: Vec<WireArg>,
}

fn exposed_params_label(
    exposed: &[ExposedParam],
    rename: &std::collections::BTreeMap<String, String>,
) -> String {
    exposed
        .iter()
        .map(|p| {
            let shown = rename
                .get(&p.name)
                .cloned()
                .unwrap_or_else(|| p.name.clone());
            if p.required {
                shown
            } else {
                format!("{shown}?")
            }
        })
        .collect::<Vec<_>>()
        .join(", ")
}

fn timestamp_fallback() -> String {
    let secs = std::time::SystemTime::now()
        .duration_since(std::time::UNIX_EPOCH)
        .map(|d| d.as_secs())
        .unwrap_or(0);
    format!("unix:{secs}")
}

/// Generate the initial description for a sanitized slice. The prompt holds
/// exactly the slice, the fixed template, and the output schema; the answer
/// is cross-checked against the exposed parameters: invented args are
/// dropped, missing ones added empty, and arg names are reported under their
/// original (pre-sanitization) spelling.
pub fn generate_description(
    slice: &CodeSlice,
    tool_name: &str,
    mode: DescMode,
    exposed: &[ExposedParam],
    llm: &dyn LlmGateway,
    model_id: &str,
    diagnostics: &mut Vec<Diagnostic>,
) -> Result<ToolDescription> {
    let slice_text = slice.text();
    if crate::syntax::count_comment_tokens(&slice_text, slice.language) != 0 {
        return Err(Error::InvalidOperation(
            "slice must be sanitized before description generation".into(),
        ));
    }

    let mode_label = match mode {
        DescMode::Full => "full",
        DescMode::Lite => "lite",
    };
    let exposed_label = exposed_params_label(exposed, &slice.rename_map);
    let prompt = prompts::descgen(tool_name, mode_label, &exposed_label, &slice_text);
    let schema = prompts::descgen_schema(mode == DescMode::Lite);
    let req = LlmRequest::new(
        LlmPurpose::Descgen,
        prompt.system.clone(),
        prompt.user.clone(),
        schema.clone(),
        model_id,
    );
    let completion = llm.complete(&req)?;

    let (wire, recorded_at) = match serde_json::from_str::<WireDescription>(&completion.text) {
        Ok(w) => (w, completion.recorded_at),
        Err(first_err) => {
            // one constrained repair retry
            let retry_user = format!(
                "{}\n\nThe previous answer was not valid JSON for the schema. Answer again with strictly valid JSON only.",
                prompt.user
            );
            let retry = LlmRequest::new(
                LlmPurpose::Descgen,
                prompt.system,
                retry_user,
                schema,
                model_id,
            );
            let second = llm.complete(&retry)?;
            match serde_json::from_str::<WireDescription>(&second.text) {
                Ok(w) => (w, second.recorded_at),
                Err(second_err) => {
                    return Err(Error::GenerationFailed(format!(
                        "unparsable description after retry: {first_err}; then {second_err}"
                    )))
                }
            }
        }
    };

    if wire.summary.trim().is_empty() {
        return Err(Error::GenerationFailed("empty summary".into()));
    }

    // map sanitized arg names back to original spellings
    let reverse: std::collections::BTreeMap<&str, &str> = slice
        .rename_map
        .iter()
        .map(|(orig, emitted)| (emitted.as_str(), orig.as_str()))
        .collect();
    let mut args: Vec<ArgSpec> = Vec::new();
    for w in wire.args {
        let original = reverse.get(w.name.as_str()).copied().unwrap_or(&w.name);
        match exposed.iter().find(|p| p.name == original) {
            Some(p) => {
                if args.iter().any(|a| a.name == p.name) {
                    continue;
                }
                args.push(ArgSpec {
                    name: p.name.clone(),
                    type_text: w.type_text.unwrap_or_else(|| "string".into()),
                    required: p.required,
                    description: w.description,
                    constraints: w.constraints,
                });
            }
            None => diagnostics.push(Diagnostic::new(
                "invented-arg",
                format!("{tool_name}: dropped model-invented argument '{}'", w.name),
            )),
        }
    }
    for p in exposed {
        if !args.iter().any(|a| a.name == p.name) {
            diagnostics.push(Diagnostic::new(
                "missing-arg",
                format!("{tool_name}: model omitted exposed parameter '{}'", p.name),
            ));
            args.push(ArgSpec {
                name: p.name.clone(),
                type_text: "string".into(),
                required: p.required,
                description: String::new(),
                constraints: Vec::new(),
            });
        }
    }
    // keep registration order
    args.sort_by_key(|a| {
        exposed
            .iter()
            .position(|p| p.name == a.name)
            .unwrap_or(usize::MAX)
    });

    let functionalities = match mode {
        DescMode::Full => Some(wire.functionalities.unwrap_or_default()),
        DescMode::Lite => {
            if wire.functionalities.is_some() {
                diagnostics.push(Diagnostic::new(
                    "mode-violation",
                    format!("{tool_name}: lite answer carried functionalities; dropped"),
                ));
            }
            None
        }
    };

    Ok(ToolDescription {
        tool_name: tool_name.to_string(),
        summary: wire.summary.trim().to_string(),
        functionalities,
        args,
        mode,
        provenance: Provenance {
            slice_hash: slice_hash(slice),
            generator: model_id.to_string(),
            timestamp: recorded_at.unwrap_or_else(timestamp_fallback),
        },
    })
}

/// Drop the functionality list, keeping summary and input schema.
pub fn to_lite(desc: &ToolDescription) -> Result<ToolDescription> {
    if desc.mode == DescMode::Lite {
        return Err(Error::InvalidOperation(
            "description is already in lite mode".into(),
        ));
    }
    let mut out = desc.clone();
    out.functionalities = None;
    out.mode = DescMode::Lite;
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::call_graph::CodeSlice;
    use crate::gateway::Completion;
    use crate::syntax::Language;

    fn sanitized_slice(text: &str) -> CodeSlice {
        let mut s = CodeSlice {
            tool_name: "t".into(),
            language: Language::Python,
            functions: vec![("s.py::f".into(), text.to_string())],
            rename_map: Default::default(),
            entry: "s.py::f".into(),
            node_count: 0,
            total_bytes: 0,
        };
        s.recount();
        s
    }

    struct CannedGateway {
        responses: std::sync::Mutex<Vec<String>>,
    }
    impl CannedGateway {
        fn new(responses: &[&str]) -> Self {
            Self {
                responses: std::sync::Mutex::new(
                    responses.iter().rev().map(|s| s.to_string()).collect(),
                ),
            }
        }
    }
    impl LlmGateway for CannedGateway {
        fn complete(&self, _req: &LlmRequest) -> Result<Completion> {
            let mut q = self.responses.lock().unwrap();
            let text = q.pop().unwrap_or_else(|| "{}".into());
            Ok(Completion {
                text,
                recorded_at: Some("1970-01-01T00:00:00Z".into()),
            })
        }
        fn scope(&self) -> &str {
            "test"
        }
    }

    fn exposed(names: &[(&str, bool)]) -> Vec<ExposedParam> {
        names
            .iter()
            .map(|(n, r)| ExposedParam {
                name: n.to_string(),
                required: *r,
            })
            .collect()
    }

    #[test]
    fn full_mode_cross_checks_args() {
        let slice = sanitized_slice("def f(query, limit=10):\n    return query\n");
        let gw = CannedGateway::new(&[r#"{
            "summary": "Searches things.",
            "functionalities": ["Searches by query"],
            "args": [
                {"name": "query", "type": "string", "required": true, "description": "the query"},
                {"name": "invented_arg", "type": "string", "required": false, "description": "made up"}
            ]
        }"#]);
        let mut diags = Vec::new();
        let desc = generate_description(
            &slice,
            "search",
            DescMode::Full,
            &exposed(&[("query", true), ("limit", false)]),
            &gw,
            "m",
            &mut diags,
        )
        .unwrap();
        assert_eq!(desc.summary, "Searches things.");
        let names: Vec<&str> = desc.args.iter().map(|a| a.name.as_str()).collect();
        assert_eq!(names, vec!["query", "limit"]);
        assert!(desc.args[1].description.is_empty());
        assert!(diags.iter().any(|d| d.kind == "invented-arg"));
        assert!(diags.iter().any(|d| d.kind == "missing-arg"));
        assert!(desc.functionalities.is_some());
    }

    #[test]
    fn lite_mode_omits_functionalities() {
        let slice = sanitized_slice("def f(query):\n    return query\n");
        let gw = CannedGateway::new(&[r#"{"summary": "Does a thing.", "args": []}"#]);
        let mut diags = Vec::new();
        let desc = generate_description(
            &slice,
            "t",
            DescMode::Lite,
            &exposed(&[("query", true)]),
            &gw,
            "m",
            &mut diags,
        )
        .unwrap();
        assert!(desc.functionalities.is_none());
        assert_eq!(desc.mode, DescMode::Lite);
        let json = serde_json::to_value(&desc).unwrap();
        assert!(json.get("functionalities").is_none());
    }

    #[test]
    fn unsanitized_slice_is_refused() {
        let slice = sanitized_slice("def f(q):\n    # comment\n    return q\n");
        let gw = CannedGateway::new(&[]);
        let mut diags = Vec::new();
        let err = generate_description(&slice, "t", DescMode::Full, &[], &gw, "m", &mut diags)
            .unwrap_err();
        assert!(matches!(err, Error::InvalidOperation(_)));
    }

    #[test]
    fn one_repair_retry_then_generation_failed() {
        let slice = sanitized_slice("def f(q):\n    return q\n");
        let gw = CannedGateway::new(&["not json", "still not json"]);
        let mut diags = Vec::new();
        let err = generate_description(&slice, "t", DescMode::Full, &[], &gw, "m", &mut diags)
            .unwrap_err();
        assert!(matches!(err, Error::GenerationFailed(_)));

        let gw2 = CannedGateway::new(&[
            "garbage",
            r#"{"summary": "ok", "functionalities": [], "args": []}"#,
        ]);
        let desc =
            generate_description(&slice, "t", DescMode::Full, &[], &gw2, "m", &mut diags).unwrap();
        assert_eq!(desc.summary, "ok");
    }

    #[test]
    fn renamed_args_map_back_to_original_names() {
        let mut slice = sanitized_slice("def f(q_renamed):\n    return q_renamed\n");
        slice
            .rename_map
            .insert("query_with_a_very_long_name".into(), "q_renamed".into());
        let gw = CannedGateway::new(&[r#"{
            "summary": "s",
            "functionalities": [],
            "args": [{"name": "q_renamed", "type": "string", "required": true, "description": "d"}]
        }"#]);
        let mut diags = Vec::new();
        let desc = generate_description(
            &slice,
            "t",
            DescMode::Full,
            &exposed(&[("query_with_a_very_long_name", true)]),
            &gw,
            "m",
            &mut diags,
        )
        .unwrap();
        assert_eq!(desc.args[0].name, "query_with_a_very_long_name");
        assert!(diags.is_empty());
    }

    #[test]
    fn to_lite_drops_functionalities_and_rejects_lite_input() {
        let slice = sanitized_slice("def f(q):\n    return q\n");
        let gw = CannedGateway::new(&[
            r#"{"summary": "s", "functionalities": ["a", "b", "c", "d"], "args": []}"#,
        ]);
        let mut diags = Vec::new();
        let full =
            generate_description(&slice, "t", DescMode::Full, &[], &gw, "m", &mut diags).unwrap();
        let lite = to_lite(&full).unwrap();
        assert!(lite.functionalities.is_none());
        assert_eq!(lite.summary, full.summary);
        assert_eq!(lite.args, full.args);
        assert_eq!(lite.mode, DescMode::Lite);
        assert!(matches!(to_lite(&lite), Err(Error::InvalidOperation(_))));

        // full with empty functionality list still lite-converts minimally
        let gw2 = CannedGateway::new(&[r#"{"summary": "s", "functionalities": [], "args": []}"#]);
        let full2 =
            generate_description(&slice, "t", DescMode::Full, &[], &gw2, "m", &mut diags).unwrap();
        let lite2 = to_lite(&full2).unwrap();
        assert!(lite2.functionalities.is_none());
    }
}
