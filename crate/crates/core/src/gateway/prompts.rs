//! Versioned prompt templates. Each template file holds the system text, a
//! `---` separator, and the user text with `{placeholder}` slots. Cassette
//! keys hash the rendered prompts, so edits here invalidate recorded
//! cassettes by construction.

use serde_json::{json, Value};

pub const PROMPT_VERSION: &str = "v1";

pub struct RenderedPrompt {
    pub system: String,
    pub user: String,
}

fn render(template: &str, slots: &[(&str, &str)]) -> RenderedPrompt {
    let (system, user) = template
        .split_once("\n---\n")
        .expect("template has a system/user separator");
    let mut user = user.to_string();
    for (name, value) in slots {
        user = user.replace(&format!("{{{name}}}"), value);
    }
    RenderedPrompt {
        system: system.to_string(),
        user,
    }
}

pub fn entry_fallback(tool_name: &str, function_list: &str, contexts: &str) -> RenderedPrompt {
    render(
        include_str!("../../prompts/entry_fallback.txt"),
        &[
            ("tool_name", tool_name),
            ("function_list", function_list),
            ("contexts", contexts),
        ],
    )
}

pub fn entry_fallback_schema() -> Value {
    json!({
        "type": "object",
        "properties": {"entry_function": {"type": "string"}},
        "required": ["entry_function"],
        "additionalProperties": false
    })
}

pub fn debloat(
    function_name: &str,
    numbered_source: &str,
    call_site_section: &str,
) -> RenderedPrompt {
    render(
        include_str!("../../prompts/debloat.txt"),
        &[
            ("function_name", function_name),
            ("numbered_source", numbered_source),
            ("call_site_section", call_site_section),
        ],
    )
}

pub fn debloat_schema() -> Value {
    json!({
        "type": "object",
        "properties": {
            "unreachable": {"type": "boolean"},
            "edits": {
                "type": "array",
                "items": {
                    "type": "object",
                    "properties": {
                        "action": {"enum": ["delete", "replace"]},
                        "start_line": {"type": "integer"},
                        "end_line": {"type": "integer"},
                        "replacement": {"type": "string"},
                        "rationale": {"type": "string"}
                    },
                    "required": ["action", "start_line", "end_line"],
                    "additionalProperties": false
                }
            }
        },
        "required": ["unreachable", "edits"],
        "additionalProperties": false
    })
}

pub fn bias_filter(identifier_list: &str, context: &str) -> RenderedPrompt {
    render(
        include_str!("../../prompts/bias_filter.txt"),
        &[("identifier_list", identifier_list), ("context", context)],
    )
}

pub fn bias_filter_schema() -> Value {
    json!({
        "type": "object",
        "properties": {
            "verdicts": {
                "type": "array",
                "items": {
                    "type": "object",
                    "properties": {
                        "identifier": {"type": "string"},
                        "biased_tokens": {"type": "array", "items": {"type": "string"}}
                    },
                    "required": ["identifier", "biased_tokens"],
                    "additionalProperties": false
                }
            }
        },
        "required": ["verdicts"],
        "additionalProperties": false
    })
}

pub fn descgen(tool_name: &str, mode: &str, exposed_params: &str, slice: &str) -> RenderedPrompt {
    render(
        include_str!("../../prompts/descgen.txt"),
        &[
            ("tool_name", tool_name),
            ("mode", mode),
            ("exposed_params", exposed_params),
            ("slice", slice),
        ],
    )
}

pub fn descgen_schema(lite: bool) -> Value {
    let mut properties = json!({
        "summary": {"type": "string"},
        "args": {
            "type": "array",
            "items": {
                "type": "object",
                "properties": {
                    "name": {"type": "string"},
                    "type": {"type": "string"},
                    "required": {"type": "boolean"},
                    "description": {"type": "string"},
                    "constraints": {"type": "array", "items": {"type": "string"}}
                },
                "required": ["name", "type", "required", "description"],
                "additionalProperties": false
            }
        }
    });
    let mut required = vec!["summary", "args"];
    if !lite {
        properties["functionalities"] = json!({"type": "array", "items": {"type": "string"}});
        required.push("functionalities");
    }
    json!({
        "type": "object",
        "properties": properties,
        "required": required,
        "additionalProperties": false
    })
}

pub fn stmt_extract(tool_name: &str, statements: &str) -> RenderedPrompt {
    render(
        include_str!("../../prompts/stmt_extract.txt"),
        &[("tool_name", tool_name), ("statements", statements)],
    )
}

pub fn stmt_extract_schema() -> Value {
    json!({
        "type": "object",
        "properties": {
            "statements": {
                "type": "array",
                "items": {
                    "type": "object",
                    "properties": {
                        "id": {"type": "string"},
                        "verifiable": {"type": "boolean"},
                        "discard_reason": {"type": "string"}
                    },
                    "required": ["id", "verifiable"],
                    "additionalProperties": false
                }
            }
        },
        "required": ["statements"],
        "additionalProperties": false
    })
}

pub fn task_synth(
    tool_name: &str,
    description: &str,
    statement_id: &str,
    statement_text: &str,
) -> RenderedPrompt {
    render(
        include_str!("../../prompts/task_synth.txt"),
        &[
            ("tool_name", tool_name),
            ("description", description),
            ("statement_id", statement_id),
            ("statement_text", statement_text),
        ],
    )
}

pub fn task_synth_schema() -> Value {
    json!({
        "type": "object",
        "properties": {
            "instruction": {"type": "string"},
            "expected_observable": {"type": "string"}
        },
        "required": ["instruction", "expected_observable"],
        "additionalProperties": false
    })
}

pub fn tool_call_synth(instruction: &str, description: &str, attempts: &str) -> RenderedPrompt {
    render(
        include_str!("../../prompts/tool_call_synth.txt"),
        &[
            ("instruction", instruction),
            ("description", description),
            ("attempts", attempts),
        ],
    )
}

pub fn tool_call_synth_schema() -> Value {
    json!({
        "type": "object",
        "properties": {
            "tool_name": {"type": "string"},
            "arguments": {"type": "object"},
            "done": {"type": "boolean"},
            "reason": {"type": "string"}
        },
        "additionalProperties": false
    })
}

#[allow(clippy::too_many_arguments)]
pub fn judge(
    statement_id: &str,
    statement_text: &str,
    instruction: &str,
    expected_observable: &str,
    log: &str,
) -> RenderedPrompt {
    render(
        include_str!("../../prompts/judge.txt"),
        &[
            ("statement_id", statement_id),
            ("statement_text", statement_text),
            ("instruction", instruction),
            ("expected_observable", expected_observable),
            ("log", log),
        ],
    )
}

pub fn judge_schema() -> Value {
    json!({
        "type": "object",
        "properties": {
            "outcome": {"enum": ["pass", "fail", "inconclusive"]},
            "rationale": {"type": "string"},
            "evidence": {"type": "array", "items": {"type": "integer"}},
            "constraint": {
                "type": "object",
                "properties": {
                    "arg": {"type": "string"},
                    "text": {"type": "string"}
                },
                "required": ["arg", "text"],
                "additionalProperties": false
            }
        },
        "required": ["outcome", "rationale", "evidence"],
        "additionalProperties": false
    })
}
