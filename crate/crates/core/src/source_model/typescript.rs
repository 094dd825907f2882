//! Typescript extraction: function declarations, class methods (with
//! decorators), const-bound arrow/function expressions, call sites, and
//! import bindings.

use tree_sitter::{Node, Tree};

use super::{
    CallSite, Decorator, FileExtract, FileIndex, FunctionDef, ImportBinding, Param, ParamKind,
};
use crate::syntax::{node_text, string_literal_value};

pub(crate) fn extract(file: &str, src: &str, tree: &Tree, index: &FileIndex) -> FileExtract {
    let mut out = FileExtract::default();
    let mut scope: Vec<String> = Vec::new();
    visit(tree.root_node(), file, src, index, &mut scope, &mut out);
    out
}

fn qualified(file: &str, scope: &[String]) -> String {
    format!("{file}::{}", scope.join("."))
}

fn visit(
    node: Node<'_>,
    file: &str,
    src: &str,
    index: &FileIndex,
    scope: &mut Vec<String>,
    out: &mut FileExtract,
) {
    match node.kind() {
        "function_declaration" => {
            if let Some(name_node) = node.child_by_field_name("name") {
                let name = node_text(name_node, src).to_string();
                scope.push(name);
                push_function(node, node, Vec::new(), file, src, index, scope, out);
                if let Some(body) = node.child_by_field_name("body") {
                    visit_children(body, file, src, index, scope, out);
                }
                scope.pop();
            }
            return;
        }
        "class_declaration" => {
            if let Some(name_node) = node.child_by_field_name("name") {
                scope.push(node_text(name_node, src).to_string());
                if let Some(body) = node.child_by_field_name("body") {
                    visit_class_body(body, file, src, index, scope, out);
                }
                scope.pop();
            }
            return;
        }
        "lexical_declaration" | "variable_declaration" => {
            let mut cursor = node.walk();
            for decl in node.children(&mut cursor) {
                if decl.kind() != "variable_declarator" {
                    continue;
                }
                let name = decl.child_by_field_name("name");
                let value = decl.child_by_field_name("value");
                if let (Some(name), Some(value)) = (name, value) {
                    if matches!(
                        value.kind(),
                        "arrow_function" | "function_expression" | "function"
                    ) && name.kind() == "identifier"
                    {
                        scope.push(node_text(name, src).to_string());
                        push_function(value, node, Vec::new(), file, src, index, scope, out);
                        if let Some(body) = value.child_by_field_name("body") {
                            visit_children(body, file, src, index, scope, out);
                        }
                        scope.pop();
                        continue;
                    }
                }
                visit_children(decl, file, src, index, scope, out);
            }
            return;
        }
        "import_statement" => {
            extract_import(node, src, out);
        }
        "call_expression" => {
            record_call(node, file, src, index, scope, out);
        }
        _ => {}
    }
    visit_children(node, file, src, index, scope, out);
}

fn visit_children(
    node: Node<'_>,
    file: &str,
    src: &str,
    index: &FileIndex,
    scope: &mut Vec<String>,
    out: &mut FileExtract,
) {
    let mut cursor = node.walk();
    for child in node.children(&mut cursor) {
        visit(child, file, src, index, scope, out);
    }
}

/// Class bodies carry decorators as siblings preceding the decorated method.
fn visit_class_body(
    body: Node<'_>,
    file: &str,
    src: &str,
    index: &FileIndex,
    scope: &mut Vec<String>,
    out: &mut FileExtract,
) {
    let mut pending: Vec<Node<'_>> = Vec::new();
    let mut cursor = body.walk();
    for child in body.children(&mut cursor) {
        match child.kind() {
            "decorator" => pending.push(child),
            "method_definition" => {
                let decorators = pending
                    .iter()
                    .map(|d| decorator_from_node(*d, src, index, file))
                    .collect();
                let full_start = pending
                    .first()
                    .map(|d| d.start_byte())
                    .unwrap_or(child.start_byte());
                pending.clear();
                if let Some(name_node) = child.child_by_field_name("name") {
                    scope.push(node_text(name_node, src).to_string());
                    push_method(child, full_start, decorators, file, src, index, scope, out);
                    if let Some(b) = child.child_by_field_name("body") {
                        visit_children(b, file, src, index, scope, out);
                    }
                    scope.pop();
                }
            }
            _ => {
                pending.clear();
                visit(child, file, src, index, scope, out);
            }
        }
    }
}

#[allow(clippy::too_many_arguments)]
fn push_function(
    def_node: Node<'_>,
    full_node: Node<'_>,
    decorators: Vec<Decorator>,
    file: &str,
    src: &str,
    index: &FileIndex,
    scope: &[String],
    out: &mut FileExtract,
) {
    let body = def_node.child_by_field_name("body").unwrap_or(def_node);
    out.functions.push(FunctionDef {
        qualified_name: qualified(file, scope),
        params: extract_params(def_node, src),
        decorators,
        body_span: index.span(file, body.byte_range()),
        full_span: index.span(file, full_node.byte_range()),
        source_text: node_text(full_node, src).to_string(),
    });
}

#[allow(clippy::too_many_arguments)]
fn push_method(
    method: Node<'_>,
    full_start: usize,
    decorators: Vec<Decorator>,
    file: &str,
    src: &str,
    index: &FileIndex,
    scope: &[String],
    out: &mut FileExtract,
) {
    let body = method.child_by_field_name("body").unwrap_or(method);
    let full_range = full_start..method.end_byte();
    out.functions.push(FunctionDef {
        qualified_name: qualified(file, scope),
        params: extract_params(method, src),
        decorators,
        body_span: index.span(file, body.byte_range()),
        full_span: index.span(file, full_range.clone()),
        source_text: src[full_range].to_string(),
    });
}

fn decorator_from_node(node: Node<'_>, src: &str, index: &FileIndex, file: &str) -> Decorator {
    let inner = node.named_child(0);
    let (name_path, args) = match inner {
        Some(call) if call.kind() == "call_expression" => {
            let name = call
                .child_by_field_name("function")
                .map(|f| node_text(f, src).to_string())
                .unwrap_or_default();
            let mut args = Vec::new();
            if let Some(arg_list) = call.child_by_field_name("arguments") {
                let mut cursor = arg_list.walk();
                for arg in arg_list.children(&mut cursor) {
                    if arg.is_named() && arg.kind() != "comment" {
                        args.push((None, node_text(arg, src).to_string()));
                    }
                }
            }
            (name, args)
        }
        Some(other) => (node_text(other, src).to_string(), Vec::new()),
        None => (String::new(), Vec::new()),
    };
    Decorator {
        name_path,
        args,
        span: index.span(file, node.byte_range()),
    }
}

fn record_call(
    node: Node<'_>,
    file: &str,
    src: &str,
    index: &FileIndex,
    scope: &[String],
    out: &mut FileExtract,
) {
    let Some(callee) = node.child_by_field_name("function") else {
        return;
    };
    let mut positional = Vec::new();
    if let Some(args) = node.child_by_field_name("arguments") {
        let mut cursor = args.walk();
        for arg in args.children(&mut cursor) {
            if arg.is_named() && arg.kind() != "comment" {
                positional.push(node_text(arg, src).to_string());
            }
        }
    }
    let site = CallSite {
        caller: if scope.is_empty() {
            file.to_string()
        } else {
            qualified(file, scope)
        },
        callee_text: node_text(callee, src).to_string(),
        positional_args: positional,
        keyword_args: Vec::new(),
        span: index.span(file, node.byte_range()),
    };
    if scope.is_empty() {
        out.module_calls.push(site);
    } else {
        out.calls.push(site);
    }
}

fn extract_import(node: Node<'_>, src: &str, out: &mut FileExtract) {
    let Some(source) = node.child_by_field_name("source") else {
        return;
    };
    let Some(module) = string_literal_value(source, src) else {
        return;
    };
    let mut cursor = node.walk();
    for clause in node.children(&mut cursor) {
        if clause.kind() != "import_clause" {
            continue;
        }
        let mut cc = clause.walk();
        for item in clause.children(&mut cc) {
            match item.kind() {
                "identifier" => out.imports.push(ImportBinding {
                    alias: node_text(item, src).to_string(),
                    module: module.clone(),
                    member: Some("default".to_string()),
                }),
                "namespace_import" => {
                    if let Some(name) = item.named_child(0) {
                        out.imports.push(ImportBinding {
                            alias: node_text(name, src).to_string(),
                            module: module.clone(),
                            member: None,
                        });
                    }
                }
                "named_imports" => {
                    let mut ic = item.walk();
                    for spec in item.children(&mut ic) {
                        if spec.kind() != "import_specifier" {
                            continue;
                        }
                        let name = spec
                            .child_by_field_name("name")
                            .map(|n| node_text(n, src).to_string());
                        let alias = spec
                            .child_by_field_name("alias")
                            .map(|n| node_text(n, src).to_string());
                        if let Some(name) = name {
                            out.imports.push(ImportBinding {
                                alias: alias.unwrap_or_else(|| name.clone()),
                                module: module.clone(),
                                member: Some(name),
                            });
                        }
                    }
                }
                _ => {}
            }
        }
    }
}

fn extract_params(def_node: Node<'_>, src: &str) -> Vec<Param> {
    let Some(params) = def_node.child_by_field_name("parameters") else {
        return Vec::new();
    };
    let mut out = Vec::new();
    let mut cursor = params.walk();
    for child in params.children(&mut cursor) {
        match child.kind() {
            "required_parameter" | "optional_parameter" => {
                let name = child
                    .child_by_field_name("pattern")
                    .map(|p| node_text(p, src).to_string())
                    .unwrap_or_default();
                let default = child
                    .child_by_field_name("value")
                    .map(|v| node_text(v, src).to_string());
                let optional = child.kind() == "optional_parameter" || default.is_some();
                if name.starts_with("...") {
                    out.push(Param {
                        name: name.trim_start_matches("...").to_string(),
                        has_default: false,
                        default_text: None,
                        annotation_text: None,
                        kind: ParamKind::VariadicPositional,
                    });
                    continue;
                }
                out.push(Param {
                    name,
                    has_default: optional,
                    default_text: default,
                    annotation_text: child
                        .child_by_field_name("type")
                        .map(|t| node_text(t, src).trim_start_matches(':').trim().to_string()),
                    kind: ParamKind::Positional,
                });
            }
            "rest_pattern" => {
                if let Some(inner) = child.named_child(0) {
                    out.push(Param {
                        name: node_text(inner, src).to_string(),
                        has_default: false,
                        default_text: None,
                        annotation_text: None,
                        kind: ParamKind::VariadicPositional,
                    });
                }
            }
            _ => {}
        }
    }
    out
}
