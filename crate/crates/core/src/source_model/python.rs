//! Python extraction: functions (including methods and nested defs),
//! decorators, parameters, call sites, and import bindings.

use tree_sitter::{Node, Tree};

use super::{
    CallSite, Decorator, FileExtract, FileIndex, FunctionDef, ImportBinding, Param, ParamKind,
};
use crate::syntax::node_text;

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
        "function_definition" => {
            let Some(name_node) = node.child_by_field_name("name") else {
                return;
            };
            let name = node_text(name_node, src).to_string();
            scope.push(name);
            let qn = qualified(file, scope);

            // decorators live on a wrapping decorated_definition
            let (full_node, decorators) = match node.parent() {
                Some(p) if p.kind() == "decorated_definition" => {
                    (p, extract_decorators(p, src, index, file))
                }
                _ => (node, Vec::new()),
            };
            let body = node.child_by_field_name("body").unwrap_or(node);

            out.functions.push(FunctionDef {
                qualified_name: qn.clone(),
                params: extract_params(node, src),
                decorators,
                body_span: index.span(file, body.byte_range()),
                full_span: index.span(file, full_node.byte_range()),
                source_text: node_text(full_node, src).to_string(),
            });

            let mut cursor = body.walk();
            for child in body.children(&mut cursor) {
                visit(child, file, src, index, scope, out);
            }
            scope.pop();
            return;
        }
        "class_definition" => {
            let Some(name_node) = node.child_by_field_name("name") else {
                return;
            };
            scope.push(node_text(name_node, src).to_string());
            if let Some(body) = node.child_by_field_name("body") {
                let mut cursor = body.walk();
                for child in body.children(&mut cursor) {
                    visit(child, file, src, index, scope, out);
                }
            }
            scope.pop();
            return;
        }
        "import_statement" => {
            let mut cursor = node.walk();
            for child in node.children(&mut cursor) {
                match child.kind() {
                    "dotted_name" => {
                        let module = node_text(child, src).to_string();
                        out.imports.push(ImportBinding {
                            alias: module.clone(),
                            module,
                            member: None,
                        });
                    }
                    "aliased_import" => {
                        let name = child.child_by_field_name("name");
                        let alias = child.child_by_field_name("alias");
                        if let (Some(n), Some(a)) = (name, alias) {
                            out.imports.push(ImportBinding {
                                alias: node_text(a, src).to_string(),
                                module: node_text(n, src).to_string(),
                                member: None,
                            });
                        }
                    }
                    _ => {}
                }
            }
        }
        "import_from_statement" => {
            let module = node
                .child_by_field_name("module_name")
                .map(|m| node_text(m, src).to_string())
                .unwrap_or_default();
            let mut cursor = node.walk();
            for child in node.children(&mut cursor) {
                match child.kind() {
                    "dotted_name"
                        if Some(child.byte_range())
                            != node
                                .child_by_field_name("module_name")
                                .map(|m| m.byte_range()) =>
                    {
                        let member = node_text(child, src).to_string();
                        out.imports.push(ImportBinding {
                            alias: member.clone(),
                            module: module.clone(),
                            member: Some(member),
                        });
                    }
                    "aliased_import" => {
                        let name = child.child_by_field_name("name");
                        let alias = child.child_by_field_name("alias");
                        if let (Some(n), Some(a)) = (name, alias) {
                            out.imports.push(ImportBinding {
                                alias: node_text(a, src).to_string(),
                                module: module.clone(),
                                member: Some(node_text(n, src).to_string()),
                            });
                        }
                    }
                    _ => {}
                }
            }
        }
        "call" => {
            record_call(node, file, src, index, scope, out);
            // keep walking: arguments may contain nested calls or lambdas
        }
        _ => {}
    }
    let mut cursor = node.walk();
    for child in node.children(&mut cursor) {
        visit(child, file, src, index, scope, out);
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
    let mut keyword = Vec::new();
    if let Some(args) = node.child_by_field_name("arguments") {
        let mut cursor = args.walk();
        for arg in args.children(&mut cursor) {
            if !arg.is_named() || arg.kind() == "comment" {
                continue;
            }
            if arg.kind() == "keyword_argument" {
                let name = arg.child_by_field_name("name");
                let value = arg.child_by_field_name("value");
                if let (Some(n), Some(v)) = (name, value) {
                    keyword.push((node_text(n, src).to_string(), node_text(v, src).to_string()));
                }
            } else {
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
        keyword_args: keyword,
        span: index.span(file, node.byte_range()),
    };
    if scope.is_empty() {
        out.module_calls.push(site);
    } else {
        out.calls.push(site);
    }
}

fn extract_decorators(
    decorated: Node<'_>,
    src: &str,
    index: &FileIndex,
    file: &str,
) -> Vec<Decorator> {
    let mut out = Vec::new();
    let mut cursor = decorated.walk();
    for child in decorated.children(&mut cursor) {
        if child.kind() != "decorator" {
            continue;
        }
        let Some(inner) = child.named_child(0) else {
            continue;
        };
        let (name_path, args) = match inner.kind() {
            "call" => {
                let name = inner
                    .child_by_field_name("function")
                    .map(|f| node_text(f, src).to_string())
                    .unwrap_or_default();
                let mut args = Vec::new();
                if let Some(arg_list) = inner.child_by_field_name("arguments") {
                    let mut ac = arg_list.walk();
                    for arg in arg_list.children(&mut ac) {
                        if !arg.is_named() || arg.kind() == "comment" {
                            continue;
                        }
                        if arg.kind() == "keyword_argument" {
                            let n = arg.child_by_field_name("name");
                            let v = arg.child_by_field_name("value");
                            if let (Some(n), Some(v)) = (n, v) {
                                args.push((
                                    Some(node_text(n, src).to_string()),
                                    node_text(v, src).to_string(),
                                ));
                            }
                        } else {
                            args.push((None, node_text(arg, src).to_string()));
                        }
                    }
                }
                (name, args)
            }
            _ => (node_text(inner, src).to_string(), Vec::new()),
        };
        out.push(Decorator {
            name_path,
            args,
            span: index.span(file, child.byte_range()),
        });
    }
    out
}

fn extract_params(func: Node<'_>, src: &str) -> Vec<Param> {
    let Some(params) = func.child_by_field_name("parameters") else {
        return Vec::new();
    };
    let mut out = Vec::new();
    let mut after_splat = false;
    let mut cursor = params.walk();
    for child in params.children(&mut cursor) {
        match child.kind() {
            "identifier" => out.push(Param {
                name: node_text(child, src).to_string(),
                has_default: false,
                default_text: None,
                annotation_text: None,
                kind: positional_kind(after_splat),
            }),
            "typed_parameter" => {
                let name = child
                    .named_child(0)
                    .map(|n| node_text(n, src).to_string())
                    .unwrap_or_default();
                out.push(Param {
                    name,
                    has_default: false,
                    default_text: None,
                    annotation_text: child
                        .child_by_field_name("type")
                        .map(|t| node_text(t, src).to_string()),
                    kind: positional_kind(after_splat),
                });
            }
            "default_parameter" | "typed_default_parameter" => {
                let name = child
                    .child_by_field_name("name")
                    .map(|n| node_text(n, src).to_string())
                    .unwrap_or_default();
                out.push(Param {
                    name,
                    has_default: true,
                    default_text: child
                        .child_by_field_name("value")
                        .map(|v| node_text(v, src).to_string()),
                    annotation_text: child
                        .child_by_field_name("type")
                        .map(|t| node_text(t, src).to_string()),
                    kind: positional_kind(after_splat),
                });
            }
            "list_splat_pattern" => {
                after_splat = true;
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
            "keyword_separator" => after_splat = true,
            "dictionary_splat_pattern" => {
                if let Some(inner) = child.named_child(0) {
                    out.push(Param {
                        name: node_text(inner, src).to_string(),
                        has_default: false,
                        default_text: None,
                        annotation_text: None,
                        kind: ParamKind::VariadicKeyword,
                    });
                }
            }
            _ => {}
        }
    }
    out
}

fn positional_kind(after_splat: bool) -> ParamKind {
    if after_splat {
        ParamKind::KeywordOnly
    } else {
        ParamKind::Positional
    }
}
