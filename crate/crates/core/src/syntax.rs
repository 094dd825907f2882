//! Thin layer over the concrete-syntax-tree parser: language selection,
//! snippet re-parsing, token walks, and comment/docstring location. Everything
//! that needs to look at raw syntax outside the initial codebase parse goes
//! through here, so the parsing backend stays swappable.

use std::ops::Range;

use serde::{Deserialize, Serialize};
use tree_sitter::{Node, Parser, Tree};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Language {
    Python,
    Typescript,
}

impl Language {
    pub fn file_extension(self) -> &'static str {
        match self {
            Language::Python => "py",
            Language::Typescript => "ts",
        }
    }

    pub fn grammar(self) -> tree_sitter::Language {
        match self {
            Language::Python => tree_sitter_python::LANGUAGE.into(),
            Language::Typescript => tree_sitter_typescript::LANGUAGE_TYPESCRIPT.into(),
        }
    }
}

impl std::fmt::Display for Language {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Language::Python => write!(f, "python"),
            Language::Typescript => write!(f, "typescript"),
        }
    }
}

impl std::str::FromStr for Language {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s.to_ascii_lowercase().as_str() {
            "python" | "py" => Ok(Language::Python),
            "typescript" | "ts" => Ok(Language::Typescript),
            other => Err(format!("unsupported language: {other}")),
        }
    }
}

pub fn parse(source: &str, language: Language) -> Option<Tree> {
    let mut parser = Parser::new();
    parser.set_language(&language.grammar()).ok()?;
    parser.parse(source, None)
}

pub fn tree_has_errors(tree: &Tree) -> bool {
    tree.root_node().has_error()
}

/// Depth-first pre-order walk over every node in the tree.
pub fn walk(root: Node<'_>, visit: &mut dyn FnMut(Node<'_>)) {
    let mut cursor = root.walk();
    let mut recurse = true;
    loop {
        if recurse {
            visit(cursor.node());
        }
        if (recurse && cursor.goto_first_child()) || cursor.goto_next_sibling() {
            recurse = true;
        } else if cursor.goto_parent() {
            recurse = false;
        } else {
            break;
        }
    }
}

pub fn node_text<'a>(node: Node<'_>, src: &'a str) -> &'a str {
    &src[node.byte_range()]
}

/// Value of a string literal node, without quotes. Returns `None` for
/// non-string nodes and for strings with interpolation.
pub fn string_literal_value(node: Node<'_>, src: &str) -> Option<String> {
    if node.kind() != "string" {
        return None;
    }
    let mut parts = Vec::new();
    let mut cursor = node.walk();
    for child in node.children(&mut cursor) {
        match child.kind() {
            "string_content" | "string_fragment" => parts.push(node_text(child, src).to_string()),
            "string_start" | "string_end" | "\"" | "'" | "`" => {}
            // interpolation / escape machinery: treat as non-literal
            "interpolation" | "template_substitution" => return None,
            "escape_sequence" => parts.push(node_text(child, src).to_string()),
            _ => {}
        }
    }
    Some(parts.concat())
}

/// Strip the common leading whitespace shared by every non-blank line, so a
/// method body extracted from class scope parses standalone.
pub fn dedent(text: &str) -> String {
    let mut common: Option<usize> = None;
    for line in text.lines() {
        if line.trim().is_empty() {
            continue;
        }
        let indent = line.len() - line.trim_start().len();
        common = Some(match common {
            Some(c) => c.min(indent),
            None => indent,
        });
    }
    let cut = common.unwrap_or(0);
    if cut == 0 {
        return text.to_string();
    }
    let mut out = String::with_capacity(text.len());
    for (i, line) in text.split('\n').enumerate() {
        if i > 0 {
            out.push('\n');
        }
        if line.trim().is_empty() {
            out.push_str(line.trim_start_matches([' ', '\t']));
        } else {
            out.push_str(&line[cut.min(line.len())..]);
        }
    }
    out
}

fn is_function_node(kind: &str) -> bool {
    matches!(
        kind,
        "function_definition" | "decorated_definition" | "function_declaration"
    )
}

/// Whether `text` parses cleanly as exactly one standalone function
/// (decorators allowed) in the given language.
pub fn reparses_as_single_function(text: &str, language: Language) -> bool {
    let deindented = dedent(text);
    let Some(tree) = parse(&deindented, language) else {
        return false;
    };
    if tree_has_errors(&tree) {
        return false;
    }
    let root = tree.root_node();
    let mut cursor = root.walk();
    let significant: Vec<Node<'_>> = root
        .children(&mut cursor)
        .filter(|n| n.kind() != "comment")
        .collect();
    significant.len() == 1 && is_function_node(significant[0].kind())
}

/// Name of the single function defined by `text`, if it parses as one.
pub fn standalone_function_name(text: &str, language: Language) -> Option<String> {
    let deindented = dedent(text);
    let tree = parse(&deindented, language)?;
    if tree_has_errors(&tree) {
        return None;
    }
    let root = tree.root_node();
    let mut cursor = root.walk();
    for child in root.children(&mut cursor) {
        let def = if child.kind() == "decorated_definition" {
            child.child_by_field_name("definition")?
        } else {
            child
        };
        if matches!(def.kind(), "function_definition" | "function_declaration") {
            let name = def.child_by_field_name("name")?;
            return Some(node_text(name, &deindented).to_string());
        }
    }
    None
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CommentKind {
    Comment,
    Docstring,
}

/// Byte ranges of every comment and docstring in `source`. Docstrings are
/// string expressions sitting first in a module, class, or function body;
/// Typescript has only comments.
pub fn comment_and_docstring_ranges(
    source: &str,
    language: Language,
) -> Vec<(Range<usize>, CommentKind)> {
    let Some(tree) = parse(source, language) else {
        return Vec::new();
    };
    let mut out = Vec::new();
    walk(tree.root_node(), &mut |node| {
        if node.kind() == "comment" {
            out.push((node.byte_range(), CommentKind::Comment));
        } else if language == Language::Python && node.kind() == "expression_statement" {
            if let Some(range) = docstring_range(node) {
                out.push((range, CommentKind::Docstring));
            }
        }
    });
    out.sort_by_key(|(r, _)| r.start);
    out
}

/// For a Python `expression_statement`, the range of its string child when the
/// statement is the first in a module/class/function body.
fn docstring_range(stmt: Node<'_>) -> Option<Range<usize>> {
    let expr = stmt.named_child(0)?;
    if expr.kind() != "string" {
        return None;
    }
    let parent = stmt.parent()?;
    let owner_ok = match parent.kind() {
        "module" => true,
        "block" => matches!(
            parent.parent().map(|p| p.kind()),
            Some("function_definition") | Some("class_definition")
        ),
        _ => false,
    };
    if !owner_ok {
        return None;
    }
    let mut cursor = parent.walk();
    let first_stmt = parent
        .children(&mut cursor)
        .find(|n| n.is_named() && n.kind() != "comment");
    if first_stmt.map(|n| n.id()) == Some(stmt.id()) {
        Some(stmt.byte_range())
    } else {
        None
    }
}

/// Count of comment tokens plus docstring statements: the post-strip
/// assertion helper.
pub fn count_comment_tokens(source: &str, language: Language) -> usize {
    comment_and_docstring_ranges(source, language).len()
}

/// Leaf tokens in source order as (kind, text), optionally skipping comments.
/// Used to assert that sanitization leaves the code token stream intact.
pub fn token_stream(
    source: &str,
    language: Language,
    skip_comments: bool,
) -> Vec<(String, String)> {
    let Some(tree) = parse(source, language) else {
        return Vec::new();
    };
    let mut out = Vec::new();
    walk(tree.root_node(), &mut |node| {
        if node.child_count() == 0 && !node.byte_range().is_empty() {
            if skip_comments && node.kind() == "comment" {
                return;
            }
            out.push((node.kind().to_string(), node_text(node, source).to_string()));
        }
    });
    out
}

/// A call expression found in a source snippet.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SnippetCall {
    pub callee_text: String,
    pub positional_args: Vec<String>,
    pub keyword_args: Vec<(String, String)>,
    pub range: Range<usize>,
}

fn call_node_kinds(language: Language) -> (&'static str, &'static str) {
    match language {
        Language::Python => ("call", "argument_list"),
        Language::Typescript => ("call_expression", "arguments"),
    }
}

fn collect_call(node: Node<'_>, src: &str, language: Language) -> Option<SnippetCall> {
    let (call_kind, args_kind) = call_node_kinds(language);
    if node.kind() != call_kind {
        return None;
    }
    let callee = node.child_by_field_name("function")?;
    let mut positional = Vec::new();
    let mut keyword = Vec::new();
    if let Some(args) = node.child_by_field_name("arguments") {
        if args.kind() == args_kind {
            let mut cursor = args.walk();
            for arg in args.children(&mut cursor) {
                if !arg.is_named() || arg.kind() == "comment" {
                    continue;
                }
                if language == Language::Python && arg.kind() == "keyword_argument" {
                    let name = arg.child_by_field_name("name");
                    let value = arg.child_by_field_name("value");
                    if let (Some(n), Some(v)) = (name, value) {
                        keyword
                            .push((node_text(n, src).to_string(), node_text(v, src).to_string()));
                    }
                } else {
                    positional.push(node_text(arg, src).to_string());
                }
            }
        }
    }
    Some(SnippetCall {
        callee_text: node_text(callee, src).to_string(),
        positional_args: positional,
        keyword_args: keyword,
        range: node.byte_range(),
    })
}

/// Every call expression in `source`, in source order. New-expressions in
/// Typescript (`new Foo(...)`) are reported with callee text `Foo`.
pub fn calls_in_snippet(source: &str, language: Language) -> Vec<SnippetCall> {
    let Some(tree) = parse(source, language) else {
        return Vec::new();
    };
    let mut out = Vec::new();
    walk(tree.root_node(), &mut |node| {
        if let Some(call) = collect_call(node, source, language) {
            out.push(call);
        } else if language == Language::Typescript && node.kind() == "new_expression" {
            if let Some(ctor) = node.child_by_field_name("constructor") {
                out.push(SnippetCall {
                    callee_text: node_text(ctor, source).to_string(),
                    positional_args: Vec::new(),
                    keyword_args: Vec::new(),
                    range: node.byte_range(),
                });
            }
        }
    });
    out.sort_by_key(|c| c.range.start);
    out
}

/// Parameter names of the single function `text` defines, in order. Works on
/// standalone (possibly indented) function text in either language.
pub fn function_param_names(text: &str, language: Language) -> Vec<String> {
    let deindented = dedent(text);
    let Some(tree) = parse(&deindented, language) else {
        return Vec::new();
    };
    let mut params_node = None;
    walk(tree.root_node(), &mut |node| {
        if params_node.is_none() && matches!(node.kind(), "parameters" | "formal_parameters") {
            params_node = Some(node.id());
        }
    });
    let mut out = Vec::new();
    walk(tree.root_node(), &mut |node| {
        if Some(node.id()) != params_node {
            return;
        }
        let mut cursor = node.walk();
        for child in node.children(&mut cursor) {
            if !child.is_named() || child.kind() == "comment" {
                continue;
            }
            // first identifier beneath the parameter node is its name
            let mut name: Option<String> = None;
            walk(child, &mut |n| {
                if name.is_none() && matches!(n.kind(), "identifier") {
                    name = Some(node_text(n, &deindented).to_string());
                }
            });
            if let Some(name) = name {
                out.push(name);
            }
        }
    });
    out
}

/// Bare callee names referenced in `source`: the final identifier segment of
/// each call target. Used by edit validation to detect newly introduced calls.
pub fn callee_name_set(source: &str, language: Language) -> std::collections::BTreeSet<String> {
    calls_in_snippet(source, language)
        .into_iter()
        .map(|c| {
            c.callee_text
                .rsplit('.')
                .next()
                .unwrap_or(&c.callee_text)
                .to_string()
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn dedent_strips_common_indentation() {
        let text = "    def m(self):\n        return 1\n";
        assert_eq!(dedent(text), "def m(self):\n    return 1\n");
    }

    #[test]
    fn reparse_accepts_plain_and_decorated_functions() {
        assert!(reparses_as_single_function(
            "def f(x):\n    return x\n",
            Language::Python
        ));
        assert!(reparses_as_single_function(
            "@mcp.tool()\ndef f(x):\n    return x\n",
            Language::Python
        ));
        assert!(reparses_as_single_function(
            "function f(x: number) { return x; }",
            Language::Typescript
        ));
        assert!(!reparses_as_single_function(
            "def f(:\n    return\n",
            Language::Python
        ));
        assert!(!reparses_as_single_function(
            "def f():\n    pass\n\ndef g():\n    pass\n",
            Language::Python
        ));
    }

    #[test]
    fn docstrings_and_comments_are_located() {
        let src = "def f():\n    \"\"\"doc\"\"\"\n    # c\n    return 1\n";
        let ranges = comment_and_docstring_ranges(src, Language::Python);
        assert_eq!(ranges.len(), 2);
        assert_eq!(ranges[0].1, CommentKind::Docstring);
        assert_eq!(ranges[1].1, CommentKind::Comment);
        // a non-leading string is not a docstring
        let src2 = "def f():\n    x = 1\n    \"\"\"not doc\"\"\"\n";
        let ranges2 = comment_and_docstring_ranges(src2, Language::Python);
        assert_eq!(ranges2.len(), 0);
    }

    #[test]
    fn snippet_calls_pick_up_kwargs() {
        let calls = calls_in_snippet("def f(a):\n    g(a, limit=2)\n", Language::Python);
        assert_eq!(calls.len(), 1);
        assert_eq!(calls[0].callee_text, "g");
        assert_eq!(calls[0].positional_args, vec!["a"]);
        assert_eq!(calls[0].keyword_args, vec![("limit".into(), "2".into())]);
    }

    #[test]
    fn string_values_are_unquoted() {
        let tree = parse("x = \"abc\"\n", Language::Python).unwrap();
        let mut found = None;
        walk(tree.root_node(), &mut |n| {
            if n.kind() == "string" && found.is_none() {
                found = string_literal_value(n, "x = \"abc\"\n");
            }
        });
        assert_eq!(found.as_deref(), Some("abc"));
    }
}
