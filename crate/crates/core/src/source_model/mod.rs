//! Language-agnostic index of a parsed codebase: functions, call sites,
//! decorators, comments, and import bindings. Downstream stages only ever see
//! this representation.

mod python;
mod typescript;

use std::collections::BTreeMap;
use std::path::Path;

use globset::{Glob, GlobSet, GlobSetBuilder};
use serde::{Deserialize, Serialize};
use walkdir::WalkDir;

use crate::diag::Diagnostic;
use crate::error::{Error, Result};
use crate::syntax::{self, CommentKind, Language};

/// Files larger than this are skipped with a diagnostic.
const MAX_FILE_BYTES: u64 = 2 * 1024 * 1024;

/// Ignore patterns applied when the caller supplies none.
pub const DEFAULT_IGNORE_GLOBS: &[&str] = &[
    "**/test/**",
    "**/tests/**",
    "**/test_*.py",
    "**/*_test.py",
    "**/*.test.ts",
    "**/*.spec.ts",
    "**/node_modules/**",
    "**/vendor/**",
    "**/.venv/**",
    "**/venv/**",
    "**/__pycache__/**",
];

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Span {
    pub file: String,
    pub start: usize,
    pub end: usize,
    pub start_line: u32,
    pub end_line: u32,
}

impl Span {
    pub fn locus(&self) -> String {
        format!("{}:{}", self.file, self.start_line)
    }

    pub fn contains(&self, other: &Span) -> bool {
        self.file == other.file && self.start <= other.start && other.end <= self.end
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ParamKind {
    Positional,
    KeywordOnly,
    VariadicPositional,
    VariadicKeyword,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Param {
    pub name: String,
    pub has_default: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub default_text: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub annotation_text: Option<String>,
    pub kind: ParamKind,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Decorator {
    /// Dotted path as written, e.g. `mcp.tool`.
    pub name_path: String,
    /// Ordered decorator arguments as (keyword or None, source text).
    pub args: Vec<(Option<String>, String)>,
    pub span: Span,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FunctionDef {
    /// `relative/path.py::outer.inner`
    pub qualified_name: String,
    pub params: Vec<Param>,
    pub decorators: Vec<Decorator>,
    pub body_span: Span,
    pub full_span: Span,
    /// Verbatim bytes of `full_span`.
    pub source_text: String,
}

impl FunctionDef {
    pub fn file(&self) -> &str {
        self.qualified_name
            .split_once("::")
            .map(|(f, _)| f)
            .unwrap_or(&self.qualified_name)
    }

    /// Final name segment, e.g. `inner` for `pkg/m.py::outer.inner`.
    pub fn short_name(&self) -> &str {
        let scope = self
            .qualified_name
            .split_once("::")
            .map(|(_, s)| s)
            .unwrap_or(&self.qualified_name);
        scope.rsplit('.').next().unwrap_or(scope)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CallSite {
    /// Qualified name of the enclosing function, or the bare file path for
    /// module-level calls (kept in `SourceModel::module_calls`).
    pub caller: String,
    pub callee_text: String,
    pub positional_args: Vec<String>,
    pub keyword_args: Vec<(String, String)>,
    pub span: Span,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CommentSpan {
    pub span: Span,
    pub kind: CommentKind,
}

/// One import binding visible in a file.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ImportBinding {
    /// Local name the binding introduces.
    pub alias: String,
    /// Module path as written (`utils.search`, `./markdown`).
    pub module: String,
    /// Imported member for `from m import f` / `import { f }` forms.
    pub member: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum CalleeResolution {
    Function(String),
    External,
    /// Multiple same-named candidates and no import to disambiguate.
    Ambiguous(Vec<String>),
}

impl CalleeResolution {
    pub fn as_function(&self) -> Option<&str> {
        match self {
            CalleeResolution::Function(qn) => Some(qn),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SourceModel {
    pub language: Language,
    /// Relative path -> file content, sorted by path.
    pub files: BTreeMap<String, String>,
    pub functions: BTreeMap<String, FunctionDef>,
    /// Call sites inside function bodies, in (file, offset) order.
    pub calls: Vec<CallSite>,
    /// Top-level call sites (registration constructs live here).
    pub module_calls: Vec<CallSite>,
    pub comments: Vec<CommentSpan>,
    /// File -> import bindings.
    pub imports: BTreeMap<String, Vec<ImportBinding>>,
    pub diagnostics: Vec<Diagnostic>,
}

/// Line-offset index for mapping byte ranges to line-numbered [`Span`]s.
pub struct FileIndex {
    pub line_starts: Vec<usize>,
}

pub fn line_index(src: &str) -> FileIndex {
    FileIndex::new(src)
}

impl FileIndex {
    pub fn new(src: &str) -> Self {
        let mut line_starts = vec![0];
        for (i, b) in src.bytes().enumerate() {
            if b == b'\n' {
                line_starts.push(i + 1);
            }
        }
        Self { line_starts }
    }

    pub fn line_of(&self, offset: usize) -> u32 {
        match self.line_starts.binary_search(&offset) {
            Ok(i) => i as u32 + 1,
            Err(i) => i as u32,
        }
    }

    pub fn span(&self, file: &str, range: std::ops::Range<usize>) -> Span {
        Span {
            file: file.to_string(),
            start: range.start,
            end: range.end,
            start_line: self.line_of(range.start),
            end_line: self.line_of(range.end.saturating_sub(1).max(range.start)),
        }
    }
}

/// Per-file extraction output, merged into the model in path order.
#[derive(Default)]
pub(crate) struct FileExtract {
    pub functions: Vec<FunctionDef>,
    pub calls: Vec<CallSite>,
    pub module_calls: Vec<CallSite>,
    pub imports: Vec<ImportBinding>,
}

fn build_ignore_set(patterns: &[String]) -> Result<GlobSet> {
    let mut builder = GlobSetBuilder::new();
    let effective: Vec<String> = if patterns.is_empty() {
        DEFAULT_IGNORE_GLOBS.iter().map(|s| s.to_string()).collect()
    } else {
        patterns.to_vec()
    };
    for p in &effective {
        let glob = Glob::new(p).map_err(|e| Error::Config(format!("bad ignore glob {p}: {e}")))?;
        builder.add(glob);
    }
    builder
        .build()
        .map_err(|e| Error::Config(format!("ignore globs: {e}")))
}

/// Parse every source file of `language` under `root` into a [`SourceModel`].
/// Unparseable files are skipped with diagnostics; an entirely unparseable or
/// empty tree is an error.
pub fn parse_codebase(root: &Path, language: Language, ignore: &[String]) -> Result<SourceModel> {
    if !root.is_dir() {
        return Err(Error::Config(format!(
            "source root {} does not exist",
            root.display()
        )));
    }
    let ignore_set = build_ignore_set(ignore)?;
    let ext = language.file_extension();

    let mut paths: Vec<std::path::PathBuf> = WalkDir::new(root)
        .follow_links(false)
        .into_iter()
        .filter_map(|e| e.ok())
        .filter(|e| e.file_type().is_file())
        .map(|e| e.into_path())
        .filter(|p| p.extension().and_then(|e| e.to_str()) == Some(ext))
        .collect();
    paths.sort();

    let mut model = SourceModel {
        language,
        files: BTreeMap::new(),
        functions: BTreeMap::new(),
        calls: Vec::new(),
        module_calls: Vec::new(),
        comments: Vec::new(),
        imports: BTreeMap::new(),
        diagnostics: Vec::new(),
    };

    for path in paths {
        let rel = path
            .strip_prefix(root)
            .unwrap_or(&path)
            .to_string_lossy()
            .replace('\\', "/");
        if ignore_set.is_match(&rel) {
            continue;
        }
        let meta = std::fs::metadata(&path)?;
        if meta.len() > MAX_FILE_BYTES {
            model.diagnostics.push(
                Diagnostic::new(
                    "skipped-file",
                    format!("{rel}: exceeds {MAX_FILE_BYTES} byte cap"),
                )
                .at(rel.clone()),
            );
            continue;
        }
        let bytes = std::fs::read(&path)?;
        let src = match String::from_utf8(bytes) {
            Ok(s) => s,
            Err(_) => {
                model.diagnostics.push(
                    Diagnostic::new("skipped-file", format!("{rel}: not valid UTF-8"))
                        .at(rel.clone()),
                );
                continue;
            }
        };
        match index_file(&rel, &src, language) {
            Ok((extract, comments)) => {
                for f in extract.functions {
                    model.functions.insert(f.qualified_name.clone(), f);
                }
                model.calls.extend(extract.calls);
                model.module_calls.extend(extract.module_calls);
                if !extract.imports.is_empty() {
                    model.imports.insert(rel.clone(), extract.imports);
                }
                model.comments.extend(comments);
                model.files.insert(rel, src);
            }
            Err(msg) => {
                model
                    .diagnostics
                    .push(Diagnostic::new("skipped-file", format!("{rel}: {msg}")).at(rel.clone()));
            }
        }
    }

    if model.files.is_empty() {
        return Err(Error::EmptyCodebase {
            root: root.display().to_string(),
            language: language.to_string(),
        });
    }

    model
        .calls
        .sort_by(|a, b| (&a.span.file, a.span.start).cmp(&(&b.span.file, b.span.start)));
    model
        .module_calls
        .sort_by(|a, b| (&a.span.file, a.span.start).cmp(&(&b.span.file, b.span.start)));
    model
        .comments
        .sort_by(|a, b| (&a.span.file, a.span.start).cmp(&(&b.span.file, b.span.start)));
    Ok(model)
}

fn index_file(
    rel: &str,
    src: &str,
    language: Language,
) -> std::result::Result<(FileExtract, Vec<CommentSpan>), String> {
    let tree = syntax::parse(src, language).ok_or("parser failure")?;
    if syntax::tree_has_errors(&tree) {
        return Err("syntax errors".to_string());
    }
    let index = FileIndex::new(src);
    let extract = match language {
        Language::Python => python::extract(rel, src, &tree, &index),
        Language::Typescript => typescript::extract(rel, src, &tree, &index),
    };
    let comments = syntax::comment_and_docstring_ranges(src, language)
        .into_iter()
        .map(|(range, kind)| CommentSpan {
            span: index.span(rel, range),
            kind,
        })
        .collect();
    Ok((extract, comments))
}

impl SourceModel {
    /// Map a module path as written in an import to a file in this codebase.
    fn module_to_file(&self, module: &str, importing_file: &str) -> Option<String> {
        let dir = Path::new(importing_file)
            .parent()
            .map(|p| p.to_string_lossy().replace('\\', "/"))
            .unwrap_or_default();
        let ext = self.language.file_extension();

        let mut candidates: Vec<String> = Vec::new();
        if module.starts_with('.') {
            match self.language {
                Language::Python => {
                    // one leading dot: same package; each extra dot: one level up
                    let dots = module.chars().take_while(|c| *c == '.').count();
                    let rest = &module[dots..];
                    let mut base = Path::new(&dir).to_path_buf();
                    for _ in 1..dots {
                        base.pop();
                    }
                    let mut p = base.to_string_lossy().replace('\\', "/");
                    if !rest.is_empty() {
                        if !p.is_empty() {
                            p.push('/');
                        }
                        p.push_str(&rest.replace('.', "/"));
                    }
                    candidates.push(format!("{p}.{ext}"));
                    candidates.push(format!("{p}/__init__.{ext}"));
                }
                Language::Typescript => {
                    let joined = join_relative(&dir, module);
                    candidates.push(format!("{joined}.{ext}"));
                    candidates.push(format!("{joined}/index.{ext}"));
                }
            }
        } else {
            let as_path = module.replace('.', "/");
            candidates.push(format!("{as_path}.{ext}"));
            candidates.push(format!("{as_path}/__init__.{ext}"));
            if !dir.is_empty() {
                candidates.push(format!("{dir}/{as_path}.{ext}"));
                candidates.push(format!("{dir}/{as_path}/__init__.{ext}"));
            }
        }
        candidates.into_iter().find(|c| self.files.contains_key(c))
    }

    fn caller_file<'a>(&self, caller: &'a str) -> &'a str {
        caller.split_once("::").map(|(f, _)| f).unwrap_or(caller)
    }

    fn functions_named(&self, short: &str) -> Vec<&FunctionDef> {
        self.functions
            .values()
            .filter(|f| f.short_name() == short)
            .collect()
    }

    /// Resolve a call site to a function in this codebase: import-qualified
    /// match first, then unique unqualified match; anything else is external.
    pub fn resolve_callee(&self, site: &CallSite) -> CalleeResolution {
        let file = self.caller_file(&site.caller);
        let bindings = self.imports.get(file).map(|v| v.as_slice()).unwrap_or(&[]);

        if let Some((receiver, member)) = site.callee_text.rsplit_once('.') {
            // method/attr call: resolve only through a module alias import
            if let Some(b) = bindings
                .iter()
                .find(|b| b.alias == receiver && b.member.is_none())
            {
                if let Some(target) = self.module_to_file(&b.module, file) {
                    let qn = format!("{target}::{member}");
                    if self.functions.contains_key(&qn) {
                        return CalleeResolution::Function(qn);
                    }
                }
            }
            return CalleeResolution::External;
        }

        let name = site.callee_text.as_str();
        // imported member binding
        if let Some(b) = bindings.iter().find(|b| b.alias == name) {
            if let Some(member) = &b.member {
                if let Some(target) = self.module_to_file(&b.module, file) {
                    let qn = format!("{target}::{member}");
                    if self.functions.contains_key(&qn) {
                        return CalleeResolution::Function(qn);
                    }
                }
            }
            // bound to something outside the codebase
            return CalleeResolution::External;
        }
        // same-file definition
        let local: Vec<&FunctionDef> = self
            .functions_named(name)
            .into_iter()
            .filter(|f| f.file() == file)
            .collect();
        match local.len() {
            1 => return CalleeResolution::Function(local[0].qualified_name.clone()),
            n if n > 1 => {
                return CalleeResolution::Ambiguous(
                    local.iter().map(|f| f.qualified_name.clone()).collect(),
                )
            }
            _ => {}
        }
        // unique match across the codebase
        let global = self.functions_named(name);
        match global.len() {
            1 => CalleeResolution::Function(global[0].qualified_name.clone()),
            0 => CalleeResolution::External,
            _ => CalleeResolution::Ambiguous(
                global.iter().map(|f| f.qualified_name.clone()).collect(),
            ),
        }
    }

    /// All function-body call sites resolving to `callee`, in source order.
    pub fn list_call_sites_of(&self, callee: &str) -> Result<Vec<&CallSite>> {
        if !self.functions.contains_key(callee) {
            return Err(Error::NotFound(format!("function {callee}")));
        }
        Ok(self
            .calls
            .iter()
            .filter(|site| self.resolve_callee(site).as_function() == Some(callee))
            .collect())
    }
}

fn join_relative(dir: &str, rel: &str) -> String {
    let mut parts: Vec<&str> = if dir.is_empty() {
        Vec::new()
    } else {
        dir.split('/').collect()
    };
    for seg in rel.split('/') {
        match seg {
            "." | "" => {}
            ".." => {
                parts.pop();
            }
            other => parts.push(other),
        }
    }
    parts.join("/")
}
