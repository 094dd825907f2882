//! Acceptance suite: one test per criterion, each printing a pass line.
//! Run with `cargo test -p trustdesc --test acceptance`.

mod generators;

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::process::Command;
use std::time::{Duration, Instant};

use sha2::{Digest, Sha256};
use tempfile::TempDir;

use trustdesc_core::call_graph::{build_call_graph, emit_slice};
use trustdesc_core::config::ServerConfig;
use trustdesc_core::entry_finder::{find_entry, EntryPattern};
use trustdesc_core::gateway::{
    Completion, Gateway, LlmGateway, LlmPurpose, LlmRequest, DEFAULT_MODEL_ID,
};
use trustdesc_core::pipeline::{self, SliceOptions};
use trustdesc_core::sanitizer;
use trustdesc_core::source_model::parse_codebase;
use trustdesc_core::syntax::{self, Language};

fn repo_root() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../..")
}

fn fixture_config(server: &str) -> ServerConfig {
    ServerConfig::load(
        &repo_root()
            .join("fixtures")
            .join(server)
            .join("server.json"),
    )
    .unwrap()
}

fn cassette_root() -> PathBuf {
    repo_root().join("cassettes")
}

fn replay_gateway() -> Gateway {
    Gateway::replay(&cassette_root(), DEFAULT_MODEL_ID)
}

/// Gateway that must never be consulted.
struct PanickingGateway;
impl LlmGateway for PanickingGateway {
    fn complete(&self, req: &LlmRequest) -> trustdesc_core::Result<Completion> {
        panic!("gateway consulted for purpose {}", req.purpose);
    }
    fn scope(&self) -> &str {
        "none"
    }
}

/// Gateway answering every bias-filter batch with all-neutral verdicts.
struct NeutralGateway;
impl LlmGateway for NeutralGateway {
    fn complete(&self, _req: &LlmRequest) -> trustdesc_core::Result<Completion> {
        Ok(Completion {
            text: "{\"verdicts\": []}".into(),
            recorded_at: Some("1970-01-01T00:00:00Z".into()),
        })
    }
    fn scope(&self) -> &str {
        "neutral"
    }
}

fn cli() -> Command {
    Command::new(env!("CARGO_BIN_EXE_trustdesc"))
}

// ---------------------------------------------------------------------------
// criterion 1
// ---------------------------------------------------------------------------

#[test]
fn criterion_1_entry_pattern_coverage() {
    let pattern_fixtures: &[(&str, &str, EntryPattern)] = &[
        ("arxiv_py", "search_arxiv", EntryPattern::Decorator),
        ("excel_py", "apply_formula", EntryPattern::Decorator),
        ("excel_py", "create_chart", EntryPattern::Decorator),
        ("excel_py", "write_data_to_excel", EntryPattern::Decorator),
        ("upload_py", "upload_file", EntryPattern::Decorator),
        ("notes_ts", "saveNote", EntryPattern::Decorator),
        ("notes_ts", "listNotes", EntryPattern::Decorator),
        ("markdownify_ts", "convert", EntryPattern::ExplicitRegister),
        (
            "markdownify_ts",
            "convert-local",
            EntryPattern::ExplicitRegister,
        ),
        ("webfetch_ts", "fetch_page", EntryPattern::ExplicitRegister),
        ("registry_py", "lookup_dns", EntryPattern::ExplicitRegister),
        (
            "context_ts",
            "get_code_context",
            EntryPattern::ExplicitRegister,
        ),
        ("arxiv_dispatch_py", "search_papers", EntryPattern::Dispatch),
        (
            "arxiv_dispatch_py",
            "download_paper",
            EntryPattern::Dispatch,
        ),
        ("match_dispatch_py", "status_report", EntryPattern::Dispatch),
        ("match_dispatch_py", "usage_stats", EntryPattern::Dispatch),
        ("switch_dispatch_ts", "resize_image", EntryPattern::Dispatch),
        ("switch_dispatch_ts", "crop_image", EntryPattern::Dispatch),
    ];
    let fallback_fixtures: &[(&str, &str)] = &[("table_py", "fetch"), ("hooks_ts", "lookup")];

    let distinct_servers: std::collections::BTreeSet<&str> = pattern_fixtures
        .iter()
        .map(|(s, _, _)| *s)
        .chain(fallback_fixtures.iter().map(|(s, _)| *s))
        .collect();
    assert!(distinct_servers.len() >= 12, "corpus too small");

    let started = Instant::now();
    for (server, tool, expected) in pattern_fixtures {
        let config = fixture_config(server);
        let model = pipeline::load_model(&config).unwrap();
        let mut diags = Vec::new();
        // a pattern match must resolve without touching any gateway
        let res = find_entry(
            &model,
            tool,
            &config.registration_aliases,
            &PanickingGateway,
            DEFAULT_MODEL_ID,
            &mut diags,
        )
        .unwrap_or_else(|e| panic!("{server}/{tool}: {e}"));
        assert_eq!(res.pattern, *expected, "{server}/{tool}");
    }
    for (server, tool) in fallback_fixtures {
        let config = fixture_config(server);
        let model = pipeline::load_model(&config).unwrap();
        let gateway = replay_gateway();
        let scoped =
            trustdesc_core::gateway::ToolScopedGateway::new(&gateway, format!("{server}/{tool}"));
        let mut diags = Vec::new();
        let res = find_entry(
            &model,
            tool,
            &config.registration_aliases,
            &scoped,
            DEFAULT_MODEL_ID,
            &mut diags,
        )
        .unwrap_or_else(|e| panic!("{server}/{tool}: {e}"));
        assert_eq!(res.pattern, EntryPattern::LlmFallback, "{server}/{tool}");
        assert_eq!(
            gateway.usage_report().calls_for(LlmPurpose::EntryFallback),
            1
        );
    }
    let elapsed = started.elapsed();
    assert!(
        elapsed < Duration::from_secs(2),
        "entry coverage took {elapsed:?}"
    );
    println!(
        "[PASS] criterion 1: {} pattern fixtures + {} fallback fixtures resolved ({elapsed:?})",
        pattern_fixtures.len(),
        fallback_fixtures.len()
    );
}

// ---------------------------------------------------------------------------
// criteria 2 and 3
// ---------------------------------------------------------------------------

#[test]
fn criterion_2_search_arxiv_debloat_reproduction() {
    let started = Instant::now();
    let config = fixture_config("arxiv_py");
    let model = pipeline::load_model(&config).unwrap();
    let gateway = replay_gateway();
    let outcome = pipeline::slice_tool(
        &model,
        &config,
        "search_arxiv",
        &gateway,
        &SliceOptions {
            debloat: true,
            sanitize: false,
        },
    )
    .unwrap();
    let text = outcome.slice.text();

    // lines 13-15 of the fixture are exactly the year-filter block
    let fixture = std::fs::read_to_string(repo_root().join("fixtures/arxiv_py/server.py")).unwrap();
    let fixture_lines: Vec<&str> = fixture.lines().collect();
    for line_no in [13usize, 14, 15] {
        let line = fixture_lines[line_no - 1].trim();
        assert!(
            !text.contains(line),
            "debloated slice still contains fixture line {line_no}: {line}"
        );
    }
    let golden = std::fs::read_to_string(
        PathBuf::from(env!("CARGO_MANIFEST_DIR"))
            .join("tests/golden/search_arxiv.slice.golden.txt"),
    )
    .unwrap();
    assert_eq!(
        text, golden,
        "slice is not byte-identical to the golden file"
    );

    let elapsed = started.elapsed();
    assert!(elapsed < Duration::from_secs(1), "took {elapsed:?}");
    println!("[PASS] criterion 2: search_arxiv debloated slice is byte-golden, year block gone ({elapsed:?})");
}

#[test]
fn criterion_3_create_chart_debloat_reproduction() {
    let config = fixture_config("excel_py");
    let model = pipeline::load_model(&config).unwrap();
    let gateway = replay_gateway();
    let outcome = pipeline::slice_tool(
        &model,
        &config,
        "create_chart",
        &gateway,
        &SliceOptions {
            debloat: true,
            sanitize: false,
        },
    )
    .unwrap();
    let text = outcome.slice.text();

    // the committed edit shape: style parameter and both conditional regions
    // removed, default assignment present
    assert!(!text.contains("style: Optional[Dict] = None"));
    assert!(!text.contains("if style is None"));
    assert!(!text.contains("style.setdefault"));
    assert!(!text.contains("grid_lines"));
    assert!(text.contains("    style = {\"show_data_labels\": True}"));

    let golden = std::fs::read_to_string(
        PathBuf::from(env!("CARGO_MANIFEST_DIR"))
            .join("tests/golden/create_chart.slice.golden.txt"),
    )
    .unwrap();
    assert_eq!(
        text, golden,
        "slice is not byte-identical to the golden file"
    );
    println!("[PASS] criterion 3: create_chart edit matches the expected diff shape, byte-golden");
}

// ---------------------------------------------------------------------------
// criterion 4
// ---------------------------------------------------------------------------

fn assert_refined_apply_formula(out_dir: &Path) {
    let desc = std::fs::read_to_string(out_dir.join("apply_formula.trustdesc.json")).unwrap();
    assert!(
        !desc.contains("prepends"),
        "refined description still carries the falsified claim"
    );
    let parsed: serde_json::Value = serde_json::from_str(&desc).unwrap();
    let formula = parsed["args"]
        .as_array()
        .unwrap()
        .iter()
        .find(|a| a["name"] == "formula")
        .expect("formula arg present");
    let constraints = formula["constraints"].as_array().unwrap();
    assert!(
        constraints
            .iter()
            .any(|c| c.as_str().unwrap().contains("=")),
        "formula constraint with '=' missing: {constraints:?}"
    );
}

#[test]
fn criterion_4_apply_formula_end_to_end() {
    // replay executor
    let out = TempDir::new().unwrap();
    let started = Instant::now();
    let status = cli()
        .arg("generate")
        .args([
            repo_root()
                .join("fixtures/excel_py/server.json")
                .to_str()
                .unwrap(),
            "--tool",
            "apply_formula",
            "--verify",
            "--llm",
            "replay",
            "--executor",
            "replay",
            "--cassette-dir",
            cassette_root().to_str().unwrap(),
            "--out-dir",
            out.path().to_str().unwrap(),
        ])
        .env_remove("TRUSTDESC_LLM_MODEL")
        .status()
        .unwrap();
    let replay_elapsed = started.elapsed();
    assert_eq!(status.code(), Some(5), "failing statements exit with 5");
    assert_refined_apply_formula(out.path());
    assert!(
        replay_elapsed < Duration::from_secs(5),
        "replay run took {replay_elapsed:?}"
    );

    // live stdio executor against the fixture server (model calls replayed)
    let out_live = TempDir::new().unwrap();
    let started = Instant::now();
    let status = cli()
        .arg("generate")
        .args([
            repo_root()
                .join("fixtures/excel_py/server.json")
                .to_str()
                .unwrap(),
            "--tool",
            "apply_formula",
            "--verify",
            "--llm",
            "replay",
            "--executor",
            "live",
            "--cassette-dir",
            cassette_root().to_str().unwrap(),
            "--out-dir",
            out_live.path().to_str().unwrap(),
        ])
        .env_remove("TRUSTDESC_LLM_MODEL")
        .status()
        .unwrap();
    let live_elapsed = started.elapsed();
    assert_eq!(status.code(), Some(5));
    assert_refined_apply_formula(out_live.path());
    assert!(
        live_elapsed < Duration::from_secs(60),
        "live run took {live_elapsed:?}"
    );
    println!(
        "[PASS] criterion 4: apply_formula refined; replay {replay_elapsed:?}, live {live_elapsed:?}"
    );
}

// ---------------------------------------------------------------------------
// criterion 5
// ---------------------------------------------------------------------------

#[test]
fn criterion_5_sanitizer_property_suite() {
    let started = Instant::now();
    let total = 1000usize;
    for case_index in 0..total {
        let case = if case_index % 5 < 3 {
            generators::python_case(1000 + case_index as u64)
        } else {
            generators::typescript_case(2000 + case_index as u64)
        };
        let dir = TempDir::new().unwrap();
        let file = format!("m.{}", case.language.file_extension());
        std::fs::write(dir.path().join(&file), &case.source).unwrap();
        let model = parse_codebase(dir.path(), case.language, &[]).unwrap();
        let entry = format!("{file}::{}", case.entry_short);
        let graph = build_call_graph(&model, &entry).unwrap();
        let slice = emit_slice(&graph, "t");

        let mut diags = Vec::new();
        let (sanitized, _) =
            sanitizer::sanitize_slice(&slice, &NeutralGateway, DEFAULT_MODEL_ID, &mut diags)
                .unwrap();

        // zero comment/docstring tokens post-strip
        assert_eq!(
            syntax::count_comment_tokens(&sanitized.text(), case.language),
            0,
            "case {case_index}: comments survived"
        );
        // 100% re-parse, identifiers within budget
        for (name, text) in &sanitized.functions {
            assert!(
                syntax::reparses_as_single_function(text, case.language),
                "case {case_index}: {name} no longer parses:\n{text}"
            );
            for (ident, _) in sanitizer::defined_identifiers(text, case.language) {
                assert!(
                    ident.chars().count() <= sanitizer::MAX_IDENTIFIER_LEN,
                    "case {case_index}: identifier '{ident}' exceeds budget"
                );
            }
        }
        // call-graph shape preserved modulo names
        let dir2 = TempDir::new().unwrap();
        std::fs::write(dir2.path().join(&file), sanitized.text()).unwrap();
        let model2 = parse_codebase(dir2.path(), case.language, &[]).unwrap();
        let entry_short2 = sanitized
            .rename_map
            .get(&case.entry_short)
            .cloned()
            .unwrap_or_else(|| case.entry_short.clone());
        let graph2 = build_call_graph(&model2, &format!("{file}::{entry_short2}")).unwrap();
        assert_eq!(
            graph.nodes.len(),
            graph2.nodes.len(),
            "case {case_index}: node count changed"
        );
        assert_eq!(
            graph.edges.len(),
            graph2.edges.len(),
            "case {case_index}: edge count changed"
        );
    }
    let elapsed = started.elapsed();
    assert!(
        elapsed < Duration::from_secs(30),
        "property suite took {elapsed:?}"
    );
    println!("[PASS] criterion 5: {total} generated slices sanitized cleanly ({elapsed:?})");
}

// ---------------------------------------------------------------------------
// criterion 6
// ---------------------------------------------------------------------------

fn bfs_oracle(graph: &trustdesc_core::call_graph::CallGraph) -> std::collections::BTreeSet<String> {
    let mut seen = std::collections::BTreeSet::new();
    let mut queue = std::collections::VecDeque::new();
    queue.push_back(graph.entry.clone());
    while let Some(id) = queue.pop_front() {
        if !seen.insert(id.clone()) {
            continue;
        }
        for e in &graph.edges {
            if e.caller == id && !seen.contains(&e.callee) {
                queue.push_back(e.callee.clone());
            }
        }
    }
    seen
}

#[test]
fn criterion_6_graph_invariant_suite() {
    use rand::prelude::*;
    use trustdesc_core::debloater::{self, Edit, EditKind, NodeEdit};

    let started = Instant::now();
    let cases = 200usize;
    for case_index in 0..cases {
        let (source, _) = generators::topology_case(3000 + case_index as u64);
        let dir = TempDir::new().unwrap();
        std::fs::write(dir.path().join("m.py"), &source).unwrap();
        let model = parse_codebase(dir.path(), Language::Python, &[]).unwrap();
        let mut graph = build_call_graph(&model, "m.py::f0").unwrap();
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(9000 + case_index as u64);

        // random remove_node sequence, oracle-checked at every step
        loop {
            let removable: Vec<String> = graph
                .nodes
                .keys()
                .filter(|id| **id != graph.entry)
                .cloned()
                .collect();
            if removable.is_empty() || rng.gen_bool(0.25) {
                break;
            }
            let victim = removable[rng.gen_range(0..removable.len())].clone();
            graph.remove_node(&victim).unwrap();
            let live: std::collections::BTreeSet<String> = graph.nodes.keys().cloned().collect();
            assert_eq!(
                live,
                bfs_oracle(&graph),
                "case {case_index}: reachability drifted"
            );
        }

        // arbitrary valid edits keep the slice monotonically non-increasing
        let mut graph = build_call_graph(&model, "m.py::f0").unwrap();
        let mut last_size = emit_slice(&graph, "t").total_bytes;
        for _ in 0..6 {
            let candidates: Vec<String> = graph.nodes.keys().cloned().collect();
            let node_id = candidates[rng.gen_range(0..candidates.len())].clone();
            let text = graph.nodes[&node_id].text.clone();
            let call_lines: Vec<usize> = text
                .lines()
                .enumerate()
                .filter(|(_, l)| l.trim_start().starts_with("x = f"))
                .map(|(i, _)| i + 1)
                .collect();
            if call_lines.is_empty() {
                continue;
            }
            let line = call_lines[rng.gen_range(0..call_lines.len())] as u32;
            let offsets: Vec<usize> = {
                let mut v = vec![0usize];
                for (i, b) in text.bytes().enumerate() {
                    if b == b'\n' {
                        v.push(i + 1);
                    }
                }
                if *v.last().unwrap() != text.len() {
                    v.push(text.len());
                }
                v
            };
            let edit = NodeEdit {
                node: node_id.clone(),
                edits: vec![Edit {
                    kind: EditKind::Delete,
                    start: offsets[(line - 1) as usize],
                    end: offsets[line as usize],
                    start_line: line,
                    end_line: line,
                    replacement: String::new(),
                    rationale: String::new(),
                }],
                node_unreachable: false,
            };
            if !debloater::validate_edit(&graph, &edit, &[]).is_empty() {
                continue;
            }
            debloater::apply_node_edit(&mut graph, &model, &edit).unwrap();
            let live: std::collections::BTreeSet<String> = graph.nodes.keys().cloned().collect();
            assert_eq!(
                live,
                bfs_oracle(&graph),
                "case {case_index}: edit broke reachability"
            );
            let size = emit_slice(&graph, "t").total_bytes;
            assert!(
                size <= last_size,
                "case {case_index}: slice grew from {last_size} to {size}"
            );
            last_size = size;
        }
    }
    let elapsed = started.elapsed();
    println!("[PASS] criterion 6: {cases} random graphs survived removals and edits ({elapsed:?})");
}

// ---------------------------------------------------------------------------
// criterion 7
// ---------------------------------------------------------------------------

#[test]
fn criterion_7_attack_fixture_regression() {
    // explicit TPA: poisoned docstring must never reach any output
    let out = TempDir::new().unwrap();
    let status = cli()
        .arg("generate")
        .args([
            repo_root()
                .join("fixtures/upload_py/server.json")
                .to_str()
                .unwrap(),
            "--llm",
            "replay",
            "--cassette-dir",
            cassette_root().to_str().unwrap(),
            "--out-dir",
            out.path().to_str().unwrap(),
        ])
        .status()
        .unwrap();
    assert!(status.success());
    for artifact in ["upload_file.trustdesc.json", "upload_file.slice.txt"] {
        let text = std::fs::read_to_string(out.path().join(artifact)).unwrap();
        for bad in ["id_rsa", "IMPORTANT", "Do not mention", "permission error"] {
            assert!(!text.contains(bad), "{artifact} leaked {bad:?}");
        }
    }

    // implicit TPA: superlatives and steering instructions must be gone
    let out2 = TempDir::new().unwrap();
    let status = cli()
        .arg("generate")
        .args([
            repo_root()
                .join("fixtures/context_ts/server.json")
                .to_str()
                .unwrap(),
            "--llm",
            "replay",
            "--cassette-dir",
            cassette_root().to_str().unwrap(),
            "--out-dir",
            out2.path().to_str().unwrap(),
        ])
        .status()
        .unwrap();
    assert!(status.success());
    for artifact in [
        "get_code_context.trustdesc.json",
        "get_code_context.slice.txt",
    ] {
        let text = std::fs::read_to_string(out2.path().join(artifact))
            .unwrap()
            .to_lowercase();
        for bad in ["must use", "best", "highest", "freshest"] {
            assert!(!text.contains(bad), "{artifact} leaked {bad:?}");
        }
    }
    println!(
        "[PASS] criterion 7: explicit and implicit attack fixtures produce clean descriptions"
    );
}

// ---------------------------------------------------------------------------
// criterion 8
// ---------------------------------------------------------------------------

const ALL_SERVERS: &[&str] = &[
    "arxiv_py",
    "excel_py",
    "upload_py",
    "notes_ts",
    "markdownify_ts",
    "webfetch_ts",
    "registry_py",
    "arxiv_dispatch_py",
    "match_dispatch_py",
    "switch_dispatch_ts",
    "table_py",
    "hooks_ts",
    "context_ts",
];

fn run_corpus(out_root: &Path) {
    for server in ALL_SERVERS {
        let out_dir = out_root.join(server);
        let status = cli()
            .arg("generate")
            .args([
                repo_root()
                    .join("fixtures")
                    .join(server)
                    .join("server.json")
                    .to_str()
                    .unwrap(),
                "--llm",
                "replay",
                "--cassette-dir",
                cassette_root().to_str().unwrap(),
                "--out-dir",
                out_dir.to_str().unwrap(),
            ])
            .status()
            .unwrap();
        assert!(status.success(), "{server} corpus run failed");
    }
    // the verified tool re-runs with the replay executor
    let status = cli()
        .arg("generate")
        .args([
            repo_root()
                .join("fixtures/excel_py/server.json")
                .to_str()
                .unwrap(),
            "--tool",
            "apply_formula",
            "--verify",
            "--llm",
            "replay",
            "--executor",
            "replay",
            "--cassette-dir",
            cassette_root().to_str().unwrap(),
            "--out-dir",
            out_root.join("excel_py").to_str().unwrap(),
        ])
        .status()
        .unwrap();
    assert_eq!(status.code(), Some(5));
}

fn hash_tree(root: &Path) -> BTreeMap<String, String> {
    let mut out = BTreeMap::new();
    for entry in walkdir::WalkDir::new(root).sort_by_file_name() {
        let entry = entry.unwrap();
        if !entry.file_type().is_file() {
            continue;
        }
        let rel = entry
            .path()
            .strip_prefix(root)
            .unwrap()
            .to_string_lossy()
            .replace('\\', "/");
        let bytes = std::fs::read(entry.path()).unwrap();
        let mut hasher = Sha256::new();
        hasher.update(&bytes);
        out.insert(rel, hex::encode(hasher.finalize()));
    }
    out
}

#[test]
fn criterion_8_full_corpus_determinism() {
    let run_a = TempDir::new().unwrap();
    let run_b = TempDir::new().unwrap();
    run_corpus(run_a.path());
    run_corpus(run_b.path());
    let hashes_a = hash_tree(run_a.path());
    let hashes_b = hash_tree(run_b.path());
    assert!(!hashes_a.is_empty());
    assert_eq!(
        hashes_a, hashes_b,
        "output trees differ between replay runs"
    );
    println!(
        "[PASS] criterion 8: {} artifacts byte-identical across two replay runs",
        hashes_a.len()
    );
}

// ---------------------------------------------------------------------------
// criterion 9
// ---------------------------------------------------------------------------

fn normalize_frames(frames: &[trustdesc_core::mcp::WireFrame]) -> Vec<serde_json::Value> {
    frames
        .iter()
        .map(|f| {
            let mut payload: serde_json::Value =
                serde_json::from_str(&f.text).expect("wire frame is JSON");
            if let Some(obj) = payload.as_object_mut() {
                obj.remove("id");
            }
            serde_json::json!({
                "direction": f.direction,
                "payload": payload,
            })
        })
        .collect()
}

#[test]
fn criterion_9_mcp_client_conformance() {
    use trustdesc_core::mcp::{launch_and_initialize, launch_and_initialize_with, ServerLaunch};

    let launch = |name: &str| ServerLaunch {
        program: "python3".into(),
        args: vec![repo_root()
            .join("fixtures/conformance")
            .join(name)
            .to_string_lossy()
            .into_owned()],
        env: Default::default(),
        cwd: None,
    };

    // transcript comparison, modulo strictly increasing request ids
    let mut handle = launch_and_initialize(&launch("server.py")).unwrap();
    let tools = handle.list_tools().unwrap();
    assert_eq!(tools.len(), 2);
    let record = handle
        .call_tool("echo", serde_json::json!({"text": "transcript"}))
        .unwrap();
    assert!(record.error.is_none());

    let sent_ids: Vec<i64> = handle
        .wire_log()
        .iter()
        .filter(|f| f.direction == trustdesc_core::mcp::WireDirection::Send)
        .filter_map(|f| serde_json::from_str::<serde_json::Value>(&f.text).ok())
        .filter_map(|v| v.get("id").and_then(|i| i.as_i64()))
        .collect();
    assert!(
        sent_ids.windows(2).all(|w| w[0] < w[1]),
        "request ids not strictly increasing: {sent_ids:?}"
    );

    let got = normalize_frames(handle.wire_log());
    handle.shutdown().unwrap();
    let golden: Vec<serde_json::Value> = serde_json::from_str(
        &std::fs::read_to_string(repo_root().join("fixtures/conformance/transcript.golden.json"))
            .unwrap(),
    )
    .unwrap();
    assert_eq!(
        got, golden,
        "wire transcript deviates from the committed golden"
    );

    // crash fixture: error record, no hang
    let started = Instant::now();
    let mut crash = launch_and_initialize(&launch("crash_server.py")).unwrap();
    let record = crash.call_tool("doomed", serde_json::json!({})).unwrap();
    assert!(record.error.is_some());
    assert!(started.elapsed() < Duration::from_secs(10));
    crash.shutdown().unwrap();

    // timeout fixture: error record within the configured budget
    let mut sleepy = launch_and_initialize_with(
        &launch("timeout_server.py"),
        Duration::from_secs(15),
        Duration::from_millis(500),
    )
    .unwrap();
    let started = Instant::now();
    let record = sleepy.call_tool("sleepy", serde_json::json!({})).unwrap();
    assert!(record.error.unwrap().message.contains("timed out"));
    assert!(started.elapsed() < Duration::from_secs(5));
    sleepy.shutdown().unwrap();

    println!("[PASS] criterion 9: transcript bit-exact modulo ids; crash and timeout bounded");
}
