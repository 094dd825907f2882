//! Rebuilds the committed fixture cassettes offline from the deterministic
//! seed responder. Run explicitly after changing prompts, fixtures, or the
//! responder:
//!
//! ```bash
//! cargo test -p trustdesc-core --test refresh_cassettes -- --ignored
//! ```
//!
//! Cassettes land under `cassettes/<server>/<tool>/<stage>.json`; the
//! apply_formula verification run also refreshes its scripted executor log.

use std::path::{Path, PathBuf};

use trustdesc_core::config::ServerConfig;
use trustdesc_core::descgen::DescMode;
use trustdesc_core::dynver::ReplayExecutor;
use trustdesc_core::gateway::seed::SeedBackend;
use trustdesc_core::gateway::{Gateway, DEFAULT_MODEL_ID};
use trustdesc_core::pipeline::{self, canonical_json, ExecutorKind};

const FIXTURE_SERVERS: &[&str] = &[
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

fn repo_root() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../..")
}

fn seed_server(server: &str, cassette_root: &Path) {
    let config = ServerConfig::load(
        &repo_root()
            .join("fixtures")
            .join(server)
            .join("server.json"),
    )
    .unwrap_or_else(|e| panic!("{server}: {e}"));
    let model = pipeline::load_model(&config).unwrap();
    let gateway = Gateway::record(
        Box::new(SeedBackend::new()),
        cassette_root,
        DEFAULT_MODEL_ID,
    );
    let scratch = tempfile::TempDir::new().unwrap();

    for tool in pipeline::resolve_tools(&config, &model) {
        let verify = server == "excel_py" && tool == "apply_formula";
        let executor = if verify {
            ExecutorKind::Live
        } else {
            ExecutorKind::Replay
        };
        let outcome = pipeline::generate_tool(
            &model,
            &config,
            &tool,
            &gateway,
            DescMode::Full,
            verify,
            executor,
            Some(cassette_root),
            scratch.path(),
        )
        .unwrap_or_else(|e| panic!("{server}/{tool}: {e}"));

        if let Some(report) = &outcome.report {
            let script = ReplayExecutor::to_script_json(&report.logs);
            let script_path = cassette_root.join(server).join(&tool).join("executor.json");
            std::fs::create_dir_all(script_path.parent().unwrap()).unwrap();
            std::fs::write(&script_path, canonical_json(&script).unwrap()).unwrap();
        }

        // lite-mode cassettes for the dedicated full/lite equality fixture
        if server == "upload_py" {
            pipeline::generate_tool(
                &model,
                &config,
                &tool,
                &gateway,
                DescMode::Lite,
                false,
                ExecutorKind::Replay,
                Some(cassette_root),
                scratch.path(),
            )
            .unwrap_or_else(|e| panic!("{server}/{tool} (lite): {e}"));
        }
        println!("seeded {server}/{tool}");
    }
}

#[test]
#[ignore = "rewrites the committed cassettes; run explicitly"]
fn reseed_fixture_cassettes() {
    let cassette_root = repo_root().join("cassettes");
    for server in FIXTURE_SERVERS {
        let dir = cassette_root.join(server);
        if dir.exists() {
            std::fs::remove_dir_all(&dir).unwrap();
        }
        seed_server(server, &cassette_root);
    }
    println!("cassettes refreshed under {}", cassette_root.display());
}

/// Frames with request ids blanked, for id-agnostic comparison.
pub fn normalize_frames(frames: &[trustdesc_core::mcp::WireFrame]) -> Vec<serde_json::Value> {
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
#[ignore = "rewrites the committed conformance transcript; run explicitly"]
fn regenerate_conformance_transcript() {
    use trustdesc_core::mcp::{launch_and_initialize, ServerLaunch};

    let server = repo_root().join("fixtures/conformance/server.py");
    let launch = ServerLaunch {
        program: "python3".into(),
        args: vec![server.to_string_lossy().into_owned()],
        env: Default::default(),
        cwd: None,
    };
    let mut handle = launch_and_initialize(&launch).unwrap();
    let tools = handle.list_tools().unwrap();
    assert_eq!(tools.len(), 2);
    let record = handle
        .call_tool("echo", serde_json::json!({"text": "transcript"}))
        .unwrap();
    assert!(record.error.is_none());
    let frames = normalize_frames(handle.wire_log());
    handle.shutdown().unwrap();

    let path = repo_root().join("fixtures/conformance/transcript.golden.json");
    std::fs::write(&path, canonical_json(&frames).unwrap()).unwrap();
    println!("transcript written to {}", path.display());
}
