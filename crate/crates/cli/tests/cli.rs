//! CLI behavior: exit codes, flags, and artifact layout.

use std::path::PathBuf;
use std::process::Command;

use tempfile::TempDir;

fn repo_root() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../..")
}

fn cli() -> Command {
    Command::new(env!("CARGO_BIN_EXE_trustdesc"))
}

fn fixture(server: &str) -> String {
    repo_root()
        .join("fixtures")
        .join(server)
        .join("server.json")
        .to_string_lossy()
        .into_owned()
}

fn cassettes() -> String {
    repo_root().join("cassettes").to_string_lossy().into_owned()
}

#[test]
fn missing_arguments_exit_with_usage_code() {
    let status = cli().arg("generate").status().unwrap();
    assert_eq!(status.code(), Some(2));

    let status = cli().status().unwrap();
    assert_eq!(status.code(), Some(2));
}

#[test]
fn nonexistent_config_exits_with_usage_code() {
    let status = cli()
        .args(["generate", "/nonexistent/server.json"])
        .status()
        .unwrap();
    assert_eq!(status.code(), Some(2));
}

#[test]
fn unknown_tool_exits_with_resolution_code() {
    let out = TempDir::new().unwrap();
    let status = cli()
        .args([
            "slice",
            &fixture("arxiv_py"),
            "--tool",
            "ghost_tool",
            "--cassette-dir",
            &cassettes(),
            "--out-dir",
            out.path().to_str().unwrap(),
        ])
        .status()
        .unwrap();
    assert_eq!(status.code(), Some(3));
}

#[test]
fn cassette_miss_exits_with_gateway_code() {
    let out = TempDir::new().unwrap();
    let empty = TempDir::new().unwrap();
    let status = cli()
        .args([
            "generate",
            &fixture("arxiv_py"),
            "--llm",
            "replay",
            "--cassette-dir",
            empty.path().to_str().unwrap(),
            "--out-dir",
            out.path().to_str().unwrap(),
        ])
        .status()
        .unwrap();
    assert_eq!(status.code(), Some(4));
}

#[test]
fn sanitize_flag_emits_comment_free_slices() {
    let out = TempDir::new().unwrap();
    let status = cli()
        .args([
            "slice",
            &fixture("upload_py"),
            "--sanitize",
            "--cassette-dir",
            &cassettes(),
            "--out-dir",
            out.path().to_str().unwrap(),
        ])
        .status()
        .unwrap();
    assert!(status.success());
    let slice = std::fs::read_to_string(out.path().join("upload_file.slice.txt")).unwrap();
    assert!(!slice.contains('#'));
    assert!(!slice.contains("\"\"\""));
    assert!(!slice.contains("id_rsa"));
    assert!(out.path().join("upload_file.renames.json").exists());
    assert!(out.path().join("upload_file.graph.json").exists());
}

#[test]
fn lite_mode_omits_the_functionalities_field() {
    let out = TempDir::new().unwrap();
    let status = cli()
        .args([
            "generate",
            &fixture("upload_py"),
            "--mode",
            "lite",
            "--cassette-dir",
            &cassettes(),
            "--out-dir",
            out.path().to_str().unwrap(),
        ])
        .status()
        .unwrap();
    assert!(status.success());
    let desc = std::fs::read_to_string(out.path().join("upload_file.trustdesc.json")).unwrap();
    assert!(!desc.contains("functionalities"));
    assert!(desc.contains("\"mode\": \"lite\""));
}

#[test]
fn inspect_covers_every_tool_in_sorted_order() {
    let output = cli()
        .args([
            "inspect",
            &fixture("excel_py"),
            "--cassette-dir",
            &cassettes(),
        ])
        .output()
        .unwrap();
    assert!(output.status.success());
    let text = String::from_utf8(output.stdout).unwrap();
    let positions: Vec<usize> = [
        "== apply_formula ==",
        "== create_chart ==",
        "== write_data_to_excel ==",
    ]
    .iter()
    .map(|h| {
        text.find(h)
            .unwrap_or_else(|| panic!("missing section {h}"))
    })
    .collect();
    assert!(positions.windows(2).all(|w| w[0] < w[1]));
    // launchable server: the original-description diff is present
    assert!(text.contains("original description:"));
}

#[test]
fn parallel_jobs_produce_the_same_artifacts() {
    let out_serial = TempDir::new().unwrap();
    let out_parallel = TempDir::new().unwrap();
    for (out, jobs) in [(&out_serial, "1"), (&out_parallel, "3")] {
        let status = cli()
            .args([
                "generate",
                &fixture("excel_py"),
                "--jobs",
                jobs,
                "--cassette-dir",
                &cassettes(),
                "--out-dir",
                out.path().to_str().unwrap(),
            ])
            .status()
            .unwrap();
        assert!(status.success());
    }
    for file in [
        "apply_formula.trustdesc.json",
        "create_chart.trustdesc.json",
        "write_data_to_excel.trustdesc.json",
        "trustdesc.manifest.json",
    ] {
        let a = std::fs::read_to_string(out_serial.path().join(file)).unwrap();
        let b = std::fs::read_to_string(out_parallel.path().join(file)).unwrap();
        assert_eq!(a, b, "{file} differs between jobs=1 and jobs=3");
    }
}

#[test]
fn rejected_edit_diagnostics_stream_as_json_lines() {
    // an empty-but-present cassette dir for one stage forces no rejections;
    // instead check the happy-path diagnostic stream stays parseable
    let out = TempDir::new().unwrap();
    let output = cli()
        .args([
            "generate",
            &fixture("context_ts"),
            "--cassette-dir",
            &cassettes(),
            "--out-dir",
            out.path().to_str().unwrap(),
        ])
        .output()
        .unwrap();
    assert!(output.status.success());
    for line in String::from_utf8(output.stderr).unwrap().lines() {
        if line.trim().is_empty() {
            continue;
        }
        let parsed: serde_json::Value = serde_json::from_str(line)
            .unwrap_or_else(|e| panic!("diagnostic line is not JSON: {line} ({e})"));
        assert!(parsed.get("kind").is_some());
    }
}
