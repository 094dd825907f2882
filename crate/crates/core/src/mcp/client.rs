//! Minimal MCP client over child-process stdio: launch, initialize, list
//! tools, call tools. One in-flight request per handle; responses are matched
//! by id, late or unsolicited frames are discarded, and a dead server always
//! produces an error instead of a hang.

use std::collections::BTreeMap;
use std::io::{BufRead, BufReader, Read, Write};
use std::path::PathBuf;
use std::process::{Child, ChildStdin, Command, Stdio};
use std::sync::mpsc::{Receiver, RecvTimeoutError};
use std::sync::{Arc, Mutex};
use std::time::{Duration, Instant};

use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::error::{Error, Result};

use super::protocol::{JsonRpcRequest, JsonRpcResponse, RpcError, ToolInfo, PROTOCOL_VERSION};

pub const DEFAULT_INIT_TIMEOUT: Duration = Duration::from_secs(15);
pub const DEFAULT_CALL_TIMEOUT: Duration = Duration::from_secs(60);
const SHUTDOWN_GRACE: Duration = Duration::from_secs(5);
const STDERR_KEEP_BYTES: usize = 8 * 1024;

/// How to start a verification server.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ServerLaunch {
    pub program: String,
    #[serde(default)]
    pub args: Vec<String>,
    /// Extra environment on top of the allowlist.
    #[serde(default)]
    pub env: BTreeMap<String, String>,
    /// Working directory; verification runs point this at a scratch sandbox.
    #[serde(default)]
    pub cwd: Option<PathBuf>,
}

/// Environment variables forwarded from the parent process.
const ENV_ALLOWLIST: &[&str] = &["PATH", "HOME", "LANG", "LC_ALL", "PYTHONHASHSEED", "TMPDIR"];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ProtocolState {
    Launched,
    Initialized,
    Closed,
}

/// Result of one `tools/call`, success or failure, with timing.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ToolCallRecord {
    pub tool_name: String,
    pub arguments: Value,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub result: Option<Value>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<RpcError>,
    pub wall_time_ms: u64,
}

impl ToolCallRecord {
    pub fn is_error(&self) -> bool {
        self.error.is_some()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum WireDirection {
    Send,
    Recv,
}

/// One frame on the wire, for conformance transcripts.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct WireFrame {
    pub direction: WireDirection,
    pub text: String,
}

pub struct ServerHandle {
    child: Child,
    stdin: Option<ChildStdin>,
    lines: Receiver<std::io::Result<String>>,
    stderr_tail: Arc<Mutex<String>>,
    state: ProtocolState,
    next_id: i64,
    pub init_timeout: Duration,
    pub call_timeout: Duration,
    pub protocol_version: String,
    wire_log: Vec<WireFrame>,
}

fn spawn_reader(child: &mut Child) -> (Receiver<std::io::Result<String>>, Arc<Mutex<String>>) {
    let stdout = child.stdout.take().expect("piped stdout");
    let (tx, rx) = std::sync::mpsc::channel();
    std::thread::spawn(move || {
        let reader = BufReader::new(stdout);
        for line in reader.lines() {
            if tx.send(line).is_err() {
                break;
            }
        }
    });

    let stderr_tail = Arc::new(Mutex::new(String::new()));
    if let Some(stderr) = child.stderr.take() {
        let tail = Arc::clone(&stderr_tail);
        std::thread::spawn(move || {
            let mut reader = BufReader::new(stderr);
            let mut buf = [0u8; 1024];
            loop {
                match reader.read(&mut buf) {
                    Ok(0) | Err(_) => break,
                    Ok(n) => {
                        let mut tail = tail.lock().expect("stderr tail poisoned");
                        tail.push_str(&String::from_utf8_lossy(&buf[..n]));
                        if tail.len() > STDERR_KEEP_BYTES {
                            let cut = tail.len() - STDERR_KEEP_BYTES;
                            tail.drain(..cut);
                        }
                    }
                }
            }
        });
    }
    (rx, stderr_tail)
}

/// Launch the server process and run the MCP initialize handshake.
pub fn launch_and_initialize(launch: &ServerLaunch) -> Result<ServerHandle> {
    launch_and_initialize_with(launch, DEFAULT_INIT_TIMEOUT, DEFAULT_CALL_TIMEOUT)
}

pub fn launch_and_initialize_with(
    launch: &ServerLaunch,
    init_timeout: Duration,
    call_timeout: Duration,
) -> Result<ServerHandle> {
    let mut cmd = Command::new(&launch.program);
    cmd.args(&launch.args)
        .stdin(Stdio::piped())
        .stdout(Stdio::piped())
        .stderr(Stdio::piped());
    cmd.env_clear();
    for key in ENV_ALLOWLIST {
        if let Ok(value) = std::env::var(key) {
            cmd.env(key, value);
        }
    }
    for (k, v) in &launch.env {
        cmd.env(k, v);
    }
    if let Some(cwd) = &launch.cwd {
        cmd.current_dir(cwd);
    }
    let mut child = cmd
        .spawn()
        .map_err(|e| Error::Spawn(format!("{}: {e}", launch.program)))?;
    let stdin = child.stdin.take().expect("piped stdin");
    let (lines, stderr_tail) = spawn_reader(&mut child);

    let mut handle = ServerHandle {
        child,
        stdin: Some(stdin),
        lines,
        stderr_tail,
        state: ProtocolState::Launched,
        next_id: 1,
        init_timeout,
        call_timeout,
        protocol_version: PROTOCOL_VERSION.to_string(),
        wire_log: Vec::new(),
    };

    let init_result = handle.request(
        "initialize",
        json!({
            "protocolVersion": PROTOCOL_VERSION,
            "capabilities": {},
            "clientInfo": {"name": "trustdesc", "version": env!("CARGO_PKG_VERSION")},
        }),
        init_timeout,
    );
    match init_result {
        Ok(result) => {
            if let Some(v) = result.get("protocolVersion").and_then(|v| v.as_str()) {
                handle.protocol_version = v.to_string();
            }
            handle.send_notification("notifications/initialized")?;
            handle.state = ProtocolState::Initialized;
            Ok(handle)
        }
        Err(e) => {
            let _ = handle.shutdown();
            Err(e)
        }
    }
}

impl ServerHandle {
    pub fn state(&self) -> ProtocolState {
        self.state
    }

    pub fn pid(&self) -> u32 {
        self.child.id()
    }

    pub fn wire_log(&self) -> &[WireFrame] {
        &self.wire_log
    }

    pub fn stderr_tail(&self) -> String {
        self.stderr_tail
            .lock()
            .expect("stderr tail poisoned")
            .clone()
    }

    fn send_line(&mut self, text: &str) -> Result<()> {
        let stdin = self
            .stdin
            .as_mut()
            .ok_or_else(|| Error::InvalidOperation("handle is closed".into()))?;
        stdin
            .write_all(text.as_bytes())
            .and_then(|_| stdin.write_all(b"\n"))
            .and_then(|_| stdin.flush())
            .map_err(|e| Error::Spawn(format!("server stdin closed: {e}")))?;
        self.wire_log.push(WireFrame {
            direction: WireDirection::Send,
            text: text.to_string(),
        });
        Ok(())
    }

    fn send_notification(&mut self, method: &str) -> Result<()> {
        let text = serde_json::to_string(&JsonRpcRequest::notification(method))?;
        self.send_line(&text)
    }

    /// One request/response exchange. Frames with a stale or missing id are
    /// skipped; non-JSON output fails with the captured bytes.
    fn request(&mut self, method: &str, params: Value, timeout: Duration) -> Result<Value> {
        let id = self.next_id;
        self.next_id += 1;
        let text = serde_json::to_string(&JsonRpcRequest::call(id, method, params))?;
        self.send_line(&text)?;

        let deadline = Instant::now() + timeout;
        loop {
            let remaining = deadline.saturating_duration_since(Instant::now());
            if remaining.is_zero() {
                return Err(Error::Timeout(timeout.as_millis() as u64));
            }
            let line = match self.lines.recv_timeout(remaining) {
                Ok(Ok(line)) => line,
                Ok(Err(e)) => return Err(Error::Spawn(format!("server stdout error: {e}"))),
                Err(RecvTimeoutError::Timeout) => {
                    return Err(Error::Timeout(timeout.as_millis() as u64))
                }
                Err(RecvTimeoutError::Disconnected) => {
                    let tail = self.stderr_tail();
                    return Err(Error::Spawn(format!(
                        "server exited before responding; stderr tail: {tail:?}"
                    )));
                }
            };
            if line.trim().is_empty() {
                continue;
            }
            self.wire_log.push(WireFrame {
                direction: WireDirection::Recv,
                text: line.clone(),
            });
            let parsed: JsonRpcResponse = match serde_json::from_str(&line) {
                Ok(p) => p,
                Err(e) => {
                    return Err(Error::MalformedResponse {
                        detail: e.to_string(),
                        raw: line.chars().take(400).collect(),
                    })
                }
            };
            match parsed.id.as_ref().and_then(|v| v.as_i64()) {
                Some(got) if got == id => {
                    if let Some(err) = parsed.error {
                        return Err(Error::Protocol {
                            code: err.code,
                            message: err.message,
                        });
                    }
                    return Ok(parsed.result.unwrap_or(Value::Null));
                }
                // stale response to a timed-out call, server notification,
                // or unsolicited frame: ignore and keep waiting
                _ => continue,
            }
        }
    }

    fn require_initialized(&self) -> Result<()> {
        if self.state != ProtocolState::Initialized {
            return Err(Error::InvalidOperation(format!(
                "server handle is {:?}, not initialized",
                self.state
            )));
        }
        Ok(())
    }

    /// `tools/list`, following pagination to exhaustion.
    pub fn list_tools(&mut self) -> Result<Vec<ToolInfo>> {
        self.require_initialized()?;
        let mut tools = Vec::new();
        let mut cursor: Option<String> = None;
        loop {
            let params = match &cursor {
                Some(c) => json!({"cursor": c}),
                None => json!({}),
            };
            let timeout = self.call_timeout;
            let result = self.request("tools/list", params, timeout)?;
            let page: Vec<ToolInfo> = serde_json::from_value(
                result.get("tools").cloned().unwrap_or(Value::Array(vec![])),
            )?;
            tools.extend(page);
            match result.get("nextCursor").and_then(|v| v.as_str()) {
                Some(next) if !next.is_empty() => cursor = Some(next.to_string()),
                _ => break,
            }
        }
        Ok(tools)
    }

    /// `tools/call`. Runtime failures (protocol errors, timeouts, crashes)
    /// land in the record's error field; the handle stays usable after a
    /// timeout.
    pub fn call_tool(&mut self, name: &str, arguments: Value) -> Result<ToolCallRecord> {
        self.require_initialized()?;
        let started = Instant::now();
        let timeout = self.call_timeout;
        let outcome = self.request(
            "tools/call",
            json!({"name": name, "arguments": arguments.clone()}),
            timeout,
        );
        let wall_time_ms = started.elapsed().as_millis() as u64;
        let record = match outcome {
            Ok(result) => ToolCallRecord {
                tool_name: name.to_string(),
                arguments,
                result: Some(result),
                error: None,
                wall_time_ms,
            },
            Err(Error::Protocol { code, message }) => ToolCallRecord {
                tool_name: name.to_string(),
                arguments,
                result: None,
                error: Some(RpcError {
                    code,
                    message,
                    data: None,
                }),
                wall_time_ms,
            },
            Err(Error::Timeout(ms)) => ToolCallRecord {
                tool_name: name.to_string(),
                arguments,
                result: None,
                error: Some(RpcError {
                    code: -32001,
                    message: format!("timed out after {ms} ms"),
                    data: None,
                }),
                wall_time_ms,
            },
            Err(other) => ToolCallRecord {
                tool_name: name.to_string(),
                arguments,
                result: None,
                error: Some(RpcError {
                    code: -32002,
                    message: other.to_string(),
                    data: None,
                }),
                wall_time_ms,
            },
        };
        Ok(record)
    }

    /// Close stdin and wait for exit, killing after the grace period.
    pub fn shutdown(&mut self) -> Result<()> {
        self.stdin.take();
        let deadline = Instant::now() + SHUTDOWN_GRACE;
        loop {
            match self.child.try_wait() {
                Ok(Some(_)) => break,
                Ok(None) => {
                    if Instant::now() >= deadline {
                        let _ = self.child.kill();
                        let _ = self.child.wait();
                        break;
                    }
                    std::thread::sleep(Duration::from_millis(25));
                }
                Err(_) => break,
            }
        }
        self.state = ProtocolState::Closed;
        Ok(())
    }
}

impl Drop for ServerHandle {
    fn drop(&mut self) {
        if self.state != ProtocolState::Closed {
            let _ = self.shutdown();
        }
    }
}
