//! Single chokepoint for model interactions: a live chat-completions backend
//! plus a deterministic record/replay cassette store. Every prompt in the
//! pipeline flows through [`LlmGateway::complete`], so a cassette directory
//! pins the whole run byte-for-byte.

mod cassette;
mod http;
pub mod prompts;
#[cfg(any(test, feature = "test-support"))]
pub mod seed;

use std::collections::BTreeMap;
use std::path::Path;
use std::sync::Mutex;

use serde::{Deserialize, Serialize};
use serde_json::Value;
use sha2::{Digest, Sha256};

pub use cassette::{CassetteEntry, CassetteStore};
pub use http::HttpBackend;

use crate::error::{Error, Result};

pub const DEFAULT_TEMPERATURE: f32 = 0.2;

/// Model id used when none is configured; the committed fixture cassettes
/// are recorded under this id.
pub const DEFAULT_MODEL_ID: &str = "seed-responder-v1";

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum LlmPurpose {
    EntryFallback,
    Debloat,
    BiasFilter,
    Descgen,
    StmtExtract,
    TaskSynth,
    ToolCallSynth,
    Judge,
}

impl LlmPurpose {
    pub fn as_str(self) -> &'static str {
        match self {
            LlmPurpose::EntryFallback => "entry-fallback",
            LlmPurpose::Debloat => "debloat",
            LlmPurpose::BiasFilter => "bias-filter",
            LlmPurpose::Descgen => "descgen",
            LlmPurpose::StmtExtract => "stmt-extract",
            LlmPurpose::TaskSynth => "task-synth",
            LlmPurpose::ToolCallSynth => "tool-call-synth",
            LlmPurpose::Judge => "judge",
        }
    }

    /// Cost-reporting stage this purpose belongs to.
    pub fn stage(self) -> &'static str {
        match self {
            LlmPurpose::EntryFallback => "entry",
            LlmPurpose::Debloat => "debloating",
            LlmPurpose::BiasFilter | LlmPurpose::Descgen => "init-desc",
            _ => "dynamic-ver",
        }
    }
}

impl std::fmt::Display for LlmPurpose {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct LlmRequest {
    pub purpose: LlmPurpose,
    pub system: String,
    pub user: String,
    pub response_schema: Value,
    pub model: String,
    pub temperature: f32,
}

impl LlmRequest {
    pub fn new(
        purpose: LlmPurpose,
        system: impl Into<String>,
        user: impl Into<String>,
        response_schema: Value,
        model: impl Into<String>,
    ) -> Self {
        Self {
            purpose,
            system: system.into(),
            user: user.into(),
            response_schema,
            model: model.into(),
            temperature: DEFAULT_TEMPERATURE,
        }
    }

    /// Stable cassette key: hash of the canonically serialized request fields.
    /// Maps are serialized with sorted keys, so field ordering in the schema
    /// cannot perturb the key.
    pub fn cassette_key(&self) -> String {
        let canonical = serde_json::json!({
            "model": self.model,
            "purpose": self.purpose.as_str(),
            "response_schema": self.response_schema,
            "system": self.system,
            "user": self.user,
        });
        let bytes = serde_json::to_vec(&canonical).expect("canonical request serializes");
        let mut hasher = Sha256::new();
        hasher.update(&bytes);
        hex::encode(hasher.finalize())
    }
}

/// A completed model response. `recorded_at` carries the cassette timestamp
/// under replay so artifacts stay byte-stable across runs.
#[derive(Debug, Clone)]
pub struct Completion {
    pub text: String,
    pub recorded_at: Option<String>,
}

#[derive(Debug, Clone, Default)]
pub struct BackendResponse {
    pub text: String,
    pub prompt_tokens: u64,
    pub completion_tokens: u64,
}

/// A raw completion producer: the live HTTP client, or a scripted stand-in.
pub trait LlmBackend: Send + Sync {
    fn complete(&self, req: &LlmRequest) -> Result<BackendResponse>;
}

pub trait LlmGateway: Send + Sync {
    fn complete(&self, req: &LlmRequest) -> Result<Completion>;
    /// Tool scope for cassette file placement; pipelines set this per tool.
    fn scope(&self) -> &str;
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GatewayMode {
    Live,
    Record,
    Replay,
}

impl std::str::FromStr for GatewayMode {
    type Err = String;
    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "live" => Ok(GatewayMode::Live),
            "record" => Ok(GatewayMode::Record),
            "replay" => Ok(GatewayMode::Replay),
            other => Err(format!("unknown llm mode: {other}")),
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct PurposeUsage {
    pub calls: u64,
    pub prompt_tokens: u64,
    pub completion_tokens: u64,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct UsageReport {
    pub per_purpose: BTreeMap<String, PurposeUsage>,
    pub per_stage: BTreeMap<String, PurposeUsage>,
}

impl UsageReport {
    pub fn calls_for(&self, purpose: LlmPurpose) -> u64 {
        self.per_purpose
            .get(purpose.as_str())
            .map(|u| u.calls)
            .unwrap_or(0)
    }
}

enum Mode {
    Live(Box<dyn LlmBackend>),
    Record {
        backend: Box<dyn LlmBackend>,
        store: CassetteStore,
    },
    Replay {
        store: CassetteStore,
    },
}

/// Shareable gateway; counters update atomically under a lock, cassette
/// appends are serialized by the store.
pub struct Gateway {
    mode: Mode,
    model: String,
    counters: Mutex<BTreeMap<LlmPurpose, PurposeUsage>>,
}

impl Gateway {
    pub fn live(backend: HttpBackend, model: impl Into<String>) -> Self {
        Self {
            mode: Mode::Live(Box::new(backend)),
            model: model.into(),
            counters: Mutex::new(BTreeMap::new()),
        }
    }

    pub fn record(
        backend: Box<dyn LlmBackend>,
        cassette_dir: &Path,
        model: impl Into<String>,
    ) -> Self {
        Self {
            mode: Mode::Record {
                backend,
                store: CassetteStore::new(cassette_dir),
            },
            model: model.into(),
            counters: Mutex::new(BTreeMap::new()),
        }
    }

    pub fn replay(cassette_dir: &Path, model: impl Into<String>) -> Self {
        Self {
            mode: Mode::Replay {
                store: CassetteStore::new(cassette_dir),
            },
            model: model.into(),
            counters: Mutex::new(BTreeMap::new()),
        }
    }

    pub fn model(&self) -> &str {
        &self.model
    }

    fn bump(&self, purpose: LlmPurpose, prompt_tokens: u64, completion_tokens: u64) {
        let mut counters = self.counters.lock().expect("usage counters poisoned");
        let entry = counters.entry(purpose).or_default();
        entry.calls += 1;
        entry.prompt_tokens += prompt_tokens;
        entry.completion_tokens += completion_tokens;
    }

    pub fn usage_report(&self) -> UsageReport {
        let counters = self.counters.lock().expect("usage counters poisoned");
        let mut report = UsageReport::default();
        for (purpose, usage) in counters.iter() {
            report
                .per_purpose
                .insert(purpose.as_str().to_string(), usage.clone());
            let stage = report
                .per_stage
                .entry(purpose.stage().to_string())
                .or_default();
            stage.calls += usage.calls;
            stage.prompt_tokens += usage.prompt_tokens;
            stage.completion_tokens += usage.completion_tokens;
        }
        report
    }

    pub fn complete_scoped(&self, scope: &str, req: &LlmRequest) -> Result<Completion> {
        let key = req.cassette_key();
        match &self.mode {
            Mode::Live(backend) => {
                let resp = backend.complete(req)?;
                self.bump(req.purpose, resp.prompt_tokens, resp.completion_tokens);
                Ok(Completion {
                    text: resp.text,
                    recorded_at: None,
                })
            }
            Mode::Record { backend, store } => {
                if let Some(entry) = store.lookup(scope, req.purpose, &key)? {
                    self.bump(req.purpose, entry.prompt_tokens, entry.completion_tokens);
                    return Ok(Completion {
                        text: entry.response,
                        recorded_at: Some(entry.recorded_at),
                    });
                }
                let resp = backend.complete(req)?;
                let entry = store.append(scope, req, &key, &resp)?;
                self.bump(req.purpose, resp.prompt_tokens, resp.completion_tokens);
                Ok(Completion {
                    text: resp.text,
                    recorded_at: Some(entry.recorded_at),
                })
            }
            Mode::Replay { store } => {
                let entry =
                    store
                        .lookup(scope, req.purpose, &key)?
                        .ok_or_else(|| Error::CassetteMiss {
                            purpose: req.purpose.as_str().to_string(),
                            key: key.clone(),
                        })?;
                self.bump(req.purpose, entry.prompt_tokens, entry.completion_tokens);
                Ok(Completion {
                    text: entry.response,
                    recorded_at: Some(entry.recorded_at),
                })
            }
        }
    }
}

/// Per-tool view onto a shared gateway; cassette entries land under the tool's
/// directory.
pub struct ToolScopedGateway<'a> {
    gateway: &'a Gateway,
    scope: String,
}

impl<'a> ToolScopedGateway<'a> {
    pub fn new(gateway: &'a Gateway, scope: impl Into<String>) -> Self {
        Self {
            gateway,
            scope: scope.into(),
        }
    }

    pub fn gateway(&self) -> &Gateway {
        self.gateway
    }
}

impl LlmGateway for ToolScopedGateway<'_> {
    fn complete(&self, req: &LlmRequest) -> Result<Completion> {
        self.gateway.complete_scoped(&self.scope, req)
    }

    fn scope(&self) -> &str {
        &self.scope
    }
}
