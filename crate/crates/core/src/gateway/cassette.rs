//! On-disk cassette store: one JSON document per tool per pipeline stage under
//! the cassette directory, entries keyed by request hash.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::sync::Mutex;

use serde::{Deserialize, Serialize};

use crate::error::Result;

use super::{BackendResponse, LlmPurpose, LlmRequest};

/// Timestamp written for entries recorded without a wall clock (seeded or
/// offline refresh); any fixed value keeps replay output stable.
const FROZEN_TIMESTAMP: &str = "1970-01-01T00:00:00Z";

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CassetteEntry {
    pub purpose: String,
    pub response: String,
    pub recorded_at: String,
    #[serde(default)]
    pub prompt_tokens: u64,
    #[serde(default)]
    pub completion_tokens: u64,
    /// First line of the user prompt, for humans scanning the file.
    #[serde(default, skip_serializing_if = "String::is_empty")]
    pub request_summary: String,
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
struct CassetteFile {
    entries: BTreeMap<String, CassetteEntry>,
}

pub struct CassetteStore {
    dir: PathBuf,
    cache: Mutex<BTreeMap<PathBuf, CassetteFile>>,
}

impl CassetteStore {
    pub fn new(dir: &Path) -> Self {
        Self {
            dir: dir.to_path_buf(),
            cache: Mutex::new(BTreeMap::new()),
        }
    }

    fn file_path(&self, scope: &str, purpose: LlmPurpose) -> PathBuf {
        let scope = if scope.is_empty() { "_global" } else { scope };
        self.dir
            .join(scope)
            .join(format!("{}.json", purpose.stage()))
    }

    fn load(&self, path: &Path) -> Result<CassetteFile> {
        if !path.exists() {
            return Ok(CassetteFile::default());
        }
        let text = std::fs::read_to_string(path)?;
        Ok(serde_json::from_str(&text)?)
    }

    pub fn lookup(
        &self,
        scope: &str,
        purpose: LlmPurpose,
        key: &str,
    ) -> Result<Option<CassetteEntry>> {
        let path = self.file_path(scope, purpose);
        let mut cache = self.cache.lock().expect("cassette cache poisoned");
        if !cache.contains_key(&path) {
            let file = self.load(&path)?;
            cache.insert(path.clone(), file);
        }
        Ok(cache[&path].entries.get(key).cloned())
    }

    pub fn append(
        &self,
        scope: &str,
        req: &LlmRequest,
        key: &str,
        resp: &BackendResponse,
    ) -> Result<CassetteEntry> {
        let path = self.file_path(scope, req.purpose);
        let entry = CassetteEntry {
            purpose: req.purpose.as_str().to_string(),
            response: resp.text.clone(),
            recorded_at: FROZEN_TIMESTAMP.to_string(),
            prompt_tokens: resp.prompt_tokens,
            completion_tokens: resp.completion_tokens,
            request_summary: req
                .user
                .lines()
                .next()
                .unwrap_or("")
                .chars()
                .take(120)
                .collect(),
        };
        let mut cache = self.cache.lock().expect("cassette cache poisoned");
        if !cache.contains_key(&path) {
            let file = self.load(&path)?;
            cache.insert(path.clone(), file);
        }
        let file = cache.get_mut(&path).expect("just inserted");
        file.entries.insert(key.to_string(), entry.clone());
        if let Some(parent) = path.parent() {
            std::fs::create_dir_all(parent)?;
        }
        let mut text = serde_json::to_string_pretty(file)?;
        text.push('\n');
        std::fs::write(&path, text)?;
        Ok(entry)
    }
}
