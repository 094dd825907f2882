//! Per-server configuration: where the sources live, how tools are named,
//! and how to launch the server for verification.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::mcp::ServerLaunch;
use crate::syntax::Language;

/// A file staged into the verification sandbox before the server starts.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SetupFile {
    /// Source path, relative to the config file.
    pub source: PathBuf,
    /// Destination path inside the sandbox.
    pub dest: PathBuf,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ServerConfig {
    pub name: String,
    /// Source root, relative to the config file unless absolute.
    pub root: PathBuf,
    pub language: Language,
    /// Launch command for verification; servers without one are
    /// analysis-only.
    #[serde(default)]
    pub launch: Option<ServerLaunch>,
    /// Explicit tool list; omitted means auto-discover from registrations.
    #[serde(default)]
    pub tools: Option<Vec<String>>,
    #[serde(default)]
    pub registration_aliases: Vec<String>,
    #[serde(default)]
    pub ignore: Vec<String>,
    #[serde(default)]
    pub setup_files: Vec<SetupFile>,
}

impl ServerConfig {
    /// Load a config file and resolve its relative paths against its own
    /// directory.
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
        let mut config: ServerConfig = serde_json::from_str(&text)
            .map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
        let base = path.parent().unwrap_or(Path::new("."));
        if config.root.is_relative() {
            config.root = base.join(&config.root);
        }
        for f in &mut config.setup_files {
            if f.source.is_relative() {
                f.source = base.join(&f.source);
            }
        }
        // launch args referring to relative scripts are resolved by the
        // launcher's cwd, which verification overrides; resolve them here
        if let Some(launch) = &mut config.launch {
            for arg in &mut launch.args {
                let p = Path::new(arg.as_str());
                if p.extension().is_some() && p.is_relative() {
                    let resolved = base.join(p.as_os_str());
                    if resolved.exists() {
                        *arg = resolved.to_string_lossy().into_owned();
                    }
                }
            }
        }
        config.validate()?;
        Ok(config)
    }

    pub fn validate(&self) -> Result<()> {
        if self.name.trim().is_empty() {
            return Err(Error::Config("server name must be nonempty".into()));
        }
        if !self.root.is_dir() {
            return Err(Error::Config(format!(
                "source root {} does not exist",
                self.root.display()
            )));
        }
        Ok(())
    }
}
