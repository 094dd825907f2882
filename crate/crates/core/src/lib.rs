//! Generation of implementation-faithful descriptions for LLM tools.
//!
//! The pipeline slices each tool's reachable code out of its server codebase,
//! prunes logic unreachable under the tool's concrete call sites, sanitizes
//! adversarial artifacts, generates a structured description through a
//! pluggable model gateway, and refines it by executing synthesized tasks
//! against the real tool over MCP stdio.

pub mod call_graph;
pub mod config;
pub mod debloater;
pub mod descgen;
pub mod diag;
pub mod dynver;
pub mod entry_finder;
pub mod error;
pub mod gateway;
pub mod mcp;
pub mod pipeline;
pub mod sanitizer;
pub mod source_model;
pub mod syntax;

pub use error::{Error, Result};
