//! MCP over stdio: the execution substrate for dynamic verification.

mod client;
pub mod protocol;

pub use client::{
    launch_and_initialize, launch_and_initialize_with, ProtocolState, ServerHandle, ServerLaunch,
    ToolCallRecord, WireDirection, WireFrame, DEFAULT_CALL_TIMEOUT, DEFAULT_INIT_TIMEOUT,
};
pub use protocol::{RpcError, ToolInfo, PROTOCOL_VERSION};
