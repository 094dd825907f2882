use serde::{Deserialize, Serialize};

/// A non-fatal event worth surfacing to the operator: a skipped file, a
/// rejected edit, an ambiguous call, a degraded fallback.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Diagnostic {
    /// Short machine-readable category, e.g. `skipped-file`, `rejected-edit`.
    pub kind: String,
    pub message: String,
    /// `file:line` locus when one applies.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub locus: Option<String>,
}

impl Diagnostic {
    pub fn new(kind: &str, message: impl Into<String>) -> Self {
        Self {
            kind: kind.to_string(),
            message: message.into(),
            locus: None,
        }
    }

    pub fn at(mut self, locus: impl Into<String>) -> Self {
        self.locus = Some(locus.into());
        self
    }
}
