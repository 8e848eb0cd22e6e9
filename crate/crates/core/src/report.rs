//! Machine-readable run reports shared with the CLI.

use serde::{Deserialize, Serialize};

use crate::typing::TypeReport;

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Report {
    Check(CheckReport),
    Decompose(DecomposeReport),
    Equiv(EquivReport),
    Run(RunReport),
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CheckReport {
    pub status: String,
    pub typing: Option<TypeReport>,
    pub balanced: Option<bool>,
    pub error: Option<String>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DecomposeReport {
    pub status: String,
    pub decomposition: Option<String>,
    pub retype: Option<TypeReport>,
    pub minimal: Option<bool>,
    pub error: Option<String>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct EquivReport {
    pub status: String,
    pub depth_used: u32,
    pub witness: Vec<String>,
    pub error: Option<String>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RunReport {
    pub status: String,
    pub steps: Vec<String>,
    pub finale: Option<String>,
    pub error: Option<String>,
}
