//! The JSON report written by every subcommand.

use crate::config::{ConfigError, RunConfig};
use ifconv_core::classify::ConvergenceReport;
use ifconv_core::simkit::{
    AgreementSummary, ChernyCheck, FubiniCheck, OccupationCheck, RayKnightCheck, WilliamsCheck,
};
use serde::Serialize;

pub const TOOL_NAME: &str = "ifconv";
pub const TOOL_VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum RunStatus {
    Conclusive,
    Inconclusive,
    Error,
}

impl RunStatus {
    pub fn exit_code(self) -> i32 {
        match self {
            RunStatus::Conclusive => 0,
            RunStatus::Error => 1,
            RunStatus::Inconclusive => 2,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct ToolInfo {
    pub name: &'static str,
    pub version: &'static str,
}

#[derive(Debug, Clone, Serialize)]
pub struct ErrorInfo {
    pub kind: String,
    pub message: String,
}

impl From<&ConfigError> for ErrorInfo {
    fn from(e: &ConfigError) -> Self {
        ErrorInfo { kind: e.kind().into(), message: e.to_string() }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct IdentitiesSection {
    pub ray_knight: RayKnightCheck,
    pub williams: WilliamsCheck,
    pub cherny: Vec<ChernyCheck>,
    pub fubini: Vec<FubiniCheck>,
    pub occupation: OccupationCheck,
}

#[derive(Debug, Clone, Default, Serialize)]
pub struct Timings {
    pub total_seconds: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub classify_seconds: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub simulate_seconds: Option<f64>,
}

/// Field order is fixed and `timings` comes last, so two runs with the same
/// config and seed differ only in that block.
#[derive(Debug, Clone, Serialize)]
pub struct Report {
    pub tool: ToolInfo,
    pub command: &'static str,
    pub config: Option<RunConfig>,
    pub status: RunStatus,
    pub flags: Vec<String>,
    pub error: Option<ErrorInfo>,
    pub classifier: Option<ConvergenceReport>,
    pub simulation: Option<AgreementSummary>,
    pub identities: Option<IdentitiesSection>,
    pub timings: Timings,
}

impl Report {
    pub fn new(command: &'static str, config: Option<RunConfig>) -> Self {
        Report {
            tool: ToolInfo { name: TOOL_NAME, version: TOOL_VERSION },
            command,
            config,
            status: RunStatus::Conclusive,
            flags: Vec::new(),
            error: None,
            classifier: None,
            simulation: None,
            identities: None,
            timings: Timings::default(),
        }
    }

    pub fn fail(mut self, e: &ConfigError) -> Self {
        self.status = RunStatus::Error;
        self.error = Some(e.into());
        self
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("reports always serialize");
        s.push('\n');
        s
    }
}
