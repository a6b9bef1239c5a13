//! Synthesis outcome types shared by the orchestrator and the store.

use std::fmt;
use std::str::FromStr;

use chrono::{DateTime, SecondsFormat, Utc};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Status {
    Ok,
    SynthError,
    Timeout,
}

impl Status {
    pub fn as_str(self) -> &'static str {
        match self {
            Status::Ok => "ok",
            Status::SynthError => "synth_error",
            Status::Timeout => "timeout",
        }
    }
}

impl fmt::Display for Status {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Status {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "ok" => Ok(Status::Ok),
            "synth_error" => Ok(Status::SynthError),
            "timeout" => Ok(Status::Timeout),
            other => Err(format!("unknown status `{other}`")),
        }
    }
}

/// FPGA resources used by one implementation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
pub struct ResourceUsage {
    pub ff: u64,
    pub lut: u64,
    pub bram: u64,
    pub dsp: u64,
}

impl ResourceUsage {
    pub fn as_array(&self) -> [u64; 4] {
        [self.ff, self.lut, self.bram, self.dsp]
    }
}

/// Outcome of one synthesis run, as produced by a backend.
#[derive(Debug, Clone, PartialEq)]
pub struct ImplementationResult {
    pub status: Status,
    /// Present iff `status` is `Ok`.
    pub resources: Option<ResourceUsage>,
    pub latency_cycles: Option<u64>,
    pub achieved_period_ns: Option<f64>,
    pub duration_s: f64,
    pub report_ref: Option<String>,
    pub diagnostic: Option<String>,
}

impl ImplementationResult {
    pub fn ok(resources: ResourceUsage, latency_cycles: u64, achieved_period_ns: f64) -> Self {
        ImplementationResult {
            status: Status::Ok,
            resources: Some(resources),
            latency_cycles: Some(latency_cycles),
            achieved_period_ns: Some(achieved_period_ns),
            duration_s: 0.0,
            report_ref: None,
            diagnostic: None,
        }
    }

    pub fn failed(status: Status, diagnostic: impl Into<String>) -> Self {
        ImplementationResult {
            status,
            resources: None,
            latency_cycles: None,
            achieved_period_ns: None,
            duration_s: 0.0,
            report_ref: None,
            diagnostic: Some(diagnostic.into()),
        }
    }

    pub fn synth_error(diagnostic: impl Into<String>) -> Self {
        Self::failed(Status::SynthError, diagnostic)
    }

    pub fn with_duration(mut self, duration_s: f64) -> Self {
        self.duration_s = duration_s;
        self
    }

    pub fn with_report_ref(mut self, report_ref: impl Into<String>) -> Self {
        self.report_ref = Some(report_ref.into());
        self
    }

    /// Status/field consistency: `ok` carries every measurement.
    pub fn is_consistent(&self) -> bool {
        match self.status {
            Status::Ok => {
                self.resources.is_some() && self.latency_cycles.is_some() && self.achieved_period_ns.is_some()
            }
            _ => true,
        }
    }
}

/// Provenance of a synthesis run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SynthesisInfo {
    /// ISO-8601 UTC.
    pub timestamp: String,
    pub contributor: String,
    pub tool_name: String,
    pub tool_version: String,
    pub fpga_part: String,
    /// Target clock period.
    pub clock_period_ns: f64,
}

impl SynthesisInfo {
    pub fn now(contributor: &str, tool: &ToolFilter, clock_period_ns: f64) -> Self {
        SynthesisInfo {
            timestamp: iso_timestamp(Utc::now()),
            contributor: contributor.to_string(),
            tool_name: tool.tool_name.clone(),
            tool_version: tool.tool_version.clone(),
            fpga_part: tool.fpga_part.clone(),
            clock_period_ns,
        }
    }

    pub fn tool(&self) -> ToolFilter {
        ToolFilter {
            tool_name: self.tool_name.clone(),
            tool_version: self.tool_version.clone(),
            fpga_part: self.fpga_part.clone(),
        }
    }
}

/// Tool identity used to scope "done" and "pending".
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct ToolFilter {
    pub tool_name: String,
    pub tool_version: String,
    pub fpga_part: String,
}

impl ToolFilter {
    pub fn new(tool_name: &str, tool_version: &str, fpga_part: &str) -> Self {
        ToolFilter {
            tool_name: tool_name.to_string(),
            tool_version: tool_version.to_string(),
            fpga_part: fpga_part.to_string(),
        }
    }
}

pub fn iso_timestamp(t: DateTime<Utc>) -> String {
    t.to_rfc3339_opts(SecondsFormat::Millis, true)
}
