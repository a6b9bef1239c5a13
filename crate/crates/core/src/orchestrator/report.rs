use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::outcome::{ImplementationResult, ResourceUsage, Status};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ReportFormat {
    /// `{"ff","lut","bram","dsp","lat","period"}` with an optional `status`.
    Json,
    /// Vivado HLS `csynth.xml`.
    VivadoXml,
}

impl FromStr for ReportFormat {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "json" => Ok(ReportFormat::Json),
            "xml" | "vivado" | "vivado-xml" => Ok(ReportFormat::VivadoXml),
            other => Err(format!("unknown report format `{other}` (json, xml)")),
        }
    }
}

/// The JSON report written by the mock backend.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct JsonReport {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub status: Option<Status>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub diagnostic: Option<String>,
    pub ff: Option<u64>,
    pub lut: Option<u64>,
    pub bram: Option<u64>,
    pub dsp: Option<u64>,
    pub lat: Option<u64>,
    pub period: Option<f64>,
}

impl JsonReport {
    pub fn from_result(r: &ImplementationResult) -> Self {
        let res = r.resources.unwrap_or_default();
        let ok = r.status == Status::Ok;
        JsonReport {
            status: Some(r.status),
            diagnostic: r.diagnostic.clone(),
            ff: ok.then_some(res.ff),
            lut: ok.then_some(res.lut),
            bram: ok.then_some(res.bram),
            dsp: ok.then_some(res.dsp),
            lat: r.latency_cycles,
            period: r.achieved_period_ns,
        }
    }
}

const UNPARSEABLE: &str = "unparseable report";

/// Turn raw report bytes into a result. Malformed input yields a
/// `synth_error` with a diagnostic, never a panic.
pub fn parse_report(raw: &[u8], format: ReportFormat) -> ImplementationResult {
    let parsed = match format {
        ReportFormat::Json => parse_json(raw),
        ReportFormat::VivadoXml => parse_xml(raw),
    };
    parsed.unwrap_or_else(|why| ImplementationResult::synth_error(format!("{UNPARSEABLE}: {why}")))
}

fn parse_json(raw: &[u8]) -> Result<ImplementationResult, String> {
    let r: JsonReport = serde_json::from_slice(raw).map_err(|e| e.to_string())?;
    match r.status.unwrap_or(Status::Ok) {
        Status::Ok => {}
        failed => {
            let diag = r.diagnostic.unwrap_or_else(|| format!("tool reported {}", failed.as_str()));
            return Ok(ImplementationResult::failed(failed, diag));
        }
    }
    let need = |v: Option<u64>, name: &str| v.ok_or_else(|| format!("missing `{name}`"));
    let resources = ResourceUsage {
        ff: need(r.ff, "ff")?,
        lut: need(r.lut, "lut")?,
        bram: need(r.bram, "bram")?,
        dsp: need(r.dsp, "dsp")?,
    };
    let lat = need(r.lat, "lat")?;
    let period = r.period.ok_or("missing `period`")?;
    if !period.is_finite() || period <= 0.0 {
        return Err(format!("invalid period {period}"));
    }
    Ok(ImplementationResult::ok(resources, lat, period))
}

fn parse_xml(raw: &[u8]) -> Result<ImplementationResult, String> {
    let text = std::str::from_utf8(raw).map_err(|e| e.to_string())?;
    let doc = roxmltree::Document::parse(text).map_err(|e| e.to_string())?;
    let root = doc.root_element();

    let find = |path: &[&str]| -> Option<String> {
        let mut node = root;
        for name in path {
            node = node.children().find(|c| c.has_tag_name(*name))?;
        }
        node.text().map(|t| t.trim().to_string())
    };
    let int = |path: &[&str]| -> Result<u64, String> {
        let s = find(path).ok_or_else(|| format!("missing {}", path.join("/")))?;
        s.parse::<u64>().map_err(|_| format!("{} is `{s}`", path.join("/")))
    };

    let period_s = find(&["PerformanceEstimates", "SummaryOfTimingAnalysis", "EstimatedClockPeriod"])
        .ok_or("missing EstimatedClockPeriod")?;
    let period: f64 = period_s.parse().map_err(|_| format!("EstimatedClockPeriod is `{period_s}`"))?;
    if !period.is_finite() || period <= 0.0 {
        return Err(format!("invalid period {period}"));
    }
    let latency = int(&["PerformanceEstimates", "SummaryOfOverallLatency", "Worst-caseLatency"])?;
    let area = ["AreaEstimates", "Resources"];
    let resources = ResourceUsage {
        ff: int(&[area[0], area[1], "FF"])?,
        lut: int(&[area[0], area[1], "LUT"])?,
        bram: int(&[area[0], area[1], "BRAM_18K"])?,
        dsp: int(&[area[0], area[1], "DSP48E"])?,
    };
    Ok(ImplementationResult::ok(resources, latency, period))
}
