use std::fmt;

use crate::outcome::ResourceUsage;

use super::AnalyticsError;

/// Device totals of the xczu9eg (FF, LUT, BRAM_18K, DSP), used to normalize
/// resource counts before weighting.
pub const XCZU9EG_CAPACITY: ResourceUsage = ResourceUsage { ff: 548_160, lut: 274_080, bram: 1_824, dsp: 2_520 };

fn check_weights(weights: &[f64; 4]) -> Result<(), AnalyticsError> {
    if weights.iter().any(|w| !w.is_finite() || *w < 0.0) || weights.iter().all(|w| *w == 0.0) {
        return Err(AnalyticsError::InvalidWeights);
    }
    Ok(())
}

/// `w_ff·ff + w_lut·lut + w_bram·bram + w_dsp·dsp`.
pub fn scalarize_area(r: &ResourceUsage, weights: &[f64; 4]) -> Result<f64, AnalyticsError> {
    check_weights(weights)?;
    Ok(r.as_array().iter().zip(weights).map(|(&v, w)| v as f64 * w).sum())
}

/// Like [`scalarize_area`] but each resource is first divided by the
/// matching device capacity.
pub fn scalarize_area_normalized(
    r: &ResourceUsage,
    weights: &[f64; 4],
    capacity: &ResourceUsage,
) -> Result<f64, AnalyticsError> {
    check_weights(weights)?;
    Ok(r.as_array()
        .iter()
        .zip(capacity.as_array())
        .zip(weights)
        .map(|((&v, cap), w)| if cap == 0 { 0.0 } else { v as f64 / cap as f64 * w })
        .sum())
}

/// One minimized coordinate of a design point.
#[derive(Debug, Clone, PartialEq)]
pub enum Objective {
    LatencyCycles,
    /// Cycles times achieved clock period.
    LatencyNs,
    Ff,
    Lut,
    Bram,
    Dsp,
    Area([f64; 4]),
    AreaNormalized([f64; 4], ResourceUsage),
}

impl Objective {
    pub fn parse(name: &str, weights: [f64; 4]) -> Result<Self, AnalyticsError> {
        let obj = match name.trim() {
            "latency" | "latency_cycles" => Objective::LatencyCycles,
            "latency_ns" => Objective::LatencyNs,
            "ff" => Objective::Ff,
            "lut" => Objective::Lut,
            "bram" => Objective::Bram,
            "dsp" => Objective::Dsp,
            "area" => Objective::Area(weights),
            "area_norm" => Objective::AreaNormalized(weights, XCZU9EG_CAPACITY),
            other => return Err(AnalyticsError::UnknownObjective(other.to_string())),
        };
        if let Objective::Area(w) | Objective::AreaNormalized(w, _) = &obj {
            check_weights(w)?;
        }
        Ok(obj)
    }

    pub fn evaluate(&self, r: &ResourceUsage, latency_cycles: u64, period_ns: f64) -> f64 {
        match self {
            Objective::LatencyCycles => latency_cycles as f64,
            Objective::LatencyNs => latency_cycles as f64 * period_ns,
            Objective::Ff => r.ff as f64,
            Objective::Lut => r.lut as f64,
            Objective::Bram => r.bram as f64,
            Objective::Dsp => r.dsp as f64,
            Objective::Area(w) => scalarize_area(r, w).unwrap_or(f64::NAN),
            Objective::AreaNormalized(w, cap) => scalarize_area_normalized(r, w, cap).unwrap_or(f64::NAN),
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Objective::LatencyCycles => "latency",
            Objective::LatencyNs => "latency_ns",
            Objective::Ff => "ff",
            Objective::Lut => "lut",
            Objective::Bram => "bram",
            Objective::Dsp => "dsp",
            Objective::Area(_) => "area",
            Objective::AreaNormalized(..) => "area_norm",
        }
    }
}

/// Ordered objectives defining a point's coordinates.
#[derive(Debug, Clone, PartialEq)]
pub struct ObjectiveSpec(pub Vec<Objective>);

impl Default for ObjectiveSpec {
    /// (latency cycles, LUT count).
    fn default() -> Self {
        ObjectiveSpec(vec![Objective::LatencyCycles, Objective::Lut])
    }
}

impl ObjectiveSpec {
    /// Comma-separated objective names, e.g. `latency,lut`.
    pub fn parse(names: &str, weights: [f64; 4]) -> Result<Self, AnalyticsError> {
        let objectives = names
            .split(',')
            .filter(|s| !s.trim().is_empty())
            .map(|n| Objective::parse(n, weights))
            .collect::<Result<Vec<_>, _>>()?;
        if objectives.is_empty() {
            return Err(AnalyticsError::UnknownObjective(names.to_string()));
        }
        Ok(ObjectiveSpec(objectives))
    }

    pub fn evaluate(&self, r: &ResourceUsage, latency_cycles: u64, period_ns: f64) -> Vec<f64> {
        self.0.iter().map(|o| o.evaluate(r, latency_cycles, period_ns)).collect()
    }

    pub fn names(&self) -> Vec<&'static str> {
        self.0.iter().map(Objective::name).collect()
    }
}

impl fmt::Display for ObjectiveSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.names().join(","))
    }
}
