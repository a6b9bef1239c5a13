//! Deterministic stand-in for an HLS tool.
//!
//! Every unroll knob models a loop whose trip count and body weight are drawn
//! from the seed. Unrolling divides the loop's latency by the effective
//! parallelism, capped by the memory ports that array partitioning in the same
//! function provides. Area grows linearly with unroll and partition factors.
//! The noise term depends only on the seed and the categorical choices, so the
//! trends in the numeric factors stay monotone.

use sha2::{Digest, Sha256};

use crate::csd::{DirectiveKind, Knob, Value};
use crate::outcome::{ImplementationResult, ResourceUsage};
use crate::space::Configuration;

/// Uniform draw in [0, 1) keyed by the seed and a list of labels.
pub(crate) fn unit_hash(seed: u64, parts: &[&str]) -> f64 {
    let mut h = Sha256::new();
    h.update(seed.to_le_bytes());
    for p in parts {
        h.update((p.len() as u64).to_le_bytes());
        h.update(p.as_bytes());
    }
    let d = h.finalize();
    let mut b = [0u8; 8];
    b.copy_from_slice(&d[..8]);
    (u64::from_le_bytes(b) >> 11) as f64 / (1u64 << 53) as f64
}

fn num(values: &[Value], i: usize) -> f64 {
    values.get(i).and_then(Value::as_numeric).map_or(1.0, |v| v.max(1) as f64)
}

fn cat(values: &[Value], i: usize) -> &str {
    match values.get(i) {
        Some(Value::Categorical(s)) => s,
        _ => "",
    }
}

/// Ports one partition factor buys, by partition type.
fn port_multiplier(kind: &str) -> f64 {
    match kind {
        "cyclic" => 2.0,
        "complete" => 4.0,
        _ => 1.0,
    }
}

fn area_multiplier(kind: &str) -> f64 {
    match kind {
        "block" => 0.8,
        "complete" => 1.5,
        _ => 1.0,
    }
}

pub const DEFAULT_CLOCK_NS: f64 = 10.0;

pub fn mock_synthesize(knobs: &[Knob], config: &Configuration, seed: u64) -> ImplementationResult {
    let entries: Vec<(&Knob, &[Value])> =
        knobs.iter().zip(&config.assignments).map(|(k, v)| (k, v.as_slice())).collect();
    let weight = |k: &Knob| 0.5 + unit_hash(seed, &["weight", &k.header()]);

    let categorical: Vec<&str> = entries
        .iter()
        .flat_map(|(_, vals)| vals.iter())
        .filter_map(|v| match v {
            Value::Categorical(s) => Some(s.as_str()),
            Value::Numeric(_) => None,
        })
        .collect();
    let cat_key = categorical.join("|");
    let lat_noise = 1.0 + 0.1 * unit_hash(seed, &["latency-noise", &cat_key]);
    let area_noise = 1.0 + 0.1 * unit_hash(seed, &["area-noise", &cat_key]);

    let ports = |function: &str| -> Option<f64> {
        entries
            .iter()
            .filter(|(k, _)| k.directive == DirectiveKind::ArrayPartition && k.function == function)
            .map(|(_, v)| num(v, 1) * port_multiplier(cat(v, 0)))
            .reduce(f64::max)
    };
    let ii_of = |function: &str, target: &str| -> Option<f64> {
        entries
            .iter()
            .find(|(k, _)| k.directive == DirectiveKind::Pipeline && k.function == function && k.target == target)
            .map(|(_, v)| num(v, 0))
    };

    let mut clock = DEFAULT_CLOCK_NS;
    let mut latency = 20.0;
    let (mut lut, mut ff, mut dsp, mut bram) = (150.0, 120.0, 0u64, 0u64);

    for (k, v) in &entries {
        let w = weight(k);
        let trip = 2f64.powi(4 + (unit_hash(seed, &["trip", &k.header()]) * 5.0) as i32);
        match &k.directive {
            DirectiveKind::Unroll => {
                let u = num(v, 0);
                let par = ports(&k.function).map_or(u, |p| u.min(p));
                let ii = ii_of(&k.function, &k.target).unwrap_or(3.0);
                latency += w * trip * ii / par;
                lut += w * 55.0 * u;
                ff += w * 40.0 * u;
                dsp += (w * u / 2.0).floor() as u64;
            }
            DirectiveKind::Pipeline => {
                let ii = num(v, 0);
                let unrolled = entries.iter().any(|(o, _)| {
                    o.directive == DirectiveKind::Unroll && o.function == k.function && o.target == k.target
                });
                if !unrolled {
                    latency += w * trip * ii;
                }
                lut += w * 250.0 / ii;
                ff += w * 180.0 / ii;
            }
            DirectiveKind::ArrayPartition => {
                let f = num(v, 1);
                lut += w * 30.0 * f * area_multiplier(cat(v, 0));
                ff += w * 20.0 * f;
                bram += f.min(512.0) as u64;
            }
            DirectiveKind::Resource => {
                lut += 10.0 + 30.0 * unit_hash(seed, &["core", cat(v, 0)]);
                bram += 1;
            }
            DirectiveKind::Inline => {
                if cat(v, 0) == "on" {
                    lut += w * 120.0;
                    ff += w * 90.0;
                } else {
                    latency += 15.0;
                }
            }
            DirectiveKind::Clock => clock = num(v, 0),
            DirectiveKind::Custom(_) => {
                for x in v.iter().filter_map(Value::as_numeric) {
                    lut += w * 5.0 * x.max(0) as f64;
                }
            }
        }
    }

    latency *= 1.0 + 5.0 / clock;
    let period = clock * (0.7 + 0.25 * unit_hash(seed, &["period", &config.key_text]));
    ImplementationResult::ok(
        ResourceUsage { ff: (ff * area_noise).round() as u64, lut: (lut * area_noise).round() as u64, bram, dsp },
        (latency * lat_noise).ceil() as u64,
        (period * 1000.0).round() / 1000.0,
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::csd::parse_csd;
    use crate::space::build_index;

    const LOCAL: &str = include_str!("../../fixtures/local_scan_704.csd");

    #[test]
    fn deterministic_and_seed_sensitive() {
        let idx = build_index(&parse_csd(LOCAL).unwrap()).unwrap();
        let c = idx.decode(123).unwrap();
        let a = mock_synthesize(idx.knobs(), &c, 7);
        assert_eq!(a, mock_synthesize(idx.knobs(), &c, 7));
        assert_ne!(a, mock_synthesize(idx.knobs(), &c, 8));
        assert!(a.is_consistent());
    }

    /// Raising any single unroll or partition factor never lowers area and
    /// raising an unroll factor never raises latency.
    #[test]
    fn monotone_in_factors() {
        let idx = build_index(&parse_csd(LOCAL).unwrap()).unwrap();
        let knobs = idx.knobs();
        for i in 0..idx.total {
            let c = idx.decode(i).unwrap();
            let here = mock_synthesize(knobs, &c, 3);
            for (k, knob) in knobs.iter().enumerate() {
                let slot = match knob.directive {
                    DirectiveKind::Unroll => 0,
                    DirectiveKind::ArrayPartition => 1,
                    _ => continue,
                };
                let mut up = c.assignments.clone();
                let Some(Value::Numeric(f)) = up[k].get(slot).cloned() else { continue };
                up[k][slot] = Value::Numeric(f * 2);
                let Ok(j) = idx.encode(&up) else { continue };
                let there = mock_synthesize(knobs, &idx.decode(j).unwrap(), 3);
                let (r0, r1) = (here.resources.unwrap(), there.resources.unwrap());
                assert!(r1.lut >= r0.lut && r1.ff >= r0.ff && r1.dsp >= r0.dsp && r1.bram >= r0.bram);
                if knob.directive == DirectiveKind::Unroll {
                    assert!(there.latency_cycles <= here.latency_cycles, "{} -> {}", c.key_text, j);
                }
            }
        }
    }

    #[test]
    fn unit_hash_range() {
        for i in 0..1000u64 {
            let x = unit_hash(i, &["x"]);
            assert!((0.0..1.0).contains(&x));
        }
    }
}
