#![allow(dead_code)]

use rand::seq::{IndexedRandom, SliceRandom};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// A generated descriptor plus the facts needed to check it independently
/// of the library.
#[derive(Debug, Clone)]
pub struct RandomCsd {
    pub text: String,
    /// Expected space size: product over unbound sets times one factor per
    /// bind group.
    pub cardinality: u64,
    /// Knob positions of each bind group.
    pub groups: Vec<Vec<usize>>,
}

/// A numeric value set in written form and its expansion.
fn numeric_set(rng: &mut ChaCha8Rng) -> (String, Vec<i64>) {
    match rng.random_range(0..3) {
        0 => {
            let n = rng.random_range(1..=6);
            let mut pool: Vec<i64> = (1..=64).collect();
            pool.shuffle(rng);
            let vals: Vec<i64> = pool[..n].to_vec();
            let text = vals.iter().map(i64::to_string).collect::<Vec<_>>().join(",");
            (format!("{{{text}}}"), vals)
        }
        1 => {
            let lo = 1i64 << rng.random_range(0..3);
            let hi = lo << rng.random_range(0..6);
            let vals: Vec<i64> = (0..63).map(|s| 1i64 << s).filter(|v| *v >= lo && *v <= hi).collect();
            (format!("{{{lo}->{hi},pow_2}}"), vals)
        }
        _ => {
            let hi = *[6i64, 7, 8, 9, 10, 12, 16, 18, 20].choose(rng).unwrap();
            let lo = rng.random_range(1..=2);
            let vals: Vec<i64> = (lo..=hi).filter(|d| hi % d == 0).collect();
            (format!("{{{lo}->{hi},div}}"), vals)
        }
    }
}

fn categorical_set(rng: &mut ChaCha8Rng, pool: &[&str]) -> (String, usize) {
    let n = rng.random_range(1..=pool.len().min(6));
    let mut p = pool.to_vec();
    p.shuffle(rng);
    (format!("{{{}}}", p[..n].join(",")), n)
}

/// Up to four knobs (the clock included) with random bind groups.
pub fn random_csd(seed: u64) -> RandomCsd {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = rng.random_range(1..=3);
    // (prefix, categorical part size, numeric last set) per knob
    type Draft = (String, u64, Option<(String, Vec<i64>)>);
    let mut knobs: Vec<Draft> = Vec::new();
    for i in 0..n {
        match rng.random_range(0..5) {
            0 => knobs.push((format!("unroll;f;loop{i}"), 1, Some(numeric_set(&mut rng)))),
            1 => knobs.push((format!("pipeline;f;loop{i}"), 1, Some(numeric_set(&mut rng)))),
            2 => {
                let (types, k) = categorical_set(&mut rng, &["cyclic", "block", "complete"]);
                knobs.push((format!("array_partition;f;arr{i};1;{types}"), k as u64, Some(numeric_set(&mut rng))));
            }
            3 => {
                let (cores, k) =
                    categorical_set(&mut rng, &["RAM_1P_BRAM", "RAM_2P_BRAM", "RAM_T2P_BRAM", "RAM_2P_LUTRAM"]);
                knobs.push((format!("resource;f;arr{i};{cores}"), k as u64, None));
            }
            _ => {
                let (modes, k) = categorical_set(&mut rng, &["on", "off"]);
                knobs.push((format!("inline;g{i};{modes}"), k as u64, None));
            }
        }
    }

    let numeric: Vec<usize> = (0..knobs.len()).filter(|&k| knobs[k].2.is_some()).collect();
    let mut groups = Vec::new();
    if numeric.len() >= 2 && rng.random_bool(0.7) {
        let mut members = numeric.clone();
        members.shuffle(&mut rng);
        members.truncate(rng.random_range(2..=numeric.len()));
        members.sort();
        let shared = numeric_set(&mut rng);
        for &m in &members {
            knobs[m].2 = Some(shared.clone());
        }
        groups.push(members);
    }

    let mut cardinality = 1u64;
    let mut lines = Vec::new();
    for (k, (prefix, cat, num)) in knobs.iter().enumerate() {
        let mut line = prefix.clone();
        cardinality *= cat;
        if let Some((text, vals)) = num {
            line.push(';');
            line.push_str(text);
            let bound = groups.iter().any(|g| g.contains(&k));
            if bound {
                line.push_str("@bind_g");
            } else {
                cardinality *= vals.len() as u64;
            }
        }
        lines.push(line);
    }
    for g in &groups {
        cardinality *= knobs[g[0]].2.as_ref().unwrap().1.len() as u64;
    }
    let clocks = rng.random_range(1..=3);
    let periods: Vec<String> = [10, 5, 8].iter().take(clocks).map(|p: &i32| p.to_string()).collect();
    cardinality *= clocks as u64;
    lines.push(format!("clock;{{{}}}", periods.join(",")));
    RandomCsd { text: lines.join("\n") + "\n", cardinality, groups }
}

/// Non-dominated subset by pairwise comparison, all objectives minimized.
pub fn brute_force_front(points: &[(i64, Vec<f64>)]) -> Vec<Vec<f64>> {
    let dominates = |a: &[f64], b: &[f64]| a.iter().zip(b).all(|(x, y)| x <= y) && a.iter().zip(b).any(|(x, y)| x < y);
    let mut front: Vec<Vec<f64>> =
        points.iter().filter(|(_, p)| !points.iter().any(|(_, q)| dominates(q, p))).map(|(_, p)| p.clone()).collect();
    front.sort_by(|a, b| a.partial_cmp(b).unwrap());
    front.dedup();
    front
}

pub fn fixture(name: &str) -> String {
    std::fs::read_to_string(fixture_path(name)).unwrap()
}

pub fn fixture_path(name: &str) -> String {
    format!("{}/fixtures/{name}", env!("CARGO_MANIFEST_DIR"))
}
