//! Configuration space of a descriptor: the Cartesian product of every
//! knob's value sets, with each bind group collapsed onto one shared axis.
//!
//! Points are addressed by a mixed-radix index over the axes. The first axis
//! is the most significant digit, so index order is lexicographic in
//! (axis order, value order as written).

mod config;

use rand::seq::index;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::csd::{validate_csd, validate_csd_with, Csd, Diagnostic, DirectiveRegistry, Knob, Value};

pub use config::Configuration;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SpaceError {
    #[error("descriptor is invalid: {}", .0.iter().map(|d| d.to_string()).collect::<Vec<_>>().join("; "))]
    Invalid(Vec<Diagnostic>),
    #[error("configuration count exceeds {}", u64::MAX)]
    Overflow,
    #[error("index {index} out of range for a space of {total} configurations")]
    OutOfRange { index: u64, total: u64 },
    #[error("cannot sample {requested} distinct configurations from a space of {total}")]
    SampleTooLarge { requested: u64, total: u64 },
    #[error("configuration does not belong to this space: {0}")]
    Foreign(String),
}

/// One digit position of the mixed-radix index.
#[derive(Debug, Clone, PartialEq)]
pub enum Axis {
    /// The unbound value sets of one knob, combined lexicographically.
    /// `sets` holds (value set position within the knob, expanded values).
    Knob { knob: usize, sets: Vec<(usize, Vec<Value>)> },
    /// The bound (last) value set shared by every member of a bind group.
    Shared { tag: String, values: Vec<Value>, members: Vec<usize> },
}

impl Axis {
    pub fn radix(&self) -> u64 {
        match self {
            Axis::Knob { sets, .. } => sets.iter().map(|(_, v)| v.len() as u64).product(),
            Axis::Shared { values, .. } => values.len() as u64,
        }
    }
}

/// Factorized view of a configuration space supporting O(#axes) indexing.
#[derive(Debug, Clone)]
pub struct SpaceIndex {
    pub axes: Vec<Axis>,
    pub radices: Vec<u64>,
    pub total: u64,
    knobs: Vec<Knob>,
    headers: Vec<String>,
}

pub fn cardinality(csd: &Csd) -> Result<u64, SpaceError> {
    build_index(csd).map(|idx| idx.total)
}

/// Factor a validated descriptor into axes.
///
/// Every knob contributes one `Knob` axis (radix 1 when all its sets are
/// bound); each bind group contributes a `Shared` axis right after the knob
/// axis of its first member.
pub fn build_index(csd: &Csd) -> Result<SpaceIndex, SpaceError> {
    let diags = validate_csd(csd);
    if !diags.is_empty() {
        return Err(SpaceError::Invalid(diags));
    }
    build_index_unchecked(csd)
}

/// [`build_index`] for descriptors that use directive kinds from a custom
/// registry.
pub fn build_index_with(csd: &Csd, registry: &DirectiveRegistry) -> Result<SpaceIndex, SpaceError> {
    let diags = validate_csd_with(csd, registry);
    if !diags.is_empty() {
        return Err(SpaceError::Invalid(diags));
    }
    build_index_unchecked(csd)
}

pub(crate) fn build_index_unchecked(csd: &Csd) -> Result<SpaceIndex, SpaceError> {
    let mut axes = Vec::new();
    let mut placed_tags: Vec<&str> = Vec::new();
    for (k, knob) in csd.knobs.iter().enumerate() {
        let bound = knob.bound_set();
        let sets = knob
            .value_sets
            .iter()
            .enumerate()
            .filter(|(s, _)| Some(*s) != bound)
            .map(|(s, vs)| (s, vs.expand()))
            .collect();
        axes.push(Axis::Knob { knob: k, sets });

        if let Some(tag) = knob.bind_tag.as_deref() {
            if !placed_tags.contains(&tag) {
                placed_tags.push(tag);
                let members = csd
                    .knobs
                    .iter()
                    .enumerate()
                    .filter(|(_, other)| other.bind_tag.as_deref() == Some(tag))
                    .map(|(i, _)| i)
                    .collect();
                let values = knob.value_sets.last().map(|vs| vs.expand()).unwrap_or_default();
                axes.push(Axis::Shared { tag: tag.to_string(), values, members });
            }
        }
    }

    let radices: Vec<u64> = axes.iter().map(Axis::radix).collect();
    let total = radices.iter().try_fold(1u64, |acc, &r| acc.checked_mul(r)).ok_or(SpaceError::Overflow)?;
    Ok(SpaceIndex {
        axes,
        radices,
        total,
        headers: csd.knobs.iter().map(Knob::header).collect(),
        knobs: csd.knobs.clone(),
    })
}

impl SpaceIndex {
    pub fn knobs(&self) -> &[Knob] {
        &self.knobs
    }

    pub fn headers(&self) -> &[String] {
        &self.headers
    }

    /// Per-axis digits of index `i`, most significant first.
    pub fn digits(&self, i: u64) -> Result<Vec<u64>, SpaceError> {
        if i >= self.total {
            return Err(SpaceError::OutOfRange { index: i, total: self.total });
        }
        let mut rem = i;
        let mut digits = vec![0; self.radices.len()];
        for (d, &r) in digits.iter_mut().zip(&self.radices).rev() {
            *d = rem % r;
            rem /= r;
        }
        Ok(digits)
    }

    pub fn from_digits(&self, digits: &[u64]) -> Result<u64, SpaceError> {
        if digits.len() != self.radices.len() {
            return Err(SpaceError::Foreign(format!("expected {} digits", self.radices.len())));
        }
        let mut i = 0u64;
        for (&d, &r) in digits.iter().zip(&self.radices) {
            if d >= r {
                return Err(SpaceError::Foreign(format!("digit {d} exceeds radix {r}")));
            }
            i = i * r + d;
        }
        Ok(i)
    }

    pub fn decode(&self, i: u64) -> Result<Configuration, SpaceError> {
        let digits = self.digits(i)?;
        let mut assignments: Vec<Vec<Value>> =
            self.knobs.iter().map(|k| vec![Value::Numeric(0); k.value_sets.len()]).collect();
        for (axis, &digit) in self.axes.iter().zip(&digits) {
            match axis {
                Axis::Knob { knob, sets } => {
                    let mut rem = digit;
                    for (s, values) in sets.iter().rev() {
                        let r = values.len() as u64;
                        assignments[*knob][*s] = values[(rem % r) as usize].clone();
                        rem /= r;
                    }
                }
                Axis::Shared { values, members, .. } => {
                    let v = &values[digit as usize];
                    for &m in members {
                        let last = assignments[m].len() - 1;
                        assignments[m][last] = v.clone();
                    }
                }
            }
        }
        Ok(Configuration::new(i, assignments, &self.headers))
    }

    /// Index of a configuration's assignments within this space.
    pub fn encode(&self, assignments: &[Vec<Value>]) -> Result<u64, SpaceError> {
        if assignments.len() != self.knobs.len() {
            return Err(SpaceError::Foreign(format!(
                "expected {} knob assignments, found {}",
                self.knobs.len(),
                assignments.len()
            )));
        }
        for (k, (a, knob)) in assignments.iter().zip(&self.knobs).enumerate() {
            if a.len() != knob.value_sets.len() {
                return Err(SpaceError::Foreign(format!("knob {k} expects {} values", knob.value_sets.len())));
            }
        }
        let position = |values: &[Value], v: &Value, what: &str| {
            values
                .iter()
                .position(|x| x == v)
                .map(|p| p as u64)
                .ok_or_else(|| SpaceError::Foreign(format!("`{v}` is not a value of {what}")))
        };
        let mut digits = Vec::with_capacity(self.axes.len());
        for axis in &self.axes {
            match axis {
                Axis::Knob { knob, sets } => {
                    let mut d = 0u64;
                    for (s, values) in sets {
                        let p = position(values, &assignments[*knob][*s], &self.headers[*knob])?;
                        d = d * values.len() as u64 + p;
                    }
                    digits.push(d);
                }
                Axis::Shared { tag, values, members } => {
                    let first = assignments[members[0]].last().expect("bound knob has sets");
                    for &m in &members[1..] {
                        if assignments[m].last() != Some(first) {
                            return Err(SpaceError::Foreign(format!("bind group `{tag}` holds unequal values")));
                        }
                    }
                    digits.push(position(values, first, tag)?);
                }
            }
        }
        self.from_digits(&digits)
    }

    pub fn iter(&self) -> Enumerate<'_> {
        Enumerate { index: self, next: 0 }
    }

    /// `n` distinct configurations drawn uniformly without replacement.
    /// The same seed always yields the same list.
    pub fn sample(&self, n: u64, seed: u64) -> Result<Vec<Configuration>, SpaceError> {
        self.sample_indices(n, seed)?.into_iter().map(|i| self.decode(i)).collect()
    }

    pub fn sample_indices(&self, n: u64, seed: u64) -> Result<Vec<u64>, SpaceError> {
        if n > self.total {
            return Err(SpaceError::SampleTooLarge { requested: n, total: self.total });
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let total = usize::try_from(self.total).map_err(|_| SpaceError::Overflow)?;
        Ok(index::sample(&mut rng, total, n as usize).into_iter().map(|i| i as u64).collect())
    }

    /// Indices of the configurations that differ from `i` by one step
    /// (±1 position) along a single axis, or along a single value set of a
    /// knob axis.
    pub fn neighbors(&self, i: u64) -> Result<Vec<u64>, SpaceError> {
        let digits = self.digits(i)?;
        let mut out = Vec::new();
        for (a, axis) in self.axes.iter().enumerate() {
            // Sub-digit radices within this axis.
            let subs: Vec<u64> = match axis {
                Axis::Knob { sets, .. } => sets.iter().map(|(_, v)| v.len() as u64).collect(),
                Axis::Shared { values, .. } => vec![values.len() as u64],
            };
            let mut sub_digits = vec![0u64; subs.len()];
            let mut rem = digits[a];
            for (sd, &r) in sub_digits.iter_mut().zip(&subs).rev() {
                *sd = rem % r;
                rem /= r;
            }
            for s in 0..subs.len() {
                for step in [-1i64, 1] {
                    let moved = sub_digits[s] as i64 + step;
                    if moved < 0 || moved as u64 >= subs[s] {
                        continue;
                    }
                    let mut nd = sub_digits.clone();
                    nd[s] = moved as u64;
                    let axis_digit = nd.iter().zip(&subs).fold(0u64, |acc, (&d, &r)| acc * r + d);
                    let mut all = digits.clone();
                    all[a] = axis_digit;
                    out.push(self.from_digits(&all)?);
                }
            }
        }
        Ok(out)
    }
}

/// Lazy index-order stream over a space.
pub struct Enumerate<'a> {
    index: &'a SpaceIndex,
    next: u64,
}

impl Iterator for Enumerate<'_> {
    type Item = Configuration;

    fn next(&mut self) -> Option<Configuration> {
        if self.next >= self.index.total {
            return None;
        }
        let c = self.index.decode(self.next).ok();
        self.next += 1;
        c
    }

    fn size_hint(&self) -> (usize, Option<usize>) {
        let left = usize::try_from(self.index.total - self.next).unwrap_or(usize::MAX);
        (left, Some(left))
    }
}

/// Owning variant of [`Enumerate`].
pub struct IntoEnumerate {
    index: SpaceIndex,
    next: u64,
}

impl Iterator for IntoEnumerate {
    type Item = Configuration;

    fn next(&mut self) -> Option<Configuration> {
        if self.next >= self.index.total {
            return None;
        }
        let c = self.index.decode(self.next).ok();
        self.next += 1;
        c
    }
}

pub fn enumerate(csd: &Csd) -> Result<IntoEnumerate, SpaceError> {
    Ok(IntoEnumerate { index: build_index(csd)?, next: 0 })
}

pub fn decode(index: &SpaceIndex, i: u64) -> Result<Configuration, SpaceError> {
    index.decode(i)
}

pub fn sample(csd: &Csd, n: u64, seed: u64) -> Result<Vec<Configuration>, SpaceError> {
    build_index(csd)?.sample(n, seed)
}
