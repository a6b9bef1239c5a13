//! Configuration Space Descriptors.
//!
//! A descriptor is a line-oriented text format where each line is a *knob*:
//! a directive kind, the code location it applies to, optional fixed
//! parameters and one brace-delimited value set per swept parameter.
//!
//! ```text
//! array_partition;last_step_scan;sum;1;{cyclic,block};{1->128,pow_2}@bind_a
//! unroll;last_step_scan;last_1;{1->128,pow_2}@bind_a
//! clock;{10}
//! ```
//!
//! Knobs carrying the same `@bind_<tag>` decorator are forced to take the
//! same value for their last (numeric) value set.

mod parse;
mod registry;
mod validate;

use std::fmt;

pub use parse::{parse_csd, parse_csd_with, parse_structure, parse_structure_with, ParseError};
pub use registry::{DirectiveKind, DirectiveRegistry, DirectiveSpec, Location};
pub use validate::{validate_csd, validate_csd_with, Diagnostic, DiagnosticKind};

/// A single swept value.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Value {
    Numeric(i64),
    Categorical(String),
}

impl Value {
    pub fn as_numeric(&self) -> Option<i64> {
        match self {
            Value::Numeric(n) => Some(*n),
            Value::Categorical(_) => None,
        }
    }

    pub fn is_numeric(&self) -> bool {
        matches!(self, Value::Numeric(_))
    }

    pub fn to_json(&self) -> serde_json::Value {
        match self {
            Value::Numeric(n) => serde_json::Value::from(*n),
            Value::Categorical(s) => serde_json::Value::from(s.as_str()),
        }
    }
}

impl fmt::Display for Value {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Value::Numeric(n) => write!(f, "{n}"),
            Value::Categorical(s) => f.write_str(s),
        }
    }
}

/// Shorthand series generator used by `{lo->hi,<generator>}`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum GeneratorKind {
    /// Powers of two in `[lo, hi]`.
    Pow2,
    /// Divisors of `hi` that are `>= lo`.
    Div,
}

impl GeneratorKind {
    pub fn token(self) -> &'static str {
        match self {
            GeneratorKind::Pow2 => "pow_2",
            GeneratorKind::Div => "div",
        }
    }

    pub fn from_token(token: &str) -> Option<Self> {
        match token {
            "pow_2" => Some(GeneratorKind::Pow2),
            "div" => Some(GeneratorKind::Div),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum ValueSet {
    ExplicitList(Vec<Value>),
    GeneratedRange { lo: i64, hi: i64, generator: GeneratorKind },
}

impl ValueSet {
    /// Expand to the ordered list of concrete values.
    ///
    /// Explicit lists keep their written order; generated ranges are
    /// ascending. An invalid range (`lo < 1` or `lo > hi`) expands to nothing.
    pub fn expand(&self) -> Vec<Value> {
        match self {
            ValueSet::ExplicitList(values) => values.clone(),
            ValueSet::GeneratedRange { lo, hi, generator } => {
                expand_range(*lo, *hi, *generator).into_iter().map(Value::Numeric).collect()
            }
        }
    }

    /// True when every value of the set is numeric. Generated ranges always are.
    pub fn is_numeric(&self) -> bool {
        match self {
            ValueSet::ExplicitList(values) => values.iter().all(Value::is_numeric),
            ValueSet::GeneratedRange { .. } => true,
        }
    }
}

impl fmt::Display for ValueSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ValueSet::ExplicitList(values) => {
                f.write_str("{")?;
                for (i, v) in values.iter().enumerate() {
                    if i > 0 {
                        f.write_str(",")?;
                    }
                    write!(f, "{v}")?;
                }
                f.write_str("}")
            }
            ValueSet::GeneratedRange { lo, hi, generator } => {
                write!(f, "{{{lo}->{hi},{}}}", generator.token())
            }
        }
    }
}

/// Expand a generated value set. Public as a standalone operation so callers
/// can expand sets without building a descriptor.
pub fn expand_value_set(vs: &ValueSet) -> Vec<Value> {
    vs.expand()
}

fn expand_range(lo: i64, hi: i64, generator: GeneratorKind) -> Vec<i64> {
    if lo < 1 || lo > hi {
        return Vec::new();
    }
    match generator {
        GeneratorKind::Pow2 => {
            let mut out = Vec::new();
            let mut p: i64 = 1;
            while p <= hi {
                if p >= lo {
                    out.push(p);
                }
                match p.checked_mul(2) {
                    Some(next) => p = next,
                    None => break,
                }
            }
            out
        }
        GeneratorKind::Div => {
            let mut small = Vec::new();
            let mut large = Vec::new();
            let mut d: i64 = 1;
            while d <= hi / d {
                if hi % d == 0 {
                    small.push(d);
                    if d != hi / d {
                        large.push(hi / d);
                    }
                }
                d += 1;
            }
            small.into_iter().chain(large.into_iter().rev()).filter(|&v| v >= lo).collect()
        }
    }
}

/// One descriptor line.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Knob {
    pub directive: DirectiveKind,
    /// Function the directive applies to. Empty for location-free kinds (clock).
    pub function: String,
    /// Array or loop label. Empty when the kind takes no target.
    pub target: String,
    pub fixed_params: Vec<String>,
    pub value_sets: Vec<ValueSet>,
    pub bind_tag: Option<String>,
}

impl Knob {
    /// The knob line without its value sets, e.g. `array_partition;f;a;1`.
    /// Unique within a valid descriptor.
    pub fn header(&self) -> String {
        let mut out = self.directive.token().to_string();
        for field in self.location_fields() {
            out.push(';');
            out.push_str(field);
        }
        for p in &self.fixed_params {
            out.push(';');
            out.push_str(p);
        }
        out
    }

    fn location_fields(&self) -> impl Iterator<Item = &str> {
        [self.function.as_str(), self.target.as_str()].into_iter().filter(|s| !s.is_empty())
    }

    /// Index of the value set constrained by the bind tag, if any.
    pub fn bound_set(&self) -> Option<usize> {
        self.bind_tag.as_ref().map(|_| self.value_sets.len() - 1)
    }
}

impl fmt::Display for Knob {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.header())?;
        for vs in &self.value_sets {
            write!(f, ";{vs}")?;
        }
        if let Some(tag) = &self.bind_tag {
            write!(f, "@bind_{tag}")?;
        }
        Ok(())
    }
}

/// A parsed descriptor.
///
/// Equality compares knobs only; the original text and line numbers are
/// carried for diagnostics.
#[derive(Debug, Clone)]
pub struct Csd {
    pub knobs: Vec<Knob>,
    pub source_text: String,
    /// 1-based source line of each knob (0 for programmatically built knobs).
    pub lines: Vec<usize>,
}

impl PartialEq for Csd {
    fn eq(&self, other: &Self) -> bool {
        self.knobs == other.knobs
    }
}

impl Eq for Csd {}

impl Csd {
    pub fn from_knobs(knobs: Vec<Knob>) -> Self {
        let lines = vec![0; knobs.len()];
        let mut csd = Csd { knobs, source_text: String::new(), lines };
        csd.source_text = csd.serialize();
        csd
    }

    /// Canonical text: one knob per line, no comments, no padding.
    pub fn serialize(&self) -> String {
        serialize_csd(self)
    }

    pub fn line_of(&self, knob: usize) -> usize {
        self.lines.get(knob).copied().unwrap_or(0)
    }

    /// The same descriptor with every bind decorator removed.
    pub fn without_binds(&self) -> Csd {
        let knobs = self
            .knobs
            .iter()
            .cloned()
            .map(|mut k| {
                k.bind_tag = None;
                k
            })
            .collect();
        Csd { knobs, source_text: String::new(), lines: self.lines.clone() }.with_canonical_source()
    }

    fn with_canonical_source(mut self) -> Self {
        self.source_text = self.serialize();
        self
    }
}

pub fn serialize_csd(csd: &Csd) -> String {
    let mut out = String::new();
    for knob in &csd.knobs {
        out.push_str(&knob.to_string());
        out.push('\n');
    }
    out
}

pub(crate) fn is_identifier(s: &str) -> bool {
    let mut chars = s.chars();
    match chars.next() {
        Some(c) if c.is_ascii_alphabetic() || c == '_' => {}
        _ => return false,
    }
    chars.all(|c| c.is_ascii_alphanumeric() || c == '_')
}

#[cfg(test)]
mod tests {
    use super::*;

    fn nums(v: &[i64]) -> Vec<Value> {
        v.iter().copied().map(Value::Numeric).collect()
    }

    fn trial_division(n: i64) -> Vec<i64> {
        (1..=n).filter(|d| n % d == 0).collect()
    }

    #[test]
    fn pow2_ranges() {
        let vs = ValueSet::GeneratedRange { lo: 1, hi: 512, generator: GeneratorKind::Pow2 };
        assert_eq!(vs.expand(), nums(&[1, 2, 4, 8, 16, 32, 64, 128, 256, 512]));
        let vs = ValueSet::GeneratedRange { lo: 1, hi: 1, generator: GeneratorKind::Pow2 };
        assert_eq!(vs.expand(), nums(&[1]));
        let vs = ValueSet::GeneratedRange { lo: 3, hi: 100, generator: GeneratorKind::Pow2 };
        assert_eq!(vs.expand(), nums(&[4, 8, 16, 32, 64]));
        for k in 0..40 {
            let vs = ValueSet::GeneratedRange { lo: 1, hi: 1 << k, generator: GeneratorKind::Pow2 };
            assert_eq!(vs.expand().len(), k + 1);
        }
    }

    #[test]
    fn div_matches_trial_division() {
        let vs = ValueSet::GeneratedRange { lo: 1, hi: 12, generator: GeneratorKind::Div };
        assert_eq!(vs.expand(), nums(&[1, 2, 3, 4, 6, 12]));
        for n in 1..=500 {
            let vs = ValueSet::GeneratedRange { lo: 1, hi: n, generator: GeneratorKind::Div };
            assert_eq!(vs.expand(), nums(&trial_division(n)), "n={n}");
        }
        let vs = ValueSet::GeneratedRange { lo: 5, hi: 36, generator: GeneratorKind::Div };
        assert_eq!(vs.expand(), nums(&[6, 9, 12, 18, 36]));
    }

    #[test]
    fn explicit_list_keeps_order() {
        let vs = ValueSet::ExplicitList(nums(&[16, 1, 4]));
        assert_eq!(vs.expand(), nums(&[16, 1, 4]));
    }

    #[test]
    fn invalid_range_is_empty() {
        let vs = ValueSet::GeneratedRange { lo: 0, hi: 8, generator: GeneratorKind::Pow2 };
        assert!(vs.expand().is_empty());
        let vs = ValueSet::GeneratedRange { lo: 9, hi: 8, generator: GeneratorKind::Div };
        assert!(vs.expand().is_empty());
    }

    #[test]
    fn identifiers() {
        assert!(is_identifier("RAM_2P_BRAM"));
        assert!(is_identifier("_x1"));
        assert!(!is_identifier("1x"));
        assert!(!is_identifier(""));
        assert!(!is_identifier("a-b"));
    }
}
