use std::collections::{BTreeMap, HashMap, HashSet};
use std::fmt;

use super::registry::{DirectiveKind, DirectiveRegistry, Location};
use super::{is_identifier, Csd, Value, ValueSet};

/// One invariant violation, tied to the knob it was found on when there is one.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Diagnostic {
    pub knob: Option<usize>,
    /// 1-based source line, 0 when unknown.
    pub line: usize,
    pub kind: DiagnosticKind,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum DiagnosticKind {
    UnknownDirective(String),
    ArityMismatch { expected: usize, found: usize },
    FixedParamMismatch { expected: usize, found: usize },
    InvalidLocation,
    EmptyValueSet { set: usize },
    DuplicateValue { set: usize, value: String },
    InvalidRange { set: usize },
    MixedValueSet { set: usize },
    InvalidCategorical { set: usize, value: String },
    DuplicateKnob { first: usize },
    BindOnCategorical { tag: String },
    MismatchedBindSets { tag: String },
    MissingClock,
    DuplicateClock,
}

impl fmt::Display for DiagnosticKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        use DiagnosticKind::*;
        match self {
            UnknownDirective(t) => write!(f, "unknown directive kind `{t}`"),
            ArityMismatch { expected, found } => write!(f, "expected {expected} value sets, found {found}"),
            FixedParamMismatch { expected, found } => {
                write!(f, "expected {expected} fixed parameters, found {found}")
            }
            InvalidLocation => f.write_str("function/target labels do not match the directive's location schema"),
            EmptyValueSet { set } => write!(f, "value set {set} is empty"),
            DuplicateValue { set, value } => write!(f, "value set {set} repeats `{value}`"),
            InvalidRange { set } => write!(f, "value set {set} is not a valid range (need 1 <= lo <= hi)"),
            MixedValueSet { set } => write!(f, "value set {set} mixes numeric and categorical values"),
            InvalidCategorical { set, value } => write!(f, "value set {set}: `{value}` is not an identifier"),
            DuplicateKnob { first } => write!(f, "duplicates knob {first}"),
            BindOnCategorical { tag } => write!(f, "bind tag `{tag}` applied to a categorical value set"),
            MismatchedBindSets { tag } => write!(f, "knobs bound by `{tag}` have different value sets"),
            MissingClock => f.write_str("descriptor has no clock knob"),
            DuplicateClock => f.write_str("descriptor has more than one clock knob"),
        }
    }
}

impl fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match (self.knob, self.line) {
            (Some(k), 0) => write!(f, "knob {k}: {}", self.kind),
            (Some(k), line) => write!(f, "line {line} (knob {k}): {}", self.kind),
            (None, _) => write!(f, "{}", self.kind),
        }
    }
}

pub fn validate_csd(csd: &Csd) -> Vec<Diagnostic> {
    validate_csd_with(csd, &DirectiveRegistry::builtin())
}

/// Check every descriptor invariant. An empty result means the descriptor
/// can be expanded.
pub fn validate_csd_with(csd: &Csd, registry: &DirectiveRegistry) -> Vec<Diagnostic> {
    let mut out = Vec::new();
    let mut push = |knob: Option<usize>, kind: DiagnosticKind| {
        let line = knob.map(|k| csd.line_of(k)).unwrap_or(0);
        out.push(Diagnostic { knob, line, kind });
    };

    let mut seen: HashMap<String, usize> = HashMap::new();
    let mut clocks = Vec::new();
    let mut groups: BTreeMap<&str, Vec<usize>> = BTreeMap::new();

    for (i, knob) in csd.knobs.iter().enumerate() {
        let here = Some(i);
        match registry.spec_for(&knob.directive) {
            None => push(here, DiagnosticKind::UnknownDirective(knob.directive.token().to_string())),
            Some(spec) => {
                if knob.value_sets.len() != spec.arity() {
                    push(here, DiagnosticKind::ArityMismatch { expected: spec.arity(), found: knob.value_sets.len() });
                }
                if knob.fixed_params.len() != spec.fixed_params.len() {
                    push(
                        here,
                        DiagnosticKind::FixedParamMismatch {
                            expected: spec.fixed_params.len(),
                            found: knob.fixed_params.len(),
                        },
                    );
                }
                let location_ok = match spec.location {
                    Location::FunctionAndTarget => is_identifier(&knob.function) && is_identifier(&knob.target),
                    Location::FunctionOnly => is_identifier(&knob.function) && knob.target.is_empty(),
                    Location::None => knob.function.is_empty() && knob.target.is_empty(),
                };
                if !location_ok {
                    push(here, DiagnosticKind::InvalidLocation);
                }
            }
        }

        for (s, vs) in knob.value_sets.iter().enumerate() {
            for kind in value_set_problems(s, vs) {
                push(here, kind);
            }
        }

        if knob.directive == DirectiveKind::Clock {
            clocks.push(i);
        }

        if let Some(first) = seen.get(&knob.header()) {
            push(here, DiagnosticKind::DuplicateKnob { first: *first });
        } else {
            seen.insert(knob.header(), i);
        }

        if let Some(tag) = &knob.bind_tag {
            match knob.value_sets.last() {
                Some(vs) if vs.is_numeric() => groups.entry(tag.as_str()).or_default().push(i),
                _ => push(here, DiagnosticKind::BindOnCategorical { tag: tag.clone() }),
            }
        }
    }

    match clocks.as_slice() {
        [] => push(None, DiagnosticKind::MissingClock),
        [_] => {}
        [_, rest @ ..] => {
            for &k in rest {
                push(Some(k), DiagnosticKind::DuplicateClock);
            }
        }
    }

    for (tag, members) in groups {
        let reference = csd.knobs[members[0]].value_sets.last().map(ValueSet::expand);
        for &k in &members[1..] {
            if csd.knobs[k].value_sets.last().map(ValueSet::expand) != reference {
                push(Some(k), DiagnosticKind::MismatchedBindSets { tag: tag.to_string() });
            }
        }
    }

    out
}

fn value_set_problems(set: usize, vs: &ValueSet) -> Vec<DiagnosticKind> {
    let mut out = Vec::new();
    match vs {
        ValueSet::ExplicitList(values) => {
            if values.is_empty() {
                out.push(DiagnosticKind::EmptyValueSet { set });
            }
            let mut seen = HashSet::new();
            for v in values {
                if !seen.insert(v) {
                    out.push(DiagnosticKind::DuplicateValue { set, value: v.to_string() });
                }
                if let Value::Categorical(s) = v {
                    if !is_identifier(s) {
                        out.push(DiagnosticKind::InvalidCategorical { set, value: s.clone() });
                    }
                }
            }
            let numeric = values.iter().filter(|v| v.is_numeric()).count();
            if numeric != 0 && numeric != values.len() {
                out.push(DiagnosticKind::MixedValueSet { set });
            }
        }
        ValueSet::GeneratedRange { lo, hi, .. } => {
            if *lo < 1 || lo > hi {
                out.push(DiagnosticKind::InvalidRange { set });
            } else if vs.expand().is_empty() {
                out.push(DiagnosticKind::EmptyValueSet { set });
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::csd::{parse_structure, Knob};

    #[test]
    fn snippet_is_clean() {
        let csd = parse_structure(include_str!("../../fixtures/last_step_scan.csd")).unwrap();
        assert!(validate_csd(&csd).is_empty());
    }

    #[test]
    fn mismatched_bind_sets() {
        let csd = parse_structure("unroll;f;a;{1,2,4}@bind_a\nunroll;f;b;{1,2,8}@bind_a\nclock;{10}").unwrap();
        let diags = validate_csd(&csd);
        assert_eq!(diags.len(), 1);
        assert_eq!(diags[0].kind, DiagnosticKind::MismatchedBindSets { tag: "a".into() });
        assert_eq!(diags[0].knob, Some(1));
        assert_eq!(diags[0].line, 2);
    }

    #[test]
    fn bind_compares_expanded_sets() {
        let csd = parse_structure("unroll;f;a;{1,2,4,8}@bind_a\nunroll;f;b;{1->8,pow_2}@bind_a\nclock;{10}").unwrap();
        assert!(validate_csd(&csd).is_empty());
    }

    #[test]
    fn duplicate_clock() {
        let csd = parse_structure("clock;{10}\nclock;{5}").unwrap();
        let kinds: Vec<_> = validate_csd(&csd).into_iter().map(|d| d.kind).collect();
        assert!(kinds.contains(&DiagnosticKind::DuplicateClock));
    }

    #[test]
    fn programmatic_knob_checks() {
        let knob = Knob {
            directive: DirectiveKind::Unroll,
            function: "f".into(),
            target: String::new(),
            fixed_params: vec!["x".into()],
            value_sets: vec![ValueSet::ExplicitList(vec![]), ValueSet::ExplicitList(vec![Value::Numeric(1)])],
            bind_tag: None,
        };
        let clock = Knob {
            directive: DirectiveKind::Clock,
            function: String::new(),
            target: String::new(),
            fixed_params: vec![],
            value_sets: vec![ValueSet::ExplicitList(vec![Value::Numeric(10)])],
            bind_tag: None,
        };
        let csd = Csd::from_knobs(vec![knob, clock]);
        let kinds: Vec<_> = validate_csd(&csd).into_iter().map(|d| d.kind).collect();
        assert!(kinds.contains(&DiagnosticKind::ArityMismatch { expected: 1, found: 2 }));
        assert!(kinds.contains(&DiagnosticKind::FixedParamMismatch { expected: 0, found: 1 }));
        assert!(kinds.contains(&DiagnosticKind::InvalidLocation));
        assert!(kinds.contains(&DiagnosticKind::EmptyValueSet { set: 0 }));
    }

    #[test]
    fn every_diagnostic_names_a_knob_except_missing_clock() {
        let csd = parse_structure("unroll;f;a;{1,2}@bind_a\nunroll;f;a;{1,4}@bind_a").unwrap();
        for d in validate_csd(&csd) {
            assert_eq!(d.knob.is_none(), d.kind == DiagnosticKind::MissingClock, "{d}");
        }
    }
}
