use std::collections::HashSet;

use thiserror::Error;

use super::registry::{DirectiveRegistry, Location};
use super::validate::{validate_csd_with, Diagnostic};
use super::{is_identifier, Csd, GeneratorKind, Knob, Value, ValueSet};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ParseError {
    #[error("descriptor is empty")]
    Empty,
    #[error("line {line}, column {column}: {message}")]
    Syntax { line: usize, column: usize, message: String },
    #[error("line {line}, column {column}: unknown directive kind `{token}`")]
    UnknownDirective { line: usize, column: usize, token: String },
    #[error("line {line}: `{kind}` expects {expected} {what}, found {found}")]
    ArityMismatch { line: usize, kind: String, what: &'static str, expected: usize, found: usize },
    #[error("line {line}, column {column}: malformed value set: {message}")]
    MalformedValueSet { line: usize, column: usize, message: String },
    #[error("{}", format_diagnostics(.0))]
    Invalid(Vec<Diagnostic>),
}

fn format_diagnostics(diags: &[Diagnostic]) -> String {
    diags.iter().map(|d| d.to_string()).collect::<Vec<_>>().join("; ")
}

impl ParseError {
    pub fn line(&self) -> Option<usize> {
        match self {
            ParseError::Empty | ParseError::Invalid(_) => None,
            ParseError::Syntax { line, .. }
            | ParseError::UnknownDirective { line, .. }
            | ParseError::ArityMismatch { line, .. }
            | ParseError::MalformedValueSet { line, .. } => Some(*line),
        }
    }
}

/// Parse and validate a descriptor against the built-in directive kinds.
pub fn parse_csd(text: &str) -> Result<Csd, ParseError> {
    parse_csd_with(text, &DirectiveRegistry::builtin())
}

pub fn parse_csd_with(text: &str, registry: &DirectiveRegistry) -> Result<Csd, ParseError> {
    let csd = parse_structure_with(text, registry)?;
    let diags = validate_csd_with(&csd, registry);
    if diags.is_empty() {
        Ok(csd)
    } else {
        Err(ParseError::Invalid(diags))
    }
}

/// Parse line syntax only, leaving cross-knob invariants (bind groups,
/// duplicates, the clock) to [`validate_csd`](super::validate_csd).
pub fn parse_structure(text: &str) -> Result<Csd, ParseError> {
    parse_structure_with(text, &DirectiveRegistry::builtin())
}

pub fn parse_structure_with(text: &str, registry: &DirectiveRegistry) -> Result<Csd, ParseError> {
    let mut knobs = Vec::new();
    let mut lines = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let trimmed = raw.trim();
        if trimmed.is_empty() || trimmed.starts_with('#') {
            continue;
        }
        knobs.push(parse_line(raw, i + 1, registry)?);
        lines.push(i + 1);
    }
    if knobs.is_empty() {
        return Err(ParseError::Empty);
    }
    Ok(Csd { knobs, source_text: text.to_string(), lines })
}

struct Field<'a> {
    text: &'a str,
    column: usize,
}

fn split_fields(raw: &str) -> Vec<Field<'_>> {
    let mut out = Vec::new();
    let mut start = 0;
    for part in raw.split(';') {
        let lead = part.len() - part.trim_start().len();
        out.push(Field { text: part.trim(), column: start + lead + 1 });
        start += part.len() + 1;
    }
    out
}

fn parse_line(raw: &str, line: usize, registry: &DirectiveRegistry) -> Result<Knob, ParseError> {
    let mut fields = split_fields(raw);
    let syntax = |column: usize, message: String| ParseError::Syntax { line, column, message };

    // Detach the bind decorator from the last field.
    let mut bind_tag = None;
    if let Some(last) = fields.last_mut() {
        if let Some(at) = last.text.find('@') {
            let decorator = &last.text[at + 1..];
            let column = last.column + at;
            let tag = decorator
                .strip_prefix("bind_")
                .ok_or_else(|| syntax(column, format!("unknown decorator `@{decorator}`")))?;
            if tag.is_empty() || !tag.chars().all(|c| c.is_ascii_alphanumeric() || c == '_') {
                return Err(syntax(column, format!("invalid bind tag `{tag}`")));
            }
            bind_tag = Some(tag.to_string());
            last.text = last.text[..at].trim_end();
        }
    }

    let kind_field = &fields[0];
    let spec = registry.get(kind_field.text).ok_or_else(|| ParseError::UnknownDirective {
        line,
        column: kind_field.column,
        token: kind_field.text.to_string(),
    })?;

    let rest = &fields[1..];
    let first_set = rest.iter().position(|f| f.text.starts_with('{')).unwrap_or(rest.len());
    let (plain, sets) = rest.split_at(first_set);
    if let Some(stray) = sets.iter().find(|f| !f.text.starts_with('{')) {
        return Err(syntax(stray.column, format!("expected `{{` to open a value set, found `{}`", stray.text)));
    }

    let loc_count = spec.location.field_count();
    let expected_plain = loc_count + spec.fixed_params.len();
    if plain.len() != expected_plain {
        return Err(ParseError::ArityMismatch {
            line,
            kind: spec.kind.token().to_string(),
            what: "location/fixed fields",
            expected: expected_plain,
            found: plain.len(),
        });
    }
    if sets.len() != spec.arity() {
        return Err(ParseError::ArityMismatch {
            line,
            kind: spec.kind.token().to_string(),
            what: "value sets",
            expected: spec.arity(),
            found: sets.len(),
        });
    }

    for f in &plain[..loc_count] {
        if !is_identifier(f.text) {
            return Err(syntax(f.column, format!("expected an identifier, found `{}`", f.text)));
        }
    }
    for f in &plain[loc_count..] {
        if f.text.is_empty() || !f.text.chars().all(|c| c.is_ascii_alphanumeric() || c == '_') {
            return Err(syntax(f.column, format!("invalid fixed parameter `{}`", f.text)));
        }
    }

    let (function, target) = match spec.location {
        Location::FunctionAndTarget => (plain[0].text.to_string(), plain[1].text.to_string()),
        Location::FunctionOnly => (plain[0].text.to_string(), String::new()),
        Location::None => (String::new(), String::new()),
    };
    let value_sets = sets.iter().map(|f| parse_value_set(f.text, line, f.column)).collect::<Result<Vec<_>, _>>()?;

    Ok(Knob {
        directive: spec.kind.clone(),
        function,
        target,
        fixed_params: plain[loc_count..].iter().map(|f| f.text.to_string()).collect(),
        value_sets,
        bind_tag,
    })
}

fn parse_value_set(text: &str, line: usize, column: usize) -> Result<ValueSet, ParseError> {
    let malformed = |message: String| ParseError::MalformedValueSet { line, column, message };
    let inner = text
        .strip_prefix('{')
        .and_then(|t| t.strip_suffix('}'))
        .ok_or_else(|| malformed(format!("`{text}` is not brace-delimited")))?
        .trim();
    if inner.is_empty() {
        return Err(malformed("empty value set".into()));
    }

    if inner.contains("->") {
        let parts: Vec<&str> = inner.split(',').map(str::trim).collect();
        let [range, generator] = parts.as_slice() else {
            return Err(malformed(format!("range `{inner}` must be `lo->hi,generator`")));
        };
        let (lo, hi) = range.split_once("->").ok_or_else(|| malformed(format!("`{range}` is not a `lo->hi` range")))?;
        let lo: i64 = lo.trim().parse().map_err(|_| malformed(format!("bad lower bound `{}`", lo.trim())))?;
        let hi: i64 = hi.trim().parse().map_err(|_| malformed(format!("bad upper bound `{}`", hi.trim())))?;
        let generator = GeneratorKind::from_token(generator)
            .ok_or_else(|| malformed(format!("unknown generator `{generator}`")))?;
        if lo < 1 || lo > hi {
            return Err(malformed(format!("range requires 1 <= lo <= hi, got {lo}->{hi}")));
        }
        let vs = ValueSet::GeneratedRange { lo, hi, generator };
        if vs.expand().is_empty() {
            return Err(malformed(format!("range {lo}->{hi} generates no values")));
        }
        return Ok(vs);
    }

    let mut values = Vec::new();
    let mut seen = HashSet::new();
    for item in inner.split(',').map(str::trim) {
        let value = if let Ok(n) = item.parse::<i64>() {
            Value::Numeric(n)
        } else if is_identifier(item) {
            Value::Categorical(item.to_string())
        } else {
            return Err(malformed(format!("invalid value `{item}`")));
        };
        if !seen.insert(value.clone()) {
            return Err(malformed(format!("duplicate value `{item}`")));
        }
        values.push(value);
    }
    let numeric = values.iter().filter(|v| v.is_numeric()).count();
    if numeric != 0 && numeric != values.len() {
        return Err(malformed("mixes numeric and categorical values".into()));
    }
    Ok(ValueSet::ExplicitList(values))
}
