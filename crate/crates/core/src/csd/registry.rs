use std::collections::BTreeMap;
use std::fmt;

/// Directive kind of a knob. The built-in kinds have dedicated script
/// renderers; anything else registered at runtime is `Custom`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum DirectiveKind {
    Resource,
    ArrayPartition,
    Unroll,
    Pipeline,
    Inline,
    Clock,
    Custom(String),
}

impl DirectiveKind {
    pub fn token(&self) -> &str {
        match self {
            DirectiveKind::Resource => "resource",
            DirectiveKind::ArrayPartition => "array_partition",
            DirectiveKind::Unroll => "unroll",
            DirectiveKind::Pipeline => "pipeline",
            DirectiveKind::Inline => "inline",
            DirectiveKind::Clock => "clock",
            DirectiveKind::Custom(token) => token,
        }
    }

    fn from_token(token: &str) -> Self {
        match token {
            "resource" => DirectiveKind::Resource,
            "array_partition" => DirectiveKind::ArrayPartition,
            "unroll" => DirectiveKind::Unroll,
            "pipeline" => DirectiveKind::Pipeline,
            "inline" => DirectiveKind::Inline,
            "clock" => DirectiveKind::Clock,
            other => DirectiveKind::Custom(other.to_string()),
        }
    }
}

impl fmt::Display for DirectiveKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.token())
    }
}

/// Which location fields precede the fixed parameters on a knob line.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Location {
    /// `kind;function;target;...`
    FunctionAndTarget,
    /// `kind;function;...`
    FunctionOnly,
    /// `kind;...` (clock)
    None,
}

impl Location {
    pub fn field_count(self) -> usize {
        match self {
            Location::FunctionAndTarget => 2,
            Location::FunctionOnly => 1,
            Location::None => 0,
        }
    }
}

/// Line schema of one directive kind.
#[derive(Debug, Clone)]
pub struct DirectiveSpec {
    pub kind: DirectiveKind,
    pub location: Location,
    /// Names of the constant parameters written between location and value sets.
    pub fixed_params: Vec<String>,
    /// Names of the swept parameters; one value set each.
    pub value_sets: Vec<String>,
    /// Script template for kinds without a built-in renderer. Placeholders:
    /// `{function}`, `{target}`, `{fixed0}`.., `{v0}`..
    pub template: Option<String>,
}

impl DirectiveSpec {
    pub fn new(token: &str, location: Location, fixed: &[&str], sets: &[&str]) -> Self {
        DirectiveSpec {
            kind: DirectiveKind::from_token(token),
            location,
            fixed_params: fixed.iter().map(|s| s.to_string()).collect(),
            value_sets: sets.iter().map(|s| s.to_string()).collect(),
            template: None,
        }
    }

    pub fn with_template(mut self, template: impl Into<String>) -> Self {
        self.template = Some(template.into());
        self
    }

    pub fn arity(&self) -> usize {
        self.value_sets.len()
    }
}

/// Token → line schema lookup. Starts with the built-in kinds and accepts
/// additional ones.
#[derive(Debug, Clone)]
pub struct DirectiveRegistry {
    specs: BTreeMap<String, DirectiveSpec>,
}

impl Default for DirectiveRegistry {
    fn default() -> Self {
        Self::builtin()
    }
}

impl DirectiveRegistry {
    pub fn builtin() -> Self {
        use Location::*;
        let specs = [
            DirectiveSpec::new("resource", FunctionAndTarget, &[], &["core"]),
            DirectiveSpec::new("array_partition", FunctionAndTarget, &["dim"], &["type", "factor"]),
            DirectiveSpec::new("unroll", FunctionAndTarget, &[], &["factor"]),
            DirectiveSpec::new("pipeline", FunctionAndTarget, &[], &["ii"]),
            DirectiveSpec::new("inline", FunctionOnly, &[], &["mode"]),
            DirectiveSpec::new("clock", None, &[], &["period"]),
        ];
        DirectiveRegistry { specs: specs.into_iter().map(|s| (s.kind.token().to_string(), s)).collect() }
    }

    /// Add or replace a kind. Built-in tokens may be overridden.
    pub fn register(&mut self, spec: DirectiveSpec) {
        self.specs.insert(spec.kind.token().to_string(), spec);
    }

    pub fn get(&self, token: &str) -> Option<&DirectiveSpec> {
        self.specs.get(token)
    }

    pub fn spec_for(&self, kind: &DirectiveKind) -> Option<&DirectiveSpec> {
        self.specs.get(kind.token())
    }

    pub fn tokens(&self) -> impl Iterator<Item = &str> {
        self.specs.keys().map(String::as_str)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn builtin_arities() {
        let reg = DirectiveRegistry::builtin();
        assert_eq!(reg.get("array_partition").unwrap().arity(), 2);
        assert_eq!(reg.get("array_partition").unwrap().fixed_params.len(), 1);
        assert_eq!(reg.get("unroll").unwrap().arity(), 1);
        assert_eq!(reg.get("clock").unwrap().location, Location::None);
        assert!(reg.get("dataflow").is_none());
    }

    #[test]
    fn custom_kinds() {
        let mut reg = DirectiveRegistry::builtin();
        reg.register(
            DirectiveSpec::new("loop_flatten", Location::FunctionAndTarget, &[], &["mode"])
                .with_template("set_directive_loop_flatten -{v0} \"{function}/{target}\""),
        );
        let spec = reg.get("loop_flatten").unwrap();
        assert_eq!(spec.kind, DirectiveKind::Custom("loop_flatten".into()));
        assert_eq!(spec.kind.token(), "loop_flatten");
    }
}
