use crate::csd::{DirectiveKind, DirectiveRegistry, Knob, Value};
use crate::space::Configuration;

use super::OrchestratorError;

/// Design information needed to drive a synthesis project.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DesignMeta {
    pub top_function: String,
    /// Source file(s) handed to the tool, as written into the run script.
    pub design_src: String,
}

/// One HLS directive command per knob, in knob order.
pub fn generate_directive_script(
    knobs: &[Knob],
    config: &Configuration,
    registry: &DirectiveRegistry,
) -> Result<String, OrchestratorError> {
    if knobs.len() != config.assignments.len() {
        return Err(OrchestratorError::Script(format!(
            "configuration has {} assignments for {} knobs",
            config.assignments.len(),
            knobs.len()
        )));
    }
    let mut out = format!("# configuration {} (index {})\n", config.config_key, config.index);
    for (knob, values) in knobs.iter().zip(&config.assignments) {
        out.push_str(&render(knob, values, registry)?);
        out.push('\n');
    }
    Ok(out)
}

fn render(knob: &Knob, values: &[Value], registry: &DirectiveRegistry) -> Result<String, OrchestratorError> {
    let v = |i: usize| {
        values.get(i).ok_or_else(|| OrchestratorError::Script(format!("`{}` is missing value {i}", knob.header())))
    };
    let fixed = |i: usize| {
        knob.fixed_params
            .get(i)
            .ok_or_else(|| OrchestratorError::Script(format!("`{}` is missing fixed parameter {i}", knob.header())))
    };
    let (func, target) = (&knob.function, &knob.target);
    Ok(match &knob.directive {
        DirectiveKind::Resource => format!("set_directive_resource -core {} \"{func}\" {target}", v(0)?),
        DirectiveKind::ArrayPartition => format!(
            "set_directive_array_partition -type {} -factor {} -dim {} \"{func}\" {target}",
            v(0)?,
            v(1)?,
            fixed(0)?
        ),
        DirectiveKind::Unroll => format!("set_directive_unroll -factor {} \"{func}/{target}\"", v(0)?),
        DirectiveKind::Pipeline => format!("set_directive_pipeline -II {} \"{func}/{target}\"", v(0)?),
        DirectiveKind::Inline => match v(0)?.to_string().as_str() {
            "on" => format!("set_directive_inline \"{func}\""),
            "off" => format!("set_directive_inline -off \"{func}\""),
            other => return Err(OrchestratorError::Script(format!("inline mode must be on/off, found `{other}`"))),
        },
        DirectiveKind::Clock => format!("create_clock -period {}", v(0)?),
        DirectiveKind::Custom(token) => {
            let template = registry
                .get(token)
                .and_then(|s| s.template.as_deref())
                .ok_or_else(|| OrchestratorError::NoRenderer(token.clone()))?;
            let mut line = template.replace("{function}", func).replace("{target}", target);
            for (i, p) in knob.fixed_params.iter().enumerate() {
                line = line.replace(&format!("{{fixed{i}}}"), p);
            }
            for (i, val) in values.iter().enumerate() {
                line = line.replace(&format!("{{v{i}}}"), &val.to_string());
            }
            line
        }
    })
}

/// Project script that sources `directives.tcl` and runs C synthesis.
pub fn generate_run_script(meta: &DesignMeta, fpga_part: &str) -> String {
    format!(
        "open_project -reset proj\n\
         set_top {top}\n\
         add_files {src}\n\
         open_solution -reset solution1\n\
         set_part {{{fpga_part}}}\n\
         source directives.tcl\n\
         csynth_design\n\
         exit\n",
        top = meta.top_function,
        src = meta.design_src,
    )
}
