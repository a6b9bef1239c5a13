//! Directive scripts for a few configurations, a custom directive kind with
//! its own template, and report parsing.

use hlsdse::csd::{parse_csd, parse_csd_with, DirectiveRegistry, DirectiveSpec, Location};
use hlsdse::orchestrator::{generate_directive_script, generate_run_script, parse_report, DesignMeta, ReportFormat};
use hlsdse::space::{build_index, build_index_with};

fn main() {
    let registry = DirectiveRegistry::builtin();
    let index = build_index(&parse_csd(include_str!("../fixtures/last_step_scan.csd")).unwrap()).unwrap();
    for i in [0, 1599] {
        let config = index.decode(i).unwrap();
        print!("{}", generate_directive_script(index.knobs(), &config, &registry).unwrap());
        println!();
    }
    let meta = DesignMeta { top_function: "last_step_scan".into(), design_src: "sort.c".into() };
    print!("{}", generate_run_script(&meta, "xczu9eg-ffvb1156-2-e"));

    let mut custom = DirectiveRegistry::builtin();
    custom.register(
        DirectiveSpec::new("loop_flatten", Location::FunctionAndTarget, &[], &["mode"])
            .with_template("set_directive_loop_flatten -{v0} \"{function}/{target}\""),
    );
    let csd = parse_csd_with("loop_flatten;f;outer;{off}\nclock;{10}", &custom).unwrap();
    let index = build_index_with(&csd, &custom).unwrap();
    println!();
    print!("{}", generate_directive_script(index.knobs(), &index.decode(0).unwrap(), &custom).unwrap());
    let unknown = generate_directive_script(index.knobs(), &index.decode(0).unwrap(), &registry);
    println!("without the template: {}", unknown.unwrap_err());

    let report = parse_report(include_bytes!("../fixtures/csynth.xml"), ReportFormat::VivadoXml);
    println!("\ncsynth.xml -> {report:?}");
    let bad = parse_report(b"<profile>", ReportFormat::VivadoXml);
    println!("truncated report -> {:?}: {}", bad.status, bad.diagnostic.unwrap());
}
