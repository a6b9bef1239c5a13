//! Parse a descriptor, print its knobs and canonical form, and show what a
//! broken descriptor reports.
//!
//! ```text
//! cargo run --example parse_csd
//! cargo run --example parse_csd -- path/to/design.csd
//! ```

use hlsdse::csd::{parse_csd, ParseError};
use hlsdse::space::cardinality;

const SNIPPET: &str = include_str!("../fixtures/last_step_scan.csd");

fn main() {
    let text = match std::env::args().nth(1) {
        Some(path) => std::fs::read_to_string(&path).unwrap_or_else(|e| panic!("{path}: {e}")),
        None => SNIPPET.to_string(),
    };
    let csd = parse_csd(&text).expect("descriptor parses");
    for (i, knob) in csd.knobs.iter().enumerate() {
        let sizes: Vec<usize> = knob.value_sets.iter().map(|s| s.expand().len()).collect();
        let bind = knob.bind_tag.as_deref().map(|t| format!(" bound to `{t}`")).unwrap_or_default();
        println!("knob {i} (line {}): {} sets {sizes:?}{bind}", csd.line_of(i), knob.header());
    }
    println!("|CS| = {}", cardinality(&csd).unwrap());
    println!("without binds: {}", cardinality(&csd.without_binds()).unwrap());
    println!("\ncanonical form:\n{}", csd.serialize());

    let broken = "unroll;f;a;{1,2}@bind_x\nunroll;f;b;{1,2,4}@bind_x\nclock;{10}\n";
    match parse_csd(broken) {
        Err(ParseError::Invalid(diags)) => {
            for d in diags {
                println!("diagnostic: {d}");
            }
        }
        other => println!("unexpected: {other:?}"),
    }
    if let Err(e) = parse_csd("unroll;f;a;{1->,pow_2}\nclock;{10}") {
        println!("syntax error: {e}");
    }
}
