//! Replay exploration strategies against stored results without
//! re-synthesizing, including a user-defined strategy.

use hlsdse::analytics::{
    evaluate_strategy, AnalyticsError, Exhaustive, HillClimb, ObjectiveSpec, Oracle, SpaceView, Strategy, UniformRandom,
};
use hlsdse::csd::parse_csd;
use hlsdse::orchestrator::{run_campaign, Campaign, MockBackend};
use hlsdse::store::{DesignSpec, Store};

/// Walks the index with a fixed stride.
struct Stride(u64);

impl Strategy for Stride {
    fn name(&self) -> &str {
        "stride"
    }

    fn explore(&mut self, space: &SpaceView<'_>, oracle: &mut Oracle<'_>) -> Result<Vec<i64>, AnalyticsError> {
        let mut picked = Vec::new();
        let mut i = 0;
        while i < space.total() && oracle.remaining() > 0 {
            let id = space.id_of(i);
            oracle.query(id)?;
            picked.push(id);
            i += self.0;
        }
        Ok(picked)
    }
}

fn main() {
    let store = Store::create_in_memory().unwrap();
    let design = store.ensure_design(&DesignSpec::for_function("local_scan")).unwrap();
    let space = store
        .register_space(design.id, &parse_csd(include_str!("../fixtures/local_scan_704.csd")).unwrap(), "example")
        .unwrap();
    let backend = MockBackend::new(0);
    let mut campaign = Campaign::new(space.id, &backend);
    campaign.jobs = 4;
    run_campaign(&store, &campaign).unwrap();

    let objectives = ObjectiveSpec::default();
    let budget = (0.1 * space.cardinality as f64).ceil() as usize;
    println!("budget {budget} of {} configurations\n", space.cardinality);
    let mut strategies: Vec<Box<dyn Strategy>> = vec![
        Box::new(Exhaustive),
        Box::new(UniformRandom { seed: 42 }),
        Box::new(HillClimb { seed: 42 }),
        Box::new(Stride(10)),
    ];
    for s in strategies.iter_mut() {
        let b = if s.name() == "exhaustive" { space.cardinality as usize } else { budget };
        let e = evaluate_strategy(&store, space.id, s.as_mut(), b, &objectives, None).unwrap();
        println!(
            "{:<11} queries {:>3}  approx front {:>2}  adrs {:.4}  truncated {}",
            e.strategy,
            e.queries_used,
            e.approx_front.map_or(0, |f| f.len()),
            e.adrs.unwrap_or(f64::NAN),
            e.trace.truncated
        );
    }
}
