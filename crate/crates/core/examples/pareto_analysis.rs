//! Fronts, ADRS and hypervolume over a populated mock space, under two
//! objective projections.

use hlsdse::analytics::{adrs, hypervolume_2d, pareto_front, ObjectiveSpec};
use hlsdse::csd::parse_csd;
use hlsdse::orchestrator::{run_campaign, Campaign, MockBackend};
use hlsdse::store::{DesignSpec, Store};

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

    for objectives in ["latency,lut", "latency_ns,area_norm"] {
        let spec = ObjectiveSpec::parse(objectives, [1.0, 1.0, 1.0, 1.0]).unwrap();
        let points = store.fetch_points(space.id, &spec, None).unwrap();
        let front = pareto_front(&points).unwrap();
        println!("[{spec}] {} points, {} on the front", points.len(), front.len());
        for p in &front.points {
            let ids: Vec<i64> = front.tied_ids[front.points.iter().position(|q| q == p).unwrap()].clone();
            println!("  {:?} configurations {ids:?}", p.objectives);
        }
        let worst: Vec<f64> =
            (0..2).map(|j| points.iter().map(|p| p.objectives[j]).fold(0.0, f64::max) * 1.1).collect();
        println!("  hypervolume w.r.t. {worst:?}: {:.4e}", hypervolume_2d(&front.points, &worst).unwrap());

        // a thinned front: every other point
        let thinned: Vec<_> = front.points.iter().step_by(2).cloned().collect();
        println!("  adrs of every other front point: {:.4}", adrs(&front.points, &thinned).unwrap());
    }
}
