//! A parallel campaign over the 704-configuration mock space, interrupted
//! halfway and resumed.

use std::time::Duration;

use hlsdse::csd::parse_csd;
use hlsdse::orchestrator::{read_campaign_log, run_campaign, Campaign, CancelToken, MockBackend};
use hlsdse::store::{DesignSpec, Store};

fn main() {
    let dir = std::env::temp_dir().join(format!("hlsdse-mock-campaign-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let store = Store::create(dir.join("results.db")).unwrap();
    let design = store.ensure_design(&DesignSpec::for_function("local_scan")).unwrap();
    let csd = parse_csd(include_str!("../fixtures/local_scan_704.csd")).unwrap();
    let space = store.register_space(design.id, &csd, "example").unwrap();

    let mut backend = MockBackend::new(0);
    backend.delay = Duration::from_millis(2);
    backend.fail_rate = 0.05;

    let log = dir.join("campaign.jsonl");
    let mut campaign = Campaign::new(space.id, &backend);
    campaign.jobs = 8;
    campaign.log = Some(log.clone());
    campaign.stop_after = Some(352);
    let first = run_campaign(&store, &campaign).unwrap();
    println!("first run:  {first:?}");

    campaign.stop_after = None;
    campaign.cancel = CancelToken::new();
    let second = run_campaign(&store, &campaign).unwrap();
    println!("second run: {second:?}");

    let summary = store.summary(space.id, &backend.tool).unwrap();
    println!("\n{summary:?}");
    let events = read_campaign_log(&log).unwrap();
    println!("{} log events, last: {:?}", events.len(), events.last().unwrap());
    println!("\ndatabase and log in {}", dir.display());
}
