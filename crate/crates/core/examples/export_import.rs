//! Export a populated space as JSON lines and SQL, then load both into
//! fresh stores.

use std::io::BufReader;

use hlsdse::analytics::ObjectiveSpec;
use hlsdse::csd::parse_csd;
use hlsdse::orchestrator::{run_campaign, Campaign, MockBackend};
use hlsdse::store::{DesignSpec, ExportFormat, Store};

fn main() {
    let store = Store::create_in_memory().unwrap();
    let design = store.ensure_design(&DesignSpec::for_function("toy")).unwrap();
    let space = store
        .register_space(design.id, &parse_csd(include_str!("../fixtures/toy_24.csd")).unwrap(), "example")
        .unwrap();
    let mut backend = MockBackend::new(1);
    backend.fail_rate = 0.25;
    run_campaign(&store, &Campaign::new(space.id, &backend)).unwrap();

    for format in [ExportFormat::JsonLines, ExportFormat::Sql] {
        let mut buf = Vec::new();
        let n = store.export(space.id, format, &mut buf).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        println!("{format:?}: {n} records, {} bytes; first lines:", buf.len());
        for line in text.lines().take(3) {
            println!("  {}", &line[..line.len().min(110)]);
        }

        let fresh = Store::create_in_memory().unwrap();
        let report = fresh.import(&mut BufReader::new(buf.as_slice())).unwrap();
        println!("  imported into space {:?}: {:?}", report.space_ids, report.rows);
        let spec = ObjectiveSpec::default();
        let same = fresh.fetch_points(report.space_ids[0], &spec, None).unwrap()
            == store.fetch_points(space.id, &spec, None).unwrap();
        println!("  identical points: {same}");

        match fresh.import(&mut BufReader::new(buf.as_slice())) {
            Ok(_) => println!("  second import accepted"),
            Err(e) => println!("  second import refused: {e}"),
        }
    }
}
