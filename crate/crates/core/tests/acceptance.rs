//! Acceptance suite. Runs every criterion, prints one PASS/FAIL line each and
//! exits nonzero if any fails.

mod common;

use std::collections::{HashMap, HashSet};
use std::io::BufReader;
use std::path::Path;
use std::process::{Command, Stdio};
use std::thread;
use std::time::{Duration, Instant};

use hlsdse::analytics::{
    adrs, evaluate_strategy, hypervolume_2d, pareto_front, DesignPoint, Exhaustive, ObjectiveSpec,
};
use hlsdse::csd::parse_csd;
use hlsdse::orchestrator::{read_campaign_log, run_campaign, Campaign, EventKind, MockBackend};
use hlsdse::space::{cardinality, enumerate};
use hlsdse::store::{DesignSpec, ExportFormat, Store};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use common::{brute_force_front, fixture, fixture_path, random_csd};

type Outcome = Result<String, String>;
type Check<'a> = Box<dyn Fn() -> Outcome + 'a>;

macro_rules! ensure {
    ($cond:expr, $($msg:tt)+) => {
        if !$cond {
            return Err(format!($($msg)+));
        }
    };
}

fn within(limit: Duration, start: Instant) -> Result<Duration, String> {
    let t = start.elapsed();
    if t <= limit {
        Ok(t)
    } else {
        Err(format!("took {t:.2?}, limit {limit:?}"))
    }
}

fn cardinality_reproduction() -> Outcome {
    let start = Instant::now();
    let text = fixture("last_step_scan.csd");
    let bound = cardinality(&parse_csd(&text).map_err(|e| e.to_string())?).map_err(|e| e.to_string())?;
    let stripped = text.replace("@bind_a", "");
    ensure!(stripped.len() + 2 * "@bind_a".len() == text.len(), "expected exactly two @bind_a decorators");
    let unbound = cardinality(&parse_csd(&stripped).map_err(|e| e.to_string())?).map_err(|e| e.to_string())?;
    let shipped = cardinality(&parse_csd(&fixture("last_step_scan_unbound.csd")).unwrap()).unwrap();
    let t = within(Duration::from_secs(1), start)?;
    ensure!(bound == 1600, "|CS| = {bound}, expected 1600");
    ensure!(unbound == 12800 && shipped == 12800, "unbound |CS| = {unbound}/{shipped}, expected 12800");
    Ok(format!("1600 bound, 12800 unbound in {t:.2?}"))
}

fn enumeration_soundness() -> Outcome {
    let start = Instant::now();
    let mut total = 0u64;
    for seed in 0..200 {
        let g = random_csd(seed);
        let csd = parse_csd(&g.text).map_err(|e| format!("seed {seed}: {e}"))?;
        let n = cardinality(&csd).map_err(|e| e.to_string())?;
        let all: Vec<_> = enumerate(&csd).map_err(|e| e.to_string())?.collect();
        ensure!(n == g.cardinality, "seed {seed}: cardinality {n}, oracle {}", g.cardinality);
        ensure!(all.len() as u64 == n, "seed {seed}: enumerated {} of {n}", all.len());
        let keys: HashSet<&str> = all.iter().map(|c| c.config_key.as_str()).collect();
        ensure!(keys.len() == all.len(), "seed {seed}: duplicate configurations");
        for c in &all {
            for group in &g.groups {
                let first = c.assignments[group[0]].last();
                ensure!(group.iter().all(|&k| c.assignments[k].last() == first), "seed {seed}: bind group split");
            }
        }
        total += n;
    }
    let t = within(Duration::from_secs(30), start)?;
    Ok(format!("200 descriptors, {total} configurations in {t:.2?}"))
}

fn pareto_oracle() -> Outcome {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let mut largest = 0;
    for set in 0..100 {
        let n = if set < 10 { 10_000 } else { rng.random_range(1..=10_000) };
        let anti = set % 10 == 9;
        let points: Vec<(i64, Vec<f64>)> = (0..n)
            .map(|i| {
                let x = rng.random_range(0..1000) as f64;
                let y =
                    if anti { 1000.0 - x + rng.random_range(0..3) as f64 } else { rng.random_range(0..1000) as f64 };
                (i as i64, vec![x, y])
            })
            .collect();
        let dps: Vec<DesignPoint> = points.iter().map(|(id, o)| DesignPoint::new(o.clone(), *id)).collect();
        let front = pareto_front(&dps).map_err(|e| e.to_string())?;
        let mut got: Vec<Vec<f64>> = front.points.iter().map(|p| p.objectives.clone()).collect();
        got.sort_by(|a, b| a.partial_cmp(b).unwrap());
        ensure!(got == brute_force_front(&points), "set {set} ({n} points): front differs from the oracle");
        largest = largest.max(n);
    }
    let t = within(Duration::from_secs(60), start)?;
    Ok(format!("100 sets, up to {largest} points, in {t:.2?}"))
}

#[allow(clippy::neg_cmp_op_on_partial_ord)]
fn indicator_identities() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let random_points = |rng: &mut ChaCha8Rng, n: usize| -> Vec<DesignPoint> {
        (0..n)
            .map(|i| DesignPoint::new(vec![rng.random_range(1..500) as f64, rng.random_range(1..500) as f64], i as i64))
            .collect()
    };
    for inst in 0..100 {
        let gamma = pareto_front(&random_points(&mut rng, 200)).unwrap().points;
        ensure!(adrs(&gamma, &gamma).unwrap() == 0.0, "instance {inst}: adrs(F,F) != 0");
        let n = rng.random_range(1..40);
        let omega = random_points(&mut rng, n);
        let mut sup = omega.clone();
        let k = rng.random_range(1..40);
        sup.extend(random_points(&mut rng, k));
        let (a, b) = (adrs(&gamma, &omega).unwrap(), adrs(&gamma, &sup).unwrap());
        ensure!(b <= a, "instance {inst}: superset raised adrs {a} -> {b}");
    }
    let unit = hypervolume_2d(&[DesignPoint::new(vec![0.0, 0.0], 0)], &[1.0, 1.0]).unwrap();
    let two = hypervolume_2d(&[DesignPoint::new(vec![0.0, 0.5], 0), DesignPoint::new(vec![0.5, 0.0], 1)], &[1.0, 1.0])
        .unwrap();
    ensure!(unit == 1.0, "hv of {{(0,0)}} = {unit}");
    ensure!(two == 0.75, "hv of {{(0,0.5),(0.5,0)}} = {two}");
    Ok("adrs(F,F)=0, monotone on 100 instances, hv 1.0 and 0.75 exact".into())
}

fn local_scan_store(path: &Path) -> (Store, i64) {
    let store = Store::create(path).unwrap();
    let design = store.ensure_design(&DesignSpec::for_function("local_scan")).unwrap();
    let csd = parse_csd(&fixture("local_scan_704.csd")).unwrap();
    let space = store.register_space(design.id, &csd, "acceptance").unwrap();
    (store, space.id)
}

fn mock_campaign(dir: &Path) -> Outcome {
    let start = Instant::now();
    let (store, space) = local_scan_store(&dir.join("campaign.db"));
    let mut backend = MockBackend::new(0);
    backend.delay = Duration::from_millis(2);
    let mut campaign = Campaign::new(space, &backend);
    campaign.jobs = 8;
    let report = run_campaign(&store, &campaign).map_err(|e| e.to_string())?;
    let t = within(Duration::from_secs(120), start)?;
    let summary = store.summary(space, &backend.tool).map_err(|e| e.to_string())?;
    let implementations = store.implementations(space).map_err(|e| e.to_string())?.len();
    ensure!(summary.cardinality == 704, "cardinality {}", summary.cardinality);
    ensure!(implementations == 704, "{implementations} implementations");
    ensure!(summary.pending == 0, "{} pending", summary.pending);
    let eval = evaluate_strategy(&store, space, &mut Exhaustive, 704, &ObjectiveSpec::default(), None)
        .map_err(|e| e.to_string())?;
    ensure!(eval.adrs == Some(0.0), "exhaustive adrs {:?}", eval.adrs);
    ensure!(eval.queries_used == 704, "exhaustive used {} queries", eval.queries_used);
    Ok(format!(
        "704 implementations, 0 pending, exhaustive adrs 0, K=8 (max in flight {}) in {t:.2?}",
        report.max_in_flight
    ))
}

fn crash_resume(dir: &Path) -> Outcome {
    let db = dir.join("resume.db");
    let csd = fixture_path("local_scan_704.csd");
    let bin = env!("CARGO_BIN_EXE_hlsdse");
    let cli = |extra: &[&str]| {
        let mut c = Command::new(bin);
        c.arg("--db").arg(&db).args(extra).env_remove("DB4HLS_JOBS").stdout(Stdio::null()).stderr(Stdio::null());
        c
    };
    ensure!(cli(&["init-db"]).status().map_err(|e| e.to_string())?.success(), "init-db failed");

    let log1 = dir.join("run1.jsonl");
    let log2 = dir.join("run2.jsonl");
    let mut child = cli(&["run", &csd, "--jobs", "8", "--mock-delay-ms", "10", "--log", log1.to_str().unwrap()])
        .spawn()
        .map_err(|e| e.to_string())?;
    let deadline = Instant::now() + Duration::from_secs(60);
    loop {
        let done = read_campaign_log(&log1).map(|ev| ev.iter().filter(|e| e.event != EventKind::Start).count());
        if done.unwrap_or(0) >= 352 || Instant::now() > deadline {
            break;
        }
        if child.try_wait().map_err(|e| e.to_string())?.is_some() {
            return Err("campaign finished before it could be killed".into());
        }
        thread::sleep(Duration::from_millis(2));
    }
    child.kill().map_err(|e| e.to_string())?;
    child.wait().map_err(|e| e.to_string())?;

    let store = Store::open(&db).map_err(|e| e.to_string())?;
    let space = store.spaces().map_err(|e| e.to_string())?[0].id;
    let all: HashSet<i64> = store.configurations(space).map_err(|e| e.to_string())?.iter().map(|c| c.id).collect();
    let committed: HashSet<i64> =
        store.implementations(space).map_err(|e| e.to_string())?.iter().map(|i| i.configuration_id).collect();
    let killed_at = committed.len();
    ensure!(killed_at > 0 && killed_at < 704, "kill landed at {killed_at} of 704");
    let logged_done: HashSet<i64> = read_campaign_log(&log1)
        .map_err(|e| e.to_string())?
        .iter()
        .filter(|e| e.event != EventKind::Start)
        .map(|e| e.configuration_id)
        .collect();
    ensure!(logged_done.is_subset(&committed), "log reports results the store does not hold");
    drop(store);

    let status =
        cli(&["run", &csd, "--jobs", "8", "--log", log2.to_str().unwrap()]).status().map_err(|e| e.to_string())?;
    ensure!(status.success(), "rerun failed");
    let starts: Vec<i64> = read_campaign_log(&log2)
        .map_err(|e| e.to_string())?
        .iter()
        .filter(|e| e.event == EventKind::Start)
        .map(|e| e.configuration_id)
        .collect();
    let attempted: HashSet<i64> = starts.iter().copied().collect();
    ensure!(attempted.len() == starts.len(), "rerun attempted a configuration twice");
    let complement: HashSet<i64> = all.difference(&committed).copied().collect();
    ensure!(
        attempted == complement,
        "rerun attempted {} configurations, complement has {}",
        attempted.len(),
        complement.len()
    );

    let store = Store::open(&db).map_err(|e| e.to_string())?;
    let imps = store.implementations(space).map_err(|e| e.to_string())?;
    let distinct: HashSet<i64> = imps.iter().map(|i| i.configuration_id).collect();
    ensure!(imps.len() == 704 && distinct.len() == 704, "{} rows over {} configurations", imps.len(), distinct.len());
    Ok(format!("killed at {killed_at}/704, rerun attempted exactly the {} remaining, 704 rows", complement.len()))
}

fn persistence_round_trip(dir: &Path) -> Outcome {
    let (store, space) = local_scan_store(&dir.join("export.db"));
    let mut backend = MockBackend::new(3);
    backend.fail_rate = 0.1;
    let mut campaign = Campaign::new(space, &backend);
    campaign.jobs = 4;
    run_campaign(&store, &campaign).map_err(|e| e.to_string())?;
    let objectives = ObjectiveSpec::parse("latency,latency_ns,ff,lut,bram,dsp", [1.0; 4]).unwrap();
    let original = store.fetch_points(space, &objectives, None).map_err(|e| e.to_string())?;
    let counts = store.table_counts().map_err(|e| e.to_string())?;
    let by_index = |s: &Store, id: i64| -> HashMap<i64, u64> {
        s.configurations(id).unwrap().into_iter().map(|c| (c.id, c.index)).collect()
    };
    let original_idx = by_index(&store, space);

    for format in [ExportFormat::JsonLines, ExportFormat::Sql] {
        let mut buf = Vec::new();
        store.export(space, format, &mut buf).map_err(|e| e.to_string())?;
        let fresh = Store::create_in_memory().map_err(|e| e.to_string())?;
        let report = fresh.import(&mut BufReader::new(buf.as_slice())).map_err(|e| format!("{format:?}: {e}"))?;
        let new_space = report.space_ids[0];
        ensure!(fresh.table_counts().unwrap() == counts, "{format:?}: row counts differ");
        let copy = fresh.fetch_points(new_space, &objectives, None).map_err(|e| e.to_string())?;
        ensure!(copy == original, "{format:?}: fetch_points differs");
        let copy_idx = by_index(&fresh, new_space);
        ensure!(
            original.iter().all(|p| original_idx[&p.configuration_id] == copy_idx[&p.configuration_id]),
            "{format:?}: configuration ids map to different indices"
        );
    }
    Ok(format!("jsonl and sql: identical counts over 9 tables, {} identical points", original.len()))
}

fn main() {
    let tmp = tempfile::tempdir().expect("temp dir");
    let criteria: Vec<(&str, Check)> = vec![
        ("cardinality reproduction", Box::new(cardinality_reproduction)),
        ("enumeration soundness", Box::new(enumeration_soundness)),
        ("pareto oracle equivalence", Box::new(pareto_oracle)),
        ("indicator identities", Box::new(indicator_identities)),
        ("end-to-end mock campaign", Box::new(|| mock_campaign(tmp.path()))),
        ("crash-resume", Box::new(|| crash_resume(tmp.path()))),
        ("persistence round-trip", Box::new(|| persistence_round_trip(tmp.path()))),
    ];
    let mut failed = 0;
    for (n, (name, check)) in criteria.iter().enumerate() {
        let outcome = std::panic::catch_unwind(std::panic::AssertUnwindSafe(check))
            .unwrap_or_else(|p| Err(p.downcast_ref::<String>().cloned().unwrap_or_else(|| "panicked".into())));
        match outcome {
            Ok(detail) => println!("PASS {}. {name}: {detail}", n + 1),
            Err(why) => {
                failed += 1;
                println!("FAIL {}. {name}: {why}", n + 1);
            }
        }
    }
    println!("acceptance: {} passed, {failed} failed", criteria.len() - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
