use std::fs::{File, OpenOptions};
use std::io::{BufRead, BufReader, Write};
use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicBool, AtomicUsize, Ordering};
use std::sync::{mpsc, Arc};
use std::thread;
use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::csd::{DirectiveKind, DirectiveRegistry, Value};
use crate::outcome::{iso_timestamp, ImplementationResult, Status, SynthesisInfo};
use crate::space::{build_index, Configuration};
use crate::store::{ConfigurationRecord, Store};

use super::backend::{Backend, Job};
use super::script::DesignMeta;
use super::OrchestratorError;

/// Shared stop flag. Workers finish their current job and take no new ones.
#[derive(Debug, Clone, Default)]
pub struct CancelToken(Arc<AtomicBool>);

impl CancelToken {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn cancel(&self) {
        self.0.store(true, Ordering::SeqCst);
    }

    pub fn is_cancelled(&self) -> bool {
        self.0.load(Ordering::SeqCst)
    }
}

pub struct Campaign<'a> {
    pub space_id: i64,
    pub backend: &'a dyn Backend,
    pub jobs: usize,
    pub contributor: String,
    pub registry: DirectiveRegistry,
    /// Defaults to the design's function name and source reference.
    pub design: Option<DesignMeta>,
    /// JSON-lines event log, appended to.
    pub log: Option<PathBuf>,
    pub cancel: CancelToken,
    /// Cancel once this many results are committed. Results that arrive
    /// afterwards are dropped, as if the process had died.
    pub stop_after: Option<u64>,
}

impl<'a> Campaign<'a> {
    pub fn new(space_id: i64, backend: &'a dyn Backend) -> Self {
        Campaign {
            space_id,
            backend,
            jobs: 1,
            contributor: "hlsdse".into(),
            registry: DirectiveRegistry::builtin(),
            design: None,
            log: None,
            cancel: CancelToken::new(),
            stop_after: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CampaignReport {
    pub space_id: i64,
    pub run_id: String,
    pub jobs: usize,
    pub pending_before: u64,
    /// Jobs handed to a worker.
    pub attempted: u64,
    pub ok: u64,
    pub failed: u64,
    pub timeout: u64,
    /// Finished after cancellation and not committed.
    pub abandoned: u64,
    pub pending_after: u64,
    pub max_in_flight: usize,
    pub cancelled: bool,
    pub wall_time_s: f64,
}

impl CampaignReport {
    pub fn committed(&self) -> u64 {
        self.ok + self.failed + self.timeout
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EventKind {
    Start,
    Done,
    Fail,
    Timeout,
}

/// One line of the campaign log.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LogEvent {
    pub event: EventKind,
    pub run: String,
    pub ts: String,
    pub configuration_id: i64,
    pub index: u64,
    pub config_key: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub worker: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub duration_s: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub diagnostic: Option<String>,
}

/// Read a campaign log, skipping a torn final line.
pub fn read_campaign_log(path: impl AsRef<Path>) -> std::io::Result<Vec<LogEvent>> {
    let mut out = Vec::new();
    for line in BufReader::new(File::open(path)?).lines() {
        let line = line?;
        if let Ok(ev) = serde_json::from_str(&line) {
            out.push(ev);
        }
    }
    Ok(out)
}

enum Msg {
    Start { job: usize, worker: usize },
    Done { job: usize, result: ImplementationResult, ack: mpsc::Sender<bool> },
}

struct EventLog {
    file: Option<File>,
    run: String,
}

impl EventLog {
    fn write(
        &mut self,
        event: EventKind,
        rec: &ConfigurationRecord,
        worker: Option<usize>,
        result: Option<&ImplementationResult>,
    ) -> std::io::Result<()> {
        let Some(file) = self.file.as_mut() else { return Ok(()) };
        let ev = LogEvent {
            event,
            run: self.run.clone(),
            ts: iso_timestamp(chrono::Utc::now()),
            configuration_id: rec.id,
            index: rec.index,
            config_key: rec.config_key.clone(),
            worker,
            duration_s: result.map(|r| r.duration_s),
            diagnostic: result.and_then(|r| r.diagnostic.clone()),
        };
        let mut line = serde_json::to_string(&ev).expect("event serializes");
        line.push('\n');
        file.write_all(line.as_bytes())
    }
}

fn clock_period(knobs: &[crate::csd::Knob], config: &Configuration) -> f64 {
    knobs
        .iter()
        .zip(&config.assignments)
        .find(|(k, _)| k.directive == DirectiveKind::Clock)
        .and_then(|(_, v)| v.first().and_then(Value::as_numeric))
        .map_or(super::mock::DEFAULT_CLOCK_NS, |p| p as f64)
}

/// Synthesize every pending configuration of a space with `jobs` workers.
///
/// The calling thread owns the store and commits each result before the
/// worker that produced it may take another configuration, so at most `jobs`
/// results are ever uncommitted.
pub fn run_campaign(store: &Store, campaign: &Campaign<'_>) -> Result<CampaignReport, OrchestratorError> {
    if campaign.jobs == 0 {
        return Err(OrchestratorError::NoWorkers);
    }
    let started = Instant::now();
    let tool = campaign.backend.tool().clone();
    let space = store.space(campaign.space_id)?;
    let index = build_index(&store.space_csd(space.id)?)?;
    let design = match &campaign.design {
        Some(d) => d.clone(),
        None => {
            let rec = store.design(space.design_id)?;
            DesignMeta { top_function: rec.function_name, design_src: rec.source_ref }
        }
    };

    let pending = store.pending_configurations(space.id, &tool)?;
    let mut work = Vec::with_capacity(pending.len());
    for rec in pending {
        let config = index.decode(rec.index)?;
        if config.config_key != rec.config_key {
            return Err(OrchestratorError::KeyMismatch {
                id: rec.id,
                stored: rec.config_key,
                derived: config.config_key,
            });
        }
        work.push((rec, config));
    }

    let run_id = format!("{}-{}", chrono::Utc::now().format("%Y%m%dT%H%M%S%.3fZ"), std::process::id());
    let file = match &campaign.log {
        Some(p) => Some(OpenOptions::new().create(true).append(true).open(p)?),
        None => None,
    };
    let mut log = EventLog { file, run: run_id.clone() };

    let mut report = CampaignReport {
        space_id: space.id,
        run_id,
        jobs: campaign.jobs,
        pending_before: work.len() as u64,
        attempted: 0,
        ok: 0,
        failed: 0,
        timeout: 0,
        abandoned: 0,
        pending_after: 0,
        max_in_flight: 0,
        cancelled: false,
        wall_time_s: 0.0,
    };

    let next = AtomicUsize::new(0);
    let in_flight = AtomicUsize::new(0);
    let max_in_flight = AtomicUsize::new(0);
    let abort = AtomicBool::new(false);
    let cancel = &campaign.cancel;
    let mut failure: Option<OrchestratorError> = None;

    thread::scope(|s| {
        let (tx, rx) = mpsc::channel::<Msg>();
        for worker in 0..campaign.jobs.min(work.len()) {
            let tx = tx.clone();
            let (work, index, design) = (&work, &index, &design);
            let (next, in_flight, max_in_flight, abort) = (&next, &in_flight, &max_in_flight, &abort);
            s.spawn(move || {
                let (ack_tx, ack_rx) = mpsc::channel::<bool>();
                loop {
                    if cancel.is_cancelled() || abort.load(Ordering::SeqCst) {
                        break;
                    }
                    let job = next.fetch_add(1, Ordering::SeqCst);
                    let Some((rec, config)) = work.get(job) else { break };
                    if tx.send(Msg::Start { job, worker }).is_err() {
                        break;
                    }
                    let now = in_flight.fetch_add(1, Ordering::SeqCst) + 1;
                    max_in_flight.fetch_max(now, Ordering::SeqCst);
                    let result = campaign.backend.synthesize(&Job {
                        configuration_id: rec.id,
                        config,
                        knobs: index.knobs(),
                        design,
                        registry: &campaign.registry,
                    });
                    in_flight.fetch_sub(1, Ordering::SeqCst);
                    if tx.send(Msg::Done { job, result, ack: ack_tx.clone() }).is_err() {
                        break;
                    }
                    if !matches!(ack_rx.recv(), Ok(true)) {
                        break;
                    }
                }
            });
        }
        drop(tx);

        for msg in rx {
            match msg {
                Msg::Start { job, worker } => {
                    report.attempted += 1;
                    if let Err(e) = log.write(EventKind::Start, &work[job].0, Some(worker), None) {
                        failure.get_or_insert(e.into());
                        abort.store(true, Ordering::SeqCst);
                    }
                }
                Msg::Done { job, result, ack } => {
                    if failure.is_some() || cancel.is_cancelled() {
                        report.abandoned += 1;
                        let _ = ack.send(false);
                        continue;
                    }
                    let (rec, config) = &work[job];
                    let info = SynthesisInfo::now(&campaign.contributor, &tool, clock_period(index.knobs(), config));
                    let committed =
                        store.record_result(rec.id, &result, &info).map_err(OrchestratorError::from).and_then(|_| {
                            let kind = match result.status {
                                Status::Ok => EventKind::Done,
                                Status::SynthError => EventKind::Fail,
                                Status::Timeout => EventKind::Timeout,
                            };
                            log.write(kind, rec, None, Some(&result)).map_err(OrchestratorError::from)
                        });
                    match committed {
                        Ok(()) => {
                            match result.status {
                                Status::Ok => report.ok += 1,
                                Status::SynthError => report.failed += 1,
                                Status::Timeout => report.timeout += 1,
                            }
                            if campaign.stop_after.is_some_and(|n| report.committed() >= n) {
                                cancel.cancel();
                            }
                            let _ = ack.send(true);
                        }
                        Err(e) => {
                            failure = Some(e);
                            abort.store(true, Ordering::SeqCst);
                            let _ = ack.send(false);
                        }
                    }
                }
            }
        }
    });

    if let Some(e) = failure {
        return Err(e);
    }
    report.cancelled = cancel.is_cancelled();
    report.max_in_flight = max_in_flight.load(Ordering::SeqCst);
    report.pending_after = store.pending_configurations(space.id, &tool)?.len() as u64;
    report.wall_time_s = started.elapsed().as_secs_f64();
    Ok(report)
}
