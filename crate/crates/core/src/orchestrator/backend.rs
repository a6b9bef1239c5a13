use std::fs;
use std::io;
use std::path::{Path, PathBuf};
use std::process::{Command, Stdio};
use std::thread;
use std::time::{Duration, Instant};

use crate::csd::{DirectiveRegistry, Knob};
use crate::outcome::{ImplementationResult, Status, ToolFilter};
use crate::space::Configuration;

use super::mock::{mock_synthesize, unit_hash};
use super::report::{parse_report, JsonReport, ReportFormat};
use super::script::{generate_directive_script, generate_run_script, DesignMeta};
use super::OrchestratorError;

pub const DEFAULT_TIMEOUT: Duration = Duration::from_secs(4 * 3600);

/// Everything a backend needs to synthesize one configuration.
pub struct Job<'a> {
    pub configuration_id: i64,
    pub config: &'a Configuration,
    pub knobs: &'a [Knob],
    pub design: &'a DesignMeta,
    pub registry: &'a DirectiveRegistry,
}

/// Runs one synthesis. Implementations must be shareable across workers and
/// must report failures as results rather than errors.
pub trait Backend: Send + Sync {
    fn tool(&self) -> &ToolFilter;
    fn synthesize(&self, job: &Job<'_>) -> ImplementationResult;
}

#[derive(Debug, Clone)]
pub struct MockBackend {
    pub tool: ToolFilter,
    pub seed: u64,
    /// Wall-clock time each synthesis pretends to take.
    pub delay: Duration,
    /// Fraction of configurations that fail with `synth_error`.
    pub fail_rate: f64,
    pub timeout: Duration,
}

impl MockBackend {
    pub fn new(seed: u64) -> Self {
        MockBackend {
            tool: ToolFilter::new("mock_hls", "1.0", "xczu9eg-ffvb1156-2-e"),
            seed,
            delay: Duration::ZERO,
            fail_rate: 0.0,
            timeout: DEFAULT_TIMEOUT,
        }
    }
}

impl Backend for MockBackend {
    fn tool(&self) -> &ToolFilter {
        &self.tool
    }

    fn synthesize(&self, job: &Job<'_>) -> ImplementationResult {
        let start = Instant::now();
        if self.delay > self.timeout {
            thread::sleep(self.timeout);
            return ImplementationResult::failed(Status::Timeout, format!("exceeded {:?}", self.timeout))
                .with_duration(start.elapsed().as_secs_f64());
        }
        thread::sleep(self.delay);
        let result = if unit_hash(self.seed, &["fail", &job.config.key_text]) < self.fail_rate {
            ImplementationResult::synth_error("mock synthesis failure")
        } else {
            mock_synthesize(job.knobs, job.config, self.seed)
        };
        // go through the report path so the mock exercises the same parsing
        let raw = serde_json::to_vec(&JsonReport::from_result(&result)).expect("report serializes");
        parse_report(&raw, ReportFormat::Json).with_duration(start.elapsed().as_secs_f64())
    }
}

/// Runs an external command in a per-configuration sandbox directory.
///
/// `command` is passed to `sh -c` after substituting `{config_dir}`,
/// `{design_src}` and `{script}`. `report_pattern` names the report file,
/// relative to the sandbox unless absolute, and may use `{config_dir}` and
/// `{top}`.
#[derive(Debug, Clone)]
pub struct ExternalBackend {
    pub tool: ToolFilter,
    pub command: String,
    pub report_pattern: String,
    pub report_format: ReportFormat,
    pub work_dir: PathBuf,
    pub timeout: Duration,
}

impl ExternalBackend {
    pub fn new(
        tool: ToolFilter,
        command: &str,
        report_pattern: &str,
        report_format: ReportFormat,
        work_dir: impl Into<PathBuf>,
    ) -> Result<Self, OrchestratorError> {
        if !command.contains("{script}") {
            return Err(OrchestratorError::Backend("command template must reference {script}".into()));
        }
        Ok(ExternalBackend {
            tool,
            command: command.to_string(),
            report_pattern: report_pattern.to_string(),
            report_format,
            work_dir: work_dir.into(),
            timeout: DEFAULT_TIMEOUT,
        })
    }

    pub fn with_timeout(mut self, timeout: Duration) -> Self {
        self.timeout = timeout;
        self
    }

    fn sandbox(&self, job: &Job<'_>) -> io::Result<PathBuf> {
        let dir = self.work_dir.join(&job.config.config_key);
        fs::create_dir_all(&dir)?;
        Ok(dir)
    }

    fn report_path(&self, dir: &Path, job: &Job<'_>) -> PathBuf {
        let p = self
            .report_pattern
            .replace("{config_dir}", &dir.to_string_lossy())
            .replace("{top}", &job.design.top_function);
        let p = PathBuf::from(p);
        if p.is_absolute() {
            p
        } else {
            dir.join(p)
        }
    }

    fn run(&self, job: &Job<'_>) -> Result<ImplementationResult, String> {
        let dir = self.sandbox(job).map_err(|e| format!("sandbox: {e}"))?;
        let directives = generate_directive_script(job.knobs, job.config, job.registry).map_err(|e| e.to_string())?;
        fs::write(dir.join("directives.tcl"), directives).map_err(|e| format!("directives.tcl: {e}"))?;
        let script = dir.join("script.tcl");
        fs::write(&script, generate_run_script(job.design, &self.tool.fpga_part))
            .map_err(|e| format!("script.tcl: {e}"))?;
        let report = self.report_path(&dir, job);
        let _ = fs::remove_file(&report);

        let command = self
            .command
            .replace("{config_dir}", &dir.to_string_lossy())
            .replace("{design_src}", &job.design.design_src)
            .replace("{script}", &script.to_string_lossy());
        let log = fs::File::create(dir.join("tool.log")).map_err(|e| format!("tool.log: {e}"))?;
        let log_err = log.try_clone().map_err(|e| e.to_string())?;
        let mut child = Command::new("sh")
            .arg("-c")
            .arg(&command)
            .current_dir(&dir)
            .stdin(Stdio::null())
            .stdout(log)
            .stderr(log_err)
            .spawn()
            .map_err(|e| format!("spawn failed: {e}"))?;

        let start = Instant::now();
        let status = loop {
            if let Some(status) = child.try_wait().map_err(|e| e.to_string())? {
                break status;
            }
            if start.elapsed() >= self.timeout {
                let _ = child.kill();
                let _ = child.wait();
                return Ok(ImplementationResult::failed(Status::Timeout, format!("killed after {:?}", self.timeout)));
            }
            thread::sleep(Duration::from_millis(20));
        };
        if !status.success() {
            return Ok(ImplementationResult::synth_error(format!("tool exited with {status}")));
        }
        let raw = fs::read(&report).map_err(|e| format!("report {}: {e}", report.display()))?;
        Ok(parse_report(&raw, self.report_format).with_report_ref(report.to_string_lossy()))
    }
}

impl Backend for ExternalBackend {
    fn tool(&self) -> &ToolFilter {
        &self.tool
    }

    fn synthesize(&self, job: &Job<'_>) -> ImplementationResult {
        let start = Instant::now();
        self.run(job).unwrap_or_else(ImplementationResult::synth_error).with_duration(start.elapsed().as_secs_f64())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::csd::parse_csd;
    use crate::space::build_index;

    fn with_job<R>(f: impl FnOnce(&Job<'_>) -> R) -> R {
        let idx = build_index(&parse_csd("unroll;f;l;{1,2}\nclock;{10}").unwrap()).unwrap();
        let config = idx.decode(1).unwrap();
        let design = DesignMeta { top_function: "f".into(), design_src: "f.c".into() };
        let registry = DirectiveRegistry::builtin();
        f(&Job { configuration_id: 1, config: &config, knobs: idx.knobs(), design: &design, registry: &registry })
    }

    fn external(dir: &Path, command: &str) -> ExternalBackend {
        ExternalBackend::new(ToolFilter::new("fake", "0", "part"), command, "report.json", ReportFormat::Json, dir)
            .unwrap()
    }

    #[test]
    fn mock_failures_and_timeouts() {
        with_job(|job| {
            let mut b = MockBackend::new(1);
            assert_eq!(b.synthesize(job).status, Status::Ok);
            b.fail_rate = 1.0;
            assert_eq!(b.synthesize(job).status, Status::SynthError);
            b.delay = Duration::from_millis(30);
            b.timeout = Duration::from_millis(1);
            assert_eq!(b.synthesize(job).status, Status::Timeout);
        });
    }

    #[test]
    fn external_tool_round_trip() {
        let tmp = tempfile::tempdir().unwrap();
        let b = external(
            tmp.path(),
            r#"grep -q "unroll -factor 2" directives.tcl && test -f {script} && echo '{"ff":1,"lut":2,"bram":0,"dsp":0,"lat":9,"period":4.5}' > report.json"#,
        );
        let r = with_job(|job| b.synthesize(job));
        assert_eq!(r.status, Status::Ok, "{:?}", r.diagnostic);
        assert_eq!(r.latency_cycles, Some(9));
        assert!(r.report_ref.unwrap().ends_with("report.json"));
    }

    #[test]
    fn external_tool_failures() {
        let tmp = tempfile::tempdir().unwrap();
        let r = with_job(|job| external(tmp.path(), "exit 3 # {script}").synthesize(job));
        assert_eq!(r.status, Status::SynthError);
        let r = with_job(|job| external(tmp.path(), "true {script}").synthesize(job));
        assert_eq!(r.status, Status::SynthError);
        assert!(r.diagnostic.unwrap().contains("report"));
        let r = with_job(|job| {
            external(tmp.path(), "sleep 5 # {script}").with_timeout(Duration::from_millis(100)).synthesize(job)
        });
        assert_eq!(r.status, Status::Timeout);
        assert!(r.duration_s < 4.0);
    }

    #[test]
    fn template_must_reference_script() {
        assert!(
            ExternalBackend::new(ToolFilter::new("a", "b", "c"), "vivado_hls", "r", ReportFormat::Json, ".").is_err()
        );
    }
}
