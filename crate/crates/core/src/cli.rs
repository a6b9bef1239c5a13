//! Command-line front end. Exit codes: 0 success, 1 domain error, 2 usage or
//! I/O error.

use std::collections::{BTreeMap, HashMap, HashSet};
use std::ffi::OsString;
use std::fs;
use std::io::{self, BufReader, Write};
use std::path::{Path, PathBuf};
use std::time::Duration;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Value as Json};

use crate::analytics::{
    adrs, evaluate_strategy, hypervolume_2d, pareto_front, AnalyticsError, DesignPoint, Exhaustive, HillClimb,
    ObjectiveSpec, ParetoFront, Strategy, UniformRandom,
};
use crate::csd::{parse_csd, Csd, DirectiveKind, ParseError};
use crate::orchestrator::{
    run_campaign, Backend, Campaign, DesignMeta, ExternalBackend, MockBackend, OrchestratorError, ReportFormat,
};
use crate::outcome::{Status, ToolFilter};
use crate::space::{build_index, cardinality, SpaceError};
use crate::store::{DesignSpec, ExportFormat, Store, StoreError};

#[derive(Debug, Parser)]
#[command(name = "hlsdse", version, about = "HLS design space exploration toolkit")]
struct Cli {
    /// Results database.
    #[arg(long, env = "DB4HLS_DB", default_value = "db4hls.sqlite", global = true)]
    db: PathBuf,
    #[arg(long, value_enum, default_value_t = OutputFormat::Text, global = true)]
    format: OutputFormat,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum OutputFormat {
    Text,
    Json,
    Csv,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Check a descriptor and report diagnostics.
    Validate { csd: PathBuf },
    /// Print the size of a descriptor's configuration space.
    Count { csd: PathBuf },
    /// List configurations of a descriptor.
    Expand(ExpandArgs),
    /// Create the database schema.
    InitDb,
    /// Register a space (if new) and synthesize its pending configurations.
    Run(Box<RunArgs>),
    /// List spaces, or the implementations of one space.
    Query(QueryArgs),
    /// Pareto fronts and quality indicators.
    Analyze(AnalyzeArgs),
    /// Write one space and its results to a file.
    Export(ExportArgs),
    /// Load an export into the database.
    Import { file: PathBuf },
}

#[derive(Debug, Args)]
struct ExpandArgs {
    csd: PathBuf,
    #[arg(long, default_value_t = 0)]
    offset: u64,
    #[arg(long)]
    limit: Option<u64>,
    /// Draw this many configurations uniformly without replacement.
    #[arg(long, conflicts_with_all = ["offset", "limit"])]
    sample: Option<u64>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum BackendKind {
    Mock,
    External,
}

#[derive(Debug, Args)]
struct RunArgs {
    csd: PathBuf,
    /// Top function; defaults to the function of the first knob.
    #[arg(long)]
    function: Option<String>,
    #[arg(long)]
    benchmark: Option<String>,
    #[arg(long)]
    algorithm: Option<String>,
    #[arg(long)]
    design: Option<String>,
    /// Design source handed to the tool.
    #[arg(long, default_value = "")]
    source: String,
    #[arg(long, default_value = "hlsdse")]
    contributor: String,
    #[arg(long, value_enum, default_value_t = BackendKind::Mock)]
    backend: BackendKind,
    #[arg(long, short = 'j', env = "DB4HLS_JOBS", default_value_t = 1)]
    jobs: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 0)]
    mock_delay_ms: u64,
    #[arg(long, default_value_t = 0.0)]
    fail_rate: f64,
    /// Shell command template with {config_dir}, {design_src} and {script}.
    #[arg(long)]
    command: Option<String>,
    /// Report path template, relative to the sandbox; may use {config_dir} and {top}.
    #[arg(long)]
    report: Option<String>,
    #[arg(long, default_value = "xml")]
    report_format: String,
    /// Parent of the per-configuration sandboxes.
    #[arg(long, default_value = "hlsdse-work")]
    work_dir: PathBuf,
    #[arg(long, default_value_t = 4 * 3600)]
    timeout_s: u64,
    #[arg(long)]
    tool_name: Option<String>,
    #[arg(long)]
    tool_version: Option<String>,
    #[arg(long)]
    part: Option<String>,
    /// JSON-lines campaign log.
    #[arg(long)]
    log: Option<PathBuf>,
    /// Stop taking work after this many committed results.
    #[arg(long)]
    stop_after: Option<u64>,
}

#[derive(Debug, Args)]
struct QueryArgs {
    #[arg(long)]
    space: Option<i64>,
    #[arg(long)]
    status: Option<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Mode {
    Pareto,
    Adrs,
    Hv,
    Eval,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum StrategyKind {
    Exhaustive,
    Random,
    HillClimb,
}

#[derive(Debug, Args)]
struct AnalyzeArgs {
    #[arg(value_enum)]
    mode: Mode,
    #[arg(long, required_unless_present = "points", conflicts_with = "points")]
    space: Option<i64>,
    /// CSV of points: an id column followed by one column per objective.
    #[arg(long)]
    points: Option<PathBuf>,
    #[arg(long, default_value = "latency,lut")]
    objectives: String,
    /// FF,LUT,BRAM,DSP weights for the `area` objectives.
    #[arg(long, default_value = "0,1,0,0")]
    weights: String,
    /// Approximation set for `adrs`: another space...
    #[arg(long, conflicts_with = "approx_points")]
    approx_space: Option<i64>,
    /// ...or a points CSV. Defaults to the reference itself.
    #[arg(long)]
    approx_points: Option<PathBuf>,
    /// Hypervolume reference point; defaults to 1.1 times the componentwise maximum.
    #[arg(long)]
    ref_point: Option<String>,
    #[arg(long, value_enum, default_value_t = StrategyKind::Random)]
    strategy: StrategyKind,
    /// Query budget as a fraction of the space size.
    #[arg(long, default_value_t = 0.1)]
    budget_frac: f64,
    /// Absolute query budget; overrides --budget-frac.
    #[arg(long)]
    budget: Option<usize>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Directory for points.csv and summary.json.
    #[arg(long)]
    out_dir: Option<PathBuf>,
    /// Also write a gnuplot data file (all points, then the front).
    #[arg(long, requires = "out_dir")]
    gnuplot: bool,
}

#[derive(Debug, Args)]
struct ExportArgs {
    #[arg(long)]
    space: i64,
    /// jsonl or sql.
    #[arg(long = "as", default_value = "jsonl")]
    as_format: String,
    /// Output file; standard output if absent.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug)]
pub struct CliError {
    pub code: i32,
    pub message: String,
}

impl CliError {
    fn domain(message: impl Into<String>) -> Self {
        CliError { code: 1, message: message.into() }
    }

    fn usage(message: impl Into<String>) -> Self {
        CliError { code: 2, message: message.into() }
    }
}

impl From<StoreError> for CliError {
    fn from(e: StoreError) -> Self {
        match e {
            StoreError::Io(_) => CliError::usage(e.to_string()),
            StoreError::NotInitialized => CliError::domain(format!("{e}; run `hlsdse init-db` first")),
            _ => CliError::domain(e.to_string()),
        }
    }
}

impl From<AnalyticsError> for CliError {
    fn from(e: AnalyticsError) -> Self {
        CliError::domain(e.to_string())
    }
}

impl From<SpaceError> for CliError {
    fn from(e: SpaceError) -> Self {
        CliError::domain(e.to_string())
    }
}

impl From<OrchestratorError> for CliError {
    fn from(e: OrchestratorError) -> Self {
        match e {
            OrchestratorError::Log(_) => CliError::usage(e.to_string()),
            _ => CliError::domain(e.to_string()),
        }
    }
}

impl From<io::Error> for CliError {
    fn from(e: io::Error) -> Self {
        CliError::usage(e.to_string())
    }
}

type Result<T> = std::result::Result<T, CliError>;

/// Parse `args` (including the program name) and run the command.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let text = e.render().to_string();
            let _ = if code == 0 { out.write_all(text.as_bytes()) } else { err.write_all(text.as_bytes()) };
            return code;
        }
    };
    let mut ctx = Ctx { format: cli.format, out, err };
    match dispatch(&cli, &mut ctx) {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(ctx.err, "error: {}", e.message);
            e.code
        }
    }
}

struct Ctx<'a> {
    format: OutputFormat,
    out: &'a mut dyn Write,
    err: &'a mut dyn Write,
}

impl Ctx<'_> {
    fn json(&mut self, v: &Json) -> Result<()> {
        writeln!(self.out, "{}", serde_json::to_string_pretty(v).expect("json serializes"))?;
        Ok(())
    }

    fn line(&mut self, s: impl AsRef<str>) -> Result<()> {
        writeln!(self.out, "{}", s.as_ref())?;
        Ok(())
    }
}

fn dispatch(cli: &Cli, ctx: &mut Ctx<'_>) -> Result<i32> {
    match &cli.command {
        Command::Validate { csd } => cmd_validate(csd, ctx),
        Command::Count { csd } => cmd_count(csd, ctx).map(|_| 0),
        Command::Expand(a) => cmd_expand(a, ctx).map(|_| 0),
        Command::InitDb => cmd_init_db(&cli.db, ctx).map(|_| 0),
        Command::Run(a) => cmd_run(&cli.db, a, ctx).map(|_| 0),
        Command::Query(a) => cmd_query(&cli.db, a, ctx).map(|_| 0),
        Command::Analyze(a) => cmd_analyze(&cli.db, a, ctx).map(|_| 0),
        Command::Export(a) => cmd_export(&cli.db, a, ctx).map(|_| 0),
        Command::Import { file } => cmd_import(&cli.db, file, ctx).map(|_| 0),
    }
}

fn read_text(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|e| CliError::usage(format!("{}: {e}", path.display())))
}

fn parse_error_message(path: &Path, e: &ParseError) -> Vec<String> {
    match e {
        ParseError::Invalid(diags) => diags
            .iter()
            .map(|d| match d.line {
                0 => format!("{}: {}", path.display(), d.kind),
                line => format!("{}:{line}: {}", path.display(), d.kind),
            })
            .collect(),
        ParseError::Syntax { line, column, message } | ParseError::MalformedValueSet { line, column, message } => {
            vec![format!("{}:{line}:{column}: {message}", path.display())]
        }
        other => match other.line() {
            Some(line) => vec![format!("{}:{line}: {other}", path.display())],
            None => vec![format!("{}: {other}", path.display())],
        },
    }
}

fn load_csd(path: &Path) -> Result<Csd> {
    let text = read_text(path)?;
    parse_csd(&text).map_err(|e| CliError::domain(parse_error_message(path, &e).join("\n")))
}

fn cmd_validate(path: &Path, ctx: &mut Ctx<'_>) -> Result<i32> {
    let text = read_text(path)?;
    match parse_csd(&text) {
        Ok(csd) => {
            match ctx.format {
                OutputFormat::Json => ctx.json(&json!({"valid": true, "knobs": csd.knobs.len(), "diagnostics": []}))?,
                OutputFormat::Csv => ctx.line("valid,knobs")?,
                OutputFormat::Text => ctx.line(format!("{}: ok ({} knobs)", path.display(), csd.knobs.len()))?,
            }
            if ctx.format == OutputFormat::Csv {
                ctx.line(format!("true,{}", csd.knobs.len()))?;
            }
            Ok(0)
        }
        Err(e) => {
            let messages = parse_error_message(path, &e);
            for m in &messages {
                writeln!(ctx.err, "{m}")?;
            }
            match ctx.format {
                OutputFormat::Json => ctx.json(&json!({"valid": false, "diagnostics": messages}))?,
                OutputFormat::Csv => ctx.line(format!("valid,knobs\nfalse,{}", 0))?,
                OutputFormat::Text => {}
            }
            Ok(1)
        }
    }
}

fn cmd_count(path: &Path, ctx: &mut Ctx<'_>) -> Result<()> {
    let n = cardinality(&load_csd(path)?)?;
    match ctx.format {
        OutputFormat::Json => ctx.json(&json!({ "cardinality": n })),
        OutputFormat::Csv => ctx.line(format!("cardinality\n{n}")),
        OutputFormat::Text => ctx.line(n.to_string()),
    }
}

fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

fn cmd_expand(a: &ExpandArgs, ctx: &mut Ctx<'_>) -> Result<()> {
    let index = build_index(&load_csd(&a.csd)?)?;
    let configs = match a.sample {
        Some(n) => index.sample(n, a.seed)?,
        None => {
            let end = a.limit.map_or(index.total, |l| a.offset.saturating_add(l).min(index.total));
            (a.offset.min(end)..end).map(|i| index.decode(i)).collect::<std::result::Result<Vec<_>, _>>()?
        }
    };
    match ctx.format {
        OutputFormat::Json => {
            let arr: Vec<Json> = configs
                .iter()
                .map(|c| json!({"index": c.index, "config_key": c.config_key, "directives": c.to_json()}))
                .collect();
            ctx.json(&Json::Array(arr))
        }
        OutputFormat::Csv => {
            let mut header = vec!["index".to_string(), "config_key".to_string()];
            header.extend(index.headers().iter().map(|h| csv_field(h)));
            ctx.line(header.join(","))?;
            for c in &configs {
                let mut row = vec![c.index.to_string(), c.config_key.clone()];
                for values in &c.assignments {
                    let joined: Vec<String> = values.iter().map(ToString::to_string).collect();
                    row.push(csv_field(&joined.join(" ")));
                }
                ctx.line(row.join(","))?;
            }
            Ok(())
        }
        OutputFormat::Text => {
            for c in &configs {
                ctx.line(format!("{}\t{}", c.index, c.key_text))?;
            }
            Ok(())
        }
    }
}

fn open_store(db: &Path) -> Result<Store> {
    let store = Store::open(db)?;
    store.ensure_initialized()?;
    Ok(store)
}

fn cmd_init_db(db: &Path, ctx: &mut Ctx<'_>) -> Result<()> {
    let store = Store::create(db)?;
    let version = store.schema_version()?;
    match ctx.format {
        OutputFormat::Json => ctx.json(&json!({"db": db.display().to_string(), "schema_version": version})),
        OutputFormat::Csv => ctx.line(format!("db,schema_version\n{},{version}", csv_field(&db.display().to_string()))),
        OutputFormat::Text => ctx.line(format!("initialized {} (schema version {version})", db.display())),
    }
}

fn cmd_run(db: &Path, a: &RunArgs, ctx: &mut Ctx<'_>) -> Result<()> {
    if a.jobs == 0 {
        return Err(CliError::usage("--jobs must be at least 1"));
    }
    let csd = load_csd(&a.csd)?;
    let store = open_store(db)?;

    let function = match &a.function {
        Some(f) => f.clone(),
        None => csd
            .knobs
            .iter()
            .find(|k| k.directive != DirectiveKind::Clock && !k.function.is_empty())
            .map(|k| k.function.clone())
            .ok_or_else(|| CliError::usage("no knob names a function; pass --function"))?,
    };
    let spec = DesignSpec {
        benchmark: a.benchmark.clone().unwrap_or_else(|| function.clone()),
        algorithm: a.algorithm.clone().unwrap_or_else(|| function.clone()),
        design: a.design.clone().unwrap_or_else(|| function.clone()),
        function: function.clone(),
        source_ref: a.source.clone(),
    };
    let design = store.ensure_design(&spec)?;
    let space = match store.find_space(design.id, &csd)? {
        Some(s) => s,
        None => store.register_space(design.id, &csd, &a.contributor)?,
    };

    let timeout = Duration::from_secs(a.timeout_s);
    let backend: Box<dyn Backend> = match a.backend {
        BackendKind::Mock => {
            if !(0.0..=1.0).contains(&a.fail_rate) {
                return Err(CliError::usage("--fail-rate must lie in [0, 1]"));
            }
            let mut m = MockBackend::new(a.seed);
            m.delay = Duration::from_millis(a.mock_delay_ms);
            m.fail_rate = a.fail_rate;
            m.timeout = timeout;
            m.tool = tool_filter(a, &m.tool);
            Box::new(m)
        }
        BackendKind::External => {
            let command = a.command.as_deref().ok_or_else(|| CliError::usage("--command is required"))?;
            let report = a.report.as_deref().ok_or_else(|| CliError::usage("--report is required"))?;
            let format: ReportFormat = a.report_format.parse().map_err(CliError::usage)?;
            let default_tool = ToolFilter::new("vivado_hls", "2018.2", "xczu9eg-ffvb1156-2-e");
            Box::new(
                ExternalBackend::new(tool_filter(a, &default_tool), command, report, format, &a.work_dir)?
                    .with_timeout(timeout),
            )
        }
    };

    let mut campaign = Campaign::new(space.id, backend.as_ref());
    campaign.jobs = a.jobs;
    campaign.contributor = a.contributor.clone();
    campaign.design = Some(DesignMeta { top_function: function, design_src: a.source.clone() });
    campaign.log = a.log.clone();
    campaign.stop_after = a.stop_after;
    let report = run_campaign(&store, &campaign)?;
    let summary = store.summary(space.id, backend.tool())?;

    match ctx.format {
        OutputFormat::Json => ctx.json(&json!({
            "space_id": space.id,
            "cardinality": summary.cardinality,
            "ok": report.ok,
            "failed": report.failed,
            "timeout": report.timeout,
            "pending": summary.pending,
            "attempted": report.attempted,
            "cancelled": report.cancelled,
            "max_in_flight": report.max_in_flight,
            "wall_time_s": report.wall_time_s,
            "run_id": report.run_id,
        })),
        OutputFormat::Csv => ctx.line(format!(
            "space_id,ok,failed,timeout,pending\n{},{},{},{},{}",
            space.id, report.ok, report.failed, report.timeout, summary.pending
        )),
        OutputFormat::Text => ctx.line(format!(
            "space {}: ok={} failed={} timeout={} pending={} ({} of {} configurations synthesized, {:.2}s)",
            space.id,
            report.ok,
            report.failed,
            report.timeout,
            summary.pending,
            summary.cardinality - summary.pending,
            summary.cardinality,
            report.wall_time_s
        )),
    }
}

fn tool_filter(a: &RunArgs, default: &ToolFilter) -> ToolFilter {
    ToolFilter {
        tool_name: a.tool_name.clone().unwrap_or_else(|| default.tool_name.clone()),
        tool_version: a.tool_version.clone().unwrap_or_else(|| default.tool_version.clone()),
        fpga_part: a.part.clone().unwrap_or_else(|| default.fpga_part.clone()),
    }
}

fn cmd_query(db: &Path, a: &QueryArgs, ctx: &mut Ctx<'_>) -> Result<()> {
    let store = open_store(db)?;
    let Some(space_id) = a.space else {
        let mut rows = Vec::new();
        for s in store.spaces()? {
            let design = store.design(s.design_id)?;
            let imps = store.implementations(s.id)?;
            let count = |st: Status| imps.iter().filter(|i| i.status == st).count();
            let covered: HashSet<i64> = imps.iter().map(|i| i.configuration_id).collect();
            rows.push(json!({
                "space_id": s.id,
                "design": design.name,
                "function": design.function_name,
                "cardinality": s.cardinality,
                "ok": count(Status::Ok),
                "synth_error": count(Status::SynthError),
                "timeout": count(Status::Timeout),
                "pending": s.cardinality - covered.len() as u64,
            }));
        }
        return emit_table(
            ctx,
            &["space_id", "design", "function", "cardinality", "ok", "synth_error", "timeout", "pending"],
            &rows,
        );
    };

    let status: Option<Status> = match &a.status {
        Some(s) => Some(s.parse().map_err(|_| CliError::usage(format!("unknown status `{s}`")))?),
        None => None,
    };
    let configs: HashMap<i64, (u64, String)> =
        store.configurations(space_id)?.into_iter().map(|c| (c.id, (c.index, c.key_text))).collect();
    let rows: Vec<Json> = store
        .implementations(space_id)?
        .into_iter()
        .filter(|i| status.is_none_or(|s| i.status == s))
        .map(|i| {
            let (index, key_text) = configs.get(&i.configuration_id).cloned().unwrap_or_default();
            json!({
                "implementation_id": i.id,
                "configuration_id": i.configuration_id,
                "index": index,
                "status": i.status.as_str(),
                "latency_cycles": i.performance.as_ref().map(|p| p.latency_cycles),
                "period_ns": i.performance.as_ref().map(|p| p.achieved_period_ns),
                "ff": i.resources.map(|r| r.ff),
                "lut": i.resources.map(|r| r.lut),
                "bram": i.resources.map(|r| r.bram),
                "dsp": i.resources.map(|r| r.dsp),
                "tool": format!("{} {} {}", i.info.tool_name, i.info.tool_version, i.info.fpga_part),
                "diagnostic": i.diagnostic,
                "key_text": key_text,
            })
        })
        .collect();
    emit_table(
        ctx,
        &[
            "implementation_id",
            "configuration_id",
            "index",
            "status",
            "latency_cycles",
            "period_ns",
            "ff",
            "lut",
            "bram",
            "dsp",
            "tool",
            "diagnostic",
            "key_text",
        ],
        &rows,
    )
}

fn cell(v: &Json) -> String {
    match v {
        Json::Null => String::new(),
        Json::String(s) => s.clone(),
        other => other.to_string(),
    }
}

fn emit_table(ctx: &mut Ctx<'_>, columns: &[&str], rows: &[Json]) -> Result<()> {
    match ctx.format {
        OutputFormat::Json => ctx.json(&Json::Array(rows.to_vec())),
        OutputFormat::Csv => {
            ctx.line(columns.join(","))?;
            for r in rows {
                let cells: Vec<String> = columns.iter().map(|c| csv_field(&cell(&r[*c]))).collect();
                ctx.line(cells.join(","))?;
            }
            Ok(())
        }
        OutputFormat::Text => {
            ctx.line(columns.join("\t"))?;
            for r in rows {
                let cells: Vec<String> = columns.iter().map(|c| cell(&r[*c])).collect();
                ctx.line(cells.join("\t"))?;
            }
            Ok(())
        }
    }
}

fn parse_floats(s: &str, what: &str) -> Result<Vec<f64>> {
    s.split(',')
        .map(|x| x.trim().parse::<f64>().map_err(|_| CliError::usage(format!("{what}: `{x}` is not a number"))))
        .collect()
}

/// Points CSV: header row, then `id,obj1,obj2,...` rows.
fn read_points_csv(path: &Path) -> Result<(Vec<String>, Vec<DesignPoint>)> {
    let text = read_text(path)?;
    let mut lines = text.lines().filter(|l| !l.trim().is_empty() && !l.starts_with('#'));
    let header = lines.next().ok_or_else(|| CliError::domain(format!("{}: empty points file", path.display())))?;
    let names: Vec<String> = header.split(',').skip(1).map(|s| s.trim().to_string()).collect();
    if names.is_empty() {
        return Err(CliError::domain(format!("{}: no objective columns", path.display())));
    }
    let mut points = Vec::new();
    for (n, line) in lines.enumerate() {
        let fields: Vec<&str> = line.split(',').map(str::trim).collect();
        let bad = || CliError::domain(format!("{}: malformed row {}", path.display(), n + 2));
        if fields.len() != names.len() + 1 {
            return Err(bad());
        }
        let id = fields[0].parse::<i64>().map_err(|_| bad())?;
        let objectives = fields[1..].iter().map(|f| f.parse::<f64>().map_err(|_| bad())).collect::<Result<_>>()?;
        points.push(DesignPoint::new(objectives, id));
    }
    Ok((names, points))
}

fn cmd_analyze(db: &Path, a: &AnalyzeArgs, ctx: &mut Ctx<'_>) -> Result<()> {
    let weights: [f64; 4] = parse_floats(&a.weights, "--weights")?
        .try_into()
        .map_err(|_| CliError::usage("--weights takes four values (ff,lut,bram,dsp)"))?;
    let objectives = ObjectiveSpec::parse(&a.objectives, weights)?;

    let store = match (a.space, a.approx_space, a.mode) {
        (Some(_), _, _) | (_, Some(_), _) | (_, _, Mode::Eval) => Some(open_store(db)?),
        _ => None,
    };
    let (names, points) = match (&a.points, a.space) {
        (Some(p), _) => read_points_csv(p)?,
        (None, Some(space)) => {
            let store = store.as_ref().expect("store opened for --space");
            (objectives.names().iter().map(|s| s.to_string()).collect(), store.fetch_points(space, &objectives, None)?)
        }
        (None, None) => return Err(CliError::usage("pass --space or --points")),
    };
    if points.is_empty() {
        return Err(CliError::domain("no successful implementations to analyze"));
    }
    let front = pareto_front(&points)?;

    let mut summary = BTreeMap::<&str, Json>::new();
    summary.insert("mode", json!(format!("{:?}", a.mode).to_lowercase()));
    summary.insert("space_id", json!(a.space));
    summary.insert("objectives", json!(names));
    summary.insert("n_points", json!(points.len()));
    summary.insert("front_size", json!(front.len()));
    summary.insert("adrs", Json::Null);
    summary.insert("hypervolume", Json::Null);
    summary.insert("queries", Json::Null);
    let mut queried: Option<HashSet<i64>> = None;

    match a.mode {
        Mode::Pareto => {}
        Mode::Adrs => {
            let approx = match (a.approx_space, &a.approx_points) {
                (Some(s), _) => {
                    store.as_ref().expect("store opened for --approx-space").fetch_points(s, &objectives, None)?
                }
                (None, Some(p)) => read_points_csv(p)?.1,
                (None, None) => points.clone(),
            };
            if approx.is_empty() {
                return Err(CliError::domain("approximation set is empty"));
            }
            let approx_front = pareto_front(&approx)?;
            summary.insert("adrs", json!(adrs(&front.points, &approx_front.points)?));
        }
        Mode::Hv => {
            let reference = match &a.ref_point {
                Some(r) => parse_floats(r, "--ref-point")?,
                None => default_ref_point(&points),
            };
            summary.insert("ref_point", json!(reference));
            summary.insert("hypervolume", json!(hypervolume_2d(&front.points, &reference)?));
        }
        Mode::Eval => {
            let space_id = a.space.ok_or_else(|| CliError::usage("eval needs --space"))?;
            let store = store.as_ref().expect("store opened for eval");
            let total = store.space(space_id)?.cardinality;
            let budget = match a.budget {
                Some(b) => b,
                None if a.budget_frac > 0.0 && a.budget_frac <= 1.0 => (a.budget_frac * total as f64).ceil() as usize,
                None => return Err(CliError::usage("--budget-frac must lie in (0, 1]")),
            };
            let mut strategy: Box<dyn Strategy> = match a.strategy {
                StrategyKind::Exhaustive => Box::new(Exhaustive),
                StrategyKind::Random => Box::new(UniformRandom { seed: a.seed }),
                StrategyKind::HillClimb => Box::new(HillClimb { seed: a.seed }),
            };
            let eval = evaluate_strategy(store, space_id, strategy.as_mut(), budget, &objectives, None)?;
            summary.insert("strategy", json!(eval.strategy));
            summary.insert("seed", json!(a.seed));
            summary.insert("budget", json!(budget));
            summary.insert("truncated", json!(eval.trace.truncated));
            summary.insert("queries", json!(eval.queries_used));
            summary.insert("adrs", json!(eval.adrs));
            summary.insert("approx_front_size", json!(eval.approx_front.as_ref().map(ParetoFront::len)));
            queried = Some(eval.trace.entries.iter().map(|(id, _)| *id).collect());
        }
    }

    let csv = points_csv(&names, &points, &front, queried.as_ref());
    let summary_json = json!(summary);
    if let Some(dir) = &a.out_dir {
        fs::create_dir_all(dir)?;
        fs::write(dir.join("points.csv"), &csv)?;
        fs::write(dir.join("summary.json"), serde_json::to_string_pretty(&summary_json).expect("json") + "\n")?;
        if a.gnuplot {
            fs::write(dir.join("front.dat"), gnuplot_data(&names, &points, &front))?;
        }
    }
    match ctx.format {
        OutputFormat::Json => ctx.json(&summary_json),
        OutputFormat::Csv => {
            ctx.out.write_all(csv.as_bytes())?;
            Ok(())
        }
        OutputFormat::Text => {
            for (k, v) in &summary {
                ctx.line(format!("{k}: {}", cell(v)))?;
            }
            Ok(())
        }
    }
}

fn default_ref_point(points: &[DesignPoint]) -> Vec<f64> {
    let dim = points[0].dim();
    (0..dim).map(|j| points.iter().map(|p| p.objectives[j]).fold(0.0, f64::max) * 1.1).collect()
}

fn points_csv(names: &[String], points: &[DesignPoint], front: &ParetoFront, queried: Option<&HashSet<i64>>) -> String {
    let on_front: HashSet<i64> = front.tied_ids.iter().flatten().copied().collect();
    let mut s = format!("configuration_id,{},on_front", names.join(","));
    if queried.is_some() {
        s.push_str(",queried");
    }
    s.push('\n');
    for p in points {
        let objs: Vec<String> = p.objectives.iter().map(|v| v.to_string()).collect();
        s.push_str(&format!(
            "{},{},{}",
            p.configuration_id,
            objs.join(","),
            on_front.contains(&p.configuration_id) as u8
        ));
        if let Some(q) = queried {
            s.push_str(&format!(",{}", q.contains(&p.configuration_id) as u8));
        }
        s.push('\n');
    }
    s
}

/// Two gnuplot data blocks: every point, then the front sorted on the first
/// objective (`index 0` and `index 1`).
fn gnuplot_data(names: &[String], points: &[DesignPoint], front: &ParetoFront) -> String {
    let mut s = format!("# all points: {} configuration_id\n", names.join(" "));
    for p in points {
        let objs: Vec<String> = p.objectives.iter().map(|v| v.to_string()).collect();
        s.push_str(&format!("{} {}\n", objs.join(" "), p.configuration_id));
    }
    s.push_str(&format!("\n\n# pareto front: {} configuration_id\n", names.join(" ")));
    for p in &front.points {
        let objs: Vec<String> = p.objectives.iter().map(|v| v.to_string()).collect();
        s.push_str(&format!("{} {}\n", objs.join(" "), p.configuration_id));
    }
    s
}

fn cmd_export(db: &Path, a: &ExportArgs, ctx: &mut Ctx<'_>) -> Result<()> {
    let format: ExportFormat = a.as_format.parse().map_err(CliError::usage)?;
    let store = open_store(db)?;
    let Some(path) = &a.out else {
        let n = store.export(a.space, format, &mut ctx.out)?;
        writeln!(ctx.err, "exported {n} records")?;
        return Ok(());
    };
    let mut file = io::BufWriter::new(fs::File::create(path)?);
    let n = store.export(a.space, format, &mut file)?;
    file.flush()?;
    match ctx.format {
        OutputFormat::Json => ctx.json(&json!({"records": n, "out": path.display().to_string()})),
        OutputFormat::Csv => ctx.line(format!("records,out\n{n},{}", csv_field(&path.display().to_string()))),
        OutputFormat::Text => ctx.line(format!("exported {n} records to {}", path.display())),
    }
}

fn cmd_import(db: &Path, file: &Path, ctx: &mut Ctx<'_>) -> Result<()> {
    let input = fs::File::open(file).map_err(|e| CliError::usage(format!("{}: {e}", file.display())))?;
    let store = Store::create(db)?;
    let report = store.import(&mut BufReader::new(input))?;
    match ctx.format {
        OutputFormat::Json => ctx.json(&json!({"space_ids": report.space_ids, "rows": report.rows})),
        OutputFormat::Csv => {
            ctx.line("table,rows")?;
            for (t, n) in &report.rows {
                ctx.line(format!("{t},{n}"))?;
            }
            Ok(())
        }
        OutputFormat::Text => {
            ctx.line(format!("imported spaces {:?}", report.space_ids))?;
            for (t, n) in &report.rows {
                ctx.line(format!("  {t}: {n}"))?;
            }
            Ok(())
        }
    }
}
