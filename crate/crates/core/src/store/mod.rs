//! Embedded relational store for explorations and their synthesis results.
//!
//! The schema (see `schema.sql`, also available as [`SCHEMA_SQL`]) follows the
//! benchmark → algorithm → design → configuration space → configuration →
//! implementation chain, with synthesis provenance, resources and
//! performance hanging off each implementation. Writes go through
//! `BEGIN IMMEDIATE` transactions so concurrent processes serialize on commit.

mod export;

use std::path::Path;
use std::time::Duration;

use rusqlite::{params, Connection, OptionalExtension, Transaction, TransactionBehavior};
use thiserror::Error;

use crate::analytics::{DesignPoint, ObjectiveSpec};
use crate::csd::{parse_csd, Csd, ParseError};
use crate::outcome::{iso_timestamp, ImplementationResult, ResourceUsage, Status, SynthesisInfo, ToolFilter};
use crate::space::{build_index, SpaceError};

pub use export::{ExportFormat, ImportReport};

pub const SCHEMA_SQL: &str = include_str!("schema.sql");
pub const SCHEMA_VERSION: i64 = 1;

/// Tables in dependency order.
pub const TABLES: [&str; 9] = [
    "benchmark",
    "algorithm",
    "design",
    "configuration_space",
    "configuration",
    "implementation",
    "synthesis_info",
    "resources",
    "performance",
];

#[derive(Debug, Error)]
pub enum StoreError {
    #[error("sqlite: {0}")]
    Sqlite(#[from] rusqlite::Error),
    #[error("schema version {found} is not supported (expected {expected})")]
    VersionMismatch { found: i64, expected: i64 },
    #[error("store is not initialized")]
    NotInitialized,
    #[error("design already has this configuration space (space {space_id})")]
    DuplicateSpace { space_id: i64 },
    #[error("unknown design {0}")]
    UnknownDesign(i64),
    #[error("unknown configuration space {0}")]
    UnknownSpace(i64),
    #[error("unknown configuration {0}")]
    UnknownConfiguration(i64),
    #[error("configuration {configuration_id} already has an ok implementation for this tool and part")]
    DuplicateOk { configuration_id: i64 },
    #[error("ok result is missing measurements")]
    InconsistentResult,
    #[error("stored descriptor does not parse: {0}")]
    Descriptor(#[from] ParseError),
    #[error(transparent)]
    Space(#[from] SpaceError),
    #[error("objective: {0}")]
    Objective(String),
    #[error("import failed after record {last_good:?}: {message}")]
    Import { last_good: Option<u64>, message: String },
    #[error("io: {0}")]
    Io(#[from] std::io::Error),
}

pub type Result<T, E = StoreError> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DesignSpec {
    pub benchmark: String,
    pub algorithm: String,
    pub design: String,
    pub function: String,
    pub source_ref: String,
}

impl DesignSpec {
    /// Benchmark, algorithm and design all named after the top function.
    pub fn for_function(function: &str) -> Self {
        DesignSpec {
            benchmark: function.to_string(),
            algorithm: function.to_string(),
            design: function.to_string(),
            function: function.to_string(),
            source_ref: String::new(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DesignRecord {
    pub id: i64,
    pub algorithm_id: i64,
    pub benchmark_id: i64,
    pub name: String,
    pub function_name: String,
    pub source_ref: String,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConfigurationSpaceRecord {
    pub id: i64,
    pub design_id: i64,
    pub csd_text: String,
    pub cardinality: u64,
    pub contributor: String,
    pub created_at: String,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConfigurationRecord {
    pub id: i64,
    pub space_id: i64,
    pub index: u64,
    pub config_key: String,
    pub key_text: String,
    /// `[{"knob": ..., "values": [...]}, ...]`
    pub directive_values: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PerformanceRecord {
    pub latency_cycles: u64,
    pub achieved_period_ns: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ImplementationRecord {
    pub id: i64,
    pub configuration_id: i64,
    pub status: Status,
    pub diagnostic: Option<String>,
    pub info: SynthesisInfo,
    pub duration_s: f64,
    pub report_ref: Option<String>,
    pub resources: Option<ResourceUsage>,
    pub performance: Option<PerformanceRecord>,
}

/// Per-space coverage under one tool filter.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct SpaceSummary {
    pub cardinality: u64,
    pub ok: u64,
    pub synth_error: u64,
    pub timeout: u64,
    pub pending: u64,
}

pub struct Store {
    conn: Connection,
}

impl Store {
    pub fn open(path: impl AsRef<Path>) -> Result<Self> {
        let conn = Connection::open(path)?;
        conn.busy_timeout(Duration::from_secs(30))?;
        conn.pragma_update(None, "journal_mode", "WAL")?;
        Self::configure(conn)
    }

    pub fn open_in_memory() -> Result<Self> {
        Self::configure(Connection::open_in_memory()?)
    }

    /// Open and initialize in one step.
    pub fn create(path: impl AsRef<Path>) -> Result<Self> {
        let store = Self::open(path)?;
        store.init_schema()?;
        Ok(store)
    }

    pub fn create_in_memory() -> Result<Self> {
        let store = Self::open_in_memory()?;
        store.init_schema()?;
        Ok(store)
    }

    fn configure(conn: Connection) -> Result<Self> {
        conn.pragma_update(None, "foreign_keys", "ON")?;
        conn.pragma_update(None, "synchronous", "NORMAL")?;
        Ok(Store { conn })
    }

    pub fn schema_version(&self) -> Result<i64> {
        Ok(self.conn.pragma_query_value(None, "user_version", |r| r.get(0))?)
    }

    /// Create all tables. Idempotent; refuses stores written by a newer schema.
    pub fn init_schema(&self) -> Result<()> {
        let found = self.schema_version()?;
        if found > SCHEMA_VERSION {
            return Err(StoreError::VersionMismatch { found, expected: SCHEMA_VERSION });
        }
        self.conn.execute_batch(SCHEMA_SQL)?;
        self.conn.pragma_update(None, "user_version", SCHEMA_VERSION)?;
        Ok(())
    }

    pub fn ensure_initialized(&self) -> Result<()> {
        match self.schema_version()? {
            0 => Err(StoreError::NotInitialized),
            SCHEMA_VERSION => Ok(()),
            found => Err(StoreError::VersionMismatch { found, expected: SCHEMA_VERSION }),
        }
    }

    pub fn table_names(&self) -> Result<Vec<String>> {
        let mut stmt = self.conn.prepare(
            "SELECT name FROM sqlite_master WHERE type = 'table' AND name NOT LIKE 'sqlite_%' ORDER BY name",
        )?;
        let names = stmt.query_map([], |r| r.get(0))?.collect::<rusqlite::Result<Vec<String>>>()?;
        Ok(names)
    }

    pub fn table_counts(&self) -> Result<Vec<(&'static str, u64)>> {
        TABLES
            .iter()
            .map(|t| {
                let n: i64 = self.conn.query_row(&format!("SELECT COUNT(*) FROM {t}"), [], |r| r.get(0))?;
                Ok((*t, n as u64))
            })
            .collect()
    }

    /// Rows whose parent reference does not resolve. Zero in a healthy store.
    pub fn orphan_rows(&self) -> Result<u64> {
        let checks = [
            ("algorithm", "benchmark_id", "benchmark"),
            ("design", "algorithm_id", "algorithm"),
            ("configuration_space", "design_id", "design"),
            ("configuration", "space_id", "configuration_space"),
            ("implementation", "configuration_id", "configuration"),
            ("synthesis_info", "implementation_id", "implementation"),
            ("resources", "implementation_id", "implementation"),
            ("performance", "implementation_id", "implementation"),
        ];
        let mut total = 0u64;
        for (child, fk, parent) in checks {
            let n: i64 = self.conn.query_row(
                &format!(
                    "SELECT COUNT(*) FROM {child} c WHERE NOT EXISTS (SELECT 1 FROM {parent} p WHERE p.id = c.{fk})"
                ),
                [],
                |r| r.get(0),
            )?;
            total += n as u64;
        }
        // every implementation carries its provenance
        let n: i64 = self.conn.query_row(
            "SELECT COUNT(*) FROM implementation i WHERE NOT EXISTS (SELECT 1 FROM synthesis_info s WHERE s.implementation_id = i.id)",
            [],
            |r| r.get(0),
        )?;
        Ok(total + n as u64)
    }

    pub fn ensure_design(&self, spec: &DesignSpec) -> Result<DesignRecord> {
        let tx = self.conn.unchecked_transaction()?;
        let record = ensure_design_in(&tx, spec)?;
        tx.commit()?;
        Ok(record)
    }

    pub fn design(&self, id: i64) -> Result<DesignRecord> {
        self.conn
            .query_row(
                "SELECT d.id, d.algorithm_id, a.benchmark_id, d.name, d.function_name, d.source_ref
                 FROM design d JOIN algorithm a ON a.id = d.algorithm_id WHERE d.id = ?1",
                [id],
                design_from_row,
            )
            .optional()?
            .ok_or(StoreError::UnknownDesign(id))
    }

    pub fn find_design(&self, spec: &DesignSpec) -> Result<Option<DesignRecord>> {
        Ok(self
            .conn
            .query_row(
                "SELECT d.id, d.algorithm_id, a.benchmark_id, d.name, d.function_name, d.source_ref
                 FROM design d JOIN algorithm a ON a.id = d.algorithm_id JOIN benchmark b ON b.id = a.benchmark_id
                 WHERE b.name = ?1 AND a.name = ?2 AND d.name = ?3",
                params![spec.benchmark, spec.algorithm, spec.design],
                design_from_row,
            )
            .optional()?)
    }

    /// Store a descriptor and materialize every configuration of its space,
    /// atomically.
    pub fn register_space(&self, design_id: i64, csd: &Csd, contributor: &str) -> Result<ConfigurationSpaceRecord> {
        self.design(design_id)?;
        let index = build_index(csd)?;
        let csd_text = csd.serialize();
        if let Some(existing) = self.find_space(design_id, csd)? {
            return Err(StoreError::DuplicateSpace { space_id: existing.id });
        }
        let total = i64::try_from(index.total).map_err(|_| StoreError::Space(SpaceError::Overflow))?;
        let created_at = iso_timestamp(chrono::Utc::now());

        let tx = self.conn.unchecked_transaction()?;
        tx.execute(
            "INSERT INTO configuration_space (design_id, csd_text, cardinality, contributor, created_at)
             VALUES (?1, ?2, ?3, ?4, ?5)",
            params![design_id, csd_text, total, contributor, created_at],
        )?;
        let space_id = tx.last_insert_rowid();
        {
            let mut stmt = tx.prepare(
                "INSERT INTO configuration (space_id, idx, config_key, key_text, directive_values)
                 VALUES (?1, ?2, ?3, ?4, ?5)",
            )?;
            for c in index.iter() {
                stmt.execute(params![space_id, c.index as i64, c.config_key, c.key_text, c.to_json().to_string()])?;
            }
        }
        tx.commit()?;
        Ok(ConfigurationSpaceRecord {
            id: space_id,
            design_id,
            csd_text,
            cardinality: index.total,
            contributor: contributor.to_string(),
            created_at,
        })
    }

    pub fn find_space(&self, design_id: i64, csd: &Csd) -> Result<Option<ConfigurationSpaceRecord>> {
        Ok(self
            .conn
            .query_row(
                "SELECT id, design_id, csd_text, cardinality, contributor, created_at
                 FROM configuration_space WHERE design_id = ?1 AND csd_text = ?2",
                params![design_id, csd.serialize()],
                space_from_row,
            )
            .optional()?)
    }

    pub fn space(&self, space_id: i64) -> Result<ConfigurationSpaceRecord> {
        self.conn
            .query_row(
                "SELECT id, design_id, csd_text, cardinality, contributor, created_at
                 FROM configuration_space WHERE id = ?1",
                [space_id],
                space_from_row,
            )
            .optional()?
            .ok_or(StoreError::UnknownSpace(space_id))
    }

    pub fn spaces(&self) -> Result<Vec<ConfigurationSpaceRecord>> {
        let mut stmt = self.conn.prepare(
            "SELECT id, design_id, csd_text, cardinality, contributor, created_at FROM configuration_space ORDER BY id",
        )?;
        let rows = stmt.query_map([], space_from_row)?.collect::<rusqlite::Result<Vec<_>>>()?;
        Ok(rows)
    }

    pub fn space_csd(&self, space_id: i64) -> Result<Csd> {
        Ok(parse_csd(&self.space(space_id)?.csd_text)?)
    }

    pub fn configurations(&self, space_id: i64) -> Result<Vec<ConfigurationRecord>> {
        self.space(space_id)?;
        let mut stmt = self.conn.prepare(
            "SELECT id, space_id, idx, config_key, key_text, directive_values
             FROM configuration WHERE space_id = ?1 ORDER BY idx",
        )?;
        let rows = stmt.query_map([space_id], config_from_row)?.collect::<rusqlite::Result<Vec<_>>>()?;
        Ok(rows)
    }

    pub fn configuration(&self, id: i64) -> Result<ConfigurationRecord> {
        self.conn
            .query_row(
                "SELECT id, space_id, idx, config_key, key_text, directive_values FROM configuration WHERE id = ?1",
                [id],
                config_from_row,
            )
            .optional()?
            .ok_or(StoreError::UnknownConfiguration(id))
    }

    /// Commit one synthesis outcome with its provenance, resources and
    /// performance rows in a single transaction.
    pub fn record_result(
        &self,
        configuration_id: i64,
        result: &ImplementationResult,
        info: &SynthesisInfo,
    ) -> Result<ImplementationRecord> {
        if !result.is_consistent() {
            return Err(StoreError::InconsistentResult);
        }
        let tx = Transaction::new_unchecked(&self.conn, TransactionBehavior::Immediate)?;
        let exists: Option<i64> =
            tx.query_row("SELECT id FROM configuration WHERE id = ?1", [configuration_id], |r| r.get(0)).optional()?;
        if exists.is_none() {
            return Err(StoreError::UnknownConfiguration(configuration_id));
        }
        if result.status == Status::Ok {
            let dup: i64 = tx.query_row(
                "SELECT COUNT(*) FROM implementation i JOIN synthesis_info s ON s.implementation_id = i.id
                 WHERE i.configuration_id = ?1 AND i.status = 'ok'
                   AND s.tool_name = ?2 AND s.tool_version = ?3 AND s.fpga_part = ?4",
                params![configuration_id, info.tool_name, info.tool_version, info.fpga_part],
                |r| r.get(0),
            )?;
            if dup > 0 {
                return Err(StoreError::DuplicateOk { configuration_id });
            }
        }

        tx.execute(
            "INSERT INTO implementation (configuration_id, status, diagnostic) VALUES (?1, ?2, ?3)",
            params![configuration_id, result.status.as_str(), result.diagnostic],
        )?;
        let id = tx.last_insert_rowid();
        tx.execute(
            "INSERT INTO synthesis_info (implementation_id, synthesized_at, contributor, tool_name, tool_version,
                                         fpga_part, clock_period_ns, duration_s, report_ref)
             VALUES (?1, ?2, ?3, ?4, ?5, ?6, ?7, ?8, ?9)",
            params![
                id,
                info.timestamp,
                info.contributor,
                info.tool_name,
                info.tool_version,
                info.fpga_part,
                info.clock_period_ns,
                result.duration_s,
                result.report_ref
            ],
        )?;
        let mut performance = None;
        let mut resources = None;
        if let (Status::Ok, Some(r), Some(lat), Some(period)) =
            (result.status, result.resources, result.latency_cycles, result.achieved_period_ns)
        {
            tx.execute(
                "INSERT INTO resources (implementation_id, ff, lut, bram, dsp) VALUES (?1, ?2, ?3, ?4, ?5)",
                params![id, r.ff as i64, r.lut as i64, r.bram as i64, r.dsp as i64],
            )?;
            tx.execute(
                "INSERT INTO performance (implementation_id, latency_cycles, achieved_period_ns) VALUES (?1, ?2, ?3)",
                params![id, lat as i64, period],
            )?;
            resources = Some(r);
            performance = Some(PerformanceRecord { latency_cycles: lat, achieved_period_ns: period });
        }
        tx.commit()?;
        Ok(ImplementationRecord {
            id,
            configuration_id,
            status: result.status,
            diagnostic: result.diagnostic.clone(),
            info: info.clone(),
            duration_s: result.duration_s,
            report_ref: result.report_ref.clone(),
            resources,
            performance,
        })
    }

    /// Configurations with no implementation (of any status) under `tool`,
    /// in index order. Failed syntheses are terminal and not retried.
    pub fn pending_configurations(&self, space_id: i64, tool: &ToolFilter) -> Result<Vec<ConfigurationRecord>> {
        self.space(space_id)?;
        let mut stmt = self.conn.prepare(
            "SELECT c.id, c.space_id, c.idx, c.config_key, c.key_text, c.directive_values
             FROM configuration c
             WHERE c.space_id = ?1 AND NOT EXISTS (
                 SELECT 1 FROM implementation i JOIN synthesis_info s ON s.implementation_id = i.id
                 WHERE i.configuration_id = c.id AND s.tool_name = ?2 AND s.tool_version = ?3 AND s.fpga_part = ?4)
             ORDER BY c.idx",
        )?;
        let rows = stmt
            .query_map(params![space_id, tool.tool_name, tool.tool_version, tool.fpga_part], config_from_row)?
            .collect::<rusqlite::Result<Vec<_>>>()?;
        Ok(rows)
    }

    pub fn summary(&self, space_id: i64, tool: &ToolFilter) -> Result<SpaceSummary> {
        let space = self.space(space_id)?;
        let mut summary = SpaceSummary { cardinality: space.cardinality, ..Default::default() };
        let mut stmt = self.conn.prepare(
            "SELECT i.status, COUNT(DISTINCT i.configuration_id) FROM implementation i
             JOIN configuration c ON c.id = i.configuration_id
             JOIN synthesis_info s ON s.implementation_id = i.id
             WHERE c.space_id = ?1 AND s.tool_name = ?2 AND s.tool_version = ?3 AND s.fpga_part = ?4
             GROUP BY i.status",
        )?;
        let rows = stmt.query_map(params![space_id, tool.tool_name, tool.tool_version, tool.fpga_part], |r| {
            Ok((r.get::<_, String>(0)?, r.get::<_, i64>(1)?))
        })?;
        for row in rows {
            let (status, n) = row?;
            match status.as_str() {
                "ok" => summary.ok = n as u64,
                "synth_error" => summary.synth_error = n as u64,
                _ => summary.timeout = n as u64,
            }
        }
        summary.pending = self.pending_configurations(space_id, tool)?.len() as u64;
        Ok(summary)
    }

    pub fn implementations(&self, space_id: i64) -> Result<Vec<ImplementationRecord>> {
        self.space(space_id)?;
        let mut stmt = self.conn.prepare(
            "SELECT i.id, i.configuration_id, i.status, i.diagnostic,
                    s.synthesized_at, s.contributor, s.tool_name, s.tool_version, s.fpga_part, s.clock_period_ns,
                    s.duration_s, s.report_ref,
                    r.ff, r.lut, r.bram, r.dsp, p.latency_cycles, p.achieved_period_ns
             FROM implementation i
             JOIN configuration c ON c.id = i.configuration_id
             JOIN synthesis_info s ON s.implementation_id = i.id
             LEFT JOIN resources r ON r.implementation_id = i.id
             LEFT JOIN performance p ON p.implementation_id = i.id
             WHERE c.space_id = ?1
             ORDER BY c.idx, i.id",
        )?;
        let rows = stmt
            .query_map([space_id], |r| {
                let status: String = r.get(2)?;
                let ff: Option<i64> = r.get(12)?;
                let lat: Option<i64> = r.get(16)?;
                Ok(ImplementationRecord {
                    id: r.get(0)?,
                    configuration_id: r.get(1)?,
                    status: status.parse().unwrap_or(Status::SynthError),
                    diagnostic: r.get(3)?,
                    info: SynthesisInfo {
                        timestamp: r.get(4)?,
                        contributor: r.get(5)?,
                        tool_name: r.get(6)?,
                        tool_version: r.get(7)?,
                        fpga_part: r.get(8)?,
                        clock_period_ns: r.get(9)?,
                    },
                    duration_s: r.get(10)?,
                    report_ref: r.get(11)?,
                    resources: match ff {
                        Some(ff) => Some(ResourceUsage {
                            ff: ff as u64,
                            lut: r.get::<_, i64>(13)? as u64,
                            bram: r.get::<_, i64>(14)? as u64,
                            dsp: r.get::<_, i64>(15)? as u64,
                        }),
                        None => None,
                    },
                    performance: match lat {
                        Some(lat) => {
                            Some(PerformanceRecord { latency_cycles: lat as u64, achieved_period_ns: r.get(17)? })
                        }
                        None => None,
                    },
                })
            })?
            .collect::<rusqlite::Result<Vec<_>>>()?;
        Ok(rows)
    }

    /// One design point per ok implementation, in configuration index order.
    pub fn fetch_points(
        &self,
        space_id: i64,
        objectives: &ObjectiveSpec,
        tool: Option<&ToolFilter>,
    ) -> Result<Vec<DesignPoint>> {
        if objectives.0.is_empty() {
            return Err(StoreError::Objective("no objectives requested".into()));
        }
        let points = self
            .implementations(space_id)?
            .into_iter()
            .filter(|i| i.status == Status::Ok)
            .filter(|i| tool.is_none_or(|t| &i.info.tool() == t))
            .filter_map(|i| {
                let (r, p) = (i.resources?, i.performance?);
                Some(DesignPoint::new(
                    objectives.evaluate(&r, p.latency_cycles, p.achieved_period_ns),
                    i.configuration_id,
                ))
            })
            .collect();
        Ok(points)
    }

    pub(crate) fn conn(&self) -> &Connection {
        &self.conn
    }
}

pub(crate) fn ensure_design_in(conn: &Connection, spec: &DesignSpec) -> Result<DesignRecord> {
    conn.execute("INSERT OR IGNORE INTO benchmark (name) VALUES (?1)", [&spec.benchmark])?;
    let benchmark_id: i64 =
        conn.query_row("SELECT id FROM benchmark WHERE name = ?1", [&spec.benchmark], |r| r.get(0))?;
    conn.execute(
        "INSERT OR IGNORE INTO algorithm (benchmark_id, name) VALUES (?1, ?2)",
        params![benchmark_id, spec.algorithm],
    )?;
    let algorithm_id: i64 = conn.query_row(
        "SELECT id FROM algorithm WHERE benchmark_id = ?1 AND name = ?2",
        params![benchmark_id, spec.algorithm],
        |r| r.get(0),
    )?;
    conn.execute(
        "INSERT OR IGNORE INTO design (algorithm_id, name, function_name, source_ref) VALUES (?1, ?2, ?3, ?4)",
        params![algorithm_id, spec.design, spec.function, spec.source_ref],
    )?;
    Ok(conn.query_row(
        "SELECT d.id, d.algorithm_id, a.benchmark_id, d.name, d.function_name, d.source_ref
         FROM design d JOIN algorithm a ON a.id = d.algorithm_id WHERE d.algorithm_id = ?1 AND d.name = ?2",
        params![algorithm_id, spec.design],
        design_from_row,
    )?)
}

fn design_from_row(r: &rusqlite::Row<'_>) -> rusqlite::Result<DesignRecord> {
    Ok(DesignRecord {
        id: r.get(0)?,
        algorithm_id: r.get(1)?,
        benchmark_id: r.get(2)?,
        name: r.get(3)?,
        function_name: r.get(4)?,
        source_ref: r.get(5)?,
    })
}

fn space_from_row(r: &rusqlite::Row<'_>) -> rusqlite::Result<ConfigurationSpaceRecord> {
    Ok(ConfigurationSpaceRecord {
        id: r.get(0)?,
        design_id: r.get(1)?,
        csd_text: r.get(2)?,
        cardinality: r.get::<_, i64>(3)? as u64,
        contributor: r.get(4)?,
        created_at: r.get(5)?,
    })
}

fn config_from_row(r: &rusqlite::Row<'_>) -> rusqlite::Result<ConfigurationRecord> {
    Ok(ConfigurationRecord {
        id: r.get(0)?,
        space_id: r.get(1)?,
        index: r.get::<_, i64>(2)? as u64,
        config_key: r.get(3)?,
        key_text: r.get(4)?,
        directive_values: r.get(5)?,
    })
}
