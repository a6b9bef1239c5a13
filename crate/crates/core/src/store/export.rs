//! Export/import of one configuration space with everything hanging off it.
//!
//! JSON-lines: one object per row with a `"table"` discriminator, framed by a
//! `header` line and a `trailer` line carrying the record count so truncated
//! streams are detected. SQL: the DDL followed by `INSERT` statements with
//! ids preserved, loadable into an empty store.

use std::collections::{BTreeMap, HashMap};
use std::io::{BufRead, Write};

use rusqlite::{params, Connection};
use serde::{Deserialize, Serialize};

use super::{ensure_design_in, DesignSpec, Result, Store, StoreError, SCHEMA_SQL, SCHEMA_VERSION};
use crate::csd::parse_csd;
use crate::outcome::{iso_timestamp, Status};
use crate::space::cardinality;

const JSONL_FORMAT: &str = "hlsdse-jsonl";
const SQL_MARKER: &str = "-- hlsdse-sql schema_version=";

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExportFormat {
    JsonLines,
    Sql,
}

impl std::str::FromStr for ExportFormat {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "jsonl" | "json-lines" | "json" => Ok(ExportFormat::JsonLines),
            "sql" => Ok(ExportFormat::Sql),
            other => Err(format!("unknown export format `{other}` (expected jsonl or sql)")),
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ImportReport {
    /// Ids assigned to the imported spaces in the receiving store.
    pub space_ids: Vec<i64>,
    /// Rows inserted per table.
    pub rows: BTreeMap<String, u64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "table", rename_all = "snake_case")]
enum Row {
    Header {
        format: String,
        schema_version: i64,
        exported_at: String,
    },
    Benchmark {
        id: i64,
        name: String,
    },
    Algorithm {
        id: i64,
        benchmark_id: i64,
        name: String,
    },
    Design {
        id: i64,
        algorithm_id: i64,
        name: String,
        function_name: String,
        source_ref: String,
    },
    ConfigurationSpace {
        id: i64,
        design_id: i64,
        csd_text: String,
        cardinality: i64,
        contributor: String,
        created_at: String,
    },
    Configuration {
        id: i64,
        space_id: i64,
        idx: i64,
        config_key: String,
        key_text: String,
        directive_values: String,
    },
    Implementation {
        id: i64,
        configuration_id: i64,
        status: Status,
        diagnostic: Option<String>,
    },
    SynthesisInfo {
        id: i64,
        implementation_id: i64,
        synthesized_at: String,
        contributor: String,
        tool_name: String,
        tool_version: String,
        fpga_part: String,
        clock_period_ns: f64,
        duration_s: f64,
        report_ref: Option<String>,
    },
    Resources {
        id: i64,
        implementation_id: i64,
        ff: i64,
        lut: i64,
        bram: i64,
        dsp: i64,
    },
    Performance {
        id: i64,
        implementation_id: i64,
        latency_cycles: i64,
        achieved_period_ns: f64,
    },
    Trailer {
        records: u64,
    },
}

impl Row {
    fn table(&self) -> &'static str {
        match self {
            Row::Header { .. } => "header",
            Row::Benchmark { .. } => "benchmark",
            Row::Algorithm { .. } => "algorithm",
            Row::Design { .. } => "design",
            Row::ConfigurationSpace { .. } => "configuration_space",
            Row::Configuration { .. } => "configuration",
            Row::Implementation { .. } => "implementation",
            Row::SynthesisInfo { .. } => "synthesis_info",
            Row::Resources { .. } => "resources",
            Row::Performance { .. } => "performance",
            Row::Trailer { .. } => "trailer",
        }
    }
}

impl Store {
    pub fn export(&self, space_id: i64, format: ExportFormat, out: &mut impl Write) -> Result<u64> {
        let rows = self.collect_rows(space_id)?;
        match format {
            ExportFormat::JsonLines => {
                let header = Row::Header {
                    format: JSONL_FORMAT.into(),
                    schema_version: SCHEMA_VERSION,
                    exported_at: iso_timestamp(chrono::Utc::now()),
                };
                writeln!(out, "{}", to_json(&header))?;
                for row in &rows {
                    writeln!(out, "{}", to_json(row))?;
                }
                writeln!(out, "{}", to_json(&Row::Trailer { records: rows.len() as u64 }))?;
            }
            ExportFormat::Sql => {
                writeln!(out, "{SQL_MARKER}{SCHEMA_VERSION}")?;
                out.write_all(SCHEMA_SQL.as_bytes())?;
                writeln!(out)?;
                for row in &rows {
                    writeln!(out, "{}", sql_insert(row))?;
                }
            }
        }
        out.flush()?;
        Ok(rows.len() as u64)
    }

    fn collect_rows(&self, space_id: i64) -> Result<Vec<Row>> {
        let space = self.space(space_id)?;
        let design = self.design(space.design_id)?;
        let conn = self.conn();
        let mut rows = Vec::new();

        rows.push(conn.query_row("SELECT id, name FROM benchmark WHERE id = ?1", [design.benchmark_id], |r| {
            Ok(Row::Benchmark { id: r.get(0)?, name: r.get(1)? })
        })?);
        rows.push(conn.query_row(
            "SELECT id, benchmark_id, name FROM algorithm WHERE id = ?1",
            [design.algorithm_id],
            |r| Ok(Row::Algorithm { id: r.get(0)?, benchmark_id: r.get(1)?, name: r.get(2)? }),
        )?);
        rows.push(Row::Design {
            id: design.id,
            algorithm_id: design.algorithm_id,
            name: design.name,
            function_name: design.function_name,
            source_ref: design.source_ref,
        });
        rows.push(Row::ConfigurationSpace {
            id: space.id,
            design_id: space.design_id,
            csd_text: space.csd_text,
            cardinality: space.cardinality as i64,
            contributor: space.contributor,
            created_at: space.created_at,
        });

        let scoped = |sql: &str, f: fn(&rusqlite::Row<'_>) -> rusqlite::Result<Row>| -> Result<Vec<Row>> {
            let mut stmt = conn.prepare(sql)?;
            let out = stmt.query_map([space_id], f)?.collect::<rusqlite::Result<Vec<_>>>()?;
            Ok(out)
        };
        rows.extend(scoped(
            "SELECT id, space_id, idx, config_key, key_text, directive_values FROM configuration
             WHERE space_id = ?1 ORDER BY id",
            |r| {
                Ok(Row::Configuration {
                    id: r.get(0)?,
                    space_id: r.get(1)?,
                    idx: r.get(2)?,
                    config_key: r.get(3)?,
                    key_text: r.get(4)?,
                    directive_values: r.get(5)?,
                })
            },
        )?);
        const IMPLS: &str = "SELECT i.id FROM implementation i JOIN configuration c ON c.id = i.configuration_id
                             WHERE c.space_id = ?1";
        rows.extend(scoped(
            &format!(
                "SELECT id, configuration_id, status, diagnostic FROM implementation WHERE id IN ({IMPLS}) ORDER BY id"
            ),
            |r| {
                let status: String = r.get(2)?;
                Ok(Row::Implementation {
                    id: r.get(0)?,
                    configuration_id: r.get(1)?,
                    status: status.parse().map_err(|e: String| {
                        rusqlite::Error::FromSqlConversionFailure(2, rusqlite::types::Type::Text, e.into())
                    })?,
                    diagnostic: r.get(3)?,
                })
            },
        )?);
        rows.extend(scoped(
            &format!(
                "SELECT id, implementation_id, synthesized_at, contributor, tool_name, tool_version, fpga_part,
                        clock_period_ns, duration_s, report_ref
                 FROM synthesis_info WHERE implementation_id IN ({IMPLS}) ORDER BY id"
            ),
            |r| {
                Ok(Row::SynthesisInfo {
                    id: r.get(0)?,
                    implementation_id: r.get(1)?,
                    synthesized_at: r.get(2)?,
                    contributor: r.get(3)?,
                    tool_name: r.get(4)?,
                    tool_version: r.get(5)?,
                    fpga_part: r.get(6)?,
                    clock_period_ns: r.get(7)?,
                    duration_s: r.get(8)?,
                    report_ref: r.get(9)?,
                })
            },
        )?);
        rows.extend(scoped(
            &format!(
                "SELECT id, implementation_id, ff, lut, bram, dsp FROM resources
                 WHERE implementation_id IN ({IMPLS}) ORDER BY id"
            ),
            |r| {
                Ok(Row::Resources {
                    id: r.get(0)?,
                    implementation_id: r.get(1)?,
                    ff: r.get(2)?,
                    lut: r.get(3)?,
                    bram: r.get(4)?,
                    dsp: r.get(5)?,
                })
            },
        )?);
        rows.extend(scoped(
            &format!(
                "SELECT id, implementation_id, latency_cycles, achieved_period_ns FROM performance
                 WHERE implementation_id IN ({IMPLS}) ORDER BY id"
            ),
            |r| {
                Ok(Row::Performance {
                    id: r.get(0)?,
                    implementation_id: r.get(1)?,
                    latency_cycles: r.get(2)?,
                    achieved_period_ns: r.get(3)?,
                })
            },
        )?);
        Ok(rows)
    }

    /// Import a stream produced by [`Store::export`]. The format is detected
    /// from the first line. Nothing is committed unless the whole stream
    /// imports cleanly.
    pub fn import(&self, input: &mut impl BufRead) -> Result<ImportReport> {
        self.ensure_initialized()?;
        let mut text = String::new();
        input.read_to_string(&mut text)?;
        let first = text.lines().find(|l| !l.trim().is_empty()).unwrap_or("");
        if first.trim_start().starts_with('{') {
            self.import_jsonl(&text)
        } else {
            self.import_sql(&text)
        }
    }

    fn import_sql(&self, text: &str) -> Result<ImportReport> {
        let import_err = |message: String| StoreError::Import { last_good: None, message };
        let version = text
            .lines()
            .next()
            .and_then(|l| l.strip_prefix(SQL_MARKER))
            .and_then(|v| v.trim().parse::<i64>().ok())
            .ok_or_else(|| import_err("missing SQL export marker line".into()))?;
        if version != SCHEMA_VERSION {
            return Err(StoreError::VersionMismatch { found: version, expected: SCHEMA_VERSION });
        }
        let before = self.table_counts()?;
        let spaces_before: Vec<i64> = self.spaces()?.iter().map(|s| s.id).collect();
        let tx = self.conn().unchecked_transaction()?;
        tx.execute_batch(text).map_err(|e| import_err(e.to_string()))?;
        check_imported(&tx).map_err(import_err)?;
        tx.commit()?;

        let mut report = ImportReport::default();
        for ((table, b), (_, a)) in before.iter().zip(self.table_counts()?) {
            report.rows.insert(table.to_string(), a - b);
        }
        report.space_ids = self.spaces()?.iter().map(|s| s.id).filter(|id| !spaces_before.contains(id)).collect();
        Ok(report)
    }

    fn import_jsonl(&self, text: &str) -> Result<ImportReport> {
        let tx = self.conn().unchecked_transaction()?;
        let mut report = ImportReport::default();
        let mut ids: HashMap<(&'static str, i64), i64> = HashMap::new();
        let mut last_good: Option<u64> = None;
        let mut records = 0u64;
        let mut seen_header = false;
        let mut seen_trailer = false;

        let fail = |last_good: Option<u64>, message: String| StoreError::Import { last_good, message };

        for (n, line) in text.lines().enumerate() {
            if line.trim().is_empty() {
                continue;
            }
            if seen_trailer {
                return Err(fail(last_good, format!("line {}: data after trailer", n + 1)));
            }
            let row: Row = serde_json::from_str(line).map_err(|e| fail(last_good, format!("line {}: {e}", n + 1)))?;
            let parent = |ids: &HashMap<(&'static str, i64), i64>, table: &'static str, id: i64| {
                ids.get(&(table, id))
                    .copied()
                    .ok_or_else(|| fail(last_good, format!("line {}: references unknown {table} {id}", n + 1)))
            };

            let new_id = match &row {
                Row::Header { format, schema_version, .. } => {
                    if format != JSONL_FORMAT {
                        return Err(fail(last_good, format!("unknown stream format `{format}`")));
                    }
                    if *schema_version != SCHEMA_VERSION {
                        return Err(StoreError::VersionMismatch { found: *schema_version, expected: SCHEMA_VERSION });
                    }
                    seen_header = true;
                    continue;
                }
                Row::Trailer { records: expected } => {
                    if *expected != records {
                        return Err(fail(last_good, format!("trailer announces {expected} records, read {records}")));
                    }
                    seen_trailer = true;
                    continue;
                }
                _ if !seen_header => return Err(fail(last_good, "stream does not start with a header".into())),
                Row::Benchmark { name, .. } => {
                    tx.execute("INSERT OR IGNORE INTO benchmark (name) VALUES (?1)", [name])?;
                    tx.query_row("SELECT id FROM benchmark WHERE name = ?1", [name], |r| r.get(0))?
                }
                Row::Algorithm { benchmark_id, name, .. } => {
                    let b = parent(&ids, "benchmark", *benchmark_id)?;
                    tx.execute(
                        "INSERT OR IGNORE INTO algorithm (benchmark_id, name) VALUES (?1, ?2)",
                        params![b, name],
                    )?;
                    tx.query_row(
                        "SELECT id FROM algorithm WHERE benchmark_id = ?1 AND name = ?2",
                        params![b, name],
                        |r| r.get(0),
                    )?
                }
                Row::Design { algorithm_id, name, function_name, source_ref, .. } => {
                    let a = parent(&ids, "algorithm", *algorithm_id)?;
                    let (benchmark, algorithm): (String, String) = tx.query_row(
                        "SELECT b.name, a.name FROM algorithm a JOIN benchmark b ON b.id = a.benchmark_id WHERE a.id = ?1",
                        [a],
                        |r| Ok((r.get(0)?, r.get(1)?)),
                    )?;
                    let spec = DesignSpec {
                        benchmark,
                        algorithm,
                        design: name.clone(),
                        function: function_name.clone(),
                        source_ref: source_ref.clone(),
                    };
                    ensure_design_in(&tx, &spec)?.id
                }
                Row::ConfigurationSpace { design_id, csd_text, cardinality: card, contributor, created_at, .. } => {
                    let d = parent(&ids, "design", *design_id)?;
                    let csd = parse_csd(csd_text).map_err(|e| fail(last_good, format!("line {}: {e}", n + 1)))?;
                    let expected = cardinality(&csd).map_err(|e| fail(last_good, e.to_string()))?;
                    if expected as i64 != *card {
                        return Err(fail(
                            last_good,
                            format!("line {}: cardinality {card} does not match descriptor ({expected})", n + 1),
                        ));
                    }
                    let dup: i64 = tx.query_row(
                        "SELECT COUNT(*) FROM configuration_space WHERE design_id = ?1 AND csd_text = ?2",
                        params![d, csd_text],
                        |r| r.get(0),
                    )?;
                    if dup > 0 {
                        return Err(fail(last_good, format!("line {}: space already present in this store", n + 1)));
                    }
                    tx.execute(
                        "INSERT INTO configuration_space (design_id, csd_text, cardinality, contributor, created_at)
                         VALUES (?1, ?2, ?3, ?4, ?5)",
                        params![d, csd_text, card, contributor, created_at],
                    )?;
                    let id = tx.last_insert_rowid();
                    report.space_ids.push(id);
                    id
                }
                Row::Configuration { space_id, idx, config_key, key_text, directive_values, .. } => {
                    let s = parent(&ids, "configuration_space", *space_id)?;
                    tx.execute(
                        "INSERT INTO configuration (space_id, idx, config_key, key_text, directive_values)
                         VALUES (?1, ?2, ?3, ?4, ?5)",
                        params![s, idx, config_key, key_text, directive_values],
                    )
                    .map_err(|e| fail(last_good, format!("line {}: {e}", n + 1)))?;
                    tx.last_insert_rowid()
                }
                Row::Implementation { configuration_id, status, diagnostic, .. } => {
                    let c = parent(&ids, "configuration", *configuration_id)?;
                    tx.execute(
                        "INSERT INTO implementation (configuration_id, status, diagnostic) VALUES (?1, ?2, ?3)",
                        params![c, status.as_str(), diagnostic],
                    )?;
                    tx.last_insert_rowid()
                }
                Row::SynthesisInfo {
                    implementation_id,
                    synthesized_at,
                    contributor,
                    tool_name,
                    tool_version,
                    fpga_part,
                    clock_period_ns,
                    duration_s,
                    report_ref,
                    ..
                } => {
                    let i = parent(&ids, "implementation", *implementation_id)?;
                    tx.execute(
                        "INSERT INTO synthesis_info (implementation_id, synthesized_at, contributor, tool_name,
                                                     tool_version, fpga_part, clock_period_ns, duration_s, report_ref)
                         VALUES (?1, ?2, ?3, ?4, ?5, ?6, ?7, ?8, ?9)",
                        params![
                            i,
                            synthesized_at,
                            contributor,
                            tool_name,
                            tool_version,
                            fpga_part,
                            clock_period_ns,
                            duration_s,
                            report_ref
                        ],
                    )
                    .map_err(|e| fail(last_good, format!("line {}: {e}", n + 1)))?;
                    tx.last_insert_rowid()
                }
                Row::Resources { implementation_id, ff, lut, bram, dsp, .. } => {
                    let i = parent(&ids, "implementation", *implementation_id)?;
                    tx.execute(
                        "INSERT INTO resources (implementation_id, ff, lut, bram, dsp) VALUES (?1, ?2, ?3, ?4, ?5)",
                        params![i, ff, lut, bram, dsp],
                    )
                    .map_err(|e| fail(last_good, format!("line {}: {e}", n + 1)))?;
                    tx.last_insert_rowid()
                }
                Row::Performance { implementation_id, latency_cycles, achieved_period_ns, .. } => {
                    let i = parent(&ids, "implementation", *implementation_id)?;
                    tx.execute(
                        "INSERT INTO performance (implementation_id, latency_cycles, achieved_period_ns)
                         VALUES (?1, ?2, ?3)",
                        params![i, latency_cycles, achieved_period_ns],
                    )
                    .map_err(|e| fail(last_good, format!("line {}: {e}", n + 1)))?;
                    tx.last_insert_rowid()
                }
            };
            ids.insert((row.table(), row_id(&row)), new_id);
            *report.rows.entry(row.table().to_string()).or_default() += 1;
            records += 1;
            last_good = Some(records - 1);
        }

        if !seen_trailer {
            return Err(fail(last_good, "stream ended before its trailer (truncated?)".into()));
        }
        check_imported(&tx).map_err(|m| fail(last_good, m))?;
        tx.commit()?;
        Ok(report)
    }
}

fn row_id(row: &Row) -> i64 {
    match row {
        Row::Benchmark { id, .. }
        | Row::Algorithm { id, .. }
        | Row::Design { id, .. }
        | Row::ConfigurationSpace { id, .. }
        | Row::Configuration { id, .. }
        | Row::Implementation { id, .. }
        | Row::SynthesisInfo { id, .. }
        | Row::Resources { id, .. }
        | Row::Performance { id, .. } => *id,
        Row::Header { .. } | Row::Trailer { .. } => 0,
    }
}

/// Post-import consistency: full spaces, provenance on every
/// implementation, no duplicate ok results.
fn check_imported(conn: &Connection) -> std::result::Result<(), String> {
    let q = |sql: &str| conn.query_row(sql, [], |r| r.get::<_, i64>(0)).map_err(|e| e.to_string());
    if q("SELECT COUNT(*) FROM configuration_space s
          WHERE s.cardinality != (SELECT COUNT(*) FROM configuration c WHERE c.space_id = s.id)")?
        > 0
    {
        return Err("a configuration space is missing configuration rows".into());
    }
    if q("SELECT COUNT(*) FROM implementation i
          WHERE NOT EXISTS (SELECT 1 FROM synthesis_info s WHERE s.implementation_id = i.id)")?
        > 0
    {
        return Err("an implementation has no synthesis_info row".into());
    }
    if q("SELECT COUNT(*) FROM (
            SELECT i.configuration_id FROM implementation i JOIN synthesis_info s ON s.implementation_id = i.id
            WHERE i.status = 'ok'
            GROUP BY i.configuration_id, s.tool_name, s.tool_version, s.fpga_part HAVING COUNT(*) > 1)")?
        > 0
    {
        return Err("duplicate ok implementations for one configuration and tool".into());
    }
    Ok(())
}

fn to_json(row: &Row) -> String {
    serde_json::to_string(row).expect("rows serialize")
}

fn sql_insert(row: &Row) -> String {
    let serde_json::Value::Object(map) = serde_json::to_value(row).expect("rows serialize") else {
        unreachable!("rows are objects")
    };
    let mut cols = Vec::new();
    let mut vals = Vec::new();
    for (k, v) in &map {
        if k == "table" {
            continue;
        }
        cols.push(k.as_str());
        vals.push(match v {
            serde_json::Value::Null => "NULL".to_string(),
            serde_json::Value::String(s) => format!("'{}'", s.replace('\'', "''")),
            serde_json::Value::Number(n) => match (n.as_i64(), n.as_f64()) {
                (Some(i), _) => i.to_string(),
                (None, Some(f)) => format!("{f:?}"),
                _ => n.to_string(),
            },
            other => format!("'{}'", other.to_string().replace('\'', "''")),
        });
    }
    format!("INSERT INTO {} ({}) VALUES ({});", row.table(), cols.join(", "), vals.join(", "))
}
