//! Single-file embedded store for roster instances, preference submissions,
//! solve jobs and the append-only history of roster versions.
//!
//! Payloads are kept in the versioned document format of `dutyroster-core`,
//! so every stored record can be exported and re-imported as a document.

use std::path::Path;
use std::sync::Mutex;

use chrono::Utc;
use rusqlite::{params, Connection, OptionalExtension, Transaction, TransactionBehavior};
use serde::{Deserialize, Serialize};

use dutyroster_core::check::{QualityReport, ViolationFinding};
use dutyroster_core::document::{self, DocumentError};
use dutyroster_core::model::caps::{admit, CapBreach};
use dutyroster_core::model::{PhysicianId, PreferenceRecord, PreferenceTarget, RosterInstance};
use dutyroster_core::solver::{RosterSolution, SolveRequest};

/// Bumped whenever the table layout changes.
const STORE_SCHEMA: i64 = 1;

const SCHEMA: &str = "
CREATE TABLE IF NOT EXISTS instances (
    key        TEXT PRIMARY KEY,
    version    INTEGER NOT NULL,
    updated_at TEXT NOT NULL,
    payload    TEXT NOT NULL
);
CREATE TABLE IF NOT EXISTS preferences (
    key        TEXT NOT NULL,
    physician  TEXT NOT NULL,
    slot       TEXT NOT NULL,
    version    INTEGER NOT NULL,
    updated_at TEXT NOT NULL,
    record     TEXT NOT NULL,
    PRIMARY KEY (key, physician, slot)
);
CREATE TABLE IF NOT EXISTS jobs (
    id           INTEGER PRIMARY KEY AUTOINCREMENT,
    key          TEXT NOT NULL,
    request      TEXT NOT NULL,
    snapshot     TEXT NOT NULL,
    state        TEXT NOT NULL,
    result       INTEGER,
    failure      TEXT,
    report       TEXT,
    created_at   TEXT NOT NULL,
    started_at   TEXT,
    finished_at  TEXT
);
CREATE TABLE IF NOT EXISTS roster_versions (
    key        TEXT NOT NULL,
    version    INTEGER NOT NULL,
    status     TEXT NOT NULL,
    author     TEXT NOT NULL,
    created_at TEXT NOT NULL,
    hard       INTEGER NOT NULL,
    payload    TEXT NOT NULL,
    findings   TEXT NOT NULL,
    PRIMARY KEY (key, version)
);
CREATE TABLE IF NOT EXISTS published (
    key     TEXT PRIMARY KEY,
    version INTEGER NOT NULL
);
CREATE TRIGGER IF NOT EXISTS roster_versions_append_only_update
    BEFORE UPDATE ON roster_versions
    BEGIN SELECT RAISE(ABORT, 'roster versions are append-only'); END;
CREATE TRIGGER IF NOT EXISTS roster_versions_append_only_delete
    BEFORE DELETE ON roster_versions
    BEGIN SELECT RAISE(ABORT, 'roster versions are append-only'); END;
";

#[derive(Debug, thiserror::Error)]
pub enum StoreError {
    #[error("version conflict on {what}: expected {expected:?}, found {found:?}")]
    Conflict { what: String, expected: Option<i64>, found: Option<i64> },
    #[error("{0} not found")]
    NotFound(String),
    #[error("{}", .0.message())]
    Cap(CapBreach),
    #[error("cannot publish {key} version {version}: {} hard violations", findings.len())]
    PublishRejected { key: String, version: i64, findings: Vec<ViolationFinding> },
    #[error("job {id}: cannot move from {from:?} to {to:?}")]
    JobState { id: i64, from: JobState, to: JobState },
    #[error("store schema {found} does not match {expected}")]
    Schema { found: i64, expected: i64 },
    #[error("status {0:?} is set by publishing only")]
    Status(RosterStatus),
    #[error(transparent)]
    Document(#[from] DocumentError),
    #[error("encoding: {0}")]
    Json(#[from] serde_json::Error),
    #[error("sqlite: {0}")]
    Sqlite(#[from] rusqlite::Error),
}

pub type Result<T> = std::result::Result<T, StoreError>;

#[derive(Clone, Debug, PartialEq)]
pub struct Stored<T> {
    pub key: String,
    pub version: i64,
    pub updated_at: String,
    pub value: T,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RosterStatus {
    Draft,
    Published,
    Adjusted,
}

impl RosterStatus {
    fn as_str(self) -> &'static str {
        match self {
            RosterStatus::Draft => "draft",
            RosterStatus::Published => "published",
            RosterStatus::Adjusted => "adjusted",
        }
    }

    fn parse(s: &str) -> Option<Self> {
        match s {
            "draft" => Some(RosterStatus::Draft),
            "published" => Some(RosterStatus::Published),
            "adjusted" => Some(RosterStatus::Adjusted),
            _ => None,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RosterVersion {
    pub key: String,
    pub version: i64,
    pub status: RosterStatus,
    pub author: String,
    pub created_at: String,
    pub roster: RosterSolution,
    /// Hard findings recorded when the version was stored.
    pub findings: Vec<ViolationFinding>,
}

impl RosterVersion {
    pub fn hard_violations(&self) -> usize {
        self.findings.len()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum JobState {
    Queued,
    Running,
    Done,
    Failed,
}

impl JobState {
    fn as_str(self) -> &'static str {
        match self {
            JobState::Queued => "queued",
            JobState::Running => "running",
            JobState::Done => "done",
            JobState::Failed => "failed",
        }
    }

    fn parse(s: &str) -> Option<Self> {
        match s {
            "queued" => Some(JobState::Queued),
            "running" => Some(JobState::Running),
            "done" => Some(JobState::Done),
            "failed" => Some(JobState::Failed),
            _ => None,
        }
    }

    fn may_become(self, next: JobState) -> bool {
        matches!(
            (self, next),
            (JobState::Queued, JobState::Running)
                | (JobState::Queued, JobState::Failed)
                | (JobState::Running, JobState::Done)
                | (JobState::Running, JobState::Failed)
        )
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct JobFailure {
    pub stage: String,
    pub message: String,
    /// Clash or validation findings behind the failure, if any.
    #[serde(default)]
    pub findings: Vec<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct JobRecord {
    pub id: i64,
    pub key: String,
    pub request: SolveRequest,
    pub state: JobState,
    /// Roster version written by a finished job.
    pub result: Option<i64>,
    pub failure: Option<JobFailure>,
    pub report: Option<QualityReport>,
    pub created_at: String,
    pub started_at: Option<String>,
    pub finished_at: Option<String>,
}

fn now() -> String {
    Utc::now().to_rfc3339()
}

/// Stable identifier of what a preference refers to.
pub fn preference_slot(target: &PreferenceTarget) -> String {
    match target {
        PreferenceTarget::Instance { instance } => format!("instance:{instance}"),
        PreferenceTarget::Weekly { set, week } => format!("weekly:{set}:{week}"),
    }
}

pub struct Store {
    conn: Mutex<Connection>,
}

impl Store {
    pub fn open(path: impl AsRef<Path>) -> Result<Self> {
        let conn = Connection::open(path)?;
        conn.pragma_update(None, "journal_mode", "WAL")?;
        Self::init(conn)
    }

    pub fn open_in_memory() -> Result<Self> {
        Self::init(Connection::open_in_memory()?)
    }

    fn init(conn: Connection) -> Result<Self> {
        conn.pragma_update(None, "foreign_keys", true)?;
        conn.busy_timeout(std::time::Duration::from_secs(5))?;
        let found: i64 = conn.pragma_query_value(None, "user_version", |r| r.get(0))?;
        if found != 0 && found != STORE_SCHEMA {
            return Err(StoreError::Schema { found, expected: STORE_SCHEMA });
        }
        conn.execute_batch(SCHEMA)?;
        conn.pragma_update(None, "user_version", STORE_SCHEMA)?;
        Ok(Self { conn: Mutex::new(conn) })
    }

    /// Runs `f` inside one immediate transaction; nothing is visible unless it commits.
    fn write<T>(&self, f: impl FnOnce(&Transaction<'_>) -> Result<T>) -> Result<T> {
        let mut conn = self.conn.lock().unwrap_or_else(|e| e.into_inner());
        let tx = conn.transaction_with_behavior(TransactionBehavior::Immediate)?;
        let out = f(&tx)?;
        tx.commit()?;
        Ok(out)
    }

    fn read<T>(&self, f: impl FnOnce(&Connection) -> Result<T>) -> Result<T> {
        let conn = self.conn.lock().unwrap_or_else(|e| e.into_inner());
        f(&conn)
    }

    // instances

    /// Stores `inst` under `key`. `expected` is the version being replaced, or
    /// `None` to create. The instance's preferences replace every submission.
    pub fn put_instance(&self, key: &str, inst: &RosterInstance, expected: Option<i64>) -> Result<i64> {
        self.write(|tx| {
            let found = instance_version(tx, key)?;
            if found != expected {
                return Err(StoreError::Conflict { what: format!("instance {key}"), expected, found });
            }
            let version = found.unwrap_or(0) + 1;
            let mut bare = inst.clone();
            let prefs = std::mem::take(&mut bare.preferences);
            let t = now();
            tx.execute(
                "INSERT INTO instances (key, version, updated_at, payload) VALUES (?1, ?2, ?3, ?4)
                 ON CONFLICT(key) DO UPDATE SET version = ?2, updated_at = ?3, payload = ?4",
                params![key, version, t, document::encode_instance(&bare)],
            )?;
            tx.execute("DELETE FROM preferences WHERE key = ?1", params![key])?;
            for r in &prefs {
                upsert_preference(tx, key, r, 1, &t)?;
            }
            Ok(version)
        })
    }

    /// The instance with all current preference submissions merged in.
    pub fn instance(&self, key: &str) -> Result<Stored<RosterInstance>> {
        self.read(|c| load_instance(c, key))
    }

    pub fn instance_keys(&self) -> Result<Vec<String>> {
        self.read(|c| {
            let mut st = c.prepare("SELECT key FROM instances ORDER BY key")?;
            let keys = st.query_map([], |r| r.get(0))?.collect::<rusqlite::Result<Vec<String>>>()?;
            Ok(keys)
        })
    }

    pub fn export_instance(&self, key: &str) -> Result<String> {
        Ok(document::encode_instance(&self.instance(key)?.value))
    }

    pub fn import_instance(&self, key: &str, text: &str, expected: Option<i64>) -> Result<i64> {
        let inst = document::decode_instance(text)?;
        self.put_instance(key, &inst, expected)
    }

    // preferences

    pub fn preference_version(&self, key: &str, physician: &PhysicianId, target: &PreferenceTarget) -> Result<Option<i64>> {
        self.read(|c| {
            Ok(c.query_row(
                "SELECT version FROM preferences WHERE key = ?1 AND physician = ?2 AND slot = ?3",
                params![key, physician.as_str(), preference_slot(target)],
                |r| r.get(0),
            )
            .optional()?)
        })
    }

    /// Current submissions with their slot versions, in submission order.
    pub fn preferences(&self, key: &str) -> Result<Vec<(PreferenceRecord, i64)>> {
        self.read(|c| {
            instance_version(c, key)?.ok_or_else(|| StoreError::NotFound(format!("instance {key}")))?;
            let mut st = c.prepare("SELECT record, version FROM preferences WHERE key = ?1 ORDER BY rowid")?;
            let rows = st.query_map(params![key], |r| Ok((r.get::<_, String>(0)?, r.get::<_, i64>(1)?)))?;
            let mut out = Vec::new();
            for row in rows {
                let (text, v) = row?;
                out.push((serde_json::from_str(&text)?, v));
            }
            Ok(out)
        })
    }

    /// Records one preference selection after checking the caps. `expected`
    /// is the version of the slot being replaced, or `None` for a new slot.
    pub fn submit_preference(&self, key: &str, record: &PreferenceRecord, expected: Option<i64>) -> Result<i64> {
        self.write(|tx| {
            let inst = load_instance(tx, key)?.value;
            let slot = preference_slot(&record.target);
            let found: Option<i64> = tx
                .query_row(
                    "SELECT version FROM preferences WHERE key = ?1 AND physician = ?2 AND slot = ?3",
                    params![key, record.physician.as_str(), slot],
                    |r| r.get(0),
                )
                .optional()?;
            if found != expected {
                return Err(StoreError::Conflict {
                    what: format!("preference of {} for {slot}", record.physician),
                    expected,
                    found,
                });
            }
            admit(&inst, record).map_err(StoreError::Cap)?;
            let version = found.unwrap_or(0) + 1;
            upsert_preference(tx, key, record, version, &now())?;
            Ok(version)
        })
    }

    // jobs

    /// Queues a solve of the instance as it is now; later edits do not reach the job.
    pub fn create_job(&self, key: &str, request: &SolveRequest) -> Result<JobRecord> {
        let id = self.write(|tx| {
            let snapshot = load_instance(tx, key)?.value;
            tx.execute(
                "INSERT INTO jobs (key, request, snapshot, state, created_at) VALUES (?1, ?2, ?3, 'queued', ?4)",
                params![key, serde_json::to_string(request)?, document::encode_instance(&snapshot), now()],
            )?;
            Ok(tx.last_insert_rowid())
        })?;
        self.job(id)
    }

    pub fn job(&self, id: i64) -> Result<JobRecord> {
        self.read(|c| load_job(c, id))
    }

    pub fn jobs(&self, key: &str) -> Result<Vec<JobRecord>> {
        self.read(|c| {
            let mut st = c.prepare("SELECT id FROM jobs WHERE key = ?1 ORDER BY id")?;
            let ids = st.query_map(params![key], |r| r.get(0))?.collect::<rusqlite::Result<Vec<i64>>>()?;
            ids.into_iter().map(|id| load_job(c, id)).collect()
        })
    }

    pub fn job_snapshot(&self, id: i64) -> Result<RosterInstance> {
        self.read(|c| {
            let text: String = c
                .query_row("SELECT snapshot FROM jobs WHERE id = ?1", params![id], |r| r.get(0))
                .optional()?
                .ok_or_else(|| StoreError::NotFound(format!("job {id}")))?;
            Ok(document::decode_instance(&text)?)
        })
    }

    fn move_job(&self, id: i64, to: JobState, f: impl FnOnce(&Transaction<'_>) -> Result<()>) -> Result<JobRecord> {
        self.write(|tx| {
            let from = load_job(tx, id)?.state;
            if !from.may_become(to) {
                return Err(StoreError::JobState { id, from, to });
            }
            let column = if to == JobState::Running { "started_at" } else { "finished_at" };
            tx.execute(
                &format!("UPDATE jobs SET state = ?1, {column} = ?2 WHERE id = ?3"),
                params![to.as_str(), now(), id],
            )?;
            f(tx)
        })?;
        self.job(id)
    }

    pub fn start_job(&self, id: i64) -> Result<JobRecord> {
        self.move_job(id, JobState::Running, |_| Ok(()))
    }

    /// Stores the roster as a draft version and marks the job done, atomically.
    pub fn finish_job(
        &self,
        id: i64,
        roster: &RosterSolution,
        findings: &[ViolationFinding],
        report: &QualityReport,
    ) -> Result<JobRecord> {
        let key = self.job(id)?.key;
        self.move_job(id, JobState::Done, |tx| {
            let v = append_version(tx, &key, RosterStatus::Draft, "solver", roster, findings)?;
            tx.execute(
                "UPDATE jobs SET result = ?1, report = ?2 WHERE id = ?3",
                params![v, document::encode_report(report), id],
            )?;
            Ok(())
        })
    }

    pub fn fail_job(&self, id: i64, failure: &JobFailure) -> Result<JobRecord> {
        let text = serde_json::to_string(failure)?;
        self.move_job(id, JobState::Failed, |tx| {
            tx.execute("UPDATE jobs SET failure = ?1 WHERE id = ?2", params![text, id])?;
            Ok(())
        })
    }

    // roster versions

    /// Appends a draft or adjusted version; publishing goes through [`Store::publish`].
    pub fn save_roster(
        &self,
        key: &str,
        status: RosterStatus,
        author: &str,
        roster: &RosterSolution,
        findings: &[ViolationFinding],
    ) -> Result<i64> {
        if status == RosterStatus::Published {
            return Err(StoreError::Status(status));
        }
        self.write(|tx| append_version(tx, key, status, author, roster, findings))
    }

    pub fn roster_version(&self, key: &str, version: i64) -> Result<RosterVersion> {
        self.read(|c| load_version(c, key, version))
    }

    pub fn roster_versions(&self, key: &str) -> Result<Vec<RosterVersion>> {
        self.read(|c| {
            let mut st = c.prepare("SELECT version FROM roster_versions WHERE key = ?1 ORDER BY version")?;
            let vs = st.query_map(params![key], |r| r.get(0))?.collect::<rusqlite::Result<Vec<i64>>>()?;
            vs.into_iter().map(|v| load_version(c, key, v)).collect()
        })
    }

    pub fn latest_roster(&self, key: &str) -> Result<Option<RosterVersion>> {
        Ok(self.roster_versions(key)?.pop())
    }

    /// The one published version of `key`, if any.
    pub fn published(&self, key: &str) -> Result<Option<RosterVersion>> {
        self.read(|c| {
            let v: Option<i64> =
                c.query_row("SELECT version FROM published WHERE key = ?1", params![key], |r| r.get(0)).optional()?;
            v.map(|v| load_version(c, key, v)).transpose()
        })
    }

    /// Publishes `version` as a new version; rejected while it has hard findings.
    pub fn publish(&self, key: &str, version: i64, author: &str) -> Result<RosterVersion> {
        let v = self.write(|tx| {
            let src = load_version(tx, key, version)?;
            if !src.findings.is_empty() {
                return Err(StoreError::PublishRejected { key: key.to_owned(), version, findings: src.findings });
            }
            let v = append_version(tx, key, RosterStatus::Published, author, &src.roster, &[])?;
            tx.execute(
                "INSERT INTO published (key, version) VALUES (?1, ?2) ON CONFLICT(key) DO UPDATE SET version = ?2",
                params![key, v],
            )?;
            Ok(v)
        })?;
        self.roster_version(key, v)
    }

    pub fn export_roster(&self, key: &str, version: i64) -> Result<String> {
        Ok(document::encode_roster(&self.roster_version(key, version)?.roster))
    }
}

fn instance_version(c: &Connection, key: &str) -> Result<Option<i64>> {
    Ok(c.query_row("SELECT version FROM instances WHERE key = ?1", params![key], |r| r.get(0)).optional()?)
}

fn upsert_preference(tx: &Transaction<'_>, key: &str, r: &PreferenceRecord, version: i64, t: &str) -> Result<()> {
    tx.execute(
        "INSERT INTO preferences (key, physician, slot, version, updated_at, record) VALUES (?1, ?2, ?3, ?4, ?5, ?6)
         ON CONFLICT(key, physician, slot) DO UPDATE SET version = ?4, updated_at = ?5, record = ?6",
        params![key, r.physician.as_str(), preference_slot(&r.target), version, t, serde_json::to_string(r)?],
    )?;
    Ok(())
}

fn load_instance(c: &Connection, key: &str) -> Result<Stored<RosterInstance>> {
    let (version, updated_at, payload): (i64, String, String) = c
        .query_row("SELECT version, updated_at, payload FROM instances WHERE key = ?1", params![key], |r| {
            Ok((r.get(0)?, r.get(1)?, r.get(2)?))
        })
        .optional()?
        .ok_or_else(|| StoreError::NotFound(format!("instance {key}")))?;
    let mut value = document::decode_instance(&payload)?;
    let mut st = c.prepare("SELECT record FROM preferences WHERE key = ?1 ORDER BY rowid")?;
    let records = st.query_map(params![key], |r| r.get::<_, String>(0))?;
    for text in records {
        value.preferences.push(serde_json::from_str(&text?)?);
    }
    Ok(Stored { key: key.to_owned(), version, updated_at, value })
}

fn load_job(c: &Connection, id: i64) -> Result<JobRecord> {
    type Row = (String, String, String, Option<i64>, Option<String>, Option<String>, String, Option<String>, Option<String>);
    let row: Option<Row> = c
        .query_row(
            "SELECT key, request, state, result, failure, report, created_at, started_at, finished_at
             FROM jobs WHERE id = ?1",
            params![id],
            |r| Ok((r.get(0)?, r.get(1)?, r.get(2)?, r.get(3)?, r.get(4)?, r.get(5)?, r.get(6)?, r.get(7)?, r.get(8)?)),
        )
        .optional()?;
    let (key, request, state, result, failure, report, created_at, started_at, finished_at) =
        row.ok_or_else(|| StoreError::NotFound(format!("job {id}")))?;
    Ok(JobRecord {
        id,
        key,
        request: serde_json::from_str(&request)?,
        state: JobState::parse(&state).ok_or_else(|| StoreError::NotFound(format!("job state {state}")))?,
        result,
        failure: failure.map(|f| serde_json::from_str(&f)).transpose()?,
        report: report.map(|r| document::decode_report(&r)).transpose()?,
        created_at,
        started_at,
        finished_at,
    })
}

fn append_version(
    tx: &Transaction<'_>,
    key: &str,
    status: RosterStatus,
    author: &str,
    roster: &RosterSolution,
    findings: &[ViolationFinding],
) -> Result<i64> {
    let last: Option<i64> =
        tx.query_row("SELECT MAX(version) FROM roster_versions WHERE key = ?1", params![key], |r| r.get(0))?;
    let v = last.unwrap_or(0) + 1;
    tx.execute(
        "INSERT INTO roster_versions (key, version, status, author, created_at, hard, payload, findings)
         VALUES (?1, ?2, ?3, ?4, ?5, ?6, ?7, ?8)",
        params![
            key,
            v,
            status.as_str(),
            author,
            now(),
            findings.len() as i64,
            document::encode_roster(roster),
            document::encode_findings(findings),
        ],
    )?;
    Ok(v)
}

fn load_version(c: &Connection, key: &str, version: i64) -> Result<RosterVersion> {
    let row: Option<(String, String, String, String, String)> = c
        .query_row(
            "SELECT status, author, created_at, payload, findings FROM roster_versions WHERE key = ?1 AND version = ?2",
            params![key, version],
            |r| Ok((r.get(0)?, r.get(1)?, r.get(2)?, r.get(3)?, r.get(4)?)),
        )
        .optional()?;
    let (status, author, created_at, payload, findings) =
        row.ok_or_else(|| StoreError::NotFound(format!("roster {key} version {version}")))?;
    Ok(RosterVersion {
        key: key.to_owned(),
        version,
        status: RosterStatus::parse(&status).ok_or_else(|| StoreError::NotFound(format!("status {status}")))?,
        author,
        created_at,
        roster: document::decode_roster(&payload)?,
        findings: document::decode_findings(&findings)?,
    })
}
