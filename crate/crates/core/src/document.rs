//! Exchange documents: JSON with a mandatory schema version and a kind tag.

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::check::{QualityReport, ViolationFinding};
use crate::derive::DerivedSets;
use crate::model::RosterInstance;
use crate::solver::RosterSolution;

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DocumentKind {
    Instance,
    Roster,
    Report,
    Findings,
    Derived,
}

#[derive(Debug, thiserror::Error)]
pub enum DocumentError {
    #[error("malformed document: {0}")]
    Malformed(#[from] serde_json::Error),
    #[error("document lacks a schema_version")]
    MissingVersion,
    #[error("schema version {found} is not supported (expected {SCHEMA_VERSION})")]
    Version { found: u64 },
    #[error("expected a {expected:?} document, found {found:?}")]
    Kind { expected: DocumentKind, found: DocumentKind },
}

#[derive(Serialize)]
struct Out<'a, T> {
    schema_version: u32,
    kind: DocumentKind,
    payload: &'a T,
}

#[derive(Deserialize)]
struct Header {
    schema_version: Option<u64>,
    kind: DocumentKind,
}

#[derive(Deserialize)]
struct In<T> {
    payload: T,
}

pub fn encode<T: Serialize>(kind: DocumentKind, payload: &T) -> String {
    let doc = Out { schema_version: SCHEMA_VERSION, kind, payload };
    let mut s = serde_json::to_string_pretty(&doc).expect("documents serialise");
    s.push('\n');
    s
}

pub fn decode<T: DeserializeOwned>(kind: DocumentKind, text: &str) -> Result<T, DocumentError> {
    let header: Header = serde_json::from_str(text)?;
    match header.schema_version {
        None => return Err(DocumentError::MissingVersion),
        Some(v) if v != u64::from(SCHEMA_VERSION) => return Err(DocumentError::Version { found: v }),
        Some(_) => {}
    }
    if header.kind != kind {
        return Err(DocumentError::Kind { expected: kind, found: header.kind });
    }
    let doc: In<T> = serde_json::from_str(text)?;
    Ok(doc.payload)
}

pub fn encode_instance(inst: &RosterInstance) -> String {
    encode(DocumentKind::Instance, inst)
}

pub fn decode_instance(text: &str) -> Result<RosterInstance, DocumentError> {
    decode(DocumentKind::Instance, text)
}

pub fn encode_roster(roster: &RosterSolution) -> String {
    encode(DocumentKind::Roster, roster)
}

pub fn decode_roster(text: &str) -> Result<RosterSolution, DocumentError> {
    decode(DocumentKind::Roster, text)
}

pub fn encode_report(report: &QualityReport) -> String {
    encode(DocumentKind::Report, report)
}

pub fn decode_report(text: &str) -> Result<QualityReport, DocumentError> {
    decode(DocumentKind::Report, text)
}

pub fn encode_findings(findings: &[ViolationFinding]) -> String {
    encode(DocumentKind::Findings, &findings)
}

pub fn decode_findings(text: &str) -> Result<Vec<ViolationFinding>, DocumentError> {
    decode(DocumentKind::Findings, text)
}

pub fn encode_derived(der: &DerivedSets) -> String {
    encode(DocumentKind::Derived, der)
}

pub fn decode_derived(text: &str) -> Result<DerivedSets, DocumentError> {
    decode(DocumentKind::Derived, text)
}
