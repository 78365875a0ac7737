//! Line-delimited JSON run store.
//!
//! Each line is one [`RunRecord`] object with the fields `run_id`,
//! `prompt`, `direction_key`, `current_endpoint` (1-based id or null),
//! `endpoints` (M of the zoo the batch ran against), `raw_reply`, `mask`
//! (normalized bits as space-separated 0/1), `fail_flag`, `label`
//! (ZERO, ONE, CASE_S or ALL), `timestamp` (Unix seconds) and `agent_tag`.

use std::collections::HashSet;
use std::fs::{File, OpenOptions};
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;
use std::time::{SystemTime, UNIX_EPOCH};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::postcond::{classify, process_mask, render_bits, Label, OutputMask, Postcondition};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunRecord {
    pub run_id: String,
    pub prompt: String,
    pub direction_key: String,
    pub current_endpoint: Option<usize>,
    pub endpoints: usize,
    pub raw_reply: String,
    pub mask: String,
    pub fail_flag: bool,
    pub label: Label,
    pub timestamp: u64,
    pub agent_tag: String,
}

/// Fields of a run known before processing the reply.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Interaction {
    pub run_id: String,
    pub prompt: String,
    pub direction_key: String,
    pub current_endpoint: Option<usize>,
    pub agent_tag: String,
    pub timestamp: u64,
}

impl RunRecord {
    /// Normalizes `raw_reply` against `m` endpoints and labels it.
    pub fn new(interaction: Interaction, raw_reply: String, m: usize) -> Self {
        let mask = process_mask(&raw_reply, m);
        let post = classify(&mask);
        RunRecord {
            run_id: interaction.run_id,
            prompt: interaction.prompt,
            direction_key: interaction.direction_key,
            current_endpoint: interaction.current_endpoint,
            endpoints: m,
            raw_reply,
            mask: render_bits(&mask.bits),
            fail_flag: mask.fail_flag,
            label: post.label,
            timestamp: interaction.timestamp,
            agent_tag: interaction.agent_tag,
        }
    }

    /// Stored mask bits; non-binary characters read as 0.
    pub fn bits(&self) -> Vec<bool> {
        self.mask.split_whitespace().map(|t| t == "1").collect()
    }

    pub fn output_mask(&self) -> OutputMask {
        let mut mask = OutputMask::from_bits(self.bits());
        mask.fail_flag = self.fail_flag;
        mask
    }

    pub fn postcondition(&self) -> Postcondition {
        Postcondition {
            label: self.label,
            fail_flag: self.fail_flag,
        }
    }

    /// Differences between the stored mask and a fresh normalization.
    pub fn verify(&self) -> Option<String> {
        let fresh = process_mask(&self.raw_reply, self.endpoints);
        let mut issues = Vec::new();
        if render_bits(&fresh.bits) != self.mask {
            issues.push("mask differs from normalized reply");
        }
        if fresh.fail_flag != self.fail_flag {
            issues.push("fail_flag differs from normalized reply");
        }
        if classify(&fresh).label != self.label {
            issues.push("label differs from normalized reply");
        }
        (!issues.is_empty()).then(|| issues.join("; "))
    }
}

pub fn unix_now() -> u64 {
    SystemTime::now()
        .duration_since(UNIX_EPOCH)
        .map_or(0, |d| d.as_secs())
}

#[derive(Debug, Error)]
pub enum StoreError {
    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("line {line}: record is for {found} endpoints, zoo has {expected}")]
    Integrity { line: usize, expected: usize, found: usize },
}

/// A record that loaded but failed verification.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IntegrityFlag {
    pub line: usize,
    pub run_id: String,
    pub reason: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct LoadedRuns {
    pub records: Vec<RunRecord>,
    pub flags: Vec<IntegrityFlag>,
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> StoreError + '_ {
    move |source| StoreError::Io {
        path: path.display().to_string(),
        source,
    }
}

fn write_records<W: Write>(mut w: W, records: &[RunRecord]) -> std::io::Result<()> {
    for r in records {
        serde_json::to_writer(&mut w, r)?;
        w.write_all(b"\n")?;
    }
    w.flush()
}

/// Writes `records` to `path`, replacing any existing file.
pub fn store_runs(path: &Path, records: &[RunRecord]) -> Result<(), StoreError> {
    let file = File::create(path).map_err(io_err(path))?;
    write_records(BufWriter::new(file), records).map_err(io_err(path))
}

/// Appends to `path`, creating it if needed.
pub fn append_runs(path: &Path, records: &[RunRecord]) -> Result<(), StoreError> {
    let file = OpenOptions::new()
        .create(true)
        .append(true)
        .open(path)
        .map_err(io_err(path))?;
    write_records(BufWriter::new(file), records).map_err(io_err(path))
}

/// Parses a store. Every record must be for `m` endpoints; records whose
/// stored mask disagrees with their reply, and repeated run ids, are
/// flagged rather than rejected.
pub fn read_runs<R: BufRead>(reader: R, m: usize) -> Result<LoadedRuns, StoreError> {
    let mut out = LoadedRuns::default();
    let mut seen = HashSet::new();
    for (i, line) in reader.lines().enumerate() {
        let line_no = i + 1;
        let line = line.map_err(|e| StoreError::Parse {
            line: line_no,
            message: e.to_string(),
        })?;
        if line.trim().is_empty() {
            continue;
        }
        let record: RunRecord = serde_json::from_str(&line).map_err(|e| StoreError::Parse {
            line: line_no,
            message: e.to_string(),
        })?;
        if record.endpoints != m {
            return Err(StoreError::Integrity {
                line: line_no,
                expected: m,
                found: record.endpoints,
            });
        }
        let mut reasons = Vec::new();
        if let Some(reason) = record.verify() {
            reasons.push(reason);
        }
        if !seen.insert(record.run_id.clone()) {
            reasons.push("duplicate run_id".to_string());
        }
        if !reasons.is_empty() {
            out.flags.push(IntegrityFlag {
                line: line_no,
                run_id: record.run_id.clone(),
                reason: reasons.join("; "),
            });
        }
        out.records.push(record);
    }
    Ok(out)
}

pub fn load_runs(path: &Path, m: usize) -> Result<LoadedRuns, StoreError> {
    let file = File::open(path).map_err(io_err(path))?;
    read_runs(BufReader::new(file), m)
}
